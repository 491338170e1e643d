use std::collections::{BTreeMap, BTreeSet};

use super::GroundAba;
use crate::error::Result;
use crate::model::{AbaFramework, Atom};

/// A claim with a minimal assumption support and one witnessing rule set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Argument {
    pub claim: Atom,
    pub support: BTreeSet<Atom>,
    /// Indices into the framework's rules; implicit `dom` facts are omitted.
    pub rules_used: BTreeSet<usize>,
}

/// Claim to its minimal supports, each with a witnessing rule set.
pub type Supports = BTreeMap<Atom, BTreeMap<BTreeSet<Atom>, BTreeSet<usize>>>;

type Table = Vec<BTreeMap<BTreeSet<usize>, BTreeSet<usize>>>;

fn insert_minimal(
    slot: &mut BTreeMap<BTreeSet<usize>, BTreeSet<usize>>,
    support: BTreeSet<usize>,
    rules: BTreeSet<usize>,
) -> bool {
    if slot.keys().any(|s| s.is_subset(&support)) {
        return false;
    }
    slot.retain(|s, _| !support.is_subset(s));
    slot.insert(support, rules);
    true
}

fn support_table(g: &GroundAba) -> Table {
    let mut table: Table = vec![BTreeMap::new(); g.atoms.len()];
    for &a in &g.assumptions {
        table[a].insert([a].into_iter().collect(), BTreeSet::new());
    }
    loop {
        let mut changed = false;
        for (h, body, label) in &g.rules {
            // Cross product of the body atoms' supports.
            let mut combos: Vec<(BTreeSet<usize>, BTreeSet<usize>)> =
                vec![(BTreeSet::new(), label.iter().copied().collect())];
            for b in body {
                let mut next = Vec::new();
                for (s, r) in &combos {
                    for (bs, br) in &table[*b] {
                        next.push((
                            s.union(bs).copied().collect(),
                            r.union(br).copied().collect(),
                        ));
                    }
                }
                combos = next;
                if combos.is_empty() {
                    break;
                }
            }
            for (s, r) in combos {
                changed |= insert_minimal(&mut table[*h], s, r);
            }
        }
        if !changed {
            return table;
        }
    }
}

/// Minimal assumption supports of every derivable ground sentence.
pub fn supports(fw: &AbaFramework) -> Result<Supports> {
    let g = GroundAba::new(fw, &BTreeSet::new(), usize::MAX)?;
    let table = support_table(&g);
    let mut out = Supports::new();
    for (i, slot) in table.into_iter().enumerate() {
        if slot.is_empty() {
            continue;
        }
        let entry = out.entry(g.atoms[i].clone()).or_default();
        for (s, r) in slot {
            entry.insert(s.into_iter().map(|k| g.atoms[k].clone()).collect(), r);
        }
    }
    Ok(out)
}

/// One argument per (claim, minimal support) pair.
pub fn arguments(fw: &AbaFramework) -> Result<Vec<Argument>> {
    Ok(supports(fw)?
        .into_iter()
        .flat_map(|(claim, slot)| {
            slot.into_iter().map(move |(support, rules_used)| Argument {
                claim: claim.clone(),
                support,
                rules_used,
            })
        })
        .collect())
}

/// Sentence sets of the stable argument extensions, by exhaustive search over
/// argument sets: conflict-free and attacking every argument left out.
/// Returns `None` when there are more than `max_args` arguments.
pub fn argument_extensions(
    fw: &AbaFramework,
    max_args: usize,
) -> Result<Option<Vec<BTreeSet<Atom>>>> {
    let args = arguments(fw)?;
    let n = args.len();
    if n > max_args || n >= usize::BITS as usize {
        return Ok(None);
    }
    // attacks[i] has bit j set when argument i attacks argument j.
    let attacks: Vec<u64> = args
        .iter()
        .map(|x| {
            let mut bits = 0u64;
            for (j, y) in args.iter().enumerate() {
                if y.support
                    .iter()
                    .any(|a| fw.contrary(a).as_ref() == Some(&x.claim))
                {
                    bits |= 1 << j;
                }
            }
            bits
        })
        .collect();
    let all: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut out = BTreeSet::new();
    for set in 0..=all {
        let mut attacked = 0u64;
        for (i, a) in attacks.iter().enumerate() {
            if set & (1 << i) != 0 {
                attacked |= a;
            }
        }
        if attacked & set == 0 && attacked | set == all {
            let claims: BTreeSet<Atom> = (0..n)
                .filter(|i| set & (1 << i) != 0)
                .map(|i| args[i].claim.clone())
                .collect();
            out.insert(claims);
        }
    }
    Ok(Some(out.into_iter().collect()))
}

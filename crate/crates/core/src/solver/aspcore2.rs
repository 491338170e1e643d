use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use super::{AspProgram, AspRule, RuleKind};
use crate::error::Result;
use crate::model::{Atom, Equality, Term, DOM};
use crate::syntax::lexer::{Cursor, Tok};
use crate::syntax::{parse_atom, parse_term};

pub(crate) fn write_rule(f: &mut dyn fmt::Write, rule: &AspRule) -> fmt::Result {
    match (&rule.kind, &rule.head) {
        (RuleKind::Choice, Some(h)) => write!(f, "{{{h}}}")?,
        (_, Some(h)) => write!(f, "{h}")?,
        (_, None) => {}
    }
    let mut body: Vec<String> = rule.positive.iter().map(ToString::to_string).collect();
    body.extend(rule.negative.iter().map(|a| format!("not {a}")));
    body.extend(rule.equalities.iter().map(ToString::to_string));
    if !body.is_empty() || rule.head.is_none() {
        if rule.head.is_some() {
            f.write_str(" ")?;
        }
        write!(f, ":- {}", body.join(", "))?;
    }
    f.write_str(".")
}

/// Serialises a program in ASP-Core-2 syntax. `dom` facts are written
/// explicitly when the program relies on them being synthesised.
pub fn emit_aspcore2(program: &AspProgram) -> String {
    let mut out = String::new();
    for rule in &program.rules {
        write_rule(&mut out, rule).expect("writing to a string");
        out.push('\n');
    }
    if program.synthesize_dom {
        for c in &program.universe {
            let _ = writeln!(out, "{DOM}({c}).");
        }
    }
    if !program.minimize.is_empty() {
        // The predicate name is part of each tuple so that equal argument
        // tuples of different predicates are counted separately.
        let elems: Vec<String> = program
            .minimize
            .iter()
            .map(|m| {
                let mut terms = vec!["1".to_string(), m.pred.to_string()];
                terms.extend(m.args.iter().map(ToString::to_string));
                format!("{} : {m}", terms.join(","))
            })
            .collect();
        let _ = writeln!(out, "#minimize {{ {} }}.", elems.join("; "));
    }
    out
}

enum Lit {
    Pos(Atom),
    Neg(Atom),
    Eq(Equality),
}

fn parse_body(cur: &mut Cursor) -> Result<Vec<Lit>> {
    let mut out = Vec::new();
    if cur.eat(&Tok::Dot) {
        return Ok(out);
    }
    loop {
        if cur.eat(&Tok::Not) {
            out.push(Lit::Neg(parse_atom(cur)?));
        } else if matches!(cur.peek_at(1), Some(Tok::Eq)) {
            let l = parse_term(cur)?;
            cur.expect(&Tok::Eq, "`=`")?;
            let r = parse_term(cur)?;
            out.push(Lit::Eq(Equality::new(l, r)));
        } else {
            out.push(Lit::Pos(parse_atom(cur)?));
        }
        if cur.eat(&Tok::Dot) {
            return Ok(out);
        }
        cur.expect(&Tok::Comma, "`,` or `.`")?;
    }
}

fn split(body: Vec<Lit>) -> (Vec<Atom>, Vec<Atom>, Vec<Equality>) {
    let (mut pos, mut neg, mut eqs) = (vec![], vec![], vec![]);
    for l in body {
        match l {
            Lit::Pos(a) => pos.push(a),
            Lit::Neg(a) => neg.push(a),
            Lit::Eq(e) => eqs.push(e),
        }
    }
    (pos, neg, eqs)
}

fn rule_body(cur: &mut Cursor) -> Result<(Vec<Atom>, Vec<Atom>, Vec<Equality>)> {
    if cur.eat(&Tok::Dot) {
        return Ok((vec![], vec![], vec![]));
    }
    cur.expect(&Tok::If, "`:-` or `.`")?;
    Ok(split(parse_body(cur)?))
}

fn parse_minimize(cur: &mut Cursor, out: &mut Vec<Atom>) -> Result<()> {
    cur.expect(&Tok::LBrace, "`{`")?;
    loop {
        // Weight and tuple terms are ignored; each element counts once.
        while !matches!(cur.peek(), Some(Tok::Colon) | None) {
            cur.next();
        }
        cur.expect(&Tok::Colon, "`:`")?;
        out.push(parse_atom(cur)?);
        if cur.eat(&Tok::RBrace) {
            break;
        }
        cur.expect(&Tok::Semi, "`;` or `}`")?;
    }
    cur.expect(&Tok::Dot, "`.`")
}

/// Reads the ASP-Core-2 fragment produced by [`emit_aspcore2`].
pub fn parse_aspcore2(text: &str) -> Result<AspProgram> {
    let mut cur = Cursor::new(text)?;
    let mut program = AspProgram::new(BTreeSet::new());
    program.synthesize_dom = false;
    while !cur.at_end() {
        match cur.peek().cloned() {
            Some(Tok::Directive(d)) if d == "minimize" => {
                cur.next();
                parse_minimize(&mut cur, &mut program.minimize)?;
            }
            Some(Tok::Directive(d)) => {
                return Err(cur.error(format!("unsupported directive `#{d}`")))
            }
            Some(Tok::LBrace) => {
                cur.next();
                let mut heads = vec![parse_atom(&mut cur)?];
                while cur.eat(&Tok::Semi) {
                    heads.push(parse_atom(&mut cur)?);
                }
                cur.expect(&Tok::RBrace, "`}`")?;
                let (pos, neg, eqs) = rule_body(&mut cur)?;
                for h in heads {
                    let mut r = AspRule::choice(h, pos.clone()).with_equalities(eqs.clone());
                    r.negative = neg.clone();
                    program.push(r);
                }
            }
            Some(Tok::If) => {
                cur.next();
                let (pos, neg, eqs) = split(parse_body(&mut cur)?);
                program.push(AspRule::constraint(pos, neg).with_equalities(eqs));
            }
            _ => {
                let head = parse_atom(&mut cur)?;
                let (pos, neg, eqs) = rule_body(&mut cur)?;
                program.push(AspRule::normal(head, pos, neg).with_equalities(eqs));
            }
        }
    }
    for r in &program.rules {
        let atoms = r.head.iter().chain(&r.positive).chain(&r.negative);
        for t in atoms.flat_map(|a| a.args.iter()) {
            if let Term::Const(c) = t {
                program.universe.insert(c.clone());
            }
        }
        for e in &r.equalities {
            program.universe.extend(e.constant().cloned());
        }
    }
    for m in &program.minimize {
        program.universe.extend(m.constants().cloned());
    }
    Ok(program)
}

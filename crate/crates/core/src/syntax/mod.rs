//! Concrete syntax: the `.aba` problem format and a lexer shared with the
//! ASP text reader.

pub(crate) mod lexer;
mod parser;
mod printer;

pub use parser::{parse_framework, parse_problem};
pub use printer::{print_framework, print_problem};

use crate::error::Result;
use crate::model::{Atom, Term};
use lexer::{Cursor, Tok};

pub(crate) fn parse_term(cur: &mut Cursor) -> Result<Term> {
    match cur.peek().cloned() {
        Some(Tok::Ident(name)) => {
            cur.next();
            Ok(Term::constant(&name))
        }
        Some(Tok::Var(name)) => {
            if name.trim_start_matches('_').is_empty() {
                return Err(cur.error("anonymous variables are not supported".into()));
            }
            cur.next();
            Ok(Term::var(&name))
        }
        _ => Err(cur.error("expected a term".into())),
    }
}

pub(crate) fn parse_atom(cur: &mut Cursor) -> Result<Atom> {
    let pred = match cur.peek().cloned() {
        Some(Tok::Ident(name)) if !name.starts_with(|c: char| c.is_ascii_digit()) => {
            cur.next();
            name
        }
        _ => return Err(cur.error("expected a predicate name".into())),
    };
    let mut args = Vec::new();
    if cur.eat(&Tok::LParen) {
        loop {
            args.push(parse_term(cur)?);
            if cur.eat(&Tok::RParen) {
                break;
            }
            cur.expect(&Tok::Comma, "`,` or `)`")?;
        }
    }
    Ok(Atom::new(&pred, args))
}

/// Parses whitespace-separated ground atoms, as printed by ASP solvers.
pub fn parse_ground_atoms(line: &str) -> Result<Vec<Atom>> {
    let mut cur = Cursor::new(line)?;
    let mut out = Vec::new();
    while !cur.at_end() {
        let a = parse_atom(&mut cur)?;
        if !a.is_ground() {
            return Err(cur.error(format!("atom `{a}` is not ground")));
        }
        out.push(a);
    }
    Ok(out)
}

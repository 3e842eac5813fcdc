//! Predicates, ground atoms and states, with their textual form
//! `name(arg,...)`. Variables are written `?x`; constants are bare identifiers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Variable name (without the leading `?`) to constant.
pub type Binding = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => f.write_str(c),
            Term::Var(v) => write!(f, "?{v}"),
        }
    }
}

/// A possibly non-ground predicate, as written in rule preconditions and effects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub name: String,
    pub args: Vec<Term>,
}

impl Predicate {
    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::var)
    }

    /// Substitute `binding`; `None` if some variable is unbound.
    pub fn ground(&self, binding: &Binding) -> Option<Atom> {
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(v) => binding.get(v).cloned(),
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Atom {
            name: self.name.clone(),
            args,
        })
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut preds = parse_predicates(s)?;
        match preds.len() {
            1 => Ok(preds.pop().unwrap()),
            0 => Err(Error::parse(s, "empty predicate")),
            _ => Err(Error::parse(s, "expected a single predicate")),
        }
    }
}

/// A ground predicate. Ordering is lexicographic by `(name, args)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub name: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new<S: Into<String>>(name: &str, args: impl IntoIterator<Item = S>) -> Self {
        Atom {
            name: name.to_string(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for Atom {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p: Predicate = s.parse()?;
        ground_only(&p, s)
    }
}

fn ground_only(p: &Predicate, src: &str) -> Result<Atom> {
    p.ground(&Binding::new())
        .ok_or_else(|| Error::parse(src, "state predicates must be ground"))
}

/// A set of ground atoms. Its `Display` form is canonical: atoms in sorted
/// order separated by single spaces.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(BTreeSet<Atom>);

impl State {
    pub fn new() -> Self {
        State::default()
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.0
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.0.insert(atom)
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.0.remove(atom)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn is_superset(&self, other: &State) -> bool {
        self.0.is_superset(&other.0)
    }

    pub fn intersection_len(&self, other: &State) -> usize {
        self.0.intersection(&other.0).count()
    }

    pub fn union_len(&self, other: &State) -> usize {
        self.0.len() + other.0.len() - self.intersection_len(other)
    }

    /// Every constant mentioned by some atom, sorted.
    pub fn constants(&self) -> BTreeSet<&str> {
        self.0
            .iter()
            .flat_map(|a| a.args.iter().map(String::as_str))
            .collect()
    }

    /// Parse a list of predicate strings, e.g. from a JSON file.
    pub fn from_strings<S: AsRef<str>>(items: &[S]) -> Result<Self> {
        items.iter().map(|s| s.as_ref().parse::<Atom>()).collect()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }
}

impl FromIterator<Atom> for State {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        State(iter.into_iter().collect())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_predicates(s)?
            .iter()
            .map(|p| ground_only(p, s))
            .collect()
    }
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(deserializer)?;
        State::from_strings(&items).map_err(serde::de::Error::custom)
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

/// Parse whitespace- or comma-separated predicates: `a(x,?y) b c(d)`.
pub fn parse_predicates(src: &str) -> Result<Vec<Predicate>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    let err = |reason: String| Error::parse(src, reason);

    let read_ident = |chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>| {
        let mut id = String::new();
        while let Some(&(_, c)) = chars.peek() {
            if is_ident_char(c) {
                id.push(c);
                chars.next();
            } else {
                break;
            }
        }
        id
    };
    let skip_ws = |chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>| {
        while chars.peek().is_some_and(|&(_, c)| c.is_whitespace()) {
            chars.next();
        }
    };

    loop {
        while chars
            .peek()
            .is_some_and(|&(_, c)| c.is_whitespace() || c == ',')
        {
            chars.next();
        }
        let Some(&(pos, _)) = chars.peek() else { break };
        let name = read_ident(&mut chars);
        if name.is_empty() {
            return Err(err(format!("expected predicate name at offset {pos}")));
        }
        let mut args = Vec::new();
        if chars.peek().is_some_and(|&(_, c)| c == '(') {
            chars.next();
            skip_ws(&mut chars);
            if chars.peek().is_some_and(|&(_, c)| c == ')') {
                chars.next();
            } else {
                loop {
                    skip_ws(&mut chars);
                    let is_var = chars.peek().is_some_and(|&(_, c)| c == '?');
                    if is_var {
                        chars.next();
                    }
                    let id = read_ident(&mut chars);
                    if id.is_empty() {
                        return Err(err(format!("empty argument in {name}")));
                    }
                    args.push(if is_var { Term::Var(id) } else { Term::Const(id) });
                    skip_ws(&mut chars);
                    match chars.next() {
                        Some((_, ',')) => continue,
                        Some((_, ')')) => break,
                        Some((p, c)) => {
                            return Err(err(format!("unexpected {c:?} at offset {p}")))
                        }
                        None => return Err(err(format!("unterminated argument list of {name}"))),
                    }
                }
            }
        }
        if let Some(&(p, c)) = chars.peek() {
            if !(c.is_whitespace() || c == ',') {
                return Err(err(format!("unexpected {c:?} at offset {p}")));
            }
        }
        out.push(Predicate { name, args });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_predicates() {
        let p: Predicate = "in(?x, b1)".parse().unwrap();
        assert_eq!(p.name, "in");
        assert_eq!(p.args, vec![Term::Var("x".into()), Term::Const("b1".into())]);
        assert_eq!(p.to_string(), "in(?x,b1)");
        let z: Predicate = "done".parse().unwrap();
        assert!(z.args.is_empty());
        assert_eq!("done()".parse::<Predicate>().unwrap(), z);
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "in(", "in(x,,y)", "in(x) junk(", "(x)", "a(b)c"] {
            assert!(bad.parse::<Predicate>().is_err(), "{bad:?} parsed");
        }
        assert!("in(?x)".parse::<Atom>().is_err());
    }

    #[test]
    fn state_is_a_set_with_canonical_form() {
        let s: State = "pcb(p1) in(p1,b1), pcb(p1) bay(b1)".parse().unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_string(), "bay(b1) in(p1,b1) pcb(p1)");
        let t: State = "bay(b1) pcb(p1) in(p1, b1)".parse().unwrap();
        assert_eq!(s, t);
    }

    fn arb_atom() -> impl Strategy<Value = Atom> {
        (
            "[a-z][a-z0-9_]{0,5}",
            prop::collection::vec("[a-z0-9][a-z0-9_-]{0,4}", 0..4),
        )
            .prop_map(|(n, args)| Atom { name: n, args })
    }

    proptest! {
        #[test]
        fn canonical_serialization_is_stable(atoms in prop::collection::vec(arb_atom(), 0..12)) {
            let s: State = atoms.into_iter().collect();
            let text = s.to_string();
            let back: State = text.parse().unwrap();
            prop_assert_eq!(back.to_string(), text);
            prop_assert_eq!(back, s);
        }
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{parse_predicates, MenidRule, Outcome, Predicate};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleEntry {
    rule_id: String,
    action: String,
    #[serde(default)]
    params: Vec<String>,
    #[serde(default)]
    deictic: Vec<String>,
    #[serde(default)]
    pre: Vec<String>,
    outcomes: Vec<OutcomeEntry>,
    #[serde(default)]
    derived: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutcomeEntry {
    label: String,
    #[serde(default)]
    add: Vec<String>,
    #[serde(default)]
    del: Vec<String>,
}

fn variable(rule: &str, token: &str) -> Result<String> {
    match token.strip_prefix('?') {
        Some(v) if !v.is_empty() => Ok(v.to_string()),
        _ => Err(Error::InvalidRules(format!(
            "rule {rule}: {token:?} is not a variable (variables start with '?')"
        ))),
    }
}

fn predicate_list(items: &[String]) -> Result<Vec<Predicate>> {
    let mut out = Vec::new();
    for s in items {
        let mut ps = parse_predicates(s)?;
        if ps.len() != 1 {
            return Err(Error::parse(s, "expected exactly one predicate"));
        }
        out.append(&mut ps);
    }
    Ok(out)
}

impl RuleEntry {
    fn into_rule(self) -> Result<MenidRule> {
        let id = self.rule_id;
        let params = self
            .params
            .iter()
            .map(|p| variable(&id, p))
            .collect::<Result<_>>()?;
        let deictic = self
            .deictic
            .iter()
            .map(|p| variable(&id, p))
            .collect::<Result<_>>()?;
        let outcomes = self
            .outcomes
            .into_iter()
            .map(|o| {
                Ok(Outcome::new(
                    o.label,
                    predicate_list(&o.add)?,
                    predicate_list(&o.del)?,
                ))
            })
            .collect::<Result<_>>()?;
        let mut rule = MenidRule::new(
            id,
            self.action,
            params,
            deictic,
            predicate_list(&self.pre)?,
            outcomes,
        )?;
        rule.derived = self.derived;
        Ok(rule)
    }
}

/// A validated collection of rules: unique ids, one arity per predicate name
/// and one arity per action name.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<MenidRule>,
    predicate_arity: BTreeMap<String, usize>,
}

impl RuleSet {
    pub fn new(rules: Vec<MenidRule>) -> Result<Self> {
        let mut ids = BTreeMap::new();
        let mut predicate_arity: BTreeMap<String, usize> = BTreeMap::new();
        let mut action_arity: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for r in &rules {
            if ids.insert(r.id.as_str(), ()).is_some() {
                return Err(Error::InvalidRules(format!("duplicate rule id {}", r.id)));
            }
            match action_arity.get(r.action.as_str()) {
                Some(&(n, other)) if n != r.params.len() => {
                    return Err(Error::InvalidRules(format!(
                        "action {} has {} parameters in rule {other} but {} in rule {}",
                        r.action,
                        n,
                        r.params.len(),
                        r.id
                    )))
                }
                _ => {
                    action_arity.insert(&r.action, (r.params.len(), &r.id));
                }
            }
            let all = r
                .pre
                .iter()
                .chain(r.outcomes.iter().flat_map(|o| o.add.iter().chain(&o.del)));
            for p in all {
                check_arity(&mut predicate_arity, &p.name, p.args.len(), &r.id)?;
            }
        }
        Ok(RuleSet {
            rules,
            predicate_arity,
        })
    }

    pub fn rules(&self) -> &[MenidRule] {
        &self.rules
    }

    pub fn rules_mut(&mut self) -> &mut [MenidRule] {
        &mut self.rules
    }

    pub fn into_rules(self) -> Vec<MenidRule> {
        self.rules
    }

    pub fn get(&self, id: &str) -> Option<&MenidRule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn action_names(&self) -> impl Iterator<Item = &str> {
        let mut names: Vec<&str> = self.rules.iter().map(|r| r.action.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        names.into_iter()
    }

    /// Check that the atoms of a state (e.g. an environment's initial state)
    /// use rule predicates with their declared arity.
    pub fn check_state_arity<'a>(
        &self,
        atoms: impl IntoIterator<Item = &'a super::Atom>,
        what: &str,
    ) -> Result<()> {
        for a in atoms {
            if let Some(&n) = self.predicate_arity.get(&a.name) {
                if n != a.args.len() {
                    return Err(Error::InvalidRules(format!(
                        "{what}: {a} has arity {} but rules use {}/{n}",
                        a.args.len(),
                        a.name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_arity(
    map: &mut BTreeMap<String, usize>,
    name: &str,
    arity: usize,
    rule: &str,
) -> Result<()> {
    match map.get(name) {
        Some(&n) if n != arity => Err(Error::InvalidRules(format!(
            "predicate {name} used with arity {arity} in rule {rule}, elsewhere with arity {n}"
        ))),
        Some(_) => Ok(()),
        None => {
            map.insert(name.to_string(), arity);
            Ok(())
        }
    }
}

/// Parse a rule-set JSON document (an array of rule objects).
pub fn parse_rules(json: &str) -> Result<RuleSet> {
    let entries: Vec<RuleEntry> = serde_json::from_str(json).map_err(|e| Error::Json {
        path: "<rules>".into(),
        source: e,
    })?;
    RuleSet::new(
        entries
            .into_iter()
            .map(RuleEntry::into_rule)
            .collect::<Result<_>>()?,
    )
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rules(&text).map_err(|e| match e {
        Error::Json { source, .. } => Error::Json {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

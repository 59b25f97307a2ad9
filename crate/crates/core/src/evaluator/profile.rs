use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::assembler::Pst;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    StrictOrder,
    Exclusive,
    Interleaving,
}

/// Pairwise behaviour of the actions of one model.
///
/// Each unordered pair of distinct actions appears once in `relations`:
/// strict order as `(earlier, later)`, the symmetric relations with the
/// smaller key first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BehavioralProfile {
    pub actions: BTreeSet<String>,
    pub relations: BTreeMap<(String, String), Relation>,
}

impl BehavioralProfile {
    /// Relation of `a` towards `b`. `Some(StrictOrder)` means `a` comes first;
    /// `None` means `b` comes first or the pair is unknown.
    pub fn relation(&self, a: &str, b: &str) -> Option<Relation> {
        let key = (a.to_string(), b.to_string());
        if let Some(&r) = self.relations.get(&key) {
            return Some(r);
        }
        match self.relations.get(&(key.1, key.0)) {
            Some(&r) if r != Relation::StrictOrder => Some(r),
            _ => None,
        }
    }
}

/// Leaf keys in order, with `#2`, `#3`… appended to repeated keys.
pub fn action_keys(pst: &Pst) -> Vec<String> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    pst.leaves()
        .into_iter()
        .map(|a| {
            let k = a.key();
            let n = seen.entry(k.clone()).or_insert(0);
            *n += 1;
            if *n == 1 {
                k
            } else {
                format!("{k}#{n}")
            }
        })
        .collect()
}

fn walk(p: &Pst, keys: &mut std::slice::Iter<'_, String>, out: &mut BTreeMap<(String, String), Relation>) -> Vec<String> {
    let (children, rel) = match p {
        Pst::Leaf(_) => return vec![keys.next().expect("one key per leaf").clone()],
        Pst::Seq(c) => (c, Relation::StrictOrder),
        Pst::Xor(c) => (c, Relation::Exclusive),
        Pst::And(c) => (c, Relation::Interleaving),
    };
    let groups: Vec<Vec<String>> = children.iter().map(|c| walk(c, keys, out)).collect();
    for (i, gi) in groups.iter().enumerate() {
        for gj in &groups[i + 1..] {
            for x in gi {
                for y in gj {
                    let pair = if rel == Relation::StrictOrder || x <= y {
                        (x.clone(), y.clone())
                    } else {
                        (y.clone(), x.clone())
                    };
                    out.insert(pair, rel);
                }
            }
        }
    }
    groups.concat()
}

/// The relation of two leaves is fixed by the node type of their lowest common ancestor.
pub fn behavioral_profile(pst: &Pst) -> BehavioralProfile {
    let keys = action_keys(pst);
    let mut relations = BTreeMap::new();
    walk(pst, &mut keys.iter(), &mut relations);
    BehavioralProfile {
        actions: keys.into_iter().collect(),
        relations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityScore {
    pub value: f64,
    pub matched_relations: usize,
    pub extracted_relations: usize,
    pub gold_relations: usize,
    pub matched_actions: usize,
    pub extracted_actions: usize,
    pub gold_actions: usize,
}

fn f1(matched: usize, predicted: usize, gold: usize) -> f64 {
    if predicted + gold == 0 {
        1.0
    } else {
        2.0 * matched as f64 / (predicted + gold) as f64
    }
}

/// F1 over relation triples. When neither model has a relation (at most one
/// action each) the action sets are compared instead.
pub fn behavior_similarity(extracted: &Pst, gold: &Pst) -> SimilarityScore {
    let (e, g) = (behavioral_profile(extracted), behavioral_profile(gold));
    let matched_relations = e
        .relations
        .iter()
        .filter(|(k, r)| g.relations.get(*k) == Some(r))
        .count();
    let matched_actions = e.actions.intersection(&g.actions).count();
    let value = if e.relations.is_empty() && g.relations.is_empty() {
        f1(matched_actions, e.actions.len(), g.actions.len())
    } else {
        f1(matched_relations, e.relations.len(), g.relations.len())
    };
    SimilarityScore {
        value,
        matched_relations,
        extracted_relations: e.relations.len(),
        gold_relations: g.relations.len(),
        matched_actions,
        extracted_actions: e.actions.len(),
        gold_actions: g.actions.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembler::ActionNode;

    fn a(name: &str) -> Pst {
        Pst::Leaf(ActionNode {
            id: 0,
            role: String::new(),
            name: name.into(),
            object: String::new(),
            sentence: 0,
        })
    }

    fn pair(x: &str, y: &str) -> (String, String) {
        (x.into(), y.into())
    }

    #[test]
    fn nested_sequence_with_and() {
        use Relation::*;
        let p = behavioral_profile(&Pst::Seq(vec![a("a"), Pst::And(vec![a("b"), a("c")]), a("d")]));
        let expected: BTreeMap<_, _> = [
            (pair("a", "b"), StrictOrder),
            (pair("a", "c"), StrictOrder),
            (pair("a", "d"), StrictOrder),
            (pair("b", "c"), Interleaving),
            (pair("b", "d"), StrictOrder),
            (pair("c", "d"), StrictOrder),
        ]
        .into_iter()
        .collect();
        assert_eq!(p.relations, expected);
        assert_eq!(p.relation("c", "b"), Some(Interleaving));
        assert_eq!(p.relation("d", "a"), None);
        let x = behavioral_profile(&Pst::Xor(vec![a("z"), a("y")]));
        assert_eq!(x.relations[&pair("y", "z")], Exclusive);
    }

    #[test]
    fn duplicate_actions_get_suffixes() {
        let p = behavioral_profile(&Pst::Seq(vec![a("Mix"), a("mix"), a("mix")]));
        assert_eq!(p.actions.into_iter().collect::<Vec<_>>(), vec!["mix", "mix#2", "mix#3"]);
    }

    #[test]
    fn similarity_examples() {
        let gold = Pst::Seq(vec![a("a"), a("b"), a("c")]);
        let ext = Pst::Seq(vec![a("a"), a("c")]);
        let s = behavior_similarity(&ext, &gold);
        assert_eq!(s.value, 0.5);
        assert_eq!((s.matched_relations, s.extracted_relations, s.gold_relations), (1, 1, 3));
        assert_eq!(behavior_similarity(&gold, &gold).value, 1.0);
        let other = Pst::Seq(vec![a("x"), a("y")]);
        assert_eq!(behavior_similarity(&other, &gold).value, 0.0);
        assert_eq!(behavior_similarity(&Pst::Seq(vec![]), &Pst::Seq(vec![])).value, 1.0);
        assert_eq!(behavior_similarity(&Pst::Seq(vec![a("a")]), &Pst::Seq(vec![a("b")])).value, 0.0);
    }
}

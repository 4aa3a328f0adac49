//! Substructure search: does a pattern graph embed in a target graph?
//!
//! Matching is a monomorphism (extra target bonds are allowed). Atoms match
//! on element and aromatic flag, and on charge only when the pattern atom is
//! charged. Bonds match on order, with aromatic matching only aromatic.
//! The search is VF2-style backtracking over pattern atoms ordered so that
//! each atom after the first of its component is adjacent to an earlier one.

use serde::Serialize;

use crate::molgraph::{Atom, BondOrder, MolecularGraph};

/// Pattern atom index → target atom index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MatchMap {
    pub pairs: Vec<usize>,
}

pub fn atoms_compatible(pattern: &Atom, target: &Atom) -> bool {
    pattern.element == target.element
        && pattern.aromatic == target.aromatic
        && (pattern.formal_charge == 0 || pattern.formal_charge == target.formal_charge)
}

pub fn bonds_compatible(pattern: BondOrder, target: BondOrder) -> bool {
    pattern == target
}

pub fn has_substructure(pattern: &MolecularGraph, target: &MolecularGraph) -> bool {
    !find_matches(pattern, target, 1).is_empty()
}

/// Up to `limit` distinct embeddings, in search order.
pub fn find_matches(pattern: &MolecularGraph, target: &MolecularGraph, limit: usize) -> Vec<MatchMap> {
    let mut out = Vec::new();
    if limit == 0 || pattern.atom_count() == 0 || !count_filter(pattern, target) {
        return out;
    }
    let order = match_order(pattern);
    let mut state = State {
        pattern,
        target,
        order: &order,
        map: vec![usize::MAX; pattern.atom_count()],
        used: vec![false; target.atom_count()],
        limit,
    };
    state.extend(0, &mut out);
    out
}

/// Number of embeddings; `find_matches` without the limit.
pub fn count_matches(pattern: &MolecularGraph, target: &MolecularGraph) -> usize {
    find_matches(pattern, target, usize::MAX).len()
}

/// Necessary conditions: sizes and per-(element, aromatic) counts.
fn count_filter(pattern: &MolecularGraph, target: &MolecularGraph) -> bool {
    if pattern.atom_count() > target.atom_count() || pattern.bond_count() > target.bond_count() {
        return false;
    }
    let tc = target.element_counts();
    pattern.element_counts().iter().all(|(e, ar, n)| {
        tc.iter()
            .find(|(te, tar, _)| te == e && tar == ar)
            .is_some_and(|(_, _, m)| m >= n)
    })
}

/// Pattern atoms ordered by connectivity: each component starts at its
/// highest-degree atom, then grows breadth-first preferring atoms with
/// more already-ordered neighbors.
fn match_order(pattern: &MolecularGraph) -> Vec<usize> {
    let n = pattern.atom_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&i| !placed[i])
            .max_by_key(|&i| (pattern.degree(i), std::cmp::Reverse(i)))
            .expect("unplaced atom");
        placed[start] = true;
        order.push(start);
        loop {
            let next = (0..n)
                .filter(|&i| !placed[i])
                .filter_map(|i| {
                    let links = pattern.neighbors(i).iter().filter(|&&(v, _)| placed[v]).count();
                    (links > 0).then_some((links, pattern.degree(i), std::cmp::Reverse(i), i))
                })
                .max();
            match next {
                Some((_, _, _, i)) => {
                    placed[i] = true;
                    order.push(i);
                }
                None => break,
            }
        }
    }
    order
}

struct State<'a> {
    pattern: &'a MolecularGraph,
    target: &'a MolecularGraph,
    order: &'a [usize],
    map: Vec<usize>,
    used: Vec<bool>,
    limit: usize,
}

impl State<'_> {
    fn extend(&mut self, depth: usize, out: &mut Vec<MatchMap>) {
        if out.len() >= self.limit {
            return;
        }
        if depth == self.order.len() {
            out.push(MatchMap {
                pairs: self.map.clone(),
            });
            return;
        }
        let p = self.order[depth];
        let anchor = self
            .pattern
            .neighbors(p)
            .iter()
            .find(|&&(q, _)| self.map[q] != usize::MAX)
            .map(|&(q, _)| self.map[q]);
        let candidates: Vec<usize> = match anchor {
            Some(t) => self.target.neighbors(t).iter().map(|&(v, _)| v).collect(),
            None => (0..self.target.atom_count()).collect(),
        };
        for t in candidates {
            if self.used[t] || !self.feasible(p, t) {
                continue;
            }
            self.map[p] = t;
            self.used[t] = true;
            self.extend(depth + 1, out);
            self.map[p] = usize::MAX;
            self.used[t] = false;
            if out.len() >= self.limit {
                return;
            }
        }
    }

    fn feasible(&self, p: usize, t: usize) -> bool {
        if !atoms_compatible(self.pattern.atom(p), self.target.atom(t)) {
            return false;
        }
        if self.pattern.degree(p) > self.target.degree(t) {
            return false;
        }
        self.pattern.neighbors(p).iter().all(|&(q, pb)| {
            let mapped = self.map[q];
            if mapped == usize::MAX {
                return true;
            }
            match self.target.bond_between(t, mapped) {
                Some(tb) => bonds_compatible(self.pattern.bonds()[pb].order, tb.order),
                None => false,
            }
        })
    }
}

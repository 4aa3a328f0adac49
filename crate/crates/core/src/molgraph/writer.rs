use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BondOrder, MolecularGraph};

/// Leaves explored by the tie-break search before it stops branching.
const TIE_BREAK_BUDGET: usize = 4096;

/// Canonical SMILES: equal for every atom ordering of the same graph.
pub fn canonical_smiles(g: &MolecularGraph) -> String {
    let (_, smiles) = canonical_search(g);
    smiles
}

/// Canonical atom ranks (a permutation of `0..n`); the canonical string is
/// the DFS emission ordered by these ranks.
pub fn canonical_ranks(g: &MolecularGraph) -> Vec<usize> {
    canonical_search(g).0
}

/// A valid SMILES for `g` whose traversal starts at a seeded random atom and
/// visits neighbors in seeded random order.
pub fn randomized_smiles(g: &MolecularGraph, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks: Vec<usize> = (0..g.atom_count()).collect();
    ranks.shuffle(&mut rng);
    write_smiles(g, &ranks)
}

fn canonical_search(g: &MolecularGraph) -> (Vec<usize>, String) {
    if g.atom_count() == 0 {
        return (Vec::new(), String::new());
    }
    let initial = initial_classes(g);
    let refined = refine(g, initial);
    let mut search = TieBreak {
        graph: g,
        leaves: 0,
        best: None,
    };
    search.explore(refined);
    search.best.expect("at least one leaf")
}

/// Dense class ids from the atom invariant tuple
/// (element, degree, charge, aromatic, hydrogens).
fn initial_classes(g: &MolecularGraph) -> Vec<usize> {
    let keys: Vec<_> = g
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            (
                a.element.atomic_number(),
                g.degree(i),
                a.formal_charge,
                a.aromatic,
                a.implicit_h,
            )
        })
        .collect();
    dense_ranks(&keys)
}

fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present"))
        .collect()
}

fn class_count(ranks: &[usize]) -> usize {
    ranks.iter().max().map_or(0, |m| m + 1)
}

/// Iterative neighborhood refinement until the partition is stable.
fn refine(g: &MolecularGraph, mut ranks: Vec<usize>) -> Vec<usize> {
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..g.atom_count())
            .map(|i| {
                let mut nbrs: Vec<(usize, u8)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&(n, b)| (ranks[n], g.bonds()[b].order.code()))
                    .collect();
                nbrs.sort_unstable();
                (ranks[i], nbrs)
            })
            .collect();
        let next = dense_ranks(&keys);
        if class_count(&next) == class_count(&ranks) {
            return next;
        }
        ranks = next;
    }
}

struct TieBreak<'a> {
    graph: &'a MolecularGraph,
    leaves: usize,
    best: Option<(Vec<usize>, String)>,
}

impl TieBreak<'_> {
    /// Promotes, in turn, each atom of the lowest tied class and keeps the
    /// lexicographically smallest emitted string over all leaves.
    fn explore(&mut self, ranks: Vec<usize>) {
        let n = ranks.len();
        if class_count(&ranks) == n {
            self.leaves += 1;
            let smiles = write_smiles(self.graph, &ranks);
            let better = match &self.best {
                Some((_, best)) => smiles < *best,
                None => true,
            };
            if better {
                self.best = Some((ranks, smiles));
            }
            return;
        }
        let mut counts = vec![0usize; n];
        for &r in &ranks {
            counts[r] += 1;
        }
        let tied = (0..n).find(|&r| counts[r] > 1).expect("a tied class");
        let candidates: Vec<usize> = (0..n).filter(|&i| ranks[i] == tied).collect();
        for (k, &atom) in candidates.iter().enumerate() {
            if k > 0 && self.leaves >= TIE_BREAK_BUDGET {
                break;
            }
            let promoted: Vec<usize> = ranks
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    if r < tied || i == atom {
                        2 * r
                    } else {
                        2 * r + 1
                    }
                })
                .collect();
            let promoted = refine(self.graph, dense_ranks(&promoted));
            self.explore(promoted);
        }
    }
}

/// Depth-first SMILES emission. Lower rank is visited first; each
/// component starts at its lowest-ranked atom.
pub(crate) fn write_smiles(g: &MolecularGraph, ranks: &[usize]) -> String {
    let n = g.atom_count();
    let mut plan = Plan {
        visited: vec![false; n],
        bond_used: vec![false; g.bond_count()],
        children: vec![Vec::new(); n],
        ring_open: vec![Vec::new(); n],
        ring_close: vec![Vec::new(); n],
    };
    let mut starts = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ranks[i]);
    for &start in &order {
        if !plan.visited[start] {
            starts.push(start);
            plan.dfs(g, ranks, start, None);
        }
    }

    let mut out = String::new();
    let mut digits = RingDigits::default();
    for (k, &start) in starts.iter().enumerate() {
        if k > 0 {
            out.push('.');
        }
        emit(g, &plan, &mut digits, start, &mut out);
    }
    out
}

struct Plan {
    visited: Vec<bool>,
    bond_used: Vec<bool>,
    children: Vec<Vec<(usize, usize)>>,
    ring_open: Vec<Vec<usize>>,
    ring_close: Vec<Vec<usize>>,
}

impl Plan {
    fn dfs(&mut self, g: &MolecularGraph, ranks: &[usize], u: usize, via: Option<usize>) {
        self.visited[u] = true;
        let mut nbrs: Vec<(usize, usize)> = g.neighbors(u).to_vec();
        nbrs.sort_by_key(|&(v, _)| ranks[v]);
        for (v, b) in nbrs {
            if Some(b) == via || self.bond_used[b] {
                continue;
            }
            self.bond_used[b] = true;
            if self.visited[v] {
                self.ring_open[v].push(b);
                self.ring_close[u].push(b);
            } else {
                self.children[u].push((v, b));
                self.dfs(g, ranks, v, Some(b));
            }
        }
    }
}

#[derive(Default)]
struct RingDigits {
    in_use: Vec<Option<usize>>,
}

impl RingDigits {
    fn open(&mut self, bond: usize) -> usize {
        match self.in_use.iter().skip(1).position(Option::is_none) {
            Some(i) => {
                self.in_use[i + 1] = Some(bond);
                i + 1
            }
            None => {
                if self.in_use.is_empty() {
                    self.in_use.push(None);
                }
                self.in_use.push(Some(bond));
                self.in_use.len() - 1
            }
        }
    }

    fn lookup(&self, bond: usize) -> usize {
        self.in_use
            .iter()
            .position(|x| *x == Some(bond))
            .expect("ring bond was opened")
    }

    fn release(&mut self, bond: usize) {
        let d = self.lookup(bond);
        self.in_use[d] = None;
    }
}

fn push_digit(out: &mut String, d: usize) {
    if d < 10 {
        out.push(char::from(b'0' + d as u8));
    } else {
        out.push('%');
        out.push_str(&format!("{d:02}"));
    }
}

fn emit(g: &MolecularGraph, plan: &Plan, digits: &mut RingDigits, u: usize, out: &mut String) {
    write_atom(g, u, out);
    // Openings are allocated before the closings are released so one atom
    // never closes and reopens the same digit.
    let closing: Vec<usize> = plan.ring_close[u].iter().map(|&b| digits.lookup(b)).collect();
    let opening: Vec<(usize, usize)> = plan.ring_open[u].iter().map(|&b| (b, digits.open(b))).collect();
    for (&b, &d) in plan.ring_close[u].iter().zip(&closing) {
        digits.release(b);
        push_digit(out, d);
    }
    for (b, d) in opening {
        let bond = &g.bonds()[b];
        write_bond(g, bond.a, bond.b, bond.order, out);
        push_digit(out, d);
    }
    let children = &plan.children[u];
    for (k, &(v, b)) in children.iter().enumerate() {
        let last = k + 1 == children.len();
        if !last {
            out.push('(');
        }
        write_bond(g, u, v, g.bonds()[b].order, out);
        emit(g, plan, digits, v, out);
        if !last {
            out.push(')');
        }
    }
}

fn write_bond(g: &MolecularGraph, a: usize, b: usize, order: BondOrder, out: &mut String) {
    let both_aromatic = g.atom(a).aromatic && g.atom(b).aromatic;
    match order {
        BondOrder::Single if both_aromatic => out.push('-'),
        BondOrder::Single => {}
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
        BondOrder::Aromatic if both_aromatic => {}
        BondOrder::Aromatic => out.push(':'),
    }
}

fn write_atom(g: &MolecularGraph, i: usize, out: &mut String) {
    let atom = g.atom(i);
    let symbol = if atom.aromatic {
        atom.element.symbol().to_ascii_lowercase()
    } else {
        atom.element.symbol().to_string()
    };
    let organic_ok = atom.element.is_organic_subset()
        && (!atom.aromatic || atom.element.is_aromatic_organic())
        && atom.formal_charge == 0
        && atom.implicit_h == g.default_hydrogens(i);
    if organic_ok {
        out.push_str(&symbol);
        return;
    }
    out.push('[');
    out.push_str(&symbol);
    match atom.implicit_h {
        0 => {}
        1 => out.push('H'),
        h => out.push_str(&format!("H{h}")),
    }
    match atom.formal_charge {
        0 => {}
        1 => out.push('+'),
        -1 => out.push('-'),
        c if c > 0 => out.push_str(&format!("+{c}")),
        c => out.push_str(&format!("-{}", -c)),
    }
    out.push(']');
}

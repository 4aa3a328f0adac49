//! Molecular graphs, the SMILES parser and the SMILES writers.
//!
//! The supported dialect is the organic subset (B, C, N, O, P, S, F, Cl, Br,
//! I) plus bracket atoms with explicit hydrogens and charges. Stereo markers
//! are accepted and dropped. Lowercase atoms are flagged aromatic; there is no
//! aromaticity perception or kekulization, so a Kekulé structure and its
//! aromatic spelling are different graphs.

mod element;
mod parser;
mod writer;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use element::Element;
pub use parser::{parse_smiles, parse_smiles_with_warnings, ParseWarning};
pub use writer::{canonical_ranks, canonical_smiles, randomized_smiles};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesError {
    #[error("empty SMILES string")]
    EmptyInput,
    #[error("ring bond {digit} is never closed")]
    UnclosedRing { digit: u32 },
    #[error("unknown element '{symbol}' at position {position}")]
    UnknownElement { symbol: String, position: usize },
    #[error("malformed bracket atom at position {position}")]
    BadBracketAtom { position: usize },
    #[error("unbalanced parenthesis at position {position}")]
    UnbalancedParenthesis { position: usize },
    #[error("unexpected character '{ch}' at position {position}")]
    UnexpectedCharacter { ch: char, position: usize },
    #[error("bond symbol at position {position} is not followed by an atom")]
    DanglingBond { position: usize },
    #[error("ring closure at position {position} duplicates an existing bond")]
    DuplicateBond { position: usize },
    #[error("ring bond {digit} has conflicting bond symbols")]
    ConflictingRingBond { digit: u32 },
    #[error("multi-fragment SMILES ('.') must be split by the caller")]
    MultipleFragments { position: usize },
}

impl SmilesError {
    /// Stable variant name, used as a machine-readable reason.
    pub fn kind(&self) -> &'static str {
        match self {
            SmilesError::EmptyInput => "EmptyInput",
            SmilesError::UnclosedRing { .. } => "UnclosedRing",
            SmilesError::UnknownElement { .. } => "UnknownElement",
            SmilesError::BadBracketAtom { .. } => "BadBracketAtom",
            SmilesError::UnbalancedParenthesis { .. } => "UnbalancedParenthesis",
            SmilesError::UnexpectedCharacter { .. } => "UnexpectedCharacter",
            SmilesError::DanglingBond { .. } => "DanglingBond",
            SmilesError::DuplicateBond { .. } => "DuplicateBond",
            SmilesError::ConflictingRingBond { .. } => "ConflictingRingBond",
            SmilesError::MultipleFragments { .. } => "MultipleFragments",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Twice the bond's valence contribution (aromatic bonds count 1.5).
    pub fn valence_x2(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Small stable code used by hashing and ranking.
    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    pub formal_charge: i8,
    /// Attached hydrogens: computed from valence for organic-subset atoms,
    /// taken from the bracket expression otherwise.
    pub implicit_h: u8,
    /// Written as a bracket atom in the source SMILES.
    pub bracket: bool,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Heavy-atom graph of one molecule. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MolecularGraph {
    /// Builds a graph from atoms and bonds, recomputing hydrogens of
    /// non-bracket atoms. Panics if a bond references a missing atom, is a
    /// self loop, or duplicates another bond.
    pub fn new(mut atoms: Vec<Atom>, bonds: Vec<Bond>) -> Self {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, bond) in bonds.iter().enumerate() {
            assert!(bond.a != bond.b, "self loop on atom {}", bond.a);
            assert!(
                bond.a < atoms.len() && bond.b < atoms.len(),
                "bond endpoint out of range"
            );
            assert!(
                !adjacency[bond.a].iter().any(|&(n, _)| n == bond.b),
                "duplicate bond {}-{}",
                bond.a,
                bond.b
            );
            adjacency[bond.a].push((bond.b, i));
            adjacency[bond.b].push((bond.a, i));
        }
        for (i, atom) in atoms.iter_mut().enumerate() {
            atom.index = i;
        }
        let mut g = MolecularGraph {
            atoms,
            bonds,
            adjacency,
        };
        for i in 0..g.atoms.len() {
            if !g.atoms[i].bracket {
                g.atoms[i].implicit_h = g.default_hydrogens(i);
            }
        }
        g
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// `(neighbor, bond index)` pairs of atom `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|&&(n, _)| n == b)
            .map(|&(_, bi)| &self.bonds[bi])
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.atoms.len()];
        let mut count = 0;
        for start in 0..self.atoms.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// Cyclomatic number: bonds - atoms + components.
    pub fn ring_count(&self) -> usize {
        self.bonds.len() + self.component_count() - self.atoms.len()
    }

    /// Hydrogens an unbracketed atom at position `i` would carry, given its
    /// bonds. Aromatic bonds count 1.5 and the sum is rounded down. Aromatic
    /// atoms use only their lowest valence and clamp at zero.
    pub fn default_hydrogens(&self, i: usize) -> u8 {
        let atom = &self.atoms[i];
        let valences = atom.element.default_valences();
        if valences.is_empty() {
            return 0;
        }
        let sum_x2: u32 = self.adjacency[i]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence_x2())
            .sum();
        let sum = sum_x2 / 2;
        if atom.aromatic {
            return (valences[0] as u32).saturating_sub(sum) as u8;
        }
        valences
            .iter()
            .map(|&v| v as u32)
            .find(|&v| v >= sum)
            .map(|v| (v - sum) as u8)
            .unwrap_or(0)
    }

    /// Element counts, used as a cheap substructure prefilter.
    pub fn element_counts(&self) -> Vec<(Element, bool, usize)> {
        let mut counts: Vec<(Element, bool, usize)> = Vec::new();
        for a in &self.atoms {
            match counts
                .iter_mut()
                .find(|(e, ar, _)| *e == a.element && *ar == a.aromatic)
            {
                Some(entry) => entry.2 += 1,
                None => counts.push((a.element, a.aromatic, 1)),
            }
        }
        counts.sort();
        counts
    }
}

impl FromStr for MolecularGraph {
    type Err = SmilesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_smiles(s)
    }
}

impl fmt::Display for MolecularGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&canonical_smiles(self))
    }
}

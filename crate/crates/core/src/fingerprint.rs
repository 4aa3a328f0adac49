//! Circular (Morgan-style) bit fingerprints and Tanimoto similarity.
//!
//! Each atom starts from the invariant tuple (element, heavy degree,
//! hydrogens, charge, aromatic). Every round rehashes an atom's previous
//! identifier together with its sorted `(bond order, neighbor identifier)`
//! pairs. One bit is set per atom per round, at `hash mod width`. Hashing is
//! 64-bit FNV-1a over a fixed little-endian byte encoding, so fingerprints
//! are stable across platforms but are not bit-compatible with other
//! toolkits.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::molgraph::MolecularGraph;

pub const DEFAULT_WIDTH: usize = 2048;
pub const DEFAULT_RADIUS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FingerprintError {
    #[error("fingerprint widths differ ({0} vs {1})")]
    WidthMismatch(usize, usize),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    words: Vec<u64>,
    width: usize,
    set_count: u32,
}

impl Fingerprint {
    /// An all-zero fingerprint. `width` must be a positive multiple of 64.
    pub fn zeros(width: usize) -> Self {
        assert!(width > 0 && width.is_multiple_of(64), "width must be a positive multiple of 64");
        Fingerprint {
            words: vec![0; width / 64],
            width,
            set_count: 0,
        }
    }

    pub fn from_bits(width: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut fp = Fingerprint::zeros(width);
        for b in bits {
            fp.set(b % width);
        }
        fp
    }

    fn set(&mut self, bit: usize) {
        let (w, m) = (bit / 64, 1u64 << (bit % 64));
        if self.words[w] & m == 0 {
            self.words[w] |= m;
            self.set_count += 1;
        }
    }

    pub fn get(&self, bit: usize) -> bool {
        self.words[bit / 64] & (1u64 << (bit % 64)) != 0
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn set_count(&self) -> u32 {
        self.set_count
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.width).filter(|&b| self.get(b))
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fingerprint")
            .field("width", &self.width)
            .field("set_count", &self.set_count)
            .finish()
    }
}

/// Tanimoto coefficient, always within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub const ONE: SimilarityScore = SimilarityScore(1.0);
    pub const ZERO: SimilarityScore = SimilarityScore(0.0);

    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(SimilarityScore(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(FNV_OFFSET)
    }

    fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
        self
    }

    fn finish(&self) -> u64 {
        self.0
    }
}

/// Per-atom identifiers after each round: `rounds[r][atom]`, for
/// `r in 0..=radius`.
pub fn atom_identifiers(g: &MolecularGraph, radius: usize) -> Vec<Vec<u64>> {
    let mut rounds = Vec::with_capacity(radius + 1);
    let initial: Vec<u64> = g
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            Fnv::new()
                .bytes(&[0])
                .bytes(a.element.symbol().as_bytes())
                .bytes(&[0xff])
                .bytes(&(g.degree(i) as u32).to_le_bytes())
                .bytes(&[a.implicit_h, a.formal_charge as u8, a.aromatic as u8])
                .finish()
        })
        .collect();
    rounds.push(initial);
    for round in 1..=radius {
        let prev = &rounds[round - 1];
        let next: Vec<u64> = (0..g.atom_count())
            .map(|i| {
                let mut nbrs: Vec<(u8, u64)> = g
                    .neighbors(i)
                    .iter()
                    .map(|&(n, b)| (g.bonds()[b].order.code(), prev[n]))
                    .collect();
                nbrs.sort_unstable();
                let mut h = Fnv::new();
                h.bytes(&(round as u32).to_le_bytes())
                    .bytes(&prev[i].to_le_bytes())
                    .bytes(&(nbrs.len() as u32).to_le_bytes());
                for (order, id) in nbrs {
                    h.bytes(&[order]).bytes(&id.to_le_bytes());
                }
                h.finish()
            })
            .collect();
        rounds.push(next);
    }
    rounds
}

/// Folds every round identifier of every atom into a `width`-bit vector.
/// `width` must be a power of two and at least 64.
pub fn morgan_fingerprint(g: &MolecularGraph, radius: usize, width: usize) -> Fingerprint {
    assert!(width.is_power_of_two() && width >= 64, "width must be a power of two >= 64");
    let ids = atom_identifiers(g, radius);
    Fingerprint::from_bits(
        width,
        ids.iter().flatten().map(|&h| (h % width as u64) as usize),
    )
}

/// Radius 2, 2048 bits.
pub fn default_fingerprint(g: &MolecularGraph) -> Fingerprint {
    morgan_fingerprint(g, DEFAULT_RADIUS, DEFAULT_WIDTH)
}

/// `|a AND b| / |a OR b|`; 0.0 when both are empty.
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<SimilarityScore, FingerprintError> {
    if a.width != b.width {
        return Err(FingerprintError::WidthMismatch(a.width, b.width));
    }
    let (mut both, mut either) = (0u32, 0u32);
    for (x, y) in a.words.iter().zip(&b.words) {
        both += (x & y).count_ones();
        either += (x | y).count_ones();
    }
    if either == 0 {
        return Ok(SimilarityScore::ZERO);
    }
    Ok(SimilarityScore(both as f64 / either as f64))
}

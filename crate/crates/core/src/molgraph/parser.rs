use std::collections::BTreeMap;

use super::{Atom, Bond, BondOrder, Element, MolecularGraph, SmilesError};

/// Non-fatal observations made while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// A stereo marker (`/`, `\`, `@`, `@@`) was read and dropped.
    StereoDiscarded { position: usize },
}

/// Parses one single-fragment SMILES string.
pub fn parse_smiles(s: &str) -> Result<MolecularGraph, SmilesError> {
    let (graph, warnings) = parse_smiles_with_warnings(s)?;
    if !warnings.is_empty() {
        log::debug!("{s}: dropped {} stereo marker(s)", warnings.len());
    }
    Ok(graph)
}

pub fn parse_smiles_with_warnings(
    s: &str,
) -> Result<(MolecularGraph, Vec<ParseWarning>), SmilesError> {
    let trimmed = s.trim();
    if trimmed.is_empty() {
        return Err(SmilesError::EmptyInput);
    }
    let mut parser = Parser {
        chars: trimmed.chars().collect(),
        pos: 0,
        atoms: Vec::new(),
        bonds: Vec::new(),
        warnings: Vec::new(),
    };
    parser.run()?;
    let graph = MolecularGraph::new(parser.atoms, parser.bonds);
    Ok((graph, parser.warnings))
}

#[derive(Clone, Copy)]
struct PendingBond {
    order: BondOrder,
    explicit_single: bool,
    position: usize,
}

struct OpenRing {
    atom: usize,
    bond: Option<PendingBond>,
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    warnings: Vec<ParseWarning>,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn run(&mut self) -> Result<(), SmilesError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<PendingBond> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut rings: BTreeMap<u32, OpenRing> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let position = self.pos;
            match c {
                '(' => {
                    let Some(p) = prev else {
                        return Err(SmilesError::UnbalancedParenthesis { position });
                    };
                    if let Some(b) = pending {
                        return Err(SmilesError::DanglingBond {
                            position: b.position,
                        });
                    }
                    branches.push((p, position));
                    self.pos += 1;
                }
                ')' => {
                    let Some((p, _)) = branches.pop() else {
                        return Err(SmilesError::UnbalancedParenthesis { position });
                    };
                    if let Some(b) = pending {
                        return Err(SmilesError::DanglingBond {
                            position: b.position,
                        });
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                '-' | '=' | '#' | ':' | '/' | '\\' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(SmilesError::UnexpectedCharacter { ch: c, position });
                    }
                    let order = match c {
                        '=' => BondOrder::Double,
                        '#' => BondOrder::Triple,
                        ':' => BondOrder::Aromatic,
                        _ => BondOrder::Single,
                    };
                    if c == '/' || c == '\\' {
                        self.warnings.push(ParseWarning::StereoDiscarded { position });
                    }
                    pending = Some(PendingBond {
                        order,
                        explicit_single: c == '-',
                        position,
                    });
                    self.pos += 1;
                }
                '0'..='9' | '%' => {
                    let Some(p) = prev else {
                        return Err(SmilesError::UnexpectedCharacter { ch: c, position });
                    };
                    let digit = self.ring_digit()?;
                    match rings.remove(&digit) {
                        Some(open) => {
                            if open.atom == p {
                                return Err(SmilesError::DuplicateBond { position });
                            }
                            let order = match (open.bond, pending) {
                                (Some(x), Some(y)) if x.order != y.order => {
                                    return Err(SmilesError::ConflictingRingBond { digit })
                                }
                                (Some(x), _) | (None, Some(x)) => Some(x),
                                (None, None) => None,
                            };
                            self.add_bond(open.atom, p, order, position)?;
                        }
                        None => {
                            rings.insert(
                                digit,
                                OpenRing {
                                    atom: p,
                                    bond: pending,
                                },
                            );
                        }
                    }
                    pending = None;
                }
                '.' => return Err(SmilesError::MultipleFragments { position }),
                '[' => {
                    let atom = self.bracket_atom()?;
                    let idx = self.push_atom(atom);
                    if let Some(p) = prev {
                        self.add_bond(p, idx, pending.take(), position)?;
                    }
                    prev = Some(idx);
                }
                _ if c.is_ascii_alphabetic() || c == '*' => {
                    let atom = self.organic_atom()?;
                    let idx = self.push_atom(atom);
                    if let Some(p) = prev {
                        self.add_bond(p, idx, pending.take(), position)?;
                    }
                    prev = Some(idx);
                }
                _ => return Err(SmilesError::UnexpectedCharacter { ch: c, position }),
            }
        }

        if let Some(b) = pending {
            return Err(SmilesError::DanglingBond {
                position: b.position,
            });
        }
        if let Some((_, position)) = branches.first() {
            return Err(SmilesError::UnbalancedParenthesis {
                position: *position,
            });
        }
        if let Some((&digit, _)) = rings.iter().next() {
            return Err(SmilesError::UnclosedRing { digit });
        }
        if self.atoms.is_empty() {
            return Err(SmilesError::EmptyInput);
        }
        Ok(())
    }

    fn push_atom(&mut self, mut atom: Atom) -> usize {
        atom.index = self.atoms.len();
        self.atoms.push(atom);
        self.atoms.len() - 1
    }

    fn add_bond(
        &mut self,
        a: usize,
        b: usize,
        pending: Option<PendingBond>,
        position: usize,
    ) -> Result<(), SmilesError> {
        if self
            .bonds
            .iter()
            .any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
        {
            return Err(SmilesError::DuplicateBond { position });
        }
        let both_aromatic = self.atoms[a].aromatic && self.atoms[b].aromatic;
        let order = match pending {
            Some(p) if p.explicit_single => BondOrder::Single,
            Some(p) if p.order == BondOrder::Single && both_aromatic => BondOrder::Aromatic,
            Some(p) => p.order,
            None if both_aromatic => BondOrder::Aromatic,
            None => BondOrder::Single,
        };
        self.bonds.push(Bond { a, b, order });
        Ok(())
    }

    fn ring_digit(&mut self) -> Result<u32, SmilesError> {
        let position = self.pos;
        let c = self.peek().unwrap_or(' ');
        if c == '%' {
            let d1 = self.peek_at(1).and_then(|c| c.to_digit(10));
            let d2 = self.peek_at(2).and_then(|c| c.to_digit(10));
            match (d1, d2) {
                (Some(a), Some(b)) => {
                    self.pos += 3;
                    Ok(a * 10 + b)
                }
                _ => Err(SmilesError::UnexpectedCharacter { ch: '%', position }),
            }
        } else {
            self.pos += 1;
            Ok(c.to_digit(10).unwrap_or(0))
        }
    }

    fn organic_atom(&mut self) -> Result<Atom, SmilesError> {
        let position = self.pos;
        let c = self.peek().unwrap_or(' ');
        let next = self.peek_at(1);
        let (symbol, aromatic, len) = match (c, next) {
            ('C', Some('l')) => ("Cl".to_string(), false, 2),
            ('B', Some('r')) => ("Br".to_string(), false, 2),
            ('B' | 'C' | 'N' | 'O' | 'P' | 'S' | 'F' | 'I', _) => (c.to_string(), false, 1),
            ('b' | 'c' | 'n' | 'o' | 'p' | 's', _) => (c.to_string(), true, 1),
            _ => {
                let mut symbol = c.to_string();
                if let Some(n) = next.filter(|n| n.is_ascii_lowercase()) {
                    symbol.push(n);
                }
                return Err(SmilesError::UnknownElement { symbol, position });
            }
        };
        let element = Element::from_symbol(&capitalize(&symbol)).expect("organic subset symbol");
        self.pos += len;
        Ok(Atom {
            element,
            aromatic,
            formal_charge: 0,
            implicit_h: 0,
            bracket: false,
            index: 0,
        })
    }

    /// `[` symbol chirality? hcount? charge? class? `]`
    fn bracket_atom(&mut self) -> Result<Atom, SmilesError> {
        let start = self.pos;
        let bad = SmilesError::BadBracketAtom { position: start };
        self.pos += 1;

        // Isotopes are outside the supported dialect.
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(bad);
        }

        let (element, aromatic) = self.bracket_symbol(start)?;

        if self.peek() == Some('@') {
            self.warnings
                .push(ParseWarning::StereoDiscarded { position: self.pos });
            self.pos += 1;
            if self.peek() == Some('@') {
                self.pos += 1;
            }
        }

        let mut hydrogens = 0u8;
        if self.peek() == Some('H') {
            self.pos += 1;
            hydrogens = match self.peek().and_then(|c| c.to_digit(10)) {
                Some(d) => {
                    self.pos += 1;
                    d as u8
                }
                None => 1,
            };
        }

        let mut charge: i32 = 0;
        if let Some(sign @ ('+' | '-')) = self.peek() {
            let unit = if sign == '+' { 1 } else { -1 };
            self.pos += 1;
            charge = unit;
            if let Some(d) = self.peek().and_then(|c| c.to_digit(10)) {
                self.pos += 1;
                charge = unit * d as i32;
            } else {
                while self.peek() == Some(sign) {
                    self.pos += 1;
                    charge += unit;
                }
            }
        }

        // Atom-map class, common in reaction SMILES; dropped.
        if self.peek() == Some(':') {
            self.pos += 1;
            let digits = self.chars[self.pos..]
                .iter()
                .take_while(|c| c.is_ascii_digit())
                .count();
            if digits == 0 {
                return Err(bad);
            }
            self.pos += digits;
        }

        if self.peek() != Some(']') {
            return Err(bad);
        }
        self.pos += 1;

        Ok(Atom {
            element,
            aromatic,
            formal_charge: charge.clamp(-15, 15) as i8,
            implicit_h: hydrogens,
            bracket: true,
            index: 0,
        })
    }

    fn bracket_symbol(&mut self, start: usize) -> Result<(Element, bool), SmilesError> {
        let first = match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => c,
            _ => return Err(SmilesError::BadBracketAtom { position: start }),
        };
        if first.is_ascii_lowercase() {
            for sym in ["se", "as", "te"] {
                if self.matches_ahead(sym) {
                    self.pos += 2;
                    let e = Element::from_symbol(&capitalize(sym)).expect("aromatic symbol");
                    return Ok((e, true));
                }
            }
            if matches!(first, 'b' | 'c' | 'n' | 'o' | 'p' | 's') {
                self.pos += 1;
                let e = Element::from_symbol(&first.to_ascii_uppercase().to_string())
                    .expect("aromatic symbol");
                return Ok((e, true));
            }
            return Err(SmilesError::UnknownElement {
                symbol: first.to_string(),
                position: self.pos,
            });
        }
        let second = self.peek_at(1).filter(|c| c.is_ascii_lowercase());
        if let Some(second) = second {
            let two = format!("{first}{second}");
            if let Some(e) = Element::from_symbol(&two) {
                self.pos += 2;
                return Ok((e, false));
            }
        }
        match Element::from_symbol(&first.to_string()) {
            Some(e) => {
                self.pos += 1;
                Ok((e, false))
            }
            None => {
                let symbol = match second {
                    Some(s) => format!("{first}{s}"),
                    None => first.to_string(),
                };
                Err(SmilesError::UnknownElement {
                    symbol,
                    position: self.pos,
                })
            }
        }
    }

    fn matches_ahead(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
    }
}

fn capitalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for (i, c) in s.chars().enumerate() {
        if i == 0 {
            out.push(c.to_ascii_uppercase());
        } else {
            out.push(c);
        }
    }
    out
}

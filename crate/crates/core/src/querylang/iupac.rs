use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const DEFAULT_VOCABULARY: &str = include_str!("../../data/iupac_fragments.txt");

/// Morphemes used to split alphabetic runs of systematic names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentVocabulary {
    words: BTreeSet<String>,
    max_len: usize,
}

impl Default for FragmentVocabulary {
    fn default() -> Self {
        FragmentVocabulary::parse(DEFAULT_VOCABULARY)
    }
}

/// Serialized as the sorted word list.
impl Serialize for FragmentVocabulary {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.words())
    }
}

impl<'de> Deserialize<'de> for FragmentVocabulary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(FragmentVocabulary::from_words(Vec::<String>::deserialize(d)?))
    }
}

impl FragmentVocabulary {
    /// One fragment per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        FragmentVocabulary::from_words(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string),
        )
    }

    pub fn from_words(words: impl IntoIterator<Item = String>) -> Self {
        let words: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        let max_len = words.iter().map(|w| w.chars().count()).max().unwrap_or(0);
        FragmentVocabulary { words, max_len }
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(FragmentVocabulary::parse(&std::fs::read_to_string(path)?))
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    /// Splits a lowercase alphabetic run into vocabulary fragments,
    /// preferring the longest fragment at each position. `None` when the
    /// run cannot be covered completely.
    pub fn segment(&self, run: &str) -> Option<Vec<String>> {
        let chars: Vec<char> = run.chars().collect();
        let mut dead = vec![false; chars.len() + 1];
        let mut out = Vec::new();
        self.cover(&chars, 0, &mut dead, &mut out).then_some(out)
    }

    fn cover(&self, chars: &[char], at: usize, dead: &mut [bool], out: &mut Vec<String>) -> bool {
        if at == chars.len() {
            return true;
        }
        if dead[at] {
            return false;
        }
        let longest = self.max_len.min(chars.len() - at);
        for len in (1..=longest).rev() {
            let piece: String = chars[at..at + len].iter().collect();
            if self.words.contains(&piece) {
                out.push(piece);
                if self.cover(chars, at + len, dead, out) {
                    return true;
                }
                out.pop();
            }
        }
        dead[at] = true;
        false
    }
}

/// Splits a systematic chemical name into locants and morphemes.
///
/// Punctuation separates tokens, digit runs are split from letters, and
/// each alphabetic run is segmented against the vocabulary (kept whole when
/// it cannot be fully covered). Tokens are lowercased except single-letter
/// locant prefixes such as `N` or `E`.
pub fn tokenize_iupac(name: &str, vocab: &FragmentVocabulary) -> Vec<String> {
    let mut tokens = Vec::new();
    for run in split_runs(name) {
        match run {
            Run::Digits(d) => tokens.push(d),
            Run::Letters(l) if l.chars().count() == 1 => tokens.push(l),
            Run::Letters(l) => {
                let lower = l.to_lowercase();
                match vocab.segment(&lower) {
                    Some(parts) => tokens.extend(parts),
                    None => tokens.push(lower),
                }
            }
        }
    }
    tokens
}

enum Run {
    Digits(String),
    Letters(String),
}

fn split_runs(s: &str) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut cur = String::new();
    let mut cur_digit = false;
    for c in s.chars() {
        if !c.is_alphanumeric() {
            flush(&mut runs, &mut cur, cur_digit);
            continue;
        }
        let is_digit = c.is_ascii_digit();
        if !cur.is_empty() && is_digit != cur_digit {
            flush(&mut runs, &mut cur, cur_digit);
        }
        cur_digit = is_digit;
        cur.push(c);
    }
    flush(&mut runs, &mut cur, cur_digit);
    runs
}

fn flush(runs: &mut Vec<Run>, cur: &mut String, digit: bool) {
    if cur.is_empty() {
        return;
    }
    let s = std::mem::take(cur);
    runs.push(if digit { Run::Digits(s) } else { Run::Letters(s) });
}

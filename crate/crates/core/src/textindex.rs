//! Passage tokenization and an in-memory BM25 inverted index.
//!
//! ```text
//! score(D, Q) = Σ idf(t) · tf(t, D) · (k1 + 1) / (tf(t, D) + k1 · (1 − b + b · |D| / avgdl))
//! idf(t)      = ln(1 + (N − df(t) + 0.5) / (df(t) + 0.5))
//! ```
//!
//! No stemming and no stop words: tokens such as `4b` or `pd` matter.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::querylang::{tokenize_iupac, FragmentVocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TextIndexError {
    #[error("cannot build a text index over zero passages")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

/// A token and the character range of the source word it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub span: Range<usize>,
}

/// Words shaped like systematic names (a hyphen or bracket, plus a letter
/// and a digit) are expanded through the name tokenizer.
fn is_name_shaped(word: &str) -> bool {
    word.chars().any(|c| matches!(c, '-' | '(' | ')' | '[' | ']' | '{' | '}'))
        && word.chars().any(|c| c.is_alphabetic())
        && word.chars().any(|c| c.is_ascii_digit())
}

fn is_edge_punct(c: char) -> bool {
    matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '"' | '\'')
}

/// Lowercase tokens with spans in characters.
pub fn tokenize_with_spans(s: &str, vocab: &FragmentVocabulary) -> Vec<Token> {
    let chars: Vec<char> = s.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let (mut ws, mut we) = (start, i);
        while ws < we && is_edge_punct(chars[ws]) {
            ws += 1;
        }
        while we > ws && is_edge_punct(chars[we - 1]) {
            we -= 1;
        }
        let word: String = chars[ws..we].iter().collect();
        if is_name_shaped(&word) {
            for t in tokenize_iupac(&word, vocab) {
                tokens.push(Token {
                    text: t.to_lowercase(),
                    span: ws..we,
                });
            }
            continue;
        }
        let mut j = ws;
        while j < we {
            if !chars[j].is_alphanumeric() {
                j += 1;
                continue;
            }
            let ts = j;
            while j < we && chars[j].is_alphanumeric() {
                j += 1;
            }
            tokens.push(Token {
                text: chars[ts..j].iter().collect::<String>().to_lowercase(),
                span: ts..j,
            });
        }
    }
    tokens
}

pub fn tokenize_text(s: &str, vocab: &FragmentVocabulary) -> Vec<String> {
    tokenize_with_spans(s, vocab)
        .into_iter()
        .map(|t| t.text)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub ordinal: u32,
    pub tf: u32,
}

/// Borrowed view of one term's postings, sorted by ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PostingList<'a> {
    pub term: &'a str,
    pub postings: &'a [Posting],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextIndex {
    params: Bm25Params,
    vocabulary: FragmentVocabulary,
    postings: BTreeMap<String, Vec<Posting>>,
    lengths: Vec<u32>,
    avg_len: f64,
}

/// Indexes `texts`; a passage's ordinal is its position in the slice.
pub fn build_text_index<S: AsRef<str>>(
    texts: &[S],
    vocab: &FragmentVocabulary,
    params: Bm25Params,
) -> Result<TextIndex, TextIndexError> {
    if texts.is_empty() {
        return Err(TextIndexError::EmptyCorpus);
    }
    let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
    let mut lengths = Vec::with_capacity(texts.len());
    for (ordinal, text) in texts.iter().enumerate() {
        let tokens = tokenize_text(text.as_ref(), vocab);
        lengths.push(tokens.len() as u32);
        let mut tf: BTreeMap<String, u32> = BTreeMap::new();
        for t in tokens {
            *tf.entry(t).or_default() += 1;
        }
        for (term, count) in tf {
            postings.entry(term).or_default().push(Posting {
                ordinal: ordinal as u32,
                tf: count,
            });
        }
    }
    let avg_len = lengths.iter().map(|&l| l as f64).sum::<f64>() / lengths.len() as f64;
    Ok(TextIndex {
        params,
        vocabulary: vocab.clone(),
        postings,
        lengths,
        avg_len,
    })
}

impl TextIndex {
    pub fn passage_count(&self) -> usize {
        self.lengths.len()
    }

    pub fn avg_len(&self) -> f64 {
        self.avg_len
    }

    pub fn length(&self, ordinal: usize) -> u32 {
        self.lengths[ordinal]
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn vocabulary(&self) -> &FragmentVocabulary {
        &self.vocabulary
    }

    pub fn postings(&self, term: &str) -> Option<PostingList<'_>> {
        self.postings.get_key_value(term).map(|(t, p)| PostingList {
            term: t,
            postings: p,
        })
    }

    pub fn terms(&self) -> impl Iterator<Item = PostingList<'_>> {
        self.postings.iter().map(|(t, p)| PostingList {
            term: t,
            postings: p,
        })
    }

    /// Query tokens, deduplicated in first-seen order.
    pub fn query_terms(&self, query: &str) -> Vec<String> {
        let mut terms: Vec<String> = Vec::new();
        for t in tokenize_text(query, &self.vocabulary) {
            if !terms.contains(&t) {
                terms.push(t);
            }
        }
        terms
    }

    pub fn idf(&self, df: usize) -> f64 {
        let n = self.passage_count() as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// One term's contribution for a passage of length `len`.
    pub fn term_score(&self, tf: u32, len: u32, df: usize) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = tf as f64;
        let norm = if self.avg_len > 0.0 {
            len as f64 / self.avg_len
        } else {
            0.0
        };
        self.idf(df) * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm))
    }

    /// Every passage with at least one query term, ranked by score
    /// descending then ordinal ascending.
    pub fn score_all(&self, terms: &[String]) -> Vec<(usize, f64)> {
        let mut scores: BTreeMap<usize, f64> = BTreeMap::new();
        for term in terms {
            let Some(list) = self.postings(term) else {
                continue;
            };
            let df = list.postings.len();
            for p in list.postings {
                let ord = p.ordinal as usize;
                *scores.entry(ord).or_default() += self.term_score(p.tf, self.lengths[ord], df);
            }
        }
        let mut ranked: Vec<(usize, f64)> = scores.into_iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }

    /// Top `k` passages for a free-text query.
    pub fn search_text(&self, query: &str, k: usize) -> Vec<(usize, f64)> {
        let mut ranked = self.score_all(&self.query_terms(query));
        ranked.truncate(k);
        ranked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> FragmentVocabulary {
        FragmentVocabulary::default()
    }

    fn index(texts: &[&str]) -> TextIndex {
        build_text_index(texts, &vocab(), Bm25Params::default()).unwrap()
    }

    #[test]
    fn plain_tokens() {
        assert_eq!(
            tokenize_text("Suzuki coupling at 80", &vocab()),
            ["suzuki", "coupling", "at", "80"]
        );
        assert!(tokenize_text("", &vocab()).is_empty());
        assert_eq!(tokenize_text("Pd-catalysed, 4b.", &vocab()), ["pd", "catalysed", "4b"]);
    }

    #[test]
    fn names_expand() {
        let toks = tokenize_text(
            "Heating N-((E)-2-bromo-2-phenylvinyl)-cinnamamide gave 5.",
            &vocab(),
        );
        for t in ["bromo", "phenyl", "vinyl", "cinnamamide", "heating", "5"] {
            assert!(toks.contains(&t.to_string()), "{t} in {toks:?}");
        }
        assert!(toks.contains(&"n".to_string()));
    }

    #[test]
    fn spans_cover_source() {
        let s = "the product 4b, (E)-2-bromo";
        let toks = tokenize_with_spans(s, &vocab());
        let chars: Vec<char> = s.chars().collect();
        let b = toks.iter().find(|t| t.text == "4b").unwrap();
        assert_eq!(chars[b.span.clone()].iter().collect::<String>(), "4b");
        let br = toks.iter().find(|t| t.text == "bromo").unwrap();
        assert_eq!(chars[br.span.clone()].iter().collect::<String>(), "(E)-2-bromo");
    }

    #[test]
    fn postings_and_lengths() {
        let idx = index(&["a b a"]);
        let p = idx.postings("a").unwrap();
        assert_eq!(p.postings, &[Posting { ordinal: 0, tf: 2 }]);
        assert_eq!(idx.length(0), 3);
        assert_eq!(
            build_text_index::<&str>(&[], &vocab(), Bm25Params::default()),
            Err(TextIndexError::EmptyCorpus)
        );
    }

    #[test]
    fn two_document_example() {
        let idx = index(&["a b", "a"]);
        let hits = idx.search_text("b", 10);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0, 0);
        assert!((hits[0].1 - 0.6100).abs() < 1e-4, "{}", hits[0].1);
        // Shorter passage wins on equal tf.
        let hits = idx.search_text("a", 10);
        assert_eq!(hits.iter().map(|h| h.0).collect::<Vec<_>>(), [1, 0]);
        assert!(idx.search_text("zzz", 10).is_empty());
        assert_eq!(idx.search_text("a", 1).len(), 1);
    }

    #[test]
    fn ties_break_on_ordinal() {
        let idx = index(&["x y", "x y", "z"]);
        let hits = idx.search_text("x", 10);
        assert_eq!(hits.iter().map(|h| h.0).collect::<Vec<_>>(), [0, 1]);
        assert_eq!(hits[0].1, hits[1].1);
    }
}

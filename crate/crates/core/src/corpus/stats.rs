//! Cue-frequency statistics over a corpus of instances or documents.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, MapInstance, Token};
use crate::lexicon::{Lexicon, PronounCategory};

/// Pronoun class used for distribution reporting: the two binary paradigms
/// are reported separately, all neopronoun paradigms are pooled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PronounClass {
    He,
    She,
    They,
    Neo,
}

impl PronounClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            PronounClass::He => "he",
            PronounClass::She => "she",
            PronounClass::They => "they",
            PronounClass::Neo => "neo",
        }
    }
}

impl std::fmt::Display for PronounClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Corpus-level cue statistics. Fractions are `None` on an empty corpus
/// (undefined, not zero); the distribution is empty when the corpus has no
/// pronoun tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_instances: usize,
    pub frac_with_sem_nouns: Option<f64>,
    pub frac_with_addr_terms: Option<f64>,
    pub pronoun_category_distribution: BTreeMap<PronounClass, f64>,
    pub pronoun_token_count: usize,
    pub n_with_sem_nouns: usize,
    pub n_with_addr_terms: usize,
}

fn classify_pronoun(lexicon: &Lexicon, surface: &str) -> Option<PronounClass> {
    let candidates = lexicon.pronoun_candidates(surface);
    let (paradigm_idx, _) = candidates.first()?;
    let paradigm = &lexicon.paradigms[*paradigm_idx];
    Some(match paradigm.category {
        PronounCategory::Binary => {
            if paradigm.paradigm_id == "she" {
                PronounClass::She
            } else {
                PronounClass::He
            }
        }
        PronounCategory::SingularThey => PronounClass::They,
        PronounCategory::Neopronoun => PronounClass::Neo,
    })
}

/// Computes stats over any iterator of token sequences (one per unit).
pub fn corpus_stats<'a>(
    units: impl IntoIterator<Item = &'a [Token]>,
    lexicon: &Lexicon,
) -> CorpusStats {
    let mut n_instances = 0;
    let mut n_with_sem = 0;
    let mut n_with_addr = 0;
    let mut pronoun_counts: BTreeMap<PronounClass, usize> = BTreeMap::new();
    let mut pronoun_total = 0usize;

    for tokens in units {
        n_instances += 1;
        let mut has_sem = false;
        let mut has_addr = false;
        for tok in tokens {
            if lexicon.noun_entry(&tok.surface).is_some() {
                has_sem = true;
            }
            if lexicon.is_address_term(&tok.surface) {
                has_addr = true;
            }
            if let Some(class) = classify_pronoun(lexicon, &tok.surface) {
                *pronoun_counts.entry(class).or_insert(0) += 1;
                pronoun_total += 1;
            }
        }
        if has_sem {
            n_with_sem += 1;
        }
        if has_addr {
            n_with_addr += 1;
        }
    }

    let frac = |n: usize| {
        if n_instances == 0 {
            None
        } else {
            Some(n as f64 / n_instances as f64)
        }
    };
    let distribution = pronoun_counts
        .into_iter()
        .map(|(class, count)| (class, count as f64 / pronoun_total as f64))
        .collect();

    CorpusStats {
        n_instances,
        frac_with_sem_nouns: frac(n_with_sem),
        frac_with_addr_terms: frac(n_with_addr),
        pronoun_category_distribution: distribution,
        pronoun_token_count: pronoun_total,
        n_with_sem_nouns: n_with_sem,
        n_with_addr_terms: n_with_addr,
    }
}

pub fn corpus_stats_instances(instances: &[MapInstance], lexicon: &Lexicon) -> CorpusStats {
    corpus_stats(instances.iter().map(|i| i.tokens.as_slice()), lexicon)
}

pub fn corpus_stats_documents(docs: &[Document], lexicon: &Lexicon) -> CorpusStats {
    corpus_stats(docs.iter().map(|d| d.tokens.as_slice()), lexicon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize::tokenize;

    fn unit(text: &str) -> Vec<Token> {
        tokenize(text).0
    }

    #[test]
    fn empty_corpus_reports_absent_fractions() {
        let stats = corpus_stats(std::iter::empty(), &Lexicon::shipped());
        assert_eq!(stats.n_instances, 0);
        assert!(stats.frac_with_sem_nouns.is_none());
        assert!(stats.frac_with_addr_terms.is_none());
        assert!(stats.pronoun_category_distribution.is_empty());
    }

    #[test]
    fn single_instance_with_address_term() {
        let lex = Lexicon::shipped();
        let tokens = unit("Mrs. Park spoke first.");
        let stats = corpus_stats([tokens.as_slice()], &lex);
        assert_eq!(stats.frac_with_addr_terms, Some(1.0));
        assert_eq!(stats.frac_with_sem_nouns, Some(0.0));
    }

    #[test]
    fn pronoun_distribution_sums_to_one() {
        let lex = Lexicon::shipped();
        let a = unit("she saw him and they waved at zir");
        let stats = corpus_stats([a.as_slice()], &lex);
        let total: f64 = stats.pronoun_category_distribution.values().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(stats.pronoun_token_count, 4);
        assert_eq!(stats.pronoun_category_distribution[&PronounClass::She], 0.25);
        assert_eq!(stats.pronoun_category_distribution[&PronounClass::Neo], 0.25);
    }

    #[test]
    fn union_is_the_weighted_average() {
        let lex = Lexicon::shipped();
        let a = unit("her sister arrived");
        let b = unit("nothing gendered here");
        let c = unit("the brother left");
        let ab = corpus_stats([a.as_slice(), b.as_slice()], &lex);
        let abc = corpus_stats([a.as_slice(), b.as_slice(), c.as_slice()], &lex);
        let expected = (ab.frac_with_sem_nouns.unwrap() * 2.0 + 1.0) / 3.0;
        assert!((abc.frac_with_sem_nouns.unwrap() - expected).abs() < 1e-12);
    }
}

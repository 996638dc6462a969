//! Gender-inclusive coreference tooling.
//!
//! The crate covers three workflows:
//!
//! * **Ablation** — rewrite pronoun/candidate instances or coreference
//!   documents under ten named conditions that hide combinations of four
//!   linguistic gender cues: referential pronouns, names, semantically
//!   gendered nouns, and terms of address ([`ablate`]).
//! * **Scoring** — binary pronoun-resolution accuracy with Wilson
//!   intervals, LEA coreference scoring with misgendering-aware handling of
//!   annotated incorrect references, pronoun-detection recall by paradigm
//!   category, and inter-annotator agreement ([`score`], [`stats`]).
//! * **Study tooling** — crowd-task batch generation and ingestion
//!   ([`tasks`]) and literature-coding tabulation ([`coding`]).
//!
//! File formats: CoNLL-2012 coreference and a GAP-compatible TSV
//! ([`corpus::conll`], [`corpus::map`]); the cue inventory loads from four
//! TSV files with shipped defaults ([`lexicon`]).

pub mod ablate;
pub mod coding;
pub mod corpus;
pub mod error;
pub mod lexicon;
pub mod report;
pub mod score;
pub mod stats;
pub mod tasks;

pub use ablate::{AblationConfig, AgreementMode, NameMapping, OffsetMap, Preset};
pub use corpus::{Choice, Document, Genre, MapInstance, MentionSpan, Token};
pub use error::{Error, Result};
pub use lexicon::{Lexicon, PronounCase, PronounCategory};
pub use score::{BinaryPrediction, CategoryRecall, LeaScore, ScoringMode};
pub use stats::{Certainty, Proportion};

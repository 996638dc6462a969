//! Tabulation of literature-coding annotations: per-question yes-rates
//! with conditional denominators, plus group comparisons under the n-1
//! chi-squared test.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{chisq_n_minus_1, ChiSquareResult, Proportion};

/// The annotation fixture shipped with the crate (one row per coded paper).
pub const DEFAULT_CODINGS_CSV: &str = include_str!("../data/paper_codings.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Question {
    Coref,
    Eng,
    LG,
    SG,
    LGneqSG,
    SGBinary,
    SGImmutable,
    TheyNeo,
}

pub const ALL_QUESTIONS: [Question; 8] = [
    Question::Coref,
    Question::Eng,
    Question::LG,
    Question::SG,
    Question::LGneqSG,
    Question::SGBinary,
    Question::SGImmutable,
    Question::TheyNeo,
];

impl Question {
    /// CSV column name.
    pub fn column(&self) -> &'static str {
        match self {
            Question::Coref => "coref",
            Question::Eng => "eng",
            Question::LG => "lg",
            Question::SG => "sg",
            Question::LGneqSG => "lg_neq_sg",
            Question::SGBinary => "sg_binary",
            Question::SGImmutable => "sg_immutable",
            Question::TheyNeo => "they_neo",
        }
    }

    /// Report label.
    pub fn label(&self) -> &'static str {
        match self {
            Question::Coref => "Coref?",
            Question::Eng => "Eng?",
            Question::LG => "L.G?",
            Question::SG => "S.G?",
            Question::LGneqSG => "L.G!=S.G?",
            Question::SGBinary => "S.G Binary?",
            Question::SGImmutable => "S.G Immutable?",
            Question::TheyNeo => "They/Neo?",
        }
    }

    pub fn parse(s: &str) -> Result<Question> {
        ALL_QUESTIONS
            .into_iter()
            .find(|q| q.column().eq_ignore_ascii_case(s) || q.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Invalid(format!("unknown question {s:?}")))
    }
}

impl std::fmt::Display for Question {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Answer {
    Yes,
    No,
    NotApplicable,
}

impl Answer {
    fn parse(s: &str) -> Result<Answer> {
        match s.trim() {
            "Y" | "y" => Ok(Answer::Yes),
            "N" | "n" => Ok(Answer::No),
            "-" | "NA" | "na" | "" => Ok(Answer::NotApplicable),
            other => Err(Error::Invalid(format!("unknown answer {other:?} (expected Y, N, or -)"))),
        }
    }
}

/// One coded paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperCodingRecord {
    pub paper_id: String,
    answers: [Answer; 8],
}

impl PaperCodingRecord {
    pub fn answer(&self, q: Question) -> Answer {
        self.answers[ALL_QUESTIONS.iter().position(|x| *x == q).unwrap()]
    }

    pub fn is_yes(&self, q: Question) -> bool {
        self.answer(q) == Answer::Yes
    }

    /// Conditional-validity rules: an answer (rather than "-") is only
    /// legal where the conditioning questions hold.
    fn check_conditionals(&self) -> Result<()> {
        let applicable = |q: Question| -> bool {
            match q {
                Question::LGneqSG => self.is_yes(Question::LG) && self.is_yes(Question::SG),
                Question::SGBinary | Question::SGImmutable => self.is_yes(Question::SG),
                Question::TheyNeo => self.is_yes(Question::SG) && self.is_yes(Question::Eng),
                _ => true,
            }
        };
        for q in ALL_QUESTIONS {
            if self.answer(q) != Answer::NotApplicable && !applicable(q) {
                return Err(Error::row(
                    &self.paper_id,
                    format!("{} answered but its conditioning questions do not hold", q.label()),
                ));
            }
        }
        Ok(())
    }
}

/// Loads coding records from CSV with columns `paper_id` plus the eight
/// question columns. Conditional-validity violations are rejected with the
/// offending paper id.
pub fn load_codings<R: Read>(reader: R) -> Result<Vec<PaperCodingRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut columns = vec!["paper_id".to_string()];
    columns.extend(ALL_QUESTIONS.iter().map(|q| q.column().to_string()));
    let found: Vec<&str> = headers.iter().collect();
    if found != columns.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::Invalid(format!(
            "codings schema mismatch: expected columns {:?}, found {:?}",
            columns, found
        )));
    }

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let paper_id = record.get(0).unwrap_or("").to_string();
        let mut answers = [Answer::NotApplicable; 8];
        for (k, q) in ALL_QUESTIONS.iter().enumerate() {
            answers[k] = Answer::parse(record.get(k + 1).unwrap_or("")).map_err(|e| {
                Error::row(&paper_id, format!("{}: {e}", q.column()))
            })?;
        }
        let rec = PaperCodingRecord { paper_id, answers };
        rec.check_conditionals()?;
        out.push(rec);
    }
    Ok(out)
}

/// Yes-count and non-NA denominator for one question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionStat {
    pub yes: usize,
    pub denominator: usize,
}

impl QuestionStat {
    /// Percentage at one-decimal precision, truncated toward zero (the
    /// reporting convention the reference figures follow: 78/84 renders
    /// as 92.8, not 92.9).
    pub fn percent(&self) -> Option<f64> {
        if self.denominator == 0 {
            return None;
        }
        let pct = 100.0 * self.yes as f64 / self.denominator as f64;
        Some((pct * 10.0).floor() / 10.0)
    }

    pub fn fraction(&self) -> Option<f64> {
        if self.denominator == 0 {
            None
        } else {
            Some(self.yes as f64 / self.denominator as f64)
        }
    }
}

/// Per-question tabulation over a record subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodingTable {
    pub n_records: usize,
    pub per_question: Vec<(Question, QuestionStat)>,
}

impl CodingTable {
    pub fn stat(&self, q: Question) -> QuestionStat {
        self.per_question.iter().find(|(x, _)| *x == q).map(|(_, s)| *s).unwrap()
    }
}

/// Tabulates the percentage of Y among non-NA answers for every question,
/// over the records passing `filter`.
pub fn tabulate(
    records: &[PaperCodingRecord],
    filter: impl Fn(&PaperCodingRecord) -> bool,
) -> Result<CodingTable> {
    let subset: Vec<&PaperCodingRecord> = records.iter().filter(|r| filter(r)).collect();
    if subset.is_empty() {
        return Err(Error::Invalid("empty record subset".into()));
    }
    let per_question = ALL_QUESTIONS
        .into_iter()
        .map(|q| {
            let mut yes = 0;
            let mut denominator = 0;
            for r in &subset {
                match r.answer(q) {
                    Answer::Yes => {
                        yes += 1;
                        denominator += 1;
                    }
                    Answer::No => denominator += 1,
                    Answer::NotApplicable => {}
                }
            }
            (q, QuestionStat { yes, denominator })
        })
        .collect();
    Ok(CodingTable { n_records: subset.len(), per_question })
}

/// Compares the yes-rate of `question` between two record subsets with the
/// n-1 chi-squared test.
pub fn compare_groups(
    records: &[PaperCodingRecord],
    question: Question,
    group_a: impl Fn(&PaperCodingRecord) -> bool,
    group_b: impl Fn(&PaperCodingRecord) -> bool,
) -> Result<ChiSquareResult> {
    let a = tabulate(records, group_a)?.stat(question);
    let b = tabulate(records, group_b)?.stat(question);
    if a.denominator == 0 || b.denominator == 0 {
        return Err(Error::Invalid(format!(
            "no applicable records for {} in one of the groups",
            question.label()
        )));
    }
    chisq_n_minus_1(
        Proportion::new(a.yes as u64, a.denominator as u64),
        Proportion::new(b.yes as u64, b.denominator as u64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Vec<PaperCodingRecord> {
        load_codings(DEFAULT_CODINGS_CSV.as_bytes()).unwrap()
    }

    #[test]
    fn fixture_loads_and_has_150_rows() {
        let records = fixture();
        assert_eq!(records.len(), 150);
        assert_eq!(records.iter().filter(|r| r.is_yes(Question::Coref)).count(), 22);
    }

    #[test]
    fn conditional_na_is_accepted() {
        let csv = "paper_id,coref,eng,lg,sg,lg_neq_sg,sg_binary,sg_immutable,they_neo\n\
                   p1,N,Y,N,Y,-,Y,Y,N\n";
        let records = load_codings(csv.as_bytes()).unwrap();
        assert_eq!(records[0].answer(Question::LGneqSG), Answer::NotApplicable);
    }

    #[test]
    fn answer_violating_conditionality_is_rejected() {
        let csv = "paper_id,coref,eng,lg,sg,lg_neq_sg,sg_binary,sg_immutable,they_neo\n\
                   p2,N,Y,Y,N,-,Y,-,-\n";
        let err = load_codings(csv.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p2") && msg.contains("S.G Binary?"), "{msg}");
    }

    #[test]
    fn unknown_column_is_a_schema_error() {
        let csv = "paper_id,coref,eng,lg,sg,lg_neq_sg,sg_binary,sg_immutable,extra\np3,Y,Y,Y,Y,N,Y,Y\n";
        assert!(load_codings(csv.as_bytes()).is_err());
    }

    #[test]
    fn single_all_yes_record() {
        let csv = "paper_id,coref,eng,lg,sg,lg_neq_sg,sg_binary,sg_immutable,they_neo\n\
                   p4,Y,Y,Y,Y,Y,Y,Y,Y\n";
        let records = load_codings(csv.as_bytes()).unwrap();
        let table = tabulate(&records, |_| true).unwrap();
        for q in ALL_QUESTIONS {
            assert_eq!(table.stat(q).percent(), Some(100.0), "{}", q.label());
        }
    }

    #[test]
    fn empty_subset_is_an_error() {
        let records = fixture();
        assert!(tabulate(&records, |_| false).is_err());
    }

    #[test]
    fn union_counts_are_sums_of_parts() {
        let records = fixture();
        let all = tabulate(&records, |_| true).unwrap();
        let coref = tabulate(&records, |r| r.is_yes(Question::Coref)).unwrap();
        let rest = tabulate(&records, |r| !r.is_yes(Question::Coref)).unwrap();
        for q in ALL_QUESTIONS {
            let a = all.stat(q);
            let (b, c) = (coref.stat(q), rest.stat(q));
            assert_eq!(a.yes, b.yes + c.yes);
            assert_eq!(a.denominator, b.denominator + c.denominator);
            assert!(a.yes <= a.denominator);
        }
    }

    #[test]
    fn identical_groups_are_not_significant() {
        let records = fixture();
        let r = compare_groups(&records, Question::LG, |_| true, |_| true).unwrap();
        assert!((r.p_value - 1.0).abs() < 1e-9);
    }
}

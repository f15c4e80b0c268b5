//! Tab-separated input files.
//!
//! Every file starts with a header line; blank lines and lines starting with
//! `#` are skipped anywhere. Fields are trimmed.
//!
//! Mutations (one observed mutation per row, long form):
//!
//! ```text
//! tumor_id    marker_id
//! T3    KRAS G12D
//! T1    .
//! ```
//!
//! A marker of `.` declares a tumor with no observed mutations.
//!
//! Probabilities come in one of two modes, chosen by the header:
//!
//! ```text
//! marker_id    probability
//! marker_id    ref_mutated    ref_total    study_mutated    [study_total]
//! ```

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::str::FromStr;

use clonality::{Catalog, FrequencyRecord, MarkerId, MutationProfile};

use crate::CliError;

pub const NO_MUTATION: &str = ".";

const CASE_HEADER: [&str; 2] = ["tumor_id", "marker_id"];
const PROB_HEADER: [&str; 2] = ["marker_id", "probability"];
const COUNT_HEADER: [&str; 5] = ["marker_id", "ref_mutated", "ref_total", "study_mutated", "study_total"];

/// Tumors in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseFile {
    pub tumors: Vec<MutationProfile>,
}

impl CaseFile {
    pub fn tumor(&self, id: &str) -> Option<&MutationProfile> {
        self.tumors.iter().find(|t| t.tumor_id == id)
    }

    pub fn markers(&self) -> BTreeSet<MarkerId> {
        self.tumors.iter().flat_map(|t| t.mutations.iter().cloned()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilityFile {
    Probabilities(Vec<(MarkerId, f64)>),
    /// Rows with `study_total` missing carry `None`.
    Counts(Vec<(FrequencyRecord, Option<u64>)>),
}

impl ProbabilityFile {
    /// Probability mode becomes the catalog directly; counts mode pools the counts.
    pub fn catalog(&self, observed: &BTreeSet<MarkerId>) -> Result<Catalog, CliError> {
        match self {
            ProbabilityFile::Probabilities(rows) => Ok(Catalog::from_entries(rows.iter().cloned())?),
            ProbabilityFile::Counts(rows) => {
                if rows.iter().any(|r| r.1.is_none()) {
                    return Err(CliError::Usage(
                        "counts file without study_total can only be used with estimate-probs".into(),
                    ));
                }
                let records: Vec<FrequencyRecord> = rows.iter().map(|r| r.0.clone()).collect();
                Ok(clonality::build_catalog(&records, observed, None)?)
            }
        }
    }
}

struct Table<'a> {
    path: &'a str,
    header: Vec<&'a str>,
    header_line: usize,
    rows: Vec<(usize, Vec<&'a str>)>,
}

fn split(line: &str) -> Vec<&str> {
    line.split('\t').map(str::trim).collect()
}

fn read_table<'a>(path: &'a str, text: &'a str) -> Result<Table<'a>, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (header_line, header) = lines
        .next()
        .map(|(n, l)| (n, split(l)))
        .ok_or_else(|| CliError::parse(path, 1, "missing header line"))?;
    let mut rows = Vec::new();
    for (n, line) in lines {
        let fields = split(line);
        if fields.len() != header.len() {
            return Err(CliError::parse(
                path,
                n,
                format!("expected {} tab-separated fields, found {}", header.len(), fields.len()),
            ));
        }
        rows.push((n, fields));
    }
    Ok(Table {
        path,
        header,
        header_line,
        rows,
    })
}

fn field<T: FromStr>(path: &str, line: usize, name: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::parse(path, line, format!("invalid {name} `{value}`")))
}

fn marker(path: &str, line: usize, value: &str) -> Result<MarkerId, CliError> {
    MarkerId::new(value).map_err(|e| CliError::parse(path, line, e.to_string()))
}

pub fn parse_case_file(path: &str, text: &str) -> Result<CaseFile, CliError> {
    let table = read_table(path, text)?;
    if table.header != CASE_HEADER {
        return Err(CliError::parse(
            path,
            table.header_line,
            format!("expected header `{}`", CASE_HEADER.join("\\t")),
        ));
    }
    let mut tumors: Vec<MutationProfile> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (n, row) in &table.rows {
        let (tumor, label) = (row[0], row[1]);
        if tumor.is_empty() {
            return Err(CliError::parse(path, *n, "empty tumor id"));
        }
        let slot = *index.entry(tumor.to_string()).or_insert_with(|| {
            tumors.push(MutationProfile::new(tumor, []));
            tumors.len() - 1
        });
        if label == NO_MUTATION {
            continue;
        }
        let id = marker(path, *n, label)?;
        if !tumors[slot].mutations.insert(id) {
            return Err(CliError::parse(
                path,
                *n,
                format!("duplicate row for tumor `{tumor}`, marker `{label}`"),
            ));
        }
    }
    if tumors.is_empty() {
        return Err(CliError::parse(path, table.header_line, "no tumors listed"));
    }
    Ok(CaseFile { tumors })
}

pub fn parse_probability_file(path: &str, text: &str) -> Result<ProbabilityFile, CliError> {
    let table = read_table(path, text)?;
    let mut seen = BTreeSet::new();
    let mut check_unique = |n: usize, id: &MarkerId| {
        if seen.insert(id.clone()) {
            Ok(())
        } else {
            Err(CliError::parse(path, n, format!("duplicate marker `{id}`")))
        }
    };
    if table.header == PROB_HEADER {
        let mut rows = Vec::with_capacity(table.rows.len());
        for (n, row) in &table.rows {
            let id = marker(path, *n, row[0])?;
            check_unique(*n, &id)?;
            let p: f64 = field(path, *n, "probability", row[1])?;
            if !(p > 0.0 && p < 1.0) {
                return Err(CliError::parse(path, *n, format!("probability {p} outside (0, 1)")));
            }
            rows.push((id, p));
        }
        return Ok(ProbabilityFile::Probabilities(rows));
    }
    let width = table.header.len();
    if !(4..=5).contains(&width) || table.header[..] != COUNT_HEADER[..width] {
        return Err(CliError::parse(
            table.path,
            table.header_line,
            format!(
                "expected header `{}` or `{}`",
                PROB_HEADER.join("\\t"),
                COUNT_HEADER.join("\\t")
            ),
        ));
    }
    let mut rows = Vec::with_capacity(table.rows.len());
    for (n, row) in &table.rows {
        let id = marker(path, *n, row[0])?;
        check_unique(*n, &id)?;
        let study_total = match row.get(4) {
            Some(v) => Some(field(path, *n, "study_total", v)?),
            None => None,
        };
        let record = FrequencyRecord {
            marker: id,
            ref_mutated: field(path, *n, "ref_mutated", row[1])?,
            ref_total: field(path, *n, "ref_total", row[2])?,
            study_mutated: field(path, *n, "study_mutated", row[3])?,
            study_total: study_total.unwrap_or(0),
        };
        if study_total.is_some() {
            record
                .validate()
                .map_err(|e| CliError::parse(path, *n, e.to_string()))?;
        }
        rows.push((record, study_total));
    }
    Ok(ProbabilityFile::Counts(rows))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_file_long_form() {
        let text = "# comment\ntumor_id\tmarker_id\nA\tKRAS G12D\nB\t.\n\nA\tTP53\n";
        let case = parse_case_file("x", text).unwrap();
        assert_eq!(case.tumors.len(), 2);
        assert_eq!(case.tumor("A").unwrap().mutations.len(), 2);
        assert!(case.tumor("B").unwrap().is_empty());
    }

    #[test]
    fn case_file_errors_carry_line_numbers() {
        let dup = "tumor_id\tmarker_id\nA\tM1\nA\tM1\n";
        assert_eq!(
            parse_case_file("f", dup).unwrap_err().to_string(),
            "f:3: duplicate row for tumor `A`, marker `M1`"
        );
        let short = "tumor_id\tmarker_id\nA\n";
        assert!(parse_case_file("f", short).unwrap_err().to_string().starts_with("f:2:"));
        assert!(parse_case_file("f", "tumor\tmarker\n").is_err());
        assert!(parse_case_file("f", "tumor_id\tmarker_id\n").is_err());
    }

    #[test]
    fn probability_modes() {
        let probs = parse_probability_file("p", "marker_id\tprobability\nM1\t0.1\n").unwrap();
        assert_eq!(
            probs,
            ProbabilityFile::Probabilities(vec![(MarkerId::new("M1").unwrap(), 0.1)])
        );
        let counts = parse_probability_file(
            "c",
            "marker_id\tref_mutated\tref_total\tstudy_mutated\nM1\t20\t248\t0\n",
        )
        .unwrap();
        match counts {
            ProbabilityFile::Counts(rows) => assert_eq!(rows[0].1, None),
            other => panic!("{other:?}"),
        }
        let bad = parse_probability_file("p", "marker_id\tprobability\nM1\t1.5\n").unwrap_err();
        assert!(bad.to_string().starts_with("p:2:"));
        let bad = parse_probability_file(
            "c",
            "marker_id\tref_mutated\tref_total\tstudy_mutated\tstudy_total\nM1\t9\t5\t0\t1\n",
        );
        assert!(bad.unwrap_err().to_string().starts_with("c:2:"));
    }
}

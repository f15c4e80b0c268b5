//! Marginal mutation probabilities from pooled reference-cohort and study counts.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{clamp_probability, MarkerCatalog, MarkerId};
use crate::scalar::Scalar;

/// Probabilities below this are treated as "rare" markers.
pub const RARE_THRESHOLD: f64 = 0.01;

/// Mutation counts for one marker in a reference cohort and in the study at hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyRecord {
    pub marker: MarkerId,
    pub ref_mutated: u64,
    pub ref_total: u64,
    pub study_mutated: u64,
    pub study_total: u64,
}

impl FrequencyRecord {
    pub fn validate(&self) -> Result<()> {
        if self.ref_mutated > self.ref_total || self.study_mutated > self.study_total {
            return Err(Error::InvalidCounts(self.marker.to_string()));
        }
        if self.ref_total + self.study_total == 0 {
            return Err(Error::ZeroDenominator(self.marker.to_string()));
        }
        Ok(())
    }

    pub fn pooled_mutated(&self) -> u64 {
        self.ref_mutated + self.study_mutated
    }

    pub fn pooled_total(&self) -> u64 {
        self.ref_total + self.study_total
    }
}

/// Pooled relative frequency `(a_x + b_x) / (a + b)`, clamped into the catalog range.
///
/// A mutation never seen in the reference cohort and seen once in a single-case
/// study gets `1 / (a + 1)`.
pub fn estimate_marginal_probability<F: Scalar>(rec: &FrequencyRecord) -> Result<F> {
    rec.validate()?;
    let num = F::from_u64(rec.pooled_mutated()).expect("count fits scalar");
    let den = F::from_u64(rec.pooled_total()).expect("count fits scalar");
    Ok(clamp_probability(num / den))
}

/// Cohort sizes used to assign a probability to observed markers without a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefaultAssignment {
    pub ref_cohort_size: u64,
    pub study_size: u64,
}

impl DefaultAssignment {
    pub fn probability<F: Scalar>(&self) -> Result<F> {
        let total = self.ref_cohort_size + self.study_size;
        if total == 0 {
            return Err(Error::InvalidArgument("default cohort size is zero".into()));
        }
        Ok(clamp_probability(
            F::one() / F::from_u64(total).expect("count fits scalar"),
        ))
    }
}

/// Builds a catalog from frequency records.
///
/// Observed markers without a record get `1 / (a + b)` when `defaults` is set,
/// otherwise they are reported together in one error.
pub fn build_catalog<F: Scalar>(
    records: &[FrequencyRecord],
    observed: &BTreeSet<MarkerId>,
    defaults: Option<DefaultAssignment>,
) -> Result<MarkerCatalog<F>> {
    let mut by_id: BTreeMap<&MarkerId, &FrequencyRecord> = BTreeMap::new();
    for rec in records {
        if by_id.insert(&rec.marker, rec).is_some() {
            return Err(Error::DuplicateMarker(rec.marker.to_string()));
        }
    }
    let mut catalog = MarkerCatalog::new();
    for rec in records {
        let p = estimate_marginal_probability::<F>(rec)?;
        if rec.pooled_mutated() == 0 && observed.contains(&rec.marker) {
            log::warn!(
                "marker `{}` is observed but has zero pooled count; probability floor applied",
                rec.marker
            );
        }
        catalog.insert(rec.marker.clone(), p)?;
    }
    let missing: Vec<&MarkerId> = observed.iter().filter(|id| !by_id.contains_key(id)).collect();
    if missing.is_empty() {
        return Ok(catalog);
    }
    match defaults {
        Some(d) => {
            let p = d.probability::<F>()?;
            for id in missing {
                catalog.insert(id.clone(), p)?;
            }
            Ok(catalog)
        }
        None => Err(Error::MissingRecords(missing.iter().map(|id| id.to_string()).collect())),
    }
}

pub fn is_rare<F: Scalar>(p: F) -> bool {
    p < F::lit(RARE_THRESHOLD)
}

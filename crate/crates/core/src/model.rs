//! The two-phase mutation model and the observation sets derived from a tumor pair.
//!
//! Each marker `i` has a marginal mutation probability `p_i`. For a pair of
//! tumors, with probability `xi` the marker's status is decided once in the
//! shared clonal phase (both tumors carry the same outcome); otherwise each
//! tumor mutates independently with probability `p_i`. Either way each tumor
//! individually is mutated with probability `p_i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest probability admitted into a catalog.
pub const PROB_FLOOR: f64 = 1e-6;
/// Largest probability admitted into a catalog.
pub const PROB_CEIL: f64 = 1.0 - 1e-6;

/// Clamps a probability into `[PROB_FLOOR, PROB_CEIL]`.
pub fn clamp_probability<F: Scalar>(p: F) -> F {
    p.max(F::lit(PROB_FLOOR)).min(F::lit(PROB_CEIL))
}

fn check_open_unit<F: Scalar>(p: F) -> Result<F> {
    if p > F::zero() && p < F::one() {
        Ok(p)
    } else {
        Err(Error::ProbabilityDomain(p.as_f64()))
    }
}

/// Identifier of one specific potential mutation, e.g. `"KRAS G12D"`.
///
/// Compared by exact string equality; no nomenclature normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MarkerId(String);

impl MarkerId {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::EmptyMarkerId);
        }
        Ok(Self(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MarkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for MarkerId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::new(s)
    }
}

impl TryFrom<&str> for MarkerId {
    type Error = Error;

    fn try_from(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

impl From<MarkerId> for String {
    fn from(id: MarkerId) -> Self {
        id.0
    }
}

/// Marginal mutation probability for every known marker.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerCatalog<F> {
    entries: BTreeMap<MarkerId, F>,
}

impl<F: Scalar> Default for MarkerCatalog<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Scalar> MarkerCatalog<F> {
    pub fn new() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Builds a catalog, rejecting duplicate ids. Probabilities are clamped.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MarkerId, F)>,
    {
        let mut catalog = Self::new();
        for (id, p) in entries {
            catalog.insert(id, p)?;
        }
        Ok(catalog)
    }

    /// Adds a marker. `p` must lie in `[0, 1]`; it is clamped into the admitted range.
    pub fn insert(&mut self, id: MarkerId, p: F) -> Result<()> {
        if !(p >= F::zero() && p <= F::one()) {
            return Err(Error::ProbabilityDomain(p.as_f64()));
        }
        if self.entries.contains_key(&id) {
            return Err(Error::DuplicateMarker(id.0));
        }
        self.entries.insert(id, clamp_probability(p));
        Ok(())
    }

    pub fn get(&self, id: &MarkerId) -> Option<F> {
        self.entries.get(id).copied()
    }

    pub fn contains(&self, id: &MarkerId) -> bool {
        self.entries.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MarkerId, F)> + '_ {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    fn lookup(&self, id: &MarkerId) -> Result<F> {
        self.get(id).ok_or_else(|| Error::CatalogMiss(id.0.clone()))
    }
}

/// The set of markers observed mutated in one tumor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationProfile {
    pub tumor_id: String,
    pub mutations: BTreeSet<MarkerId>,
}

impl MutationProfile {
    pub fn new(tumor_id: impl Into<String>, mutations: impl IntoIterator<Item = MarkerId>) -> Self {
        Self {
            tumor_id: tumor_id.into(),
            mutations: mutations.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.mutations.is_empty()
    }
}

/// Matched (set A) and unmatched (E minus A) markers for one tumor pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairObservation<F> {
    pub shared: Vec<(MarkerId, F)>,
    pub unshared: Vec<(MarkerId, F)>,
    pub union_size: usize,
}

impl<F: Scalar> PairObservation<F> {
    pub fn n_matches(&self) -> usize {
        self.shared.len()
    }

    /// Match indicators over the union, in marker-id order within each part.
    pub fn conditional_data(&self) -> crate::inference::ConditionalData<F> {
        crate::inference::ConditionalData::from_parts(
            self.shared.iter().map(|(_, p)| *p),
            self.unshared.iter().map(|(_, p)| *p),
        )
    }
}

/// Splits two profiles into the matched set and the symmetric difference.
pub fn derive_pair_observation<F: Scalar>(
    a: &MutationProfile,
    b: &MutationProfile,
    catalog: &MarkerCatalog<F>,
) -> Result<PairObservation<F>> {
    let shared = a
        .mutations
        .intersection(&b.mutations)
        .map(|id| Ok((id.clone(), catalog.lookup(id)?)))
        .collect::<Result<Vec<_>>>()?;
    let unshared = a
        .mutations
        .symmetric_difference(&b.mutations)
        .map(|id| Ok((id.clone(), catalog.lookup(id)?)))
        .collect::<Result<Vec<_>>>()?;
    let union_size = shared.len() + unshared.len();
    Ok(PairObservation {
        shared,
        unshared,
        union_size,
    })
}

/// Probability that a mutation arose in the shared clonal phase.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClonalitySignal<F>(F);

impl<F: Scalar> ClonalitySignal<F> {
    pub fn new(xi: F) -> Result<Self> {
        if xi >= F::zero() && xi <= F::one() {
            Ok(Self(xi))
        } else {
            Err(Error::SignalDomain(xi.as_f64()))
        }
    }

    /// Independent tumors.
    pub fn zero() -> Self {
        Self(F::zero())
    }

    pub fn one() -> Self {
        Self(F::one())
    }

    pub fn value(self) -> F {
        self.0
    }
}

/// Joint outcome of one marker across a tumor pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcomeDistribution<F> {
    pub both: F,
    /// Total over the two "mutated in one tumor only" outcomes.
    pub exactly_one: F,
    pub neither: F,
}

pub fn pair_outcome_probabilities<F: Scalar>(p: F, xi: ClonalitySignal<F>) -> Result<PairOutcomeDistribution<F>> {
    let p = check_open_unit(p)?;
    let xi = xi.value();
    let indep = F::one() - xi;
    let q = F::one() - p;
    Ok(PairOutcomeDistribution {
        both: xi * p + indep * p * p,
        exactly_one: F::lit(2.0) * indep * p * q,
        neither: xi * q + indep * q * q,
    })
}

/// Probability that a marker is matched given it is mutated in at least one tumor.
///
/// Equals `p / (2 - p)` for independent tumors and 1 under full clonality.
pub fn match_probability<F: Scalar>(p: F, xi: ClonalitySignal<F>) -> Result<F> {
    let p = check_open_unit(p)?;
    Ok(match_probability_unchecked(p, xi.value()))
}

#[inline]
pub(crate) fn match_probability_unchecked<F: Scalar>(p: F, xi: F) -> F {
    let indep = F::one() - xi;
    (xi + indep * p) / (xi + indep * (F::lit(2.0) - p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn id(s: &str) -> MarkerId {
        MarkerId::new(s).unwrap()
    }

    fn xi(v: f64) -> ClonalitySignal<f64> {
        ClonalitySignal::new(v).unwrap()
    }

    #[test]
    fn outcome_probabilities_examples() {
        let d = pair_outcome_probabilities(0.1, xi(0.0)).unwrap();
        assert_abs_diff_eq!(d.both, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(d.exactly_one, 0.18, epsilon = 1e-15);
        assert_abs_diff_eq!(d.neither, 0.81, epsilon = 1e-15);

        let d = pair_outcome_probabilities(0.1, xi(1.0)).unwrap();
        assert_abs_diff_eq!(d.both, 0.1, epsilon = 1e-15);
        assert_eq!(d.exactly_one, 0.0);
        assert_abs_diff_eq!(d.neither, 0.9, epsilon = 1e-15);

        let d = pair_outcome_probabilities(0.1, xi(0.25)).unwrap();
        assert_abs_diff_eq!(d.both, 0.0325, epsilon = 1e-15);
        assert_abs_diff_eq!(d.exactly_one, 0.135, epsilon = 1e-15);
        assert_abs_diff_eq!(d.neither, 0.8325, epsilon = 1e-15);
        assert_abs_diff_eq!(d.both + d.exactly_one + d.neither, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn outcome_probabilities_reject_degenerate_p() {
        assert!(matches!(
            pair_outcome_probabilities(0.0, xi(0.5)),
            Err(Error::ProbabilityDomain(_))
        ));
        assert!(pair_outcome_probabilities(1.0, xi(0.5)).is_err());
        assert!(match_probability(1.2, xi(0.5)).is_err());
    }

    #[test]
    fn match_probability_examples() {
        assert_abs_diff_eq!(
            match_probability(0.081, xi(0.0)).unwrap(),
            0.081 / 1.919,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(match_probability(0.081, xi(0.0)).unwrap(), 0.042209, epsilon = 1e-6);
        assert_eq!(match_probability(0.37, xi(1.0)).unwrap(), 1.0);
        let q = match_probability(0.1, xi(0.25)).unwrap();
        assert_abs_diff_eq!(q, 0.325 / 1.675, epsilon = 1e-15);
        let d = pair_outcome_probabilities(0.1, xi(0.25)).unwrap();
        assert_abs_diff_eq!(q, d.both / (d.both + d.exactly_one), epsilon = 1e-15);
    }

    #[test]
    fn signal_bounds() {
        assert!(ClonalitySignal::new(-0.01f64).is_err());
        assert!(ClonalitySignal::new(1.01f64).is_err());
        assert!(ClonalitySignal::new(f64::NAN).is_err());
        assert_eq!(ClonalitySignal::<f64>::one().value(), 1.0);
    }

    #[test]
    fn works_in_single_precision() {
        let d = pair_outcome_probabilities(0.1f32, ClonalitySignal::new(0.25f32).unwrap()).unwrap();
        assert!((d.both - 0.0325).abs() < 1e-6);
        assert!((d.both + d.exactly_one + d.neither - 1.0).abs() < 1e-6);
    }

    #[test]
    fn catalog_clamps_and_rejects_duplicates() {
        let mut cat = MarkerCatalog::<f64>::new();
        cat.insert(id("A"), 0.0).unwrap();
        cat.insert(id("B"), 1.0).unwrap();
        assert_eq!(cat.get(&id("A")), Some(PROB_FLOOR));
        assert_eq!(cat.get(&id("B")), Some(PROB_CEIL));
        assert_eq!(cat.insert(id("A"), 0.3), Err(Error::DuplicateMarker("A".into())));
        assert!(cat.insert(id("C"), 1.5).is_err());
        assert!(MarkerId::new("").is_err());
    }

    #[test]
    fn identical_and_disjoint_profiles() {
        let cat = MarkerCatalog::from_entries([(id("X"), 0.1), (id("Y"), 0.2)]).unwrap();
        let a = MutationProfile::new("a", [id("X")]);
        let obs = derive_pair_observation(&a, &a.clone(), &cat).unwrap();
        assert_eq!(obs.shared, vec![(id("X"), 0.1)]);
        assert!(obs.unshared.is_empty());
        assert_eq!(obs.union_size, 1);

        let b = MutationProfile::new("b", [id("Y")]);
        let obs = derive_pair_observation(&a, &b, &cat).unwrap();
        assert!(obs.shared.is_empty());
        assert_eq!(obs.union_size, 2);
    }

    #[test]
    fn unknown_marker_is_named() {
        let cat = MarkerCatalog::from_entries([(id("X"), 0.1)]).unwrap();
        let a = MutationProfile::new("a", [id("X"), id("KRAS G13D")]);
        let b = MutationProfile::new("b", [id("X")]);
        assert_eq!(
            derive_pair_observation(&a, &b, &cat),
            Err(Error::CatalogMiss("KRAS G13D".into()))
        );
    }
}

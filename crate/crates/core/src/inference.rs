//! Conditional and unconditional log-likelihoods in the clonality signal, the
//! constrained MLE, and the resulting likelihood-ratio statistics.
//!
//! Statistics are computed as `l(xi_hat) - l(0)` directly from the Bernoulli /
//! multinomial likelihoods. The equivalent match-weight forms are kept as
//! [`conditional_statistic_weight_form`] and [`unconditional_statistic_weight_form`]
//! for cross-checking.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{match_probability_unchecked, ClonalitySignal};
use crate::optimize::{maximize_bounded, DEFAULT_GRID_POINTS, DEFAULT_TOLERANCE};
use crate::scalar::Scalar;

fn check_p<F: Scalar>(p: F) -> Result<()> {
    if p > F::zero() && p < F::one() {
        Ok(())
    } else {
        Err(Error::ProbabilityDomain(p.as_f64()))
    }
}

fn sort_by_p<F: Scalar, T>(items: &mut [T], key: impl Fn(&T) -> F) {
    items.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(Ordering::Equal));
}

/// Markers mutated in at least one tumor, with their match indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalData<F> {
    markers: Vec<(F, bool)>,
}

/// Markers sharing one probability, aggregated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchGroup<F> {
    pub p: F,
    pub matched: usize,
    pub unmatched: usize,
}

impl<F: Scalar> ConditionalData<F> {
    pub fn new(markers: Vec<(F, bool)>) -> Result<Self> {
        for &(p, _) in &markers {
            check_p(p)?;
        }
        Ok(Self { markers })
    }

    pub(crate) fn from_parts(matched: impl IntoIterator<Item = F>, unmatched: impl IntoIterator<Item = F>) -> Self {
        let markers = matched
            .into_iter()
            .map(|p| (p, true))
            .chain(unmatched.into_iter().map(|p| (p, false)))
            .collect();
        Self { markers }
    }

    pub fn markers(&self) -> &[(F, bool)] {
        &self.markers
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn n_matched(&self) -> usize {
        self.markers.iter().filter(|m| m.1).count()
    }

    pub fn probabilities(&self) -> Vec<F> {
        self.markers.iter().map(|m| m.0).collect()
    }

    /// Groups markers by identical probability, ordered by increasing `p`.
    pub fn groups(&self) -> Vec<MatchGroup<F>> {
        let mut sorted = self.markers.clone();
        sort_by_p(&mut sorted, |m| m.0);
        let mut groups: Vec<MatchGroup<F>> = Vec::new();
        for (p, matched) in sorted {
            match groups.last_mut() {
                Some(g) if g.p == p => {
                    if matched {
                        g.matched += 1;
                    } else {
                        g.unmatched += 1;
                    }
                }
                _ => groups.push(MatchGroup {
                    p,
                    matched: usize::from(matched),
                    unmatched: usize::from(!matched),
                }),
            }
        }
        groups
    }
}

/// MLE of the clonality signal and the likelihood-ratio statistic against `xi = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<F> {
    pub xi_hat: ClonalitySignal<F>,
    pub statistic: F,
    pub log_likelihood_at_mle: F,
}

pub(crate) fn grouped_conditional_log_likelihood<F: Scalar>(groups: &[MatchGroup<F>], xi: F) -> F {
    let two = F::lit(2.0);
    let indep = F::one() - xi;
    let mut total = F::zero();
    for g in groups {
        let denom = xi + indep * (two - g.p);
        if g.matched > 0 {
            let q = match_probability_unchecked(g.p, xi);
            total = total + F::from_count(g.matched) * q.ln();
        }
        if g.unmatched > 0 {
            if indep <= F::zero() {
                return F::neg_infinity();
            }
            let miss = two * indep * (F::one() - g.p) / denom;
            total = total + F::from_count(g.unmatched) * miss.ln();
        }
    }
    total
}

/// Conditional log-likelihood of the match indicators given the mutated set.
///
/// Returns `-inf` at `xi = 1` when any marker is unmatched.
pub fn conditional_log_likelihood<F: Scalar>(data: &ConditionalData<F>, xi: ClonalitySignal<F>) -> Result<F> {
    if data.is_empty() {
        return Err(Error::NoMutations);
    }
    Ok(grouped_conditional_log_likelihood(&data.groups(), xi.value()))
}

pub(crate) fn fit_conditional_groups<F: Scalar>(groups: &[MatchGroup<F>]) -> FitResult<F> {
    let matched: usize = groups.iter().map(|g| g.matched).sum();
    let unmatched: usize = groups.iter().map(|g| g.unmatched).sum();
    if matched == 0 {
        return FitResult {
            xi_hat: ClonalitySignal::zero(),
            statistic: F::zero(),
            log_likelihood_at_mle: grouped_conditional_log_likelihood(groups, F::zero()),
        };
    }
    if unmatched == 0 {
        let two = F::lit(2.0);
        let statistic = groups
            .iter()
            .map(|g| F::from_count(g.matched) * ((two - g.p) / g.p).ln())
            .fold(F::zero(), |a, b| a + b);
        return FitResult {
            xi_hat: ClonalitySignal::one(),
            statistic,
            log_likelihood_at_mle: F::zero(),
        };
    }
    let best = maximize_bounded(
        |xi| grouped_conditional_log_likelihood(groups, xi),
        F::zero(),
        F::one(),
        DEFAULT_GRID_POINTS,
        F::lit(DEFAULT_TOLERANCE),
    );
    let null = grouped_conditional_log_likelihood(groups, F::zero());
    FitResult {
        xi_hat: ClonalitySignal::new(best.argmax).unwrap_or(ClonalitySignal::zero()),
        statistic: (best.value - null).max(F::zero()),
        log_likelihood_at_mle: best.value,
    }
}

/// Constrained MLE of the clonality signal: exactly 0 without matches, exactly 1
/// when every observed mutation is matched.
pub fn mle_xi_conditional<F: Scalar>(data: &ConditionalData<F>) -> Result<ClonalitySignal<F>> {
    Ok(conditional_statistic(data)?.xi_hat)
}

/// The conditional likelihood-ratio statistic `S_c`.
pub fn conditional_statistic<F: Scalar>(data: &ConditionalData<F>) -> Result<FitResult<F>> {
    if data.is_empty() {
        return Err(Error::NoMutations);
    }
    Ok(fit_conditional_groups(&data.groups()))
}

/// `S_c` written as match weights: for `xi` strictly inside (0, 1),
/// `sum_A log(r/p + 1) - sum_E log(r/(2-p) + 1)` with `r = xi / (1 - xi)`.
pub fn conditional_statistic_weight_form<F: Scalar>(data: &ConditionalData<F>, xi: F) -> F {
    let r = xi / (F::one() - xi);
    let two = F::lit(2.0);
    data.markers
        .iter()
        .map(|&(p, matched)| {
            let miss = -(r / (two - p)).ln_1p();
            if matched {
                (r / p).ln_1p() + miss
            } else {
                miss
            }
        })
        .fold(F::zero(), |a, b| a + b)
}

/// Log match weight of a single matched marker. Decreasing in `p`.
pub fn match_weight<F: Scalar>(p: F, xi: F) -> F {
    (xi / (F::one() - xi) / p).ln_1p()
}

/// Outcome counts for every marker in the universe, aggregated by probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnconditionalGroup<F> {
    pub p: F,
    pub n_markers: usize,
    pub n_matched: usize,
    pub n_single: usize,
}

impl<F> UnconditionalGroup<F> {
    pub fn n_neither(&self) -> usize {
        self.n_markers - self.n_matched - self.n_single
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnconditionalSummary<F> {
    groups: Vec<UnconditionalGroup<F>>,
}

impl<F: Scalar> UnconditionalSummary<F> {
    /// Validates and merges groups with identical `p`.
    pub fn new(groups: impl IntoIterator<Item = UnconditionalGroup<F>>) -> Result<Self> {
        let mut groups: Vec<_> = groups.into_iter().collect();
        for g in &groups {
            check_p(g.p)?;
            if g.n_matched + g.n_single > g.n_markers {
                return Err(Error::InvalidArgument(format!(
                    "group with p = {} has {} matched + {} single of {} markers",
                    g.p, g.n_matched, g.n_single, g.n_markers
                )));
            }
        }
        sort_by_p(&mut groups, |g| g.p);
        let mut merged: Vec<UnconditionalGroup<F>> = Vec::with_capacity(groups.len());
        for g in groups {
            match merged.last_mut() {
                Some(m) if m.p == g.p => {
                    m.n_markers += g.n_markers;
                    m.n_matched += g.n_matched;
                    m.n_single += g.n_single;
                }
                _ => merged.push(g),
            }
        }
        Ok(Self { groups: merged })
    }

    pub fn groups(&self) -> &[UnconditionalGroup<F>] {
        &self.groups
    }

    pub fn n_markers(&self) -> usize {
        self.groups.iter().map(|g| g.n_markers).sum()
    }
}

fn unconditional_ll_raw<F: Scalar>(groups: &[UnconditionalGroup<F>], xi: F) -> F {
    let indep = F::one() - xi;
    let two = F::lit(2.0);
    let mut total = F::zero();
    for g in groups {
        let q = F::one() - g.p;
        if g.n_matched > 0 {
            let both = g.p * (xi + indep * g.p);
            total = total + F::from_count(g.n_matched) * both.ln();
        }
        if g.n_single > 0 {
            if indep <= F::zero() {
                return F::neg_infinity();
            }
            total = total + F::from_count(g.n_single) * (two * indep * g.p * q).ln();
        }
        let n_neither = g.n_neither();
        if n_neither > 0 {
            let neither = q * (xi + indep * q);
            total = total + F::from_count(n_neither) * neither.ln();
        }
    }
    total
}

/// Full-universe log-likelihood of the observed pair outcomes.
pub fn unconditional_log_likelihood<F: Scalar>(summary: &UnconditionalSummary<F>, xi: ClonalitySignal<F>) -> F {
    unconditional_ll_raw(&summary.groups, xi.value())
}

/// The unconditional likelihood-ratio statistic `S_u = l_u(xi_hat) - l_u(0)`.
pub fn unconditional_statistic<F: Scalar>(summary: &UnconditionalSummary<F>) -> FitResult<F> {
    let groups = &summary.groups;
    let best = maximize_bounded(
        |xi| unconditional_ll_raw(groups, xi),
        F::zero(),
        F::one(),
        DEFAULT_GRID_POINTS,
        F::lit(DEFAULT_TOLERANCE),
    );
    let null = unconditional_ll_raw(groups, F::zero());
    FitResult {
        xi_hat: ClonalitySignal::new(best.argmax).unwrap_or(ClonalitySignal::zero()),
        statistic: (best.value - null).max(F::zero()),
        log_likelihood_at_mle: best.value,
    }
}

/// `S_u` as match weights plus the universe-wide term, for `xi` strictly inside (0, 1):
/// `sum_A log(r/p + 1) - sum_E log(r/(1-p) + 1) + sum_D log(xi/(1-p) + 1 - xi)`.
pub fn unconditional_statistic_weight_form<F: Scalar>(summary: &UnconditionalSummary<F>, xi: F) -> F {
    let r = xi / (F::one() - xi);
    let mut total = F::zero();
    for g in &summary.groups {
        let q = F::one() - g.p;
        total = total + F::from_count(g.n_matched) * (r / g.p).ln_1p();
        total = total - F::from_count(g.n_matched + g.n_single) * (r / q).ln_1p();
        total = total + F::from_count(g.n_markers) * (xi / q + F::one() - xi).ln();
    }
    total
}

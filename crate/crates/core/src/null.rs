//! Null reference distributions for the conditional and unconditional
//! statistics, p-values, critical values and size-calibrated rejection rules.
//!
//! Under independence a marker mutated in at least one tumor is matched with
//! probability `q_i = p_i / (2 - p_i)`. The conditional null draws match
//! indicators from those Bernoullis (or enumerates all `2^|E|` match vectors)
//! and refits the statistic on each draw.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{
    fit_conditional_groups, unconditional_statistic, ConditionalData, FitResult, MatchGroup, UnconditionalGroup,
    UnconditionalSummary,
};
use crate::model::PairObservation;
use crate::rng::RngStream;

/// Absolute tolerance under which a null statistic counts as tied with the observed one.
pub const TIE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_EXACT_MAX: usize = 20;
pub const DEFAULT_SIMS: usize = 100_000;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 20_150_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NullDistribution {
    MonteCarlo {
        samples: Vec<f64>,
    },
    /// `(statistic, probability)`, one atom per enumerated outcome.
    Exact {
        atoms: Vec<(f64, f64)>,
    },
}

impl NullDistribution {
    pub fn method(&self) -> Method {
        match self {
            NullDistribution::MonteCarlo { .. } => Method::MonteCarlo,
            NullDistribution::Exact { .. } => Method::Exact,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            NullDistribution::MonteCarlo { samples } => samples.len(),
            NullDistribution::Exact { atoms } => atoms.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(value, mass)` pairs sorted by value with ties merged.
    fn sorted_masses(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = match self {
            NullDistribution::MonteCarlo { samples } => {
                let w = 1.0 / samples.len() as f64;
                samples.iter().map(|&s| (s, w)).collect()
            }
            NullDistribution::Exact { atoms } => atoms.clone(),
        };
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for (v, m) in pts {
            match merged.last_mut() {
                Some(last) if v - last.0 <= TIE_TOLERANCE => last.1 += m,
                _ => merged.push((v, m)),
            }
        }
        merged
    }
}

/// Memoizes the conditional fit by per-probability-group match counts.
///
/// The statistic depends on a match vector only through how many markers of
/// each distinct probability are matched, so the observed statistic and every
/// null draw go through the same cached evaluation.
pub(crate) struct StatisticCache {
    group_of: Vec<usize>,
    group_p: Vec<f64>,
    group_size: Vec<u32>,
    cache: HashMap<Vec<u32>, FitResult<f64>>,
    scratch: Vec<MatchGroup<f64>>,
}

impl StatisticCache {
    pub(crate) fn new(ps: &[f64]) -> Self {
        let mut distinct: Vec<f64> = ps.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let group_of: Vec<usize> = ps
            .iter()
            .map(|p| distinct.binary_search_by(|d| d.total_cmp(p)).expect("present"))
            .collect();
        let mut group_size = vec![0u32; distinct.len()];
        for &g in &group_of {
            group_size[g] += 1;
        }
        Self {
            group_of,
            scratch: Vec::with_capacity(distinct.len()),
            group_p: distinct,
            group_size,
            cache: HashMap::new(),
        }
    }

    pub(crate) fn n_groups(&self) -> usize {
        self.group_p.len()
    }

    pub(crate) fn group_of(&self, marker: usize) -> usize {
        self.group_of[marker]
    }

    pub(crate) fn fit(&mut self, counts: &[u32]) -> FitResult<f64> {
        if let Some(fit) = self.cache.get(counts) {
            return *fit;
        }
        self.scratch.clear();
        for (g, &m) in counts.iter().enumerate() {
            self.scratch.push(MatchGroup {
                p: self.group_p[g],
                matched: m as usize,
                unmatched: (self.group_size[g] - m) as usize,
            });
        }
        let fit = fit_conditional_groups(&self.scratch);
        self.cache.insert(counts.to_vec(), fit);
        fit
    }

    pub(crate) fn statistic(&mut self, counts: &[u32]) -> f64 {
        if counts.iter().all(|&c| c == 0) {
            return 0.0;
        }
        self.fit(counts).statistic
    }
}

fn null_match_probabilities(ps: &[f64]) -> Result<Vec<f64>> {
    if ps.is_empty() {
        return Err(Error::NoMutations);
    }
    ps.iter()
        .map(|&p| {
            if p > 0.0 && p < 1.0 {
                Ok(p / (2.0 - p))
            } else {
                Err(Error::ProbabilityDomain(p))
            }
        })
        .collect()
}

/// Monte Carlo null of `S_c`: `sims` independent match vectors over the mutated set.
pub fn sample_conditional_null(ps: &[f64], sims: usize, stream: RngStream) -> Result<NullDistribution> {
    if sims == 0 {
        return Err(Error::InvalidArgument(
            "number of simulations must be at least 1".into(),
        ));
    }
    let q = null_match_probabilities(ps)?;
    let mut cache = StatisticCache::new(ps);
    let mut counts = vec![0u32; cache.n_groups()];
    let mut rng = stream.rng();
    let samples = (0..sims)
        .map(|_| {
            counts.iter_mut().for_each(|c| *c = 0);
            for (i, &qi) in q.iter().enumerate() {
                if rng.random::<f64>() < qi {
                    counts[cache.group_of(i)] += 1;
                }
            }
            cache.statistic(&counts)
        })
        .collect();
    Ok(NullDistribution::MonteCarlo { samples })
}

/// Exact null of `S_c` by enumerating all `2^|E|` match vectors.
pub fn exact_conditional_null(ps: &[f64], exact_max: usize) -> Result<NullDistribution> {
    if ps.len() > exact_max {
        return Err(Error::TooLargeForExact {
            n: ps.len(),
            max: exact_max,
        });
    }
    let q = null_match_probabilities(ps)?;
    let mut cache = StatisticCache::new(ps);
    let mut counts = vec![0u32; cache.n_groups()];
    let mut atoms = Vec::with_capacity(1usize << ps.len());
    enumerate(0, 1.0, &q, &mut counts, &mut cache, &mut atoms);
    Ok(NullDistribution::Exact { atoms })
}

fn enumerate(
    i: usize,
    prob: f64,
    q: &[f64],
    counts: &mut [u32],
    cache: &mut StatisticCache,
    atoms: &mut Vec<(f64, f64)>,
) {
    if i == q.len() {
        atoms.push((cache.statistic(counts), prob));
        return;
    }
    enumerate(i + 1, prob * (1.0 - q[i]), q, counts, cache, atoms);
    let g = cache.group_of(i);
    counts[g] += 1;
    enumerate(i + 1, prob * q[i], q, counts, cache, atoms);
    counts[g] -= 1;
}

/// Null mass at or above `observed`; ties (within [`TIE_TOLERANCE`]) count as extreme.
pub fn p_value(observed: f64, null: &NullDistribution) -> f64 {
    let cutoff = observed - TIE_TOLERANCE;
    let p = match null {
        NullDistribution::Exact { atoms } if atoms.iter().all(|a| a.0 >= cutoff) => 1.0,
        NullDistribution::MonteCarlo { samples } => {
            samples.iter().filter(|&&s| s >= cutoff).count() as f64 / samples.len() as f64
        }
        NullDistribution::Exact { atoms } => atoms.iter().filter(|a| a.0 >= cutoff).map(|a| a.1).sum(),
    };
    p.min(1.0)
}

/// Smallest null value `k` whose strict-exceedance mass is below `alpha`.
pub fn critical_value(null: &NullDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    if null.is_empty() {
        return Err(Error::InvalidArgument("empty null distribution".into()));
    }
    let masses = null.sorted_masses();
    let total: f64 = masses.iter().map(|m| m.1).sum();
    let mut above = total;
    for &(v, m) in &masses {
        above -= m;
        if above / total < alpha - 1e-12 {
            return Ok(v);
        }
    }
    Ok(masses.last().expect("nonempty").0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOptions {
    pub sims: usize,
    pub exact_max: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            sims: DEFAULT_SIMS,
            exact_max: DEFAULT_EXACT_MAX,
            alpha: DEFAULT_ALPHA,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub n_union: usize,
    pub n_matches: usize,
    pub xi_hat: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub method: Method,
    pub n_sims: usize,
    pub seed: Option<u64>,
}

impl TestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// End-to-end conditional test for one tumor pair, seeded from `options.seed`.
pub fn conditional_test(obs: &PairObservation<f64>, options: &TestOptions) -> Result<TestResult> {
    test_conditional_data(&obs.conditional_data(), options, RngStream::new(options.seed, 0))
}

/// Conditional test on match data with an explicit random stream.
///
/// Uses exact enumeration when `|E| <= exact_max`, otherwise `options.sims` Monte Carlo draws.
pub fn test_conditional_data(
    data: &ConditionalData<f64>,
    options: &TestOptions,
    stream: RngStream,
) -> Result<TestResult> {
    if data.is_empty() {
        return Err(Error::NoMutations);
    }
    let ps = data.probabilities();
    let method = if ps.len() <= options.exact_max {
        Method::Exact
    } else {
        Method::MonteCarlo
    };
    let mut cache = StatisticCache::new(&ps);
    let mut counts = vec![0u32; cache.n_groups()];
    for (i, &(_, matched)) in data.markers().iter().enumerate() {
        if matched {
            counts[cache.group_of(i)] += 1;
        }
    }
    let n_matches = data.n_matched();
    let fit = cache.fit(&counts);
    let p_value = if n_matches == 0 {
        1.0
    } else {
        let null = match method {
            Method::Exact => exact_conditional_null(&ps, options.exact_max)?,
            Method::MonteCarlo => sample_conditional_null(&ps, options.sims, stream)?,
        };
        p_value(fit.statistic, &null)
    };
    Ok(TestResult {
        n_union: ps.len(),
        n_matches,
        xi_hat: fit.xi_hat.value(),
        statistic: fit.statistic,
        p_value,
        method,
        n_sims: if method == Method::Exact { 0 } else { options.sims },
        seed: (method == Method::MonteCarlo).then_some(stream.seed),
    })
}

/// Monte Carlo null of `S_u` from whole-universe independent tumor pairs.
///
/// `universe` lists `(p, n_markers)` groups; the result depends only on the
/// universe, never on observed data.
pub fn sample_unconditional_null(
    universe: &[(f64, usize)],
    sims: usize,
    stream: RngStream,
) -> Result<NullDistribution> {
    if sims == 0 {
        return Err(Error::InvalidArgument(
            "number of simulations must be at least 1".into(),
        ));
    }
    let mut draws = Vec::with_capacity(universe.len());
    for &(p, n) in universe {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ProbabilityDomain(p));
        }
        let both = p * p;
        let single_given_not_both = 2.0 * p * (1.0 - p) / (1.0 - both);
        draws.push((p, n, both, single_given_not_both));
    }
    let mut rng = stream.rng();
    let mut samples = Vec::with_capacity(sims);
    for _ in 0..sims {
        let mut groups = Vec::with_capacity(draws.len());
        for &(p, n, both, single) in &draws {
            let n_matched = binomial(&mut rng, n, both);
            let n_single = binomial(&mut rng, n - n_matched, single);
            groups.push(UnconditionalGroup {
                p,
                n_markers: n,
                n_matched,
                n_single,
            });
        }
        let summary = UnconditionalSummary::new(groups)?;
        samples.push(unconditional_statistic(&summary).statistic);
    }
    Ok(NullDistribution::MonteCarlo { samples })
}

pub(crate) fn binomial<R: Rng + ?Sized>(rng: &mut R, n: usize, p: f64) -> usize {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n as u64, p)
        .expect("valid binomial parameters")
        .sample(rng) as usize
}

type UniverseKey = Vec<(u64, usize)>;

/// Unconditional nulls built once per marker universe.
pub struct UnconditionalNullCache {
    sims: usize,
    stream: RngStream,
    built: Mutex<HashMap<UniverseKey, Arc<NullDistribution>>>,
}

impl UnconditionalNullCache {
    pub fn new(sims: usize, stream: RngStream) -> Self {
        Self {
            sims,
            stream,
            built: Mutex::new(HashMap::new()),
        }
    }

    pub fn get(&self, universe: &[(f64, usize)]) -> Result<Arc<NullDistribution>> {
        let mut key: UniverseKey = universe.iter().map(|&(p, n)| (p.to_bits(), n)).collect();
        key.sort_unstable();
        let mut built = self.built.lock().expect("cache lock");
        if let Some(null) = built.get(&key) {
            return Ok(Arc::clone(null));
        }
        let null = Arc::new(sample_unconditional_null(universe, self.sims, self.stream)?);
        built.insert(key, Arc::clone(&null));
        Ok(null)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedRejection {
    /// Largest null p-value whose cumulative null mass stays within alpha.
    pub threshold: f64,
    /// The next null p-value above `threshold`, rejected only with `randomized_boundary_prob`.
    pub boundary: Option<f64>,
    pub randomized_boundary_prob: f64,
    pub calibrated_power: f64,
}

impl CalibratedRejection {
    /// Probability that the calibrated rule rejects a given p-value.
    pub fn rejection_probability(&self, p: f64) -> f64 {
        match self.boundary {
            Some(b) if (p - b).abs() <= 1e-12 => self.randomized_boundary_prob,
            Some(b) if p < b => 1.0,
            Some(_) => 0.0,
            None => f64::from(u8::from(p <= self.threshold)),
        }
    }
}

/// Randomized rejection rule with size exactly `alpha` under the empirical null
/// p-value distribution, and its rejection rate on `alt_pvalues`.
pub fn calibrated_rejection(null_pvalues: &[f64], alt_pvalues: &[f64], alpha: f64) -> Result<CalibratedRejection> {
    if null_pvalues.is_empty() || alt_pvalues.is_empty() {
        return Err(Error::InvalidArgument(
            "calibration needs nonempty p-value lists".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    let mut sorted = null_pvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let budget = alpha * n + 1e-9;

    // Distinct values with counts.
    let mut atoms: Vec<(f64, usize)> = Vec::new();
    for &v in &sorted {
        match atoms.last_mut() {
            Some(a) if (v - a.0).abs() <= 1e-12 => a.1 += 1,
            _ => atoms.push((v, 1)),
        }
    }
    let mut below = 0usize;
    let mut threshold = 0.0;
    let mut boundary = None;
    for &(v, c) in &atoms {
        if (below + c) as f64 <= budget {
            below += c;
            threshold = v;
        } else {
            boundary = Some((v, c));
            break;
        }
    }
    let randomized_boundary_prob = match boundary {
        Some((_, c)) => ((alpha * n - below as f64) / c as f64).clamp(0.0, 1.0),
        None => 0.0,
    };
    let mut rule = CalibratedRejection {
        threshold,
        boundary: boundary.map(|b| b.0),
        randomized_boundary_prob,
        calibrated_power: 0.0,
    };
    rule.calibrated_power =
        alt_pvalues.iter().map(|&p| rule.rejection_probability(p)).sum::<f64>() / alt_pvalues.len() as f64;
    Ok(rule)
}

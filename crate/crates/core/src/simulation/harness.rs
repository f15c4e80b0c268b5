//! Size and power of the conditional test by repeated simulation.
//!
//! Every replicate draws from its own stream `stream.substream(role).substream(r)`,
//! so reports are identical for any number of worker threads.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::generate::Universe;
use super::perturb::{inflate_rare, perturb_probabilities_logit};
use super::{Perturbation, ScenarioSpec};
use crate::error::{Error, Result};
use crate::inference::{unconditional_statistic, ConditionalData, UnconditionalGroup, UnconditionalSummary};
use crate::null::{
    calibrated_rejection, p_value, test_conditional_data, NullDistribution, TestOptions, UnconditionalNullCache,
};
use crate::rng::RngStream;

const ALT_ROLE: u64 = 0;
const NULL_ROLE: u64 = 1;

#[derive(Clone)]
pub struct HarnessOptions {
    /// Mutated sets up to this size use exact enumeration instead of `spec.sims` draws.
    pub exact_max: usize,
    /// Also run the unconditional test against nulls from this cache.
    pub unconditional: Option<Arc<UnconditionalNullCache>>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            exact_max: 12,
            unconditional: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnconditionalPower {
    pub rejection_rate: f64,
    pub calibrated_rejection_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    /// Fraction of replicates with conditional p-value at or below alpha.
    pub rejection_rate: f64,
    /// Rejection rate of the randomized rule with size exactly alpha.
    pub calibrated_rejection_rate: f64,
    pub mean_matches: f64,
    /// Sample standard deviation of the match count.
    pub sd_matches: f64,
    pub mean_mutations_per_tumor: f64,
    pub replicates: usize,
    pub unconditional: Option<UnconditionalPower>,
}

#[derive(Debug, Clone, Copy)]
struct Replicate {
    p_conditional: f64,
    p_unconditional: Option<f64>,
    matches: usize,
    mutations: usize,
}

struct Context<'a> {
    spec: &'a ScenarioSpec,
    universe: &'a Universe,
    test: TestOptions,
    unconditional_null: Option<Arc<NullDistribution>>,
}

fn analysis_probabilities(
    ps: Vec<f64>,
    perturbation: Perturbation,
    rng: &mut crate::rng::StreamRng,
) -> Result<Vec<f64>> {
    match perturbation {
        Perturbation::None => Ok(ps),
        Perturbation::LogitNoise { sigma } => perturb_probabilities_logit(&ps, sigma, rng),
        Perturbation::RareInflation { factor, threshold } => inflate_rare(&ps, factor, threshold),
    }
}

fn replicate(ctx: &Context<'_>, xi: f64, stream: RngStream) -> Result<Replicate> {
    let mut rng = stream.substream(0).rng();
    let pair = ctx.universe.sample_pair(xi, &mut rng);
    let union = pair.union();
    let matches = union.iter().filter(|m| m.1).count();

    // An empty mutated set leaves the test undefined; count it as not rejected.
    let p_conditional = if union.is_empty() {
        1.0
    } else {
        let true_ps: Vec<f64> = union.iter().map(|&(m, _)| ctx.universe.probability(m)).collect();
        let ps = analysis_probabilities(true_ps, ctx.spec.perturbation, &mut rng)?;
        let data = ConditionalData::new(ps.into_iter().zip(union.iter().map(|m| m.1)).collect())?;
        test_conditional_data(&data, &ctx.test, stream.substream(1))?.p_value
    };

    let p_unconditional = match &ctx.unconditional_null {
        Some(null) => {
            let signature = ctx.universe.p_signature();
            let mut matched = vec![0usize; signature.len()];
            let mut single = vec![0usize; signature.len()];
            for &(m, is_match) in &union {
                let class = ctx.universe.p_class(m);
                if is_match {
                    matched[class] += 1;
                } else {
                    single[class] += 1;
                }
            }
            let summary =
                UnconditionalSummary::new(signature.iter().enumerate().map(|(c, &(p, n))| UnconditionalGroup {
                    p,
                    n_markers: n,
                    n_matched: matched[c],
                    n_single: single[c],
                }))?;
            Some(p_value(unconditional_statistic(&summary).statistic, null))
        }
        None => None,
    };

    Ok(Replicate {
        p_conditional,
        p_unconditional,
        matches,
        mutations: pair.a.len() + pair.b.len(),
    })
}

fn run_replicates(ctx: &Context<'_>, xi: f64, stream: RngStream) -> Result<Vec<Replicate>> {
    (0..ctx.spec.replicates)
        .into_par_iter()
        .map(|r| replicate(ctx, xi, stream.substream(r as u64)))
        .collect()
}

fn rate(ps: &[f64], alpha: f64) -> f64 {
    ps.iter().filter(|&&p| p <= alpha).count() as f64 / ps.len() as f64
}

/// Estimates size (`xi = 0`) or power of the conditional test under a scenario.
pub fn run_size_power(spec: &ScenarioSpec, stream: RngStream) -> Result<PowerReport> {
    run_size_power_with(spec, stream, &HarnessOptions::default())
}

pub fn run_size_power_with(spec: &ScenarioSpec, stream: RngStream, options: &HarnessOptions) -> Result<PowerReport> {
    spec.validate()?;
    let universe = Universe::new(&spec.groups)?;
    let unconditional_null = match &options.unconditional {
        Some(cache) => Some(cache.get(&universe.p_signature())?),
        None => None,
    };
    let ctx = Context {
        spec,
        universe: &universe,
        test: TestOptions {
            sims: spec.sims,
            exact_max: options.exact_max,
            alpha: spec.alpha,
            seed: stream.seed,
        },
        unconditional_null,
    };

    let run = || -> Result<(Vec<Replicate>, Vec<Replicate>)> {
        let alt = run_replicates(&ctx, spec.xi, stream.substream(ALT_ROLE))?;
        let null = if spec.xi == 0.0 {
            alt.clone()
        } else {
            run_replicates(&ctx, 0.0, stream.substream(NULL_ROLE))?
        };
        Ok((alt, null))
    };
    let (alt, null) = match options.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let n = alt.len() as f64;
    let alt_p: Vec<f64> = alt.iter().map(|r| r.p_conditional).collect();
    let null_p: Vec<f64> = null.iter().map(|r| r.p_conditional).collect();
    let calibrated = calibrated_rejection(&null_p, &alt_p, spec.alpha)?;
    let mean_matches = alt.iter().map(|r| r.matches as f64).sum::<f64>() / n;
    let sd_matches = if alt.len() > 1 {
        (alt.iter()
            .map(|r| (r.matches as f64 - mean_matches).powi(2))
            .sum::<f64>()
            / (n - 1.0))
            .sqrt()
    } else {
        0.0
    };

    let unconditional = if ctx.unconditional_null.is_some() {
        let alt_u: Vec<f64> = alt.iter().filter_map(|r| r.p_unconditional).collect();
        let null_u: Vec<f64> = null.iter().filter_map(|r| r.p_unconditional).collect();
        Some(UnconditionalPower {
            rejection_rate: rate(&alt_u, spec.alpha),
            calibrated_rejection_rate: calibrated_rejection(&null_u, &alt_u, spec.alpha)?.calibrated_power,
        })
    } else {
        None
    };

    Ok(PowerReport {
        rejection_rate: rate(&alt_p, spec.alpha),
        calibrated_rejection_rate: calibrated.calibrated_power,
        mean_matches,
        sd_matches,
        mean_mutations_per_tumor: alt.iter().map(|r| r.mutations as f64).sum::<f64>() / (2.0 * n),
        replicates: alt.len(),
        unconditional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{preset_scenario, MarkerGroup};

    fn small(xi: f64) -> ScenarioSpec {
        ScenarioSpec {
            groups: vec![MarkerGroup::independent(10, 0.1), MarkerGroup::independent(990, 0.004)],
            xi,
            perturbation: Perturbation::None,
            replicates: 60,
            sims: 300,
            alpha: 0.05,
        }
    }

    #[test]
    fn null_calibration_is_exact() {
        let r = run_size_power(&small(0.0), RngStream::new(1, 0)).unwrap();
        assert!((r.calibrated_rejection_rate - 0.05).abs() < 1e-9);
        assert!(r.rejection_rate <= 0.05 + 3.0 * (0.05f64 * 0.95 / 60.0).sqrt());
        assert_eq!(r.replicates, 60);
        assert!(r.unconditional.is_none());
    }

    #[test]
    fn identical_across_thread_counts() {
        let spec = small(0.25);
        let cache = Arc::new(UnconditionalNullCache::new(300, RngStream::new(2, 99)));
        let opts = |t| HarnessOptions {
            threads: Some(t),
            unconditional: Some(Arc::clone(&cache)),
            ..HarnessOptions::default()
        };
        let one = run_size_power_with(&spec, RngStream::new(2, 0), &opts(1)).unwrap();
        let three = run_size_power_with(&spec, RngStream::new(2, 0), &opts(3)).unwrap();
        assert_eq!(one, three);
        assert!(one.unconditional.is_some());
    }

    #[test]
    fn strong_signal_is_detected() {
        let r = run_size_power(&small(0.8), RngStream::new(3, 0)).unwrap();
        assert!(r.rejection_rate > 0.8, "{r:?}");
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut spec = preset_scenario("table2-m5", 0.1).unwrap();
        spec.replicates = 0;
        assert!(run_size_power(&spec, RngStream::new(1, 0)).is_err());
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};

use rayon::prelude::*;
use serde::Serialize;

use clonality::simulation::{preset_scenario, run_size_power_with, HarnessOptions, ScenarioSpec};
use clonality::{
    conditional_test, derive_pair_observation, Catalog, MutationProfile, RngStream, TestOptions, TestResult,
};

use crate::formats::{parse_case_file, parse_probability_file, read_file, CaseFile, ProbabilityFile};
use crate::{CliError, EstimateArgs, InputArgs, NullArgs, PairsArgs, SimulateArgs, TestArgs};

#[derive(Debug, Serialize)]
struct TestOutput<'a> {
    tumor_a: &'a str,
    tumor_b: &'a str,
    n_union: usize,
    n_matches: usize,
    xi_hat: f64,
    statistic: f64,
    p_value: f64,
    method: &'static str,
    n_sims: usize,
    seed: Option<u64>,
}

fn load(input: &InputArgs) -> Result<(CaseFile, Catalog), CliError> {
    let case_path = input.mutations.display().to_string();
    let case = parse_case_file(&case_path, &read_file(&input.mutations)?)?;
    let prob_path = input.probs.display().to_string();
    let probs = parse_probability_file(&prob_path, &read_file(&input.probs)?)?;
    let catalog = probs.catalog(&case.markers())?;
    Ok((case, catalog))
}

fn options(null: &NullArgs) -> Result<TestOptions, CliError> {
    if !(null.alpha > 0.0 && null.alpha < 1.0) {
        return Err(CliError::Usage(format!("--alpha {} outside (0, 1)", null.alpha)));
    }
    if null.sims == 0 {
        return Err(CliError::Usage("--sims must be at least 1".into()));
    }
    Ok(TestOptions {
        sims: null.sims,
        exact_max: null.exact_max,
        alpha: null.alpha,
        seed: null.seed,
    })
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Some(n) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?
            .install(f)),
        None => Ok(f()),
    }
}

fn test_pair(
    a: &MutationProfile,
    b: &MutationProfile,
    catalog: &Catalog,
    opts: &TestOptions,
) -> Result<TestResult, CliError> {
    for t in [a, b] {
        if t.is_empty() {
            return Err(CliError::NoMutations(t.tumor_id.clone()));
        }
    }
    let obs = derive_pair_observation(a, b, catalog)?;
    Ok(conditional_test(&obs, opts)?)
}

pub fn test(args: &TestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = options(&args.null)?;
    let (case, catalog) = load(&args.input)?;
    let a = case
        .tumor(&args.tumor_a)
        .ok_or_else(|| CliError::UnknownTumor(args.tumor_a.clone()))?;
    let b = case
        .tumor(&args.tumor_b)
        .ok_or_else(|| CliError::UnknownTumor(args.tumor_b.clone()))?;
    if a.tumor_id == b.tumor_id {
        return Err(CliError::Usage("--tumor-a and --tumor-b name the same tumor".into()));
    }
    let r = with_threads(args.null.threads, || test_pair(a, b, &catalog, &opts))??;
    let json = TestOutput {
        tumor_a: &a.tumor_id,
        tumor_b: &b.tumor_id,
        n_union: r.n_union,
        n_matches: r.n_matches,
        xi_hat: r.xi_hat,
        statistic: r.statistic,
        p_value: r.p_value,
        method: r.method.as_str(),
        n_sims: r.n_sims,
        seed: r.seed,
    };
    serde_json::to_writer_pretty(&mut *out, &json).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

/// Symmetric p-value matrix; `NA` on the diagonal and for tumors without mutations.
/// No multiplicity adjustment is applied.
pub fn pairs(args: &PairsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let opts = options(&args.null)?;
    let (case, catalog) = load(&args.input)?;
    let tumors = &case.tumors;
    if tumors.len() < 2 {
        return Err(CliError::Usage("pairs needs at least two tumors".into()));
    }
    let n = tumors.len();
    let jobs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let results = with_threads(args.null.threads, || {
        jobs.par_iter()
            .map(|&(i, j)| {
                let (a, b) = (&tumors[i], &tumors[j]);
                if a.is_empty() || b.is_empty() {
                    return Ok(None);
                }
                test_pair(a, b, &catalog, &opts).map(|r| Some(r.p_value))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })??;
    let mut matrix = vec![vec![None; n]; n];
    for (&(i, j), p) in jobs.iter().zip(results) {
        matrix[i][j] = p;
        matrix[j][i] = p;
    }
    let mut w = BufWriter::new(out);
    write!(w, "tumor")?;
    for t in tumors {
        write!(w, "\t{}", t.tumor_id)?;
    }
    writeln!(w)?;
    for (t, row) in tumors.iter().zip(&matrix) {
        write!(w, "{}", t.tumor_id)?;
        for p in row {
            match p {
                Some(p) => write!(w, "\t{p}")?,
                None => write!(w, "\tNA")?,
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn scenarios(args: &SimulateArgs) -> Result<(String, Vec<ScenarioSpec>), CliError> {
    let (label, base) = match (&args.preset, &args.scenario) {
        (Some(name), _) => {
            let xi = args.xi.first().copied().unwrap_or(0.0);
            (name.clone(), preset_scenario(name, xi)?)
        }
        (None, Some(path)) => {
            let text = read_file(path)?;
            let spec: ScenarioSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::parse(&path.display().to_string(), e.line(), e.to_string()))?;
            let label = path
                .file_stem()
                .map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
            (label, spec)
        }
        (None, None) => return Err(CliError::Usage("either --preset or --scenario is required".into())),
    };
    let xis = if args.xi.is_empty() {
        vec![base.xi]
    } else {
        args.xi.clone()
    };
    let specs = xis
        .into_iter()
        .map(|xi| {
            let mut spec = base.with_xi(xi);
            if let Some(r) = args.replicates {
                spec.replicates = r;
            }
            if let Some(t) = args.sims {
                spec.sims = t;
            }
            spec.validate()?;
            Ok(spec)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok((label, specs))
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (label, specs) = scenarios(args)?;
    let mut sink: Box<dyn Write + '_> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?)),
        None => Box::new(BufWriter::new(out)),
    };
    if args.print_scenario {
        for spec in &specs {
            serde_json::to_writer_pretty(&mut sink, spec).map_err(io::Error::from)?;
            writeln!(sink)?;
        }
        sink.flush()?;
        return Ok(());
    }
    let mut options = HarnessOptions {
        threads: args.threads,
        ..HarnessOptions::default()
    };
    if let Some(m) = args.exact_max {
        options.exact_max = m;
    }
    writeln!(
        sink,
        "preset\txi\treplicates\tsims\trejection_rate\tcalibrated_rejection_rate\tmean_matches\tmean_mutations"
    )?;
    for spec in &specs {
        let report = run_size_power_with(spec, RngStream::new(args.seed, 0), &options)?;
        writeln!(
            sink,
            "{label}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            spec.xi,
            report.replicates,
            spec.sims,
            report.rejection_rate,
            report.calibrated_rejection_rate,
            report.mean_matches,
            report.mean_mutations_per_tumor
        )?;
    }
    sink.flush()?;
    Ok(())
}

pub fn estimate_probs(args: &EstimateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let path = args.counts.display().to_string();
    let rows = match parse_probability_file(&path, &read_file(&args.counts)?)? {
        ProbabilityFile::Counts(rows) => rows,
        ProbabilityFile::Probabilities(_) => {
            return Err(CliError::parse(
                &path,
                1,
                "expected a counts header, found a probability header",
            ))
        }
    };
    let mut w = BufWriter::new(out);
    writeln!(w, "marker_id\tprobability")?;
    for (mut record, study_total) in rows {
        record.study_total = study_total.unwrap_or(args.study_size);
        let p: f64 = clonality::estimate_marginal_probability(&record)?;
        writeln!(w, "{}\t{p}", record.marker)?;
    }
    w.flush()?;
    Ok(())
}

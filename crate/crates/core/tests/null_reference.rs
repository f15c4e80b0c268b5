use rand::{Rng, SeedableRng};

use clonality::{
    conditional_statistic, exact_conditional_null, p_value, sample_conditional_null, test_conditional_data,
    Conditional, Method, NullDistribution, RngStream, TestOptions,
};

fn random_instance(rng: &mut impl Rng) -> Vec<(f64, bool)> {
    let n = rng.random_range(1..=12);
    let mut markers: Vec<(f64, bool)> = (0..n)
        .map(|_| {
            let p = *[0.004, 0.008, 0.023, 0.081, 0.1, 0.3]
                .get(rng.random_range(0..6))
                .unwrap();
            (p, rng.random_bool(0.25))
        })
        .collect();
    markers[0].1 = true;
    markers
}

#[test]
fn exact_and_monte_carlo_agree() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    const T: usize = 200_000;
    for case in 0..10u64 {
        let data = Conditional::new(random_instance(&mut rng)).unwrap();
        let observed = conditional_statistic(&data).unwrap().statistic;
        let ps = data.probabilities();
        let exact = p_value(observed, &exact_conditional_null(&ps, 20).unwrap());
        let mc = p_value(
            observed,
            &sample_conditional_null(&ps, T, RngStream::new(5, case)).unwrap(),
        );
        let tol = 4.0 * (exact * (1.0 - exact) / T as f64).sqrt();
        assert!(
            (exact - mc).abs() <= tol.max(1e-12),
            "case {case}: exact {exact} mc {mc}"
        );
    }
}

#[test]
fn exact_atoms_sum_to_one() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let data = Conditional::new(random_instance(&mut rng)).unwrap();
        match exact_conditional_null(&data.probabilities(), 20).unwrap() {
            NullDistribution::Exact { atoms } => {
                assert_eq!(atoms.len(), 1 << data.len());
                assert!((atoms.iter().map(|a| a.1).sum::<f64>() - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn exact_p_values_lie_in_unit_interval() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let opts = TestOptions::default();
    for _ in 0..200 {
        let data = Conditional::new(random_instance(&mut rng)).unwrap();
        let r = test_conditional_data(&data, &opts, RngStream::new(1, 0)).unwrap();
        assert_eq!(r.method, Method::Exact);
        assert!(r.p_value > 0.0 && r.p_value <= 1.0, "{r:?}");
        assert!(r.n_matches <= r.n_union);
    }
    let none = Conditional::new(vec![(0.1, false), (0.004, false)]).unwrap();
    assert_eq!(
        test_conditional_data(&none, &opts, RngStream::new(1, 0))
            .unwrap()
            .p_value,
        1.0
    );
}

#[test]
fn nonmatches_weaken_evidence() {
    let kras = Conditional::new(vec![(0.081, true)]).unwrap();
    let with = |k: usize| {
        let mut m = vec![(0.081, true)];
        m.extend(std::iter::repeat_n((0.004, false), k));
        Conditional::new(m).unwrap()
    };
    let opts = TestOptions::default();
    let p = |d: &Conditional| test_conditional_data(d, &opts, RngStream::new(1, 0)).unwrap().p_value;
    let (a, b, c) = (p(&kras), p(&with(9)), p(&with(11)));
    assert!(a < b && b < c, "{a} {b} {c}");
    assert!((a - 0.042209484106).abs() < 1e-9);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let data = Conditional::new((0..24).map(|i| (0.004 + 0.01 * (i % 5) as f64, i % 7 == 0)).collect()).unwrap();
    let opts = TestOptions {
        sims: 20_000,
        ..TestOptions::default()
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| test_conditional_data(&data, &opts, RngStream::new(99, 0)).unwrap())
    };
    let one = run(1);
    assert_eq!(one.method, Method::MonteCarlo);
    assert_eq!(one, run(4));
}

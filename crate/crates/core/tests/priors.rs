use num_rational::Ratio;
use num_traits::ToPrimitive;
use proptest::prelude::*;

use clonality::{estimate_marginal_probability, FrequencyRecord, MarkerId};

fn record(ref_mutated: u64, ref_total: u64, study_mutated: u64, study_total: u64) -> FrequencyRecord {
    FrequencyRecord {
        marker: MarkerId::new("m").unwrap(),
        ref_mutated,
        ref_total,
        study_mutated,
        study_total,
    }
}

fn counts() -> impl Strategy<Value = (u64, u64, u64, u64)> {
    (1u64..5000, 0u64..200).prop_flat_map(|(rt, st)| (0..=rt, Just(rt), 0..=st, Just(st)))
}

proptest! {
    #[test]
    fn equals_pooled_fraction_exactly((a, at, b, bt) in counts()) {
        let p: f64 = estimate_marginal_probability(&record(a, at, b, bt)).unwrap();
        let exact = Ratio::new(a + b, at + bt).to_f64().unwrap();
        if exact > 1e-6 && exact < 1.0 - 1e-6 {
            prop_assert_eq!(p, exact);
        } else {
            prop_assert!((1e-6..=1.0 - 1e-6).contains(&p));
        }
    }

    #[test]
    fn monotone_in_counts((a, at, b, bt) in counts()) {
        let est = |r: FrequencyRecord| estimate_marginal_probability::<f64>(&r).unwrap();
        let base = est(record(a, at, b, bt));
        prop_assert!(est(record(a, at + 1, b, bt)) <= base);
        prop_assert!(est(record(a, at, b, bt + 1)) <= base);
        if a < at {
            prop_assert!(est(record(a + 1, at, b, bt)) >= base);
        }
        if b < bt {
            prop_assert!(est(record(a, at, b + 1, bt)) >= base);
        }
    }
}

#[test]
fn printed_probabilities_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for file in ["table1_probs.tsv", "table5_probs.tsv"] {
        let text = std::fs::read_to_string(dir.join(file)).unwrap();
        let rows: Vec<(MarkerId, f64)> = text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| {
                let (m, p) = l.split_once('\t').unwrap();
                (MarkerId::new(m).unwrap(), p.parse().unwrap())
            })
            .collect();
        let catalog = clonality::Catalog::from_entries(rows.clone()).unwrap();
        for (id, p) in rows {
            assert_eq!(catalog.get(&id).unwrap().to_bits(), p.to_bits(), "{id}");
        }
    }
}

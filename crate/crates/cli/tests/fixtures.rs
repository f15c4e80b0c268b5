use std::path::Path;

use clonality::derive_pair_observation;
use clonality_cli::formats::{parse_case_file, parse_probability_file, CaseFile};

fn load(case: &str, probs: &str) -> (CaseFile, clonality::Catalog) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let read = |n: &str| std::fs::read_to_string(dir.join(n)).unwrap();
    let case = parse_case_file(case, &read(case)).unwrap();
    let catalog = parse_probability_file(probs, &read(probs))
        .unwrap()
        .catalog(&case.markers())
        .unwrap();
    (case, catalog)
}

fn sets(case: &CaseFile, catalog: &clonality::Catalog, a: &str, b: &str) -> (Vec<String>, Vec<String>) {
    let obs = derive_pair_observation(case.tumor(a).unwrap(), case.tumor(b).unwrap(), catalog).unwrap();
    let names = |v: &[(clonality::MarkerId, f64)]| v.iter().map(|(m, _)| m.to_string()).collect::<Vec<_>>();
    (names(&obs.shared), names(&obs.unshared))
}

#[test]
fn colon_lung_case_matches_checkmarks() {
    let (case, catalog) = load("table1_mutations.tsv", "table1_probs.tsv");
    assert_eq!(catalog.len(), 19);
    let ids: Vec<&str> = case.tumors.iter().map(|t| t.tumor_id.as_str()).collect();
    assert_eq!(ids, ["T1", "T3", "Right", "Left/Tubular", "Left/Mucinous"]);
    let counts: Vec<usize> = case.tumors.iter().map(|t| t.mutations.len()).collect();
    assert_eq!(counts, [2, 6, 5, 7, 5]);

    let (a, e) = sets(&case, &catalog, "T3", "Left/Mucinous");
    assert_eq!(a, ["KRAS G12D"]);
    assert_eq!(e.len(), 9);
    let (a, e) = sets(&case, &catalog, "T3", "Left/Tubular");
    assert_eq!(a, ["KRAS G12D"]);
    assert_eq!(e.len(), 11);
    let (a, e) = sets(&case, &catalog, "Left/Tubular", "Left/Mucinous");
    assert_eq!(a.len(), 5);
    assert_eq!(e, ["ACVR2A A62G", "GUCY1A2 V627A"]);
    let (a, _) = sets(&case, &catalog, "T1", "Right");
    assert!(a.is_empty());

    let (kras, catalog) = load("table1_kras_mutations.tsv", "table1_probs.tsv");
    assert!(kras.tumor("T1").unwrap().is_empty());
    let (a, e) = sets(&kras, &catalog, "T3", "Left/Tubular");
    assert_eq!((a.len(), e.len()), (1, 0));
    let (a, e) = sets(&kras, &catalog, "Right", "Left/Tubular");
    assert_eq!((a.len(), e.len()), (0, 2));
}

#[test]
fn prostate_case_matches_checkmarks() {
    let (case, catalog) = load("table5_mutations.tsv", "table5_probs.tsv");
    assert_eq!(case.tumors.len(), 14);
    let empty: Vec<&str> = case
        .tumors
        .iter()
        .filter(|t| t.is_empty())
        .map(|t| t.tumor_id.as_str())
        .collect();
    assert_eq!(empty, ["P2", "P3", "P4", "P5", "P7", "P9", "L1"]);

    let (a, e) = sets(&case, &catalog, "P1", "B1");
    assert_eq!(a, ["PTEN del.", "SPOP F133L", "TP53 R248Q"]);
    assert!(e.is_empty());
    let (a, e) = sets(&case, &catalog, "M5", "M38");
    assert_eq!((a.len(), e.len()), (4, 0));
    let (a, e) = sets(&case, &catalog, "P6", "P1");
    assert_eq!(a, ["SPOP F133L"]);
    assert_eq!(e, ["PTEN del.", "TP53 R248Q"]);
    let (a, e) = sets(&case, &catalog, "P8", "M40");
    assert_eq!(a, ["SPOP F133L"]);
    assert_eq!(e.len(), 3);
}

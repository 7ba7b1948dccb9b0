use pinch_ee::experiment::{
    read_results_csv, read_results_json, results_to_csv, run_convergence, run_sweep, write_convergence, write_results,
    OutputFormat, SweepSpec, SweepVariable, CSV_HEADER,
};
use pinch_ee::{ScenarioConfig, SchemeId};

fn small_sweep() -> SweepSpec {
    let mut spec = SweepSpec::new(
        SweepVariable::PtDbm,
        vec![-10.0, 10.0],
        ScenarioConfig {
            num_positions: 8,
            num_users: 3,
            seed: 5,
            ..ScenarioConfig::default()
        },
    );
    spec.schemes = SchemeId::ALL.to_vec();
    spec.num_trials = 3;
    spec
}

#[test]
fn csv_and_json_carry_identical_values() {
    let records = run_sweep(&small_sweep()).unwrap();
    assert_eq!(records.len(), 2 * 3 * SchemeId::ALL.len());
    let dir = tempfile::tempdir().unwrap();
    let (csv, json) = (dir.path().join("r.csv"), dir.path().join("r.json"));
    write_results(&records, &csv, OutputFormat::Csv).unwrap();
    write_results(&records, &json, OutputFormat::Json).unwrap();

    let from_csv = read_results_csv(&csv).unwrap();
    let from_json = read_results_json(&json).unwrap();
    assert_eq!(from_csv, records);
    assert_eq!(from_json, records);
}

#[test]
fn csv_header_and_row_order() {
    let records = run_sweep(&small_sweep()).unwrap();
    let text = results_to_csv(&records);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "seed,K,L,Pt_dBm,Pact_dBm,scheme,ee_bits_per_joule,sum_rate_bps,n_active,feasible,outer_iterations,dinkelbach_iterations_total"
    );
    assert_eq!(CSV_HEADER.len(), 12);
    let keys: Vec<(f64, u64, SchemeId)> = records.iter().map(|r| (r.pt_dbm, r.seed, r.scheme)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    assert_eq!(keys, sorted);
    for r in &records {
        assert_eq!(r.feasible, r.ee_bits_per_joule.is_some());
    }
}

#[test]
fn empty_results_are_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("e.csv");
    write_results(&[], &csv, OutputFormat::Csv).unwrap();
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), CSV_HEADER.join(",") + "\n");
    assert!(read_results_csv(&csv).unwrap().is_empty());
    let json = dir.path().join("e.json");
    write_results(&[], &json, OutputFormat::Json).unwrap();
    assert!(read_results_json(&json).unwrap().is_empty());
}

#[test]
fn convergence_starts_at_initial_state_and_climbs() {
    let config = ScenarioConfig {
        seed: 3,
        ..ScenarioConfig::default()
    };
    let trace = run_convergence(&config, 3).unwrap();
    assert_eq!(trace[0].sweep_index, 0);
    assert!(trace
        .windows(2)
        .all(|w| w[1].utility_after_move > w[0].utility_after_move));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    write_convergence(&trace, &path, OutputFormat::Json).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), trace.len());
}

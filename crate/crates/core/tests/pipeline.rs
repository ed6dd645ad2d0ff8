use extremo::bootstrap::{bootstrap_replicates, ci_direct, BootstrapConfig, Scheme};
use extremo::harness::{
    read_coverage_csv, run_coverage_experiment, write_coverage_csv, ExperimentConfig,
};
use extremo::rng::stream;
use extremo::{
    empirical_extremogram_estimated, ModelSpec, OrthantSetPair, ThresholdSpec, TimeSeries,
};

#[test]
fn simulate_write_read_estimate_bootstrap() {
    let x = ModelSpec::reference_garch()
        .simulate(3000, &mut stream(8, &[1]))
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    x.write_csv_path(&path).unwrap();
    let back = TimeSeries::read_csv_path(&path, false).unwrap();
    assert_eq!(back, x);

    let pair = OrthantSetPair::tail(1);
    let est =
        empirical_extremogram_estimated(&back, ThresholdSpec::EmpiricalQuantile(0.05), &pair, 5)
            .unwrap();
    assert_eq!(est.values[0], Some(1.0));
    for scheme in Scheme::ALL {
        let reps = bootstrap_replicates(
            &back,
            est.threshold,
            &pair,
            5,
            BootstrapConfig::new(scheme, 300, 50),
            4,
        )
        .unwrap();
        assert_eq!(reps.base.values, est.values);
        for h in 1..=5 {
            let q = reps.quantiles(h, 0.05).unwrap();
            let ci = ci_direct(est.values[h].unwrap(), &q, 0.95);
            assert!(ci.lower <= ci.upper);
            assert!((0.0..=1.0).contains(&ci.lower) && ci.upper <= 1.0);
        }
        let band = reps.band(0.95).unwrap();
        assert!(band.radius >= 0.0 && band.rows_used > 0);
    }
}

#[test]
fn config_text_to_report() {
    let cfg = ExperimentConfig::parse(
        "# small linear run\n\
         model = ma\n\
         coefficients = 1, 0.5, 0.8\n\
         n = 300\n\
         sim_count = 6\n\
         replicates = 40\n\
         block_length = 15\n\
         thresholds = 0.05, 0.1\n\
         ci_methods = direct, transfer:0.05:0.1\n\
         h_max = 4\n\
         truth = analytic\n\
         seed = 3\n",
    )
    .unwrap();
    let table = run_coverage_experiment(&cfg, None).unwrap();
    assert_eq!(table.cells.len(), 3 * (2 + 1) * 4);
    for c in &table.cells {
        assert_eq!(c.covered + c.not_covered() + c.undefined_base, c.sim_count);
    }
    let mut buf = Vec::new();
    write_coverage_csv(&table, &mut buf).unwrap();
    assert_eq!(read_coverage_csv(&buf[..]).unwrap(), table);
}

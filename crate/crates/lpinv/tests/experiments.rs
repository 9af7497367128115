use lpinv::experiments::{
    output_files, run, run_concentration, run_fig1, run_fig2, ExperimentName, ExperimentReport, ExperimentSpec,
    SpecOverrides,
};

fn spec_in(name: ExperimentName, dir: &std::path::Path) -> ExperimentSpec {
    ExperimentSpec::defaults(name).apply(SpecOverrides { output_dir: Some(dir.to_path_buf()), ..Default::default() })
}

#[test]
fn fig1_defaults_reproduce_the_sparsity_picture() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_in(ExperimentName::Fig1Sparsity, dir.path());
    let s = run_fig1(&spec).unwrap();
    assert_eq!((s.m, s.n), (10, 30));
    assert_eq!(s.spinv_total_support, 100);
    assert!(s.spinv_per_column_support.iter().all(|&k| k == 10));
    assert!(s.mpp_total_support >= 295, "{}", s.mpp_total_support);
    assert!(s.spinv_all_certified_unique);
    assert!(s.spinv_entrywise_l1 <= s.mpp_entrywise_l1);
    assert!(s.mpp_frobenius_sq <= s.spinv_frobenius_sq);

    let pattern = std::fs::read_to_string(dir.path().join("support_spinv.txt")).unwrap();
    let ones = pattern.split_whitespace().filter(|t| *t == "1").count();
    assert_eq!(ones, 100);
    for f in output_files(&spec) {
        assert!(f.exists(), "{}", f.display());
    }
}

#[test]
fn fig2_submatrix_norms_dominate_spinv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_in(ExperimentName::Fig2Boxplot, dir.path());
    let s = run_fig2(&spec).unwrap();
    assert_eq!((s.m, s.n, s.draws), (20, 30, 100));
    assert_eq!(s.experiments.len(), 5);
    for e in &s.experiments {
        assert!(e.submatrix.median > e.spinv_frobenius);
        assert!(e.submatrix.min <= e.submatrix.q1 && e.submatrix.q3 <= e.submatrix.max);
        assert!(e.spinv_all_certified_unique);
    }
    let mut rdr = csv::Reader::from_path(dir.path().join("norms.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["experiment", "draw", "submatrix_frobenius", "spinv_frobenius"]);
    assert_eq!(rdr.records().count(), 500);
}

#[test]
fn concentration_accounts_for_every_trial() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::defaults(ExperimentName::Concentration).apply(SpecOverrides {
        n_values: Some(vec![40, 80]),
        delta_values: Some(vec![0.25, 0.5]),
        p: Some(1.0),
        trials: Some(4),
        output_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    });
    let out = run_concentration(&spec).unwrap();
    assert_eq!(out.records.len(), 16);
    assert_eq!(out.cells.len(), 4);
    for c in &out.cells {
        assert_eq!(c.rows + c.excluded, c.trials);
        assert_eq!(c.m, (c.delta_nominal * c.n as f64).round() as usize + 1);
        assert!((c.delta - (c.m - 1) as f64 / c.n as f64).abs() < 1e-15);
        let kept = out.records.iter().filter(|r| r.n == c.n && r.m == c.m && !r.excluded).count();
        assert_eq!(kept, c.rows);
    }
    // limits at p = 1 are reported with n = inf
    assert!(out.theory.iter().all(|t| t.n == "inf"));
    let mut rdr = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    assert_eq!(rdr.records().count(), 4);
}

#[test]
fn interior_p_uses_finite_n_theory() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::defaults(ExperimentName::Fig3Means).apply(SpecOverrides {
        n_values: Some(vec![30]),
        delta_values: Some(vec![0.5]),
        p: Some(1.5),
        trials: Some(2),
        mc_samples: Some(2000),
        output_dir: Some(dir.path().to_path_buf()),
        ..Default::default()
    });
    let ExperimentReport::Concentration(out) = run(&spec).unwrap() else { panic!("wrong report") };
    assert_eq!(out.theory.len(), 1);
    assert_eq!(out.theory[0].n, "30");
    assert!(out.theory[0].stderr > 0.0);
    let t = &out.theory[0];
    // between the p = 1 and p = 2 limits at the same delta, within noise
    assert!(t.alpha_star_sq > 1.0 / (1.0 - t.delta) - 0.1 && t.alpha_star_sq < 3.0, "{}", t.alpha_star_sq);
}

#[test]
fn invalid_specs_are_rejected() {
    let base = ExperimentSpec::defaults(ExperimentName::Concentration);
    let bad = [
        SpecOverrides { trials: Some(0), ..Default::default() },
        SpecOverrides { p: Some(0.5), ..Default::default() },
        SpecOverrides { delta_values: Some(vec![1.0]), ..Default::default() },
        SpecOverrides { n_values: Some(vec![]), ..Default::default() },
        SpecOverrides { mc_samples: Some(10), ..Default::default() },
    ];
    for o in bad {
        assert!(base.clone().apply(o.clone()).validate().is_err(), "{o:?}");
    }
    let fig1 = ExperimentSpec::defaults(ExperimentName::Fig1Sparsity);
    assert!(fig1.apply(SpecOverrides { m: Some(31), ..Default::default() }).validate().is_err());
}

//! Positivity scans, band certification, the κ = 2 factorization and the
//! convergence study.

use std::f64::consts::PI;

use mourre_lab::interpolation::*;
use mourre_lab::pingpong::*;
use mourre_lab::symbol::*;
use mourre_lab::verifier::*;
use mourre_lab::MourreError;

fn j2(kappa: u32, n: usize) -> ThresholdSolution {
    if n == 0 {
        ThresholdSolution::zeroth_order(kappa, Variant::J2Decreasing).unwrap()
    } else {
        solve(&PingPongProblem::new(kappa, n, Variant::J2Decreasing).unwrap(), 1e-13).unwrap()
    }
}

fn first_band() -> Combination {
    k2_first_band_combination()
}

fn zeros_of(scan: &EnergyScan) -> Vec<f64> {
    match &scan.verdict {
        Verdict::NonnegativeWithZeros { zeros } => zeros.iter().map(|z| z[0]).collect(),
        other => panic!("expected zeros, got {other:?}"),
    }
}

fn close_sets(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len()
        && want.iter().all(|w| got.iter().any(|g| (g - w).abs() <= tol))
}

#[test]
fn scan_2d_examples() {
    let c = first_band();
    assert!(scan_2d(&c, 0.8, 512).unwrap().verdict.is_strictly_positive());
    let at = scan_2d(&c, 2.0 / 3.0, 512).unwrap();
    assert!(close_sets(&zeros_of(&at), &[-1.0 / 3.0, 1.0 / 3.0, 1.0], 1e-6), "{at:?}");
    let below = scan_2d(&c, 0.5, 512).unwrap();
    assert!(matches!(below.verdict, Verdict::SignChange { .. }));
    assert!(below.min_value < 0.0);
}

#[test]
fn scan_input_validation() {
    let c = first_band();
    assert!(matches!(scan_2d(&c, 0.8, 63), Err(MourreError::InvalidInput(_))));
    assert!(scan_2d(&c, 2.5, 512).is_err());
    assert!(scan_3d(&c, 3.5, 64, 64).is_err());
    assert!(scan_band(&c, (1.0, 0.5), &ScanConfig::default()).is_err());
}

#[test]
fn certify_kappa2_first_band() {
    let report = certify_band_between(&first_band(), &j2(2, 1), &j2(2, 0), &ScanConfig::default()).unwrap();
    assert!(report.interior_positive());
    assert_eq!(report.interior.len(), 256);
    assert!(report.global_min > 1e-7);
    assert!(close_sets(&zeros_of(&report.endpoints[0]), &[-1.0 / 3.0, 1.0 / 3.0, 1.0], 1e-6));
    assert!(close_sets(&zeros_of(&report.endpoints[1]), &[0.0, 1.0], 1e-6));
}

#[test]
fn certification_failure_carries_witness() {
    let bad = Combination::new(2, vec![(1, 1.0), (2, 0.2)]).unwrap();
    match certify_band(&bad, (2.0 / 3.0, 1.0), &ScanConfig::default()) {
        Err(MourreError::CertificationFailure { e, x, value }) => {
            assert!(value < 0.0);
            let direct = bad.eval2(&EnergyPoint2D::new(e, x).unwrap());
            assert!((direct - value).abs() < 1e-12);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn certify_kappa2_second_band() {
    let p = InterpolationProblem::new(j2(2, 2), j2(2, 1), vec![1, 2, 3, 5]).unwrap();
    let c = solve_coefficients(&p).unwrap().combination;
    certify_band_between(&c, &j2(2, 2), &j2(2, 1), &ScanConfig::default()).unwrap();
}

#[test]
fn certify_kappa3_low_band() {
    let g2 = solve(&PingPongProblem::new(3, 2, Variant::GVariant).unwrap(), 1e-13).unwrap();
    let f1 = solve(&PingPongProblem::new(3, 1, Variant::FIncreasing).unwrap(), 1e-13).unwrap();
    assert!((g2.e - (9.0 - 33f64.sqrt()) / 12.0).abs() < 1e-10);
    assert!((f1.e - 2.0 / 7.0).abs() < 1e-10);
    let p = InterpolationProblem::new(g2.clone(), f1.clone(), vec![1, 2, 3, 4, 5]).unwrap();
    let v = homogeneous_direction(&p).unwrap();
    let t = 1.0 / v[4];
    let c = Combination::from_sigma_rho(3, &[1, 2, 3, 4, 5], &v.iter().map(|r| r * t).collect::<Vec<_>>())
        .unwrap();
    let report = certify_band(&c, (g2.e, f1.e), &ScanConfig::default()).unwrap();
    assert!(report.interior_positive());
}

/// With `ρ = (1, 0.6)` the symbol is negative throughout `(0.518, 0.64)`;
/// its negation is the positive commutator.
#[test]
fn kappa3_sub_band_has_definite_sign() {
    let c = Combination::new(3, vec![(1, 1.0), (2, 0.6)]).unwrap();
    let raw = scan_band(&c, (0.518, 0.64), &ScanConfig::default()).unwrap();
    assert!(raw.interior.iter().all(|s| s.min_value < 0.0));
    let (lo, hi) = x_range_2d(0.6);
    let peak = (0..512)
        .map(|i| lo + (hi - lo) * i as f64 / 511.0)
        .map(|x| c.eval2(&EnergyPoint2D::new(0.6, x).unwrap()))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(peak < 0.0);
    let neg = c.scaled(-1.0).unwrap();
    let report = certify_band(&neg, (0.518, 0.64), &ScanConfig::default()).unwrap();
    assert!(report.global_min > 1e-7);
}

#[test]
fn scan_3d_examples() {
    let c = first_band();
    let top = scan_3d(&c, 3.0, 64, 64).unwrap();
    assert!(top.min_value.abs() < 1e-12);
    assert!(matches!(top.verdict, Verdict::NonnegativeWithZeros { .. }));

    let unit = Combination::unit(2);
    let s = scan_3d(&unit, 2.2, 64, 64).unwrap();
    assert_eq!(s.argmin.len(), 2);
}

fn band4() -> Combination {
    let p = InterpolationProblem::new(j2(2, 4), j2(2, 3), vec![1, 2, 3, 4, 5, 6, 7, 10]).unwrap();
    solve_coefficients(&p).unwrap().combination
}

#[test]
fn scan_3d_positive_on_shifted_band() {
    let c = band4();
    for e in band_energies((4.0 / 3.0, 7.0 / 5.0), 16, 1e-6) {
        let s = scan_3d(&c, e, 64, 128).unwrap();
        assert!(s.verdict.is_strictly_positive(), "E={e}: {s:?}");
    }
}

#[test]
fn slices_of_3d_reproduce_2d_scans() {
    let c = band4();
    let e3 = 4.0 / 3.0 + 0.03;
    for y in [-1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
        let e2 = e3 - y;
        let (lo, hi) = x_range_3d(e3, y);
        for i in 0..50 {
            let x = lo + (hi - lo) * i as f64 / 49.0;
            let a = c.eval3(&EnergyPoint3D::new(e3, x, y).unwrap());
            let b = c.eval2(&EnergyPoint2D::new(e2, x).unwrap()) + c.coordinate_sum(y);
            assert!((a - b).abs() < 1e-12);
        }
    }
}

/// At `y = cos(lπ/κ)` the third coordinate contributes nothing, so the slice
/// is the 2-D symbol at the shifted energy.
#[test]
fn three_dimensional_consistency_at_extremal_slices() {
    let c = band4();
    for l in 0..=2u32 {
        let y = (l as f64 * PI / 2.0).cos();
        for e3 in [1.2, 1.35, 1.5] {
            let e2 = e3 - y;
            if e2.abs() > 2.0 {
                continue;
            }
            let s2 = scan_2d(&c, e2, 512).unwrap();
            let (lo, hi) = x_range_3d(e3, y);
            let slice_min = (0..4096)
                .map(|i| lo + (hi - lo) * i as f64 / 4095.0)
                .map(|x| c.eval3(&EnergyPoint3D::new(e3, x, y).unwrap()))
                .fold(f64::INFINITY, f64::min);
            assert!(slice_min >= s2.min_value - 1e-12, "l={l} E={e3}");
            assert!(slice_min - s2.min_value < 1e-4, "l={l} E={e3}");
            assert_eq!(slice_min > 1e-7, s2.min_value > 1e-7);
        }
    }
}

#[test]
fn factorization_examples() {
    assert!(factorization_check_k2(0.8, 200).unwrap() <= 1e-10);
    let f = k2_factor_roots(2.0 / 3.0);
    let (s_minus, _) = f.s.unwrap();
    assert!((s_minus + 1.0 / 3.0).abs() < 1e-12);
    let at_one = scan_2d(&first_band(), 1.0, 512).unwrap();
    assert!(close_sets(&zeros_of(&at_one), &[0.0, 1.0], 1e-6));
}

#[test]
fn factor_roots_sum_to_energy() {
    for i in 0..40 {
        let e = -1.9 + 3.8 * i as f64 / 39.0;
        let f = k2_factor_roots(e);
        for pair in [f.r, f.s].into_iter().flatten() {
            assert!((pair.0 + pair.1 - e).abs() < 1e-12);
        }
        assert!(factorization_check_k2(e, 101).unwrap() < 1e-10, "E={e}");
    }
}

#[test]
fn reported_zeros_are_sound() {
    let cases = [
        (first_band(), 2.0 / 3.0),
        (first_band(), 1.0),
        (Combination::unit(3), 1.0 + 0.5),
    ];
    for (c, e) in cases {
        let s = scan_2d(&c, e, 512).unwrap();
        for z in zeros_of(&s) {
            let (lo, hi) = x_range_2d(e);
            let g = |x: f64| c.eval2(&EnergyPoint2D::new(e, x.clamp(lo, hi)).unwrap());
            assert!(g(z).abs() <= 1e-8, "E={e} z={z}");
            let h = 1e-4;
            let second = g(z + h) - 2.0 * g(z) + g(z - h);
            if z - h >= lo && z + h <= hi {
                assert!(second >= -1e-6, "E={e} z={z} second={second}");
            }
        }
    }
}

#[test]
fn reports_are_mirror_symmetric() {
    let c = Combination::new(3, vec![(1, 1.0), (2, 0.3), (3, -0.2)]).unwrap();
    for e in [-1.3, -0.2, 0.45, 1.1, 1.8] {
        let s = scan_2d(&c, e, 512).unwrap();
        let partner = e - s.argmin[0];
        let mirrored = c.eval2(&EnergyPoint2D::new(e, partner).unwrap());
        assert!((mirrored - s.min_value).abs() < 1e-12, "E={e}");
    }
}

#[test]
fn plot_data_layout() {
    let rows = plot_data(&first_band(), &[0.7, 0.8, 0.9], 11);
    assert_eq!(rows.len(), 33);
    assert!(rows[..11].iter().all(|r| r.0 == 0.7));
    let (lo, hi) = x_range_2d(0.8);
    assert_eq!(rows[11].1, lo);
    assert_eq!(rows[21].1, hi);
}

#[test]
fn scan_report_json_round_trip() {
    let config = ScanConfig { e_samples: 8, x_samples: 64, margin: 1e-6 };
    let report = scan_band(&first_band(), (2.0 / 3.0, 1.0), &config).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    assert!(text.contains("\"E_range\"") && text.contains("STRICTLY_POSITIVE"));
    let back: ScanReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}

#[test]
fn convergence_slopes() {
    for kappa in [3, 4] {
        let r = convergence_study(kappa, 400).unwrap();
        assert!(r.slope > -2.2 && r.slope < -1.8, "kappa={kappa} slope={}", r.slope);
        assert_eq!(r.n_max, 400);
        assert_eq!(r.residuals.len(), r.data.len() - r.n_fit_start + 1);
    }
}

#[test]
fn kappa2_convergence_is_first_order() {
    let r = convergence_study(2, 200).unwrap();
    for &(n, e) in &r.data {
        assert!((e - 2.0 / (2 * n + 2) as f64).abs() < 1e-12);
    }
    assert!((r.slope + 1.0).abs() < 0.05, "slope={}", r.slope);
}

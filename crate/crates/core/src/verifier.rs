//! Sign certification of `G_κ^E` on constant-energy surfaces.
//!
//! Each energy is scanned on a uniform grid. Every grid-local minimum below
//! [`REFINE_BELOW`] is refined by golden-section search inside a window of
//! two grid cells on each side, and the refined minimum decides the verdict:
//!
//! * above [`POSITIVE_THRESHOLD`]: strictly positive;
//! * in `[ZERO_FLOOR, POSITIVE_THRESHOLD]`: non-negative with zeros;
//! * below [`ZERO_FLOOR`]: sign change.
//!
//! Evaluation is pure and the reductions are sequential over ordered
//! results, so reports do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::extremum;
use crate::error::{MourreError, Result};
use crate::pingpong::{solve, PingPongProblem, ThresholdSolution, Variant};
use crate::symbol::{x_range_2d, x_range_3d, y_range_3d, Combination, EnergyPoint2D, EnergyPoint3D};

/// Minima below this value are refined.
pub const REFINE_BELOW: f64 = 1e-4;
/// Refined minima above this value count as strictly positive.
pub const POSITIVE_THRESHOLD: f64 = 1e-7;
/// Refined minima at or above this value (and not positive) count as zeros.
pub const ZERO_FLOOR: f64 = -1e-8;
/// Golden-section stopping width.
const GOLDEN_TOL: f64 = 1e-12;
/// Intervals shorter than this are evaluated at a single point.
const DEGENERATE_WIDTH: f64 = 1e-12;
/// Refined minima closer than this are reported once.
const ZERO_MERGE: f64 = 1e-6;

/// Sampling parameters of a band scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub e_samples: usize,
    pub x_samples: usize,
    /// Distance kept from each band end when sampling interior energies.
    pub margin: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            e_samples: 256,
            x_samples: 512,
            margin: 1e-6,
        }
    }
}

/// Sign classification of one energy slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    StrictlyPositive,
    NonnegativeWithZeros { zeros: Vec<Vec<f64>> },
    SignChange { witness: Vec<f64>, value: f64 },
}

impl Verdict {
    pub fn is_strictly_positive(&self) -> bool {
        matches!(self, Verdict::StrictlyPositive)
    }
}

/// Result of scanning one energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyScan {
    #[serde(rename = "E")]
    pub e: f64,
    pub verdict: Verdict,
    pub min_value: f64,
    /// Coordinates of the minimum: `[x]` in 2-D, `[x, y]` in 3-D.
    pub argmin: Vec<f64>,
}

/// Aggregated scan over an energy band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub kappa: u32,
    pub combination: Combination,
    #[serde(rename = "E_range")]
    pub e_range: (f64, f64),
    #[serde(rename = "E_samples")]
    pub e_samples: usize,
    pub x_samples: usize,
    pub interior: Vec<EnergyScan>,
    pub endpoints: Vec<EnergyScan>,
    pub global_min: f64,
    /// `[E, x]` of the smallest interior value.
    pub argmin: Vec<f64>,
}

impl ScanReport {
    /// `true` when every interior energy is strictly positive.
    pub fn interior_positive(&self) -> bool {
        self.interior.iter().all(|s| s.verdict.is_strictly_positive())
    }

    /// The first interior energy that is not strictly positive.
    pub fn first_failure(&self) -> Option<&EnergyScan> {
        self.interior.iter().find(|s| !s.verdict.is_strictly_positive())
    }
}

/// Minimum of `f` on `[a, b]` by golden-section search.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > GOLDEN_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mut best = (0.5 * (a + b), f(0.5 * (a + b)));
    for (x, v) in [(a, f(a)), (b, f(b))] {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// Minima of `f` on `[lo, hi]` found from an `n`-point grid: the overall
/// minimum and the refined local minima below [`REFINE_BELOW`].
fn scan_interval<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, n: usize) -> ((f64, f64), Vec<(f64, f64)>) {
    if hi - lo < DEGENERATE_WIDTH {
        let x = 0.5 * (lo + hi);
        let v = f(x);
        let refined = if v < REFINE_BELOW { vec![(x, v)] } else { vec![] };
        return ((x, v), refined);
    }
    let n = n.max(2);
    let h = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + i as f64 * h })
        .collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (xs[0], vs[0]);
    let mut refined: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        if vs[i] < best.1 {
            best = (xs[i], vs[i]);
        }
        let left = if i > 0 { vs[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { vs[i + 1] } else { f64::INFINITY };
        if vs[i] <= left && vs[i] <= right && vs[i] < REFINE_BELOW {
            let a = xs[i.saturating_sub(2)];
            let b = xs[(i + 2).min(n - 1)];
            let (x, v) = golden_section_min(f, a, b);
            let (x, v) = if vs[i] < v { (xs[i], vs[i]) } else { (x, v) };
            match refined.last_mut() {
                Some(last) if (last.0 - x).abs() < ZERO_MERGE => {
                    if v < last.1 {
                        *last = (x, v);
                    }
                }
                _ => refined.push((x, v)),
            }
        }
    }
    for &(x, v) in &refined {
        if v < best.1 {
            best = (x, v);
        }
    }
    (best, refined)
}

fn classify(min: (Vec<f64>, f64), refined: Vec<(Vec<f64>, f64)>) -> Verdict {
    let (at, value) = min;
    if value > POSITIVE_THRESHOLD {
        Verdict::StrictlyPositive
    } else if value < ZERO_FLOOR {
        Verdict::SignChange { witness: at, value }
    } else {
        let zeros = refined
            .into_iter()
            .filter(|(_, v)| *v <= POSITIVE_THRESHOLD)
            .map(|(x, _)| x)
            .collect();
        Verdict::NonnegativeWithZeros { zeros }
    }
}

/// Scans `G_κ^E(x)` over `x ∈ [max(E-1,-1), min(E+1,1)]`.
pub fn scan_2d(c: &Combination, e: f64, x_samples: usize) -> Result<EnergyScan> {
    if x_samples < 64 {
        return Err(MourreError::InvalidInput("x_samples must be at least 64".into()));
    }
    if !(e.abs() <= 2.0) {
        return Err(MourreError::Domain(format!("energy {e} outside [-2, 2]")));
    }
    let (lo, hi) = x_range_2d(e);
    let f = |x: f64| c.eval2(&EnergyPoint2D { e, x });
    let ((x, v), refined) = scan_interval(&f, lo, hi, x_samples);
    let verdict = classify(
        (vec![x], v),
        refined.into_iter().map(|(x, v)| (vec![x], v)).collect(),
    );
    Ok(EnergyScan {
        e,
        verdict,
        min_value: v,
        argmin: vec![x],
    })
}

/// Scans `G_κ^E(x, y)` slice by slice in `y`.
pub fn scan_3d(c: &Combination, e: f64, y_samples: usize, x_samples: usize) -> Result<EnergyScan> {
    if y_samples < 64 || x_samples < 64 {
        return Err(MourreError::InvalidInput("samples must be at least 64".into()));
    }
    if !(e.abs() <= 3.0) {
        return Err(MourreError::Domain(format!("energy {e} outside [-3, 3]")));
    }
    let (ylo, yhi) = y_range_3d(e);
    let ys: Vec<f64> = if yhi - ylo < DEGENERATE_WIDTH {
        vec![0.5 * (ylo + yhi)]
    } else {
        let h = (yhi - ylo) / (y_samples - 1) as f64;
        (0..y_samples)
            .map(|i| if i == y_samples - 1 { yhi } else { ylo + i as f64 * h })
            .collect()
    };
    let slices: Vec<((f64, f64), Vec<(f64, f64)>, f64)> = ys
        .par_iter()
        .map(|&y| {
            let (lo, hi) = x_range_3d(e, y);
            let f = |x: f64| c.eval3(&EnergyPoint3D { e, x, y });
            let (best, refined) = scan_interval(&f, lo, hi.max(lo), x_samples);
            (best, refined, y)
        })
        .collect();
    let mut min = (vec![f64::NAN, f64::NAN], f64::INFINITY);
    let mut refined_all = Vec::new();
    for ((x, v), refined, y) in slices {
        if v < min.1 {
            min = (vec![x, y], v);
        }
        refined_all.extend(refined.into_iter().map(|(x, v)| (vec![x, y], v)));
    }
    let (argmin, value) = (min.0.clone(), min.1);
    Ok(EnergyScan {
        e,
        verdict: classify(min, refined_all),
        min_value: value,
        argmin,
    })
}

/// Interior sample energies of a band, uniformly spaced between the ends
/// shrunk by `margin`.
pub fn band_energies(band: (f64, f64), samples: usize, margin: f64) -> Vec<f64> {
    let (a, b) = (band.0 + margin, band.1 - margin);
    if samples <= 1 {
        return vec![0.5 * (a + b)];
    }
    let h = (b - a) / (samples - 1) as f64;
    (0..samples)
        .map(|i| if i == samples - 1 { b } else { a + i as f64 * h })
        .collect()
}

/// Scans a band: interior energies with the configured margin plus both
/// endpoints exactly.
pub fn scan_band(c: &Combination, band: (f64, f64), config: &ScanConfig) -> Result<ScanReport> {
    let (l, r) = band;
    if !(l < r) || l < -2.0 || r > 2.0 {
        return Err(MourreError::InvalidInput(format!("invalid band ({l}, {r})")));
    }
    let energies = band_energies(band, config.e_samples, config.margin);
    let interior: Vec<EnergyScan> = energies
        .par_iter()
        .map(|&e| scan_2d(c, e, config.x_samples))
        .collect::<Result<_>>()?;
    let endpoints = vec![scan_2d(c, l, config.x_samples)?, scan_2d(c, r, config.x_samples)?];
    let worst = interior
        .iter()
        .min_by(|a, b| a.min_value.total_cmp(&b.min_value))
        .expect("at least one interior energy");
    Ok(ScanReport {
        kappa: c.kappa(),
        combination: c.clone(),
        e_range: band,
        e_samples: config.e_samples,
        x_samples: config.x_samples,
        global_min: worst.min_value,
        argmin: vec![worst.e, worst.argmin[0]],
        interior,
        endpoints,
    })
}

/// [`scan_band`] that fails unless every interior energy is strictly
/// positive.
pub fn certify_band(c: &Combination, band: (f64, f64), config: &ScanConfig) -> Result<ScanReport> {
    let report = scan_band(c, band, config)?;
    if let Some(bad) = report.first_failure() {
        return Err(MourreError::CertificationFailure {
            e: bad.e,
            x: bad.argmin[0],
            value: bad.min_value,
        });
    }
    Ok(report)
}

/// Checks that the zeros found at an endpoint scan coincide with the chain
/// of the threshold solution at that energy, within `tol` in both
/// directions. Returns the largest mismatch.
pub fn endpoint_zero_mismatch(scan: &EnergyScan, sol: &ThresholdSolution) -> Result<f64> {
    let zeros: Vec<f64> = match &scan.verdict {
        Verdict::NonnegativeWithZeros { zeros } => zeros.iter().map(|z| z[0]).collect(),
        other => {
            return Err(MourreError::CertificationFailure {
                e: scan.e,
                x: scan.argmin[0],
                value: match other {
                    Verdict::SignChange { value, .. } => *value,
                    _ => scan.min_value,
                },
            })
        }
    };
    let dist = |v: f64, set: &[f64]| set.iter().map(|s| (s - v).abs()).fold(f64::INFINITY, f64::min);
    let a = zeros.iter().map(|z| dist(*z, &sol.x)).fold(0.0, f64::max);
    let b = sol.x.iter().map(|x| dist(*x, &zeros)).fold(0.0, f64::max);
    Ok(a.max(b))
}

/// [`certify_band`] plus a check that both endpoint zero sets match the
/// bounding solutions' chains within `1e-6`.
pub fn certify_band_between(
    c: &Combination,
    left: &ThresholdSolution,
    right: &ThresholdSolution,
    config: &ScanConfig,
) -> Result<ScanReport> {
    let report = certify_band(c, (left.e, right.e), config)?;
    for (scan, sol) in report.endpoints.iter().zip([left, right]) {
        let mismatch = endpoint_zero_mismatch(scan, sol)?;
        if mismatch > 1e-6 {
            return Err(MourreError::DegenerateSolution(format!(
                "endpoint zeros at E={} differ from the chain by {mismatch:e}",
                sol.e
            )));
        }
    }
    Ok(report)
}

/// `(E, x, G)` samples for plotting, row-major in `E`.
pub fn plot_data(c: &Combination, energies: &[f64], x_samples: usize) -> Vec<(f64, f64, f64)> {
    energies
        .par_iter()
        .map(|&e| {
            let (lo, hi) = x_range_2d(e);
            let n = x_samples.max(2);
            (0..n)
                .map(|i| {
                    let x = if i == n - 1 {
                        hi
                    } else {
                        lo + i as f64 * (hi - lo) / (n - 1) as f64
                    };
                    (e, x, c.eval2(&EnergyPoint2D { e, x }))
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// The combination `A_2 + (9/14) A_4`.
pub fn k2_first_band_combination() -> Combination {
    Combination::new(2, vec![(1, 1.0), (2, 9.0 / 14.0)]).expect("valid combination")
}

/// Roots of the two quadratic factors of `G` for `A_2 + (9/14) A_4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K2Factors {
    /// Product of the roots of the factor that has real roots only for
    /// `|E| ≤ 2/3`.
    pub r_product: f64,
    /// Product of the roots of the other factor.
    pub s_product: f64,
    /// `(r_-, r_+)` when real.
    pub r: Option<(f64, f64)>,
    /// `(s_-, s_+)` when real.
    pub s: Option<(f64, f64)>,
}

/// Roots `r_±, s_±` from their explicit radical forms. Each pair sums to `E`.
pub fn k2_factor_roots(e: f64) -> K2Factors {
    let d = 16.0 - 20.0 * e * e + 9.0 * e.powi(4);
    let sd = 5f64.sqrt() * d.max(0.0).sqrt();
    let disc_r = (20.0 - 15.0 * e * e - 2.0 * sd) / 15.0;
    let disc_s = (20.0 - 15.0 * e * e + 2.0 * sd) / 15.0;
    let pair = |disc: f64| {
        (disc >= 0.0).then(|| {
            let w = disc.sqrt();
            ((e - w) / 2.0, (e + w) / 2.0)
        })
    };
    K2Factors {
        r_product: (e * e - disc_r) / 4.0,
        s_product: (e * e - disc_s) / 4.0,
        r: pair(disc_r),
        s: pair(disc_s),
    }
}

/// Largest deviation between `G` for `A_2 + (9/14) A_4` and the product
/// `-(180E/7)(x² - Ex + r_-r_+)(x² - Ex + s_-s_+)` over a uniform grid of
/// `samples` points in the admissible `x` range.
pub fn factorization_check_k2(e: f64, samples: usize) -> Result<f64> {
    if !(e.abs() <= 2.0) {
        return Err(MourreError::Domain(format!("energy {e} outside [-2, 2]")));
    }
    let c = k2_first_band_combination();
    let f = k2_factor_roots(e);
    let (lo, hi) = x_range_2d(e);
    let n = samples.max(2);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let closed = -(180.0 * e / 7.0) * (x * x - e * x + f.r_product) * (x * x - e * x + f.s_product);
        let direct = c.eval2(&EnergyPoint2D::new(e, x)?);
        worst = worst.max((closed - direct).abs());
    }
    Ok(worst)
}

/// Log-log regression of `ℰ_{2n} - 2cos(π/κ)` against `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub kappa: u32,
    /// Largest `n` actually solved.
    pub n_max: usize,
    /// First `n` of the regression window.
    pub n_fit_start: usize,
    pub slope: f64,
    pub intercept: f64,
    /// `(n, ℰ_{2n})` for every solved `n`.
    pub data: Vec<(usize, f64)>,
    /// Regression residuals over the window.
    pub residuals: Vec<f64>,
}

/// Solves `ℰ_{2n}` for `n = 1..=n_max` and fits the slope over the upper
/// half `n ∈ [n_max/2, n_max]`. A precision failure truncates `n_max` to the
/// last solved depth.
pub fn convergence_study(kappa: u32, n_max: usize) -> Result<ConvergenceReport> {
    if kappa < 2 {
        return Err(MourreError::InvalidInput("kappa must be at least 2".into()));
    }
    if n_max < 8 {
        return Err(MourreError::InvalidInput("n_max must be at least 8".into()));
    }
    let results: Vec<Result<f64>> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let p = PingPongProblem::new(kappa, 2 * n, Variant::J2Decreasing)?;
            Ok(solve(&p, 1e-13)?.e)
        })
        .collect();
    let mut data = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => data.push((i + 1, e)),
            Err(MourreError::PrecisionExhausted { .. }) if data.len() >= 8 => break,
            Err(err) => return Err(err),
        }
    }
    let n_used = data.len();
    let start = (n_used / 2).max(1);
    let limit = 2.0 * extremum(kappa, 1);
    let pts: Vec<(f64, f64)> = data[start - 1..]
        .iter()
        .map(|&(n, e)| ((n as f64).ln(), (e - limit).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = pts.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
    Ok(ConvergenceReport {
        kappa,
        n_max: n_used,
        n_fit_start: start,
        slope,
        intercept,
        data,
        residuals,
    })
}

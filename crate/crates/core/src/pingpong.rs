//! Threshold energies from the ping-pong chain construction.
//!
//! A chain `X_0, …, X_{n+1}` alternates two moves: reflection `x ↦ E - x`
//! about the axis `E/2`, and level matching `x ↦ branch_inverse(b, T_κ(x))`
//! onto a branch of opposite slope. The energy `E` is calibrated by bisection
//! until the last point lands on a prescribed extremum of `T_κ`.
//!
//! Every variant is described by a [`Schedule`]: the branch holding the
//! reflected (right-hand) points, the branch used for each level step, the
//! anchors, and the admissible energy interval.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{branch_inverse, eval_t, eval_u, extremum, t_extrema, BranchIndex};
use crate::error::{MourreError, Result};
use crate::symbol::{g2, m, EnergyPoint2D};

/// Bracket shrink applied to both ends of the admissible interval.
const BRACKET_SHRINK: f64 = 1e-9;
/// Maximum number of bisection steps.
const MAX_BISECTIONS: usize = 200;
/// Tolerance on the structural invariants of a solved chain.
const INVARIANT_TOL: f64 = 1e-10;
/// Adjacent chain points closer than this cannot be resolved in `f64`.
const MIN_SPACING: f64 = 1e-11;
/// Largest accepted linear-relation residual for a solved chain.
const LINEAR_RELATION_TOL: f64 = 1e-8;
/// Number of indices `j` used when a solve re-checks its linear relation.
const LINEAR_RELATION_JMAX: u32 = 8;

/// The family a chain belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Variant {
    /// Decreasing thresholds in the first well, the `ℰ_n` sequence.
    J2Decreasing,
    /// Increasing thresholds anchored at `cos(2π/κ)`, the `F_n` sequence.
    FIncreasing,
    /// Increasing thresholds anchored at `1`, the `G_n` sequence.
    GVariant,
    /// Decreasing thresholds in well `j`.
    WellDecreasing(u32),
    /// Increasing thresholds in well `j`.
    WellIncreasing(u32),
    /// A user-supplied branch plan.
    Custom,
}

impl Variant {
    /// `true` when the sequence `E_n` decreases with `n`.
    pub fn is_decreasing(&self) -> bool {
        matches!(self, Variant::J2Decreasing | Variant::WellDecreasing(_))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::J2Decreasing => write!(f, "j2"),
            Variant::FIncreasing => write!(f, "f"),
            Variant::GVariant => write!(f, "g"),
            Variant::WellDecreasing(j) => write!(f, "well-dec({j})"),
            Variant::WellIncreasing(j) => write!(f, "well-inc({j})"),
            Variant::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for Variant {
    type Err = MourreError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let well = |rest: &str| -> Result<u32> {
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .or_else(|| rest.strip_prefix(':'))
                .ok_or_else(|| MourreError::InvalidInput(format!("malformed variant '{s}'")))?;
            inner
                .trim()
                .parse()
                .map_err(|_| MourreError::InvalidInput(format!("bad well index in '{s}'")))
        };
        match s.as_str() {
            "j2" => Ok(Variant::J2Decreasing),
            "f" => Ok(Variant::FIncreasing),
            "g" => Ok(Variant::GVariant),
            "custom" => Ok(Variant::Custom),
            _ => {
                if let Some(rest) = s.strip_prefix("well-dec") {
                    Ok(Variant::WellDecreasing(well(rest)?))
                } else if let Some(rest) = s.strip_prefix("well-inc") {
                    Ok(Variant::WellIncreasing(well(rest)?))
                } else {
                    Err(MourreError::InvalidInput(format!("unknown variant '{s}'")))
                }
            }
        }
    }
}

impl From<Variant> for String {
    fn from(v: Variant) -> String {
        v.to_string()
    }
}

impl TryFrom<String> for Variant {
    type Error = MourreError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Strict ordering expected of the left-hand chain points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    /// `X_0 < X_1 < …` towards the well.
    Increasing,
    /// `X_0 > X_1 > …` towards the well.
    Decreasing,
    /// `X_1 > X_2 > …` with `X_0` below all of them.
    DecreasingAfterFirst,
    /// No ordering is checked.
    Unchecked,
}

/// Branch schedule and anchors of one construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Branch holding every reflected point.
    pub reflected: BranchIndex,
    /// Level branch per level step; step `k` produces the `k`-th left point
    /// counted from the centre.
    pub level: Vec<BranchIndex>,
    /// Target value of `X_{n+1}`.
    pub end_anchor: f64,
    /// Prescribed `X_{n/2}` for even `n`.
    pub mid_anchor: f64,
    /// Open admissible energy interval.
    pub interval: (f64, f64),
    pub ordering: Ordering,
}

/// Full specification of one construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PingPongProblem {
    pub kappa: u32,
    pub n: usize,
    pub variant: Variant,
    schedule: Schedule,
}

/// Number of level steps in a chain of depth `n`.
pub fn level_steps(n: usize) -> usize {
    n.div_ceil(2)
}

fn near_extremum(kappa: u32, v: f64) -> bool {
    t_extrema(kappa).iter().any(|c| (c - v).abs() <= 1e-12)
}

impl PingPongProblem {
    /// A built-in variant.
    pub fn new(kappa: u32, n: usize, variant: Variant) -> Result<Self> {
        if kappa < 2 {
            return Err(MourreError::InvalidInput("kappa must be at least 2".into()));
        }
        if n == 0 {
            return Err(MourreError::InvalidInput(
                "chain depth n must be at least 1; use zeroth_order for n = 0".into(),
            ));
        }
        let c = |j: u32| extremum(kappa, j);
        let b = |j: u32| BranchIndex::new(kappa, j);
        let check_well = |j: u32| -> Result<()> {
            if j == 0 || j > kappa / 2 {
                return Err(MourreError::InvalidInput(format!(
                    "well index {j} outside [1, {}]",
                    kappa / 2
                )));
            }
            Ok(())
        };
        let steps = level_steps(n);
        let schedule = match variant {
            Variant::J2Decreasing | Variant::WellDecreasing(_) => {
                let j = match variant {
                    Variant::WellDecreasing(j) => j,
                    _ => 1,
                };
                check_well(j)?;
                Schedule {
                    reflected: b(j - 1)?,
                    level: vec![b(j)?; steps],
                    end_anchor: c(j - 1),
                    mid_anchor: c(j),
                    interval: (2.0 * c(j), c(j - 1) + c(j)),
                    ordering: Ordering::Increasing,
                }
            }
            Variant::FIncreasing | Variant::WellIncreasing(_) => {
                let j = match variant {
                    Variant::WellIncreasing(j) => j,
                    _ => 1,
                };
                check_well(j)?;
                Schedule {
                    reflected: b(j)?,
                    level: vec![b(j - 1)?; steps],
                    end_anchor: c(j + 1),
                    mid_anchor: c(j),
                    interval: (c(j) + c(j + 1), c(j - 1) + c(j + 1)),
                    ordering: Ordering::Decreasing,
                }
            }
            Variant::GVariant => {
                if kappa < 3 {
                    return Err(MourreError::InvalidInput(
                        "the G construction needs kappa >= 3".into(),
                    ));
                }
                let mut level = vec![b(0)?; steps];
                level[steps - 1] = b(2)?;
                Schedule {
                    reflected: b(1)?,
                    level,
                    end_anchor: 1.0,
                    mid_anchor: c(1),
                    interval: (c(1) + c(2), 1.0 + c(2)),
                    ordering: Ordering::DecreasingAfterFirst,
                }
            }
            Variant::Custom => {
                return Err(MourreError::InvalidInput(
                    "custom problems are built with PingPongProblem::custom".into(),
                ))
            }
        };
        Ok(Self {
            kappa,
            n,
            variant,
            schedule,
        })
    }

    /// A construction with an explicit branch plan, one level branch per
    /// level step (counted from the centre outwards).
    pub fn custom(
        kappa: u32,
        n: usize,
        reflected: BranchIndex,
        branch_plan: Vec<BranchIndex>,
        end_anchor: f64,
        mid_anchor: Option<f64>,
        interval: (f64, f64),
    ) -> Result<Self> {
        if kappa < 2 || n == 0 {
            return Err(MourreError::InvalidInput("need kappa >= 2 and n >= 1".into()));
        }
        if branch_plan.len() != level_steps(n) {
            return Err(MourreError::InvalidInput(format!(
                "branch plan has {} entries, expected {}",
                branch_plan.len(),
                level_steps(n)
            )));
        }
        if reflected.kappa != kappa || branch_plan.iter().any(|b| b.kappa != kappa) {
            return Err(MourreError::InvalidInput("branch kappa mismatch".into()));
        }
        if !near_extremum(kappa, end_anchor) {
            return Err(MourreError::InvalidInput(format!(
                "end anchor {end_anchor} is not an extremum of T_kappa"
            )));
        }
        let mid = match (n % 2, mid_anchor) {
            (0, Some(v)) if near_extremum(kappa, v) => v,
            (0, _) => {
                return Err(MourreError::InvalidInput(
                    "even depth needs a mid anchor at an extremum of T_kappa".into(),
                ))
            }
            (_, v) => v.unwrap_or(f64::NAN),
        };
        if !(interval.0 < interval.1) {
            return Err(MourreError::InvalidInput("empty energy interval".into()));
        }
        Ok(Self {
            kappa,
            n,
            variant: Variant::Custom,
            schedule: Schedule {
                reflected,
                level: branch_plan,
                end_anchor,
                mid_anchor: mid,
                interval,
                ordering: Ordering::Unchecked,
            },
        })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }
}

/// Result of building a chain at a trial energy.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainOutcome {
    /// All points stayed on their branches; `residual = X_{n+1} - anchor`.
    Chain { x: Vec<f64>, residual: f64 },
    /// A reflected point left the reflected branch at chain index `step`.
    /// `exit` is `+1` when it left through the upper end, `-1` otherwise.
    OutOfDomain { step: usize, value: f64, exit: i8 },
}

impl ChainOutcome {
    /// Calibration direction: `+1` when `E` is too large, `-1` when too small.
    pub fn direction(&self) -> i8 {
        match self {
            ChainOutcome::Chain { residual, .. } => {
                if *residual > 0.0 {
                    1
                } else if *residual < 0.0 {
                    -1
                } else {
                    0
                }
            }
            ChainOutcome::OutOfDomain { exit, .. } => *exit,
        }
    }
}

const BRANCH_TOL: f64 = 1e-12;

/// Builds `X_0..X_{n+1}` forward from the centre at energy `e`.
pub fn construct_chain(problem: &PingPongProblem, e: f64) -> ChainOutcome {
    let n = problem.n;
    let k = problem.kappa;
    let s = &problem.schedule;
    let r = s.reflected;
    let top = r.interval().1;
    let out = |step: usize, value: f64| ChainOutcome::OutOfDomain {
        step,
        value,
        exit: if value > top { 1 } else { -1 },
    };
    let mut x = vec![0.0; n + 2];
    if n % 2 == 1 {
        let cc = n.div_ceil(2);
        x[cc] = e / 2.0;
        if !r.contains(x[cc], BRANCH_TOL) {
            return out(cc, x[cc]);
        }
        for step in 1..=cc {
            let level = eval_t(k, x[cc + step - 1]);
            x[cc - step] = match branch_inverse(s.level[step - 1], level) {
                Ok(v) => v,
                Err(_) => return out(cc + step - 1, x[cc + step - 1]),
            };
            x[cc + step] = e - x[cc - step];
            if step < cc && !r.contains(x[cc + step], BRANCH_TOL) {
                return out(cc + step, x[cc + step]);
            }
        }
    } else {
        let h = n / 2;
        x[h] = s.mid_anchor;
        x[h + 1] = e - x[h];
        if !r.contains(x[h + 1], BRANCH_TOL) {
            return out(h + 1, x[h + 1]);
        }
        for step in 1..=h {
            let level = eval_t(k, x[h + step]);
            x[h - step] = match branch_inverse(s.level[step - 1], level) {
                Ok(v) => v,
                Err(_) => return out(h + step, x[h + step]),
            };
            x[h + step + 1] = e - x[h - step];
            if step < h && !r.contains(x[h + step + 1], BRANCH_TOL) {
                return out(h + step + 1, x[h + step + 1]);
            }
        }
    }
    let residual = x[n + 1] - s.end_anchor;
    ChainOutcome::Chain { x, residual }
}

/// Rebuilds the chain inward from the exact end anchor. Returns the chain and
/// the mismatch at the centre.
fn anchored_chain(problem: &PingPongProblem, e: f64) -> Result<(Vec<f64>, f64)> {
    let n = problem.n;
    let k = problem.kappa;
    let s = &problem.schedule;
    let mut x = vec![0.0; n + 2];
    x[n + 1] = s.end_anchor;
    x[0] = e - s.end_anchor;
    let steps = level_steps(n);
    for q in 0..steps {
        x[n - q] = branch_inverse(s.reflected, eval_t(k, x[q]))?;
        if n - q != q + 1 {
            x[q + 1] = e - x[n - q];
        }
    }
    let mismatch = if n % 2 == 1 {
        (2.0 * x[steps] - e).abs()
    } else {
        (x[n / 2] - s.mid_anchor).abs()
    };
    Ok((x, mismatch))
}

/// An energy with its chain and ω-weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSolution {
    pub kappa: u32,
    pub n: usize,
    pub variant: Variant,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "X")]
    pub x: Vec<f64>,
    pub omega: Vec<f64>,
    pub order_m: usize,
}

impl ThresholdSolution {
    /// The `n = 0` member of a variant's sequence: the extremum sum that
    /// bounds the admissible interval on the side the sequence starts from.
    /// Its chain is the pair of extrema summing to the energy.
    pub fn zeroth_order(kappa: u32, variant: Variant) -> Result<Self> {
        if kappa < 2 {
            return Err(MourreError::InvalidInput("kappa must be at least 2".into()));
        }
        let c = |j: u32| extremum(kappa, j);
        let (lo, hi) = match variant {
            Variant::J2Decreasing => (c(1), c(0)),
            Variant::WellDecreasing(j) if j >= 1 && j <= kappa / 2 => (c(j), c(j - 1)),
            Variant::FIncreasing => (c(2), c(1)),
            Variant::WellIncreasing(j) if j >= 1 && j <= kappa / 2 => (c(j + 1), c(j)),
            Variant::GVariant if kappa >= 3 => (c(2), c(1)),
            _ => {
                return Err(MourreError::InvalidInput(format!(
                    "no zeroth-order member for {variant} at kappa={kappa}"
                )))
            }
        };
        Ok(Self {
            kappa,
            n: 0,
            variant,
            e: lo + hi,
            x: vec![lo, hi],
            omega: Vec::new(),
            order_m: 0,
        })
    }

    /// The chain point on which the linear relation is centred.
    pub fn mid_point(&self) -> f64 {
        if self.n % 2 == 1 {
            self.x[self.n.div_ceil(2)]
        } else {
            self.x[self.n / 2]
        }
    }
}

/// Solves for the threshold energy of `problem`, bisecting until the bracket
/// is narrower than `tol`.
pub fn solve(problem: &PingPongProblem, tol: f64) -> Result<ThresholdSolution> {
    if !(tol >= 1e-13) {
        return Err(MourreError::InvalidInput(format!("tolerance {tol} below 1e-13")));
    }
    let (a, b) = problem.schedule.interval;
    let (mut lo, mut hi) = (a + BRACKET_SHRINK, b - BRACKET_SHRINK);
    let d_lo = construct_chain(problem, lo).direction();
    let d_hi = construct_chain(problem, hi).direction();
    if d_lo != -1 || d_hi != 1 {
        let edge = |v: f64| 1e-14 * v.abs().max(1.0);
        let e_lo = construct_chain(problem, a + edge(a)).direction();
        let e_hi = construct_chain(problem, b - edge(b)).direction();
        if (d_lo == -1 && d_hi == -1 && e_hi == 1) || (d_lo == 1 && d_hi == 1 && e_lo == -1) {
            return Err(MourreError::PrecisionExhausted {
                kappa: problem.kappa,
                n: problem.n,
                detail: format!("root lies within {BRACKET_SHRINK:e} of the bracket end"),
            });
        }
        return Err(MourreError::ConstructionFailure {
            kappa: problem.kappa,
            n: problem.n,
            variant: problem.variant.to_string(),
            lo,
            hi,
            dir_lo: d_lo,
            dir_hi: d_hi,
        });
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match construct_chain(problem, mid).direction() {
            0 => {
                lo = mid;
                hi = mid;
            }
            d if d < 0 => lo = mid,
            _ => hi = mid,
        }
    }
    let e = 0.5 * (lo + hi);
    let (x, mismatch) = anchored_chain(problem, e)?;
    let precision = |detail: String| MourreError::PrecisionExhausted {
        kappa: problem.kappa,
        n: problem.n,
        detail,
    };
    if mismatch > INVARIANT_TOL {
        return Err(precision(format!("centre mismatch {mismatch:e} after calibration")));
    }
    if let Some(w) = x.windows(2).position(|w| (w[1] - w[0]).abs() < MIN_SPACING) {
        return Err(precision(format!("points X_{w} and X_{} coincide", w + 1)));
    }
    let mut sol = ThresholdSolution {
        kappa: problem.kappa,
        n: problem.n,
        variant: problem.variant,
        e,
        x,
        omega: Vec::new(),
        order_m: level_steps(problem.n),
    };
    check_invariants(&sol, problem.schedule.ordering)?;
    sol.omega = omega_weights(&sol)?;
    if let Some(w) = sol.omega.iter().find(|w| !(**w < 0.0)) {
        return Err(MourreError::DegenerateSolution(format!("non-negative weight {w}")));
    }
    let rel = verify_linear_relation(&sol, LINEAR_RELATION_JMAX);
    if !(rel <= LINEAR_RELATION_TOL) {
        return Err(precision(format!("linear relation residual {rel:e}")));
    }
    Ok(sol)
}

fn check_invariants(sol: &ThresholdSolution, ordering: Ordering) -> Result<()> {
    let n = sol.n;
    let k = sol.kappa;
    let x = &sol.x;
    let fail = |what: String| Err(MourreError::DegenerateSolution(what));
    if x.iter().any(|v| !(v.abs() <= 1.0 + 1e-12)) {
        return fail("chain point outside [-1, 1]".into());
    }
    let steps = level_steps(n);
    for q in 0..=steps {
        let a = x[n + 1 - q];
        let b = sol.e - x[q];
        if (a - b).abs() > INVARIANT_TOL {
            return fail(format!("symmetry broken at q={}", q as i64 - 1));
        }
    }
    for q in 0..steps {
        let (a, b) = (x[q], x[n - q]);
        if (eval_t(k, a) - eval_t(k, b)).abs() > INVARIANT_TOL {
            return fail(format!("level condition broken at q={q}"));
        }
        if !(eval_u(k, a) * eval_u(k, b) < 0.0) {
            return fail(format!("slope condition broken at q={q}"));
        }
    }
    let last_left = if n % 2 == 1 { steps - 1 } else { n / 2 };
    let left = &x[..=last_left];
    let ok = match ordering {
        Ordering::Increasing => left.windows(2).all(|w| w[0] < w[1]),
        Ordering::Decreasing => left.windows(2).all(|w| w[0] > w[1]),
        Ordering::DecreasingAfterFirst => {
            left[1..].windows(2).all(|w| w[0] > w[1]) && left[1..].iter().all(|v| left[0] < *v)
        }
        Ordering::Unchecked => true,
    };
    if !ok {
        return fail("chain ordering broken".into());
    }
    Ok(())
}

fn m_u(kappa: u32, x: f64) -> f64 {
    m(x) * eval_u(kappa, x)
}

/// The ω-weights certifying the linear relation
/// `g(X_mid) = Σ_q ω_q g(X_q)` for every index `j`.
///
/// Each weight is a signed ratio of products of `m(X_p) U_{κ-1}(X_p)` over
/// the right-hand and left-hand parts of the chain. Both products have the
/// same number of factors, so they are accumulated as a product of
/// level-paired ratios to avoid underflow on long chains.
pub fn omega_weights(sol: &ThresholdSolution) -> Result<Vec<f64>> {
    let n = sol.n;
    let k = sol.kappa;
    let x = &sol.x;
    let last_left = if n % 2 == 1 { (n - 1) / 2 } else { n / 2 - 1 };
    let factor = if n % 2 == 1 { 2.0 } else { 1.0 };
    let mut out = Vec::with_capacity(level_steps(n));
    for q in 0..=last_left {
        let mut ratio = 1.0;
        for p in q..=last_left {
            let den = m_u(k, x[p]);
            if den == 0.0 || !den.is_finite() {
                return Err(MourreError::DegenerateSolution(format!(
                    "vanishing factor at X_{p} in omega_{q}"
                )));
            }
            ratio *= m_u(k, x[n - p]) / den;
        }
        let sign = if (last_left - q) % 2 == 0 { 1.0 } else { -1.0 };
        out.push(factor * sign * ratio);
    }
    Ok(out)
}

/// `max_{j ≤ j_max} |g_j(X_mid) - Σ_q ω_q g_j(X_q)|`.
pub fn verify_linear_relation(sol: &ThresholdSolution, j_max: u32) -> f64 {
    let point = |x: f64| EnergyPoint2D { e: sol.e, x };
    let mid = point(sol.mid_point());
    (1..=j_max)
        .map(|j| {
            let lhs = g2(j, sol.kappa, &mid);
            let rhs: f64 = sol
                .omega
                .iter()
                .enumerate()
                .map(|(q, w)| w * g2(j, sol.kappa, &point(sol.x[q])))
                .sum();
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Solutions for `n = 1..=n_max`, computed in parallel and returned in order.
/// The energies must be strictly monotone in the variant's direction.
pub fn sequence(kappa: u32, variant: Variant, n_max: usize, tol: f64) -> Result<Vec<ThresholdSolution>> {
    if n_max == 0 {
        return Err(MourreError::InvalidInput("n_max must be at least 1".into()));
    }
    let results: Vec<Result<ThresholdSolution>> = (1..=n_max)
        .into_par_iter()
        .map(|n| PingPongProblem::new(kappa, n, variant).and_then(|p| solve(&p, tol)))
        .collect();
    let mut out = Vec::with_capacity(n_max);
    for (i, r) in results.into_iter().enumerate() {
        let sol = r.map_err(|e| MourreError::SequenceFailure {
            n: i + 1,
            source: Box::new(e),
        })?;
        out.push(sol);
    }
    for w in out.windows(2) {
        let ok = if variant.is_decreasing() {
            w[1].e < w[0].e
        } else {
            w[1].e > w[0].e
        };
        if !ok {
            return Err(MourreError::SequenceFailure {
                n: w[1].n,
                source: Box::new(MourreError::DegenerateSolution(format!(
                    "sequence not monotone: E_{}={} then E_{}={}",
                    w[0].n, w[0].e, w[1].n, w[1].e
                ))),
            });
        }
    }
    Ok(out)
}

/// Parity of the index of `ℰ` in [`fixed_point_form`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `ℰ_{2n} = 1 + f_ℰ^{(n)}(cos(π/κ))`.
    Even,
    /// `ℰ_{2n-1} = 1 + f_ℰ^{(n)}(ℰ/2)`.
    Odd,
}

/// The map taking a point on branch 0 of `T_κ` to the point on branch 1 at
/// the same level, for κ ∈ {3, 4}.
fn level_map(kappa: u32, y: f64) -> f64 {
    let s = (1.0 - y * y).max(0.0).sqrt();
    match kappa {
        3 => (-y + 3f64.sqrt() * s) / 2.0,
        _ => s,
    }
}

/// J2 energies from the iterated closed-form map `f_E(x) = L(E - x)`,
/// an independent route to the values produced by [`solve`].
pub fn fixed_point_form(kappa: u32, n: usize, parity: Parity) -> Result<f64> {
    if kappa != 3 && kappa != 4 {
        return Err(MourreError::InvalidInput("fixed-point form needs kappa in {3, 4}".into()));
    }
    if n == 0 {
        return Err(MourreError::InvalidInput("n must be at least 1".into()));
    }
    let c1 = extremum(kappa, 1);
    let h = |e: f64| -> f64 {
        let mut x = match parity {
            Parity::Even => c1,
            Parity::Odd => e / 2.0,
        };
        for _ in 0..n {
            x = level_map(kappa, e - x);
        }
        1.0 + x - e
    };
    let (mut lo, mut hi) = (2.0 * c1 + BRACKET_SHRINK, 1.0 + c1 - BRACKET_SHRINK);
    let (h_lo, h_hi) = (h(lo), h(hi));
    if !(h_lo > 0.0 && h_hi < 0.0) {
        return Err(MourreError::BracketFailure(format!(
            "h({lo})={h_lo}, h({hi})={h_hi}"
        )));
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= 1e-15 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa2_first_chain() {
        let p = PingPongProblem::new(2, 1, Variant::J2Decreasing).unwrap();
        match construct_chain(&p, 2.0 / 3.0) {
            ChainOutcome::Chain { x, residual } => {
                assert!((x[0] + 1.0 / 3.0).abs() < 1e-15);
                assert!((x[1] - 1.0 / 3.0).abs() < 1e-15);
                assert!(residual.abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn variant_round_trip() {
        for v in [
            Variant::J2Decreasing,
            Variant::FIncreasing,
            Variant::GVariant,
            Variant::WellDecreasing(3),
            Variant::WellIncreasing(2),
            Variant::Custom,
        ] {
            assert_eq!(v.to_string().parse::<Variant>().unwrap(), v);
        }
        assert!("well-dec".parse::<Variant>().is_err());
        assert_eq!("well-inc:2".parse::<Variant>().unwrap(), Variant::WellIncreasing(2));
    }

    #[test]
    fn invalid_problems() {
        assert!(PingPongProblem::new(1, 1, Variant::J2Decreasing).is_err());
        assert!(PingPongProblem::new(3, 0, Variant::J2Decreasing).is_err());
        assert!(PingPongProblem::new(2, 1, Variant::GVariant).is_err());
        assert!(PingPongProblem::new(8, 1, Variant::WellDecreasing(5)).is_err());
        assert!(PingPongProblem::new(8, 1, Variant::Custom).is_err());
    }

    #[test]
    fn tolerance_precondition() {
        let p = PingPongProblem::new(3, 1, Variant::J2Decreasing).unwrap();
        assert!(matches!(solve(&p, 1e-15), Err(MourreError::InvalidInput(_))));
    }

    #[test]
    fn omega_kappa2_first() {
        let p = PingPongProblem::new(2, 1, Variant::J2Decreasing).unwrap();
        let s = solve(&p, 1e-13).unwrap();
        assert_eq!(s.omega.len(), 1);
        assert!((s.omega[0] + 2.0).abs() < 1e-9);
    }

    #[test]
    fn zeroth_order_members() {
        let z = ThresholdSolution::zeroth_order(3, Variant::J2Decreasing).unwrap();
        assert!((z.e - 1.5).abs() < 1e-15);
        assert!(ThresholdSolution::zeroth_order(2, Variant::GVariant).is_err());
    }
}

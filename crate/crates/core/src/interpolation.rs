//! Coefficient vectors ρ from interpolation constraints at band endpoints.
//!
//! For a band `(E_L, E_R)` bounded by two threshold solutions, `G_κ^E` is
//! required to vanish at selected chain points of each endpoint, with a
//! vanishing `x`-derivative at interior chain points. With `ρ_1 = 1` fixed,
//! the remaining coefficients solve a small least-squares problem.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MourreError, Result};
use crate::linalg::{pivoted_qr, Matrix};
use crate::pingpong::ThresholdSolution;
use crate::symbol::{dg2_dx, g2, x_range_2d, Combination, EnergyPoint2D};
use crate::verifier::{scan_band, ScanConfig, ScanReport};

/// Relative pivot threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Largest accepted row residual of a solved system.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// A chain start counts as interior when it is this far inside the domain.
const INTERIOR_MARGIN: f64 = 1e-9;

/// Kind of one interpolation constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    /// `G(x) = 0`.
    Value,
    /// `dG/dx(x) = 0`.
    Derivative,
}

/// One constraint: `kind` evaluated at `(E, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: RowKind,
    #[serde(rename = "E")]
    pub e: f64,
    pub x: f64,
}

/// Constraints contributed by one endpoint solution of depth `m`.
///
/// * odd `m`: values at `X_0..X_{(m-1)/2}`, derivatives at `X_1..X_{(m-1)/2}`;
/// * even `m`: values at `X_0..X_{m/2-1}`, derivatives at `X_1..X_{m/2}`;
/// * `m = 0`: nothing, since every `g_{jκ}` vanishes there.
///
/// When `X_0` lies strictly inside the `x`-domain, `G` has an interior zero
/// there and a derivative constraint at `X_0` is added as well.
pub fn endpoint_constraints(sol: &ThresholdSolution) -> Vec<Constraint> {
    let m = sol.n;
    if m == 0 {
        return Vec::new();
    }
    let (values, derivs) = if m % 2 == 1 {
        ((m - 1) / 2, (m - 1) / 2)
    } else {
        (m / 2 - 1, m / 2)
    };
    let at = |kind, q: usize| Constraint {
        kind,
        e: sol.e,
        x: sol.x[q],
    };
    let mut rows: Vec<Constraint> = (0..=values).map(|q| at(RowKind::Value, q)).collect();
    rows.extend((1..=derivs).map(|q| at(RowKind::Derivative, q)));
    let (lo, hi) = x_range_2d(sol.e);
    if sol.x[0] > lo + INTERIOR_MARGIN && sol.x[0] < hi - INTERIOR_MARGIN {
        rows.push(at(RowKind::Derivative, 0));
    }
    rows
}

/// Constraints that follow from [`endpoint_constraints`] by symmetry:
/// values at the mirrored points `X_{m-q}` and, for odd `m`, the derivative
/// at the centre `X_{(m+1)/2}`.
pub fn redundant_constraints(sol: &ThresholdSolution) -> Vec<Constraint> {
    let m = sol.n;
    if m == 0 {
        return Vec::new();
    }
    let values = if m % 2 == 1 { (m - 1) / 2 } else { m / 2 - 1 };
    let mut rows: Vec<Constraint> = (0..=values)
        .map(|q| Constraint {
            kind: RowKind::Value,
            e: sol.e,
            x: sol.x[m - q],
        })
        .collect();
    if m % 2 == 1 {
        rows.push(Constraint {
            kind: RowKind::Derivative,
            e: sol.e,
            x: sol.x[m.div_ceil(2)],
        });
    }
    rows
}

/// A band between two consecutive thresholds and the index set Σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationProblem {
    pub kappa: u32,
    pub left: ThresholdSolution,
    pub right: ThresholdSolution,
    pub sigma: Vec<u32>,
}

impl InterpolationProblem {
    pub fn new(left: ThresholdSolution, right: ThresholdSolution, sigma: Vec<u32>) -> Result<Self> {
        let kappa = left.kappa;
        if right.kappa != kappa {
            return Err(MourreError::InvalidInput("endpoint kappa mismatch".into()));
        }
        if !(left.e < right.e) {
            return Err(MourreError::InvalidInput(format!(
                "left endpoint {} is not below right endpoint {}",
                left.e, right.e
            )));
        }
        validate_sigma(&sigma)?;
        Ok(Self {
            kappa,
            left,
            right,
            sigma,
        })
    }

    /// Constraints from both endpoints, left first.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut rows = endpoint_constraints(&self.left);
        rows.extend(endpoint_constraints(&self.right));
        rows
    }

    /// The constraint matrix: one row per constraint, one column per `j ∈ Σ`.
    pub fn assemble(&self) -> Matrix {
        build_matrix(self.kappa, &self.sigma, &self.constraints())
    }

    /// [`InterpolationProblem::assemble`] with the symmetric redundant rows
    /// appended.
    pub fn assemble_with_redundant(&self) -> Matrix {
        let mut rows = self.constraints();
        rows.extend(redundant_constraints(&self.left));
        rows.extend(redundant_constraints(&self.right));
        build_matrix(self.kappa, &self.sigma, &rows)
    }
}

fn validate_sigma(sigma: &[u32]) -> Result<()> {
    if sigma.first() != Some(&1) {
        return Err(MourreError::InvalidInput("sigma must start with j = 1".into()));
    }
    if sigma.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MourreError::InvalidInput("sigma must be strictly increasing".into()));
    }
    Ok(())
}

/// Matrix of single-index terms `g_{jκ}` or `dg_{jκ}/dx` at each constraint.
pub fn build_matrix(kappa: u32, sigma: &[u32], rows: &[Constraint]) -> Matrix {
    let data: Vec<Vec<f64>> = rows
        .iter()
        .map(|c| {
            let p = EnergyPoint2D { e: c.e, x: c.x };
            sigma
                .iter()
                .map(|&j| match c.kind {
                    RowKind::Value => g2(j, kappa, &p),
                    RowKind::Derivative => dg2_dx(j, kappa, &p),
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(&data, sigma.len()).expect("rows built with sigma.len() columns")
}

/// Solution of an interpolation system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolveReportRepr", into = "SolveReportRepr")]
pub struct SolveReport {
    pub combination: Combination,
    /// Rank of the full constraint matrix.
    pub rank: usize,
    /// Largest `|M ρ|` over the rows.
    pub residual: f64,
    /// Dimension of the solution set once `ρ_1 = 1` is fixed.
    pub free_dims: usize,
    /// Orthonormal directions along which ρ can move, with a zero entry for
    /// `j = 1`.
    pub nullspace: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct SolveReportRepr {
    kappa: u32,
    sigma: Vec<u32>,
    rho: Vec<f64>,
    rank: usize,
    residual: f64,
    free_dims: usize,
    #[serde(default)]
    nullspace: Vec<Vec<f64>>,
}

impl From<SolveReport> for SolveReportRepr {
    fn from(r: SolveReport) -> Self {
        Self {
            kappa: r.combination.kappa(),
            sigma: r.combination.sigma(),
            rho: r.combination.rho(),
            rank: r.rank,
            residual: r.residual,
            free_dims: r.free_dims,
            nullspace: r.nullspace,
        }
    }
}

impl TryFrom<SolveReportRepr> for SolveReport {
    type Error = MourreError;

    fn try_from(r: SolveReportRepr) -> Result<Self> {
        Ok(Self {
            combination: Combination::from_sigma_rho(r.kappa, &r.sigma, &r.rho)?,
            rank: r.rank,
            residual: r.residual,
            free_dims: r.free_dims,
            nullspace: r.nullspace,
        })
    }
}

/// Solves `M ρ = 0` with `ρ_1 = 1` for an arbitrary constraint matrix.
pub fn solve_matrix(kappa: u32, sigma: &[u32], m: &Matrix) -> Result<SolveReport> {
    validate_sigma(sigma)?;
    let rank = pivoted_qr(m, RANK_TOL).rank();
    let a = m.drop_column(0);
    let b: Vec<f64> = m.column(0).iter().map(|v| -v).collect();
    let qr = pivoted_qr(&a, RANK_TOL);
    let tail = qr.solve(&b);
    let mut rho = vec![1.0];
    rho.extend(tail);
    let residual = m.mul_vec(&rho).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(residual <= RESIDUAL_TOL) {
        return Err(MourreError::NoSolution { residual });
    }
    let nullspace: Vec<Vec<f64>> = qr
        .nullspace()
        .into_iter()
        .map(|v| {
            let mut full = vec![0.0];
            full.extend(v);
            full
        })
        .collect();
    Ok(SolveReport {
        combination: Combination::from_sigma_rho(kappa, sigma, &rho)?,
        rank,
        residual,
        free_dims: nullspace.len(),
        nullspace,
    })
}

/// Solves the interpolation system of `problem`.
pub fn solve_coefficients(problem: &InterpolationProblem) -> Result<SolveReport> {
    solve_matrix(problem.kappa, &problem.sigma, &problem.assemble())
}

/// A unit vector spanning the nullspace of the full constraint matrix,
/// without any normalization of `ρ_1`. Fails unless the nullspace is
/// one-dimensional.
pub fn homogeneous_direction(problem: &InterpolationProblem) -> Result<Vec<f64>> {
    let ns = pivoted_qr(&problem.assemble(), RANK_TOL).nullspace();
    match ns.len() {
        1 => Ok(ns.into_iter().next().expect("one vector")),
        k => Err(MourreError::DegenerateSolution(format!(
            "nullspace has dimension {k}, expected 1"
        ))),
    }
}

/// Coefficients `ρ_{j2} = intercept + slope · ρ_{j3}` satisfying a single
/// value constraint, with `ρ_{j1} = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineFamily {
    pub kappa: u32,
    pub sigma: [u32; 3],
    pub intercept: f64,
    pub slope: f64,
}

impl AffineFamily {
    /// The member with `ρ_{j3} = t`.
    pub fn member(&self, t: f64) -> Result<Combination> {
        Combination::new(
            self.kappa,
            vec![
                (self.sigma[0], 1.0),
                (self.sigma[1], self.intercept + self.slope * t),
                (self.sigma[2], t),
            ],
        )
    }
}

/// Solves the single constraint `G^E(x) = 0` for a three-term combination
/// with `ρ_{σ1} = 1`, leaving `ρ_{σ3}` free.
pub fn solve_single_constraint_family(kappa: u32, e: f64, x: f64, sigma: [u32; 3]) -> Result<AffineFamily> {
    validate_sigma(&sigma)?;
    let p = EnergyPoint2D::new(e, x)?;
    let g = |j: u32| g2(j, kappa, &p);
    let (g1, g2v, g3v) = (g(sigma[0]), g(sigma[1]), g(sigma[2]));
    if g2v == 0.0 {
        return Err(MourreError::DegenerateSolution(
            "middle term vanishes at the constraint point".into(),
        ));
    }
    Ok(AffineFamily {
        kappa,
        sigma,
        intercept: -g1 / g2v,
        slope: -g3v / g2v,
    })
}

/// Outcome of one candidate index set in [`search_sigma`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaTrial {
    pub sigma: Vec<u32>,
    pub certified: bool,
    /// Smallest interior value of `G` when the system could be solved.
    pub min_value: Option<f64>,
    /// Solver or scan diagnostics for rejected sets.
    pub detail: String,
}

/// First certified index set together with all trials up to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub report: SolveReport,
    pub scan: ScanReport,
    pub trials: Vec<SigmaTrial>,
}

/// Default candidate pool for a band whose left endpoint has depth `n`:
/// `{1..2n}`, then `{1..2n-1} ∪ {j}` for `j = 2n+1..2n+4`, then the
/// remaining subsets of `{1..2n+4}` of size `2n` containing 1, in
/// lexicographic order, truncated to `budget` entries.
pub fn default_pool(n: usize, budget: usize) -> Vec<Vec<u32>> {
    let size = (2 * n).max(2);
    let top = size as u32 + 4;
    let mut pool: Vec<Vec<u32>> = vec![(1..=size as u32).collect()];
    for j in size as u32 + 1..=top {
        let mut s: Vec<u32> = (1..size as u32).collect();
        s.push(j);
        pool.push(s);
    }
    let mut current: Vec<u32> = (1..=size as u32).collect();
    loop {
        if pool.len() >= budget {
            break;
        }
        if !pool.contains(&current) {
            pool.push(current.clone());
        }
        // Advance to the next size-`size` subset of {1..top} that keeps 1.
        let mut i = size - 1;
        loop {
            if i == 0 {
                pool.truncate(budget);
                return pool;
            }
            let limit = top - (size - 1 - i) as u32;
            if current[i] < limit {
                current[i] += 1;
                for k in i + 1..size {
                    current[k] = current[k - 1] + 1;
                }
                break;
            }
            i -= 1;
        }
    }
    pool.truncate(budget);
    pool
}

/// Tries each candidate Σ in pool order: solve, then scan the open band.
/// Returns the first candidate whose combination is strictly positive at
/// every interior energy. Candidates are evaluated in parallel; the result
/// only depends on pool order.
pub fn search_sigma(
    left: &ThresholdSolution,
    right: &ThresholdSolution,
    pool: &[Vec<u32>],
    budget: usize,
    config: &ScanConfig,
) -> Result<SearchOutcome> {
    if pool.is_empty() {
        return Err(MourreError::InvalidInput("empty sigma pool".into()));
    }
    let candidates = &pool[..pool.len().min(budget.max(1))];
    let results: Vec<(SigmaTrial, Option<(SolveReport, ScanReport)>)> = candidates
        .par_iter()
        .map(|sigma| {
            let attempt = InterpolationProblem::new(left.clone(), right.clone(), sigma.clone())
                .and_then(|p| solve_coefficients(&p))
                .and_then(|r| scan_band(&r.combination, (left.e, right.e), config).map(|s| (r, s)));
            match attempt {
                Ok((report, scan)) => {
                    let certified = scan.interior_positive();
                    let detail = match scan.first_failure() {
                        None => "certified".to_string(),
                        Some(f) => format!("G={:e} at E={}, x={}", f.min_value, f.e, f.argmin[0]),
                    };
                    let trial = SigmaTrial {
                        sigma: sigma.clone(),
                        certified,
                        min_value: Some(scan.global_min),
                        detail,
                    };
                    (trial, certified.then_some((report, scan)))
                }
                Err(e) => (
                    SigmaTrial {
                        sigma: sigma.clone(),
                        certified: false,
                        min_value: None,
                        detail: e.to_string(),
                    },
                    None,
                ),
            }
        })
        .collect();
    let mut trials = Vec::new();
    for (trial, success) in results {
        trials.push(trial);
        if let Some((report, scan)) = success {
            return Ok(SearchOutcome { report, scan, trials });
        }
    }
    let diagnostics = trials
        .iter()
        .map(|t| format!("{:?}: {}", t.sigma, t.detail))
        .collect::<Vec<_>>()
        .join("; ");
    Err(MourreError::SearchExhausted {
        tried: trials.len(),
        diagnostics,
    })
}

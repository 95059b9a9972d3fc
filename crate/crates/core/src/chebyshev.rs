//! Chebyshev polynomials of the first and second kind.
//!
//! `T_n` and `U_{n-1}` are evaluated with the three-term recurrence, which is
//! exact at rational arguments and stable on `[-1, 1]`. The trigonometric form
//! is only used to invert `T_κ` on one of its monotone branches.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{MourreError, Result};

/// Tolerance for root residuals and domain clamping.
pub const EQ_TOL: f64 = 1e-12;

/// Tolerance for comparisons in property checks.
pub const CMP_TOL: f64 = 1e-9;

/// Below this value of `|x² - 1|` the derivative of `U_{n-1}` switches from the
/// closed quotient form to the differentiated recurrence.
const DERIV_SWITCH: f64 = 1e-8;

/// `T_n(x)` by the recurrence `T_{k+1} = 2x T_k - T_{k-1}`.
pub fn eval_t(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut a, mut b) = (1.0, x);
            for _ in 1..n {
                let c = 2.0 * x * b - a;
                a = b;
                b = c;
            }
            b
        }
    }
}

/// `U_{n-1}(x)`, the second-kind polynomial indexed so that its roots are
/// `cos(lπ/n)` for `1 ≤ l ≤ n-1`. `n = 0` yields `U_{-1} ≡ 0`.
pub fn eval_u(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 1..n {
        let c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    b
}

/// Derivative of `T_n`, equal to `n U_{n-1}`.
pub fn eval_t_deriv(n: u32, x: f64) -> f64 {
    n as f64 * eval_u(n, x)
}

/// Derivative of `U_{n-1}` with respect to `x`.
///
/// Uses `(n T_n(x) - x U_{n-1}(x)) / (x² - 1)` away from `±1` and the
/// differentiated recurrence `U'_{k+1} = 2U_k + 2x U'_k - U'_{k-1}` near the
/// endpoints, where the quotient is singular.
pub fn eval_u_deriv(n: u32, x: f64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let denom = x * x - 1.0;
    if denom.abs() >= DERIV_SWITCH {
        return (n as f64 * eval_t(n, x) - x * eval_u(n, x)) / denom;
    }
    let (mut u_prev, mut u) = (0.0, 1.0);
    let (mut du_prev, mut du) = (0.0, 0.0);
    for _ in 1..n {
        let u_next = 2.0 * x * u - u_prev;
        let du_next = 2.0 * u + 2.0 * x * du - du_prev;
        u_prev = u;
        u = u_next;
        du_prev = du;
        du = du_next;
    }
    du
}

/// `cos(jπ/κ)`, the `j`-th extremum abscissa of `T_κ`.
pub fn extremum(kappa: u32, j: u32) -> f64 {
    (j as f64 * PI / kappa as f64).cos()
}

/// The extremum abscissae `cos(jπ/κ)` for `j = 0..=κ`, strictly decreasing.
pub fn t_extrema(kappa: u32) -> Vec<f64> {
    (0..=kappa).map(|j| extremum(kappa, j)).collect()
}

/// A monotone branch of `T_κ`: the interval `[cos((j+1)π/κ), cos(jπ/κ)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchIndex {
    pub kappa: u32,
    pub j: u32,
}

impl BranchIndex {
    pub fn new(kappa: u32, j: u32) -> Result<Self> {
        if kappa == 0 {
            return Err(MourreError::InvalidInput("kappa must be at least 1".into()));
        }
        if j >= kappa {
            return Err(MourreError::InvalidInput(format!(
                "branch index {j} out of range for kappa={kappa}"
            )));
        }
        Ok(Self { kappa, j })
    }

    /// Closed interval `(lower, upper)` covered by the branch.
    pub fn interval(&self) -> (f64, f64) {
        (extremum(self.kappa, self.j + 1), extremum(self.kappa, self.j))
    }

    /// `T_κ` increases on even branches (branch 0 ends at `T_κ(1) = 1`) and
    /// decreases on odd ones.
    pub fn is_increasing(&self) -> bool {
        self.j % 2 == 0
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        let (lo, hi) = self.interval();
        x >= lo - tol && x <= hi + tol
    }

    /// The branch whose interval contains `x`. Points on a shared endpoint go
    /// to the branch with the smaller index.
    pub fn containing(kappa: u32, x: f64) -> Option<Self> {
        if !(-1.0 - EQ_TOL..=1.0 + EQ_TOL).contains(&x) {
            return None;
        }
        let theta = x.clamp(-1.0, 1.0).acos();
        let j = ((theta * kappa as f64 / PI).floor() as u32).min(kappa - 1);
        Some(Self { kappa, j })
    }
}

/// The unique `x` on branch `b` with `T_κ(x) = y`.
///
/// Values of `y` within [`EQ_TOL`] outside `[-1, 1]` are clamped; larger
/// excursions are rejected.
pub fn branch_inverse(b: BranchIndex, y: f64) -> Result<f64> {
    if !y.is_finite() || y.abs() > 1.0 + EQ_TOL {
        return Err(MourreError::Domain(format!(
            "branch_inverse level {y} outside [-1, 1]"
        )));
    }
    let alpha = y.clamp(-1.0, 1.0).acos();
    let j = b.j as f64;
    let theta = if b.j % 2 == 0 {
        j * PI + alpha
    } else {
        (j + 1.0) * PI - alpha
    };
    Ok((theta / b.kappa as f64).cos())
}

/// The two-point bracket `f(x) g(y) - f(y) g(x)`.
pub fn bracket<F, G>(f: F, g: G, x: f64, y: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    f(x) * g(y) - f(y) * g(x)
}

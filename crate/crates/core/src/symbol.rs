//! The functions `g_{jκ}^E` and their weighted sums `G_κ^E`.
//!
//! With `m(x) = 1 - x²`, a single coordinate contributes
//! `m(x) U_{jκ-1}(x)`. On the two-dimensional constant-energy surface the
//! coordinates are `(x, E - x)`; in three dimensions they are
//! `(x, y, E - x - y)`.

use serde::{Deserialize, Serialize};

use crate::chebyshev::{eval_t, eval_u, EQ_TOL};
use crate::error::{MourreError, Result};

/// `m(x) = 1 - x²`.
#[inline]
pub fn m(x: f64) -> f64 {
    1.0 - x * x
}

/// `m(x) U_{n-1}(x)`.
#[inline]
pub fn single_term(n: u32, x: f64) -> f64 {
    m(x) * eval_u(n, x)
}

/// Derivative of `m(x) U_{n-1}(x)`.
///
/// Multiplying the identity `(x² - 1) U'_{n-1} = n T_n - x U_{n-1}` by `-1`
/// gives `m U'_{n-1} = x U_{n-1} - n T_n`, so the derivative is the polynomial
/// `-x U_{n-1}(x) - n T_n(x)` with no singularity at `±1`.
#[inline]
pub fn single_term_deriv(n: u32, x: f64) -> f64 {
    -x * eval_u(n, x) - n as f64 * eval_t(n, x)
}

/// Admissible range of `x` on the 2-D surface at energy `e`.
pub fn x_range_2d(e: f64) -> (f64, f64) {
    ((e - 1.0).max(-1.0), (e + 1.0).min(1.0))
}

/// Admissible range of `y` on the 3-D surface at energy `e`.
pub fn y_range_3d(e: f64) -> (f64, f64) {
    ((e - 2.0).max(-1.0), (e + 2.0).min(1.0))
}

/// Admissible range of `x` on the 3-D surface at energy `e` and slice `y`.
pub fn x_range_3d(e: f64, y: f64) -> (f64, f64) {
    ((e - y - 1.0).max(-1.0), (e - y + 1.0).min(1.0))
}

fn clamp_into(v: f64, (lo, hi): (f64, f64), what: &str) -> Result<f64> {
    if !v.is_finite() || lo > hi + EQ_TOL {
        return Err(MourreError::Domain(format!("{what}: empty range [{lo}, {hi}]")));
    }
    if v < lo - EQ_TOL || v > hi + EQ_TOL {
        return Err(MourreError::Domain(format!(
            "{what}={v} outside [{lo}, {hi}]"
        )));
    }
    Ok(v.clamp(lo.min(hi), hi.max(lo)))
}

/// A point `(x, E - x)` of the 2-D constant-energy surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint2D {
    pub e: f64,
    pub x: f64,
}

impl EnergyPoint2D {
    /// Validates the point; coordinates within [`EQ_TOL`] of the boundary are
    /// clamped onto it.
    pub fn new(e: f64, x: f64) -> Result<Self> {
        let x = clamp_into(x, x_range_2d(e), "x")?;
        Ok(Self { e, x })
    }

    /// The implied second coordinate `E - x`.
    pub fn partner(&self) -> f64 {
        self.e - self.x
    }
}

/// A point `(x, y, E - x - y)` of the 3-D constant-energy surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint3D {
    pub e: f64,
    pub x: f64,
    pub y: f64,
}

impl EnergyPoint3D {
    pub fn new(e: f64, x: f64, y: f64) -> Result<Self> {
        let y = clamp_into(y, y_range_3d(e), "y")?;
        let x = clamp_into(x, x_range_3d(e, y), "x")?;
        Ok(Self { e, x, y })
    }

    /// The implied third coordinate `E - x - y`.
    pub fn third(&self) -> f64 {
        self.e - self.x - self.y
    }
}

/// `g_{jκ}^E(x) = m(x) U_{jκ-1}(x) + m(E-x) U_{jκ-1}(E-x)`.
pub fn g2(j: u32, kappa: u32, p: &EnergyPoint2D) -> f64 {
    let n = j * kappa;
    single_term(n, p.x) + single_term(n, p.partner())
}

/// `g_{jκ}^E(x, y)`: the sum of the three coordinate terms.
pub fn g3(j: u32, kappa: u32, p: &EnergyPoint3D) -> f64 {
    let n = j * kappa;
    single_term(n, p.x) + single_term(n, p.y) + single_term(n, p.third())
}

/// `d/dx g_{jκ}^E(x)`; the partner coordinate contributes with a minus sign.
pub fn dg2_dx(j: u32, kappa: u32, p: &EnergyPoint2D) -> f64 {
    let n = j * kappa;
    single_term_deriv(n, p.x) - single_term_deriv(n, p.partner())
}

/// A finite linear combination `Σ ρ_j A_{jκ}` of conjugate operators,
/// represented by its coefficient list.
///
/// Terms are sorted by strictly increasing `j ≥ 1`. [`Combination::new`]
/// additionally enforces the normalization `ρ = 1` on the `j = 1` term;
/// [`Combination::unnormalized`] only checks the structure and is used for
/// rescaled or negated combinations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CombinationRepr", into = "CombinationRepr")]
pub struct Combination {
    kappa: u32,
    terms: Vec<(u32, f64)>,
}

#[derive(Serialize, Deserialize)]
struct CombinationRepr {
    kappa: u32,
    terms: Vec<(u32, f64)>,
}

impl TryFrom<CombinationRepr> for Combination {
    type Error = MourreError;

    fn try_from(r: CombinationRepr) -> Result<Self> {
        Combination::unnormalized(r.kappa, r.terms)
    }
}

impl From<Combination> for CombinationRepr {
    fn from(c: Combination) -> Self {
        CombinationRepr {
            kappa: c.kappa,
            terms: c.terms,
        }
    }
}

impl Combination {
    /// A normalized combination: structure checks plus `ρ = 1` when `j = 1`
    /// is present.
    pub fn new(kappa: u32, terms: Vec<(u32, f64)>) -> Result<Self> {
        let c = Self::unnormalized(kappa, terms)?;
        if !c.is_normalized() {
            return Err(MourreError::InvalidInput(
                "the coefficient of j=1 must equal 1".into(),
            ));
        }
        Ok(c)
    }

    /// A combination without the normalization requirement.
    pub fn unnormalized(kappa: u32, terms: Vec<(u32, f64)>) -> Result<Self> {
        if kappa == 0 {
            return Err(MourreError::InvalidInput("kappa must be at least 1".into()));
        }
        if terms.is_empty() {
            return Err(MourreError::InvalidInput("combination has no terms".into()));
        }
        for (i, &(j, rho)) in terms.iter().enumerate() {
            if j == 0 {
                return Err(MourreError::InvalidInput("term index j must be ≥ 1".into()));
            }
            if !rho.is_finite() {
                return Err(MourreError::InvalidInput(format!("coefficient for j={j} is not finite")));
            }
            if i > 0 && terms[i - 1].0 >= j {
                return Err(MourreError::InvalidInput(
                    "term indices must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { kappa, terms })
    }

    /// Builds a combination from parallel index and coefficient lists.
    pub fn from_sigma_rho(kappa: u32, sigma: &[u32], rho: &[f64]) -> Result<Self> {
        if sigma.len() != rho.len() {
            return Err(MourreError::InvalidInput(format!(
                "sigma has {} entries but rho has {}",
                sigma.len(),
                rho.len()
            )));
        }
        Self::unnormalized(kappa, sigma.iter().copied().zip(rho.iter().copied()).collect())
    }

    /// The single-term combination `A_κ`.
    pub fn unit(kappa: u32) -> Self {
        Self {
            kappa,
            terms: vec![(1, 1.0)],
        }
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn sigma(&self) -> Vec<u32> {
        self.terms.iter().map(|t| t.0).collect()
    }

    pub fn rho(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.1).collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.terms
            .iter()
            .find(|t| t.0 == 1)
            .map_or(true, |t| t.1 == 1.0)
    }

    /// Every coefficient multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::unnormalized(
            self.kappa,
            self.terms.iter().map(|&(j, r)| (j, r * t)).collect(),
        )
    }

    /// Termwise sum of two combinations with the same κ.
    pub fn sum(&self, other: &Combination) -> Result<Self> {
        if self.kappa != other.kappa {
            return Err(MourreError::InvalidInput("kappa mismatch in sum".into()));
        }
        let mut terms = self.terms.clone();
        for &(j, r) in &other.terms {
            match terms.binary_search_by_key(&j, |t| t.0) {
                Ok(i) => terms[i].1 += r,
                Err(i) => terms.insert(i, (j, r)),
            }
        }
        Self::unnormalized(self.kappa, terms)
    }

    /// `Σ ρ_j m(t) U_{jκ-1}(t)` for a single coordinate `t`, computed in one
    /// pass of the recurrence.
    pub fn coordinate_sum(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let (mut u_prev, mut u) = (0.0, 1.0);
        let mut k = 1u32;
        for &(j, rho) in &self.terms {
            let n = j * self.kappa;
            while k < n {
                let next = 2.0 * t * u - u_prev;
                u_prev = u;
                u = next;
                k += 1;
            }
            acc += rho * u;
        }
        m(t) * acc
    }

    /// Derivative of [`Combination::coordinate_sum`] in `t`.
    pub fn coordinate_sum_deriv(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let (mut u_prev, mut u) = (0.0, 1.0);
        let (mut t_prev, mut tk) = (1.0, t);
        let mut k = 1u32;
        for &(j, rho) in &self.terms {
            let n = j * self.kappa;
            while k < n {
                let next_u = 2.0 * t * u - u_prev;
                u_prev = u;
                u = next_u;
                let next_t = 2.0 * t * tk - t_prev;
                t_prev = tk;
                tk = next_t;
                k += 1;
            }
            acc += rho * (-t * u - n as f64 * tk);
        }
        acc
    }

    /// `G_κ^E(x)` on the 2-D surface.
    pub fn eval2(&self, p: &EnergyPoint2D) -> f64 {
        self.coordinate_sum(p.x) + self.coordinate_sum(p.partner())
    }

    /// `G_κ^E(x, y)` on the 3-D surface.
    pub fn eval3(&self, p: &EnergyPoint3D) -> f64 {
        self.coordinate_sum(p.x) + self.coordinate_sum(p.y) + self.coordinate_sum(p.third())
    }

    /// `d/dx G_κ^E(x)` on the 2-D surface.
    pub fn deriv2(&self, p: &EnergyPoint2D) -> f64 {
        self.coordinate_sum_deriv(p.x) - self.coordinate_sum_deriv(p.partner())
    }
}

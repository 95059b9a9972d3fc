//! Threshold energies collected from every construction.
//!
//! Sources are zeroth-order extremum sums, the first-order ansatz cases,
//! the ping-pong sequences and, in dimension 3, shifts of two-dimensional
//! thresholds by extrema and a symmetric three-point ansatz. The merged
//! catalog is closed under `E ↦ -E`, deduplicated and sorted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{branch_inverse, eval_t, extremum, t_extrema, BranchIndex};
use crate::error::{MourreError, Result};
use crate::pingpong::{solve, verify_linear_relation, PingPongProblem, Variant};
use crate::symbol::{g2, g3, x_range_2d, EnergyPoint2D, EnergyPoint3D};

/// Energies closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-9;
/// Grid size of the scans that bracket ansatz roots.
const ROOT_GRID: usize = 4000;
/// Accepted residual of a refined ansatz root.
const ROOT_ACCEPT: f64 = 1e-9;
/// Indices `j` used to test that an ansatz ratio is independent of `j`.
const RATIO_JMAX: u32 = 6;
/// Tolerance below which a `g` value counts as zero.
const G_ZERO: f64 = 1e-9;

/// Where a catalog energy comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// `Σ_q cos(j_q π/κ)` for the listed indices.
    ZerothOrder { j: Vec<u32> },
    /// A solved ping-pong chain.
    PingPong { variant: Variant, n: usize },
    /// A first-order ansatz case with witness points and weight. `omega0`
    /// is `g(pinned)/g(free)`.
    Ansatz { case: u8, witness: Vec<f64>, omega0: f64 },
    /// A two-dimensional threshold shifted by `cos(lπ/κ)`.
    DimShift { base: f64, l: u32 },
    /// The negative of an energy with the inner provenance.
    Negation { source: Box<Provenance> },
}

impl Provenance {
    /// Compact one-line label used in CSV output.
    pub fn label(&self) -> String {
        match self {
            Provenance::ZerothOrder { j } => format!(
                "zeroth({})",
                j.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
            ),
            Provenance::PingPong { variant, n } => format!("pingpong({variant} n={n})"),
            Provenance::Ansatz { case, .. } => format!("ansatz({case})"),
            Provenance::DimShift { base, l } => format!("shift({base} l={l})"),
            Provenance::Negation { source } => format!("neg({})", source.label()),
        }
    }

    /// Witness coordinates, when the source records them.
    pub fn witness(&self) -> Vec<f64> {
        match self {
            Provenance::Ansatz { witness, .. } => witness.clone(),
            Provenance::Negation { source } => source.witness().iter().map(|v| -v).collect(),
            _ => Vec::new(),
        }
    }

    fn negated(&self) -> Provenance {
        match self {
            Provenance::Negation { source } => (**source).clone(),
            other => Provenance::Negation {
                source: Box::new(other.clone()),
            },
        }
    }
}

/// One catalog energy with every provenance that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    #[serde(rename = "E")]
    pub e: f64,
    pub kappa: u32,
    pub dim: u32,
    pub provenance: Vec<Provenance>,
    /// Order of the construction that produced the energy. The energy is a
    /// member of the set of this order; smaller orders are not excluded.
    pub order_m: Option<usize>,
}

impl CatalogEntry {
    fn new(e: f64, kappa: u32, dim: u32, provenance: Provenance, order_m: Option<usize>) -> Self {
        Self {
            e,
            kappa,
            dim,
            provenance: vec![provenance],
            order_m,
        }
    }
}

/// A merged catalog and the non-fatal construction failures met on the way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
    pub diagnostics: Vec<String>,
}

impl Catalog {
    /// Entries immediately left and right of energy `e`.
    pub fn neighbors(&self, e: f64) -> (Option<&CatalogEntry>, Option<&CatalogEntry>) {
        let left = self.entries.iter().rev().find(|c| c.e < e - DEDUP_TOL);
        let right = self.entries.iter().find(|c| c.e > e + DEDUP_TOL);
        (left, right)
    }

    pub fn contains(&self, e: f64, tol: f64) -> bool {
        self.entries.iter().any(|c| (c.e - e).abs() <= tol)
    }
}

/// Single-linkage merge of energies within [`DEDUP_TOL`]. Clusters are
/// represented by the midpoint of their extreme members, so a set closed
/// under negation stays closed under negation.
pub fn merge_entries(mut raw: Vec<CatalogEntry>) -> Vec<CatalogEntry> {
    raw.sort_by(|a, b| a.e.total_cmp(&b.e));
    let mut out: Vec<CatalogEntry> = Vec::new();
    let mut cluster_lo = f64::NAN;
    let mut cluster_hi = f64::NAN;
    for entry in raw {
        match out.last_mut() {
            Some(last) if entry.e - cluster_hi <= DEDUP_TOL => {
                cluster_hi = entry.e;
                last.e = 0.5 * (cluster_lo + cluster_hi);
                for p in entry.provenance {
                    if !last.provenance.contains(&p) {
                        last.provenance.push(p);
                    }
                }
                last.order_m = match (last.order_m, entry.order_m) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
            }
            _ => {
                cluster_lo = entry.e;
                cluster_hi = entry.e;
                out.push(entry);
            }
        }
    }
    out
}

fn close_under_negation(entries: Vec<CatalogEntry>) -> Vec<CatalogEntry> {
    let mut all = entries.clone();
    all.extend(entries.into_iter().map(|c| CatalogEntry {
        e: -c.e,
        provenance: c.provenance.iter().map(Provenance::negated).collect(),
        ..c
    }));
    merge_entries(all)
}

fn tuples(kappa: u32, dim: u32) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|t| {
                let start = t.last().copied().unwrap_or(0);
                (start..=kappa).map(move |j| {
                    let mut t2 = t.clone();
                    t2.push(j);
                    t2
                })
            })
            .collect();
    }
    out
}

/// All sums `Σ_{q=1..dim} cos(j_q π/κ)`, deduplicated and sorted, each with
/// its witness index tuples.
pub fn zeroth_order(kappa: u32, dim: u32) -> Result<Vec<CatalogEntry>> {
    if kappa == 0 || !(2..=3).contains(&dim) {
        return Err(MourreError::InvalidInput(format!(
            "zeroth_order needs kappa >= 1 and dim in {{2, 3}}, got kappa={kappa}, dim={dim}"
        )));
    }
    let raw = tuples(kappa, dim)
        .into_iter()
        .map(|t| {
            let e: f64 = t.iter().map(|&j| extremum(kappa, j)).sum();
            CatalogEntry::new(e, kappa, dim, Provenance::ZerothOrder { j: t }, Some(0))
        })
        .collect();
    Ok(merge_entries(raw))
}

/// Roots of `h` on `[a, b]`: sign changes on a uniform grid refined by
/// bisection, kept when the refined residual is below [`ROOT_ACCEPT`].
/// `h` returns `None` where it is undefined.
pub fn scan_roots<F: Fn(f64) -> Option<f64>>(h: &F, a: f64, b: f64, grid: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..=grid).map(|i| a + (b - a) * i as f64 / grid as f64).collect();
    let vs: Vec<Option<f64>> = xs.iter().map(|&x| h(x)).collect();
    let mut out = Vec::new();
    for i in 0..grid {
        let (Some(v0), Some(v1)) = (vs[i], vs[i + 1]) else {
            continue;
        };
        if v0 == 0.0 {
            out.push(xs[i]);
            continue;
        }
        if v0 * v1 >= 0.0 {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (xs[i], xs[i + 1], v0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let Some(fm) = h(mid) else { break };
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let r = 0.5 * (lo + hi);
        if let Some(fr) = h(r) {
            if fr.abs() < ROOT_ACCEPT {
                out.push(r);
            }
        }
    }
    if let Some(Some(v)) = vs.last() {
        if *v == 0.0 {
            out.push(b);
        }
    }
    out
}

fn safe_t(kappa: u32, x: f64) -> Option<f64> {
    (x.abs() <= 1.0 + 1e-12).then(|| eval_t(kappa, x.clamp(-1.0, 1.0)))
}

fn in_domain_2d(e: f64, x: f64) -> bool {
    let (lo, hi) = x_range_2d(e);
    x >= lo - 1e-12 && x <= hi + 1e-12
}

/// The ratio `g_j(pinned)/g_j(free)` when it is the same negative number for
/// every `j ≤ RATIO_JMAX`. Indices where both values vanish are skipped.
fn common_negative_ratio<G: Fn(u32, bool) -> f64>(g: G) -> Option<f64> {
    let mut ratio: Option<f64> = None;
    for j in 1..=RATIO_JMAX {
        let pinned = g(j, true);
        let free = g(j, false);
        if pinned.abs() < G_ZERO && free.abs() < G_ZERO {
            if j == 1 {
                return None;
            }
            continue;
        }
        if free.abs() < G_ZERO || pinned.abs() < G_ZERO {
            return None;
        }
        let r = pinned / free;
        match ratio {
            None => ratio = Some(r),
            Some(r0) if (r - r0).abs() <= 1e-6 * r0.abs().max(1.0) => {}
            Some(_) => return None,
        }
    }
    ratio.filter(|r| *r < 0.0)
}

fn lattice_sums(kappa: u32, dim: u32) -> Vec<f64> {
    zeroth_order(kappa, dim)
        .map(|v| v.into_iter().map(|c| c.e).collect())
        .unwrap_or_default()
}

/// Energies of the first-order ansatz cases in `[0, 2]` whose weight
/// `ω_0 = g(Y_0)/g(Y_1)` is negative and independent of `j`. Energies that
/// are already zeroth-order sums are dropped.
pub fn first_order_ansatz(kappa: u32) -> Result<Vec<CatalogEntry>> {
    if kappa < 2 {
        return Err(MourreError::InvalidInput("kappa must be at least 2".into()));
    }
    let k = kappa;
    let zeroth = lattice_sums(k, 2);
    let roots: Vec<f64> = (1..k).map(|l| extremum(k, l)).collect();
    let branches: Vec<BranchIndex> = (0..k).map(|j| BranchIndex { kappa: k, j }).collect();
    let range = (0.0, 2.0);
    let mut found: Vec<CatalogEntry> = Vec::new();
    let mut add = |case: u8, e: f64, y0: f64, y1: f64| {
        if !(range.0 - 1e-12..=range.1 + 1e-12).contains(&e) {
            return;
        }
        if !in_domain_2d(e, y0) || !in_domain_2d(e, y1) {
            return;
        }
        if (y0 - y1).abs() < 1e-9 || (y0 - (e - y1)).abs() < 1e-9 {
            return;
        }
        if zeroth.iter().any(|z| (z - e).abs() <= DEDUP_TOL) {
            return;
        }
        let g = |j: u32, pinned: bool| {
            let x = if pinned { y0 } else { y1 };
            g2(j, k, &EnergyPoint2D { e, x })
        };
        if let Some(omega0) = common_negative_ratio(g) {
            found.push(CatalogEntry::new(
                e,
                k,
                2,
                Provenance::Ansatz {
                    case,
                    witness: vec![y0, y1],
                    omega0,
                },
                Some(1),
            ));
        }
    };

    type Pin = fn(f64) -> f64;
    let pins: [(u8, Pin); 3] = [(1, |e| e - 1.0), (2, |e| e + 1.0), (3, |e| e / 2.0)];
    for (case, pin) in pins {
        for &cl in &roots {
            let h = |e: f64| Some(safe_t(k, pin(e))? - safe_t(k, e - cl)?);
            for e in scan_roots(&h, range.0, range.1, ROOT_GRID) {
                add(case, e, pin(e), cl);
                add(case, e, pin(e), e - cl);
            }
        }
        for &b in &branches {
            let h = |e: f64| {
                let ta = safe_t(k, pin(e))?;
                let y1 = branch_inverse(b, ta).ok()?;
                Some(safe_t(k, e - y1)? - ta)
            };
            for e in scan_roots(&h, range.0, range.1, ROOT_GRID) {
                if let Some(ta) = safe_t(k, pin(e)) {
                    if let Ok(y1) = branch_inverse(b, ta) {
                        add(case, e, pin(e), y1);
                    }
                }
            }
        }
    }

    for &cl in &roots {
        let mut four = |e: f64, y0: f64| {
            add(4, e, y0, cl);
            add(5, e, y0, e - cl);
        };
        for &cm in &roots {
            let h = |e: f64| Some(safe_t(k, e - cm)? - safe_t(k, e - cl)?);
            for e in scan_roots(&h, range.0, range.1, ROOT_GRID) {
                four(e, cm);
                four(e, e - cm);
            }
        }
        for &b in &branches {
            let h = |e: f64| {
                let tb = safe_t(k, e - cl)?;
                let y0 = branch_inverse(b, tb).ok()?;
                Some(safe_t(k, e - y0)? - tb)
            };
            for e in scan_roots(&h, range.0, range.1, ROOT_GRID) {
                if let Some(tb) = safe_t(k, e - cl) {
                    if let Ok(y0) = branch_inverse(b, tb) {
                        four(e, y0);
                    }
                }
            }
        }
    }

    let pairs: Vec<(BranchIndex, BranchIndex)> = (0..k)
        .flat_map(|a| (a..k).map(move |b| (a, b)))
        .map(|(a, b)| (branches[a as usize], branches[b as usize]))
        .collect();
    let sum = |p: (BranchIndex, BranchIndex), t: f64| -> Option<f64> {
        Some(branch_inverse(p.0, t).ok()? + branch_inverse(p.1, t).ok()?)
    };
    for (i, &p) in pairs.iter().enumerate() {
        for &q in &pairs[i + 1..] {
            let h = |t: f64| Some(sum(p, t)? - sum(q, t)?);
            for t in scan_roots(&h, -1.0, 1.0, ROOT_GRID) {
                if let (Some(e), Ok(y0), Ok(y1)) = (sum(p, t), branch_inverse(p.0, t), branch_inverse(q.0, t)) {
                    add(6, e, y0, y1);
                }
            }
        }
    }
    Ok(merge_entries(found))
}

/// Energies where `X_0 = Y_0 = E/3` and the second point `(X_1, Y_1, Z_1)`
/// has all coordinates at the level `T_κ(E/3)`, with a negative weight
/// `ω_0 = g(E/3, E/3)/g(X_1, Y_1)` independent of `j`. Zeroth-order sums
/// are dropped.
pub fn ansatz_3d_symmetric(kappa: u32) -> Result<Vec<CatalogEntry>> {
    if kappa < 2 {
        return Err(MourreError::InvalidInput("kappa must be at least 2".into()));
    }
    let k = kappa;
    let zeroth = lattice_sums(k, 3);
    let mut found = Vec::new();
    for b1 in 0..k {
        for b2 in b1..k {
            let (br1, br2) = (BranchIndex { kappa: k, j: b1 }, BranchIndex { kappa: k, j: b2 });
            let point = |e: f64| -> Option<(f64, f64, f64)> {
                let t = safe_t(k, e / 3.0)?;
                Some((t, branch_inverse(br1, t).ok()?, branch_inverse(br2, t).ok()?))
            };
            let h = |e: f64| {
                let (t, x1, y1) = point(e)?;
                Some(safe_t(k, e - x1 - y1)? - t)
            };
            for e in scan_roots(&h, 0.0, 3.0, ROOT_GRID) {
                let Some((_, x1, y1)) = point(e) else { continue };
                if zeroth.iter().any(|z| (z - e).abs() <= DEDUP_TOL) {
                    continue;
                }
                let third = e / 3.0;
                let z1 = e - x1 - y1;
                if [x1, y1, z1].iter().all(|v| (v - third).abs() < 1e-9) {
                    continue;
                }
                let (Ok(p0), Ok(p1)) = (
                    EnergyPoint3D::new(e, third, third),
                    EnergyPoint3D::new(e, x1, y1),
                ) else {
                    continue;
                };
                let g = |j: u32, pinned: bool| g3(j, k, if pinned { &p0 } else { &p1 });
                if let Some(omega0) = common_negative_ratio(g) {
                    found.push(CatalogEntry::new(
                        e,
                        k,
                        3,
                        Provenance::Ansatz {
                            case: 7,
                            witness: vec![third, third, p1.x, p1.y],
                            omega0,
                        },
                        Some(1),
                    ));
                }
            }
        }
    }
    Ok(merge_entries(found))
}

/// Every two-dimensional entry shifted by each `cos(lπ/κ)`, `l = 0..=κ`.
pub fn shift_to_dim3(entries: &[CatalogEntry], kappa: u32) -> Result<Vec<CatalogEntry>> {
    if let Some(bad) = entries.iter().find(|c| c.dim != 2 || c.kappa != kappa) {
        return Err(MourreError::InvalidInput(format!(
            "shift_to_dim3 expects kappa={kappa}, dim=2 entries; got E={} with dim={}",
            bad.e, bad.dim
        )));
    }
    Ok(entries
        .iter()
        .flat_map(|c| {
            (0..=kappa).map(move |l| {
                CatalogEntry::new(
                    c.e + extremum(kappa, l),
                    kappa,
                    3,
                    Provenance::DimShift { base: c.e, l },
                    c.order_m,
                )
            })
        })
        .collect())
}

fn pingpong_variants(kappa: u32) -> Vec<Variant> {
    let mut v = vec![Variant::J2Decreasing, Variant::FIncreasing];
    if kappa >= 3 {
        v.push(Variant::GVariant);
    }
    for j in 2..=kappa / 2 {
        v.push(Variant::WellDecreasing(j));
        v.push(Variant::WellIncreasing(j));
    }
    v
}

fn pingpong_entries(kappa: u32, n_max: usize, diagnostics: &mut Vec<String>) -> Result<Vec<CatalogEntry>> {
    let jobs: Vec<(Variant, usize)> = pingpong_variants(kappa)
        .into_iter()
        .flat_map(|v| (1..=n_max).map(move |n| (v, n)))
        .collect();
    let results: Vec<(Variant, usize, Result<CatalogEntry>)> = jobs
        .par_iter()
        .map(|&(variant, n)| {
            let r = PingPongProblem::new(kappa, n, variant)
                .and_then(|p| solve(&p, 1e-13))
                .and_then(|s| {
                    let rel = verify_linear_relation(&s, 8);
                    if rel > 1e-8 {
                        return Err(MourreError::PrecisionExhausted {
                            kappa,
                            n,
                            detail: format!("linear relation residual {rel:e}"),
                        });
                    }
                    Ok(CatalogEntry::new(
                        s.e,
                        kappa,
                        2,
                        Provenance::PingPong { variant, n },
                        Some(s.order_m),
                    ))
                });
            (variant, n, r)
        })
        .collect();
    let mut out = Vec::new();
    for (variant, n, r) in results {
        match r {
            Ok(c) => out.push(c),
            Err(e @ MourreError::InvalidInput(_)) => return Err(e),
            Err(e) => diagnostics.push(format!("{variant} n={n}: {e}")),
        }
    }
    Ok(out)
}

/// The merged catalog for `(κ, dim)` with ping-pong depths up to `n_max`.
/// Ping-pong depths that fail to construct or exhaust precision are skipped
/// and listed in the diagnostics.
pub fn build_catalog(kappa: u32, dim: u32, n_max: usize) -> Result<Catalog> {
    if kappa < 2 || !(2..=3).contains(&dim) {
        return Err(MourreError::InvalidInput(format!(
            "build_catalog needs kappa >= 2 and dim in {{2, 3}}, got kappa={kappa}, dim={dim}"
        )));
    }
    let mut diagnostics = Vec::new();
    let mut two_d = zeroth_order(kappa, 2)?;
    two_d.extend(first_order_ansatz(kappa)?);
    two_d.extend(pingpong_entries(kappa, n_max, &mut diagnostics)?);
    let two_d = close_under_negation(two_d);
    let entries = if dim == 2 {
        two_d
    } else {
        let mut three = zeroth_order(kappa, 3)?;
        three.extend(shift_to_dim3(&two_d, kappa)?);
        three.extend(ansatz_3d_symmetric(kappa)?);
        close_under_negation(three)
    };
    Ok(Catalog { entries, diagnostics })
}

/// Zeroth-order energies recovered by solving `g_{jκ}^E(Y) = 0` for every
/// `j ≤ 6`. A term vanishes when `m` or `U_{κ-1}` vanishes at a point, that
/// is at the extrema `cos(lπ/κ)`, so the degenerate solutions pair two
/// extrema. The remaining solutions have `Y` and `E - Y` at a common level
/// of `T_κ` and come from [`common_level_zeroth_order`]. Sorted and
/// deduplicated.
pub fn solved_zeroth_order(kappa: u32) -> Result<Vec<f64>> {
    let mut energies = common_level_zeroth_order(kappa)?;
    let extrema = t_extrema(kappa);
    for &a in &extrema {
        for &b in &extrema {
            let e = a + b;
            if (1..=RATIO_JMAX).all(|j| g2(j, kappa, &EnergyPoint2D { e, x: a }).abs() < 1e-9) {
                energies.push(e);
            }
        }
    }
    energies.sort_by(f64::total_cmp);
    energies.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
    Ok(energies)
}

/// Energies where `Y` and `E - Y` lie on a common level of `T_κ`, found per
/// pair of branches, and `g_{jκ}^E(Y)` vanishes for every `j ≤ 6`. Sorted
/// and deduplicated.
pub fn common_level_zeroth_order(kappa: u32) -> Result<Vec<f64>> {
    if kappa < 2 {
        return Err(MourreError::InvalidInput("kappa must be at least 2".into()));
    }
    let k = kappa;
    let branches: Vec<BranchIndex> = (0..k).map(|j| BranchIndex { kappa: k, j }).collect();
    let mut energies = Vec::new();
    let vanishes = |e: f64, y: f64| {
        (1..=RATIO_JMAX).all(|j| g2(j, k, &EnergyPoint2D { e, x: y }).abs() < 1e-9)
    };
    for &a in &branches {
        for &b in &branches {
            let at = |t: f64| -> Option<(f64, f64)> {
                let y = branch_inverse(a, t).ok()?;
                Some((y + branch_inverse(b, t).ok()?, y))
            };
            let h = |t: f64| {
                let (e, y) = at(t)?;
                Some(g2(1, k, &EnergyPoint2D { e, x: y }))
            };
            let mut ts = scan_roots(&h, -1.0, 1.0, 2000);
            ts.push(-1.0);
            ts.push(1.0);
            for t in ts {
                if let Some((e, y)) = at(t) {
                    if vanishes(e, y) {
                        energies.push(e);
                    }
                }
            }
        }
    }
    energies.sort_by(f64::total_cmp);
    energies.dedup_by(|a, b| (*a - *b).abs() <= DEDUP_TOL);
    Ok(energies)
}

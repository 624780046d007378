//! Cells, grid discretization, the crossing decision for a single cell,
//! the full-region sweep, subdivision refinement, and normal-flow point
//! refinement.
//!
//! A cell is half-open on all its upper faces, so the cells of a
//! discretization tile the region without overlap.

use rayon::prelude::*;
use std::fmt;
use thiserror::Error;

use crate::bounds::{
    b1_from, b2_from, b2_prime_from, definitely_greater, grad_row_norm1, hessian_point_norm_from,
    hessian_sup_norm_from, jac_pinv_sup_from, pinv_inf_norm, radius_cap_exact,
    radius_cap_first_order, BoundContext, BoundError, CertMode, RADIUS_CAP_FRACTION,
};
use crate::poly::{MultiPoly, PolyError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CrossError {
    #[error("constant polynomial has no crossing verdict")]
    ConstantPolynomial,
    #[error("region is empty along axis {0}")]
    EmptyRegion(usize),
    #[error("step must be positive along axis {0}")]
    NonPositiveStep(usize),
    #[error("gradient vanishes at the starting point")]
    ZeroGradientEncountered,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Bounds(#[from] BoundError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Axis-aligned cell: `x in cell iff c_k - eps_k <= x_k < c_k + eps_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub center: Vec<f64>,
    pub eps: Vec<f64>,
}

impl Cell {
    pub fn new(center: Vec<f64>, eps: Vec<f64>) -> Self {
        assert_eq!(center.len(), eps.len());
        Cell { center, eps }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Half-open membership test (upper faces excluded).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self
                .center
                .iter()
                .zip(&self.eps)
                .zip(x)
                .all(|((&c, &e), &xi)| c - e <= xi && xi < c + e)
    }

    /// The 2^n half-cells tiling this cell.
    pub fn split(&self) -> Vec<Cell> {
        let n = self.dim();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let mut center = self.center.clone();
            let mut eps = self.eps.clone();
            for k in 0..n {
                eps[k] = 0.5 * self.eps[k];
                center[k] += if mask >> k & 1 == 1 { eps[k] } else { -eps[k] };
            }
            out.push(Cell::new(center, eps));
        }
        out
    }
}

/// Uniform grid covering a product of intervals: counts
/// `J_k = ceil((b_k - a_k - d_k/2) / d_k) + 1` and centers `a_k + j d_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    lo: Vec<f64>,
    hi: Vec<f64>,
    step: Vec<f64>,
    counts: Vec<usize>,
}

/// Build the grid for `region` with sampling step `d` per axis.
pub fn discretize(region: &[(f64, f64)], step: &[f64]) -> Result<Discretization, CrossError> {
    if region.len() != step.len() {
        return Err(CrossError::DimensionMismatch {
            expected: region.len(),
            got: step.len(),
        });
    }
    let mut counts = Vec::with_capacity(region.len());
    for (k, (&(a, b), &d)) in region.iter().zip(step).enumerate() {
        if !(b > a) {
            return Err(CrossError::EmptyRegion(k));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(CrossError::NonPositiveStep(k));
        }
        let j = ((b - a - d / 2.0) / d).ceil().max(0.0) as usize + 1;
        counts.push(j);
    }
    Ok(Discretization {
        lo: region.iter().map(|r| r.0).collect(),
        hi: region.iter().map(|r| r.1).collect(),
        step: step.to_vec(),
        counts,
    })
}

impl Discretization {
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn region(&self) -> Vec<(f64, f64)> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| (a, b))
            .collect()
    }

    pub fn step(&self) -> &[f64] {
        &self.step
    }

    pub fn num_cells(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &j)| self.lo[k] + j as f64 * self.step[k])
            .collect()
    }

    /// The cell at a multi-index; its tolerance vector is `d/2`.
    pub fn cell(&self, idx: &[usize]) -> Cell {
        Cell::new(
            self.center(idx),
            self.step.iter().map(|&d| d / 2.0).collect(),
        )
    }

    /// Row-major flattening; the last index varies fastest.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        for (k, &j) in idx.iter().enumerate() {
            debug_assert!(j < self.counts[k]);
            flat = flat * self.counts[k] + j;
        }
        flat
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.counts[k];
            flat /= self.counts[k];
        }
        idx
    }

    /// Multi-index of the unique grid cell containing `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<Vec<usize>> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let j = ((x[k] - self.lo[k]) / self.step[k] + 0.5).floor();
            if j < 0.0 || j as usize >= self.counts[k] {
                return None;
            }
            // resolve the half-open faces exactly
            let mut j = j as usize;
            let c = self.lo[k] + j as f64 * self.step[k];
            let e = self.step[k] / 2.0;
            if x[k] >= c + e {
                j += 1;
            } else if x[k] < c - e {
                if j == 0 {
                    return None;
                }
                j -= 1;
            }
            if j >= self.counts[k] {
                return None;
            }
            let c = self.lo[k] + j as f64 * self.step[k];
            if !(c - e <= x[k] && x[k] < c + e) {
                return None;
            }
            idx.push(j);
        }
        Some(idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The hypersurface certifiably does not cross the cell.
    No,
    /// The hypersurface certifiably crosses the cell.
    Yes,
    /// Neither certificate fired.
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::No => write!(f, "0"),
            Verdict::Yes => write!(f, "1"),
            Verdict::Unknown => write!(f, "Z"),
        }
    }
}

/// Per-cell verdict with the quantities that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub verdict: Verdict,
    pub abs_f: f64,
    pub b1: f64,
    pub b2: Option<f64>,
    pub radius: Option<f64>,
    pub note: Option<String>,
}

/// How the normal-flow radius is chosen during a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusPolicy {
    /// Per-cell `0.99 * cap` via the feasibility analysis.
    Auto,
    /// Fixed user radius; cells where it is infeasible skip the crossing
    /// certificate.
    Fixed(f64),
}

impl RadiusPolicy {
    fn as_override(&self) -> Option<f64> {
        match self {
            RadiusPolicy::Auto => None,
            RadiusPolicy::Fixed(r) => Some(*r),
        }
    }
}

/// Reusable per-polynomial state (gradient and Hessian) for cell checks.
pub struct CrossingChecker {
    f: MultiPoly,
    grad: Vec<MultiPoly>,
    hess: Vec<Vec<MultiPoly>>,
    degree: i64,
}

impl CrossingChecker {
    pub fn new(f: &MultiPoly) -> Result<Self, CrossError> {
        if f.degree() <= 0 {
            return Err(CrossError::ConstantPolynomial);
        }
        Ok(CrossingChecker {
            f: f.clone(),
            grad: f.gradient(),
            hess: f.hessian(),
            degree: f.degree(),
        })
    }

    fn grad_at(&self, x: &[f64]) -> Vec<f64> {
        self.grad
            .iter()
            .map(|g| g.eval(x).expect("dimension checked"))
            .collect()
    }

    /// One run of the crossing-cell decision.
    pub fn verdict(&self, cell: &Cell, mode: CertMode, r_override: Option<f64>) -> CellReport {
        let ctx = match BoundContext::new(&self.f, &cell.center, &cell.eps) {
            Ok(ctx) => ctx,
            Err(e) => {
                return CellReport {
                    verdict: Verdict::Unknown,
                    abs_f: f64::NAN,
                    b1: f64::NAN,
                    b2: None,
                    radius: None,
                    note: Some(format!("invalid cell: {e}")),
                }
            }
        };
        let p = &cell.center;
        let abs_f = self.f.eval(p).expect("dimension checked").abs();
        let grad_p = self.grad_at(p);

        // h is the quantity entering both bounds: box supremum in exact
        // mode, point value in first-order mode.
        let hp = hessian_point_norm_from(&self.hess, p);
        let h = match mode {
            CertMode::Exact => hessian_sup_norm_from(&self.hess, p, &cell.eps),
            CertMode::FirstOrder => hp,
        };

        let b1 = b1_from(&ctx, &grad_p, h);
        if definitely_greater(abs_f, b1) {
            return CellReport {
                verdict: Verdict::No,
                abs_f,
                b1,
                b2: None,
                radius: None,
                note: None,
            };
        }

        let mut note = None;
        let crossing_bound = (|| -> Option<(f64, f64)> {
            if grad_row_norm1(&grad_p) == 0.0 {
                note = Some("gradient vanishes at the center".to_string());
                return None;
            }
            if mode == CertMode::FirstOrder && self.degree >= 2 && hp == 0.0 {
                note = Some("Hessian vanishes at the center".to_string());
                return None;
            }
            let cap = match mode {
                CertMode::Exact => radius_cap_exact(&ctx, &grad_p, h),
                CertMode::FirstOrder => {
                    if self.degree >= 2 {
                        radius_cap_first_order(&ctx, &grad_p, hp)
                    } else {
                        ctx.eps_min
                    }
                }
            };
            let radius = r_override.unwrap_or(RADIUS_CAP_FRACTION * cap);
            if !(radius > 0.0) || radius >= cap {
                note = Some(format!("radius {radius} infeasible (cap {cap})"));
                return None;
            }
            let b2 = if self.degree <= 1 {
                // gradient is constant: J is the point pseudo-inverse norm
                radius / pinv_inf_norm(&grad_p)
            } else {
                match mode {
                    CertMode::Exact => match jac_pinv_sup_from(&self.grad, &self.hess, p, radius) {
                        Ok(j) => b2_from(&ctx, h, j, radius),
                        Err(e) => {
                            note = Some(e.to_string());
                            return None;
                        }
                    },
                    CertMode::FirstOrder => {
                        let nf = ctx.n as f64;
                        let th = pinv_inf_norm(&grad_p)
                            + nf * nf * (1.0 + 2.0 * nf.sqrt()) * hp
                                / grad_row_norm1(&grad_p).powi(2)
                                * radius;
                        b2_prime_from(&ctx, hp, th, radius)
                    }
                }
            };
            Some((b2, radius))
        })();

        match crossing_bound {
            Some((b2, radius)) if definitely_greater(b2, abs_f) => CellReport {
                verdict: Verdict::Yes,
                abs_f,
                b1,
                b2: Some(b2),
                radius: Some(radius),
                note,
            },
            Some((b2, radius)) => CellReport {
                verdict: Verdict::Unknown,
                abs_f,
                b1,
                b2: Some(b2),
                radius: Some(radius),
                note,
            },
            None => CellReport {
                verdict: Verdict::Unknown,
                abs_f,
                b1,
                b2: None,
                radius: None,
                note,
            },
        }
    }

    /// Crossing decision with recursive subdivision of inconclusive cells.
    /// A definite verdict at any level is final; an Unknown cell is split
    /// into its 2^n half-cells until the depth budget runs out.
    pub fn refine(&self, cell: &Cell, depth: u32, mode: CertMode) -> CellReport {
        let mut report = self.verdict(cell, mode, None);
        if report.verdict != Verdict::Unknown || depth == 0 {
            return report;
        }
        let mut all_no = true;
        let mut any_yes = false;
        for sub in cell.split() {
            let r = self.refine(&sub, depth - 1, mode);
            match r.verdict {
                Verdict::Yes => {
                    any_yes = true;
                    break;
                }
                Verdict::No => {}
                Verdict::Unknown => all_no = false,
            }
        }
        if any_yes {
            report.verdict = Verdict::Yes;
            report.note = Some(format!("resolved by subdivision (depth {depth})"));
        } else if all_no {
            report.verdict = Verdict::No;
            report.note = Some(format!("resolved by subdivision (depth {depth})"));
        }
        report
    }
}

/// Decide whether `f = 0` crosses a single cell.
pub fn crossing_cell(
    f: &MultiPoly,
    cell: &Cell,
    mode: CertMode,
    r_override: Option<f64>,
) -> Result<CellReport, CrossError> {
    if cell.dim() != f.num_vars() {
        return Err(CrossError::DimensionMismatch {
            expected: f.num_vars(),
            got: cell.dim(),
        });
    }
    Ok(CrossingChecker::new(f)?.verdict(cell, mode, r_override))
}

/// Crossing decision for an inconclusive cell refined by subdivision.
pub fn subdivide_refine(
    f: &MultiPoly,
    cell: &Cell,
    depth: u32,
    mode: CertMode,
) -> Result<CellReport, CrossError> {
    Ok(CrossingChecker::new(f)?.refine(cell, depth, mode))
}

/// Verdicts of every cell of a discretization, row-major.
#[derive(Debug, Clone)]
pub struct VerdictGrid {
    pub disc: Discretization,
    pub cells: Vec<CellReport>,
}

impl VerdictGrid {
    pub fn get(&self, idx: &[usize]) -> &CellReport {
        &self.cells[self.disc.flat_index(idx)]
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.cells.iter().filter(|c| c.verdict == v).count()
    }
}

/// Run the crossing decision on every cell of the grid. Cells are
/// processed independently (and concurrently); the result is assembled
/// by index, so the outcome does not depend on scheduling.
pub fn crossing_area(
    f: &MultiPoly,
    disc: &Discretization,
    mode: CertMode,
    r_policy: RadiusPolicy,
) -> Result<VerdictGrid, CrossError> {
    crossing_area_refined(f, disc, mode, r_policy, 0)
}

/// Like [`crossing_area`], refining inconclusive cells by subdivision up
/// to `depth` levels. A fixed-radius policy applies to the top-level cell
/// check only; subdivision always re-derives per-cell radii.
pub fn crossing_area_refined(
    f: &MultiPoly,
    disc: &Discretization,
    mode: CertMode,
    r_policy: RadiusPolicy,
    depth: u32,
) -> Result<VerdictGrid, CrossError> {
    if disc.dim() != f.num_vars() {
        return Err(CrossError::DimensionMismatch {
            expected: f.num_vars(),
            got: disc.dim(),
        });
    }
    let checker = CrossingChecker::new(f)?;
    let cells: Vec<CellReport> = (0..disc.num_cells())
        .into_par_iter()
        .map(|flat| {
            let cell = disc.cell(&disc.multi_index(flat));
            let report = checker.verdict(&cell, mode, r_policy.as_override());
            if report.verdict == Verdict::Unknown && depth > 0 {
                let refined = checker.refine(&cell, depth, mode);
                if refined.verdict != Verdict::Unknown {
                    return refined;
                }
                report
            } else {
                report
            }
        })
        .collect();
    Ok(VerdictGrid {
        disc: disc.clone(),
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowStatus {
    Converged,
    NonConverged,
    ExitedDisk,
    ZeroGradient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowStep {
    /// `|f(p_k)|` at this iterate.
    pub abs_f: f64,
    /// Infinity norm of the step taken from this iterate (0 for the last).
    pub step_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub point: Vec<f64>,
    pub status: FlowStatus,
    pub trace: Vec<FlowStep>,
}

/// Normal-flow iteration `p_{k+1} = p_k - pinv(Jac_f)(p_k) f(p_k)`.
///
/// Stops when `|f| <= tol`, when the iterate leaves the open disk of
/// radius `radius` around the start (flagged `ExitedDisk`), when the
/// gradient vanishes mid-run (`ZeroGradient`), or after `max_iter` steps
/// (`NonConverged`). A zero gradient at the starting point is an error.
pub fn normal_flow(
    f: &MultiPoly,
    p: &[f64],
    radius: f64,
    tol: f64,
    max_iter: u32,
) -> Result<FlowResult, CrossError> {
    if p.len() != f.num_vars() {
        return Err(CrossError::DimensionMismatch {
            expected: f.num_vars(),
            got: p.len(),
        });
    }
    let grad = f.gradient();
    let mut x = p.to_vec();
    let mut trace = Vec::new();
    for _ in 0..max_iter {
        let fx = f.eval(&x)?;
        if fx.abs() <= tol {
            trace.push(FlowStep {
                abs_f: fx.abs(),
                step_inf: 0.0,
            });
            return Ok(FlowResult {
                point: x,
                status: FlowStatus::Converged,
                trace,
            });
        }
        let g: Vec<f64> = grad.iter().map(|gi| gi.eval(&x).unwrap()).collect();
        let gsq: f64 = g.iter().map(|v| v * v).sum();
        if gsq == 0.0 {
            if trace.is_empty() {
                return Err(CrossError::ZeroGradientEncountered);
            }
            trace.push(FlowStep {
                abs_f: fx.abs(),
                step_inf: 0.0,
            });
            return Ok(FlowResult {
                point: x,
                status: FlowStatus::ZeroGradient,
                trace,
            });
        }
        let scale = -fx / gsq;
        let mut step_inf = 0.0f64;
        for (xi, gi) in x.iter_mut().zip(&g) {
            let s = gi * scale;
            step_inf = step_inf.max(s.abs());
            *xi += s;
        }
        trace.push(FlowStep {
            abs_f: fx.abs(),
            step_inf,
        });
        let dist = x
            .iter()
            .zip(p)
            .fold(0.0f64, |acc, (xi, pi)| acc.max((xi - pi).abs()));
        if dist >= radius {
            return Ok(FlowResult {
                point: x,
                status: FlowStatus::ExitedDisk,
                trace,
            });
        }
    }
    Ok(FlowResult {
        point: x,
        status: FlowStatus::NonConverged,
        trace,
    })
}

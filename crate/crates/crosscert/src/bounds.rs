//! Region quantities H, J, Θ and the crossing bounds B1, B1', B2, B2'.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * `grad_row_norm1` is the induced 1-norm of the gradient as a 1-by-n
//!   row, i.e. the largest entry magnitude. It appears in the radius caps
//!   and in Θ.
//! * `grad_col_norm1` is the 1-norm of the transposed gradient (an n-by-1
//!   column), i.e. the entry-magnitude sum. It appears in B1 and B1'.
//!
//! H and J are suprema over boxes; they are computed here as certified
//! upper bounds (interval extension, plus branch-and-bound tightening for
//! J). Overestimating H enlarges B1 and shrinks B2, and overestimating J
//! shrinks B2, so both certificates stay sound under overestimation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::interval::{centered_box, eval_poly_interval, Interval};
use crate::poly::MultiPoly;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BoundError {
    #[error("constant polynomial has no crossing bounds")]
    ConstantPolynomial,
    #[error("operation requires degree <= 2")]
    DegreeTooHigh,
    #[error("operation requires degree >= 2")]
    DegreeTooLow,
    #[error("gradient vanishes at the evaluation point")]
    ZeroGradient,
    #[error("Hessian vanishes at the evaluation point")]
    ZeroHessian,
    #[error("could not certify a positive gradient lower bound on the disk")]
    GradientMayVanish,
    #[error("radius {radius} is not strictly below its cap {cap}")]
    RadiusInfeasible { radius: f64, cap: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tolerance vector must be componentwise positive")]
    NonPositiveTolerance,
}

/// Relative guard band for every `|f(p)|` versus bound comparison.
/// Comparisons inside the band are treated as inconclusive.
pub const GUARD_REL: f64 = 1e-12;

/// `a > b` by more than the relative guard band.
pub fn definitely_greater(a: f64, b: f64) -> bool {
    a > b && a - b > GUARD_REL * a.abs().max(b.abs())
}

/// Fraction of the radius cap used when no explicit radius is given;
/// the cap itself is excluded by the strict feasibility inequality.
pub const RADIUS_CAP_FRACTION: f64 = 0.99;

/// Row 1-norm of a gradient (largest entry magnitude).
pub fn grad_row_norm1(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// Column 1-norm of the transposed gradient (entry-magnitude sum).
pub fn grad_col_norm1(g: &[f64]) -> f64 {
    g.iter().map(|x| x.abs()).sum()
}

/// Infinity norm of the pseudo-inverse of a nonzero gradient row.
pub fn pinv_inf_norm(g: &[f64]) -> f64 {
    let sq: f64 = g.iter().map(|x| x * x).sum();
    grad_row_norm1(g) / sq
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertMode {
    /// Bounds B1/B2 built from the box suprema H and J.
    Exact,
    /// Bounds B1'/B2' built from point evaluations and Θ.
    FirstOrder,
}

/// Shared inputs of the bound computations for one polynomial and cell.
#[derive(Debug, Clone)]
pub struct BoundContext<'a> {
    pub f: &'a MultiPoly,
    pub p: Vec<f64>,
    pub eps: Vec<f64>,
    pub eps_min: f64,
    pub eps_max: f64,
    pub n: usize,
    /// `c = max(2, sqrt(n))`.
    pub c: f64,
}

impl<'a> BoundContext<'a> {
    pub fn new(f: &'a MultiPoly, p: &[f64], eps: &[f64]) -> Result<Self, BoundError> {
        let n = f.num_vars();
        if p.len() != n {
            return Err(BoundError::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        if eps.len() != n {
            return Err(BoundError::DimensionMismatch {
                expected: n,
                got: eps.len(),
            });
        }
        if eps.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(BoundError::NonPositiveTolerance);
        }
        let eps_min = eps.iter().cloned().fold(f64::INFINITY, f64::min);
        let eps_max = eps.iter().cloned().fold(0.0f64, f64::max);
        let nf = n as f64;
        Ok(BoundContext {
            f,
            p: p.to_vec(),
            eps: eps.to_vec(),
            eps_min,
            eps_max,
            n,
            c: nf.sqrt().max(2.0),
        })
    }

    pub fn grad_at_p(&self) -> Vec<f64> {
        self.f
            .gradient()
            .iter()
            .map(|g| g.eval(&self.p).expect("dimension checked"))
            .collect()
    }
}

fn entry_mag_upper(entry: &MultiPoly, cube: &[Interval]) -> f64 {
    if entry.degree() <= 0 {
        entry.coeff(&vec![0; entry.num_vars()]).abs()
    } else {
        eval_poly_interval(entry, cube).mag_upper()
    }
}

pub(crate) fn hessian_sup_norm_from(hess: &[Vec<MultiPoly>], p: &[f64], eps: &[f64]) -> f64 {
    let cube = centered_box(p, eps);
    let mut best = 0.0f64;
    for row in hess {
        let mut s = 0.0;
        for entry in row {
            s += entry_mag_upper(entry, &cube);
        }
        best = best.max(s);
    }
    best
}

/// Upper bound on `H = max_{x in B(p)} ||H_f(x)||_inf` over the box
/// `[p - eps, p + eps]`. Sharp (up to rounding) whenever every Hessian
/// entry is a monomial or a constant.
pub fn hessian_sup_norm(f: &MultiPoly, p: &[f64], eps: &[f64]) -> f64 {
    hessian_sup_norm_from(&f.hessian(), p, eps)
}

/// Infinity norm of the Hessian evaluated at the point itself.
pub fn hessian_point_norm(f: &MultiPoly, p: &[f64]) -> f64 {
    hessian_point_norm_from(&f.hessian(), p)
}

pub(crate) fn hessian_point_norm_from(hess: &[Vec<MultiPoly>], p: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for row in hess {
        let mut s = 0.0;
        for entry in row {
            s += entry.eval(p).expect("dimension checked").abs();
        }
        best = best.max(s);
    }
    best
}

/// Closed-form H for polynomials of degree at most 2: independent of the
/// point and the tolerance, `max_i (2|c_ii| + sum_{j != i} |c_ij|)` over
/// the quadratic coefficients.
pub fn hessian_sup_norm_quadratic(f: &MultiPoly) -> Result<f64, BoundError> {
    if f.degree() > 2 {
        return Err(BoundError::DegreeTooHigh);
    }
    let n = f.num_vars();
    let coeff_xx = |i: usize, j: usize| -> f64 {
        let mut e = vec![0u32; n];
        if i == j {
            e[i] = 2;
        } else {
            e[i] = 1;
            e[j] = 1;
        }
        f.coeff(&e)
    };
    let mut best = 0.0f64;
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if j == i {
                s += (2.0 * coeff_xx(i, i)).abs();
            } else {
                s += coeff_xx(i, j).abs();
            }
        }
        best = best.max(s);
    }
    Ok(best)
}

/// Radius cap of the exact-mode crossing condition, without the 0.99 factor.
pub(crate) fn radius_cap_exact(ctx: &BoundContext, grad_p: &[f64], h: f64) -> f64 {
    if ctx.f.degree() <= 1 || h == 0.0 {
        ctx.eps_min
    } else {
        ctx.eps_min.min(grad_row_norm1(grad_p) / h)
    }
}

pub(crate) fn radius_cap_first_order(
    ctx: &BoundContext,
    grad_p: &[f64],
    hessian_p_norm: f64,
) -> f64 {
    if ctx.f.degree() <= 1 {
        ctx.eps_min
    } else {
        let nf = ctx.n as f64;
        ctx.eps_min
            .min(grad_row_norm1(grad_p) / (nf * nf * hessian_p_norm))
    }
}

/// Largest admissible normal-flow radius times [`RADIUS_CAP_FRACTION`].
///
/// In exact mode the cap is `min(eps_min, ||Jac(p)||_1 / H)`; in
/// first-order mode `min(eps_min, ||Jac(p)||_1 / (n^2 ||H_f(p)||_inf))`.
/// Linear polynomials are capped by `eps_min` alone.
pub fn feasible_radius(ctx: &BoundContext, h: f64, mode: CertMode) -> Result<f64, BoundError> {
    if ctx.f.degree() <= 0 {
        return Err(BoundError::ConstantPolynomial);
    }
    let grad_p = ctx.grad_at_p();
    if grad_row_norm1(&grad_p) == 0.0 {
        return Err(BoundError::ZeroGradient);
    }
    let cap = match mode {
        CertMode::Exact => radius_cap_exact(ctx, &grad_p, h),
        CertMode::FirstOrder => {
            if ctx.f.degree() >= 2 {
                let hp = hessian_point_norm(ctx.f, &ctx.p);
                if hp == 0.0 {
                    return Err(BoundError::ZeroHessian);
                }
                radius_cap_first_order(ctx, &grad_p, hp)
            } else {
                ctx.eps_min
            }
        }
    };
    Ok(RADIUS_CAP_FRACTION * cap)
}

const BB_GAP_REL: f64 = 0.01;
const BB_MAX_SPLITS: usize = 2000;

struct BbNode {
    upper: f64,
    seq: usize,
    cube: Vec<Interval>,
}

impl PartialEq for BbNode {
    fn eq(&self, other: &Self) -> bool {
        self.upper == other.upper && self.seq == other.seq
    }
}
impl Eq for BbNode {}
impl PartialOrd for BbNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for BbNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .total_cmp(&other.upper)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn pinv_upper_on_box(grad: &[MultiPoly], cube: &[Interval], den_floor: f64) -> f64 {
    let mut num_up = 0.0f64;
    let mut den = Interval::point(0.0);
    for g in grad {
        let gi = eval_poly_interval(g, cube);
        num_up = num_up.max(gi.mag_upper());
        den = den.add(gi.sq());
    }
    let den_lo = den.lo.max(den_floor);
    if den_lo > 0.0 {
        num_up / den_lo
    } else {
        f64::INFINITY
    }
}

fn pinv_point_value(grad: &[MultiPoly], x: &[f64]) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for g in grad {
        let v = g.eval(x).expect("dimension checked");
        num = num.max(v.abs());
        den += v * v;
    }
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

pub(crate) fn jac_pinv_sup_from(
    grad: &[MultiPoly],
    hess: &[Vec<MultiPoly>],
    p: &[f64],
    radius: f64,
) -> Result<f64, BoundError> {
    let root: Vec<Interval> = p
        .iter()
        .map(|&c| Interval::new(c - radius, c + radius))
        .collect();

    // Certified positive floor for ||grad||_2^2 over the whole disk, used
    // when the interval lower bound on a sub-box degenerates. From the
    // mean-value bound, the largest gradient entry decreases by at most
    // H * R from the center.
    let mut den_floor = 0.0f64;
    let grad_p: Vec<f64> = grad
        .iter()
        .map(|g| g.eval(p).expect("dimension checked"))
        .collect();
    let h_disk = hessian_sup_norm_from(hess, p, &vec![radius; p.len()]);
    let m0 = grad_row_norm1(&grad_p) - h_disk * radius;
    if m0 > 0.0 {
        den_floor = m0 * m0 / p.len() as f64;
    }

    let mut best_lower = pinv_point_value(grad, p);
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let root_upper = pinv_upper_on_box(grad, &root, den_floor);
    heap.push(BbNode {
        upper: root_upper,
        seq,
        cube: root,
    });

    for _ in 0..BB_MAX_SPLITS {
        let node = match heap.pop() {
            Some(n) => n,
            None => break,
        };
        if node.upper.is_finite()
            && best_lower.is_finite()
            && node.upper <= best_lower * (1.0 + BB_GAP_REL)
        {
            return Ok(node.upper);
        }
        // split along the widest axis
        let (axis, _) = node
            .cube
            .iter()
            .enumerate()
            .map(|(i, iv)| (i, iv.hi - iv.lo))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let mid = 0.5 * (node.cube[axis].lo + node.cube[axis].hi);
        for half in 0..2 {
            let mut cube = node.cube.clone();
            if half == 0 {
                cube[axis] = Interval::new(cube[axis].lo, mid);
            } else {
                cube[axis] = Interval::new(mid, cube[axis].hi);
            }
            let center: Vec<f64> = cube.iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect();
            let lower = pinv_point_value(grad, &center);
            if lower.is_finite() && lower > best_lower {
                best_lower = lower;
            }
            seq += 1;
            let upper = pinv_upper_on_box(grad, &cube, den_floor);
            heap.push(BbNode { upper, seq, cube });
        }
    }

    let result = heap.peek().map(|n| n.upper).unwrap_or(best_lower);
    if result.is_finite() {
        Ok(result)
    } else {
        Err(BoundError::GradientMayVanish)
    }
}

/// Certified upper bound on `J = sup_{x in D(p,R)} ||pinv(Jac_f)(x)||_inf`,
/// tightened by branch-and-bound over the box of radius `R`.
pub fn jac_pinv_sup(f: &MultiPoly, p: &[f64], radius: f64) -> Result<f64, BoundError> {
    if p.len() != f.num_vars() {
        return Err(BoundError::DimensionMismatch {
            expected: f.num_vars(),
            got: p.len(),
        });
    }
    jac_pinv_sup_from(&f.gradient(), &f.hessian(), p, radius)
}

/// First-order computable upper bound Θ on J:
/// `||pinv(Jac)(p)||_inf + n^2 (1 + 2 sqrt(n)) ||H_f(p)||_inf / ||Jac(p)||_1^2 * R`.
pub fn theta(f: &MultiPoly, p: &[f64], radius: f64) -> Result<f64, BoundError> {
    let grad_p: Vec<f64> = f
        .gradient()
        .iter()
        .map(|g| g.eval(p).expect("dimension checked"))
        .collect();
    let row = grad_row_norm1(&grad_p);
    if row == 0.0 {
        return Err(BoundError::ZeroGradient);
    }
    let hp = hessian_point_norm(f, p);
    if hp == 0.0 {
        return Err(BoundError::ZeroHessian);
    }
    let nf = p.len() as f64;
    Ok(pinv_inf_norm(&grad_p) + nf * nf * (1.0 + 2.0 * nf.sqrt()) * hp / (row * row) * radius)
}

pub(crate) fn b1_from(ctx: &BoundContext, grad_p: &[f64], h: f64) -> f64 {
    let first = grad_col_norm1(grad_p) * ctx.eps_max;
    if ctx.f.degree() <= 1 {
        first
    } else {
        first + ctx.n as f64 / 2.0 * h * ctx.eps_max * ctx.eps_max
    }
}

/// Non-crossing bound `B1 = ||Jac(p)^t||_1 eps_max + (n/2) H eps_max^2`
/// (for linear polynomials the second term drops).
pub fn bound_b1(ctx: &BoundContext, h: f64) -> Result<f64, BoundError> {
    if ctx.f.degree() <= 0 {
        return Err(BoundError::ConstantPolynomial);
    }
    Ok(b1_from(ctx, &ctx.grad_at_p(), h))
}

/// First-order non-crossing bound B1', with `||H_f(p)||_inf` in place of H.
pub fn bound_b1_prime(ctx: &BoundContext) -> Result<f64, BoundError> {
    match ctx.f.degree() {
        d if d <= 0 => return Err(BoundError::ConstantPolynomial),
        1 => return Err(BoundError::DegreeTooLow),
        _ => {}
    }
    let grad_p = ctx.grad_at_p();
    let hp = hessian_point_norm(ctx.f, &ctx.p);
    Ok(grad_col_norm1(&grad_p) * ctx.eps_max + ctx.n as f64 / 2.0 * hp * ctx.eps_max * ctx.eps_max)
}

pub(crate) fn b2_from(ctx: &BoundContext, h: f64, j: f64, radius: f64) -> f64 {
    if ctx.f.degree() <= 1 {
        radius / j
    } else {
        let nf = ctx.n as f64;
        let n52 = nf * nf * nf.sqrt();
        2.0 * radius / (j * (ctx.c + n52 * h * j * radius))
    }
}

/// Crossing bound `B2 = 2R / (J (c + n^{5/2} H J R))`; `R/J` for linear
/// polynomials.
pub fn bound_b2(ctx: &BoundContext, h: f64, j: f64, radius: f64) -> Result<f64, BoundError> {
    if ctx.f.degree() <= 0 {
        return Err(BoundError::ConstantPolynomial);
    }
    let grad_p = ctx.grad_at_p();
    if grad_row_norm1(&grad_p) == 0.0 {
        return Err(BoundError::ZeroGradient);
    }
    let cap = radius_cap_exact(ctx, &grad_p, h);
    if !(radius > 0.0) || radius >= cap {
        return Err(BoundError::RadiusInfeasible { radius, cap });
    }
    Ok(b2_from(ctx, h, j, radius))
}

pub(crate) fn b2_prime_from(ctx: &BoundContext, hessian_p_norm: f64, th: f64, radius: f64) -> f64 {
    let nf = ctx.n as f64;
    let n92 = nf * nf * nf * nf * nf.sqrt();
    2.0 * radius / (th * (ctx.c + n92 * hessian_p_norm * th * radius))
}

/// First-order crossing bound `B2' = 2R / (Θ (c + n^{9/2} ||H_f(p)||_inf Θ R))`.
pub fn bound_b2_prime(ctx: &BoundContext, th: f64, radius: f64) -> Result<f64, BoundError> {
    match ctx.f.degree() {
        d if d <= 0 => return Err(BoundError::ConstantPolynomial),
        1 => return Err(BoundError::DegreeTooLow),
        _ => {}
    }
    let grad_p = ctx.grad_at_p();
    if grad_row_norm1(&grad_p) == 0.0 {
        return Err(BoundError::ZeroGradient);
    }
    let hp = hessian_point_norm(ctx.f, &ctx.p);
    if hp == 0.0 {
        return Err(BoundError::ZeroHessian);
    }
    let cap = radius_cap_first_order(ctx, &grad_p, hp);
    if !(radius > 0.0) || radius >= cap {
        return Err(BoundError::RadiusInfeasible { radius, cap });
    }
    Ok(b2_prime_from(ctx, hp, th, radius))
}

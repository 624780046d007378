//! Brute-force sign-sampling ground truth for crossing decisions.
//!
//! The oracle is not certified: `NoSignChange` is always qualified by the
//! resolution it was sampled at (an even-multiplicity tangency can evade
//! any finite sampling). Tests use oracle `Crosses` to refute a `No`
//! certificate, and `NoSignChange` at high resolution combined with a
//! normal-flow failure to refute a `Yes`.

use thiserror::Error;

use crate::crossing::Cell;
use crate::poly::{MultiPoly, PolyError};

/// Hard cap on the total number of grid samples.
pub const MAX_SAMPLES: usize = 10_000_000;

/// Near-zero threshold, relative to the sampled magnitude scale.
const NEAR_ZERO_REL: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("resolution {0} exceeds the {MAX_SAMPLES}-sample budget")]
    ResolutionTooLarge(u32),
    #[error("resolution must be at least 2")]
    ResolutionTooSmall,
    #[error("segment endpoints do not have strictly opposite signs")]
    SameSign,
    #[error("bisection did not reach the tolerance in 200 iterations")]
    NonConverged,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Crosses,
    /// No sign change found at the stated resolution; not a proof of
    /// non-crossing.
    NoSignChange,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// A sample where |f| is below the near-zero threshold.
    NearZero(Vec<f64>),
    /// Two axis-adjacent samples with opposite signs.
    SignFlip(Vec<f64>, Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub verdict: OracleVerdict,
    pub witness: Option<Witness>,
    pub resolution: u32,
}

/// Evaluate `f` on a `(resolution+1)^n` lattice over the closed cell and
/// report a crossing if a sample is (relatively) near zero or an
/// axis-adjacent pair changes sign.
pub fn grid_sign_oracle(
    f: &MultiPoly,
    cell: &Cell,
    resolution: u32,
) -> Result<OracleResult, OracleError> {
    if resolution < 2 {
        return Err(OracleError::ResolutionTooSmall);
    }
    let n = cell.dim();
    if n != f.num_vars() {
        return Err(OracleError::Poly(PolyError::DimensionMismatch {
            expected: f.num_vars(),
            got: n,
        }));
    }
    let m = resolution as usize + 1;
    let total = m
        .checked_pow(n as u32)
        .filter(|&t| t <= MAX_SAMPLES)
        .ok_or(OracleError::ResolutionTooLarge(resolution))?;

    // per-axis sample coordinates over the closed cell
    let coords: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let lo = cell.center[k] - cell.eps[k];
            let w = 2.0 * cell.eps[k] / resolution as f64;
            (0..m).map(|t| lo + t as f64 * w).collect()
        })
        .collect();

    // per-axis power tables up to the maximum exponent used on that axis
    let max_deg: Vec<u32> = (0..n)
        .map(|k| f.terms().map(|(e, _)| e[k]).max().unwrap_or(0))
        .collect();
    let pows: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|k| {
            (0..=max_deg[k])
                .map(|e| coords[k].iter().map(|x| x.powi(e as i32)).collect())
                .collect()
        })
        .collect();

    let terms: Vec<(&[u32], f64)> = f.terms().collect();
    let mut values = vec![0.0f64; total];
    let mut idx = vec![0usize; n];
    for flat in 0..total {
        let mut v = 0.0;
        for (expo, c) in &terms {
            let mut t = *c;
            for k in 0..n {
                t *= pows[k][expo[k] as usize][idx[k]];
            }
            v += t;
        }
        values[flat] = v;
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
        }
    }

    let max_abs = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let threshold = NEAR_ZERO_REL * (1.0 + max_abs);
    let point_of = |flat: usize| -> Vec<f64> {
        let mut rest = flat;
        let mut out = vec![0.0; n];
        for k in (0..n).rev() {
            out[k] = coords[k][rest % m];
            rest /= m;
        }
        out
    };

    let mut best = (f64::INFINITY, 0usize);
    for (flat, v) in values.iter().enumerate() {
        if v.abs() < best.0 {
            best = (v.abs(), flat);
        }
    }
    if best.0 <= threshold {
        return Ok(OracleResult {
            verdict: OracleVerdict::Crosses,
            witness: Some(Witness::NearZero(point_of(best.1))),
            resolution,
        });
    }

    // axis-adjacent sign flips
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * m;
    }
    for flat in 0..total {
        let s = values[flat] > 0.0;
        for k in 0..n {
            // neighbor along axis k (lower side) exists unless this index is 0
            let pos_k = flat / strides[k] % m;
            if pos_k == 0 {
                continue;
            }
            let prev = flat - strides[k];
            if (values[prev] > 0.0) != s {
                return Ok(OracleResult {
                    verdict: OracleVerdict::Crosses,
                    witness: Some(Witness::SignFlip(point_of(prev), point_of(flat))),
                    resolution,
                });
            }
        }
    }

    Ok(OracleResult {
        verdict: OracleVerdict::NoSignChange,
        witness: None,
        resolution,
    })
}

/// Refine a sign change on the segment `[a, b]` to a near-root by
/// bisection.
pub fn bisect_root_on_segment(
    f: &MultiPoly,
    a: &[f64],
    b: &[f64],
    tol: f64,
) -> Result<Vec<f64>, OracleError> {
    let fa = f.eval(a)?;
    let fb = f.eval(b)?;
    if fa == 0.0 || fb == 0.0 || (fa > 0.0) == (fb > 0.0) {
        return Err(OracleError::SameSign);
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let lo_sign_positive = fa > 0.0;
    let point = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect() };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let x = point(mid);
        let fx = f.eval(&x)?;
        if fx.abs() <= tol {
            return Ok(x);
        }
        if (fx > 0.0) == lo_sign_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo == 0.0 {
            break;
        }
    }
    Err(OracleError::NonConverged)
}

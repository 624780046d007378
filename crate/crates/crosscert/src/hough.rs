//! Curve families in joint form, Hough transforms of image points, the
//! voting accumulator over a discretized parameter region, and peak
//! detection.
//!
//! A family is a single joint polynomial `F(x; L)` over the image
//! variables and the parameters. The Hough transform of an image point is
//! the specialization of `F` at that point, a hypersurface in parameter
//! space. Certified crossing votes are counted per parameter cell;
//! inconclusive cells are tracked separately and never add to the peak
//! score.

use rayon::prelude::*;
use std::f64::consts::PI;
use thiserror::Error;

use crate::bounds::CertMode;
use crate::crossing::{crossing_area_refined, CrossError, Discretization, RadiusPolicy, Verdict};
use crate::oracle::bisect_root_on_segment;
use crate::parse::parse_poly;
use crate::poly::{MultiPoly, PolyError, VarSpace};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HoughError {
    #[error("Hough transform of this point is constant (degenerate)")]
    DegenerateTransform,
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("accumulator has no certified votes anywhere")]
    AllZeroAccumulator,
    #[error("no real points found for these parameters")]
    NoRealPoints,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Cross(#[from] CrossError),
}

/// Image points feeding the recognition pipeline.
pub type PointSet = Vec<Vec<f64>>;

/// Point-generation strategy attached to a family.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// Nodes over `(lo, hi]` on the first image variable, solving for the
    /// second by scan-and-bisect.
    XSweep { lo: f64, hi: f64 },
    /// x-range derived from the parameters: `(a, (a^2+b^2)/a]`.
    ConchoidSluse,
    /// Closed-form polar sweep.
    ThreeConvexities { with_m: bool },
    /// y-sweep over the region where the cubic right side is nonnegative.
    Elliptic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveFamily {
    pub name: String,
    /// Joint polynomial over image variables followed by parameters.
    pub joint: MultiPoly,
    pub image_vars: Vec<String>,
    pub param_vars: Vec<String>,
    pub sampler: Sampler,
}

impl CurveFamily {
    pub fn custom(
        name: &str,
        joint_text: &str,
        image_vars: &[&str],
        param_vars: &[&str],
        sampler: Sampler,
    ) -> Result<Self, HoughError> {
        let mut names: Vec<String> = image_vars.iter().map(|s| s.to_string()).collect();
        names.extend(param_vars.iter().map(|s| s.to_string()));
        let space = VarSpace::new(names)?;
        let joint = parse_poly(joint_text, &space)?;
        Ok(CurveFamily {
            name: name.to_string(),
            joint,
            image_vars: image_vars.iter().map(|s| s.to_string()).collect(),
            param_vars: param_vars.iter().map(|s| s.to_string()).collect(),
            sampler,
        })
    }

    pub fn image_dim(&self) -> usize {
        self.image_vars.len()
    }

    pub fn param_dim(&self) -> usize {
        self.param_vars.len()
    }
}

/// The four named family presets.
pub fn builtin_families() -> Vec<CurveFamily> {
    let conchoid = CurveFamily::custom(
        "conchoid_sluse",
        "A*(x-A)*(x^2+y^2) - B^2*x^2",
        &["x", "y"],
        &["A", "B"],
        Sampler::ConchoidSluse,
    )
    .expect("builtin parses");
    let three = CurveFamily::custom(
        "three_convexities",
        "(x^2+y^2)*(x^2+y^2)*(x^2+y^2) - (A*(x^2+y^2) - B*(x^3-3*x*y^2))*(A*(x^2+y^2) - B*(x^3-3*x*y^2))",
        &["x", "y"],
        &["A", "B"],
        Sampler::ThreeConvexities { with_m: false },
    )
    .expect("builtin parses");
    let three_m = CurveFamily::custom(
        "three_convexities_m",
        "(M*x^2+y^2)*(M*x^2+y^2)*(M*x^2+y^2) - (A*(M*x^2+y^2) - B*(x^3-3*x*y^2))*(A*(M*x^2+y^2) - B*(x^3-3*x*y^2))",
        &["x", "y"],
        &["A", "B", "M"],
        Sampler::ThreeConvexities { with_m: true },
    )
    .expect("builtin parses");
    let elliptic = CurveFamily::custom(
        "elliptic",
        "M*y^3 - N*y^2 + A*y - B + x^2",
        &["x", "y"],
        &["A", "B", "M", "N"],
        Sampler::Elliptic,
    )
    .expect("builtin parses");
    vec![conchoid, three, three_m, elliptic]
}

pub fn family_by_name(name: &str) -> Option<CurveFamily> {
    builtin_families().into_iter().find(|f| f.name == name)
}

/// Hough transform of an image point: the joint polynomial specialized at
/// the point, as a polynomial in the parameters.
pub fn hough_transform(fam: &CurveFamily, p: &[f64]) -> Result<MultiPoly, HoughError> {
    if p.len() != fam.image_dim() {
        return Err(HoughError::DimensionMismatch {
            expected: fam.image_dim(),
            got: p.len(),
        });
    }
    let names: Vec<&str> = fam.image_vars.iter().map(|s| s.as_str()).collect();
    let t = fam.joint.specialize(&names, p)?;
    if t.degree() <= 0 {
        return Err(HoughError::DegenerateTransform);
    }
    Ok(t)
}

/// Vote matrix over the parameter grid: per-cell counts of certified
/// crossings and of inconclusive cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    pub disc: Discretization,
    pub yes: Vec<u32>,
    pub unknown: Vec<u32>,
    pub num_points: usize,
    /// Points whose transform was degenerate and cast no votes.
    pub skipped_degenerate: usize,
}

impl Accumulator {
    pub fn yes_at(&self, idx: &[usize]) -> u32 {
        self.yes[self.disc.flat_index(idx)]
    }

    pub fn unknown_at(&self, idx: &[usize]) -> u32 {
        self.unknown[self.disc.flat_index(idx)]
    }
}

/// Run the crossing sweep for the transform of every point and sum the
/// votes. Unknown verdicts are counted apart from certified crossings.
pub fn vote(
    fam: &CurveFamily,
    points: &PointSet,
    disc: &Discretization,
    mode: CertMode,
    subdivision_depth: u32,
) -> Result<Accumulator, HoughError> {
    if points.is_empty() {
        return Err(HoughError::EmptyPointSet);
    }
    if disc.dim() != fam.param_dim() {
        return Err(HoughError::DimensionMismatch {
            expected: fam.param_dim(),
            got: disc.dim(),
        });
    }
    for p in points {
        if p.len() != fam.image_dim() {
            return Err(HoughError::DimensionMismatch {
                expected: fam.image_dim(),
                got: p.len(),
            });
        }
    }

    let per_point: Vec<Option<Vec<Verdict>>> = points
        .par_iter()
        .map(|p| -> Result<Option<Vec<Verdict>>, HoughError> {
            let transform = match hough_transform(fam, p) {
                Ok(t) => t,
                Err(HoughError::DegenerateTransform) => return Ok(None),
                Err(e) => return Err(e),
            };
            let grid = crossing_area_refined(
                &transform,
                disc,
                mode,
                RadiusPolicy::Auto,
                subdivision_depth,
            )?;
            Ok(Some(grid.cells.iter().map(|c| c.verdict).collect()))
        })
        .collect::<Result<_, _>>()?;

    let ncells = disc.num_cells();
    let mut acc = Accumulator {
        disc: disc.clone(),
        yes: vec![0; ncells],
        unknown: vec![0; ncells],
        num_points: points.len(),
        skipped_degenerate: 0,
    };
    for verdicts in per_point {
        match verdicts {
            None => acc.skipped_degenerate += 1,
            Some(vs) => {
                for (i, v) in vs.iter().enumerate() {
                    match v {
                        Verdict::Yes => acc.yes[i] += 1,
                        Verdict::Unknown => acc.unknown[i] += 1,
                        Verdict::No => {}
                    }
                }
            }
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Center of the winning cell.
    pub lambda: Vec<f64>,
    pub votes: u32,
    /// Multi-indices of every cell achieving the maximal vote count.
    pub ties: Vec<Vec<usize>>,
    pub unknown_at_peak: u32,
}

/// Global argmax of the certified vote counts. Ties are broken by fewer
/// inconclusive counts, then by lexicographically smallest multi-index;
/// every tied cell is reported.
pub fn detect(acc: &Accumulator) -> Result<Detection, HoughError> {
    let max_yes = acc.yes.iter().copied().max().unwrap_or(0);
    if max_yes == 0 {
        return Err(HoughError::AllZeroAccumulator);
    }
    let tied: Vec<usize> = (0..acc.yes.len())
        .filter(|&i| acc.yes[i] == max_yes)
        .collect();
    let winner = *tied
        .iter()
        .min_by_key(|&&i| (acc.unknown[i], acc.disc.multi_index(i)))
        .expect("nonempty");
    Ok(Detection {
        lambda: acc.disc.center(&acc.disc.multi_index(winner)),
        votes: max_yes,
        ties: tied.iter().map(|&i| acc.disc.multi_index(i)).collect(),
        unknown_at_peak: acc.unknown[winner],
    })
}

fn quantize(v: f64, step: f64) -> f64 {
    if step > 0.0 {
        (v / step).round() * step
    } else {
        v
    }
}

/// Solve `g(y) = f(x0, y) = 0` for the smallest-|y| root, scanning
/// nonnegative y first. Returns None when no sign change or near-zero is
/// found in `[-yscan, yscan]`.
fn solve_second_var(curve: &MultiPoly, x0: f64, yscan: f64) -> Option<f64> {
    const NODES: usize = 2048;
    let eval = |y: f64| curve.eval(&[x0, y]).expect("two variables");
    let scan = |lo: f64, hi: f64| -> Option<f64> {
        let h = (hi - lo) / NODES as f64;
        let mut scale = 0.0f64;
        let mut values = Vec::with_capacity(NODES + 1);
        for k in 0..=NODES {
            let v = eval(lo + k as f64 * h);
            scale = scale.max(v.abs());
            values.push(v);
        }
        let near = 1e-12 * (1.0 + scale);
        for (k, &v) in values.iter().enumerate() {
            let y = lo + k as f64 * h;
            if v.abs() <= near {
                return Some(y);
            }
            if k > 0 && (v > 0.0) != (values[k - 1] > 0.0) {
                let a = [x0, lo + (k - 1) as f64 * h];
                let b = [x0, y];
                // tolerance local to the bracket, not the whole scan range
                let local = values[k - 1].abs().max(v.abs());
                let tol = 1e-13 * (1.0 + local);
                return bisect_root_on_segment(curve, &a, &b, tol)
                    .or_else(|_| bisect_root_on_segment(curve, &a, &b, 100.0 * tol))
                    .ok()
                    .map(|root| root[1]);
            }
        }
        None
    };
    scan(0.0, yscan).or_else(|| scan(0.0, -yscan))
}

/// Generate `num` points close to the curve of the family at parameter
/// `lambda`. With `noise > 0` the solved coordinate is rounded to the
/// nearest multiple of `noise`; with `noise = 0` points sit on the curve
/// up to root-finding accuracy. Generation is deterministic; `seed` is
/// accepted for interface stability.
pub fn sample_family(
    fam: &CurveFamily,
    lambda: &[f64],
    num: usize,
    seed: u64,
    noise: f64,
) -> Result<PointSet, HoughError> {
    let _ = seed;
    if lambda.len() != fam.param_dim() {
        return Err(HoughError::DimensionMismatch {
            expected: fam.param_dim(),
            got: lambda.len(),
        });
    }
    if num == 0 {
        return Err(HoughError::NoRealPoints);
    }
    let param_names: Vec<&str> = fam.param_vars.iter().map(|s| s.as_str()).collect();
    let curve = fam.joint.specialize(&param_names, lambda)?;

    let mut points: PointSet = Vec::with_capacity(num);
    match fam.sampler {
        Sampler::ConchoidSluse | Sampler::XSweep { .. } => {
            let (lo, hi, yscan) = match fam.sampler {
                Sampler::ConchoidSluse => {
                    let (a, b) = (lambda[0], lambda[1]);
                    if !(a > 0.0) {
                        return Err(HoughError::NoRealPoints);
                    }
                    let hi = (a * a + b * b) / a;
                    (a, hi, 1.5 * hi)
                }
                Sampler::XSweep { lo, hi } => (lo, hi, 8.0),
                _ => unreachable!(),
            };
            let step = (hi - lo) / num as f64;
            for i in 1..=num {
                let x = lo + i as f64 * step;
                if let Some(y) = solve_second_var(&curve, x, yscan) {
                    points.push(vec![x, quantize(y, noise)]);
                }
            }
        }
        Sampler::ThreeConvexities { with_m } => {
            let (a, b) = (lambda[0], lambda[1]);
            let m = if with_m { lambda[2] } else { 1.0 };
            if !(a > 0.0) || !(m > 0.0) {
                return Err(HoughError::NoRealPoints);
            }
            let sqrt_m = m.sqrt();
            for i in 0..num {
                let th = 2.0 * PI * i as f64 / num as f64;
                let (s, c) = th.sin_cos();
                let g = (c * c * c / m - 3.0 * c * s * s) / sqrt_m;
                let denom = 1.0 + b * g;
                if denom.abs() < 1e-9 {
                    continue;
                }
                let rho = a / denom;
                if rho <= 0.0 {
                    continue;
                }
                points.push(vec![
                    quantize(rho * c / sqrt_m, noise),
                    quantize(rho * s, noise),
                ]);
            }
        }
        Sampler::Elliptic => {
            // x^2 = g(y); walk the y-window where g is nonnegative
            let (a, b, m, n) = (lambda[0], lambda[1], lambda[2], lambda[3]);
            let g = |y: f64| -m * y * y * y + n * y * y - a * y + b;
            const SCAN: usize = 4096;
            let span = 6.0;
            let feasible: Vec<f64> = (0..=SCAN)
                .map(|k| -span + 2.0 * span * k as f64 / SCAN as f64)
                .filter(|&y| g(y) >= 0.0)
                .collect();
            if feasible.is_empty() {
                return Err(HoughError::NoRealPoints);
            }
            for i in 0..num {
                let pick = i * (feasible.len() - 1) / num.max(1);
                let y = feasible[pick.min(feasible.len() - 1)];
                let x = g(y).max(0.0).sqrt();
                points.push(vec![quantize(x, noise), y]);
            }
        }
    }
    if points.is_empty() {
        return Err(HoughError::NoRealPoints);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crossing::discretize;

    #[test]
    fn builtin_presets_exist() {
        let names: Vec<String> = builtin_families().into_iter().map(|f| f.name).collect();
        assert_eq!(
            names,
            vec![
                "conchoid_sluse",
                "three_convexities",
                "three_convexities_m",
                "elliptic"
            ]
        );
    }

    #[test]
    fn conchoid_transform_formula() {
        let fam = family_by_name("conchoid_sluse").unwrap();
        // at p = (1, 0): A - A^2 - B^2
        let t = hough_transform(&fam, &[1.0, 0.0]).unwrap();
        assert_eq!(t.space().names(), &["A".to_string(), "B".to_string()]);
        assert_eq!(t.coeff(&[1, 0]), 1.0);
        assert_eq!(t.coeff(&[2, 0]), -1.0);
        assert_eq!(t.coeff(&[0, 2]), -1.0);
        assert_eq!(t.num_terms(), 3);

        // general point matches (px^2+py^2)(A px - A^2) - B^2 px^2
        let (px, py) = (4.25, 0.9);
        let t = hough_transform(&fam, &[px, py]).unwrap();
        let r2 = px * px + py * py;
        for (lam, expect) in [
            ([0.3, 0.7], r2 * (0.3 * px - 0.09) - 0.49 * px * px),
            ([0.25, 1.0], r2 * (0.25 * px - 0.0625) - px * px),
        ] {
            let got = t.eval(&lam).unwrap();
            assert!((got - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn elliptic_transform_is_hyperplane() {
        let fam = family_by_name("elliptic").unwrap();
        let t = hough_transform(&fam, &[1.0, 0.0]).unwrap();
        assert_eq!(t.degree(), 1);
        // 1 - B
        assert_eq!(t.coeff(&[0, 1, 0, 0]), -1.0);
        assert_eq!(t.coeff(&[0, 0, 0, 0]), 1.0);
    }

    #[test]
    fn conchoid_origin_is_degenerate() {
        let fam = family_by_name("conchoid_sluse").unwrap();
        assert_eq!(
            hough_transform(&fam, &[0.0, 0.0]),
            Err(HoughError::DegenerateTransform)
        );
    }

    #[test]
    fn samples_lie_on_curves() {
        // Hough property 1: transforms of on-curve points pass through λ.
        let cases: Vec<(&str, Vec<f64>)> = vec![
            ("conchoid_sluse", vec![0.25, 1.0]),
            ("three_convexities", vec![0.53, 0.445]),
            ("three_convexities_m", vec![0.82, 0.04, 1.1]),
            ("elliptic", vec![-0.42, 2.76, 0.8, 0.0]),
        ];
        for (name, lambda) in cases {
            let fam = family_by_name(name).unwrap();
            let pts = sample_family(&fam, &lambda, 50, 0, 0.0).unwrap();
            assert!(!pts.is_empty(), "{name}: no points");
            for p in &pts {
                let t = hough_transform(&fam, p).unwrap();
                let residual = t.eval(&lambda).unwrap().abs();
                let scale = t
                    .terms()
                    .map(|(e, c)| {
                        let mut v = c.abs();
                        for (i, &k) in e.iter().enumerate() {
                            v *= lambda[i].abs().max(1.0).powi(k as i32);
                        }
                        v
                    })
                    .fold(0.0f64, f64::max);
                assert!(
                    residual <= 1e-9 * (1.0 + scale),
                    "{name}: residual {residual} at {p:?}"
                );
            }
        }
    }

    #[test]
    fn circle_family_exact_samples() {
        let fam = CurveFamily::custom(
            "circle",
            "x^2 + y^2 - A^2",
            &["x", "y"],
            &["A"],
            Sampler::XSweep { lo: -1.0, hi: 1.0 },
        )
        .unwrap();
        let curve_residual = |p: &[f64]| (p[0] * p[0] + p[1] * p[1] - 1.0).abs();
        let pts = sample_family(&fam, &[1.0], 20, 0, 0.0).unwrap();
        assert_eq!(pts.len(), 20);
        for p in &pts {
            assert!(curve_residual(p) <= 1e-12, "residual {}", curve_residual(p));
        }
    }

    #[test]
    fn elliptic_residuals_within_noise() {
        let fam = family_by_name("elliptic").unwrap();
        let lambda = [-0.42, 2.76, 0.8, 0.0];
        let pts = sample_family(&fam, &lambda, 50, 0, 0.0).unwrap();
        for p in &pts {
            let t = hough_transform(&fam, p).unwrap();
            assert!(t.eval(&lambda).unwrap().abs() <= 1e-9);
        }
    }

    #[test]
    fn vote_additivity_and_single_point() {
        let fam = family_by_name("conchoid_sluse").unwrap();
        let disc = discretize(&[(0.1, 0.5), (0.6, 1.2)], &[0.1, 0.1]).unwrap();
        let pts = sample_family(&fam, &[0.25, 1.0], 6, 0, 0.0).unwrap();
        let (xs, ys) = pts.split_at(3);

        let ax = vote(&fam, &xs.to_vec(), &disc, CertMode::Exact, 1).unwrap();
        let ay = vote(&fam, &ys.to_vec(), &disc, CertMode::Exact, 1).unwrap();
        let all = vote(&fam, &pts, &disc, CertMode::Exact, 1).unwrap();
        for i in 0..disc.num_cells() {
            assert_eq!(ax.yes[i] + ay.yes[i], all.yes[i]);
            assert_eq!(ax.unknown[i] + ay.unknown[i], all.unknown[i]);
            assert!(all.yes[i] + all.unknown[i] <= all.num_points as u32);
        }

        // two identical points double the single-point matrix
        let p = vec![pts[0].clone()];
        let pp = vec![pts[0].clone(), pts[0].clone()];
        let a1 = vote(&fam, &p, &disc, CertMode::Exact, 0).unwrap();
        let a2 = vote(&fam, &pp, &disc, CertMode::Exact, 0).unwrap();
        for i in 0..disc.num_cells() {
            assert_eq!(2 * a1.yes[i], a2.yes[i]);
        }

        assert_eq!(
            vote(&fam, &vec![], &disc, CertMode::Exact, 0),
            Err(HoughError::EmptyPointSet)
        );
    }

    #[test]
    fn detect_tie_breaking() {
        let disc = discretize(&[(0.0, 1.0)], &[0.5]).unwrap();
        let mut acc = Accumulator {
            disc: disc.clone(),
            yes: vec![3, 3, 1],
            unknown: vec![2, 1, 0],
            num_points: 3,
            skipped_degenerate: 0,
        };
        let d = detect(&acc).unwrap();
        // fewer unknowns wins the tie
        assert_eq!(d.lambda, vec![0.5]);
        assert_eq!(d.votes, 3);
        assert_eq!(d.ties, vec![vec![0], vec![1]]);

        // equal unknowns: lexicographically smallest index wins
        acc.unknown = vec![1, 1, 0];
        let d = detect(&acc).unwrap();
        assert_eq!(d.lambda, vec![0.0]);

        acc.yes = vec![0, 0, 0];
        assert_eq!(detect(&acc), Err(HoughError::AllZeroAccumulator));
    }

    #[test]
    fn detect_invariant_under_scaling() {
        let disc = discretize(&[(0.0, 1.0)], &[0.25]).unwrap();
        let acc = Accumulator {
            disc: disc.clone(),
            yes: vec![1, 4, 2, 0, 3],
            unknown: vec![0; 5],
            num_points: 10,
            skipped_degenerate: 0,
        };
        let d1 = detect(&acc).unwrap();
        let scaled = Accumulator {
            yes: acc.yes.iter().map(|v| v * 7).collect(),
            ..acc.clone()
        };
        let d2 = detect(&scaled).unwrap();
        assert_eq!(d1.lambda, d2.lambda);
    }

    #[test]
    fn distinct_parameters_are_distinguished() {
        // Hough property 2 surrogate: points sampled on H_λ do not all lie
        // on H_λ' for λ' ≠ λ.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let fam = family_by_name("conchoid_sluse").unwrap();
        for _ in 0..20 {
            let l1 = [rng.gen_range(0.15..0.45), rng.gen_range(0.5..1.2)];
            let mut l2 = l1;
            l2[rng.gen_range(0..2)] += rng.gen_range(0.05..0.2);
            let pts = sample_family(&fam, &l1, 200, 0, 0.0).unwrap();
            let mut separated = false;
            for p in &pts {
                let t = hough_transform(&fam, p).unwrap();
                if t.eval(&l2).unwrap().abs() > 1e-6 {
                    separated = true;
                    break;
                }
            }
            assert!(separated, "λ={l1:?} and λ'={l2:?} not separated");
        }
    }

    #[test]
    fn recognition_consistency_noise_free() {
        // Noise-free samples at a grid-centered λ recover exactly that
        // cell with a full vote count. The region starts at λ: below it
        // the conchoid transforms run nearly coincident toward the
        // parameter origin, and cells on that ridge are genuinely crossed
        // by every transform, which would tie the peak.
        let fam = family_by_name("conchoid_sluse").unwrap();
        let disc = discretize(&[(0.25, 0.6), (1.0, 1.4)], &[0.05, 0.05]).unwrap();
        let pts = sample_family(&fam, &[0.25, 1.0], 12, 0, 0.0).unwrap();
        let npts = pts.len() as u32;
        let acc = vote(&fam, &pts, &disc, CertMode::Exact, 2).unwrap();
        assert_eq!(acc.skipped_degenerate, 0);
        let d = detect(&acc).unwrap();
        assert_eq!(d.lambda, vec![0.25, 1.0]);
        assert_eq!(d.votes, npts);
        assert_eq!(d.ties.len(), 1);
    }
}

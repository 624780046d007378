//! Closed interval arithmetic with outward inflation.
//!
//! Endpoints are computed in round-to-nearest and then pushed outward by a
//! relative factor of 8u per operation (u = unit roundoff), which dominates
//! the at-most-0.5u rounding error of each IEEE operation. No rounding-mode
//! switching is ever performed, so values can be used freely across threads.
//! Exactly-zero endpoints are kept at zero: a sum or product that rounds to
//! zero in the magnitude ranges used here is exact.

use crate::poly::MultiPoly;

/// 8 times the unit roundoff (u = 2^-53).
const INFLATE: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    x - INFLATE * x.abs()
}

fn up(x: f64) -> f64 {
    x + INFLATE * x.abs()
}

fn down_k(x: f64, k: u32) -> f64 {
    x - (k as f64) * INFLATE * x.abs()
}

fn up_k(x: f64, k: u32) -> f64 {
    x + (k as f64) * INFLATE * x.abs()
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn add(self, other: Interval) -> Interval {
        Interval::new(down(self.lo + other.lo), up(self.hi + other.hi))
    }

    pub fn sub(self, other: Interval) -> Interval {
        Interval::new(down(self.lo - other.hi), up(self.hi - other.lo))
    }

    pub fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    pub fn mul(self, other: Interval) -> Interval {
        let ps = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(down(lo), up(hi))
    }

    pub fn scale(self, c: f64) -> Interval {
        self.mul(Interval::point(c))
    }

    /// Integer power, tightened for even exponents.
    pub fn powi(self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(1.0);
        }
        if k == 1 {
            return self;
        }
        if k % 2 == 0 {
            let m = self.mag_upper();
            let hi = up_k(m.powi(k as i32), k);
            let lo = if self.lo <= 0.0 && self.hi >= 0.0 {
                0.0
            } else {
                let s = self.mag_lower();
                down_k(s.powi(k as i32), k).max(0.0)
            };
            Interval::new(lo, hi)
        } else {
            Interval::new(
                down_k(self.lo.powi(k as i32), k),
                up_k(self.hi.powi(k as i32), k),
            )
        }
    }

    /// Square with the nonnegative lower bound kept.
    pub fn sq(self) -> Interval {
        self.powi(2)
    }

    /// Upper bound on |x| over the interval.
    pub fn mag_upper(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound on |x| over the interval (0 if it straddles zero).
    pub fn mag_lower(&self) -> f64 {
        if self.lo <= 0.0 && self.hi >= 0.0 {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }
}

/// Interval extension of a polynomial over an axis-aligned box.
pub fn eval_poly_interval(p: &MultiPoly, cube: &[Interval]) -> Interval {
    assert_eq!(cube.len(), p.num_vars());
    let mut acc = Interval::point(0.0);
    for (expo, c) in p.terms() {
        let mut t = Interval::point(c);
        for (i, &k) in expo.iter().enumerate() {
            if k > 0 {
                t = t.mul(cube[i].powi(k));
            }
        }
        acc = acc.add(t);
    }
    acc
}

/// The box `[p_i - eps_i, p_i + eps_i]` as a vector of intervals.
pub fn centered_box(p: &[f64], eps: &[f64]) -> Vec<Interval> {
    p.iter()
        .zip(eps)
        .map(|(&c, &e)| Interval::new(c - e, c + e))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;
    use crate::poly::VarSpace;
    use proptest::prelude::*;

    #[test]
    fn even_power_straddling_zero() {
        let x = Interval::new(-0.75, 0.75);
        let x2 = x.powi(2);
        assert_eq!(x2.lo, 0.0);
        assert!(x2.hi >= 0.5625 && x2.hi < 0.5625 * (1.0 + 1e-13));
    }

    #[test]
    fn monomial_extension_is_sharp() {
        // -120 x^2 over [-0.75, 0.75]: the magnitude bound is 67.5.
        let s = VarSpace::new(vec!["x", "y"]).unwrap();
        let p = parse_poly("-120*x^2", &s).unwrap();
        let cube = centered_box(&[0.0, 1.0], &[0.75, 0.75]);
        let i = eval_poly_interval(&p, &cube);
        assert!(i.mag_upper() >= 67.5);
        assert!(i.mag_upper() <= 67.5 * (1.0 + 1e-12));
    }

    proptest! {
        #[test]
        fn arithmetic_is_inclusion_isotone(
            a_lo in -10.0f64..10.0, a_w in 0.0f64..5.0,
            b_lo in -10.0f64..10.0, b_w in 0.0f64..5.0,
            ta in 0.0f64..1.0, tb in 0.0f64..1.0,
            k in 1u32..6,
        ) {
            let a = Interval::new(a_lo, a_lo + a_w);
            let b = Interval::new(b_lo, b_lo + b_w);
            let xa = a.lo + ta * (a.hi - a.lo);
            let xb = b.lo + tb * (b.hi - b.lo);
            prop_assert!(a.add(b).contains(xa + xb));
            prop_assert!(a.sub(b).contains(xa - xb));
            prop_assert!(a.mul(b).contains(xa * xb));
            prop_assert!(a.powi(k).contains(xa.powi(k as i32)));
            prop_assert!(a.neg().contains(-xa));
        }

        #[test]
        fn poly_box_evaluation_encloses_samples(
            coeffs in proptest::collection::vec(-3.0f64..3.0, 1..8),
            center in proptest::collection::vec(-2.0f64..2.0, 2..4),
            t in proptest::collection::vec(0.0f64..1.0, 2..4),
        ) {
            let n = center.len().min(t.len());
            let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
            let s = VarSpace::new(names).unwrap();
            let mut terms = Vec::new();
            for (i, &c) in coeffs.iter().enumerate() {
                let mut e = vec![0u32; n];
                e[i % n] = (i as u32 % 4) + 1;
                if n > 1 {
                    e[(i + 1) % n] = i as u32 % 3;
                }
                terms.push((e, c));
            }
            let p = crate::poly::MultiPoly::from_terms(&s, terms).unwrap();
            let eps = vec![0.5; n];
            let cube = centered_box(&center[..n], &eps);
            let x: Vec<f64> = (0..n)
                .map(|i| center[i] - 0.5 + t[i])
                .collect();
            let val = p.eval(&x).unwrap();
            let enclosure = eval_poly_interval(&p, &cube);
            prop_assert!(
                enclosure.contains(val),
                "value {} outside [{}, {}]", val, enclosure.lo, enclosure.hi
            );
        }
    }
}

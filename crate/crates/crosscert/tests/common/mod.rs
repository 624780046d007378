//! Seeded instance generators shared by the property and acceptance
//! suites.
#![allow(dead_code)] // each test target uses a different subset

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crosscert::{MultiPoly, VarSpace};

pub fn var_space(n: usize) -> VarSpace {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    VarSpace::new(names).unwrap()
}

/// Random sparse polynomial of total degree at most `max_deg` with
/// coefficients in [-3, 3].
pub fn random_poly(
    rng: &mut ChaCha8Rng,
    space: &VarSpace,
    max_deg: u32,
    terms: usize,
) -> MultiPoly {
    let n = space.len();
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut expo = vec![0u32; n];
        let mut budget = max_deg;
        for e in expo.iter_mut() {
            let k = rng.gen_range(0..=budget);
            *e = k;
            budget -= k;
        }
        let mut c: f64 = rng.gen_range(-3.0..3.0);
        if c.abs() < 1e-2 {
            c = c.signum() * 1e-2 + c;
        }
        out.push((expo, c));
    }
    MultiPoly::from_terms(space, out).unwrap()
}

/// Random polynomial that actually has the requested degree range and is
/// non-constant.
pub fn random_poly_nonconst(
    rng: &mut ChaCha8Rng,
    space: &VarSpace,
    max_deg: u32,
    terms: usize,
) -> MultiPoly {
    loop {
        let p = random_poly(rng, space, max_deg, terms);
        if p.degree() >= 1 {
            return p;
        }
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vec<f64> {
    (0..n)
        .map(|_| rng.gen_range(-half_width..half_width))
        .collect()
}

pub fn random_eps(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

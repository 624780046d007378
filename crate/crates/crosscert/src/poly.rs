//! Sparse multivariate polynomials over named variables.
//!
//! A [`MultiPoly`] is a map from exponent vectors to `f64` coefficients,
//! canonicalized so that no stored coefficient is exactly zero. Parsed
//! expressions are expanded eagerly into this canonical form, which is what
//! differentiation and substitution operate on.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Largest number of variables a [`VarSpace`] accepts.
pub const MAX_VARS: usize = 16;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PolyError {
    #[error("syntax error at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid variable space: {0}")]
    InvalidVarSpace(String),
}

/// Ordered set of variable names; index identity is fixed at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSpace {
    names: Vec<String>,
}

impl VarSpace {
    pub fn new<S: Into<String>>(names: Vec<S>) -> Result<Self, PolyError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_VARS {
            return Err(PolyError::InvalidVarSpace(format!(
                "at most {MAX_VARS} variables supported, got {}",
                names.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(PolyError::InvalidVarSpace("empty variable name".into()));
            }
            if names[..i].contains(name) {
                return Err(PolyError::InvalidVarSpace(format!(
                    "duplicate variable name `{name}`"
                )));
            }
        }
        Ok(VarSpace { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Sparse multivariate polynomial with `f64` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    space: VarSpace,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl MultiPoly {
    pub fn zero(space: &VarSpace) -> Self {
        MultiPoly {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: &VarSpace, c: f64) -> Self {
        let mut p = Self::zero(space);
        if c != 0.0 {
            p.terms.insert(vec![0; space.len()], c);
        }
        p
    }

    /// The monomial `c * x_i^k`.
    pub fn monomial(space: &VarSpace, var: usize, k: u32, c: f64) -> Self {
        let mut p = Self::zero(space);
        if c != 0.0 {
            let mut expo = vec![0; space.len()];
            expo[var] = k;
            p.terms.insert(expo, c);
        }
        p
    }

    pub fn from_terms(
        space: &VarSpace,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(space);
        for (expo, c) in terms {
            if expo.len() != space.len() {
                return Err(PolyError::DimensionMismatch {
                    expected: space.len(),
                    got: expo.len(),
                });
            }
            p.add_term(expo, c);
        }
        Ok(p)
    }

    pub fn space(&self) -> &VarSpace {
        &self.space
    }

    pub fn num_vars(&self) -> usize {
        self.space.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree -1 by convention.
    pub fn degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&k| k as i64).sum())
            .max()
            .unwrap_or(-1)
    }

    pub fn coeff(&self, expo: &[u32]) -> f64 {
        self.terms.get(expo).copied().unwrap_or(0.0)
    }

    fn add_term(&mut self, expo: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(expo);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.space, other.space);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -*c;
        }
        out
    }

    pub fn scale(&self, s: f64) -> MultiPoly {
        let mut out = Self::zero(&self.space);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn div_scalar(&self, s: f64) -> MultiPoly {
        let mut out = Self::zero(&self.space);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c / s);
        }
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert_eq!(self.space, other.space);
        let mut out = Self::zero(&self.space);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let expo: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(expo, ca * cb);
            }
        }
        out
    }

    /// Evaluate at a point. Plain monomial summation with Neumaier
    /// compensation; no Horner reordering, so the result is independent of
    /// any factored form the input was parsed from.
    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.space.len() {
            return Err(PolyError::DimensionMismatch {
                expected: self.space.len(),
                got: point.len(),
            });
        }
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (expo, &c) in &self.terms {
            let mut v = c;
            for (i, &k) in expo.iter().enumerate() {
                if k > 0 {
                    v *= point[i].powi(k as i32);
                }
            }
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        }
        Ok(sum + comp)
    }

    /// Partial derivative with respect to variable `var`.
    pub fn differentiate(&self, var: usize) -> MultiPoly {
        let mut out = Self::zero(&self.space);
        for (e, &c) in &self.terms {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let mut expo = e.clone();
            expo[var] = k - 1;
            out.add_term(expo, c * k as f64);
        }
        out
    }

    /// Gradient as a vector of polynomials, one per variable.
    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.space.len())
            .map(|i| self.differentiate(i))
            .collect()
    }

    /// Hessian as an n-by-n matrix of polynomials (symmetric by mixed
    /// partials; entry (j,i) is a clone of entry (i,j)).
    pub fn hessian(&self) -> Vec<Vec<MultiPoly>> {
        let n = self.space.len();
        let grad = self.gradient();
        let mut h: Vec<Vec<MultiPoly>> = vec![Vec::with_capacity(n); n];
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    let entry = h[j][i].clone();
                    h[i].push(entry);
                } else {
                    h[i].push(grad[i].differentiate(j));
                }
            }
        }
        h
    }

    /// Substitute fixed values for a subset of variables; the result lives
    /// on the residual variables in their original order.
    pub fn specialize(&self, fixed: &[&str], values: &[f64]) -> Result<MultiPoly, PolyError> {
        if fixed.len() != values.len() {
            return Err(PolyError::DimensionMismatch {
                expected: fixed.len(),
                got: values.len(),
            });
        }
        let mut fixed_idx = Vec::with_capacity(fixed.len());
        for name in fixed {
            match self.space.index_of(name) {
                Some(i) => fixed_idx.push(i),
                None => return Err(PolyError::UnknownVariable((*name).into())),
            }
        }
        let mut value_of = vec![None; self.space.len()];
        for (slot, &i) in fixed_idx.iter().enumerate() {
            if value_of[i].is_some() {
                return Err(PolyError::InvalidVarSpace(format!(
                    "variable `{}` fixed twice",
                    self.space.name(i)
                )));
            }
            value_of[i] = Some(values[slot]);
        }
        let residual: Vec<usize> = (0..self.space.len())
            .filter(|i| value_of[*i].is_none())
            .collect();
        let res_space = VarSpace::new(
            residual
                .iter()
                .map(|&i| self.space.name(i).to_string())
                .collect(),
        )?;
        if residual.is_empty() {
            // full substitution reduces to evaluation; use the same
            // compensated accumulation so both agree to the last bit
            let point: Vec<f64> = value_of.iter().map(|v| v.unwrap()).collect();
            return Ok(MultiPoly::constant(&res_space, self.eval(&point)?));
        }
        let mut out = MultiPoly::zero(&res_space);
        for (e, &c) in &self.terms {
            let mut coeff = c;
            for (i, &k) in e.iter().enumerate() {
                if let Some(v) = value_of[i] {
                    if k > 0 {
                        coeff *= v.powi(k as i32);
                    }
                }
            }
            let expo: Vec<u32> = residual.iter().map(|&i| e[i]).collect();
            out.add_term(expo, coeff);
        }
        Ok(out)
    }
}

/// Graded lexicographic order on exponent vectors: total degree first,
/// then lexicographic, both descending when used for printing.
fn grlex_desc(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u64 = a.iter().map(|&k| k as u64).sum();
    let db: u64 = b.iter().map(|&k| k as u64).sum();
    db.cmp(&da).then_with(|| b.cmp(a))
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| grlex_desc(a, b));
        for (idx, expo) in keys.iter().enumerate() {
            let c = self.terms[*expo];
            let mag = c.abs();
            if idx == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_const = expo.iter().all(|&k| k == 0);
            let mut wrote_factor = false;
            if is_const || mag != 1.0 {
                write!(f, "{mag}")?;
                wrote_factor = true;
            }
            for (i, &k) in expo.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if wrote_factor {
                    write!(f, "*")?;
                }
                write!(f, "{}", self.space.name(i))?;
                if k > 1 {
                    write!(f, "^{k}")?;
                }
                wrote_factor = true;
            }
        }
        Ok(())
    }
}

//! Truncated multivariate formal power series.
//!
//! Every variable carries a non-negative integer weight and a series stores
//! only monomials of total weight at most `max_weight`. Exponential,
//! logarithm, powers and inverses are computed by graded recurrences, so the
//! weight-zero part of the argument must be a constant.

mod fz;
mod gf;

pub use fz::*;
pub use gf::*;

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::coeff::{gen_binomial, int, CoeffError, Field, Rational};
use crate::polyring::{Monomial, PolyError, Polynomial, RingDescriptor, Variable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("series have different variables or weights")]
    Incompatible,
    #[error("unknown series variable {0:?}")]
    UnknownVariable(String),
    #[error("{0}: the weight-zero part must be the constant {1}")]
    WeightZeroPart(&'static str, &'static str),
    #[error("composition needs a univariate outer series")]
    NotUnivariate,
    #[error("not a valid FZ index: {0}")]
    InvalidFzIndex(String),
    #[error("bound exceeded: {0}")]
    Bound(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series<F: Field> {
    vars: Vec<String>,
    weights: Vec<u32>,
    max_weight: u32,
    terms: BTreeMap<Vec<u32>, F>,
}

pub type RSeries = Series<Rational>;

impl<F: Field> Series<F> {
    pub fn new(vars: &[&str], weights: &[u32], max_weight: u32) -> Self {
        assert_eq!(vars.len(), weights.len(), "one weight per variable");
        Self {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            weights: weights.to_vec(),
            max_weight,
            terms: BTreeMap::new(),
        }
    }

    /// Zero series in a single variable of weight 1.
    pub fn univariate(var: &str, max_degree: u32) -> Self {
        Self::new(&[var], &[1], max_degree)
    }

    pub fn from_coeffs(var: &str, coeffs: Vec<F>) -> Self {
        let max = coeffs.len().saturating_sub(1) as u32;
        let mut s = Self::univariate(var, max);
        for (k, c) in coeffs.into_iter().enumerate() {
            s.add_term(vec![k as u32], c);
        }
        s
    }

    pub fn zero_like(&self) -> Self {
        Self { terms: BTreeMap::new(), ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Self {
        Self {
            vars: self.vars.clone(),
            weights: self.weights.clone(),
            max_weight: self.max_weight,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant_like(&self, c: F) -> Self {
        let mut s = self.zero_like();
        s.add_term(vec![0; self.vars.len()], c);
        s
    }

    pub fn one_like(&self) -> Self {
        self.constant_like(F::one())
    }

    pub fn var_index(&self, name: &str) -> Result<usize, SeriesError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| SeriesError::UnknownVariable(name.to_string()))
    }

    pub fn var_like(&self, name: &str) -> Result<Self, SeriesError> {
        self.monomial_like(&[(name, 1)], F::one())
    }

    pub fn monomial_like(&self, powers: &[(&str, u32)], c: F) -> Result<Self, SeriesError> {
        let exps = self.exponents_of(powers)?;
        let mut s = self.zero_like();
        s.add_term(exps, c);
        Ok(s)
    }

    fn exponents_of(&self, powers: &[(&str, u32)]) -> Result<Vec<u32>, SeriesError> {
        let mut exps = vec![0; self.vars.len()];
        for (name, e) in powers {
            exps[self.var_index(name)?] += e;
        }
        Ok(exps)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn weight_of(&self, exps: &[u32]) -> u32 {
        exps.iter().zip(&self.weights).map(|(e, w)| e * w).sum()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &F)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c` at `exps`, silently discarding terms beyond the truncation.
    pub fn add_term(&mut self, exps: Vec<u32>, c: F) {
        if c.is_zero() || self.weight_of(&exps) > self.max_weight {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn coeff(&self, exps: &[u32]) -> F {
        self.terms.get(exps).cloned().unwrap_or_else(F::zero)
    }

    /// Coefficient with the named exponents and all others zero.
    pub fn coeff_of(&self, powers: &[(&str, u32)]) -> Result<F, SeriesError> {
        Ok(self.coeff(&self.exponents_of(powers)?))
    }

    /// Coefficient list of a univariate series, up to its truncation.
    pub fn coeff_list(&self) -> Vec<F> {
        (0..=self.max_weight)
            .map(|k| {
                let mut e = vec![0; self.vars.len()];
                if let Some(slot) = e.first_mut() {
                    *slot = k;
                }
                self.coeff(&e)
            })
            .collect()
    }

    pub fn constant_term(&self) -> F {
        self.coeff(&vec![0; self.vars.len()])
    }

    pub fn truncate(&self, max_weight: u32) -> Self {
        let mut s = Self { max_weight: max_weight.min(self.max_weight), ..self.clone_shape() };
        for (e, c) in &self.terms {
            s.add_term(e.clone(), c.clone());
        }
        s
    }

    fn same_shape(&self, other: &Self) -> Result<(), SeriesError> {
        if self.vars != other.vars || self.weights != other.weights {
            return Err(SeriesError::Incompatible);
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_shape(other)?;
        let mut s = self.truncate(other.max_weight);
        for (e, c) in &other.terms {
            s.add_term(e.clone(), c.clone());
        }
        Ok(s)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_shape(other)?;
        let max = self.max_weight.min(other.max_weight);
        let mut s = Self { max_weight: max, ..self.clone_shape() };
        let mut right: Vec<(u32, &Vec<u32>, &F)> =
            other.terms.iter().map(|(e, c)| (other.weight_of(e), e, c)).collect();
        right.sort_by_key(|t| t.0);
        for (ea, ca) in &self.terms {
            let wa = self.weight_of(ea);
            for &(wb, eb, cb) in &right {
                if wa + wb > max {
                    break;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                s.add_term(e, ca.clone() * cb.clone());
            }
        }
        Ok(s)
    }

    pub fn scale(&self, c: &F) -> Self {
        let mut s = self.zero_like();
        if c.is_zero() {
            return s;
        }
        for (e, k) in &self.terms {
            s.terms.insert(e.clone(), k.clone() * c.clone());
        }
        s
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        self.scale(&F::from_rational(c.clone()))
    }

    pub fn pow_int(&self, e: u32) -> Self {
        let mut acc = self.one_like();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Homogeneous components by weight, index `d` holding weight `d`.
    fn grades(&self) -> Vec<Self> {
        let mut parts = vec![self.zero_like(); self.max_weight as usize + 1];
        for (e, c) in &self.terms {
            parts[self.weight_of(e) as usize].terms.insert(e.clone(), c.clone());
        }
        parts
    }

    fn weight_zero_constant(&self) -> Option<F> {
        let zero = vec![0; self.vars.len()];
        let mut c = F::zero();
        for (e, k) in &self.terms {
            if self.weight_of(e) == 0 {
                if *e != zero {
                    return None;
                }
                c = k.clone();
            }
        }
        Some(c)
    }

    fn sum(parts: Vec<Self>, shape: &Self) -> Self {
        let mut s = shape.zero_like();
        for p in parts {
            for (e, c) in p.terms {
                s.add_term(e, c);
            }
        }
        s
    }

    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.weight_zero_constant().is_some_and(|c| c.is_zero()) {
            return Err(SeriesError::WeightZeroPart("exp", "0"));
        }
        let a = self.grades();
        let mut e = vec![self.one_like()];
        for d in 1..=self.max_weight as usize {
            let mut acc = self.zero_like();
            for k in 1..=d {
                if a[k].is_zero() || e[d - k].is_zero() {
                    continue;
                }
                acc = &acc + &(&a[k] * &e[d - k]).scale_rational(&int(k as i64));
            }
            e.push(acc.scale_rational(&Rational::new(1.into(), (d as i64).into())));
        }
        Ok(Self::sum(e, self))
    }

    pub fn log(&self) -> Result<Self, SeriesError> {
        if !self.weight_zero_constant().is_some_and(|c| c.is_one()) {
            return Err(SeriesError::WeightZeroPart("log", "1"));
        }
        let a = self.grades();
        let mut l = vec![self.zero_like()];
        for d in 1..=self.max_weight as usize {
            let mut acc = self.zero_like();
            for k in 1..d {
                if l[k].is_zero() || a[d - k].is_zero() {
                    continue;
                }
                acc = &acc + &(&l[k] * &a[d - k]).scale_rational(&int(k as i64));
            }
            let ld = &a[d] - &acc.scale_rational(&Rational::new(1.into(), (d as i64).into()));
            l.push(ld);
        }
        Ok(Self::sum(l, self))
    }

    /// `self^alpha` for a series whose weight-zero part is 1.
    pub fn pow(&self, alpha: &Rational) -> Result<Self, SeriesError> {
        if !self.weight_zero_constant().is_some_and(|c| c.is_one()) {
            return Err(SeriesError::WeightZeroPart("pow", "1"));
        }
        let a = self.grades();
        let mut b = vec![self.one_like()];
        for d in 1..=self.max_weight as usize {
            let mut acc = self.zero_like();
            for k in 1..=d {
                if a[k].is_zero() || b[d - k].is_zero() {
                    continue;
                }
                let w = alpha * int(k as i64) - int((d - k) as i64);
                acc = &acc + &(&a[k] * &b[d - k]).scale_rational(&w);
            }
            b.push(acc.scale_rational(&Rational::new(1.into(), (d as i64).into())));
        }
        Ok(Self::sum(b, self))
    }

    /// Multiplicative inverse; the weight-zero part must be a nonzero constant.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let c = self
            .weight_zero_constant()
            .filter(|c| !c.is_zero())
            .ok_or(SeriesError::WeightZeroPart("inverse", "nonzero"))?;
        let cinv = c.checked_inv()?;
        let a = self.grades();
        let mut b = vec![self.constant_like(cinv.clone())];
        for d in 1..=self.max_weight as usize {
            let mut acc = self.zero_like();
            for k in 1..=d {
                if a[k].is_zero() || b[d - k].is_zero() {
                    continue;
                }
                acc = &acc + &(&a[k] * &b[d - k]);
            }
            b.push(acc.scale(&-cinv.clone()));
        }
        Ok(Self::sum(b, self))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_shape(other)?;
        self.checked_mul(&other.inverse()?)
    }

    /// `outer(inner)` for a univariate `outer`; `inner` must have no terms of
    /// weight zero.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Self, SeriesError> {
        if outer.vars.len() != 1 {
            return Err(SeriesError::NotUnivariate);
        }
        let min_weight = inner.terms.keys().map(|e| inner.weight_of(e)).min().unwrap_or(u32::MAX);
        if min_weight == 0 {
            return Err(SeriesError::WeightZeroPart("compose", "0"));
        }
        let coeffs = outer.coeff_list();
        // the first omitted outer term has weight at least min_weight * (N + 1)
        let exact = (outer.max_weight as u64 + 1) * min_weight as u64 - 1;
        let max = inner.max_weight.min(exact.min(u32::MAX as u64) as u32);
        let inner = inner.truncate(max);
        let mut acc = inner.zero_like();
        for c in coeffs.iter().rev() {
            acc = &(&acc * &inner) + &inner.constant_like(c.clone());
        }
        Ok(acc)
    }

    /// Partial derivative; the truncation drops by the variable's weight.
    pub fn derivative(&self, var: &str) -> Result<Self, SeriesError> {
        let idx = self.var_index(var)?;
        let max = self.max_weight.saturating_sub(self.weights[idx]);
        let mut s = Self { max_weight: max, ..self.clone_shape() };
        for (e, c) in &self.terms {
            if e[idx] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[idx] -= 1;
            s.add_term(f, c.clone() * F::from_rational(int(e[idx] as i64)));
        }
        Ok(s)
    }

    /// Replaces each monomial by `f(exps)`: a coefficient and exponent
    /// vector in the target shape (or nothing to drop the term).
    pub fn map_monomials(
        &self,
        target: &Self,
        mut f: impl FnMut(&[u32]) -> Option<(Vec<u32>, F)>,
    ) -> Self {
        let mut s = target.zero_like();
        for (e, c) in &self.terms {
            if let Some((g, k)) = f(e) {
                s.add_term(g, c.clone() * k);
            }
        }
        s
    }

    /// Re-expresses the series in a shape containing all of its variables.
    pub fn embed(&self, target: &Self) -> Result<Self, SeriesError> {
        let idx: Vec<usize> =
            self.vars.iter().map(|v| target.var_index(v)).collect::<Result<_, _>>()?;
        Ok(self.map_monomials(target, |e| {
            let mut g = vec![0; target.vars.len()];
            for (k, &x) in e.iter().enumerate() {
                g[idx[k]] += x;
            }
            Some((g, F::one()))
        }))
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let exps: Map<String, Value> = self
                    .vars
                    .iter()
                    .zip(e)
                    .filter(|(_, x)| **x > 0)
                    .map(|(v, x)| (v.clone(), json!(x)))
                    .collect();
                json!({ "exponents": exps, "coeff": c.to_json() })
            })
            .collect();
        Value::Array(terms)
    }
}

impl<F: Field> fmt::Display for Series<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O({})", self.max_weight + 1);
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (v, x) in self.vars.iter().zip(e) {
                match x {
                    0 => {}
                    1 => write!(f, "*{v}")?,
                    _ => write!(f, "*{v}^{x}")?,
                }
            }
        }
        write!(f, " + O({})", self.max_weight + 1)
    }
}

impl RSeries {
    /// Coerces the coefficients into another field.
    pub fn lift<G: Field>(&self) -> Series<G> {
        Series {
            vars: self.vars.clone(),
            weights: self.weights.clone(),
            max_weight: self.max_weight,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), G::from_rational(c.clone()))).collect(),
        }
    }

    /// Generalized binomial series `(1 + x)^alpha` in one variable.
    pub fn binomial_series(var: &str, alpha: &Rational, max_degree: u32) -> Self {
        Self::from_coeffs(var, (0..=max_degree).map(|k| gen_binomial(alpha, k)).collect())
    }

    /// Reads the terms whose `fixed` exponents match as a polynomial in the
    /// remaining variables, whose names must parse as ring variables.
    pub fn slice_polynomial(
        &self,
        fixed: &[(&str, u32)],
        ring: RingDescriptor,
    ) -> Result<Polynomial, SeriesError> {
        let fixed_idx: Vec<(usize, u32)> = fixed
            .iter()
            .map(|(v, e)| Ok((self.var_index(v)?, *e)))
            .collect::<Result<_, SeriesError>>()?;
        let mut parsed: Vec<Option<Variable>> = Vec::with_capacity(self.vars.len());
        for (k, name) in self.vars.iter().enumerate() {
            if fixed_idx.iter().any(|(i, _)| *i == k) {
                parsed.push(None);
            } else {
                parsed.push(Some(name.parse()?));
            }
        }
        let mut terms = Vec::new();
        for (e, c) in &self.terms {
            if fixed_idx.iter().any(|&(i, x)| e[i] != x) {
                continue;
            }
            let m = Monomial::from_powers(
                parsed
                    .iter()
                    .zip(e)
                    .filter_map(|(v, x)| v.map(|v| (v, *x as i32)))
                    .filter(|(_, x)| *x != 0),
            );
            terms.push((m, c.clone()));
        }
        Ok(Polynomial::from_terms(ring, terms)?)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<F: Field> std::ops::$tr for &Series<F> {
            type Output = Series<F>;
            /// Panics when the operands have different variables or weights.
            fn $method(self, other: &Series<F>) -> Series<F> {
                self.$checked(other).expect("incompatible series")
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl<F: Field> std::ops::Neg for &Series<F> {
    type Output = Series<F>;
    fn neg(self) -> Series<F> {
        self.scale(&-F::one())
    }
}

//! Sparse multivariate polynomials (Laurent in `phi` where the ring allows it)
//! over the named variable alphabets used throughout the crate.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::coeff::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(RingDescriptor, RingDescriptor),
    #[error("variable {var}^{exp} is not admissible in {ring}")]
    Inadmissible { var: Variable, exp: i32, ring: RingDescriptor },
    #[error("cannot differentiate {0} at a negative power")]
    LaurentDerivative(Variable),
    #[error("{0} has no phi grading")]
    NoPhi(RingDescriptor),
    #[error("cannot invert non-monomial substitution image for {0}")]
    NonInvertibleImage(Variable),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Generator of one of the polynomial rings. Variant order fixes the printing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    /// Surface generator: `i` boundary circles, Euler characteristic `-j`.
    Q(i32, i32),
    Phi,
    Xi(i32),
    P(i32, i32),
    Psi,
    Kappa(i32),
    Z,
    T,
    /// Faber-Zagier auxiliary variable `p_i`, `i` not congruent to 2 mod 3.
    FZP(i32),
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::Q(i, j) => write!(f, "q[{i},{j}]"),
            Variable::Phi => write!(f, "phi"),
            Variable::Xi(i) => write!(f, "xi[{i}]"),
            Variable::P(i, j) => write!(f, "p[{i},{j}]"),
            Variable::Psi => write!(f, "psi"),
            Variable::Kappa(i) => write!(f, "kappa[{i}]"),
            Variable::Z => write!(f, "z"),
            Variable::T => write!(f, "t"),
            Variable::FZP(i) => write!(f, "fzp[{i}]"),
        }
    }
}

impl FromStr for Variable {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PolyError::Parse(format!("unknown variable {s:?}"));
        let s = s.trim();
        let (name, idx) = match s.find('[') {
            Some(pos) => {
                let inner = s[pos + 1..].strip_suffix(']').ok_or_else(err)?;
                let idx = inner
                    .split(',')
                    .map(|t| t.trim().parse::<i32>().map_err(|_| err()))
                    .collect::<Result<Vec<_>, _>>()?;
                (&s[..pos], idx)
            }
            None => (s, Vec::new()),
        };
        match (name, idx.as_slice()) {
            ("q", [i, j]) => Ok(Variable::Q(*i, *j)),
            ("phi", []) => Ok(Variable::Phi),
            ("xi", [i]) => Ok(Variable::Xi(*i)),
            ("p", [i, j]) => Ok(Variable::P(*i, *j)),
            ("psi", []) => Ok(Variable::Psi),
            ("kappa", [i]) => Ok(Variable::Kappa(*i)),
            ("z", []) => Ok(Variable::Z),
            ("t", []) => Ok(Variable::T),
            ("fzp", [i]) => Ok(Variable::FZP(*i)),
            _ => Err(err()),
        }
    }
}

/// The ambient ring of a polynomial. Determines which variables (and which
/// negative exponents) may occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RingDescriptor {
    LambdaQ,
    LambdaQHat,
    LambdaXi,
    LambdaXiHat,
    LambdaXiHatLaurentPhi,
    /// Tautological generators `p[i,j]`, `psi`. With a genus, generators with
    /// `j > 2g-2` are killed.
    PBasis { genus: Option<u32> },
    KappaRing,
    FZRing,
}

/// Outcome of checking a variable power against a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Admit,
    /// The generator is zero in this ring.
    Kill,
    Reject,
}

impl RingDescriptor {
    pub fn admission(&self, var: Variable, exp: i32) -> Admission {
        use Admission::*;
        if exp < 0 && !(var == Variable::Phi && *self == RingDescriptor::LambdaXiHatLaurentPhi) {
            return Reject;
        }
        let yes = |b: bool| if b { Admit } else { Reject };
        match (self, var) {
            (RingDescriptor::LambdaQ, Variable::Q(i, j)) => {
                yes(i >= 0 && j >= 0 && (i - j).rem_euclid(2) == 0)
            }
            (RingDescriptor::LambdaQHat, Variable::Q(i, j)) => yes(
                (i >= 0 && j >= 0 && (i - j).rem_euclid(2) == 0) || (i, j) == (0, -2) || (i, j) == (1, -1),
            ),
            (RingDescriptor::LambdaQ | RingDescriptor::LambdaQHat, Variable::Phi) => Admit,
            (RingDescriptor::LambdaXi, Variable::Xi(i)) => yes(i >= 0),
            (
                RingDescriptor::LambdaXiHat | RingDescriptor::LambdaXiHatLaurentPhi,
                Variable::Xi(i),
            ) => yes(i >= -1),
            (
                RingDescriptor::LambdaXi
                | RingDescriptor::LambdaXiHat
                | RingDescriptor::LambdaXiHatLaurentPhi,
                Variable::Phi,
            ) => Admit,
            (RingDescriptor::PBasis { genus }, Variable::P(i, j)) => {
                if (i - j).rem_euclid(2) != 0 {
                    Reject
                } else if i < 0 || j < 0 || genus.is_some_and(|g| j > 2 * g as i32 - 2) {
                    Kill
                } else {
                    Admit
                }
            }
            (RingDescriptor::PBasis { .. }, Variable::Psi) => Admit,
            (RingDescriptor::KappaRing, Variable::Kappa(i)) => yes(i >= 0),
            (RingDescriptor::FZRing, Variable::Kappa(i)) => yes(i >= 0),
            (RingDescriptor::FZRing, Variable::FZP(i)) => yes(i >= 1 && i % 3 != 2),
            (RingDescriptor::FZRing, Variable::T | Variable::Z) => Admit,
            _ => Reject,
        }
    }

    pub fn has_phi(&self) -> bool {
        self.admission(Variable::Phi, 1) == Admission::Admit
    }
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingDescriptor::LambdaQ => write!(f, "LambdaQ"),
            RingDescriptor::LambdaQHat => write!(f, "LambdaQHat"),
            RingDescriptor::LambdaXi => write!(f, "LambdaXi"),
            RingDescriptor::LambdaXiHat => write!(f, "LambdaXiHat"),
            RingDescriptor::LambdaXiHatLaurentPhi => write!(f, "LambdaXiHatLaurentPhi"),
            RingDescriptor::PBasis { genus: None } => write!(f, "PBasis"),
            RingDescriptor::PBasis { genus: Some(g) } => write!(f, "PBasis[g={g}]"),
            RingDescriptor::KappaRing => write!(f, "KappaRing"),
            RingDescriptor::FZRing => write!(f, "FZRing"),
        }
    }
}

impl FromStr for RingDescriptor {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "LambdaQ" => RingDescriptor::LambdaQ,
            "LambdaQHat" => RingDescriptor::LambdaQHat,
            "LambdaXi" => RingDescriptor::LambdaXi,
            "LambdaXiHat" => RingDescriptor::LambdaXiHat,
            "LambdaXiHatLaurentPhi" => RingDescriptor::LambdaXiHatLaurentPhi,
            "PBasis" => RingDescriptor::PBasis { genus: None },
            "KappaRing" => RingDescriptor::KappaRing,
            "FZRing" => RingDescriptor::FZRing,
            other => {
                let g = other
                    .strip_prefix("PBasis[g=")
                    .and_then(|r| r.strip_suffix(']'))
                    .and_then(|g| g.parse::<u32>().ok())
                    .ok_or_else(|| PolyError::Parse(format!("unknown ring {other:?}")))?;
                RingDescriptor::PBasis { genus: Some(g) }
            }
        })
    }
}

/// Product of variable powers, kept sorted by variable with no zero exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Variable, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Variable) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_powers<I: IntoIterator<Item = (Variable, i32)>>(powers: I) -> Self {
        let mut m = Monomial::one();
        for (v, e) in powers {
            m.bump(v, e);
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, v: Variable) -> i32 {
        match self.0.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(pos) => self.0[pos].1,
            Err(_) => 0,
        }
    }

    pub fn powers(&self) -> &[(Variable, i32)] {
        &self.0
    }

    /// Adds `delta` to the exponent of `v`.
    pub fn bump(&mut self, v: Variable, delta: i32) {
        if delta == 0 {
            return;
        }
        match self.0.binary_search_by(|(w, _)| w.cmp(&v)) {
            Ok(pos) => {
                self.0[pos].1 += delta;
                if self.0[pos].1 == 0 {
                    self.0.remove(pos);
                }
            }
            Err(pos) => self.0.insert(pos, (v, delta)),
        }
    }

    pub fn with(&self, changes: &[(Variable, i32)]) -> Monomial {
        let mut m = self.clone();
        for &(v, d) in changes {
            m.bump(v, d);
        }
        m
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.with(&other.0)
    }

    pub fn without(&self, v: Variable) -> Monomial {
        Monomial(self.0.iter().copied().filter(|(w, _)| *w != v).collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    ring: RingDescriptor,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(ring: RingDescriptor) -> Self {
        Self { ring, terms: BTreeMap::new() }
    }

    pub fn one(ring: RingDescriptor) -> Self {
        Self::constant(ring, Rational::one())
    }

    pub fn constant(ring: RingDescriptor, c: Rational) -> Self {
        let mut p = Self::zero(ring);
        p.add_term_unchecked(Monomial::one(), c);
        p
    }

    pub fn var(ring: RingDescriptor, v: Variable) -> Result<Self, PolyError> {
        Self::from_terms(ring, [(Monomial::var(v), Rational::one())])
    }

    /// Builds a polynomial, dropping killed generators and rejecting
    /// inadmissible ones.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(
        ring: RingDescriptor,
        terms: I,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(ring);
        for (m, c) in terms {
            if admit_monomial(ring, &m)? {
                p.add_term_unchecked(m, c);
            }
        }
        Ok(p)
    }

    pub(crate) fn add_term_unchecked(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn ring(&self) -> RingDescriptor {
        self.ring
    }

    /// Reinterprets the polynomial in another ring, re-checking every term.
    pub fn in_ring(&self, ring: RingDescriptor) -> Result<Self, PolyError> {
        Self::from_terms(ring, self.terms.iter().map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
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

    pub fn coefficient_of(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn variables(&self) -> Vec<Variable> {
        let mut vs: Vec<Variable> =
            self.terms.keys().flat_map(|m| m.powers().iter().map(|(v, _)| *v)).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut p = Self::zero(self.ring);
        if c.is_zero() {
            return p;
        }
        for (m, k) in &self.terms {
            p.terms.insert(m.clone(), k * c);
        }
        p
    }

    fn check_ring(&self, other: &Self) -> Result<(), PolyError> {
        if self.ring != other.ring {
            return Err(PolyError::RingMismatch(self.ring, other.ring));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        let mut p = self.clone();
        for (m, c) in &other.terms {
            p.add_term_unchecked(m.clone(), c.clone());
        }
        Ok(p)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.checked_add(&other.scale(&-Rational::one()))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_ring(other)?;
        let mut p = Self::zero(self.ring);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.mul(m2);
                if admit_monomial(self.ring, &m)? {
                    p.add_term_unchecked(m, c1 * c2);
                }
            }
        }
        Ok(p)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.ring);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn partial_derivative(&self, v: Variable) -> Result<Self, PolyError> {
        if self.ring.admission(v, 1) == Admission::Reject {
            return Err(PolyError::Inadmissible { var: v, exp: 1, ring: self.ring });
        }
        let mut p = Self::zero(self.ring);
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e < 0 {
                return Err(PolyError::LaurentDerivative(v));
            }
            if e > 0 {
                p.add_term_unchecked(m.with(&[(v, -1)]), c * Rational::from_integer(e.into()));
            }
        }
        Ok(p)
    }

    /// Simultaneous substitution. Variables without a rule are carried over
    /// and must be admissible (or killed) in `target`.
    pub fn substitute(
        &self,
        rules: &BTreeMap<Variable, Polynomial>,
        target: RingDescriptor,
    ) -> Result<Self, PolyError> {
        for image in rules.values() {
            if image.ring != target {
                return Err(PolyError::RingMismatch(image.ring, target));
            }
        }
        let mut out = Self::zero(target);
        let mut power_cache: BTreeMap<(Variable, i32), Polynomial> = BTreeMap::new();
        'terms: for (m, c) in &self.terms {
            let mut acc = Self::constant(target, c.clone());
            let mut residual = Monomial::one();
            for &(v, e) in m.powers() {
                match rules.get(&v) {
                    Some(image) => {
                        let factor = match power_cache.get(&(v, e)) {
                            Some(f) => f.clone(),
                            None => {
                                let f = if e >= 0 {
                                    image.pow(e as u32)
                                } else {
                                    image.monomial_inverse(v)?.pow((-e) as u32)
                                };
                                power_cache.insert((v, e), f.clone());
                                f
                            }
                        };
                        acc = &acc * &factor;
                        if acc.is_zero() {
                            continue 'terms;
                        }
                    }
                    None => match target.admission(v, e) {
                        Admission::Admit => residual.bump(v, e),
                        Admission::Kill => continue 'terms,
                        Admission::Reject => {
                            return Err(PolyError::Inadmissible { var: v, exp: e, ring: target })
                        }
                    },
                }
            }
            for (am, ac) in acc.terms {
                let full = am.mul(&residual);
                if admit_monomial(target, &full)? {
                    out.add_term_unchecked(full, ac);
                }
            }
        }
        Ok(out)
    }

    fn monomial_inverse(&self, v: Variable) -> Result<Self, PolyError> {
        if self.terms.len() != 1 {
            return Err(PolyError::NonInvertibleImage(v));
        }
        let (m, c) = self.terms.iter().next().expect("one term");
        let inv = Monomial::from_powers(m.powers().iter().map(|&(w, e)| (w, -e)));
        Self::from_terms(self.ring, [(inv, c.recip())])
    }

    /// Splits by the exponent of `phi`; pieces are phi-free.
    pub fn phi_grade(&self) -> Result<BTreeMap<i32, Polynomial>, PolyError> {
        if !self.ring.has_phi() {
            return Err(PolyError::NoPhi(self.ring));
        }
        let mut out: BTreeMap<i32, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let d = m.exponent(Variable::Phi);
            out.entry(d)
                .or_insert_with(|| Self::zero(self.ring))
                .add_term_unchecked(m.without(Variable::Phi), c.clone());
        }
        Ok(out)
    }

    /// Substitutes rational values for some variables.
    pub fn evaluate(
        &self,
        values: &[(Variable, Rational)],
        target: RingDescriptor,
    ) -> Result<Self, PolyError> {
        let rules = values
            .iter()
            .map(|(v, x)| (*v, Self::constant(target, x.clone())))
            .collect();
        self.substitute(&rules, target)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient_of(&Monomial::one())
    }

    pub fn parse(s: &str, ring: RingDescriptor) -> Result<Self, PolyError> {
        let terms = parse_terms(s)?;
        Self::from_terms(ring, terms)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let vars: Map<String, Value> =
                    m.powers().iter().map(|(v, e)| (v.to_string(), json!(e))).collect();
                json!({ "coeff": c.to_string(), "vars": vars })
            })
            .collect();
        json!({ "ring": self.ring.to_string(), "terms": terms })
    }

    pub fn from_json(value: &Value) -> Result<Self, PolyError> {
        let bad = |what: &str| PolyError::Parse(format!("polynomial JSON: {what}"));
        let ring: RingDescriptor =
            value.get("ring").and_then(Value::as_str).ok_or_else(|| bad("ring"))?.parse()?;
        let mut terms = Vec::new();
        for t in value.get("terms").and_then(Value::as_array).ok_or_else(|| bad("terms"))? {
            let c = t.get("coeff").and_then(Value::as_str).ok_or_else(|| bad("coeff"))?;
            let c = parse_rational(c).map_err(|e| PolyError::Parse(e.to_string()))?;
            let mut m = Monomial::one();
            for (name, e) in t.get("vars").and_then(Value::as_object).ok_or_else(|| bad("vars"))? {
                let e = e.as_i64().ok_or_else(|| bad("exponent"))? as i32;
                m.bump(name.parse()?, e);
            }
            terms.push((m, c));
        }
        Self::from_terms(ring, terms)
    }
}

fn admit_monomial(ring: RingDescriptor, m: &Monomial) -> Result<bool, PolyError> {
    let mut keep = true;
    for &(v, e) in m.powers() {
        match ring.admission(v, e) {
            Admission::Admit => {}
            Admission::Kill => keep = false,
            Admission::Reject => return Err(PolyError::Inadmissible { var: v, exp: e, ring }),
        }
    }
    Ok(keep)
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    /// Panics on ring mismatch; use [`Polynomial::checked_add`] otherwise.
    fn add(self, o: &Polynomial) -> Polynomial {
        self.checked_add(o).expect("polynomial ring mismatch")
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        self.checked_sub(o).expect("polynomial ring mismatch")
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        self.checked_mul(o).expect("polynomial ring mismatch")
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            let body = if m.is_one() {
                mag.to_string()
            } else if mag.is_one() {
                m.to_string()
            } else {
                format!("{mag}*{m}")
            };
            match (k, negative) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

/// Parses `[-]term (+|- term)*` where a term is a `*`-product of rationals and
/// `var[^int]` factors.
fn parse_terms(s: &str) -> Result<Vec<(Monomial, Rational)>, PolyError> {
    let err = |msg: &str| PolyError::Parse(format!("{msg} in {s:?}"));
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
    if chars.is_empty() {
        return Err(err("empty input"));
    }
    let mut pieces: Vec<(bool, String)> = Vec::new();
    let mut depth = 0;
    let mut current = String::new();
    let mut negative = false;
    for (idx, &ch) in chars.iter().enumerate() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ => {}
        }
        // a sign starts a new term unless it follows '^' or opens an index
        let prev = if idx > 0 { Some(chars[idx - 1]) } else { None };
        let is_separator = depth == 0 && (ch == '+' || ch == '-') && prev != Some('^');
        if is_separator {
            if !current.is_empty() {
                pieces.push((negative, std::mem::take(&mut current)));
            } else if idx > 0 {
                return Err(err("dangling sign"));
            }
            negative = ch == '-';
            continue;
        }
        current.push(ch);
    }
    if current.is_empty() {
        return Err(err("trailing sign"));
    }
    pieces.push((negative, current));

    let mut out = Vec::new();
    for (neg, body) in pieces {
        let mut coeff = if neg { -Rational::one() } else { Rational::one() };
        let mut mono = Monomial::one();
        for factor in body.split('*') {
            if factor.is_empty() {
                return Err(err("empty factor"));
            }
            if factor.starts_with(|c: char| c.is_ascii_digit()) {
                coeff *= parse_rational(factor).map_err(|_| err("bad number"))?;
                continue;
            }
            let (name, exp) = match factor.rsplit_once('^') {
                Some((n, e)) => (n, e.parse::<i32>().map_err(|_| err("bad exponent"))?),
                None => (factor, 1),
            };
            mono.bump(name.parse()?, exp);
        }
        out.push((mono, coeff));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{int, rat};
    use proptest::prelude::*;
    use RingDescriptor::*;

    fn p(s: &str, ring: RingDescriptor) -> Polynomial {
        Polynomial::parse(s, ring).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let a = p("q[3,1]", LambdaQ);
        assert_eq!(&a * &a, p("q[3,1]^2", LambdaQ));
        let s = p("q[0,2] + phi", LambdaQ);
        let d = p("q[0,2] - phi", LambdaQ);
        assert_eq!(&s * &d, p("q[0,2]^2 - phi^2", LambdaQ));
        let x = p("3*p[3,1]", PBasis { genus: None });
        let y = p("2*p[3,1]", PBasis { genus: None });
        assert_eq!(&x - &y, p("p[3,1]", PBasis { genus: None }));
    }

    #[test]
    fn ring_mismatch_is_an_error() {
        let a = p("phi", LambdaQ);
        let b = p("phi", LambdaXi);
        assert!(matches!(a.checked_add(&b), Err(PolyError::RingMismatch(_, _))));
        assert!(a.checked_mul(&b).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(Polynomial::parse("q[1,2]", LambdaQ).is_err());
        assert!(Polynomial::parse("q[1,-1]", LambdaQ).is_err());
        assert!(Polynomial::parse("q[1,-1]*q[0,-2]", LambdaQHat).is_ok());
        assert!(Polynomial::parse("q[2,-2]", LambdaQHat).is_err());
        assert!(Polynomial::parse("xi[-1]", LambdaXi).is_err());
        assert!(Polynomial::parse("xi[-1]", LambdaXiHat).is_ok());
        assert!(Polynomial::parse("phi^-1", LambdaXiHat).is_err());
        assert!(Polynomial::parse("phi^-1*xi[-1]", LambdaXiHatLaurentPhi).is_ok());
        assert!(Polynomial::parse("xi[2]^-1", LambdaXiHatLaurentPhi).is_err());
        assert!(Polynomial::parse("fzp[2]", FZRing).is_err());
        assert!(Polynomial::parse("fzp[4]*t", FZRing).is_ok());
        // killed generators vanish rather than error
        assert!(Polynomial::parse("p[0,2]", PBasis { genus: Some(1) }).unwrap().is_zero());
        assert!(!Polynomial::parse("p[0,2]", PBasis { genus: Some(2) }).unwrap().is_zero());
    }

    #[test]
    fn derivative_examples() {
        let f = p("q[3,1]^2", LambdaQ);
        assert_eq!(f.partial_derivative(Variable::Q(3, 1)).unwrap(), p("2*q[3,1]", LambdaQ));
        let g = p("q[3,1]*q[1,1]", LambdaQ);
        assert_eq!(g.partial_derivative(Variable::Q(1, 1)).unwrap(), p("q[3,1]", LambdaQ));
        let h = p("phi^3", LambdaQ);
        assert_eq!(h.partial_derivative(Variable::Phi).unwrap(), p("3*phi^2", LambdaQ));
        let l = p("phi^-1", LambdaXiHatLaurentPhi);
        assert_eq!(l.partial_derivative(Variable::Phi), Err(PolyError::LaurentDerivative(Variable::Phi)));
    }

    #[test]
    fn substitute_examples() {
        let target = LambdaXiHatLaurentPhi;
        let f = p("q[0,2]^2", LambdaQ);
        let rules = BTreeMap::from([(Variable::Q(0, 2), p("xi[1] + phi", target))]);
        assert_eq!(f.substitute(&rules, target).unwrap(), p("xi[1]^2 + 2*xi[1]*phi + phi^2", target));

        let g = p("xi[0]*phi", LambdaXi);
        let out = g.evaluate(&[(Variable::Xi(0), int(2))], LambdaXi).unwrap();
        assert_eq!(out, p("2*phi", LambdaXi));

        let h = p("q[0,-2]", LambdaQHat);
        let rules = BTreeMap::from([(Variable::Q(0, -2), p("xi[-1] + phi^-1", target))]);
        assert_eq!(h.substitute(&rules, target).unwrap(), p("xi[-1] + phi^-1", target));

        // a residual variable that the target does not know about
        let bad = p("q[3,1]", LambdaQ);
        assert!(bad.substitute(&BTreeMap::new(), LambdaXi).is_err());
    }

    #[test]
    fn substitute_inverts_monomial_images() {
        let target = LambdaXiHatLaurentPhi;
        let f = p("phi^-2*xi[1]", target);
        let rules = BTreeMap::from([(Variable::Phi, p("2*phi", target))]);
        assert_eq!(f.substitute(&rules, target).unwrap(), p("1/4*phi^-2*xi[1]", target));
        let rules = BTreeMap::from([(Variable::Phi, p("phi + 1", target))]);
        assert!(f.substitute(&rules, target).is_err());
    }

    #[test]
    fn coefficient_examples() {
        let f = p("90*q[0,2]", LambdaQ);
        assert_eq!(f.coefficient_of(&Monomial::var(Variable::Q(0, 2))), int(90));
        let g = p("q[3,1]^2", LambdaQ);
        assert_eq!(g.coefficient_of(&Monomial::var(Variable::Q(0, 2))), int(0));
    }

    #[test]
    fn phi_grade_examples() {
        let ring = LambdaXiHatLaurentPhi;
        let f = p("xi[1] + 2*xi[1]*phi + phi^2", ring);
        let g = f.phi_grade().unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g[&0], p("xi[1]", ring));
        assert_eq!(g[&1], p("2*xi[1]", ring));
        assert_eq!(g[&2], p("1", ring));
        let h = p("phi^-1*xi[-1]", ring).phi_grade().unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[&-1], p("xi[-1]", ring));
        assert!(Polynomial::zero(ring).phi_grade().unwrap().is_empty());
        assert!(Polynomial::zero(KappaRing).phi_grade().is_err());
    }

    #[test]
    fn text_format() {
        let ring = LambdaXiHatLaurentPhi;
        let f = Polynomial::from_terms(
            ring,
            [
                (Monomial::var(Variable::Xi(2)), int(-90)),
                (Monomial::from_powers([(Variable::Phi, 2), (Variable::Xi(1), 1)]), int(3)),
                (Monomial::from_powers([(Variable::Phi, -1)]), rat(1, 2)),
                (Monomial::one(), rat(-7, 3)),
            ],
        )
        .unwrap();
        let text = f.to_string();
        assert_eq!(text, "-7/3 + 1/2*phi^-1 + 3*phi^2*xi[1] - 90*xi[2]");
        assert_eq!(Polynomial::parse(&text, ring).unwrap(), f);
        assert_eq!(Polynomial::zero(ring).to_string(), "0");
        assert_eq!(p("-q[3,1]", LambdaQ).to_string(), "-q[3,1]");
        assert_eq!(p("2 * q[3,1] * 3", LambdaQ).to_string(), "6*q[3,1]");
    }

    #[test]
    fn parse_rejects_garbage() {
        for bad in ["", "q[3,1]+", "q[3", "3**q[1,1]", "foo", "q[1,1]^x"] {
            assert!(Polynomial::parse(bad, LambdaQ).is_err(), "{bad}");
        }
    }

    #[test]
    fn json_format() {
        let f = p("-90*q[0,2] + 1/2*q[3,1]^2*phi", LambdaQ);
        let j = f.to_json();
        assert_eq!(j["ring"], "LambdaQ");
        assert_eq!(Polynomial::from_json(&j).unwrap(), f);
        let g = p("p[3,1]", PBasis { genus: Some(3) });
        assert_eq!(Polynomial::from_json(&g.to_json()).unwrap(), g);
    }

    const QVARS: [Variable; 5] =
        [Variable::Q(3, 1), Variable::Q(1, 1), Variable::Q(2, 0), Variable::Q(0, 2), Variable::Phi];

    fn lambda_q_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec(
            (prop::collection::vec(0i32..3, QVARS.len()), -5i64..6, 1i64..4),
            0..20,
        )
        .prop_map(|terms| {
            Polynomial::from_terms(
                LambdaQ,
                terms.into_iter().map(|(exps, n, d)| {
                    (Monomial::from_powers(QVARS.iter().copied().zip(exps)), rat(n, d))
                }),
            )
            .unwrap()
        })
    }

    fn laurent_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((-2i32..3, -1i32..3, 0i32..3, -4i64..5), 0..20).prop_map(|terms| {
            Polynomial::from_terms(
                LambdaXiHatLaurentPhi,
                terms.into_iter().map(|(pe, xi, xe, c)| {
                    (Monomial::from_powers([(Variable::Phi, pe), (Variable::Xi(xi), xe)]), int(c))
                }),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in lambda_q_poly(), b in lambda_q_poly(), c in lambda_q_poly()) {
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
        }

        #[test]
        fn identity_substitution(a in laurent_poly()) {
            let ring = a.ring();
            let rules: BTreeMap<Variable, Polynomial> = a
                .variables()
                .into_iter()
                .map(|v| (v, Polynomial::var(ring, v).unwrap()))
                .collect();
            prop_assert_eq!(a.substitute(&rules, ring).unwrap(), a.clone());
            prop_assert_eq!(a.substitute(&BTreeMap::new(), ring).unwrap(), a);
        }

        #[test]
        fn phi_grade_reassembles(a in laurent_poly()) {
            let ring = a.ring();
            let mut sum = Polynomial::zero(ring);
            for (d, piece) in a.phi_grade().unwrap() {
                let phi_d = Polynomial::from_terms(ring, [(Monomial::from_powers([(Variable::Phi, d)]), int(1))]).unwrap();
                sum = &sum + &(&phi_d * &piece);
            }
            prop_assert_eq!(sum, a);
        }

        #[test]
        fn leibniz_rule(a in lambda_q_poly(), b in lambda_q_poly(), k in 0usize..5) {
            let v = QVARS[k];
            let lhs = (&a * &b).partial_derivative(v).unwrap();
            let rhs = &(&a.partial_derivative(v).unwrap() * &b) + &(&a * &b.partial_derivative(v).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn text_round_trip(a in laurent_poly()) {
            let text = a.to_string();
            let back = Polynomial::parse(&text, a.ring()).unwrap();
            prop_assert_eq!(back.to_string(), text);
            prop_assert_eq!(back, a);
        }
    }
}

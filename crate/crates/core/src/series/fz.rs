use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::{RSeries, SeriesError};
use crate::coeff::{factorial, int, pow_rational, Rational};
use crate::polyring::{Polynomial, RingDescriptor, Variable};

/// `(6n)! / ((3n)! (2n)!)`.
pub fn fz_coefficient(n: u32) -> Rational {
    let n = n as u64;
    factorial(6 * n) / (factorial(3 * n) * factorial(2 * n))
}

/// `A(z) = sum (6n)!/((3n)!(2n)!) (z/72)^n` to `z^order`.
pub fn faber_zagier_a(order: u32) -> RSeries {
    RSeries::from_coeffs(
        "z",
        (0..=order).map(|n| fz_coefficient(n) / pow_rational(&int(72), n as i32)).collect(),
    )
}

/// `beta_{2n}` for `n = 1..=max_n`, read off `log A(9 z^2)`.
pub fn beta_coefficients(max_n: u32) -> Result<Vec<Rational>, SeriesError> {
    if max_n > 6 {
        return Err(SeriesError::Bound(format!("beta index {max_n} > 6")));
    }
    let a = faber_zagier_a(max_n);
    let inner = RSeries::univariate("z", 2 * max_n).monomial_like(&[("z", 2)], int(9))?;
    let log = RSeries::compose(&a, &inner)?.log()?;
    Ok((1..=max_n)
        .map(|n| {
            let n64 = n as u64;
            log.coeff(&[2 * n]) * factorial(3 * n64) * factorial(2 * n64)
        })
        .collect())
}

/// `beta_m`, zero for odd `m`.
pub fn beta(m: u32) -> Result<Rational, SeriesError> {
    if m % 2 == 1 {
        return Ok(Rational::zero());
    }
    if m == 0 {
        return Ok(Rational::zero());
    }
    Ok(beta_coefficients(m / 2)?.pop().expect("nonempty"))
}

/// `[exp(-{log A(scale z)}_kappa)]_{z^k}` as a polynomial in the kappa classes.
pub fn top_fz_relation(k: u32, scale: &Rational) -> Polynomial {
    let kappas: Vec<String> = (1..=k).map(|i| Variable::Kappa(i as i32).to_string()).collect();
    let mut names = vec!["z"];
    names.extend(kappas.iter().map(String::as_str));
    let mut weights = vec![0; names.len()];
    weights[0] = 1;
    let shape = RSeries::new(&names, &weights, k);

    let log_a = faber_zagier_a(k).log().expect("A has constant term 1");
    let mut gamma = shape.zero_like();
    for n in 1..=k {
        let c = log_a.coeff(&[n]) * pow_rational(scale, n as i32);
        let mut e = vec![0; names.len()];
        e[0] = n;
        e[n as usize] = 1;
        gamma.add_term(e, c);
    }
    let ex = (-&gamma).exp().expect("gamma has no weight-zero part");
    ex.slice_polynomial(&[("z", k)], RingDescriptor::KappaRing)
        .expect("kappa names parse")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FZRelation {
    pub genus: i64,
    pub n: u32,
    pub sigma: Vec<u32>,
    pub relation: Polynomial,
}

impl FZRelation {
    pub fn to_json(&self) -> Value {
        json!({
            "genus": self.genus,
            "n": self.n,
            "sigma": self.sigma,
            "relation": self.relation.to_json(),
        })
    }
}

/// Rejects partitions with parts congruent to 2 mod 3 and indices outside
/// the range where the relation holds.
pub fn check_fz_index(g: i64, n: u32, sigma: &[u32]) -> Result<(), SeriesError> {
    if let Some(p) = sigma.iter().find(|&&p| p == 0 || p % 3 == 2) {
        return Err(SeriesError::InvalidFzIndex(format!("part {p} of sigma is not allowed")));
    }
    let size: i64 = sigma.iter().map(|&p| p as i64).sum();
    let n = n as i64;
    if g - 1 + size >= 3 * n {
        return Err(SeriesError::InvalidFzIndex(format!("g - 1 + |sigma| = {} >= 3n = {}", g - 1 + size, 3 * n)));
    }
    if (g - n - size - 1).rem_euclid(2) != 0 {
        return Err(SeriesError::InvalidFzIndex(format!(
            "parity: g = {g} but n + |sigma| + 1 = {}",
            n + size + 1
        )));
    }
    Ok(())
}

fn sigma_vars(sigma: &[u32]) -> Vec<u32> {
    let mut parts = sigma.to_vec();
    parts.sort_unstable();
    parts.dedup();
    parts
}

/// `log Psi(t, p)` restricted to the `p_i` with `i` in `parts`, in total
/// degree at most `max_weight`.
fn log_psi(parts: &[u32], max_weight: u32) -> RSeries {
    let names: Vec<String> = std::iter::once("t".to_string())
        .chain(parts.iter().map(|i| Variable::FZP(*i as i32).to_string()))
        .collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let shape = RSeries::new(&refs, &vec![1; refs.len()], max_weight);

    let mut s1 = shape.zero_like();
    let mut s2 = shape.zero_like();
    for m in 0..=max_weight {
        let mut e = vec![0; refs.len()];
        e[0] = m;
        let c = fz_coefficient(m);
        let m6 = 6 * m as i64;
        s2.add_term(e.clone(), c.clone() * Rational::new((m6 + 1).into(), (m6 - 1).into()));
        s1.add_term(e, c);
    }
    let mut p3 = shape.one_like();
    let mut p1 = shape.zero_like();
    for (k, &part) in parts.iter().enumerate() {
        let mut e = vec![0; refs.len()];
        e[k + 1] = 1;
        e[0] = part / 3;
        match part % 3 {
            0 => p3.add_term(e, Rational::one()),
            _ => p1.add_term(e, Rational::one()),
        }
    }
    let psi = &(&p3 * &s1) + &(&p1 * &s2);
    psi.log().expect("Psi has constant term 1")
}

/// The coefficients `alpha_n(sigma)` of `log Psi`, keyed by (partition, n),
/// for partitions built from `parts` and total degree `n + len(sigma)` at most
/// `max_weight`.
pub fn fz_alpha(parts: &[u32], max_weight: u32) -> BTreeMap<(Vec<u32>, u32), Rational> {
    let parts = sigma_vars(parts);
    let log = log_psi(&parts, max_weight);
    log.terms()
        .map(|(e, c)| {
            let mut sigma = Vec::new();
            for (k, &part) in parts.iter().enumerate() {
                sigma.extend(std::iter::repeat_n(part, e[k + 1] as usize));
            }
            ((sigma, e[0]), c.clone())
        })
        .collect()
}

/// `[exp(-gamma)]_{t^n p^sigma}` with `kappa_0 = 2g - 2`.
pub fn general_fz_relation(g: i64, n: u32, sigma: &[u32]) -> Result<FZRelation, SeriesError> {
    check_fz_index(g, n, sigma)?;
    let parts = sigma_vars(sigma);
    let max_weight = n + sigma.len() as u32;
    let log = log_psi(&parts, max_weight);

    let mut names: Vec<String> = log.vars().to_vec();
    let base = names.len();
    names.extend((0..=max_weight).map(|i| Variable::Kappa(i as i32).to_string()));
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut weights = vec![1; base];
    weights.extend(vec![0; max_weight as usize + 1]);
    let shape = RSeries::new(&refs, &weights, max_weight);

    // gamma: tag each t^a p^tau term of log Psi with kappa_a
    let gamma = log.map_monomials(&shape, |e| {
        let mut f = e.to_vec();
        f.resize(refs.len(), 0);
        f[base + e[0] as usize] = 1;
        Some((f, Rational::one()))
    });
    let ex = (-&gamma).exp()?;
    let mut fixed: Vec<(&str, u32)> = vec![("t", n)];
    for (k, &part) in parts.iter().enumerate() {
        let mult = sigma.iter().filter(|&&p| p == part).count() as u32;
        fixed.push((refs[k + 1], mult));
    }
    let raw = ex.slice_polynomial(&fixed, RingDescriptor::KappaRing)?;
    let relation = raw.evaluate(&[(Variable::Kappa(0), int(2 * g - 2))], RingDescriptor::KappaRing)?;
    let mut sigma = sigma.to_vec();
    sigma.sort_unstable_by(|a, b| b.cmp(a));
    Ok(FZRelation { genus: g, n, sigma, relation })
}

//! Orientable surfaces with labeled boundary, the gluing and capping maps on
//! formal sums of them, and the evaluation into the q-rings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::coeff::Rational;
use crate::operators::{apply_d1, apply_d2, DiffOperator, OpError};
use crate::polyring::{Monomial, PolyError, Polynomial, RingDescriptor, Variable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub genus: u32,
    pub labels: BTreeSet<u32>,
}

impl Component {
    pub fn boundaries(&self) -> usize {
        self.labels.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.labels.len() as i64
    }
}

/// A possibly disconnected surface. Labels are distinct across components.
#[derive(Debug, Clone)]
pub struct Surface {
    components: Vec<Component>,
}

/// Homeomorphism type: sorted `(genus, boundary count)` pairs.
pub type SurfaceClass = Vec<(u32, usize)>;

impl Surface {
    /// Builds a surface from `(genus, boundary count)` pairs, numbering the
    /// boundary circles consecutively.
    pub fn from_types(types: &[(u32, usize)]) -> Self {
        let mut next = 0u32;
        let components = types
            .iter()
            .map(|&(genus, b)| {
                let labels = (next..next + b as u32).collect();
                next += b as u32;
                Component { genus, labels }
            })
            .collect();
        Self { components }
    }

    pub fn empty() -> Self {
        Self { components: Vec::new() }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn class(&self) -> SurfaceClass {
        let mut c: Vec<_> = self.components.iter().map(|c| (c.genus, c.boundaries())).collect();
        c.sort_unstable();
        c
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.components.iter().map(Component::euler_characteristic).sum()
    }

    fn labels(&self) -> Vec<(u32, usize)> {
        self.components
            .iter()
            .enumerate()
            .flat_map(|(idx, c)| c.labels.iter().map(move |&l| (l, idx)))
            .collect()
    }

    fn label_pairs(&self) -> Vec<((u32, usize), (u32, usize))> {
        let labels = self.labels();
        let mut out = Vec::new();
        for (x, &a) in labels.iter().enumerate() {
            for &b in &labels[x + 1..] {
                out.push((a, b));
            }
        }
        out
    }

    fn glued(&self, (la, ca): (u32, usize), (lb, cb): (u32, usize)) -> Surface {
        let mut comps = self.components.clone();
        comps[ca].labels.remove(&la);
        comps[cb].labels.remove(&lb);
        if ca == cb {
            comps[ca].genus += 1;
        } else {
            let other = comps[cb.max(ca)].clone();
            let keep = &mut comps[cb.min(ca)];
            keep.genus += other.genus;
            keep.labels.extend(other.labels);
            comps.remove(cb.max(ca));
        }
        Surface { components: comps }
    }

    fn capped(&self, (la, ca): (u32, usize), (lb, cb): (u32, usize)) -> Surface {
        let mut comps = self.components.clone();
        comps[ca].labels.remove(&la);
        comps[cb].labels.remove(&lb);
        Surface { components: comps }
    }
}

impl PartialEq for Surface {
    fn eq(&self, other: &Self) -> bool {
        self.class() == other.class()
    }
}

impl Eq for Surface {}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.class().iter().map(|(g, b)| format!("S({g},{b})")).collect();
        if parts.is_empty() {
            write!(f, "empty")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Formal rational combination of surfaces up to homeomorphism.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceSum {
    terms: BTreeMap<SurfaceClass, Rational>,
}

impl SurfaceSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(s: &Surface) -> Self {
        let mut out = Self::zero();
        out.add(s, Rational::one());
        out
    }

    pub fn add(&mut self, s: &Surface, c: Rational) {
        let key = s.class();
        let entry = self.terms.entry(key.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, s: &Surface) -> Rational {
        self.terms.get(&s.class()).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Surface, &Rational)> {
        self.terms.iter().map(|(k, c)| (Surface::from_types(k), c))
    }

    pub fn checked_add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, c) in other.terms() {
            out.add(&s, c.clone());
        }
        out
    }

    fn pairwise(&self, f: impl Fn(&Surface, (u32, usize), (u32, usize)) -> Surface) -> Self {
        let mut out = Self::zero();
        for (s, c) in self.terms() {
            for (a, b) in s.label_pairs() {
                out.add(&f(&s, a, b), c.clone());
            }
        }
        out
    }
}

/// Joins every unordered pair of boundary circles by a cylinder.
pub fn glue(s: &SurfaceSum) -> SurfaceSum {
    s.pairwise(Surface::glued)
}

/// Fills every unordered pair of boundary circles with disks.
pub fn cap(s: &SurfaceSum) -> SurfaceSum {
    s.pairwise(Surface::capped)
}

/// Sends a component with `b` boundaries and genus `g` to `q[b, 2g-2+b]`,
/// extended multiplicatively. Without `extended`, disks and spheres are
/// rejected.
pub fn rho(s: &SurfaceSum, extended: bool) -> Result<Polynomial, PolyError> {
    let ring = if extended { RingDescriptor::LambdaQHat } else { RingDescriptor::LambdaQ };
    let mut terms = Vec::new();
    for (surface, c) in s.terms() {
        let mut m = Monomial::one();
        for comp in surface.components() {
            let i = comp.boundaries() as i32;
            m.bump(Variable::Q(i, -comp.euler_characteristic() as i32), 1);
        }
        terms.push((m, c.clone()));
    }
    Polynomial::from_terms(ring, terms)
}

/// Every surface with at most `max_components` components, each of genus at
/// most `max_genus` with at most `max_boundary` boundary circles. With
/// `stable_only`, disks and spheres are excluded.
pub fn surface_family(
    max_components: usize,
    max_genus: u32,
    max_boundary: usize,
    stable_only: bool,
) -> Vec<Surface> {
    let types: Vec<(u32, usize)> = (0..=max_genus)
        .flat_map(|g| (0..=max_boundary).map(move |b| (g, b)))
        .filter(|&(g, b)| !stable_only || 2 - 2 * g as i64 - b as i64 <= 0)
        .collect();
    let mut out = vec![Surface::empty()];
    let mut current: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_components {
        let mut next = Vec::new();
        for multiset in &current {
            let start = multiset.last().copied().unwrap_or(0);
            for t in start..types.len() {
                let mut m = multiset.clone();
                m.push(t);
                next.push(m);
            }
        }
        for m in &next {
            let picked: Vec<_> = m.iter().map(|&t| types[t]).collect();
            out.push(Surface::from_types(&picked));
        }
        current = next;
    }
    out
}

/// Count of surfaces in a sum weighted by coefficient, grouped by total Euler
/// characteristic.
pub fn euler_profile(s: &SurfaceSum) -> BTreeMap<i64, Rational> {
    let mut out: BTreeMap<i64, Rational> = BTreeMap::new();
    for (surface, c) in s.terms() {
        *out.entry(surface.euler_characteristic()).or_insert_with(Rational::zero) += c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Scales a sum.
pub fn scale(s: &SurfaceSum, c: &Rational) -> SurfaceSum {
    let mut out = SurfaceSum::zero();
    if c.is_zero() {
        return out;
    }
    for (surface, d) in s.terms() {
        out.add(&surface, d * c);
    }
    out
}

/// Whether `rho(glue(s)) = (D1 + D2) rho(s)` in the unextended ring.
pub fn gluing_intertwines(s: &Surface) -> Result<bool, OpError> {
    let sum = SurfaceSum::single(s);
    let lhs = rho(&glue(&sum), false)?;
    let r = rho(&sum, false)?;
    Ok(lhs == &apply_d1(&r, false)? + &apply_d2(&r, false)?)
}

/// Whether `rho(glue(s) + cap(s))` equals the extended positive surface
/// operator applied to `rho(s)` at `phi = 1`.
pub fn gluing_and_capping_intertwine(s: &Surface) -> Result<bool, OpError> {
    let sum = SurfaceSum::single(s);
    let lhs = rho(&glue(&sum).checked_add(&cap(&sum)), true)?;
    let image = DiffOperator::surface_plus(true).apply(&rho(&sum, true)?)?;
    let rhs = image.evaluate(&[(Variable::Phi, Rational::one())], RingDescriptor::LambdaQHat)?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::int;

    fn class_sum(pairs: &[(&[(u32, usize)], i64)]) -> SurfaceSum {
        let mut out = SurfaceSum::zero();
        for (types, c) in pairs {
            out.add(&Surface::from_types(types), int(*c));
        }
        out
    }

    #[test]
    fn glue_examples() {
        let pants = SurfaceSum::single(&Surface::from_types(&[(0, 3)]));
        assert_eq!(glue(&pants), class_sum(&[(&[(1, 1)], 3)]));
        let disks = SurfaceSum::single(&Surface::from_types(&[(0, 1), (0, 1)]));
        assert_eq!(glue(&disks), class_sum(&[(&[(0, 0)], 1)]));
        let closed = SurfaceSum::single(&Surface::from_types(&[(2, 0)]));
        assert!(glue(&closed).is_zero());
    }

    #[test]
    fn cap_examples() {
        let pants = SurfaceSum::single(&Surface::from_types(&[(0, 3)]));
        assert_eq!(cap(&pants), class_sum(&[(&[(0, 1)], 3)]));
        let annulus = SurfaceSum::single(&Surface::from_types(&[(0, 2)]));
        assert_eq!(cap(&annulus), class_sum(&[(&[(0, 0)], 1)]));
        let disk = SurfaceSum::single(&Surface::from_types(&[(0, 1)]));
        assert!(cap(&disk).is_zero());
    }

    #[test]
    fn cross_component_glue_adds_genera() {
        let s = SurfaceSum::single(&Surface::from_types(&[(1, 2), (2, 1)]));
        // one same-component pair, two cross pairs
        assert_eq!(glue(&s), class_sum(&[(&[(2, 0), (2, 1)], 1), (&[(3, 1)], 2)]));
    }

    #[test]
    fn rho_examples() {
        let two_pants = SurfaceSum::single(&Surface::from_types(&[(0, 3), (0, 3)]));
        let q31 = Polynomial::var(RingDescriptor::LambdaQ, Variable::Q(3, 1)).unwrap();
        assert_eq!(rho(&two_pants, false).unwrap(), q31.pow(2));

        let disk = SurfaceSum::single(&Surface::from_types(&[(0, 1)]));
        let q = Polynomial::var(RingDescriptor::LambdaQHat, Variable::Q(1, -1)).unwrap();
        assert_eq!(rho(&disk, true).unwrap(), q);
        assert!(rho(&disk, false).is_err());

        let torus = SurfaceSum::single(&Surface::from_types(&[(1, 0)]));
        let q00 = Polynomial::var(RingDescriptor::LambdaQ, Variable::Q(0, 0)).unwrap();
        assert_eq!(rho(&torus, false).unwrap(), q00);
    }

    #[test]
    fn labels_forgotten_in_comparison() {
        let a = Surface::from_types(&[(0, 2), (1, 1)]);
        let b = Surface::from_types(&[(1, 1), (0, 2)]);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "S(0,2) + S(1,1)");
    }

    #[test]
    fn gluing_intertwines_on_stable_family() {
        for s in surface_family(4, 2, 3, true) {
            assert!(gluing_intertwines(&s).unwrap(), "{s}");
        }
    }

    #[test]
    fn gluing_and_capping_intertwine_on_full_family() {
        for s in surface_family(4, 2, 3, false) {
            assert!(gluing_and_capping_intertwine(&s).unwrap(), "{s}");
        }
    }

    #[test]
    fn euler_characteristic_bookkeeping() {
        for s in surface_family(3, 2, 3, false) {
            let chi = s.euler_characteristic();
            let sum = SurfaceSum::single(&s);
            for (t, _) in glue(&sum).terms() {
                assert_eq!(t.euler_characteristic(), chi);
            }
            for (t, _) in cap(&sum).terms() {
                assert_eq!(t.euler_characteristic(), chi + 2);
            }
        }
    }

    #[test]
    fn family_sizes() {
        // 12 component types, multisets of size 0..=4
        assert_eq!(surface_family(4, 2, 3, false).len(), 1 + 12 + 78 + 364 + 1365);
        assert_eq!(surface_family(1, 2, 3, true).len(), 1 + 10);
    }

    #[test]
    fn linear_in_sums() {
        let mut s = SurfaceSum::zero();
        s.add(&Surface::from_types(&[(0, 3)]), int(2));
        s.add(&Surface::from_types(&[(1, 2), (0, 2)]), rat_neg());
        let both = glue(&s);
        let mut parts = SurfaceSum::zero();
        for (t, c) in s.terms() {
            parts = parts.checked_add(&scale(&glue(&SurfaceSum::single(&t)), c));
        }
        assert_eq!(both, parts);
        assert!(!euler_profile(&both).is_empty());
    }

    fn rat_neg() -> Rational {
        Rational::new((-3).into(), 2.into())
    }
}

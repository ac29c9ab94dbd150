//! Sparse multilinear polynomials `f(x) = Σ_S a_S x_S` over real coefficients.
//!
//! A polynomial is stored in canonical form: a sorted list of distinct
//! monomials, each with a non-zero coefficient. Two polynomials are equal iff
//! their canonical term lists are equal.

mod cube;
mod format;
mod random;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

pub use cube::{cube_values, point_from_index, CubeEnumLimit, DEFAULT_ENUM_CAP};
pub(crate) use format::json_error as format_error;
pub use format::{parse, serialize, PolyRecord, TermRecord};
pub use random::random_poly;

/// A strictly increasing set of variable indices, i.e. the `S` in `x_S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    /// Builds a monomial, rejecting index lists that are not strictly increasing.
    pub fn new(vars: Vec<u32>) -> Result<Self> {
        if vars.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "monomial indices {vars:?} are not strictly increasing"
            )));
        }
        Ok(Monomial(vars))
    }

    /// Sorts and deduplicates-checks an arbitrary index list.
    pub fn from_unsorted(mut vars: Vec<u32>) -> Result<Self> {
        vars.sort_unstable();
        Monomial::new(vars)
    }

    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn vars(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// `S ∖ {i}`.
    pub fn without(&self, i: u32) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&v| v != i).collect())
    }

    /// Bitmask of the set; only meaningful for indices below 64.
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &v| m | (1u64 << v))
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0.iter().map(|&v| point[v as usize]).product()
    }
}

// Graded order: by degree, then lexicographically.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for v in &self.0 {
            write!(f, "x{v}")?;
        }
        Ok(())
    }
}

/// A multilinear polynomial in `n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilinearPoly {
    n: usize,
    terms: Vec<(Monomial, f64)>,
    degree: usize,
}

impl MultilinearPoly {
    /// Builds a polynomial from `(monomial, coefficient)` pairs. Repeated
    /// monomials are summed and zero coefficients dropped.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, f64)>,
    {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            if let Some(&last) = m.vars().last() {
                if last as usize >= n {
                    return Err(Error::IndexOutOfRange {
                        index: last as usize,
                        n,
                    });
                }
            }
            if !c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite coefficient {c} on {m}"
                )));
            }
            *map.entry(m).or_insert(0.0) += c;
        }
        Ok(Self::from_map(n, map))
    }

    /// Convenience constructor from raw index lists; each list must be strictly increasing.
    pub fn from_index_lists<I, V>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (V, f64)>,
        V: Into<Vec<u32>>,
    {
        let terms = terms
            .into_iter()
            .map(|(v, c)| Monomial::new(v.into()).map(|m| (m, c)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n, terms)
    }

    pub(crate) fn from_map(n: usize, map: BTreeMap<Monomial, f64>) -> Self {
        let terms: Vec<(Monomial, f64)> = map.into_iter().filter(|(_, c)| *c != 0.0).collect();
        let degree = terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0);
        MultilinearPoly { n, terms, degree }
    }

    pub fn zero(n: usize) -> Self {
        MultilinearPoly {
            n,
            terms: Vec::new(),
            degree: 0,
        }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::from_map(n, BTreeMap::from([(Monomial::one(), value)]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(Monomial, f64)] {
        &self.terms
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

    /// True when no stored monomial has positive degree.
    pub fn is_constant(&self) -> bool {
        self.degree == 0
    }

    /// True when every stored monomial has the same degree. The zero polynomial counts.
    pub fn is_homogeneous(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.degree() == self.degree)
    }

    pub fn coefficient(&self, vars: &[u32]) -> f64 {
        self.terms
            .binary_search_by(|(m, _)| {
                m.0.len()
                    .cmp(&vars.len())
                    .then_with(|| m.0.as_slice().cmp(vars))
            })
            .map(|i| self.terms[i].1)
            .unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&[])
    }

    /// `Σ |a_S|`, the scale used for relative tolerances.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs()).sum()
    }

    /// `Σ a_S²`, i.e. `‖f‖₂²` under uniform ±1 or Gaussian inputs.
    pub fn squared_l2(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c * c).sum()
    }

    /// `W_j = Σ_{|S|=j} a_S²`.
    pub fn weight_at_degree(&self, j: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(m, _)| m.degree() == j)
            .map(|(_, c)| c * c)
            .sum()
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    /// Evaluation without the length check; `point` must have at least `n` entries.
    pub fn eval_unchecked(&self, point: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }

    /// `Var[f] = Σ_{S≠∅} a_S²`.
    pub fn variance(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(m, _)| m.degree() > 0)
            .map(|(_, c)| c * c)
            .sum()
    }

    /// `Inf_i[f] = Σ_{S∋i} a_S²`.
    pub fn influence(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self
            .terms
            .iter()
            .filter(|(m, _)| m.contains(i as u32))
            .map(|(_, c)| c * c)
            .sum())
    }

    /// All influences in one pass.
    pub fn influences(&self) -> Vec<f64> {
        let mut inf = vec![0.0; self.n];
        for (m, c) in &self.terms {
            for &v in m.vars() {
                inf[v as usize] += c * c;
            }
        }
        inf
    }

    /// Largest influence and its index; ties go to the smallest index.
    /// Returns `None` when there are no variables.
    pub fn max_influence(&self) -> Option<(usize, f64)> {
        let inf = self.influences();
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in inf.into_iter().enumerate() {
            match best {
                Some((_, b)) if v <= b => {}
                _ => best = Some((i, v)),
            }
        }
        best
    }

    /// The `i`th derivative `g_i(x) = Σ_{S∋i} a_S x_{S∖i}`, over the same `n` variables.
    pub fn derivative(&self, i: usize) -> Result<MultilinearPoly> {
        self.check_index(i)?;
        let i = i as u32;
        let map = self
            .terms
            .iter()
            .filter(|(m, _)| m.contains(i))
            .map(|(m, c)| (m.without(i), *c))
            .collect();
        Ok(Self::from_map(self.n, map))
    }

    /// `f^{=j}`: the terms of degree exactly `j`.
    pub fn degree_part(&self, j: usize) -> MultilinearPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() == j)
            .cloned()
            .collect::<Vec<_>>();
        let degree = if terms.is_empty() { 0 } else { j };
        MultilinearPoly {
            n: self.n,
            terms,
            degree,
        }
    }

    pub fn scaled(&self, factor: f64) -> MultilinearPoly {
        let map = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c * factor))
            .collect();
        Self::from_map(self.n, map)
    }

    /// `self + factor · other`.
    pub fn add_scaled(&self, other: &MultilinearPoly, factor: f64) -> Result<MultilinearPoly> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut map: BTreeMap<Monomial, f64> = self.terms.iter().cloned().collect();
        for (m, c) in &other.terms {
            *map.entry(m.clone()).or_insert(0.0) += factor * c;
        }
        Ok(Self::from_map(self.n, map))
    }

    /// Exact `max |f|` over `{±1}^n`.
    pub fn sup_norm_cube(&self, limit: CubeEnumLimit) -> Result<f64> {
        let values = cube_values(self, limit)?;
        Ok(values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Exact `(E|f|^p)^{1/p}` under uniform ±1 inputs; `p = ∞` gives the sup-norm.
    pub fn lp_norm_cube(&self, p: f64, limit: CubeEnumLimit) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidArgument(format!("p = {p} must be at least 1")));
        }
        if p.is_infinite() {
            return self.sup_norm_cube(limit);
        }
        let values = cube_values(self, limit)?;
        let mean = values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / values.len() as f64;
        Ok(mean.powf(1.0 / p))
    }

    /// Upper bound on the absolute rounding error of any single value produced
    /// by [`cube_values`] or [`MultilinearPoly::eval`] on ±1 points.
    pub fn rounding_slack(&self) -> f64 {
        4.0 * (self.n + self.degree + 1) as f64 * f64::EPSILON * self.coefficient_l1()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }
}

impl fmt::Display for MultilinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            if m.degree() == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}·{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, terms: &[(&[u32], f64)]) -> MultilinearPoly {
        MultilinearPoly::from_index_lists(n, terms.iter().map(|(v, c)| (v.to_vec(), *c))).unwrap()
    }

    #[test]
    fn eval_examples() {
        let f = poly(2, &[(&[0, 1], 1.0)]);
        assert_eq!(f.eval(&[1.0, -1.0]).unwrap(), -1.0);
        let c = MultilinearPoly::constant(3, 5.0);
        assert_eq!(c.eval(&[0.3, -2.0, 7.0]).unwrap(), 5.0);
        let g = poly(2, &[(&[0], 0.6), (&[0, 1], 0.8)]);
        assert!((g.eval(&[1.0, 1.0]).unwrap() - 1.4).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_wrong_length() {
        let f = poly(2, &[(&[0, 1], 1.0)]);
        assert_eq!(
            f.eval(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn variance_examples() {
        assert_eq!(poly(1, &[(&[], 0.5), (&[0], 0.25)]).variance(), 1.0 / 16.0);
        assert_eq!(poly(2, &[(&[0, 1], 1.0)]).variance(), 1.0);
        let g = poly(2, &[(&[0], 0.6), (&[0, 1], 0.8)]);
        assert!((g.variance() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn influence_examples() {
        let g = poly(2, &[(&[0], 0.6), (&[0, 1], 0.8)]);
        assert!((g.influence(0).unwrap() - 1.0).abs() < 1e-15);
        assert!((g.influence(1).unwrap() - 0.64).abs() < 1e-15);
        let (i, v) = g.max_influence().unwrap();
        assert_eq!(i, 0);
        assert!((v - 1.0).abs() < 1e-15);
        let c = MultilinearPoly::constant(3, 2.0);
        assert!(c.influences().iter().all(|&v| v == 0.0));
        assert_eq!(c.max_influence(), Some((0, 0.0)));
        assert!(matches!(g.influence(2), Err(Error::IndexOutOfRange { index: 2, n: 2 })));
    }

    #[test]
    fn max_influence_breaks_ties_low() {
        let f = poly(3, &[(&[1], 1.0), (&[2], 1.0)]);
        assert_eq!(f.max_influence(), Some((1, 1.0)));
    }

    #[test]
    fn derivative_examples() {
        let f = poly(3, &[(&[0, 1, 2], 1.0)]);
        assert_eq!(f.derivative(1).unwrap(), poly(3, &[(&[0, 2], 1.0)]));
        let g = poly(2, &[(&[0], 1.0), (&[0, 1], 1.0)]);
        assert_eq!(g.derivative(0).unwrap(), poly(2, &[(&[], 1.0), (&[1], 1.0)]));
        let c = MultilinearPoly::constant(2, 4.0);
        assert!(c.derivative(1).unwrap().is_zero());
        assert!(c.derivative(2).is_err());
    }

    #[test]
    fn degree_part_examples() {
        let f = poly(2, &[(&[], 1.0), (&[0], 1.0), (&[0, 1], 1.0)]);
        assert_eq!(f.degree_part(1), poly(2, &[(&[0], 1.0)]));
        assert_eq!(f.degree_part(0), MultilinearPoly::constant(2, 1.0));
        assert!(f.degree_part(5).is_zero());
        assert_eq!(f.degree_part(5).degree(), 0);
    }

    #[test]
    fn canonical_form_drops_zeros_and_merges() {
        let f = poly(2, &[(&[0], 1.0), (&[1], 0.0), (&[0], -1.0), (&[0, 1], 2.0)]);
        assert_eq!(f.len(), 1);
        assert_eq!(f.degree(), 2);
        assert_eq!(f.coefficient(&[0, 1]), 2.0);
        assert_eq!(f.coefficient(&[0]), 0.0);
    }

    #[test]
    fn construction_rejects_bad_indices() {
        assert!(MultilinearPoly::from_index_lists(2, [(vec![0u32, 2], 1.0)]).is_err());
        assert!(MultilinearPoly::from_index_lists(3, [(vec![1u32, 0], 1.0)]).is_err());
        assert!(MultilinearPoly::from_index_lists(3, [(vec![1u32, 1], 1.0)]).is_err());
    }

    #[test]
    fn norms_by_enumeration() {
        let lim = CubeEnumLimit::default();
        let f = poly(2, &[(&[0, 1], 1.0)]);
        assert_eq!(f.sup_norm_cube(lim).unwrap(), 1.0);
        assert_eq!(f.lp_norm_cube(1.0, lim).unwrap(), 1.0);
        let g = poly(1, &[(&[], 0.5), (&[0], 0.5)]);
        assert_eq!(g.sup_norm_cube(lim).unwrap(), 1.0);
        assert_eq!(g.lp_norm_cube(1.0, lim).unwrap(), 0.5);
        let h = poly(2, &[(&[0], 1.0), (&[1], 1.0)]);
        let l2 = h.lp_norm_cube(2.0, lim).unwrap();
        assert!((l2 - 2f64.sqrt()).abs() < 1e-15);
        assert!((l2 - h.squared_l2().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn enumeration_refuses_above_cap() {
        let f = MultilinearPoly::zero(5);
        let lim = CubeEnumLimit::new(4).unwrap();
        assert_eq!(
            f.sup_norm_cube(lim),
            Err(Error::EnumerationCap { n: 5, cap: 4 })
        );
        assert!(f.lp_norm_cube(2.0, lim).is_err());
    }

    #[test]
    fn display_is_readable() {
        let f = poly(3, &[(&[], 1.5), (&[0, 2], -2.0)]);
        assert_eq!(f.to_string(), "1.5 + -2·x0x2");
        assert_eq!(MultilinearPoly::zero(1).to_string(), "0");
    }
}

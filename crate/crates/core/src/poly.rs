//! Multivariate polynomials of bounded total degree in the monomial basis
//! about the origin.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::cube::Point;
use crate::error::{Error, Result};

/// Exponent vector `α = (α_1, …, α_n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// `e_i` scaled by `order`.
    pub fn axis(n: usize, i: usize, order: u32) -> Self {
        let mut e = vec![0; n];
        e[i] = order;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise `α ≤ β`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `x^α`
    pub fn monomial(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product()
    }

    fn key(&self) -> String {
        serde_json::to_string(&self.0).expect("exponent vector serializes")
    }
}

pub(crate) fn factorial(a: u32) -> f64 {
    (1..=a).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// `(n + d choose d)`
pub fn dim_poly(n: usize, degree: u32) -> usize {
    binomial(n as u32 + degree, degree).round() as usize
}

fn enumerate(n: usize, degree: u32) -> Vec<MultiIndex> {
    fn fill(n: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == n {
            prefix.push(total);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            fill(n, total - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(dim_poly(n, degree));
    for d in 0..=degree {
        fill(n, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

thread_local! {
    static BASES: RefCell<HashMap<(usize, u32), Rc<Vec<MultiIndex>>>> = RefCell::new(HashMap::new());
}

/// All multi-indices with `|α| ≤ degree`, graded and then lexicographically
/// descending. This is the coefficient order of [`Poly`].
pub fn basis(n: usize, degree: u32) -> Rc<Vec<MultiIndex>> {
    BASES.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, degree))
            .or_insert_with(|| Rc::new(enumerate(n, degree)))
            .clone()
    })
}

/// Multi-indices of exactly the given order.
pub fn of_order(n: usize, order: u32) -> Vec<MultiIndex> {
    basis(n, order).iter().filter(|a| a.order() == order).cloned().collect()
}

/// A polynomial on `R^n` of degree at most `degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    n: usize,
    degree: u32,
    coef: Vec<f64>,
}

impl Poly {
    pub fn zero(n: usize, degree: u32) -> Self {
        Poly { n, degree, coef: vec![0.0; dim_poly(n, degree)] }
    }

    pub fn constant(n: usize, degree: u32, c: f64) -> Self {
        let mut p = Poly::zero(n, degree);
        p.coef[0] = c;
        p
    }

    /// Coefficients in [`basis`] order.
    pub fn from_coefficients(n: usize, degree: u32, coef: Vec<f64>) -> Result<Self> {
        let expected = dim_poly(n, degree);
        if coef.len() != expected {
            return Err(Error::LengthMismatch(format!(
                "{} coefficients for a space of dimension {expected}",
                coef.len()
            )));
        }
        Ok(Poly { n, degree, coef })
    }

    pub fn from_terms<I>(n: usize, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, f64)>,
    {
        let mut p = Poly::zero(n, degree);
        for (alpha, c) in terms {
            p.add_term(&alpha, c)?;
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    pub fn basis(&self) -> Rc<Vec<MultiIndex>> {
        basis(self.n, self.degree)
    }

    fn index_of(&self, alpha: &MultiIndex) -> Result<usize> {
        if alpha.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: alpha.dim() });
        }
        if alpha.order() > self.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: alpha.order() });
        }
        Ok(self.basis().iter().position(|b| b == alpha).expect("index enumerated"))
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.index_of(alpha).map(|i| self.coef[i]).unwrap_or(0.0)
    }

    pub fn add_term(&mut self, alpha: &MultiIndex, c: f64) -> Result<()> {
        let i = self.index_of(alpha)?;
        self.coef[i] += c;
        Ok(())
    }

    /// Largest order carrying a nonzero coefficient, `None` for zero.
    pub fn actual_degree(&self) -> Option<u32> {
        self.basis().iter().zip(&self.coef).filter(|(_, &c)| c != 0.0).map(|(a, _)| a.order()).max()
    }

    /// The same polynomial viewed in a space of another degree bound.
    pub fn with_degree(&self, degree: u32) -> Result<Poly> {
        if let Some(d) = self.actual_degree() {
            if d > degree {
                return Err(Error::DegreeMismatch { expected: degree, found: d });
            }
        }
        let mut out = Poly::zero(self.n, degree);
        for (alpha, &c) in self.basis().iter().zip(&self.coef) {
            if c != 0.0 {
                out.add_term(alpha, c)?;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.basis().iter().zip(&self.coef).map(|(a, c)| c * a.monomial(x.coords())).sum()
    }

    /// `D^α P(x)`; zero when `|α|` exceeds the degree bound.
    pub fn deriv_eval(&self, alpha: &MultiIndex, x: &Point) -> f64 {
        let mut total = 0.0;
        for (beta, &c) in self.basis().iter().zip(&self.coef) {
            if c == 0.0 || !alpha.le(beta) {
                continue;
            }
            let mut term = c;
            for ((&b, &a), &xi) in beta.0.iter().zip(&alpha.0).zip(x.coords()) {
                term *= falling(b, a) * xi.powi((b - a) as i32);
            }
            total += term;
        }
        total
    }

    /// `D^α P(x)` for every `α` of [`Poly::basis`].
    pub fn all_derivatives(&self, x: &Point) -> Vec<f64> {
        self.basis().iter().map(|a| self.deriv_eval(a, x)).collect()
    }

    /// `D^α P` as a polynomial of degree bound `degree − |α|`.
    pub fn derivative(&self, alpha: &MultiIndex) -> Poly {
        let order = alpha.order();
        if order > self.degree {
            return Poly::zero(self.n, 0);
        }
        let mut out = Poly::zero(self.n, self.degree - order);
        for (beta, &c) in self.basis().iter().zip(&self.coef) {
            if c == 0.0 || !alpha.le(beta) {
                continue;
            }
            let factor: f64 = beta.0.iter().zip(&alpha.0).map(|(&b, &a)| falling(b, a)).product();
            let rest = MultiIndex(beta.0.iter().zip(&alpha.0).map(|(b, a)| b - a).collect());
            out.add_term(&rest, c * factor).expect("order within bound");
        }
        out
    }

    /// `Σ c_α (y − x)^α` expanded about the origin.
    pub fn from_centered(n: usize, degree: u32, center: &Point, centered: &[f64]) -> Poly {
        let mut out = Poly::zero(n, degree);
        let idx = out.basis();
        for (alpha, &c) in idx.iter().zip(centered) {
            if c == 0.0 {
                continue;
            }
            for beta in idx.iter() {
                if !beta.le(alpha) {
                    continue;
                }
                let mut term = c;
                for ((&a, &b), &xi) in alpha.0.iter().zip(&beta.0).zip(center.coords()) {
                    term *= binomial(a, b) * (-xi).powi((a - b) as i32);
                }
                out.add_term(beta, term).expect("order within bound");
            }
        }
        out
    }

    /// Coefficients `c_α = D^α P(x)/α!` of the expansion in powers of `y − x`.
    pub fn centered_coefficients(&self, x: &Point) -> Vec<f64> {
        self.basis().iter().map(|a| self.deriv_eval(a, x) / a.factorial()).collect()
    }

    /// `T_x^k(P)(y) = Σ_{|α| ≤ k} D^α P(x)/α! (y − x)^α` with degree bound `k`.
    pub fn taylor(&self, x: &Point, k: u32) -> Poly {
        let centered: Vec<f64> =
            basis(self.n, k).iter().map(|a| self.deriv_eval(a, x) / a.factorial()).collect();
        Poly::from_centered(self.n, k, x, &centered)
    }

    /// `y ↦ P(y − shift)`
    pub fn translate(&self, shift: &[f64]) -> Poly {
        let centered = self.coef.clone();
        Poly::from_centered(self.n, self.degree, &Point(shift.to_vec()), &centered)
    }

    pub fn scale(&self, gamma: f64) -> Poly {
        Poly { n: self.n, degree: self.degree, coef: self.coef.iter().map(|c| gamma * c).collect() }
    }

    fn check_same_space(&self, other: &Poly) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        Ok(())
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        self.check_same_space(other)?;
        let coef = self.coef.iter().zip(&other.coef).map(|(a, b)| a + b).collect();
        Ok(Poly { n: self.n, degree: self.degree, coef })
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        self.check_same_space(other)?;
        let coef = self.coef.iter().zip(&other.coef).map(|(a, b)| a - b).collect();
        Ok(Poly { n: self.n, degree: self.degree, coef })
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().all(|&c| c == 0.0)
    }
}

/// `b (b−1) ⋯ (b−a+1)`
fn falling(b: u32, a: u32) -> f64 {
    (0..a).map(|i| f64::from(b - i)).product()
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    degree: Option<u32>,
    coef: BTreeMap<String, f64>,
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let coef = self
            .basis()
            .iter()
            .zip(&self.coef)
            .filter(|(_, &c)| c != 0.0)
            .map(|(a, &c)| (a.key(), c))
            .collect();
        PolyRepr { n: Some(self.n), degree: Some(self.degree), coef }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PolyRepr::deserialize(d)?;
        let mut terms = Vec::with_capacity(repr.coef.len());
        for (key, c) in repr.coef {
            let exps: Vec<u32> = serde_json::from_str(&key)
                .map_err(|e| D::Error::custom(format!("bad multi-index key {key:?}: {e}")))?;
            terms.push((MultiIndex(exps), c));
        }
        let n = match (repr.n, terms.first()) {
            (Some(n), _) => n,
            (None, Some((a, _))) => a.dim(),
            (None, None) => return Err(D::Error::custom("polynomial needs \"n\" or a coefficient")),
        };
        let degree = repr.degree.unwrap_or_else(|| terms.iter().map(|(a, _)| a.order()).max().unwrap_or(0));
        Poly::from_terms(n, degree, terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex(e.to_vec())
    }

    fn x_squared() -> Poly {
        Poly::from_terms(1, 2, [(mi(&[2]), 1.0)]).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim_poly(2, 2), 6);
        assert_eq!(dim_poly(1, 3), 4);
        assert_eq!(dim_poly(3, 0), 1);
        assert_eq!(basis(2, 2).len(), 6);
        assert_eq!(basis(2, 1)[..], [mi(&[0, 0]), mi(&[1, 0]), mi(&[0, 1])]);
        assert_eq!(of_order(2, 2).len(), 3);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(x_squared().deriv_eval(&mi(&[1]), &Point(vec![3.0])), 6.0);
        assert_eq!(x_squared().deriv_eval(&mi(&[3]), &Point(vec![3.0])), 0.0);
        let xy = Poly::from_terms(2, 2, [(mi(&[1, 1]), 1.0)]).unwrap();
        assert_eq!(xy.deriv_eval(&mi(&[1, 1]), &Point(vec![-4.0, 7.5])), 1.0);
        let d = xy.derivative(&mi(&[1, 0]));
        assert_eq!(d.eval(&Point(vec![2.0, 5.0])), 5.0);
    }

    #[test]
    fn taylor_examples() {
        let t = x_squared().taylor(&Point(vec![1.0]), 1);
        let expected = Poly::from_terms(1, 1, [(mi(&[1]), 2.0), (mi(&[0]), -1.0)]).unwrap();
        assert_eq!(t, expected);
        let t0 = x_squared().taylor(&Point(vec![1.5]), 0);
        assert_eq!(t0, Poly::constant(1, 0, 2.25));
        let p = Poly::from_terms(2, 2, [(mi(&[1, 1]), 2.0), (mi(&[0, 1]), -1.0), (mi(&[0, 0]), 3.0)]).unwrap();
        let t = p.taylor(&Point(vec![0.3, -1.2]), 2);
        for (a, b) in t.coefficients().iter().zip(p.coefficients()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn translate_shifts_argument() {
        let p = Poly::from_terms(2, 2, [(mi(&[2, 0]), 1.0), (mi(&[0, 1]), 3.0)]).unwrap();
        let q = p.translate(&[1.0, -2.0]);
        let y = Point(vec![0.4, 0.9]);
        assert!((q.eval(&y) - p.eval(&Point(vec![-0.6, 2.9]))).abs() < 1e-14);
    }

    #[test]
    fn arithmetic_and_lifting() {
        let p = x_squared();
        assert!(p.sub(&p).unwrap().is_zero());
        assert_eq!(p.scale(2.0).add(&p).unwrap(), p.scale(3.0));
        assert!(p.with_degree(1).is_err());
        assert_eq!(p.with_degree(3).unwrap().eval(&Point(vec![2.0])), 4.0);
        assert!(p.add(&Poly::zero(1, 3)).is_err());
    }

    #[test]
    fn serde_shape() {
        let p: Poly = serde_json::from_str(r#"{"n":1,"L":1,"coef":{"[1]":1.0}}"#).unwrap();
        assert_eq!(p, Poly::from_terms(1, 1, [(mi(&[1]), 1.0)]).unwrap());
        let back: Poly = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let inferred: Poly = serde_json::from_str(r#"{"coef":{"[0,2]":1.5}}"#).unwrap();
        assert_eq!((inferred.n(), inferred.degree()), (2, 2));
        assert!(serde_json::from_str::<Poly>(r#"{"n":1,"L":1,"coef":{"[2]":1.0}}"#).is_err());
    }
}

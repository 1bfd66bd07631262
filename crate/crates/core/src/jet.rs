//! Jets `T = (P, Q)` and the quasi-distance `δ_ω` on them.

use serde::{Deserialize, Serialize};

use crate::cube::{pair_scales, rho_omega_unchecked, Cube, Point};
use crate::error::{Error, Result};
use crate::modulus::Modulus;
use crate::numeric::invert_increasing;
use crate::poly::{basis, MultiIndex, Poly};

/// A polynomial attached to a cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub poly: Poly,
    pub cube: Cube,
}

impl Jet {
    pub fn new(poly: Poly, cube: Cube) -> Result<Self> {
        if poly.n() != cube.dim() {
            return Err(Error::DimensionMismatch { expected: cube.dim(), found: poly.n() });
        }
        Ok(Jet { poly, cube })
    }

    /// `γ ∘ T = (γP, Q)`
    pub fn scale(&self, gamma: f64) -> Jet {
        Jet { poly: self.poly.scale(gamma), cube: self.cube.clone() }
    }
}

/// `γ ∘ T = (γP, Q)`
pub fn scale(gamma: f64, jet: &Jet) -> Jet {
    jet.scale(gamma)
}

/// `φ_α(t; v) = t^{L−|α|} ∫_v^{v+t} ω(s)/s^m ds`, with `order = |α|`.
pub fn phi(modulus: &Modulus, l: u32, order: u32, t: f64, v: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t.powi((l - order) as i32) * modulus.core_span(v, t)
}

/// The setting `(ω, n, k)` with `m` the order of `ω` and `L = k + m − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetSpace {
    modulus: Modulus,
    n: usize,
    k: u32,
}

impl JetSpace {
    /// Fails when `∫_1^∞ ω(s)/s^m ds < ∞`, since `φ_α(·; v)` with `|α| = L`
    /// is then bounded and has no inverse on all of `R_+`.
    pub fn new(modulus: Modulus, n: usize, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("dimension n must be at least 1".into()));
        }
        if modulus.order() == 0 {
            return Err(Error::InvalidModulus("jet spaces need order m >= 1".into()));
        }
        if !modulus.tail_diverges() {
            return Err(Error::InvalidModulus(
                "∫_1^∞ ω(s)/s^m ds must diverge for φ_α to be invertible".into(),
            ));
        }
        Ok(JetSpace { modulus, n, k })
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.modulus.order()
    }

    /// `L = k + m − 1`
    pub fn l(&self) -> u32 {
        self.k + self.m() - 1
    }

    /// A jet whose polynomial is lifted to degree bound `L`.
    pub fn jet(&self, poly: Poly, cube: Cube) -> Result<Jet> {
        if poly.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: poly.n() });
        }
        Jet::new(poly.with_degree(self.l())?, cube)
    }

    fn check(&self, jet: &Jet) -> Result<()> {
        if jet.cube.dim() != self.n || jet.poly.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: jet.cube.dim() });
        }
        if jet.poly.degree() != self.l() {
            return Err(Error::DegreeMismatch { expected: self.l(), found: jet.poly.degree() });
        }
        Ok(())
    }

    fn check_alpha(&self, alpha: &MultiIndex) -> Result<u32> {
        if alpha.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: alpha.dim() });
        }
        let order = alpha.order();
        if order > self.l() {
            return Err(Error::DegreeMismatch { expected: self.l(), found: order });
        }
        Ok(order)
    }

    /// `φ_α(t; v)`
    pub fn phi_alpha(&self, alpha: &MultiIndex, t: f64, v: f64) -> Result<f64> {
        let order = self.check_alpha(alpha)?;
        check_positive(v, "v")?;
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t = {t} must be >= 0")));
        }
        Ok(phi(&self.modulus, self.l(), order, t, v))
    }

    /// `φ_α^{−1}(u; v)`
    pub fn phi_alpha_inv(&self, alpha: &MultiIndex, u: f64, v: f64) -> Result<f64> {
        let order = self.check_alpha(alpha)?;
        check_positive(v, "v")?;
        if !(u >= 0.0) {
            return Err(Error::Domain(format!("u = {u} must be >= 0")));
        }
        Ok(self.phi_inv(order, u, v))
    }

    pub(crate) fn phi_inv(&self, order: u32, u: f64, v: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let p = self.l() - order;
        if p == 0 {
            return self.modulus.core_span_inverse(v, u);
        }
        let pf = f64::from(p);
        invert_increasing(
            |t| {
                let core = self.modulus.core_span(v, t);
                let tp = t.powi(p as i32);
                (tp * core, pf * tp / t * core + tp * self.modulus.density(v + t))
            },
            u,
        )
    }

    /// `h^{−1}(t; v)` where `h(t; v) = ∫_v^{v+t} ω(s)/s^m ds`.
    pub fn h_inv(&self, t: f64, v: f64) -> f64 {
        self.modulus.core_span_inverse(v, t)
    }

    /// `ψ_α(u; v)`, the inverse of `t ↦ t · h^{−1}(t; v)^{L−|α|}`.
    pub fn psi(&self, order: u32, u: f64, v: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let p = self.l() - order;
        if p == 0 {
            return u;
        }
        let pf = f64::from(p);
        invert_increasing(
            |t| {
                let w = self.h_inv(t, v);
                let wp = w.powi(p as i32);
                // d/dt h^{-1}(t) = 1 / h'(h^{-1}(t))
                let dw = 1.0 / self.modulus.density(v + w);
                (t * wp, wp + t * pf * wp / w * dw)
            },
            u,
        )
    }

    /// `|D^α(P1 − P2)(y)|` for every `α` with `|α| ≤ L`, paired with `|α|`.
    fn discrepancies(&self, t1: &Jet, t2: &Jet, y: &Point) -> Result<Vec<(u32, f64)>> {
        let diff = t1.poly.sub(&t2.poly)?;
        Ok(basis(self.n, self.l()).iter().map(|a| (a.order(), diff.deriv_eval(a, y).abs())).collect())
    }

    fn points<'a>(&self, t1: &'a Jet, t2: &'a Jet, at: Option<&'a Point>) -> Result<Vec<&'a Point>> {
        self.check(t1)?;
        self.check(t2)?;
        Ok(match at {
            Some(y) => {
                if y.dim() != self.n {
                    return Err(Error::DimensionMismatch { expected: self.n, found: y.dim() });
                }
                vec![y]
            }
            None => vec![t1.cube.center(), t2.cube.center()],
        })
    }

    /// `Δ(T1, T2)`, or `Δ(T1, T2; y)` when `at = Some(y)`.
    pub fn capital_delta(&self, t1: &Jet, t2: &Jet, at: Option<&Point>) -> Result<f64> {
        let (lo, hi, d) = pair_scales(&t1.cube, &t2.cube);
        let mut value = hi + d;
        for y in self.points(t1, t2, at)? {
            for (order, u) in self.discrepancies(t1, t2, y)? {
                value = value.max(self.phi_inv(order, u, lo));
            }
        }
        Ok(value)
    }

    /// `δ_ω(T1, T2) = ∫_v^{v+Δ} ω(s)/s^m ds` with `v = min{r1, r2}`, or the
    /// pointwise variant `δ_ω(T1, T2; y)`.
    pub fn delta(&self, t1: &Jet, t2: &Jet, at: Option<&Point>) -> Result<f64> {
        if t1 == t2 {
            self.check(t1)?;
            return Ok(0.0);
        }
        let big = self.capital_delta(t1, t2, at)?;
        let (lo, _, _) = pair_scales(&t1.cube, &t2.cube);
        Ok(self.modulus.core_span(lo, big))
    }

    /// `δ_ω` by the explicit formula: the cube integral, top-order derivative
    /// gaps taken as they are, and `∫_v^{v+φ_α^{−1}}` for lower orders.
    pub fn delta_explicit(&self, t1: &Jet, t2: &Jet) -> Result<f64> {
        if t1 == t2 {
            self.check(t1)?;
            return Ok(0.0);
        }
        let (lo, hi, d) = pair_scales(&t1.cube, &t2.cube);
        let mut value = self.modulus.core_span(lo, hi + d);
        for y in self.points(t1, t2, None)? {
            for (order, u) in self.discrepancies(t1, t2, y)? {
                let term = if order == self.l() {
                    u
                } else {
                    self.modulus.core_span(lo, self.phi_inv(order, u, lo))
                };
                value = value.max(term);
            }
        }
        Ok(value)
    }

    /// `δ_ω(T1, T2; y)` as `max{ρ-integral, max_α ψ_α(|D^α(P1 − P2)(y)|; v)}`.
    pub fn delta_via_psi(&self, t1: &Jet, t2: &Jet, y: &Point) -> Result<f64> {
        if t1 == t2 {
            self.check(t1)?;
            return Ok(0.0);
        }
        let (lo, hi, d) = pair_scales(&t1.cube, &t2.cube);
        let mut value = self.modulus.core_span(lo, hi + d);
        for y in self.points(t1, t2, Some(y))? {
            for (order, u) in self.discrepancies(t1, t2, y)? {
                value = value.max(self.psi(order, u, lo));
            }
        }
        Ok(value)
    }

    /// `ρ_ω(Q1, Q2)` for the cubes of two jets.
    pub fn rho_omega(&self, q1: &Cube, q2: &Cube) -> f64 {
        rho_omega_unchecked(&self.modulus, q1, q2)
    }
}

fn check_positive(v: f64, name: &str) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("{name} = {v} must be positive")));
    }
    Ok(())
}

fn check_closed_form_pair(t1: &Jet, t2: &Jet, degree: u32) -> Result<()> {
    for t in [t1, t2] {
        if t.poly.degree() != degree {
            return Err(Error::DegreeMismatch { expected: degree, found: t.poly.degree() });
        }
    }
    if t1.cube.dim() != t2.cube.dim() {
        return Err(Error::DimensionMismatch { expected: t1.cube.dim(), found: t2.cube.dim() });
    }
    Ok(())
}

/// Inverse of `s ↦ s (e^s − 1)^p`.
pub fn zygmund_psi_inv(p: u32, u: f64) -> f64 {
    if p == 0 {
        return u.max(0.0);
    }
    let pf = f64::from(p);
    invert_increasing(
        |s| {
            let g = s.exp_m1();
            let gp = g.powi(p as i32);
            (s * gp, gp + s * pf * gp / g * s.exp())
        },
        u,
    )
}

/// Closed-form `δ` for `ω(t) = t^{m−1}` on `P_{m−1} × K`:
/// `max{ln(1 + (max r + ‖x1 − x2‖)/min r), ψ_α^{−1}(|D^α(P1 − P2)(x_i)| / min r^{m−1−|α|})}`
/// with `ψ_α(s) = s (e^s − 1)^{m−1−|α|}`.
pub fn zygmund_delta(t1: &Jet, t2: &Jet, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::Invalid("order m must be at least 1".into()));
    }
    check_closed_form_pair(t1, t2, m - 1)?;
    if t1 == t2 {
        return Ok(0.0);
    }
    let (lo, hi, d) = pair_scales(&t1.cube, &t2.cube);
    let diff = t1.poly.sub(&t2.poly)?;
    let mut value = ((hi + d) / lo).ln_1p();
    for x in [t1.cube.center(), t2.cube.center()] {
        for alpha in basis(diff.n(), m - 1).iter() {
            let p = m - 1 - alpha.order();
            let u = diff.deriv_eval(alpha, x).abs() / lo.powi(p as i32);
            value = value.max(zygmund_psi_inv(p, u));
        }
    }
    Ok(value)
}

/// Closed-form `δ` for `ω(t) = t`, `m = 1` on `P_k × K`:
/// `max{max r + ‖x1 − x2‖, |D^α(P1 − P2)(x_i)|^{1/(k+1−|α|)}}`.
pub fn sobolev_delta(t1: &Jet, t2: &Jet, k: u32) -> Result<f64> {
    check_closed_form_pair(t1, t2, k)?;
    if t1 == t2 {
        return Ok(0.0);
    }
    let (_, hi, d) = pair_scales(&t1.cube, &t2.cube);
    let diff = t1.poly.sub(&t2.poly)?;
    let mut value = hi + d;
    for x in [t1.cube.center(), t2.cube.center()] {
        for alpha in basis(diff.n(), k).iter() {
            let u = diff.deriv_eval(alpha, x).abs();
            value = value.max(u.powf(1.0 / f64::from(k + 1 - alpha.order())));
        }
    }
    Ok(value)
}

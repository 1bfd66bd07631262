//! Moduli of continuity `ω ∈ Ω_m` and the weighted integrals
//! `∫ ω(s) s^{-p} ds` that every cube and jet metric is built from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{
    adaptive_simpson, invert_increasing, power_integral, power_integral_span, power_integral_span_inverse,
};

/// Relative tolerance of the quadrature path.
pub const QUADRATURE_REL_TOL: f64 = 1e-10;

/// Relative slack used by [`Modulus::check_omega_m`].
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `ω(t) = t^q`
    Power,
    /// `ω(t) = t^q · ln(e + 1/t)`
    PowerLog,
    /// Log-linear interpolation of a knot table.
    Table,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Power { q: f64 },
    PowerLog { q: f64 },
    Table { knots: Vec<(f64, f64)> },
}

/// A modulus of continuity of order `m`.
///
/// Tables are interpolated log-linearly between knots, so `ω` is a power
/// law on every segment. Below the first knot the first segment's power law
/// is continued down to `ω(0) = 0`. [`Modulus::eval`] rejects arguments past
/// the last knot, while the integrals continue the last segment's power law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModulusRepr", into = "ModulusRepr")]
pub struct Modulus {
    kind: Kind,
    m: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum ModulusRepr {
    Power { q: f64, m: u32 },
    PowerLog { q: f64, m: u32 },
    Table { m: u32, knots: Vec<[f64; 2]> },
}

impl TryFrom<ModulusRepr> for Modulus {
    type Error = Error;

    fn try_from(repr: ModulusRepr) -> Result<Self> {
        match repr {
            ModulusRepr::Power { q, m } => Modulus::power(q, m),
            ModulusRepr::PowerLog { q, m } => Modulus::power_log(q, m),
            ModulusRepr::Table { m, knots } => {
                Modulus::table(knots.into_iter().map(|[t, w]| (t, w)).collect(), m)
            }
        }
    }
}

impl From<Modulus> for ModulusRepr {
    fn from(modulus: Modulus) -> Self {
        let m = modulus.m;
        match modulus.kind {
            Kind::Power { q } => ModulusRepr::Power { q, m },
            Kind::PowerLog { q } => ModulusRepr::PowerLog { q, m },
            Kind::Table { knots } => ModulusRepr::Table {
                m,
                knots: knots.into_iter().map(|(t, w)| [t, w]).collect(),
            },
        }
    }
}

/// Outcome of [`Modulus::check_omega_m`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub monotone: bool,
    pub ratio_non_increasing: bool,
    /// Largest relative decrease of `ω` between consecutive grid points
    /// (positive means a violation).
    pub worst_monotone_violation: f64,
    /// Largest relative increase of `ω(t)/t^m` (positive means a violation).
    pub worst_ratio_violation: f64,
}

impl MembershipReport {
    pub fn is_member(&self) -> bool {
        self.monotone && self.ratio_non_increasing
    }
}

/// Sampled lower bound for the quasipower constant `C_ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasipowerEstimate {
    pub estimate: f64,
    /// `false` when `∫_0^t ω(s) ds/s` diverges.
    pub bounded: bool,
}

fn check_order_and_q(q: f64, m: u32) -> Result<()> {
    if !q.is_finite() || q < 0.0 {
        return Err(Error::InvalidModulus(format!("exponent q = {q} must be finite and >= 0")));
    }
    if m > 32 {
        return Err(Error::InvalidModulus(format!("order m = {m} is unreasonably large")));
    }
    Ok(())
}

impl Modulus {
    /// `ω(t) = t^q`.
    pub fn power(q: f64, m: u32) -> Result<Self> {
        check_order_and_q(q, m)?;
        Ok(Modulus { kind: Kind::Power { q }, m })
    }

    /// `ω(t) = t^q · ln(e + 1/t)`, integrated by quadrature.
    pub fn power_log(q: f64, m: u32) -> Result<Self> {
        check_order_and_q(q, m)?;
        if q == 0.0 {
            return Err(Error::InvalidModulus("power_log requires q > 0".into()));
        }
        Ok(Modulus { kind: Kind::PowerLog { q }, m })
    }

    /// Log-linear interpolation of `(t, ω(t))` knots; needs at least two
    /// knots, strictly increasing `t > 0` and positive finite values.
    pub fn table(knots: Vec<(f64, f64)>, m: u32) -> Result<Self> {
        check_order_and_q(0.0, m)?;
        if knots.len() < 2 {
            return Err(Error::InvalidModulus("a table needs at least two knots".into()));
        }
        for (i, &(t, w)) in knots.iter().enumerate() {
            if !(t.is_finite() && t > 0.0 && w.is_finite() && w > 0.0) {
                return Err(Error::InvalidModulus(format!("knot {i} = ({t}, {w}) must be positive and finite")));
            }
            if i > 0 && t <= knots[i - 1].0 {
                return Err(Error::InvalidModulus("knot abscissae must be strictly increasing".into()));
            }
        }
        Ok(Modulus { kind: Kind::Table { knots }, m })
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Power { .. } => Family::Power,
            Kind::PowerLog { .. } => Family::PowerLog,
            Kind::Table { .. } => Family::Table,
        }
    }

    /// The order `m` of `Ω_m`.
    pub fn order(&self) -> u32 {
        self.m
    }

    /// The exponent of the power families.
    pub fn exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::Power { q } | Kind::PowerLog { q } => Some(q),
            Kind::Table { .. } => None,
        }
    }

    /// Whether `∫_1^∞ ω(s)/s^m ds` diverges. Jet quasi-distances need this:
    /// otherwise `φ_α(·; v)` is bounded for `|α| = L`.
    pub fn tail_diverges(&self) -> bool {
        let m = self.m as f64;
        match &self.kind {
            Kind::Power { q } | Kind::PowerLog { q } => *q >= m - 1.0,
            Kind::Table { knots } => table_slope(knots, knots.len() - 2) >= m - 1.0,
        }
    }

    /// `ω(t)`; tables reject `t` past the last knot.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("modulus evaluated at t = {t} < 0")));
        }
        if let Kind::Table { knots } = &self.kind {
            let last = knots[knots.len() - 1].0;
            if t > last {
                return Err(Error::BeyondTable { t, last });
            }
        }
        Ok(self.value(t))
    }

    /// `ω(t)` with the table's last segment continued past the last knot.
    pub(crate) fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Power { q } => t.powf(*q),
            Kind::PowerLog { q } => t.powf(*q) * (std::f64::consts::E + 1.0 / t).ln(),
            Kind::Table { knots } => {
                let (t0, w0, slope) = table_segment(knots, t);
                w0 * (t / t0).powf(slope)
            }
        }
    }

    /// Integrand `ω(s)/s^m` of the core integral.
    pub(crate) fn density(&self, s: f64) -> f64 {
        self.value(s) / s.powi(self.m as i32)
    }

    /// `∫_a^b ω(s) s^{-p} ds` for `0 < a ≤ b ≤ ∞` (closed form except for
    /// the power-log family).
    pub(crate) fn weighted(&self, a: f64, b: f64, p: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        match &self.kind {
            Kind::Power { q } => power_integral(q - p, a, b),
            Kind::PowerLog { .. } => self.weighted_quadrature(a, b, p),
            Kind::Table { knots } => table_weighted(knots, a, b, p),
        }
    }

    fn weighted_quadrature(&self, a: f64, b: f64, p: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        // s = e^u keeps the integrand smooth over many decades
        let f = |u: f64| {
            let s = u.exp();
            self.value(s) * (u * (1.0 - p)).exp()
        };
        adaptive_simpson(&f, a.ln(), b.ln(), QUADRATURE_REL_TOL)
    }

    /// `∫_a^b ω(s)/s^m ds` without argument checks.
    pub(crate) fn core(&self, a: f64, b: f64) -> f64 {
        self.weighted(a, b, self.m as f64)
    }

    /// `∫_v^{v+h} ω(s)/s^m ds`, exact in `h` for short spans on the power
    /// family.
    pub(crate) fn core_span(&self, v: f64, h: f64) -> f64 {
        match &self.kind {
            Kind::Power { q } => power_integral_span(q - self.m as f64, v, h),
            _ => self.core(v, v + h),
        }
    }

    /// Inverse of `h ↦ ∫_v^{v+h} ω(s)/s^m ds`; `+∞` past a convergent tail.
    pub(crate) fn core_span_inverse(&self, v: f64, u: f64) -> f64 {
        match &self.kind {
            Kind::Power { q } => power_integral_span_inverse(q - self.m as f64, v, u),
            _ => invert_increasing(|h| (self.core_span(v, h), self.density(v + h)), u),
        }
    }

    /// `∫_a^b ω(s)/s^m ds` for `0 < a ≤ b`.
    pub fn integral_core(&self, a: f64, b: f64) -> Result<f64> {
        check_interval(a, b)?;
        Ok(self.core(a, b))
    }

    /// The quadrature route for `∫_a^b ω(s)/s^m ds`, available for every
    /// family. Used to cross-check the closed forms.
    pub fn integral_core_quadrature(&self, a: f64, b: f64) -> Result<f64> {
        check_interval(a, b)?;
        if b.is_infinite() {
            return Err(Error::Domain("quadrature needs a finite upper limit".into()));
        }
        Ok(self.weighted_quadrature(a, b, self.m as f64))
    }

    /// `∫_a^b ω(t) t^{-p-1} dt`.
    pub fn integral_weighted(&self, a: f64, b: f64, p: i32) -> Result<f64> {
        check_interval(a, b)?;
        Ok(self.weighted(a, b, p as f64 + 1.0))
    }

    /// `∫_0^t ω(s) ds/s`, `+∞` when it diverges at 0.
    fn integral_from_zero_dlog(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Power { q } => {
                if *q > 0.0 {
                    t.powf(*q) / q
                } else {
                    f64::INFINITY
                }
            }
            Kind::Table { knots } => {
                let (t0, w0) = knots[0];
                let head_slope = table_slope(knots, 0);
                if head_slope <= 0.0 {
                    return f64::INFINITY;
                }
                if t <= t0 {
                    return w0 * (t / t0).powf(head_slope) / head_slope;
                }
                w0 / head_slope + table_weighted(knots, t0, t, 1.0)
            }
            Kind::PowerLog { q } => {
                let q = *q;
                let s0 = t.min(0.5 / std::f64::consts::E);
                // ln(e + 1/s) = ln(1 + e s) - ln s
                let log_part = s0.powf(q) * (1.0 / (q * q) - s0.ln() / q);
                let es0 = std::f64::consts::E * s0;
                let mut series = 0.0;
                let mut power = 1.0;
                for j in 1..200 {
                    power *= es0;
                    let term = power * s0.powf(q) / (j as f64 * (q + j as f64));
                    series += if j % 2 == 1 { term } else { -term };
                    if term < 1e-18 * series.abs() {
                        break;
                    }
                }
                let rest = if t > s0 { self.weighted_quadrature(s0, t, 1.0) } else { 0.0 };
                log_part + series + rest
            }
        }
    }

    /// Checks `ω` non-decreasing and `ω(t)/t^m` non-increasing on `grid`.
    pub fn check_omega_m(&self, grid: &[f64]) -> Result<MembershipReport> {
        if grid.is_empty() {
            return Err(Error::Empty("membership grid".into()));
        }
        for (i, &t) in grid.iter().enumerate() {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("grid point {t} must be positive")));
            }
            if i > 0 && t < grid[i - 1] {
                return Err(Error::Domain("grid must be sorted ascending".into()));
            }
        }
        let values = grid.iter().map(|&t| self.eval(t)).collect::<Result<Vec<_>>>()?;
        let m = self.m as i32;
        let mut worst_mono = f64::NEG_INFINITY;
        let mut worst_ratio = f64::NEG_INFINITY;
        for i in 1..grid.len() {
            let (w0, w1) = (values[i - 1], values[i]);
            let drop = (w0 - w1) / w0.abs().max(f64::MIN_POSITIVE);
            worst_mono = worst_mono.max(drop);
            let (r0, r1) = (w0 / grid[i - 1].powi(m), w1 / grid[i].powi(m));
            let rise = (r1 - r0) / r0.abs().max(f64::MIN_POSITIVE);
            worst_ratio = worst_ratio.max(rise);
        }
        if grid.len() == 1 {
            worst_mono = 0.0;
            worst_ratio = 0.0;
        }
        Ok(MembershipReport {
            monotone: worst_mono <= MEMBERSHIP_SLACK,
            ratio_non_increasing: worst_ratio <= MEMBERSHIP_SLACK,
            worst_monotone_violation: worst_mono,
            worst_ratio_violation: worst_ratio,
        })
    }

    /// `sup_t (1/ω(t)) ∫_0^t ω(s) ds/s` over the grid: a sampled lower
    /// bound for `C_ω`.
    pub fn quasipower_constant(&self, grid: &[f64]) -> Result<QuasipowerEstimate> {
        if grid.is_empty() {
            return Err(Error::Empty("quasipower grid".into()));
        }
        let mut estimate: f64 = 0.0;
        for &t in grid {
            if !(t > 0.0) {
                return Err(Error::Domain(format!("grid point {t} must be positive")));
            }
            let w = self.value(t);
            if w == 0.0 {
                return Err(Error::Domain(format!("ω({t}) = 0")));
            }
            if let Kind::Power { q } = &self.kind {
                estimate = estimate.max(if *q > 0.0 { 1.0 / q } else { f64::INFINITY });
                continue;
            }
            estimate = estimate.max(self.integral_from_zero_dlog(t) / w);
        }
        Ok(QuasipowerEstimate { estimate, bounded: estimate.is_finite() })
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("lower limit a = {a} must be positive")));
    }
    if !(b >= a) {
        return Err(Error::Domain(format!("upper limit b = {b} is below a = {a}")));
    }
    Ok(())
}

/// Log-slope of segment `j` (between knots `j` and `j + 1`).
fn table_slope(knots: &[(f64, f64)], j: usize) -> f64 {
    let (t0, w0) = knots[j];
    let (t1, w1) = knots[j + 1];
    (w1 / w0).ln() / (t1 / t0).ln()
}

/// Anchor and slope of the power law covering `t`.
fn table_segment(knots: &[(f64, f64)], t: f64) -> (f64, f64, f64) {
    let last = knots.len() - 1;
    let j = match knots.iter().position(|&(tk, _)| tk > t) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => last - 1,
    };
    let (tj, wj) = knots[j];
    (tj, wj, table_slope(knots, j))
}

/// Breakpoints of the piecewise power law as `(start, anchor_t, anchor_w, slope)`.
fn table_pieces(knots: &[(f64, f64)]) -> Vec<(f64, f64, f64, f64)> {
    let last = knots.len() - 1;
    let mut pieces = Vec::with_capacity(knots.len());
    for j in 0..last {
        let start = if j == 0 { 0.0 } else { knots[j].0 };
        pieces.push((start, knots[j].0, knots[j].1, table_slope(knots, j)));
    }
    pieces
}

fn table_weighted(knots: &[(f64, f64)], a: f64, b: f64, p: f64) -> f64 {
    let pieces = table_pieces(knots);
    let mut total = 0.0;
    for (i, &(start, tj, wj, slope)) in pieces.iter().enumerate() {
        let end = pieces.get(i + 1).map_or(f64::INFINITY, |next| next.0);
        let lo = a.max(start);
        let hi = b.min(end);
        if hi <= lo {
            continue;
        }
        // ∫ w (s/t)^σ s^{-p} ds = w t^{1-p} ∫ u^{σ-p} du over [lo/t, hi/t]
        total += wj * tj.powf(1.0 - p) * power_integral(slope - p, lo / tj, hi / tj);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn eval_examples() {
        let lin = Modulus::power(1.0, 1).unwrap();
        assert_eq!(lin.eval(0.0).unwrap(), 0.0);
        let sq = Modulus::power(2.0, 2).unwrap();
        assert_eq!(sq.eval(3.0).unwrap(), 9.0);
        let table = Modulus::table(vec![(1.0, 1.0), (4.0, 2.0)], 1).unwrap();
        assert!(rel(table.eval(2.0).unwrap(), 2f64.sqrt()) < 1e-15);
        assert_eq!(table.eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn eval_errors() {
        let table = Modulus::table(vec![(1.0, 1.0), (4.0, 2.0)], 1).unwrap();
        assert!(matches!(table.eval(5.0), Err(Error::BeyondTable { .. })));
        assert!(matches!(table.eval(-1.0), Err(Error::Domain(_))));
        assert!(Modulus::table(vec![(1.0, 1.0)], 1).is_err());
        assert!(Modulus::table(vec![(2.0, 1.0), (1.0, 2.0)], 1).is_err());
        assert!(Modulus::power(-1.0, 1).is_err());
    }

    #[test]
    fn omega_m_membership_examples() {
        let grid: Vec<f64> = (1..50).map(|i| 0.1 * i as f64).collect();
        let m = 3;
        let below = Modulus::power(m as f64 - 1.0, m).unwrap();
        assert!(below.check_omega_m(&grid).unwrap().is_member());
        let above = Modulus::power(m as f64 + 1.0, m).unwrap();
        let report = above.check_omega_m(&[1.0, 2.0]).unwrap();
        assert!(report.monotone);
        assert!(!report.ratio_non_increasing);
        assert!((report.worst_ratio_violation - 1.0).abs() < 1e-15);
        let flat = Modulus::power(0.0, m).unwrap();
        assert!(flat.check_omega_m(&grid).unwrap().monotone);
        assert!(below.check_omega_m(&[]).is_err());
    }

    #[test]
    fn core_integral_examples() {
        let m = 2;
        let log = Modulus::power(m as f64 - 1.0, m).unwrap();
        assert_eq!(log.integral_core(2.0, 2.0).unwrap(), 0.0);
        assert!(rel(log.integral_core(1.0, 3.0).unwrap(), 3f64.ln()) < 1e-15);
        let lin = Modulus::power(1.0, 1).unwrap();
        assert!(rel(lin.integral_core(1.0, 2.5).unwrap(), 1.5) < 1e-15);
        assert!(lin.integral_core(0.0, 1.0).is_err());
        assert!(lin.integral_core(2.0, 1.0).is_err());
    }

    #[test]
    fn weighted_integral_examples() {
        let sq = Modulus::power(2.0, 2).unwrap();
        // q - p - 1 = -1
        assert!(rel(sq.integral_weighted(1.0, 5.0, 2).unwrap(), 5f64.ln()) < 1e-15);
        assert_eq!(sq.integral_weighted(3.0, 3.0, 0).unwrap(), 0.0);
        assert!(rel(sq.integral_weighted(1.0, 2.0, 0).unwrap(), 1.5) < 1e-15);
    }

    #[test]
    fn quadrature_agrees_with_closed_forms() {
        for &(q, m) in &[(1.0, 1), (1.0, 2), (0.5, 1), (2.0, 3), (1.5, 2)] {
            let w = Modulus::power(q, m).unwrap();
            for &(a, b) in &[(1e-3, 10.0), (0.5, 0.7), (1.0, 1000.0)] {
                let exact = w.integral_core(a, b).unwrap();
                let quad = w.integral_core_quadrature(a, b).unwrap();
                assert!(rel(quad, exact) < 1e-8, "q={q} m={m} [{a},{b}]: {quad} vs {exact}");
            }
        }
        let table = Modulus::table(vec![(0.1, 0.05), (1.0, 0.9), (3.0, 2.0)], 2).unwrap();
        for &(a, b) in &[(0.01, 0.5), (0.05, 8.0), (2.0, 2.5)] {
            let exact = table.integral_core(a, b).unwrap();
            let quad = table.integral_core_quadrature(a, b).unwrap();
            assert!(rel(quad, exact) < 1e-8, "table [{a},{b}]: {quad} vs {exact}");
        }
    }

    #[test]
    fn quasipower_examples() {
        let grid = [0.01, 0.1, 1.0, 10.0];
        for &s in &[0.5, 1.0, 2.5] {
            let w = Modulus::power(s, 3).unwrap();
            let est = w.quasipower_constant(&grid).unwrap();
            assert!(est.bounded);
            assert!(rel(est.estimate, 1.0 / s) < 1e-15);
        }
        let flat = Modulus::power(0.0, 1).unwrap();
        assert!(!flat.quasipower_constant(&grid).unwrap().bounded);
        // t·φ(t) with φ(t) = ln(2 + t) non-decreasing
        let knots: Vec<(f64, f64)> =
            (0..12).map(|i| 0.01 * 2f64.powi(i)).map(|t| (t, t * (2.0 + t).ln())).collect();
        let table = Modulus::table(knots, 2).unwrap();
        let grid: Vec<f64> = (0..40).map(|i| 0.005 * 1.2f64.powi(i)).filter(|&t| t <= 20.0).collect();
        let est = table.quasipower_constant(&grid).unwrap();
        assert!(est.bounded && est.estimate <= 1.0 + 1e-12, "{est:?}");
    }

    #[test]
    fn power_log_quasipower_matches_quadrature() {
        let w = Modulus::power_log(1.0, 1).unwrap();
        let t = 2.0;
        let head = w.integral_from_zero_dlog(1e-9);
        let body = w.weighted_quadrature(1e-9, t, 1.0);
        let total = w.integral_from_zero_dlog(t);
        assert!(rel(head + body, total) < 1e-9);
    }

    #[test]
    fn serde_round_trip() {
        let w: Modulus = serde_json::from_str(r#"{"family":"power","q":1.0,"m":2}"#).unwrap();
        assert_eq!(w, Modulus::power(1.0, 2).unwrap());
        let t: Modulus =
            serde_json::from_str(r#"{"family":"table","m":2,"knots":[[1.0,1.0],[4.0,2.0]]}"#).unwrap();
        assert_eq!(t.family(), Family::Table);
        let back: Modulus = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Modulus>(r#"{"family":"table","m":2,"knots":[[1.0,1.0]]}"#).is_err());
    }
}

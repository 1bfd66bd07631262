//! Trace checking on finite sets: finite differences, sup-norm local fits,
//! the boundedness and pairwise conditions on polynomial fields, the LO
//! seminorm and limit jets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{cube_family, Cube, Point};
use crate::error::{Error, Result};
use crate::jet::{phi, Jet, JetSpace};
use crate::lp::{LpProblem, Sense, Status};
use crate::modulus::Modulus;
use crate::poly::{basis, factorial, MultiIndex, Poly};

/// Data attached to one point of `S`.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleValue {
    Scalar(f64),
    Jet(Poly),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub x: Point,
    pub value: SampleValue,
}

#[derive(Serialize, Deserialize)]
struct SampleRepr {
    x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    jet: Option<Poly>,
}

/// A finite set `S ⊂ R^n` with scalar values (`k = 0`) or jets of degree
/// `≤ k` at each point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleSetRepr", into = "SampleSetRepr")]
pub struct SampleSet {
    n: usize,
    k: u32,
    omega: Modulus,
    samples: Vec<Sample>,
}

#[derive(Serialize, Deserialize)]
struct SampleSetRepr {
    n: usize,
    k: u32,
    m: u32,
    omega: Modulus,
    points: Vec<SampleRepr>,
}

impl TryFrom<SampleSetRepr> for SampleSet {
    type Error = Error;
    fn try_from(r: SampleSetRepr) -> Result<Self> {
        if r.omega.order() != r.m {
            return Err(Error::InvalidModulus(format!(
                "modulus has order {} but the sample set declares m = {}",
                r.omega.order(),
                r.m
            )));
        }
        let mut samples = Vec::with_capacity(r.points.len());
        for (i, p) in r.points.into_iter().enumerate() {
            let value = match (p.f, p.jet) {
                (Some(f), None) => SampleValue::Scalar(f),
                (None, Some(j)) => SampleValue::Jet(j),
                _ => return Err(Error::Invalid(format!("point {i} needs exactly one of \"f\" and \"jet\""))),
            };
            samples.push(Sample { x: Point(p.x), value });
        }
        SampleSet::new(r.n, r.k, r.omega, samples)
    }
}

impl From<SampleSet> for SampleSetRepr {
    fn from(s: SampleSet) -> Self {
        SampleSetRepr {
            n: s.n,
            k: s.k,
            m: s.omega.order(),
            omega: s.omega,
            points: s
                .samples
                .into_iter()
                .map(|smp| match smp.value {
                    SampleValue::Scalar(f) => SampleRepr { x: smp.x.0, f: Some(f), jet: None },
                    SampleValue::Jet(p) => SampleRepr { x: smp.x.0, f: None, jet: Some(p) },
                })
                .collect(),
        }
    }
}

impl SampleSet {
    /// Jets are lifted to degree bound `k`; scalar data requires `k = 0`.
    pub fn new(n: usize, k: u32, omega: Modulus, samples: Vec<Sample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("a sample set needs at least one point".into()));
        }
        if omega.order() == 0 {
            return Err(Error::InvalidModulus("order m must be at least 1".into()));
        }
        let mut out = Vec::with_capacity(samples.len());
        for (i, s) in samples.into_iter().enumerate() {
            if s.x.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.x.dim() });
            }
            if out.iter().any(|o: &Sample| o.x == s.x) {
                return Err(Error::Invalid(format!("point {i} repeats an earlier point")));
            }
            let value = match s.value {
                SampleValue::Scalar(f) if k == 0 => SampleValue::Scalar(f),
                SampleValue::Scalar(_) => {
                    return Err(Error::Invalid(format!("point {i}: scalar data needs k = 0, got k = {k}")))
                }
                SampleValue::Jet(p) => {
                    if p.n() != n {
                        return Err(Error::DimensionMismatch { expected: n, found: p.n() });
                    }
                    SampleValue::Jet(p.with_degree(k)?)
                }
            };
            out.push(Sample { x: s.x, value });
        }
        Ok(SampleSet { n, k, omega, samples: out })
    }

    /// Scalar samples of `f` at `points`.
    pub fn from_function<F: Fn(&Point) -> f64>(omega: Modulus, points: Vec<Point>, f: F) -> Result<Self> {
        let n = points.first().map_or(0, Point::dim);
        let samples = points.into_iter().map(|x| Sample { value: SampleValue::Scalar(f(&x)), x }).collect();
        SampleSet::new(n, 0, omega, samples)
    }

    /// Jets `T_x^k(p)` of a polynomial `p` at `points`.
    pub fn from_polynomial_jets(omega: Modulus, k: u32, points: Vec<Point>, p: &Poly) -> Result<Self> {
        let samples = points
            .into_iter()
            .map(|x| Sample { value: SampleValue::Jet(p.taylor(&x, k)), x })
            .collect();
        SampleSet::new(p.n(), k, omega, samples)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.omega.order()
    }

    /// `L = k + m − 1`
    pub fn l(&self) -> u32 {
        self.k + self.m() - 1
    }

    pub fn omega(&self) -> &Modulus {
        &self.omega
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn points(&self) -> Vec<Point> {
        self.samples.iter().map(|s| s.x.clone()).collect()
    }

    fn index_of(&self, x: &Point) -> Option<usize> {
        self.samples.iter().position(|s| &s.x == x)
    }
}

/// `Δ_h^m f(x) = Σ_{i=0}^m (−1)^{m−i} C(m, i) f(x + i h)`
pub fn finite_difference<F: Fn(&Point) -> f64>(f: F, x: &Point, h: &Point, m: u32) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    for i in 0..=m {
        let shift: Vec<f64> = h.coords().iter().map(|hj| f64::from(i) * hj).collect();
        let sign = if (m - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * binom * f(&x.translate(&shift));
        binom = binom * f64::from(m - i) / f64::from(i + 1);
    }
    total
}

/// Sampled lower bound for `Σ_{|α|≤k} sup|D^α f| + Σ_{|α|=k} sup |Δ_h^m D^α f(x)| / ω(‖h‖)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub sup_term: f64,
    pub difference_term: f64,
    pub total: f64,
}

/// Sampling plan for [`seminorm_estimate`]: base points `x` are drawn from
/// the box `[lower, upper]` and steps `h` from `[−diam, diam]^n` with
/// `diam` the box's uniform diameter; the `2^n` corner steps are always
/// included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormSampling {
    pub lower: Point,
    pub upper: Point,
    pub points: usize,
    pub steps: usize,
    pub seed: u64,
}

/// `derivative(α, x)` must return `D^α f(x)` for `|α| ≤ k`.
pub fn seminorm_estimate<D>(derivative: D, omega: &Modulus, k: u32, plan: &SeminormSampling) -> Result<SeminormEstimate>
where
    D: Fn(&MultiIndex, &Point) -> f64,
{
    let n = plan.lower.dim();
    if plan.upper.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: plan.upper.dim() });
    }
    let m = omega.order();
    if m == 0 {
        return Err(Error::InvalidModulus("order m must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let diam = plan.lower.dist(&plan.upper);
    let mut xs: Vec<Point> = vec![plan.lower.clone(), plan.upper.clone()];
    for _ in 0..plan.points {
        xs.push(Point(
            plan.lower.coords().iter().zip(plan.upper.coords()).map(|(a, b)| a + (b - a) * rng.gen::<f64>()).collect(),
        ));
    }
    let mut hs: Vec<Point> = (0..1usize << n)
        .map(|mask| Point((0..n).map(|j| if mask >> j & 1 == 1 { diam } else { -diam }).collect()))
        .collect();
    for _ in 0..plan.steps {
        hs.push(Point((0..n).map(|_| diam * (2.0 * rng.gen::<f64>() - 1.0)).collect()));
    }

    let mut sup_term = 0.0;
    for alpha in basis(n, k).iter() {
        sup_term += xs.iter().fold(0.0f64, |acc, x| acc.max(derivative(alpha, x).abs()));
    }
    let mut difference_term = 0.0;
    for alpha in basis(n, k).iter().filter(|a| a.order() == k) {
        let mut worst: f64 = 0.0;
        for x in &xs {
            for h in &hs {
                let norm = h.uniform_norm();
                if norm == 0.0 {
                    continue;
                }
                let diff = finite_difference(|y| derivative(alpha, y), x, h, m).abs();
                let w = omega.value(norm);
                if w == 0.0 {
                    if diff > 0.0 {
                        return Err(Error::Domain(format!("ω(‖h‖) = 0 at ‖h‖ = {norm} with a nonzero difference")));
                    }
                    continue;
                }
                worst = worst.max(diff / w);
            }
        }
        difference_term += worst;
    }
    Ok(SeminormEstimate { sup_term, difference_term, total: sup_term + difference_term })
}

/// A local sup-norm fit and its residual `max |P(y) − f(y)|` over the
/// support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub poly: Poly,
    pub residual: f64,
    pub support: usize,
}

/// Safety box on local fit coefficients.
const FIT_BOX: f64 = 1e6;

/// Degree-`≤ L` polynomial minimizing the sup-norm misfit on `support`, in
/// the local coordinates `z = (y − x_Q)/ρ` with `ρ` the support radius.
/// Ties are broken by the smallest `ℓ¹` norm of the local coefficients.
fn fit_on(s: &SampleSet, center: &Point, support: &[usize], l: u32, interpolate_center: bool) -> Result<Fit> {
    let n = s.n;
    let k = s.k;
    let rho = support
        .iter()
        .map(|&i| center.dist(&s.samples[i].x))
        .fold(0.0f64, f64::max);
    let rho = if rho > 0.0 { rho } else { 1.0 };
    let idx = basis(n, l);
    let dim = idx.len();
    let orders_k = basis(n, k);

    // local value targets: ρ^{|α|} D^α f_y(y) for |α| ≤ k at each support point
    let target = |i: usize, alpha: &MultiIndex| -> f64 {
        match &s.samples[i].value {
            SampleValue::Scalar(f) => *f,
            SampleValue::Jet(p) => p.deriv_eval(alpha, &s.samples[i].x) * rho.powi(alpha.order() as i32),
        }
    };
    let local_row = |z: &[f64], alpha: &MultiIndex| -> Vec<f64> {
        idx.iter()
            .map(|beta| {
                if !alpha.le(beta) {
                    return 0.0;
                }
                beta.0.iter().zip(&alpha.0).zip(z).map(|((&b, &a), &zj)| falling(b, a) * zj.powi((b - a) as i32)).product()
            })
            .collect()
    };

    let mut constraints: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut scale: f64 = 0.0;
    for &i in support {
        let z: Vec<f64> = s.samples[i].x.coords().iter().zip(center.coords()).map(|(y, c)| (y - c) / rho).collect();
        for alpha in orders_k.iter() {
            let t = target(i, alpha);
            scale = scale.max(t.abs());
            constraints.push((local_row(&z, alpha), t));
        }
    }
    let mut equalities: Vec<(Vec<f64>, f64)> = Vec::new();
    if interpolate_center {
        if let Some(ci) = s.index_of(center) {
            let zero = vec![0.0; n];
            for alpha in orders_k.iter() {
                equalities.push((local_row(&zero, alpha), target(ci, alpha)));
            }
        }
    }
    let scale = scale.max(1.0);

    // variables: c_0..c_{dim-1} (boxed free), t ≥ 0
    let build = |extra_l1: bool, t_cap: Option<f64>| -> LpProblem {
        let mut p = LpProblem::new(0);
        for _ in 0..dim {
            p.add_var(0.0, -FIT_BOX * scale, FIT_BOX * scale);
        }
        let t_var = p.add_var(if extra_l1 { 0.0 } else { 1.0 }, 0.0, f64::INFINITY);
        if let Some(cap) = t_cap {
            p.set_bounds(t_var, 0.0, cap);
        }
        for (row, rhs) in &constraints {
            let mut a = row.clone();
            a.push(-1.0);
            p.add_constraint(a.clone(), Sense::Le, *rhs);
            let mut b = row.clone();
            b.push(1.0);
            p.add_constraint(b, Sense::Ge, *rhs);
        }
        for (row, rhs) in &equalities {
            p.add_constraint(row.clone(), Sense::Eq, *rhs);
        }
        if extra_l1 {
            for j in 0..dim {
                let u = p.add_var(1.0, 0.0, f64::INFINITY);
                p.add_sparse(&[(u, 1.0), (j, -1.0)], Sense::Ge, 0.0);
                p.add_sparse(&[(u, 1.0), (j, 1.0)], Sense::Ge, 0.0);
            }
        }
        p
    };

    let first = build(false, None).solve()?;
    if first.status != Status::Optimal {
        return Err(Error::Lp(format!("{:?} while fitting", first.status).to_lowercase()));
    }
    let best = first.x[dim];
    let cap = best + 1e-13 * scale;
    let second = build(true, Some(cap)).solve()?;
    let coef = if second.status == Status::Optimal { &second.x[..dim] } else { &first.x[..dim] };

    let centered: Vec<f64> = idx.iter().zip(coef).map(|(b, c)| c / rho.powi(b.order() as i32)).collect();
    let poly = Poly::from_centered(n, l, center, &centered);
    let residual = support
        .iter()
        .map(|&i| {
            let y = &s.samples[i].x;
            match &s.samples[i].value {
                SampleValue::Scalar(f) => (poly.eval(y) - f).abs(),
                SampleValue::Jet(pj) => orders_k
                    .iter()
                    .map(|a| (poly.deriv_eval(a, y) - pj.deriv_eval(a, y)).abs())
                    .fold(0.0, f64::max),
            }
        })
        .fold(0.0, f64::max);
    Ok(Fit { poly, residual, support: support.len() })
}

fn falling(b: u32, a: u32) -> f64 {
    factorial(b) / factorial(b - a)
}

fn support_in(s: &SampleSet, q: &Cube) -> Vec<usize> {
    (0..s.samples.len()).filter(|&i| q.contains(&s.samples[i].x)).collect()
}

/// Sup-norm best fit of degree `≤ L` to the data on `Q ∩ S`. With jet data
/// the misfit is measured on `D^α`, `|α| ≤ k`, scaled by `ρ^{|α|}`.
pub fn local_fit(s: &SampleSet, q: &Cube, l: u32, interpolate_center: bool) -> Result<Fit> {
    if q.dim() != s.n {
        return Err(Error::DimensionMismatch { expected: s.n, found: q.dim() });
    }
    let support = support_in(s, q);
    if support.is_empty() {
        return Err(Error::Empty("the cube contains no sample point".into()));
    }
    fit_on(s, q.center(), &support, l, interpolate_center)
}

/// Local fit whose support is `Q ∩ S` enlarged by the nearest points of
/// `S` until it holds at least `dim P_L` points.
pub fn enlarged_fit(s: &SampleSet, q: &Cube, l: u32, interpolate_center: bool) -> Result<Fit> {
    let mut support = support_in(s, q);
    let need = basis(s.n, l).len();
    if support.len() < need {
        let mut rest: Vec<usize> = (0..s.samples.len()).filter(|i| !support.contains(i)).collect();
        rest.sort_by(|&a, &b| {
            let da = q.center().dist(&s.samples[a].x);
            let db = q.center().dist(&s.samples[b].x);
            da.total_cmp(&db).then(a.cmp(&b))
        });
        support.extend(rest.into_iter().take(need - support.len()));
        support.sort_unstable();
    }
    if support.is_empty() {
        return Err(Error::Empty("no sample points".into()));
    }
    fit_on(s, q.center(), &support, l, interpolate_center)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldEntry {
    pub cube: Cube,
    pub poly: Poly,
}

/// A finite mapping `Q ↦ P_Q` over a cube family, with `P_Q ∈ P_L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyField {
    pub n: usize,
    pub k: u32,
    pub m: u32,
    pub entries: Vec<FieldEntry>,
}

impl PolyField {
    pub fn new(n: usize, k: u32, m: u32, entries: Vec<FieldEntry>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Invalid("order m must be at least 1".into()));
        }
        let l = k + m - 1;
        let mut out = Vec::with_capacity(entries.len());
        for e in entries {
            if e.cube.dim() != n || e.poly.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: e.cube.dim() });
            }
            if out.iter().any(|o: &FieldEntry| o.cube == e.cube) {
                return Err(Error::Invalid("a field assigns one polynomial per cube".into()));
            }
            out.push(FieldEntry { poly: e.poly.with_degree(l)?, cube: e.cube });
        }
        Ok(PolyField { n, k, m, entries: out })
    }

    pub fn l(&self) -> u32 {
        self.k + self.m - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `γ P_Q` for every cube.
    pub fn scale(&self, gamma: f64) -> PolyField {
        let entries = self.entries.iter().map(|e| FieldEntry { cube: e.cube.clone(), poly: e.poly.scale(gamma) }).collect();
        PolyField { entries, ..self.clone() }
    }

    pub fn jets(&self) -> Vec<Jet> {
        self.entries.iter().map(|e| Jet { poly: e.poly.clone(), cube: e.cube.clone() }).collect()
    }
}

/// How [`build_field`] produces `P_Q` from trace data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Force `T^k_{x_Q}(P_Q)` to match the data at the cube center.
    pub interpolate_center: bool,
    /// Enlarge `Q ∩ S` to `dim P_L` nearest points when it is smaller.
    pub enlarge_support: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { interpolate_center: true, enlarge_support: true }
    }
}

/// Field over `K(S)` restricted to the given radii, fitted cube by cube.
pub fn build_field(s: &SampleSet, radii: &[f64], opts: FitOptions) -> Result<(PolyField, Vec<f64>)> {
    let cubes = cube_family(&s.points(), radii)?;
    let l = s.l();
    let mut entries = Vec::with_capacity(cubes.len());
    let mut residuals = Vec::with_capacity(cubes.len());
    for q in cubes {
        let fit = if opts.enlarge_support {
            enlarged_fit(s, &q, l, opts.interpolate_center)?
        } else {
            local_fit(s, &q, l, opts.interpolate_center)?
        };
        residuals.push(fit.residual);
        entries.push(FieldEntry { cube: q, poly: fit.poly });
    }
    Ok((PolyField::new(s.n, s.k, s.m(), entries)?, residuals))
}

/// `φ_α(max{r1, r2} + ‖x1 − x2‖; min{r1, r2})`
fn pair_phi(omega: &Modulus, l: u32, order: u32, q1: &Cube, q2: &Cube) -> f64 {
    let (r1, r2) = (q1.radius(), q2.radius());
    let reach = r1.max(r2) + q1.center().dist(q2.center());
    phi(omega, l, order, reach, r1.min(r2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundWitness {
    pub cube: usize,
    pub gamma: Vec<u32>,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub first: usize,
    pub second: usize,
    pub alpha: Vec<u32>,
    pub ratio: f64,
}

/// Condition sweep over a field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    /// Worst pairwise ratio per ordered cube pair.
    pub pairs: Vec<PairWitness>,
    pub worst_pair: Option<PairWitness>,
    /// Worst `|D^γ P_Q(x_Q)| r_Q^{max(0, |γ|−k)}` per cube with `r_Q ≤ 1`.
    pub bounds: Vec<BoundWitness>,
    pub worst_bound: Option<BoundWitness>,
    /// Smallest `λ` satisfying every pairwise inequality.
    pub lambda_hat: f64,
    /// Smallest `λ` satisfying every boundedness inequality.
    pub bound_lambda: f64,
    /// `max(lambda_hat, bound_lambda)`
    pub lambda_total: f64,
    /// `max |P_Q(x_Q) − f(x_Q)|` (or its jet analogue) when data is given.
    pub center_residual: Option<f64>,
}

/// Evaluates `|D^γ P_Q(x_Q)| ≤ λ r_Q^{−max(0,|γ|−k)}` for `r_Q ≤ 1` and
/// `|D^α(P_{Q1} − P_{Q2})(x_1)| ≤ λ φ_α(max{r1,r2} + ‖x1 − x2‖; min{r1,r2})`
/// for all ordered pairs of distinct cubes and `|α| ≤ L`.
pub fn check_conditions(s: Option<&SampleSet>, field: &PolyField, omega: &Modulus) -> Result<CheckReport> {
    if field.is_empty() {
        return Err(Error::Empty("the field has no entries".into()));
    }
    if omega.order() != field.m {
        return Err(Error::InvalidModulus(format!("modulus order {} differs from m = {}", omega.order(), field.m)));
    }
    let (n, k, l) = (field.n, field.k, field.l());
    let idx = basis(n, l);

    let mut bounds = Vec::new();
    for (ci, e) in field.entries.iter().enumerate() {
        let r = e.cube.radius();
        if r > 1.0 {
            continue;
        }
        let mut worst = BoundWitness { cube: ci, gamma: idx[0].0.clone(), ratio: 0.0 };
        for g in idx.iter() {
            let ratio = e.poly.deriv_eval(g, e.cube.center()).abs() * r.powi(g.order().saturating_sub(k) as i32);
            if ratio > worst.ratio {
                worst = BoundWitness { cube: ci, gamma: g.0.clone(), ratio };
            }
        }
        bounds.push(worst);
    }

    let mut pairs = Vec::new();
    for (i, a) in field.entries.iter().enumerate() {
        for (j, b) in field.entries.iter().enumerate() {
            if i == j {
                continue;
            }
            let diff = a.poly.sub(&b.poly)?;
            let mut worst = PairWitness { first: i, second: j, alpha: idx[0].0.clone(), ratio: 0.0 };
            for alpha in idx.iter() {
                let lhs = diff.deriv_eval(alpha, a.cube.center()).abs();
                if lhs == 0.0 {
                    continue;
                }
                let rhs = pair_phi(omega, l, alpha.order(), &a.cube, &b.cube);
                let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
                if ratio > worst.ratio {
                    worst = PairWitness { first: i, second: j, alpha: alpha.0.clone(), ratio };
                }
            }
            pairs.push(worst);
        }
    }

    let worst_pair = pairs.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)).cloned();
    let worst_bound = bounds.iter().max_by(|a, b| a.ratio.total_cmp(&b.ratio)).cloned();
    let lambda_hat = worst_pair.as_ref().map_or(0.0, |w| w.ratio);
    let bound_lambda = worst_bound.as_ref().map_or(0.0, |w| w.ratio);

    let center_residual = s.map(|s| {
        field
            .entries
            .iter()
            .filter_map(|e| {
                let i = s.index_of(e.cube.center())?;
                let y = &s.samples[i].x;
                Some(match &s.samples[i].value {
                    SampleValue::Scalar(f) => (e.poly.eval(y) - f).abs(),
                    SampleValue::Jet(p) => basis(n, k)
                        .iter()
                        .map(|a| (e.poly.deriv_eval(a, y) - p.deriv_eval(a, y)).abs())
                        .fold(0.0, f64::max),
                })
            })
            .fold(0.0, f64::max)
    });

    Ok(CheckReport {
        pairs,
        worst_pair,
        bounds,
        worst_bound,
        lambda_hat,
        bound_lambda,
        lambda_total: lambda_hat.max(bound_lambda),
        center_residual,
    })
}

/// Evaluates both sides of the equivalence for a given `λ`:
/// (i) `|D^α(P_{Q1} − P_{Q2})(x_1)| ≤ λ φ_α(max{r1,r2} + ‖x1 − x2‖; min{r1,r2})`
/// for all ordered pairs and `|α| ≤ L`;
/// (ii) `δ_ω(λ^{−1} ∘ T(Q1), λ^{−1} ∘ T(Q2)) ≤ ρ_ω(Q1, Q2)` for all pairs.
/// Comparisons are exact.
pub fn claim41_equivalence(field: &PolyField, space: &JetSpace, lambda: f64) -> Result<(bool, bool)> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} must be positive")));
    }
    check_space(field, space)?;
    let l = field.l();
    let idx = basis(field.n, l);
    let omega = space.modulus();
    let mut first = true;
    'outer: for (i, a) in field.entries.iter().enumerate() {
        for (j, b) in field.entries.iter().enumerate() {
            if i == j {
                continue;
            }
            let diff = a.poly.sub(&b.poly)?;
            for alpha in idx.iter() {
                let lhs = diff.deriv_eval(alpha, a.cube.center()).abs();
                if lhs > lambda * pair_phi(omega, l, alpha.order(), &a.cube, &b.cube) {
                    first = false;
                    break 'outer;
                }
            }
        }
    }
    let jets: Vec<Jet> = field.jets().iter().map(|t| t.scale(1.0 / lambda)).collect();
    let mut second = true;
    'outer2: for i in 0..jets.len() {
        for j in i + 1..jets.len() {
            let d = space.delta(&jets[i], &jets[j], None)?;
            if d > space.rho_omega(&jets[i].cube, &jets[j].cube) {
                second = false;
                break 'outer2;
            }
        }
    }
    Ok((first, second))
}

fn check_space(field: &PolyField, space: &JetSpace) -> Result<()> {
    if field.n != space.n() || field.k != space.k() || field.m != space.m() {
        return Err(Error::Invalid(format!(
            "field context (n={}, k={}, m={}) differs from the jet space (n={}, k={}, m={})",
            field.n,
            field.k,
            field.m,
            space.n(),
            space.k(),
            space.m()
        )));
    }
    Ok(())
}

/// `λ_δ` and the bracket `[e^{−n} λ_δ, λ_δ]` for the chain-metric value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoSeminorm {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

/// `λ_δ = max |D^α(P_{Q1} − P_{Q2})(x_i)| / φ_α(max{r1,r2} + ‖x1 − x2‖; min{r1,r2})`
/// over pairs, `|α| ≤ L` and `i ∈ {1, 2}`.
pub fn lo_seminorm(field: &PolyField, omega: &Modulus) -> Result<LoSeminorm> {
    if field.len() < 2 {
        return Err(Error::Empty("the LO seminorm needs at least two cubes".into()));
    }
    if omega.order() != field.m {
        return Err(Error::InvalidModulus(format!("modulus order {} differs from m = {}", omega.order(), field.m)));
    }
    let l = field.l();
    let idx = basis(field.n, l);
    let mut value: f64 = 0.0;
    for (i, a) in field.entries.iter().enumerate() {
        for b in &field.entries[i + 1..] {
            let diff = a.poly.sub(&b.poly)?;
            for alpha in idx.iter() {
                let u = diff
                    .deriv_eval(alpha, a.cube.center())
                    .abs()
                    .max(diff.deriv_eval(alpha, b.cube.center()).abs());
                if u > 0.0 {
                    value = value.max(u / pair_phi(omega, l, alpha.order(), &a.cube, &b.cube));
                }
            }
        }
    }
    let shrink = (-(field.n as f64)).exp();
    Ok(LoSeminorm { value, lower: value * shrink, upper: value })
}

/// Locates the threshold of [`claim41_equivalence`] by bisection on
/// `log λ`, to relative width `rel`.
pub fn claim41_threshold(field: &PolyField, space: &JetSpace, rel: f64) -> Result<f64> {
    let holds = |lam: f64| -> Result<bool> { Ok(claim41_equivalence(field, space, lam)?.1) };
    let mut hi = 1.0;
    while !holds(hi)? {
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = hi / 2.0;
    while holds(lo)? {
        hi = lo;
        lo /= 2.0;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    while hi - lo > rel * hi {
        let mid = (lo * hi).sqrt();
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarNorm {
    pub value: f64,
    /// No cube has `r_Q ≤ 1`, so the supremum is over an empty set.
    pub empty: bool,
}

/// `max |D^{α+β} P_Q(x_Q)| r_Q^{|β|}` over `r_Q ≤ 1`, `|α| ≤ k`, `|β| ≤ L − |α|`.
pub fn star_norm(field: &PolyField) -> StarNorm {
    let (k, l) = (field.k, field.l());
    let idx = basis(field.n, l);
    let mut value: f64 = 0.0;
    let mut empty = true;
    for e in field.entries.iter().filter(|e| e.cube.radius() <= 1.0) {
        empty = false;
        let r = e.cube.radius();
        for g in idx.iter() {
            let v = e.poly.deriv_eval(g, e.cube.center()).abs() * r.powi(g.order().saturating_sub(k) as i32);
            value = value.max(v);
        }
    }
    StarNorm { value, empty }
}

/// `‖T‖* + λ_δ`
pub fn lo_norm_full(field: &PolyField, omega: &Modulus) -> Result<f64> {
    Ok(star_norm(field).value + lo_seminorm(field, omega)?.value)
}

/// Successive differences of `D^α P_Q(x)` along a shrinking cube tower.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitStep {
    pub larger: f64,
    pub smaller: f64,
    pub alpha: Vec<u32>,
    pub difference: f64,
    /// `r^{k−|α|} ω(r)` at the larger radius.
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitJet {
    /// `T_x^k(P_Q)` at the smallest radius.
    pub poly: Poly,
    pub radii: Vec<f64>,
    pub steps: Vec<LimitStep>,
    /// Largest `difference / envelope`: the fitted envelope constant.
    pub envelope_constant: f64,
}

pub fn limit_jet(field: &PolyField, x: &Point, omega: &Modulus) -> Result<LimitJet> {
    let k = field.k;
    let mut tower: Vec<&FieldEntry> = field.entries.iter().filter(|e| e.cube.center() == x).collect();
    if tower.len() < 3 {
        return Err(Error::Invalid(format!("{} cubes centered at the point; at least 3 are needed", tower.len())));
    }
    tower.sort_by(|a, b| b.cube.radius().total_cmp(&a.cube.radius()));
    let mut steps = Vec::new();
    let mut envelope_constant: f64 = 0.0;
    for w in tower.windows(2) {
        let (big, small) = (w[0], w[1]);
        let r = big.cube.radius();
        for alpha in basis(field.n, k).iter() {
            let difference = (big.poly.deriv_eval(alpha, x) - small.poly.deriv_eval(alpha, x)).abs();
            let envelope = r.powi((k - alpha.order()) as i32) * omega.value(r);
            let ratio = if envelope > 0.0 { difference / envelope } else { 0.0 };
            envelope_constant = envelope_constant.max(ratio);
            steps.push(LimitStep {
                larger: r,
                smaller: small.cube.radius(),
                alpha: alpha.0.clone(),
                difference,
                envelope,
                ratio,
            });
        }
    }
    let last = tower[tower.len() - 1];
    Ok(LimitJet {
        poly: last.poly.taylor(x, k),
        radii: tower.iter().map(|e| e.cube.radius()).collect(),
        steps,
        envelope_constant,
    })
}

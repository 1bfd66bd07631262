//! Seeded randomized property suites over the metric, jet, lemma and trace
//! layers. Every suite is a pure function of `(seed, trials, tolerance)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cube::{equivalence_ratio, rho, rho_omega, Cube, HalfSpacePoint, Point};
use crate::error::Result;
use crate::geodesic::{
    lemma43_check, lemma45_check, lemma46_check, lemma47_check, prop48_check, prop48_gamma, prop48_gamma_covering,
    verify_chain_bound,
};
use crate::jet::{sobolev_delta, zygmund_delta, Jet, JetSpace};
use crate::modulus::Modulus;
use crate::numeric::Inequality;
use crate::poly::{basis, MultiIndex, Poly};
use crate::whitney::{claim41_equivalence, claim41_threshold, lo_seminorm, FieldEntry, PolyField};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Witnesses kept per failing suite.
const MAX_WITNESSES: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    /// `"relative_slack"` (smaller is worse) or `"relative_error"` (larger is worse).
    pub metric: String,
    pub worst: Option<f64>,
    pub tolerance: f64,
    pub witnesses: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl SuiteSummary {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertiesReport {
    pub seed: u64,
    pub suites: Vec<SuiteSummary>,
    pub passed: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Metric {
    Slack,
    Error,
}

struct Tally {
    summary: SuiteSummary,
    metric: Metric,
}

impl Tally {
    fn new(name: &str, metric: Metric, tolerance: f64) -> Self {
        let label = match metric {
            Metric::Slack => "relative_slack",
            Metric::Error => "relative_error",
        };
        Tally {
            summary: SuiteSummary {
                name: name.to_string(),
                trials: 0,
                passed: 0,
                failed: 0,
                metric: label.to_string(),
                worst: None,
                tolerance,
                witnesses: Vec::new(),
                details: None,
            },
            metric,
        }
    }

    fn record<W: FnOnce() -> Value>(&mut self, ok: bool, value: f64, witness: W) {
        let s = &mut self.summary;
        s.trials += 1;
        s.worst = Some(match (s.worst, self.metric) {
            (None, _) => value,
            (Some(w), Metric::Slack) => w.min(value),
            (Some(w), Metric::Error) => w.max(value),
        });
        if ok {
            s.passed += 1;
        } else {
            s.failed += 1;
            if s.witnesses.len() < MAX_WITNESSES {
                s.witnesses.push(witness());
            }
        }
    }

    fn inequality<W: FnOnce() -> Value>(&mut self, ineq: &Inequality, witness: W) {
        self.record(ineq.holds, ineq.relative_slack(), witness);
    }

    fn equality<W: FnOnce() -> Value>(&mut self, a: f64, b: f64, rel: f64, witness: W) {
        let err = relative_error(a, b);
        self.record(err <= rel, err, witness);
    }

    fn error<W: FnOnce() -> Value>(&mut self, message: String, witness: W) {
        let s = &mut self.summary;
        s.trials += 1;
        s.failed += 1;
        if s.witnesses.len() < MAX_WITNESSES {
            let mut w = witness();
            if let Value::Object(map) = &mut w {
                map.insert("error".into(), Value::String(message));
            }
            s.witnesses.push(w);
        }
    }

    fn finish(self) -> SuiteSummary {
        self.summary
    }
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.gen::<f64>()).exp()
}

fn random_point<R: Rng>(rng: &mut R, n: usize, half: f64) -> Point {
    Point((0..n).map(|_| rng.gen_range(-half..half)).collect())
}

fn random_cube<R: Rng>(rng: &mut R, n: usize) -> Cube {
    Cube::new(random_point(rng, n, 2.0), log_uniform(rng, 1e-2, 1e1)).expect("positive radius")
}

fn random_poly<R: Rng>(rng: &mut R, n: usize, degree: u32) -> Poly {
    let scale = log_uniform(rng, 1e-2, 1e2);
    let len = basis(n, degree).len();
    Poly::from_coefficients(n, degree, (0..len).map(|_| scale * rng.gen_range(-1.0..1.0)).collect())
        .expect("basis length")
}

fn random_jet<R: Rng>(rng: &mut R, space: &JetSpace) -> Jet {
    let n = space.n();
    Jet { poly: random_poly(rng, n, space.l()), cube: random_cube(rng, n) }
}

fn random_index<R: Rng>(rng: &mut R, n: usize, max_order: u32) -> MultiIndex {
    let idx = basis(n, max_order);
    idx[rng.gen_range(0..idx.len())].clone()
}

/// Moduli with a divergent tail `∫^∞ ω(s)/s^m ds`, usable for jets.
pub fn jet_moduli(m: u32) -> Vec<Modulus> {
    let mf = f64::from(m);
    let mut out = Vec::new();
    if m == 1 {
        out.push(Modulus::power(1.0, 1).expect("valid"));
        out.push(Modulus::power(0.5, 1).expect("valid"));
        out.push(
            Modulus::table(vec![(0.01, 0.01), (0.1, 0.08), (1.0, 0.5), (10.0, 2.0)], 1).expect("valid table"),
        );
    } else {
        out.push(Modulus::power(mf - 1.0, m).expect("valid"));
        out.push(Modulus::power(mf - 0.5, m).expect("valid"));
        out.push(Modulus::power(mf, m).expect("valid"));
    }
    out
}

/// Moduli for the cube metric triangle suite.
pub fn metric_moduli() -> Vec<Modulus> {
    let mut out: Vec<Modulus> = (1..=3).flat_map(jet_moduli).collect();
    out.push(Modulus::power_log(0.5, 1).expect("valid"));
    out.push(Modulus::power_log(1.5, 2).expect("valid"));
    out.push(Modulus::power(0.5, 3).expect("valid"));
    out
}

fn space_for(modulus: Modulus, n: usize, k: u32) -> JetSpace {
    JetSpace::new(modulus, n, k).expect("divergent-tail modulus")
}

fn random_space<R: Rng>(rng: &mut R, ns: &[usize], ks: &[u32], ms: &[u32]) -> JetSpace {
    let n = ns[rng.gen_range(0..ns.len())];
    let k = ks[rng.gen_range(0..ks.len())];
    let m = ms[rng.gen_range(0..ms.len())];
    let moduli = jet_moduli(m);
    let w = moduli[rng.gen_range(0..moduli.len())].clone();
    space_for(w, n, k)
}

/// Name and default trial count of every suite, in run order.
pub const SUITES: &[(&str, usize)] = &[
    ("triangle_rho", 100_000),
    ("triangle_rho_omega", 100_000),
    ("same_poly_identity", 10_000),
    ("zygmund_specialization", 10_000),
    ("sobolev_specialization", 10_000),
    ("path_agreement", 10_000),
    ("chain_bound", 10_000),
    ("lemma43", 10_000),
    ("lemma45", 10_000),
    ("lemma46", 10_000),
    ("lemma47", 10_000),
    ("prop48", 10_000),
    ("prop48_covering", 10_000),
    ("claim41", 1_000),
    ("equivalence_ratio", 100_000),
];

/// Default tolerance of a suite.
pub fn default_tolerance(name: &str) -> f64 {
    match name {
        "same_poly_identity" => 1e-10,
        "zygmund_specialization" | "sobolev_specialization" | "path_agreement" => 1e-8,
        "claim41" => 1e-6,
        "equivalence_ratio" => 0.05,
        _ => 1e-9,
    }
}

fn suite_seed(seed: u64, name: &str) -> u64 {
    // FNV-1a over the suite name, mixed into the run seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

/// Runs one suite. `trials` and `tol` default to the suite's own values.
pub fn run_suite(name: &str, seed: u64, trials: Option<usize>, tol: Option<f64>) -> Option<SuiteSummary> {
    let default = SUITES.iter().find(|(n, _)| *n == name)?.1;
    let trials = trials.unwrap_or(default);
    let tol = tol.unwrap_or_else(|| default_tolerance(name));
    let mut rng = ChaCha8Rng::seed_from_u64(suite_seed(seed, name));
    let r = &mut rng;
    Some(match name {
        "triangle_rho" => triangle_rho(r, trials, tol),
        "triangle_rho_omega" => triangle_rho_omega(r, trials, tol),
        "same_poly_identity" => same_poly_identity(r, trials, tol),
        "zygmund_specialization" => zygmund_specialization(r, trials, tol),
        "sobolev_specialization" => sobolev_specialization(r, trials, tol),
        "path_agreement" => path_agreement(r, trials, tol),
        "chain_bound" => chain_bound(r, trials, tol),
        "lemma43" => lemma43(r, trials, tol),
        "lemma45" => lemma45(r, trials, tol),
        "lemma46" => lemma46(r, trials, tol),
        "lemma47" => lemma47(r, trials, tol),
        "prop48" => prop48(r, trials, tol, false),
        "prop48_covering" => prop48(r, trials, tol, true),
        "claim41" => claim41(r, trials, tol),
        "equivalence_ratio" => equivalence_ratio_suite(r, trials, tol),
        _ => unreachable!("listed in SUITES"),
    })
}

/// Runs every suite in [`SUITES`] order.
pub fn run_all(seed: u64, trials: Option<usize>, tol: Option<f64>) -> PropertiesReport {
    let suites: Vec<SuiteSummary> =
        SUITES.iter().map(|(name, _)| run_suite(name, seed, trials, tol).expect("known suite")).collect();
    let passed = suites.iter().all(SuiteSummary::ok);
    PropertiesReport { seed, suites, passed }
}

fn triangle_rho(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("triangle_rho", Metric::Slack, tol);
    for _ in 0..trials {
        let n = rng.gen_range(1..=3);
        let (a, b, c) = (random_cube(rng, n), random_cube(rng, n), random_cube(rng, n));
        let lhs = rho(&a, &c).expect("same dimension");
        let rhs = rho(&a, &b).expect("same dimension") + rho(&b, &c).expect("same dimension");
        t.inequality(&Inequality::check(lhs, rhs, tol), || json!({"cubes": [a, b, c]}));
    }
    t.finish()
}

fn triangle_rho_omega(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let moduli = metric_moduli();
    let mut t = Tally::new("triangle_rho_omega", Metric::Slack, tol);
    for w in &moduli {
        for _ in 0..trials {
            let n = rng.gen_range(1..=3);
            let (a, b, c) = (random_cube(rng, n), random_cube(rng, n), random_cube(rng, n));
            let lhs = rho_omega(w, &a, &c).expect("same dimension");
            let rhs = rho_omega(w, &a, &b).expect("same dimension") + rho_omega(w, &b, &c).expect("same dimension");
            t.inequality(&Inequality::check(lhs, rhs, tol), || json!({"omega": w, "cubes": [a, b, c]}));
        }
    }
    t.finish()
}

fn same_poly_identity(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("same_poly_identity", Metric::Error, tol);
    for _ in 0..trials {
        let space = random_space(rng, &[1, 2], &[0, 1], &[1, 2]);
        let a = random_jet(rng, &space);
        let b = Jet { poly: a.poly.clone(), cube: random_cube(rng, space.n()) };
        let d = space.delta(&a, &b, None).expect("valid jets");
        let r = space.rho_omega(&a.cube, &b.cube);
        t.equality(d, r, tol, || json!({"space": space, "jets": [a, b]}));
    }
    t.finish()
}

fn zygmund_specialization(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("zygmund_specialization", Metric::Error, tol);
    for n in [1usize, 2] {
        for m in [2u32, 3] {
            let space = space_for(Modulus::power(f64::from(m) - 1.0, m).expect("valid"), n, 0);
            for _ in 0..trials {
                let (a, b) = (random_jet(rng, &space), random_jet(rng, &space));
                let generic = space.delta(&a, &b, None).expect("valid jets");
                let closed = zygmund_delta(&a, &b, m).expect("valid jets");
                t.equality(generic, closed, tol, || json!({"n": n, "m": m, "jets": [a, b]}));
            }
        }
    }
    t.finish()
}

fn sobolev_specialization(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("sobolev_specialization", Metric::Error, tol);
    for k in [1u32, 2] {
        for i in 0..trials {
            let n = 1 + i % 2;
            let space = space_for(Modulus::power(1.0, 1).expect("valid"), n, k);
            let (a, b) = (random_jet(rng, &space), random_jet(rng, &space));
            let generic = space.delta(&a, &b, None).expect("valid jets");
            let closed = sobolev_delta(&a, &b, k).expect("valid jets");
            t.equality(generic, closed, tol, || json!({"k": k, "jets": [a, b]}));
        }
    }
    t.finish()
}

fn path_agreement(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("path_agreement", Metric::Error, tol);
    for _ in 0..trials {
        let space = random_space(rng, &[1, 2], &[0, 1], &[1, 2, 3]);
        let (a, b) = (random_jet(rng, &space), random_jet(rng, &space));
        let y = random_point(rng, space.n(), 3.0);
        let witness = || json!({"space": space, "jets": [a, b], "y": y});
        let (pointwise, psi) = match (space.delta(&a, &b, Some(&y)), space.delta_via_psi(&a, &b, &y)) {
            (Ok(p), Ok(q)) => (p, q),
            (Err(e), _) | (_, Err(e)) => {
                t.error(e.to_string(), witness);
                continue;
            }
        };
        let full = space.delta(&a, &b, None).expect("valid jets");
        let explicit = space.delta_explicit(&a, &b).expect("valid jets");
        let err = relative_error(pointwise, psi).max(relative_error(full, explicit));
        t.record(err <= tol, err, witness);
    }
    t.finish()
}

fn chain_bound(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("chain_bound", Metric::Slack, tol);
    for _ in 0..trials {
        let space = random_space(rng, &[1, 2], &[0, 1], &[1, 2]);
        let len = rng.gen_range(2..=5);
        let chain: Vec<Jet> = (0..len).map(|_| random_jet(rng, &space)).collect();
        let ineq = verify_chain_bound(&space, &chain).expect("valid chain");
        let ineq = Inequality::check(ineq.lhs, ineq.rhs, tol);
        t.inequality(&ineq, || json!({"space": space, "chain": chain}));
    }
    t.finish()
}

fn lemma43(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("lemma43", Metric::Slack, tol);
    let moduli: Vec<Modulus> = (1..=3).flat_map(jet_moduli).collect();
    for i in 0..trials {
        let w = &moduli[rng.gen_range(0..moduli.len())];
        // every other trial is the two-step instance with all c_i = 0
        let remark = i % 2 == 1;
        let len = if remark { 3 } else { rng.gen_range(2..=6) };
        let b: Vec<f64> = (0..len).map(|_| log_uniform(rng, 1e-3, 1e2)).collect();
        let a: Vec<f64> = (1..len).map(|_| log_uniform(rng, 1e-3, 1e2) * f64::from(rng.gen_range(0..=1))).collect();
        let c: Vec<f64> = (1..len).map(|_| if remark { 0.0 } else { log_uniform(rng, 1e-3, 1e3) }).collect();
        let ineq = lemma43_check(w, &b, &a, &c).expect("valid inputs");
        let ineq = Inequality::check(ineq.lhs, ineq.rhs, tol);
        t.inequality(&ineq, || json!({"omega": w, "b": b, "a": a, "c": c}));
    }
    t.finish()
}

fn lemma45(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("lemma45", Metric::Slack, tol);
    for _ in 0..trials {
        let n = rng.gen_range(1..=2);
        let l = rng.gen_range(0..=3);
        let len = rng.gen_range(2..=5);
        let polys: Vec<Poly> = (0..len).map(|_| random_poly(rng, n, l)).collect();
        let points: Vec<Point> = (0..len).map(|_| random_point(rng, n, 3.0)).collect();
        let alpha = random_index(rng, n, l);
        let ineq = lemma45_check(&polys, &points, &alpha).expect("valid inputs");
        let ineq = Inequality::check(ineq.lhs, ineq.rhs, tol);
        t.inequality(&ineq, || json!({"polys": polys, "points": points, "alpha": alpha.0}));
    }
    t.finish()
}

fn lemma46(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("lemma46", Metric::Slack, tol);
    for _ in 0..trials {
        let space = random_space(rng, &[1, 2], &[0, 1, 2], &[1, 2, 3]);
        let n = space.n();
        let sum = random_index(rng, n, space.l());
        let alpha = MultiIndex(sum.0.iter().map(|&s| rng.gen_range(0..=s)).collect());
        let beta = MultiIndex(sum.0.iter().zip(&alpha.0).map(|(s, a)| s - a).collect());
        let v = log_uniform(rng, 1e-3, 1e1);
        let big_r = log_uniform(rng, 1e-3, 1e2);
        let tt = log_uniform(rng, 1e-4, 1e4);
        let ineq = lemma46_check(&space, &alpha, &beta, v, big_r, tt).expect("valid inputs");
        let ineq = Inequality::check(ineq.lhs, ineq.rhs, tol);
        t.inequality(&ineq, || json!({"space": space, "alpha": alpha.0, "beta": beta.0, "v": v, "R": big_r, "t": tt}));
    }
    t.finish()
}

fn lemma47(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("lemma47", Metric::Slack, tol);
    for _ in 0..trials {
        let space = random_space(rng, &[1, 2], &[0, 1, 2], &[1, 2, 3]);
        let alpha = random_index(rng, space.n(), space.l());
        let len = rng.gen_range(2..=6);
        let b: Vec<f64> = (0..len).map(|_| log_uniform(rng, 1e-3, 1e2)).collect();
        let u: Vec<f64> = (1..len).map(|_| log_uniform(rng, 1e-4, 1e4)).collect();
        let ineq = lemma47_check(&space, &alpha, &b, &u).expect("valid inputs");
        let ineq = Inequality::check(ineq.lhs, ineq.rhs, tol);
        t.inequality(&ineq, || json!({"space": space, "alpha": alpha.0, "b": b, "u": u}));
    }
    t.finish()
}

fn prop48(rng: &mut ChaCha8Rng, trials: usize, tol: f64, covering: bool) -> SuiteSummary {
    let name = if covering { "prop48_covering" } else { "prop48" };
    let mut t = Tally::new(name, Metric::Slack, tol);
    for _ in 0..trials {
        let space = random_space(rng, &[1, 2], &[0, 1], &[1, 2]);
        let (a, b) = (random_jet(rng, &space), random_jet(rng, &space));
        let y = random_point(rng, space.n(), 3.0);
        let z = random_point(rng, space.n(), 3.0);
        let gamma = if covering {
            prop48_gamma_covering(&space, &a, &b, &y, &z)
        } else {
            prop48_gamma(&space, &a, &b, &y, &z)
        };
        let ineq = prop48_check(&space, &a, &b, &y, &z, gamma).expect("valid inputs");
        let ineq = Inequality::check(ineq.lhs, ineq.rhs, tol);
        t.inequality(&ineq, || json!({"space": space, "jets": [a, b], "y": y, "z": z, "gamma": gamma}));
    }
    t.finish()
}

/// A random field of 2 to 5 cubes for the given space.
pub fn random_field<R: Rng>(rng: &mut R, space: &JetSpace) -> PolyField {
    let count = rng.gen_range(2..=5);
    let mut entries: Vec<FieldEntry> = Vec::with_capacity(count);
    while entries.len() < count {
        let j = random_jet(rng, space);
        if entries.iter().all(|e| e.cube != j.cube) {
            entries.push(FieldEntry { cube: j.cube, poly: j.poly });
        }
    }
    PolyField::new(space.n(), space.k(), space.m(), entries).expect("consistent field")
}

fn claim41(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("claim41", Metric::Error, tol);
    let mut agreements = 0usize;
    let mut checks = 0usize;
    for _ in 0..trials {
        let space = random_space(rng, &[1, 2], &[0, 1], &[1, 2]);
        let field = random_field(rng, &space);
        let lo = lo_seminorm(&field, space.modulus()).expect("two or more cubes").value;
        let mut lambdas = vec![lo * (1.0 + 1e-9), lo * (1.0 - 1e-9)];
        lambdas.extend((0..8).map(|_| lo * log_uniform(rng, 1e-2, 1e2)));
        let mut agree = true;
        for (i, &lam) in lambdas.iter().enumerate() {
            let (first, second) = claim41_equivalence(&field, &space, lam).expect("valid field");
            checks += 1;
            let expected = match i {
                0 => Some(true),
                1 => Some(false),
                _ => None,
            };
            if first == second && expected.is_none_or(|e| e == first) {
                agreements += 1;
            } else {
                agree = false;
            }
        }
        let threshold = claim41_threshold(&field, &space, 1e-9).expect("valid field");
        let err = relative_error(threshold, lo);
        t.record(agree && err <= tol, err, || json!({"space": space, "field": field, "lambdas": lambdas}));
    }
    let mut s = t.finish();
    s.details = Some(json!({"lambda_checks": checks, "agreements": agreements}));
    s
}

/// `[min, max]` of `ϱ/(1 + ρ_H)` over `count` random half-space pairs.
fn ratio_range<R: Rng>(rng: &mut R, count: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for _ in 0..count {
        let n = rng.gen_range(1..=3);
        let z1 = HalfSpacePoint::new(random_point(rng, n, 5.0), log_uniform(rng, 1e-3, 1e3)).expect("positive height");
        let z2 = HalfSpacePoint::new(random_point(rng, n, 5.0), log_uniform(rng, 1e-3, 1e3)).expect("positive height");
        let r = equivalence_ratio(&z1, &z2).expect("same dimension");
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

/// Passes when `c2/c1 < 20` and both endpoints move by less than `tol`
/// (relative) when the sample is doubled.
fn equivalence_ratio_suite(rng: &mut ChaCha8Rng, trials: usize, tol: f64) -> SuiteSummary {
    let mut t = Tally::new("equivalence_ratio", Metric::Error, tol);
    if trials == 0 {
        return t.finish();
    }
    let (c1, c2) = ratio_range(rng, trials);
    let (d1, d2) = ratio_range(rng, trials);
    let (e1, e2) = (c1.min(d1), c2.max(d2));
    let moved = relative_error(c1, e1).max(relative_error(c2, e2));
    let spread = c2 / c1;
    t.record(spread < 20.0 && moved < tol, moved, || json!({"c1": c1, "c2": c2, "doubled": [e1, e2]}));
    let mut s = t.finish();
    s.details = Some(json!({
        "samples": trials,
        "doubled_samples": 2 * trials,
        "c1": c1,
        "c2": c2,
        "doubled_c1": e1,
        "doubled_c2": e2,
        "spread": spread
    }));
    s
}

/// Hand instance: `n = 1`, `m = 2`, `k = 0`, `ω(t) = t`, `P1 − P2 = x` on
/// unit cubes at the origin. Returns the generic, explicit and `ψ` path
/// values, each `1`.
pub fn hand_example() -> Result<[f64; 3]> {
    let space = JetSpace::new(Modulus::power(1.0, 2)?, 1, 0)?;
    let q = Cube::new(Point::origin(1), 1.0)?;
    let a = Jet::new(Poly::from_coefficients(1, 1, vec![0.0, 1.0])?, q.clone())?;
    let b = Jet::new(Poly::zero(1, 1), q)?;
    Ok([
        space.delta(&a, &b, None)?,
        space.delta_explicit(&a, &b)?,
        space.delta_via_psi(&a, &b, &Point::origin(1))?,
    ])
}

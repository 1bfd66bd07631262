//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zygjet::cli::{execute, Command, Format, RunConfig};
use zygjet::cube::dyadic_radii;
use zygjet::props::{hand_example, run_suite, SuiteSummary, DEFAULT_SEED};
use zygjet::selection::{
    best_selection, counterexample_family, finiteness_experiment, ConvexSetSpec, SelectionContext, SelectionInstance,
    SelectionNode, SUBSET_BUDGET,
};
use zygjet::whitney::{build_field, check_conditions, lo_seminorm, FieldEntry, FitOptions, PolyField, SampleSet};
use zygjet::{Cube, Modulus, MultiIndex, Point, Poly};

type Outcome = Result<String, String>;

fn suite(name: &str) -> Result<SuiteSummary, String> {
    let s = run_suite(name, DEFAULT_SEED, None, None).ok_or_else(|| format!("unknown suite {name}"))?;
    Ok(s)
}

fn describe(s: &SuiteSummary) -> String {
    let worst = s.worst.map_or("-".to_string(), |w| format!("{w:.3e}"));
    format!("{} {}/{} passed, worst {} {}", s.name, s.passed, s.trials, s.metric, worst)
}

fn require(s: SuiteSummary) -> Outcome {
    if s.ok() {
        Ok(describe(&s))
    } else {
        Err(describe(&s))
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let ok = parts.iter().all(Result::is_ok);
    let text = parts.into_iter().map(|p| p.unwrap_or_else(|e| format!("FAILED {e}"))).collect::<Vec<_>>().join("; ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let note = format!(" ({:.1} s, limit {} s)", took.as_secs_f64(), limit.as_secs());
    match out {
        Ok(s) if took <= limit => Ok(s + &note),
        Ok(s) => Err(s + &note),
        Err(s) => Err(s + &note),
    }
}

fn zygmund() -> Outcome {
    timed(Duration::from_secs(30), || require(suite("zygmund_specialization")?))
}

fn sobolev() -> Outcome {
    require(suite("sobolev_specialization")?)
}

fn path_agreement() -> Outcome {
    let hand = hand_example().map_err(|e| e.to_string())?;
    let hand_ok = hand.iter().all(|v| (v - 1.0).abs() <= 1e-10);
    let hand_text = format!("hand example {hand:?}");
    all(vec![require(suite("path_agreement")?), if hand_ok { Ok(hand_text) } else { Err(hand_text) }])
}

fn chain_bound() -> Outcome {
    require(suite("chain_bound")?)
}

fn metric_axioms() -> Outcome {
    all(vec![
        require(suite("triangle_rho")?),
        require(suite("triangle_rho_omega")?),
        require(suite("same_poly_identity")?),
    ])
}

fn lemma_suites() -> Outcome {
    let covering = suite("prop48_covering")?;
    let mut parts: Vec<Outcome> =
        ["lemma43", "lemma45", "lemma46", "lemma47", "prop48"].iter().map(|n| suite(n).and_then(require)).collect();
    // reported alongside, not part of the verdict
    parts.push(Ok(format!("[info] {}", describe(&covering))));
    all(parts)
}

fn claim41() -> Outcome {
    require(suite("claim41")?)
}

fn equivalence() -> Outcome {
    let s = suite("equivalence_ratio")?;
    let d = s.details.clone().unwrap_or_default();
    let get = |k: &str| d.get(k).and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    let (c1, c2, e1, e2) = (get("c1"), get("c2"), get("doubled_c1"), get("doubled_c2"));
    let text = format!(
        "{} samples, [c1, c2] = [{c1:.4}, {c2:.4}], c2/c1 = {:.3}, doubled sample [{e1:.4}, {e2:.4}]",
        d.get("samples").and_then(|v| v.as_u64()).unwrap_or(0),
        c2 / c1
    );
    let stable = ((e1 - c1) / c1).abs() < 0.05 && ((e2 - c2) / c2).abs() < 0.05;
    if s.ok() && c1 > 0.0 && c2 / c1 < 20.0 && stable {
        Ok(text)
    } else {
        Err(text)
    }
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, degree: u32) -> Poly {
    let dim = zygjet::poly::dim_poly(n, degree);
    Poly::from_coefficients(n, degree, (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap()
}

fn x_squared_brute_force(field: &PolyField) -> f64 {
    // alpha outermost, pairs walked from the back
    let entries: Vec<&FieldEntry> = field.entries.iter().collect();
    let mut best: f64 = 0.0;
    for order in 0..=1u32 {
        let alpha = MultiIndex(vec![order]);
        for j in (0..entries.len()).rev() {
            for i in (0..entries.len()).rev() {
                if i == j {
                    continue;
                }
                let (a, b) = (entries[i], entries[j]);
                let lhs = (a.poly.deriv_eval(&alpha, a.cube.center()) - b.poly.deriv_eval(&alpha, a.cube.center())).abs();
                let reach = a.cube.radius().max(b.cube.radius()) + a.cube.center().dist(b.cube.center());
                let v = a.cube.radius().min(b.cube.radius());
                best = best.max(lhs / common::phi_power(1.0, 2, 1, order, reach, v));
            }
        }
    }
    best
}

fn whitney_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=2usize {
        for k in 0..=1u32 {
            for m in 1..=2u32 {
                for _ in 0..3 {
                    let l = k + m - 1;
                    let omega = Modulus::power(1.0, m).map_err(|e| e.to_string())?;
                    let points: Vec<Point> =
                        (0..10).map(|_| Point((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())).collect();
                    let p = random_poly(&mut rng, n, l);
                    let s = if k == 0 {
                        SampleSet::from_function(omega.clone(), points.clone(), |x| p.eval(x))
                    } else {
                        SampleSet::from_polynomial_jets(omega.clone(), k, points.clone(), &p)
                    }
                    .map_err(|e| e.to_string())?;
                    let (field, _) =
                        build_field(&s, &dyadic_radii(&points, 4), FitOptions::default()).map_err(|e| e.to_string())?;
                    let report = check_conditions(Some(&s), &field, &omega).map_err(|e| e.to_string())?;
                    worst = worst.max(report.lambda_hat);
                    cases += 1;
                }
            }
        }
    }
    let traces = format!("polynomial traces: {cases} sets, max λ̂ = {worst:.3e}");
    let traces = if worst <= 1e-8 { Ok(traces) } else { Err(traces) };

    let omega = Modulus::power(1.0, 2).map_err(|e| e.to_string())?;
    let points: Vec<Point> = (0..10).map(|_| Point(vec![rng.gen_range(-1.0..1.0)])).collect();
    let s = SampleSet::from_function(omega.clone(), points.clone(), |x| x.0[0] * x.0[0]).map_err(|e| e.to_string())?;
    let (field, _) = build_field(&s, &dyadic_radii(&points, 4), FitOptions::default()).map_err(|e| e.to_string())?;
    let lam = check_conditions(Some(&s), &field, &omega).map_err(|e| e.to_string())?.lambda_hat;
    let brute = x_squared_brute_force(&field);
    let rel = (lam - brute).abs() / brute.abs().max(f64::MIN_POSITIVE);
    let square = format!("x²: λ̂ = {lam:.12e}, brute force {brute:.12e}, rel {rel:.1e}");
    let square = if rel <= 1e-10 && lam > 0.0 { Ok(square) } else { Err(square) };

    let omega = Modulus::power(1.0, 1).map_err(|e| e.to_string())?;
    let mut pts = vec![Point(vec![0.0])];
    pts.extend((1..=6).map(|i: i32| Point(vec![2f64.powi(-i * i)])));
    let s = SampleSet::from_function(omega.clone(), pts.clone(), |x| x.0[0].abs().sqrt()).map_err(|e| e.to_string())?;
    let (field, _) = build_field(&s, &dyadic_radii(&pts, 6), FitOptions::default()).map_err(|e| e.to_string())?;
    let report = check_conditions(Some(&s), &field, &omega).map_err(|e| e.to_string())?;
    let nested = format!("nested set: {} cubes, λ̂ = {:.3e}", field.len(), report.lambda_hat);
    let nested = if report.lambda_hat.is_finite() && report.lambda_total.is_finite() { Ok(nested) } else { Err(nested) };

    all(vec![traces, square, nested])
}

fn counterexample() -> Outcome {
    let rows = counterexample_family(8).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for r in &rows {
        let expected = (1.0 + 2f64.powi(2 * r.i as i32 + 1)).ln();
        worst = worst.max((r.rho - expected).abs());
    }
    let monotone = rows.windows(2).all(|w| w[1].rho_1 < w[0].rho_1 && w[1].rho > w[0].rho);
    let text = format!("{} rows, max |ρ − ln(1+2^(2i+1))| = {worst:.1e}, monotone {monotone}", rows.len());
    if worst <= 1e-12 && monotone && rows.len() == 8 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn selection() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED ^ 11);

    // singletons with k = L pin the polynomials
    let mut singleton_err: f64 = 0.0;
    for n in 1..=2usize {
        for k in 0..=2u32 {
            let omega = Modulus::power(0.5 + 0.5 * f64::from(k), 1).map_err(|e| e.to_string())?;
            let nodes: Vec<SelectionNode> = (0..4)
                .map(|_| SelectionNode {
                    cube: Cube::new(Point((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()), rng.gen_range(0.05..1.0))
                        .unwrap(),
                    set: ConvexSetSpec::singleton(random_poly(&mut rng, n, k)),
                })
                .collect();
            let entries: Vec<FieldEntry> =
                nodes.iter().map(|nd| FieldEntry { cube: nd.cube.clone(), poly: nd.set.base().clone() }).collect();
            let field = PolyField::new(n, k, 1, entries).map_err(|e| e.to_string())?;
            let expected = lo_seminorm(&field, &omega).map_err(|e| e.to_string())?.value;
            let inst = SelectionInstance::new(SelectionContext { n, k, m: 1, omega, relax: 0.0 }, nodes)
                .map_err(|e| e.to_string())?;
            let got = best_selection(&inst).map_err(|e| e.to_string())?.lambda_star;
            singleton_err = singleton_err.max((got - expected).abs() / expected.max(1.0));
        }
    }
    let singles = format!("singletons: max rel error {singleton_err:.1e}");
    let singles = if singleton_err <= 1e-10 { Ok(singles) } else { Err(singles) };

    let mut full_max: f64 = 0.0;
    for (n, k, m) in [(1usize, 0u32, 1u32), (1, 1, 2), (2, 1, 1), (2, 0, 2)] {
        let omega = Modulus::power(1.0, m).map_err(|e| e.to_string())?;
        let l = k + m - 1;
        let nodes: Vec<SelectionNode> = (0..4)
            .map(|_| SelectionNode {
                cube: Cube::new(Point((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()), rng.gen_range(0.05..1.0)).unwrap(),
                set: ConvexSetSpec::full(n, l),
            })
            .collect();
        let inst = SelectionInstance::new(SelectionContext { n, k, m, omega, relax: 0.0 }, nodes)
            .map_err(|e| e.to_string())?;
        full_max = full_max.max(best_selection(&inst).map_err(|e| e.to_string())?.lambda_star);
    }
    let full = format!("full sets: max λ* = {full_max:.1e}");
    let full = if full_max <= 1e-10 { Ok(full) } else { Err(full) };

    let corpus = common::selection_corpus();
    let mut grid_err: f64 = 0.0;
    for entry in &corpus {
        let lp = best_selection(&entry.instance).map_err(|e| e.to_string())?.lambda_star;
        grid_err = grid_err.max((lp - common::grid_search(entry)).abs());
    }
    let grid = format!("grid oracle: {} instances, max |λ*_LP − λ*_grid| = {grid_err:.1e}", corpus.len());
    let grid = if grid_err <= 1e-4 { Ok(grid) } else { Err(grid) };

    let mut finite = Vec::new();
    let mut min_gamma = f64::INFINITY;
    let mut runs = 0;
    for entry in corpus.iter().chain(finiteness_extras().iter()) {
        let inst = &entry.instance;
        let ell = inst.ell();
        let dim = zygjet::poly::dim_poly(inst.context().n, inst.context().l());
        let expected_n = 1usize << (ell + 1).min(dim);
        if inst.len() < expected_n {
            continue;
        }
        let r = finiteness_experiment(inst, ell, DEFAULT_SEED).map_err(|e| e.to_string())?;
        runs += 1;
        let count: usize = (1..=expected_n.min(inst.len())).map(|s| binomial(inst.len(), s)).sum();
        if r.subset_size != expected_n || (count <= SUBSET_BUDGET && (!r.exact || r.subsets.len() != count)) {
            finite.push(Err(format!("subset bookkeeping off: N = {}, {} subsets", r.subset_size, r.subsets.len())));
        }
        min_gamma = min_gamma.min(r.gamma_hat);
    }
    let gamma = format!("finiteness: {runs} instances, min γ̂ = {min_gamma:.6}");
    finite.push(if runs > 0 && min_gamma >= 1.0 - 1e-12 { Ok(gamma) } else { Err(gamma) });

    let mut parts = vec![singles, full, grid];
    parts.extend(finite);
    all(parts)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// The two-coordinate corpus instance padded with singleton nodes so that
/// it has at least `N` nodes.
fn finiteness_extras() -> Vec<common::CorpusEntry> {
    let base = common::selection_corpus().pop().expect("corpus is not empty");
    let mut nodes = base.instance.nodes().to_vec();
    nodes.push(SelectionNode {
        cube: common::cube(&[2.0], 0.5),
        set: ConvexSetSpec::singleton(common::poly1(&[-1.0, 0.5])),
    });
    nodes.push(SelectionNode { cube: common::cube(&[0.5], 0.125), set: ConvexSetSpec::singleton(common::poly1(&[0.0, 1.0])) });
    let inst = SelectionInstance::new(base.instance.context().clone(), nodes).unwrap();
    vec![common::CorpusEntry { instance: inst, q: base.q, bounds: vec![] }]
}

fn determinism() -> Outcome {
    let config = RunConfig {
        input: None,
        output: None,
        format: Format::Json,
        seed: DEFAULT_SEED,
        trials: None,
        tol: None,
        command: Command::Properties { suite: vec![] },
    };
    let limit = Duration::from_secs(300);
    let start = Instant::now();
    let first = execute(&config).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let second = execute(&config).map_err(|e| e.to_string())?;
    let same = first.body == second.body;
    let text = format!(
        "two default runs byte-identical: {same}, {} bytes, first run {:.1} s (limit {} s)",
        first.body.len(),
        took.as_secs_f64(),
        limit.as_secs()
    );
    if same && took <= limit {
        Ok(text)
    } else {
        Err(text)
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("zygmund specialization", zygmund),
        ("sobolev specialization", sobolev),
        ("path agreement", path_agreement),
        ("chain bound", chain_bound),
        ("metric axioms", metric_axioms),
        ("lemma suites", lemma_suites),
        ("threshold equivalence", claim41),
        ("half-space equivalence", equivalence),
        ("whitney checker", whitney_sanity),
        ("counterexample table", counterexample),
        ("selection LP", selection),
        ("determinism and runtime", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

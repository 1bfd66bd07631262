#![allow(dead_code)]

use zygjet::selection::{ConvexSetSpec, HalfSpace, SelectionContext, SelectionInstance, SelectionNode};
use zygjet::{Cube, Modulus, MultiIndex, Point, Poly};

/// `∫_v^{v+h} s^{q−m} ds` written out by hand.
pub fn core_power(q: f64, m: u32, v: f64, h: f64) -> f64 {
    let e = q - f64::from(m);
    if (e + 1.0).abs() < 1e-15 {
        ((v + h) / v).ln()
    } else {
        ((v + h).powf(e + 1.0) - v.powf(e + 1.0)) / (e + 1.0)
    }
}

/// `t^{L−j} ∫_v^{v+t} s^{q−m} ds`
pub fn phi_power(q: f64, m: u32, l: u32, order: u32, t: f64, v: f64) -> f64 {
    t.powi((l - order) as i32) * core_power(q, m, v, t)
}

pub fn cube(x: &[f64], r: f64) -> Cube {
    Cube::new(Point(x.to_vec()), r).unwrap()
}

pub fn poly1(coef: &[f64]) -> Poly {
    Poly::from_coefficients(1, coef.len() as u32 - 1, coef.to_vec()).unwrap()
}

fn interval(lo: f64, hi: f64) -> Vec<HalfSpace> {
    vec![HalfSpace { a: vec![1.0], b: hi }, HalfSpace { a: vec![-1.0], b: -lo }]
}

fn box2(lo: [f64; 2], hi: [f64; 2]) -> Vec<HalfSpace> {
    vec![
        HalfSpace { a: vec![1.0, 0.0], b: hi[0] },
        HalfSpace { a: vec![-1.0, 0.0], b: -lo[0] },
        HalfSpace { a: vec![0.0, 1.0], b: hi[1] },
        HalfSpace { a: vec![0.0, -1.0], b: -lo[1] },
    ]
}

/// Exponent `q` of `ω(t) = t^q` for each corpus instance.
pub struct CorpusEntry {
    pub instance: SelectionInstance,
    pub q: f64,
    /// Box bounds per node coordinate, for the grid oracle.
    pub bounds: Vec<Vec<(f64, f64)>>,
}

/// Three-node instances with at most three free coordinates in total and
/// `k = L` so the sets pin the selected polynomials.
pub fn selection_corpus() -> Vec<CorpusEntry> {
    let mut out = Vec::new();

    // n = 1, k = 0, m = 1, one coordinate per node
    for (q, cfg) in [
        (1.0, [(0.0, 1.0, 0.0, 1.0, -1.0, 2.0), (2.0, 0.5, 3.0, -1.0, -1.0, 1.0), (-1.5, 0.25, -2.0, 0.5, 0.0, 2.0)]),
        (0.5, [(0.0, 0.3, 1.0, 1.0, 0.0, 0.5), (0.7, 0.1, -1.0, 2.0, -0.5, 0.5), (3.0, 2.0, 4.0, 1.0, -3.0, -1.0)]),
        (1.0, [(0.0, 0.5, 5.0, 1.0, -1.0, 1.0), (0.25, 0.05, -5.0, 1.0, -1.0, 1.0), (-4.0, 1.0, 0.0, 3.0, 1.0, 2.0)]),
    ] {
        let omega = Modulus::power(q, 1).unwrap();
        let context = SelectionContext { n: 1, k: 0, m: 1, omega, relax: 0.0 };
        let mut nodes = Vec::new();
        let mut bounds = Vec::new();
        for (x, r, base, dir, lo, hi) in cfg {
            let set = ConvexSetSpec::new(poly1(&[base]), vec![poly1(&[dir])], interval(lo, hi)).unwrap();
            nodes.push(SelectionNode { cube: cube(&[x], r), set });
            bounds.push(vec![(lo, hi)]);
        }
        out.push(CorpusEntry { instance: SelectionInstance::new(context, nodes).unwrap(), q, bounds });
    }

    // n = 1, k = 1, m = 1: one node with a two-dimensional set, two singletons
    let omega = Modulus::power(1.0, 1).unwrap();
    let context = SelectionContext { n: 1, k: 1, m: 1, omega, relax: 0.0 };
    let free = ConvexSetSpec::new(poly1(&[0.0, 0.0]), vec![poly1(&[1.0, 0.0]), poly1(&[0.0, 1.0])], box2([-2.0, -2.0], [2.0, 2.0]))
        .unwrap();
    let nodes = vec![
        SelectionNode { cube: cube(&[0.0], 0.5), set: free },
        SelectionNode { cube: cube(&[1.0], 0.25), set: ConvexSetSpec::singleton(poly1(&[1.0, 2.0])) },
        SelectionNode { cube: cube(&[-1.0], 1.0), set: ConvexSetSpec::singleton(poly1(&[0.5, -1.0])) },
    ];
    out.push(CorpusEntry {
        instance: SelectionInstance::new(context, nodes).unwrap(),
        q: 1.0,
        bounds: vec![vec![(-2.0, 2.0), (-2.0, 2.0)], vec![], vec![]],
    });
    out
}

/// `max |D^α(P_i − P_j)(x)| / φ_α` over pairs, `|α| ≤ L`, `x ∈ {x_i, x_j}`,
/// with every `φ_α` written out for `ω(t) = t^q`.
pub fn selection_value(inst: &SelectionInstance, q: f64, polys: &[Poly]) -> f64 {
    let ctx = inst.context();
    let l = ctx.k + ctx.m - 1;
    let nodes = inst.nodes();
    let mut best: f64 = 0.0;
    for j in 0..nodes.len() {
        for i in 0..j {
            let (a, b) = (&nodes[i].cube, &nodes[j].cube);
            let reach = a.radius().max(b.radius()) + a.center().dist(b.center());
            let v = a.radius().min(b.radius());
            let diff = polys[i].sub(&polys[j]).unwrap();
            for order in 0..=l {
                let alpha = MultiIndex(vec![order]);
                let bound = phi_power(q, ctx.m, l, order, reach, v);
                for x in [b.center(), a.center()] {
                    best = best.max(diff.deriv_eval(&alpha, x).abs() / bound);
                }
            }
        }
    }
    best
}

/// Zoom grid search over the box of all free coordinates.
pub fn grid_search(entry: &CorpusEntry) -> f64 {
    let inst = &entry.instance;
    let dims: Vec<(usize, usize)> =
        entry.bounds.iter().enumerate().flat_map(|(i, b)| (0..b.len()).map(move |j| (i, j))).collect();
    let mut lo: Vec<f64> = dims.iter().map(|&(i, j)| entry.bounds[i][j].0).collect();
    let mut hi: Vec<f64> = dims.iter().map(|&(i, j)| entry.bounds[i][j].1).collect();
    let full_lo = lo.clone();
    let full_hi = hi.clone();
    let eval = |s: &[f64]| -> f64 {
        let polys: Vec<Poly> = inst
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, node)| {
                let coords: Vec<f64> = dims.iter().zip(s).filter(|((ni, _), _)| *ni == i).map(|(_, &v)| v).collect();
                node.set.point(&coords).unwrap()
            })
            .collect();
        selection_value(inst, entry.q, &polys)
    };
    if dims.is_empty() {
        return eval(&[]);
    }
    let g = 21usize;
    let mut best_val = f64::INFINITY;
    for _ in 0..60 {
        let mut best_s = lo.clone();
        let total = g.pow(dims.len() as u32);
        for idx in 0..total {
            let mut rest = idx;
            let s: Vec<f64> = (0..dims.len())
                .map(|d| {
                    let step = rest % g;
                    rest /= g;
                    lo[d] + (hi[d] - lo[d]) * step as f64 / (g - 1) as f64
                })
                .collect();
            let v = eval(&s);
            if v < best_val {
                best_val = v;
                best_s = s;
            }
        }
        for d in 0..dims.len() {
            let half = 0.35 * (hi[d] - lo[d]);
            lo[d] = (best_s[d] - half).max(full_lo[d]);
            hi[d] = (best_s[d] + half).min(full_hi[d]);
        }
    }
    best_val
}

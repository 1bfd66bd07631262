//! The chain metric `d_ω`: shortest-path upper bounds over finite vertex
//! sets, scaled lower bounds, and the chain inequalities behind them.

use serde::{Deserialize, Serialize};

use crate::cube::{Cube, Point};
use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::modulus::Modulus;
use crate::numeric::Inequality;
use crate::poly::{basis, MultiIndex, Poly};

/// Relative slack used by every chain inequality here.
pub const CHAIN_SLACK: f64 = 1e-9;

/// `Σ_i δ_ω(T_i, T_{i+1})`
pub fn chain_length(space: &JetSpace, chain: &[Jet]) -> Result<f64> {
    if chain.len() < 2 {
        return Err(Error::Empty("a chain needs at least two jets".into()));
    }
    chain.windows(2).map(|w| space.delta(&w[0], &w[1], None)).sum()
}

/// Shortest `δ_ω` path from `from` to `to` through the complete graph on
/// `{from, to} ∪ candidates`.
pub fn d_upper(space: &JetSpace, from: &Jet, to: &Jet, candidates: &[Jet]) -> Result<f64> {
    let mut vertices: Vec<&Jet> = Vec::with_capacity(candidates.len() + 2);
    vertices.push(from);
    vertices.extend(candidates);
    vertices.push(to);
    let target = vertices.len() - 1;

    let mut dist = vec![f64::INFINITY; vertices.len()];
    let mut done = vec![false; vertices.len()];
    dist[0] = 0.0;
    loop {
        let next = (0..vertices.len())
            .filter(|&i| !done[i] && dist[i].is_finite())
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]));
        let Some(u) = next else { break };
        if u == target {
            break;
        }
        done[u] = true;
        for w in 0..vertices.len() {
            if done[w] {
                continue;
            }
            let through = dist[u] + space.delta(vertices[u], vertices[w], None)?;
            if through < dist[w] {
                dist[w] = through;
            }
        }
    }
    Ok(dist[target])
}

/// `δ_ω(e^{−n} ∘ T, e^{−n} ∘ T')`, a lower bound for `d_ω(T, T')`.
pub fn d_lower(space: &JetSpace, from: &Jet, to: &Jet) -> Result<f64> {
    let shrink = (-(space.n() as f64)).exp();
    space.delta(&from.scale(shrink), &to.scale(shrink), None)
}

/// Two-sided estimate of `d_ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

pub fn bracket(space: &JetSpace, from: &Jet, to: &Jet, candidates: &[Jet]) -> Result<Bracket> {
    Ok(Bracket { lower: d_lower(space, from, to)?, upper: d_upper(space, from, to, candidates)? })
}

/// Intermediate jets between `from` and `to`: centers and polynomials are
/// interpolated affinely, radii geometrically, and each point also gets the
/// enclosing cube of radius `r1 + r2 + ‖x1 − x2‖`.
pub fn default_candidates(from: &Jet, to: &Jet, steps: usize) -> Result<Vec<Jet>> {
    let (c1, c2) = (from.cube.center(), to.cube.center());
    let (r1, r2) = (from.cube.radius(), to.cube.radius());
    let wide = r1 + r2 + c1.dist(c2);
    let mut out = Vec::with_capacity(2 * steps);
    for i in 1..=steps {
        let s = i as f64 / (steps + 1) as f64;
        let center = c1.lerp(c2, s);
        let poly = from.poly.scale(1.0 - s).add(&to.poly.scale(s))?;
        let radius = r1.powf(1.0 - s) * r2.powf(s);
        out.push(Jet::new(poly.clone(), Cube::new(center.clone(), radius)?)?);
        out.push(Jet::new(poly, Cube::new(center, wide)?)?);
    }
    Ok(out)
}

/// `δ_ω(T_0, T_ℓ) ≤ Σ_i δ_ω(e^n ∘ T_i, e^n ∘ T_{i+1})`
pub fn verify_chain_bound(space: &JetSpace, chain: &[Jet]) -> Result<Inequality> {
    if chain.len() < 2 {
        return Err(Error::Empty("a chain needs at least two jets".into()));
    }
    let grow = (space.n() as f64).exp();
    let lhs = space.delta(&chain[0], &chain[chain.len() - 1], None)?;
    let scaled: Vec<Jet> = chain.iter().map(|t| t.scale(grow)).collect();
    let rhs = chain_length(space, &scaled)?;
    Ok(Inequality::check(lhs, rhs, CHAIN_SLACK))
}

fn check_lengths(b: usize, other: &[(usize, &str)]) -> Result<()> {
    if b < 2 {
        return Err(Error::LengthMismatch("at least two radii b_i are required".into()));
    }
    for &(len, name) in other {
        if len != b - 1 {
            return Err(Error::LengthMismatch(format!("{name} has {len} entries, expected {}", b - 1)));
        }
    }
    Ok(())
}

/// For `b_0..b_ℓ > 0`, `a_i, c_i ≥ 0`:
/// `max{∫_{min(b_0,b_ℓ)}^{b_0+b_ℓ+Σa}, ∫_{min(b_0,b_ℓ)}^{min+Σc}}
///  ≤ Σ_i max{∫_{min(b_i,b_{i+1})}^{b_i+b_{i+1}+a_i}, ∫_{min}^{min+c_i}}`.
pub fn lemma43_check(modulus: &Modulus, b: &[f64], a: &[f64], c: &[f64]) -> Result<Inequality> {
    check_lengths(b.len(), &[(a.len(), "a"), (c.len(), "c")])?;
    check_inputs(b, a, c)?;
    let last = b.len() - 1;
    let v0 = b[0].min(b[last]);
    let lhs = modulus
        .core_span(v0, b[0].max(b[last]) + a.iter().sum::<f64>())
        .max(modulus.core_span(v0, c.iter().sum()));
    let rhs = (0..last)
        .map(|i| {
            let v = b[i].min(b[i + 1]);
            modulus.core_span(v, b[i].max(b[i + 1]) + a[i]).max(modulus.core_span(v, c[i]))
        })
        .sum();
    Ok(Inequality::check(lhs, rhs, CHAIN_SLACK))
}

fn check_inputs(b: &[f64], a: &[f64], c: &[f64]) -> Result<()> {
    if b.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("radii b_i must be positive".into()));
    }
    if a.iter().chain(c).any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::Domain("a_i and c_i must be non-negative".into()));
    }
    Ok(())
}

/// For `|α| ≤ L`, `b_0..b_ℓ > 0`, `u_i ≥ 0` and `v_i = min{b_i, b_{i+1}}`:
/// `∫_{v}^{v+φ_α^{−1}(Σu; v)} ≤ Σ_i max{∫_{v_i}^{b_i+b_{i+1}}, ∫_{v_i}^{v_i+φ_α^{−1}(u_i; v_i)}}`
/// with `v = min{b_0, b_ℓ}`.
pub fn lemma47_check(space: &JetSpace, alpha: &MultiIndex, b: &[f64], u: &[f64]) -> Result<Inequality> {
    check_lengths(b.len(), &[(u.len(), "u")])?;
    check_inputs(b, u, &[])?;
    let order = alpha.order();
    space.phi_alpha_inv(alpha, 0.0, 1.0)?;
    let w = space.modulus();
    let last = b.len() - 1;
    let v0 = b[0].min(b[last]);
    let lhs = w.core_span(v0, space.phi_inv(order, u.iter().sum(), v0));
    let rhs = (0..last)
        .map(|i| {
            let v = b[i].min(b[i + 1]);
            w.core_span(v, b[i].max(b[i + 1])).max(w.core_span(v, space.phi_inv(order, u[i], v)))
        })
        .sum();
    Ok(Inequality::check(lhs, rhs, CHAIN_SLACK))
}

/// For `v, R, t > 0` and `|α + β| ≤ L`:
/// `∫_v^{v+φ_α^{−1}(R^{|β|} t; v)} ≤ max{∫_v^{v+R}, ∫_v^{v+φ_{α+β}^{−1}(t; v)}}`.
pub fn lemma46_check(
    space: &JetSpace,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    v: f64,
    big_r: f64,
    t: f64,
) -> Result<Inequality> {
    let sum = alpha.add(beta);
    space.phi_alpha_inv(&sum, t, v)?;
    if !(big_r > 0.0) {
        return Err(Error::Domain("R must be positive".into()));
    }
    let w = space.modulus();
    let lhs = w.core_span(v, space.phi_inv(alpha.order(), big_r.powi(beta.order() as i32) * t, v));
    let rhs = w.core_span(v, big_r).max(w.core_span(v, space.phi_inv(sum.order(), t, v)));
    Ok(Inequality::check(lhs, rhs, CHAIN_SLACK))
}

/// For polynomials `P_0..P_ℓ` of degree `≤ L`, points `x_0..x_ℓ` and
/// `|α| ≤ L`:
/// `|D^α(P_0 − P_ℓ)(x_0)| ≤ e^n max_{|β| ≤ L−|α|} (Σ_i |D^{α+β}(P_i − P_{i+1})(x_i)|)(Σ_i ‖x_i − x_{i+1}‖)^{|β|}`.
pub fn lemma45_check(polys: &[Poly], points: &[Point], alpha: &MultiIndex) -> Result<Inequality> {
    if polys.len() < 2 || polys.len() != points.len() {
        return Err(Error::LengthMismatch(format!(
            "{} polynomials and {} points; need equal counts of at least two",
            polys.len(),
            points.len()
        )));
    }
    let (n, l) = (polys[0].n(), polys[0].degree());
    if alpha.order() > l {
        return Err(Error::DegreeMismatch { expected: l, found: alpha.order() });
    }
    let last = polys.len() - 1;
    let lhs = polys[0].sub(&polys[last])?.deriv_eval(alpha, &points[0]).abs();
    let diffs: Vec<Poly> = polys.windows(2).map(|w| w[0].sub(&w[1])).collect::<Result<_>>()?;
    let travel: f64 = points.windows(2).map(|w| w[0].dist(&w[1])).sum();
    let mut best: f64 = 0.0;
    for beta in basis(n, l - alpha.order()).iter() {
        let ab = alpha.add(beta);
        let total: f64 = diffs.iter().zip(points).map(|(d, x)| d.deriv_eval(&ab, x).abs()).sum();
        best = best.max(total * travel.powi(beta.order() as i32));
    }
    Ok(Inequality::check(lhs, (n as f64).exp() * best, CHAIN_SLACK))
}

/// `max{1, e^n ‖y − z‖^L / (max{r1,r2} + ‖x1 − x2‖)^L}`
pub fn prop48_gamma(space: &JetSpace, t1: &Jet, t2: &Jet, y: &Point, z: &Point) -> f64 {
    let l = space.l() as i32;
    let reach = t1.cube.radius().max(t2.cube.radius()) + t1.cube.center().dist(t2.cube.center());
    let n = space.n() as f64;
    1f64.max(n.exp() * (y.dist(z) / reach).powi(l))
}

/// `e^n · max{1, (‖y − z‖ / (max{r1,r2} + ‖x1 − x2‖))^L}`, which covers
/// every Taylor term of the shift from `y` to `z`, including the `|β| = 0`
/// one.
pub fn prop48_gamma_covering(space: &JetSpace, t1: &Jet, t2: &Jet, y: &Point, z: &Point) -> f64 {
    let l = space.l() as i32;
    let reach = t1.cube.radius().max(t2.cube.radius()) + t1.cube.center().dist(t2.cube.center());
    let n = space.n() as f64;
    n.exp() * 1f64.max((y.dist(z) / reach).powi(l))
}

/// `δ_ω(T1, T2; z) ≤ δ_ω(γ ∘ T1, γ ∘ T2; y)` for a given `γ`.
pub fn prop48_check(space: &JetSpace, t1: &Jet, t2: &Jet, y: &Point, z: &Point, gamma: f64) -> Result<Inequality> {
    let lhs = space.delta(t1, t2, Some(z))?;
    let rhs = space.delta(&t1.scale(gamma), &t2.scale(gamma), Some(y))?;
    Ok(Inequality::check(lhs, rhs, CHAIN_SLACK))
}

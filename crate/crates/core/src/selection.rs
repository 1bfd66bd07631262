//! Lipschitz selection over finite cube families: convex polynomial sets,
//! the `H_λ` constraint blocks, the optimal selection LP, subset finiteness
//! experiments and the nested-cube family on which `ρ_1` and `ρ` disagree.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cube::{rho, rho_omega, Cube, Point};
use crate::error::{Error, Result};
use crate::jet::phi;
use crate::lp::{LpProblem, Sense, Status};
use crate::modulus::Modulus;
use crate::poly::{basis, dim_poly, factorial, MultiIndex, Poly};
use crate::whitney::{lo_seminorm, FieldEntry, PolyField};

/// Box on every coefficient and affine coordinate in the selection LPs.
pub const COEFFICIENT_BOX: f64 = 1e6;

/// Exact subset enumeration limit in [`finiteness_experiment`].
pub const SUBSET_BUDGET: usize = 5000;

/// Half-space `a · s ≤ b` on affine coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub a: Vec<f64>,
    pub b: f64,
}

/// `{base + Σ s_j dirs_j : a_i · s ≤ b_i}` with linearly independent
/// directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConvexSetRepr", into = "ConvexSetRepr")]
pub struct ConvexSetSpec {
    base: Poly,
    dirs: Vec<Poly>,
    ineq: Vec<HalfSpace>,
}

#[derive(Serialize, Deserialize)]
struct ConvexSetRepr {
    base: Poly,
    #[serde(default)]
    dirs: Vec<Poly>,
    #[serde(default)]
    ineq: Vec<HalfSpace>,
}

impl TryFrom<ConvexSetRepr> for ConvexSetSpec {
    type Error = Error;
    fn try_from(r: ConvexSetRepr) -> Result<Self> {
        ConvexSetSpec::new(r.base, r.dirs, r.ineq)
    }
}

impl From<ConvexSetSpec> for ConvexSetRepr {
    fn from(s: ConvexSetSpec) -> Self {
        ConvexSetRepr { base: s.base, dirs: s.dirs, ineq: s.ineq }
    }
}

impl ConvexSetSpec {
    pub fn new(base: Poly, dirs: Vec<Poly>, ineq: Vec<HalfSpace>) -> Result<Self> {
        let n = base.n();
        let degree = dirs.iter().map(Poly::degree).fold(base.degree(), u32::max);
        let base = base.with_degree(degree)?;
        let mut lifted = Vec::with_capacity(dirs.len());
        for d in dirs {
            if d.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: d.n() });
            }
            lifted.push(d.with_degree(degree)?);
        }
        let rows: Vec<Vec<f64>> = lifted.iter().map(|d| d.coefficients().to_vec()).collect();
        if rank(rows) < lifted.len() {
            return Err(Error::Invalid("set directions are linearly dependent".into()));
        }
        for h in &ineq {
            if h.a.len() != lifted.len() {
                return Err(Error::LengthMismatch(format!(
                    "half-space has {} coefficients for {} affine coordinates",
                    h.a.len(),
                    lifted.len()
                )));
            }
        }
        Ok(ConvexSetSpec { base, dirs: lifted, ineq })
    }

    /// `{p}`
    pub fn singleton(p: Poly) -> Self {
        ConvexSetSpec { base: p, dirs: Vec::new(), ineq: Vec::new() }
    }

    /// All of `P_d` in `n` variables.
    pub fn full(n: usize, degree: u32) -> Self {
        let dim = dim_poly(n, degree);
        let dirs = (0..dim)
            .map(|i| {
                let mut c = vec![0.0; dim];
                c[i] = 1.0;
                Poly::from_coefficients(n, degree, c).expect("basis length")
            })
            .collect();
        ConvexSetSpec { base: Poly::zero(n, degree), dirs, ineq: Vec::new() }
    }

    pub fn base(&self) -> &Poly {
        &self.base
    }

    pub fn dirs(&self) -> &[Poly] {
        &self.dirs
    }

    pub fn ineq(&self) -> &[HalfSpace] {
        &self.ineq
    }

    /// Affine dimension `ℓ`.
    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    pub fn point(&self, s: &[f64]) -> Result<Poly> {
        if s.len() != self.dirs.len() {
            return Err(Error::LengthMismatch(format!("{} coordinates for {} directions", s.len(), self.dirs.len())));
        }
        let mut p = self.base.clone();
        for (d, &c) in self.dirs.iter().zip(s) {
            p = p.add(&d.scale(c))?;
        }
        Ok(p)
    }

    /// The same set with every polynomial replaced by `P(· − shift)`.
    pub fn translate(&self, shift: &[f64]) -> ConvexSetSpec {
        ConvexSetSpec {
            base: self.base.translate(shift),
            dirs: self.dirs.iter().map(|d| d.translate(shift)).collect(),
            ineq: self.ineq.clone(),
        }
    }
}

fn rank(mut rows: Vec<Vec<f64>>) -> usize {
    let scale = rows.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = 1e-10 * scale;
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else {
            break;
        };
        if rows[p][c].abs() <= tol {
            continue;
        }
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            let f = rows[i][c] / rows[r][c];
            for j in c..cols {
                rows[i][j] -= f * rows[r][j];
            }
        }
        r += 1;
    }
    r
}

/// Shared setting of a selection instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionContext {
    pub n: usize,
    pub k: u32,
    pub m: u32,
    pub omega: Modulus,
    /// Every node uses `H_relax(Q)` instead of `H_0(Q)`.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub relax: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl SelectionContext {
    pub fn l(&self) -> u32 {
        self.k + self.m - 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionNode {
    pub cube: Cube,
    pub set: ConvexSetSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct SelectionInstance {
    context: SelectionContext,
    nodes: Vec<SelectionNode>,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    context: SelectionContext,
    nodes: Vec<SelectionNode>,
}

impl TryFrom<InstanceRepr> for SelectionInstance {
    type Error = Error;
    fn try_from(r: InstanceRepr) -> Result<Self> {
        SelectionInstance::new(r.context, r.nodes)
    }
}

impl From<SelectionInstance> for InstanceRepr {
    fn from(s: SelectionInstance) -> Self {
        InstanceRepr { context: s.context, nodes: s.nodes }
    }
}

impl SelectionInstance {
    pub fn new(context: SelectionContext, nodes: Vec<SelectionNode>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Empty("a selection instance needs at least one node".into()));
        }
        if context.m == 0 || context.omega.order() != context.m {
            return Err(Error::InvalidModulus(format!(
                "modulus order {} does not match m = {}",
                context.omega.order(),
                context.m
            )));
        }
        if !(context.relax >= 0.0) {
            return Err(Error::Domain(format!("relaxation {} must be non-negative", context.relax)));
        }
        let l = context.l();
        for (i, node) in nodes.iter().enumerate() {
            if node.cube.dim() != context.n || node.set.base.n() != context.n {
                return Err(Error::DimensionMismatch { expected: context.n, found: node.cube.dim() });
            }
            if node.set.base.degree() > l {
                return Err(Error::DegreeMismatch { expected: l, found: node.set.base.degree() });
            }
            if nodes[..i].iter().any(|o| o.cube == node.cube) {
                return Err(Error::Invalid(format!("node {i} repeats an earlier cube")));
            }
        }
        Ok(SelectionInstance { context, nodes })
    }

    pub fn context(&self) -> &SelectionContext {
        &self.context
    }

    pub fn nodes(&self) -> &[SelectionNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Instance restricted to the given node indices.
    pub fn subset(&self, idx: &[usize]) -> Result<SelectionInstance> {
        let nodes = idx
            .iter()
            .map(|&i| self.nodes.get(i).cloned().ok_or_else(|| Error::Invalid(format!("node index {i} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        SelectionInstance::new(self.context.clone(), nodes)
    }

    /// Largest affine dimension among the node sets.
    pub fn ell(&self) -> usize {
        self.nodes.iter().map(|n| n.set.dim()).max().unwrap_or(0)
    }
}

/// One linear row over the node's unknowns: the centered coefficients
/// `c_β = D^β P(x_Q)/β!` of `P ∈ P_L` followed by the affine coordinates
/// of `P̃ ∈ G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub poly: Vec<f64>,
    pub coords: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Coefficients of `D^α P(x + offset)` in terms of the centered
/// coefficients of `P` at `x`.
fn derivative_row(n: usize, l: u32, alpha: &MultiIndex, offset: &[f64]) -> Vec<f64> {
    basis(n, l)
        .iter()
        .map(|beta| {
            if !alpha.le(beta) {
                return 0.0;
            }
            beta.0
                .iter()
                .zip(&alpha.0)
                .zip(offset)
                .map(|((&b, &a), &h)| factorial(b) / factorial(b - a) * h.powi((b - a) as i32))
                .product()
        })
        .collect()
}

/// Rows expressing `|D^α P̃(x_Q) − D^α P(x_Q)| ≤ λ r^{k−|α|} ω(r)` for
/// `|α| ≤ k`, `P ∈ P_L`, `P̃ ∈ G`; with `λ = 0` these are the equalities
/// `T^k_{x_Q}(P) = T^k_{x_Q}(P̃)`. The half-spaces of `G` are appended.
pub fn build_h_lambda(g: &ConvexSetSpec, q: &Cube, omega: &Modulus, k: u32, l: u32, lambda: f64) -> Result<Vec<BlockRow>> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("λ = {lambda} must be non-negative")));
    }
    if k > l {
        return Err(Error::Invalid(format!("k = {k} exceeds L = {l}")));
    }
    let n = q.dim();
    let x = q.center();
    let r = q.radius();
    let zero = vec![0.0; n];
    let mut rows = Vec::new();
    for alpha in basis(n, k).iter() {
        let p_row: Vec<f64> = derivative_row(n, l, alpha, &zero).iter().map(|v| -v).collect();
        let s_row: Vec<f64> = g.dirs.iter().map(|d| d.deriv_eval(alpha, x)).collect();
        let base = g.base.deriv_eval(alpha, x);
        let slack = lambda * r.powi((k - alpha.order()) as i32) * omega.value(r);
        if slack == 0.0 {
            rows.push(BlockRow { poly: p_row, coords: s_row, sense: Sense::Eq, rhs: -base });
        } else {
            rows.push(BlockRow { poly: p_row.clone(), coords: s_row.clone(), sense: Sense::Le, rhs: slack - base });
            rows.push(BlockRow { poly: p_row, coords: s_row, sense: Sense::Ge, rhs: -slack - base });
        }
    }
    for h in &g.ineq {
        rows.push(BlockRow { poly: vec![0.0; dim_poly(n, l)], coords: h.a.clone(), sense: Sense::Le, rhs: h.b });
    }
    Ok(rows)
}

/// Optimal selection and its δ-based Lipschitz constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub polys: Vec<Poly>,
    pub coords: Vec<Vec<f64>>,
    /// LO seminorm of the selected field.
    pub lambda_star: f64,
    pub lp_objective: f64,
    /// The chain-metric constant lies in `[e^{−n} λ*, λ*]`.
    pub chain_bracket: [f64; 2],
    /// Some variable sits on the safety box.
    pub box_active: bool,
}

/// Minimizes `λ` subject to `P_i ∈ H(Q_i)` and
/// `|D^α(P_i − P_j)(x)| ≤ λ φ_α(max{r_i,r_j} + ‖x_i − x_j‖; min{r_i,r_j})`
/// for all pairs, `|α| ≤ L` and `x ∈ {x_i, x_j}`.
pub fn best_selection(inst: &SelectionInstance) -> Result<Selection> {
    let ctx = &inst.context;
    let (n, k, l) = (ctx.n, ctx.k, ctx.l());
    let dim = dim_poly(n, l);
    let mut lp = LpProblem::new(0);
    let lam = lp.add_var(1.0, 0.0, f64::INFINITY);
    let mut p_off = Vec::with_capacity(inst.len());
    let mut s_off = Vec::with_capacity(inst.len());
    for node in &inst.nodes {
        p_off.push(lp.num_vars());
        for _ in 0..dim {
            lp.add_var(0.0, -COEFFICIENT_BOX, COEFFICIENT_BOX);
        }
        s_off.push(lp.num_vars());
        for _ in 0..node.set.dim() {
            lp.add_var(0.0, -COEFFICIENT_BOX, COEFFICIENT_BOX);
        }
    }
    for (i, node) in inst.nodes.iter().enumerate() {
        for row in build_h_lambda(&node.set, &node.cube, &ctx.omega, k, l, ctx.relax)? {
            let mut terms: Vec<(usize, f64)> = Vec::new();
            terms.extend(row.poly.iter().enumerate().map(|(b, &v)| (p_off[i] + b, v)));
            terms.extend(row.coords.iter().enumerate().map(|(j, &v)| (s_off[i] + j, v)));
            lp.add_sparse(&terms, row.sense, row.rhs);
        }
    }
    let idx = basis(n, l);
    for i in 0..inst.len() {
        for j in i + 1..inst.len() {
            let (qi, qj) = (&inst.nodes[i].cube, &inst.nodes[j].cube);
            let (ri, rj) = (qi.radius(), qj.radius());
            let reach = ri.max(rj) + qi.center().dist(qj.center());
            let v = ri.min(rj);
            let xi_to_xj: Vec<f64> = qj.center().coords().iter().zip(qi.center().coords()).map(|(a, b)| a - b).collect();
            let xj_to_xi: Vec<f64> = xi_to_xj.iter().map(|d| -d).collect();
            let zero = vec![0.0; n];
            for alpha in idx.iter() {
                let bound = phi(&ctx.omega, l, alpha.order(), reach, v);
                for (oi, oj) in [(&zero, &xj_to_xi), (&xi_to_xj, &zero)] {
                    let ai = derivative_row(n, l, alpha, oi);
                    let aj = derivative_row(n, l, alpha, oj);
                    let mut terms: Vec<(usize, f64)> = Vec::with_capacity(2 * dim + 1);
                    terms.extend(ai.iter().enumerate().map(|(b, &c)| (p_off[i] + b, c / bound)));
                    terms.extend(aj.iter().enumerate().map(|(b, &c)| (p_off[j] + b, -c / bound)));
                    let mut plus = terms.clone();
                    plus.push((lam, -1.0));
                    lp.add_sparse(&plus, Sense::Le, 0.0);
                    let mut minus = terms;
                    minus.push((lam, 1.0));
                    lp.add_sparse(&minus, Sense::Ge, 0.0);
                }
            }
        }
    }
    let sol = lp.solve()?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Err(Error::Lp("infeasible: some node set is empty".into())),
        Status::Unbounded => return Err(Error::Lp("unbounded".into())),
    }
    let box_active = sol.x[1..].iter().any(|v| v.abs() >= COEFFICIENT_BOX * (1.0 - 1e-9));
    let mut polys = Vec::with_capacity(inst.len());
    let mut coords = Vec::with_capacity(inst.len());
    for (i, node) in inst.nodes.iter().enumerate() {
        polys.push(Poly::from_centered(n, l, node.cube.center(), &sol.x[p_off[i]..p_off[i] + dim]));
        coords.push(sol.x[s_off[i]..s_off[i] + node.set.dim()].to_vec());
    }
    let lambda_star = if inst.len() < 2 {
        0.0
    } else {
        let entries = inst
            .nodes
            .iter()
            .zip(&polys)
            .map(|(node, p)| FieldEntry { cube: node.cube.clone(), poly: p.clone() })
            .collect();
        lo_seminorm(&PolyField::new(n, k, ctx.m, entries)?, &ctx.omega)?.value
    };
    Ok(Selection {
        polys,
        coords,
        lambda_star,
        lp_objective: sol.objective,
        chain_bracket: [lambda_star * (-(n as f64)).exp(), lambda_star],
        box_active,
    })
}

/// `λ*` on one subset of nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetValue {
    pub nodes: Vec<usize>,
    pub lambda_star: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinitenessReport {
    /// `2^{min{ℓ+1, dim P_L}}`
    pub subset_size: usize,
    pub ell: usize,
    /// All subsets of size `≤ N` were solved.
    pub exact: bool,
    pub subsets: Vec<SubsetValue>,
    pub lambda_full: f64,
    pub lambda_subsets_max: f64,
    /// `λ*_full / max λ*_{K'}`
    pub gamma_hat: f64,
}

fn binomial_count(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn subsets_up_to(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if left == 0 {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, size, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Solves every subset of at most `N = 2^{min{ℓ+1, dim P_L}}` nodes (or a
/// seeded sample of [`SUBSET_BUDGET`] of them) and the full instance.
pub fn finiteness_experiment(inst: &SelectionInstance, ell: usize, seed: u64) -> Result<FinitenessReport> {
    let ctx = &inst.context;
    let dim = dim_poly(ctx.n, ctx.l());
    let exponent = (ell + 1).min(dim);
    if exponent >= usize::BITS as usize - 1 {
        return Err(Error::Invalid(format!("subset size 2^{exponent} is too large")));
    }
    let size = 1usize << exponent;
    if inst.len() < size {
        return Err(Error::Invalid(format!("instance has {} nodes; the experiment needs at least N = {size}", inst.len())));
    }
    let total: f64 = (1..=size).map(|s| binomial_count(inst.len(), s)).sum();
    let exact = total <= SUBSET_BUDGET as f64;
    let chosen: Vec<Vec<usize>> = if exact {
        subsets_up_to(inst.len(), size)
    } else {
        let weights: Vec<f64> = (1..=size).map(|s| binomial_count(inst.len(), s) / total).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = BTreeSet::new();
        while seen.len() < SUBSET_BUDGET {
            let mut u: f64 = rng.gen();
            let mut s = size;
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    s = i + 1;
                    break;
                }
                u -= w;
            }
            let mut pick = sample(&mut rng, inst.len(), s).into_vec();
            pick.sort_unstable();
            seen.insert(pick);
        }
        let mut v: Vec<Vec<usize>> = seen.into_iter().collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v
    };
    let mut subsets = Vec::with_capacity(chosen.len());
    for nodes in chosen {
        let lambda_star = if nodes.len() < 2 { 0.0 } else { best_selection(&inst.subset(&nodes)?)?.lambda_star };
        subsets.push(SubsetValue { nodes, lambda_star });
    }
    let lambda_full = best_selection(inst)?.lambda_star;
    let lambda_subsets_max = subsets.iter().map(|s| s.lambda_star).fold(0.0, f64::max);
    let gamma_hat = if lambda_subsets_max > 0.0 {
        lambda_full / lambda_subsets_max
    } else if lambda_full == 0.0 {
        1.0
    } else {
        f64::INFINITY
    };
    Ok(FinitenessReport { subset_size: size, ell, exact, subsets, lambda_full, lambda_subsets_max, gamma_hat })
}

/// Row of the nested-cube table: `Q_i = Q(0, 2^{−i²})` in `R^1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub i: u32,
    pub r_i: f64,
    pub r_next: f64,
    /// `ρ_ω(Q_i, Q_{i+1})` for `ω(t) = t`, `m = 1`.
    pub rho_1: f64,
    /// `ρ(Q_i, Q_{i+1})`
    pub rho: f64,
    /// `ln(1 + 2^{2i+1})`
    pub rho_expected: f64,
}

pub const COUNTEREXAMPLE_MAX: u32 = 30;

/// Cubes `Q_i` shrink so fast that `ρ_1(Q_i, Q_{i+1}) → 0` while
/// `ρ(Q_i, Q_{i+1}) → ∞`.
pub fn counterexample_family(i_max: u32) -> Result<Vec<CounterexampleRow>> {
    if i_max == 0 {
        return Err(Error::Invalid("i_max must be at least 1".into()));
    }
    if i_max > COUNTEREXAMPLE_MAX {
        return Err(Error::Invalid(format!("i_max = {i_max} underflows; the limit is {COUNTEREXAMPLE_MAX}")));
    }
    let lipschitz = Modulus::power(1.0, 1)?;
    let radius = |i: u32| 2f64.powi(-((i * i) as i32));
    let mut rows: Vec<CounterexampleRow> = Vec::with_capacity(i_max as usize);
    for i in 1..=i_max {
        let qi = Cube::new(Point::origin(1), radius(i))?;
        let qn = Cube::new(Point::origin(1), radius(i + 1))?;
        let row = CounterexampleRow {
            i,
            r_i: qi.radius(),
            r_next: qn.radius(),
            rho_1: rho_omega(&lipschitz, &qi, &qn)?,
            rho: rho(&qi, &qn)?,
            rho_expected: 2f64.powi(2 * i as i32 + 1).ln_1p(),
        };
        if let Some(prev) = rows.last() {
            if !(row.rho_1 < prev.rho_1 && row.rho > prev.rho) {
                return Err(Error::Invalid(format!("monotonicity fails at i = {i}")));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize, k: u32, m: u32) -> SelectionContext {
        SelectionContext { n, k, m, omega: Modulus::power(1.0, m).unwrap(), relax: 0.0 }
    }

    fn cube(x: f64, r: f64) -> Cube {
        Cube::new(Point(vec![x]), r).unwrap()
    }

    fn konst(c: f64) -> Poly {
        Poly::constant(1, 0, c)
    }

    #[test]
    fn counterexample_rows() {
        let rows = counterexample_family(8).unwrap();
        assert!((rows[0].rho - 9f64.ln()).abs() < 1e-12);
        assert!((rows[1].rho - 33f64.ln()).abs() < 1e-12);
        for r in &rows {
            assert!((r.rho - r.rho_expected).abs() < 1e-12);
            assert_eq!(r.rho_1, r.r_i);
        }
        assert!(counterexample_family(31).is_err());
        assert!(counterexample_family(0).is_err());
        assert_eq!(counterexample_family(30).unwrap().len(), 30);
    }

    #[test]
    fn rank_detects_dependence() {
        let p = Poly::from_coefficients(1, 1, vec![1.0, 2.0]).unwrap();
        assert!(ConvexSetSpec::new(konst(0.0).with_degree(1).unwrap(), vec![p.clone(), p.scale(-3.0)], vec![]).is_err());
        let q = Poly::from_coefficients(1, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(ConvexSetSpec::new(Poly::zero(1, 1), vec![p, q], vec![]).unwrap().dim(), 2);
    }

    #[test]
    fn h_lambda_rows() {
        let g = ConvexSetSpec::singleton(konst(2.0));
        let q = cube(0.5, 0.25);
        let w = Modulus::power(1.0, 1).unwrap();
        let rows = build_h_lambda(&g, &q, &w, 0, 0, 0.0).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].sense, rows[0].rhs, rows[0].poly[0]), (Sense::Eq, -2.0, -1.0));
        let relaxed = build_h_lambda(&g, &q, &w, 0, 0, 4.0).unwrap();
        assert_eq!(relaxed.len(), 2);
        assert_eq!(relaxed[0].rhs, 4.0 * 0.25 - 2.0);
        assert!(build_h_lambda(&g, &q, &w, 0, 0, -1.0).is_err());
    }

    #[test]
    fn singleton_selection_matches_lo_seminorm() {
        let polys = [
            Poly::from_coefficients(1, 1, vec![1.0, 2.0]).unwrap(),
            Poly::from_coefficients(1, 1, vec![-0.5, 0.0]).unwrap(),
            Poly::from_coefficients(1, 1, vec![0.3, 1.0]).unwrap(),
        ];
        let cubes = [cube(0.0, 0.5), cube(1.0, 0.25), cube(-0.4, 0.1)];
        let field_of = |k: u32, m: u32| {
            let entries = polys.iter().zip(&cubes).map(|(p, q)| FieldEntry { cube: q.clone(), poly: p.clone() }).collect();
            PolyField::new(1, k, m, entries).unwrap()
        };
        let nodes: Vec<SelectionNode> = polys
            .iter()
            .zip(&cubes)
            .map(|(p, q)| SelectionNode { cube: q.clone(), set: ConvexSetSpec::singleton(p.clone()) })
            .collect();

        // k = L: the sets pin every P_i
        let c = ctx(1, 1, 1);
        let sel = best_selection(&SelectionInstance::new(c.clone(), nodes.clone()).unwrap()).unwrap();
        let lo = lo_seminorm(&field_of(1, 1), &c.omega).unwrap().value;
        assert!((sel.lambda_star - lo).abs() <= 1e-10 * lo);
        assert!((sel.lp_objective - lo).abs() <= 1e-9 * lo);
        assert!(!sel.box_active);

        // k < L: only T^k is pinned, so the optimum can only improve
        let c = ctx(1, 0, 2);
        let pinned: Vec<SelectionNode> = nodes
            .iter()
            .map(|nd| SelectionNode { cube: nd.cube.clone(), set: ConvexSetSpec::singleton(nd.set.base().taylor(nd.cube.center(), 0)) })
            .collect();
        let sel = best_selection(&SelectionInstance::new(c.clone(), pinned).unwrap()).unwrap();
        let lo = lo_seminorm(&field_of(0, 2), &c.omega).unwrap().value;
        assert!(sel.lambda_star <= lo * (1.0 + 1e-10));
    }

    #[test]
    fn full_sets_give_zero() {
        let c = ctx(1, 0, 2);
        let nodes = [cube(0.0, 1.0), cube(2.0, 0.5), cube(-1.0, 0.25)]
            .into_iter()
            .map(|q| SelectionNode { cube: q, set: ConvexSetSpec::full(1, 1) })
            .collect();
        let sel = best_selection(&SelectionInstance::new(c, nodes).unwrap()).unwrap();
        assert!(sel.lambda_star <= 1e-10);
    }

    #[test]
    fn singleton_finiteness_is_pairwise() {
        let c = ctx(1, 0, 1);
        let nodes = [(0.0, 1.0, 0.0), (1.0, 0.5, 1.0), (3.0, 0.25, -2.0), (-2.0, 0.5, 0.7)]
            .into_iter()
            .map(|(x, r, v)| SelectionNode { cube: cube(x, r), set: ConvexSetSpec::singleton(konst(v)) })
            .collect();
        let inst = SelectionInstance::new(c, nodes).unwrap();
        let rep = finiteness_experiment(&inst, 0, 1).unwrap();
        assert_eq!(rep.subset_size, 2);
        assert!(rep.exact);
        assert_eq!(rep.subsets.len(), 4 + 6);
        assert!((rep.gamma_hat - 1.0).abs() < 1e-12);
        let small = inst.subset(&[0]).unwrap();
        assert!(finiteness_experiment(&small, 0, 1).is_err());
    }

    #[test]
    fn instance_json() {
        let js = r#"{"context":{"n":1,"k":0,"m":1,"omega":{"family":"power","q":1.0,"m":1}},
            "nodes":[{"cube":{"x":[0.0],"r":1.0},"set":{"base":{"coef":{"[0]":1.0}}}},
                     {"cube":{"x":[2.0],"r":0.5},"set":{"base":{"coef":{"[0]":0.0}},"dirs":[{"coef":{"[0]":1.0}}],"ineq":[{"a":[1.0],"b":0.5}]}}]}"#;
        let inst: SelectionInstance = serde_json::from_str(js).unwrap();
        let sel = best_selection(&inst).unwrap();
        // P_2 ≤ 0.5, P_1 = 1, φ_0 = max r + d = 3
        let phi0 = phi(&inst.context.omega, 0, 0, 3.0, 0.5);
        assert_eq!(phi0, 3.0);
        assert!((sel.lambda_star - 0.5 / phi0).abs() < 1e-12);
        let back: SelectionInstance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
        assert_eq!(back, inst);
    }
}

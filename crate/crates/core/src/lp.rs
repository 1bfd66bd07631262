//! Dense two-phase bounded-variable simplex for small linear programs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coefs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `minimize c·x` subject to linear constraints and per-variable bounds
/// (default `x ≥ 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: Status,
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LpProblem {
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds a variable with the given bounds and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        for c in &mut self.constraints {
            c.coefs.push(0.0);
        }
        self.num_vars() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn add_constraint(&mut self, coefs: Vec<f64>, sense: Sense, rhs: f64) {
        let mut coefs = coefs;
        coefs.resize(self.num_vars(), 0.0);
        self.constraints.push(Constraint { coefs, sense, rhs });
    }

    /// Sparse form of [`LpProblem::add_constraint`].
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) {
        let mut coefs = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            coefs[j] += a;
        }
        self.constraints.push(Constraint { coefs, sense, rhs });
    }

    pub fn solve(&self) -> Result<LpSolution> {
        lp_solve(self)
    }
}

/// Smallest `|B⁻¹A|` entry accepted as a pivot.
const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
/// Bound relaxation in the first pass of the ratio test.
const HARRIS_TOL: f64 = 1e-12;
/// Phase-one objective above which the problem is declared infeasible,
/// relative to the largest right-hand side.
const INFEASIBLE_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;
const REFACTOR_EVERY: usize = 50;
/// Consecutive degenerate steps before switching to Bland's rule.
const BLAND_AFTER: usize = 50;

/// Bounded-variable simplex over `A z = b`, `lo ≤ z ≤ hi`, with a dense
/// `B⁻¹A` tableau.
struct Simplex {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    t: Vec<Vec<f64>>,
    z: Vec<f64>,
    basis: Vec<usize>,
    basic: Vec<bool>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Simplex {
    fn cols(&self) -> usize {
        self.lo.len()
    }

    /// Rebuilds `B⁻¹A` and the basic values from the original rows.
    fn refactor(&mut self) -> Result<()> {
        let m = self.a.len();
        let cols = self.cols();
        let mut aug: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row: Vec<f64> = self.basis.iter().map(|&j| self.a[i][j]).collect();
                row.extend_from_slice(&self.a[i]);
                let r = self.b[i]
                    - (0..cols).filter(|&j| !self.basic[j] && self.z[j] != 0.0).map(|j| self.a[i][j] * self.z[j]).sum::<f64>();
                row.push(r);
                row
            })
            .collect();
        for c in 0..m {
            let piv = (c..m).max_by(|&i, &j| aug[i][c].abs().total_cmp(&aug[j][c].abs())).expect("rows remain");
            if aug[piv][c].abs() < 1e-14 {
                return Err(Error::Lp("basis became singular".into()));
            }
            aug.swap(c, piv);
            let p = aug[c][c];
            for v in aug[c].iter_mut() {
                *v /= p;
            }
            let prow = aug[c].clone();
            for (i, row) in aug.iter_mut().enumerate() {
                let f = row[c];
                if i != c && f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                }
            }
        }
        for (i, row) in aug.into_iter().enumerate() {
            let j = self.basis[i];
            self.z[j] = row[m + cols];
            self.t[i] = row[m..m + cols].to_vec();
            for v in self.t[i].iter_mut() {
                if v.abs() < 1e-15 {
                    *v = 0.0;
                }
            }
            self.t[i][j] = 1.0;
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        self.t[r][c] = 1.0;
        let prow = self.t[r].clone();
        for i in 0..self.t.len() {
            let f = self.t[i][c];
            if i == r || f == 0.0 {
                continue;
            }
            for (v, pv) in self.t[i].iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.t[i][c] = 0.0;
        }
        let leaving = self.basis[r];
        self.basic[leaving] = false;
        self.basic[c] = true;
        self.basis[r] = c;
    }

    fn reduced(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, &j) in self.basis.iter().enumerate() {
            let cb = cost[j];
            if cb != 0.0 {
                for (dj, tij) in d.iter_mut().zip(&self.t[i]) {
                    *dj -= cb * tij;
                }
            }
        }
        d
    }

    /// Improving direction for nonbasic column `j`, if any.
    fn direction(&self, j: usize, dj: f64, tol: f64) -> Option<f64> {
        let (lo, hi, v) = (self.lo[j], self.hi[j], self.z[j]);
        if lo == hi {
            return None;
        }
        if dj < -tol && v < hi {
            Some(1.0)
        } else if dj > tol && v > lo {
            Some(-1.0)
        } else {
            None
        }
    }

    fn optimize(&mut self, cost: &[f64], eligible: &[bool]) -> Result<Step> {
        let scale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let tol = COST_TOL * scale;
        let mut since_refactor = 0;
        let mut verified = false;
        let mut degenerate = 0;
        for _ in 0..MAX_PIVOTS {
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
            let d = self.reduced(cost);
            let candidates = (0..self.cols())
                .filter(|&j| eligible[j] && !self.basic[j])
                .filter_map(|j| self.direction(j, d[j], tol).map(|dir| (j, dir)));
            let entering = if degenerate >= BLAND_AFTER {
                candidates.min_by_key(|&(j, _)| j)
            } else {
                candidates.max_by(|a, b| d[a.0].abs().total_cmp(&d[b.0].abs()).then(b.0.cmp(&a.0)))
            };
            let Some((c, dir)) = entering else {
                // confirm on a fresh factorization
                if verified || since_refactor == 0 {
                    return Ok(Step::Optimal);
                }
                self.refactor()?;
                since_refactor = 0;
                verified = true;
                continue;
            };
            verified = false;

            // Harris ratio test: relaxed limit, then the largest pivot within it
            let limit_of = |s: &Simplex, i: usize, relax: f64| -> Option<f64> {
                let alpha = dir * s.t[i][c];
                let j = s.basis[i];
                if alpha > PIVOT_TOL && s.lo[j].is_finite() {
                    Some(((s.z[j] - s.lo[j]).max(0.0) + relax) / alpha)
                } else if alpha < -PIVOT_TOL && s.hi[j].is_finite() {
                    Some(((s.hi[j] - s.z[j]).max(0.0) + relax) / -alpha)
                } else {
                    None
                }
            };
            let mut relaxed = f64::INFINITY;
            for i in 0..self.t.len() {
                if let Some(l) = limit_of(self, i, HARRIS_TOL) {
                    relaxed = relaxed.min(l);
                }
            }
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                if let Some(l) = limit_of(self, i, 0.0) {
                    if l <= relaxed && leave.is_none_or(|(r, _)| self.t[i][c].abs() > self.t[r][c].abs()) {
                        leave = Some((i, l));
                    }
                }
            }
            let flip = if dir > 0.0 { self.hi[c] - self.z[c] } else { self.z[c] - self.lo[c] };
            let theta = match leave {
                Some((_, l)) if l < flip => l,
                _ if flip.is_finite() => flip,
                _ => return Ok(Step::Unbounded),
            };
            degenerate = if theta == 0.0 { degenerate + 1 } else { 0 };
            for i in 0..self.t.len() {
                let j = self.basis[i];
                self.z[j] -= dir * theta * self.t[i][c];
            }
            match leave {
                Some((r, l)) if l < flip => {
                    let j = self.basis[r];
                    self.z[j] = if dir * self.t[r][c] > 0.0 { self.lo[j] } else { self.hi[j] };
                    self.z[c] += dir * theta;
                    self.pivot(r, c);
                    since_refactor += 1;
                }
                _ => {
                    self.z[c] = if dir > 0.0 { self.hi[c] } else { self.lo[c] };
                }
            }
        }
        Err(Error::Lp("stalled: pivot limit reached".into()))
    }

    fn remove_row(&mut self, i: usize) {
        self.a.remove(i);
        self.b.remove(i);
        self.t.remove(i);
        let j = self.basis.remove(i);
        self.basic[j] = false;
    }
}

/// Solves `p` by the two-phase bounded-variable simplex method.
pub fn lp_solve(p: &LpProblem) -> Result<LpSolution> {
    let nv = p.num_vars();
    if p.lower.len() != nv || p.upper.len() != nv {
        return Err(Error::LengthMismatch("bounds must match the number of variables".into()));
    }
    let infeasible = || Ok(LpSolution { status: Status::Infeasible, x: vec![0.0; nv], objective: f64::NAN });
    if (0..nv).any(|j| p.lower[j] > p.upper[j] || p.lower[j] == f64::INFINITY || p.upper[j] == f64::NEG_INFINITY) {
        return infeasible();
    }

    // normalized rows; a slack per inequality
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::with_capacity(p.constraints.len());
    for c in &p.constraints {
        if c.coefs.len() != nv {
            return Err(Error::LengthMismatch("constraint width must match the number of variables".into()));
        }
        let norm = c.coefs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm == 0.0 {
            let ok = match c.sense {
                Sense::Le => c.rhs >= -1e-12,
                Sense::Ge => c.rhs <= 1e-12,
                Sense::Eq => c.rhs.abs() <= 1e-12,
            };
            if !ok {
                return infeasible();
            }
            continue;
        }
        rows.push((c.coefs.iter().map(|v| v / norm).collect(), c.sense, c.rhs / norm));
    }
    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let art_start = nv + n_slack;
    let cols = art_start + m;

    let mut lo = p.lower.clone();
    let mut hi = p.upper.clone();
    for r in &rows {
        match r.1 {
            Sense::Le => {
                lo.push(0.0);
                hi.push(f64::INFINITY);
            }
            Sense::Ge => {
                lo.push(f64::NEG_INFINITY);
                hi.push(0.0);
            }
            Sense::Eq => {}
        }
    }
    lo.extend(std::iter::repeat_n(0.0, m));
    hi.extend(std::iter::repeat_n(f64::INFINITY, m));

    // nonbasic start: nearest finite bound to zero
    let mut z: Vec<f64> = (0..cols).map(|j| if lo[j] > 0.0 { lo[j] } else if hi[j] < 0.0 { hi[j] } else { 0.0 }).collect();
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    let mut next_slack = nv;
    for (i, (coefs, sense, rhs)) in rows.into_iter().enumerate() {
        let mut row = vec![0.0; cols];
        row[..nv].copy_from_slice(&coefs);
        if sense != Sense::Eq {
            row[next_slack] = 1.0;
            next_slack += 1;
        }
        let residual = rhs - (0..art_start).map(|j| row[j] * z[j]).sum::<f64>();
        let sign = if residual < 0.0 { -1.0 } else { 1.0 };
        row[art_start + i] = sign;
        z[art_start + i] = residual.abs();
        a.push(row);
        b.push(rhs);
    }
    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let mut basic = vec![false; cols];
    for flag in basic.iter_mut().skip(art_start) {
        *flag = true;
    }
    let mut s = Simplex {
        t: a.clone(),
        a,
        b,
        lo,
        hi,
        z,
        basis: (art_start..cols).collect(),
        basic,
    };
    for (i, row) in s.t.iter_mut().enumerate() {
        // B is diagonal ±1
        let sign = row[art_start + i];
        for v in row.iter_mut() {
            *v *= sign;
        }
    }

    let mut eligible = vec![true; cols];
    let mut phase1 = vec![0.0; cols];
    for c in phase1.iter_mut().skip(art_start) {
        *c = 1.0;
    }
    s.optimize(&phase1, &eligible)?;
    let infeas: f64 = s.z[art_start..].iter().sum();
    if infeas > INFEASIBLE_TOL * scale {
        return infeasible();
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < s.t.len() {
        if s.basis[i] >= art_start {
            match (0..art_start).filter(|&j| !s.basic[j]).max_by(|&x, &y| s.t[i][x].abs().total_cmp(&s.t[i][y].abs())) {
                Some(j) if s.t[i][j].abs() > PIVOT_TOL => {
                    let art = s.basis[i];
                    s.z[art] = 0.0;
                    s.pivot(i, j);
                }
                _ => {
                    s.remove_row(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    for j in art_start..cols {
        eligible[j] = false;
        s.z[j] = 0.0;
        s.lo[j] = 0.0;
        s.hi[j] = 0.0;
    }
    if !s.t.is_empty() {
        s.refactor()?;
    }

    let mut cost = vec![0.0; cols];
    cost[..nv].copy_from_slice(&p.objective);
    if matches!(s.optimize(&cost, &eligible)?, Step::Unbounded) {
        return Ok(LpSolution { status: Status::Unbounded, x: vec![0.0; nv], objective: f64::NEG_INFINITY });
    }
    let x: Vec<f64> = s.z[..nv].to_vec();
    let objective = x.iter().zip(&p.objective).map(|(a, b)| a * b).sum::<f64>();
    Ok(LpSolution { status: Status::Optimal, x, objective })
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Largest violation of `p`'s constraints and bounds at `x`.
pub fn max_violation(p: &LpProblem, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for c in &p.constraints {
        let lhs: f64 = c.coefs.iter().zip(x).map(|(a, b)| a * b).sum();
        let v = match c.sense {
            Sense::Le => lhs - c.rhs,
            Sense::Ge => c.rhs - lhs,
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        worst = worst.max(v);
    }
    for ((&xi, &lo), &hi) in x.iter().zip(&p.lower).zip(&p.upper) {
        worst = worst.max(lo - xi).max(xi - hi);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simple_bound() {
        let mut p = LpProblem::new(1);
        p.objective[0] = 1.0;
        p.add_constraint(vec![1.0], Sense::Ge, 3.0);
        let s = p.solve().unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradiction_is_infeasible() {
        let mut p = LpProblem::new(1);
        p.add_constraint(vec![1.0], Sense::Ge, 2.0);
        p.add_constraint(vec![1.0], Sense::Le, 1.0);
        assert_eq!(p.solve().unwrap().status, Status::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut p = LpProblem::new(2);
        p.objective = vec![-1.0, 0.0];
        p.add_constraint(vec![1.0, -1.0], Sense::Le, 1.0);
        assert_eq!(p.solve().unwrap().status, Status::Unbounded);
    }

    #[test]
    fn free_and_boxed_variables() {
        // min |x − 2.5| style: min t s.t. t ≥ x − 2.5, t ≥ 2.5 − x, x ∈ [−1, 1]
        let mut p = LpProblem::new(2);
        p.objective = vec![0.0, 1.0];
        p.set_bounds(0, -1.0, 1.0);
        p.add_constraint(vec![-1.0, 1.0], Sense::Ge, -2.5);
        p.add_constraint(vec![1.0, 1.0], Sense::Ge, 2.5);
        let s = p.solve().unwrap();
        assert!((s.objective - 1.5).abs() < 1e-12 && (s.x[0] - 1.0).abs() < 1e-12);
        // a free variable driven negative
        let mut p = LpProblem::new(1);
        p.objective = vec![1.0];
        p.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        p.add_constraint(vec![1.0], Sense::Ge, -4.0);
        let s = p.solve().unwrap();
        assert!((s.x[0] + 4.0).abs() < 1e-12);
        p.set_bounds(0, -1e6, 1e6);
        assert_eq!(p.solve().unwrap().x[0], -4.0);
        p.set_bounds(0, -2.0, 1e6);
        assert_eq!(p.solve().unwrap().x[0], -2.0);
        // upper bound only
        let mut p = LpProblem::new(1);
        p.objective = vec![-1.0];
        p.set_bounds(0, f64::NEG_INFINITY, 7.0);
        assert!((p.solve().unwrap().x[0] - 7.0).abs() < 1e-12);
    }

    fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for c in 0..n {
            let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
            if a[piv][c].abs() < 1e-10 {
                return None;
            }
            a.swap(c, piv);
            b.swap(c, piv);
            for r in 0..n {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..n {
                        a[r][k] -= f * a[c][k];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
        Some((0..n).map(|i| b[i] / a[i][i]).collect())
    }

    /// Minimum over basic feasible solutions of `min c·x, Ax ≤ b, x ≥ 0`.
    fn vertex_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
        let n = c.len();
        let mut planes: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().cloned()).collect();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = -1.0;
            planes.push((e, 0.0));
        }
        let mut best: Option<f64> = None;
        let k = planes.len();
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let sys: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
            let rhs: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
            if let Some(x) = solve_dense(sys, rhs) {
                let feasible = planes.iter().all(|(row, bi)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9);
                if feasible {
                    let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
            // next combination
            let mut i = n;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if idx[i] < k - n + i {
                    idx[i] += 1;
                    for j in i + 1..n {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn agrees_with_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..300 {
            let n = rng.gen_range(2..=3);
            let m = rng.gen_range(2..=5);
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect()).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..3.0)).collect();
            let mut p = LpProblem::new(n);
            p.objective = c.clone();
            for (row, &bi) in a.iter().zip(&b) {
                p.add_constraint(row.clone(), Sense::Le, bi);
            }
            let s = p.solve().unwrap();
            match s.status {
                Status::Optimal => {
                    let oracle = vertex_oracle(&c, &a, &b).unwrap();
                    assert!((s.objective - oracle).abs() < 1e-8, "{} vs {}", s.objective, oracle);
                    assert!(max_violation(&p, &s.x) < 1e-8);
                    checked += 1;
                }
                Status::Unbounded => {}
                Status::Infeasible => panic!("origin is feasible"),
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn equality_rows_and_redundancy() {
        let mut p = LpProblem::new(2);
        p.objective = vec![1.0, 2.0];
        p.add_constraint(vec![1.0, 1.0], Sense::Eq, 2.0);
        p.add_constraint(vec![2.0, 2.0], Sense::Eq, 4.0);
        p.add_constraint(vec![1.0, -1.0], Sense::Le, 1.0);
        let s = p.solve().unwrap();
        assert!((s.objective - 2.5).abs() < 1e-12);
    }
}

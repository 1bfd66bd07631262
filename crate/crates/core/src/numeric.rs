//! Scalar numerics shared by the metric code: power-law integrals,
//! adaptive Simpson quadrature and inversion of increasing functions.

/// `∫_a^b s^e ds` for `0 < a ≤ b` (`b` may be `+∞`).
pub(crate) fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    if b.is_infinite() {
        let k = e + 1.0;
        return if k < 0.0 { -a.powf(k) / k } else { f64::INFINITY };
    }
    power_integral_span(e, a, b - a)
}

/// `∫_a^{a+h} s^e ds` for `a > 0`, `h ≥ 0`.
///
/// Written as `a^{e+1} · expm1((e+1)·ln1p(h/a)) / (e+1)` so that exponents
/// close to `-1` and short spans do not cancel.
pub(crate) fn power_integral_span(e: f64, a: f64, h: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    if h.is_infinite() {
        return power_integral(e, a, h);
    }
    if e == 0.0 {
        return h;
    }
    let k = e + 1.0;
    let log_ratio = (h / a).ln_1p();
    if k == 0.0 {
        return log_ratio;
    }
    a.powf(k) * (k * log_ratio).exp_m1() / k
}

/// Solves `∫_a^{a+h} s^e ds = u` for `h`; `+∞` when the integral stays
/// below `u` on `[a, ∞)`.
pub(crate) fn power_integral_span_inverse(e: f64, a: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if e == 0.0 {
        return u;
    }
    let k = e + 1.0;
    if k == 0.0 {
        return a * u.exp_m1();
    }
    // (a+h)^k = a^k (1 + k u a^{-k})
    let z = k * u * a.powf(-k);
    if z <= -1.0 {
        return f64::INFINITY;
    }
    a * (z.ln_1p() / k).exp_m1()
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature with Richardson correction.
///
/// `rel_tol` is relative to a coarse estimate of `|∫ f|`; the absolute
/// floor is `1e-300`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    const PANELS: usize = 16;
    let width = (b - a) / PANELS as f64;
    let mut coarse = Vec::with_capacity(PANELS);
    let mut magnitude = 0.0;
    for i in 0..PANELS {
        let lo = a + width * i as f64;
        let hi = if i + 1 == PANELS { b } else { lo + width };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        magnitude += whole.abs();
        coarse.push((lo, hi, flo, fmid, fhi, whole));
    }
    let tol = (rel_tol * magnitude).max(1e-300) / PANELS as f64;
    coarse
        .into_iter()
        .map(|(lo, hi, flo, fmid, fhi, whole)| {
            simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol, SIMPSON_MAX_DEPTH)
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

const BRACKET_LIMIT: f64 = 1e300;

/// Solves `f(t) = target` for `t ≥ 0`, where `f` is continuous and strictly
/// increasing with `f(0) = 0`. The closure returns `(f(t), f'(t))`.
///
/// Returns `+∞` when `f` stays below `target` on `[0, 1e300]`. The root is
/// located by bracketing followed by safeguarded Newton steps and is
/// accurate to a few ulps.
pub fn invert_increasing<F: Fn(f64) -> (f64, f64)>(f: F, target: f64) -> f64 {
    if target.is_nan() {
        return f64::NAN;
    }
    if target <= 0.0 {
        return 0.0;
    }
    let (f1, _) = f(1.0);
    if f1 == target {
        return 1.0;
    }
    let (mut lo, mut hi);
    if f1 < target {
        lo = 1.0;
        hi = 2.0;
        while f(hi).0 < target {
            lo = hi;
            hi *= 2.0;
            if hi > BRACKET_LIMIT {
                return f64::INFINITY;
            }
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while f(lo).0 > target {
            hi = lo;
            lo *= 0.5;
            if lo < 1e-300 {
                lo = 0.0;
                break;
            }
        }
    }

    let mut t = 0.5 * (lo + hi);
    let mut last_step = hi - lo;
    for _ in 0..300 {
        let (value, slope) = f(t);
        if value == target {
            return t;
        }
        if value < target {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        let newton = t - (value - target) / slope;
        let step = (newton - t).abs();
        let next = if slope > 0.0 && newton > lo && newton < hi && step < 0.5 * last_step {
            last_step = step;
            newton
        } else {
            let mid = 0.5 * (lo + hi);
            last_step = hi - lo;
            mid
        };
        if (next - t).abs() <= 2.0 * f64::EPSILON * t.abs() {
            return next;
        }
        t = next;
    }
    t
}

/// Outcome of checking `lhs ≤ rhs` with a relative slack.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative values are violations before slack.
    pub slack: f64,
    pub holds: bool,
}

impl Inequality {
    /// `lhs ≤ rhs + rel · max(|lhs|, |rhs|)`
    pub fn check(lhs: f64, rhs: f64, rel: f64) -> Self {
        let holds = lhs <= rhs + rel * lhs.abs().max(rhs.abs());
        Inequality { lhs, rhs, slack: rhs - lhs, holds }
    }

    /// Slack normalized by the larger side, for worst-case reporting.
    pub fn relative_slack(&self) -> f64 {
        let scale = self.lhs.abs().max(self.rhs.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.slack / scale
        }
    }
}

//! Closed-form limit curves for the walk and its hypergraph.
//!
//! * `G_t(z) = exp(−|Γ| t + t Σ_j j k_j z^{j−1})` is the offspring generating
//!   function of the local branching process; `θ(t) = 1 − ρ(t)` where `ρ` is
//!   its smallest fixed point on `[0, 1]`.
//! * `u(t)` is the normalized cycle/component count and `φ(t) = (1 − u(t))/K`
//!   the normalized distance profile. A hyperedge of size `j` whose points
//!   hit the giant `X ~ Bin(j, θ)` times removes `j − 1 − (X − 1)^+`
//!   clusters, so `u' = −Σ_j k_j (j ρ − ρ^j)` with `ρ = 1 − θ`. For
//!   transpositions this is `−(1 − θ^2)`; [`phi_pairwise`] keeps that
//!   integrand for every class.
//! * For single `d`-cycles the same curves have explicit hypertree series,
//!   which are evaluated independently of the quadrature route.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};
use thiserror::Error;

use crate::class::ConjugacyClass;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("fixed point did not converge at t = {t}")]
    NonConvergence { t: f64 },
    #[error("quadrature did not reach tolerance on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("t = {t} is not supercritical (θ = 0)")]
    Subcritical { t: f64 },
}

type Result<T> = std::result::Result<T, AnalyticsError>;

const FIXED_POINT_TOL: f64 = 1e-13;
const FIXED_POINT_CAP: usize = 100_000;
const NEWTON_CAP: usize = 200;
const QUAD_TOL: f64 = 1e-11;
const SERIES_TERM_CAP: usize = 100_000;
const LN_SERIES_FLOOR: f64 = -34.538_776_394_910_684; // ln(1e-15)

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(AnalyticsError::Domain(format!("time must be finite and >= 0, got {t}")))
    }
}

/// `G_t(z)` for `z ∈ [0, 1]`.
pub fn generating_function(class: &ConjugacyClass, t: f64, z: f64) -> Result<f64> {
    check_time(t)?;
    if !(0.0..=1.0).contains(&z) {
        return Err(AnalyticsError::Domain(format!("z must lie in [0, 1], got {z}")));
    }
    let s: f64 = class
        .parts()
        .map(|(j, k)| f64::from(j * k) * (z.powi(j as i32 - 1) - 1.0))
        .sum();
    Ok((t * s).exp())
}

/// Survival map `θ ↦ 1 − G_t(1 − θ)`, written to stay accurate for small `θ`.
fn survival_map(class: &ConjugacyClass, t: f64, theta: f64) -> f64 {
    let log_rho = (-theta).ln_1p();
    let s: f64 = class
        .parts()
        .map(|(j, k)| -f64::from(j * k) * (f64::from(j - 1) * log_rho).exp_m1())
        .sum();
    -(-t * s).exp_m1()
}

/// `d/dθ` of [`survival_map`].
fn survival_slope(class: &ConjugacyClass, t: f64, theta: f64) -> f64 {
    let rho = 1.0 - theta;
    let log_rho = (-theta).ln_1p();
    let (mut s, mut ds) = (0.0, 0.0);
    for (j, k) in class.parts() {
        let jk = f64::from(j * k);
        s -= jk * (f64::from(j - 1) * log_rho).exp_m1();
        ds += jk * f64::from(j - 1) * rho.powi(j as i32 - 2);
    }
    t * (-t * s).exp() * ds
}

/// Giant-component fraction `θ(t)`: zero up to `t_c`, positive beyond.
///
/// Solves `θ = F(θ) = 1 − G_t(1 − θ)` by Newton's method from `θ = 1`.
/// `F − θ` is concave, so the iterates decrease monotonically onto the
/// root; bisection takes over if rounding breaks that.
pub fn theta(class: &ConjugacyClass, t: f64) -> Result<f64> {
    check_time(t)?;
    let mean_offspring = t * class.branching_rate();
    if mean_offspring <= 1.0 + 1e-12 {
        return Ok(0.0);
    }
    let mut th = 1.0;
    for _ in 0..NEWTON_CAP {
        let h = survival_map(class, t, th) - th;
        let dh = survival_slope(class, t, th) - 1.0;
        if h >= 0.0 || dh >= 0.0 {
            // at or below the root
            return if h.abs() < FIXED_POINT_TOL { Ok(th) } else { bisect_theta(class, t, 1.0) };
        }
        let next = th - h / dh;
        if !(next > 0.0 && next < th) {
            return bisect_theta(class, t, th);
        }
        if th - next < FIXED_POINT_TOL * th.max(1e-3) {
            return Ok(next);
        }
        th = next;
    }
    bisect_theta(class, t, th)
}

/// `h(θ) = F(θ) − θ` is positive below the root and negative above it.
fn bisect_theta(class: &ConjugacyClass, t: f64, upper: f64) -> Result<f64> {
    let h = |x: f64| survival_map(class, t, x) - x;
    let mut hi = upper;
    let mut lo = upper;
    let mut tries = 0;
    while h(lo) <= 0.0 {
        lo *= 0.5;
        tries += 1;
        if tries > 1100 {
            return Err(AnalyticsError::NonConvergence { t });
        }
    }
    for _ in 0..FIXED_POINT_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-16 * hi.max(1e-300) {
            return Ok(mid);
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(AnalyticsError::NonConvergence { t })
}

fn simpson_rec<F: Fn(f64) -> Result<f64>>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(AnalyticsError::Quadrature { a, b });
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)?)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `eps`.
fn integrate<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, eps: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    // Seed with a few panels so a flat start cannot fool the error estimate.
    let panels = 8;
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let hi = if p + 1 == panels { b } else { lo + width };
        let (fa, fm, fb) = (f(lo)?, f(0.5 * (lo + hi))?, f(hi)?);
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_rec(&f, lo, hi, fa, fm, fb, whole, eps / panels as f64, 40)?;
    }
    Ok(total)
}

/// `Σ_j k_j E[(Bin(j, θ) − 1)^+] = Σ_j k_j (j θ − 1 + (1 − θ)^j)`.
fn merge_deficit(class: &ConjugacyClass, th: f64) -> f64 {
    let log_rho = (-th).ln_1p();
    class
        .parts()
        .map(|(j, k)| f64::from(k) * (f64::from(j) * th + (f64::from(j) * log_rho).exp_m1()))
        .sum()
}

/// `∫_0^t θ(s)^2 ds`.
pub fn theta_sq_integral(class: &ConjugacyClass, t: f64) -> Result<f64> {
    check_time(t)?;
    let tc = class.critical_time();
    if t <= tc {
        return Ok(0.0);
    }
    integrate(|s| theta(class, s).map(|x| x * x), tc, t, QUAD_TOL)
}

/// `φ(t) = (1 − u(t))/K = t − (1/K) ∫_0^t Σ_j k_j E[(Bin(j, θ) − 1)^+] ds`;
/// equals `t` up to `t_c`.
pub fn phi_integral(class: &ConjugacyClass, t: f64) -> Result<f64> {
    check_time(t)?;
    let tc = class.critical_time();
    if t <= tc {
        return Ok(t);
    }
    let lost = integrate(|s| theta(class, s).map(|x| merge_deficit(class, x)), tc, t, QUAD_TOL)?;
    Ok(t - lost / f64::from(class.weight()))
}

/// `∫_0^t 1 − θ(s)^2 ds`, the per-transposition rate applied to every class.
/// Agrees with [`phi_integral`] for transpositions only; for larger cycles
/// it undercounts merges inside one hyperedge.
pub fn phi_pairwise(class: &ConjugacyClass, t: f64) -> Result<f64> {
    Ok(t - theta_sq_integral(class, t)?)
}

/// `u(t) = 1 − K φ(t)`, clamped at zero against cancellation once `u` is tiny.
pub fn u_of_t(class: &ConjugacyClass, t: f64) -> Result<f64> {
    Ok((1.0 - f64::from(class.weight()) * phi_integral(class, t)?).max(0.0))
}

/// `Σ_h ((d−1)h+1)^{h−2}/h! (dt)^h e^{−dt((d−1)h+1)}`, summed in log domain.
fn hypertree_series(d: u32, t: f64) -> f64 {
    let dt = f64::from(d) * t;
    let mut sum = (-dt).exp();
    if t == 0.0 {
        return sum;
    }
    let ln_dt = dt.ln();
    let mut ln_fact = 0.0;
    let mut below = 0;
    let mut prev = f64::NEG_INFINITY;
    for h in 1..SERIES_TERM_CAP {
        let hf = h as f64;
        ln_fact += hf.ln();
        let r = f64::from(d - 1) * hf + 1.0;
        let ln_term = (hf - 2.0) * r.ln() - ln_fact + hf * ln_dt - dt * r;
        sum += ln_term.exp();
        if ln_term < LN_SERIES_FLOOR && ln_term < prev {
            below += 1;
            if below == 3 {
                break;
            }
        } else {
            below = 0;
        }
        prev = ln_term;
    }
    sum
}

/// Limit of `N̄(tn)/n` for the `d`-uniform hypergraph process.
pub fn component_limit_series(d: u32, t: f64) -> Result<f64> {
    check_time(t)?;
    if d < 2 {
        return Err(AnalyticsError::Domain(format!("d must be >= 2, got {d}")));
    }
    Ok(hypertree_series(d, t))
}

/// Series form of `φ` for single `k`-cycles: `(1 − Σ_s …)/(k − 1)`.
pub fn phi_series(k: u32, t: f64) -> Result<f64> {
    let u = component_limit_series(k, t)?;
    Ok((1.0 - u) / f64::from(k - 1))
}

/// Number of `d`-uniform hypertrees with `h` hyperedges on
/// `r = (d−1)h + 1` labelled vertices: `(r−1)! r^{h−1} / (h! ((d−1)!)^h)`.
pub fn hypertree_count(d: u32, h: u32) -> Result<BigUint> {
    if d < 2 {
        return Err(AnalyticsError::Domain(format!("d must be >= 2, got {d}")));
    }
    if h == 0 {
        return Ok(BigUint::one());
    }
    let r = (d - 1) as usize * h as usize + 1;
    let factorial = |m: usize| (1..=m).fold(BigUint::one(), |acc, x| acc * BigUint::from(x));
    let num = factorial(r - 1) * BigUint::from(r).pow(h - 1);
    let den = factorial(h as usize) * factorial(d as usize - 1).pow(h);
    Ok(num / den)
}

/// Expected number of hypertree components with `h` edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedHypertrees {
    /// Exact `G_d(n, p)` expectation with `p = 1 − exp(−tn / C(n, d))`.
    pub exact: f64,
    /// `n r^{h−2} (dt)^h e^{−d r t} / h!`.
    pub asymptotic: f64,
}

fn binom_f64(n: u64, k: u64) -> f64 {
    if k > n {
        0.0
    } else if k <= 16 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    } else {
        ln_binomial(n, k).exp()
    }
}

pub fn expected_hypertrees(n: u64, d: u32, t: f64, h: u32) -> Result<ExpectedHypertrees> {
    check_time(t)?;
    if d < 2 {
        return Err(AnalyticsError::Domain(format!("d must be >= 2, got {d}")));
    }
    let r = u64::from(d - 1) * u64::from(h) + 1;
    if r > n {
        return Err(AnalyticsError::Domain(format!(
            "h = {h} needs {r} vertices but n = {n}"
        )));
    }
    let (d64, h64) = (u64::from(d), u64::from(h));
    let hf = f64::from(h);
    let rf = r as f64;
    let ln_count = ln_factorial(r - 1) + (hf - 1.0) * rf.ln()
        - ln_factorial(h64)
        - hf * ln_factorial(d64 - 1);
    let edges_total = binom_f64(n, d64);
    let rate = t * n as f64 / edges_total; // −ln(1 − p)
    let closed = binom_f64(r, d64) - hf + rf * binom_f64(n - r, d64 - 1);
    let exact = if h > 0 && t == 0.0 {
        0.0
    } else {
        let ln_p = if h == 0 { 0.0 } else { hf * (-(-rate).exp_m1()).ln() };
        (ln_binomial(n, r) + ln_count + ln_p - closed * rate).exp()
    };
    let dt = f64::from(d) * t;
    let asymptotic = if h > 0 && t == 0.0 {
        0.0
    } else {
        let ln_pow = if h == 0 { 0.0 } else { hf * dt.ln() };
        (n as f64).ln() + (hf - 2.0) * rf.ln() + ln_pow - dt * rf - ln_factorial(h64)
    }
    .exp();
    Ok(ExpectedHypertrees { exact, asymptotic })
}

/// Which normalization of the general-class giant-cycle threshold to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdForm {
    /// `(1 / (t 2^K)) ∫_0^t θ^2`, the form the cycle-count argument supports.
    #[default]
    Derived,
    /// `(2^K / t) ∫_0^t θ^2`.
    Displayed,
}

/// Fraction `δ` such that a cycle longer than `δ n` appears before time `t n`.
/// Transpositions use `θ(t)^2 / 8`.
pub fn giant_cycle_threshold(class: &ConjugacyClass, t: f64, form: ThresholdForm) -> Result<f64> {
    check_time(t)?;
    if t <= class.critical_time() {
        return Ok(0.0);
    }
    if class.as_single_cycle() == Some(2) {
        let th = theta(class, t)?;
        return Ok(th * th / 8.0);
    }
    let area = theta_sq_integral(class, t)?;
    let scale = 2f64.powi(class.weight() as i32);
    Ok(match form {
        ThresholdForm::Derived => area / (t * scale),
        ThresholdForm::Displayed => area * scale / t,
    })
}

/// Bad-mass feasibility ratio `M / (θ n)` (with `ε = 0`) and its upper bound
/// `t (1 − θ)^2 Σ_j k_j j (j − 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MRatio {
    pub exact: f64,
    pub bound: f64,
}

pub fn m_ratio(class: &ConjugacyClass, t: f64) -> Result<MRatio> {
    let th = theta(class, t)?;
    if th <= 0.0 {
        return Err(AnalyticsError::Subcritical { t });
    }
    let rho = 1.0 - th;
    let exact = class
        .parts()
        .map(|(j, k)| f64::from(j * k) * t * (rho * rho - rho.powi(j as i32)))
        .sum::<f64>()
        / th;
    let bound = t * rho * rho * class.parts().map(|(j, k)| f64::from(k * j * (j - 2))).sum::<f64>();
    Ok(MRatio { exact, bound })
}

/// Limiting fragmentations per step: `K θ(t)^2 / 2`.
pub fn window_fragmentation_rate(class: &ConjugacyClass, t: f64) -> Result<f64> {
    let th = theta(class, t)?;
    Ok(f64::from(class.weight()) * th * th / 2.0)
}

/// Limiting components lost per step, `Σ_j k_j (j ρ − ρ^j)` with `ρ = 1 − θ(t)`.
pub fn component_loss_rate(class: &ConjugacyClass, t: f64) -> Result<f64> {
    let th = theta(class, t)?;
    Ok(f64::from(class.weight()) - merge_deficit(class, th))
}

/// Limiting `U_j(tn)/n = k_j t (1 − θ(t))^j`.
pub fn good_edge_density(class: &ConjugacyClass, t: f64, j: u32) -> Result<f64> {
    let th = theta(class, t)?;
    Ok(f64::from(class.count(j)) * t * (1.0 - th).powi(j as i32))
}

/// Mean hypergraph degree `Σ_j (j − 1) j k_j t` of a vertex at time `t`.
pub fn mean_degree(class: &ConjugacyClass, t: f64) -> f64 {
    t * class.branching_rate()
}

/// Tabulated limit curves on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticProfile {
    pub class: ConjugacyClass,
    pub grid: Vec<f64>,
    pub theta: Vec<f64>,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub delta: Vec<f64>,
    /// `None` where `θ = 0`.
    pub m_ratio: Vec<Option<MRatio>>,
}

impl AnalyticProfile {
    pub fn compute(class: &ConjugacyClass, grid: &[f64]) -> Result<Self> {
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AnalyticsError::Domain("grid must be strictly increasing".into()));
        }
        let k = f64::from(class.weight());
        let mut out = Self {
            class: class.clone(),
            grid: grid.to_vec(),
            theta: Vec::with_capacity(grid.len()),
            u: Vec::with_capacity(grid.len()),
            phi: Vec::with_capacity(grid.len()),
            delta: Vec::with_capacity(grid.len()),
            m_ratio: Vec::with_capacity(grid.len()),
        };
        for &t in grid {
            let th = theta(class, t)?;
            let phi = phi_integral(class, t)?;
            out.theta.push(th);
            out.phi.push(phi);
            out.u.push(1.0 - k * phi);
            out.delta.push(giant_cycle_threshold(class, t, ThresholdForm::Derived)?);
            out.m_ratio.push(if th > 0.0 { Some(m_ratio(class, t)?) } else { None });
        }
        Ok(out)
    }

    pub const CSV_HEADER: &'static str = "t,theta,u,phi,delta,m_ratio_exact,m_ratio_bound";

    /// CSV with [`CSV_HEADER`](Self::CSV_HEADER); the ratio columns are empty where θ = 0.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for i in 0..self.grid.len() {
            let (me, mb) = match self.m_ratio[i] {
                Some(m) => (format!("{:.12}", m.exact), format!("{:.12}", m.bound)),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                s,
                "{},{:.12},{:.12},{:.12},{:.12},{},{}",
                self.grid[i], self.theta[i], self.u[i], self.phi[i], self.delta[i], me, mb
            );
        }
        s
    }
}

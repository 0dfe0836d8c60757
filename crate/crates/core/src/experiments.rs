//! Seeded Monte Carlo experiments over independent replicas, with CSV rows
//! and a JSON summary of statistical checks against the analytic curves.
//!
//! Replicas run on a rayon pool and are collected in replica order, so the
//! CSV bytes depend only on the configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{self, AnalyticsError, ThresholdForm};
use crate::class::ConjugacyClass;
use crate::distance::{self, CayleyBfs, DistanceError, DEFAULT_BFS_CAP};
use crate::hypergraph::HyperOptions;
use crate::perm::{PermError, Permutation};
use crate::walk::{replica_rng, TrajectoryRecord, WalkError, WalkState};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    /// Deterministic failures of the model itself, as opposed to bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Self::Invariant(_) | Self::Walk(WalkError::Coupling { .. })
        )
    }
}

type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Trajectory,
    TauDelta,
    WindowFrag,
    Census,
    Degree,
    DistanceBounds,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::Trajectory,
        Self::TauDelta,
        Self::WindowFrag,
        Self::Census,
        Self::Degree,
        Self::DistanceBounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Trajectory => "trajectory",
            Self::TauDelta => "tau_delta",
            Self::WindowFrag => "window_frag",
            Self::Census => "census",
            Self::Degree => "degree",
            Self::DistanceBounds => "distance_bounds",
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm = s.replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

mod class_text {
    use super::ConjugacyClass;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &ConjugacyClass, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(c)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ConjugacyClass, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Written as `"k2=1,k3=0"`.
    #[serde(with = "class_text")]
    pub class: ConjugacyClass,
    pub n: usize,
    /// Checkpoints in units of `n` steps.
    pub t_grid: Vec<f64>,
    pub replicas: u64,
    pub seed: u64,
    pub poissonize: bool,
    /// Vertices whose hypergraph degree is tracked (0-based; empty means vertex 0).
    pub watch: Vec<u32>,
    pub out: Option<PathBuf>,
    pub experiment: ExperimentKind,
    /// Horizon for `tau_delta`; defaults to the last grid time.
    pub c: Option<f64>,
    /// Cycle-size fraction for `tau_delta`; defaults to the giant-cycle threshold at `c`.
    pub delta: Option<f64>,
    pub threshold_form: ThresholdForm,
    /// `[t1, t2]` for `window_frag`; defaults to the last 10% of the grid.
    pub window: Option<[f64; 2]>,
    /// Largest hypertree size reported by `census`.
    pub max_h: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            class: ConjugacyClass::transpositions(),
            n: 100_000,
            t_grid: vec![0.25, 0.5, 0.75, 1.0],
            replicas: 10,
            seed: 0,
            poissonize: false,
            watch: Vec::new(),
            out: None,
            experiment: ExperimentKind::Trajectory,
            c: None,
            delta: None,
            threshold_form: ThresholdForm::Derived,
            window: None,
            max_h: 3,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.replicas == 0 {
            return bad("replicas must be >= 1".into());
        }
        if self.n < self.class.support_size() {
            return bad(format!(
                "n = {} is smaller than the class support {}",
                self.n,
                self.class.support_size()
            ));
        }
        if self.t_grid.is_empty() {
            return bad("t_grid is empty".into());
        }
        if self.t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return bad("t_grid entries must be finite and >= 0".into());
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("t_grid must be strictly increasing".into());
        }
        if let Some(&v) = self.watch.iter().find(|&&v| v as usize >= self.n) {
            return bad(format!("watch vertex {v} is out of range"));
        }
        match self.experiment {
            ExperimentKind::TauDelta => {
                let c = self.horizon();
                if c <= 0.0 {
                    return bad("tau_delta needs c > 0".into());
                }
                if let Some(d) = self.delta {
                    if !(d > 0.0 && d < 1.0) {
                        return bad(format!("delta must lie in (0, 1), got {d}"));
                    }
                }
            }
            ExperimentKind::WindowFrag => {
                let [t1, t2] = self.window_bounds();
                if !(0.0 <= t1 && t1 < t2) {
                    return bad(format!("window needs 0 <= t1 < t2, got [{t1}, {t2}]"));
                }
            }
            ExperimentKind::DistanceBounds => {
                if self.n > DEFAULT_BFS_CAP {
                    return bad(format!("distance_bounds needs n <= {DEFAULT_BFS_CAP}"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn horizon(&self) -> f64 {
        self.c.unwrap_or_else(|| *self.t_grid.last().unwrap())
    }

    fn window_bounds(&self) -> [f64; 2] {
        self.window.unwrap_or_else(|| {
            let t2 = *self.t_grid.last().unwrap();
            [0.9 * t2, t2]
        })
    }

    fn walk(&self) -> Result<WalkState> {
        let opts = HyperOptions {
            full_edge_log: false,
            watch: self.watch.clone(),
        };
        Ok(WalkState::with_options(self.class.clone(), self.n, opts)?.poissonized(self.poissonize))
    }

    fn replicas<T: Send>(&self, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.replicas).into_par_iter().map(f).collect()
    }
}

/// One named pass/fail line in the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    /// Non-fatal checks are reported but do not change the exit status.
    pub fatal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub rows: usize,
    pub checks: Vec<Check>,
    pub wall_clock_secs: f64,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.fatal)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub csv: String,
    pub summary: RunSummary,
}

/// Fraction of `values` satisfying `ok`.
fn fraction<T>(values: &[T], ok: impl Fn(&T) -> bool) -> f64 {
    values.iter().filter(|v| ok(v)).count() as f64 / values.len().max(1) as f64
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

fn rel_err(obs: f64, pred: f64) -> f64 {
    if pred == 0.0 {
        obs.abs()
    } else {
        ((obs - pred) / pred).abs()
    }
}

// ---------------------------------------------------------------- trajectory

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaTrajectory {
    pub replica: u64,
    pub records: Vec<TrajectoryRecord>,
    /// `sup (N − N̄)` over every step of the run.
    pub max_excess: usize,
}

pub fn run_trajectory(cfg: &ExperimentConfig) -> Result<Vec<ReplicaTrajectory>> {
    cfg.validate()?;
    cfg.replicas(|r| {
        let mut rng = replica_rng(cfg.seed, r);
        let mut walk = cfg.walk()?;
        let mut records = Vec::with_capacity(cfg.t_grid.len());
        for &t in &cfg.t_grid {
            walk.advance_to(&mut rng, t)?;
            walk.audit_coupling().map_err(ExperimentError::Invariant)?;
            records.push(walk.checkpoint(r));
        }
        Ok(ReplicaTrajectory {
            replica: r,
            records,
            max_excess: walk.max_excess_cycles(),
        })
    })
}

pub const TRAJECTORY_HEADER: &str =
    "replica,t,steps,N,Nbar,lambda,L,frag,frag_small,lb_dist,u_pred,theta_pred,phi_pred";

#[derive(Debug, Clone, Copy, PartialEq)]
struct Prediction {
    u: f64,
    theta: f64,
    phi: f64,
}

fn predictions(class: &ConjugacyClass, grid: &[f64]) -> Result<Vec<Prediction>> {
    grid.iter()
        .map(|&t| {
            Ok(Prediction {
                u: analytics::u_of_t(class, t)?,
                theta: analytics::theta(class, t)?,
                phi: analytics::phi_integral(class, t)?,
            })
        })
        .collect()
}

pub fn trajectory_csv(class: &ConjugacyClass, runs: &[ReplicaTrajectory]) -> Result<String> {
    let mut s = String::from(TRAJECTORY_HEADER);
    s.push('\n');
    let mut cache: BTreeMap<u64, Prediction> = BTreeMap::new();
    for run in runs {
        for r in &run.records {
            let p = match cache.get(&r.t.to_bits()) {
                Some(p) => *p,
                None => {
                    let p = predictions(class, &[r.t])?[0];
                    cache.insert(r.t.to_bits(), p);
                    p
                }
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{:.9},{:.9},{:.9}",
                r.replica,
                r.t,
                r.steps,
                r.cycles,
                r.components,
                r.largest_cycle,
                r.largest_component,
                r.frag,
                r.frag_small,
                r.lb_dist,
                p.u,
                p.theta,
                p.phi
            );
        }
    }
    Ok(s)
}

fn trajectory_checks(cfg: &ExperimentConfig, runs: &[ReplicaTrajectory]) -> Result<Vec<Check>> {
    let n = cfg.n as f64;
    let preds = predictions(&cfg.class, &cfg.t_grid)?;
    let mut checks = Vec::new();
    for (i, (&t, p)) in cfg.t_grid.iter().zip(&preds).enumerate() {
        let frac = fraction(runs, |r| (r.records[i].cycles as f64 / n - p.u).abs() < 0.01);
        checks.push(Check {
            name: format!("N/n vs u at t={t}"),
            passed: frac >= 0.9,
            observed: frac,
            expected: 0.9,
            tolerance: 0.01,
            fatal: true,
        });
        let frac = fraction(runs, |r| {
            (f64::from(r.records[i].largest_component) / n - p.theta).abs() < 0.02
        });
        checks.push(Check {
            name: format!("L/n vs theta at t={t}"),
            passed: frac >= 0.9,
            observed: frac,
            expected: 0.9,
            tolerance: 0.02,
            fatal: true,
        });
    }
    let cap = n.powf(0.75);
    let worst = runs.iter().map(|r| r.max_excess).max().unwrap_or(0) as f64;
    checks.push(Check {
        name: "sup(N - Nbar) <= n^(3/4)".into(),
        passed: worst <= cap,
        observed: worst,
        expected: cap,
        tolerance: 0.0,
        fatal: false,
    });
    Ok(checks)
}

// ----------------------------------------------------------------- tau_delta

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauDeltaRecord {
    pub replica: u64,
    pub hit: bool,
    /// First step after which `Λ > δ n`.
    pub hit_step: Option<u64>,
    /// `hit_step / n`.
    pub tau: Option<f64>,
}

/// Resolved `(c, δ)` for a `tau_delta` run.
pub fn tau_delta_params(cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    let c = cfg.horizon();
    let delta = match cfg.delta {
        Some(d) => d,
        None => {
            let d = analytics::giant_cycle_threshold(&cfg.class, c, cfg.threshold_form)?;
            if d <= 0.0 {
                return Err(ExperimentError::Config(format!(
                    "c = {c} is not supercritical; pass delta explicitly"
                )));
            }
            d
        }
    };
    Ok((c, delta))
}

pub fn run_tau_delta(cfg: &ExperimentConfig) -> Result<Vec<TauDeltaRecord>> {
    cfg.validate()?;
    let (c, delta) = tau_delta_params(cfg)?;
    let n = cfg.n;
    let threshold = (delta * n as f64).floor() as u32;
    cfg.replicas(|r| {
        let mut rng = replica_rng(cfg.seed, r);
        let mut walk = cfg.walk()?;
        walk.track_largest_above(threshold);
        let total = if cfg.poissonize {
            let mean = c * n as f64;
            Poisson::new(mean).map_or(0, |p| p.sample(&mut rng) as u64)
        } else {
            (c * n as f64).round() as u64
        };
        let chunk = (n as u64 / 16).max(1);
        while walk.steps() < total && walk.hit_step().is_none() {
            let k = chunk.min(total - walk.steps());
            walk.advance(&mut rng, k)?;
        }
        let hit_step = walk.hit_step().filter(|&s| s <= total);
        Ok(TauDeltaRecord {
            replica: r,
            hit: hit_step.is_some(),
            hit_step,
            tau: hit_step.map(|s| s as f64 / n as f64),
        })
    })
}

pub const TAU_DELTA_HEADER: &str = "replica,hit,hit_step,tau,c,delta";

pub fn tau_delta_csv(records: &[TauDeltaRecord], c: f64, delta: f64) -> String {
    let mut s = String::from(TAU_DELTA_HEADER);
    s.push('\n');
    for r in records {
        let step = r.hit_step.map(|x| x.to_string()).unwrap_or_default();
        let tau = r.tau.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{},{:.12}", r.replica, u8::from(r.hit), step, tau, c, delta);
    }
    s
}

// --------------------------------------------------------------- window_frag

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub replica: u64,
    pub steps: u64,
    /// Fragmentations inside the window.
    pub frag: u64,
    pub frag_small: u64,
    /// `N(t1) − N(t2)`.
    pub d_cycles: i64,
    /// `N̄(t1) − N̄(t2)`.
    pub d_components: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPrediction {
    pub t1: f64,
    pub t2: f64,
    /// Expected fragmentations, `K θ(t_m)^2 / 2` per step at the midpoint.
    pub frag: f64,
    /// Expected loss of components, evaluated at the midpoint.
    pub d_components: f64,
}

pub fn window_prediction(cfg: &ExperimentConfig) -> Result<WindowPrediction> {
    let [t1, t2] = cfg.window_bounds();
    let mid = 0.5 * (t1 + t2);
    let steps = (t2 - t1) * cfg.n as f64;
    Ok(WindowPrediction {
        t1,
        t2,
        frag: analytics::window_fragmentation_rate(&cfg.class, mid)? * steps,
        d_components: analytics::component_loss_rate(&cfg.class, mid)? * steps,
    })
}

pub fn run_window_frag(cfg: &ExperimentConfig) -> Result<Vec<WindowRecord>> {
    cfg.validate()?;
    let [t1, t2] = cfg.window_bounds();
    cfg.replicas(|r| {
        let mut rng = replica_rng(cfg.seed, r);
        let mut walk = cfg.walk()?;
        walk.advance_to(&mut rng, t1)?;
        let a = walk.checkpoint(r);
        walk.advance_to(&mut rng, t2)?;
        let b = walk.checkpoint(r);
        Ok(WindowRecord {
            replica: r,
            steps: b.steps - a.steps,
            frag: b.frag - a.frag,
            frag_small: b.frag_small - a.frag_small,
            d_cycles: a.cycles as i64 - b.cycles as i64,
            d_components: a.components as i64 - b.components as i64,
        })
    })
}

pub const WINDOW_HEADER: &str = "replica,t1,t2,steps,frag,frag_small,dN,dNbar,frag_pred,dNbar_pred";

pub fn window_csv(records: &[WindowRecord], pred: &WindowPrediction) -> String {
    let mut s = String::from(WINDOW_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{:.6},{:.6}",
            r.replica, pred.t1, pred.t2, r.steps, r.frag, r.frag_small, r.d_cycles, r.d_components,
            pred.frag, pred.d_components
        );
    }
    s
}

fn window_checks(records: &[WindowRecord], pred: &WindowPrediction) -> Vec<Check> {
    let mut checks = Vec::new();
    if pred.frag > 0.0 {
        let frac = fraction(records, |r| rel_err(r.frag as f64, pred.frag) <= 0.15);
        checks.push(Check {
            name: "window fragmentations vs K theta^2/2".into(),
            passed: frac >= 0.8,
            observed: frac,
            expected: 0.8,
            tolerance: 0.15,
            fatal: true,
        });
    } else {
        let steps = records.iter().map(|r| r.steps).sum::<u64>().max(1) as f64;
        let rate = records.iter().map(|r| r.frag).sum::<u64>() as f64 / steps;
        checks.push(Check {
            name: "subcritical window fragmentation rate".into(),
            passed: rate < 0.01,
            observed: rate,
            expected: 0.0,
            tolerance: 0.01,
            fatal: false,
        });
    }
    let frac = fraction(records, |r| rel_err(r.d_components as f64, pred.d_components) <= 0.10);
    checks.push(Check {
        name: "window component loss".into(),
        passed: frac >= 0.8,
        observed: frac,
        expected: 0.8,
        tolerance: 0.10,
        fatal: true,
    });
    checks
}

// -------------------------------------------------------------------- census

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub replica: u64,
    pub t: f64,
    pub hypertrees: BTreeMap<u32, u64>,
    pub good_edges: BTreeMap<u32, u64>,
}

pub fn run_census(cfg: &ExperimentConfig) -> Result<Vec<Vec<CensusRecord>>> {
    cfg.validate()?;
    cfg.replicas(|r| {
        let mut rng = replica_rng(cfg.seed, r);
        let mut walk = cfg.walk()?;
        let mut out = Vec::with_capacity(cfg.t_grid.len());
        for &t in &cfg.t_grid {
            walk.advance_to(&mut rng, t)?;
            let snap = walk.hypergraph().snapshot();
            out.push(CensusRecord {
                replica: r,
                t,
                hypertrees: snap.census,
                good_edges: snap.good_edges,
            });
        }
        Ok(out)
    })
}

/// Replica-averaged census against its predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    /// `hypertrees` (index `h`) or `good_edges` (index `j`).
    pub quantity: String,
    pub t: f64,
    pub index: u32,
    pub observed_mean: f64,
    pub observed_se: f64,
    pub predicted: Option<f64>,
    pub predicted_asymptotic: Option<f64>,
}

pub fn census_rows(cfg: &ExperimentConfig, runs: &[Vec<CensusRecord>]) -> Result<Vec<CensusRow>> {
    let n = cfg.n as u64;
    let d = cfg.class.as_single_cycle();
    let mut rows = Vec::new();
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        for h in 0..=cfg.max_h {
            let obs: Vec<f64> = runs
                .iter()
                .map(|r| r[i].hypertrees.get(&h).copied().unwrap_or(0) as f64)
                .collect();
            let (mean, se) = mean_se(&obs);
            let pred = match d {
                Some(d) if u64::from(d - 1) * u64::from(h) < n => {
                    Some(analytics::expected_hypertrees(n, d, t, h)?)
                }
                _ => None,
            };
            rows.push(CensusRow {
                quantity: "hypertrees".into(),
                t,
                index: h,
                observed_mean: mean,
                observed_se: se,
                predicted: pred.map(|p| p.exact),
                predicted_asymptotic: pred.map(|p| p.asymptotic),
            });
        }
        for (j, _) in cfg.class.parts() {
            let obs: Vec<f64> = runs
                .iter()
                .map(|r| r[i].good_edges.get(&j).copied().unwrap_or(0) as f64)
                .collect();
            let (mean, se) = mean_se(&obs);
            let pred = analytics::good_edge_density(&cfg.class, t, j)? * n as f64;
            rows.push(CensusRow {
                quantity: "good_edges".into(),
                t,
                index: j,
                observed_mean: mean,
                observed_se: se,
                predicted: Some(pred),
                predicted_asymptotic: Some(pred),
            });
        }
    }
    Ok(rows)
}

pub const CENSUS_HEADER: &str =
    "quantity,t,index,observed_mean,observed_se,predicted,predicted_asymptotic";

pub fn census_csv(rows: &[CensusRow]) -> String {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
    let mut s = String::from(CENSUS_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.6},{:.6},{},{}",
            r.quantity,
            r.t,
            r.index,
            r.observed_mean,
            r.observed_se,
            opt(r.predicted),
            opt(r.predicted_asymptotic)
        );
    }
    s
}

fn census_checks(rows: &[CensusRow]) -> Vec<Check> {
    rows.iter()
        .filter(|r| r.t > 0.0)
        .filter_map(|r| {
            let pred = r.predicted?;
            let tol = if r.quantity == "hypertrees" { 0.05 } else { 0.10 };
            let err = rel_err(r.observed_mean, pred);
            Some(Check {
                name: format!("{} index={} t={}", r.quantity, r.index, r.t),
                passed: err <= tol,
                observed: r.observed_mean,
                expected: pred,
                tolerance: tol,
                fatal: true,
            })
        })
        .collect()
}

// -------------------------------------------------------------------- degree

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRecord {
    pub replica: u64,
    pub vertex: u32,
    /// `Σ (|e| − 1)` over hyperedges containing the vertex.
    pub degree: u64,
}

pub fn run_degree(cfg: &ExperimentConfig) -> Result<Vec<DegreeRecord>> {
    cfg.validate()?;
    let t = *cfg.t_grid.last().unwrap();
    let nested = cfg.replicas(|r| {
        let mut rng = replica_rng(cfg.seed, r);
        let mut walk = cfg.walk()?;
        walk.advance_to(&mut rng, t)?;
        Ok(walk
            .hypergraph()
            .watched()
            .map(|(vertex, degree)| DegreeRecord { replica: r, vertex, degree })
            .collect::<Vec<_>>())
    })?;
    Ok(nested.into_iter().flatten().collect())
}

pub const DEGREE_HEADER: &str = "replica,vertex,degree";

pub fn degree_csv(records: &[DegreeRecord]) -> String {
    let mut s = String::from(DEGREE_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(s, "{},{},{}", r.replica, r.vertex + 1, r.degree);
    }
    s
}

fn degree_checks(cfg: &ExperimentConfig, records: &[DegreeRecord]) -> Vec<Check> {
    let t = *cfg.t_grid.last().unwrap();
    let xs: Vec<f64> = records.iter().map(|r| r.degree as f64).collect();
    let (mean, se) = mean_se(&xs);
    let pred = analytics::mean_degree(&cfg.class, t);
    vec![Check {
        name: "mean degree vs t * sum j(j-1)k_j".into(),
        passed: (mean - pred).abs() <= 3.0 * se,
        observed: mean,
        expected: pred,
        tolerance: 3.0 * se,
        fatal: true,
    }]
}

// ----------------------------------------------------------- distance_bounds

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub rank: usize,
    /// 1-based cycle notation.
    pub sigma: String,
    pub lower: u64,
    pub bfs: u32,
    /// Constructive factorization length, single-cycle classes only.
    pub constructive: Option<usize>,
    pub residues: usize,
    /// `½(n − N) + ½|R₃|`, 3-cycles only.
    pub upper: Option<f64>,
}

pub fn run_distance_bounds(cfg: &ExperimentConfig) -> Result<Vec<DistanceRow>> {
    cfg.validate()?;
    let n = cfg.n;
    let table = CayleyBfs::new(&cfg.class, n, DEFAULT_BFS_CAP)?;
    let k = cfg.class.as_single_cycle();
    let mut rows = Vec::new();
    for (rank, images, bfs) in table.reachable() {
        let sigma = Permutation::from_succ(images.iter().map(|&x| u32::from(x)).collect())?;
        let lower = distance::lower_bound(&sigma, &cfg.class);
        let (constructive, residues) = match k {
            Some(k) if k <= 6 => {
                let f = distance::decompose_to_kcycles(&sigma, k)?;
                if f.compose(n)?.succ() != sigma.succ() {
                    return Err(ExperimentError::Invariant(format!(
                        "factorization of {} does not compose back",
                        sigma.to_cycle_notation()
                    )));
                }
                (Some(f.length), f.residues)
            }
            Some(k) => (None, distance::residue_count(&sigma, k)),
            None => (None, 0),
        };
        let upper = (k == Some(3))
            .then(|| 0.5 * (n - sigma.num_cycles()) as f64 + 0.5 * residues as f64);
        let row = DistanceRow {
            rank,
            sigma: sigma.to_cycle_notation(),
            lower,
            bfs,
            constructive,
            residues,
            upper,
        };
        let violated = u64::from(bfs) < lower
            || constructive.is_some_and(|c| (c as u32) < bfs)
            || upper.is_some_and(|u| f64::from(bfs) > u || constructive.map(|c| c as f64) != Some(u));
        if violated {
            return Err(ExperimentError::Invariant(format!("distance bounds fail at {row:?}")));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub const DISTANCE_HEADER: &str = "rank,sigma,lower,bfs,constructive,residues,upper";

pub fn distance_csv(rows: &[DistanceRow]) -> String {
    let mut s = String::from(DISTANCE_HEADER);
    s.push('\n');
    for r in rows {
        let c = r.constructive.map(|x| x.to_string()).unwrap_or_default();
        let u = r.upper.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.rank, r.sigma, r.lower, r.bfs, c, r.residues, u);
    }
    s
}

fn distance_checks(cfg: &ExperimentConfig, rows: &[DistanceRow]) -> Vec<Check> {
    let mut checks = vec![Check {
        name: "reachable permutations".into(),
        passed: !rows.is_empty(),
        observed: rows.len() as f64,
        expected: rows.len() as f64,
        tolerance: 0.0,
        fatal: true,
    }];
    if cfg.class.as_single_cycle() == Some(3) {
        let gap = rows.iter().map(|r| u64::from(r.bfs) - r.lower).max().unwrap_or(0) as f64;
        let half_r = 0.5 * rows.iter().map(|r| r.residues).max().unwrap_or(0) as f64;
        checks.push(Check {
            name: "max(bfs - lower) <= max|R3| / 2".into(),
            passed: gap <= half_r,
            observed: gap,
            expected: half_r,
            tolerance: 0.0,
            fatal: true,
        });
    }
    checks
}

// ---------------------------------------------------------------- dispatch

/// Run the configured experiment and assemble its CSV and summary.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    cfg.validate()?;
    let (csv, rows, checks) = match cfg.experiment {
        ExperimentKind::Trajectory => {
            let runs = run_trajectory(cfg)?;
            let rows = runs.iter().map(|r| r.records.len()).sum();
            (trajectory_csv(&cfg.class, &runs)?, rows, trajectory_checks(cfg, &runs)?)
        }
        ExperimentKind::TauDelta => {
            let (c, delta) = tau_delta_params(cfg)?;
            let recs = run_tau_delta(cfg)?;
            let hits = fraction(&recs, |r| r.hit);
            let supercritical = c > cfg.class.critical_time();
            let check = Check {
                name: if supercritical { "hit fraction" } else { "subcritical hits" }.into(),
                passed: if supercritical { hits >= 0.9 } else { hits == 0.0 },
                observed: hits,
                expected: if supercritical { 0.9 } else { 0.0 },
                tolerance: 0.0,
                fatal: true,
            };
            (tau_delta_csv(&recs, c, delta), recs.len(), vec![check])
        }
        ExperimentKind::WindowFrag => {
            let pred = window_prediction(cfg)?;
            let recs = run_window_frag(cfg)?;
            (window_csv(&recs, &pred), recs.len(), window_checks(&recs, &pred))
        }
        ExperimentKind::Census => {
            let runs = run_census(cfg)?;
            let rows = census_rows(cfg, &runs)?;
            (census_csv(&rows), rows.len(), census_checks(&rows))
        }
        ExperimentKind::Degree => {
            let recs = run_degree(cfg)?;
            (degree_csv(&recs), recs.len(), degree_checks(cfg, &recs))
        }
        ExperimentKind::DistanceBounds => {
            let rows = run_distance_bounds(cfg)?;
            (distance_csv(&rows), rows.len(), distance_checks(cfg, &rows))
        }
    };
    Ok(RunOutput {
        csv,
        summary: RunSummary {
            experiment: cfg.experiment,
            config: cfg.clone(),
            seed: cfg.seed,
            rows,
            checks,
            wall_clock_secs: start.elapsed().as_secs_f64(),
        },
    })
}

/// Write `<stem>.csv` and `<stem>.json` under `dir`.
pub fn emit_report(output: &RunOutput, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&csv, &output.csv)?;
    std::fs::write(&json, output.summary.to_json())?;
    Ok((csv, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            n: 500,
            replicas: 3,
            seed: 11,
            experiment: kind,
            ..Default::default()
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ExperimentConfig {
            class: "k2=1,k3=2".parse().unwrap(),
            window: Some([0.5, 0.6]),
            ..small(ExperimentKind::WindowFrag)
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"k2=1,k3=2\""));
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let partial = ExperimentConfig::from_json(r#"{"class":"k3=1","n":50}"#).unwrap();
        assert_eq!(partial.class, ConjugacyClass::k_cycles(3));
        assert_eq!(partial.replicas, 10);
        assert!(ExperimentConfig::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = small(ExperimentKind::Trajectory);
        cfg.t_grid = vec![0.5, 0.5];
        assert!(cfg.validate().is_err());
        cfg.t_grid = vec![0.1];
        cfg.replicas = 0;
        assert!(cfg.validate().is_err());
        cfg.replicas = 1;
        cfg.n = 2;
        cfg.class = ConjugacyClass::k_cycles(3);
        assert!(cfg.validate().is_err());
        let mut cfg = small(ExperimentKind::DistanceBounds);
        cfg.n = 9;
        assert!(cfg.validate().is_err());
        assert_eq!("tau-delta".parse::<ExperimentKind>().unwrap(), ExperimentKind::TauDelta);
    }

    #[test]
    fn trajectory_deterministic_and_ordered() {
        let mut cfg = small(ExperimentKind::Trajectory);
        cfg.t_grid = vec![0.0, 0.5, 1.0];
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.csv, b.csv);
        let lines: Vec<&str> = a.csv.lines().collect();
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert!(lines[1].starts_with("0,0,0,500,500,1,1,0,0,0,"));
        let replicas: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(replicas, ["0", "0", "0", "1", "1", "1", "2", "2", "2"]);
    }

    #[test]
    fn header_only_when_empty() {
        assert_eq!(
            trajectory_csv(&ConjugacyClass::transpositions(), &[]).unwrap(),
            format!("{TRAJECTORY_HEADER}\n")
        );
        assert_eq!(degree_csv(&[]), format!("{DEGREE_HEADER}\n"));
    }

    #[test]
    fn summary_round_trip() {
        let out = run(&small(ExperimentKind::Degree)).unwrap();
        let text = out.summary.to_json();
        let back: RunSummary = serde_json::from_str(&text).unwrap();
        assert_eq!(back, out.summary);
        assert_eq!(serde_json::to_string_pretty(&back).unwrap(), text);
    }

    #[test]
    fn tau_delta_needs_supercritical_default() {
        let mut cfg = small(ExperimentKind::TauDelta);
        cfg.c = Some(0.3);
        assert!(run(&cfg).is_err());
        cfg.delta = Some(0.9);
        let out = run(&cfg).unwrap();
        assert!(out.summary.passed());
        assert!(out.csv.lines().skip(1).all(|l| l.starts_with(|c: char| c.is_ascii_digit())));
    }

    #[test]
    fn census_at_time_zero() {
        let mut cfg = small(ExperimentKind::Census);
        cfg.class = ConjugacyClass::k_cycles(3);
        cfg.t_grid = vec![0.0];
        let runs = run_census(&cfg).unwrap();
        let rows = census_rows(&cfg, &runs).unwrap();
        assert_eq!(rows[0].observed_mean, 500.0);
        assert!((rows[0].predicted.unwrap() - 500.0).abs() < 1e-9);
    }

    #[test]
    fn distance_bounds_on_a4() {
        let cfg = ExperimentConfig {
            class: ConjugacyClass::k_cycles(3),
            n: 4,
            ..small(ExperimentKind::DistanceBounds)
        };
        let rows = run_distance_bounds(&cfg).unwrap();
        assert_eq!(rows.len(), 12);
        let id = rows.iter().find(|r| r.bfs == 0).unwrap();
        assert_eq!((id.lower, id.bfs, id.constructive), (0, 0, Some(0)));
    }

    #[test]
    fn emit_writes_both_files() {
        let out = run(&small(ExperimentKind::Degree)).unwrap();
        let dir = std::env::temp_dir().join(format!("cyclewalk-emit-{}", std::process::id()));
        let (csv, json) = emit_report(&out, &dir, "deg").unwrap();
        assert_eq!(std::fs::read_to_string(csv).unwrap(), out.csv);
        assert!(std::fs::read_to_string(json).unwrap().contains("\"experiment\": \"degree\""));
        std::fs::remove_dir_all(dir).unwrap();
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p cyclewalk --test acceptance`.

mod common;

use common::{all_perms, compose, count_hypertrees, cycle_perm, is_even, orbits};
use cyclewalk::analytics::{
    component_limit_series, hypertree_count, m_ratio, phi_integral, phi_series, theta, u_of_t,
};
use cyclewalk::distance::{decompose_to_kcycles, lower_bound, residue_count, DEFAULT_BFS_CAP};
use cyclewalk::experiments::{
    run_census, run_degree, run_tau_delta, run_trajectory, run_window_frag, ReplicaTrajectory,
};
use cyclewalk::{
    replica_rng, CayleyBfs, ConjugacyClass, ExperimentConfig, ExperimentKind, Permutation,
    StepEvent, WalkState,
};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn class(spec: &str) -> ConjugacyClass {
    spec.parse().unwrap()
}

fn within_time(start: Instant, limit: Option<Duration>, detail: String) -> Outcome {
    match limit {
        Some(l) if start.elapsed() > l => Err(format!("{detail}; over the {l:?} budget")),
        _ => Ok(detail),
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_fixed_point() -> Outcome {
    let start = Instant::now();
    let k2 = ConjugacyClass::transpositions();
    let th = theta(&k2, 1.0).map_err(|e| e.to_string())?;
    let fp = (th - (1.0 - (-2.0 * th).exp())).abs();
    let mut worst_sub: f64 = 0.0;
    for t in [0.1, 0.2, 0.3, 0.4, 0.5] {
        worst_sub = worst_sub.max(theta(&k2, t).unwrap().abs());
    }
    let ok = (th - 0.796812).abs() <= 1e-6 && fp < 1e-12 && worst_sub <= 1e-9;
    let detail = format!("theta(1) = {th:.9}, fixed-point residual {fp:.1e}, max subcritical theta {worst_sub:.1e}");
    check(ok, detail).and_then(|d| within_time(start, Some(Duration::from_secs(1)), d))
}

fn c2_cross_method() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
    let (mut phi_gap, mut u_gap): (f64, f64) = (0.0, 0.0);
    for k in 2..=4u32 {
        let cls = ConjugacyClass::k_cycles(k);
        for &t in &grid {
            let a = phi_series(k, t).map_err(|e| e.to_string())?;
            let b = phi_integral(&cls, t).map_err(|e| e.to_string())?;
            phi_gap = phi_gap.max((a - b).abs());
            let c = component_limit_series(k, t).map_err(|e| e.to_string())?;
            let u = u_of_t(&cls, t).map_err(|e| e.to_string())?;
            u_gap = u_gap.max((c - u).abs());
        }
    }
    let detail = format!("max |phi_series - phi_integral| = {phi_gap:.2e}, max |series - u| = {u_gap:.2e}");
    check(phi_gap < 1e-6 && u_gap < 1e-6, detail)
        .and_then(|d| within_time(start, Some(Duration::from_secs(10)), d))
}

fn c3_subcritical_lines() -> Outcome {
    let mut worst: f64 = 0.0;
    for spec in ["k2=1", "k3=1", "k2=1,k3=1"] {
        let cls = class(spec);
        let k = f64::from(cls.weight());
        let tc = cls.critical_time();
        for i in 0..=100 {
            let t = (tc - 1e-3) * i as f64 / 100.0;
            let u = u_of_t(&cls, t).unwrap();
            let phi = phi_integral(&cls, t).unwrap();
            worst = worst.max((u - (1.0 - k * t)).abs()).max((phi - t).abs());
        }
    }
    check(worst <= 1e-9, format!("max deviation from the exact lines {worst:.1e}"))
}

fn c4_hypertrees() -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for (d, hs) in [(2u32, 1..=4u32), (3, 1..=3), (4, 1..=2)] {
        for h in hs {
            let fast = hypertree_count(d, h).map_err(|e| e.to_string())?;
            let slow = count_hypertrees(d as usize, h as usize);
            ok &= fast == slow.into();
            lines.push(format!("({d},{h})={slow}"));
        }
    }
    ok &= hypertree_count(3, 2).unwrap() == 15u32.into();
    check(ok, lines.join(" ")).and_then(|d| within_time(start, Some(Duration::from_secs(30)), d))
}

fn c5_coupling_fuzz() -> Outcome {
    let mut total = 0u64;
    for (ci, spec) in ["k2=1", "k3=1", "k2=2", "k2=1,k3=1"].into_iter().enumerate() {
        let cls = class(spec);
        let mut steps = 0u64;
        let mut run = 0u64;
        // restarts at several sizes so every regime is visited
        while steps < 1_000_000 {
            let n = [60usize, 300, 1500][run as usize % 3];
            let mut w = WalkState::new(cls.clone(), n).map_err(|e| e.to_string())?;
            let mut rng = replica_rng(1000 + ci as u64, run);
            let budget = (3 * n as u64).min(1_000_000 - steps);
            for _ in 0..budget / 50 {
                // the walk itself rejects any step leaving N < N̄
                w.advance(&mut rng, 50).map_err(|e| format!("{spec}: {e}"))?;
            }
            w.audit_coupling().map_err(|e| format!("{spec}: {e}"))?;
            steps += budget / 50 * 50;
            run += 1;
        }
        total += steps;
    }
    Ok(format!("{total} steps over 4 classes, zero violations"))
}

fn c6_split_semantics() -> Outcome {
    let start = Instant::now();
    let mut cases = 0u64;
    for n in 2..=7usize {
        for p in all_perms(n) {
            let base = Permutation::from_succ(p.clone()).unwrap();
            let orb = orbits(&p);
            for i in 0..n as u32 {
                let cyc = orb.iter().find(|c| c.contains(&i)).unwrap();
                let mut by_size = vec![Vec::new(); n + 1];
                for j in 0..n as u32 {
                    if i == j {
                        continue;
                    }
                    cases += 1;
                    let mut q = base.clone();
                    let ev = q.apply_transposition(i, j).unwrap();
                    let brute = compose(&cycle_perm(n, &[i, j]), &p);
                    if q.succ() != &brute[..] {
                        return Err(format!("product mismatch at {p:?} ({i} {j})"));
                    }
                    if !cyc.contains(&j) {
                        continue;
                    }
                    let l = cyc.len();
                    let mut k = 0;
                    let mut x = i;
                    while x != j {
                        x = p[x as usize];
                        k += 1;
                    }
                    // piece of i is {i, σ(i), …, σ^{k-1}(i)}, the rest goes with j
                    let mut piece = Vec::new();
                    let mut x = i;
                    for _ in 0..k {
                        piece.push(x);
                        x = p[x as usize];
                    }
                    piece.sort_unstable();
                    let mut got = orbits(&brute).into_iter().find(|c| c.contains(&i)).unwrap();
                    got.sort_unstable();
                    let expect_ev = StepEvent::Fragmentation { pieces: (k as u32, (l - k) as u32) };
                    if got != piece || ev != expect_ev {
                        return Err(format!("split mismatch at {p:?} ({i} {j}): {ev:?}"));
                    }
                    by_size[k.min(l - k)].push(j);
                }
                for (s, js) in by_size.iter().enumerate() {
                    if js.len() > 2 {
                        return Err(format!("{} values of j give piece size {s}", js.len()));
                    }
                }
            }
        }
    }
    within_time(start, Some(Duration::from_secs(60)), format!("{cases} (sigma, i, j) cases checked"))
}

fn trajectory(spec: &str, grid: Vec<f64>, seed: u64) -> Result<Vec<ReplicaTrajectory>, String> {
    let cfg = ExperimentConfig {
        class: class(spec),
        n: 100_000,
        t_grid: grid,
        replicas: 10,
        seed,
        ..Default::default()
    };
    run_trajectory(&cfg).map_err(|e| e.to_string())
}

struct Runs {
    k2: Vec<ReplicaTrajectory>,
    k3: Vec<ReplicaTrajectory>,
}

fn c7_u_curve(runs: &Runs) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (spec, reps) in [("k2=1", &runs.k2), ("k3=1", &runs.k3)] {
        let cls = class(spec);
        for (a, rec) in reps[0].records.iter().enumerate() {
            let u = u_of_t(&cls, rec.t).unwrap();
            let good = reps
                .iter()
                .filter(|r| (r.records[a].cycles as f64 / 1e5 - u).abs() < 0.01)
                .count();
            ok &= good >= 9;
            lines.push(format!("{spec}@{:.3}:{good}/10", rec.t));
        }
    }
    check(ok, lines.join(" "))
}

fn c8_giant(runs: &Runs) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (spec, reps) in [("k2=1", &runs.k2), ("k3=1", &runs.k3)] {
        let rec = reps[0].records.last().unwrap();
        let th = theta(&class(spec), rec.t).unwrap();
        let good = reps
            .iter()
            .filter(|r| {
                let l = r.records.last().unwrap().largest_component as f64 / 1e5;
                (l - th).abs() < 0.02
            })
            .count();
        ok &= good >= 9;
        lines.push(format!("{spec}@{:.1}: theta={th:.4}, {good}/10", rec.t));
    }
    check(ok, lines.join(" "))
}

fn c9_tau_delta() -> Outcome {
    let k2 = ConjugacyClass::transpositions();
    let delta = theta(&k2, 0.7).unwrap().powi(2) / 8.0;
    let run = |c: f64| {
        let cfg = ExperimentConfig {
            experiment: ExperimentKind::TauDelta,
            n: 100_000,
            replicas: 20,
            seed: 9,
            t_grid: vec![c],
            c: Some(c),
            delta: Some(delta),
            ..Default::default()
        };
        run_tau_delta(&cfg).map(|r| r.iter().filter(|x| x.hit).count())
    };
    let hits = run(0.7).map_err(|e| e.to_string())?;
    let control = run(0.4).map_err(|e| e.to_string())?;
    check(
        hits >= 18 && control == 0,
        format!("delta = {delta:.5}: {hits}/20 hits at c=0.7, {control}/20 at c=0.4"),
    )
}

fn c10_subcritical_cycles() -> Outcome {
    let k3 = ConjugacyClass::k_cycles(3);
    let t = 0.8 * k3.critical_time();
    let reps = trajectory("k3=1", vec![t], 10)?;
    let bound = 40.0 * (1e5f64).ln();
    let worst = reps.iter().map(|r| r.records[0].largest_cycle).max().unwrap();
    check(
        reps.iter().all(|r| f64::from(r.records[0].largest_cycle) <= bound),
        format!("largest cycle {worst} vs bound {bound:.0}"),
    )
}

fn c11_window() -> Outcome {
    let cfg = ExperimentConfig {
        experiment: ExperimentKind::WindowFrag,
        n: 100_000,
        replicas: 10,
        seed: 11,
        t_grid: vec![1.0],
        window: Some([0.9, 1.0]),
        ..Default::default()
    };
    let recs = run_window_frag(&cfg).map_err(|e| e.to_string())?;
    let th = theta(&ConjugacyClass::transpositions(), 0.95).unwrap();
    let steps = 0.1 * 1e5;
    let (frag_pred, comp_pred) = (th * th / 2.0, 1.0 - th * th);
    let frag_ok = recs
        .iter()
        .filter(|r| ((r.frag as f64 / steps) / frag_pred - 1.0).abs() <= 0.15)
        .count();
    let comp_ok = recs
        .iter()
        .filter(|r| ((r.d_components as f64 / steps) / comp_pred - 1.0).abs() <= 0.10)
        .count();
    check(
        frag_ok >= 8 && comp_ok >= 8,
        format!("fragmentation {frag_ok}/10 near {frag_pred:.4}, component loss {comp_ok}/10 near {comp_pred:.4}"),
    )
}

fn c12_excess(runs: &Runs) -> Outcome {
    let bound = 1e5f64.powf(0.75);
    let good = runs.k2.iter().filter(|r| r.max_excess as f64 <= bound).count();
    let worst = runs.k2.iter().map(|r| r.max_excess).max().unwrap();
    check(good >= 9, format!("sup(N - Nbar) max {worst} vs {bound:.0}, {good}/10 within"))
}

fn c13_distance() -> Outcome {
    let start = Instant::now();
    let k3 = ConjugacyClass::k_cycles(3);
    let mut count = 0;
    for n in 4..=7usize {
        let table = CayleyBfs::new(&k3, n, DEFAULT_BFS_CAP).map_err(|e| e.to_string())?;
        for p in all_perms(n).into_iter().filter(|p| is_even(p)) {
            count += 1;
            let sigma = Permutation::from_succ(p.clone()).unwrap();
            let lower = lower_bound(&sigma, &k3);
            let bfs = table
                .distance(&sigma)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("{} unreachable", sigma.to_cycle_notation()))?;
            let upper = 0.5 * (n - sigma.num_cycles()) as f64 + 0.5 * residue_count(&sigma, 3) as f64;
            let f = decompose_to_kcycles(&sigma, 3).map_err(|e| e.to_string())?;
            let back = f.compose(n).map_err(|e| e.to_string())?;
            if !(lower <= u64::from(bfs) && f64::from(bfs) <= upper)
                || back.succ() != &p[..]
                || f.length as f64 > upper
            {
                return Err(format!(
                    "{}: lower {lower}, bfs {bfs}, upper {upper}, constructive {}",
                    sigma.to_cycle_notation(),
                    f.length
                ));
            }
        }
    }
    within_time(start, Some(Duration::from_secs(120)), format!("{count} even permutations on 4..7 points"))
}

fn c14_good_edges_degree() -> Outcome {
    let k2 = ConjugacyClass::transpositions();
    let census = run_census(&ExperimentConfig {
        experiment: ExperimentKind::Census,
        n: 100_000,
        replicas: 1,
        seed: 14,
        t_grid: vec![1.0],
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let u2 = census[0][0].good_edges.get(&2).copied().unwrap_or(0) as f64 / 1e5;
    let pred = (1.0 - theta(&k2, 1.0).unwrap()).powi(2);
    let u_ok = (u2 / pred - 1.0).abs() <= 0.10;

    let degrees = run_degree(&ExperimentConfig {
        experiment: ExperimentKind::Degree,
        n: 1000,
        replicas: 10_000,
        seed: 15,
        t_grid: vec![1.0],
        watch: vec![0],
        ..Default::default()
    })
    .map_err(|e| e.to_string())?;
    let xs: Vec<f64> = degrees.iter().map(|d| d.degree as f64).collect();
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let se = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0) / m).sqrt();
    let d_ok = (mean - 2.0).abs() <= 3.0 * se;
    check(
        u_ok && d_ok,
        format!("U2/n = {u2:.4} vs {pred:.4}; mean degree {mean:.4} +- {se:.4} vs 2"),
    )
}

fn c15_feasibility() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for k in 3..=5u32 {
        let cls = ConjugacyClass::k_cycles(k);
        let t = cls.critical_time() * (1.0 + 1e-3);
        let r = m_ratio(&cls, t).map_err(|e| e.to_string())?;
        let target = f64::from(k - 2) / f64::from(k - 1);
        ok &= (r.bound - target).abs() <= 1e-2;
        lines.push(format!("k={k}: {:.4} vs {target:.4}", r.bound));
    }
    let k3 = ConjugacyClass::k_cycles(3);
    let tc = k3.critical_time();
    let mut worst: f64 = 0.0;
    for i in 1..=400 {
        let t = tc * (1.0 + 4.0 * i as f64 / 400.0);
        let r = m_ratio(&k3, t).map_err(|e| e.to_string())?;
        worst = worst.max(r.bound).max(r.exact);
    }
    ok &= worst < 1.0;
    lines.push(format!("k=3 max ratio on (t_c, 5t_c] {worst:.4}"));
    check(ok, lines.join("; "))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &out {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if out.is_err() {
            failed += 1;
        }
        println!("criterion {id:>2} {tag} [{name}] {detail} ({secs:.1}s)");
    };

    report(1, "analytic fixed point", &c1_fixed_point);
    report(2, "cross-method identities", &c2_cross_method);
    report(3, "subcritical exact lines", &c3_subcritical_lines);
    report(4, "hypertree enumeration", &c4_hypertrees);
    report(5, "coupling invariant fuzz", &c5_coupling_fuzz);
    report(6, "split semantics", &c6_split_semantics);

    let runs = trajectory("k2=1", vec![0.25, 0.5, 0.75, 1.0], 7).and_then(|k2| {
        trajectory("k3=1", vec![0.1, 1.0 / 6.0, 0.3], 8).map(|k3| Runs { k2, k3 })
    });
    let with_runs = |f: fn(&Runs) -> Outcome| -> Outcome {
        match &runs {
            Ok(r) => f(r),
            Err(e) => Err(e.clone()),
        }
    };
    report(7, "Monte Carlo cycle counts vs u(t)", &|| with_runs(c7_u_curve));
    report(8, "giant component", &|| with_runs(c8_giant));
    report(9, "giant cycle hitting time", &c9_tau_delta);
    report(10, "subcritical cycle sizes", &c10_subcritical_cycles);
    report(11, "window statistics", &c11_window);
    report(12, "excess-cycle bound", &|| with_runs(c12_excess));
    report(13, "distance bounds, exhaustive", &c13_distance);
    report(14, "good-edge and degree laws", &c14_good_edges_degree);
    report(15, "feasibility ratio", &c15_feasibility);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 15 criteria passed");
}

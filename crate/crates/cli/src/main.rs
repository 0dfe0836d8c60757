//! `cyclewalk` command-line front end.
//!
//! Exit status: 0 on success, 2 when a statistical check fails, 1 on
//! invariant violations and every other error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cyclewalk::analytics::{AnalyticProfile, ThresholdForm};
use cyclewalk::distance::{self, decompose_to_kcycles};
use cyclewalk::experiments::{self, ExperimentConfig, ExperimentKind};
use cyclewalk::{parse_cycle_notation, ConjugacyClass, Permutation};

const OUT_DIR_ENV: &str = "CYCLEWALK_OUT_DIR";

#[derive(Parser)]
#[command(name = "cyclewalk", version, about = "Conjugacy-class random walks and their hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// N, N̄, Λ, L and fragmentation counts at each checkpoint.
    Trajectory(RunArgs),
    /// First time the largest cycle exceeds δn.
    TauDelta {
        #[command(flatten)]
        run: RunArgs,
        /// Horizon in units of n steps (default: last grid time).
        #[arg(long)]
        c: Option<f64>,
        /// Fraction δ (default: the giant-cycle threshold at c).
        #[arg(long)]
        delta: Option<f64>,
        /// Use the displayed 2^K normalization for the default δ.
        #[arg(long)]
        displayed_threshold: bool,
    },
    /// Fragmentations and component loss inside a time window.
    WindowFrag {
        #[command(flatten)]
        run: RunArgs,
        /// Window as "t1,t2".
        #[arg(long)]
        window: Option<String>,
    },
    /// Hypertree census and good-edge counts against their predictions.
    Census {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        max_h: Option<u32>,
    },
    /// Hypergraph degree of watched vertices at the last grid time.
    Degree(RunArgs),
    /// Exhaustive distance bounds over the generated subgroup (n <= 8).
    DistanceBounds(RunArgs),
    /// Analytic curves θ, u, φ, δ and the M-ratio on a time grid.
    Profile {
        #[arg(long, default_value = "k2=1")]
        class: String,
        /// Explicit grid "t1,t2,..."; otherwise 0..=t-max in steps of --step.
        #[arg(long)]
        t_grid: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factor a permutation, given in 1-based cycle notation, into k-cycles.
    Factor {
        /// For example "(1 2 3)(4 5)(6 7)".
        permutation: String,
        #[arg(short, long, default_value_t = 3)]
        k: u32,
        /// Ground set size (default: largest element mentioned).
        #[arg(short, long)]
        n: Option<usize>,
        /// Also report the BFS distance (n <= 8).
        #[arg(long)]
        bfs: bool,
    },
    /// Describe the CSV columns of each experiment for plotting tools.
    Columns {
        /// Restrict to one experiment.
        experiment: Option<String>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Class as "k2=1,k3=0,...".
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Checkpoint times "t1,t2,..." in units of n steps.
    #[arg(long)]
    t_grid: Option<String>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    poissonize: bool,
    /// Watched vertices, 1-based, "1,2,...".
    #[arg(long)]
    watch: Option<String>,
    /// Output directory (default: $CYCLEWALK_OUT_DIR or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// File stem for the CSV and JSON outputs (default: the experiment name).
    #[arg(long)]
    stem: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Invariant(String),
    Error(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Error(e.to_string())
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::Error(format!("bad {what} entry {s:?}"))))
        .collect()
}

impl RunArgs {
    fn config(&self, kind: ExperimentKind) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.experiment = kind;
        if let Some(c) = &self.class {
            cfg.class = c.parse::<ConjugacyClass>()?;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(g) = &self.t_grid {
            cfg.t_grid = parse_list(g, "t-grid")?;
        }
        if let Some(r) = self.replicas {
            cfg.replicas = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.poissonize {
            cfg.poissonize = true;
        }
        if let Some(w) = &self.watch {
            let one_based: Vec<u32> = parse_list(w, "watch")?;
            if one_based.contains(&0) {
                return Err(Failure::Error("watch vertices are 1-based".into()));
            }
            cfg.watch = one_based.into_iter().map(|v| v - 1).collect();
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        cfg.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

fn execute(args: &RunArgs, cfg: ExperimentConfig) -> Result<bool, Failure> {
    let output = experiments::run(&cfg).map_err(|e| {
        if e.is_invariant_violation() {
            Failure::Invariant(e.to_string())
        } else {
            Failure::Error(e.to_string())
        }
    })?;
    let stem = args.stem.clone().unwrap_or_else(|| cfg.experiment.name().to_string());
    let dir = args.out_dir(&cfg);
    let (csv, json) = experiments::emit_report(&output, &dir, &stem)?;
    println!("wrote {} and {}", csv.display(), json.display());
    for c in &output.summary.checks {
        let status = match (c.passed, c.fatal) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        };
        println!(
            "{status} {}: observed {:.6}, expected {:.6} (tol {})",
            c.name, c.observed, c.expected, c.tolerance
        );
    }
    if !output.summary.passed() {
        eprintln!("{}", output.summary.to_json());
    }
    Ok(output.summary.passed())
}

fn profile(class: &str, grid: Option<&str>, t_max: f64, step: f64, out: Option<&Path>) -> Result<(), Failure> {
    let class: ConjugacyClass = class.parse()?;
    let grid: Vec<f64> = match grid {
        Some(g) => parse_list(g, "t-grid")?,
        None => {
            if !(step > 0.0) {
                return Err(Failure::Error("--step must be positive".into()));
            }
            let m = (t_max / step).round() as usize;
            (0..=m).map(|i| i as f64 * step).collect()
        }
    };
    let csv = AnalyticProfile::compute(&class, &grid)?.to_csv();
    match out {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn factor(text: &str, k: u32, n: Option<usize>, bfs: bool) -> Result<(), Failure> {
    let cycles = parse_cycle_notation(text).map_err(Failure::Error)?;
    let max = cycles.iter().flatten().map(|&x| x as usize + 1).max().unwrap_or(0);
    let n = n.unwrap_or(max.max(k as usize));
    let sigma = Permutation::from_cycles(n, &cycles)?;
    let class = ConjugacyClass::k_cycles(k);
    let result = decompose_to_kcycles(&sigma, k)?;
    let shown: Vec<String> = result
        .factors
        .iter()
        .map(|f| format!("({})", f.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ")))
        .collect();
    println!("sigma        {}", sigma.to_cycle_notation());
    println!("factors      {}", if shown.is_empty() { "(none)".into() } else { shown.join("") });
    println!("length       {}", result.length);
    println!("lower bound  {}", distance::lower_bound(&sigma, &class));
    println!("base         {}", result.base);
    println!("|R_k|        {}", result.residues);
    match result.constant() {
        Some(c) => println!("correction   {} (C = {c})", result.correction),
        None => println!("correction   {}", result.correction),
    }
    if bfs {
        match distance::bfs_distance(&sigma, &class, distance::DEFAULT_BFS_CAP)? {
            Some(d) => println!("bfs          {d}"),
            None => println!("bfs          unreachable"),
        }
    }
    if result.compose(n)?.succ() != sigma.succ() {
        return Err(Failure::Invariant("factorization does not compose back".into()));
    }
    Ok(())
}

const COLUMNS: &[(&str, &str, &[(&str, &str)])] = &[
    (
        "trajectory",
        "one row per (replica, checkpoint); plot N/n against t with u_pred, L/n with theta_pred",
        &[
            ("replica", "replica id"),
            ("t", "time in units of n steps"),
            ("steps", "steps taken"),
            ("N", "cycles of the permutation"),
            ("Nbar", "components of the hypergraph"),
            ("lambda", "largest cycle"),
            ("L", "largest component"),
            ("frag", "fragmentations so far"),
            ("frag_small", "fragmentations with smaller piece <= floor(sqrt n)"),
            ("lb_dist", "ceil((n - N)/K)"),
            ("u_pred", "limit of N/n"),
            ("theta_pred", "limit of L/n"),
            ("phi_pred", "limit of (n - N)/(K n)"),
        ],
    ),
    (
        "tau_delta",
        "one row per replica; histogram tau over hitting replicas",
        &[
            ("replica", "replica id"),
            ("hit", "1 if the largest cycle exceeded delta*n by time c*n"),
            ("hit_step", "first such step (empty if none)"),
            ("tau", "hit_step / n"),
            ("c", "horizon"),
            ("delta", "cycle-size fraction"),
        ],
    ),
    (
        "window_frag",
        "one row per replica; compare frag with frag_pred and dNbar with dNbar_pred",
        &[
            ("replica", "replica id"),
            ("t1", "window start"),
            ("t2", "window end"),
            ("steps", "steps in the window"),
            ("frag", "fragmentations in the window"),
            ("frag_small", "of which the smaller piece is <= floor(sqrt n)"),
            ("dN", "N(t1) - N(t2)"),
            ("dNbar", "Nbar(t1) - Nbar(t2)"),
            ("frag_pred", "predicted fragmentations"),
            ("dNbar_pred", "predicted component loss"),
        ],
    ),
    (
        "census",
        "replica means; plot observed_mean against predicted per (quantity, index)",
        &[
            ("quantity", "hypertrees (index = edges h) or good_edges (index = edge size j)"),
            ("t", "time"),
            ("index", "h or j"),
            ("observed_mean", "mean count over replicas"),
            ("observed_se", "standard error of that mean"),
            ("predicted", "exact finite-n expectation (hypertrees) or n k_j t (1-theta)^j"),
            ("predicted_asymptotic", "large-n form"),
        ],
    ),
    (
        "degree",
        "one row per (replica, watched vertex); mean should match t * sum j(j-1)k_j",
        &[
            ("replica", "replica id"),
            ("vertex", "1-based vertex"),
            ("degree", "sum of (|e| - 1) over hyperedges containing the vertex"),
        ],
    ),
    (
        "distance_bounds",
        "one row per reachable permutation; lower <= bfs <= constructive",
        &[
            ("rank", "Lehmer rank"),
            ("sigma", "1-based cycle notation"),
            ("lower", "ceil((n - N)/K)"),
            ("bfs", "exact Cayley distance"),
            ("constructive", "length of the explicit factorization"),
            ("residues", "|R_k|"),
            ("upper", "(n - N)/2 + |R_3|/2 for 3-cycles"),
        ],
    ),
    (
        "profile",
        "one row per grid time",
        &[
            ("t", "time"),
            ("theta", "giant fraction"),
            ("u", "normalized cycle/component count"),
            ("phi", "(1 - u)/K"),
            ("delta", "giant-cycle threshold"),
            ("m_ratio_exact", "bad-mass ratio (empty when theta = 0)"),
            ("m_ratio_bound", "its upper bound"),
        ],
    ),
];

fn columns(filter: Option<&str>) -> Result<(), Failure> {
    let filter = filter.map(|f| f.replace('-', "_"));
    let mut shown = 0;
    for (name, hint, cols) in COLUMNS {
        if filter.as_deref().is_some_and(|f| f != *name) {
            continue;
        }
        shown += 1;
        println!("# {name}.csv: {hint}");
        for (i, (col, what)) in cols.iter().enumerate() {
            println!("{},{col},{what}", i + 1);
        }
        println!();
    }
    if shown == 0 {
        return Err(Failure::Error(format!("unknown experiment {:?}", filter.unwrap())));
    }
    Ok(())
}

fn dispatch(cmd: Command) -> Result<bool, Failure> {
    match cmd {
        Command::Trajectory(a) => {
            let cfg = a.config(ExperimentKind::Trajectory)?;
            execute(&a, cfg)
        }
        Command::TauDelta { run, c, delta, displayed_threshold } => {
            let mut cfg = run.config(ExperimentKind::TauDelta)?;
            cfg.c = c.or(cfg.c);
            cfg.delta = delta.or(cfg.delta);
            if displayed_threshold {
                cfg.threshold_form = ThresholdForm::Displayed;
            }
            execute(&run, cfg)
        }
        Command::WindowFrag { run, window } => {
            let mut cfg = run.config(ExperimentKind::WindowFrag)?;
            if let Some(w) = window {
                let v: Vec<f64> = parse_list(&w, "window")?;
                let [t1, t2] = v[..] else {
                    return Err(Failure::Error("window needs exactly two times".into()));
                };
                cfg.window = Some([t1, t2]);
            }
            execute(&run, cfg)
        }
        Command::Census { run, max_h } => {
            let mut cfg = run.config(ExperimentKind::Census)?;
            cfg.max_h = max_h.unwrap_or(cfg.max_h);
            execute(&run, cfg)
        }
        Command::Degree(a) => {
            let cfg = a.config(ExperimentKind::Degree)?;
            execute(&a, cfg)
        }
        Command::DistanceBounds(a) => {
            let cfg = a.config(ExperimentKind::DistanceBounds)?;
            execute(&a, cfg)
        }
        Command::Profile { class, t_grid, t_max, step, out } => {
            profile(&class, t_grid.as_deref(), t_max, step, out.as_deref()).map(|_| true)
        }
        Command::Factor { permutation, k, n, bfs } => factor(&permutation, k, n, bfs).map(|_| true),
        Command::Columns { experiment } => columns(experiment.as_deref()).map(|_| true),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violation: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Error(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

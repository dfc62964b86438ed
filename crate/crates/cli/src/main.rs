//! Command-line front end: each subcommand runs one experiment, writes the
//! result table (CSV or JSONL) into the output directory, and records a
//! manifest with the exact configuration, seeds, and versions needed to
//! reproduce the run.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rwre_core::envspec::Analytics;
use rwre_core::experiments::{
    kstar_experiment, lefttail_experiment, minvbar_experiment, minvbar_upper_tail, phase_scan,
    phase_scan_ray, rn_experiment, witness_experiment, ExperimentReport,
};
use rwre_core::exact::{quenched_mean_k, root_excursion_hit, solver_root_excursion};
use rwre_core::spine::{ballot_f, excursion_sum_check, local_window_check, passage_check};
use rwre_core::{derive_rng, Config, EnvironmentSpec, TreeArena, Walker};

#[derive(Parser)]
#[command(name = "rwre", about = "Random walks in random environment on Galton-Watson trees")]
struct Cli {
    /// Flat key-value config file; defaults to the gauss2 environment.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; every stream is derived from it with named labels.
    #[arg(long, global = true, default_value_t = 20_260_826)]
    seed: u64,
    /// Replica count for Monte Carlo subcommands.
    #[arg(long, global = true, default_value_t = 100)]
    replicas: usize,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory for the manifest and result tables.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Print and record the calibration analytics of the environment.
    Calibrate,
    /// Grow one tree and write its dump ("id parent depth A V Vbar" lines).
    Grow {
        #[arg(long, default_value_t = 8)]
        depth: u32,
    },
    /// Run walk replicas and tabulate returns, depth, R_n and generation counts.
    Walk {
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 20)]
        r_cap: u32,
    },
    /// Accessible-point counts K* against the bracket and shape predictions.
    Kstar {
        #[arg(long, value_delimiter = ',', default_value = "10,12")]
        log_n: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.0,1.5")]
        zeta: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 100_000)]
        ray_samples: usize,
    },
    /// The visited-boundary curve over zeta at a fixed effective log n.
    PhaseScan {
        #[arg(long, default_value_t = 12.0)]
        log_n: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75,1.0,1.25,1.5,1.75")]
        zeta: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// Use the truncated per-tree scan instead of the ray estimator.
        #[arg(long)]
        tree_scan: bool,
        #[arg(long, default_value_t = 2.0)]
        barrier_margin: f64,
        #[arg(long, default_value_t = 2_000_000)]
        visit_cap: u64,
    },
    /// Tail of the minimal barrier at generation n, plus the upper-tail miss rates.
    Minvbar {
        #[arg(long, value_delimiter = ',', default_value = "64,125")]
        n: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1.2,1.5,1.8")]
        b: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "3.0,3.5")]
        mu: Vec<f64>,
    },
    /// Exact left tail of the population size by convolution.
    Lefttail {
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6")]
        kappa: Vec<f64>,
    },
    /// One-dimensional walk estimates: ballot, passage, excursion sums, windows.
    SpineCheck {
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Cluster witness search on walked trees, with the cut-plan thresholds.
    Clusters {
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 3)]
        ell: u32,
        #[arg(long, default_value_t = 1)]
        root_gen: u32,
        #[arg(long, default_value_t = 1)]
        ancestor_gen: u32,
    },
    /// Hitting-probability cross-checks: reduction vs solver vs sampled means.
    ExactCheck {
        #[arg(long, default_value_t = 20)]
        trees: usize,
        #[arg(long, default_value_t = 10)]
        depth: u32,
    },
    /// R_n growth across step budgets.
    RnScale {
        #[arg(long, value_delimiter = ',', default_value = "10000,100000,1000000")]
        steps: Vec<u64>,
        #[arg(long, default_value_t = 40)]
        r_cap: u32,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global()?;
    }
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::new(EnvironmentSpec::gauss2()),
    };
    let spec = config.environment.clone();
    std::fs::create_dir_all(&cli.out)?;

    let (name, reports): (&str, Vec<ExperimentReport>) = match &cli.command {
        Command::Calibrate => ("calibrate", vec![calibrate(&spec, &config)?]),
        Command::Grow { depth } => {
            let mut arena =
                TreeArena::new(spec.clone(), derive_rng(cli.seed, &["cli", "grow"]));
            let counts = arena.grow_to_depth(*depth)?;
            let dump_path = cli.out.join("tree.txt");
            std::fs::write(&dump_path, arena.dump())?;
            let mut r = ExperimentReport::new(
                "grow",
                &spec.name,
                cli.seed,
                &["generation", "size"],
            );
            for (g, z) in counts.iter().enumerate() {
                r.push_row(vec![(g + 1) as f64, *z as f64]);
            }
            r.notes.push(format!("tree dump written to {}", dump_path.display()));
            r.summary.insert("nodes".to_string(), arena.len() as f64);
            r.summary
                .insert("survival_resamples".to_string(), arena.survival_resamples as f64);
            ("grow", vec![r])
        }
        Command::Walk { steps, r_cap } => ("walk", vec![walk(&spec, &cli, *steps, *r_cap)?]),
        Command::Kstar { log_n, zeta, epsilon, ray_samples } => (
            "kstar",
            vec![kstar_experiment(
                &spec,
                log_n,
                zeta,
                *epsilon,
                cli.replicas,
                *ray_samples,
                cli.seed,
            )?],
        ),
        Command::PhaseScan { log_n, zeta, samples, tree_scan, barrier_margin, visit_cap } => {
            let r = if *tree_scan {
                phase_scan(&spec, *log_n, zeta, *barrier_margin, cli.replicas, *visit_cap, cli.seed)?
            } else {
                phase_scan_ray(&spec, *log_n, zeta, *samples, cli.seed)?
            };
            ("phase-scan", vec![r])
        }
        Command::Minvbar { n, b, mu } => (
            "minvbar",
            vec![
                minvbar_experiment(&spec, n, b, cli.replicas, cli.seed)?,
                minvbar_upper_tail(
                    &[EnvironmentSpec::schroeder13(), EnvironmentSpec::boettcher2()],
                    n,
                    mu,
                    cli.replicas,
                    cli.seed,
                )?,
            ],
        ),
        Command::Lefttail { n_max, kappa } => {
            // The tail-exponent fit needs q(1) > 0; environments without it
            // (for example gauss2's constant N = 2) fall back to the
            // reference law q = {1: 1/2, 3: 1/2}.
            let has_q1 = spec.offspring_law.iter().any(|&(k, p)| k == 1 && p > 0.0);
            let q: Vec<(u32, f64)> = if has_q1 {
                spec.offspring_law.clone()
            } else {
                vec![(1, 0.5), (3, 0.5)]
            };
            let mut r = lefttail_experiment(&q, *n_max, kappa)?;
            if !has_q1 {
                r.notes.push(format!(
                    "offspring law of {} has q(1) = 0; using the reference law q = {{1: 1/2, 3: 1/2}}",
                    spec.name
                ));
            }
            ("lefttail", vec![r])
        }
        Command::SpineCheck { samples } => ("spine-check", vec![spine_check(&spec, &cli, *samples)?]),
        Command::Clusters { steps, ell, root_gen, ancestor_gen } => (
            "clusters",
            vec![witness_experiment(
                &spec,
                *steps,
                cli.replicas,
                *ell,
                *root_gen,
                *ancestor_gen,
                cli.seed,
            )?],
        ),
        Command::ExactCheck { trees, depth } => {
            ("exact-check", vec![exact_check(&spec, &cli, *trees, *depth)?])
        }
        Command::RnScale { steps, r_cap } => (
            "rn-scale",
            vec![rn_experiment(&spec, steps, cli.replicas, *r_cap, cli.seed)?],
        ),
    };

    let mut outputs = Vec::new();
    for report in &reports {
        let ext = match cli.format {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        };
        let path = cli.out.join(format!("{}.{ext}", report.experiment));
        let body = match cli.format {
            Format::Csv => report.to_csv(),
            Format::Jsonl => report.to_jsonl(),
        };
        std::fs::write(&path, body)?;
        outputs.push(path.display().to_string());
        for (k, v) in &report.summary {
            println!("{}: {k} = {v}", report.experiment);
        }
        for note in &report.notes {
            println!("{}: {note}", report.experiment);
        }
        for v in &report.verdicts {
            println!(
                "{}: {} -> {} ({})",
                report.experiment,
                v.rule,
                if v.pass { "pass" } else { "FAIL" },
                v.detail
            );
        }
    }

    let manifest = serde_json::json!({
        "command": name,
        "config": config.canonical(),
        "seed": cli.seed,
        "replicas": cli.replicas,
        "threads": cli.threads,
        "format": match cli.format { Format::Csv => "csv", Format::Jsonl => "jsonl" },
        "versions": {
            "rwre-cli": env!("CARGO_PKG_VERSION"),
            "rwre-core": rwre_core_version(),
        },
        "seed_streams": "all randomness is derived from the master seed via named labels",
        "outputs": outputs,
    });
    let manifest_path = cli.out.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    println!("manifest written to {}", manifest_path.display());
    Ok(())
}

fn rwre_core_version() -> &'static str {
    // The workspace pins both crates to the same version.
    env!("CARGO_PKG_VERSION")
}

fn calibrate(spec: &EnvironmentSpec, config: &Config) -> Result<ExperimentReport, rwre_core::Error> {
    let mut r = ExperimentReport::new(
        "calibrate",
        &spec.name,
        0,
        &["psi1", "dpsi1", "sigma2", "psi0", "gamma", "psi0_over_gamma"],
    );
    let gamma = spec.gamma_tilde()?;
    r.push_row(vec![
        spec.psi(1.0),
        spec.psi_prime(1.0),
        spec.sigma2(),
        spec.psi0(),
        gamma,
        spec.psi0() / gamma,
    ]);
    let analytics = Analytics::build(spec, 8, config.cramer_order)?;
    r.summary.insert("lambda_at_0.1".to_string(), analytics.lambda(0.1));
    r.verdict(
        "psi(1) and psi'(1) vanish to 1e-10",
        spec.psi(1.0).abs() < 1e-10 && spec.psi_prime(1.0).abs() < 1e-10,
        format!("psi(1) = {:.2e}, psi'(1) = {:.2e}", spec.psi(1.0), spec.psi_prime(1.0)),
    );
    Ok(r)
}

fn walk(
    spec: &EnvironmentSpec,
    cli: &Cli,
    steps: u64,
    r_cap: u32,
) -> Result<ExperimentReport, rwre_core::Error> {
    let mut r = ExperimentReport::new(
        "walk",
        &spec.name,
        cli.seed,
        &["replica", "steps", "returns", "xstar", "r", "m1", "m2", "m4", "m8"],
    );
    for rep in 0..cli.replicas {
        let label = format!("rep={rep}");
        let mut arena =
            TreeArena::new(spec.clone(), derive_rng(cli.seed, &["cli", "walk", "tree", &label]));
        arena.grow_to_depth(1)?;
        let mut walker = Walker::new(derive_rng(cli.seed, &["cli", "walk", "walk", &label]));
        walker.run_steps(&mut arena, steps)?;
        let obs = walker.observables(&mut arena, &[1, 2, 4, 8], r_cap)?;
        r.push_row(vec![
            rep as f64,
            steps as f64,
            walker.returns_to_root() as f64,
            obs.xstar as f64,
            obs.r as f64,
            obs.m[&1] as f64,
            obs.m[&2] as f64,
            obs.m[&4] as f64,
            obs.m[&8] as f64,
        ]);
    }
    Ok(r)
}

fn spine_check(
    spec: &EnvironmentSpec,
    cli: &Cli,
    samples: u64,
) -> Result<ExperimentReport, rwre_core::Error> {
    let mut r = ExperimentReport::new(
        "spine-check",
        &spec.name,
        cli.seed,
        &["check", "p1", "p2", "estimate", "stderr", "reference"],
    );
    let mut rng = derive_rng(cli.seed, &["cli", "spine-check"]);
    for (i, m) in [16usize, 64, 256].into_iter().enumerate() {
        let b = ballot_f(spec, m, samples, &mut rng)?;
        r.push_row(vec![i as f64, m as f64, 0.0, b.f.value, b.f.stderr, b.normalized]);
    }
    for (i, y) in [5.0, 10.0, 20.0].into_iter().enumerate() {
        let p = passage_check(spec, 0.0, y, 1_000, samples, &mut rng)?;
        r.push_row(vec![
            10.0 + i as f64,
            y,
            0.0,
            p.hit_ratio.value,
            p.hit_ratio.stderr,
            p.survival_ratio.value,
        ]);
    }
    for (i, big_m) in [10.0, 100.0].into_iter().enumerate() {
        let e = excursion_sum_check(spec, 1.0, big_m, samples, &mut rng)?;
        r.push_row(vec![20.0 + i as f64, big_m, 1.0, e.value, e.stderr, 10.0]);
    }
    if !spec.lattice_flag {
        let analytics = Analytics::build(spec, 8, 3)?;
        for (i, rr) in [10.0, 20.0].into_iter().enumerate() {
            let w = local_window_check(spec, &analytics, 400, rr, samples, &mut rng)?;
            r.push_row(vec![
                30.0 + i as f64,
                rr,
                400.0,
                w.empirical.value,
                w.empirical.stderr,
                w.prediction,
            ]);
        }
    }
    r.notes.push(
        "rows: 0-2 ballot (reference = normalized), 10-12 passage (reference = survival ratio), \
         20-21 excursion sums (reference = bound), 30-31 local windows (reference = prediction)"
            .to_string(),
    );
    Ok(r)
}

fn exact_check(
    spec: &EnvironmentSpec,
    cli: &Cli,
    trees: usize,
    depth: u32,
) -> Result<ExperimentReport, rwre_core::Error> {
    let mut r = ExperimentReport::new(
        "exact-check",
        &spec.name,
        cli.seed,
        &["tree", "nodes", "worst_solver_diff", "quenched_mean_k_n100_g4"],
    );
    let mut worst_all = 0.0f64;
    for t in 0..trees {
        let mut arena = TreeArena::new(
            spec.clone(),
            derive_rng(cli.seed, &["cli", "exact", &format!("tree={t}")]),
        );
        arena.grow_to_depth(depth)?;
        let step = (arena.len() / 16).max(1) as u32;
        let mut worst = 0.0f64;
        let mut z = 1u32;
        while (z as usize) < arena.len() {
            let red = root_excursion_hit(&arena, z)?;
            let sol = solver_root_excursion(&arena, z)?;
            worst = worst.max((red - sol).abs());
            z += step;
        }
        worst_all = worst_all.max(worst);
        let qk = quenched_mean_k(&arena, 100, depth.min(4))?;
        r.push_row(vec![t as f64, arena.len() as f64, worst, qk]);
    }
    r.verdict(
        "electrical reduction matches the first-step solver to 1e-10",
        worst_all <= 1e-10,
        format!("worst diff {worst_all:.2e}"),
    );
    Ok(r)
}

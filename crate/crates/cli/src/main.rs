//! Command-line front end for the stickycut pipeline.
//!
//! Every command takes a single `--seed`; all randomness derives from it
//! through counter-based streams, so reruns (with any `--workers` value)
//! produce byte-identical report files.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use stickycut::report::{identity_csv, identity_svg, to_json_pretty};
use stickycut::{
    brute_force_maxcut, compare_schemes, cut_value, run_pipeline, solve_maxcut_sdp,
    verify_identity, CutResult, DiffusionConfig, IdentityReport, RoundingScheme, SchemeComparison,
    SdpConfig, WeightedGraph,
};

#[derive(Parser)]
#[command(
    name = "stickycut",
    about = "MAXCUT rounding via slowed-down sticky diffusion, with SDP pipeline and exact oracles",
    version
)]
struct Cli {
    /// Worker threads for replica-level parallelism (0 = all cores).
    /// Outputs do not depend on this value.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Directory for report files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DiffusionArgs {
    /// Euler time step.
    #[arg(long = "h", default_value_t = 1e-3)]
    h: f64,

    /// Simulation horizon.
    #[arg(long, default_value_t = 12.0)]
    tmax: f64,

    /// Absorption band half-width.
    #[arg(long, default_value_t = 1e-6)]
    absorb_eps: f64,
}

impl DiffusionArgs {
    fn config(&self) -> DiffusionConfig {
        DiffusionConfig {
            step_h: self.h,
            t_max: self.tmax,
            absorb_eps: self.absorb_eps,
            record_paths: false,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate E[sigma_u sigma_v] on a grid of inner products and compare
    /// against (2/pi) asin(rho). Writes report.json and identity.csv.
    VerifyIdentity {
        /// Comma-separated target inner products in [-1, 1].
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-0.95,-0.5,0,0.3,0.5,0.7071,0.95"
        )]
        rho_grid: Vec<f64>,

        /// Coupled trajectories per grid point (>= 1000).
        #[arg(long, default_value_t = 10_000)]
        replicas: usize,

        #[command(flatten)]
        diffusion: DiffusionArgs,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Diffusion scheme: `xi` or `power:<alpha>`.
        #[arg(long, default_value = "xi")]
        scheme: String,

        /// Also write identity.svg.
        #[arg(long)]
        svg: bool,

        /// Exit nonzero unless every estimate is within max(3 SE, 0.01) of
        /// the arcsine law.
        #[arg(long)]
        check: bool,
    },

    /// Solve the MAXCUT SDP relaxation of a graph.
    Solve {
        /// Edge-list file: `i j w` per line, `#` comments.
        #[arg(long)]
        graph: PathBuf,

        /// Factorization rank (default: max(2, ceil(sqrt(2 n)))).
        #[arg(long)]
        rank: Option<usize>,

        #[arg(long, default_value_t = 0)]
        seed: u64,
    },

    /// Solve the relaxation and round it; reports best and mean cuts.
    Round {
        #[arg(long)]
        graph: PathBuf,

        /// Rounding scheme: `xi`, `power:<alpha>`, or `hyperplane`.
        #[arg(long, default_value = "xi")]
        scheme: String,

        /// Independent rounding trials.
        #[arg(long, default_value_t = 100)]
        trials: usize,

        #[arg(long)]
        rank: Option<usize>,

        #[command(flatten)]
        diffusion: DiffusionArgs,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Exit nonzero unless the mean cut clears the approximation-ratio
        /// guarantee and sits within 3 SE of the closed-form expectation.
        #[arg(long)]
        check: bool,
    },

    /// Run several schemes on one embedding and compare their mean cuts.
    Compare {
        #[arg(long)]
        graph: PathBuf,

        /// Comma-separated schemes.
        #[arg(long, value_delimiter = ',', default_value = "xi,hyperplane")]
        schemes: Vec<String>,

        /// Single-trial replicas per scheme.
        #[arg(long, default_value_t = 1000)]
        replicas: usize,

        #[arg(long)]
        rank: Option<usize>,

        #[command(flatten)]
        diffusion: DiffusionArgs,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        /// Exit nonzero unless every pair of schemes agrees within 3
        /// combined SE.
        #[arg(long)]
        check: bool,
    },

    /// Exhaustive maximum cut (n <= 24).
    Exact {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Serialize)]
struct VerifyIdentityReport<'a> {
    command: &'a str,
    #[serde(flatten)]
    report: &'a IdentityReport,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    command: &'a str,
    graph: String,
    n: usize,
    edge_count: usize,
    total_weight: f64,
    rank: usize,
    seed: u64,
    objective: f64,
    sweeps: usize,
    converged: bool,
}

#[derive(Serialize)]
struct RoundReport<'a> {
    command: &'a str,
    graph: String,
    n: usize,
    edge_count: usize,
    total_weight: f64,
    scheme: String,
    trials: usize,
    seed: u64,
    rank: usize,
    step_h: f64,
    t_max: f64,
    absorb_eps: f64,
    result: &'a CutResult,
}

#[derive(Serialize)]
struct CompareReport<'a> {
    command: &'a str,
    graph: String,
    n: usize,
    edge_count: usize,
    total_weight: f64,
    replicas: usize,
    seed: u64,
    rank: usize,
    step_h: f64,
    t_max: f64,
    absorb_eps: f64,
    #[serde(flatten)]
    comparison: &'a SchemeComparison,
}

#[derive(Serialize)]
struct ExactReport<'a> {
    command: &'a str,
    graph: String,
    n: usize,
    edge_count: usize,
    total_weight: f64,
    value: f64,
    signs: &'a [i8],
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    if cli.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build()
            .context("building worker pool")?;
        let out_dir = cli.out_dir.clone();
        pool.install(|| dispatch(cli.command, &out_dir))
    } else {
        let out_dir = cli.out_dir.clone();
        dispatch(cli.command, &out_dir)
    }
}

fn load_graph(path: &Path) -> Result<WeightedGraph> {
    WeightedGraph::from_path(path).with_context(|| format!("loading graph from {}", path.display()))
}

fn sdp_config(n: usize, rank: Option<usize>, seed: u64) -> SdpConfig {
    let mut cfg = SdpConfig::for_vertices(n);
    if let Some(r) = rank {
        cfg.rank_r = r;
    }
    cfg.init_seed = seed;
    cfg
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn dispatch(command: Command, out_dir: &Path) -> Result<i32> {
    match command {
        Command::VerifyIdentity {
            rho_grid,
            replicas,
            diffusion,
            seed,
            scheme,
            svg,
            check,
        } => {
            let parsed = RoundingScheme::parse(&scheme)?;
            let speed = parsed
                .speed()
                .ok_or_else(|| anyhow::anyhow!("verify-identity needs a diffusion scheme"))?;
            let report = verify_identity(&rho_grid, replicas, &speed, &diffusion.config(), seed)?;

            for row in &report.rows {
                println!(
                    "rho {:+.4}: estimate {:+.5} target {:+.5} ({:+.2} SE, allowed {:.4}) {}",
                    row.rho,
                    row.estimate,
                    row.target,
                    row.deviation_in_se,
                    row.allowed_deviation(),
                    if row.within_tolerance() { "ok" } else { "OFF" }
                );
            }
            write_file(
                out_dir,
                "report.json",
                &to_json_pretty(&VerifyIdentityReport {
                    command: "verify-identity",
                    report: &report,
                })?,
            )?;
            write_file(out_dir, "identity.csv", &identity_csv(&report))?;
            if svg {
                write_file(out_dir, "identity.svg", &identity_svg(&report))?;
            }
            if check && !report.all_within_tolerance() {
                eprintln!("check failed: some estimates deviate from the arcsine law");
                return Ok(2);
            }
            Ok(0)
        }

        Command::Solve { graph, rank, seed } => {
            let g = load_graph(&graph)?;
            let cfg = sdp_config(g.n(), rank, seed);
            let sol = solve_maxcut_sdp(&g, &cfg)?;
            println!(
                "sdp objective {:.10} (rank {}, {} sweeps, converged: {})",
                sol.objective, cfg.rank_r, sol.sweeps, sol.converged
            );
            write_file(
                out_dir,
                "report.json",
                &to_json_pretty(&SolveReport {
                    command: "solve",
                    graph: graph.display().to_string(),
                    n: g.n(),
                    edge_count: g.edge_count(),
                    total_weight: g.total_weight(),
                    rank: cfg.rank_r,
                    seed,
                    objective: sol.objective,
                    sweeps: sol.sweeps,
                    converged: sol.converged,
                })?,
            )?;
            Ok(0)
        }

        Command::Round {
            graph,
            scheme,
            trials,
            rank,
            diffusion,
            seed,
            check,
        } => {
            let g = load_graph(&graph)?;
            let parsed = RoundingScheme::parse(&scheme)?;
            let sdp_cfg = sdp_config(g.n(), rank, seed);
            let diff_cfg = diffusion.config();
            let result = run_pipeline(&g, &parsed, trials, &sdp_cfg, &diff_cfg, seed)?;
            println!(
                "best cut {} of sdp {:.6} (ratio {:.4}); mean {:.6} +/- {:.6}; expected {:.6}",
                result.cut_value,
                result.sdp_value,
                result.ratio_vs_sdp,
                result.mean_cut,
                result.mean_cut_std_error,
                result.expected_cut_arcsin
            );
            if let (Some(exact), Some(ratio)) = (result.exact_value, result.ratio_vs_exact) {
                println!("exact optimum {exact}; best/exact {ratio:.4}");
            }
            write_file(
                out_dir,
                "report.json",
                &to_json_pretty(&RoundReport {
                    command: "round",
                    graph: graph.display().to_string(),
                    n: g.n(),
                    edge_count: g.edge_count(),
                    total_weight: g.total_weight(),
                    scheme: parsed.label(),
                    trials,
                    seed,
                    rank: sdp_cfg.rank_r,
                    step_h: diff_cfg.step_h,
                    t_max: diff_cfg.t_max,
                    absorb_eps: diff_cfg.absorb_eps,
                    result: &result,
                })?,
            )?;
            if check {
                let guarantee = (stickycut::gw_constant() - 0.01) * result.sdp_value;
                // 3 SE with a 1%-of-expected floor (covers zero-variance
                // embeddings and the Euler discretization bias).
                let tol = (3.0 * result.mean_cut_std_error)
                    .max(0.01 * result.expected_cut_arcsin.abs())
                    .max(1e-9);
                let within = (result.mean_cut - result.expected_cut_arcsin).abs() <= tol
                    && result.mean_cut >= guarantee;
                if !within {
                    eprintln!(
                        "check failed: mean {} vs expected {} (tolerance {tol}), guarantee {}",
                        result.mean_cut, result.expected_cut_arcsin, guarantee
                    );
                    return Ok(2);
                }
            }
            Ok(0)
        }

        Command::Compare {
            graph,
            schemes,
            replicas,
            rank,
            diffusion,
            seed,
            check,
        } => {
            let g = load_graph(&graph)?;
            let parsed: Vec<RoundingScheme> = schemes
                .iter()
                .map(|s| RoundingScheme::parse(s))
                .collect::<stickycut::Result<_>>()?;
            let sdp_cfg = sdp_config(g.n(), rank, seed);
            let diff_cfg = diffusion.config();
            let cmp = compare_schemes(&g, &parsed, replicas, &sdp_cfg, &diff_cfg, seed)?;
            println!(
                "sdp {:.6}, expected cut {:.6}",
                cmp.sdp_value, cmp.expected_cut_arcsin
            );
            for s in &cmp.stats {
                println!(
                    "  {:<14} mean {:.6} +/- {:.6}",
                    s.scheme, s.mean_cut, s.std_error
                );
            }
            for p in &cmp.pairs {
                println!(
                    "  {} vs {}: diff {:+.6} ({:+.2} combined SE) {}",
                    p.scheme_a,
                    p.scheme_b,
                    p.difference,
                    if p.combined_std_error > 0.0 {
                        p.difference / p.combined_std_error
                    } else {
                        0.0
                    },
                    if p.within_three_se { "ok" } else { "OFF" }
                );
            }
            write_file(
                out_dir,
                "report.json",
                &to_json_pretty(&CompareReport {
                    command: "compare",
                    graph: graph.display().to_string(),
                    n: g.n(),
                    edge_count: g.edge_count(),
                    total_weight: g.total_weight(),
                    replicas,
                    seed,
                    rank: sdp_cfg.rank_r,
                    step_h: diff_cfg.step_h,
                    t_max: diff_cfg.t_max,
                    absorb_eps: diff_cfg.absorb_eps,
                    comparison: &cmp,
                })?,
            )?;
            if check && !cmp.pairs.iter().all(|p| p.within_three_se) {
                eprintln!("check failed: scheme means disagree beyond 3 combined SE");
                return Ok(2);
            }
            Ok(0)
        }

        Command::Exact { graph } => {
            let g = load_graph(&graph)?;
            let (value, signs) = brute_force_maxcut(&g)?;
            debug_assert_eq!(cut_value(&g, &signs).unwrap(), value);
            let plus_side: Vec<usize> = signs
                .sigma
                .iter()
                .enumerate()
                .filter(|(_, &s)| s > 0)
                .map(|(i, _)| i)
                .collect();
            println!("maximum cut {value}");
            println!("plus side: {plus_side:?}");
            write_file(
                out_dir,
                "report.json",
                &to_json_pretty(&ExactReport {
                    command: "exact",
                    graph: graph.display().to_string(),
                    n: g.n(),
                    edge_count: g.edge_count(),
                    total_weight: g.total_weight(),
                    value,
                    signs: &signs.sigma,
                })?,
            )?;
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}

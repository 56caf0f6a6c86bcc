//! `diamond`: capacity tools for the diamond channel with one noisy and one
//! noiseless relay.

// `!(x >= 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use diamond_core::{
    build_paper_example, check_triple, corner_points, cut_set_bound, dual_bounds, evaluate_bounds,
    maximize_rate, run_trials, ChannelFile, DiamondDistribution, DistributionFile, Dmc, Error,
    OptimizerConfig, RateTriple, SimConfig,
};
use serde_json::{json, Value};

use report::{count, info, quantity, Report, Units};

#[derive(Debug, Parser)]
#[command(
    name = "diamond",
    version,
    about = "Capacity tools for the diamond relay channel"
)]
struct Cli {
    /// Display unit for information quantities and rate arguments.
    #[arg(long, global = true, value_enum, default_value = "bits")]
    units: Units,

    /// Emit flat key,value rows instead of JSON.
    #[arg(long, global = true)]
    csv: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the region bounds of a distribution, optionally at a rate point.
    Region {
        #[arg(long)]
        dist: PathBuf,
        /// Message rate R; enables the corner points.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        r1: Option<f64>,
        #[arg(long)]
        r2: Option<f64>,
    },
    /// Maximize the achievable rate over input distributions.
    Capacity {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Cut-set upper bound.
    Cutset {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        r1: f64,
        #[arg(long)]
        r2: f64,
    },
    /// Dual-form rate bounds and their identities with the region bounds.
    Duality {
        #[arg(long)]
        dist: PathBuf,
    },
    /// Binary symmetric example with link rates of half a bit each.
    Example {
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Monte Carlo simulation of the random coding scheme.
    Simulate {
        #[arg(long)]
        dist: PathBuf,
        /// Blocklength.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Rate back-off in display units.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Compression rate margin in display units.
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        #[arg(long, env = "DIAMOND_SEED", default_value_t = 0)]
        seed: u64,
        /// Typicality slack; defaults to 0.5/sqrt(n).
        #[arg(long)]
        delta: Option<f64>,
        /// Message rate in display units; defaults to the rate carried by
        /// the decoded and compressed layers alone.
        #[arg(long)]
        rate: Option<f64>,
        /// Cap on stored codebook symbols.
        #[arg(long, default_value_t = diamond_core::sim::DEFAULT_MAX_SYMBOLS)]
        max_symbols: u64,
        /// Include wall-clock time in the report (breaks byte-identical output).
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Debug, Args)]
struct OptArgs {
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, env = "DIAMOND_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    card_u: Option<usize>,
    #[arg(long)]
    card_z: Option<usize>,
    #[arg(long, default_value_t = 2000)]
    max_iterations: usize,
    /// Allow auxiliary alphabets larger than the sufficient cardinalities.
    #[arg(long)]
    unsafe_cardinality: bool,
}

impl OptArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            restarts: self.restarts,
            max_iterations: self.max_iterations,
            seed: self.seed,
            card_u: self.card_u,
            card_z: self.card_z,
            unsafe_cardinality: self.unsafe_cardinality,
            ..OptimizerConfig::default()
        }
    }

    fn echo(&self, report: &mut Report) {
        report.seed = Some(self.seed);
        report.input("restarts", self.restarts);
        report.input("max_iterations", self.max_iterations);
        report.input("card_u", self.card_u);
        report.input("card_z", self.card_z);
    }
}

/// Failures split by exit status.
enum Failure {
    Invalid(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceLimit(_) => Failure::Resource(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            let text = if cli.csv {
                report.render_csv()
            } else {
                report.render_json() + "\n"
            };
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_channel(path: &Path) -> Result<Dmc, Failure> {
    Ok(ChannelFile::from_json(&read(path)?)?.to_dmc()?)
}

fn load_dist(path: &Path) -> Result<DiamondDistribution, Failure> {
    Ok(DistributionFile::from_json(&read(path)?)?.to_distribution()?)
}

fn rate_arg(units: Units, name: &str, value: f64) -> Result<f64, Failure> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Failure::Invalid(format!(
            "--{name} must be finite and nonnegative, got {value}"
        )));
    }
    Ok(units.parse(value))
}

fn dist_json(dist: &DiamondDistribution) -> Value {
    json!({
        "value": serde_json::to_value(DistributionFile::from_distribution(dist))
            .expect("distribution serializes"),
        "unit": "probability",
    })
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let u = cli.units;
    match &cli.command {
        Command::Region { dist, r, r1, r2 } => {
            let mut rep = Report::new("region", u);
            rep.input("dist", dist.display().to_string());
            rep.input("r", *r);
            rep.input("r1", *r1);
            rep.input("r2", *r2);
            let d = load_dist(dist)?;
            let e = evaluate_bounds(&d)?;
            for (k, v) in [
                ("b1", e.b1),
                ("b2", e.b2),
                ("b3", e.b3),
                ("b4", e.b4),
                ("i_uy", e.i_uy),
                ("i_yz_u", e.i_yz_u),
                ("i_xz_u", e.i_xz_u),
            ] {
                rep.result(k, info(u, v));
            }
            if let Some(r) = r {
                let r = rate_arg(u, "r", *r)?;
                let (a, b) = corner_points(&e, r);
                rep.result(
                    "corner_a",
                    json!({ "r1": info(u, a.r1), "r2": info(u, a.r2) }),
                );
                rep.result(
                    "corner_b",
                    json!({ "r1": info(u, b.r1), "r2": info(u, b.r2) }),
                );
                if let (Some(r1), Some(r2)) = (r1, r2) {
                    let t = RateTriple::new(r, rate_arg(u, "r1", *r1)?, rate_arg(u, "r2", *r2)?)?;
                    rep.result("achievable", check_triple(&t, &e).into());
                }
            } else if r1.is_some() || r2.is_some() {
                return Err(Failure::Invalid("--r1/--r2 require --r".into()));
            }
            Ok(rep)
        }
        Command::Capacity {
            channel,
            r1,
            r2,
            opt,
        } => {
            let mut rep = Report::new("capacity", u);
            rep.input("channel", channel.display().to_string());
            rep.input("r1", *r1);
            rep.input("r2", *r2);
            opt.echo(&mut rep);
            let ch = load_channel(channel)?;
            let (r1, r2) = (rate_arg(u, "r1", *r1)?, rate_arg(u, "r2", *r2)?);
            capacity_results(&mut rep, &ch, r1, r2, &opt.config())?;
            Ok(rep)
        }
        Command::Cutset { channel, r1, r2 } => {
            let mut rep = Report::new("cutset", u);
            rep.input("channel", channel.display().to_string());
            rep.input("r1", *r1);
            rep.input("r2", *r2);
            let ch = load_channel(channel)?;
            let bound = cut_set_bound(&ch, rate_arg(u, "r1", *r1)?, rate_arg(u, "r2", *r2)?)?;
            rep.result("cut_set_bound", info(u, bound));
            Ok(rep)
        }
        Command::Duality { dist } => {
            let mut rep = Report::new("duality", u);
            rep.input("dist", dist.display().to_string());
            let d = load_dist(dist)?;
            let e = evaluate_bounds(&d)?;
            let dual = dual_bounds(&d)?;
            let h_x = d.joint()?.entropy(&[diamond_core::region::axis::X], &[])?;
            rep.result("r0_min", info(u, dual.r0_min));
            rep.result("r1_min", info(u, dual.r1_min));
            rep.result("r2_min", info(u, dual.r2_min));
            rep.result("sum_min", info(u, dual.sum_min));
            rep.result("h_x", info(u, h_x));
            rep.result("r0_residual", info(u, dual.r0_min - (h_x - e.b1)));
            rep.result("sum_residual", info(u, dual.sum_min - (h_x + e.b4)));
            Ok(rep)
        }
        Command::Example { opt } => {
            let mut rep = Report::new("example", u);
            opt.echo(&mut rep);
            let ch: Dmc = build_paper_example();
            let half_bit = std::f64::consts::LN_2 / 2.0;
            rep.input("r1", u.show(half_bit));
            rep.input("r2", u.show(half_bit));
            rep.result("crossover", quantity(ch.prob(0, 1), "probability"));
            rep.result(
                "channel",
                json!({
                    "value": serde_json::to_value(ChannelFile::from_dmc(&ch)).expect("channel serializes"),
                    "unit": "probability",
                }),
            );
            let (c, _) = ch.capacity();
            rep.result("channel_capacity", info(u, c));
            capacity_results(&mut rep, &ch, half_bit, half_bit, &opt.config())?;
            Ok(rep)
        }
        Command::Simulate {
            dist,
            n,
            trials,
            epsilon,
            tau,
            seed,
            delta,
            rate,
            max_symbols,
            timing,
        } => {
            let mut rep = Report::new("simulate", u);
            rep.seed = Some(*seed);
            rep.input("dist", dist.display().to_string());
            rep.input("n", *n);
            rep.input("trials", *trials);
            rep.input("epsilon", *epsilon);
            rep.input("tau", *tau);
            rep.input("delta", *delta);
            rep.input("rate", *rate);
            rep.input("max_symbols", *max_symbols);
            let d = load_dist(dist)?;
            let mut cfg = SimConfig::new(d, *n);
            cfg.trials = *trials;
            cfg.epsilon = u.parse(*epsilon);
            cfg.tau = u.parse(*tau);
            cfg.seed = *seed;
            cfg.delta = *delta;
            cfg.rate = rate.map(|r| rate_arg(u, "rate", r)).transpose()?;
            cfg.max_symbols = *max_symbols;
            let start = Instant::now();
            let out = run_trials(&cfg)?;
            rep.result("trials", count(out.trials));
            rep.result("errors_total", count(out.errors_total));
            rep.result("errors_e1", count(out.errors_e1));
            rep.result("errors_e2", count(out.errors_e2));
            rep.result("errors_e3", count(out.errors_e3));
            rep.result("empirical_pe", quantity(out.empirical_pe, "probability"));
            rep.result("delta", quantity(cfg.delta(), "fraction"));
            let s = out.sizes;
            rep.result("m_a", count(s.m_a));
            rep.result("m_b", count(s.m_b));
            rep.result("m_c", count(s.m_c));
            rep.result("l", count(s.l));
            let total = (s.messages() as f64).ln() / *n as f64;
            rep.result("code_rate", info(u, total));
            if *timing {
                rep.result(
                    "wall_time",
                    quantity(start.elapsed().as_secs_f64(), "seconds"),
                );
            }
            Ok(rep)
        }
    }
}

fn capacity_results(
    rep: &mut Report,
    ch: &Dmc,
    r1: f64,
    r2: f64,
    cfg: &OptimizerConfig,
) -> Result<(), Failure> {
    let u = rep.units;
    let res = maximize_rate(ch, r1, r2, cfg)?;
    let bound = cut_set_bound(ch, r1, r2)?;
    rep.result("best_rate", info(u, res.best_rate));
    rep.result("cut_set_bound", info(u, bound));
    rep.result("gap", info(u, bound - res.best_rate));
    rep.result("feasible", res.feasible.into());
    rep.result("iterations_used", count(res.iterations_used as u64));
    rep.result(
        "per_restart_rates",
        json!({
            "value": res.per_restart_rates.iter().map(|&v| u.show(v)).collect::<Vec<_>>(),
            "unit": u.name(),
        }),
    );
    rep.result("card_u", count(res.best_dist.card_u() as u64));
    rep.result("card_z", count(res.best_dist.card_z() as u64));
    rep.result("best_dist", dist_json(&res.best_dist));
    Ok(())
}

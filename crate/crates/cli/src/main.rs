use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use pinch_core::multi_opt::{ao_solve_multi, build_q, waveguide_power_allocate, WaveguideChannels};
use pinch_core::noma::t_threshold;
use pinch_core::params::{ConfigFile, ScenarioConfig};
use pinch_core::sim::{
    ratio_binned_se, run_realizations, run_sweep, sample_users, write_ao_trace, write_mm_trace, AveragePolicy,
    MetricsTable, SweepSpec,
};
use pinch_core::single_opt::ao_solve;
use pinch_core::verify::run_checks;
use pinch_core::{Config, Scheme};

/// Pinching-antenna semantic/bit NOMA simulator.
#[derive(Parser, Debug)]
#[command(name = "pinch", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config file; missing keys take the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo realizations per sweep point.
    #[arg(long, global = true, default_value_t = 10_000)]
    realizations: usize,
    /// Output directory.
    #[arg(long, global = true, env = "PINCH_OUT", default_value = "out")]
    out: PathBuf,
    /// Scheme tags, repeatable or comma separated. Defaults to all schemes.
    #[arg(long, global = true, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Antennas per waveguide.
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Side of the square region (m).
    #[arg(long = "D", global = true)]
    d: Option<f64>,
    /// Number of waveguides for pass-multi and fixed-pinch.
    #[arg(long, global = true)]
    waveguides: Option<usize>,
    /// Transmit power (dBm) for commands that do not sweep it.
    #[arg(long, global = true)]
    p_dbm: Option<f64>,
    /// Bit-user rate floor (bps/Hz) for commands that do not sweep it.
    #[arg(long, global = true)]
    r_min: Option<f64>,
    /// Average over feasible realizations only instead of counting outages as 0.
    #[arg(long, global = true)]
    feasible_only: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mean SE and outage against transmit power.
    SweepPower {
        #[arg(long, default_value_t = 0.0)]
        p_start: f64,
        #[arg(long, default_value_t = 20.0)]
        p_stop: f64,
        #[arg(long, default_value_t = 5.0)]
        p_step: f64,
    },
    /// Mean SE and outage against the bit-user rate floor.
    SweepQos {
        #[arg(long, default_value_t = 0.25)]
        r_start: f64,
        #[arg(long, default_value_t = 2.0)]
        r_stop: f64,
        #[arg(long, default_value_t = 0.25)]
        r_step: f64,
    },
    /// Mean SE binned by the user distance ratio.
    RatioBins {
        #[arg(long, default_value_t = 0.5)]
        bin_width: f64,
        /// Largest ratio kept; larger ones are dropped.
        #[arg(long, default_value_t = 5.0)]
        max_ratio: f64,
    },
    /// Optimizers against their brute-force references.
    Verify {
        /// Random instances per check.
        #[arg(long, default_value_t = 50)]
        instances: usize,
    },
    /// Iteration logs of one realization.
    Trace {
        /// Realization index.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let c = &cli.common;
    let cfg = config(c)?;
    let policy = if c.feasible_only {
        AveragePolicy::FeasibleOnly
    } else {
        AveragePolicy::InfeasibleAsZero
    };
    match cli.command {
        Command::SweepPower { p_start, p_stop, p_step } => {
            positive("p_step", p_step)?;
            let mut spec = SweepSpec::power(SweepSpec::range(p_start, p_stop, p_step), c.realizations);
            spec.policy = policy;
            let table = run_sweep(&cfg, &schemes(c)?, &spec)?;
            write_table(&c.out, "sweep_power.csv", &table)?;
        }
        Command::SweepQos { r_start, r_stop, r_step } => {
            positive("r_step", r_step)?;
            let mut spec = SweepSpec::rate(SweepSpec::range(r_start, r_stop, r_step), c.realizations);
            spec.policy = policy;
            let table = run_sweep(&cfg, &schemes(c)?, &spec)?;
            write_table(&c.out, "sweep_qos.csv", &table)?;
        }
        Command::RatioBins { bin_width, max_ratio } => {
            positive("bin_width", bin_width)?;
            positive("max_ratio", max_ratio)?;
            let mut rows = Vec::new();
            for s in schemes(c)? {
                let res = run_realizations(&cfg, s, c.realizations)?;
                rows.extend(ratio_binned_se(&res, bin_width, Some(max_ratio), policy).rows);
            }
            let table = MetricsTable {
                variable: "ratio_bin".to_string(),
                rows,
            };
            write_table(&c.out, "ratio_bins.csv", &table)?;
        }
        Command::Verify { instances } => {
            let checks = run_checks(&cfg, instances)?;
            let mut ok = true;
            for ch in &checks {
                let tag = if ch.passed { "PASS" } else { "FAIL" };
                println!("{tag} {} ({})", ch.name, ch.detail);
                ok &= ch.passed;
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Trace { index } => trace(&cfg, index, &c.out)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn config(c: &Common) -> Result<Config> {
    let mut cfg = match &c.config {
        Some(p) => ConfigFile::load(p)
            .and_then(|f| f.resolve::<f64>())
            .with_context(|| format!("reading {}", p.display()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg = cfg.with_seed(s);
    }
    if let Some(n) = c.n {
        cfg = cfg.with_antennas(n);
    }
    if let Some(d) = c.d {
        cfg = cfg.with_side(d);
    }
    if let Some(k) = c.waveguides {
        cfg = cfg.with_waveguides(k);
    }
    if let Some(p) = c.p_dbm {
        cfg.set_power_dbm(p);
    }
    if let Some(r) = c.r_min {
        cfg = cfg.with_rate_min(r);
    }
    cfg.validate()?;
    if c.realizations == 0 {
        bail!("invalid value for `realizations`: must be positive");
    }
    Ok(cfg)
}

fn schemes(c: &Common) -> Result<Vec<Scheme>> {
    if c.scheme.is_empty() {
        return Ok(Scheme::ALL.to_vec());
    }
    c.scheme
        .iter()
        .map(|s| s.trim().parse::<Scheme>().context("invalid value for `scheme`"))
        .collect()
}

fn positive(key: &str, v: f64) -> Result<()> {
    if !(v > 0.0) {
        bail!("invalid value for `{key}`: must be positive, got {v}");
    }
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    println!("{}", path.display());
    Ok(BufWriter::new(f))
}

fn write_table(dir: &Path, name: &str, table: &MetricsTable) -> Result<()> {
    table.write_csv(create(dir, name)?)?;
    Ok(())
}

fn trace(cfg: &Config, index: u64, out: &Path) -> Result<()> {
    let users = sample_users(cfg.seed, index, cfg.side);
    let single = ao_solve(&users, cfg)?;
    write_ao_trace(&single.trace, create(out, "trace_single.csv")?)?;
    println!(
        "single: se={} alpha_s={} iterations={} feasible={}",
        single.semantic_se, single.alpha_s, single.iteration, single.feasible
    );

    let multi = ao_solve_multi(&users, cfg)?;
    println!(
        "multi: se={} alpha_s={} iterations={} feasible={}",
        multi.semantic_se, multi.alpha_s, multi.iteration, multi.feasible
    );
    if multi.feasible {
        let ch = WaveguideChannels::new(&multi.layout, &users, &cfg.wavelengths())?;
        let t_b = t_threshold(multi.alpha_s, cfg.tau(), cfg.p_max, cfg.sigma2)?;
        let mm = waveguide_power_allocate(&build_q(&ch.semantic), &build_q(&ch.bit), t_b, cfg)?;
        write_mm_trace(&mm.trace, create(out, "trace_mm.csv")?)?;
    }
    Ok(())
}

//! Command-line front end: runs the figure sweeps and writes CSV.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gsmhp_core::channel::{draw_channel, draw_user_drop, write_ray_dump};
use gsmhp_core::rng::StreamKey;
use gsmhp_core::sweep::{self, SweptParam};
use gsmhp_core::{run_sweep, write_csv, Error, Result, Scheme, SimConfig, SweepSpec};

#[derive(Parser)]
#[command(name = "gsmhp", version, about = "GSM-HP vs. FDP energy-efficiency simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Energy efficiency vs. number of users
    Fig2(RunArgs),
    /// Energy efficiency vs. number of RF chains
    Fig3(RunArgs),
    /// Energy efficiency vs. antennas per group
    Fig4(RunArgs),
    /// Computation power vs. number of users
    Fig5(RunArgs),
    /// Sweep an arbitrary geometry parameter (or evaluate one point)
    Custom {
        #[command(flatten)]
        run: RunArgs,
        /// Parameter to sweep: users, nrf, nm, nk
        #[arg(long)]
        vary: Option<String>,
    },
    /// Write the ray parameters of drawn channels to a text file
    DumpChannels {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Gsm,
    Fdp,
    Both,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<usize>,
    /// Output path; CSV goes to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    scheme: SchemeArg,
    /// idealized-zf or equal-gain
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    nrf: Option<usize>,
    #[arg(long)]
    nm: Option<usize>,
    #[arg(long)]
    nk: Option<usize>,
    /// Comma-separated swept values, replacing the sweep's defaults
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    /// Print per-point rate standard errors to stderr
    #[arg(long)]
    verbose: bool,
}

impl RunArgs {
    fn load(&self) -> Result<SimConfig> {
        let mut cfg = match &self.config {
            Some(p) => SimConfig::from_file(p)?,
            None => SimConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = self.drops {
            cfg.n_drops = d;
        }
        if let Some(m) = &self.mode {
            cfg.mode = m.parse()?;
        }
        let g = &mut cfg.geometry;
        let old_n_t = g.n_t;
        if let Some(v) = self.users {
            g.n_s = v;
        }
        if let Some(v) = self.nrf {
            g.n_rf = v;
        }
        if let Some(v) = self.nm {
            g.n_m = v;
        }
        if let Some(v) = self.nk {
            g.n_k = v;
        }
        g.n_t = g.n_m * g.n_k;
        if g.n_t != old_n_t {
            (g.rows_l, g.cols_r) = gsmhp_core::params::square_factorization(g.n_t);
        }
        Ok(cfg)
    }

    fn schemes(&self) -> Vec<Scheme> {
        match self.scheme {
            SchemeArg::Gsm => vec![Scheme::GsmHp],
            SchemeArg::Fdp => vec![Scheme::Fdp],
            SchemeArg::Both => vec![Scheme::GsmHp, Scheme::Fdp],
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("GSMHP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("GSMHP_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

fn run_figure(mut spec: SweepSpec, run: &RunArgs, cfg: &SimConfig) -> Result<()> {
    let base = cfg.geometry;
    spec.fixed_geometry = base;
    if spec.kind == sweep::SweepKind::RfChains {
        spec.swept_values = (base.n_s..base.n_m).collect();
    }
    if let Some(v) = &run.values {
        spec.swept_values = v.clone();
    }
    spec.schemes = run.schemes();
    spec.n_drops = cfg.n_drops;
    spec.master_seed = cfg.seed;
    spec.mode = cfg.mode;

    let outcome = run_sweep(&spec, &cfg.radio, &cfg.channel)?;
    for f in &outcome.failures {
        eprintln!(
            "warning: kind={} swept_value={} scheme={} message=\"{}\"",
            f.error.kind(),
            f.swept_value,
            f.scheme,
            f.error
        );
    }
    if outcome.records.is_empty() {
        return Err(Error::Infeasible {
            constraint: "no feasible sweep point".into(),
        });
    }
    if run.verbose {
        for r in &outcome.records {
            eprintln!(
                "point swept_value={} scheme={} r_total_bps={:.6e} std_err={:.3e}",
                r.swept_value, r.scheme, r.r_total_bps, r.r_total_std_err
            );
        }
    }
    match &run.out {
        Some(path) => write_csv(&outcome.records, path),
        None => sweep::write_csv_to(&outcome.records, std::io::stdout().lock()).map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn dump_channels(run: &RunArgs, cfg: &SimConfig) -> Result<()> {
    let path = run
        .out
        .clone()
        .ok_or_else(|| Error::InvalidParameter("dump-channels needs --out".into()))?;
    let g = &cfg.geometry;
    Scheme::Fdp.check_geometry(g)?;
    cfg.channel.validate()?;
    let drops = (0..cfg.n_drops as u64)
        .map(|d| {
            let key = StreamKey::new(cfg.seed, d);
            let users = draw_user_drop(g.n_s, &cfg.channel, &key)?;
            Ok((d, draw_channel(&users, g, &cfg.channel, &key)?))
        })
        .collect::<Result<Vec<_>>>()?;
    write_ray_dump(&drops, &path)
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Fig2(run) => run_figure(SweepSpec::users(), &run, &run.load()?),
        Command::Fig3(run) => run_figure(SweepSpec::rf_chains(), &run, &run.load()?),
        Command::Fig4(run) => run_figure(SweepSpec::antennas_per_group(), &run, &run.load()?),
        Command::Fig5(run) => run_figure(SweepSpec::computation_power_vs_users(), &run, &run.load()?),
        Command::Custom { run, vary } => {
            let cfg = run.load()?;
            let spec = match vary {
                Some(p) => {
                    let param: SweptParam = p.parse()?;
                    let values = run
                        .values
                        .clone()
                        .ok_or_else(|| Error::InvalidParameter("--vary needs --values".into()))?;
                    SweepSpec::custom(param, values, cfg.geometry)
                }
                None => SweepSpec::custom(SweptParam::Users, vec![cfg.geometry.n_s], cfg.geometry),
            };
            run_figure(spec, &RunArgs { values: None, ..run }, &cfg)
        }
        Command::DumpChannels { run } => dump_channels(&run, &run.load()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('"', "'");
            let _ = writeln!(std::io::stderr(), "error: kind={} message=\"{msg}\"", e.kind());
            ExitCode::FAILURE
        }
    }
}

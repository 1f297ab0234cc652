//! `iafb`: feasibility checks, profile optimization, transceiver design and
//! throughput simulation from the command line.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |---|---|
//! | 0 | success; for `feasible`, the profile meets the sufficient condition |
//! | 1 | runtime failure (I/O, numerical) |
//! | 2 | `feasible`: necessary conditions hold, sufficient condition does not |
//! | 3 | profile violates the necessary conditions |
//! | 4 | `optimize`: the DoF target is unachievable |
//! | 64 | malformed command line or input file |

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ia_feedback::evaluate::paired_slope;
use ia_feedback::experiment::{run_experiment, BtotRule, ExperimentError, ExperimentResult, ExperimentSpec, Scheme};
use ia_feedback::feasibility::check_sufficient;
use ia_feedback::feedback::{apply_filter, feedback_dimension, fixed_outer_precoders, FeedbackProfile};
use ia_feedback::network::{draw_channels, NetworkConfig};
use ia_feedback::profile_opt::{d_lower_bound, g_one, greedy_profile, n_zero, ProfileError};
use ia_feedback::rng::stream;
use ia_feedback::transceiver::{
    ailm_solve, reconstruct_unchecked, verify_ia, write_trace_csv, SolverOptions,
};

const EXIT_NECESSARY_ONLY: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_UNACHIEVABLE: u8 = 4;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "iafb", version, about = "Interference alignment with partial CSI feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a feedback profile against the feasibility conditions.
    Feasible {
        #[command(flatten)]
        net: NetArgs,
        /// Profile TOML with `m`, `g`, `n`.
        #[arg(long)]
        profile: PathBuf,
    },
    /// Build the greedy feedback profile and report its bounds.
    Optimize {
        #[command(flatten)]
        net: NetArgs,
        /// Where to write the profile TOML (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for transceivers on one channel draw and emit the leakage trace.
    Design {
        #[command(flatten)]
        net: NetArgs,
        /// Profile TOML (default: the greedy profile).
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to write the `iter,I` CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment described by a TOML file.
    Simulate {
        /// Experiment TOML.
        experiment: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Results CSV (default: the file's `out`, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an SNR sweep described by flags and report DoF slopes.
    Sweep {
        #[command(flatten)]
        net: NetArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Args)]
struct NetArgs {
    /// Network as a TOML file with keys G, K, N, M, d, or inline as `G,K,N,M,d`.
    #[arg(long)]
    config: String,
}

#[derive(Args)]
struct SweepArgs {
    /// Profile TOML replacing the greedy profile for the proposed scheme.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// SNR points in dB: `a,b,c` or `start:step:stop`.
    #[arg(long, default_value = "0:10:40")]
    snr: String,
    /// Total feedback bits, or `scaled` for `D·log₂ P`.
    #[arg(long, default_value = "800")]
    btot: BtotRule,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated schemes.
    #[arg(long, value_delimiter = ',', default_values_t = Scheme::ALL.to_vec())]
    schemes: Vec<Scheme>,
    /// Design on unquantized CSI.
    #[arg(long)]
    no_quantize: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Exit(u8, String),
    Runtime(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Usage(m) => (EXIT_USAGE, m),
            Failure::Exit(c, m) => (c, m),
            Failure::Runtime(m) => (1, m),
        };
        if !msg.is_empty() {
            eprintln!("iafb: {msg}");
        }
        ExitCode::from(code)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Infeasible { .. } | ExperimentError::Baseline2Rows { .. } => {
                Failure::Exit(EXIT_INFEASIBLE, e.to_string())
            }
            ExperimentError::Profile(ProfileError::Unachievable { .. } | ProfileError::NoTransmitSlack { .. }) => {
                Failure::Exit(EXIT_UNACHIEVABLE, e.to_string())
            }
            ExperimentError::Invalid(_) | ExperimentError::Toml(_) | ExperimentError::Config(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_config(arg: &str) -> Result<NetworkConfig, Failure> {
    let cfg = if Path::new(arg).exists() {
        toml::from_str(&read(Path::new(arg))?).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?
    } else {
        let v: Vec<usize> = arg
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| Failure::Usage(format!("--config {arg:?}: no such file and not G,K,N,M,d")))?;
        let [g, k, n, m, d] = v[..] else {
            return Err(Failure::Usage(format!("--config {arg:?}: expected five values G,K,N,M,d")));
        };
        NetworkConfig::new(g, k, n, m, d)
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn parse_profile(path: &Path, cfg: &NetworkConfig) -> Result<FeedbackProfile, Failure> {
    let p = FeedbackProfile::from_toml(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    p.validate(cfg)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(p)
}

fn parse_snr(arg: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--snr {arg:?}: expected a,b,c or start:step:stop"));
    let nums = |sep: char| -> Result<Vec<f64>, Failure> {
        arg.split(sep).map(|s| s.trim().parse::<f64>().map_err(|_| bad())).collect()
    };
    if arg.contains(':') {
        let [start, step, stop] = nums(':')?[..] else { return Err(bad()) };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + step * i as f64).collect())
    } else {
        nums(',')
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_feasible(net: &NetArgs, profile: &Path) -> Result<(), Failure> {
    let cfg = parse_config(&net.config)?;
    let p = parse_profile(profile, &cfg)?;
    let verdict = check_sufficient(&p, &cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!(
        "config: G={} K={} N={} M={} d={}",
        cfg.cells, cfg.users, cfg.bs_antennas, cfg.ms_antennas, cfg.streams
    );
    println!("profile: m={:?} g={} n={:?}", p.m, p.g, p.n);
    match feedback_dimension(&p, &cfg) {
        Ok(d) => println!("feedback dimension D = {d}"),
        Err(e) => println!("feedback dimension D undefined: {e}"),
    }
    match &verdict.violation {
        None => println!("necessary: satisfied"),
        Some(v) => println!("necessary: condition {} violated: {v}", v.condition()),
    }
    println!(
        "sufficient: {}",
        if verdict.sufficient_ok { "satisfied" } else { "not satisfied" }
    );
    if let Some(w) = &verdict.witness {
        if !w.pairs.is_empty() {
            println!("witness:");
        }
        for pf in &w.pairs {
            println!(
                "  MS ({}, {}) / BS {}: f^r = {}, f^t = {}",
                pf.j + 1,
                pf.k + 1,
                pf.i + 1,
                pf.fr,
                pf.ft
            );
        }
    }
    if verdict.sufficient_ok {
        Ok(())
    } else if verdict.necessary_ok {
        Err(Failure::Exit(EXIT_NECESSARY_ONLY, String::new()))
    } else {
        Err(Failure::Exit(EXIT_INFEASIBLE, String::new()))
    }
}

fn cmd_optimize(net: &NetArgs, out: Option<&Path>) -> Result<(), Failure> {
    let cfg = parse_config(&net.config)?;
    let unachievable = |e: ProfileError| match e {
        ProfileError::Unachievable { .. } | ProfileError::NoTransmitSlack { .. } => {
            Failure::Exit(EXIT_UNACHIEVABLE, e.to_string())
        }
        e => Failure::Runtime(e.to_string()),
    };
    let greedy = greedy_profile(&cfg).map_err(unachievable)?;
    let g1 = g_one(&cfg).map_err(unachievable)?;
    let d_low = d_lower_bound(&cfg).map_err(unachievable)?;
    let mut report = String::new();
    report += &format!("N0          {}\n", n_zero(&cfg));
    report += &format!("g0          {}\n", greedy.g0);
    report += &format!("g           {}\n", greedy.g);
    report += &format!("g1          {g1}\n");
    report += &format!("D(initial)  {}\n", greedy.dimension_initial);
    report += &format!("D(L0)       {}\n", greedy.dimension);
    report += &format!("D_low       {d_low}\n");
    let toml = greedy.profile.to_toml();
    match out {
        Some(path) => {
            fs::write(path, toml)?;
            print!("{report}");
        }
        None => {
            eprint!("{report}");
            print!("{toml}");
        }
    }
    Ok(())
}

fn cmd_design(net: &NetArgs, profile: Option<&Path>, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    let cfg = parse_config(&net.config)?;
    let p = match profile {
        Some(path) => parse_profile(path, &cfg)?,
        None => greedy_profile(&cfg)
            .map_err(|e| Failure::Exit(EXIT_UNACHIEVABLE, e.to_string()))?
            .profile,
    };
    let verdict = check_sufficient(&p, &cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
    if !verdict.necessary_ok {
        let v = verdict.violation.map(|v| v.to_string()).unwrap_or_default();
        return Err(Failure::Exit(EXIT_INFEASIBLE, format!("profile is infeasible: {v}")));
    }
    let runtime = |e: &dyn std::fmt::Display| Failure::Runtime(e.to_string());
    let channels = draw_channels(&cfg, &mut stream(seed, "channels", 0)).map_err(|e| runtime(&e))?;
    let t2 = fixed_outer_precoders(&cfg, &p, &mut stream(seed, "outer", 0)).map_err(|e| runtime(&e))?;
    let eff = apply_filter(&channels, &p, &t2, &cfg).map_err(|e| runtime(&e))?;
    let opts = SolverOptions {
        seed,
        ..SolverOptions::default()
    };
    let sol = ailm_solve(&eff, &p, &cfg, &opts).map_err(|e| runtime(&e))?;
    let ts = reconstruct_unchecked(&sol, &eff, &t2, &p, &cfg).map_err(|e| runtime(&e))?;
    let report = verify_ia(&channels, &ts, &cfg, 1e-7);
    let summary = format!(
        "iterations {}\nrestarts {}\nleakage {:e}\nconverged {}\nsignal_sigma_min {:e}\nintracell_residual {:e}\nintercell_residual {:e}\nia_verified {}\n",
        sol.iterations(),
        sol.restarts_used,
        sol.leakage(),
        sol.converged,
        report.min_signal_sigma,
        report.intracell,
        report.intercell,
        report.passes()
    );
    write_trace_csv(&sol.leakage_trace, sink(out)?).map_err(|e| runtime(&e))?;
    if out.is_some() {
        print!("{summary}");
    } else {
        eprint!("{summary}");
    }
    Ok(())
}

fn write_result(result: &ExperimentResult, out: Option<&Path>) -> Result<(), Failure> {
    result.write_csv(sink(out)?)?;
    Ok(())
}

fn cmd_simulate(path: &Path, trials: Option<usize>, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut spec = ExperimentSpec::from_toml(&read(path)?)?;
    if let Some(t) = trials {
        spec.trials = t;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()?;
    let out = out.or(spec.out.clone());
    let result = run_experiment(&spec)?;
    write_result(&result, out.as_deref())
}

fn cmd_sweep(net: &NetArgs, args: SweepArgs) -> Result<(), Failure> {
    let cfg = parse_config(&net.config)?;
    let mut spec = ExperimentSpec::new(cfg, parse_snr(&args.snr)?, args.btot);
    if let Some(path) = &args.profile {
        spec.profile = Some(parse_profile(path, &cfg)?);
    }
    spec.trials = args.trials;
    spec.seed = args.seed;
    spec.schemes = args.schemes;
    spec.quantize = !args.no_quantize;
    spec.validate()?;
    let result = run_experiment(&spec)?;
    write_result(&result, args.out.as_deref())?;
    for st in &result.per_scheme {
        match paired_slope(&st.r_lim, &result.snr_db) {
            Ok(est) => eprintln!("{}: DoF slope {:.3} ± {:.3}", st.scheme, est.slope, est.stderr),
            Err(e) => {
                eprintln!("{}: no DoF slope ({e})", st.scheme);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Feasible { net, profile } => cmd_feasible(&net, &profile),
        Command::Optimize { net, out } => cmd_optimize(&net, out.as_deref()),
        Command::Design {
            net,
            profile,
            seed,
            out,
        } => cmd_design(&net, profile.as_deref(), seed, out.as_deref()),
        Command::Simulate {
            experiment,
            trials,
            seed,
            out,
        } => cmd_simulate(&experiment, trials, seed, out),
        Command::Sweep { net, sweep } => cmd_sweep(&net, sweep),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}

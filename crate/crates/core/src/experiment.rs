//! Monte Carlo throughput experiments over an SNR grid.
//!
//! Each trial draws one channel realization and designs transceivers for
//! every scheme on it, so schemes are compared on identical channels. A
//! trial's randomness comes from streams keyed by the trial index:
//!
//! | label | use |
//! |---|---|
//! | `channels` | `H_{jk,i}` |
//! | `outer/<scheme>` | fixed outer precoders of type-II BSs |
//! | `ailm/<scheme>` | solver starting points |
//! | `quantize/<scheme>/<b>` | codebooks at `b` bits per dimension |
//! | `random-bf` | transceivers of the random-beamforming baseline |

use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmatrix::{random_semi_unitary, LinalgError};
use crate::evaluate::{
    db_to_linear, mean_stderr, residual_interference, throughput_limited, throughput_lower_bound,
    throughput_perfect, total_leakage, EvalError, ThroughputSample,
};
use crate::feasibility::{check_necessary_flow, FeasibilityError};
use crate::feedback::{
    apply_filter, feedback_dimension, fixed_outer_precoders, EffectiveCsi, FeedbackError, FeedbackProfile,
    FixedOuterPrecoders,
};
use crate::network::{draw_channels, ChannelSet, ConfigError, NetworkConfig};
use crate::profile_opt::{greedy_profile, ProfileError};
use crate::quantize::{quantize_with_bits, QuantizeError};
use crate::rng::{derive_seed, stream};
use crate::transceiver::{ailm_solve, reconstruct_unchecked, SolverOptions, TransceiverError, TransceiverSet};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
    #[error(transparent)]
    Transceiver(#[from] TransceiverError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{scheme}: profile violates the necessary conditions: {reason}")]
    Infeasible { scheme: Scheme, reason: String },
    #[error("baseline2: truncated row count GKd + d - N = {m} exceeds M = {max}")]
    Baseline2Rows { m: i64, max: usize },
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

/// Transceiver design schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Greedy profile (or an explicit one).
    Proposed,
    /// Full CDI: `{m = M, g = G, n = N}`.
    Baseline1,
    /// Truncated CDI: `{m = GKd + d − N, g = G, n = N}`.
    Baseline2,
    /// Random semi-unitary transceivers, no feedback.
    Baseline3,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::Baseline1, Scheme::Baseline2, Scheme::Baseline3];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Baseline1 => "baseline1",
            Scheme::Baseline2 => "baseline2",
            Scheme::Baseline3 => "baseline3",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

/// `m = GKd + d − N` for the truncated-CDI baseline, raised to `d` if smaller.
pub fn baseline2_rows(cfg: &NetworkConfig) -> Result<usize, ExperimentError> {
    let m = (cfg.sum_dof() + cfg.streams) as i64 - cfg.bs_antennas as i64;
    if m > cfg.ms_antennas as i64 {
        return Err(ExperimentError::Baseline2Rows {
            m,
            max: cfg.ms_antennas,
        });
    }
    Ok((m.max(cfg.streams as i64)) as usize)
}

/// Feedback profile of a scheme; `None` for random beamforming.
pub fn scheme_profile(
    scheme: Scheme,
    cfg: &NetworkConfig,
    explicit: Option<&FeedbackProfile>,
) -> Result<Option<FeedbackProfile>, ExperimentError> {
    cfg.validate()?;
    Ok(match scheme {
        Scheme::Proposed => Some(match explicit {
            Some(p) => p.clone(),
            None => greedy_profile(cfg)?.profile,
        }),
        Scheme::Baseline1 => Some(FeedbackProfile::full_cdi(cfg)),
        Scheme::Baseline2 => Some(FeedbackProfile::uniform(
            cfg,
            baseline2_rows(cfg)?,
            &vec![cfg.bs_antennas; cfg.cells],
        )),
        Scheme::Baseline3 => None,
    })
}

/// Total feedback budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BtotRule {
    /// The same number of bits at every SNR.
    Fixed(u64),
    /// `⌊D·log₂ P⌋` with `D` the proposed profile's feedback dimension.
    Scaled(ScaledTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaledTag {
    Scaled,
}

impl BtotRule {
    pub const SCALED: BtotRule = BtotRule::Scaled(ScaledTag::Scaled);

    /// Budget at linear SNR `p`, for reference dimension `d_ref`.
    pub fn bits(self, p: f64, d_ref: u64) -> u64 {
        match self {
            BtotRule::Fixed(b) => b,
            BtotRule::Scaled(_) => (d_ref as f64 * p.log2()).floor().max(0.0) as u64,
        }
    }
}

impl std::str::FromStr for BtotRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "scaled" {
            return Ok(BtotRule::SCALED);
        }
        s.parse()
            .map(BtotRule::Fixed)
            .map_err(|_| format!("expected a bit count or \"scaled\", got {s:?}"))
    }
}

fn default_trials() -> usize {
    500
}

fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

fn default_quantize() -> bool {
    true
}

/// One experiment, as read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub config: NetworkConfig,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    /// Replaces the greedy profile for [`Scheme::Proposed`].
    #[serde(default)]
    pub profile: Option<FeedbackProfile>,
    pub snr_db: Vec<f64>,
    pub btot: BtotRule,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// With `false`, designs use unquantized CSI.
    #[serde(default = "default_quantize")]
    pub quantize: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(config: NetworkConfig, snr_db: Vec<f64>, btot: BtotRule) -> Self {
        ExperimentSpec {
            config,
            schemes: default_schemes(),
            profile: None,
            snr_db,
            btot,
            trials: default_trials(),
            seed: 0,
            quantize: true,
            out: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.config.validate()?;
        if self.snr_db.is_empty() {
            return Err(ExperimentError::Invalid("empty SNR grid".into()));
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(ExperimentError::Invalid("SNR grid must be finite and strictly increasing".into()));
        }
        if self.trials == 0 {
            return Err(ExperimentError::Invalid("trials must be positive".into()));
        }
        if self.schemes.is_empty() {
            return Err(ExperimentError::Invalid("no schemes".into()));
        }
        let mut seen = self.schemes.clone();
        seen.sort_by_key(|s| s.name());
        seen.dedup();
        if seen.len() != self.schemes.len() {
            return Err(ExperimentError::Invalid("duplicate scheme".into()));
        }
        if let Some(p) = &self.profile {
            p.validate(&self.config)?;
        }
        Ok(())
    }
}

/// Solver settings used inside simulations.
pub fn simulation_solver(seed: u64) -> SolverOptions {
    SolverOptions {
        max_iters: 5_000,
        tol_leakage: 1e-14,
        tol_rel_change: 1e-10,
        restarts: 0,
        seed,
    }
}

/// Per-trial values of one scheme, indexed `[trial][snr]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeTrials {
    pub scheme: Scheme,
    pub feedback_dim: u64,
    pub b_tot: Vec<Option<u64>>,
    pub bits_per_dim: Vec<Option<u64>>,
    pub r_per: Vec<Vec<f64>>,
    pub r_lim: Vec<Vec<f64>>,
    pub r_lb: Vec<Vec<f64>>,
    pub leakage: Vec<Vec<f64>>,
}

impl SchemeTrials {
    /// Column `s` of a `[trial][snr]` table.
    pub fn column(table: &[Vec<f64>], s: usize) -> Vec<f64> {
        table.iter().map(|row| row[s]).collect()
    }
}

/// Output of [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub snr_db: Vec<f64>,
    /// Rows in scheme order, then SNR order.
    pub samples: Vec<ThroughputSample>,
    pub per_scheme: Vec<SchemeTrials>,
}

impl ExperimentResult {
    pub fn scheme(&self, scheme: Scheme) -> Option<&SchemeTrials> {
        self.per_scheme.iter().find(|s| s.scheme == scheme)
    }

    pub fn sample(&self, scheme: Scheme, snr_db: f64) -> Option<&ThroughputSample> {
        self.samples
            .iter()
            .find(|s| s.scheme == scheme.name() && s.snr_db == snr_db)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "scheme",
            "snr_db",
            "b_tot",
            "trials",
            "r_per_mean",
            "r_lim_mean",
            "r_lb_mean",
            "stderr",
            "leakage_mean",
            "feedback_dim",
        ])?;
        for s in &self.samples {
            w.write_record([
                s.scheme.clone(),
                s.snr_db.to_string(),
                s.b_tot.map(|b| b.to_string()).unwrap_or_default(),
                s.trials.to_string(),
                s.r_per.to_string(),
                s.r_lim.to_string(),
                s.r_lb.to_string(),
                s.stderr.to_string(),
                s.leakage_mean.to_string(),
                s.feedback_dim.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Plan {
    scheme: Scheme,
    profile: Option<FeedbackProfile>,
    feedback_dim: u64,
    /// `(B_tot, b)` per SNR point; `None` without quantization.
    bits: Vec<Option<(u64, u64)>>,
}

struct TrialPoint {
    r_per: f64,
    r_lim: f64,
    r_lb: f64,
    leakage: f64,
}

fn plan(spec: &ExperimentSpec) -> Result<Vec<Plan>, ExperimentError> {
    let cfg = &spec.config;
    let proposed = scheme_profile(Scheme::Proposed, cfg, spec.profile.as_ref())?.expect("proposed has a profile");
    let d_ref = feedback_dimension(&proposed, cfg)?;
    spec.schemes
        .iter()
        .map(|&scheme| {
            let profile = scheme_profile(scheme, cfg, spec.profile.as_ref())?;
            let feedback_dim = match &profile {
                Some(p) => {
                    let verdict = check_necessary_flow(p, cfg)?;
                    if !verdict.necessary_ok {
                        return Err(ExperimentError::Infeasible {
                            scheme,
                            reason: verdict.violation.map(|v| v.to_string()).unwrap_or_default(),
                        });
                    }
                    feedback_dimension(p, cfg)?
                }
                None => 0,
            };
            let bits = spec
                .snr_db
                .iter()
                .map(|&snr| {
                    let b_tot = spec.btot.bits(db_to_linear(snr), d_ref);
                    match (spec.quantize, feedback_dim) {
                        (false, _) => None,
                        (true, 0) => Some((b_tot, 0)),
                        (true, dim) => Some((b_tot, b_tot / dim)),
                    }
                })
                .collect();
            Ok(Plan {
                scheme,
                profile,
                feedback_dim,
                bits,
            })
        })
        .collect()
}

fn random_transceivers(cfg: &NetworkConfig, seed: u64, trial: u64) -> Result<TransceiverSet, LinalgError> {
    let mut rng = stream(seed, "random-bf", trial);
    let (n, m, d, kd) = (cfg.bs_antennas, cfg.ms_antennas, cfg.streams, cfg.kd());
    let t = (0..cfg.cells)
        .map(|_| random_semi_unitary(n, kd, &mut rng))
        .collect::<Result<_, _>>()?;
    let v_s = (0..cfg.num_ms())
        .map(|_| random_semi_unitary(kd, d, &mut rng))
        .collect::<Result<_, _>>()?;
    let u = (0..cfg.num_ms())
        .map(|_| random_semi_unitary(m, d, &mut rng))
        .collect::<Result<_, _>>()?;
    Ok(TransceiverSet::new(t, v_s, u, cfg))
}

fn design(
    eff: &EffectiveCsi,
    t2: &FixedOuterPrecoders,
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
    seed: u64,
) -> Result<TransceiverSet, ExperimentError> {
    let sol = ailm_solve(eff, profile, cfg, &simulation_solver(seed))?;
    Ok(reconstruct_unchecked(&sol, eff, t2, profile, cfg)?)
}

fn run_trial(
    plan: &Plan,
    channels: &ChannelSet,
    spec: &ExperimentSpec,
    trial: u64,
) -> Result<Vec<TrialPoint>, ExperimentError> {
    let cfg = &spec.config;
    let powers: Vec<f64> = spec.snr_db.iter().map(|&s| db_to_linear(s)).collect();
    let Some(profile) = &plan.profile else {
        let ts = random_transceivers(cfg, spec.seed, trial)?;
        return powers
            .iter()
            .map(|&p| {
                let phis = residual_interference(channels, &ts, cfg, p);
                let r = throughput_limited(channels, &ts, &phis, cfg, p)?;
                Ok(TrialPoint {
                    r_per: r,
                    r_lim: r,
                    r_lb: r,
                    leakage: total_leakage(&phis),
                })
            })
            .collect();
    };
    let name = plan.scheme.name();
    let t2 = fixed_outer_precoders(cfg, profile, &mut stream(spec.seed, &format!("outer/{name}"), trial))?;
    let eff = apply_filter(channels, profile, &t2, cfg)?;
    let ailm_seed = derive_seed(spec.seed, &format!("ailm/{name}"), trial);
    let perfect = design(&eff, &t2, profile, cfg, ailm_seed)?;
    let mut designs: Vec<(u64, TransceiverSet)> = Vec::new();
    let mut out = Vec::with_capacity(powers.len());
    for (&p, bits) in powers.iter().zip(&plan.bits) {
        let r_per = throughput_perfect(channels, &perfect, cfg, p)?;
        let (ts, r_lb) = match *bits {
            None => (&perfect, r_per),
            Some((_, b)) => {
                if !designs.iter().any(|(bb, _)| *bb == b) {
                    let q_seed = derive_seed(spec.seed, &format!("quantize/{name}/{b}"), trial);
                    let q = quantize_with_bits(&eff, profile, cfg, b, q_seed)?;
                    designs.push((b, design(&q.eff, &t2, profile, cfg, ailm_seed)?));
                }
                let ts = &designs.iter().find(|(bb, _)| *bb == b).expect("just inserted").1;
                (ts, throughput_lower_bound(r_per, profile, cfg, p, b as f64)?)
            }
        };
        let phis = residual_interference(channels, ts, cfg, p);
        out.push(TrialPoint {
            r_per,
            r_lim: throughput_limited(channels, ts, &phis, cfg, p)?,
            r_lb,
            leakage: total_leakage(&phis),
        });
    }
    Ok(out)
}

/// Runs every scheme of `spec` over `spec.trials` channel draws.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let cfg = &spec.config;
    let plans = plan(spec)?;
    let trials: Vec<Vec<Vec<TrialPoint>>> = (0..spec.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let channels = draw_channels(cfg, &mut stream(spec.seed, "channels", trial))?;
            plans
                .iter()
                .map(|plan| run_trial(plan, &channels, spec, trial))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, ExperimentError>>()?;

    let mut samples = Vec::new();
    let mut per_scheme = Vec::new();
    for (idx, plan) in plans.iter().enumerate() {
        let table = |f: fn(&TrialPoint) -> f64| -> Vec<Vec<f64>> {
            trials.iter().map(|t| t[idx].iter().map(f).collect()).collect()
        };
        let st = SchemeTrials {
            scheme: plan.scheme,
            feedback_dim: plan.feedback_dim,
            b_tot: plan.bits.iter().map(|b| b.map(|(t, _)| t)).collect(),
            bits_per_dim: plan.bits.iter().map(|b| b.map(|(_, b)| b)).collect(),
            r_per: table(|t| t.r_per),
            r_lim: table(|t| t.r_lim),
            r_lb: table(|t| t.r_lb),
            leakage: table(|t| t.leakage),
        };
        for (s, &snr_db) in spec.snr_db.iter().enumerate() {
            let (r_per, r_per_stderr) = mean_stderr(&SchemeTrials::column(&st.r_per, s));
            let (r_lim, stderr) = mean_stderr(&SchemeTrials::column(&st.r_lim, s));
            let (r_lb, r_lb_stderr) = mean_stderr(&SchemeTrials::column(&st.r_lb, s));
            let (leakage_mean, _) = mean_stderr(&SchemeTrials::column(&st.leakage, s));
            samples.push(ThroughputSample {
                scheme: plan.scheme.name().to_string(),
                snr_db,
                b_tot: st.b_tot[s],
                bits_per_dim: st.bits_per_dim[s],
                trials: spec.trials,
                r_per,
                r_lim,
                r_lb,
                stderr,
                r_per_stderr,
                r_lb_stderr,
                leakage_mean,
                feedback_dim: plan.feedback_dim,
            });
        }
        per_scheme.push(st);
    }
    Ok(ExperimentResult {
        snr_db: spec.snr_db.clone(),
        samples,
        per_scheme,
    })
}

/// Mean and standard error of the per-trial difference `a − b` at SNR
/// index `s`.
pub fn paired_difference(a: &[Vec<f64>], b: &[Vec<f64>], s: usize) -> (f64, f64) {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x[s] - y[s]).collect();
    mean_stderr(&diff)
}

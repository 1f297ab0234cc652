//! Transceiver design from effective CSI.
//!
//! [`ailm_solve`] minimizes the leakage
//! `I = Σ_(j,k) Σ_{i type-I, i≠j} ‖Ũ_jk† H^e_{jk,i} T̃_i‖²`
//! by alternating closed-form updates of the reduced decorrelators `Ũ_jk`
//! and reduced outer precoders `T̃_i`. [`reconstruct`] lifts a zero-leakage
//! solution to full-size transceivers, and [`verify_ia`] checks them
//! against the true channels.
//!
//! Nothing here reads a [`ChannelSet`] except [`verify_ia`].

use std::io::Write;

use thiserror::Error;

use crate::cmatrix::{random_semi_unitary, singular_values, smallest_eigvecs, CMatrix, LinalgError};
use crate::feedback::{EffectiveCsi, FeedbackProfile, FixedOuterPrecoders};
use crate::network::{ChannelSet, NetworkConfig};
use crate::rng::stream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransceiverError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("solution has not converged: leakage {leakage:e} is above {tol:e}")]
    Unconverged { leakage: f64, tol: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Stopping rules and restart policy for [`ailm_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Stop once `I` drops below this (unit-norm effective CSI).
    pub tol_leakage: f64,
    /// Stop once `(I_prev − I) / I_prev` drops below this.
    pub tol_rel_change: f64,
    /// Extra runs from fresh random starts when `tol_leakage` is not met.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 20_000,
            tol_leakage: 1e-16,
            tol_rel_change: 1e-12,
            restarts: 5,
            seed: 0,
        }
    }
}

/// Reduced transceivers `{T̃_i}`, `{Ũ_jk}` and the leakage history.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    /// `n_i × Kd`, one per type-I BS.
    pub t_tilde: Vec<CMatrix>,
    /// `A_jk × d`, in MS order.
    pub u_tilde: Vec<CMatrix>,
    /// `I` at the start and after every iteration of the returned run.
    pub leakage_trace: Vec<f64>,
    /// Number of restarts consumed (0 when the first run succeeded).
    pub restarts_used: usize,
    /// Final `I` is below `tol_leakage`.
    pub converged: bool,
    pub tol_leakage: f64,
}

impl ReducedSolution {
    pub fn leakage(&self) -> f64 {
        *self.leakage_trace.last().expect("trace is never empty")
    }

    pub fn iterations(&self) -> usize {
        self.leakage_trace.len() - 1
    }
}

/// Writes the leakage trace as CSV with header `iter,I`.
pub fn write_trace_csv<W: Write>(trace: &[f64], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "I"])?;
    for (t, i) in trace.iter().enumerate() {
        w.write_record([t.to_string(), format!("{i:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Effective cross links, grouped both ways.
struct Links<'a> {
    /// For each MS: `(i, H^e_{jk,i})` over type-I `i ≠ j`.
    by_ms: Vec<Vec<(usize, &'a CMatrix)>>,
    /// For each type-I BS: `(ms, H^e_{jk,i})` over MSs outside cell `i`.
    by_bs: Vec<Vec<(usize, &'a CMatrix)>>,
}

fn cross_links<'a>(
    eff: &'a EffectiveCsi,
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
) -> Result<Links<'a>, TransceiverError> {
    if eff.ms.len() != cfg.num_ms() {
        return Err(TransceiverError::Shape(format!(
            "effective CSI covers {} MSs, network has {}",
            eff.ms.len(),
            cfg.num_ms()
        )));
    }
    let mut by_ms = vec![Vec::new(); cfg.num_ms()];
    let mut by_bs = vec![Vec::new(); profile.g];
    for (j, k) in cfg.ms_iter() {
        let idx = cfg.ms_index(j, k);
        for i in (0..profile.g).filter(|&i| i != j) {
            let h = eff.he(j, k, i).ok_or_else(|| {
                TransceiverError::Shape(format!("MS ({}, {}) has no link from BS {}", j + 1, k + 1, i + 1))
            })?;
            if h.shape() != (eff.ms[idx].a, profile.n[i]) {
                return Err(TransceiverError::Shape(format!(
                    "H^e from BS {} at MS ({}, {}) is {:?}",
                    i + 1,
                    j + 1,
                    k + 1,
                    h.shape()
                )));
            }
            by_ms[idx].push((i, h));
            by_bs[i].push((idx, h));
        }
    }
    Ok(Links { by_ms, by_bs })
}

fn leakage_of(links: &Links<'_>, t_tilde: &[CMatrix], u_tilde: &[CMatrix]) -> f64 {
    links
        .by_ms
        .iter()
        .enumerate()
        .flat_map(|(idx, row)| row.iter().map(move |&(i, h)| (idx, i, h)))
        .map(|(idx, i, h)| u_tilde[idx].adjoint_mul(&(h * &t_tilde[i])).norm_sqr())
        .sum()
}

/// Interference leakage `I` of a reduced solution.
pub fn leakage(
    eff: &EffectiveCsi,
    t_tilde: &[CMatrix],
    u_tilde: &[CMatrix],
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
) -> Result<f64, TransceiverError> {
    let links = cross_links(eff, profile, cfg)?;
    if t_tilde.len() != profile.g || u_tilde.len() != cfg.num_ms() {
        return Err(TransceiverError::Shape("solution size does not match the profile".into()));
    }
    for (i, t) in t_tilde.iter().enumerate() {
        if t.rows() != profile.n[i] {
            return Err(TransceiverError::Shape(format!("T~ of BS {} is {:?}", i + 1, t.shape())));
        }
    }
    for (idx, u) in u_tilde.iter().enumerate() {
        if u.rows() != eff.ms[idx].a {
            return Err(TransceiverError::Shape(format!("U~ of MS {idx} is {:?}", u.shape())));
        }
    }
    Ok(leakage_of(&links, t_tilde, u_tilde))
}

fn check_preconditions(eff: &EffectiveCsi, profile: &FeedbackProfile, cfg: &NetworkConfig) -> Result<(), TransceiverError> {
    for (i, &n) in profile.n.iter().enumerate() {
        if n < cfg.kd() {
            return Err(TransceiverError::Precondition(format!(
                "n = {n} < Kd = {} at BS {}",
                cfg.kd(),
                i + 1
            )));
        }
    }
    for (idx, ms) in eff.ms.iter().enumerate() {
        if ms.a < cfg.streams {
            return Err(TransceiverError::Precondition(format!(
                "A = {} < d = {} at MS {idx}",
                ms.a, cfg.streams
            )));
        }
    }
    Ok(())
}

/// Sum of `X·X†` over a list of matrices of equal row count.
fn gram_sum(rows: usize, terms: impl Iterator<Item = CMatrix>) -> CMatrix {
    terms.fold(CMatrix::zeros(rows, rows), |acc, x| &acc + &x.gram_rows())
}

fn run_once(
    links: &Links<'_>,
    eff: &EffectiveCsi,
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
    attempt: u64,
) -> Result<ReducedSolution, TransceiverError> {
    let d = cfg.streams;
    let kd = cfg.kd();
    let mut rng = stream(opts.seed, "ailm-init", attempt);
    let mut t_tilde = profile
        .n
        .iter()
        .map(|&n| random_semi_unitary(n, kd, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let mut u_tilde = eff
        .ms
        .iter()
        .map(|ms| random_semi_unitary(ms.a, d, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let mut trace = vec![leakage_of(links, &t_tilde, &u_tilde)];
    for _ in 0..opts.max_iters {
        for (idx, row) in links.by_ms.iter().enumerate() {
            let q = gram_sum(eff.ms[idx].a, row.iter().map(|&(i, h)| h * &t_tilde[i]));
            u_tilde[idx] = smallest_eigvecs(&q, d)?;
        }
        for (i, col) in links.by_bs.iter().enumerate() {
            let q = gram_sum(profile.n[i], col.iter().map(|&(idx, h)| h.adjoint_mul(&u_tilde[idx])));
            t_tilde[i] = smallest_eigvecs(&q, kd)?;
        }
        let prev = *trace.last().expect("trace is never empty");
        let now = leakage_of(links, &t_tilde, &u_tilde);
        trace.push(now);
        if now < opts.tol_leakage || (prev > 0.0 && (prev - now) / prev < opts.tol_rel_change) {
            break;
        }
    }
    let converged = *trace.last().expect("trace is never empty") < opts.tol_leakage;
    Ok(ReducedSolution {
        t_tilde,
        u_tilde,
        leakage_trace: trace,
        restarts_used: attempt as usize,
        converged,
        tol_leakage: opts.tol_leakage,
    })
}

/// Alternating leakage minimization with restarts.
///
/// Runs from a random start and, if `tol_leakage` is not reached, from up
/// to `opts.restarts` further starts. Returns the first converged run, or
/// the run with the lowest final leakage.
pub fn ailm_solve(
    eff: &EffectiveCsi,
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
    opts: &SolverOptions,
) -> Result<ReducedSolution, TransceiverError> {
    let links = cross_links(eff, profile, cfg)?;
    check_preconditions(eff, profile, cfg)?;
    let mut best: Option<ReducedSolution> = None;
    for attempt in 0..=opts.restarts as u64 {
        let sol = run_once(&links, eff, profile, cfg, opts, attempt)?;
        if sol.converged {
            return Ok(sol);
        }
        if best.as_ref().is_none_or(|b| sol.leakage() < b.leakage()) {
            best = Some(sol);
        }
    }
    let mut best = best.expect("at least one run");
    best.restarts_used = opts.restarts;
    Ok(best)
}

/// Full-size transceivers: outer precoders `T_i` (`N × Kd`), inner
/// precoders `V^s_jk` (`Kd × d`) and decorrelators `U_jk` (`M × d`).
#[derive(Debug, Clone, PartialEq)]
pub struct TransceiverSet {
    pub t: Vec<CMatrix>,
    pub v_s: Vec<CMatrix>,
    pub u: Vec<CMatrix>,
    users: usize,
}

impl TransceiverSet {
    /// Wraps per-BS `t` and per-MS `v_s`, `u` (MS order).
    pub fn new(t: Vec<CMatrix>, v_s: Vec<CMatrix>, u: Vec<CMatrix>, cfg: &NetworkConfig) -> Self {
        assert_eq!(t.len(), cfg.cells);
        assert_eq!(v_s.len(), cfg.num_ms());
        assert_eq!(u.len(), cfg.num_ms());
        TransceiverSet {
            t,
            v_s,
            u,
            users: cfg.users,
        }
    }

    pub fn outer(&self, i: usize) -> &CMatrix {
        &self.t[i]
    }

    pub fn inner(&self, j: usize, k: usize) -> &CMatrix {
        &self.v_s[j * self.users + k]
    }

    pub fn decorrelator(&self, j: usize, k: usize) -> &CMatrix {
        &self.u[j * self.users + k]
    }

    /// Overall precoder `V_jk = T_j V^s_jk`.
    pub fn precoder(&self, j: usize, k: usize) -> CMatrix {
        &self.t[j] * self.inner(j, k)
    }
}

/// Lifts a converged reduced solution to full-size transceivers.
pub fn reconstruct(
    sol: &ReducedSolution,
    eff: &EffectiveCsi,
    t2: &FixedOuterPrecoders,
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
) -> Result<TransceiverSet, TransceiverError> {
    if !sol.converged {
        return Err(TransceiverError::Unconverged {
            leakage: sol.leakage(),
            tol: sol.tol_leakage,
        });
    }
    reconstruct_unchecked(sol, eff, t2, profile, cfg)
}

/// [`reconstruct`] without the convergence check. Used when residual
/// leakage is expected, as with quantized CSI.
pub fn reconstruct_unchecked(
    sol: &ReducedSolution,
    eff: &EffectiveCsi,
    t2: &FixedOuterPrecoders,
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
) -> Result<TransceiverSet, TransceiverError> {
    let (n, m, d, kd) = (cfg.bs_antennas, cfg.ms_antennas, cfg.streams, cfg.kd());
    if sol.t_tilde.len() != profile.g || sol.u_tilde.len() != cfg.num_ms() {
        return Err(TransceiverError::Shape("solution size does not match the profile".into()));
    }
    let t: Vec<CMatrix> = (0..cfg.cells)
        .map(|i| {
            if profile.is_type_one(i) {
                Ok(sol.t_tilde[i].pad_rows(n))
            } else {
                t2.get(i)
                    .cloned()
                    .ok_or_else(|| TransceiverError::Shape(format!("no fixed precoder for BS {}", i + 1)))
            }
        })
        .collect::<Result<_, _>>()?;
    let u: Vec<CMatrix> = eff
        .ms
        .iter()
        .zip(&sol.u_tilde)
        .map(|(ms, ut)| (&ms.r * ut).pad_rows(m))
        .collect();
    let mut v_s = Vec::with_capacity(cfg.num_ms());
    for j in 0..cfg.cells {
        // X_p: what BS j's streams look like at MS (j, p) after decorrelation.
        let x: Vec<CMatrix> = (0..cfg.users)
            .map(|p| {
                let h = eff.he(j, p, j).ok_or_else(|| {
                    TransceiverError::Shape(format!("MS ({}, {}) has no direct link", j + 1, p + 1))
                })?;
                let x = sol.u_tilde[cfg.ms_index(j, p)].adjoint_mul(h);
                Ok(if profile.is_type_one(j) { &x * &sol.t_tilde[j] } else { x })
            })
            .collect::<Result<_, TransceiverError>>()?;
        for k in 0..cfg.users {
            if cfg.users == 1 {
                v_s.push(CMatrix::eye(kd, d));
                continue;
            }
            let q = (0..cfg.users)
                .filter(|&p| p != k)
                .fold(CMatrix::zeros(kd, kd), |acc, p| &acc + &x[p].adjoint_mul(&x[p]));
            v_s.push(smallest_eigvecs(&q, d)?);
        }
    }
    Ok(TransceiverSet {
        t,
        v_s,
        u,
        users: cfg.users,
    })
}

/// Smallest singular value, relative to `‖H_{jk,j}‖`, below which the
/// desired-signal matrix is treated as rank deficient.
pub const RANK_MARGIN: f64 = 1e-6;

/// Worst residuals of the IA conditions on the true channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IaReport {
    /// Smallest `σ_min(U† H_{jk,j} T_j V^s_jk) / ‖H_{jk,j}‖` over MSs.
    pub min_signal_sigma: f64,
    /// Largest `‖U_jk† H_{jk,j} T_j V^s_jp‖ / ‖H_{jk,j}‖`, `p ≠ k`.
    pub intracell: f64,
    /// Largest `‖U_jk† H_{jk,i} T_i‖ / ‖H_{jk,i}‖`, `i ≠ j`.
    pub intercell: f64,
    pub tol: f64,
}

impl IaReport {
    pub fn rank_ok(&self) -> bool {
        self.min_signal_sigma > RANK_MARGIN
    }

    pub fn intracell_ok(&self) -> bool {
        self.intracell < self.tol
    }

    pub fn intercell_ok(&self) -> bool {
        self.intercell < self.tol
    }

    pub fn passes(&self) -> bool {
        self.rank_ok() && self.intracell_ok() && self.intercell_ok()
    }
}

/// Checks signal rank, intracell nulling and intercell nulling.
pub fn verify_ia(channels: &ChannelSet, ts: &TransceiverSet, cfg: &NetworkConfig, tol: f64) -> IaReport {
    let mut report = IaReport {
        min_signal_sigma: f64::INFINITY,
        intracell: 0.0,
        intercell: 0.0,
        tol,
    };
    for (j, k) in cfg.ms_iter() {
        let u = ts.decorrelator(j, k);
        for i in 0..cfg.cells {
            let h = channels.h(j, k, i);
            let scale = h.norm();
            let uht = u.adjoint_mul(&(h * &ts.t[i]));
            if i == j {
                for p in 0..cfg.users {
                    let x = &uht * ts.inner(j, p);
                    if p == k {
                        let sigma = singular_values(&x).last().copied().unwrap_or(0.0);
                        report.min_signal_sigma = report.min_signal_sigma.min(sigma / scale);
                    } else {
                        report.intracell = report.intracell.max(x.norm() / scale);
                    }
                }
            } else {
                report.intercell = report.intercell.max(uht.norm() / scale);
            }
        }
    }
    report
}

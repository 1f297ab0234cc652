//! Residual interference, throughput and DoF-slope estimation.
//!
//! All rates are in bits per channel use (`log₂`). `p` is the total
//! transmit power per BS in units of the noise power, split evenly over
//! its `Kd` streams.

use thiserror::Error;

use crate::cmatrix::{log2_det_hpd, CMatrix, LinalgError};
use crate::feedback::{grassmann_tuple, FeedbackError, FeedbackProfile};
use crate::network::{ChannelSet, NetworkConfig};
use crate::transceiver::TransceiverSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("slope estimation needs at least 3 SNR points spanning 15 dB (got {points} points over {span_db} dB)")]
    InsufficientPoints { points: usize, span_db: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
}

/// Linear power from dB.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `U_jk† H_{jk,i} V_ip` for transmitter `(i, p)` at receiver `(j, k)`.
pub fn effective_gain(channels: &ChannelSet, ts: &TransceiverSet, j: usize, k: usize, i: usize, p: usize) -> CMatrix {
    ts.decorrelator(j, k)
        .adjoint_mul(&(channels.h(j, k, i) * &ts.precoder(i, p)))
}

/// Residual interference covariance at every MS:
/// `Φ_jk = (p/Kd) Σ_{(i,q)≠(j,k)} (U† H_{jk,i} V_iq)(U† H_{jk,i} V_iq)†`.
pub fn residual_interference(channels: &ChannelSet, ts: &TransceiverSet, cfg: &NetworkConfig, p: f64) -> Vec<CMatrix> {
    let scale = p / cfg.kd() as f64;
    cfg.ms_iter()
        .map(|(j, k)| {
            let mut phi = CMatrix::zeros(cfg.streams, cfg.streams);
            for (i, q) in cfg.ms_iter() {
                if (i, q) != (j, k) {
                    phi = &phi + &effective_gain(channels, ts, j, k, i, q).gram_rows();
                }
            }
            phi.scale_real(scale)
        })
        .collect()
}

/// Total leakage `Σ_jk tr Φ_jk`.
pub fn total_leakage(phis: &[CMatrix]) -> f64 {
    phis.iter().map(|phi| phi.trace().re).sum()
}

/// `R_per = Σ_jk log₂ det(I + (p/Kd) S S†)` with `S = U† H_{jk,j} T_j V^s_jk`,
/// ignoring any residual interference.
pub fn throughput_perfect(channels: &ChannelSet, ts: &TransceiverSet, cfg: &NetworkConfig, p: f64) -> Result<f64, EvalError> {
    let zero = vec![CMatrix::zeros(cfg.streams, cfg.streams); cfg.num_ms()];
    throughput_limited(channels, ts, &zero, cfg, p)
}

/// `R_lim = Σ_jk log₂ det(I + (p/Kd) S S† (I + Φ_jk)⁻¹)`, evaluated as
/// `log₂ det(I + Φ + (p/Kd) S S†) − log₂ det(I + Φ)`.
pub fn throughput_limited(
    channels: &ChannelSet,
    ts: &TransceiverSet,
    phis: &[CMatrix],
    cfg: &NetworkConfig,
    p: f64,
) -> Result<f64, EvalError> {
    if phis.len() != cfg.num_ms() {
        return Err(EvalError::Shape(format!("{} covariances for {} MSs", phis.len(), cfg.num_ms())));
    }
    let eye = CMatrix::identity(cfg.streams);
    let scale = p / cfg.kd() as f64;
    let mut total = 0.0;
    for (j, k) in cfg.ms_iter() {
        let s = effective_gain(channels, ts, j, k, j, k);
        let noise = &eye + &phis[cfg.ms_index(j, k)];
        let full = &noise + &s.gram_rows().scale_real(scale);
        total += log2_det_hpd(&full)? - log2_det_hpd(&noise)?;
    }
    Ok(total)
}

/// `c_jk = Σ (B_{jk,i} − 1)` over the factors of MS `(j, k)`'s feedback.
pub fn distortion_weights(profile: &FeedbackProfile, cfg: &NetworkConfig) -> Result<Vec<f64>, EvalError> {
    cfg.ms_iter()
        .map(|(j, k)| {
            Ok(grassmann_tuple(profile, cfg, j, k)?
                .iter()
                .map(|f| (f.ambient_dim - 1) as f64)
                .sum())
        })
        .collect()
}

/// Bound `(p/d)·c_jk·2^{−b}` on the mean residual leakage at each MS.
pub fn leakage_bound(profile: &FeedbackProfile, cfg: &NetworkConfig, p: f64, b: f64) -> Result<Vec<f64>, EvalError> {
    let d = cfg.streams as f64;
    Ok(distortion_weights(profile, cfg)?
        .into_iter()
        .map(|c| p / d * c * (-b).exp2())
        .collect())
}

/// `R_lb = r_per − Σ_jk d·log₂(1 + (p/d²)·c_jk·2^{−b})`.
pub fn throughput_lower_bound(r_per: f64, profile: &FeedbackProfile, cfg: &NetworkConfig, p: f64, b: f64) -> Result<f64, EvalError> {
    let d = cfg.streams as f64;
    let penalty: f64 = distortion_weights(profile, cfg)?
        .into_iter()
        .map(|c| d * (1.0 + p / (d * d) * c * (-b).exp2()).log2())
        .sum();
    Ok(r_per - penalty)
}

/// Monte Carlo summary at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputSample {
    pub scheme: String,
    pub snr_db: f64,
    /// Total feedback bits; `None` when quantization is off.
    pub b_tot: Option<u64>,
    /// Bits per feedback dimension; `None` when quantization is off.
    pub bits_per_dim: Option<u64>,
    pub trials: usize,
    pub r_per: f64,
    pub r_lim: f64,
    pub r_lb: f64,
    /// Standard error of `r_lim`.
    pub stderr: f64,
    pub r_per_stderr: f64,
    pub r_lb_stderr: f64,
    /// Mean of `Σ_jk tr Φ_jk`.
    pub leakage_mean: f64,
    pub feedback_dim: u64,
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn check_sweep(snr_db: &[f64]) -> Result<(), EvalError> {
    let lo = snr_db.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = snr_db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span_db = if snr_db.is_empty() { 0.0 } else { hi - lo };
    if snr_db.len() < 3 || span_db < 15.0 {
        return Err(EvalError::InsufficientPoints {
            points: snr_db.len(),
            span_db,
        });
    }
    Ok(())
}

/// Slope of mean `R_lim` against `log₂ P`, in bits per doubling of power.
pub fn dof_slope(sweep: &[ThroughputSample]) -> Result<f64, EvalError> {
    let snr: Vec<f64> = sweep.iter().map(|s| s.snr_db).collect();
    check_sweep(&snr)?;
    let x: Vec<f64> = snr.iter().map(|&s| db_to_linear(s).log2()).collect();
    let y: Vec<f64> = sweep.iter().map(|s| s.r_lim).collect();
    Ok(least_squares_slope(&x, &y))
}

/// Slope estimate with a standard error from per-trial slopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub stderr: f64,
}

/// Fits one slope per trial (rows of `per_trial`, one column per SNR
/// point) and averages. Since every trial reuses one channel draw across
/// the sweep, the spread of per-trial slopes measures the slope's own
/// uncertainty. The mean of the per-trial slopes equals the slope of the
/// means.
pub fn paired_slope(per_trial: &[Vec<f64>], snr_db: &[f64]) -> Result<SlopeEstimate, EvalError> {
    check_sweep(snr_db)?;
    let x: Vec<f64> = snr_db.iter().map(|&s| db_to_linear(s).log2()).collect();
    let slopes: Vec<f64> = per_trial
        .iter()
        .map(|row| {
            if row.len() != x.len() {
                Err(EvalError::Shape(format!("trial has {} points, sweep has {}", row.len(), x.len())))
            } else {
                Ok(least_squares_slope(&x, row))
            }
        })
        .collect::<Result<_, _>>()?;
    let (slope, stderr) = mean_stderr(&slopes);
    Ok(SlopeEstimate { slope, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::{apply_filter, fixed_outer_precoders};
    use crate::network::draw_channels;
    use crate::rng::stream;
    use crate::transceiver::{ailm_solve, reconstruct, reconstruct_unchecked, SolverOptions};

    fn reference() -> (NetworkConfig, FeedbackProfile) {
        let cfg = NetworkConfig::new(3, 2, 4, 4, 1);
        (cfg, FeedbackProfile::uniform(&cfg, 4, &[4, 3]))
    }

    fn design(seed: u64, iters: usize) -> (NetworkConfig, FeedbackProfile, ChannelSet, TransceiverSet) {
        let (cfg, p) = reference();
        let t2 = fixed_outer_precoders(&cfg, &p, &mut stream(seed, "t2", 0)).unwrap();
        let ch = draw_channels(&cfg, &mut stream(seed, "channels", 0)).unwrap();
        let eff = apply_filter(&ch, &p, &t2, &cfg).unwrap();
        let opts = SolverOptions {
            max_iters: iters,
            restarts: 0,
            seed,
            ..SolverOptions::default()
        };
        let sol = ailm_solve(&eff, &p, &cfg, &opts).unwrap();
        let ts = if iters > 0 {
            reconstruct(&sol, &eff, &t2, &p, &cfg).unwrap()
        } else {
            reconstruct_unchecked(&sol, &eff, &t2, &p, &cfg).unwrap()
        };
        (cfg, p, ch, ts)
    }

    #[test]
    fn aligned_design_has_no_residual() {
        let (cfg, _, ch, ts) = design(1, 20_000);
        let p = 1e4;
        let phis = residual_interference(&ch, &ts, &cfg, p);
        assert!(total_leakage(&phis) < 1e-12 * p);
        let r = throughput_perfect(&ch, &ts, &cfg, p).unwrap();
        let r_lim = throughput_limited(&ch, &ts, &phis, &cfg, p).unwrap();
        assert!(r > 0.0);
        assert!((r - r_lim).abs() < 1e-8);
        assert_eq!(throughput_perfect(&ch, &ts, &cfg, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn unaligned_design_leaks_in_proportion_to_power() {
        let (cfg, _, ch, ts) = design(2, 0);
        let l1 = total_leakage(&residual_interference(&ch, &ts, &cfg, 1.0));
        let l100 = total_leakage(&residual_interference(&ch, &ts, &cfg, 100.0));
        assert!(l1 > 1e-2);
        assert!((l100 / l1 - 100.0).abs() < 1e-9);
        for phi in residual_interference(&ch, &ts, &cfg, 10.0) {
            assert!(phi.hermitian_asymmetry() < 1e-12);
            assert!(phi[(0, 0)].re >= 0.0);
        }
    }

    #[test]
    fn scalar_unit_gain_rate() {
        // G = 2, K = 1, scalar links with unit direct gain and no cross gain.
        let cfg = NetworkConfig::new(2, 1, 1, 1, 1);
        let h: Vec<CMatrix> = (0..4)
            .map(|idx| if idx == 0 || idx == 3 { CMatrix::identity(1) } else { CMatrix::zeros(1, 1) })
            .collect();
        let ch = ChannelSet::from_matrices(&cfg, h);
        let one = || vec![CMatrix::identity(1); 2];
        let ts = TransceiverSet::new(one(), one(), one(), &cfg);
        let p = 7.0;
        let r = throughput_perfect(&ch, &ts, &cfg, p).unwrap();
        assert!((r - 2.0 * (1.0 + p).log2()).abs() < 1e-12);
        let phis = residual_interference(&ch, &ts, &cfg, p);
        assert_eq!(total_leakage(&phis), 0.0);
    }

    #[test]
    fn bound_values() {
        let (cfg, p) = reference();
        let c = distortion_weights(&p, &cfg).unwrap();
        assert_eq!(c[0], 12.0);
        assert_eq!(c[4], 15.0 + 11.0 + 7.0);
        let b1 = leakage_bound(&p, &cfg, 100.0, 3.0).unwrap();
        let b2 = leakage_bound(&p, &cfg, 100.0, 2.0).unwrap();
        assert!(b1.iter().zip(&b2).all(|(x, y)| (y / x - 2.0).abs() < 1e-12));
        assert!(leakage_bound(&p, &cfg, 100.0, f64::INFINITY).unwrap().iter().all(|&x| x == 0.0));
        assert_eq!(throughput_lower_bound(10.0, &p, &cfg, 1e3, f64::INFINITY).unwrap(), 10.0);
        // b = log₂ P: the penalty no longer depends on P.
        let pen = |pw: f64| 10.0 - throughput_lower_bound(10.0, &p, &cfg, pw, pw.log2()).unwrap();
        assert!((pen(1e3) - pen(1e5)).abs() < 1e-9);
        let expected: f64 = c.iter().map(|c| (1.0 + c).log2()).sum();
        assert!((pen(1.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn slopes() {
        let snr = [30.0, 40.0, 50.0];
        let mk = |r: f64, s: f64| ThroughputSample {
            scheme: "x".into(),
            snr_db: s,
            b_tot: None,
            bits_per_dim: None,
            trials: 1,
            r_per: r,
            r_lim: r,
            r_lb: r,
            stderr: 0.0,
            r_per_stderr: 0.0,
            r_lb_stderr: 0.0,
            leakage_mean: 0.0,
            feedback_dim: 0,
        };
        let sweep: Vec<_> = snr.iter().map(|&s| mk(6.0 * db_to_linear(s).log2() + 3.0, s)).collect();
        assert!((dof_slope(&sweep).unwrap() - 6.0).abs() < 1e-12);
        assert!(dof_slope(&sweep[..2]).is_err());
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|t| snr.iter().map(|&s| (5.0 + t as f64) * db_to_linear(s).log2()).collect())
            .collect();
        let est = paired_slope(&rows, &snr).unwrap();
        assert!((est.slope - 6.5).abs() < 1e-12);
        assert!(est.stderr > 0.0);
    }
}

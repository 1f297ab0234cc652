//! Greedy feedback-profile construction and its analytic bounds.
//!
//! [`greedy_profile`] picks as many type-II BSs as the antenna budget
//! allows, then trims feedback antennas that the max-flow solution leaves
//! unused. All of its arithmetic is on integers.

use thiserror::Error;

use crate::feasibility::{FlowNetwork, FlowWitness};
use crate::feedback::{feedback_dimension, FeedbackProfile};
use crate::network::{ConfigError, NetworkConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{name} = {value} must exceed Kd = {kd}")]
    NoTransmitSlack {
        name: &'static str,
        value: usize,
        kd: usize,
    },
    #[error("DoF unachievable for this antenna configuration: no choice of g in {from}..={cells} meets the necessary conditions")]
    Unachievable { from: usize, cells: usize },
    #[error("need 0 < C1, C2 < d and C1 + C2 > d (got C1 = {c1}, C2 = {c2}, d = {d})")]
    RatioDomain { c1: f64, c2: f64, d: f64 },
}

/// `N1 = min(GKd, N)`.
pub fn n_one(cfg: &NetworkConfig) -> usize {
    cfg.sum_dof().min(cfg.bs_antennas)
}

/// `N0 = min(GKd, ⌊N/d⌋·d)`.
pub fn n_zero(cfg: &NetworkConfig) -> usize {
    cfg.sum_dof().min(cfg.bs_antennas / cfg.streams * cfg.streams)
}

/// `G·((G−1)Kd − M + d)`, the receive-side shortfall type-I BSs must cover.
fn shortfall(cfg: &NetworkConfig) -> usize {
    cfg.cells * ((cfg.cells - 1) * cfg.kd() + cfg.streams - cfg.ms_antennas)
}

/// Lower bound on the number of type-I BSs of any feasible profile:
/// `g1 = ⌊G·((G−1)Kd − M + d) / (N1 − Kd)⌋`.
pub fn g_one(cfg: &NetworkConfig) -> Result<usize, ProfileError> {
    cfg.validate()?;
    let n1 = n_one(cfg);
    if n1 <= cfg.kd() {
        return Err(ProfileError::NoTransmitSlack {
            name: "N1",
            value: n1,
            kd: cfg.kd(),
        });
    }
    Ok(shortfall(cfg) / (n1 - cfg.kd()))
}

/// `g0 = ⌈G·((G−1)Kd − M + d) / (N0 − Kd)⌉`, before clamping or repair.
pub fn g_zero(cfg: &NetworkConfig) -> Result<usize, ProfileError> {
    cfg.validate()?;
    let n0 = n_zero(cfg);
    if n0 <= cfg.kd() {
        return Err(ProfileError::NoTransmitSlack {
            name: "N0",
            value: n0,
            kd: cfg.kd(),
        });
    }
    Ok(shortfall(cfg).div_ceil(n0 - cfg.kd()))
}

/// Result of [`greedy_profile`].
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyProfile {
    /// Pruned profile.
    pub profile: FeedbackProfile,
    /// `g0` as given by its closed form.
    pub g0: usize,
    /// Number of type-I BSs actually used (`≥ g0`).
    pub g: usize,
    /// Feedback dimension before pruning.
    pub dimension_initial: u64,
    /// Feedback dimension of `profile`.
    pub dimension: u64,
    /// Max-flow witness on the unpruned network.
    pub witness: FlowWitness,
}

fn initial_profile(cfg: &NetworkConfig, g: usize, n0: usize) -> FeedbackProfile {
    FeedbackProfile::uniform(cfg, cfg.ms_antennas, &vec![n0; g])
}

/// Greedy profile: start from `{m = M, g0, n = N0}`, solve the max-flow
/// network, and prune `n_i = N0 − ⌊(c(a,v_i) − f(a,v_i))/Kd⌋·d`,
/// `m_jk = M − (c(a,u_jk) − f(a,u_jk))`.
///
/// The closed-form `g0` can fall short of the necessary conditions when
/// its rounding leaves a type-I cell's own receive slack negative. In that
/// case `g` is raised one at a time until the network saturates; both
/// values are reported.
pub fn greedy_profile(cfg: &NetworkConfig) -> Result<GreedyProfile, ProfileError> {
    let g0 = g_zero(cfg)?;
    let n0 = n_zero(cfg);
    let kd = cfg.kd() as i64;
    for g in g0..=cfg.cells {
        let start = initial_profile(cfg, g, n0);
        let Ok(mut net) = FlowNetwork::build(&start, cfg) else {
            continue;
        };
        if net.solve() != net.demand() {
            continue;
        }
        let n = net
            .bs_leftover()
            .iter()
            .map(|&left| n0 - (left / kd) as usize * cfg.streams)
            .collect();
        let left_ms = net.ms_leftover();
        let m = (0..cfg.cells)
            .map(|j| {
                (0..cfg.users)
                    .map(|k| cfg.ms_antennas - left_ms[cfg.ms_index(j, k)] as usize)
                    .collect()
            })
            .collect();
        let profile = FeedbackProfile::new(m, g, n);
        let dimension_initial = feedback_dimension(&start, cfg).expect("saturated network has A ≥ d");
        let dimension = feedback_dimension(&profile, cfg).expect("pruning keeps A ≥ d");
        return Ok(GreedyProfile {
            profile,
            g0,
            g,
            dimension_initial,
            dimension,
            witness: net.witness(),
        });
    }
    Err(ProfileError::Unachievable {
        from: g0.min(cfg.cells),
        cells: cfg.cells,
    })
}

/// `D_low = K·G·N1·g1·(M − (G − g1)·K·d) − K·G²`. May be negative.
pub fn d_lower_bound(cfg: &NetworkConfig) -> Result<i64, ProfileError> {
    let g1 = g_one(cfg)? as i64;
    let (g, k, m, d) = (
        cfg.cells as i64,
        cfg.users as i64,
        cfg.ms_antennas as i64,
        cfg.streams as i64,
    );
    let n1 = n_one(cfg) as i64;
    Ok(k * g * n1 * g1 * (m - (g - g1) * k * d) - k * g * g)
}

/// Summary numbers around the greedy profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileBounds {
    pub g1: usize,
    pub n1: usize,
    pub d_low: i64,
    /// Feedback dimension of the greedy profile.
    pub d_upper: u64,
}

pub fn profile_bounds(cfg: &NetworkConfig) -> Result<ProfileBounds, ProfileError> {
    Ok(ProfileBounds {
        g1: g_one(cfg)?,
        n1: n_one(cfg),
        d_low: d_lower_bound(cfg)?,
        d_upper: greedy_profile(cfg)?.dimension,
    })
}

fn check_ratio_domain(c1: f64, c2: f64, d: f64) -> Result<(), ProfileError> {
    let inside = c1 > 0.0 && c2 > 0.0 && c1 < d && c2 < d && c1 + c2 > d;
    if inside {
        Ok(())
    } else {
        Err(ProfileError::RatioDomain { c1, c2, d })
    }
}

/// Large-`G` limit of `D(L0)/(G⁴K³)` when `N = ⌊C1·KG⌋`, `M = ⌊C2·KG⌋`:
/// `(d − C1)(d − C2)² / C1`.
pub fn asymptotic_ratio(c1: f64, c2: f64, d: f64) -> Result<f64, ProfileError> {
    check_ratio_domain(c1, c2, d)?;
    Ok((d - c1) * (d - c2).powi(2) / c1)
}

/// Large-`G` limit of `D(L0)` over the full-CDI dimension:
/// `(d − C1)(d − C2)² / (C1²·C2)`.
pub fn full_cdi_ratio(c1: f64, c2: f64, d: f64) -> Result<f64, ProfileError> {
    check_ratio_domain(c1, c2, d)?;
    Ok((d - c1) * (d - c2).powi(2) / (c1 * c1 * c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::check_sufficient;

    #[test]
    fn g_one_examples() {
        assert_eq!(g_one(&NetworkConfig::new(3, 2, 4, 4, 1)).unwrap(), 1);
        assert_eq!(g_one(&NetworkConfig::new(2, 2, 3, 3, 1)).unwrap(), 0);
        assert_eq!(g_one(&NetworkConfig::new(3, 1, 4, 3, 1)).unwrap(), 0);
        assert!(matches!(
            g_one(&NetworkConfig::new(2, 2, 2, 3, 1)),
            Err(ProfileError::NoTransmitSlack { .. })
        ));
    }

    #[test]
    fn reference_network_greedy() {
        let cfg = NetworkConfig::new(3, 2, 4, 4, 1);
        let out = greedy_profile(&cfg).unwrap();
        assert_eq!(out.g0, 2);
        assert_eq!(out.g, 2);
        assert_eq!(out.profile.m, vec![vec![4, 4]; 3]);
        let mut n = out.profile.n.clone();
        n.sort_unstable();
        assert_eq!(n, vec![3, 4]);
        assert_eq!(out.dimension, 114);
        assert!(out.dimension <= out.dimension_initial);
        assert!(check_sufficient(&out.profile, &cfg).unwrap().sufficient_ok);
    }

    #[test]
    fn zero_forcing_boundary() {
        // M = (G−1)Kd + d: no type-I BSs, m unchanged.
        let cfg = NetworkConfig::new(2, 2, 3, 3, 1);
        let out = greedy_profile(&cfg).unwrap();
        assert_eq!(out.g0, 0);
        assert_eq!(out.profile, FeedbackProfile::uniform(&cfg, 3, &[]));
        assert_eq!(out.dimension, 4);
    }

    #[test]
    fn closed_form_g0_can_need_repair() {
        // g0 = 1 leaves cell 1 with slack 3 − 3 − 1 < 0.
        let cfg = NetworkConfig::new(2, 3, 5, 3, 1);
        assert_eq!(n_zero(&cfg), 5);
        assert_eq!(g_zero(&cfg).unwrap(), 1);
        let literal = initial_profile(&cfg, 1, 5);
        assert!(!check_sufficient(&literal, &cfg).unwrap().necessary_ok);
        let out = greedy_profile(&cfg).unwrap();
        assert_eq!((out.g0, out.g), (1, 2));
        assert!(check_sufficient(&out.profile, &cfg).unwrap().sufficient_ok);
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(d_lower_bound(&NetworkConfig::new(3, 2, 4, 4, 1)).unwrap(), -18);
        assert_eq!(d_lower_bound(&NetworkConfig::new(2, 2, 3, 3, 1)).unwrap(), -8);
        let big = NetworkConfig::new(30, 1, 23, 23, 1);
        let b = profile_bounds(&big).unwrap();
        assert!(b.d_low <= b.d_upper as i64, "{b:?}");
    }

    #[test]
    fn ratio_values() {
        let a = asymptotic_ratio(0.75, 0.75, 1.0).unwrap();
        assert!((a - 1.0 / 48.0).abs() < 1e-15);
        let f = full_cdi_ratio(0.75, 0.75, 1.0).unwrap();
        assert!((f - 0.25 * 0.0625 / (0.5625 * 0.75)).abs() < 1e-15);
        let f = full_cdi_ratio(0.6, 0.6, 1.0).unwrap();
        assert!((f - 0.4 * 0.16 / (0.36 * 0.6)).abs() < 1e-15);
        assert!(asymptotic_ratio(0.999_999, 0.5, 1.0).unwrap() < 1e-6);
        assert!(asymptotic_ratio(0.4, 0.5, 1.0).is_err());
        assert!(full_cdi_ratio(1.2, 0.5, 1.0).is_err());
    }
}

//! Feedback profiles, CSI filtering and feedback-dimension accounting.
//!
//! A [`FeedbackProfile`] `{ {m_jk}, g, {n_i} }` fixes which channel
//! coefficients each mobile reports:
//!
//! * BSs `0..g` are *type-I*: their outer precoders are designed from
//!   feedback, and mobiles report the `m_jk × n_i` upper-left block of the
//!   channel from them.
//! * BSs `g..G` are *type-II*: they use a fixed outer precoder `T_i^II`
//!   known network-wide. Mobiles cancel their interference locally by
//!   projecting onto `R_jk`, the left null space of
//!   `[H^s_{jk,i} T_i^II]_{i type-II, i≠j}`, and report nothing about those
//!   links.
//!
//! What is fed back is a direction (a point on `G(1, B)`) per retained
//! link, so the effective CSI is stored normalized to unit Frobenius norm.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmatrix::{left_null_space, random_semi_unitary, CMatrix, LinalgError};
use crate::network::{ChannelSet, NetworkConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeedbackError {
    #[error("profile shape does not match the network: {0}")]
    Shape(String),
    #[error("profile value out of range: {0}")]
    OutOfRange(String),
    #[error("MS ({}, {}) has A = {a} < 1: no receive dimensions survive type-II nulling", .j + 1, .k + 1)]
    NoReceiveDimensions { j: usize, k: usize, a: i64 },
    #[error("degenerate channel at MS ({}, {}): null space has dimension {got}, expected {expected}", .j + 1, .k + 1)]
    DegenerateChannel {
        j: usize,
        k: usize,
        expected: usize,
        got: usize,
    },
    #[error("N = {n} is below Kd = {kd}; type-II outer precoders do not exist")]
    NoOuterPrecoder { n: usize, kd: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The feedback profile `L = { {m_jk}, g, {n_i : i < g} }`.
///
/// Type-I BSs are always the first `g` (canonical ordering); relabel cells
/// before building a profile if a different set should be type-I.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeedbackProfile {
    /// `m[j][k]`: MS feedback antennas, one row per cell.
    pub m: Vec<Vec<usize>>,
    /// Number of type-I BSs.
    pub g: usize,
    /// `n[i]`: BS feedback antennas for each type-I BS.
    pub n: Vec<usize>,
}

impl FeedbackProfile {
    pub fn new(m: Vec<Vec<usize>>, g: usize, n: Vec<usize>) -> Self {
        FeedbackProfile { m, g, n }
    }

    /// Same `m` at every MS.
    pub fn uniform(cfg: &NetworkConfig, m: usize, n: &[usize]) -> Self {
        FeedbackProfile {
            m: vec![vec![m; cfg.users]; cfg.cells],
            g: n.len(),
            n: n.to_vec(),
        }
    }

    /// Full CDI feedback: `{m = M, g = G, n = N}`.
    pub fn full_cdi(cfg: &NetworkConfig) -> Self {
        Self::uniform(cfg, cfg.ms_antennas, &vec![cfg.bs_antennas; cfg.cells])
    }

    pub fn m(&self, j: usize, k: usize) -> usize {
        self.m[j][k]
    }

    pub fn is_type_one(&self, i: usize) -> bool {
        i < self.g
    }

    /// Number of type-II BSs other than `j`.
    pub fn type_two_others(&self, cfg: &NetworkConfig, j: usize) -> usize {
        let type_two = cfg.cells - self.g;
        if self.is_type_one(j) {
            type_two
        } else {
            type_two - 1
        }
    }

    /// Columns fed back for links from BS `i`: `n_i` for type-I, `N` otherwise.
    pub fn bs_columns(&self, cfg: &NetworkConfig, i: usize) -> usize {
        if self.is_type_one(i) {
            self.n[i]
        } else {
            cfg.bs_antennas
        }
    }

    /// Structural checks: shapes, `1 ≤ m_jk ≤ M`, `g ≤ G`, `1 ≤ n_i ≤ N`.
    ///
    /// `n_i < Kd` is representable; the feasibility checks reject it.
    pub fn validate(&self, cfg: &NetworkConfig) -> Result<(), FeedbackError> {
        if self.m.len() != cfg.cells || self.m.iter().any(|row| row.len() != cfg.users) {
            return Err(FeedbackError::Shape(format!(
                "m must be {}x{}",
                cfg.cells, cfg.users
            )));
        }
        if self.g > cfg.cells {
            return Err(FeedbackError::OutOfRange(format!(
                "g = {} exceeds G = {}",
                self.g, cfg.cells
            )));
        }
        if self.n.len() != self.g {
            return Err(FeedbackError::Shape(format!(
                "n has {} entries but g = {}",
                self.n.len(),
                self.g
            )));
        }
        for (j, k) in cfg.ms_iter() {
            let m = self.m[j][k];
            if m == 0 || m > cfg.ms_antennas {
                return Err(FeedbackError::OutOfRange(format!(
                    "m[{}][{}] = {m} not in 1..={}",
                    j + 1,
                    k + 1,
                    cfg.ms_antennas
                )));
            }
        }
        for (i, &n) in self.n.iter().enumerate() {
            if n == 0 || n > cfg.bs_antennas {
                return Err(FeedbackError::OutOfRange(format!(
                    "n[{}] = {n} not in 1..={}",
                    i + 1,
                    cfg.bs_antennas
                )));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profile serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}

/// `A_jk = m_jk − |B^II \ {j}|·Kd`. May be non-positive.
pub fn a_dim(profile: &FeedbackProfile, cfg: &NetworkConfig, j: usize, k: usize) -> i64 {
    profile.m(j, k) as i64 - (profile.type_two_others(cfg, j) * cfg.kd()) as i64
}

fn positive_a(profile: &FeedbackProfile, cfg: &NetworkConfig, j: usize, k: usize) -> Result<usize, FeedbackError> {
    let a = a_dim(profile, cfg, j, k);
    if a < 1 {
        Err(FeedbackError::NoReceiveDimensions { j, k, a })
    } else {
        Ok(a as usize)
    }
}

/// One factor `G(A, B)` of an MS's feedback: the direction of the
/// effective channel from `source`, a line (`A = 1`) in `C^B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrassmannFactor {
    pub source: usize,
    pub subspace_dim: usize,
    pub ambient_dim: usize,
}

impl GrassmannFactor {
    /// Manifold dimension `A·(B − A)`.
    pub fn dimension(&self) -> usize {
        self.subspace_dim * (self.ambient_dim - self.subspace_dim)
    }
}

/// The feedback tuple of MS `(j, k)`: one factor per type-I BS (ambient
/// `n_i·A_jk`), plus the direct link (ambient `Kd·A_jk`) when `j` is
/// type-II.
pub fn grassmann_tuple(
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
    j: usize,
    k: usize,
) -> Result<Vec<GrassmannFactor>, FeedbackError> {
    let a = positive_a(profile, cfg, j, k)?;
    let mut out: Vec<GrassmannFactor> = (0..profile.g)
        .map(|i| GrassmannFactor {
            source: i,
            subspace_dim: 1,
            ambient_dim: profile.n[i] * a,
        })
        .collect();
    if !profile.is_type_one(j) {
        out.push(GrassmannFactor {
            source: j,
            subspace_dim: 1,
            ambient_dim: cfg.kd() * a,
        });
    }
    Ok(out)
}

/// Total feedback dimension
/// `D = Σ_{j,k} Σ_{i<g} (n_i A_jk − 1) + Σ_{j≥g, k} (Kd A_jk − 1)`.
pub fn feedback_dimension(profile: &FeedbackProfile, cfg: &NetworkConfig) -> Result<u64, FeedbackError> {
    let n_sum: usize = profile.n.iter().sum();
    let mut total = 0u64;
    for (j, k) in cfg.ms_iter() {
        let a = positive_a(profile, cfg, j, k)?;
        total += (n_sum * a - profile.g) as u64;
        if !profile.is_type_one(j) {
            total += (cfg.kd() * a - 1) as u64;
        }
    }
    Ok(total)
}

/// Full-CDI dimension `G²K(MN − 1)`.
pub fn full_cdi_dimension(cfg: &NetworkConfig) -> u64 {
    (cfg.cells * cfg.cells * cfg.users * (cfg.ms_antennas * cfg.bs_antennas - 1)) as u64
}

/// `H^s`: the first `m_rows` receive and first `n_cols` transmit antennas.
pub fn csi_submatrix(h: &CMatrix, m_rows: usize, n_cols: usize) -> Result<CMatrix, FeedbackError> {
    if m_rows == 0 || n_cols == 0 || m_rows > h.rows() || n_cols > h.cols() {
        return Err(FeedbackError::OutOfRange(format!(
            "submatrix {m_rows}x{n_cols} of a {}x{} channel",
            h.rows(),
            h.cols()
        )));
    }
    Ok(h.top_left(m_rows, n_cols))
}

/// Fixed outer precoders `T_i^II ∈ U(N, Kd)` of the type-II BSs.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedOuterPrecoders {
    first: usize,
    t: Vec<CMatrix>,
}

impl FixedOuterPrecoders {
    /// Precoder of BS `i`, if it is type-II.
    pub fn get(&self, i: usize) -> Option<&CMatrix> {
        i.checked_sub(self.first).and_then(|idx| self.t.get(idx))
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &CMatrix)> {
        self.t.iter().enumerate().map(move |(idx, t)| (self.first + idx, t))
    }
}

/// One random semi-unitary `N × Kd` precoder per type-II BS, in BS order.
pub fn fixed_outer_precoders<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    profile: &FeedbackProfile,
    rng: &mut R,
) -> Result<FixedOuterPrecoders, FeedbackError> {
    if cfg.bs_antennas < cfg.kd() {
        return Err(FeedbackError::NoOuterPrecoder {
            n: cfg.bs_antennas,
            kd: cfg.kd(),
        });
    }
    let t = (profile.g..cfg.cells)
        .map(|_| random_semi_unitary(cfg.bs_antennas, cfg.kd(), rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FixedOuterPrecoders { first: profile.g, t })
}

/// A fed-back effective channel `H^e_{jk,i}` (unit Frobenius norm).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveLink {
    pub source: usize,
    pub h: CMatrix,
}

/// Filter output at one MS.
#[derive(Debug, Clone, PartialEq)]
pub struct MsCsi {
    /// `R_jk`, semi-unitary `m_jk × A_jk`.
    pub r: CMatrix,
    /// `A_jk`.
    pub a: usize,
    /// Effective channels in [`grassmann_tuple`] order.
    pub links: Vec<EffectiveLink>,
}

impl MsCsi {
    pub fn link(&self, source: usize) -> Option<&CMatrix> {
        self.links.iter().find(|l| l.source == source).map(|l| &l.h)
    }
}

/// Filter outputs of all MSs, indexed by [`NetworkConfig::ms_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCsi {
    pub ms: Vec<MsCsi>,
    users: usize,
}

impl EffectiveCsi {
    pub fn at(&self, j: usize, k: usize) -> &MsCsi {
        &self.ms[j * self.users + k]
    }

    /// `H^e_{jk,i}` when it is part of MS `(j, k)`'s feedback.
    pub fn he(&self, j: usize, k: usize, i: usize) -> Option<&CMatrix> {
        self.at(j, k).link(i)
    }

    pub fn a(&self, j: usize, k: usize) -> usize {
        self.at(j, k).a
    }

    /// Copy with every effective channel replaced by `f(ms_index, link)`.
    pub fn map_links(&self, mut f: impl FnMut(usize, &EffectiveLink) -> CMatrix) -> EffectiveCsi {
        EffectiveCsi {
            users: self.users,
            ms: self
                .ms
                .iter()
                .enumerate()
                .map(|(idx, ms)| MsCsi {
                    r: ms.r.clone(),
                    a: ms.a,
                    links: ms
                        .links
                        .iter()
                        .map(|l| EffectiveLink {
                            source: l.source,
                            h: f(idx, l),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Number of effective channels across all MSs.
    pub fn link_count(&self) -> usize {
        self.ms.iter().map(|m| m.links.len()).sum()
    }
}

fn normalized(h: CMatrix, j: usize, k: usize, a: usize) -> Result<CMatrix, FeedbackError> {
    let norm = h.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(FeedbackError::DegenerateChannel {
            j,
            k,
            expected: a,
            got: 0,
        });
    }
    Ok(h.scale_real(1.0 / norm))
}

/// Applies the CSI filters `F_jk` of `profile` to one channel realization.
pub fn apply_filter(
    channels: &ChannelSet,
    profile: &FeedbackProfile,
    t2: &FixedOuterPrecoders,
    cfg: &NetworkConfig,
) -> Result<EffectiveCsi, FeedbackError> {
    profile.validate(cfg)?;
    if t2.len() != cfg.cells - profile.g || (!t2.is_empty() && t2.first != profile.g) {
        return Err(FeedbackError::Shape(
            "fixed outer precoders do not match the type-II BS set".into(),
        ));
    }
    let mut ms = Vec::with_capacity(cfg.num_ms());
    for (j, k) in cfg.ms_iter() {
        let a = positive_a(profile, cfg, j, k)?;
        let m = profile.m(j, k);
        let interferers: Vec<CMatrix> = (profile.g..cfg.cells)
            .filter(|&i| i != j)
            .map(|i| {
                let hs = csi_submatrix(channels.h(j, k, i), m, cfg.bs_antennas)?;
                Ok(&hs * t2.get(i).expect("type-II precoder present"))
            })
            .collect::<Result<_, FeedbackError>>()?;
        let r = if interferers.is_empty() {
            CMatrix::identity(m)
        } else {
            left_null_space(&CMatrix::hstack(&interferers)?)
        };
        if r.cols() != a {
            return Err(FeedbackError::DegenerateChannel {
                j,
                k,
                expected: a,
                got: r.cols(),
            });
        }
        let mut links = Vec::with_capacity(profile.g + 1);
        for i in 0..profile.g {
            let hs = csi_submatrix(channels.h(j, k, i), m, profile.n[i])?;
            links.push(EffectiveLink {
                source: i,
                h: normalized(r.adjoint_mul(&hs), j, k, a)?,
            });
        }
        if !profile.is_type_one(j) {
            let hs = csi_submatrix(channels.h(j, k, j), m, cfg.bs_antennas)?;
            let t = t2.get(j).expect("type-II precoder present");
            links.push(EffectiveLink {
                source: j,
                h: normalized(&r.adjoint_mul(&hs) * t, j, k, a)?,
            });
        }
        ms.push(MsCsi { r, a, links });
    }
    Ok(EffectiveCsi {
        ms,
        users: cfg.users,
    })
}

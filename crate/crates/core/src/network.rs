//! Cellular topology and i.i.d. Rayleigh channel draws.
//!
//! Cells, users and antennas are 0-based in code. Everything printed or
//! serialized for humans uses 1-based labels, so BS `j` in code is
//! "BS j+1" in reports.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmatrix::{complex_gaussian, CMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("all of G, K, N, M, d must be positive (got G={g}, K={k}, N={n}, M={m}, d={d})")]
    NonPositive {
        g: usize,
        k: usize,
        n: usize,
        m: usize,
        d: usize,
    },
    #[error("M = {m} exceeds (G-1)Kd + d = {limit}: receivers could zero-force all intercell interference")]
    TooManyMsAntennas { m: usize, limit: usize },
    #[error("N = {n} is below Kd = {kd}")]
    TooFewBsAntennas { n: usize, kd: usize },
    #[error("d = {d} exceeds min(M, N) = {limit}")]
    TooManyStreams { d: usize, limit: usize },
}

/// The topology `(G, K, N, M, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Number of base stations, `G`.
    #[serde(rename = "G")]
    pub cells: usize,
    /// Mobile stations per base station, `K`.
    #[serde(rename = "K")]
    pub users: usize,
    /// Antennas per base station, `N`.
    #[serde(rename = "N")]
    pub bs_antennas: usize,
    /// Antennas per mobile station, `M`.
    #[serde(rename = "M")]
    pub ms_antennas: usize,
    /// Streams per mobile station, `d`.
    #[serde(rename = "d")]
    pub streams: usize,
}

impl NetworkConfig {
    pub fn new(cells: usize, users: usize, bs_antennas: usize, ms_antennas: usize, streams: usize) -> Self {
        NetworkConfig {
            cells,
            users,
            bs_antennas,
            ms_antennas,
            streams,
        }
    }

    /// Streams transmitted by one BS, `K·d`.
    pub fn kd(&self) -> usize {
        self.users * self.streams
    }

    /// Total number of mobile stations, `G·K`.
    pub fn num_ms(&self) -> usize {
        self.cells * self.users
    }

    /// Flat index of MS `(j, k)`.
    pub fn ms_index(&self, j: usize, k: usize) -> usize {
        j * self.users + k
    }

    /// Iterator over all `(j, k)` pairs in cell-major order.
    pub fn ms_iter(&self) -> impl Iterator<Item = (usize, usize)> {
        let users = self.users;
        (0..self.cells).flat_map(move |j| (0..users).map(move |k| (j, k)))
    }

    /// Sum DoF target `G·K·d`.
    pub fn sum_dof(&self) -> usize {
        self.cells * self.kd()
    }

    /// Checks the operating regime this crate targets:
    /// `M ≤ (G−1)Kd + d`, `N ≥ Kd`, `d ≤ min(M, N)`.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (g, k, n, m, d) = (
            self.cells,
            self.users,
            self.bs_antennas,
            self.ms_antennas,
            self.streams,
        );
        if g == 0 || k == 0 || n == 0 || m == 0 || d == 0 {
            return Err(ConfigError::NonPositive { g, k, n, m, d });
        }
        let limit = (g - 1) * k * d + d;
        if m > limit {
            return Err(ConfigError::TooManyMsAntennas { m, limit });
        }
        if n < k * d {
            return Err(ConfigError::TooFewBsAntennas { n, kd: k * d });
        }
        if d > m.min(n) {
            return Err(ConfigError::TooManyStreams { d, limit: m.min(n) });
        }
        Ok(())
    }
}

/// Free-function form of [`NetworkConfig::validate`].
pub fn validate_config(cfg: &NetworkConfig) -> Result<(), ConfigError> {
    cfg.validate()
}

/// All channel matrices `H_{jk,i} ∈ C^{M×N}` of one fading realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    cells: usize,
    users: usize,
    h: Vec<CMatrix>,
}

impl ChannelSet {
    /// Wraps matrices given in `(j, k, i)` lexicographic order.
    pub fn from_matrices(cfg: &NetworkConfig, h: Vec<CMatrix>) -> Self {
        assert_eq!(h.len(), cfg.num_ms() * cfg.cells);
        assert!(h
            .iter()
            .all(|m| m.shape() == (cfg.ms_antennas, cfg.bs_antennas)));
        ChannelSet {
            cells: cfg.cells,
            users: cfg.users,
            h,
        }
    }

    /// Channel from BS `i` to MS `(j, k)`.
    pub fn h(&self, j: usize, k: usize, i: usize) -> &CMatrix {
        &self.h[(j * self.users + k) * self.cells + i]
    }

    pub fn h_mut(&mut self, j: usize, k: usize, i: usize) -> &mut CMatrix {
        &mut self.h[(j * self.users + k) * self.cells + i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CMatrix> {
        self.h.iter()
    }
}

/// Draws every entry of every `H_{jk,i}` i.i.d. `CN(0, 1)`, in `(j, k, i)`
/// lexicographic order and row-major within each matrix.
pub fn draw_channels<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<ChannelSet, ConfigError> {
    cfg.validate()?;
    let count = cfg.num_ms() * cfg.cells;
    let h = (0..count)
        .map(|_| complex_gaussian(cfg.ms_antennas, cfg.bs_antennas, rng))
        .collect();
    Ok(ChannelSet {
        cells: cfg.cells,
        users: cfg.users,
        h,
    })
}

//! Limited-feedback quantization of effective CSI.
//!
//! Each effective channel is reported as a direction: `h = vec(H)/‖H‖` is
//! mapped to the codeword `ĉ` with the largest `|⟨ĉ, h⟩|` in a random
//! vector quantization (RVQ) codebook. With `C = ⟨ĥ, h⟩`,
//! `h = C·ĥ + Δ` and `Δ ⟂ ĥ`, so the distortion is
//! `‖Δ‖² = 1 − |C|²`.
//!
//! Codebooks of up to [`EXHAUSTIVE_MAX_BITS`] bits are built and searched
//! explicitly. Larger ones (a `B = 16` channel at 7 bits per dimension
//! needs 105 bits) are handled by [`rvq_sample`], which draws the
//! quantizer output directly from its exact distribution.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::cmatrix::{vec_normalize, CMatrix, LinalgError, C64};
use crate::feedback::{feedback_dimension, EffectiveCsi, FeedbackError, FeedbackProfile};
use crate::network::NetworkConfig;
use crate::rng::stream;

/// Largest codebook that [`build_codebook`] will allocate.
pub const MAX_CODEBOOK_BITS: u32 = 24;

/// Codebooks at or below this size are searched exhaustively by
/// [`quantize_feedback`]; larger ones use [`rvq_sample`].
pub const EXHAUSTIVE_MAX_BITS: u64 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizeError {
    #[error("codebook of 2^{bits} entries exceeds the limit 2^{MAX_CODEBOOK_BITS}")]
    TooManyBits { bits: u32 },
    #[error("ambient dimension must be at least 1")]
    EmptyDimension,
    #[error("matrix has {got} entries, codebook dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("feedback dimension is zero; there is nothing to spend bits on")]
    NoFeedback,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
}

/// `2^bits` unit vectors in `C^B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dim: usize,
    bits: u32,
    entries: Vec<Vec<C64>>,
}

impl Codebook {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn entries(&self) -> &[Vec<C64>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Uniform unit vector on the complex sphere in `C^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let mut v = gaussian_vector(dim, rng);
        if v.iter().any(|x| x.norm_sqr() > 0.0) {
            normalize(&mut v);
            return v;
        }
    }
}

/// RVQ codebook of `2^bits` i.i.d. uniform unit vectors.
pub fn build_codebook<R: Rng + ?Sized>(dim: usize, bits: u32, rng: &mut R) -> Result<Codebook, QuantizeError> {
    if bits > MAX_CODEBOOK_BITS {
        return Err(QuantizeError::TooManyBits { bits });
    }
    if dim == 0 {
        return Err(QuantizeError::EmptyDimension);
    }
    let entries = (0..1usize << bits).map(|_| random_unit_vector(dim, rng)).collect();
    Ok(Codebook { dim, bits, entries })
}

/// One quantized effective channel.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedCsi {
    /// Codeword index; `None` when the output was drawn by [`rvq_sample`].
    pub index: Option<usize>,
    /// `Ĥ`, unit Frobenius norm, phase-aligned so `⟨ĥ, h⟩ > 0`.
    pub reconstructed: CMatrix,
    /// `‖Δ‖² = 1 − |⟨ĥ, h⟩|²`.
    pub distortion: f64,
}

fn aligned(h: &[C64], c: &[C64]) -> (Vec<C64>, f64) {
    let ip = inner(c, h);
    let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
    let v: Vec<C64> = c.iter().map(|x| x * phase).collect();
    (v, (1.0 - ip.norm_sqr()).max(0.0))
}

/// Nearest codeword in chordal distance; ties go to the lowest index.
pub fn quantize_matrix(h: &CMatrix, cb: &Codebook) -> Result<QuantizedCsi, QuantizeError> {
    let n = h.rows() * h.cols();
    if n != cb.dim {
        return Err(QuantizeError::DimensionMismatch { expected: cb.dim, got: n });
    }
    let (hv, _) = vec_normalize(h)?;
    let mut best = (0usize, -1.0f64);
    for (idx, c) in cb.entries.iter().enumerate() {
        let a = inner(c, &hv).norm_sqr();
        if a > best.1 {
            best = (idx, a);
        }
    }
    let (v, distortion) = aligned(&hv, &cb.entries[best.0]);
    Ok(QuantizedCsi {
        index: Some(best.0),
        reconstructed: CMatrix::unvec(h.rows(), h.cols(), &v),
        distortion,
    })
}

/// Distortion of the best of `2^bits` random codewords in `C^dim`,
/// sampled by inverting its CDF `1 − (1 − z^{dim−1})^{2^bits}`.
pub fn rvq_distortion<R: Rng + ?Sized>(dim: usize, bits: u64, rng: &mut R) -> f64 {
    if dim <= 1 {
        return 0.0;
    }
    let u: f64 = rng.random();
    // 1 − (1 − u)^{2^-bits}, without cancellation for large `bits`.
    let tail = -((-u).ln_1p() * (-(bits as f64)).exp2()).exp_m1();
    tail.powf(1.0 / (dim - 1) as f64)
}

/// RVQ output drawn from its exact distribution: the best codeword makes
/// a chordal distance `Z` (see [`rvq_distortion`]) with `h`, and its
/// component orthogonal to `h` points in a uniform direction.
pub fn rvq_sample<R: Rng + ?Sized>(h: &CMatrix, bits: u64, rng: &mut R) -> Result<QuantizedCsi, QuantizeError> {
    let (hv, _) = vec_normalize(h)?;
    let dim = hv.len();
    if dim == 1 {
        return Ok(QuantizedCsi {
            index: None,
            reconstructed: CMatrix::unvec(h.rows(), h.cols(), &hv),
            distortion: 0.0,
        });
    }
    let z = rvq_distortion(dim, bits, rng);
    let s = loop {
        let mut g = gaussian_vector(dim, rng);
        let p = inner(&hv, &g);
        g.iter_mut().zip(&hv).for_each(|(x, y)| *x -= y * p);
        if g.iter().map(|x| x.norm_sqr()).sum::<f64>() > 1e-20 {
            normalize(&mut g);
            break g;
        }
    };
    let (a, b) = ((1.0 - z).sqrt(), z.sqrt());
    let mut v: Vec<C64> = hv.iter().zip(&s).map(|(x, y)| x * a + y * b).collect();
    normalize(&mut v);
    let (v, distortion) = aligned(&hv, &v);
    Ok(QuantizedCsi {
        index: None,
        reconstructed: CMatrix::unvec(h.rows(), h.cols(), &v),
        distortion,
    })
}

/// Model distortion `(B − 1)·2^{−b}` for `b` bits per dimension.
pub fn expected_distortion(ambient_dim: usize, bits_per_dim: f64) -> f64 {
    (ambient_dim as f64 - 1.0) * (-bits_per_dim).exp2()
}

/// Quantized effective CSI for one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedFeedback {
    pub eff: EffectiveCsi,
    /// Bits per feedback dimension, `⌊B_tot / D⌋`.
    pub bits_per_dim: u64,
    /// Bits actually used, `b·D`.
    pub bits_used: u64,
    /// `‖Δ‖²` per effective channel, in MS order then link order.
    pub distortions: Vec<f64>,
}

/// Bits per feedback dimension for a total budget.
pub fn bits_per_dimension(total_bits: u64, profile: &FeedbackProfile, cfg: &NetworkConfig) -> Result<u64, QuantizeError> {
    let dim = feedback_dimension(profile, cfg)?;
    if dim == 0 {
        return Err(QuantizeError::NoFeedback);
    }
    Ok(total_bits / dim)
}

/// Quantizes every effective channel with `b·(B − 1)` bits, where
/// `b = ⌊B_tot / D(L)⌋`. Channel `c` (in MS, then link order) uses the
/// random stream `(seed, "quantize", c)`.
pub fn quantize_feedback(
    eff: &EffectiveCsi,
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
    total_bits: u64,
    seed: u64,
) -> Result<QuantizedFeedback, QuantizeError> {
    let b = bits_per_dimension(total_bits, profile, cfg)?;
    quantize_with_bits(eff, profile, cfg, b, seed)
}

/// [`quantize_feedback`] with `b` given directly.
pub fn quantize_with_bits(
    eff: &EffectiveCsi,
    profile: &FeedbackProfile,
    cfg: &NetworkConfig,
    bits_per_dim: u64,
    seed: u64,
) -> Result<QuantizedFeedback, QuantizeError> {
    let dim = feedback_dimension(profile, cfg)?;
    let mut distortions = Vec::with_capacity(eff.link_count());
    let mut failure = None;
    let mut counter = 0u64;
    let quantized = eff.map_links(|_, link| {
        let mut rng = stream(seed, "quantize", counter);
        counter += 1;
        let ambient = link.h.rows() * link.h.cols();
        let bits = bits_per_dim.saturating_mul(ambient as u64 - 1);
        let out = if bits <= EXHAUSTIVE_MAX_BITS {
            build_codebook(ambient, bits as u32, &mut rng).and_then(|cb| quantize_matrix(&link.h, &cb))
        } else {
            rvq_sample(&link.h, bits, &mut rng)
        };
        match out {
            Ok(q) => {
                distortions.push(q.distortion);
                q.reconstructed
            }
            Err(e) => {
                failure.get_or_insert(e);
                link.h.clone()
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(QuantizedFeedback {
        eff: quantized,
        bits_per_dim,
        bits_used: bits_per_dim * dim,
        distortions,
    })
}

//! Probe/target collision model: after the encounter the pair is in
//! `α|free⟩P⊗|free⟩T + β|scatt⟩P⊗|scatt⟩T`.
//!
//! Basis order is `(free_P, free_T), (free_P, scatt_T), (scatt_P, free_T),
//! (scatt_P, scatt_T)`; `|free⟩` and `|scatt⟩` are orthonormal for each
//! particle.

use num_complex::Complex64;
use thiserror::Error;

use crate::qstate::{xlnx, ComplexAmplitude, NEGATIVE_CLAMP};

pub const DICKE_NORM_TOL: f64 = 1e-12;
/// Null results with probability at or below this cannot be conditioned on.
pub const MIN_NULL_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DickeError {
    #[error("invalid branch amplitudes: |alpha|^2 + |beta|^2 = {0}, expected 1")]
    InvalidConfig(f64),
    #[error("null result has probability {0:e}; cannot condition on it")]
    ZeroProbability(f64),
}

pub type Result<T> = std::result::Result<T, DickeError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeConfig {
    alpha: ComplexAmplitude,
    beta: ComplexAmplitude,
}

impl DickeConfig {
    pub fn new(alpha: ComplexAmplitude, beta: ComplexAmplitude) -> Result<Self> {
        let total = alpha.norm_sqr() + beta.norm_sqr();
        if !total.is_finite() || (total - 1.0).abs() > DICKE_NORM_TOL {
            return Err(DickeError::InvalidConfig(total));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> ComplexAmplitude {
        self.alpha
    }

    pub fn beta(&self) -> ComplexAmplitude {
        self.beta
    }
}

/// One particle's branch label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Free,
    Scattered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeState {
    amps: [Complex64; 4],
}

impl DickeState {
    pub fn amps(&self) -> &[Complex64; 4] {
        &self.amps
    }

    pub fn amp(&self, probe: Branch, target: Branch) -> Complex64 {
        self.amps[Self::index(probe, target)]
    }

    fn index(probe: Branch, target: Branch) -> usize {
        let bit = |b| match b {
            Branch::Free => 0,
            Branch::Scattered => 1,
        };
        2 * bit(probe) + bit(target)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn dicke_state(cfg: &DickeConfig) -> Result<DickeState> {
    let cfg = DickeConfig::new(cfg.alpha, cfg.beta)?;
    let zero = Complex64::new(0.0, 0.0);
    Ok(DickeState {
        amps: [cfg.alpha, zero, zero, cfg.beta],
    })
}

/// Target state and outcome probability after no scattering is registered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullResult {
    /// `(free_T, scatt_T)` amplitudes, normalized.
    pub target: [Complex64; 2],
    pub probability: f64,
}

impl NullResult {
    /// |⟨free_T|target⟩|².
    pub fn overlap_with_free(&self) -> f64 {
        self.target[0].norm_sqr()
    }
}

/// Projects the probe onto `|free⟩P` and renormalizes the target.
pub fn condition_on_null(s: &DickeState) -> Result<NullResult> {
    let raw = [
        s.amp(Branch::Free, Branch::Free),
        s.amp(Branch::Free, Branch::Scattered),
    ];
    let probability: f64 = raw.iter().map(|a| a.norm_sqr()).sum();
    if probability <= MIN_NULL_PROBABILITY {
        return Err(DickeError::ZeroProbability(probability));
    }
    let norm = probability.sqrt();
    let mut target = raw.map(|a| a / norm);
    // Drop the global phase of the leading component.
    if let Some(lead) = target.iter().copied().find(|a| a.norm() > 1e-12) {
        let phase = lead.conj() / lead.norm();
        target.iter_mut().for_each(|a| *a *= phase);
    }
    Ok(NullResult {
        target,
        probability,
    })
}

/// Closed form: the state is already in Schmidt form, so the entropy is the
/// binary entropy of `(|α|², |β|²)`.
pub fn dicke_entanglement(cfg: &DickeConfig) -> f64 {
    -xlnx(cfg.alpha.norm_sqr()) - xlnx(cfg.beta.norm_sqr())
}

/// Entropy from the 2×2 reduced density matrix of the target.
pub fn dicke_entanglement_numeric(s: &DickeState) -> f64 {
    let a = &s.amps;
    // ρ_T[i][j] = Σ_p a[p, i] a[p, j]*
    let r00: f64 = a[0].norm_sqr() + a[2].norm_sqr();
    let r11: f64 = a[1].norm_sqr() + a[3].norm_sqr();
    let r01 = a[0] * a[1].conj() + a[2] * a[3].conj();
    // Eigenvalues of a 2×2 Hermitian matrix.
    let mean = 0.5 * (r00 + r11);
    let half_gap = (0.25 * (r00 - r11).powi(2) + r01.norm_sqr()).sqrt();
    let lambdas = [mean + half_gap, mean - half_gap];
    lambdas
        .iter()
        .map(|&l| {
            if (-NEGATIVE_CLAMP..0.0).contains(&l) {
                0.0
            } else {
                l
            }
        })
        .map(|l| -xlnx(l))
        .sum::<f64>()
        .max(0.0)
}

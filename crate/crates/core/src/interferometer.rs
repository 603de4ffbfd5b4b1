//! Staged evolution of a single photon through a Mach-Zehnder interferometer
//! with a quantum object sitting in a superposition of the two arms.
//!
//! Stages: preparation, first beam splitter, photon/object interaction,
//! mirrors, second beam splitter. The photon exits toward the light detector
//! (LD, the `ONE_X` sector) or the dark detector (DD, the `ONE_Y` sector), or
//! has been absorbed (`VAC` sector, object excited).

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::qstate::{
    basis_index, entanglement_entropy, overlap_squared, xlnx, ComplexAmplitude, JointState,
    ObjectState, ObjectVector, PhotonMode, QStateError, Subsystem, JOINT_DIM, PHOTON_DIM,
};

/// Tolerance on `|α|² + |β|² = 1` and `|γ|² + |δ|² = 1`.
pub const COEFF_NORM_TOL: f64 = 1e-12;
/// Outcomes with probability at or below this cannot be post-selected.
pub const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterferometerError {
    #[error("invalid object superposition: |alpha|^2 + |beta|^2 = {0}, expected 1")]
    InvalidConfig(f64),
    #[error("invalid interaction channel: |gamma|^2 + |delta|^2 = {0}, expected 1")]
    InvalidSpec(f64),
    #[error("gamma = {0} is outside [0, 1]")]
    GammaOutOfRange(f64),
    #[error("outcome {outcome} has probability {probability:e}; cannot condition on it")]
    ZeroProbability { outcome: Outcome, probability: f64 },
    #[error(transparent)]
    State(#[from] QStateError),
}

pub type Result<T> = std::result::Result<T, InterferometerError>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_finite(values: &[Complex64], err: impl Fn(f64) -> InterferometerError) -> Result<()> {
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(err(f64::NAN));
    }
    Ok(())
}

/// Object superposition `α|GX⟩ + β|GY⟩` before the photon enters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EVConfig {
    alpha: ComplexAmplitude,
    beta: ComplexAmplitude,
}

impl EVConfig {
    pub fn new(alpha: ComplexAmplitude, beta: ComplexAmplitude) -> Result<Self> {
        check_finite(&[alpha, beta], InterferometerError::InvalidConfig)?;
        let total = alpha.norm_sqr() + beta.norm_sqr();
        if (total - 1.0).abs() > COEFF_NORM_TOL {
            return Err(InterferometerError::InvalidConfig(total));
        }
        Ok(Self { alpha, beta })
    }

    /// Real nonnegative amplitudes with `|α| = modulus`, `β = √(1 − |α|²)`.
    pub fn from_alpha_modulus(modulus: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&modulus) {
            return Err(InterferometerError::InvalidConfig(modulus * modulus));
        }
        let beta = (1.0 - modulus * modulus).max(0.0).sqrt();
        Self::new(c(modulus, 0.0), c(beta, 0.0))
    }

    /// The original bomb-tester preparation: object certainly in region Y.
    pub fn elitzur_vaidman() -> Self {
        Self {
            alpha: c(0.0, 0.0),
            beta: c(1.0, 0.0),
        }
    }

    pub fn alpha(&self) -> ComplexAmplitude {
        self.alpha
    }

    pub fn beta(&self) -> ComplexAmplitude {
        self.beta
    }

    /// `α|GX⟩ + β|GY⟩`.
    pub fn object_vector(&self) -> ObjectVector {
        ObjectVector::new([self.alpha, self.beta, c(0.0, 0.0), c(0.0, 0.0)])
    }
}

/// Photon/object coupling: on a matching arm and region the ground-state
/// object passes the photon with amplitude `γ` or absorbs it with `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionSpec {
    gamma: ComplexAmplitude,
    delta: ComplexAmplitude,
}

impl InteractionSpec {
    pub fn new(gamma: ComplexAmplitude, delta: ComplexAmplitude) -> Result<Self> {
        check_finite(&[gamma, delta], InterferometerError::InvalidSpec)?;
        let total = gamma.norm_sqr() + delta.norm_sqr();
        if (total - 1.0).abs() > COEFF_NORM_TOL {
            return Err(InterferometerError::InvalidSpec(total));
        }
        Ok(Self { gamma, delta })
    }

    /// Real `γ ∈ [0, 1]` with `δ = √(1 − γ²)`.
    pub fn from_real_gamma(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(InterferometerError::GammaOutOfRange(gamma));
        }
        let delta = (1.0 - gamma * gamma).max(0.0).sqrt();
        Self::new(c(gamma, 0.0), c(delta, 0.0))
    }

    /// Perfect absorber (`γ = 0`, `δ = 1`).
    pub fn absorbing() -> Self {
        Self {
            gamma: c(0.0, 0.0),
            delta: c(1.0, 0.0),
        }
    }

    /// Empty arms (`γ = 1`, `δ = 0`).
    pub fn transparent() -> Self {
        Self {
            gamma: c(1.0, 0.0),
            delta: c(0.0, 0.0),
        }
    }

    pub fn gamma(&self) -> ComplexAmplitude {
        self.gamma
    }

    pub fn delta(&self) -> ComplexAmplitude {
        self.delta
    }
}

/// Joint state after each optical element.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    pub psi0: JointState,
    pub psi1: JointState,
    pub psi2: JointState,
    pub psi3: JointState,
    pub psi_final: JointState,
}

impl StageTrace {
    pub fn stages(&self) -> [(&'static str, &JointState); 5] {
        [
            ("psi0", &self.psi0),
            ("psi1", &self.psi1),
            ("psi2", &self.psi2),
            ("psi3", &self.psi3),
            ("psi_final", &self.psi_final),
        ]
    }
}

/// Detector outcome of one photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Outcome {
    #[serde(rename = "LD")]
    Ld,
    #[serde(rename = "DD")]
    Dd,
    #[serde(rename = "ABS")]
    Abs,
}

impl Outcome {
    /// Fixed ordering used everywhere outcomes are enumerated.
    pub const ALL: [Outcome; 3] = [Outcome::Ld, Outcome::Dd, Outcome::Abs];

    pub fn photon_mode(self) -> PhotonMode {
        match self {
            Outcome::Ld => PhotonMode::OneX,
            Outcome::Dd => PhotonMode::OneY,
            Outcome::Abs => PhotonMode::Vac,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Ld => "LD",
            Outcome::Dd => "DD",
            Outcome::Abs => "ABS",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Probabilities of the three outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorDistribution {
    pub p_ld: f64,
    pub p_dd: f64,
    pub p_abs: f64,
}

impl DetectorDistribution {
    pub fn probability(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Ld => self.p_ld,
            Outcome::Dd => self.p_dd,
            Outcome::Abs => self.p_abs,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_ld + self.p_dd + self.p_abs
    }
}

/// Initial product state `|1x0y⟩ ⊗ (α|GX⟩ + β|GY⟩)`.
pub fn initial_state(cfg: &EVConfig) -> Result<JointState> {
    let cfg = EVConfig::new(cfg.alpha, cfg.beta)?;
    let photon = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
    Ok(JointState::product(&photon, &cfg.object_vector())?)
}

/// Balanced beam splitter with an `i` phase on reflection; vacuum untouched.
fn beam_splitter_operator() -> [[Complex64; PHOTON_DIM]; PHOTON_DIM] {
    let t = c(FRAC_1_SQRT_2, 0.0);
    let r = c(0.0, FRAC_1_SQRT_2);
    let z = c(0.0, 0.0);
    // Rows/columns in ONE_X, ONE_Y, VAC order.
    [[t, r, z], [r, t, z], [z, z, c(1.0, 0.0)]]
}

pub fn apply_bs1(s: &JointState) -> JointState {
    s.apply_photon_operator(&beam_splitter_operator())
}

/// Second beam splitter; same transmission and phase rule as the first.
pub fn apply_bs2(s: &JointState) -> JointState {
    s.apply_photon_operator(&beam_splitter_operator())
}

/// Mirrors swap the arms with a sign: `|1x0y⟩ → −|0x1y⟩`, `|0x1y⟩ → −|1x0y⟩`.
pub fn apply_mirrors(s: &JointState) -> JointState {
    let z = c(0.0, 0.0);
    let m = c(-1.0, 0.0);
    s.apply_photon_operator(&[[z, m, z], [m, z, z], [z, z, c(1.0, 0.0)]])
}

/// Local photon/object coupling.
///
/// `(ONE_X, GX) → γ(ONE_X, GX) + δ(VAC, EX)` and
/// `(ONE_Y, GY) → γ(ONE_Y, GY) + δ(VAC, EY)`. Every other basis vector is
/// fixed. The excited/vacuum partners `(VAC, EX)`, `(VAC, EY)` are fed only
/// by this map, so it is applied as a 2×2 unitary
/// `[[γ, −δ*], [δ, γ*]]` on each of the two coupled pairs.
pub fn apply_interaction(s: &JointState, spec: &InteractionSpec) -> Result<JointState> {
    let spec = InteractionSpec::new(spec.gamma, spec.delta)?;
    let (g, d) = (spec.gamma, spec.delta);
    let mut amps = *s.amps();
    let pairs = [
        (
            basis_index(PhotonMode::OneX, ObjectState::GX),
            basis_index(PhotonMode::Vac, ObjectState::EX),
        ),
        (
            basis_index(PhotonMode::OneY, ObjectState::GY),
            basis_index(PhotonMode::Vac, ObjectState::EY),
        ),
    ];
    for (ground, excited) in pairs {
        let a = amps[ground];
        let b = amps[excited];
        amps[ground] = g * a - d.conj() * b;
        amps[excited] = d * a + g.conj() * b;
    }
    Ok(JointState::from_unitary_image(amps))
}

/// Runs every stage and records the intermediate states.
pub fn run_ev(cfg: &EVConfig, spec: &InteractionSpec) -> Result<StageTrace> {
    let psi0 = initial_state(cfg)?;
    let psi1 = apply_bs1(&psi0);
    let psi2 = apply_interaction(&psi1, spec)?;
    let psi3 = apply_mirrors(&psi2);
    let psi_final = apply_bs2(&psi3);
    Ok(StageTrace {
        psi0,
        psi1,
        psi2,
        psi3,
        psi_final,
    })
}

pub fn detector_probabilities(s_final: &JointState) -> DetectorDistribution {
    let weight = |outcome: Outcome| -> f64 {
        s_final
            .photon_sector(outcome.photon_mode())
            .iter()
            .map(|a| a.norm_sqr())
            .sum()
    };
    DetectorDistribution {
        p_ld: weight(Outcome::Ld),
        p_dd: weight(Outcome::Dd),
        p_abs: weight(Outcome::Abs),
    }
}

/// Object state left behind after the detector reports `outcome`.
///
/// The result is normalized, with the global phase fixed so its first
/// nonzero component is real and positive.
pub fn conditional_object_state(s_final: &JointState, outcome: Outcome) -> Result<ObjectVector> {
    let sector = ObjectVector::new(s_final.photon_sector(outcome.photon_mode()));
    let probability = sector.norm().powi(2);
    if probability <= MIN_OUTCOME_PROBABILITY {
        return Err(InterferometerError::ZeroProbability {
            outcome,
            probability,
        });
    }
    let normalized = sector.normalized()?;
    Ok(normalized.with_canonical_phase(1e-12))
}

/// Closed form of the before/after object correlation on a DD click,
/// `(|α|² − |β|²)²`.
pub fn correlation_c(cfg: &EVConfig) -> f64 {
    (cfg.alpha.norm_sqr() - cfg.beta.norm_sqr()).powi(2)
}

/// The same correlation obtained from the simulated pipeline: post-select DD
/// on the absorbing run and overlap with the initial object state.
pub fn post_selected_correlation(cfg: &EVConfig) -> Result<f64> {
    let trace = run_ev(cfg, &InteractionSpec::absorbing())?;
    let after = conditional_object_state(&trace.psi_final, Outcome::Dd)?;
    Ok(overlap_squared(&after, &cfg.object_vector())?)
}

/// Closed-form entanglement and the value computed through
/// partial trace + eigensolver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementPair {
    pub closed: f64,
    pub numeric: f64,
}

impl EntanglementPair {
    pub fn discrepancy(&self) -> f64 {
        (self.closed - self.numeric).abs()
    }
}

/// `ln 2 − |α|² ln|α| − (1 − |α|²) ln √(1 − |α|²)` for the perfect absorber.
pub fn entropy_closed_alpha(alpha_modulus: f64) -> f64 {
    let a2 = alpha_modulus * alpha_modulus;
    // |α|² ln|α| = ½ |α|² ln|α|², written through xlnx so |α| = 0 or 1 is exact.
    LN_2 - 0.5 * xlnx(a2) - 0.5 * xlnx(1.0 - a2)
}

/// `ln 2 − (1 + γ²) ln √(1 + γ²) − (1 − γ²) ln √(1 − γ²)`.
pub fn entropy_closed_gamma(gamma_modulus: f64) -> f64 {
    let g2 = gamma_modulus * gamma_modulus;
    let up = 0.5 * (1.0 + g2) * g2.ln_1p();
    let down = if g2 >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 - g2) * (-g2).ln_1p()
    };
    LN_2 - up - down
}

pub fn entanglement_alpha(cfg: &EVConfig) -> Result<EntanglementPair> {
    let trace = run_ev(cfg, &InteractionSpec::absorbing())?;
    Ok(EntanglementPair {
        closed: entropy_closed_alpha(cfg.alpha.norm()),
        numeric: entanglement_entropy(&trace.psi_final, Subsystem::Photon)?,
    })
}

/// Entanglement of the partial-absorber run from the bomb-tester preparation.
pub fn entanglement_gamma(gamma: f64) -> Result<EntanglementPair> {
    let spec = InteractionSpec::from_real_gamma(gamma)?;
    let trace = run_ev(&EVConfig::elitzur_vaidman(), &spec)?;
    Ok(EntanglementPair {
        closed: entropy_closed_gamma(gamma),
        numeric: entanglement_entropy(&trace.psi_final, Subsystem::Photon)?,
    })
}

/// Numeric entanglement of an arbitrary final state, photon side.
pub fn final_entanglement(trace: &StageTrace) -> Result<f64> {
    Ok(entanglement_entropy(&trace.psi_final, Subsystem::Photon)?)
}

/// Builds a joint state from `(photon, object, amplitude)` terms without
/// normalizing. Used by tests to transcribe printed states.
#[doc(hidden)]
pub fn joint_from_terms(terms: &[(PhotonMode, ObjectState, Complex64)]) -> [Complex64; JOINT_DIM] {
    let mut amps = [c(0.0, 0.0); JOINT_DIM];
    for &(p, o, a) in terms {
        amps[basis_index(p, o)] += a;
    }
    amps
}

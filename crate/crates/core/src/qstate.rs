//! Dense complex linear algebra for the photon ⊗ object Hilbert space.
//!
//! The joint space is the tensor product of a 3-level photon register
//! (`ONE_X`, `ONE_Y`, `VAC`) and a 4-level object register (`GX`, `GY`,
//! `EX`, `EY`). Amplitudes are stored row-major: photon index major, object
//! index minor, so `(photon, object)` lives at `4 * photon + object`.
//!
//! Everything here is a pure function over immutable values.

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

/// Scalar field of every state in the crate.
pub type ComplexAmplitude = Complex64;

/// Dimension of the photon register.
pub const PHOTON_DIM: usize = 3;
/// Dimension of the object register.
pub const OBJECT_DIM: usize = 4;
/// Dimension of the joint register.
pub const JOINT_DIM: usize = PHOTON_DIM * OBJECT_DIM;

/// Tolerance for the unit-norm invariant of a freshly normalized state.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance accepted by [`overlap_squared`] for its normalized inputs.
pub const OVERLAP_NORM_TOL: f64 = 1e-9;
/// Hermiticity tolerance accepted by the eigensolver.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance accepted by [`von_neumann_entropy`].
pub const SPECTRUM_TRACE_TOL: f64 = 1e-9;
/// Eigenvalues in `[-NEGATIVE_CLAMP, 0)` are treated as rounding noise.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QStateError {
    #[error("every amplitude is zero; the state cannot be normalized")]
    AllZero,
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("expected {expected} amplitudes, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("vector norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix dimension {0} is not supported (expected 3 or 4)")]
    BadDimension(usize),
    #[error("density matrix trace {0} is not 1")]
    BadTrace(f64),
    #[error("density matrix has negative eigenvalue {0}")]
    NotPositive(f64),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("Jacobi iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, QStateError>;

/// Photon occupation of the two interferometer directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PhotonMode {
    /// `|1x0y⟩`: one photon travelling along x.
    #[serde(rename = "ONE_X")]
    OneX,
    /// `|0x1y⟩`: one photon travelling along y.
    #[serde(rename = "ONE_Y")]
    OneY,
    /// `|0x0y⟩`: the photon has been absorbed.
    #[serde(rename = "VAC")]
    Vac,
}

impl PhotonMode {
    pub const ALL: [PhotonMode; PHOTON_DIM] = [PhotonMode::OneX, PhotonMode::OneY, PhotonMode::Vac];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            PhotonMode::OneX => "ONE_X",
            PhotonMode::OneY => "ONE_Y",
            PhotonMode::Vac => "VAC",
        }
    }
}

impl fmt::Display for PhotonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Internal level (ground/excited) and location (region X/Y) of the object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ObjectState {
    #[serde(rename = "GX")]
    GX,
    #[serde(rename = "GY")]
    GY,
    #[serde(rename = "EX")]
    EX,
    #[serde(rename = "EY")]
    EY,
}

impl ObjectState {
    pub const ALL: [ObjectState; OBJECT_DIM] = [
        ObjectState::GX,
        ObjectState::GY,
        ObjectState::EX,
        ObjectState::EY,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            ObjectState::GX => "GX",
            ObjectState::GY => "GY",
            ObjectState::EX => "EX",
            ObjectState::EY => "EY",
        }
    }
}

impl fmt::Display for ObjectState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Flat index of a `(photon, object)` basis vector.
pub fn basis_index(photon: PhotonMode, object: ObjectState) -> usize {
    photon.index() * OBJECT_DIM + object.index()
}

/// Inverse of [`basis_index`].
pub fn basis_label(index: usize) -> (PhotonMode, ObjectState) {
    assert!(index < JOINT_DIM, "basis index {index} out of range");
    (
        PhotonMode::ALL[index / OBJECT_DIM],
        ObjectState::ALL[index % OBJECT_DIM],
    )
}

/// Which factor of the bipartite system to keep in a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Photon,
    Object,
}

fn norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn check_finite(amps: &[Complex64]) -> Result<()> {
    match amps
        .iter()
        .position(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        Some(index) => Err(QStateError::NonFinite { index }),
        None => Ok(()),
    }
}

/// Normalized amplitude vector over the 12-dimensional joint basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    amps: [Complex64; JOINT_DIM],
}

impl JointState {
    /// Builds a state from raw amplitudes, rescaling to unit norm.
    ///
    /// Relative phases and magnitudes are preserved.
    pub fn new(amps: [Complex64; JOINT_DIM]) -> Result<Self> {
        check_finite(&amps)?;
        let norm = norm_sqr(&amps).sqrt();
        if norm == 0.0 {
            return Err(QStateError::AllZero);
        }
        if !norm.is_finite() {
            // Overflowed; rescale by the largest component first.
            let peak = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
            let scaled = amps.map(|a| a / peak);
            return Self::new(scaled);
        }
        Ok(Self {
            amps: amps.map(|a| a / norm),
        })
    }

    /// Same as [`JointState::new`] for a slice of length 12.
    pub fn from_slice(amps: &[Complex64]) -> Result<Self> {
        let arr: [Complex64; JOINT_DIM] =
            amps.try_into().map_err(|_| QStateError::WrongLength {
                expected: JOINT_DIM,
                got: amps.len(),
            })?;
        Self::new(arr)
    }

    /// The normalized basis vector `|photon⟩ ⊗ |object⟩`.
    pub fn basis(photon: PhotonMode, object: ObjectState) -> Self {
        let mut amps = [Complex64::new(0.0, 0.0); JOINT_DIM];
        amps[basis_index(photon, object)] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// `|photon⟩ ⊗ |object⟩` for arbitrary (normalized) factors.
    pub fn product(photon: &[Complex64; PHOTON_DIM], object: &ObjectVector) -> Result<Self> {
        let mut amps = [Complex64::new(0.0, 0.0); JOINT_DIM];
        for (p, cp) in photon.iter().enumerate() {
            for (o, co) in object.amps().iter().enumerate() {
                amps[p * OBJECT_DIM + o] = cp * co;
            }
        }
        Self::new(amps)
    }

    /// Wraps amplitudes produced by a unitary map without renormalizing,
    /// so norm drift stays observable.
    pub(crate) fn from_unitary_image(amps: [Complex64; JOINT_DIM]) -> Self {
        debug_assert!(amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()));
        Self { amps }
    }

    pub fn amps(&self) -> &[Complex64; JOINT_DIM] {
        &self.amps
    }

    pub fn amp(&self, photon: PhotonMode, object: ObjectState) -> Complex64 {
        self.amps[basis_index(photon, object)]
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    /// The (unnormalized) object vector attached to one photon sector.
    pub fn photon_sector(&self, photon: PhotonMode) -> [Complex64; OBJECT_DIM] {
        let start = photon.index() * OBJECT_DIM;
        let mut out = [Complex64::new(0.0, 0.0); OBJECT_DIM];
        out.copy_from_slice(&self.amps[start..start + OBJECT_DIM]);
        out
    }

    /// Applies a 3×3 operator to the photon factor, identity on the object.
    pub fn apply_photon_operator(&self, op: &[[Complex64; PHOTON_DIM]; PHOTON_DIM]) -> Self {
        let mut out = [Complex64::new(0.0, 0.0); JOINT_DIM];
        for (row, op_row) in op.iter().enumerate() {
            for (col, &m) in op_row.iter().enumerate() {
                if m == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for o in 0..OBJECT_DIM {
                    out[row * OBJECT_DIM + o] += m * self.amps[col * OBJECT_DIM + o];
                }
            }
        }
        Self::from_unitary_image(out)
    }
}

/// ⟨a|b⟩, conjugate-linear in `a`.
pub fn inner_product(a: &JointState, b: &JointState) -> Complex64 {
    a.amps
        .iter()
        .zip(b.amps.iter())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

/// A vector in the 4-dimensional object space, in `GX, GY, EX, EY` order.
///
/// Unlike [`JointState`] this is not forced to unit norm; conditional
/// states are normalized explicitly via [`ObjectVector::normalized`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectVector {
    amps: [Complex64; OBJECT_DIM],
}

impl ObjectVector {
    pub fn new(amps: [Complex64; OBJECT_DIM]) -> Self {
        Self { amps }
    }

    pub fn basis(object: ObjectState) -> Self {
        let mut amps = [Complex64::new(0.0, 0.0); OBJECT_DIM];
        amps[object.index()] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn amps(&self) -> &[Complex64; OBJECT_DIM] {
        &self.amps
    }

    pub fn amp(&self, object: ObjectState) -> Complex64 {
        self.amps[object.index()]
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        check_finite(&self.amps)?;
        let norm = self.norm();
        if norm == 0.0 {
            return Err(QStateError::AllZero);
        }
        Ok(Self {
            amps: self.amps.map(|a| a / norm),
        })
    }

    /// Removes the global phase so the first component with modulus above
    /// `threshold` is real and positive.
    pub fn with_canonical_phase(&self, threshold: f64) -> Self {
        match self.amps.iter().find(|a| a.norm() > threshold) {
            Some(lead) => {
                let phase = lead.conj() / lead.norm();
                Self {
                    amps: self.amps.map(|a| a * phase),
                }
            }
            None => *self,
        }
    }

    pub fn inner(&self, other: &ObjectVector) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(x, y)| x.conj() * y)
            .sum()
    }
}

/// |⟨a|b⟩|² for two normalized object vectors.
pub fn overlap_squared(a: &ObjectVector, b: &ObjectVector) -> Result<f64> {
    for v in [a, b] {
        check_finite(&v.amps)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > OVERLAP_NORM_TOL {
            return Err(QStateError::NotNormalized { norm });
        }
    }
    Ok(a.inner(b).norm_sqr().clamp(0.0, 1.0))
}

/// Hermitian, unit-trace, positive semidefinite matrix on one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates and wraps a row-major `dim × dim` matrix.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim != PHOTON_DIM && dim != OBJECT_DIM {
            return Err(QStateError::BadDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(QStateError::WrongLength {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        check_finite(&entries)?;
        let asymmetry = max_asymmetry(dim, &entries);
        if asymmetry > HERMITIAN_TOL {
            return Err(QStateError::NotHermitian { asymmetry });
        }
        let trace: f64 = (0..dim).map(|i| entries[i * dim + i].re).sum();
        if (trace - 1.0).abs() > 1e-10 {
            return Err(QStateError::BadTrace(trace));
        }
        let m = Self { dim, entries };
        let lowest = jacobi_eigen(dim, &m.entries)?
            .values
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if lowest < -NEGATIVE_CLAMP {
            return Err(QStateError::NotPositive(lowest));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }
}

fn max_asymmetry(dim: usize, entries: &[Complex64]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in i..dim {
            let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Reduced density matrix of the kept subsystem, `Tr_other(|s⟩⟨s|)`.
pub fn partial_trace(s: &JointState, keep: Subsystem) -> DensityMatrix {
    let amps = s.amps();
    let (dim, entries) = match keep {
        Subsystem::Photon => {
            let mut rho = vec![Complex64::new(0.0, 0.0); PHOTON_DIM * PHOTON_DIM];
            for i in 0..PHOTON_DIM {
                for j in 0..PHOTON_DIM {
                    rho[i * PHOTON_DIM + j] = (0..OBJECT_DIM)
                        .map(|o| amps[i * OBJECT_DIM + o] * amps[j * OBJECT_DIM + o].conj())
                        .sum();
                }
            }
            (PHOTON_DIM, rho)
        }
        Subsystem::Object => {
            let mut rho = vec![Complex64::new(0.0, 0.0); OBJECT_DIM * OBJECT_DIM];
            for i in 0..OBJECT_DIM {
                for j in 0..OBJECT_DIM {
                    rho[i * OBJECT_DIM + j] = (0..PHOTON_DIM)
                        .map(|p| amps[p * OBJECT_DIM + i] * amps[p * OBJECT_DIM + j].conj())
                        .sum();
                }
            }
            (OBJECT_DIM, rho)
        }
    };
    // Hermitian and unit trace by construction for a normalized input.
    DensityMatrix { dim, entries }
}

/// Eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Wraps a list of eigenvalues, sorting them in descending order.
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Eigen-decomposition kept private to the crate; the public API exposes
/// spectra only.
#[derive(Debug, Clone)]
pub(crate) struct EigenDecomposition {
    pub(crate) values: Vec<f64>,
    /// Row-major unitary whose columns are the eigenvectors.
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) vectors: Vec<Complex64>,
}

/// Cyclic complex Jacobi diagonalization of a Hermitian `dim × dim` matrix.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then zeroes it with a real Givens rotation. Sweeps continue
/// until the off-diagonal Frobenius norm drops below `1e-14` (scaled by the
/// matrix norm when that exceeds one).
pub(crate) fn jacobi_eigen(dim: usize, entries: &[Complex64]) -> Result<EigenDecomposition> {
    let zero = Complex64::new(0.0, 0.0);
    let mut a = entries.to_vec();
    let mut v = vec![zero; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = Complex64::new(1.0, 0.0);
        a[i * dim + i] = Complex64::new(a[i * dim + i].re, 0.0);
    }

    let scale = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    s += a[i * dim + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > JACOBI_OFF_TOL * scale {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(QStateError::NoConvergence(sweeps));
        }
        sweeps += 1;
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = a[p * dim + p].re;
                let aqq = a[q * dim + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let phase_c = phase.conj();

                // A <- A U, V <- V U with
                // U_pp = c, U_pq = s, U_qp = -s e^{-iφ}, U_qq = c e^{-iφ}.
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = akp * c - akq * phase_c * s;
                    a[k * dim + q] = akp * s + akq * phase_c * c;
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = vkp * c - vkq * phase_c * s;
                    v[k * dim + q] = vkp * s + vkq * phase_c * c;
                }
                // A <- U† A.
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = apk * c - aqk * phase * s;
                    a[q * dim + k] = apk * s + aqk * phase * c;
                }
                a[p * dim + q] = zero;
                a[q * dim + p] = zero;
                a[p * dim + p] = Complex64::new(a[p * dim + p].re, 0.0);
                a[q * dim + q] = Complex64::new(a[q * dim + q].re, 0.0);
            }
        }
    }

    let values = (0..dim).map(|i| a[i * dim + i].re).collect();
    Ok(EigenDecomposition { values, vectors: v })
}

/// Eigenvalues of a Hermitian density matrix, descending.
pub fn eig_hermitian(m: &DensityMatrix) -> Result<Spectrum> {
    let asymmetry = max_asymmetry(m.dim, &m.entries);
    if asymmetry > HERMITIAN_TOL {
        return Err(QStateError::NotHermitian { asymmetry });
    }
    let decomposition = jacobi_eigen(m.dim, &m.entries)?;
    Ok(Spectrum::new(decomposition.values))
}

/// `x ln x` with `0 ln 0 = 0`.
pub fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Von Neumann entropy `-Σ λ ln λ` in nats.
pub fn von_neumann_entropy(spec: &Spectrum) -> Result<f64> {
    let values = spec.eigenvalues();
    if values.is_empty() {
        return Err(QStateError::InvalidSpectrum("empty spectrum".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(QStateError::InvalidSpectrum(format!(
            "non-finite eigenvalue {bad}"
        )));
    }
    let trace = spec.sum();
    if (trace - 1.0).abs() > SPECTRUM_TRACE_TOL {
        return Err(QStateError::InvalidSpectrum(format!(
            "eigenvalues sum to {trace}"
        )));
    }
    let mut entropy = 0.0;
    for &lambda in values {
        if lambda < -NEGATIVE_CLAMP {
            return Err(QStateError::InvalidSpectrum(format!(
                "negative eigenvalue {lambda}"
            )));
        }
        entropy -= xlnx(lambda.max(0.0));
    }
    let ceiling = (values.len() as f64).ln();
    Ok(entropy.clamp(0.0, ceiling))
}

/// Entanglement entropy of a pure joint state, computed on the given side.
pub fn entanglement_entropy(s: &JointState, side: Subsystem) -> Result<f64> {
    von_neumann_entropy(&eig_hermitian(&partial_trace(s, side))?)
}

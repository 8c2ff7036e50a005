//! Two-qubit states, the parametrized transmission basis, Von Neumann entropy
//! and the Holevo quantity χ.
//!
//! Basis ordering is fixed as |00⟩, |01⟩, |10⟩, |11⟩ everywhere; the first
//! label is qubit 1. All quantities are in bits (base-2 logarithms).

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type Matrix4c = Matrix4<C64>;
pub type Vector4c = Vector4<C64>;

/// Hermiticity / trace tolerance for density matrices.
pub const HERM_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Eigenvalues at or below this floor contribute 0 to the entropy.
pub const EIG_FLOOR: f64 = 1e-12;

/// 4×4 Hermitian, positive semidefinite, unit-trace state of the qubit pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix4c);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(m: Matrix4c) -> Result<Self> {
        let dev = hermiticity_deviation(&m);
        if dev > HERM_TOL {
            return Err(Error::Constraint(format!(
                "density matrix not Hermitian: max|m - m†| = {dev:.3e}"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > HERM_TOL || tr.im.abs() > HERM_TOL {
            return Err(Error::Constraint(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let lambda_min = m.symmetric_eigenvalues().min();
        if lambda_min < PSD_TOL {
            return Err(Error::Constraint(format!(
                "density matrix not positive semidefinite: λ_min = {lambda_min:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// Re-Hermitizes `m` (projection onto (m + m†)/2) before validating.
    /// Used after propagation, where roundoff leaves a ~1e-15 skew part.
    pub(crate) fn from_propagated(m: Matrix4c) -> Result<Self> {
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        Self::new(sym).map_err(|e| Error::Numerical(format!("propagated state invalid: {e}")))
    }

    pub fn matrix(&self) -> &Matrix4c {
        &self.0
    }

    /// The maximally mixed state I/4.
    pub fn maximally_mixed() -> Self {
        Self(Matrix4c::identity() * C64::new(0.25, 0.0))
    }

    /// Real eigenvalue spectrum (unsorted).
    pub fn eigenvalues(&self) -> Vector4<f64> {
        self.0.symmetric_eigenvalues()
    }
}

fn hermiticity_deviation(m: &Matrix4c) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Normalized pure state of the qubit pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(Vector4c);

impl PureState {
    pub fn new(amplitudes: Vector4c) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Constraint(format!(
                "pure state norm {norm} differs from 1 beyond 1e-12"
            )));
        }
        Ok(Self(amplitudes))
    }

    pub fn amplitudes(&self) -> &Vector4c {
        &self.0
    }
}

/// Entanglement parameters of the transmission basis. Both are real and lie
/// in [0, 1]: 0 gives product states, 1 gives the Bell states. The
/// normalizations 1/√(1 + m²) are derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisParams {
    m_phi: f64,
    m_psi: f64,
}

impl BasisParams {
    pub fn new(m_phi: f64, m_psi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m_phi) || !m_phi.is_finite() {
            return Err(Error::Domain {
                name: "m_phi",
                value: m_phi,
                range: "[0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&m_psi) || !m_psi.is_finite() {
            return Err(Error::Domain {
                name: "m_psi",
                value: m_psi,
                range: "[0, 1]",
            });
        }
        Ok(Self { m_phi, m_psi })
    }

    /// Fully factorized family: |00⟩, -|11⟩, |01⟩, -|10⟩.
    pub fn factorized() -> Self {
        Self { m_phi: 0.0, m_psi: 0.0 }
    }

    /// Fully entangled (Bell) family.
    pub fn bell() -> Self {
        Self { m_phi: 1.0, m_psi: 1.0 }
    }

    /// Factorized Φ-pair combined with the entangled Ψ-pair.
    pub fn combined() -> Self {
        Self { m_phi: 0.0, m_psi: 1.0 }
    }

    pub fn m_phi(&self) -> f64 {
        self.m_phi
    }

    pub fn m_psi(&self) -> f64 {
        self.m_psi
    }
}

/// The four transmission states generated by `params`:
///
///   ψ₁ = M_Φ(|00⟩ + m_Φ|11⟩)      ψ₂ = M_Φ(m_Φ|00⟩ − |11⟩)
///   ψ₃ = M_Ψ(|01⟩ + m_Ψ|10⟩)      ψ₄ = M_Ψ(m_Ψ|01⟩ − |10⟩)
///
/// with M = 1/√(1 + m²). Pairwise orthonormal for any admissible params;
/// m = 1 yields the Bell states (ψ₄ the singlet), m = 0 product states.
pub fn make_basis(params: BasisParams) -> [PureState; 4] {
    let c = |x: f64| C64::new(x, 0.0);
    let (mf, mp) = (params.m_phi, params.m_psi);
    let nf = 1.0 / (1.0 + mf * mf).sqrt();
    let np = 1.0 / (1.0 + mp * mp).sqrt();
    let psi1 = Vector4c::new(c(nf), c(0.0), c(0.0), c(nf * mf));
    let psi2 = Vector4c::new(c(nf * mf), c(0.0), c(0.0), c(-nf));
    let psi3 = Vector4c::new(c(0.0), c(np), c(np * mp), c(0.0));
    let psi4 = Vector4c::new(c(0.0), c(np * mp), c(-np), c(0.0));
    [psi1, psi2, psi3, psi4].map(PureState)
}

/// Rank-1 projector |ψ⟩⟨ψ|.
pub fn pure_to_density(psi: &PureState) -> DensityMatrix {
    let v = &psi.0;
    DensityMatrix(v * v.adjoint())
}

/// S(ρ) = −Σ λᵢ log₂ λᵢ over the eigenvalues of ρ, in bits.
/// Eigenvalues at or below `EIG_FLOOR` contribute 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_bits(&rho.0)
}

/// Entropy of a Hermitian unit-trace matrix, without re-validating it.
/// Hot path of the capacity optimizer.
pub(crate) fn entropy_bits(m: &Matrix4c) -> f64 {
    let mut s = 0.0;
    for lambda in m.symmetric_eigenvalues().iter() {
        if *lambda > EIG_FLOOR {
            s -= lambda * lambda.log2();
        }
    }
    s
}

/// Input ensemble: four states with their transmission probabilities.
#[derive(Debug, Clone)]
pub struct Ensemble {
    probabilities: [f64; 4],
    states: [DensityMatrix; 4],
}

impl Ensemble {
    pub fn new(probabilities: [f64; 4], states: [DensityMatrix; 4]) -> Result<Self> {
        for (x, p) in probabilities.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::Constraint(format!("probability p{} = {p} < 0", x + 1)));
            }
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Constraint(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            probabilities,
            states,
        })
    }

    pub fn probabilities(&self) -> &[f64; 4] {
        &self.probabilities
    }

    pub fn states(&self) -> &[DensityMatrix; 4] {
        &self.states
    }
}

/// Holevo quantity χ = S(⟨ρ⟩) − Σ p_x S(ρ_x), in bits. Sub-1e-10 negative
/// roundoff is clamped to 0.
pub fn holevo_chi(ensemble: &Ensemble) -> f64 {
    let mut mean = Matrix4c::zeros();
    let mut avg_entropy = 0.0;
    for (p, rho) in ensemble
        .probabilities
        .iter()
        .zip(ensemble.states.iter())
    {
        mean += rho.0 * C64::new(*p, 0.0);
        avg_entropy += p * entropy_bits(&rho.0);
    }
    let chi = entropy_bits(&mean) - avg_entropy;
    debug_assert!(chi > -1e-10, "chi = {chi} below clamp window");
    chi.max(0.0)
}

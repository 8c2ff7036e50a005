//! Dissipative generator built from the channel decoherence parameters
//! (magnitude ν¹, state-bias α, asymmetry ζ, memory μ) and propagation of
//! two-qubit states through it.
//!
//! The decay sector carries the 2×2 rate matrix R¹ (entries R¹_jk), the
//! excitation sector R⁰ built identically from ν⁰ = (1−α)ν¹. Cross entries
//! implement collective jumps; the generator is completely positive exactly
//! when both rate matrices are PSD, i.e. when ζ² + μ² ≤ 1.

use nalgebra::{Matrix2, SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::state::{make_basis, pure_to_density, BasisParams, DensityMatrix, Matrix4c};

pub(crate) type Matrix16c = SMatrix<C64, 16, 16>;
type Vector16c = SVector<C64, 16>;

/// Feasibility slack on ζ² + μ² ≤ 1.
pub const FEAS_TOL: f64 = 1e-12;

/// Decoherence parameters of the two-qubit channel.
///
/// Asymmetry enters with qubit 1 carrying the larger rate (R₁₁ gets 1 + ζ);
/// capacity statements are insensitive to that labeling except inside the
/// narrow basis-transition band, see the capacity module tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    nu1: f64,
    alpha: f64,
    zeta: f64,
    mu: f64,
}

impl ChannelParams {
    pub fn new(nu1: f64, alpha: f64, zeta: f64, mu: f64) -> Result<Self> {
        if !nu1.is_finite() || nu1 < 0.0 {
            return Err(Error::Domain {
                name: "nu1",
                value: nu1,
                range: "[0, inf)",
            });
        }
        for (name, v) in [("alpha", alpha), ("zeta", zeta), ("mu", mu)] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain {
                    name: match name {
                        "alpha" => "alpha",
                        "zeta" => "zeta",
                        _ => "mu",
                    },
                    value: v,
                    range: "[0, 1]",
                });
            }
        }
        let feas = zeta * zeta + mu * mu;
        if feas > 1.0 + FEAS_TOL {
            return Err(Error::Constraint(format!(
                "zeta^2 + mu^2 = {feas:.12} > 1: rate matrices would not be PSD"
            )));
        }
        Ok(Self {
            nu1,
            alpha,
            zeta,
            mu,
        })
    }

    pub fn nu1(&self) -> f64 {
        self.nu1
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Excitation-sector magnitude ν⁰ = (1 − α) ν¹.
    pub fn nu0(&self) -> f64 {
        (1.0 - self.alpha) * self.nu1
    }
}

/// Per-sector 2×2 transition-rate matrices: `r1` for decay (|1⟩→|0⟩),
/// `r0` for excitation. Symmetric with non-negative diagonals; PSD unless
/// constructed with [`RateMatrices::new_unchecked`] (transient non-Markovian
/// trajectory points).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateMatrices {
    r1: Matrix2<f64>,
    r0: Matrix2<f64>,
}

impl RateMatrices {
    /// Validates symmetry, finite entries, non-negative diagonals and PSD.
    pub fn new(r1: Matrix2<f64>, r0: Matrix2<f64>) -> Result<Self> {
        let m = Self::new_unchecked(r1, r0)?;
        for (label, r) in [("r1", &m.r1), ("r0", &m.r0)] {
            if r[(0, 0)] < 0.0 || r[(1, 1)] < 0.0 {
                return Err(Error::Constraint(format!(
                    "{label} has a negative diagonal entry"
                )));
            }
            if !psd2(r) {
                return Err(Error::Constraint(format!(
                    "{label} is not positive semidefinite (det = {:.3e})",
                    r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)]
                )));
            }
        }
        Ok(m)
    }

    /// Skips the PSD check; entries must still be finite and symmetric.
    pub fn new_unchecked(r1: Matrix2<f64>, r0: Matrix2<f64>) -> Result<Self> {
        for (label, r) in [("r1", &r1), ("r0", &r0)] {
            if r.iter().any(|x| !x.is_finite()) {
                return Err(Error::Constraint(format!("{label} has non-finite entries")));
            }
            if (r[(0, 1)] - r[(1, 0)]).abs() > 1e-12 {
                return Err(Error::Constraint(format!("{label} is not symmetric")));
            }
        }
        Ok(Self { r1, r0 })
    }

    pub fn r1(&self) -> &Matrix2<f64> {
        &self.r1
    }

    pub fn r0(&self) -> &Matrix2<f64> {
        &self.r0
    }

    /// Complete positivity of the constant-rate channel these rates generate.
    pub fn is_cp(&self) -> bool {
        psd2(&self.r1) && psd2(&self.r0) && self.r1[(0, 0)] >= 0.0 && self.r0[(0, 0)] >= 0.0
    }
}

fn psd2(r: &Matrix2<f64>) -> bool {
    let det = r[(0, 0)] * r[(1, 1)] - r[(0, 1)] * r[(1, 0)];
    r[(0, 0)] >= -1e-14 && r[(1, 1)] >= -1e-14 && det >= -1e-14
}

/// R¹₁₁ = ν¹(1+ζ)/2, R¹₂₂ = ν¹(1−ζ)/2, R¹₁₂ = R¹₂₁ = μν¹/2, and R⁰ built
/// identically from ν⁰. Roundtrips with [`params_from_rates`].
pub fn rates_from_params(p: &ChannelParams) -> RateMatrices {
    let sector = |nu: f64| {
        Matrix2::new(
            nu * (1.0 + p.zeta) / 2.0,
            p.mu * nu / 2.0,
            p.mu * nu / 2.0,
            nu * (1.0 - p.zeta) / 2.0,
        )
    };
    RateMatrices {
        r1: sector(p.nu1),
        r0: sector(p.nu0()),
    }
}

/// ν¹ = R¹₁₁ + R¹₂₂, ζ = |R¹₁₁ − R¹₂₂|/ν¹, μ = |R¹₁₂ + R¹₂₁|/ν¹,
/// α = 1 − ν⁰/ν¹. Errors when ν¹ = 0 (the ratios are undefined).
pub fn params_from_rates(r: &RateMatrices) -> Result<ChannelParams> {
    let nu1 = r.r1[(0, 0)] + r.r1[(1, 1)];
    if nu1 <= 0.0 {
        return Err(Error::Undefined(
            "nu1 = R1_11 + R1_22 = 0: zeta, mu and alpha are undefined".into(),
        ));
    }
    let zeta = (r.r1[(0, 0)] - r.r1[(1, 1)]).abs() / nu1;
    let mu = (r.r1[(0, 1)] + r.r1[(1, 0)]).abs() / nu1;
    let nu0 = r.r0[(0, 0)] + r.r0[(1, 1)];
    let alpha = 1.0 - nu0 / nu1;
    ChannelParams::new(nu1, alpha, zeta, mu)
}

/// 16×16 generator acting on column-stacked density matrices.
///
/// L = Σ_{jk} R¹_{jk} D[σ₋ʲ, σ₋ᵏ] + Σ_{jk} R⁰_{jk} D[σ₊ʲ, σ₊ᵏ] with
/// D[A,B]ρ = AρB† − ½{B†A, ρ}. Trace- and Hermiticity-preserving for
/// symmetric real rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    generator: Matrix16c,
}

impl Liouvillian {
    pub fn generator(&self) -> &Matrix16c {
        &self.generator
    }
}

/// Builds the generator from PSD rate matrices; errors otherwise.
pub fn build_liouvillian(r: &RateMatrices) -> Result<Liouvillian> {
    if !r.is_cp() {
        return Err(Error::Constraint(
            "rate matrices are not PSD: generator would not be completely positive".into(),
        ));
    }
    Ok(liouvillian_unchecked(r))
}

/// Generator from possibly non-PSD rates (non-Markovian trajectory steps).
pub(crate) fn liouvillian_unchecked(r: &RateMatrices) -> Liouvillian {
    let lower = [qubit_op(0, false), qubit_op(1, false)];
    let raise = [qubit_op(0, true), qubit_op(1, true)];
    let mut generator = Matrix16c::zeros();
    for j in 0..2 {
        for k in 0..2 {
            generator += dissipator(&lower[j], &lower[k]) * C64::new(r.r1[(j, k)], 0.0);
            generator += dissipator(&raise[j], &raise[k]) * C64::new(r.r0[(j, k)], 0.0);
        }
    }
    Liouvillian { generator }
}

/// σ∓ on the given qubit, identity on the other.
fn qubit_op(qubit: usize, raising: bool) -> Matrix4c {
    let mut single = nalgebra::Matrix2::<C64>::zeros();
    if raising {
        single[(1, 0)] = C64::new(1.0, 0.0); // |1><0|
    } else {
        single[(0, 1)] = C64::new(1.0, 0.0); // |0><1|
    }
    let eye = nalgebra::Matrix2::<C64>::identity();
    if qubit == 0 {
        kron2(&single, &eye)
    } else {
        kron2(&eye, &single)
    }
}

fn kron2(a: &nalgebra::Matrix2<C64>, b: &nalgebra::Matrix2<C64>) -> Matrix4c {
    let mut out = Matrix4c::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

fn kron4(a: &Matrix4c, b: &Matrix4c) -> Matrix16c {
    let mut out = Matrix16c::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let aij = a[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    out[(4 * i + k, 4 * j + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// vec(D[A,B]ρ) = (B̄ ⊗ A − ½ I ⊗ B†A − ½ (B†A)ᵀ ⊗ I) vec(ρ).
fn dissipator(a: &Matrix4c, b: &Matrix4c) -> Matrix16c {
    let eye = Matrix4c::identity();
    let bda = b.adjoint() * a;
    kron4(&b.conjugate(), a)
        - kron4(&eye, &bda) * C64::new(0.5, 0.0)
        - kron4(&bda.transpose(), &eye) * C64::new(0.5, 0.0)
}

fn vec(rho: &Matrix4c) -> Vector16c {
    Vector16c::from_column_slice(rho.as_slice())
}

fn unvec(v: &Vector16c) -> Matrix4c {
    Matrix4c::from_column_slice(v.as_slice())
}

/// exp(L·t) as a superoperator matrix (Padé scaling-and-squaring).
pub(crate) fn propagator(li: &Liouvillian, t: f64) -> Matrix16c {
    (li.generator * C64::new(t, 0.0)).exp()
}

pub(crate) fn apply_propagator(prop: &Matrix16c, rho: &Matrix4c) -> Matrix4c {
    let out = prop * vec(rho);
    let m = unvec(&out);
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// ρ(t) = exp(L·t) ρ₀. Errors for t < 0 or if the output violates the
/// density-matrix invariants beyond tolerance.
pub fn propagate(rho0: &DensityMatrix, li: &Liouvillian, t: f64) -> Result<DensityMatrix> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain {
            name: "t",
            value: t,
            range: "[0, inf)",
        });
    }
    let out = propagator(li, t) * vec(rho0.matrix());
    DensityMatrix::from_propagated(unvec(&out))
}

/// The four basis states of `b` propagated for time `t` through the channel
/// with parameters `p`: make_basis → pure_to_density → propagate.
pub fn apply_channel(
    b: BasisParams,
    p: &ChannelParams,
    t: f64,
) -> Result<[DensityMatrix; 4]> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain {
            name: "t",
            value: t,
            range: "[0, inf)",
        });
    }
    let li = build_liouvillian(&rates_from_params(p))?;
    let prop = propagator(&li, t);
    let states = make_basis(b);
    let mut out = Vec::with_capacity(4);
    for psi in &states {
        let rho = pure_to_density(psi);
        out.push(DensityMatrix::from_propagated(apply_propagator(
            &prop,
            rho.matrix(),
        ))?);
    }
    Ok([
        out[0].clone(),
        out[1].clone(),
        out[2].clone(),
        out[3].clone(),
    ])
}

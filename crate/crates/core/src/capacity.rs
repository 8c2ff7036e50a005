//! Holevo-capacity maximization over input probabilities and basis
//! entanglement, the closed-form capacity offset f(νt), the extreme-limit
//! capacity relations, and figure-style parameter sweeps.

use rayon::prelude::*;

use crate::channel::{build_liouvillian, propagator, rates_from_params, ChannelParams, FEAS_TOL};
use crate::error::{Error, Result};
use crate::optim::{project_simplex, NelderMead};
use crate::state::{entropy_bits, make_basis, pure_to_density, BasisParams, Matrix4c};

/// Joint maximum of χ over (p, m_Φ, m_Ψ) together with its argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub capacity_bits: f64,
    pub p: [f64; 4],
    pub m_phi: f64,
    pub m_psi: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Maximum of χ over the probability simplex for a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMax {
    pub chi: f64,
    pub p: [f64; 4],
    pub evaluations: usize,
    pub converged: bool,
}

/// The four extreme channel limits compared by the capacity relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LimitCase {
    /// Symmetric, state-biased memory channel: ζ = 0, α = 1, χ(p) = χ(μ = p).
    A,
    /// Asymmetric, state-biased memoryless channel: μ = 0, α = 1, χ(p) = χ(ζ = p).
    B,
    /// Symmetric, unbiased memory channel: ζ = α = 0, χ(p) = χ(μ = p).
    C,
    /// Asymmetric, unbiased memoryless channel: μ = α = 0, χ(p) = χ(ζ = p).
    D,
}

impl LimitCase {
    pub const ALL: [LimitCase; 4] = [LimitCase::A, LimitCase::B, LimitCase::C, LimitCase::D];

    pub fn description(&self) -> &'static str {
        match self {
            LimitCase::A => "symmetric state-biased memory channel (zeta=0, alpha=1, vary mu)",
            LimitCase::B => "asymmetric state-biased memoryless channel (mu=0, alpha=1, vary zeta)",
            LimitCase::C => "symmetric unbiased memory channel (zeta=0, alpha=0, vary mu)",
            LimitCase::D => "asymmetric unbiased memoryless channel (mu=0, alpha=0, vary zeta)",
        }
    }

    pub fn tag(&self) -> char {
        match self {
            LimitCase::A => 'a',
            LimitCase::B => 'b',
            LimitCase::C => 'c',
            LimitCase::D => 'd',
        }
    }

    /// Channel at unit rate magnitude with the case's varied parameter set to `p`.
    fn channel(&self, p: f64) -> Result<ChannelParams> {
        match self {
            LimitCase::A => ChannelParams::new(1.0, 1.0, 0.0, p),
            LimitCase::B => ChannelParams::new(1.0, 1.0, p, 0.0),
            LimitCase::C => ChannelParams::new(1.0, 0.0, 0.0, p),
            LimitCase::D => ChannelParams::new(1.0, 0.0, p, 0.0),
        }
    }
}

/// One evaluated capacity relation: ε = χ_lhs − χ_rhs − f_term.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitResidual {
    pub case: LimitCase,
    pub p: f64,
    pub nu_t: f64,
    pub chi_lhs: f64,
    pub chi_rhs: f64,
    pub f_term: f64,
    pub epsilon: f64,
}

// ---------------------------------------------------------------------------
// χ maximization

/// Channel outputs of one basis with cached per-state entropies.
struct FixedBasisOutputs {
    rhos: [Matrix4c; 4],
    entropies: [f64; 4],
}

impl FixedBasisOutputs {
    fn new(prop: &crate::channel::Matrix16c, basis: BasisParams) -> Self {
        let states = make_basis(basis);
        let mut rhos = [Matrix4c::zeros(); 4];
        let mut entropies = [0.0; 4];
        for (x, psi) in states.iter().enumerate() {
            let rho = crate::channel::apply_propagator(prop, pure_to_density(psi).matrix());
            entropies[x] = entropy_bits(&rho);
            rhos[x] = rho;
        }
        Self { rhos, entropies }
    }

    fn chi(&self, p: &[f64]) -> f64 {
        let mut mean = Matrix4c::zeros();
        let mut avg = 0.0;
        for x in 0..4 {
            mean += self.rhos[x] * num_complex::Complex64::new(p[x], 0.0);
            avg += p[x] * self.entropies[x];
        }
        (entropy_bits(&mean) - avg).max(0.0)
    }
}

/// All probability vectors with entries that are multiples of `1/denom`.
fn simplex_grid(denom: usize) -> Vec<[f64; 4]> {
    let mut grid = Vec::new();
    let d = denom as f64;
    for i in 0..=denom {
        for j in 0..=(denom - i) {
            for k in 0..=(denom - i - j) {
                let l = denom - i - j - k;
                grid.push([i as f64 / d, j as f64 / d, k as f64 / d, l as f64 / d]);
            }
        }
    }
    grid
}

/// Coarse simplex grid (step 0.1) followed by projected Nelder-Mead from the
/// grid maximum and from the uniform distribution.
fn chi_max_for_outputs(outputs: &FixedBasisOutputs) -> ChiMax {
    let mut evaluations = 0usize;
    let mut best_p = [0.25; 4];
    let mut best_chi = outputs.chi(&best_p);
    evaluations += 1;
    for p in simplex_grid(10) {
        evaluations += 1;
        let chi = outputs.chi(&p);
        if chi > best_chi {
            best_chi = chi;
            best_p = p;
        }
    }

    let nm = NelderMead::default();
    let mut converged = true;
    for start in [best_p, [0.25; 4]] {
        let out = nm.maximize(
            |p| outputs.chi(p),
            |p| project_simplex(p),
            &start,
            &[0.05; 4],
        );
        evaluations += out.evaluations;
        converged &= out.converged;
        if out.value > best_chi {
            best_chi = out.value;
            best_p = [out.x[0], out.x[1], out.x[2], out.x[3]];
        }
    }

    ChiMax {
        chi: best_chi,
        p: best_p,
        evaluations,
        converged,
    }
}

pub(crate) fn chi_max_with_propagator(
    prop: &crate::channel::Matrix16c,
    basis: BasisParams,
) -> ChiMax {
    chi_max_for_outputs(&FixedBasisOutputs::new(prop, basis))
}

/// Maximum of χ over the input probability simplex for a fixed basis.
pub fn chi_for_basis(p_chan: &ChannelParams, t: f64, basis: BasisParams) -> Result<ChiMax> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain {
            name: "t",
            value: t,
            range: "[0, inf)",
        });
    }
    let li = build_liouvillian(&rates_from_params(p_chan))?;
    let prop = propagator(&li, t);
    Ok(chi_max_with_propagator(&prop, basis))
}

/// Joint maximum over (p, m_Φ, m_Ψ): an (m_Φ, m_Ψ) grid of step 0.05 with an
/// inner probability maximization at each node, then joint Nelder-Mead
/// refinement from the eight best nodes. Ties within 1e-6 bits are broken
/// toward the smaller (m_Φ, m_Ψ).
pub fn optimize_capacity(p_chan: &ChannelParams, t: f64) -> Result<CapacityResult> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain {
            name: "t",
            value: t,
            range: "[0, inf)",
        });
    }
    let li = build_liouvillian(&rates_from_params(p_chan))?;
    let prop = propagator(&li, t);

    const M_STEPS: usize = 20; // grid step 0.05
    let nodes: Vec<(f64, f64)> = (0..=M_STEPS)
        .flat_map(|i| (0..=M_STEPS).map(move |j| (i as f64 / M_STEPS as f64, j as f64 / M_STEPS as f64)))
        .collect();

    let mut grid: Vec<(f64, f64, ChiMax)> = nodes
        .par_iter()
        .map(|&(m_phi, m_psi)| {
            let basis = BasisParams::new(m_phi, m_psi).expect("grid node in range");
            (m_phi, m_psi, chi_max_with_propagator(&prop, basis))
        })
        .collect();
    let mut evaluations: usize = grid.iter().map(|(_, _, c)| c.evaluations).sum();

    // rank by chi, preferring smaller m among numerical ties
    grid.sort_by(|a, b| {
        b.2.chi
            .partial_cmp(&a.2.chi)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.total_cmp(&b.0))
            .then(a.1.total_cmp(&b.1))
    });

    let nm = NelderMead::default();
    let mut candidates: Vec<(f64, f64, f64, [f64; 4], bool)> = Vec::new(); // (chi, m_phi, m_psi, p, converged)
    for (m_phi, m_psi, node) in grid.iter().take(8) {
        let start = [
            node.p[0], node.p[1], node.p[2], node.p[3], *m_phi, *m_psi,
        ];
        let steps = [0.05, 0.05, 0.05, 0.05, 0.025, 0.025];
        let out = nm.maximize(
            |x| {
                let basis = BasisParams::new(x[4], x[5]).expect("projected into range");
                FixedBasisOutputs::new(&prop, basis).chi(&x[0..4])
            },
            |x| {
                project_simplex(&mut x[0..4]);
                x[4] = x[4].clamp(0.0, 1.0);
                x[5] = x[5].clamp(0.0, 1.0);
            },
            &start,
            &steps,
        );
        evaluations += out.evaluations;
        candidates.push((
            out.value,
            out.x[4],
            out.x[5],
            [out.x[0], out.x[1], out.x[2], out.x[3]],
            out.converged,
        ));
    }

    let best_chi = candidates
        .iter()
        .map(|c| c.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let chosen = candidates
        .iter()
        .filter(|c| c.0 >= best_chi - 1e-6)
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.2.total_cmp(&b.2)))
        .expect("at least one refinement candidate");

    Ok(CapacityResult {
        capacity_bits: chosen.0,
        p: chosen.3,
        m_phi: chosen.1,
        m_psi: chosen.2,
        evaluations,
        converged: chosen.4,
    })
}

// ---------------------------------------------------------------------------
// Closed form f(νt)

/// Cutoff below which the removable 0/0 singularity of f makes the printed
/// form numerically meaningless; f(νt) → 0 as νt → 0⁺.
pub const F_NU_T_CUTOFF: f64 = 1e-4;

/// Closed-form capacity offset:
///
///   f(νt) = 0.5 − [ (ln(d₁d₂/d₃) − 2νt)
///                   + (r·ln(d₂/d₁) + ln(d₃²/(d₁d₂)))/w
///                   + ln(d₁d₂/d₃)/w² ] / ln 16
///
/// with w = e^{νt}, d₃ = (1−w)², r = √(1+d₃), d₁ = d₃ + w(1−r),
/// d₂ = d₃ + w(1+r). Natural logs as printed; the ln 16 converts to bits.
pub fn f_closed_form(nu_t: f64) -> Result<f64> {
    if !nu_t.is_finite() || nu_t < F_NU_T_CUTOFF {
        return Err(Error::Domain {
            name: "nu_t",
            value: nu_t,
            range: "[1e-4, inf); below the cutoff the 0/0 singularity is removable with f -> 0",
        });
    }
    let w = nu_t.exp();
    let d3 = (1.0 - w) * (1.0 - w);
    let r = (1.0 + d3).sqrt();
    let d1 = d3 + w * (1.0 - r);
    let d2 = d3 + w * (1.0 + r);
    let term = ((d1 * d2 / d3).ln() - 2.0 * nu_t)
        + (r * (d2 / d1).ln() + (d3 * d3 / (d1 * d2)).ln()) / w
        + (d1 * d2 / d3).ln() / (w * w);
    let f = 0.5 - term / 16f64.ln();
    if !f.is_finite() {
        return Err(Error::Numerical(format!(
            "f({nu_t}) overflowed intermediate exponentials"
        )));
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Extreme-limit relations

/// Residual of the capacity relation whose left-hand side is `case`:
///
///   b: χ_b^fac(ζ=p) = χ_a^ent(μ=p) + ε + f(νt)
///   a: χ_a^fac(μ=p) = χ_b^ent(ζ=p) + ε + f(νt)
///   d: χ_d^fac(ζ=p) = χ_c^com(μ=p) + ε
///   c: χ_c^fac(μ=p) = χ_d^com(ζ=p) + ε
///
/// Superscripts pick the basis family (fac: m = 0 both; ent: Bell;
/// com: m_Φ = 0, m_Ψ = 1). All χ values are probability-maximized at rate
/// magnitude ν¹ = 1 and time t = νt.
pub fn limit_relation_residual(case: LimitCase, p: f64, nu_t: f64) -> Result<LimitResidual> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::Domain {
            name: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    if !nu_t.is_finite() || nu_t < F_NU_T_CUTOFF {
        // same cutoff for all four relations so the degenerate nu t -> 0
        // direction is rejected uniformly
        return Err(Error::Domain {
            name: "nu_t",
            value: nu_t,
            range: "[1e-4, inf)",
        });
    }
    let fac = BasisParams::factorized();
    let ent = BasisParams::bell();
    let com = BasisParams::combined();
    let chi = |c: LimitCase, basis: BasisParams| -> Result<f64> {
        Ok(chi_for_basis(&c.channel(p)?, nu_t, basis)?.chi)
    };
    let (chi_lhs, chi_rhs, f_term) = match case {
        LimitCase::B => (
            chi(LimitCase::B, fac)?,
            chi(LimitCase::A, ent)?,
            f_closed_form(nu_t)?,
        ),
        LimitCase::A => (
            chi(LimitCase::A, fac)?,
            chi(LimitCase::B, ent)?,
            f_closed_form(nu_t)?,
        ),
        LimitCase::D => (chi(LimitCase::D, fac)?, chi(LimitCase::C, com)?, 0.0),
        LimitCase::C => (chi(LimitCase::C, fac)?, chi(LimitCase::D, com)?, 0.0),
    };
    Ok(LimitResidual {
        case,
        p,
        nu_t,
        chi_lhs,
        chi_rhs,
        f_term,
        epsilon: chi_lhs - chi_rhs - f_term,
    })
}

// ---------------------------------------------------------------------------
// Sweeps

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    Mu,
    Zeta,
    Alpha,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Mu => "mu",
            SweepParam::Zeta => "zeta",
            SweepParam::Alpha => "alpha",
        }
    }
}

/// Inclusive range `start..=stop` advanced by `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepAxis {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&self.start)
            || !(0.0..=1.0).contains(&self.stop)
            || self.stop < self.start
        {
            return Err(Error::Usage(format!(
                "axis {}: range {}..{} must lie in [0, 1] with start <= stop",
                self.param.name(),
                self.start,
                self.stop
            )));
        }
        if self.start == self.stop {
            return Ok(vec![self.start]);
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::Usage(format!(
                "axis {}: step {} must be positive",
                self.param.name(),
                self.step
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|i| (self.start + i as f64 * self.step).min(self.stop))
            .collect())
    }
}

/// One sweep grid point. `result` is None for points skipped as infeasible
/// (ζ² + μ² > 1).
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub mu: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub nu_t: f64,
    pub result: Option<CapacityResult>,
}

/// Evaluates the capacity on the outer product of the axis grids, the
/// remaining channel fields taken from `base`. With `basis` fixed, only the
/// probabilities are optimized. Rows come back in lexicographic order of the
/// swept axes; grid points are evaluated concurrently.
pub fn sweep_capacity(
    axes: &[SweepAxis],
    base: &ChannelParams,
    t: f64,
    basis: Option<BasisParams>,
) -> Result<Vec<SweepPoint>> {
    if axes.is_empty() {
        return Err(Error::Usage("sweep grid is empty: no axes given".into()));
    }
    if axes.len() > 3 {
        return Err(Error::Usage("more than three sweep axes".into()));
    }
    for (i, a) in axes.iter().enumerate() {
        for b in axes.iter().skip(i + 1) {
            if a.param == b.param {
                return Err(Error::Usage(format!(
                    "axis {} swept twice",
                    a.param.name()
                )));
            }
        }
    }
    let mut grids = Vec::new();
    for axis in axes {
        grids.push((axis.param, axis.values()?));
    }
    let mut points: Vec<(f64, f64, f64)> = vec![(base.mu(), base.zeta(), base.alpha())];
    for (param, values) in &grids {
        let mut next = Vec::with_capacity(points.len() * values.len());
        for p in &points {
            for v in values {
                let mut q = *p;
                match param {
                    SweepParam::Mu => q.0 = *v,
                    SweepParam::Zeta => q.1 = *v,
                    SweepParam::Alpha => q.2 = *v,
                }
                next.push(q);
            }
        }
        points = next;
    }

    let nu1 = base.nu1();
    points
        .par_iter()
        .map(|&(mu, zeta, alpha)| {
            if zeta * zeta + mu * mu > 1.0 + FEAS_TOL {
                return Ok(SweepPoint {
                    mu,
                    zeta,
                    alpha,
                    nu_t: nu1 * t,
                    result: None,
                });
            }
            let params = ChannelParams::new(nu1, alpha, zeta, mu)?;
            let result = match basis {
                Some(b) => {
                    let cm = chi_for_basis(&params, t, b)?;
                    CapacityResult {
                        capacity_bits: cm.chi,
                        p: cm.p,
                        m_phi: b.m_phi(),
                        m_psi: b.m_psi(),
                        evaluations: cm.evaluations,
                        converged: cm.converged,
                    }
                }
                None => optimize_capacity(&params, t)?,
            };
            Ok(SweepPoint {
                mu,
                zeta,
                alpha,
                nu_t: nu1 * t,
                result: Some(result),
            })
        })
        .collect()
}

//! Time-dependent pair decoherence rates from temporally shaped qubit pulses
//! and the bath correlation function,
//!
//!   R_jk(t) = 2 Re ∫₀ᵗ dt₁ Φ_T(t−t₁) ε_j(t) ε*_k(t₁) e^{i(ω_j t − ω_k t₁)},
//!
//! their reduction to effective channel parameters, and propagation under a
//! piecewise-constant rate trajectory.
//!
//! The integral yields the decay-sector rates R¹; the excitation sector is
//! R⁰ = b·R¹ entrywise with the bias factor b carried by the correlation
//! function, so the effective state-bias is α = 1 − b.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::channel::{liouvillian_unchecked, propagator, ChannelParams, RateMatrices};
use crate::error::{Error, Result};
use crate::quad;
use crate::state::DensityMatrix;

type EnvelopeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Temporal shape of one qubit pulse: envelope ε̃(t), phase φ(t) (chirp
/// included) and carrier detuning ω_a. The envelope vanishes outside
/// `support`.
#[derive(Clone)]
pub struct PulseSpec {
    envelope: EnvelopeFn,
    phase: EnvelopeFn,
    carrier: f64,
    delay: f64,
    support: (f64, f64),
    center: f64,
}

impl fmt::Debug for PulseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PulseSpec")
            .field("carrier", &self.carrier)
            .field("delay", &self.delay)
            .field("support", &self.support)
            .finish()
    }
}

impl PulseSpec {
    /// Rectangular envelope of the given amplitude on [delay, delay + duration].
    pub fn flat(amplitude: f64, duration: f64, delay: f64) -> Result<Self> {
        check_pulse_args(amplitude, duration, delay)?;
        let support = (delay, delay + duration);
        Ok(Self {
            envelope: Arc::new(move |_| amplitude),
            phase: Arc::new(|_| 0.0),
            carrier: 0.0,
            delay,
            support,
            center: delay + 0.5 * duration,
        })
    }

    /// Gaussian envelope of width `sigma`, centered 6σ after `delay` and
    /// truncated to [delay, delay + 12σ].
    pub fn gaussian(amplitude: f64, sigma: f64, delay: f64) -> Result<Self> {
        check_pulse_args(amplitude, sigma, delay)?;
        let center = delay + 6.0 * sigma;
        Ok(Self {
            envelope: Arc::new(move |t| {
                let z = (t - center) / sigma;
                amplitude * (-0.5 * z * z).exp()
            }),
            phase: Arc::new(|_| 0.0),
            carrier: 0.0,
            delay,
            support: (delay, delay + 12.0 * sigma),
            center,
        })
    }

    /// A pulse that is never on (zero envelope everywhere).
    pub fn silent() -> Self {
        Self {
            envelope: Arc::new(|_| 0.0),
            phase: Arc::new(|_| 0.0),
            carrier: 0.0,
            delay: 0.0,
            support: (0.0, 0.0),
            center: 0.0,
        }
    }

    /// Arbitrary envelope/phase pair on the given support.
    pub fn custom(
        envelope: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phase: impl Fn(f64) -> f64 + Send + Sync + 'static,
        carrier: f64,
        delay: f64,
        support: (f64, f64),
    ) -> Result<Self> {
        if !support.0.is_finite() || !support.1.is_finite() || support.1 < support.0 {
            return Err(Error::Constraint(format!(
                "pulse support [{}, {}] is not an ordered finite interval",
                support.0, support.1
            )));
        }
        if !delay.is_finite() || delay < 0.0 {
            return Err(Error::Domain {
                name: "delay",
                value: delay,
                range: "[0, inf)",
            });
        }
        let center = 0.5 * (support.0 + support.1);
        Ok(Self {
            envelope: Arc::new(envelope),
            phase: Arc::new(phase),
            carrier,
            delay,
            support,
            center,
        })
    }

    /// Adds a linear chirp: quadratic phase rate/2·(t − center)² on top of
    /// the existing phase.
    pub fn with_chirp(self, rate: f64) -> Self {
        let old = self.phase.clone();
        let center = self.center;
        Self {
            phase: Arc::new(move |t| old(t) + 0.5 * rate * (t - center) * (t - center)),
            ..self
        }
    }

    /// Sets the carrier detuning ω_a.
    pub fn with_carrier(self, omega: f64) -> Self {
        Self {
            carrier: omega,
            ..self
        }
    }

    pub fn envelope_at(&self, t: f64) -> f64 {
        if t < self.support.0 || t > self.support.1 {
            0.0
        } else {
            (self.envelope)(t)
        }
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        (self.phase)(t)
    }

    /// ε(t) = ε̃(t) e^{iφ(t)} (carrier handled separately in the rate integral).
    pub fn complex_amplitude(&self, t: f64) -> C64 {
        let env = self.envelope_at(t);
        if env == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::from_polar(env, self.phase_at(t))
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }
}

fn check_pulse_args(amplitude: f64, width: f64, delay: f64) -> Result<()> {
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::Domain {
            name: "amplitude",
            value: amplitude,
            range: "[0, inf)",
        });
    }
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::Domain {
            name: "width",
            value: width,
            range: "(0, inf)",
        });
    }
    if !delay.is_finite() || delay < 0.0 {
        return Err(Error::Domain {
            name: "delay",
            value: delay,
            range: "[0, inf)",
        });
    }
    Ok(())
}

/// Bath response kernel kinds. All are real and even in τ, so the Hermitian
/// response condition Φ(−τ) = Φ(τ)* holds identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    Exponential,
    Gaussian,
    /// Narrow normalized Gaussian of width t_c/100 standing in for a delta
    /// kernel; its causal half-line integral is 1, so a flat unit pulse sees
    /// the Markov rate 2·scale.
    DeltaApprox,
}

impl CorrelationKind {
    pub fn name(&self) -> &'static str {
        match self {
            CorrelationKind::Exponential => "exponential",
            CorrelationKind::Gaussian => "gaussian",
            CorrelationKind::DeltaApprox => "delta-approx",
        }
    }
}

/// Bath correlation (response) function Φ_T with correlation time t_c,
/// identical for both qubits, plus the excitation-sector bias factor.
#[derive(Debug, Clone)]
pub struct CorrelationFn {
    kind: CorrelationKind,
    t_c: f64,
    scale: f64,
    bias: f64,
    temperature_tag: String,
}

impl CorrelationFn {
    pub fn new(
        kind: CorrelationKind,
        t_c: f64,
        scale: f64,
        bias: f64,
        temperature_tag: impl Into<String>,
    ) -> Result<Self> {
        if !t_c.is_finite() || t_c <= 0.0 {
            return Err(Error::Domain {
                name: "t_c",
                value: t_c,
                range: "(0, inf)",
            });
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::Domain {
                name: "scale",
                value: scale,
                range: "(0, inf)",
            });
        }
        if !bias.is_finite() || !(0.0..=1.0).contains(&bias) {
            return Err(Error::Domain {
                name: "bias",
                value: bias,
                range: "[0, 1]",
            });
        }
        Ok(Self {
            kind,
            t_c,
            scale,
            bias,
            temperature_tag: temperature_tag.into(),
        })
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let a = tau.abs();
        match self.kind {
            CorrelationKind::Exponential => self.scale * (-a / self.t_c).exp(),
            CorrelationKind::Gaussian => {
                let z = a / self.t_c;
                self.scale * (-0.5 * z * z).exp()
            }
            CorrelationKind::DeltaApprox => {
                let sigma = self.delta_sigma();
                let z = a / sigma;
                self.scale * (2.0 / std::f64::consts::PI).sqrt() / sigma * (-0.5 * z * z).exp()
            }
        }
    }

    /// Width of the delta stand-in kernel.
    pub fn delta_sigma(&self) -> f64 {
        self.t_c / 100.0
    }

    /// Characteristic decay scale of the kernel, for quadrature seeding.
    fn kernel_width(&self) -> f64 {
        match self.kind {
            CorrelationKind::DeltaApprox => self.delta_sigma(),
            _ => self.t_c,
        }
    }

    pub fn kind(&self) -> CorrelationKind {
        self.kind
    }

    pub fn t_c(&self) -> f64 {
        self.t_c
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Excitation-sector factor b: R⁰ = b·R¹, effective α = 1 − b.
    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn temperature_tag(&self) -> &str {
        &self.temperature_tag
    }
}

/// Pair rates along a time grid. Instantaneous matrices may transiently be
/// non-PSD (non-Markovian intervals); propagation flags them.
#[derive(Debug, Clone)]
pub struct RateTrajectory {
    times: Vec<f64>,
    rates: Vec<RateMatrices>,
}

impl RateTrajectory {
    /// Grid must be strictly ascending with finite rate entries.
    pub fn new(times: Vec<f64>, rates: Vec<RateMatrices>) -> Result<Self> {
        if times.is_empty() || times.len() != rates.len() {
            return Err(Error::Constraint(format!(
                "trajectory needs matching non-empty grids (got {} times, {} rate points)",
                times.len(),
                rates.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Constraint(
                "trajectory time grid must be finite and strictly ascending".into(),
            ));
        }
        Ok(Self { times, rates })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rates(&self) -> &[RateMatrices] {
        &self.rates
    }

    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("non-empty"))
    }

    /// Linear interpolation of both sector matrices at `t` (clamped to the span).
    fn rates_at(&self, t: f64) -> (Matrix2<f64>, Matrix2<f64>) {
        let n = self.times.len();
        if t <= self.times[0] {
            return (*self.rates[0].r1(), *self.rates[0].r0());
        }
        if t >= self.times[n - 1] {
            return (*self.rates[n - 1].r1(), *self.rates[n - 1].r0());
        }
        let idx = self.times.partition_point(|x| *x <= t).min(n - 1);
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (t - t0) / (t1 - t0);
        let lerp = |a: &Matrix2<f64>, b: &Matrix2<f64>| a * (1.0 - w) + b * w;
        (
            lerp(self.rates[idx - 1].r1(), self.rates[idx].r1()),
            lerp(self.rates[idx - 1].r0(), self.rates[idx].r0()),
        )
    }
}

/// R_jk(t) by adaptive quadrature of the printed integrand. `j` is the pulse
/// evaluated at the outer time t, `k` the one integrated against the kernel;
/// indices are 0-based.
pub fn compute_rate(
    j: usize,
    k: usize,
    pulses: &[PulseSpec; 2],
    corr: &CorrelationFn,
    t: f64,
) -> Result<f64> {
    let (prefactor, integral) = rate_parts(j, k, pulses, corr, t)?;
    Ok(2.0 * (prefactor * integral).re)
}

/// (ε_j(t)·e^{iω_j t}, ∫₀ᵗ Φ(t−t₁) ε*_k(t₁) e^{−iω_k t₁} dt₁).
pub(crate) fn rate_parts(
    j: usize,
    k: usize,
    pulses: &[PulseSpec; 2],
    corr: &CorrelationFn,
    t: f64,
) -> Result<(C64, C64)> {
    if j > 1 || k > 1 {
        return Err(Error::Domain {
            name: "qubit index",
            value: j.max(k) as f64,
            range: "{0, 1}",
        });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain {
            name: "t",
            value: t,
            range: "[0, inf)",
        });
    }
    let zero = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    let pj = &pulses[j];
    let pk = &pulses[k];
    let env_j = pj.envelope_at(t);
    if env_j == 0.0 {
        return Ok(zero);
    }
    let prefactor = C64::from_polar(env_j, pj.phase_at(t) + pj.carrier() * t);

    let lo = pk.support().0.max(0.0);
    let hi = pk.support().1.min(t);
    if hi <= lo {
        return Ok(zero);
    }

    let breakpoints = integration_breakpoints(pk, corr, lo, hi, t);
    let integrand = |t1: f64| -> (f64, f64) {
        let env = pk.envelope_at(t1);
        if env == 0.0 {
            return (0.0, 0.0);
        }
        let kernel = corr.eval(t - t1);
        let z = C64::from_polar(kernel * env, -(pk.phase_at(t1) + pk.carrier() * t1));
        (z.re, z.im)
    };
    let integral = quad::integrate(integrand, &breakpoints, 1e-6, 400_000)?;
    Ok((prefactor, integral))
}

/// Panel seeds: uniform splits resolving the integrand's oscillation (at
/// least 40 samples per period) plus a geometric cluster at the kernel peak
/// t₁ = t.
fn integration_breakpoints(
    pk: &PulseSpec,
    corr: &CorrelationFn,
    lo: f64,
    hi: f64,
    t: f64,
) -> Vec<f64> {
    let span = hi - lo;
    // total phase variation sampled on a fixed comb
    let samples = 64usize;
    let mut variation = 0.0;
    let mut prev = pk.phase_at(lo) + pk.carrier() * lo;
    for i in 1..=samples {
        let x = lo + span * i as f64 / samples as f64;
        let phase = pk.phase_at(x) + pk.carrier() * x;
        variation += (phase - prev).abs();
        prev = phase;
    }
    let periods = variation / (2.0 * std::f64::consts::PI);
    // 15-point panels, at least 40 points per oscillation period
    let uniform = ((periods * 40.0 / 15.0).ceil() as usize).clamp(1, 4096);

    let mut pts: Vec<f64> = (0..=uniform)
        .map(|i| lo + span * i as f64 / uniform as f64)
        .collect();
    let width = corr.kernel_width();
    let mut offset = width;
    while t - offset > lo && offset < 64.0 * width {
        if t - offset < hi {
            pts.push(t - offset);
        }
        offset *= 2.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * span.max(1.0));
    pts
}

/// All four pair rates per grid time. Cross entries are symmetrized,
/// (R₁₂ + R₂₁)/2, which leaves the memory parameter |R₁₂ + R₂₁|/ν¹
/// unchanged and keeps the generator Hermiticity-preserving; the downward
/// sector comes from the integral, the upward sector is scaled by the
/// correlation function's bias factor.
pub fn rate_trajectory(
    pulses: &[PulseSpec; 2],
    corr: &CorrelationFn,
    grid: &[f64],
) -> Result<RateTrajectory> {
    if grid.is_empty() {
        return Err(Error::Constraint("empty trajectory time grid".into()));
    }
    if grid[0] < 0.0 {
        return Err(Error::Domain {
            name: "grid start",
            value: grid[0],
            range: "[0, inf)",
        });
    }
    let rates: Vec<RateMatrices> = grid
        .par_iter()
        .map(|&t| {
            let r11 = compute_rate(0, 0, pulses, corr, t)?;
            let r22 = compute_rate(1, 1, pulses, corr, t)?;
            let r12 = compute_rate(0, 1, pulses, corr, t)?;
            let r21 = compute_rate(1, 0, pulses, corr, t)?;
            let cross = 0.5 * (r12 + r21);
            let r1 = Matrix2::new(r11, cross, cross, r22);
            let r0 = r1 * corr.bias();
            RateMatrices::new_unchecked(r1, r0)
        })
        .collect::<Result<_>>()?;
    RateTrajectory::new(grid.to_vec(), rates)
}

/// Channel parameters of the time-averaged rates over [grid start, t]:
/// trapezoidal averages of each entry, then the ζ/μ/α definitions. If
/// roundoff pushes (ζ, μ) marginally outside the unit disk they are scaled
/// back onto it (logged).
pub fn effective_params(traj: &RateTrajectory, t: f64) -> Result<ChannelParams> {
    let (t0, t_end) = traj.span();
    if !t.is_finite() || t < t0 || t > t_end + 1e-12 {
        return Err(Error::Domain {
            name: "t",
            value: t,
            range: "within the trajectory grid span",
        });
    }
    let (avg_r1, avg_r0) = if t <= t0 {
        traj.rates_at(t0)
    } else {
        let mut int_r1 = Matrix2::zeros();
        let mut int_r0 = Matrix2::zeros();
        let mut prev_t = t0;
        let (mut prev_r1, mut prev_r0) = traj.rates_at(t0);
        for (&ti, ri) in traj.times().iter().zip(traj.rates().iter()).skip(1) {
            let ti_c = ti.min(t);
            if ti_c > prev_t {
                let (r1_c, r0_c) = if ti <= t {
                    (*ri.r1(), *ri.r0())
                } else {
                    traj.rates_at(t)
                };
                int_r1 += (prev_r1 + r1_c) * (0.5 * (ti_c - prev_t));
                int_r0 += (prev_r0 + r0_c) * (0.5 * (ti_c - prev_t));
                prev_t = ti_c;
                prev_r1 = r1_c;
                prev_r0 = r0_c;
            }
            if ti >= t {
                break;
            }
        }
        (int_r1 / (t - t0), int_r0 / (t - t0))
    };

    let nu1 = avg_r1[(0, 0)] + avg_r1[(1, 1)];
    if nu1.abs() < 1e-14 {
        return Err(Error::Undefined(
            "time-averaged rate magnitude is zero: effective parameters undefined".into(),
        ));
    }
    let mut zeta = (avg_r1[(0, 0)] - avg_r1[(1, 1)]).abs() / nu1;
    let mut mu = (avg_r1[(0, 1)] + avg_r1[(1, 0)]).abs() / nu1;
    let disk = zeta * zeta + mu * mu;
    if disk > 1.0 {
        let shrink = 1.0 / disk.sqrt();
        log::warn!(
            "effective (zeta, mu) = ({zeta:.6}, {mu:.6}) outside the unit disk by {:.3e}; clamping",
            disk - 1.0
        );
        zeta *= shrink;
        mu *= shrink;
    }
    let nu0 = avg_r0[(0, 0)] + avg_r0[(1, 1)];
    let alpha = (1.0 - nu0 / nu1).clamp(0.0, 1.0);
    ChannelParams::new(nu1, alpha, zeta, mu)
}

/// Outcome of trajectory propagation with its non-Markovian bookkeeping.
#[derive(Debug, Clone)]
pub struct TrajectoryPropagation {
    pub state: DensityMatrix,
    /// Substeps (at the accepted refinement level) whose instantaneous rate
    /// matrices were not PSD.
    pub non_cp_steps: usize,
    /// Substeps per grid interval in the accepted pass.
    pub substeps: usize,
}

/// Time-ordered product of short-interval exponentials with midpoint rates,
/// refined by step halving until the final state moves by less than 1e-8 in
/// max-norm. Transient non-PSD rate matrices are permitted and counted; a
/// non-PSD final state is an error.
pub fn propagate_with_trajectory(
    rho0: &DensityMatrix,
    traj: &RateTrajectory,
) -> Result<TrajectoryPropagation> {
    const TOL: f64 = 1e-8;
    const MAX_LEVELS: u32 = 10;

    if traj.times().len() == 1 {
        return Ok(TrajectoryPropagation {
            state: rho0.clone(),
            non_cp_steps: 0,
            substeps: 0,
        });
    }

    let run = |substeps: usize| -> Result<(crate::state::Matrix4c, usize)> {
        let mut rho = *rho0.matrix();
        let mut non_cp = 0usize;
        for w in traj.times().windows(2) {
            let dt = (w[1] - w[0]) / substeps as f64;
            for s in 0..substeps {
                let mid = w[0] + (s as f64 + 0.5) * dt;
                let (r1, r0) = traj.rates_at(mid);
                let rates = RateMatrices::new_unchecked(r1, r0)?;
                if !rates.is_cp() {
                    non_cp += 1;
                }
                let li = liouvillian_unchecked(&rates);
                rho = crate::channel::apply_propagator(&propagator(&li, dt), &rho);
            }
        }
        Ok((rho, non_cp))
    };

    let (mut prev, mut non_cp) = run(1)?;
    let mut substeps = 1usize;
    for level in 1..=MAX_LEVELS {
        let next_substeps = 1usize << level;
        let (next, next_non_cp) = run(next_substeps)?;
        let diff = (next - prev)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if diff < TOL {
            let state = DensityMatrix::from_propagated(next)?;
            return Ok(TrajectoryPropagation {
                state,
                non_cp_steps: next_non_cp,
                substeps: next_substeps,
            });
        }
        prev = next;
        non_cp = next_non_cp;
        substeps = next_substeps;
    }
    let _ = (non_cp, substeps);
    Err(Error::Numerical(format!(
        "trajectory propagation did not stabilize to {TOL} after {MAX_LEVELS} halvings"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_liouvillian, propagate, rates_from_params};
    use crate::state::{make_basis, pure_to_density, BasisParams};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn flat_pair(amplitude2: f64) -> [PulseSpec; 2] {
        [
            PulseSpec::flat(1.0, 10.0, 0.0).unwrap(),
            PulseSpec::flat(amplitude2, 10.0, 0.0).unwrap(),
        ]
    }

    #[test]
    fn zero_envelope_gives_zero_rate() {
        let pulses = [PulseSpec::silent(), PulseSpec::silent()];
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 0.5, 1.0, 1.0, "unbiased").unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert_eq!(compute_rate(0, 0, &pulses, &corr, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn markov_limit_recovers_golden_rule_rate() {
        // flat unit pulse, delta kernel with scale gamma/2: R -> gamma
        let gamma = 0.8;
        let pulses = flat_pair(1.0);
        let corr = CorrelationFn::new(
            CorrelationKind::DeltaApprox,
            0.1,
            gamma / 2.0,
            1.0,
            "infinite-T",
        )
        .unwrap();
        let sigma = corr.delta_sigma();
        let t = 0.5; // >> sigma
        let r = compute_rate(0, 0, &pulses, &corr, t).unwrap();
        assert!(
            (r - gamma).abs() / gamma < 0.01,
            "R = {r}, expected about {gamma} (sigma = {sigma})"
        );
    }

    #[test]
    fn delayed_pulses_suppress_cross_rate() {
        let sigma = 1.0;
        let delay = 10.0;
        let pulses = [
            PulseSpec::gaussian(1.0, sigma, 0.0).unwrap(),
            PulseSpec::gaussian(1.0, sigma, delay).unwrap(),
        ];
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 0.5, 1.0, 1.0, "unbiased").unwrap();
        // evaluate inside pulse 1 where its own rate has built up
        let t = 7.0;
        let r11 = compute_rate(0, 0, &pulses, &corr, t).unwrap();
        let r12 = compute_rate(0, 1, &pulses, &corr, t).unwrap();
        assert!(r11 > 0.1, "self rate too small: {r11}");
        assert!(
            r12.abs() <= 1e-3 * r11,
            "cross rate {r12} not suppressed vs {r11}"
        );
    }

    #[test]
    fn identical_pulses_make_symmetric_rates() {
        let pulses = flat_pair(1.0);
        let corr =
            CorrelationFn::new(CorrelationKind::Gaussian, 0.7, 0.9, 1.0, "unbiased").unwrap();
        for t in [0.3, 1.0, 4.0] {
            let r11 = compute_rate(0, 0, &pulses, &corr, t).unwrap();
            let r22 = compute_rate(1, 1, &pulses, &corr, t).unwrap();
            let r12 = compute_rate(0, 1, &pulses, &corr, t).unwrap();
            let r21 = compute_rate(1, 0, &pulses, &corr, t).unwrap();
            assert_abs_diff_eq!(r11, r22, epsilon = 1e-12);
            assert_abs_diff_eq!(r12, r21, epsilon = 1e-12);
            assert_abs_diff_eq!(r11, r12, epsilon = 1e-9); // full memory
        }
    }

    #[test]
    fn different_envelopes_induce_asymmetry() {
        let pulses = flat_pair(2.0);
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 0.5, 1.0, 1.0, "unbiased").unwrap();
        let t = 2.0;
        let r11 = compute_rate(0, 0, &pulses, &corr, t).unwrap();
        let r22 = compute_rate(1, 1, &pulses, &corr, t).unwrap();
        assert!(r22 > 3.9 * r11 && r22 < 4.1 * r11, "r11={r11} r22={r22}");
    }

    #[test]
    fn silent_partner_kills_cross_rates() {
        let pulses = [PulseSpec::flat(1.0, 5.0, 0.0).unwrap(), PulseSpec::silent()];
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 0.5, 1.0, 1.0, "unbiased").unwrap();
        let grid = [0.0, 1.0, 2.0];
        let traj = rate_trajectory(&pulses, &corr, &grid).unwrap();
        for r in traj.rates() {
            assert_eq!(r.r1()[(0, 1)], 0.0);
            assert_eq!(r.r1()[(1, 0)], 0.0);
            assert_eq!(r.r1()[(1, 1)], 0.0);
        }
    }

    #[test]
    fn swapping_pulse_labels_swaps_rates() {
        let p1 = PulseSpec::gaussian(1.0, 0.5, 0.0).unwrap().with_chirp(2.0);
        let p2 = PulseSpec::flat(0.7, 3.0, 0.5).unwrap().with_carrier(1.5);
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 0.4, 1.0, 1.0, "unbiased").unwrap();
        let fwd = [p1.clone(), p2.clone()];
        let rev = [p2, p1];
        let t = 2.2;
        assert_abs_diff_eq!(
            compute_rate(0, 0, &fwd, &corr, t).unwrap(),
            compute_rate(1, 1, &rev, &corr, t).unwrap(),
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            compute_rate(0, 1, &fwd, &corr, t).unwrap(),
            compute_rate(1, 0, &rev, &corr, t).unwrap(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn quadrature_imaginary_residue_vanishes_for_real_integrand() {
        let pulses = flat_pair(1.0);
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 0.5, 1.0, 1.0, "unbiased").unwrap();
        let (_, integral) = rate_parts(0, 0, &pulses, &corr, 1.7).unwrap();
        assert!(integral.im.abs() <= 1e-10, "im = {:e}", integral.im);
    }

    #[test]
    fn co_timed_pulses_give_full_memory_params() {
        let pulses = flat_pair(1.0);
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 1.0, 0.5, 1.0, "unbiased").unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let traj = rate_trajectory(&pulses, &corr, &grid).unwrap();
        let eff = effective_params(&traj, 2.0).unwrap();
        assert_abs_diff_eq!(eff.zeta(), 0.0, epsilon = 1e-12);
        assert!(eff.mu() > 0.999, "mu = {}", eff.mu());
        assert_abs_diff_eq!(eff.alpha(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn delayed_pulses_give_low_memory_params() {
        let pulses = [
            PulseSpec::gaussian(1.0, 0.3, 0.0).unwrap(),
            PulseSpec::gaussian(1.0, 0.3, 8.0).unwrap(),
        ];
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 0.2, 1.0, 1.0, "unbiased").unwrap();
        let grid: Vec<f64> = (0..=60).map(|i| i as f64 * 0.2).collect();
        let traj = rate_trajectory(&pulses, &corr, &grid).unwrap();
        let eff = effective_params(&traj, 12.0).unwrap();
        assert!(eff.mu() < 0.05, "mu = {}", eff.mu());
    }

    #[test]
    fn doubled_amplitude_gives_asymmetry() {
        let pulses = flat_pair(2.0);
        let corr =
            CorrelationFn::new(CorrelationKind::Exponential, 0.5, 1.0, 0.4, "warm").unwrap();
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
        let traj = rate_trajectory(&pulses, &corr, &grid).unwrap();
        let eff = effective_params(&traj, 3.0).unwrap();
        assert!(eff.zeta() > 0.5, "zeta = {}", eff.zeta());
        assert_abs_diff_eq!(eff.alpha(), 0.6, epsilon = 1e-9); // 1 - bias
    }

    #[test]
    fn effective_params_roundtrip_constant_trajectory() {
        let params = ChannelParams::new(1.3, 0.25, 0.4, 0.5).unwrap();
        let rates = rates_from_params(&params);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let traj = RateTrajectory::new(times, vec![rates; 11]).unwrap();
        let eff = effective_params(&traj, 3.0).unwrap();
        assert_abs_diff_eq!(eff.nu1(), params.nu1(), epsilon = 1e-9);
        assert_abs_diff_eq!(eff.alpha(), params.alpha(), epsilon = 1e-9);
        assert_abs_diff_eq!(eff.zeta(), params.zeta(), epsilon = 1e-9);
        assert_abs_diff_eq!(eff.mu(), params.mu(), epsilon = 1e-9);
    }

    #[test]
    fn effective_params_reject_zero_average() {
        let zero = RateMatrices::new(Matrix2::zeros(), Matrix2::zeros()).unwrap();
        let traj = RateTrajectory::new(vec![0.0, 1.0], vec![zero; 2]).unwrap();
        assert!(matches!(
            effective_params(&traj, 1.0),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn constant_trajectory_propagation_matches_constant_generator() {
        let params = ChannelParams::new(0.9, 0.5, 0.3, 0.6).unwrap();
        let rates = rates_from_params(&params);
        let times: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
        let traj = RateTrajectory::new(times, vec![rates; 9]).unwrap();
        let rho0 = pure_to_density(&make_basis(BasisParams::bell())[0]);
        let via_traj = propagate_with_trajectory(&rho0, &traj).unwrap();
        assert_eq!(via_traj.non_cp_steps, 0);
        let li = build_liouvillian(&rates).unwrap();
        let direct = propagate(&rho0, &li, 2.0).unwrap();
        let diff = (via_traj.state.matrix() - direct.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9, "diff = {diff:.3e}");
    }

    #[test]
    fn zero_trajectory_is_identity_map() {
        let zero = RateMatrices::new(Matrix2::zeros(), Matrix2::zeros()).unwrap();
        let traj = RateTrajectory::new(vec![0.0, 0.5, 1.0], vec![zero; 3]).unwrap();
        let rho0 = pure_to_density(&make_basis(BasisParams::new(0.6, 0.2).unwrap())[2]);
        let out = propagate_with_trajectory(&rho0, &traj).unwrap();
        let diff = (out.state.matrix() - rho0.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn non_cp_intervals_are_flagged() {
        let good = RateMatrices::new(Matrix2::new(0.5, 0.0, 0.0, 0.5), Matrix2::zeros()).unwrap();
        let bad = RateMatrices::new_unchecked(
            Matrix2::new(0.1, 0.4, 0.4, 0.1), // det < 0
            Matrix2::zeros(),
        )
        .unwrap();
        let traj = RateTrajectory::new(vec![0.0, 0.4, 0.8], vec![good, bad, good]).unwrap();
        let rho0 = DensityMatrix::maximally_mixed();
        let out = propagate_with_trajectory(&rho0, &traj).unwrap();
        assert!(out.non_cp_steps > 0);
    }

    #[test]
    fn trajectory_grid_must_ascend() {
        let zero = RateMatrices::new(Matrix2::zeros(), Matrix2::zeros()).unwrap();
        assert!(RateTrajectory::new(vec![0.0, 0.0], vec![zero; 2]).is_err());
        assert!(RateTrajectory::new(vec![], vec![]).is_err());
        assert!(RateTrajectory::new(vec![1.0, 0.5], vec![zero; 2]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn rates_scale_quadratically_with_amplitude(c in 0.2f64..3.0) {
            let base = flat_pair(1.0);
            let scaled = [
                PulseSpec::flat(c, 10.0, 0.0).unwrap(),
                PulseSpec::flat(c, 10.0, 0.0).unwrap(),
            ];
            let corr = CorrelationFn::new(CorrelationKind::Exponential, 0.5, 1.0, 1.0, "unbiased")
                .unwrap();
            let t = 1.3;
            let r_base = compute_rate(0, 0, &base, &corr, t).unwrap();
            let r_scaled = compute_rate(0, 0, &scaled, &corr, t).unwrap();
            prop_assert!((r_scaled - c * c * r_base).abs() < 1e-8 * c * c * r_base.abs().max(1.0));
        }
    }
}

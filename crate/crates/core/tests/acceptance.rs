//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured figures (run with `--nocapture` to see them).

use qchan::capacity::{
    chi_for_basis, f_closed_form, limit_relation_residual, optimize_capacity, LimitCase,
};
use qchan::channel::{apply_channel, build_liouvillian, propagate, rates_from_params, ChannelParams};
use qchan::pulse::{
    compute_rate, propagate_with_trajectory, rate_trajectory, CorrelationFn, CorrelationKind,
    PulseSpec, RateTrajectory,
};
use qchan::state::{
    holevo_chi, make_basis, pure_to_density, von_neumann_entropy, BasisParams, DensityMatrix,
    Ensemble,
};

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_density<R: Rng>(rng: &mut R) -> DensityMatrix {
    let g: Matrix4<C64> =
        Matrix4::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    DensityMatrix::new(rho / C64::new(tr, 0.0)).expect("Ginibre state is valid")
}

fn random_feasible_channel<R: Rng>(rng: &mut R) -> (ChannelParams, f64) {
    let zeta: f64 = rng.gen_range(0.0..1.0);
    let mu_max = (1.0 - zeta * zeta).sqrt();
    let params = ChannelParams::new(
        rng.gen_range(0.01..2.0),
        rng.gen_range(0.0..1.0),
        zeta,
        rng.gen_range(0.0..mu_max.max(1e-12)),
    )
    .expect("sampled inside the feasible disk");
    let nu_t: f64 = rng.gen_range(0.0..5.0);
    let t = nu_t / params.nu1();
    (params, t)
}

fn max_abs_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.matrix() - b.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_1_channel_validity_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_trace: f64 = 0.0;
    let mut worst_herm: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    for _ in 0..200 {
        let (params, t) = random_feasible_channel(&mut rng);
        let li = build_liouvillian(&rates_from_params(&params)).unwrap();
        // a random mixed state and a random basis state through the channel
        let m_phi: f64 = rng.gen_range(0.0..1.0);
        let m_psi: f64 = rng.gen_range(0.0..1.0);
        let basis = make_basis(BasisParams::new(m_phi, m_psi).unwrap());
        let inputs = [
            random_density(&mut rng),
            pure_to_density(&basis[rng.gen_range(0..4)]),
        ];
        for rho0 in &inputs {
            // propagate re-validates Hermiticity, unit trace and PSD at the
            // DensityMatrix tolerances (1e-10 / 1e-10 / -1e-10)
            let rho = propagate(rho0, &li, t).unwrap();
            let m = rho.matrix();
            worst_trace = worst_trace.max((m.trace().re - 1.0).abs() + m.trace().im.abs());
            let herm = (m - m.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            worst_herm = worst_herm.max(herm);
            worst_eig = worst_eig.max(-rho.eigenvalues().min());
        }
    }
    assert!(worst_trace <= 1e-10);
    assert!(worst_herm <= 1e-10);
    assert!(worst_eig <= 1e-10);
    println!(
        "[PASS] criterion 1: 200 random channels, worst |tr-1| = {worst_trace:.2e}, \
         hermiticity = {worst_herm:.2e}, min eigenvalue >= -{worst_eig:.2e}"
    );
}

#[test]
fn criterion_2_singlet_invariance() {
    let singlet = pure_to_density(&make_basis(BasisParams::bell())[3]);
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 0.3, 0.7, 1.0] {
        let params = ChannelParams::new(1.0, alpha, 0.0, 1.0).unwrap();
        let li = build_liouvillian(&rates_from_params(&params)).unwrap();
        for nu_t in [0.5, 1.0, 2.5, 5.0] {
            let rho = propagate(&singlet, &li, nu_t).unwrap();
            worst = worst.max(max_abs_diff(&rho, &singlet));
        }
    }
    assert!(worst <= 1e-8, "singlet drifted by {worst:.3e}");
    println!("[PASS] criterion 2: singlet invariant under correlated depolarization, max drift = {worst:.2e}");
}

#[test]
fn criterion_3_optimal_basis_structure() {
    const GRID_RES: f64 = 0.05 + 1e-9;
    const MIN_MARGIN: f64 = 1e-3;
    for nu_t in [0.1, 0.2] {
        // (i) unbiased symmetric full-memory channel: entangled Psi pair
        let ch = ChannelParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let opt = optimize_capacity(&ch, nu_t).unwrap();
        assert!(
            (opt.m_psi - 1.0).abs() <= GRID_RES,
            "(i) nu_t={nu_t}: m_psi* = {}",
            opt.m_psi
        );
        let fac = chi_for_basis(&ch, nu_t, BasisParams::factorized()).unwrap().chi;
        let margin_i = opt.capacity_bits - fac;
        assert!(margin_i > MIN_MARGIN, "(i) margin over factorized = {margin_i}");

        // (ii) fully asymmetric memoryless channel: factorized basis, any alpha
        let mut margin_ii: f64 = f64::INFINITY;
        for alpha in [0.0, 0.5, 1.0] {
            let ch = ChannelParams::new(1.0, alpha, 1.0, 0.0).unwrap();
            let opt = optimize_capacity(&ch, nu_t).unwrap();
            assert!(
                opt.m_phi.abs() <= GRID_RES && opt.m_psi.abs() <= GRID_RES,
                "(ii) nu_t={nu_t} alpha={alpha}: argmax ({}, {})",
                opt.m_phi,
                opt.m_psi
            );
            for family in [BasisParams::bell(), BasisParams::combined()] {
                let alt = chi_for_basis(&ch, nu_t, family).unwrap().chi;
                margin_ii = margin_ii.min(opt.capacity_bits - alt);
            }
        }
        assert!(margin_ii > MIN_MARGIN, "(ii) margin = {margin_ii}");

        // (iii) biased symmetric full-memory channel: combined basis
        let ch = ChannelParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let opt = optimize_capacity(&ch, nu_t).unwrap();
        assert!(
            opt.m_phi.abs() <= GRID_RES && (opt.m_psi - 1.0).abs() <= GRID_RES,
            "(iii) nu_t={nu_t}: argmax ({}, {})",
            opt.m_phi,
            opt.m_psi
        );
        let mut margin_iii: f64 = f64::INFINITY;
        for family in [BasisParams::bell(), BasisParams::factorized()] {
            let alt = chi_for_basis(&ch, nu_t, family).unwrap().chi;
            margin_iii = margin_iii.min(opt.capacity_bits - alt);
        }
        assert!(margin_iii > MIN_MARGIN, "(iii) margin = {margin_iii}");

        println!(
            "[PASS] criterion 3 (nu_t={nu_t}): argmax structure holds; margins \
             (i) {margin_i:.4}, (ii) {margin_ii:.4}, (iii) {margin_iii:.4} bits"
        );
    }
}

#[test]
fn criterion_4_combined_dominates_bell_under_bias() {
    let mut worst: f64 = f64::INFINITY;
    for i in 0..=20 {
        let mu = i as f64 * 0.05;
        let ch = ChannelParams::new(1.0, 1.0, 0.0, mu).unwrap();
        let com = chi_for_basis(&ch, 0.1, BasisParams::combined()).unwrap().chi;
        let bell = chi_for_basis(&ch, 0.1, BasisParams::bell()).unwrap().chi;
        worst = worst.min(com - bell);
        assert!(
            com >= bell,
            "mu={mu}: combined {com} below Bell {bell}"
        );
    }
    println!(
        "[PASS] criterion 4: combined >= Bell on the full mu grid at alpha=1, \
         smallest margin = {worst:.4} bits"
    );
}

#[test]
fn criterion_5_m_psi_monotone_in_memory() {
    // feasible mu at zeta = 0.5: mu <= sqrt(1 - 0.25) ~ 0.866
    let mut prev = -1.0f64;
    let mut values = Vec::new();
    for i in 0..=17 {
        let mu = i as f64 * 0.05;
        let ch = ChannelParams::new(1.0, 1.0, 0.5, mu).unwrap();
        let opt = optimize_capacity(&ch, 0.2).unwrap();
        assert!(
            opt.m_psi >= prev - 1e-9,
            "m_psi* decreased at mu={mu}: {} -> {}",
            prev,
            opt.m_psi
        );
        prev = opt.m_psi;
        values.push(opt.m_psi);
    }
    let first = values.first().unwrap();
    let last = values.last().unwrap();
    assert!(*first <= 0.05, "m_psi* at mu=0 is {first}, expected the 0-region");
    assert!(*last >= 0.95, "m_psi* at mu=0.85 is {last}, expected the 1-region");
    println!(
        "[PASS] criterion 5: m_psi* non-decreasing in mu at alpha=1, zeta=0.5, \
         from {first:.3} to {last:.3}"
    );
}

#[test]
fn criterion_6_closed_form_f() {
    // nonnegativity on the 100-point grid
    let mut min_f = f64::INFINITY;
    for i in 0..100 {
        let x = 1e-3 + (5.0 - 1e-3) * i as f64 / 99.0;
        min_f = min_f.min(f_closed_form(x).unwrap());
    }
    assert!(min_f >= 0.0, "min f = {min_f}");

    // agreement with an independent 50-digit evaluation of the closed form
    let oracle: [(f64, f64); 16] = [
        (0.001, 0.0004971887941294297987),
        (0.002, 0.00098975479173391708646),
        (0.005, 0.0024442223386422060284),
        (0.01, 0.0048018421753098127183),
        (0.05, 0.021488163113914981271),
        (0.1, 0.03840882698369851049),
        (0.15, 0.052113487534318947906),
        (0.2, 0.063292661133002454404),
        (0.3, 0.07980585416505293256),
        (0.5, 0.096824601302603692717),
        (0.75, 0.10060446072736738078),
        (1.0, 0.094630634589810171632),
        (1.5, 0.072814737245756629583),
        (2.0, 0.050969886009463561193),
        (3.0, 0.021890610793520412618),
        (5.0, 0.0032833619110044669901),
    ];
    let mut worst_rel: f64 = 0.0;
    for (x, want) in oracle {
        let got = f_closed_form(x).unwrap();
        worst_rel = worst_rel.max((got - want).abs() / want.abs());
    }
    assert!(worst_rel <= 1e-10, "worst relative error {worst_rel:.2e}");
    println!(
        "[PASS] criterion 6: f >= 0 on the grid (min {min_f:.2e}) and matches the \
         high-precision oracle to {worst_rel:.2e} relative"
    );
}

#[test]
fn criterion_7_extreme_limit_relations() {
    let mut max_eps: f64 = 0.0;
    for case in LimitCase::ALL {
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let r = limit_relation_residual(case, p, 0.1).unwrap();
            max_eps = max_eps.max(r.epsilon.abs());
        }
    }
    assert!(max_eps <= 0.05, "max |epsilon| = {max_eps}");
    println!(
        "[PASS] criterion 7: all four relations hold, measured max |epsilon(p)| = \
         {max_eps:.4} bits (tolerance 0.05)"
    );
}

#[test]
fn criterion_8_markov_oracle() {
    // golden-rule rate from a flat pulse and a delta-approximated kernel
    let gamma = 0.6;
    let pulses = [
        PulseSpec::flat(1.0, 10.0, 0.0).unwrap(),
        PulseSpec::flat(1.0, 10.0, 0.0).unwrap(),
    ];
    let corr = CorrelationFn::new(
        CorrelationKind::DeltaApprox,
        0.01, // sigma = 1e-4
        gamma / 2.0,
        1.0,
        "infinite-T",
    )
    .unwrap();
    let rate = compute_rate(0, 0, &pulses, &corr, 0.5).unwrap();
    let rate_err = (rate - gamma).abs() / gamma;
    assert!(rate_err < 0.01, "rate {rate} vs gamma {gamma}");

    // trajectory propagation against the constant-rate channel; the grid is
    // dense across the short erf rise of the rate near t = 0
    let sigma = corr.delta_sigma();
    let mut grid = vec![0.0];
    let mut t = sigma / 2.0;
    while t < 8.0 * sigma {
        grid.push(t);
        t *= 2.0;
    }
    let mut t = 0.01;
    while t <= 1.0 + 1e-12 {
        grid.push(t);
        t += 0.01;
    }
    let traj = rate_trajectory(&pulses, &corr, &grid).unwrap();
    // identical co-timed pulses: R11 = R22 = R12 = gamma, i.e. nu = 2 gamma,
    // zeta = 0, mu = 1, and bias b = 1 means alpha = 0
    let constant = ChannelParams::new(2.0 * gamma, 0.0, 0.0, 1.0).unwrap();
    let li = build_liouvillian(&rates_from_params(&constant)).unwrap();
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for _ in 0..3 {
        let rho0 = random_density(&mut rng);
        let via_traj = propagate_with_trajectory(&rho0, &traj).unwrap();
        let direct = propagate(&rho0, &li, 1.0).unwrap();
        worst = worst.max(max_abs_diff(&via_traj.state, &direct));
    }
    // synthetic constant trajectory for the exact-consistency half
    let const_rates = rates_from_params(&constant);
    let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
    let const_traj = RateTrajectory::new(times, vec![const_rates; 11]).unwrap();
    let rho0 = pure_to_density(&make_basis(BasisParams::bell())[0]);
    let via_const = propagate_with_trajectory(&rho0, &const_traj).unwrap();
    let direct = propagate(&rho0, &li, 1.0).unwrap();
    let const_diff = max_abs_diff(&via_const.state, &direct);

    assert!(worst <= 1e-4, "trajectory vs constant channel: {worst:.3e}");
    assert!(const_diff <= 1e-9, "constant trajectory diff {const_diff:.3e}");
    println!(
        "[PASS] criterion 8: golden-rule rate within {:.3}% and Markov trajectory \
         within {worst:.2e} of the constant-rate channel (constant trajectory {const_diff:.2e})",
        rate_err * 100.0
    );
}

#[test]
fn criterion_9_optimizer_soundness() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let grid = {
        // probability grid of step 0.1
        let mut g = Vec::new();
        for i in 0..=10usize {
            for j in 0..=(10 - i) {
                for k in 0..=(10 - i - j) {
                    let l = 10 - i - j - k;
                    g.push([
                        i as f64 / 10.0,
                        j as f64 / 10.0,
                        k as f64 / 10.0,
                        l as f64 / 10.0,
                    ]);
                }
            }
        }
        g
    };
    let mut worst_slack = f64::INFINITY;
    for trial in 0..20 {
        let (params, t) = random_feasible_channel(&mut rng);
        let mut brute = f64::NEG_INFINITY;
        for i in 0..=10 {
            for j in 0..=10 {
                let basis = BasisParams::new(i as f64 / 10.0, j as f64 / 10.0).unwrap();
                let outs = apply_channel(basis, &params, t).unwrap();
                for p in &grid {
                    let chi = holevo_chi(&Ensemble::new(*p, outs).unwrap());
                    brute = brute.max(chi);
                }
            }
        }
        let opt = optimize_capacity(&params, t).unwrap();
        let slack = opt.capacity_bits - brute;
        worst_slack = worst_slack.min(slack);
        assert!(
            slack >= -1e-6,
            "trial {trial}: optimizer {} below brute force {brute}",
            opt.capacity_bits
        );
    }
    println!(
        "[PASS] criterion 9: optimizer >= dense-grid brute force on 20 random \
         channels (worst slack {worst_slack:.2e} bits)"
    );
}

#[test]
fn criterion_10_cli_determinism() {
    use std::process::Command;
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("sweep1.csv");
    let out2 = dir.path().join("sweep2.csv");
    let run = |out: &std::path::Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_qchan"))
            .args([
                "sweep",
                "--axis",
                "mu:0:1:0.25",
                "--alpha",
                "1",
                "--zeta",
                "0",
                "--nu-t",
                "0.1",
                "--basis",
                "bell",
                "--basis",
                "com",
                "--seed",
                "7",
                "-o",
            ])
            .arg(out)
            .status()
            .expect("qchan binary runs");
        assert!(status.success());
    };
    run(&out1);
    run(&out2);
    let bytes1 = std::fs::read(&out1).unwrap();
    let bytes2 = std::fs::read(&out2).unwrap();
    assert!(!bytes1.is_empty());
    assert_eq!(bytes1, bytes2, "repeated sweep runs differ");
    println!(
        "[PASS] criterion 10: repeated CLI sweeps are byte-identical ({} bytes)",
        bytes1.len()
    );
}

// ---------------------------------------------------------------------------
// supporting checks tied to the same gate

#[test]
fn capacity_bounds_and_noiseless_limit() {
    // C(0) = 2 exactly and 0 <= C <= 2 elsewhere
    let ch = ChannelParams::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let c0 = optimize_capacity(&ch, 0.0).unwrap();
    assert!((c0.capacity_bits - 2.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..5 {
        let (params, t) = random_feasible_channel(&mut rng);
        let c = optimize_capacity(&params, t).unwrap();
        assert!(c.capacity_bits >= 0.0 && c.capacity_bits <= 2.0);
        assert!((c.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn factorized_beats_bell_for_asymmetric_biased_channel() {
    for i in 0..=20 {
        let zeta = i as f64 * 0.05;
        let ch = ChannelParams::new(1.0, 1.0, zeta, 0.0).unwrap();
        let fac = chi_for_basis(&ch, 0.1, BasisParams::factorized()).unwrap().chi;
        let bell = chi_for_basis(&ch, 0.1, BasisParams::bell()).unwrap().chi;
        assert!(fac >= bell - 1e-9, "zeta={zeta}: fac {fac} < bell {bell}");
    }
}

#[test]
fn degenerate_output_entropies() {
    // biased channel leaves the fully entangled Phi pair degenerate
    let ch = ChannelParams::new(1.0, 1.0, 0.0, 0.0).unwrap();
    let outs = apply_channel(BasisParams::bell(), &ch, 0.3).unwrap();
    let d = (von_neumann_entropy(&outs[0]) - von_neumann_entropy(&outs[1])).abs();
    assert!(d < 1e-10, "Phi-pair entropies split by {d}");
}

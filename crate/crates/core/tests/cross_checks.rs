//! Cross-checks between the exact-diagonalization, effective-model and
//! quench layers: the closed forms predict the numerics in the appropriate
//! limits and two independent solver routes agree.

use rabi_core::ed::{self, ParityBlock};
use rabi_core::effective::{self, FreqRatio};
use rabi_core::quench::{self, IntegrateOptions, QuenchProtocol};
use rabi_core::scaling;

fn params(g: f64, ratio: f64) -> effective::ModelParams {
    effective::ModelParams::new(1.0, FreqRatio::finite(ratio).unwrap(), g).unwrap()
}

#[test]
fn ed_gap_converges_to_effective_excitation() {
    // the finite-ratio gap approaches eps_np(g); the error shrinks ~ 1/ratio
    let target = effective::excitation_energy_unit(0.5);
    let mut prev_err = f64::INFINITY;
    for &ratio in &[1e3, 1e4] {
        let res = ed::diagonalize(&params(0.5, ratio), 2, 1e-10).unwrap();
        let gap = res.energies[1] - res.energies[0];
        let rel = ((gap - target) / target).abs();
        assert!(rel < prev_err, "error must shrink with ratio");
        prev_err = rel;
    }
    assert!(prev_err < 5e-3, "relative error {prev_err} at ratio 1e4");
}

#[test]
fn ed_ground_energy_converges_to_rescaled_closed_form() {
    for &g in &[0.5, 1.5] {
        let target = effective::ground_energy_rescaled(g);
        let mut prev_err = f64::INFINITY;
        for &ratio in &[1e2, 1e3] {
            let res = ed::diagonalize(&params(g, ratio), 1, 1e-10).unwrap();
            let err = (res.energies[0] / ratio - target).abs();
            assert!(err < prev_err, "g={g}: error must shrink with ratio");
            prev_err = err;
        }
    }
}

#[test]
fn ed_critical_dx_matches_finite_freq_prediction() {
    let pred = effective::finite_freq_predictions(FreqRatio::finite(1e3).unwrap()).unwrap();
    let res = ed::diagonalize(&params(1.0, 1e3), 1, 1e-10).unwrap();
    let rel = (res.states[0].dx - pred.dx_gc).abs() / pred.dx_gc;
    assert!(rel < 0.05, "dx {} vs prediction {}", res.states[0].dx, pred.dx_gc);
}

#[test]
fn ed_gap_scaling_exponent_at_critical_point() {
    // log-log slope of the gap vs ratio over four decades
    let mut pts = Vec::new();
    for &ratio in &[1e2, 1e3, 1e4, 1e5] {
        let res = ed::diagonalize(&params(1.0, ratio), 2, 1e-10).unwrap();
        pts.push((ratio, res.energies[1] - res.energies[0]));
    }
    let fit = scaling::fit_loglog(&pts, (50.0, 2e5)).unwrap();
    assert!(
        (fit.mu + 1.0 / 3.0).abs() < 0.02,
        "gap exponent {} off -1/3",
        fit.mu
    );
}

#[test]
fn superradiant_displacement_from_ground_doublet() {
    // forming the symmetry-broken combination of the quasi-degenerate doublet
    // recovers the closed-form displacement: alpha = <even|x|odd>/2
    let p = params(2f64.sqrt(), 100.0);
    let res = ed::diagonalize(&p, 2, 1e-10).unwrap();
    assert_eq!(res.doublet_pairs(), vec![(0, 1)]);
    let basis = ed::FockBasis::new(res.cutoff_used, true).unwrap();
    let alpha_ed =
        ed::x_matrix_element(&res.eigenvectors[0], &res.eigenvectors[1], &basis).unwrap() / 2.0;
    let (_, alpha_cf) = effective::squeeze_and_displacement(&p).unwrap();
    let rel = (alpha_ed.abs() - alpha_cf.value()).abs() / alpha_cf.value();
    assert!(rel < 1e-2, "alpha ED {} vs closed form {}", alpha_ed, alpha_cf.value());
}

#[test]
fn quartic_and_full_ed_gaps_approach_each_other() {
    // the quartic Hamiltonian captures the full model ever better with ratio
    let mut prev = f64::INFINITY;
    for &ratio in &[1e3, 1e4, 1e5] {
        let full = ed::diagonalize(&params(1.0, ratio), 2, 1e-10).unwrap();
        let quart =
            ed::diagonalize_quartic(1.0, FreqRatio::finite(ratio).unwrap(), 2, 1e-11).unwrap();
        let gf = full.energies[1] - full.energies[0];
        let gq = quart.energies[1] - quart.energies[0];
        let rel = (gf / gq - 1.0).abs();
        assert!(rel < prev, "approach must be monotone (ratio {ratio}: {rel})");
        prev = rel;
    }
    assert!(prev < 5e-3);
}

#[test]
fn quench_adiabatic_limit() {
    let opts = IntegrateOptions::default();
    let e4 = quench::integrate(
        &QuenchProtocol::new(0.5, 1e4, FreqRatio::Infinite).unwrap(),
        &opts,
    )
    .unwrap();
    let e5 = quench::integrate(
        &QuenchProtocol::new(0.5, 1e5, FreqRatio::Infinite).unwrap(),
        &opts,
    )
    .unwrap();
    assert!(e4.e_r.raw < 1e-6, "E_r(tau_q=1e4) = {}", e4.e_r.raw);
    assert!(e5.e_r.raw < e4.e_r.raw, "slower quench must be more adiabatic");
}

#[test]
fn sweep_monotone_beyond_the_plateau() {
    // residual energy decreases with quench time once tau_q >~ 1/omega0
    let grid: Vec<f64> = (0..12).map(|i| 10f64.powf(0.5 + 0.25 * i as f64)).collect();
    let pts = quench::sweep_tauq(
        1.0,
        FreqRatio::Infinite,
        &grid,
        &IntegrateOptions::default(),
    )
    .unwrap();
    for w in pts.windows(2) {
        assert!(
            w[1].1.e_r.value <= w[0].1.e_r.value,
            "E_r increased between tau_q {} and {}",
            w[0].0,
            w[1].0
        );
    }
}

#[test]
fn freeze_out_coupling_tracks_quench_scaling() {
    // hat-g approaches g_c as the quench slows; consistency with the
    // asymptotic exponent -(2/3) in tau_q
    let f2 = scaling::freeze_out(1e2, 1.0).unwrap();
    let f4 = scaling::freeze_out(1e4, 1.0).unwrap();
    let slope = ((1.0 - f4.g_hat_numeric).log10() - (1.0 - f2.g_hat_numeric).log10()) / 2.0;
    assert!((slope + 2.0 / 3.0).abs() < 1e-3, "slope {slope}");
}

#[test]
fn full_matrix_route_agrees_with_block_route_small_cutoff() {
    // dense full-space solve (nalgebra) against the tridiagonal QL blocks
    let p = params(0.9, 25.0);
    let basis = ed::FockBasis::new(30, true).unwrap();
    let h = ed::build_rabi_matrix(&p, &basis, None).unwrap();
    let se = h.symmetric_eigen();
    let mut full: Vec<f64> = se.eigenvalues.iter().copied().collect();
    full.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut blocked = Vec::new();
    for b in [ParityBlock::Even, ParityBlock::Odd] {
        blocked.extend(ed::rabi_block_tridiag(&p, 30, b).unwrap().eigenvalues().unwrap());
    }
    blocked.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (a, b) in full.iter().zip(&blocked) {
        assert!((a - b).abs() < 1e-10);
    }
}

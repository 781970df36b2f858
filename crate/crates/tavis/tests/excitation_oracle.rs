//! Closed-form single-excitation evolution against a direct matrix-ODE
//! oracle: the joint state on the R = 1 truncated basis is propagated with
//! the exact exponential of the effective generator and compared amplitude
//! by amplitude.

use nalgebra::DVector;
use tavis::basis::TruncatedBasis;
use tavis::excitation::{
    analytic_single_excitation_state, analytic_state_with_grid, superposition_evolution,
    total_probability,
};
use tavis::expm::matrix_exp;
use tavis::operators::build_effective_hamiltonian;
use tavis::pulse::TimeGrid;
use tavis::{C64, SystemParams};

struct Ode {
    basis: TruncatedBasis,
    atom_idx: Vec<usize>,
    cavity_idx: usize,
    step: tavis::OperatorMatrix,
}

impl Ode {
    fn new(params: &SystemParams, dt: f64) -> Ode {
        let basis = TruncatedBasis::new(params.n_atoms, 1).unwrap();
        let h_eff = build_effective_hamiltonian(params, &basis).unwrap();
        let atom_idx = (0..params.n_atoms)
            .map(|j| basis.encode(1 << (params.n_atoms - 1 - j), 0))
            .collect();
        Ode {
            cavity_idx: basis.encode(0, 1),
            atom_idx,
            step: matrix_exp(&(h_eff * C64::new(0.0, -dt))),
            basis,
        }
    }

    fn excited(&self, k0: usize) -> DVector<C64> {
        let mut v = DVector::zeros(self.basis.dimension());
        v[self.atom_idx[k0]] = C64::from(1.0);
        v
    }
}

#[test]
fn closed_form_tracks_resonant_ode_to_a_millionth() {
    let params = SystemParams::new(3, 0.0, vec![0.0; 3], vec![1.0; 3], 1.0).unwrap();
    let dt = 0.02;
    let ode = Ode::new(&params, dt);
    let mut psi = ode.excited(0);
    let mut worst = 0.0f64;
    for i in 1..=1000 {
        psi = &ode.step * psi;
        let state = analytic_single_excitation_state(&params, 1, i as f64 * dt).unwrap();
        for j in 0..3 {
            worst = worst.max((psi[ode.atom_idx[j]] - state.c[j]).norm());
        }
        worst = worst.max((psi[ode.cavity_idx] - state.c_cavity).norm());
    }
    assert!(worst < 1e-6, "worst amplitude deviation {worst:.2e}");
}

#[test]
fn closed_form_tracks_detuned_unequal_coupling_ode() {
    // Equal atomic detunings are required; cavity detuning and couplings
    // are free. Complex round trips exercise the phase bookkeeping.
    let params =
        SystemParams::new(3, 0.45, vec![0.2; 3], vec![0.8, 1.1, 0.6], 0.7).unwrap();
    let dt = 0.04;
    let ode = Ode::new(&params, dt);
    for k in 1..=3usize {
        let mut psi = ode.excited(k - 1);
        let mut worst = 0.0f64;
        for i in 1..=500 {
            psi = &ode.step * psi;
            let state =
                analytic_single_excitation_state(&params, k, i as f64 * dt).unwrap();
            for j in 0..3 {
                worst = worst.max((psi[ode.atom_idx[j]] - state.c[j]).norm());
            }
            worst = worst.max((psi[ode.cavity_idx] - state.c_cavity).norm());
        }
        assert!(worst < 1e-6, "atom {k}: worst deviation {worst:.2e}");
    }
}

#[test]
fn emission_waveform_equals_the_cavity_leak() {
    // The emitted amplitude is √κ times the cavity amplitude along the way:
    // c_field·phi(tau) must reproduce √κ·c_cavity(tau) for tau < t.
    let params =
        SystemParams::new(2, 0.3, vec![0.1, 0.1], vec![0.9, 0.5], 1.3).unwrap();
    let t = 12.0;
    let dt = 0.01;
    let grid = TimeGrid { c0: 0, len: (t / dt) as usize, dt };
    let state = analytic_state_with_grid(&params, 1, t, grid).unwrap();
    let sk = params.kappa.sqrt();
    let mut worst = 0.0f64;
    for (c, phi_c) in state.phi.values.iter().enumerate() {
        let tau = (c as f64 + 0.5) * dt;
        let mid = analytic_single_excitation_state(&params, 1, tau).unwrap();
        let leak = C64::from(sk) * mid.c_cavity;
        // phi carries the collective frame factor e^{i·N·omega_s·(t−tau)/2}
        // relative to the instantaneous cavity amplitude.
        let rot = params.n_atoms as f64 * params.omega[0] * (t - tau) / 2.0;
        let frame = (C64::i() * rot).exp();
        worst = worst.max((state.c_field * phi_c - leak * frame).norm());
    }
    assert!(worst < 1e-9, "worst waveform deviation {worst:.2e}");
}

#[test]
fn probability_is_conserved_and_reaches_the_known_steady_split() {
    let params = SystemParams::new(3, 0.0, vec![0.0; 3], vec![1.0; 3], 1.0).unwrap();
    for &t in &[0.5, 3.0, 10.0, 40.0] {
        let state = analytic_single_excitation_state(&params, 1, t).unwrap();
        let total = total_probability(&state);
        assert!((total - 1.0).abs() < 1e-6, "t = {t}: total {total}");
    }
    let steady = analytic_single_excitation_state(&params, 1, f64::INFINITY).unwrap();
    let expect = [4.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0];
    for (j, want) in expect.iter().enumerate() {
        assert!((steady.c[j].norm_sqr() - want).abs() < 1e-12);
    }
    assert!((steady.c_field.norm_sqr() - 1.0 / 3.0).abs() < 1e-12);
    assert!(steady.c_cavity.norm() < 1e-12);

    // The long-time ODE state agrees with the steady limit.
    let dt = 0.05;
    let ode = Ode::new(&params, dt);
    let mut psi = ode.excited(0);
    for _ in 0..1600 {
        psi = &ode.step * psi;
    }
    for j in 0..3 {
        assert!((psi[ode.atom_idx[j]] - steady.c[j]).norm() < 1e-8);
    }
}

#[test]
fn superposition_matches_the_superposed_ode() {
    let params =
        SystemParams::new(3, 0.2, vec![0.1; 3], vec![1.0, 0.7, 1.2], 0.8).unwrap();
    let alpha = C64::new(0.6, 0.0);
    let beta = C64::new(0.0, 0.8);
    let dt = 0.02;
    let ode = Ode::new(&params, dt);
    let rn = 1.0 / 3.0f64.sqrt();
    let mut psi = DVector::<C64>::zeros(ode.basis.dimension());
    for k in 1..=3usize {
        let phi_k = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
        let w = alpha + beta * (C64::i() * (-phi_k)).exp();
        psi[ode.atom_idx[k - 1]] += C64::from(rn) * w;
    }
    let mut worst = 0.0f64;
    for i in 1..=600 {
        psi = &ode.step * psi;
        let state = superposition_evolution(alpha, beta, &params, i as f64 * dt).unwrap();
        for j in 0..3 {
            worst = worst.max((psi[ode.atom_idx[j]] - state.c[j]).norm());
        }
        worst = worst.max((psi[ode.cavity_idx] - state.c_cavity).norm());
    }
    assert!(worst < 1e-6, "worst superposition deviation {worst:.2e}");
}

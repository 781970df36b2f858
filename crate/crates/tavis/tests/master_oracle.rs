//! Master-equation trajectories against the closed-form single-excitation
//! solution and against the known steady-state structure.
//!
//! For one initial excitation the Lindblad equation is solvable exactly:
//! the no-jump branch follows the closed-form joint amplitudes and every
//! jump lands in the stationary ground state, so
//! ρ(t) = |ψ(t)⟩⟨ψ(t)| + (1 − ‖ψ(t)‖²)·|g…g,0⟩⟨g…g,0|.

use nalgebra::DVector;
use tavis::basis::TruncatedBasis;
use tavis::excitation::analytic_single_excitation_state;
use tavis::master::{
    atom1_excitation_probability, ground_fidelity, integrate_fock_master,
    integrate_vacuum_master, steady_state, validate_density_matrix,
};
use tavis::pulse::{gaussian_pulse, PulseShape, TimeGrid};
use tavis::{C64, DensityMatrix, SystemParams};

fn fig_params() -> SystemParams {
    SystemParams::new(3, 1.0, vec![1.0; 3], vec![1.0; 3], 1.5).unwrap()
}

fn pure_state(dim: usize, idx: usize) -> DensityMatrix {
    let mut v = DVector::<C64>::zeros(dim);
    v[idx] = C64::from(1.0);
    &v * v.adjoint()
}

#[test]
fn vacuum_master_matches_the_closed_form_dilation() {
    let params = fig_params();
    let basis = TruncatedBasis::new(3, 1).unwrap();
    let rho0 = pure_state(basis.dimension(), basis.encode(0b100, 0));
    let dt = 1.0 / 300.0;
    let traj = integrate_vacuum_master(&params, &rho0, (0.0, 20.0), dt).unwrap();
    assert!(traj.max_trace_drift < 1e-8, "trace drift {}", traj.max_trace_drift);

    let atom_idx = [basis.encode(0b100, 0), basis.encode(0b010, 0), basis.encode(0b001, 0)];
    let cav_idx = basis.encode(0, 1);
    let mut worst = 0.0f64;
    for (i, rho) in traj.states.iter().enumerate() {
        let t = traj.times[i];
        let state = analytic_single_excitation_state(&params, 1, t).unwrap();
        let mut psi = DVector::<C64>::zeros(basis.dimension());
        for j in 0..3 {
            psi[atom_idx[j]] = state.c[j];
        }
        psi[cav_idx] = state.c_cavity;
        let mut pred = &psi * psi.adjoint();
        pred[(0, 0)] += C64::from(1.0 - psi.norm_squared());
        worst = worst.max((rho - pred).camax());
    }
    assert!(worst < 1e-6, "worst density-matrix deviation {worst:.2e}");
    validate_density_matrix(traj.states.last().unwrap()).unwrap();
}

#[test]
fn atom1_population_settles_at_the_dark_state_weights() {
    let params = fig_params();
    let basis = TruncatedBasis::new(3, 1).unwrap();
    let dt = 1.0 / 300.0;
    // Atom 1 excited: retained |c_1|² = (2/3)² = 4/9.
    let rho0 = pure_state(basis.dimension(), basis.encode(0b100, 0));
    let traj = integrate_vacuum_master(&params, &rho0, (0.0, 30.0), dt).unwrap();
    let p1 = atom1_excitation_probability(traj.states.last().unwrap(), &basis);
    assert!((p1 - 4.0 / 9.0).abs() < 1e-3, "P1 from own excitation: {p1}");

    // Atom 2 excited: atom 1 picks up |−1/3|² = 1/9.
    let rho0 = pure_state(basis.dimension(), basis.encode(0b010, 0));
    let traj = integrate_vacuum_master(&params, &rho0, (0.0, 30.0), dt).unwrap();
    let p1 = atom1_excitation_probability(traj.states.last().unwrap(), &basis);
    assert!((p1 - 1.0 / 9.0).abs() < 1e-3, "P1 from neighbour excitation: {p1}");
}

fn drive_pulse(dt: f64) -> PulseShape {
    let grid = TimeGrid::from_span(0.5, 5.5, dt).unwrap();
    gaussian_pulse(3.0, 3.0, grid).unwrap()
}

#[test]
fn single_photon_drive_does_not_move_the_dark_population() {
    // The input photon scatters off; the protected atomic population ends
    // at the same dark-state weights as the undriven decay.
    let params = fig_params();
    let basis = TruncatedBasis::new(3, 2).unwrap();
    let dt = 1.0 / 300.0;
    let xi = drive_pulse(dt);

    let rho0 = pure_state(basis.dimension(), basis.encode(0b100, 0));
    let traj = integrate_fock_master(&params, &xi, &rho0, (0.0, 30.0), dt).unwrap();
    let last = traj.states.last().unwrap();
    let p1 = atom1_excitation_probability(&last.rho11, &basis);
    assert!((p1 - 4.0 / 9.0).abs() < 1e-3, "driven P1: {p1}");

    let rho0 = pure_state(basis.dimension(), basis.encode(0b010, 0));
    let traj = integrate_fock_master(&params, &xi, &rho0, (0.0, 30.0), dt).unwrap();
    let last = traj.states.last().unwrap();
    let p1 = atom1_excitation_probability(&last.rho11, &basis);
    assert!((p1 - 1.0 / 9.0).abs() < 1e-3, "driven neighbour P1: {p1}");
}

#[test]
fn ground_start_drive_excites_then_releases_atom1() {
    let params = fig_params();
    let basis = TruncatedBasis::new(3, 1).unwrap();
    let dt = 1.0 / 300.0;
    let xi = drive_pulse(dt);
    let rho0 = pure_state(basis.dimension(), 0);
    let traj = integrate_fock_master(&params, &xi, &rho0, (0.0, 30.0), dt).unwrap();

    let mut peak = 0.0f64;
    let mut peak_t = 0.0;
    for s in &traj.states {
        let p1 = atom1_excitation_probability(&s.rho11, &basis);
        if p1 > peak {
            peak = p1;
            peak_t = s.time;
        }
    }
    assert!(peak > 0.15 && peak < 0.25, "transient peak {peak}");
    assert!(peak_t > 3.0 && peak_t < 5.0, "peak at t = {peak_t}");
    let last = traj.states.last().unwrap();
    let p_end = atom1_excitation_probability(&last.rho11, &basis);
    assert!(p_end < 1e-3, "population failed to release: {p_end}");
}

#[test]
fn zero_waveform_hierarchy_collapses_to_the_vacuum_equation() {
    let params = fig_params();
    let basis = TruncatedBasis::new(3, 1).unwrap();
    let dt = 1.0 / 300.0;
    let grid = TimeGrid::from_span(0.0, 5.0, dt).unwrap();
    let xi = PulseShape::from_fn(grid, 0.0, |_| C64::from(0.0));
    let rho0 = pure_state(basis.dimension(), basis.encode(0b110, 0));

    let fock = integrate_fock_master(&params, &xi, &rho0, (0.0, 15.0), dt).unwrap();
    let vac = integrate_vacuum_master(&params, &rho0, (0.0, 15.0), dt).unwrap();
    assert_eq!(fock.states.len(), vac.states.len());
    let mut worst = 0.0f64;
    for (f, v) in fock.states.iter().zip(&vac.states) {
        worst = worst.max((&f.rho11 - v).camax());
        // Cross components stay exactly zero without a drive.
        worst = worst.max(f.rho10.camax());
    }
    assert!(worst < 1e-10, "hierarchy deviation {worst:.2e}");
}

#[test]
fn all_excited_equal_ensembles_decay_to_the_ground_state() {
    // Equal couplings keep the evolution inside the permutation-symmetric
    // sector, which holds no dark state: everything radiates.
    for n in 1..=3usize {
        let params = SystemParams::new(n, 0.0, vec![0.0; n], vec![1.0; n], 1.0).unwrap();
        let basis = TruncatedBasis::new(n, n).unwrap();
        let all = (1usize << n) - 1;
        let rho0 = pure_state(basis.dimension(), basis.encode(all, 0));
        let rho_ss = steady_state(&params, &rho0).unwrap();
        let fid = ground_fidelity(&rho_ss);
        assert!(fid > 1.0 - 1e-5, "N = {n}: ground fidelity {fid}");
    }
}

#[test]
fn unequal_couplings_trap_excitation_in_dark_states() {
    let params = SystemParams::new(3, 0.0, vec![0.0; 3], vec![1.0, 1.5, 2.0], 1.0).unwrap();
    let basis = TruncatedBasis::new(3, 3).unwrap();
    let rho0 = pure_state(basis.dimension(), basis.encode(0b111, 0));
    let rho_ss = steady_state(&params, &rho0).unwrap();
    let residual: f64 = (0..basis.dimension())
        .map(|i| basis.excitation(i) as f64 * rho_ss[(i, i)].re)
        .sum();
    assert!(residual > 0.01, "residual excitation {residual}");
    validate_density_matrix(&rho_ss).unwrap();
}

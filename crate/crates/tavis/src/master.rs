//! Density-matrix evolution: the vacuum-input Lindblad equation and the
//! four-component hierarchy driven by a single-photon wave packet.
//!
//! Trajectories are integrated with a fixed-step classical 4th-order scheme
//! so reruns are bit-identical; every trajectory is validated against a
//! step-halved rerun.

use crate::basis::TruncatedBasis;
use crate::error::{Error, Result};
use crate::operators::{build_coupling, build_hamiltonian};
use crate::params::SystemParams;
use crate::pulse::PulseShape;
use crate::{C64, DensityMatrix, OperatorMatrix};

/// Populations changing by more than this between a run and its step-halved
/// rerun abort the integration.
const HALVING_TOL: f64 = 1e-5;

/// Cap on stored samples per trajectory; intermediate steps are still taken,
/// only the output is strided.
const MAX_SAMPLES: usize = 1200;

/// Vacuum-input trajectory: density matrices at the sampled times.
#[derive(Debug, Clone)]
pub struct MasterTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Largest |tr ρ − 1| seen at the sampled times.
    pub max_trace_drift: f64,
    /// Largest population difference against the step-halved rerun.
    pub max_halving_error: f64,
}

/// The four coupled components of the single-photon-driven hierarchy at one
/// instant. `rho11` is the physical state; `rho00` evolves under the bare
/// Lindblad generator; the cross components satisfy rho01 = rho10†.
#[derive(Debug, Clone)]
pub struct FockHierarchy {
    pub time: f64,
    pub rho11: DensityMatrix,
    pub rho10: DensityMatrix,
    pub rho01: DensityMatrix,
    pub rho00: DensityMatrix,
}

/// Single-photon-driven trajectory; each sample carries its own time.
#[derive(Debug, Clone)]
pub struct FockTrajectory {
    pub states: Vec<FockHierarchy>,
    /// Largest |tr − 1| over both unit-trace components at the sampled times.
    pub max_trace_drift: f64,
    /// Largest population difference against the step-halved rerun.
    pub max_halving_error: f64,
}

/// −i[H,ρ] + LρL† − ½{L†L,ρ} for caller-supplied operators.
///
/// The integrators below hard-code the Tavis-Cummings H and L; this entry
/// point exists so small hand-checkable systems can drive the same algebra.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    h: &OperatorMatrix,
    l: &OperatorMatrix,
) -> Result<DensityMatrix> {
    let k = rho.nrows();
    for (name, m) in [("rho", rho), ("h", h), ("l", l)] {
        if m.nrows() != k || m.ncols() != k {
            let _ = name;
            return Err(Error::DimensionMismatch { expected: k, got: m.nrows().max(m.ncols()) });
        }
    }
    let i = C64::i();
    let l_dag = l.adjoint();
    let ldl = &l_dag * l;
    let mut out = (h * rho - rho * h) * (-i);
    out += l * rho * &l_dag;
    out -= (&ldl * rho + rho * &ldl) * C64::from(0.5);
    Ok(out)
}

/// Sparse triplet operator. Both the Hamiltonian and the output coupling
/// touch O(N) states per basis vector, so the generator application is
/// quadratic in the dimension instead of cubic.
struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    fn from_dense(m: &OperatorMatrix) -> SparseOp {
        let mut entries = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v != C64::from(0.0) {
                    entries.push((r, c, v));
                }
            }
        }
        SparseOp { dim: m.nrows(), entries }
    }

    /// out += scale · self · rho
    fn acc_left(&self, rho: &DensityMatrix, out: &mut DensityMatrix, scale: C64) {
        for &(r, c, v) in &self.entries {
            let sv = scale * v;
            for j in 0..self.dim {
                out[(r, j)] += sv * rho[(c, j)];
            }
        }
    }

    /// out += scale · rho · self†
    fn acc_right_adjoint(&self, rho: &DensityMatrix, out: &mut DensityMatrix, scale: C64) {
        for &(r, c, v) in &self.entries {
            let sv = scale * v.conj();
            for i in 0..self.dim {
                out[(i, r)] += sv * rho[(i, c)];
            }
        }
    }
}

/// Precomputed pieces of the Tavis-Cummings Lindblad generator. The
/// commutator and anticommutator fold into one non-Hermitian drift
/// A = H − (i/2)L†L, leaving ρ̇ = −i(Aρ − ρA†) + LρL†.
struct Generator {
    dim: usize,
    a_drift: SparseOp,
    l: SparseOp,
    l_dag: SparseOp,
    scratch: DensityMatrix,
}

impl Generator {
    fn new(params: &SystemParams, basis: &TruncatedBasis) -> Result<Generator> {
        let h = build_hamiltonian(params, basis)?;
        let l = build_coupling(params, basis)?;
        let drift = h - (&l.adjoint() * &l) * (C64::i() * 0.5);
        Ok(Generator {
            dim: basis.dimension(),
            a_drift: SparseOp::from_dense(&drift),
            l_dag: SparseOp::from_dense(&l.adjoint()),
            l: SparseOp::from_dense(&l),
            scratch: DensityMatrix::zeros(basis.dimension(), basis.dimension()),
        })
    }

    /// out = Lindblad generator applied to rho.
    fn lindblad_into(&mut self, rho: &DensityMatrix, out: &mut DensityMatrix) {
        out.fill(C64::from(0.0));
        self.a_drift.acc_left(rho, out, -C64::i());
        self.a_drift.acc_right_adjoint(rho, out, C64::i());
        self.scratch.fill(C64::from(0.0));
        self.l.acc_left(rho, &mut self.scratch, C64::from(1.0));
        let t1 = std::mem::replace(&mut self.scratch, DensityMatrix::zeros(0, 0));
        self.l.acc_right_adjoint(&t1, out, C64::from(1.0));
        self.scratch = t1;
    }

    /// Derivative of the full component vector. Vacuum runs carry one
    /// component; driven runs carry [ρ¹¹, ρ¹⁰, ρ⁰¹, ρ⁰⁰].
    fn deriv(&mut self, t: f64, xi: Option<&PulseShape>, y: &[DensityMatrix], out: &mut [DensityMatrix]) {
        for (rho, o) in y.iter().zip(out.iter_mut()) {
            let mut taken = std::mem::replace(o, DensityMatrix::zeros(0, 0));
            self.lindblad_into(rho, &mut taken);
            *o = taken;
        }
        let Some(xi) = xi else { return };
        let x = xi.value_at(t);
        let xc = x.conj();
        let one = C64::from(1.0);
        // ρ̇¹¹ gains ξ[ρ⁰¹, L†] + ξ*[L, ρ¹⁰]
        self.l.acc_right_adjoint(&y[2], &mut out[0], x * one);
        self.l_dag.acc_left(&y[2], &mut out[0], -x);
        self.l.acc_left(&y[1], &mut out[0], xc);
        self.l_dag.acc_right_adjoint(&y[1], &mut out[0], -xc);
        // ρ̇¹⁰ gains ξ[ρ⁰⁰, L†]
        self.l.acc_right_adjoint(&y[3], &mut out[1], x);
        self.l_dag.acc_left(&y[3], &mut out[1], -x);
        // ρ̇⁰¹ gains ξ*[L, ρ⁰⁰]
        self.l.acc_left(&y[3], &mut out[2], xc);
        self.l_dag.acc_right_adjoint(&y[3], &mut out[2], -xc);
    }
}

/// Checks that `rho` is a physical density matrix: Hermitian to 1e-12,
/// unit trace to 1e-9, smallest eigenvalue above −1e-9.
pub fn validate_density_matrix(rho: &DensityMatrix) -> Result<()> {
    let k = rho.nrows();
    if rho.ncols() != k || k == 0 {
        return Err(Error::DimensionMismatch { expected: k.max(1), got: rho.ncols() });
    }
    let herm = (rho - rho.adjoint()).camax();
    if herm > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "density matrix is not Hermitian (asymmetry {herm:.2e})"
        )));
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
        return Err(Error::InvalidParams(format!("density matrix trace is {trace}, not 1")));
    }
    let min_eig = rho
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &e| m.min(e));
    if min_eig < -1e-9 {
        return Err(Error::InvalidParams(format!(
            "density matrix has negative eigenvalue {min_eig:.2e}"
        )));
    }
    Ok(())
}

/// Basis implied by a density-matrix dimension: K = 2^N·(R+1).
fn basis_for(params: &SystemParams, dim: usize) -> Result<TruncatedBasis> {
    let atoms = 1usize << params.n_atoms;
    if dim == 0 || dim % atoms != 0 {
        return Err(Error::InvalidParams(format!(
            "density matrix dimension {dim} is not 2^{}·(R+1) for any cavity truncation R",
            params.n_atoms
        )));
    }
    TruncatedBasis::new(params.n_atoms, dim / atoms - 1)
}

fn span_steps(t_span: (f64, f64), dt: f64) -> Result<(usize, f64)> {
    let (t0, t1) = t_span;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParams(format!("integration step must be positive, got {dt}")));
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidParams(format!("bad integration span [{t0}, {t1}]")));
    }
    let n = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as usize;
    Ok((n, (t1 - t0) / n as f64))
}

/// One classical 4th-order step of the component vector in place.
#[allow(clippy::too_many_arguments)]
fn rk4_step(
    gen: &mut Generator,
    xi: Option<&PulseShape>,
    t: f64,
    h: f64,
    y: &mut [DensityMatrix],
    k: &mut [Vec<DensityMatrix>; 4],
    ytmp: &mut [DensityMatrix],
) {
    let stage = |dst: &mut [DensityMatrix], src: &[DensityMatrix], ks: &[DensityMatrix], f: f64| {
        for ((d, s), kk) in dst.iter_mut().zip(src).zip(ks) {
            d.copy_from(s);
            d.zip_apply(kk, |a, b| *a += f * b);
        }
    };
    let (k1, rest) = k.split_at_mut(1);
    let (k2, rest) = rest.split_at_mut(1);
    let (k3, k4) = rest.split_at_mut(1);
    gen.deriv(t, xi, y, &mut k1[0]);
    stage(ytmp, y, &k1[0], h / 2.0);
    gen.deriv(t + h / 2.0, xi, ytmp, &mut k2[0]);
    stage(ytmp, y, &k2[0], h / 2.0);
    gen.deriv(t + h / 2.0, xi, ytmp, &mut k3[0]);
    stage(ytmp, y, &k3[0], h);
    gen.deriv(t + h, xi, ytmp, &mut k4[0]);
    for (i, yi) in y.iter_mut().enumerate() {
        yi.zip_apply(&k1[0][i], |a, b| *a += (h / 6.0) * b);
        yi.zip_apply(&k2[0][i], |a, b| *a += (h / 3.0) * b);
        yi.zip_apply(&k3[0][i], |a, b| *a += (h / 3.0) * b);
        yi.zip_apply(&k4[0][i], |a, b| *a += (h / 6.0) * b);
    }
}

/// Integrates the component vector from t0 over n steps of size h, storing
/// every `stride`-th state (and the final one). Returns (times, states).
fn integrate_components(
    gen: &mut Generator,
    xi: Option<&PulseShape>,
    y0: &[DensityMatrix],
    t0: f64,
    h: f64,
    n: usize,
    stride: usize,
) -> (Vec<f64>, Vec<Vec<DensityMatrix>>) {
    let mut y: Vec<DensityMatrix> = y0.to_vec();
    let zeros = || vec![DensityMatrix::zeros(gen.dim, gen.dim); y0.len()];
    let mut k = [zeros(), zeros(), zeros(), zeros()];
    let mut ytmp = zeros();
    let mut times = Vec::new();
    let mut states = Vec::new();
    for step in 0..=n {
        if step % stride == 0 || step == n {
            times.push(t0 + step as f64 * h);
            states.push(y.clone());
        }
        if step < n {
            rk4_step(gen, xi, t0 + step as f64 * h, h, &mut y, &mut k, &mut ytmp);
        }
    }
    (times, states)
}

/// Runs the integration at `dt` and at `dt/2`, compares populations of the
/// unit-trace components at every stored sample, and returns the samples of
/// the full-step run with the drift/halving diagnostics.
fn integrate_validated(
    gen: &mut Generator,
    xi: Option<&PulseShape>,
    y0: &[DensityMatrix],
    t_span: (f64, f64),
    dt: f64,
    physical: &[usize],
) -> Result<(Vec<f64>, Vec<Vec<DensityMatrix>>, f64, f64)> {
    let (n, h) = span_steps(t_span, dt)?;
    let stride = n.div_ceil(MAX_SAMPLES).max(1);
    let (times, states) = integrate_components(gen, xi, y0, t_span.0, h, n, stride);
    let (_, states_half) = integrate_components(gen, xi, y0, t_span.0, h / 2.0, 2 * n, 2 * stride);
    let mut halving = 0.0f64;
    let mut drift = 0.0f64;
    for (full, half) in states.iter().zip(&states_half) {
        for &p in physical {
            for i in 0..gen.dim {
                halving = halving.max((full[p][(i, i)].re - half[p][(i, i)].re).abs());
            }
            let tr = full[p].trace();
            drift = drift.max((tr.re - 1.0).abs().max(tr.im.abs()));
        }
    }
    if halving > HALVING_TOL {
        return Err(Error::StepTooLarge(format!(
            "halving the step changes populations by {halving:.2e} (tolerance {HALVING_TOL:.0e}); \
             reduce dt below {dt}"
        )));
    }
    Ok((times, states, drift, halving))
}

/// Evolves `rho0` under the vacuum-input master equation and returns the
/// sampled trajectory. The cavity truncation is inferred from the dimension
/// of `rho0`; it must be large enough to hold the initial excitation.
pub fn integrate_vacuum_master(
    params: &SystemParams,
    rho0: &DensityMatrix,
    t_span: (f64, f64),
    dt: f64,
) -> Result<MasterTrajectory> {
    params.validate()?;
    validate_density_matrix(rho0)?;
    let basis = basis_for(params, rho0.nrows())?;
    let mut gen = Generator::new(params, &basis)?;
    let (times, mut states, drift, halving) =
        integrate_validated(&mut gen, None, std::slice::from_ref(rho0), t_span, dt, &[0])?;
    Ok(MasterTrajectory {
        times,
        states: states.iter_mut().map(|v| v.swap_remove(0)).collect(),
        max_trace_drift: drift,
        max_halving_error: halving,
    })
}

/// Evolves the four-component hierarchy for a single-photon input with
/// waveform `xi`. Initially ρ¹¹ = ρ⁰⁰ = rho0 and the cross components are
/// zero; ξ is interpolated linearly at the integrator substeps and treated
/// as zero outside its grid.
pub fn integrate_fock_master(
    params: &SystemParams,
    xi: &PulseShape,
    rho0: &DensityMatrix,
    t_span: (f64, f64),
    dt: f64,
) -> Result<FockTrajectory> {
    params.validate()?;
    validate_density_matrix(rho0)?;
    let basis = basis_for(params, rho0.nrows())?;
    let mut gen = Generator::new(params, &basis)?;
    let zero = DensityMatrix::zeros(rho0.nrows(), rho0.ncols());
    let y0 = [rho0.clone(), zero.clone(), zero.clone(), rho0.clone()];
    let (times, states, drift, halving) =
        integrate_validated(&mut gen, Some(xi), &y0, t_span, dt, &[0, 3])?;
    let states = times
        .iter()
        .zip(states)
        .map(|(&time, mut v)| {
            let rho00 = v.pop().unwrap();
            let rho01 = v.pop().unwrap();
            let rho10 = v.pop().unwrap();
            let rho11 = v.pop().unwrap();
            FockHierarchy { time, rho11, rho10, rho01, rho00 }
        })
        .collect();
    Ok(FockTrajectory { states, max_trace_drift: drift, max_halving_error: halving })
}

/// Partial trace onto atom 1 in the {excited, ground} ordering.
pub fn reduce_to_atom1(rho: &DensityMatrix, basis: &TruncatedBasis) -> DensityMatrix {
    let k = basis.dimension();
    assert_eq!(rho.nrows(), k, "density matrix does not match the basis");
    assert_eq!(rho.ncols(), k, "density matrix does not match the basis");
    // Atom 1 is the most significant atom bit, so indices split in half.
    let half = k / 2;
    let mut out = DensityMatrix::zeros(2, 2);
    for g in 0..half {
        out[(0, 0)] += rho[(g + half, g + half)];
        out[(1, 1)] += rho[(g, g)];
        out[(0, 1)] += rho[(g + half, g)];
        out[(1, 0)] += rho[(g, g + half)];
    }
    out
}

/// Probability that atom 1 is excited.
pub fn atom1_excitation_probability(rho: &DensityMatrix, basis: &TruncatedBasis) -> f64 {
    let half = basis.dimension() / 2;
    (half..basis.dimension()).map(|i| rho[(i, i)].re).sum()
}

/// Overlap with the ground state |g…g, 0⟩.
pub fn ground_fidelity(rho: &DensityMatrix) -> f64 {
    rho[(0, 0)].re
}

/// Integrates under vacuum input until the generator residual ‖𝓛ρ‖_max
/// drops below 1e-10 and returns the stationary state.
pub fn steady_state(params: &SystemParams, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    params.validate()?;
    validate_density_matrix(rho0)?;
    if params.kappa <= 0.0 {
        return Err(Error::RegimeViolation(
            "steady-state search requires output coupling kappa > 0".into(),
        ));
    }
    let basis = basis_for(params, rho0.nrows())?;
    let mut gen = Generator::new(params, &basis)?;
    let dt = 0.005 / params.kappa;
    let t_max = 200.0 / params.kappa;
    let chunk_steps = 400usize;
    let residual_tol = 1e-10;

    let dim = gen.dim;
    let mut rho = rho0.clone();
    let mut residual_buf = DensityMatrix::zeros(dim, dim);
    let residual = |gen: &mut Generator, rho: &DensityMatrix, buf: &mut DensityMatrix| {
        gen.lindblad_into(rho, buf);
        buf.camax()
    };
    let mut t = 0.0;
    let mut res = residual(&mut gen, &rho, &mut residual_buf);
    if res < residual_tol {
        return Ok(rho);
    }
    let zeros = || vec![DensityMatrix::zeros(dim, dim)];
    let mut k = [zeros(), zeros(), zeros(), zeros()];
    let mut ytmp = zeros();
    let mut y = vec![rho.clone()];
    while t < t_max {
        for _ in 0..chunk_steps {
            rk4_step(&mut gen, None, t, dt, &mut y, &mut k, &mut ytmp);
            t += dt;
        }
        res = residual(&mut gen, &y[0], &mut residual_buf);
        if res < residual_tol {
            rho = y.swap_remove(0);
            return Ok(rho);
        }
    }
    Err(Error::NonConvergence(format!(
        "generator residual is still {res:.2e} at t = {t_max} (tolerance {residual_tol:.0e})"
    )))
}

//! Photon-number-resolved output states under vacuum input: propagators,
//! transition matrices, sector wavefunctions on the ordered emission-time
//! simplex, and steady-state readouts of the emitted pulses.
//!
//! Time is discretized into cells of width Δ. One step of the non-unitary
//! evolution applies A_0 = expm(−i·H_eff·Δ); emitting m photons within a cell
//! applies A_m = E_h·L^m·E_h with E_h = expm(−i·H_eff·Δ/2), so emission is
//! sampled at the cell midpoint. A configuration with emissions in cells
//! c_1 ≤ … ≤ c_k carries quadrature weight Δᵏ/Π(multiplicity!), which makes
//! the sector norms first-order accurate in Δ and keeps tied emission times
//! (two photons in one cell) in the bookkeeping.

use nalgebra::{DMatrix, DVector};

use crate::basis::TruncatedBasis;
use crate::error::{Error, Result};
use crate::expm::{matrix_exp, one_norm};
use crate::linear::eigenvalues;
use crate::operators::{build_coupling, build_effective_hamiltonian};
use crate::params::SystemParams;
use crate::{C64, OperatorMatrix};

/// Fundamental solution V(t) of V̇ = −i·H_eff(t)·V stored at uniform nodes
/// t_i = i·dt, with V(0) = I.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub dt: f64,
    pub nodes: Vec<OperatorMatrix>,
}

/// Generator input for [`compute_propagator`]: a constant matrix or a
/// time-dependent provider evaluated where the stepper needs it.
pub enum EffectiveHamiltonian<'a> {
    Constant(&'a OperatorMatrix),
    TimeDependent(&'a dyn Fn(f64) -> OperatorMatrix),
}

/// Two-time transition matrix G(t, τ) = V(t)·V(τ)^{-1}.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub t: f64,
    pub tau: f64,
    pub value: OperatorMatrix,
}

/// One photon-count sector of the joint state at time `time`: the system
/// K-vector for every ordered emission configuration.
#[derive(Debug, Clone)]
pub struct SectorWavefunction {
    pub photon_count: usize,
    pub time: f64,
    pub grid_step: f64,
    /// Number of time cells covering [0, time].
    pub n_cells: usize,
    /// Ordered emission cells c_1 ≤ … ≤ c_k per configuration (one empty
    /// tuple for k = 0); emission times are the cell midpoints (c + ½)Δ.
    pub emission_cells: Vec<Vec<usize>>,
    /// System state at `time` for each configuration, same order.
    pub values: Vec<DVector<C64>>,
    /// Squared sector norm under the simplex quadrature.
    pub norm: f64,
}

/// Sector norms along the evolution; `norms[i][k]` is the squared norm of
/// the k-photon sector at `times[i]`.
#[derive(Debug, Clone)]
pub struct SectorNorms {
    pub times: Vec<f64>,
    pub norms: Vec<Vec<f64>>,
}

/// Long-time emission summary: per-sector norms, the amplitude moduli of the
/// surviving system states, and normalized one-photon branch waveforms.
#[derive(Debug, Clone)]
pub struct SteadyOutputState {
    pub t_max: f64,
    pub grid_step: f64,
    pub n_cells: usize,
    /// Squared norm of each sector (index = photon count) at `t_max`.
    pub sector_norms: Vec<f64>,
    /// Per sector: (basis index, amplitude modulus) of surviving system
    /// states, entries above 1e-4.
    pub amplitudes: Vec<Vec<(usize, f64)>>,
    /// For each surviving one-photon branch: (basis index, normalized pulse
    /// samples at cell midpoints).
    pub branch_pulses: Vec<(usize, Vec<C64>)>,
}

/// Full-hypercube density extended symmetrically from an ordered sector.
#[derive(Debug, Clone)]
pub struct PlotDensity {
    pub photon_count: usize,
    pub grid_step: f64,
    pub n_cells: usize,
    /// Row-major |η(t_1,…,t_k)|²/k! over the full hypercube; integrates to
    /// the sector norm.
    pub values: Vec<f64>,
}

/// Entry-size threshold separating tracked amplitudes from dead branches.
const SUPPORT_EPS: f64 = 1e-12;

/// Propagator nodes at spacing `dt`, validated by a step-halved rerun.
pub fn compute_propagator(
    h_eff: EffectiveHamiltonian<'_>,
    dt: f64,
    n_steps: usize,
) -> Result<Propagator> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParams(format!("propagator step must be positive, got {dt}")));
    }
    let nodes = propagate(&h_eff, dt, n_steps, 1);
    let halved = propagate(&h_eff, dt, n_steps, 2);
    let mut worst = 0.0f64;
    for (a, b) in nodes.iter().zip(&halved) {
        worst = worst.max((a - b).camax());
    }
    if worst > 1e-8 {
        return Err(Error::StepTooLarge(format!(
            "halving the propagator step changes nodes by {worst:.2e} (tolerance 1e-8)"
        )));
    }
    Ok(Propagator { dt, nodes })
}

/// V at the `n_steps + 1` nodes of spacing dt, taking `refine` sub-steps per
/// node with midpoint-frozen generators.
fn propagate(
    h_eff: &EffectiveHamiltonian<'_>,
    dt: f64,
    n_steps: usize,
    refine: usize,
) -> Vec<OperatorMatrix> {
    let h = dt / refine as f64;
    let step_at = |t_mid: f64| -> OperatorMatrix {
        match h_eff {
            EffectiveHamiltonian::Constant(m) => matrix_exp(&(*m * C64::new(0.0, -h))),
            EffectiveHamiltonian::TimeDependent(f) => matrix_exp(&(f(t_mid) * C64::new(0.0, -h))),
        }
    };
    let constant_step = match h_eff {
        EffectiveHamiltonian::Constant(_) => Some(step_at(0.0)),
        EffectiveHamiltonian::TimeDependent(_) => None,
    };
    let dim = match h_eff {
        EffectiveHamiltonian::Constant(m) => m.nrows(),
        EffectiveHamiltonian::TimeDependent(f) => f(0.0).nrows(),
    };
    let mut v = OperatorMatrix::identity(dim, dim);
    let mut nodes = Vec::with_capacity(n_steps + 1);
    nodes.push(v.clone());
    for i in 0..n_steps {
        for r in 0..refine {
            let t_mid = i as f64 * dt + (r as f64 + 0.5) * h;
            v = match &constant_step {
                Some(e) => e * &v,
                None => step_at(t_mid) * &v,
            };
        }
        nodes.push(v.clone());
    }
    nodes
}

/// G(t, τ) = V(t)·V(τ)^{-1}; both times snap to the nearest node.
///
/// Because H_eff is contractive, V^{-1} grows exponentially in τ. The sector
/// machinery below never inverts V, walking forward along the simplex
/// instead; this operation exists for validation at moderate τ.
pub fn transition_matrix(prop: &Propagator, t: f64, tau: f64) -> Result<TransitionMatrix> {
    let node = |x: f64, name: &str| -> Result<usize> {
        let i = (x / prop.dt).round();
        if i < 0.0 || i as usize >= prop.nodes.len() {
            return Err(Error::InvalidParams(format!(
                "{name} = {x} outside the propagator span [0, {}]",
                (prop.nodes.len() - 1) as f64 * prop.dt
            )));
        }
        Ok(i as usize)
    };
    let it = node(t, "t")?;
    let itau = node(tau, "tau")?;
    let v_tau = &prop.nodes[itau];
    let inv = v_tau.clone().lu().try_inverse().ok_or_else(|| {
        Error::IllConditioned(format!("propagator node at tau = {tau} is singular"))
    })?;
    let cond = one_norm(v_tau) * one_norm(&inv);
    if cond > 1e12 {
        return Err(Error::IllConditioned(format!(
            "propagator node at tau = {tau} has condition estimate {cond:.2e}"
        )));
    }
    Ok(TransitionMatrix {
        t: it as f64 * prop.dt,
        tau: itau as f64 * prop.dt,
        value: &prop.nodes[it] * inv,
    })
}

/// Shared discretized-evolution operators for the sector machinery.
struct SectorEngine {
    basis: TruncatedBasis,
    dim: usize,
    dt: f64,
    /// A_m for m = 0..=max_k; A_0 is the plain step.
    a_ops: Vec<OperatorMatrix>,
    a_dag: Vec<OperatorMatrix>,
    /// Quadrature weights Δᵐ/m!.
    weights: Vec<f64>,
}

impl SectorEngine {
    fn new(params: &SystemParams, k_dim: usize, dt: f64, max_k: usize) -> Result<SectorEngine> {
        params.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParams(format!("grid step must be positive, got {dt}")));
        }
        let atoms = 1usize << params.n_atoms;
        if k_dim == 0 || k_dim % atoms != 0 {
            return Err(Error::InvalidParams(format!(
                "state dimension {k_dim} is not 2^{}·(R+1) for any cavity truncation R",
                params.n_atoms
            )));
        }
        let basis = TruncatedBasis::new(params.n_atoms, k_dim / atoms - 1)?;
        let h_eff = build_effective_hamiltonian(params, &basis)?;
        let l = build_coupling(params, &basis)?;
        let e_half = matrix_exp(&(h_eff * C64::new(0.0, -dt / 2.0)));
        let mut a_ops = vec![&e_half * &e_half];
        let mut l_pow = OperatorMatrix::identity(k_dim, k_dim);
        for _ in 1..=max_k {
            l_pow = &l_pow * &l;
            a_ops.push(&e_half * &l_pow * &e_half);
        }
        let a_dag = a_ops.iter().map(|a| a.adjoint()).collect();
        let mut weights = vec![1.0];
        for m in 1..=max_k {
            weights.push(weights[m - 1] * dt / m as f64);
        }
        Ok(SectorEngine { basis, dim: k_dim, dt, a_ops, a_dag, weights })
    }

    /// Rejects initial states that are not unit vectors or cannot emit the
    /// requested number of photons.
    fn check_initial(&self, eta0: &DVector<C64>, max_k: usize) -> Result<()> {
        if eta0.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: eta0.len() });
        }
        let norm = eta0.norm_squared();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NormViolation(format!(
                "initial state must be normalized, got squared norm {norm}"
            )));
        }
        let available = (0..self.dim)
            .filter(|&i| eta0[i].norm() > SUPPORT_EPS)
            .map(|i| self.basis.excitation(i))
            .max()
            .unwrap_or(0);
        if max_k > available {
            return Err(Error::ExcitationOverflow { requested: max_k, available });
        }
        Ok(())
    }
}

fn cell_count(t: f64, dt: f64) -> Result<usize> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!("time must be finite and non-negative, got {t}")));
    }
    Ok((t / dt).round() as usize)
}

/// Squared norm of every photon sector at each cell edge up to `t`, via the
/// sector Gram recurrence (memory independent of the simplex size).
pub fn sector_norm_trajectory(
    params: &SystemParams,
    eta0: &DVector<C64>,
    t: f64,
    grid_step: f64,
    max_k: usize,
) -> Result<SectorNorms> {
    let engine = SectorEngine::new(params, eta0.len(), grid_step, max_k)?;
    engine.check_initial(eta0, max_k)?;
    let n = cell_count(t, grid_step)?;
    let dim = engine.dim;
    let zero = C64::from(0.0);
    let one = C64::from(1.0);
    let mut gram: Vec<DMatrix<C64>> = vec![DMatrix::zeros(dim, dim); max_k + 1];
    gram[0] = eta0 * eta0.adjoint();
    let mut next: Vec<DMatrix<C64>> = vec![DMatrix::zeros(dim, dim); max_k + 1];
    let mut tmp = DMatrix::<C64>::zeros(dim, dim);

    let mut times = Vec::with_capacity(n + 1);
    let mut norms = Vec::with_capacity(n + 1);
    let record = |s: usize, gram: &[DMatrix<C64>], times: &mut Vec<f64>, norms: &mut Vec<Vec<f64>>| {
        times.push(s as f64 * grid_step);
        norms.push(gram.iter().map(|m| m.trace().re).collect());
    };
    record(0, &gram, &mut times, &mut norms);
    for s in 1..=n {
        for k in 0..=max_k {
            let mut first = true;
            for m in 0..=k {
                tmp.gemm(one, &engine.a_ops[m], &gram[k - m], zero);
                let beta = if first { zero } else { one };
                next[k].gemm(C64::from(engine.weights[m]), &tmp, &engine.a_dag[m], beta);
                first = false;
            }
        }
        std::mem::swap(&mut gram, &mut next);
        record(s, &gram, &mut times, &mut norms);
    }
    Ok(SectorNorms { times, norms })
}

/// Materializes every sector up to `max_k` at time `t`: the K-vector at each
/// ordered emission configuration.
///
/// The configuration count grows like (t/Δ)^k/k!, so this is meant for
/// validation and for plotting on coarse grids; norms over long horizons
/// come from [`sector_norm_trajectory`].
pub fn sector_wavefunctions(
    params: &SystemParams,
    eta0: &DVector<C64>,
    t: f64,
    grid_step: f64,
    max_k: usize,
) -> Result<Vec<SectorWavefunction>> {
    let engine = SectorEngine::new(params, eta0.len(), grid_step, max_k)?;
    engine.check_initial(eta0, max_k)?;
    let n = cell_count(t, grid_step)?;
    let dim = engine.dim;
    let tail_bytes = (n + 1) * dim * dim * std::mem::size_of::<C64>();
    if tail_bytes > 512 << 20 {
        return Err(Error::InvalidParams(format!(
            "materializing sectors over {n} cells needs {tail_bytes} bytes of propagator \
             powers; use a coarser grid or sector_norm_trajectory"
        )));
    }

    // x[c] = A_0^c eta0; tails[m] = A_0^m.
    let step = &engine.a_ops[0];
    let mut x = Vec::with_capacity(n + 1);
    x.push(eta0.clone());
    for c in 0..n {
        x.push(step * &x[c]);
    }
    let mut tails = Vec::with_capacity(n + 1);
    tails.push(OperatorMatrix::identity(dim, dim));
    for m in 0..n {
        tails.push(step * &tails[m]);
    }

    let mut sectors: Vec<SectorWavefunction> = (0..=max_k)
        .map(|k| SectorWavefunction {
            photon_count: k,
            time: n as f64 * grid_step,
            grid_step,
            n_cells: n,
            emission_cells: Vec::new(),
            values: Vec::new(),
            norm: 0.0,
        })
        .collect();
    sectors[0].emission_cells.push(Vec::new());
    sectors[0].values.push(x[n].clone());
    sectors[0].norm = x[n].norm_squared();

    // Depth-first walk over distinct emission cells with multiplicities;
    // each extension reuses the prefix state of its parent.
    struct Walk<'a> {
        engine: &'a SectorEngine,
        tails: &'a [OperatorMatrix],
        n: usize,
        max_k: usize,
        sectors: &'a mut [SectorWavefunction],
    }
    impl Walk<'_> {
        /// `prefix` is the state just after the emission in `cell`;
        /// `stem` lists the emission cells so far, `fact` the product of
        /// multiplicity factorials.
        fn extend(&mut self, prefix: &DVector<C64>, cell: usize, stem: &mut Vec<usize>, fact: f64) {
            let k = stem.len();
            let value = &self.tails[self.n - 1 - cell] * prefix;
            let weight = self.engine.dt.powi(k as i32) / fact;
            let sector = &mut self.sectors[k];
            sector.norm += weight * value.norm_squared();
            sector.emission_cells.push(stem.clone());
            sector.values.push(value);
            if k == self.max_k {
                return;
            }
            for next in (cell + 1)..self.n {
                let gap = next - cell - 1;
                let shifted = &self.tails[gap] * prefix;
                self.descend(&shifted, next, stem, fact);
            }
            // More emissions in the same cell: replace A_m by A_{m+1},
            // which needs the state before this cell; cheaper to treat at
            // descend time, so nothing to do here.
        }

        /// Applies every feasible multiplicity at `cell` to `before` (the
        /// state propagated up to the start of that cell).
        fn descend(&mut self, before: &DVector<C64>, cell: usize, stem: &mut Vec<usize>, fact: f64) {
            let k_used = stem.len();
            let room = self.max_k - k_used;
            let mut mult_fact = 1.0;
            for m in 1..=room {
                mult_fact *= m as f64;
                let after = &self.engine.a_ops[m] * before;
                for _ in 0..m {
                    stem.push(cell);
                }
                self.extend(&after, cell, stem, fact * mult_fact);
                for _ in 0..m {
                    stem.pop();
                }
            }
        }
    }
    if max_k >= 1 && n > 0 {
        let mut walk = Walk { engine: &engine, tails: &tails, n, max_k, sectors: &mut sectors };
        let mut stem = Vec::new();
        for first in 0..n {
            walk.descend(&x[first], first, &mut stem, 1.0);
        }
    }
    Ok(sectors)
}

/// Amplitudes of one sector projected on a single system basis state, for
/// every ordered emission configuration at time `t`. Scales to finer grids
/// than [`sector_wavefunctions`] since no K-vectors are stored.
pub fn sector_branch_amplitudes(
    params: &SystemParams,
    eta0: &DVector<C64>,
    t: f64,
    grid_step: f64,
    photon_count: usize,
    branch: usize,
) -> Result<(Vec<Vec<usize>>, Vec<C64>)> {
    let engine = SectorEngine::new(params, eta0.len(), grid_step, photon_count)?;
    engine.check_initial(eta0, photon_count)?;
    if photon_count == 0 {
        return Err(Error::InvalidParams("photon_count must be at least 1".into()));
    }
    if branch >= engine.dim {
        return Err(Error::DimensionMismatch { expected: engine.dim, got: branch });
    }
    let n = cell_count(t, grid_step)?;
    let dim = engine.dim;

    let step = &engine.a_ops[0];
    let mut x = Vec::with_capacity(n + 1);
    x.push(eta0.clone());
    for c in 0..n {
        x.push(step * &x[c]);
    }
    // rows[m] = (A_0†)^m e_branch, so a configuration ending at cell c has
    // amplitude rows[n−1−c]† · prefix.
    let mut rows = Vec::with_capacity(n.max(1));
    let mut e_b = DVector::<C64>::zeros(dim);
    e_b[branch] = C64::from(1.0);
    rows.push(e_b);
    for m in 0..n.saturating_sub(1) {
        rows.push(&engine.a_dag[0] * &rows[m]);
    }

    let mut cells_out = Vec::new();
    let mut amps_out = Vec::new();
    struct Walk<'a> {
        engine: &'a SectorEngine,
        rows: &'a [DVector<C64>],
        n: usize,
        k: usize,
        cells: &'a mut Vec<Vec<usize>>,
        amps: &'a mut Vec<C64>,
    }
    impl Walk<'_> {
        fn descend(&mut self, before: &DVector<C64>, cell: usize, stem: &mut Vec<usize>) {
            let room = self.k - stem.len();
            for m in 1..=room {
                let after = &self.engine.a_ops[m] * before;
                for _ in 0..m {
                    stem.push(cell);
                }
                if stem.len() == self.k {
                    self.cells.push(stem.clone());
                    self.amps.push(self.rows[self.n - 1 - cell].dotc(&after));
                } else {
                    // Carry the prefix forward one cell at a time so each
                    // child costs one matrix-vector product.
                    let mut shifted = after.clone();
                    for next in (cell + 1)..self.n {
                        self.descend(&shifted, next, stem);
                        shifted = &self.engine.a_ops[0] * shifted;
                    }
                }
                for _ in 0..m {
                    stem.pop();
                }
            }
        }
    }
    if n > 0 {
        let mut walk = Walk {
            engine: &engine,
            rows: &rows,
            n,
            k: photon_count,
            cells: &mut cells_out,
            amps: &mut amps_out,
        };
        let mut stem = Vec::new();
        for first in 0..n {
            walk.descend(&x[first], first, &mut stem);
        }
    }
    Ok((cells_out, amps_out))
}

/// Long-time output state: sector norms, surviving system amplitudes, and
/// normalized one-photon branch pulses sampled at cell midpoints.
///
/// `t_max` must cover the ring-down: if the zero-photon sector still holds
/// cavity-excited population above 1e-8, the run has not converged.
pub fn steady_output_state(
    params: &SystemParams,
    eta0: &DVector<C64>,
    t_max: f64,
    grid_step: f64,
) -> Result<SteadyOutputState> {
    let engine_probe = SectorEngine::new(params, eta0.len(), grid_step, 0)?;
    let available = (0..engine_probe.dim)
        .filter(|&i| eta0[i].norm() > SUPPORT_EPS)
        .map(|i| engine_probe.basis.excitation(i))
        .max()
        .unwrap_or(0);
    let max_k = available;
    let engine = SectorEngine::new(params, eta0.len(), grid_step, max_k)?;
    engine.check_initial(eta0, max_k)?;
    let n = cell_count(t_max, grid_step)?;
    if n == 0 {
        return Err(Error::InvalidParams("t_max must cover at least one cell".into()));
    }
    let dim = engine.dim;
    let zero = C64::from(0.0);
    let one = C64::from(1.0);

    let mut gram: Vec<DMatrix<C64>> = vec![DMatrix::zeros(dim, dim); max_k + 1];
    gram[0] = eta0 * eta0.adjoint();
    let mut next: Vec<DMatrix<C64>> = vec![DMatrix::zeros(dim, dim); max_k + 1];
    let mut tmp = DMatrix::<C64>::zeros(dim, dim);
    for _ in 0..n {
        for k in 0..=max_k {
            let mut first = true;
            for m in 0..=k {
                tmp.gemm(one, &engine.a_ops[m], &gram[k - m], zero);
                let beta = if first { zero } else { one };
                next[k].gemm(C64::from(engine.weights[m]), &tmp, &engine.a_dag[m], beta);
                first = false;
            }
        }
        std::mem::swap(&mut gram, &mut next);
    }

    let leftover: f64 = (0..dim)
        .filter(|&i| engine.basis.decode(i).1 > 0)
        .map(|i| gram[0][(i, i)].re)
        .sum();
    if leftover > 1e-8 {
        return Err(Error::NonConvergence(format!(
            "zero-photon sector still holds cavity population {leftover:.2e} at t_max = {t_max}; \
             increase t_max"
        )));
    }

    let sector_norms: Vec<f64> = gram.iter().map(|m| m.trace().re).collect();
    let amplitudes: Vec<Vec<(usize, f64)>> = gram
        .iter()
        .map(|m| {
            (0..dim)
                .filter_map(|i| {
                    let a = m[(i, i)].re.max(0.0).sqrt();
                    (a > 1e-4).then_some((i, a))
                })
                .collect()
        })
        .collect();

    let mut branch_pulses = Vec::new();
    if max_k >= 1 {
        for &(b, amp) in &amplitudes[1] {
            if amp < 1e-3 {
                continue;
            }
            // Settled readout: w = lim (A_0†)^m e_b, reached to machine
            // precision once the transient modes have decayed over t_max.
            let mut w = DVector::<C64>::zeros(dim);
            w[b] = C64::from(1.0);
            for _ in 0..n {
                w = &engine.a_dag[0] * w;
            }
            let mut samples = Vec::with_capacity(n);
            let mut xc = eta0.clone();
            let scale = C64::from(1.0 / amp);
            for _ in 0..n {
                let emitted = &engine.a_ops[1] * &xc;
                samples.push(w.dotc(&emitted) * scale);
                xc = &engine.a_ops[0] * xc;
            }
            branch_pulses.push((b, samples));
        }
    }

    Ok(SteadyOutputState {
        t_max: n as f64 * grid_step,
        grid_step,
        n_cells: n,
        sector_norms,
        amplitudes,
        branch_pulses,
    })
}

/// Steady two-photon amplitude onto `branch` along the slice with the second
/// emission fixed in cell `second_cell`: entry c is the amplitude for first
/// emission in cell c < second_cell.
///
/// The readout projects directly after the second emission, which is exact
/// when `branch` is stationary under the evolution (the ground state on
/// resonance); any later phase rotation is global to the slice.
pub fn steady_two_photon_slice(
    params: &SystemParams,
    eta0: &DVector<C64>,
    grid_step: f64,
    second_cell: usize,
    branch: usize,
) -> Result<Vec<C64>> {
    let engine = SectorEngine::new(params, eta0.len(), grid_step, 2)?;
    engine.check_initial(eta0, 2)?;
    if branch >= engine.dim {
        return Err(Error::DimensionMismatch { expected: engine.dim, got: branch });
    }
    let dim = engine.dim;
    let mut e_b = DVector::<C64>::zeros(dim);
    e_b[branch] = C64::from(1.0);
    // rows[m]† = e_b† A_1 A_0^m; slice value = rows[gap]† (A_1 A_0^{c} eta0).
    let r0 = &engine.a_dag[1] * &e_b;
    let mut rows = Vec::with_capacity(second_cell.max(1));
    rows.push(r0);
    for m in 0..second_cell.saturating_sub(1) {
        rows.push(&engine.a_dag[0] * &rows[m]);
    }
    let mut values = Vec::with_capacity(second_cell);
    let mut xc = eta0.clone();
    for c in 0..second_cell {
        let emitted = &engine.a_ops[1] * &xc;
        values.push(rows[second_cell - c - 1].dotc(&emitted));
        xc = &engine.a_ops[0] * xc;
    }
    Ok(values)
}

/// Extends an ordered k ≥ 2 sector symmetrically to the full hypercube.
/// Densities carry the 1/k! rescale, so the hypercube integral equals the
/// sector norm.
pub fn symmetrize_for_plot(sector: &SectorWavefunction) -> Result<PlotDensity> {
    let k = sector.photon_count;
    if k < 2 {
        return Err(Error::InvalidParams(format!(
            "symmetrization needs at least two photons, got sector {k}"
        )));
    }
    let n = sector.n_cells;
    let total = n.checked_pow(k as u32).filter(|&t| t <= 50_000_000).ok_or_else(|| {
        Error::InvalidParams(format!("hypercube {n}^{k} too large to materialize"))
    })?;
    let mut fact = 1.0;
    for m in 1..=k {
        fact *= m as f64;
    }
    let mut values = vec![0.0f64; total];
    let mut idx_buf = vec![0usize; k];
    for (cells, value) in sector.emission_cells.iter().zip(&sector.values) {
        let density = value.norm_squared() / fact;
        // Write every permutation of the ordered tuple; repeats overwrite
        // with the same number.
        permute_write(cells, &mut idx_buf, 0, n, density, &mut values);
    }
    Ok(PlotDensity { photon_count: k, grid_step: sector.grid_step, n_cells: n, values })
}

fn permute_write(
    cells: &[usize],
    idx: &mut [usize],
    depth: usize,
    n: usize,
    density: f64,
    out: &mut [f64],
) {
    if depth == idx.len() {
        let mut flat = 0usize;
        for &c in idx.iter() {
            flat = flat * n + c;
        }
        out[flat] = density;
        return;
    }
    let mut remaining = cells.to_vec();
    let mut seen = Vec::new();
    for i in 0..remaining.len() {
        let c = remaining[i];
        if seen.contains(&c) {
            continue;
        }
        seen.push(c);
        idx[depth] = c;
        remaining.remove(i);
        permute_write(&remaining, idx, depth + 1, n, density, out);
        remaining.insert(i, c);
    }
}

/// Fits `samples[i] ≈ Σ_j a_j·exp(μ_j·i·dt)` by linear prediction on the
/// Hankel pencil and returns the μ_j (rank of the fit chosen by the caller).
pub fn fit_exponents(samples: &[C64], dt: f64, rank: usize) -> Result<Vec<C64>> {
    let n = samples.len();
    let p = n / 2;
    if rank == 0 || n < 4 || rank > p || rank > n - p {
        return Err(Error::InvalidParams(format!(
            "cannot fit {rank} exponents from {n} samples"
        )));
    }
    let rows = n - p;
    let y0 = DMatrix::<C64>::from_fn(rows, p, |i, j| samples[i + j]);
    let y1 = DMatrix::<C64>::from_fn(rows, p, |i, j| samples[i + j + 1]);
    let svd = y0.svd(true, true);
    let u = svd.u.as_ref().expect("svd requested u");
    let v_t = svd.v_t.as_ref().expect("svd requested v_t");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap()
    });
    let smax = svd.singular_values[order[0]];
    if smax <= 0.0 {
        return Err(Error::InvalidParams("all samples are zero".into()));
    }
    let kept: Vec<usize> = order
        .into_iter()
        .take(rank)
        .filter(|&i| svd.singular_values[i] > 1e-12 * smax)
        .collect();
    let r = kept.len();
    let mut pencil = DMatrix::<C64>::zeros(r, r);
    for (col, &jc) in kept.iter().enumerate() {
        // column jc of V = row jc of V† conjugated
        let vcol = v_t.row(jc).adjoint();
        let y1v = &y1 * vcol;
        for (row, &jr) in kept.iter().enumerate() {
            let ucol = u.column(jr);
            pencil[(row, col)] = ucol.dotc(&y1v) / C64::from(svd.singular_values[jc]);
        }
    }
    let mut mus: Vec<C64> = eigenvalues(&pencil).iter().map(|z| z.ln() / dt).collect();
    mus.sort_by(|a, b| b.im.partial_cmp(&a.im).unwrap());
    Ok(mus)
}

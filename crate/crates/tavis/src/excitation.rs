//! Closed-form joint-state evolution for a single initially excited atom,
//! and the superradiant/subradiant superpositions built from it.
//!
//! Everything here assumes equal atomic detunings; the general case has no
//! closed form and is handled numerically by the master-equation module.

use crate::error::{Error, Result};
use crate::params::{SystemParams, DEGENERACY_TOL};
use crate::pulse::{PulseShape, TimeGrid};
use crate::C64;

/// Joint amplitudes at time `time` for evolution that started with atom `k`
/// excited and everything else empty.
///
/// The emitted single-photon component of the state is `c_field` times the
/// waveform `phi`; the squared norm of `phi` alone tends to 1 as the system
/// rings down, so `|c_field|²` is the total radiated probability.
#[derive(Debug, Clone)]
pub struct SingleExcitationState {
    pub time: f64,
    /// Atomic amplitudes, one per atom.
    pub c: Vec<C64>,
    pub c_cavity: C64,
    /// Prefactor multiplying `phi` in the emitted-photon component. Its
    /// modulus is constant in time.
    pub c_field: C64,
    /// Emission waveform on [0, time].
    pub phi: PulseShape,
}

/// Superposition evolution summary: the atomic amplitudes, the cavity
/// amplitude, and the accumulated output field as a single pulse (prefactor
/// already folded in, so `field_pulse.norm_squared()` is the radiated
/// probability).
#[derive(Debug, Clone)]
pub struct SuperpositionState {
    pub time: f64,
    pub c: Vec<C64>,
    pub c_cavity: C64,
    pub field_pulse: PulseShape,
}

/// Shared quantities of the closed-form solution.
///
/// With a = κ + 2i(ω_r − ω_s) and χ = sqrt(a² − 16·ΣΓ²), the decaying part
/// of every amplitude is a combination of e^{−(a±χ)t/4}. The two roots enter
/// symmetrically, so the branch of the square root cancels.
struct ClosedForm {
    n: usize,
    omega_s: f64,
    omega_r: f64,
    kappa: f64,
    /// ΣΓ², strictly positive.
    s_total: f64,
    a: C64,
    chi: C64,
}

impl ClosedForm {
    fn new(params: &SystemParams) -> Result<ClosedForm> {
        params.validate()?;
        if params.n_atoms == 0 {
            return Err(Error::InvalidParams("need at least one atom".into()));
        }
        let omega_s = params.equal_detunings().ok_or_else(|| {
            Error::RegimeViolation("closed-form evolution requires equal atomic detunings".into())
        })?;
        let s_total: f64 = params.gamma.iter().map(|g| g * g).sum();
        if s_total == 0.0 {
            return Err(Error::RegimeViolation(
                "closed-form evolution requires at least one nonzero coupling".into(),
            ));
        }
        let a = C64::new(params.kappa, 2.0 * (params.omega_r - omega_s));
        let chi = (a * a - 16.0 * s_total).sqrt();
        Ok(ClosedForm {
            n: params.n_atoms,
            omega_s,
            omega_r: params.omega_r,
            kappa: params.kappa,
            s_total,
            a,
            chi,
        })
    }

    /// sinh(χt/4)/χ, finite as χ → 0.
    fn stilde(&self, t: f64) -> C64 {
        let x = self.chi * (t / 4.0);
        if x.norm() < 1e-4 {
            // sinh(x)/x = 1 + x²/6 + x⁴/120 + O(x⁶); at |x| < 1e-4 the
            // truncation is below 1e-26.
            let x2 = x * x;
            (t / 4.0) * (1.0 + x2 / 6.0 + x2 * x2 / 120.0)
        } else {
            x.sinh() / self.chi
        }
    }

    /// E(t) = e^{−at/4}·(a·sinh(χt/4)/χ + cosh(χt/4)); E(0) = 1 and E → 0
    /// whenever κ > 0.
    fn envelope(&self, t: f64) -> C64 {
        let x = self.chi * (t / 4.0);
        (-self.a * (t / 4.0)).exp() * (self.a * self.stilde(t) + x.cosh())
    }

    /// Global atomic phase e^{i(N−2)ω_s t/2}.
    fn phase(&self, t: f64) -> C64 {
        (C64::i() * ((self.n as f64 - 2.0) * self.omega_s * t / 2.0)).exp()
    }

    /// Slowest decay rate among the two modes e^{−(a±χ)t/4}; zero when the
    /// system does not relax (κ = 0).
    fn slow_rate(&self) -> f64 {
        let r = (self.a - self.chi).re.min((self.a + self.chi).re) / 4.0;
        r.max(0.0)
    }

    /// Atomic, cavity, and field amplitudes at finite t for initial atom
    /// index `k0` (zero-based).
    fn amplitudes(&self, gamma: &[f64], k0: usize, t: f64) -> (Vec<C64>, C64, C64) {
        let ph = self.phase(t);
        let env = self.envelope(t);
        let gk = gamma[k0];
        let s = self.s_total;
        let c: Vec<C64> = (0..self.n)
            .map(|j| {
                if j == k0 {
                    ph * ((s - gk * gk) / s + (gk * gk / s) * env)
                } else {
                    -ph * (gamma[j] * gk / s) * (1.0 - env)
                }
            })
            .collect();
        let c_cavity = ph * C64::new(0.0, -4.0 * gk) * self.stilde(t) * (-self.a * (t / 4.0)).exp();
        let c_field = ph * (gk / s.sqrt());
        (c, c_cavity, c_field)
    }

    /// Emission waveform φ(τ) for a state evaluated at time `t`. The
    /// t-dependence is a pure phase that vanishes for ω_s = 0.
    fn phi_value(&self, t: f64, tau: f64) -> C64 {
        let amp = C64::new(0.0, -4.0 * (self.kappa * self.s_total).sqrt()) * self.stilde(tau);
        let exponent = C64::new(
            -self.kappa * tau / 4.0,
            -(self.omega_s + self.omega_r) * tau / 2.0 + self.omega_s * t,
        );
        amp * exponent.exp()
    }

    /// φ sampled on `grid`, with the measured norm recorded.
    fn phi_pulse(&self, t: f64, grid: TimeGrid) -> PulseShape {
        let mut phi = PulseShape::from_fn(grid, 1.0, |tau| self.phi_value(t, tau));
        phi.declared_norm = phi.norm_squared();
        phi
    }

    /// Horizon after which the squared norm of φ has converged to its t → ∞
    /// value to well below 1e-6.
    fn convergence_horizon(&self) -> f64 {
        20.0 / self.slow_rate()
    }
}

fn empty_pulse(dt: f64) -> PulseShape {
    PulseShape {
        grid: TimeGrid { c0: 0, len: 0, dt },
        values: Vec::new(),
        declared_norm: 0.0,
    }
}

fn default_phi_dt(cf: &ClosedForm) -> f64 {
    if cf.kappa > 0.0 {
        0.005 / cf.kappa
    } else {
        // No output coupling: φ ≡ 0 and the grid spacing is arbitrary.
        0.005
    }
}

fn check_atom_index(params: &SystemParams, k: usize) -> Result<usize> {
    if k == 0 || k > params.n_atoms {
        return Err(Error::InvalidParams(format!(
            "atom index {k} out of range 1..={}",
            params.n_atoms
        )));
    }
    Ok(k - 1)
}

/// Joint state at time `t` when atom `k` (1-based) starts excited, via the
/// closed-form solution for equal atomic detunings.
///
/// `t = ∞` returns the steady values. These carry meaningful phases only for
/// zero detuning; for ω_s ≠ 0 the entries of the returned state are the
/// moduli of the limits (stored as real numbers), because the phases keep
/// rotating forever.
///
/// The emission waveform is sampled with spacing 0.005/κ; use
/// [`analytic_state_with_grid`] to control the sampling. When the evolution
/// has fully rung down, the squared norm of φ must be 1; a sampled norm off
/// by more than 1e-3 means the grid undersamples the waveform and is
/// reported as [`Error::NormViolation`].
pub fn analytic_single_excitation_state(
    params: &SystemParams,
    k: usize,
    t: f64,
) -> Result<SingleExcitationState> {
    let cf = ClosedForm::new(params)?;
    let dt = default_phi_dt(&cf);
    if t.is_infinite() && t > 0.0 {
        return steady_state_amplitudes(params, &cf, k, dt);
    }
    let grid = if t > 0.0 && cf.kappa > 0.0 {
        TimeGrid::from_span(0.0, t, dt)?
    } else {
        TimeGrid { c0: 0, len: 0, dt }
    };
    analytic_state_on_grid(params, &cf, k, t, grid)
}

/// Same as [`analytic_single_excitation_state`] but sampling the emission
/// waveform on the caller's grid, which must start at 0 and stay inside
/// [0, t].
pub fn analytic_state_with_grid(
    params: &SystemParams,
    k: usize,
    t: f64,
    grid: TimeGrid,
) -> Result<SingleExcitationState> {
    let cf = ClosedForm::new(params)?;
    if t.is_infinite() && t > 0.0 {
        return steady_state_amplitudes(params, &cf, k, grid.dt);
    }
    if grid.c0 != 0 {
        return Err(Error::InvalidParams(
            "emission waveform grid must start at 0".into(),
        ));
    }
    if grid.t_end() > t + 0.5 * grid.dt {
        return Err(Error::InvalidParams(format!(
            "emission waveform grid extends to {} beyond the state time {t}",
            grid.t_end()
        )));
    }
    analytic_state_on_grid(params, &cf, k, t, grid)
}

fn analytic_state_on_grid(
    params: &SystemParams,
    cf: &ClosedForm,
    k: usize,
    t: f64,
    grid: TimeGrid,
) -> Result<SingleExcitationState> {
    let k0 = check_atom_index(params, k)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!(
            "evolution time must be finite and non-negative, got {t}"
        )));
    }
    let (c, c_cavity, c_field) = cf.amplitudes(&params.gamma, k0, t);
    let phi = if grid.len == 0 {
        empty_pulse(grid.dt)
    } else {
        cf.phi_pulse(t, grid)
    };
    let rate = cf.slow_rate();
    if rate * t >= 20.0 && (phi.norm_squared() - 1.0).abs() > 1e-3 {
        return Err(Error::NormViolation(format!(
            "emission waveform norm {:.6} differs from 1 after ring-down; grid spacing {} \
             undersamples the waveform",
            phi.norm_squared(),
            grid.dt
        )));
    }
    Ok(SingleExcitationState { time: t, c, c_cavity, c_field, phi })
}

/// t → ∞ limit. For κ > 0 the envelope decays, leaving
/// c_k = (S − Γ_k²)/S, c_j = −Γ_j Γ_k/S, an empty cavity, and an emitted
/// waveform of unit squared norm.
fn steady_state_amplitudes(
    params: &SystemParams,
    cf: &ClosedForm,
    k: usize,
    dt: f64,
) -> Result<SingleExcitationState> {
    let k0 = check_atom_index(params, k)?;
    if cf.kappa <= 0.0 || cf.slow_rate() <= 0.0 {
        return Err(Error::RegimeViolation(
            "steady state requires output coupling kappa > 0".into(),
        ));
    }
    let s = cf.s_total;
    let gk = params.gamma[k0];
    let zero_detuned = cf.omega_s.abs() <= DEGENERACY_TOL;
    let mut c: Vec<C64> = (0..cf.n)
        .map(|j| {
            if j == k0 {
                C64::from((s - gk * gk) / s)
            } else {
                C64::from(-params.gamma[j] * gk / s)
            }
        })
        .collect();
    let mut c_field = C64::from(gk / s.sqrt());
    if !zero_detuned {
        // The limits only have well-defined moduli; return those.
        for v in c.iter_mut() {
            *v = C64::from(v.norm());
        }
        c_field = C64::from(c_field.norm());
    }
    let horizon = cf.convergence_horizon();
    let grid = TimeGrid::from_span(0.0, horizon, dt)?;
    let mut phi = if zero_detuned {
        // φ is independent of the state time at zero detuning.
        cf.phi_pulse(0.0, grid)
    } else {
        PulseShape::from_fn(grid, 1.0, |tau| C64::from(cf.phi_value(0.0, tau).norm()))
    };
    phi.declared_norm = 1.0;
    if (phi.norm_squared() - 1.0).abs() > 1e-3 {
        return Err(Error::NormViolation(format!(
            "emission waveform norm {:.6} differs from 1 in the steady state; grid spacing {dt} \
             undersamples the waveform",
            phi.norm_squared()
        )));
    }
    Ok(SingleExcitationState {
        time: f64::INFINITY,
        c,
        c_cavity: C64::from(0.0),
        c_field,
        phi,
    })
}

/// Evolution of the superposition (α·|B⟩-like + β·|D⟩-like) initial state
/// (1/√N)·Σ_k (α + β e^{−i 2πk/N}) |atom k excited⟩, assembled from the
/// single-atom closed forms. Requires |α|² + |β|² = 1 and equal detunings.
///
/// `t = ∞` is supported for zero detuning only: the moduli-only steady
/// values of the ω_s ≠ 0 case cannot be superposed.
pub fn superposition_evolution(
    alpha: C64,
    beta: C64,
    params: &SystemParams,
    t: f64,
) -> Result<SuperpositionState> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NormViolation(format!(
            "superposition weights must satisfy |alpha|^2 + |beta|^2 = 1, got {norm}"
        )));
    }
    let cf = ClosedForm::new(params)?;
    let n = cf.n;
    let rn = 1.0 / (n as f64).sqrt();
    let weights: Vec<C64> = (1..=n)
        .map(|k| {
            let phi_k = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            alpha + beta * (C64::i() * (-phi_k)).exp()
        })
        .collect();
    let dt = default_phi_dt(&cf);

    if t.is_infinite() && t > 0.0 {
        if cf.omega_s.abs() > DEGENERACY_TOL {
            return Err(Error::RegimeViolation(
                "steady superposition requires zero atomic detuning".into(),
            ));
        }
        if cf.kappa <= 0.0 || cf.slow_rate() <= 0.0 {
            return Err(Error::RegimeViolation(
                "steady state requires output coupling kappa > 0".into(),
            ));
        }
        let s = cf.s_total;
        let mut c = vec![C64::from(0.0); n];
        let mut c_fld = C64::from(0.0);
        for (k0, w) in weights.iter().enumerate() {
            let gk = params.gamma[k0];
            for (j, cj) in c.iter_mut().enumerate() {
                let single = if j == k0 { (s - gk * gk) / s } else { -params.gamma[j] * gk / s };
                *cj += rn * w * single;
            }
            c_fld += rn * w * gk / s.sqrt();
        }
        let grid = TimeGrid::from_span(0.0, cf.convergence_horizon(), dt)?;
        let mut field_pulse = PulseShape::from_fn(grid, 1.0, |tau| c_fld * cf.phi_value(0.0, tau));
        field_pulse.declared_norm = field_pulse.norm_squared();
        return Ok(SuperpositionState {
            time: f64::INFINITY,
            c,
            c_cavity: C64::from(0.0),
            field_pulse,
        });
    }

    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParams(format!(
            "evolution time must be finite and non-negative, got {t}"
        )));
    }
    let mut c = vec![C64::from(0.0); n];
    let mut c_cavity = C64::from(0.0);
    let mut c_fld = C64::from(0.0);
    for (k0, w) in weights.iter().enumerate() {
        let (ck, ccav, cfield) = cf.amplitudes(&params.gamma, k0, t);
        for (j, cj) in c.iter_mut().enumerate() {
            *cj += rn * w * ck[j];
        }
        c_cavity += rn * w * ccav;
        c_fld += rn * w * cfield;
    }
    let field_pulse = if t > 0.0 && cf.kappa > 0.0 {
        let grid = TimeGrid::from_span(0.0, t, dt)?;
        let mut p = PulseShape::from_fn(grid, 1.0, |tau| c_fld * cf.phi_value(t, tau));
        p.declared_norm = p.norm_squared();
        p
    } else {
        empty_pulse(dt)
    };
    Ok(SuperpositionState { time: t, c, c_cavity, field_pulse })
}

/// Total probability carried by a single-excitation state; 1 up to sampling
/// error of the emission waveform.
pub fn total_probability(state: &SingleExcitationState) -> f64 {
    state.c.iter().map(|v| v.norm_sqr()).sum::<f64>()
        + state.c_cavity.norm_sqr()
        + state.c_field.norm_sqr() * state.phi.norm_squared()
}

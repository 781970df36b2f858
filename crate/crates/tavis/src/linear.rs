//! Single-excitation linear input-output model.
//!
//! In the single-excitation sector the system is a passive linear network:
//! state x = (atomic amplitudes, cavity amplitude), input the waveguide
//! field, output the reflected field. The model matrices are
//!
//! * A with diagonal (−iω_1, …, −iω_N, −iω_r − κ/2) and last row/column
//!   −iΓ_j coupling every atom to the cavity,
//! * B = (0, …, 0, −√κ)ᵀ feeding the input into the cavity,
//! * C = −Bᵀ reading the cavity back out.
//!
//! The reflection transfer function is G(s) = 1 + C(sI − A)⁻¹B and the
//! transmission-style response studied on resonance is T = G − 1.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::expm::one_norm;
use crate::params::SystemParams;
use crate::{C64, OperatorMatrix};

/// State-space matrices (A, B, C) of the single-excitation model.
///
/// A is complex symmetric (Aᵀ = A) by construction, which the rank tests
/// below exploit.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub a_matrix: OperatorMatrix,
    pub b_vector: DVector<C64>,
    pub c_vector: RowDVector<C64>,
}

/// Transfer function evaluated at one complex frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEval {
    pub s: C64,
    /// Reflection coefficient G(s).
    pub g_value: C64,
    /// T(s) = G(s) − 1.
    pub t_value: C64,
}

/// Builds the (N+1)-dimensional state-space model from system parameters.
pub fn build_linear_model(params: &SystemParams) -> Result<LinearModel> {
    params.validate()?;
    let n = params.n_atoms;
    let dim = n + 1;
    let sk = params.kappa.sqrt();

    let mut a = DMatrix::<C64>::zeros(dim, dim);
    for j in 0..n {
        a[(j, j)] = C64::new(0.0, -params.omega[j]);
        a[(j, n)] = C64::new(0.0, -params.gamma[j]);
        a[(n, j)] = C64::new(0.0, -params.gamma[j]);
    }
    a[(n, n)] = C64::new(-params.kappa / 2.0, -params.omega_r);

    let mut b = DVector::<C64>::zeros(dim);
    b[n] = C64::new(-sk, 0.0);
    let mut c = RowDVector::<C64>::zeros(dim);
    c[n] = C64::new(sk, 0.0);

    Ok(LinearModel { a_matrix: a, b_vector: b, c_vector: c })
}

/// Passivity defect: max entry of |A + A† + C†C| and |B + C†|.
///
/// Both combinations vanish identically for models built by
/// [`build_linear_model`]; the residual is the numerical evidence.
pub fn passivity_residual(model: &LinearModel) -> f64 {
    let gram =
        &model.a_matrix + model.a_matrix.adjoint() + model.c_vector.adjoint() * &model.c_vector;
    let io = &model.b_vector + model.c_vector.adjoint();
    let m1 = gram.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let m2 = io.iter().map(|z| z.norm()).fold(0.0, f64::max);
    m1.max(m2)
}

/// Evaluates G and T at s by solving the resolvent system (sI − A)x = B.
///
/// Returns [`Error::SingularResolvent`] when s is an eigenvalue of A (the
/// factorization hits a zero pivot or produces non-finite values).
pub fn transfer_function(model: &LinearModel, s: C64) -> Result<TransferEval> {
    let dim = model.a_matrix.nrows();
    let mut m = -model.a_matrix.clone();
    for i in 0..dim {
        m[(i, i)] += s;
    }
    let x = m.lu().solve(&model.b_vector).ok_or(Error::SingularResolvent { s })?;
    let g = C64::new(1.0, 0.0) + (&model.c_vector * &x)[0];
    if !g.re.is_finite() || !g.im.is_finite() {
        return Err(Error::SingularResolvent { s });
    }
    Ok(TransferEval { s, g_value: g, t_value: g - 1.0 })
}

/// Evaluates G and T from the pole-zero product over detuning groups.
///
/// Degenerate detunings are merged into groups with effective coupling
/// √(ΣΓ²) and zero-coupling groups are dropped, so the formula stays finite
/// where the raw resolvent is singular (dark-state frequencies). With
/// M surviving groups,
///
/// ```text
/// G(s) = (common − (κ/2)·P) / (common + (κ/2)·P),
/// P = Π_g (s + iω̃_g),
/// common = (s + iω_r)·P + Σ_g Γ̃_g² Π_{l≠g} (s + iω̃_l).
/// ```
pub fn transfer_product_form(params: &SystemParams, s: C64) -> Result<TransferEval> {
    params.validate()?;
    let groups = transfer_groups(params);
    let g = product_transfer_value(&groups, params.omega_r, params.kappa, s)?;
    Ok(TransferEval { s, g_value: g, t_value: g - 1.0 })
}

/// Distinct-frequency groups that actually couple, as (ω̃, Γ̃²) pairs.
/// Precomputed once so grid sweeps avoid regrouping per frequency.
pub(crate) fn transfer_groups(params: &SystemParams) -> Vec<(f64, f64)> {
    params
        .detuning_groups()
        .into_iter()
        .filter(|g| g.effective_coupling > 0.0)
        .map(|g| (g.omega, g.effective_coupling * g.effective_coupling))
        .collect()
}

/// G(s) from precomputed groups; allocation-free for use in FFT loops.
pub(crate) fn product_transfer_value(
    groups: &[(f64, f64)],
    omega_r: f64,
    kappa: f64,
    s: C64,
) -> Result<C64> {
    let mut p = C64::new(1.0, 0.0);
    for &(w, _) in groups {
        p *= s + C64::new(0.0, w);
    }
    let mut common = (s + C64::new(0.0, omega_r)) * p;
    for (k, &(_, g2)) in groups.iter().enumerate() {
        let mut prod = C64::new(g2, 0.0);
        for (l, &(w, _)) in groups.iter().enumerate() {
            if l != k {
                prod *= s + C64::new(0.0, w);
            }
        }
        common += prod;
    }
    let half_kp = C64::new(kappa / 2.0, 0.0) * p;
    let den = common + half_kp;
    if den.norm() == 0.0 {
        return Err(Error::SingularResolvent { s });
    }
    Ok((common - half_kp) / den)
}

/// |T(iω)|² on resonance: κ²ω² / ((NΓ̄² − ω²)² + κ²ω²/4).
///
/// Valid only when every detuning (atomic and cavity) is exactly zero;
/// otherwise the closed form does not apply and a
/// [`Error::RegimeViolation`] is returned.
pub fn t_magnitude_squared(params: &SystemParams, omega: f64) -> Result<f64> {
    params.validate()?;
    let detuned = params.omega_r != 0.0 || params.omega.iter().any(|&w| w != 0.0);
    if detuned {
        return Err(Error::RegimeViolation(
            "t_magnitude_squared requires all atomic and cavity detunings to be zero".into(),
        ));
    }
    let s2 = params.total_coupling().powi(2);
    let k = params.kappa;
    let w2 = omega * omega;
    Ok(k * k * w2 / ((s2 - w2).powi(2) + k * k * w2 / 4.0))
}

/// Eigenvalues of a complex matrix via its Schur form.
pub fn eigenvalues(a: &OperatorMatrix) -> Vec<C64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.clone()
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular, eigenvalues are its diagonal")
        .iter()
        .copied()
        .collect()
}

/// Outcome of an eigenvector rank test (PBH test).
///
/// `Deficient` carries the eigenvalue at which the rank drops and a unit
/// witness vector v satisfying (A − λI)v ≈ 0 and r·v ≈ 0 for the tested
/// row r; for controllability this is a dark state the input never reaches.
#[derive(Debug, Clone, PartialEq)]
pub enum PbhOutcome {
    Full,
    Deficient { eigenvalue: C64, witness: DVector<C64> },
}

impl PbhOutcome {
    pub fn is_full(&self) -> bool {
        matches!(self, PbhOutcome::Full)
    }
}

fn pbh_rank_test(a: &OperatorMatrix, row: &RowDVector<C64>) -> PbhOutcome {
    let n = a.nrows();
    let tol = 1e-10 * one_norm(a).max(1.0);
    for lam in eigenvalues(a) {
        let mut stacked = DMatrix::<C64>::zeros(n + 1, n);
        stacked.view_mut((0, 0), (n, n)).copy_from(a);
        for i in 0..n {
            stacked[(i, i)] -= lam;
        }
        stacked.row_mut(n).copy_from(row);
        let svd = stacked.svd(false, true);
        let mut idx = 0;
        for (k, sv) in svd.singular_values.iter().enumerate() {
            if *sv < svd.singular_values[idx] {
                idx = k;
            }
        }
        if svd.singular_values[idx] < tol {
            let v_t = svd.v_t.expect("requested right-singular vectors");
            let mut witness: DVector<C64> = v_t.row(idx).adjoint();
            let norm = witness.norm();
            if norm > 0.0 {
                witness /= C64::new(norm, 0.0);
            }
            return PbhOutcome::Deficient { eigenvalue: lam, witness };
        }
    }
    PbhOutcome::Full
}

/// PBH controllability test of (A, B).
///
/// A is complex symmetric here, so the stacked test on [A − λI; B†] is
/// equivalent to the usual rank test on [A − λI, B].
pub fn is_controllable(model: &LinearModel) -> PbhOutcome {
    let row: RowDVector<C64> = model.b_vector.adjoint();
    pbh_rank_test(&model.a_matrix, &row)
}

/// PBH observability test of (A, C).
pub fn is_observable(model: &LinearModel) -> PbhOutcome {
    pbh_rank_test(&model.a_matrix, &model.c_vector)
}

/// True when every eigenvalue of A lies strictly in the open left half
/// plane, margin 1e-10·(1 + ‖A‖₁). Dark states sit on the imaginary axis
/// and make this false.
pub fn is_hurwitz(model: &LinearModel) -> bool {
    let tol = 1e-10 * (1.0 + one_norm(&model.a_matrix));
    eigenvalues(&model.a_matrix).iter().all(|l| l.re < -tol)
}

//! Orthogonal decomposition into dark and bright collective modes.
//!
//! Atoms sharing a detuning form a degenerate group. A real orthogonal
//! change of basis T̃ splits each group of size n into n−1 dark
//! combinations that decouple from the cavity entirely (a decoherence-free
//! subsystem) and one bright combination that couples with strength
//! √(ΣΓ²). The cavity coordinate is kept as the last column. Extracting
//! the bright columns plus the cavity yields the minimal controllable and
//! observable model with one effective atom per group.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::linear::{build_linear_model, LinearModel};
use crate::params::{DetuningGroup, SystemParams, DEGENERACY_TOL};
use crate::{C64, OperatorMatrix};

/// Result of [`structural_decompose`].
///
/// Column layout of `transform`: for each detuning group (sorted by
/// frequency) first its dark columns, then its bright column; the cavity
/// column e_{N+1} comes last. Every column's first nonzero entry is made
/// positive so the output is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Real orthogonal basis change, atoms-then-cavity ordering on rows.
    pub transform: DMatrix<f64>,
    /// Transformed generator T̃ᵀ A T̃.
    pub a_hat: OperatorMatrix,
    /// Degenerate detuning groups, sorted by frequency.
    pub groups: Vec<DetuningGroup>,
    /// Effective bright coupling √(ΣΓ²) per group, aligned with `groups`.
    pub effective_couplings: Vec<f64>,
    /// Atoms with Γ = 0 inside some group. Their ladder vectors are
    /// degenerate, so these coordinates were passed through as identity
    /// columns (they are dark on their own).
    pub zero_coupling_atoms: Vec<usize>,
}

/// Builds the dark/bright orthogonal transform and the transformed
/// generator.
///
/// Within a group with nonzero couplings Γ_{j_1}, …, Γ_{j_m} and partial
/// sums S_k = Σ_{i≤k} Γ_{j_i}², the k-th dark column has entries
/// Γ_{j_i}·Γ_{j_{k+1}} / √(S_k S_{k+1}) at rows j_1…j_k and
/// −√(S_k/S_{k+1}) at row j_{k+1}; the bright column is Γ/√S_m on the
/// group rows. Zero-coupling members are emitted as identity columns and
/// recorded in `zero_coupling_atoms`.
pub fn structural_decompose(params: &SystemParams) -> Result<Decomposition> {
    params.validate()?;
    let n = params.n_atoms;
    let dim = n + 1;
    let groups = params.detuning_groups();

    let mut t = DMatrix::<f64>::zeros(dim, dim);
    let mut col = 0usize;
    let mut zero_coupling_atoms = Vec::new();

    for g in &groups {
        let nz: Vec<usize> =
            g.members.iter().copied().filter(|&j| params.gamma[j] != 0.0).collect();
        let zero: Vec<usize> =
            g.members.iter().copied().filter(|&j| params.gamma[j] == 0.0).collect();

        // Partial sums of squared couplings over the nonzero members.
        let mut s = Vec::with_capacity(nz.len());
        let mut acc = 0.0;
        for &j in &nz {
            acc += params.gamma[j] * params.gamma[j];
            s.push(acc);
        }

        for k in 1..nz.len() {
            for i in 0..k {
                t[(nz[i], col)] =
                    params.gamma[nz[i]] * params.gamma[nz[k]] / (s[k - 1] * s[k]).sqrt();
            }
            t[(nz[k], col)] = -(s[k - 1] / s[k]).sqrt();
            col += 1;
        }
        for &j in &zero {
            t[(j, col)] = 1.0;
            zero_coupling_atoms.push(j);
            col += 1;
        }
        if let Some(&total) = s.last() {
            let root = total.sqrt();
            for &j in &nz {
                t[(j, col)] = params.gamma[j] / root;
            }
            col += 1;
        }
    }
    t[(n, col)] = 1.0;
    col += 1;
    debug_assert_eq!(col, dim);

    for c in 0..dim {
        if let Some(r) = (0..dim).find(|&r| t[(r, c)] != 0.0) {
            if t[(r, c)] < 0.0 {
                for rr in 0..dim {
                    t[(rr, c)] = -t[(rr, c)];
                }
            }
        }
    }

    let model = build_linear_model(params)?;
    let tc = t.map(|x| C64::new(x, 0.0));
    let a_hat = tc.transpose() * &model.a_matrix * &tc;
    let effective_couplings = groups.iter().map(|g| g.effective_coupling).collect();

    Ok(Decomposition { transform: t, a_hat, groups, effective_couplings, zero_coupling_atoms })
}

/// Extracts the controllable/observable reduction: bright columns plus the
/// cavity, one effective atom per group that couples at all.
///
/// For a single fully degenerate group this is the 2×2 generator
/// −[[iω_s, i√N·Γ̄], [i√N·Γ̄, iω_r + κ/2]].
pub fn co_subsystem(decomp: &Decomposition, params: &SystemParams) -> Result<LinearModel> {
    params.validate()?;
    let n = params.n_atoms;
    if decomp.transform.nrows() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, got: decomp.transform.nrows() });
    }

    // Bright column = last column of each group block that has one.
    let mut kept = Vec::new();
    let mut col = 0usize;
    for g in &decomp.groups {
        let nz = g.members.iter().filter(|&&j| params.gamma[j] != 0.0).count();
        col += g.members.len();
        if nz > 0 {
            kept.push(col - 1);
        }
    }
    kept.push(n);

    let m = kept.len();
    let mut a = DMatrix::<C64>::zeros(m, m);
    for (r, &cr) in kept.iter().enumerate() {
        for (c, &cc) in kept.iter().enumerate() {
            a[(r, c)] = decomp.a_hat[(cr, cc)];
        }
    }
    let sk = params.kappa.sqrt();
    let mut b = DVector::<C64>::zeros(m);
    b[m - 1] = C64::new(-sk, 0.0);
    let mut c = RowDVector::<C64>::zeros(m);
    c[m - 1] = C64::new(sk, 0.0);
    Ok(LinearModel { a_matrix: a, b_vector: b, c_vector: c })
}

/// Coordinates of the uniform bright state B_N and the phased dark state
/// D_N in the T̃ column basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkBrightCoordinates {
    /// T̃ᵀ |B_N 0⟩ with B_N = Σ_k |k⟩ / √N.
    pub bright_state: DVector<C64>,
    /// T̃ᵀ |D_N 0⟩ with D_N = Σ_k e^{−iφ_k} |k⟩ / √N, φ_k = 2πk/N.
    pub dark_state: DVector<C64>,
    /// Dark-state weights α_1…α_{N−1} on the ladder columns.
    pub alpha: Vec<C64>,
}

/// Expands B_N and D_N over the decomposition columns.
///
/// Requires N ≥ 2, equal detunings, and equal nonzero coupling magnitudes;
/// outside that regime D_N is not an eigenvector and the expansion loses
/// its meaning, so a [`Error::RegimeViolation`] is returned.
pub fn dark_bright_coordinates(params: &SystemParams) -> Result<DarkBrightCoordinates> {
    params.validate()?;
    let n = params.n_atoms;
    if n < 2 {
        return Err(Error::RegimeViolation(
            "dark/bright coordinates need at least two atoms".into(),
        ));
    }
    if params.equal_detunings().is_none() {
        return Err(Error::RegimeViolation(
            "dark/bright coordinates require equal atomic detunings".into(),
        ));
    }
    let g0 = params.gamma[0].abs();
    if g0 == 0.0 || params.gamma.iter().any(|g| (g.abs() - g0).abs() > DEGENERACY_TOL * g0) {
        return Err(Error::RegimeViolation(
            "dark/bright coordinates require equal nonzero coupling magnitudes".into(),
        ));
    }

    let decomp = structural_decompose(params)?;
    let nf = n as f64;
    let mut dark = DVector::<C64>::zeros(n + 1);
    let mut bright = DVector::<C64>::zeros(n + 1);
    for k in 1..=n {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / nf;
        dark[k - 1] = C64::new(0.0, -phi).exp() / nf.sqrt();
        bright[k - 1] = C64::new(1.0 / nf.sqrt(), 0.0);
    }
    let tc = decomp.transform.map(|x| C64::new(x, 0.0));
    let dark_state = tc.transpose() * dark;
    let bright_state = tc.transpose() * bright;
    let alpha = dark_state.iter().take(n - 1).copied().collect();
    Ok(DarkBrightCoordinates { bright_state, dark_state, alpha })
}

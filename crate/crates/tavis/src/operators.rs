//! Dense operator builders on the truncated space: the collective-coupling
//! Hamiltonian, the cavity coupling operator L = √κ·a, and the non-Hermitian
//! effective Hamiltonian H − (i/2)L†L.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::TruncatedBasis;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::OperatorMatrix;

fn check_dims(params: &SystemParams, basis: &TruncatedBasis) -> Result<()> {
    params.validate()?;
    if params.n_atoms != basis.n_atoms {
        return Err(Error::DimensionMismatch { expected: basis.n_atoms, got: params.n_atoms });
    }
    Ok(())
}

/// H = ω_r·a†a + Σ_j [(ω_j/2)·σ_z,j + Γ_j·(a†σ−,j + σ+,j·a)].
///
/// Raising terms that would exceed the photon cap R are dropped; the cap is
/// exact (not an approximation) whenever R covers the initial excitation,
/// because the total excitation number is conserved.
pub fn build_hamiltonian(params: &SystemParams, basis: &TruncatedBasis) -> Result<OperatorMatrix> {
    check_dims(params, basis)?;
    let k = basis.dimension();
    let r = basis.max_cavity_photons;
    let mut h = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        let (bits, n) = basis.decode(i);
        let mut diag = params.omega_r * n as f64;
        for j in 1..=params.n_atoms {
            let sign = if basis.atom_excited(bits, j) { 0.5 } else { -0.5 };
            diag += sign * params.omega[j - 1];
        }
        h[(i, i)] = Complex64::new(diag, 0.0);
        if n < r {
            // a†σ−,j : |…e_j…, n⟩ → |…g_j…, n+1⟩ with amplitude Γ_j·√(n+1);
            // the conjugate σ+,j·a entry goes in symmetrically.
            for j in 1..=params.n_atoms {
                if basis.atom_excited(bits, j) {
                    let i2 = basis.encode(bits & !basis.atom_mask(j), n + 1);
                    let v = Complex64::new(params.gamma[j - 1] * ((n + 1) as f64).sqrt(), 0.0);
                    h[(i2, i)] += v;
                    h[(i, i2)] += v;
                }
            }
        }
    }
    Ok(h)
}

/// L = √κ·a with the truncated Fock ladder a|n⟩ = √n|n−1⟩, identity on atoms.
pub fn build_coupling(params: &SystemParams, basis: &TruncatedBasis) -> Result<OperatorMatrix> {
    check_dims(params, basis)?;
    let k = basis.dimension();
    let sk = params.kappa.sqrt();
    let mut l = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        let (bits, n) = basis.decode(i);
        if n >= 1 {
            l[(basis.encode(bits, n - 1), i)] = Complex64::new(sk * (n as f64).sqrt(), 0.0);
        }
    }
    Ok(l)
}

/// H_eff = H − (i/2)·L†L; its anti-Hermitian part is −(i/2)·κ·a†a.
pub fn build_effective_hamiltonian(
    params: &SystemParams,
    basis: &TruncatedBasis,
) -> Result<OperatorMatrix> {
    let mut h = build_hamiltonian(params, basis)?;
    for i in 0..basis.dimension() {
        let (_, n) = basis.decode(i);
        h[(i, i)] -= Complex64::new(0.0, 0.5 * params.kappa * n as f64);
    }
    Ok(h)
}

/// Total excitation number operator Σ_j σ+,jσ−,j + a†a (diagonal).
pub fn excitation_number_operator(basis: &TruncatedBasis) -> OperatorMatrix {
    let k = basis.dimension();
    let mut m = DMatrix::<Complex64>::zeros(k, k);
    for i in 0..k {
        m[(i, i)] = Complex64::new(basis.excitation(i) as f64, 0.0);
    }
    m
}

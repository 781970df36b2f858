//! Physical parameters of the model.
//!
//! All frequencies are detunings from the input-field carrier (ħ = 1), so
//! every quantity here is expressed in a single angular-frequency unit and
//! times are in its inverse.

use crate::error::{Error, Result};

/// Frequencies closer than this are treated as one degenerate group.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Parameters of N two-level atoms collectively coupled to one cavity mode
/// that decays into a single input-output channel at rate κ.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Number of two-level atoms. May be zero (empty cavity).
    pub n_atoms: usize,
    /// Cavity detuning ω_r.
    pub omega_r: f64,
    /// Atomic detunings ω_j, one per atom.
    pub omega: Vec<f64>,
    /// Coupling strengths Γ_j; may be negative or zero.
    pub gamma: Vec<f64>,
    /// Cavity decay rate κ ≥ 0.
    pub kappa: f64,
}

/// A set of atoms sharing (within [`DEGENERACY_TOL`]) one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct DetuningGroup {
    /// Representative detuning ω̃ (mean over members).
    pub omega: f64,
    /// Atom indices (0-based) in ascending order.
    pub members: Vec<usize>,
    /// Effective coupling Γ̃ = sqrt(Σ Γ_j²) over the members.
    pub effective_coupling: f64,
}

impl SystemParams {
    pub fn new(
        n_atoms: usize,
        omega_r: f64,
        omega: Vec<f64>,
        gamma: Vec<f64>,
        kappa: f64,
    ) -> Result<Self> {
        let p = SystemParams { n_atoms, omega_r, omega, gamma, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.len() != self.n_atoms {
            return Err(Error::InvalidParams(format!(
                "omega has {} entries, expected n_atoms = {}",
                self.omega.len(),
                self.n_atoms
            )));
        }
        if self.gamma.len() != self.n_atoms {
            return Err(Error::InvalidParams(format!(
                "gamma has {} entries, expected n_atoms = {}",
                self.gamma.len(),
                self.n_atoms
            )));
        }
        if !self.kappa.is_finite() || self.kappa < 0.0 {
            return Err(Error::InvalidParams(format!(
                "kappa must be finite and nonnegative, got {}",
                self.kappa
            )));
        }
        if !self.omega_r.is_finite() {
            return Err(Error::InvalidParams("omega_r must be finite".into()));
        }
        if let Some(x) = self.omega.iter().chain(self.gamma.iter()).find(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite entry {x} in omega/gamma")));
        }
        Ok(())
    }

    /// Root-mean-square coupling Γ̄ = sqrt((1/N)·Σ Γ_j²); zero for N = 0.
    pub fn gamma_bar(&self) -> f64 {
        if self.n_atoms == 0 {
            return 0.0;
        }
        (self.gamma.iter().map(|g| g * g).sum::<f64>() / self.n_atoms as f64).sqrt()
    }

    /// Collective coupling sqrt(Σ Γ_j²) = √N·Γ̄.
    pub fn total_coupling(&self) -> f64 {
        self.gamma.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Common atomic detuning if all ω_j agree within [`DEGENERACY_TOL`].
    pub fn equal_detunings(&self) -> Option<f64> {
        let first = *self.omega.first()?;
        if self.omega.iter().all(|w| (w - first).abs() <= DEGENERACY_TOL) {
            Some(self.omega.iter().sum::<f64>() / self.n_atoms as f64)
        } else {
            None
        }
    }

    /// Partition of the atoms into degenerate-detuning groups, sorted by
    /// ascending detuning; members keep their original order. Chains of
    /// frequencies with adjacent gaps below [`DEGENERACY_TOL`] merge.
    pub fn detuning_groups(&self) -> Vec<DetuningGroup> {
        let mut order: Vec<usize> = (0..self.n_atoms).collect();
        order.sort_by(|&a, &b| {
            self.omega[a].partial_cmp(&self.omega[b]).unwrap().then(a.cmp(&b))
        });
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &j in &order {
            match groups.last_mut() {
                Some(g) if (self.omega[j] - self.omega[*g.last().unwrap()]).abs() <= DEGENERACY_TOL => {
                    g.push(j)
                }
                _ => groups.push(vec![j]),
            }
        }
        groups
            .into_iter()
            .map(|mut members| {
                members.sort_unstable();
                let omega =
                    members.iter().map(|&j| self.omega[j]).sum::<f64>() / members.len() as f64;
                let effective_coupling = members
                    .iter()
                    .map(|&j| self.gamma[j] * self.gamma[j])
                    .sum::<f64>()
                    .sqrt();
                DetuningGroup { omega, members, effective_coupling }
            })
            .collect()
    }
}

//! Truncated system Hilbert space and its flat-index codec.
//!
//! A basis state is an atomic occupation bitstring together with a cavity
//! photon number n ≤ R. Atom 1 is the most significant bit and the photon
//! number is least significant, so kets read left to right like the state
//! labels: |z_1 z_2 … z_N n⟩ ↔ "egg…0".

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedBasis {
    pub n_atoms: usize,
    pub max_cavity_photons: usize,
}

impl TruncatedBasis {
    pub fn new(n_atoms: usize, max_cavity_photons: usize) -> Result<Self> {
        // 2^N·(R+1) must stay addressable; paper-scale cases are K ≤ 32.
        if n_atoms > 20 {
            return Err(Error::InvalidParams(format!(
                "n_atoms = {n_atoms} exceeds the dense-matrix limit of 20"
            )));
        }
        Ok(TruncatedBasis { n_atoms, max_cavity_photons })
    }

    /// K = 2^N·(R+1).
    pub fn dimension(&self) -> usize {
        (1usize << self.n_atoms) * (self.max_cavity_photons + 1)
    }

    /// Flat index of (atomic bitstring, photon count). Atom 1 is the MSB.
    pub fn encode(&self, atom_bits: usize, photons: usize) -> usize {
        debug_assert!(atom_bits < (1 << self.n_atoms));
        debug_assert!(photons <= self.max_cavity_photons);
        atom_bits * (self.max_cavity_photons + 1) + photons
    }

    /// Inverse of [`encode`](Self::encode).
    pub fn decode(&self, index: usize) -> (usize, usize) {
        debug_assert!(index < self.dimension());
        let r1 = self.max_cavity_photons + 1;
        (index / r1, index % r1)
    }

    /// Whether atom `atom` (1-based) is excited in `atom_bits`.
    pub fn atom_excited(&self, atom_bits: usize, atom: usize) -> bool {
        debug_assert!((1..=self.n_atoms).contains(&atom));
        atom_bits >> (self.n_atoms - atom) & 1 == 1
    }

    /// Bit mask selecting atom `atom` (1-based).
    pub fn atom_mask(&self, atom: usize) -> usize {
        debug_assert!((1..=self.n_atoms).contains(&atom));
        1 << (self.n_atoms - atom)
    }

    /// Total excitation (excited atoms plus photons) of a basis state.
    pub fn excitation(&self, index: usize) -> usize {
        let (bits, n) = self.decode(index);
        bits.count_ones() as usize + n
    }

    /// Parse a ket label like "egg0": one 'e'/'g' per atom followed by a
    /// single cavity digit ≤ R. Returns the flat index.
    pub fn parse_ket(&self, s: &str) -> Result<usize> {
        let chars: Vec<char> = s.chars().collect();
        if chars.len() != self.n_atoms + 1 {
            return Err(Error::InvalidKet(format!(
                "\"{s}\" has {} symbols, expected n_atoms + 1 = {}",
                chars.len(),
                self.n_atoms + 1
            )));
        }
        let mut bits = 0usize;
        for (i, &c) in chars[..self.n_atoms].iter().enumerate() {
            match c {
                'e' => bits |= 1 << (self.n_atoms - 1 - i),
                'g' => {}
                _ => {
                    return Err(Error::InvalidKet(format!(
                        "\"{s}\": symbol {} must be 'e' or 'g', got '{c}'",
                        i + 1
                    )))
                }
            }
        }
        let n = chars[self.n_atoms]
            .to_digit(10)
            .ok_or_else(|| Error::InvalidKet(format!("\"{s}\": last symbol must be a digit")))?
            as usize;
        if n > self.max_cavity_photons {
            return Err(Error::InvalidKet(format!(
                "\"{s}\": cavity digit {n} exceeds max_cavity_photons = {}",
                self.max_cavity_photons
            )));
        }
        Ok(self.encode(bits, n))
    }

    /// Ket label of a basis state, inverse of [`parse_ket`](Self::parse_ket)
    /// for photon numbers ≤ 9.
    pub fn label(&self, index: usize) -> String {
        let (bits, n) = self.decode(index);
        let mut s = String::with_capacity(self.n_atoms + 1);
        for i in 0..self.n_atoms {
            s.push(if bits >> (self.n_atoms - 1 - i) & 1 == 1 { 'e' } else { 'g' });
        }
        s.push_str(&n.to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_matches_formula() {
        let b = TruncatedBasis::new(3, 2).unwrap();
        assert_eq!(b.dimension(), 8 * 3);
    }

    #[test]
    fn codec_roundtrip_all_indices() {
        for n_atoms in 0..=4 {
            for r in 0..=3 {
                let b = TruncatedBasis::new(n_atoms, r).unwrap();
                for i in 0..b.dimension() {
                    let (bits, n) = b.decode(i);
                    assert_eq!(b.encode(bits, n), i);
                }
            }
        }
    }

    #[test]
    fn atom_one_is_most_significant() {
        let b = TruncatedBasis::new(3, 1).unwrap();
        let idx = b.parse_ket("egg0").unwrap();
        // |e g g 0⟩: bits = 0b100, photons = 0 → 4·2 + 0.
        assert_eq!(idx, 8);
        assert!(b.atom_excited(0b100, 1));
        assert!(!b.atom_excited(0b100, 2));
        assert_eq!(b.label(idx), "egg0");
    }

    #[test]
    fn ket_parsing_rejects_bad_strings() {
        let b = TruncatedBasis::new(2, 1).unwrap();
        assert!(b.parse_ket("eg").is_err());
        assert!(b.parse_ket("ex0").is_err());
        assert!(b.parse_ket("eg5").is_err());
        assert!(b.parse_ket("ege").is_err());
        assert_eq!(b.parse_ket("ge1").unwrap(), b.encode(0b01, 1));
    }

    #[test]
    fn excitation_counts_atoms_and_photons() {
        let b = TruncatedBasis::new(2, 2).unwrap();
        let i = b.parse_ket("ee2").unwrap();
        assert_eq!(b.excitation(i), 4);
        assert_eq!(b.excitation(b.parse_ket("gg0").unwrap()), 0);
    }

    #[test]
    fn labels_roundtrip() {
        let b = TruncatedBasis::new(3, 3).unwrap();
        for i in 0..b.dimension() {
            assert_eq!(b.parse_ket(&b.label(i)).unwrap(), i);
        }
    }
}

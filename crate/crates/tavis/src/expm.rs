//! Dense complex matrix exponential via scaling-and-squaring with a
//! Padé(13,13) approximant (Higham 2005). Used for propagators, transition
//! matrices, and the exact-stepping oracles in the test suites.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::OperatorMatrix;

pub(crate) fn one_norm(a: &OperatorMatrix) -> f64 {
    let mut max = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        max = max.max(s);
    }
    max
}

/// exp(A) for a square complex matrix.
///
/// Scaling parameter s is chosen so ‖A/2^s‖₁ ≤ θ₁₃ = 5.37; the Padé
/// numerator/denominator split follows the usual odd/even factorization and
/// the final result is squared s times.
pub fn matrix_exp(a: &OperatorMatrix) -> OperatorMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix_exp requires a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if n == 1 {
        return DMatrix::from_element(1, 1, a[(0, 0)].exp());
    }

    let theta13 = 5.371_920_351_148_152;
    let norm = one_norm(a);
    let s = if norm > theta13 { (norm / theta13).log2().ceil().max(0.0) as u32 } else { 0 };
    let scale = Complex64::new((0.5f64).powi(s as i32), 0.0);
    let a1 = a * scale;

    let eye = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let c = |k: usize| Complex64::new(PADE_NORMALIZED[k], 0.0);
    // U = A·[A6·(b13·A6 + b11·A4 + b9·A2) + b7·A6 + b5·A4 + b3·A2 + b1·I]
    let w1 = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let w2 = &a6 * &w1 + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &eye * c(1);
    let u = &a1 * &w2;
    // V = A6·(b12·A6 + b10·A4 + b8·A2) + b6·A6 + b4·A4 + b2·A2 + b0·I
    let v1 = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = &a6 * &v1 + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &eye * c(0);

    let num = &v + &u;
    let den = &v - &u;
    let mut x = den
        .lu()
        .solve(&num)
        .expect("Padé denominator is singular; input matrix has non-finite entries?");

    for _ in 0..s {
        x = &x * &x;
    }
    x
}

/// Normalized Padé(13) coefficients b_k/b_0 (Higham 2005, eq. 10.33).
const PADE_NORMALIZED: [f64; 14] = [
    1.0,
    0.5,
    0.12,
    1.833_333_333_333_333_4e-2,
    1.992_753_623_188_405_8e-3,
    1.630_434_782_608_696e-4,
    1.035_196_687_370_6e-5,
    5.175_983_436_852_9e-7,
    2.043_151_356_652_5e-8,
    6.306_022_705_717_593e-10,
    1.483_770_048_404_14e-11,
    2.529_153_491_597_966e-13,
    2.810_170_546_219_962_4e-15,
    1.544_049_750_670_309e-17,
];

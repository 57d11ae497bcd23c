use std::f64::consts::PI;

use super::{matmul, transpose, CoeffBlock, Matrix8, PixelBlock, LEVEL_SHIFT};

/// The orthonormal 8×8 DCT-II matrix `A`, so that `Y = A·X·Aᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DctBasis {
    pub a: Matrix8,
}

impl DctBasis {
    pub fn new() -> Self {
        let mut a = [[0.0; 8]; 8];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == 0 {
                    1.0 / 8f64.sqrt()
                } else {
                    0.5 * (((2 * j + 1) * i) as f64 * PI / 16.0).cos()
                };
            }
        }
        Self { a }
    }

    pub fn transposed(&self) -> Matrix8 {
        transpose(&self.a)
    }

    /// Largest deviation of `A·Aᵀ` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let p = matmul(&self.a, &self.transposed());
        let mut worst: f64 = 0.0;
        for (i, row) in p.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }
}

impl Default for DctBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// Forward 2-D DCT of a pixel block after subtracting 128.
pub fn dct2(x: &PixelBlock, basis: &DctBasis) -> CoeffBlock {
    dct2_levelshifted(&x.level_shifted(), basis)
}

/// Forward 2-D DCT of an already level-shifted (or arbitrary real) block.
pub fn dct2_levelshifted(x: &Matrix8, basis: &DctBasis) -> CoeffBlock {
    CoeffBlock::new(matmul(&matmul(&basis.a, x), &basis.transposed()))
}

/// Inverse 2-D DCT, `Aᵀ·Y·A + 128`. No clamping; that happens at pixel output.
pub fn idct2(y: &CoeffBlock, basis: &DctBasis) -> CoeffBlock {
    let x = matmul(&matmul(&basis.transposed(), &y.c), &basis.a);
    CoeffBlock::new(x).map(|_, _, v| v + LEVEL_SHIFT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basis_entries() {
        let a = DctBasis::new().a;
        assert!((a[0][0] - 0.353553).abs() < 1e-6);
        assert!((a[1][0] - 0.490393).abs() < 1e-6);
        assert!((a[7][3].abs() - 0.490393).abs() < 1e-6);
        let min_ac = a[1..]
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min);
        assert!((min_ac - 0.097545).abs() < 1e-6);
    }

    #[test]
    fn basis_is_orthonormal() {
        assert!(DctBasis::new().orthonormality_error() < 1e-12);
    }

    #[test]
    fn mid_gray_block_is_zero() {
        let y = dct2(&PixelBlock::uniform(128), &DctBasis::new());
        assert!(y.c.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn white_block_excites_only_dc() {
        let y = dct2(&PixelBlock::uniform(255), &DctBasis::new());
        assert!((y.c[0][0] - 1016.0).abs() < 1e-9);
        for (i, row) in y.c.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if (i, j) != (0, 0) {
                    assert!(v.abs() < 1e-9, "({i},{j}) = {v}");
                }
            }
        }
    }

    #[test]
    fn idct_of_zero_is_mid_gray() {
        let x = idct2(&CoeffBlock::zeros(), &DctBasis::new());
        assert!(x.c.iter().flatten().all(|&v| v == 128.0));
    }

    #[test]
    fn idct_of_dc_impulse() {
        let mut y = CoeffBlock::zeros();
        y.c[0][0] = 8.0;
        let x = idct2(&y, &DctBasis::new());
        assert!(x.c.iter().flatten().all(|&v| (v - 129.0).abs() < 1e-9));
    }

    fn any_block() -> impl Strategy<Value = PixelBlock> {
        proptest::collection::vec(0i64..=255, 64)
            .prop_map(|v| PixelBlock::from_values(&v).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip(block in any_block()) {
            let basis = DctBasis::new();
            let back = idct2(&dct2(&block, &basis), &basis);
            for r in 0..8 {
                for c in 0..8 {
                    prop_assert!((back.c[r][c] - f64::from(block.pixels[r][c])).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn energy_is_preserved(block in any_block()) {
            let basis = DctBasis::new();
            let y = dct2(&block, &basis);
            let x = CoeffBlock::new(block.level_shifted());
            prop_assert!((y.frobenius_norm() - x.frobenius_norm()).abs() < 1e-9);
        }
    }
}

use super::{CoeffBlock, JpegError};

/// Luminance table from ITU-T T.81 Annex K (Table K.1), the usual "Q50".
pub const Q50_LUMA: [[u16; 8]; 8] = [
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantTable {
    q: [[u16; 8]; 8],
}

impl QuantTable {
    pub fn new(q: [[u16; 8]; 8]) -> Result<Self, JpegError> {
        for (row, r) in q.iter().enumerate() {
            for (col, &v) in r.iter().enumerate() {
                if v == 0 {
                    return Err(JpegError::ZeroQuant { row, col });
                }
            }
        }
        Ok(Self { q })
    }

    pub fn q50() -> Self {
        Self { q: Q50_LUMA }
    }

    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.q[row][col]
    }

    pub fn entries(&self) -> &[[u16; 8]; 8] {
        &self.q
    }

    pub fn max_entry(&self) -> u16 {
        self.q.iter().flatten().copied().max().unwrap_or(1)
    }
}

impl Default for QuantTable {
    fn default() -> Self {
        Self::q50()
    }
}

/// `y / q` element-wise, without rounding.
pub fn quantize_unrounded(y: &CoeffBlock, q: &QuantTable) -> CoeffBlock {
    y.map(|i, j, v| v / f64::from(q.get(i, j)))
}

/// `y / q` rounded to nearest, ties away from zero.
pub fn quantize(y: &CoeffBlock, q: &QuantTable) -> CoeffBlock {
    quantize_unrounded(y, q).map(|_, _, v| v.round())
}

pub fn dequantize(yq: &CoeffBlock, q: &QuantTable) -> CoeffBlock {
    yq.map(|i, j, v| v * f64::from(q.get(i, j)))
}

use super::{CoeffBlock, JpegError, BLOCK_LEN};

/// Row-major index visited at each zig-zag position.
pub const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

pub fn zigzag(m: &CoeffBlock) -> [f64; 64] {
    std::array::from_fn(|k| {
        let idx = ZIGZAG[k];
        m.c[idx / 8][idx % 8]
    })
}

pub fn inverse_zigzag(seq: &[f64]) -> Result<CoeffBlock, JpegError> {
    if seq.len() != BLOCK_LEN {
        return Err(JpegError::Length { expected: BLOCK_LEN, got: seq.len() });
    }
    let mut out = CoeffBlock::zeros();
    for (k, &v) in seq.iter().enumerate() {
        let idx = ZIGZAG[k];
        out.c[idx / 8][idx % 8] = v;
    }
    Ok(out)
}

//! Orthonormal 8x8 type-II DCT, used as the test oracle and by the re-encode
//! fallback. The forward/inverse pair round-trips to ~1e-15, and the DC term
//! of a constant block v is exactly 8v.

pub const BLOCK_SIDE: usize = 8;

/// Basis matrix `C[u][i] = a(u) cos((2i+1) u pi / 16)` with orthonormal
/// scaling a(0) = sqrt(1/8), a(u>0) = sqrt(2/8).
fn basis() -> [[f64; BLOCK_SIDE]; BLOCK_SIDE] {
    let mut c = [[0.0; BLOCK_SIDE]; BLOCK_SIDE];
    for (u, row) in c.iter_mut().enumerate() {
        let a = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        for (i, v) in row.iter_mut().enumerate() {
            *v = a * ((2 * i + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos();
        }
    }
    c
}

/// Forward orthonormal DCT-II of one 8x8 block (level-shifted pixels in).
pub fn dct2d_reference(block: &[[f64; BLOCK_SIDE]; BLOCK_SIDE]) -> [[f64; BLOCK_SIDE]; BLOCK_SIDE] {
    let c = basis();
    // rows: tmp = block * C^T
    let mut tmp = [[0.0; BLOCK_SIDE]; BLOCK_SIDE];
    for i in 0..BLOCK_SIDE {
        for u in 0..BLOCK_SIDE {
            let mut acc = 0.0;
            for j in 0..BLOCK_SIDE {
                acc += block[i][j] * c[u][j];
            }
            tmp[i][u] = acc;
        }
    }
    // columns: out = C * tmp
    let mut out = [[0.0; BLOCK_SIDE]; BLOCK_SIDE];
    for u in 0..BLOCK_SIDE {
        for v in 0..BLOCK_SIDE {
            let mut acc = 0.0;
            for i in 0..BLOCK_SIDE {
                acc += c[u][i] * tmp[i][v];
            }
            out[u][v] = acc;
        }
    }
    out
}

/// Inverse of [`dct2d_reference`].
pub fn idct2d_reference(coeffs: &[[f64; BLOCK_SIDE]; BLOCK_SIDE]) -> [[f64; BLOCK_SIDE]; BLOCK_SIDE] {
    let c = basis();
    // tmp = C^T * coeffs
    let mut tmp = [[0.0; BLOCK_SIDE]; BLOCK_SIDE];
    for i in 0..BLOCK_SIDE {
        for v in 0..BLOCK_SIDE {
            let mut acc = 0.0;
            for u in 0..BLOCK_SIDE {
                acc += c[u][i] * coeffs[u][v];
            }
            tmp[i][v] = acc;
        }
    }
    // out = tmp * C
    let mut out = [[0.0; BLOCK_SIDE]; BLOCK_SIDE];
    for i in 0..BLOCK_SIDE {
        for j in 0..BLOCK_SIDE {
            let mut acc = 0.0;
            for v in 0..BLOCK_SIDE {
                acc += tmp[i][v] * c[v][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

//! OH-JPEG feature tensors: one-hot encoded quantized DCT coefficients per
//! 128x128 patch, with optional quantization-matrix weighting (PQL).

use thiserror::Error;

use super::decoder::DctPlane;

/// Patch side in pixels; 16x16 native JPEG blocks.
pub const PATCH_PIXELS: u32 = 128;
/// Blocks per patch side.
pub const PATCH_BLOCKS: usize = (PATCH_PIXELS / 8) as usize;
/// Default coefficient clamp threshold T (21 value channels per DCT mode).
pub const DEFAULT_CLAMP: u16 = 10;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("plane {0}x{1} is smaller than the {2}x{2} patch size")]
    PlaneTooSmall(u32, u32, u32),
    #[error("PQL weighting was already applied to this tensor")]
    AlreadyApplied,
}

/// One patch's blocks lifted out of a [`DctPlane`].
#[derive(Debug, Clone)]
pub struct PatchBlocks {
    pub x: u32,
    pub y: u32,
    /// Row-major 16x16 grid of natural-order coefficient blocks.
    pub blocks: Vec<[i32; 64]>,
}

/// Feature volume of shape `(C, 16, 16)` with `C = 64 * (2T + 1)`: one
/// channel per (DCT mode, clamped coefficient value) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    /// Channel-major values: `values[c * 256 + by * 16 + bx]`.
    pub values: Vec<f32>,
    pub clamp_threshold: u16,
    pub pql_applied: bool,
}

impl FeatureTensor {
    pub fn channels(&self) -> usize {
        64 * (2 * self.clamp_threshold as usize + 1)
    }

    pub fn spatial(&self) -> usize {
        PATCH_BLOCKS * PATCH_BLOCKS
    }

    pub fn get(&self, channel: usize, by: usize, bx: usize) -> f32 {
        self.values[channel * self.spatial() + by * PATCH_BLOCKS + bx]
    }

    /// Channel index of DCT mode `m` (natural order) at clamped value `v`.
    pub fn channel_of(clamp: u16, mode: usize, value: i32) -> usize {
        let t = clamp as i32;
        let clamped = value.clamp(-t, t);
        mode * (2 * clamp as usize + 1) + (clamped + t) as usize
    }
}

/// One-hot encode a 16x16-block patch: coefficient `c` of mode `m` sets
/// channel `clamp(c, -T, T) + T` of that mode to 1.
pub fn one_hot_encode(patch_blocks: &[[i32; 64]], clamp: u16) -> FeatureTensor {
    assert!(clamp >= 1, "clamp threshold must be >= 1");
    assert_eq!(
        patch_blocks.len(),
        PATCH_BLOCKS * PATCH_BLOCKS,
        "a patch is exactly 16x16 blocks"
    );
    let channels = 64 * (2 * clamp as usize + 1);
    let spatial = PATCH_BLOCKS * PATCH_BLOCKS;
    let mut values = vec![0.0f32; channels * spatial];
    for (cell, block) in patch_blocks.iter().enumerate() {
        for (mode, &coeff) in block.iter().enumerate() {
            let ch = FeatureTensor::channel_of(clamp, mode, coeff);
            values[ch * spatial + cell] = 1.0;
        }
    }
    FeatureTensor { values, clamp_threshold: clamp, pql_applied: false }
}

/// Multiply every channel belonging to DCT mode `(u, v)` by
/// `quant_table[u * 8 + v]` (the PQL weighting).
pub fn apply_pql(t: &FeatureTensor, quant_table: &[u16; 64]) -> Result<FeatureTensor, FeatureError> {
    if t.pql_applied {
        return Err(FeatureError::AlreadyApplied);
    }
    let per_mode = 2 * t.clamp_threshold as usize + 1;
    let spatial = t.spatial();
    let mut values = t.values.clone();
    for mode in 0..64 {
        let q = quant_table[mode] as f32;
        let start = mode * per_mode * spatial;
        for v in &mut values[start..start + per_mode * spatial] {
            *v *= q;
        }
    }
    Ok(FeatureTensor { values, clamp_threshold: t.clamp_threshold, pql_applied: true })
}

/// Tile a plane into full 8-aligned patches; partial edge patches drop.
pub fn partition_patches(plane: &DctPlane, patch_px: u32) -> Result<Vec<PatchBlocks>, FeatureError> {
    assert!(patch_px >= 8 && patch_px % 8 == 0, "patch size must be a multiple of 8");
    let (w, h) = plane.dims;
    if w < patch_px || h < patch_px {
        return Err(FeatureError::PlaneTooSmall(w, h, patch_px));
    }
    let mut out = Vec::new();
    for ty in 0..(h / patch_px) {
        for tx in 0..(w / patch_px) {
            let (x, y) = (tx * patch_px, ty * patch_px);
            let blocks = plane
                .block_subgrid(x, y, patch_px)
                .expect("tiling stays in bounds");
            out.push(PatchBlocks { x, y, blocks });
        }
    }
    Ok(out)
}

//! JPEG DCT forensics: lossless coefficient extraction and OH-JPEG features.
//!
//! The decoder reads quantized luminance DCT coefficients directly from the
//! entropy-coded stream (no dequantization, no pixel round trip), because the
//! forensic signal lives in exact quantization traces. Pixel-space decoding
//! would destroy them. `one_hot_encode` turns a 128x128-pixel patch (16x16
//! native 8x8 blocks) into the OH-JPEG feature volume, and `apply_pql`
//! weights it by the image's quantization matrix.

mod cache;
mod dct;
mod decoder;
mod features;

pub use cache::{read_feature_cache, write_feature_cache, FeatureCacheHeader, CACHE_MAGIC};
pub use dct::{dct2d_reference, idct2d_reference, BLOCK_SIDE};
pub use decoder::{decode_jpeg_dct, decode_with_fallback, DctPlane, JpegError};
pub use features::{
    apply_pql, one_hot_encode, partition_patches, FeatureError, FeatureTensor, PatchBlocks,
    DEFAULT_CLAMP, PATCH_BLOCKS, PATCH_PIXELS,
};

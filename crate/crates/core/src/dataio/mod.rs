//! Persistence and dataset preparation.

mod format;
mod pgm;
mod prep;
mod raw;

pub use format::{
    decode_cube, decode_detector, decode_matrix, encode_cube, encode_detector, encode_matrix,
    read_cube, read_detector, read_matrix, write_cube, write_detector, write_matrix, CUBE_MAGIC,
    DETECTOR_MAGIC, MATRIX_MAGIC,
};
pub use pgm::{band_file_name, encode_pgm, export_band_images, gray_level};
pub use prep::{
    assemble_patches, extract_patches, normalize, patch_offsets, select_bands, PatchSpec,
};
pub use raw::{decode_raw_cube, read_raw_cube, Interleave, RawHeader};

//! Value types and the little-endian binary file formats shared by the
//! pipeline stages.
//!
//! | magic  | contents                                                    |
//! |--------|-------------------------------------------------------------|
//! | `HSC1` | hyperspectral cube: rows, cols, bands, f32 pixels (BIP)     |
//! | `HSL1` | class labels: rows, cols, u16 per pixel                     |
//! | `HSH1` | segmentation level: rows, cols, u32 region ID per pixel     |
//! | `HSQ1` | labeled feature sequences                                   |
//! | `HSG1` | square self-Gram matrix with sample IDs                     |
//! | `HSR1` | rectangular Gram matrix with row and column IDs             |

mod cube;
mod gram;
pub(crate) mod io;
mod labels;
mod sequence;

pub use cube::{read_cube, write_cube, HyperCube, CUBE_MAGIC};
pub use gram::{read_gram, write_gram, GramMatrix, CROSS_GRAM_MAGIC, GRAM_MAGIC};
pub use io::write_atomic;
pub use labels::{
    read_labels, read_region_map, write_labels, write_region_map, LabelRaster, RegionMap,
    LABEL_MAGIC, MAX_LABEL, REGION_MAGIC,
};
pub use sequence::{
    read_sequences, sequences_from_bytes, sequences_to_bytes, write_sequences, FeatureSequence,
    SequenceRecord, SEQUENCE_MAGIC,
};

//! Hash families, word primitives and per-bucket hashes.

pub mod bits;
pub mod bucket;
pub mod families;

pub use bits::{build_pack_tables, msb, pack_loop, PackTables};
pub use bucket::{build_bucket_hash, eval_bucket_hash, BucketHashDescriptor, BucketLayout};
pub use families::{
    build_bitselect, build_det_multshift, build_g1, build_g2, build_g2_ext, BitSelectParams, DetMultShiftParams,
    QuadExtPoly, ThreeWiseParams, TwoWiseParams,
};

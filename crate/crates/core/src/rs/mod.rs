//! Reed–Solomon coding over GF(2^m) and its wide-symbol chunked form.

pub mod chunked;
pub mod codec;
pub mod gf2m;
pub mod roots;

pub use chunked::{chunked_correct, chunked_encode, ChunkedRedundancy};
pub use codec::RsCode;
pub use gf2m::Gf2m;

//! GF(2) linear block codes and Toeplitz hashing.

mod bits;
mod code;
mod decode;
mod toeplitz;

pub use bits::BitWord;
pub use code::{make_code, systematic_form, CodeSpec, Gf2Matrix, LinearCode};
pub use decode::{decode_nearest, Decoded, NearestDecoder, MAX_COSET_SEARCH_N, MAX_EXHAUSTIVE_K};
pub use toeplitz::ToeplitzHash;

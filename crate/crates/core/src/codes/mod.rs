//! Base matrices, circulant lifting, network encoding and girth tools.

mod base;
mod channel_code;
pub mod girth;
mod lift;

pub use base::{girth6_condition, offset_scheme, BaseMatrix, Ensemble, OffsetTable};
pub use channel_code::{embed_channel_codes, ChannelCodeSpec};
pub use girth::{girth, Girth};
pub use lift::{
    differential_decode, differential_encode, encode_network, lift, lift_blocks,
    lift_random_permutations, lift_with, BlockKind, CirculantBlock, LiftedParityMatrix,
    MatrixKind,
};

//! Finite-model tools for tensor products of ultrafilters and the
//! combinatorial patterns they produce.

pub mod bitset;
pub mod intset;
pub mod limits;
pub mod pattern;
pub mod setlang;
pub mod sumset;
pub mod tensor_set;
pub mod ultrafilter;

//! Encryption with certified deletion, simulated end to end.

pub mod bits;
pub mod cc;
pub mod codec;
pub mod game;
pub mod harness;
pub mod ntcf;
pub mod otske;
pub mod pke_cd;
pub mod primitives;
pub mod qsim;
pub mod rnce;
pub mod skecd;

//! Two-party cryptographic protocols at desk scale.
//!
//! Executable state machines for oblivious transfer, bit commitment, coin
//! flipping, comparison protocols and zero-knowledge proofs, over a message
//! channel with recorded transcripts, plus the number-theoretic and
//! graph-theoretic primitives they stand on and a seeded statistical harness
//! that measures their probability claims.
//!
//! Parameters are deliberately small ("desk scale"): small enough that
//! brute-force oracles can check every claim exhaustively, large enough that
//! the protocols run exactly as specified.

pub mod bits;
pub mod catalog;
pub mod commitment;
pub mod derived;
pub mod graphs;
pub mod numtheory;
pub mod oblivious;
pub mod session;
pub mod stats;
pub mod wire;
pub mod zkproof;

pub use num_bigint::BigUint;

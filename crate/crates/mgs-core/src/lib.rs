// SPDX-License-Identifier: Apache-2.0

//! Core algorithms for reference-based graph compression.
//!
//! The crate is `no_std` + `alloc`: everything operates on in-memory byte
//! buffers and adjacency vectors. File handling, generators and the command
//! line live in the companion `mgs-cli` crate.
//!
//! Module map:
//! * [`bits`] — MSB-first bit streams and the self-delimiting integer codes
//!   (Fibonacci, Elias gamma/delta, zeta-k) plus STOP-terminated lists.
//! * [`graph`] — immutable directed graphs with sorted successor lists,
//!   permutations, partitions and basic structural ops.
//! * [`ordering`] — label-propagation and community orderings and the
//!   compression-oriented diagnostics used to compare them.
//! * [`kernel`] — the shared per-vertex encoder: reference search, copy
//!   descriptors, interval extraction, residual transforms and exact
//!   bit-cost planning over the 28-action space.
//! * [`codec`] — the four on-disk record formats built on the kernel.
//! * [`container`] — the MGS container: header, sampled random-access index,
//!   and whole-file encode/decode entry points.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bits;
pub mod codec;
pub mod container;
pub mod graph;
pub mod kernel;
pub mod ordering;

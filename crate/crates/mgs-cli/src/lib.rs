// SPDX-License-Identifier: Apache-2.0

//! Command-line companion to the core library: synthetic graph
//! generators, plain-text graph and permutation files, and the
//! benchmark harness behind the `mgs` binary.

pub mod bench;
pub mod files;
pub mod gen;

// SPDX-License-Identifier: Apache-2.0

//! Core model of the Balance attack on proof-of-work blockchains.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO:
//!
//! * [`chain`]: blocks, the block DAG held by every node, union-merge of views
//!   and the line-oriented snapshot format.
//! * [`consensus`]: longest-chain and heaviest-subtree fork choice and the
//!   commit predicate.
//! * [`simnet`]: a deterministic discrete-event network simulator with
//!   stochastic mining and delay injection on a set of edges.
//! * [`attack`]: the balanced partition planner and the attack orchestrator.
//! * [`analysis`]: closed-form means and probability bounds, plus an exact
//!   binomial oracle.

#![no_std]
// Negated float comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod attack;
pub mod chain;
pub mod consensus;
pub mod simnet;
mod time;

pub use time::SimTime;

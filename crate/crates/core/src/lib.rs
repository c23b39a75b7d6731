// SPDX-License-Identifier: Apache-2.0

pub mod laurent;
pub mod matrix;
pub mod nlf;
pub mod bongartz;
pub mod graph;
pub mod seed;

//! Fixtures shared by the benchmarks.

use qnc_core::constructions::worst_case_network;
use qnc_core::{FieldSpec, LayeredNetwork};

/// Worst-case basis-linear network over `F_p`.
pub fn worst_case(p: u32, m0: usize, m1: usize) -> LayeredNetwork {
    let f = FieldSpec::prime(p).expect("prime field");
    worst_case_network(m0, m1, &f).expect("valid worst-case parameters")
}

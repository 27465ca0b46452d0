//! Fixed workloads shared by the benchmarks.

use cuberoute_core::harness::{sample_run, RunSample};
use cuberoute_core::Hypercube;

/// `count` reproducible routing instances in an `n`-cube with `faults` faults.
pub fn instances(n: u32, faults: usize, count: u64) -> (Hypercube, Vec<RunSample>) {
    let cube = Hypercube::new(n).expect("dimension");
    let runs = (0..count)
        .map(|r| sample_run(cube, faults, 0xbe4c, r).expect("sample"))
        .collect();
    (cube, runs)
}

//! Test-only reference implementations, written without reusing engine code.
#![allow(dead_code)]

pub mod oracle;

use commlab::finengine::{FiniteAlgebra, OperationSpec};
use rand::Rng;

/// A random algebra with `size` elements and up to two operations of arity <= 2.
pub fn random_algebra<R: Rng>(rng: &mut R, max_size: usize) -> FiniteAlgebra {
    let size = rng.gen_range(1..=max_size);
    let n_ops = rng.gen_range(0..=2);
    let ops = (0..n_ops)
        .map(|i| {
            let arity = rng.gen_range(0..=2usize);
            let len = size.pow(arity as u32);
            OperationSpec {
                symbol: format!("g{i}"),
                arity,
                table: (0..len).map(|_| rng.gen_range(0..size)).collect(),
            }
        })
        .collect();
    FiniteAlgebra::new(size, ops).expect("valid random algebra")
}

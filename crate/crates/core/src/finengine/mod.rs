//! Finite algebras given by operation tables, their congruences, and
//! higher commutators computed from generated cube subpowers.
//!
//! Every term cube `C(p_i, q_i)` with `p_i alpha_i q_i` is the image, under
//! the same term applied vertexwise, of the "edge generator" cubes for the
//! pairs `(p_ik, q_ik)`. The subalgebra of `A^(2^m)` generated by those
//! cubes therefore holds exactly the term cubes, and the commutator is read
//! off from it without enumerating terms.

mod algebra;
mod congruence;

pub use algebra::{library, AlgebraFile, FiniteAlgebra, OperationSpec};
pub use congruence::{Congruence, UnionFind};

use rustc_hash::FxHashSet;
use thiserror::Error;

/// Default cap on the number of cubes in a subpower.
pub const DEFAULT_CUBE_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinError {
    #[error("invalid algebra: {0}")]
    Invalid(String),
    #[error("algebra file: {0}")]
    Parse(String),
    #[error("subpower exceeds the cap of {cap} cubes")]
    Budget { cap: usize },
    #[error("dimension {m} is below the minimum {min}")]
    Dimension { m: usize, min: usize },
    #[error("expected {expected} congruences, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("congruence is over {found} elements, algebra has {expected}")]
    Universe { expected: usize, found: usize },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

/// Least congruence containing `pairs`.
///
/// Each pair that actually merges two classes is queued; for a queued
/// `(x, y)` every basic translation `g(c.., x, ..c)` / `g(c.., y, ..c)` is
/// merged in turn. The merged pairs generate the equivalence, so closing
/// them under translations closes the whole relation.
pub fn cg(alg: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Congruence {
    let s = alg.size();
    let mut uf = UnionFind::new(s);
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for &(x, y) in pairs {
        if uf.union(x, y) {
            queue.push((x, y));
        }
    }
    let mut args = Vec::new();
    while let Some((x, y)) = queue.pop() {
        for op in alg.operations() {
            let k = op.arity;
            if k == 0 {
                continue;
            }
            args.resize(k, 0);
            for pos in 0..k {
                // Constants fill every position except `pos`.
                let mut consts = vec![0usize; k - 1];
                loop {
                    let mut ci = 0;
                    for (slot, a) in args.iter_mut().enumerate() {
                        if slot != pos {
                            *a = consts[ci];
                            ci += 1;
                        }
                    }
                    args[pos] = x;
                    let gx = op.apply(&args, s);
                    args[pos] = y;
                    let gy = op.apply(&args, s);
                    if uf.union(gx, gy) {
                        queue.push((gx, gy));
                    }
                    if !crate::elements::odometer_step(&mut consts, s) {
                        break;
                    }
                }
            }
        }
    }
    Congruence::from_labels(&uf.labels())
}

/// Bit of block `j` (0-based) at vertex `v` (0-based) of an `m`-cube.
fn block_bit(m: usize, v: usize, j: usize) -> bool {
    (v >> (m - 1 - j)) & 1 == 1
}

/// The subalgebra of `A^(2^m)` generated by the edge cubes of the `alphas`,
/// in lexicographic order.
pub fn cube_subpower(alg: &FiniteAlgebra, alphas: &[Congruence], cap: usize) -> Result<Vec<Vec<usize>>, FinError> {
    let m = alphas.len();
    if m == 0 {
        return Err(FinError::Dimension { m, min: 1 });
    }
    if m >= 16 {
        return Err(FinError::Budget { cap });
    }
    for a in alphas {
        if a.size() != alg.size() {
            return Err(FinError::Universe {
                expected: alg.size(),
                found: a.size(),
            });
        }
    }
    let s = alg.size();
    let verts = 1usize << m;
    let mut seen: FxHashSet<Box<[usize]>> = FxHashSet::default();
    let mut all: Vec<Box<[usize]>> = Vec::new();
    let push = |c: Box<[usize]>, seen: &mut FxHashSet<Box<[usize]>>, all: &mut Vec<Box<[usize]>>| {
        if !seen.contains(&c) {
            if all.len() >= cap {
                return Err(FinError::Budget { cap });
            }
            seen.insert(c.clone());
            all.push(c);
        }
        Ok(())
    };

    for (j, alpha) in alphas.iter().enumerate() {
        for (a, b) in alpha.pairs() {
            let c: Box<[usize]> = (0..verts).map(|v| if block_bit(m, v, j) { b } else { a }).collect();
            push(c, &mut seen, &mut all)?;
        }
    }
    for op in alg.operations().iter().filter(|o| o.arity == 0) {
        let k = op.apply(&[], s);
        push(vec![k; verts].into(), &mut seen, &mut all)?;
    }

    // Semi-naive closure: each round only applies operations to tuples
    // containing at least one cube from the previous round.
    let mut lo = 0;
    let mut args = Vec::new();
    let mut out = vec![0usize; verts];
    while lo < all.len() {
        let hi = all.len();
        for op in alg.operations().iter().filter(|o| o.arity > 0) {
            let k = op.arity;
            let mut idx = vec![0usize; k];
            loop {
                if idx.iter().any(|&i| i >= lo) {
                    for (v, slot) in out.iter_mut().enumerate() {
                        args.clear();
                        args.extend(idx.iter().map(|&i| all[i][v]));
                        *slot = op.apply(&args, s);
                    }
                    push(out.clone().into(), &mut seen, &mut all)?;
                }
                if !crate::elements::odometer_step(&mut idx, hi) {
                    break;
                }
            }
        }
        lo = hi;
    }
    let mut cubes: Vec<Vec<usize>> = all.into_iter().map(Vec::from).collect();
    cubes.sort_unstable();
    Ok(cubes)
}

/// Critical pairs of cubes whose non-critical last-block edges lie in `delta`.
fn forced_pairs(cubes: &[Vec<usize>], delta: &Congruence) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for c in cubes {
        let len = c.len();
        let matched = c[..len - 2].chunks(2).all(|e| delta.related(e[0], e[1]));
        if matched && !delta.related(c[len - 2], c[len - 1]) {
            out.push((c[len - 2], c[len - 1]));
        }
    }
    out
}

/// `[alpha_1, ..., alpha_m]`: the least `delta` for which the
/// `delta`-relativized term condition holds on the generated cubes.
pub fn higher_commutator(alg: &FiniteAlgebra, alphas: &[Congruence], cap: usize) -> Result<Congruence, FinError> {
    if alphas.len() < 2 {
        return Err(FinError::Dimension {
            m: alphas.len(),
            min: 2,
        });
    }
    let cubes = cube_subpower(alg, alphas, cap)?;
    let mut delta = Congruence::identity(alg.size());
    loop {
        let fresh = forced_pairs(&cubes, &delta);
        if fresh.is_empty() {
            return Ok(delta);
        }
        let mut pairs = delta.generating_pairs();
        pairs.extend(fresh);
        delta = cg(alg, &pairs);
    }
}

/// Whether the `m`-dimensional term condition relative to `delta` holds.
pub fn tc_holds(alg: &FiniteAlgebra, m: usize, delta: &Congruence, cap: usize) -> Result<bool, FinError> {
    if m < 2 {
        return Err(FinError::Dimension { m, min: 2 });
    }
    if delta.size() != alg.size() {
        return Err(FinError::Universe {
            expected: alg.size(),
            found: delta.size(),
        });
    }
    let full = vec![Congruence::full(alg.size()); m];
    let cubes = cube_subpower(alg, &full, cap)?;
    Ok(forced_pairs(&cubes, delta).is_empty())
}

/// `theta_2, ..., theta_max_m`, where `theta_m` is the `m`-fold commutator
/// of the full congruence.
pub fn central_series(alg: &FiniteAlgebra, max_m: usize, cap: usize) -> Result<Vec<Congruence>, FinError> {
    if max_m < 2 {
        return Err(FinError::Dimension { m: max_m, min: 2 });
    }
    let mut out: Vec<Congruence> = Vec::new();
    for m in 2..=max_m {
        let theta = higher_commutator(alg, &vec![Congruence::full(alg.size()); m], cap)?;
        if let Some(prev) = out.last() {
            if !theta.leq(prev) {
                return Err(FinError::Invariant(format!(
                    "theta_{m} = {theta} is not below theta_{} = {prev}",
                    m - 1
                )));
            }
        }
        out.push(theta);
    }
    Ok(out)
}

/// Least `m <= max_m` with `theta_m` the identity.
pub fn supernilpotence_degree(alg: &FiniteAlgebra, max_m: usize, cap: usize) -> Result<Option<usize>, FinError> {
    let series = central_series(alg, max_m, cap)?;
    Ok(series.iter().position(|t| t.is_identity()).map(|i| i + 2))
}

/// Whether every nontrivial principal congruence is full.
pub fn is_simple(alg: &FiniteAlgebra) -> Result<bool, FinError> {
    let s = alg.size();
    if s < 2 {
        return Err(FinError::Invalid(format!("simplicity needs at least 2 elements, got {s}")));
    }
    for x in 0..s {
        for y in x + 1..s {
            if !cg(alg, &[(x, y)]).is_full() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

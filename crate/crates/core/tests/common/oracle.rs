//! Brute-force commutator oracle.
//!
//! Enumerates the binary term operations of depth at most 4 as value
//! tables on `A^2`, then searches for the least `delta` such that for every
//! such `t` and all `a, b, c, d`: `t(a,c) delta t(a,d)` implies
//! `t(b,c) delta t(b,d)`. Congruences are boolean matrices closed by naive
//! iteration.

use std::collections::BTreeSet;

use commlab::finengine::FiniteAlgebra;

pub const TERM_DEPTH: usize = 4;

/// Binary term operations of depth <= `depth`, each as `t[a * s + c]`.
pub fn binary_term_ops(alg: &FiniteAlgebra, depth: usize) -> Vec<Vec<usize>> {
    let s = alg.size();
    let pts = s * s;
    let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
    all.insert((0..pts).map(|i| i / s).collect());
    all.insert((0..pts).map(|i| i % s).collect());
    for op in alg.operations().iter().filter(|o| o.arity == 0) {
        all.insert(vec![op.table[0]; pts]);
    }
    let full_space = (s as u128).checked_pow(pts as u32).unwrap_or(u128::MAX);
    for _ in 0..depth {
        if all.len() as u128 == full_space {
            break;
        }
        let prev: Vec<Vec<usize>> = all.iter().cloned().collect();
        for op in alg.operations() {
            let k = op.arity;
            if k == 0 {
                continue;
            }
            let mut idx = vec![0usize; k];
            'tuples: loop {
                let t: Vec<usize> = (0..pts)
                    .map(|p| {
                        let mut flat = 0;
                        for &i in &idx {
                            flat = flat * s + prev[i][p];
                        }
                        op.table[flat]
                    })
                    .collect();
                all.insert(t);
                for pos in (0..k).rev() {
                    idx[pos] += 1;
                    if idx[pos] < prev.len() {
                        continue 'tuples;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
    }
    all.into_iter().collect()
}

/// Least congruence containing `rel` (a symmetric boolean matrix).
pub fn naive_cg(alg: &FiniteAlgebra, rel: &mut [Vec<bool>]) {
    let s = alg.size();
    loop {
        let mut changed = false;
        for x in 0..s {
            if !rel[x][x] {
                rel[x][x] = true;
                changed = true;
            }
            for y in 0..s {
                if rel[x][y] && !rel[y][x] {
                    rel[y][x] = true;
                    changed = true;
                }
                for z in 0..s {
                    if rel[x][y] && rel[y][z] && !rel[x][z] {
                        rel[x][z] = true;
                        changed = true;
                    }
                }
            }
        }
        // Compatibility: related argument tuples give related values.
        for op in alg.operations() {
            let k = op.arity;
            let n = s.pow(k as u32);
            for i in 0..n {
                for j in 0..n {
                    let ok = (0..k).all(|pos| {
                        let w = s.pow((k - 1 - pos) as u32);
                        rel[(i / w) % s][(j / w) % s]
                    });
                    if ok && !rel[op.table[i]][op.table[j]] {
                        rel[op.table[i]][op.table[j]] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

/// The binary commutator `[1, 1]` by the direct definition.
pub fn commutator_full(alg: &FiniteAlgebra) -> Vec<Vec<bool>> {
    let s = alg.size();
    let terms = binary_term_ops(alg, TERM_DEPTH);
    let mut rel = vec![vec![false; s]; s];
    naive_cg(alg, &mut rel);
    loop {
        let mut changed = false;
        for t in &terms {
            for a in 0..s {
                for b in 0..s {
                    for c in 0..s {
                        for d in 0..s {
                            let (r1, r2) = (t[a * s + c], t[a * s + d]);
                            let (r3, r4) = (t[b * s + c], t[b * s + d]);
                            if rel[r1][r2] && !rel[r3][r4] {
                                rel[r3][r4] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
        if !changed {
            return rel;
        }
        naive_cg(alg, &mut rel);
    }
}

/// Canonical block list of an equivalence matrix.
pub fn blocks(rel: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let s = rel.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; s];
    for x in 0..s {
        if seen[x] {
            continue;
        }
        let b: Vec<usize> = (x..s).filter(|&y| rel[x][y]).collect();
        for &y in &b {
            seen[y] = true;
        }
        out.push(b);
    }
    out
}

/// `cg({(x, y)})` as blocks.
pub fn principal(alg: &FiniteAlgebra, x: usize, y: usize) -> Vec<Vec<usize>> {
    let s = alg.size();
    let mut rel = vec![vec![false; s]; s];
    rel[x][y] = true;
    naive_cg(alg, &mut rel);
    blocks(&rel)
}

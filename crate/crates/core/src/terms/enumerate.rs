//! Canonical bounded enumeration of constant-free terms.
//!
//! Terms come out grouped by depth; within a depth the order is
//! `u < u_pqr < f`, then lexicographic on parameters and children. This
//! coincides with the `Ord` impl on [`Term`], so the stream is strictly
//! increasing.

use std::sync::Arc;

use super::{Term, TermError};
use crate::elements::{odometer_step, Params, Triple};

/// Default cap on the number of enumerated terms.
pub const DEFAULT_TERM_CAP: u128 = 1_000_000;

/// Number of terms [`enumerate_terms`] produces.
pub fn count_terms(num_vars: usize, max_depth: usize, pool_len: usize, n: usize) -> u128 {
    let mut at_most_prev: u128 = 0; // terms of depth <= d-2
    let mut at_most: u128 = num_vars as u128; // terms of depth <= d-1
    let mut exact: u128 = num_vars as u128; // terms of depth exactly d-1
    for _ in 0..max_depth {
        let fresh_f = at_most
            .saturating_pow(n as u32)
            .saturating_sub(at_most_prev.saturating_pow(n as u32));
        let next = exact
            .saturating_mul(1 + pool_len as u128)
            .saturating_add(fresh_f);
        at_most_prev = at_most;
        at_most = at_most.saturating_add(next);
        exact = next;
    }
    at_most
}

/// Streams every term in variables `x_0..x_{num_vars-1}` of depth at most
/// `max_depth`, with `u_pqr` parameters drawn from `pool`, exactly once.
pub fn enumerate_terms(
    num_vars: usize,
    max_depth: usize,
    pool: &[Triple],
    params: &Params,
    cap: u128,
) -> Result<TermStream, TermError> {
    let mut pool = pool.to_vec();
    pool.sort();
    pool.dedup();
    let count = count_terms(num_vars, max_depth, pool.len(), params.n());
    if count > cap {
        return Err(TermError::Budget { count, cap });
    }
    Ok(TermStream {
        n: params.n(),
        num_vars,
        max_depth,
        pool,
        below: Vec::new(),
        prev_start: 0,
        current: Vec::new(),
        depth: 0,
        phase: Phase::Vars(0),
        total: count,
    })
}

#[derive(Debug, Clone)]
enum Phase {
    Vars(u32),
    U(usize),
    Upqr(usize, usize),
    F(Vec<usize>),
    Done,
}

#[derive(Debug, Clone)]
pub struct TermStream {
    n: usize,
    num_vars: usize,
    max_depth: usize,
    pool: Vec<Triple>,
    /// All terms of depth < `depth`, in canonical order.
    below: Vec<Arc<Term>>,
    /// Index in `below` where depth `depth - 1` begins.
    prev_start: usize,
    /// Terms of depth `depth` produced so far (kept only if needed later).
    current: Vec<Arc<Term>>,
    depth: usize,
    phase: Phase,
    total: u128,
}

impl TermStream {
    /// Total number of terms the stream yields.
    pub fn total(&self) -> u128 {
        self.total
    }

    fn finish_depth(&mut self) {
        if self.depth == self.max_depth {
            self.phase = Phase::Done;
            return;
        }
        self.prev_start = self.below.len();
        self.below.append(&mut self.current);
        if self.below.len() == self.prev_start {
            // No terms of the previous depth, so none of any greater depth.
            self.phase = Phase::Done;
            return;
        }
        self.depth += 1;
        self.phase = Phase::U(self.prev_start);
    }

    fn emit(&mut self, t: Term) -> Arc<Term> {
        let t = Arc::new(t);
        if self.depth < self.max_depth {
            self.current.push(t.clone());
        }
        t
    }
}

impl Iterator for TermStream {
    type Item = Arc<Term>;

    fn next(&mut self) -> Option<Arc<Term>> {
        loop {
            match &mut self.phase {
                Phase::Done => return None,
                Phase::Vars(i) => {
                    if (*i as usize) < self.num_vars {
                        let t = Term::Var(*i);
                        *i += 1;
                        return Some(self.emit(t));
                    }
                    self.finish_depth();
                }
                Phase::U(k) => {
                    if *k < self.below.len() {
                        let t = Term::U(self.below[*k].clone());
                        *k += 1;
                        return Some(self.emit(t));
                    }
                    self.phase = Phase::Upqr(0, self.prev_start);
                }
                Phase::Upqr(ti, k) => {
                    if *ti < self.pool.len() {
                        let t = Term::Upqr(self.pool[*ti].clone(), self.below[*k].clone());
                        *k += 1;
                        if *k == self.below.len() {
                            *ti += 1;
                            *k = self.prev_start;
                        }
                        return Some(self.emit(t));
                    }
                    self.phase = Phase::F(vec![0; self.n]);
                }
                Phase::F(_) => {
                    let Phase::F(mut idx) = std::mem::replace(&mut self.phase, Phase::Done) else {
                        unreachable!()
                    };
                    let total = self.below.len();
                    // Skip tuples whose children all have depth < depth - 1.
                    let mut exhausted = false;
                    while idx.iter().all(|&i| i < self.prev_start) {
                        if !odometer_step(&mut idx, total) {
                            exhausted = true;
                            break;
                        }
                    }
                    if exhausted {
                        self.finish_depth();
                        continue;
                    }
                    let args: Vec<Arc<Term>> = idx.iter().map(|&i| self.below[i].clone()).collect();
                    let more = odometer_step(&mut idx, total);
                    let t = self.emit(Term::F(args));
                    if more {
                        self.phase = Phase::F(idx);
                    } else {
                        self.finish_depth();
                    }
                    return Some(t);
                }
            }
        }
    }
}

//! Exact bounded search for term-condition failures.
//!
//! For a fixed term the search decides every block assignment over the
//! domain at once. The term is tabulated over `D^m`, where `D` is the set of
//! block tuples, and each row (a choice of the first `m - 1` blocks) is
//! reduced to the partition of `D` induced by the last block. A failure is a
//! choice of `p_j, q_j` for the leading blocks whose `2^(m-1)` rows have
//! partitions whose first `2^(m-1) - 1` members meet to something not below
//! the last one. Leading-block choices are explored one block at a time;
//! values of `x_j` whose sub-tables coincide are interchangeable, so only
//! one representative per class is tried, and states are memoized.
//!
//! Two kinds of terms are decided without tabulation:
//! * terms missing every variable of some block, whose cubes are degenerate
//!   along that block and so cannot show the failure pattern;
//! * terms whose root is `u` or `u_pqr`, both injective, so their cubes fail
//!   exactly when the cube of the child does. The child precedes the term
//!   in canonical order and has the same variables, so it was decided first.

use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use super::{term_cube, BlockAssignment, CubeError, TCWitness};
use crate::elements::{odometer_step, ElemId, Element, Params, Store, Triple};
use crate::terms::{enumerate_terms, Term};

/// Default cap on the number of cells of a value table.
pub const DEFAULT_TABLE_CAP: u128 = 64_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub term_cap: u128,
    pub table_cap: u128,
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            term_cap: crate::terms::DEFAULT_TERM_CAP,
            table_cap: DEFAULT_TABLE_CAP,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Terms decided, up to and including the witness term if one was found.
    pub terms_scanned: u64,
    /// Terms decided by tabulation.
    pub terms_tabulated: u64,
    /// Terms decided by a missing block.
    pub terms_missing_block: u64,
    /// Terms decided through an injective root.
    pub terms_injective_root: u64,
    /// Block tuples per block, `|domain|^block_len`.
    pub block_tuples: u64,
    /// Block assignments per term, `block_tuples^(2m)`, saturating.
    pub assignments_per_term: u64,
}

impl SearchStats {
    /// Term and assignment pairs decided, saturating.
    pub fn tuples_scanned(&self) -> u64 {
        self.terms_scanned.saturating_mul(self.assignments_per_term)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub witness: Option<TCWitness>,
    pub stats: SearchStats,
}

/// Block tuples over the domain, in lexicographic order.
pub(crate) struct Grid {
    points: usize,
    block_len: usize,
    digits: Vec<ElemId>,
}

impl Grid {
    pub(crate) fn new(domain: &[ElemId], block_len: usize) -> Grid {
        let mut digits = Vec::new();
        let mut points = 0;
        if !domain.is_empty() {
            let mut idx = vec![0usize; block_len];
            loop {
                digits.extend(idx.iter().map(|&i| domain[i]));
                points += 1;
                if !odometer_step(&mut idx, domain.len()) {
                    break;
                }
            }
        }
        Grid {
            points,
            block_len,
            digits,
        }
    }

    pub(crate) fn tuple(&self, x: usize) -> &[ElemId] {
        &self.digits[x * self.block_len..(x + 1) * self.block_len]
    }
}

/// Values of a subterm over the blocks it mentions, last block fastest.
pub(crate) struct Sub {
    blocks: Vec<usize>,
    data: Vec<ElemId>,
}

/// Walks `D^blocks.len()` in order, tracking each child's flat index.
struct Walker {
    side: usize,
    digits: Vec<usize>,
    strides: Vec<Vec<usize>>,
    idx: Vec<usize>,
}

impl Walker {
    fn new(side: usize, blocks: &[usize], children: &[&[usize]]) -> Walker {
        let strides = children
            .iter()
            .map(|cb| {
                let mut s = vec![0usize; blocks.len()];
                for (ci, b) in cb.iter().enumerate() {
                    let pos = blocks.binary_search(b).expect("child block in union");
                    s[pos] = side.pow((cb.len() - 1 - ci) as u32);
                }
                s
            })
            .collect();
        Walker {
            side,
            digits: vec![0; blocks.len()],
            strides,
            idx: vec![0; children.len()],
        }
    }

    fn step(&mut self) {
        for pos in (0..self.digits.len()).rev() {
            self.digits[pos] += 1;
            for (c, s) in self.strides.iter().enumerate() {
                self.idx[c] += s[pos];
            }
            if self.digits[pos] < self.side {
                return;
            }
            self.digits[pos] = 0;
            for (c, s) in self.strides.iter().enumerate() {
                self.idx[c] -= self.side * s[pos];
            }
        }
    }
}

fn union_blocks(subs: &[Sub]) -> Vec<usize> {
    let mut blocks: Vec<usize> = subs.iter().flat_map(|s| s.blocks.iter().copied()).collect();
    blocks.sort_unstable();
    blocks.dedup();
    blocks
}

pub(crate) fn eval_sub(t: &Term, store: &mut Store, grid: &Grid) -> Sub {
    match t {
        Term::Var(v) => {
            let v = *v as usize;
            let (b, k) = (v / grid.block_len, v % grid.block_len);
            Sub {
                blocks: vec![b],
                data: (0..grid.points).map(|x| grid.tuple(x)[k]).collect(),
            }
        }
        Term::Const(e) => Sub {
            blocks: Vec::new(),
            data: vec![store.intern(e)],
        },
        Term::U(s) => {
            let mut sub = eval_sub(s, store, grid);
            for v in sub.data.iter_mut() {
                *v = store.u(*v);
            }
            sub
        }
        Term::Upqr(tr, s) => {
            let ids = store.intern_triple(tr);
            let mut sub = eval_sub(s, store, grid);
            for v in sub.data.iter_mut() {
                *v = store.u_pqr(ids, *v);
            }
            sub
        }
        Term::F(args) => {
            let subs: Vec<Sub> = args.iter().map(|a| eval_sub(a, store, grid)).collect();
            let blocks = union_blocks(&subs);
            let child_blocks: Vec<&[usize]> = subs.iter().map(|s| &s.blocks[..]).collect();
            let size = grid.points.pow(blocks.len() as u32);
            let mut walker = Walker::new(grid.points, &blocks, &child_blocks);
            let mut buf = vec![ElemId(0); subs.len()];
            let mut data = Vec::with_capacity(size);
            for _ in 0..size {
                for (c, s) in subs.iter().enumerate() {
                    buf[c] = s.data[walker.idx[c]];
                }
                data.push(store.f(&buf));
                walker.step();
            }
            Sub { blocks, data }
        }
    }
}

/// The full table over `D^m` (all blocks, block 1 most significant).
pub(crate) fn full_table(t: &Term, m: usize, store: &mut Store, grid: &Grid) -> Vec<ElemId> {
    let sub = eval_sub(t, store, grid);
    let all: Vec<usize> = (0..m).collect();
    let size = grid.points.pow(m as u32);
    let mut walker = Walker::new(grid.points, &all, &[&sub.blocks]);
    let mut out = Vec::with_capacity(size);
    for _ in 0..size {
        out.push(sub.data[walker.idx[0]]);
        walker.step();
    }
    out
}

/// Interned partitions of `D`, one per row of a table.
struct Kernels {
    map: FxHashMap<Box<[u32]>, u32>,
    discrete: Vec<bool>,
    list: Vec<Box<[u32]>>,
}

impl Kernels {
    fn new() -> Self {
        Kernels {
            map: FxHashMap::default(),
            discrete: Vec::new(),
            list: Vec::new(),
        }
    }

    fn intern(&mut self, labels: &[u32], classes: usize) -> u32 {
        if let Some(&id) = self.map.get(labels) {
            return id;
        }
        let id = self.list.len() as u32;
        let boxed: Box<[u32]> = labels.into();
        self.map.insert(boxed.clone(), id);
        self.list.push(boxed);
        self.discrete.push(classes == labels.len());
        id
    }
}

/// Row partitions of `t` over `D^m`: entry `r` is the kernel of the map
/// `x_m -> t(prefix r, x_m)`.
fn row_kernels(t: &Term, m: usize, store: &mut Store, grid: &Grid) -> (Vec<u32>, Kernels) {
    let side = grid.points;
    let all: Vec<usize> = (0..m).collect();
    let rows = side.pow(m as u32 - 1);
    let mut kernels = Kernels::new();
    let mut row_ids = Vec::with_capacity(rows);
    let mut keys: FxHashMap<u128, u32> = FxHashMap::default();
    let mut labels = vec![0u32; side];

    let mut finish_row = |keys: &mut FxHashMap<u128, u32>, labels: &[u32]| {
        let id = kernels.intern(labels, keys.len());
        keys.clear();
        row_ids.push(id);
    };

    // At an f root only equality of values matters, and f is injective off
    // its base table, so the argument ids themselves serve as the key.
    let n = store.params().n();
    match t {
        Term::F(args) if n <= 3 => {
            let subs: Vec<Sub> = args.iter().map(|a| eval_sub(a, store, grid)).collect();
            let child_blocks: Vec<&[usize]> = subs.iter().map(|s| &s.blocks[..]).collect();
            let mut walker = Walker::new(side, &all, &child_blocks);
            let mut buf = vec![ElemId(0); n];
            for _ in 0..rows {
                for slot in labels.iter_mut() {
                    for (c, s) in subs.iter().enumerate() {
                        buf[c] = s.data[walker.idx[c]];
                    }
                    let key = match store.f_base(&buf) {
                        Some(d) => (1u128 << 127) | d.0 as u128,
                        None => buf
                            .iter()
                            .enumerate()
                            .fold(0u128, |k, (c, id)| k | ((id.0 as u128) << (32 * c))),
                    };
                    let fresh = keys.len() as u32;
                    *slot = *keys.entry(key).or_insert(fresh);
                    walker.step();
                }
                finish_row(&mut keys, &labels);
            }
        }
        _ => {
            let table = full_table(t, m, store, grid);
            for row in table.chunks(side) {
                for (slot, v) in labels.iter_mut().zip(row) {
                    let fresh = keys.len() as u32;
                    *slot = *keys.entry(v.0 as u128).or_insert(fresh);
                }
                finish_row(&mut keys, &labels);
            }
        }
    }
    (row_ids, kernels)
}

/// Decides the failure pattern over all block assignments for one table.
struct TcFinder {
    m: usize,
    side: usize,
    kernels: Kernels,
    /// `slices[j][s]`: for a prefix of length `j` with id `s`, the ids of
    /// its one-longer prefixes, indexed by `x_j`.
    slices: Vec<Vec<Box<[u32]>>>,
    root: u32,
    memo: Vec<FxHashMap<Box<[u32]>, bool>>,
}

impl TcFinder {
    fn new(m: usize, side: usize, row_ids: Vec<u32>, kernels: Kernels) -> TcFinder {
        let mut slices: Vec<Vec<Box<[u32]>>> = vec![Vec::new(); m - 1];
        let mut ids = row_ids;
        for j in (0..m - 1).rev() {
            let mut map: FxHashMap<Box<[u32]>, u32> = FxHashMap::default();
            let mut list: Vec<Box<[u32]>> = Vec::new();
            let mut parent = Vec::with_capacity(ids.len() / side);
            for chunk in ids.chunks(side) {
                let id = match map.get(chunk) {
                    Some(&id) => id,
                    None => {
                        let id = list.len() as u32;
                        let boxed: Box<[u32]> = chunk.into();
                        map.insert(boxed.clone(), id);
                        list.push(boxed);
                        id
                    }
                };
                parent.push(id);
            }
            slices[j] = list;
            ids = parent;
        }
        TcFinder {
            m,
            side,
            kernels,
            slices,
            root: ids[0],
            memo: vec![FxHashMap::default(); m],
        }
    }

    /// Classes of `x_j` values with identical sub-tables across `state`,
    /// ordered by least member, each with that member.
    fn classes(&self, j: usize, state: &[u32]) -> Vec<usize> {
        let mut seen: FxHashMap<Vec<u32>, ()> = FxHashMap::default();
        let mut reps = Vec::new();
        let mut sig = Vec::with_capacity(state.len());
        for x in 0..self.side {
            sig.clear();
            sig.extend(state.iter().map(|&s| self.slices[j][s as usize][x]));
            if !seen.contains_key(&sig) {
                seen.insert(sig.clone(), ());
                reps.push(x);
            }
        }
        reps
    }

    fn next_state(&self, j: usize, state: &[u32], p: usize, q: usize) -> Vec<u32> {
        let mut next = Vec::with_capacity(state.len() * 2);
        for &s in state {
            let slice = &self.slices[j][s as usize];
            next.push(slice[p]);
            next.push(slice[q]);
        }
        next
    }

    /// First `(x, y)` with equal labels in every partition but the last and
    /// different labels in the last.
    fn leaf(&self, state: &[u32]) -> Option<(usize, usize)> {
        let (last, rest) = state.split_last().expect("non-empty state");
        if rest.iter().any(|&k| self.kernels.discrete[k as usize]) {
            return None;
        }
        let last = &self.kernels.list[*last as usize];
        if last.iter().all(|&l| l == 0) {
            return None;
        }
        let parts: Vec<&[u32]> = rest.iter().map(|&k| &self.kernels.list[k as usize][..]).collect();
        let mut meet: FxHashMap<Vec<u32>, Vec<usize>> = FxHashMap::default();
        let mut key = Vec::with_capacity(parts.len());
        for x in 0..self.side {
            key.clear();
            key.extend(parts.iter().map(|p| p[x]));
            meet.entry(key.clone()).or_default().push(x);
        }
        // A class with two last labels pairs its least member with the first
        // member labelled differently.
        meet.values()
            .filter_map(|members| {
                let x = members[0];
                members.iter().find(|&&y| last[y] != last[x]).map(|&y| (x, y))
            })
            .min()
    }

    fn exists(&mut self, j: usize, state: &[u32]) -> bool {
        if let Some(&v) = self.memo[j].get(state) {
            return v;
        }
        let found = if j == self.m - 1 {
            self.leaf(state).is_some()
        } else {
            let reps = self.classes(j, state);
            let mut found = false;
            'outer: for (ip, &p) in reps.iter().enumerate() {
                for (iq, &q) in reps.iter().enumerate() {
                    // Equal classes make block j degenerate.
                    if ip == iq {
                        continue;
                    }
                    let next = self.next_state(j, state, p, q);
                    if self.exists(j + 1, &next) {
                        found = true;
                        break 'outer;
                    }
                }
            }
            found
        };
        self.memo[j].insert(state.into(), found);
        found
    }

    /// Lexicographically least `(p_1, q_1, ..., p_m, q_m)` in the failure
    /// set, as grid indices.
    fn first_witness(&mut self) -> Option<Vec<(usize, usize)>> {
        let mut state = vec![self.root];
        if !self.exists(0, &state) {
            return None;
        }
        let mut choice = Vec::with_capacity(self.m);
        for j in 0..self.m - 1 {
            let reps = self.classes(j, &state);
            let mut picked = None;
            'outer: for (ip, &p) in reps.iter().enumerate() {
                for (iq, &q) in reps.iter().enumerate() {
                    if ip == iq {
                        continue;
                    }
                    let next = self.next_state(j, &state, p, q);
                    if self.exists(j + 1, &next) {
                        picked = Some((p, q, next));
                        break 'outer;
                    }
                }
            }
            let (p, q, next) = picked.expect("existence already established");
            choice.push((p, q));
            state = next;
        }
        choice.push(self.leaf(&state).expect("existence already established"));
        Some(choice)
    }
}

/// Whether every block has a variable occurring in `t`.
fn covers_blocks(t: &Term, m: usize, block_len: usize) -> bool {
    let mut used = vec![false; m * block_len];
    t.mark_vars(&mut used);
    used.chunks(block_len).all(|c| c.iter().any(|&u| u))
}

enum Decision {
    MissingBlock,
    InjectiveRoot,
    Tabulated(Option<Vec<(usize, usize)>>),
}

struct Job<'a> {
    m: usize,
    grid: &'a Grid,
}

impl Job<'_> {
    fn decide(&self, t: &Term, store: &mut Store) -> Decision {
        if !covers_blocks(t, self.m, self.grid.block_len) {
            return Decision::MissingBlock;
        }
        if matches!(t, Term::U(_) | Term::Upqr(..)) {
            return Decision::InjectiveRoot;
        }
        let mark = store.mark();
        let (rows, kernels) = row_kernels(t, self.m, store, self.grid);
        store.rollback(mark);
        let mut finder = TcFinder::new(self.m, self.grid.points, rows, kernels);
        Decision::Tabulated(finder.first_witness())
    }
}

/// The first failing term with the chosen class pair per block.
type Hit = (Arc<Term>, Vec<(usize, usize)>);

/// Searches terms in `x_0..x_{m*block_len - 1}` of depth at most
/// `max_depth`, in canonical order, for the first one with a failing cube
/// over block tuples from `domain`. Within a term the first block
/// assignment in lexicographic order of `(p_1, q_1, ..., p_m, q_m)` is
/// reported.
#[allow(clippy::too_many_arguments)]
pub fn search_tc_witness(
    m: usize,
    max_depth: usize,
    block_len: usize,
    domain: &[Element],
    pool: &[Triple],
    params: &Params,
    config: &SearchConfig,
) -> Result<SearchOutcome, CubeError> {
    if m == 0 {
        return Err(CubeError::ZeroDimension);
    }
    if block_len == 0 {
        return Err(CubeError::Blocks("block length must be at least 1".into()));
    }
    if domain.is_empty() {
        return Err(CubeError::Blocks("empty domain".into()));
    }
    for e in domain {
        e.validate(params)
            .map_err(|e| CubeError::Term(e.into()))?;
    }
    let mut domain = domain.to_vec();
    domain.sort();
    domain.dedup();

    let side = (domain.len() as u128).checked_pow(block_len as u32);
    let cells = side.and_then(|s| s.checked_pow(m as u32));
    match cells {
        Some(c) if c <= config.table_cap => {}
        _ => {
            return Err(CubeError::Budget {
                what: "value table",
                size: cells.unwrap_or(u128::MAX),
                cap: config.table_cap,
            })
        }
    }
    let side = side.expect("checked above") as u64;

    let mut store = Store::new(*params);
    let ids: Vec<ElemId> = domain.iter().map(|e| store.intern(e)).collect();
    for tr in pool {
        store.intern_triple(tr);
    }
    let grid = Grid::new(&ids, block_len);
    let stream = enumerate_terms(m * block_len, max_depth, pool, params, config.term_cap)?;

    let mut stats = SearchStats {
        block_tuples: side,
        assignments_per_term: (side as u128)
            .checked_pow(2 * m as u32)
            .map_or(u64::MAX, |v| u64::try_from(v).unwrap_or(u64::MAX)),
        ..SearchStats::default()
    };
    let job = Job { m, grid: &grid };

    let record = |d: &Decision, stats: &mut SearchStats| {
        stats.terms_scanned += 1;
        match d {
            Decision::MissingBlock => stats.terms_missing_block += 1,
            Decision::InjectiveRoot => stats.terms_injective_root += 1,
            Decision::Tabulated(_) => stats.terms_tabulated += 1,
        }
    };

    let mut hit: Option<Hit> = None;
    if config.parallel {
        const CHUNK: usize = 64;
        let mut stream = stream.peekable();
        while stream.peek().is_some() && hit.is_none() {
            let chunk: Vec<Arc<Term>> = stream.by_ref().take(CHUNK).collect();
            let decisions: Vec<Decision> = chunk
                .par_iter()
                .map_init(|| store.clone(), |st, t| job.decide(t, st))
                .collect();
            for (t, d) in chunk.iter().zip(decisions) {
                record(&d, &mut stats);
                if let Decision::Tabulated(Some(w)) = d {
                    hit = Some((t.clone(), w));
                    break;
                }
            }
        }
    } else {
        for t in stream {
            let d = job.decide(&t, &mut store);
            record(&d, &mut stats);
            if let Decision::Tabulated(Some(w)) = d {
                hit = Some((t, w));
                break;
            }
        }
    }

    let witness = match hit {
        None => None,
        Some((t, choice)) => {
            let resolve = |x: usize| -> Vec<Element> {
                grid.tuple(x).iter().map(|&id| store.resolve(id)).collect()
            };
            let blocks = BlockAssignment::new(
                choice.iter().map(|&(p, q)| (resolve(p), resolve(q))).collect(),
            )?;
            let cube = term_cube(&t, &blocks, params)?;
            assert!(
                cube.is_tc_failure(),
                "tabulated search and direct evaluation disagree on {t}"
            );
            Some(TCWitness {
                term: (*t).clone(),
                blocks,
                cube,
                dim: m,
            })
        }
    };
    Ok(SearchOutcome { witness, stats })
}

/// Reference implementation: evaluates the cube of `t` for every block
/// assignment in lexicographic order and returns the first failing one.
pub fn naive_tc_assignment(
    t: &Term,
    m: usize,
    block_len: usize,
    domain: &[Element],
    params: &Params,
) -> Result<Option<BlockAssignment>, CubeError> {
    let mut domain = domain.to_vec();
    domain.sort();
    domain.dedup();
    let mut tuples = Vec::new();
    let mut idx = vec![0usize; block_len];
    loop {
        tuples.push(idx.iter().map(|&i| domain[i].clone()).collect::<Vec<_>>());
        if !odometer_step(&mut idx, domain.len()) {
            break;
        }
    }
    let mut pick = vec![0usize; 2 * m];
    loop {
        let blocks = BlockAssignment::new(
            (0..m)
                .map(|j| (tuples[pick[2 * j]].clone(), tuples[pick[2 * j + 1]].clone()))
                .collect(),
        )?;
        if term_cube(t, &blocks, params)?.is_tc_failure() {
            return Ok(Some(blocks));
        }
        if !odometer_step(&mut pick, tuples.len()) {
            return Ok(None);
        }
    }
}

/// A corner-lemma violation: block tuples where vertex 1 equals all its
/// neighbours but the cube is not constant. Returned as grid indices.
pub(crate) fn find_corner_violation(table: &[ElemId], m: usize, side: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let strides: Vec<usize> = (0..m).map(|j| side.pow((m - 1 - j) as u32)).collect();
    // groups[j][x]: index into members[j] of the values on x's axis-j line
    // equal to table[x].
    let mut groups: Vec<Vec<u32>> = Vec::with_capacity(m);
    let mut members: Vec<Vec<Vec<usize>>> = Vec::with_capacity(m);
    for &stride in &strides {
        let mut g = vec![0u32; table.len()];
        let mut mem: Vec<Vec<usize>> = Vec::new();
        let mut local: FxHashMap<ElemId, u32> = FxHashMap::default();
        for base in 0..table.len() {
            if (base / stride) % side != 0 {
                continue;
            }
            local.clear();
            for y in 0..side {
                let x = base + y * stride;
                let gid = *local.entry(table[x]).or_insert_with(|| {
                    mem.push(Vec::new());
                    (mem.len() - 1) as u32
                });
                mem[gid as usize].push(y);
                g[x] = gid;
            }
        }
        groups.push(g);
        members.push(mem);
    }
    let vertices = 1usize << m;
    for x in 0..table.len() {
        let choices: Vec<&[usize]> = (0..m).map(|j| &members[j][groups[j][x] as usize][..]).collect();
        if choices.iter().filter(|c| c.len() > 1).count() < 2 {
            continue;
        }
        let p: Vec<usize> = (0..m).map(|j| (x / strides[j]) % side).collect();
        let mut pick = vec![0usize; m];
        loop {
            let q: Vec<usize> = pick.iter().enumerate().map(|(j, &k)| choices[j][k]).collect();
            let constant = (1..vertices).all(|v| {
                let mut at = 0;
                for j in 0..m {
                    let bit = (v >> (m - 1 - j)) & 1 == 1;
                    at += strides[j] * if bit { q[j] } else { p[j] };
                }
                table[at] == table[x]
            });
            if !constant {
                return Some((p, q));
            }
            let mut advanced = false;
            for j in (0..m).rev() {
                pick[j] += 1;
                if pick[j] < choices[j].len() {
                    advanced = true;
                    break;
                }
                pick[j] = 0;
            }
            if !advanced {
                break;
            }
        }
    }
    None
}

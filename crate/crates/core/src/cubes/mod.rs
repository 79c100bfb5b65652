//! Term cubes and term-condition predicates.
//!
//! Vertex `r_i` (1-based) of an `m`-dimensional cube evaluates the term with
//! block `j` taking its `q` tuple iff bit `2^(m-j)` of `i - 1` is set. The
//! last block therefore varies fastest: `r_{2t-1}, r_{2t}` differ only in
//! block `m`, and the critical edge is `(r_{2^m - 1}, r_{2^m})`.

pub mod search;

pub use search::{search_tc_witness, SearchConfig, SearchOutcome, SearchStats};

use std::fmt;

use thiserror::Error;

use crate::elements::{Element, Params};
use crate::terms::{eval_term, Assignment, Term, TermError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CubeError {
    #[error("vertex index {index} out of range for dimension {dim}")]
    VertexOutOfRange { dim: usize, index: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("cube of dimension {dim} needs {expected} vertices, got {found}")]
    VertexCount {
        dim: usize,
        expected: usize,
        found: usize,
    },
    #[error("malformed block assignment: {0}")]
    Blocks(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error("{what} of size {size} exceeds the cap of {cap}")]
    Budget { what: &'static str, size: u128, cap: u128 },
}

/// Block bits of vertex `index` (1-based): `bits[j-1]` is true when block `j` takes `q`.
pub fn vertex_assignment(dim: usize, index: usize) -> Result<Vec<bool>, CubeError> {
    if dim == 0 {
        return Err(CubeError::ZeroDimension);
    }
    if index == 0 || dim >= usize::BITS as usize || index > 1 << dim {
        return Err(CubeError::VertexOutOfRange { dim, index });
    }
    let i = index - 1;
    Ok((1..=dim).map(|j| (i >> (dim - j)) & 1 == 1).collect())
}

/// Vertices adjacent to `index` (1-based), in increasing order.
pub fn adjacent_vertices(dim: usize, index: usize) -> Result<Vec<usize>, CubeError> {
    vertex_assignment(dim, index)?;
    let i = index - 1;
    let mut out: Vec<usize> = (0..dim).map(|bit| (i ^ (1 << bit)) + 1).collect();
    out.sort_unstable();
    Ok(out)
}

/// A `2^dim`-tuple of values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cube<T> {
    dim: usize,
    vertices: Vec<T>,
}

impl<T: PartialEq> Cube<T> {
    pub fn new(dim: usize, vertices: Vec<T>) -> Result<Self, CubeError> {
        if dim == 0 {
            return Err(CubeError::ZeroDimension);
        }
        let expected = 1usize
            .checked_shl(dim as u32)
            .ok_or(CubeError::VertexCount {
                dim,
                expected: usize::MAX,
                found: vertices.len(),
            })?;
        if vertices.len() != expected {
            return Err(CubeError::VertexCount {
                dim,
                expected,
                found: vertices.len(),
            });
        }
        Ok(Cube { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[T] {
        &self.vertices
    }

    /// Vertex `r_index`, 1-based.
    pub fn vertex(&self, index: usize) -> &T {
        &self.vertices[index - 1]
    }

    pub fn is_constant(&self) -> bool {
        self.vertices.windows(2).all(|w| w[0] == w[1])
    }

    /// All non-critical block-`m` edges equal, critical edge unequal.
    pub fn is_tc_failure(&self) -> bool {
        is_tc_failure(&self.vertices)
    }
}

/// The failure pattern on a raw vertex list of length `2^m`.
pub fn is_tc_failure<T: PartialEq>(v: &[T]) -> bool {
    let len = v.len();
    if len < 2 {
        return false;
    }
    let matched = v[..len - 2].chunks(2).all(|e| e[0] == e[1]);
    matched && v[len - 2] != v[len - 1]
}

impl<T: fmt::Display> fmt::Display for Cube<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.vertices.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// For each block, the pair of equal-length tuples `(p_j, q_j)`. Variable
/// `x_v` reads position `v % len` of block `v / len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockAssignment {
    blocks: Vec<(Vec<Element>, Vec<Element>)>,
    block_len: usize,
}

impl BlockAssignment {
    pub fn new(blocks: Vec<(Vec<Element>, Vec<Element>)>) -> Result<Self, CubeError> {
        let block_len = blocks
            .first()
            .map(|(p, _)| p.len())
            .ok_or_else(|| CubeError::Blocks("no blocks".into()))?;
        if block_len == 0 {
            return Err(CubeError::Blocks("empty tuples".into()));
        }
        for (j, (p, q)) in blocks.iter().enumerate() {
            if p.len() != block_len || q.len() != block_len {
                return Err(CubeError::Blocks(format!(
                    "block {} has tuple lengths {} and {}, expected {block_len}",
                    j + 1,
                    p.len(),
                    q.len()
                )));
            }
        }
        Ok(BlockAssignment { blocks, block_len })
    }

    /// One element per block: `p_j = (ps[j])`, `q_j = (qs[j])`.
    pub fn singletons(ps: &[Element], qs: &[Element]) -> Result<Self, CubeError> {
        if ps.len() != qs.len() {
            return Err(CubeError::Blocks("p and q lists differ in length".into()));
        }
        BlockAssignment::new(
            ps.iter()
                .zip(qs)
                .map(|(p, q)| (vec![p.clone()], vec![q.clone()]))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn blocks(&self) -> &[(Vec<Element>, Vec<Element>)] {
        &self.blocks
    }

    /// Variable values selected by the block bits.
    pub fn select(&self, bits: &[bool]) -> Assignment {
        let mut vals = Vec::with_capacity(self.blocks.len() * self.block_len);
        for ((p, q), &b) in self.blocks.iter().zip(bits) {
            vals.extend_from_slice(if b { q } else { p });
        }
        Assignment(vals)
    }

    /// Exchanges blocks `i` and `j` (0-based).
    pub fn swap_blocks(&mut self, i: usize, j: usize) {
        self.blocks.swap(i, j);
    }
}

impl fmt::Display for BlockAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tuple = |xs: &[Element]| {
            let parts: Vec<String> = xs.iter().map(|e| e.to_string()).collect();
            format!("({})", parts.join(","))
        };
        for (j, (p, q)) in self.blocks.iter().enumerate() {
            if j > 0 {
                write!(f, "; ")?;
            }
            write!(f, "p{}={} q{}={}", j + 1, tuple(p), j + 1, tuple(q))?;
        }
        Ok(())
    }
}

/// The `m`-dimensional term cube of `t` on `blocks`.
pub fn term_cube(t: &Term, blocks: &BlockAssignment, params: &Params) -> Result<Cube<Element>, CubeError> {
    let m = blocks.dim();
    let mut vertices = Vec::with_capacity(1 << m);
    for i in 1..=(1usize << m) {
        let bits = vertex_assignment(m, i)?;
        vertices.push(eval_term(t, &blocks.select(&bits), params)?);
    }
    Cube::new(m, vertices)
}

/// A term, block tuples and resulting cube exhibiting the failure pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TCWitness {
    pub term: Term,
    pub blocks: BlockAssignment,
    pub cube: Cube<Element>,
    pub dim: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::Triple;

    fn p(n: usize) -> Params {
        Params::new(n).unwrap()
    }

    fn ab(n: usize) -> BlockAssignment {
        let ps: Vec<Element> = (1..=n as u32).map(|i| Element::A(i, 0)).collect();
        let qs: Vec<Element> = (1..=n as u32).map(|i| Element::B(i, 0)).collect();
        BlockAssignment::singletons(&ps, &qs).unwrap()
    }

    #[test]
    fn vertex_bits() {
        assert_eq!(vertex_assignment(2, 2).unwrap(), vec![false, true]);
        assert_eq!(vertex_assignment(3, 6).unwrap(), vec![true, false, true]);
        assert_eq!(vertex_assignment(4, 1).unwrap(), vec![false; 4]);
        assert!(vertex_assignment(2, 0).is_err());
        assert!(vertex_assignment(2, 5).is_err());
        assert!(vertex_assignment(0, 1).is_err());
    }

    #[test]
    fn adjacency() {
        assert_eq!(adjacent_vertices(3, 1).unwrap(), vec![2, 3, 5]);
        assert_eq!(adjacent_vertices(2, 1).unwrap(), vec![2, 3]);
        assert_eq!(adjacent_vertices(2, 4).unwrap(), vec![2, 3]);
        assert_eq!(adjacent_vertices(4, 1).unwrap(), vec![2, 3, 5, 9]);
    }

    #[test]
    fn f_square_n2() {
        let params = p(2);
        let cube = term_cube(&Term::f_of_vars(2), &ab(2), &params).unwrap();
        assert_eq!(
            cube.vertices(),
            &[Element::D(1), Element::D(1), Element::D(2), Element::D(3)]
        );
        assert!(cube.is_tc_failure());
    }

    #[test]
    fn f_cube_pattern() {
        for n in 2..=5usize {
            let params = p(n);
            let cube = term_cube(&Term::f_of_vars(n), &ab(n), &params).unwrap();
            let half = 1u32 << (n - 1);
            let mut expected = Vec::new();
            for t in 1..half {
                expected.push(Element::D(t));
                expected.push(Element::D(t));
            }
            expected.push(Element::D(half));
            expected.push(Element::D(half + 1));
            assert_eq!(cube.vertices(), &expected[..], "n = {n}");
        }
    }

    #[test]
    fn projection_cube() {
        let params = p(2);
        let blocks = BlockAssignment::singletons(
            &[Element::D(1), Element::D(2)],
            &[Element::C, Element::D(3)],
        )
        .unwrap();
        let cube = term_cube(&Term::Var(0), &blocks, &params).unwrap();
        assert_eq!(
            cube.vertices(),
            &[Element::D(1), Element::D(1), Element::C, Element::C]
        );
    }

    #[test]
    fn failure_pattern() {
        let d = Element::D;
        let c = |v: Vec<Element>| Cube::new(2, v).unwrap();
        assert!(c(vec![d(1), d(1), d(2), d(3)]).is_tc_failure());
        assert!(!c(vec![d(1); 4]).is_tc_failure());
        assert!(!c(vec![d(1), d(2), d(2), d(3)]).is_tc_failure());
        assert!(Cube::new(2, vec![d(1); 3]).is_err());
    }

    #[test]
    fn blocks_validate_lengths() {
        let e = Element::C;
        assert!(BlockAssignment::new(vec![(vec![e.clone()], vec![])]).is_err());
        assert!(BlockAssignment::new(vec![
            (vec![e.clone()], vec![e.clone()]),
            (vec![e.clone(), e.clone()], vec![e.clone(), e.clone()])
        ])
        .is_err());
        assert!(BlockAssignment::new(vec![]).is_err());
    }

    #[test]
    fn unary_of_witness_is_witness() {
        let params = p(2);
        let tr = Triple::new(Element::D(1), Element::D(3), Element::C).unwrap();
        let t = Term::upqr(tr, Term::u(Term::f_of_vars(2)));
        assert!(term_cube(&t, &ab(2), &params).unwrap().is_tc_failure());
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use super::FiniteAlgebra;

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `x` and `y`; false if they were already one.
    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        match self.rank[rx].cmp(&self.rank[ry]) {
            std::cmp::Ordering::Less => self.parent[rx] = ry,
            std::cmp::Ordering::Greater => self.parent[ry] = rx,
            std::cmp::Ordering::Equal => {
                self.parent[ry] = rx;
                self.rank[rx] += 1;
            }
        }
        true
    }

    /// Class representative of every element.
    pub fn labels(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|x| self.find(x)).collect()
    }
}

/// A partition of `0..size`, stored canonically: blocks sorted by least
/// element, elements sorted within each block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Congruence {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl Congruence {
    pub fn identity(size: usize) -> Self {
        Self::from_labels(&(0..size).collect::<Vec<_>>())
    }

    pub fn full(size: usize) -> Self {
        Self::from_labels(&vec![0; size])
    }

    /// Elements with equal labels share a block.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut first: std::collections::HashMap<usize, usize> = Default::default();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut block_of = vec![0; labels.len()];
        for (x, l) in labels.iter().enumerate() {
            let b = *first.entry(*l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(x);
            block_of[x] = b;
        }
        Congruence { blocks, block_of }
    }

    /// Validates a block list covering `0..n` exactly once.
    pub fn from_blocks(blocks: Vec<Vec<usize>>) -> Result<Self, String> {
        let size: usize = blocks.iter().map(Vec::len).sum();
        let mut labels = vec![usize::MAX; size];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err("empty block".into());
            }
            for &x in block {
                if x >= size || labels[x] != usize::MAX {
                    return Err(format!("element {x} is out of range or repeated"));
                }
                labels[x] = b;
            }
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn size(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.block_of[x] == self.block_of[y]
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.len() == self.size()
    }

    pub fn is_full(&self) -> bool {
        self.blocks.len() <= 1
    }

    /// Refinement order.
    pub fn leq(&self, other: &Congruence) -> bool {
        self.size() == other.size()
            && self
                .blocks
                .iter()
                .all(|b| b.iter().all(|&x| other.related(b[0], x)))
    }

    /// Every related ordered pair, including the diagonal.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.size() {
            for &b in &self.blocks[self.block_of[a]] {
                out.push((a, b));
            }
        }
        out
    }

    /// A spanning set of pairs: each block's least element with the others.
    pub fn generating_pairs(&self) -> Vec<(usize, usize)> {
        self.blocks
            .iter()
            .flat_map(|b| b[1..].iter().map(move |&x| (b[0], x)))
            .collect()
    }

    /// Whether every operation maps related arguments to related values.
    pub fn is_compatible(&self, alg: &FiniteAlgebra) -> bool {
        let s = alg.size();
        alg.operations().iter().all(|op| {
            let k = op.arity;
            let mut xs = vec![0usize; k];
            loop {
                let gx = op.apply(&xs, s);
                // Changing one argument within its block is enough.
                for pos in 0..k {
                    let orig = xs[pos];
                    for &y in &self.blocks[self.block_of[orig]] {
                        xs[pos] = y;
                        if !self.related(gx, op.apply(&xs, s)) {
                            return false;
                        }
                    }
                    xs[pos] = orig;
                }
                if !crate::elements::odometer_step(&mut xs, s) {
                    return true;
                }
            }
        })
    }
}

impl TryFrom<Vec<Vec<usize>>> for Congruence {
    type Error = String;

    fn try_from(blocks: Vec<Vec<usize>>) -> Result<Self, String> {
        Congruence::from_blocks(blocks)
    }
}

impl From<Congruence> for Vec<Vec<usize>> {
    fn from(c: Congruence) -> Self {
        c.blocks
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let parts: Vec<String> = b.iter().map(|x| x.to_string()).collect();
            write!(f, "{{{}}}", parts.join(","))?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form() {
        let c = Congruence::from_labels(&[5, 2, 5, 2, 9]);
        assert_eq!(c.blocks(), &[vec![0, 2], vec![1, 3], vec![4]]);
        assert_eq!(c.to_string(), "{{0,2},{1,3},{4}}");
        assert_eq!(Congruence::from_blocks(vec![vec![4], vec![3, 1], vec![2, 0]]).unwrap(), c);
        assert!(Congruence::from_blocks(vec![vec![0, 0]]).is_err());
        assert!(Congruence::from_blocks(vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn order_and_pairs() {
        let id = Congruence::identity(3);
        let full = Congruence::full(3);
        let mid = Congruence::from_labels(&[0, 0, 1]);
        assert!(id.leq(&mid) && mid.leq(&full) && !full.leq(&mid));
        assert_eq!(mid.generating_pairs(), vec![(0, 1)]);
        assert_eq!(mid.pairs().len(), 5);
        let json = serde_json::to_string(&mid).unwrap();
        assert_eq!(json, "[[0,1],[2]]");
        assert_eq!(serde_json::from_str::<Congruence>(&json).unwrap(), mid);
    }
}

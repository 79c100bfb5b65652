use serde::{Deserialize, Serialize};

use super::FinError;

/// One basic operation. `table` is flattened row-major with the first
/// argument most significant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperationSpec {
    pub symbol: String,
    pub arity: usize,
    pub table: Vec<usize>,
}

impl OperationSpec {
    pub fn apply(&self, args: &[usize], size: usize) -> usize {
        let idx = args.iter().fold(0usize, |acc, &a| acc * size + a);
        self.table[idx]
    }
}

/// The on-disk JSON form of an algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub size: usize,
    pub operations: Vec<OperationSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    size: usize,
    ops: Vec<OperationSpec>,
}

impl FiniteAlgebra {
    pub fn new(size: usize, ops: Vec<OperationSpec>) -> Result<Self, FinError> {
        if size == 0 {
            return Err(FinError::Invalid("size must be at least 1".into()));
        }
        for (i, op) in ops.iter().enumerate() {
            let expected = u32::try_from(op.arity)
                .ok()
                .and_then(|k| size.checked_pow(k))
                .filter(|&n| n <= 1 << 24)
                .ok_or_else(|| {
                    FinError::Invalid(format!(
                        "operations[{i}] ('{}'): table for arity {} is too large",
                        op.symbol, op.arity
                    ))
                })?;
            if op.table.len() != expected {
                return Err(FinError::Invalid(format!(
                    "operations[{i}] ('{}'): table has {} entries, arity {} needs {expected}",
                    op.symbol,
                    op.table.len(),
                    op.arity
                )));
            }
            if let Some((pos, v)) = op.table.iter().enumerate().find(|(_, &v)| v >= size) {
                return Err(FinError::Invalid(format!(
                    "operations[{i}] ('{}'): table[{pos}] = {v} is not below size {size}",
                    op.symbol
                )));
            }
        }
        Ok(FiniteAlgebra { size, ops })
    }

    pub fn from_file(file: AlgebraFile) -> Result<Self, FinError> {
        Self::new(file.size, file.operations)
    }

    /// Parses the JSON algebra format; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self, FinError> {
        let file: AlgebraFile = serde_json::from_str(text).map_err(|e| {
            FinError::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        Self::from_file(file)
    }

    pub fn to_file(&self) -> AlgebraFile {
        AlgebraFile {
            size: self.size,
            operations: self.ops.clone(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn operations(&self) -> &[OperationSpec] {
        &self.ops
    }
}

/// Small algebras used in tests, docs and examples.
pub mod library {
    use super::{FiniteAlgebra, OperationSpec};

    fn op(symbol: &str, arity: usize, table: Vec<usize>) -> OperationSpec {
        OperationSpec {
            symbol: symbol.into(),
            arity,
            table,
        }
    }

    /// `{0..size}` with no operations.
    pub fn bare_set(size: usize) -> FiniteAlgebra {
        FiniteAlgebra::new(size, vec![]).expect("valid")
    }

    /// `Z_k` with `+`, unary `-` and the constant `0`.
    pub fn cyclic_group(k: usize) -> FiniteAlgebra {
        let add = (0..k * k).map(|i| (i / k + i % k) % k).collect();
        let neg = (0..k).map(|x| (k - x) % k).collect();
        FiniteAlgebra::new(k, vec![op("+", 2, add), op("-", 1, neg), op("0", 0, vec![0])]).expect("valid")
    }

    /// `({0,1}, min)`.
    pub fn meet_semilattice() -> FiniteAlgebra {
        FiniteAlgebra::new(2, vec![op("m", 2, vec![0, 0, 0, 1])]).expect("valid")
    }
}

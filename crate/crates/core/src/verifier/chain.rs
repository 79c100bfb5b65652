//! Mal'cev chains witnessing that any nontrivial congruence of `A` is full.

use serde::Serialize;
use thiserror::Error;

use crate::elements::{eval_f, eval_u, Element, ElementError, Params, Triple};
use crate::terms::{eval_poly, UnaryPolynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("source pair is degenerate: p = q = {0}")]
    Degenerate(Element),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("polynomial evaluation failed: {0}")]
    Eval(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub poly: UnaryPolynomial,
    /// Index into the established pairs: 0 is the source, `k` the output of step `k`.
    pub input: usize,
    pub output: (Element, Element),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MalcevChain {
    pub source: (Element, Element),
    pub steps: Vec<ChainStep>,
    pub target: (Element, Element),
}

#[derive(Serialize)]
struct StepJson {
    poly: String,
    input: usize,
    output: [String; 2],
}

impl MalcevChain {
    pub fn to_json(&self) -> serde_json::Value {
        let pair = |(a, b): &(Element, Element)| [a.to_string(), b.to_string()];
        serde_json::json!({
            "source": pair(&self.source),
            "target": pair(&self.target),
            "steps": self.steps.iter().map(|s| StepJson {
                poly: s.poly.to_string(),
                input: s.input,
                output: pair(&s.output),
            }).collect::<Vec<_>>(),
        })
    }
}

struct Builder<'a> {
    params: &'a Params,
    pairs: Vec<(Element, Element)>,
    steps: Vec<ChainStep>,
}

impl Builder<'_> {
    /// Applies `poly` to established pair `input`; returns the new pair's index.
    fn apply(&mut self, poly: UnaryPolynomial, input: usize) -> Result<usize, ChainError> {
        let (x, y) = self.pairs[input].clone();
        let ev = |e: &Element| eval_poly(&poly, e, self.params).map_err(|e| ChainError::Eval(e.to_string()));
        let output = (ev(&x)?, ev(&y)?);
        self.pairs.push(output.clone());
        self.steps.push(ChainStep { poly, input, output });
        Ok(self.pairs.len() - 1)
    }

    /// Index of an established pair relating `anchor` to `c`, adding a
    /// `u_{p q c}` step if needed. `(p, q)` is pair `base`.
    fn link_to_c(&mut self, base: usize, anchor: &Element) -> Result<usize, ChainError> {
        let (p, q) = self.pairs[base].clone();
        if p == Element::C || q == Element::C {
            return Ok(base);
        }
        let idx = self.apply(UnaryPolynomial::upqr(Triple::new(p, q, Element::C)?), base)?;
        debug_assert_eq!(self.pairs[idx].0, *anchor);
        Ok(idx)
    }
}

/// Derives `(q', r)` from `(p, q)` following the simplicity argument:
/// move the pair off `B` with `f(x, ..., x)`, reach elements outside `B`
/// with one `u_{p' q' r}` step, reach `C` by iterating `u` from `c`, and
/// reach `a_{i,j}`, `b_{i,j}` by iterating `u_{p1 p2 p3}`.
///
/// The element kept fixed during the `u` and `u_{p1 p2 p3}` iterations is
/// `q'`, or `p'` when `q' = c` (since `u` moves `c`).
pub fn simplicity_chain(params: &Params, p: &Element, q: &Element, r: &Element) -> Result<MalcevChain, ChainError> {
    for e in [p, q, r] {
        e.validate(params)?;
    }
    if p == q {
        return Err(ChainError::Degenerate(p.clone()));
    }
    let mut b = Builder {
        params,
        pairs: vec![(p.clone(), q.clone())],
        steps: Vec::new(),
    };
    let mut base = 0;
    if p.in_b() || q.in_b() {
        base = b.apply(UnaryPolynomial::diagonal_f(params), 0)?;
    }
    let (p1, q1) = b.pairs[base].clone();
    let anchor = if q1 == Element::C { p1.clone() } else { q1.clone() };

    if !r.in_b() {
        if *r != p1 && *r != q1 {
            b.apply(UnaryPolynomial::upqr(Triple::new(p1.clone(), q1.clone(), r.clone())?), base)?;
        }
    } else {
        // (anchor, c), then u^k moves c along the cycle while fixing the anchor.
        let mut at = b.link_to_c(base, &anchor)?;
        let (i, j) = match r {
            Element::A(i, j) | Element::B(i, j) => (*i, *j),
            _ => unreachable!("B holds only a and b atoms"),
        };
        let start = if matches!(r, Element::A(..)) {
            Element::A(i, 0)
        } else {
            Element::B(i, 0)
        };
        let mut cur = Element::C;
        while cur != start {
            at = b.apply(UnaryPolynomial::u(), at)?;
            cur = eval_u(&cur, params);
        }
        if j > 0 {
            let mut fixed: Vec<Element> = params.non_b_atoms().into_iter().filter(|e| *e != anchor).collect();
            fixed.truncate(3);
            let shift = Triple::new(fixed[0].clone(), fixed[1].clone(), fixed[2].clone())?;
            for _ in 0..j {
                at = b.apply(UnaryPolynomial::upqr(shift.clone()), at)?;
            }
        }
    }
    Ok(MalcevChain {
        source: (p.clone(), q.clone()),
        steps: b.steps,
        target: (q1, r.clone()),
    })
}

/// Re-evaluates every step and checks that the source and step outputs,
/// closed under symmetry and transitivity, relate the target components.
pub fn verify_chain(chain: &MalcevChain, params: &Params) -> bool {
    let mut established = vec![chain.source.clone()];
    for step in &chain.steps {
        let Some((x, y)) = established.get(step.input).cloned() else {
            return false;
        };
        let (Ok(gx), Ok(gy)) = (eval_poly(&step.poly, &x, params), eval_poly(&step.poly, &y, params)) else {
            return false;
        };
        if (gx, gy) != step.output {
            return false;
        }
        established.push(step.output.clone());
    }
    let mut nodes: Vec<Element> = established.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    nodes.push(chain.target.0.clone());
    nodes.push(chain.target.1.clone());
    nodes.sort();
    nodes.dedup();
    let id = |e: &Element| nodes.binary_search(e).expect("collected");
    let mut uf = crate::finengine::UnionFind::new(nodes.len());
    for (a, b) in &established {
        uf.union(id(a), id(b));
    }
    uf.find(id(&chain.target.0)) == uf.find(id(&chain.target.1))
}

/// A copy of `chain` whose last step output is wrong, or `None` if it has no steps.
pub fn corrupt_chain(chain: &MalcevChain, params: &Params) -> Option<MalcevChain> {
    let mut bad = chain.clone();
    let last = bad.steps.last_mut()?;
    let y = &last.output.1;
    // f(y, ..., y) never equals y.
    last.output.1 = eval_f(&vec![y.clone(); params.n()], params).ok()?;
    Some(bad)
}

//! Hash-consed element arena.
//!
//! Every element reachable in a search is interned once and referred to by
//! an [`ElemId`]; two ids are equal iff the elements are equal. Searches
//! that create many transient elements bracket their work with
//! [`Store::mark`] / [`Store::rollback`] so the arena stays bounded.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use super::{f0_index, Element, Params, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElemId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    A(u32, u32),
    B(u32, u32),
    D(u32),
    C,
    Tagged,
}

#[derive(Debug, Clone)]
struct Node {
    kind: Kind,
    level: u32,
    /// Components of a tagged node, empty for atoms.
    args: Box<[ElemId]>,
}

#[derive(Debug, Clone)]
pub struct Store {
    params: Params,
    nodes: Vec<Node>,
    atoms: FxHashMap<Kind, ElemId>,
    tagged: FxHashMap<Box<[ElemId]>, ElemId>,
    /// The u-cycle a_1 b_1 ... a_n b_n c.
    cycle: Vec<ElemId>,
    d: Vec<ElemId>,
}

impl Store {
    pub fn new(params: Params) -> Self {
        let mut s = Store {
            params,
            nodes: Vec::new(),
            atoms: FxHashMap::default(),
            tagged: FxHashMap::default(),
            cycle: Vec::new(),
            d: Vec::new(),
        };
        for i in 1..=params.n() as u32 {
            let a = s.atom(Kind::A(i, 0));
            let b = s.atom(Kind::B(i, 0));
            s.cycle.push(a);
            s.cycle.push(b);
        }
        let c = s.atom(Kind::C);
        s.cycle.push(c);
        for k in 1..=params.d_count() {
            let id = s.atom(Kind::D(k));
            s.d.push(id);
        }
        s
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn atom(&mut self, kind: Kind) -> ElemId {
        if let Some(&id) = self.atoms.get(&kind) {
            return id;
        }
        let id = ElemId(self.nodes.len() as u32);
        self.nodes.push(Node {
            kind,
            level: 0,
            args: Box::new([]),
        });
        self.atoms.insert(kind, id);
        id
    }

    pub fn intern(&mut self, e: &Element) -> ElemId {
        match e {
            Element::A(i, j) => self.atom(Kind::A(*i, *j)),
            Element::B(i, j) => self.atom(Kind::B(*i, *j)),
            Element::D(k) => self.atom(Kind::D(*k)),
            Element::C => self.atom(Kind::C),
            Element::Tagged(args, _) => {
                let ids: Vec<ElemId> = args.iter().map(|a| self.intern(a)).collect();
                self.tagged_node(&ids)
            }
        }
    }

    pub fn resolve(&self, id: ElemId) -> Element {
        let node = &self.nodes[id.0 as usize];
        match node.kind {
            Kind::A(i, j) => Element::A(i, j),
            Kind::B(i, j) => Element::B(i, j),
            Kind::D(k) => Element::D(k),
            Kind::C => Element::C,
            Kind::Tagged => {
                let args: Arc<[Element]> = node.args.iter().map(|&a| self.resolve(a)).collect();
                Element::Tagged(args, node.level - 1)
            }
        }
    }

    pub fn level(&self, id: ElemId) -> u32 {
        self.nodes[id.0 as usize].level
    }

    /// Membership in `C`.
    pub fn in_c(&self, id: ElemId) -> bool {
        matches!(self.nodes[id.0 as usize].kind, Kind::A(_, 0) | Kind::B(_, 0))
    }

    fn tagged_node(&mut self, args: &[ElemId]) -> ElemId {
        if let Some(&id) = self.tagged.get(args) {
            return id;
        }
        let level = args.iter().map(|a| self.level(*a)).max().unwrap_or(0) + 1;
        let id = ElemId(self.nodes.len() as u32);
        let boxed: Box<[ElemId]> = args.into();
        self.nodes.push(Node {
            kind: Kind::Tagged,
            level,
            args: boxed.clone(),
        });
        self.tagged.insert(boxed, id);
        id
    }

    /// `f` on interned arguments. Panics if `args.len() != n`.
    pub fn f(&mut self, args: &[ElemId]) -> ElemId {
        match self.f_base(args) {
            Some(d) => d,
            None => self.tagged_node(args),
        }
    }

    /// The base-table value of `f` if `args` lies in its domain.
    pub fn f_base(&self, args: &[ElemId]) -> Option<ElemId> {
        assert_eq!(args.len(), self.params.n(), "f applied to wrong number of arguments");
        for (pos, a) in args.iter().enumerate() {
            let i = pos as u32 + 1;
            match self.nodes[a.0 as usize].kind {
                Kind::A(k, 0) | Kind::B(k, 0) if k == i => {}
                _ => return None,
            }
        }
        let choices = args
            .iter()
            .map(|a| matches!(self.nodes[a.0 as usize].kind, Kind::B(..)));
        let k = f0_index(choices, &self.params);
        Some(self.d[(k - 1) as usize])
    }

    pub fn u(&self, x: ElemId) -> ElemId {
        let n = self.params.n() as u32;
        let pos = match self.nodes[x.0 as usize].kind {
            Kind::A(i, 0) => 2 * (i - 1),
            Kind::B(i, 0) => 2 * i - 1,
            Kind::C => 2 * n,
            _ => return x,
        };
        self.cycle[((pos + 1) % (2 * n + 1)) as usize]
    }

    pub fn u_pow(&self, x: ElemId, k: usize) -> ElemId {
        let mut y = x;
        for _ in 0..k % self.params.cycle_len() {
            y = self.u(y);
        }
        y
    }

    /// `u_pqr` where `triple` holds the interned `(p, q, r)`.
    pub fn u_pqr(&mut self, triple: [ElemId; 3], x: ElemId) -> ElemId {
        let [p, q, r] = triple;
        if x == p {
            q
        } else if x == q {
            r
        } else if x == r {
            p
        } else {
            match self.nodes[x.0 as usize].kind {
                Kind::A(i, j) => self.atom(Kind::A(i, j + 1)),
                Kind::B(i, j) => self.atom(Kind::B(i, j + 1)),
                _ => x,
            }
        }
    }

    pub fn intern_triple(&mut self, t: &Triple) -> [ElemId; 3] {
        [self.intern(t.p()), self.intern(t.q()), self.intern(t.r())]
    }

    pub fn mark(&self) -> usize {
        self.nodes.len()
    }

    /// Forgets every element interned since `mark`. Ids at or above the mark
    /// become dangling and must not be used again.
    pub fn rollback(&mut self, mark: usize) {
        while self.nodes.len() > mark {
            let node = self.nodes.pop().expect("non-empty");
            match node.kind {
                Kind::Tagged => {
                    self.tagged.remove(&node.args);
                }
                kind => {
                    self.atoms.remove(&kind);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{bounded_subuniverse, eval_f, eval_u, eval_u_pqr, DEFAULT_ELEMENT_CAP};

    #[test]
    fn store_agrees_with_tree_operations() {
        let params = Params::new(2).unwrap();
        let s = bounded_subuniverse(&params, 1, 1, DEFAULT_ELEMENT_CAP).unwrap();
        let mut store = Store::new(params);
        let ids: Vec<ElemId> = s.iter().map(|e| store.intern(e)).collect();
        for (x, &xi) in s.iter().zip(&ids) {
            assert_eq!(store.resolve(xi), *x);
            assert_eq!(store.resolve(store.u(xi)), eval_u(x, &params));
        }
        for (x, &xi) in s.iter().zip(&ids).step_by(3) {
            for (y, &yi) in s.iter().zip(&ids).step_by(5) {
                let got = store.f(&[xi, yi]);
                assert_eq!(store.resolve(got), eval_f(&[x.clone(), y.clone()], &params).unwrap());
            }
        }
        for t in params.default_triple_pool().iter().take(5) {
            let tid = store.intern_triple(t);
            for (x, &xi) in s.iter().zip(&ids).take(30) {
                let got = store.u_pqr(tid, xi);
                assert_eq!(store.resolve(got), eval_u_pqr(t, x));
            }
        }
    }

    #[test]
    fn rollback_forgets_transient_elements() {
        let params = Params::new(2).unwrap();
        let mut store = Store::new(params);
        let c = store.intern(&Element::C);
        let before = store.len();
        let mark = store.mark();
        let t = store.f(&[c, c]);
        let t2 = store.f(&[t, c]);
        assert_eq!(store.level(t2), 2);
        let shifted = store.u_pqr(
            [
                store.d[0],
                store.d[1],
                c,
            ],
            store.cycle[0],
        );
        assert_eq!(store.resolve(shifted), Element::A(1, 1));
        store.rollback(mark);
        assert_eq!(store.len(), before);
        let again = store.f(&[c, c]);
        assert_eq!(again.0 as usize, before);
        assert_eq!(store.resolve(again).to_string(), "t([c,c],0)");
    }
}

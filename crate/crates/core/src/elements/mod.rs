//! The universe of the constructed algebra and its fundamental operations.
//!
//! Elements are finite symbolic trees. Atoms are the generators `a(i,j)`,
//! `b(i,j)`, the constants `d(k)` and `c`; every other element is a tagged
//! tuple `t([x1,...,xn], tag)` produced by `f` outside the domain of the
//! base table. Each element has exactly one representation, so structural
//! equality is element equality.

mod store;

pub use store::{ElemId, Store};

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Default cap on the size of a bounded subuniverse.
pub const DEFAULT_ELEMENT_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElementError {
    #[error("arity parameter n must be at least 2, got {0}")]
    BadArity(usize),
    #[error("expected {expected} arguments, got {found}")]
    WrongArgCount { expected: usize, found: usize },
    #[error("arguments {0} are outside the domain of the base table")]
    OutsideBaseDomain(String),
    #[error("invalid u_pqr triple ({p}, {q}, {r}): {reason}")]
    InvalidTriple {
        p: String,
        q: String,
        r: String,
        reason: &'static str,
    },
    #[error("malformed element {element}: {reason}")]
    Malformed { element: String, reason: String },
    #[error("bounded subuniverse exceeds the cap of {cap} elements")]
    Budget { cap: usize },
}

/// The arity parameter `n` of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params {
    n: usize,
}

impl Params {
    pub fn new(n: usize) -> Result<Self, ElementError> {
        // 2^(n-1)+1 must fit comfortably in a u32 index.
        if !(2..=24).contains(&n) {
            return Err(ElementError::BadArity(n));
        }
        Ok(Params { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of `d` constants, `2^(n-1) + 1`.
    pub fn d_count(&self) -> u32 {
        (1u32 << (self.n - 1)) + 1
    }

    /// Order of `u` on its support, `2n + 1`.
    pub fn cycle_len(&self) -> usize {
        2 * self.n + 1
    }

    /// The `u` cycle `(a_1 b_1 a_2 b_2 ... a_n b_n c)` in order.
    pub fn cycle(&self) -> Vec<Element> {
        let mut out = Vec::with_capacity(self.cycle_len());
        for i in 1..=self.n as u32 {
            out.push(Element::A(i, 0));
            out.push(Element::B(i, 0));
        }
        out.push(Element::C);
        out
    }

    /// The set `C = {a_1..a_n, b_1..b_n}` in canonical order.
    pub fn c_set(&self) -> Vec<Element> {
        let mut out: Vec<Element> = (1..=self.n as u32).map(|i| Element::A(i, 0)).collect();
        out.extend((1..=self.n as u32).map(|i| Element::B(i, 0)));
        out
    }

    /// `d_1, ..., d_{2^(n-1)+1}, c`: the atoms outside `B`.
    pub fn non_b_atoms(&self) -> Vec<Element> {
        let mut out: Vec<Element> = (1..=self.d_count()).map(Element::D).collect();
        out.push(Element::C);
        out
    }

    /// All valid `u_pqr` triples over [`Params::non_b_atoms`], in canonical order.
    pub fn default_triple_pool(&self) -> Vec<Triple> {
        let atoms = self.non_b_atoms();
        let mut pool = Vec::new();
        for p in &atoms {
            for q in &atoms {
                for r in &atoms {
                    if let Ok(t) = Triple::new(p.clone(), q.clone(), r.clone()) {
                        pool.push(t);
                    }
                }
            }
        }
        pool
    }
}

/// A member of the universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Element {
    /// `a_{i,j}`, with `1 <= i <= n`.
    A(u32, u32),
    /// `b_{i,j}`, with `1 <= i <= n`.
    B(u32, u32),
    /// `d_k`, with `1 <= k <= 2^(n-1)+1`.
    D(u32),
    /// `c`.
    C,
    /// The pair `(args, tag)` adjoined at stage `tag + 1`.
    Tagged(Arc<[Element]>, u32),
}

impl Element {
    fn rank(&self) -> u8 {
        match self {
            Element::A(..) => 0,
            Element::B(..) => 1,
            Element::D(_) => 2,
            Element::C => 3,
            Element::Tagged(..) => 4,
        }
    }

    /// Least `i` with the element in `A_i`.
    pub fn level(&self) -> u32 {
        match self {
            Element::Tagged(_, tag) => tag + 1,
            _ => 0,
        }
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self, Element::Tagged(..))
    }

    /// Membership in `B = {a_{i,j}, b_{i,j}}`.
    pub fn in_b(&self) -> bool {
        matches!(self, Element::A(..) | Element::B(..))
    }

    /// Membership in `C = {a_i, b_i}` (second index zero).
    pub fn in_c(&self) -> bool {
        matches!(self, Element::A(_, 0) | Element::B(_, 0))
    }

    /// Builds `f`'s tagged output for `args`, validating the invariants.
    pub fn tagged(args: Vec<Element>, params: &Params) -> Result<Element, ElementError> {
        if args.len() != params.n {
            return Err(ElementError::WrongArgCount {
                expected: params.n,
                found: args.len(),
            });
        }
        if in_dmn_f0(&args, params) {
            return Err(ElementError::OutsideBaseDomain(format_args_list(&args)));
        }
        let tag = level_of(&args);
        Ok(Element::Tagged(args.into(), tag))
    }

    /// Checks every invariant of the representation for parameter `n`.
    pub fn validate(&self, params: &Params) -> Result<(), ElementError> {
        let bad = |reason: String| ElementError::Malformed {
            element: self.to_string(),
            reason,
        };
        match self {
            Element::A(i, _) | Element::B(i, _) => {
                if *i == 0 || *i as usize > params.n {
                    return Err(bad(format!("index {i} not in 1..={}", params.n)));
                }
            }
            Element::D(k) => {
                if *k == 0 || *k > params.d_count() {
                    return Err(bad(format!("index {k} not in 1..={}", params.d_count())));
                }
            }
            Element::C => {}
            Element::Tagged(args, tag) => {
                if args.len() != params.n {
                    return Err(bad(format!("{} components, expected {}", args.len(), params.n)));
                }
                for a in args.iter() {
                    a.validate(params)?;
                }
                if *tag != level_of(args) {
                    return Err(bad(format!("tag {tag} differs from level {}", level_of(args))));
                }
                if in_dmn_f0(args, params) {
                    return Err(bad("components lie in the domain of the base table".into()));
                }
            }
        }
        Ok(())
    }
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> Ordering {
        use Element::*;
        match (self, other) {
            (A(i, j), A(k, l)) | (B(i, j), B(k, l)) => (i, j).cmp(&(k, l)),
            (D(i), D(k)) => i.cmp(k),
            (C, C) => Ordering::Equal,
            (Tagged(xs, s), Tagged(ys, t)) => s.cmp(t).then_with(|| xs.iter().cmp(ys.iter())),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::A(i, j) => write!(f, "a({i},{j})"),
            Element::B(i, j) => write!(f, "b({i},{j})"),
            Element::D(k) => write!(f, "d({k})"),
            Element::C => write!(f, "c"),
            Element::Tagged(args, tag) => write!(f, "t({},{tag})", format_args_list(args)),
        }
    }
}

pub(crate) fn format_args_list(args: &[Element]) -> String {
    let parts: Vec<String> = args.iter().map(|e| e.to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// Level of a tuple: the maximum level of its components.
pub fn level_of(args: &[Element]) -> u32 {
    args.iter().map(Element::level).max().unwrap_or(0)
}

/// Whether `args` lies in the domain of the base table: position `i` holds `a_i` or `b_i`.
pub fn in_dmn_f0(args: &[Element], params: &Params) -> bool {
    args.len() == params.n
        && args.iter().enumerate().all(|(pos, e)| {
            let i = pos as u32 + 1;
            matches!(e, Element::A(k, 0) | Element::B(k, 0) if *k == i)
        })
}

/// Index `k` of the `d_k` produced by the base table from a choice vector
/// (`false` = `a_i`, `true` = `b_i`). The first `n-1` choices are read as a
/// binary number with `x_1` most significant; all-`b` maps to the extra
/// constant `d_{2^(n-1)+1}`.
pub(crate) fn f0_index(choices: impl Iterator<Item = bool>, params: &Params) -> u32 {
    let n = params.n;
    let mut k = 0u32;
    let mut all_b = true;
    for (pos, is_b) in choices.enumerate() {
        all_b &= is_b;
        if pos < n - 1 && is_b {
            k |= 1 << (n - 2 - pos);
        }
    }
    if all_b {
        params.d_count()
    } else {
        k + 1
    }
}

/// The base table `f_0` on its domain.
pub fn f0_value(args: &[Element], params: &Params) -> Result<Element, ElementError> {
    if !in_dmn_f0(args, params) {
        return Err(ElementError::OutsideBaseDomain(format_args_list(args)));
    }
    let k = f0_index(args.iter().map(|e| matches!(e, Element::B(..))), params);
    Ok(Element::D(k))
}

/// The fundamental operation `f`.
pub fn eval_f(args: &[Element], params: &Params) -> Result<Element, ElementError> {
    if args.len() != params.n {
        return Err(ElementError::WrongArgCount {
            expected: params.n,
            found: args.len(),
        });
    }
    if in_dmn_f0(args, params) {
        return f0_value(args, params);
    }
    Ok(Element::Tagged(args.into(), level_of(args)))
}

/// The permutation `u = (a_1 b_1 a_2 b_2 ... a_n b_n c)`; fixes everything else.
pub fn eval_u(e: &Element, params: &Params) -> Element {
    let n = params.n as u32;
    match e {
        Element::A(i, 0) => Element::B(*i, 0),
        Element::B(i, 0) if *i < n => Element::A(i + 1, 0),
        Element::B(i, 0) if *i == n => Element::C,
        Element::C => Element::A(1, 0),
        _ => e.clone(),
    }
}

/// `u^k(e)`.
pub fn eval_u_pow(e: &Element, k: usize, params: &Params) -> Element {
    let mut x = e.clone();
    for _ in 0..k % params.cycle_len() {
        x = eval_u(&x, params);
    }
    x
}

/// The parameter triple of a `u_pqr` symbol: pairwise distinct, none in `B`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    p: Element,
    q: Element,
    r: Element,
}

impl Triple {
    pub fn new(p: Element, q: Element, r: Element) -> Result<Self, ElementError> {
        let err = |reason| ElementError::InvalidTriple {
            p: p.to_string(),
            q: q.to_string(),
            r: r.to_string(),
            reason,
        };
        if p == q || q == r || p == r {
            return Err(err("coordinates are not pairwise distinct"));
        }
        if p.in_b() || q.in_b() || r.in_b() {
            return Err(err("a coordinate lies in B"));
        }
        Ok(Triple { p, q, r })
    }

    pub fn p(&self) -> &Element {
        &self.p
    }

    pub fn q(&self) -> &Element {
        &self.q
    }

    pub fn r(&self) -> &Element {
        &self.r
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{};{}", self.p, self.q, self.r)
    }
}

/// The unary operation `u_pqr`.
pub fn eval_u_pqr(t: &Triple, x: &Element) -> Element {
    if *x == t.p {
        t.q.clone()
    } else if *x == t.q {
        t.r.clone()
    } else if *x == t.r {
        t.p.clone()
    } else {
        match x {
            Element::A(i, j) => Element::A(*i, j + 1),
            Element::B(i, j) => Element::B(*i, j + 1),
            _ => x.clone(),
        }
    }
}

/// `u_pqr` with an unvalidated triple.
pub fn u_pqr(p: &Element, q: &Element, r: &Element, x: &Element) -> Result<Element, ElementError> {
    let t = Triple::new(p.clone(), q.clone(), r.clone())?;
    Ok(eval_u_pqr(&t, x))
}

/// The atoms `a_{i,j}, b_{i,j}` (`j <= j_max`), all `d_k` and `c`.
pub fn base_atoms(params: &Params, j_max: u32) -> Vec<Element> {
    let n = params.n as u32;
    let mut out = Vec::new();
    for i in 1..=n {
        for j in 0..=j_max {
            out.push(Element::A(i, j));
        }
    }
    for i in 1..=n {
        for j in 0..=j_max {
            out.push(Element::B(i, j));
        }
    }
    out.extend(params.non_b_atoms());
    out
}

/// `S_T` where `S_0` is [`base_atoms`] and `S_{t+1} = S_t ∪ f[S_t^n]`, in canonical order.
pub fn bounded_subuniverse(
    params: &Params,
    j_max: u32,
    closure_depth: u32,
    cap: usize,
) -> Result<Vec<Element>, ElementError> {
    let mut set: BTreeSet<Element> = base_atoms(params, j_max).into_iter().collect();
    if set.len() > cap {
        return Err(ElementError::Budget { cap });
    }
    for _ in 0..closure_depth {
        let current: Vec<Element> = set.iter().cloned().collect();
        let s = current.len();
        let mut idx = vec![0usize; params.n];
        loop {
            let args: Vec<Element> = idx.iter().map(|&i| current[i].clone()).collect();
            set.insert(eval_f(&args, params)?);
            if set.len() > cap {
                return Err(ElementError::Budget { cap });
            }
            if !odometer_step(&mut idx, s) {
                break;
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Advances a base-`radix` counter, last digit fastest. Returns false on wrap-around.
pub(crate) fn odometer_step(idx: &mut [usize], radix: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize) -> Params {
        Params::new(n).unwrap()
    }

    fn a(i: u32) -> Element {
        Element::A(i, 0)
    }

    fn b(i: u32) -> Element {
        Element::B(i, 0)
    }

    #[test]
    fn params_reject_small_n() {
        assert_eq!(Params::new(1), Err(ElementError::BadArity(1)));
        assert!(Params::new(2).is_ok());
    }

    #[test]
    fn levels() {
        let pr = p(3);
        assert_eq!(Element::C.level(), 0);
        let t0 = eval_f(&[Element::C, Element::C, Element::C], &pr).unwrap();
        assert_eq!(t0.level(), 1);
        let t1 = eval_f(&[t0.clone(), Element::C, Element::C], &pr).unwrap();
        assert_eq!(t1.level(), 2);
        assert!(matches!(t1, Element::Tagged(_, 1)));
    }

    #[test]
    fn base_domain_membership() {
        let pr = p(3);
        assert!(in_dmn_f0(&[a(1), a(2), a(3)], &pr));
        assert!(!in_dmn_f0(&[a(1), a(2), Element::C], &pr));
        assert!(!in_dmn_f0(&[a(2), a(1), a(3)], &pr));
        assert!(!in_dmn_f0(&[Element::A(1, 1), a(2), a(3)], &pr));
    }

    #[test]
    fn base_table_values_n3() {
        let pr = p(3);
        assert_eq!(f0_value(&[a(1), a(2), b(3)], &pr).unwrap(), Element::D(1));
        assert_eq!(f0_value(&[b(1), b(2), a(3)], &pr).unwrap(), Element::D(4));
        assert_eq!(f0_value(&[b(1), b(2), b(3)], &pr).unwrap(), Element::D(5));
        assert!(f0_value(&[Element::C, b(2), b(3)], &pr).is_err());
    }

    /// Rows of the table listed explicitly: the first n-1 choices count up
    /// in binary, the last choice only matters in the final row.
    #[test]
    fn base_table_matches_listing_n4() {
        let pr = p(4);
        let mut expected = Vec::new();
        for t in 1..(1u32 << 3) {
            expected.push(t);
            expected.push(t);
        }
        expected.push(8);
        expected.push(9);
        let mut got = Vec::new();
        for code in 0..16u32 {
            let args: Vec<Element> = (0..4)
                .map(|pos| {
                    let i = pos + 1;
                    if code >> (3 - pos) & 1 == 1 {
                        b(i)
                    } else {
                        a(i)
                    }
                })
                .collect();
            match eval_f(&args, &pr).unwrap() {
                Element::D(k) => got.push(k),
                other => panic!("unexpected {other}"),
            }
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn f_on_n2() {
        let pr = p(2);
        assert_eq!(eval_f(&[a(1), a(2)], &pr).unwrap(), Element::D(1));
        assert_eq!(eval_f(&[a(1), b(2)], &pr).unwrap(), Element::D(1));
        assert_eq!(eval_f(&[b(1), a(2)], &pr).unwrap(), Element::D(2));
        assert_eq!(eval_f(&[b(1), b(2)], &pr).unwrap(), Element::D(3));
        let t = eval_f(&[Element::C, Element::C], &pr).unwrap();
        assert_eq!(t.to_string(), "t([c,c],0)");
        assert!(eval_f(&[Element::C], &pr).is_err());
    }

    #[test]
    fn u_cycle() {
        let pr = p(2);
        assert_eq!(eval_u(&Element::C, &pr), a(1));
        assert_eq!(eval_u(&a(1), &pr), b(1));
        assert_eq!(eval_u(&b(1), &pr), a(2));
        assert_eq!(eval_u(&b(2), &pr), Element::C);
        assert_eq!(eval_u(&Element::D(1), &pr), Element::D(1));
        assert_eq!(eval_u(&Element::A(1, 1), &pr), Element::A(1, 1));
        for e in pr.cycle() {
            assert_eq!(eval_u_pow(&e, pr.cycle_len(), &pr), e);
        }
    }

    #[test]
    fn u_pqr_clauses() {
        let d = Element::D;
        assert_eq!(u_pqr(&d(1), &d(2), &Element::C, &d(1)).unwrap(), d(2));
        assert_eq!(u_pqr(&d(1), &d(2), &Element::C, &d(2)).unwrap(), Element::C);
        assert_eq!(u_pqr(&d(1), &d(2), &Element::C, &Element::C).unwrap(), d(1));
        assert_eq!(
            u_pqr(&d(1), &d(2), &Element::C, &a(1)).unwrap(),
            Element::A(1, 1)
        );
        assert_eq!(
            u_pqr(&d(1), &d(2), &Element::C, &Element::B(2, 4)).unwrap(),
            Element::B(2, 5)
        );
        assert_eq!(u_pqr(&d(1), &d(2), &Element::C, &d(3)).unwrap(), d(3));
    }

    #[test]
    fn invalid_triples() {
        let d = Element::D;
        assert!(Triple::new(d(1), d(1), Element::C).is_err());
        assert!(Triple::new(d(1), a(1), Element::C).is_err());
        assert!(Triple::new(d(1), Element::B(1, 3), Element::C).is_err());
    }

    #[test]
    fn canonical_order() {
        let pr = p(2);
        let t0 = eval_f(&[Element::C, Element::C], &pr).unwrap();
        let t1 = eval_f(&[t0.clone(), Element::C], &pr).unwrap();
        let mut xs = vec![
            t1.clone(),
            Element::C,
            Element::D(2),
            t0.clone(),
            Element::B(1, 0),
            Element::A(2, 0),
            Element::A(1, 1),
            Element::D(1),
        ];
        xs.sort();
        assert_eq!(
            xs,
            vec![
                Element::A(1, 1),
                Element::A(2, 0),
                Element::B(1, 0),
                Element::D(1),
                Element::D(2),
                Element::C,
                t0,
                t1
            ]
        );
    }

    #[test]
    fn subuniverse_sizes() {
        let pr = p(2);
        let s = bounded_subuniverse(&pr, 0, 0, DEFAULT_ELEMENT_CAP).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(
            s,
            vec![a(1), a(2), b(1), b(2), Element::D(1), Element::D(2), Element::D(3), Element::C]
        );
        assert_eq!(bounded_subuniverse(&pr, 1, 0, DEFAULT_ELEMENT_CAP).unwrap().len(), 12);
        assert_eq!(bounded_subuniverse(&pr, 0, 1, DEFAULT_ELEMENT_CAP).unwrap().len(), 68);
        assert_eq!(bounded_subuniverse(&pr, 1, 1, DEFAULT_ELEMENT_CAP).unwrap().len(), 152);
        assert_eq!(
            bounded_subuniverse(&pr, 0, 1, 20),
            Err(ElementError::Budget { cap: 20 })
        );
    }

    #[test]
    fn validation() {
        let pr = p(2);
        assert!(Element::A(3, 0).validate(&pr).is_err());
        assert!(Element::D(4).validate(&pr).is_err());
        let bad = Element::Tagged(vec![a(1), a(2)].into(), 0);
        assert!(bad.validate(&pr).is_err());
        let bad_tag = Element::Tagged(vec![Element::C, Element::C].into(), 1);
        assert!(bad_tag.validate(&pr).is_err());
        assert!(Element::tagged(vec![Element::C, Element::C], &pr).unwrap().validate(&pr).is_ok());
    }
}

//! Terms over the signature `{f, u, u_pqr}` and their evaluation.

mod enumerate;

pub use enumerate::{count_terms, enumerate_terms, TermStream, DEFAULT_TERM_CAP};

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::elements::{
    eval_f, eval_u, eval_u_pow, eval_u_pqr, Element, ElementError, Params, Triple,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("variable x{0} is unbound")]
    UnboundVariable(u32),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error("not a unary polynomial: {0}")]
    NotUnary(String),
    #[error("term enumeration would produce {count} terms, over the cap of {cap}")]
    Budget { count: u128, cap: u128 },
}

/// A term. `Const` leaves only occur in unary polynomial bodies and in
/// closed expressions given on the command line.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(u32),
    Const(Element),
    U(Arc<Term>),
    Upqr(Triple, Arc<Term>),
    F(Vec<Arc<Term>>),
}

impl Term {
    pub fn var(i: u32) -> Term {
        Term::Var(i)
    }

    pub fn u(t: Term) -> Term {
        Term::U(Arc::new(t))
    }

    pub fn upqr(triple: Triple, t: Term) -> Term {
        Term::Upqr(triple, Arc::new(t))
    }

    pub fn f(args: Vec<Term>) -> Term {
        Term::F(args.into_iter().map(Arc::new).collect())
    }

    /// `f(x_0, ..., x_{n-1})`.
    pub fn f_of_vars(n: usize) -> Term {
        Term::f((0..n as u32).map(Term::Var).collect())
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 0,
            Term::U(t) | Term::Upqr(_, t) => 1 + t.depth(),
            Term::F(args) => 1 + args.iter().map(|a| a.depth()).max().unwrap_or(0),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Term::Var(_) => 0,
            Term::Const(_) => 1,
            Term::U(_) => 2,
            Term::Upqr(..) => 3,
            Term::F(_) => 4,
        }
    }

    /// Marks `used[i]` for every variable `x_i` occurring in the term.
    /// Variables beyond `used.len()` are ignored.
    pub fn mark_vars(&self, used: &mut [bool]) {
        match self {
            Term::Var(i) => {
                if let Some(slot) = used.get_mut(*i as usize) {
                    *slot = true;
                }
            }
            Term::Const(_) => {}
            Term::U(t) | Term::Upqr(_, t) => t.mark_vars(used),
            Term::F(args) => args.iter().for_each(|a| a.mark_vars(used)),
        }
    }

    /// Largest variable index, if any variable occurs.
    pub fn max_var(&self) -> Option<u32> {
        match self {
            Term::Var(i) => Some(*i),
            Term::Const(_) => None,
            Term::U(t) | Term::Upqr(_, t) => t.max_var(),
            Term::F(args) => args.iter().filter_map(|a| a.max_var()).max(),
        }
    }

    pub fn has_const(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) => true,
            Term::U(t) | Term::Upqr(_, t) => t.has_const(),
            Term::F(args) => args.iter().any(|a| a.has_const()),
        }
    }

    /// Replaces every variable `x_i` by the constant `a(i)`.
    pub fn substitute(&self, a: &Assignment) -> Result<Term, TermError> {
        Ok(match self {
            Term::Var(i) => Term::Const(a.get(*i)?.clone()),
            Term::Const(e) => Term::Const(e.clone()),
            Term::U(t) => Term::U(Arc::new(t.substitute(a)?)),
            Term::Upqr(tr, t) => Term::Upqr(tr.clone(), Arc::new(t.substitute(a)?)),
            Term::F(args) => Term::F(
                args.iter()
                    .map(|t| t.substitute(a).map(Arc::new))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth()
            .cmp(&other.depth())
            .then_with(|| self.rank().cmp(&other.rank()))
            .then_with(|| match (self, other) {
                (Term::Var(i), Term::Var(j)) => i.cmp(j),
                (Term::Const(x), Term::Const(y)) => x.cmp(y),
                (Term::U(s), Term::U(t)) => s.cmp(t),
                (Term::Upqr(a, s), Term::Upqr(b, t)) => a.cmp(b).then_with(|| s.cmp(t)),
                (Term::F(xs), Term::F(ys)) => xs.iter().cmp(ys.iter()),
                _ => Ordering::Equal,
            })
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::Const(e) => write!(f, "{e}"),
            Term::U(t) => write!(f, "u({t})"),
            Term::Upqr(tr, t) => write!(f, "upqr{{{tr}}}({t})"),
            Term::F(args) => {
                write!(f, "f(")?;
                for (k, a) in args.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Values for the variables `x_0, x_1, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<Element>);

impl Assignment {
    pub fn get(&self, i: u32) -> Result<&Element, TermError> {
        self.0.get(i as usize).ok_or(TermError::UnboundVariable(i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<Element>> for Assignment {
    fn from(v: Vec<Element>) -> Self {
        Assignment(v)
    }
}

pub fn eval_term(t: &Term, a: &Assignment, params: &Params) -> Result<Element, TermError> {
    Ok(match t {
        Term::Var(i) => a.get(*i)?.clone(),
        Term::Const(e) => e.clone(),
        Term::U(s) => eval_u(&eval_term(s, a, params)?, params),
        Term::Upqr(tr, s) => eval_u_pqr(tr, &eval_term(s, a, params)?),
        Term::F(args) => {
            let vals = args
                .iter()
                .map(|s| eval_term(s, a, params))
                .collect::<Result<Vec<_>, _>>()?;
            eval_f(&vals, params)?
        }
    })
}

/// A one-variable polynomial: a term in `x0` whose other leaves are constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnaryPolynomial {
    body: Term,
}

impl UnaryPolynomial {
    pub fn new(body: Term) -> Result<Self, TermError> {
        match body.max_var() {
            None => Err(TermError::NotUnary(format!("{body} has no free variable"))),
            Some(0) => Ok(UnaryPolynomial { body }),
            Some(i) => Err(TermError::NotUnary(format!("{body} mentions x{i}"))),
        }
    }

    /// `f(x, ..., x)`.
    pub fn diagonal_f(params: &Params) -> Self {
        UnaryPolynomial {
            body: Term::f(vec![Term::Var(0); params.n()]),
        }
    }

    pub fn u() -> Self {
        UnaryPolynomial {
            body: Term::u(Term::Var(0)),
        }
    }

    pub fn upqr(triple: Triple) -> Self {
        UnaryPolynomial {
            body: Term::upqr(triple, Term::Var(0)),
        }
    }

    pub fn body(&self) -> &Term {
        &self.body
    }
}

impl fmt::Display for UnaryPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.body.fmt(f)
    }
}

pub fn eval_poly(g: &UnaryPolynomial, x: &Element, params: &Params) -> Result<Element, TermError> {
    eval_term(&g.body, &Assignment(vec![x.clone()]), params)
}

/// Least `(i, m)` (by `i`, then `m <= max_power`) such that `t(a) = u^m(a(i))`
/// for every sample `a`. Variables range over the indices bound by every sample.
pub fn is_power_of_u_on(
    t: &Term,
    samples: &[Assignment],
    max_power: usize,
    params: &Params,
) -> Result<Option<(u32, usize)>, TermError> {
    let width = samples.iter().map(Assignment::len).min().unwrap_or(0);
    let values = samples
        .iter()
        .map(|a| eval_term(t, a, params))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 0..width {
        for m in 0..=max_power {
            let fits = samples
                .iter()
                .zip(&values)
                .all(|(a, v)| eval_u_pow(&a.0[i], m, params) == *v);
            if fits {
                return Ok(Some((i as u32, m)));
            }
        }
    }
    Ok(None)
}

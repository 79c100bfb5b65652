//! Bounded verification of the constructed algebra's lemmas and
//! claims, reported as one JSON record per check.
//!
//! A passing search means "no counterexample within the bounds". That is
//! evidence at the bound, never a proof.

pub mod chain;
pub mod checks;

pub use chain::{corrupt_chain, simplicity_chain, verify_chain, ChainError, ChainStep, MalcevChain};
pub use checks::{
    check_corner_lemma, check_nfequal, check_term_lemma, expected_top_cube, search_np1_control,
    search_np1_failure, verify_top_commutator, witness_json,
};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cubes::CubeError;
use crate::elements::{bounded_subuniverse, Element, ElementError, Params};
use crate::terms::TermError;

/// Resource caps shared by every check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Elements in a bounded subuniverse.
    pub elements: usize,
    /// Enumerated terms.
    pub terms: u128,
    /// Cubes in a finite-algebra subpower.
    pub cubes: usize,
    /// Cells of a value table (tuples of domain elements).
    pub table: u128,
}

impl Budget {
    /// Elements, terms and cubes capped at `n`, tables at `64 n`.
    pub fn uniform(n: u64) -> Budget {
        Budget {
            elements: usize::try_from(n).unwrap_or(usize::MAX),
            terms: n as u128,
            cubes: usize::try_from(n).unwrap_or(usize::MAX),
            table: 64 * n as u128,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::uniform(1_000_000)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("invalid input: {0}")]
    Input(String),
}

impl From<ElementError> for VerifyError {
    fn from(e: ElementError) -> Self {
        match e {
            ElementError::Budget { .. } => VerifyError::Budget(e.to_string()),
            other => VerifyError::Input(other.to_string()),
        }
    }
}

impl From<TermError> for VerifyError {
    fn from(e: TermError) -> Self {
        match e {
            TermError::Budget { .. } => VerifyError::Budget(e.to_string()),
            TermError::Element(inner) => inner.into(),
            other => VerifyError::Input(other.to_string()),
        }
    }
}

impl From<CubeError> for VerifyError {
    fn from(e: CubeError) -> Self {
        match e {
            CubeError::Budget { .. } => VerifyError::Budget(e.to_string()),
            CubeError::Term(inner) => inner.into(),
            other => VerifyError::Input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub outcome: Outcome,
    /// Replayable evidence when the outcome is `fail`.
    pub counterexample: Option<Value>,
    /// Supporting data for a pass, such as the witness a control search found.
    pub detail: Option<Value>,
    pub note: String,
    pub counts: BTreeMap<String, u64>,
    pub millis: u64,
}

impl VerificationReport {
    pub fn new(
        name: &str,
        params: BTreeMap<String, Value>,
        outcome: Outcome,
        counterexample: Option<Value>,
        counts: BTreeMap<String, u64>,
    ) -> Self {
        VerificationReport {
            name: name.into(),
            params,
            outcome,
            counterexample,
            detail: None,
            note: String::new(),
            counts,
            millis: 0,
        }
    }

    pub fn budget(name: &str, params: BTreeMap<String, Value>, message: String) -> Self {
        let mut r = Self::new(name, params, Outcome::Budget, None, BTreeMap::new());
        r.note = message;
        r
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Every bound of a verifier run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteConfig {
    pub params: Params,
    pub j_max: u32,
    pub closure_depth: u32,
    pub max_depth: usize,
    pub block_len: usize,
    pub budget: Budget,
    pub seed: u64,
    pub chains: usize,
    pub parallel: bool,
    /// Record wall time; off gives byte-reproducible output.
    pub timing: bool,
}

impl SuiteConfig {
    /// For `n = 2` the domain is the subuniverse with `j_max = 1` closed
    /// once under the operations and terms reach depth 2. For larger `n`
    /// the domain is the base atoms and terms stop at depth 1, since the
    /// number of depth-2 terms in `n` variables passes the default term cap.
    pub fn defaults(params: Params) -> Self {
        let small = params.n() == 2;
        SuiteConfig {
            params,
            j_max: u32::from(small),
            closure_depth: u32::from(small),
            max_depth: if small { 2 } else { 1 },
            block_len: 1,
            budget: Budget::default(),
            seed: 0,
            chains: 64,
            parallel: false,
            timing: true,
        }
    }

    fn params_json(&self) -> BTreeMap<String, Value> {
        BTreeMap::from([
            ("n".to_string(), json!(self.params.n())),
            ("j_max".to_string(), json!(self.j_max)),
            ("closure_depth".to_string(), json!(self.closure_depth)),
        ])
    }
}

/// Round-trips `count` chains for seeded random triples from `s`, then
/// checks that a corrupted chain is rejected.
pub fn check_simplicity_chains(
    params: &Params,
    s: &[Element],
    count: usize,
    seed: u64,
) -> Result<VerificationReport, VerifyError> {
    if s.len() < 2 {
        return Err(VerifyError::Input("chains need at least two elements".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut steps, mut verified) = (0u64, 0u64);
    let mut counterexample = None;
    let mut mutation_target = None;
    for _ in 0..count {
        let pq: Vec<&Element> = s.choose_multiple(&mut rng, 2).collect();
        let r = s.choose(&mut rng).expect("non-empty");
        let chain = simplicity_chain(params, pq[0], pq[1], r).map_err(|e| VerifyError::Input(e.to_string()))?;
        steps += chain.steps.len() as u64;
        if verify_chain(&chain, params) {
            verified += 1;
        } else if counterexample.is_none() {
            counterexample = Some(chain.to_json());
        }
        if mutation_target.is_none() && !chain.steps.is_empty() {
            mutation_target = Some(chain);
        }
    }
    let mutation_rejected = match mutation_target.and_then(|c| corrupt_chain(&c, params)) {
        Some(bad) => {
            let rejected = !verify_chain(&bad, params);
            if !rejected && counterexample.is_none() {
                counterexample = Some(json!({"accepted_corrupted_chain": bad.to_json()}));
            }
            rejected
        }
        None => false,
    };
    let ok = counterexample.is_none() && mutation_rejected;
    let params_json = BTreeMap::from([
        ("n".to_string(), json!(params.n())),
        ("domain_size".to_string(), json!(s.len())),
        ("seed".to_string(), json!(seed)),
    ]);
    Ok(VerificationReport::new(
        "simplicity_chains",
        params_json,
        if ok { Outcome::Pass } else { Outcome::Fail },
        counterexample,
        BTreeMap::from([
            ("chains".into(), count as u64),
            ("chains_verified".into(), verified),
            ("steps".into(), steps),
            ("mutations_rejected".into(), u64::from(mutation_rejected)),
        ]),
    ))
}

/// Names of the suite's records, in emission order.
pub const SUITE_CHECKS: [&str; 7] = [
    "nfequal",
    "corner_lemma",
    "term_lemma",
    "top_commutator",
    "np1_search",
    "np1_control",
    "simplicity_chains",
];

/// Runs every check and returns one report per entry of [`SUITE_CHECKS`].
/// Budget exhaustion inside a check becomes a `budget` record.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<VerificationReport> {
    let params = &cfg.params;
    let domain = bounded_subuniverse(params, cfg.j_max, cfg.closure_depth, cfg.budget.elements)
        .map(|s| s.into_iter().collect::<Vec<_>>());
    let pool = params.default_triple_pool();
    let mut out = Vec::with_capacity(SUITE_CHECKS.len());
    for name in SUITE_CHECKS {
        let start = Instant::now();
        let result = match &domain {
            Err(e) => Err(VerifyError::from(e.clone())),
            Ok(s) => match name {
                "nfequal" => check_nfequal(params, s, &cfg.budget),
                "corner_lemma" => check_corner_lemma(params, params.n(), s, cfg.max_depth, &pool, &cfg.budget),
                "term_lemma" => check_term_lemma(params, s, cfg.max_depth, &pool, &cfg.budget),
                "top_commutator" => verify_top_commutator(params),
                "np1_search" => {
                    search_np1_failure(params, s, cfg.max_depth, cfg.block_len, &pool, &cfg.budget, cfg.parallel)
                }
                "np1_control" => {
                    search_np1_control(params, s, cfg.max_depth, cfg.block_len, &pool, &cfg.budget, cfg.parallel)
                }
                "simplicity_chains" => check_simplicity_chains(params, s, cfg.chains, cfg.seed),
                _ => unreachable!("unknown check"),
            },
        };
        let mut report = match result {
            Ok(mut r) => {
                for (k, v) in cfg.params_json() {
                    r.params.entry(k).or_insert(v);
                }
                r
            }
            Err(VerifyError::Budget(msg)) => VerificationReport::budget(name, cfg.params_json(), msg),
            Err(VerifyError::Input(msg)) => {
                let mut r = VerificationReport::new(name, cfg.params_json(), Outcome::Fail, None, BTreeMap::new());
                r.note = msg;
                r
            }
        };
        if cfg.timing {
            report.millis = start.elapsed().as_millis() as u64;
        }
        out.push(report);
    }
    out
}

/// 1 if any check failed, else 2 if any ran out of budget, else 0.
pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| r.outcome == Outcome::Fail) {
        1
    } else if reports.iter().any(|r| r.outcome == Outcome::Budget) {
        2
    } else {
        0
    }
}

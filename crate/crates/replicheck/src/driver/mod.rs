//! Solver orchestration: dispatching queries, decoding models into
//! witnesses, replay validation, and the weakest-policy search.

pub mod search;
pub mod solve;
pub mod witness;

use std::time::Duration;

use thiserror::Error;

use crate::axioms::{AxiomMismatch, AxiomName};
use crate::dsl::LibraryDef;
use crate::encoder;
use crate::policies::Policy;

pub use search::{weakest_policy_search, QueryRecord, SearchConfig, SearchReport};
pub use solve::{
    resolve_backend, solve, Backend, Model, ModelValue, SolveError, SolveStatus, SolverVerdict,
};
pub use witness::{decode_model, validate_witness, DecodeError, ValidateError, Witness};

#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub k: usize,
    pub unroll: u32,
    pub timeout: Duration,
    pub backend: Backend,
}

impl CheckConfig {
    pub fn new(k: usize, backend: Backend) -> CheckConfig {
        CheckConfig { k, unroll: 1, timeout: Duration::from_secs(300), backend }
    }
}

#[derive(Debug)]
pub enum CheckOutcome {
    /// A validated witness execution violating the axiom.
    Violation { witness: Box<Witness>, wall: Duration },
    /// The solver proved the bounded query unsatisfiable.
    NoViolation { wall: Duration },
    /// The solver gave up or ran out of time; no conclusion either way.
    Unknown { timed_out: bool, wall: Duration },
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Axiom(#[from] AxiomMismatch),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("decoding the model failed: {0}")]
    Decode(#[from] DecodeError),
    #[error("witness validation failed: {0}")]
    Validate(#[from] ValidateError),
}

/// One bounded query: encode, solve, decode, validate. A witness is only
/// returned after it replays successfully.
pub fn find_violation(
    lib: &LibraryDef,
    axiom: AxiomName,
    policy: &Policy,
    cfg: &CheckConfig,
) -> Result<CheckOutcome, DriverError> {
    let vocab = encoder::build_vocabulary(lib, cfg.k, cfg.unroll);
    let cs = encoder::encode(&vocab, policy, axiom)?;
    let script = encoder::emit(&vocab, &cs);
    let symbols = vocab.declarations();
    let verdict = solve(&script, &symbols, &cfg.backend, cfg.timeout)?;
    match verdict.status {
        SolveStatus::Unsat => Ok(CheckOutcome::NoViolation { wall: verdict.wall }),
        SolveStatus::Unknown => Ok(CheckOutcome::Unknown { timed_out: false, wall: verdict.wall }),
        SolveStatus::Timeout => Ok(CheckOutcome::Unknown { timed_out: true, wall: verdict.wall }),
        SolveStatus::Sat => {
            let w = decode_model(&vocab, &verdict.model, policy, axiom)?;
            validate_witness(lib, &w)?;
            Ok(CheckOutcome::Violation { witness: Box::new(w), wall: verdict.wall })
        }
    }
}

use thiserror::Error;

use crate::forest::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports.
///
/// Structural problems (bad forests, bad weights) and "this input does not
/// satisfy the precondition" outcomes share one enum so callers such as the
/// CLI can map them onto exit codes in one place.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    // forests
    #[error("a forest needs at least one vertex")]
    EmptyForest,
    #[error("vertex {0} is listed twice")]
    DuplicateVertex(VertexId),
    #[error("vertex {0} has no parent entry")]
    MissingParent(VertexId),
    #[error("parent of {child} is {parent}, which is not a vertex of the forest")]
    DanglingParent { child: VertexId, parent: VertexId },
    #[error("nontrivial cycle through {}", join_ids(.0))]
    Cycle(Vec<VertexId>),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex id {0} occurs in more than one input")]
    VertexCollision(VertexId),
    #[error("the family must be nonempty")]
    EmptyFamily,
    #[error("input {index} is not a rooted directed tree")]
    NotRootedTree { index: usize },
    #[error("expected a single tree, found {components} components")]
    NotATree { components: usize },

    // weighted shifts
    #[error("no weight given for non-root vertex {0}")]
    MissingWeight(VertexId),
    #[error("root {0} must carry weight 0")]
    NonZeroRootWeight(VertexId),
    #[error("negative squared weight at {0}")]
    NegativeWeight(String),
    #[error("tail attached to {0}, which has children in the finite core")]
    TailOnNonLeaf(VertexId),
    #[error("invalid tail at {leaf}: {reason}")]
    InvalidTail { leaf: VertexId, reason: String },
    #[error("shift is not proper: non-root vertex {0} has weight 0")]
    NotProper(String),
    #[error("shift has a leaf at {0} (no children and no tail)")]
    HasLeaf(String),
    #[error("squared weight {0} has no exact square root in this scalar type")]
    NonSquareWeight(String),
    #[error("weight {0} has no exact modulus in this scalar type")]
    NonRationalModulus(String),

    // hyponormality
    #[error("tree is forkless: no non-root vertex has two or more children")]
    ForklessInput,
    #[error("fork vertex {0} is a root; the construction needs a fork with a parent")]
    RootFork(VertexId),
    #[error("vertex {0} has fewer than two children")]
    NotAFork(VertexId),

    // moments
    #[error("measure must be a probability measure (total mass {0})")]
    NotProbability(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid moment sequence: {0}")]
    InvalidMoments(String),

    // subnormality and extensions
    #[error("input shift is not subnormal (first failure at {0})")]
    NotSubnormalInput(String),
    #[error("scale {scale} outside (0, {max}]")]
    ScaleOutOfRange { scale: String, max: String },
    #[error("family member {index} admits no subnormal {steps}-step backward extension")]
    MemberInfeasible { index: usize, steps: usize },
    #[error("envelope does not match the family: {0}")]
    FrontierMismatch(String),
    #[error("family member {index}: supplied 1-step extension fails at power {k}")]
    MemberNotExtendable { index: usize, k: usize },
    #[error("internal postcondition failed: {0}")]
    Postcondition(String),
}

fn join_ids(ids: &[VertexId]) -> String {
    ids.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(" -> ")
}

use thiserror::Error;

/// Errors raised while building or querying trees.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("unknown leaf `{0}`")]
    UnknownLeaf(String),
    #[error("duplicate leaf name `{0}`")]
    DuplicateLeaf(String),
    #[error("leaves must be distinct (got `{0}` twice)")]
    SameLeaf(String),
    #[error("edge lengths must be strictly positive (got {0})")]
    NonPositiveLength(f64),
    #[error("tree needs at least {needed} leaves, has {found}")]
    TooFewLeaves { needed: usize, found: usize },
    #[error("truncation depth must be positive (got {0})")]
    NonPositiveDepth(f64),
    #[error("target height {target} is below the tree height {height}")]
    HeightTooSmall { target: f64, height: f64 },
    #[error("empty leaf subset")]
    EmptySubset,
    #[error("invalid family parameters: {0}")]
    InvalidParams(String),
    #[error("family is not nested at k = {k}: {reason}")]
    NotNested { k: usize, reason: String },
    #[error("newick parse error at byte {pos}: {msg}")]
    Newick { pos: usize, msg: String },
}

/// Errors raised by Markov processes and distributions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProcessError {
    #[error("invalid rate matrix: {0}")]
    InvalidRateMatrix(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("state {0} is out of range")]
    StateOutOfRange(usize),
    #[error("invalid TKF91 parameters: {0}")]
    InvalidTkf91(String),
    #[error("sequence length exceeded the cap of {cap} sites")]
    LengthCap { cap: usize },
    #[error("exact leaf law needs {outcomes} outcomes, above the guard of {guard}")]
    SizeGuard { outcomes: f64, guard: f64 },
    #[error("tree is missing a state for leaf `{0}`")]
    MissingLeaf(String),
}

/// Errors raised by root estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("candidate state set is empty")]
    EmptyCandidates,
    #[error("observation has zero probability under every root state")]
    ImpossibleObservation,
    #[error("majority vote needs an odd number of leaves, got {0}")]
    EvenLeafCount(usize),
    #[error("majority vote needs a two-state chain, saw state {0}")]
    NotTwoState(usize),
    #[error("restriction at scale {0} has no leaves")]
    EmptyRestriction(f64),
    #[error("no row supplied for candidate state {0}")]
    MissingRow(String),
    #[error("{passing} states passed every frequency test; at most one may")]
    ExclusivityViolated { passing: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Process(#[from] ProcessError),
}

/// Errors raised by bound evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("prior support has {0} states; at least two are needed")]
    TooFewStates(usize),
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error("separation must be positive")]
    ZeroSeparation,
    #[error("invalid bound input: {0}")]
    InvalidInput(String),
}

use thiserror::Error;

/// A malformed or inconsistent input. Distinct from a constraint violation:
/// an input error means the question itself cannot be asked.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node index {0} out of range")]
    NodeIndex(usize),
    #[error("link {0} out of range")]
    UnknownLink(usize),
    #[error("link endpoints must be distinct (`{0}`)")]
    SelfLoop(String),
    #[error("more than one link between `{0}` and `{1}`")]
    ParallelLink(String, String),
    #[error("duplicate resource kind `{0}`")]
    DuplicateResource(String),
    #[error("unknown resource kind `{0}`")]
    UnknownResource(String),
    #[error("negative {resource} capacity on node `{node}`")]
    NegativeCapacity { node: String, resource: String },
    #[error("service function `{0}` has no catalog entry")]
    MissingCatalogEntry(String),
    #[error("VNF `{vnf}` of `{sf}` must have positive throughput")]
    ZeroThroughput { sf: String, vnf: String },
    #[error("VNF `{vnf}` of `{sf}` has a negative {resource} demand")]
    NegativeDemand { sf: String, vnf: String, resource: String },
    #[error("VNF `{vnf}` of `{sf}` demands no resource at all")]
    FreeVnf { sf: String, vnf: String },
    #[error("chain has no service functions")]
    EmptyChain,
    #[error("chain demand must be at least 1 Mbps, got {0}")]
    InvalidDemand(u64),
    #[error("stage {0} is not part of the chain")]
    UnknownStage(usize),
    #[error("stage {stage} has no VNF type {vnf}")]
    UnknownVnf { stage: usize, vnf: usize },
    #[error("negative cost weight for `{0}`")]
    NegativeWeight(String),
    #[error("{0}")]
    Parse(String),
}

impl From<serde_json::Error> for InputError {
    fn from(e: serde_json::Error) -> Self {
        InputError::Parse(e.to_string())
    }
}

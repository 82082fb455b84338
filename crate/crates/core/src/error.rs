use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("record {record}: {message}")]
    Parse { record: usize, message: String },

    #[error("corpus: {0}")]
    Corpus(String),

    #[error("synthetic generation: {0}")]
    Generation(String),

    #[error("split: {0}")]
    Split(String),

    #[error("sampling: {0}")]
    Sampling(String),

    #[error("description has no predicates after stopword removal")]
    EmptyDescription,

    #[error("margin is undefined for predicate `{0}`: no trained classifier")]
    UndefinedMargin(String),

    #[error("region {0} is not in the density index")]
    UnknownRegion(u64),

    #[error("no unlabeled region left for predicate `{0}`")]
    Exhausted(String),

    #[error("protocol: {0}")]
    Protocol(String),

    #[error("conflicting label for predicate `{predicate}` on region {region}")]
    LabelConflict { predicate: String, region: u64 },

    #[error("episode: {0}")]
    Episode(String),

    #[error("policy update rejected: {0}")]
    NonFiniteUpdate(String),

    #[error("statistics: {0}")]
    Statistics(String),

    #[error("config: {0}")]
    Config(String),
}

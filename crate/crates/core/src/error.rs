use crate::code_graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    /// `record` is the 1-based line number of the offending record.
    #[error("format error at record {record}: {message}")]
    Format { record: usize, message: String },

    #[error("provider error: {0}")]
    Provider(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("embedding index incomplete: {} node(s) missing", missing.len())]
    PartialIndex { missing: Vec<NodeId> },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn format(record: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            record,
            message: msg.into(),
        }
    }
}

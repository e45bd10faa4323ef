use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("line {line}: {msg}")]
    Semantic { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("arithmetic overflow")]
    Overflow,
    #[error("oracle table has no entry for query {0}")]
    OracleMiss(String),
    #[error("oracle argument is not a word: {0}")]
    OracleArg(String),
    #[error("normal form is not a word: {0}")]
    NotAWord(String),
    #[error("machine stuck: {0}")]
    Stuck(String),
    #[error("step budget of {0} exhausted")]
    Budget(u64),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn semantic(line: usize, msg: impl Into<String>) -> Self {
        Error::Semantic {
            line,
            msg: msg.into(),
        }
    }
}

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<unigrad::Error> for CliError {
    fn from(e: unigrad::Error) -> Self {
        match e {
            unigrad::Error::Usage(msg) => CliError::Config(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared symbol `{name}`")]
    Undeclared { line: usize, col: usize, name: String },
    #[error("unsupported SMT-LIB feature `{0}`")]
    Unsupported(String),
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl InputError {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        InputError::Parse { line, col, msg: msg.into() }
    }
}

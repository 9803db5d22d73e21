use std::path::PathBuf;

/// Everything that can go wrong while loading, validating or running an experiment.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cyclic workflow {0}")]
    CyclicWorkflow(u64),
    #[error("dangling edge: task {task} of workflow {workflow} references unknown parent {parent}")]
    DanglingEdge { workflow: u64, task: u64, parent: u64 },
    #[error("invalid task {task} of workflow {workflow}: {reason}")]
    InvalidTask { workflow: u64, task: u64, reason: String },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("unknown {kind} policy `{name}`")]
    UnknownPolicy { kind: &'static str, name: String },
    #[error("task {task} needs {cpus} cpus but a cluster only has {capacity} slots")]
    Unschedulable { task: u64, cpus: u32, capacity: u32 },
    #[error("{0}")]
    Runtime(String),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code used by the CLI: 1 validation, 2 runtime, 3 IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::Csv(e) if e.is_io_error() => 3,
            Error::Runtime(_) => 2,
            Error::Context { source, .. } => source.exit_code(),
            _ => 1,
        }
    }
}

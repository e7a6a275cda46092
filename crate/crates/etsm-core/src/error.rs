use thiserror::Error;

/// Errors produced by dataset ingestion, metric evaluation, the iteration
/// engine, and hierarchy construction.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter, option, or file was configured inconsistently.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violated a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Text input could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// A numeric argument fell outside the metric's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested metric does not apply to this parameter kind.
    #[error("unsupported metric: {0}")]
    UnsupportedMetric(String),

    /// Partition extraction found more than two connected components.
    /// The histogram buckets contrasted off-diagonal values into tenths.
    #[error(
        "dichotomy violation: {components} components instead of 2 \
         (contrasted-value histogram by tenths: {histogram:?})"
    )]
    DichotomyViolation {
        components: usize,
        histogram: [usize; 10],
    },

    /// Iteration stopped without a clean two-way split.
    #[error(
        "no clean bifurcation after {t_used} transformations \
         (max delta {max_delta:e}): {components} components \
         (contrasted-value histogram by tenths: {histogram:?})"
    )]
    Unresolved {
        components: usize,
        histogram: [usize; 10],
        t_used: usize,
        max_delta: f64,
    },

    /// Inter-group entries of the converged matrix did not agree on a
    /// common limit value.
    #[error("inter-group values spread {spread:e} after {t_used} transformations; expected a single limit")]
    OmegaSpread { spread: f64, t_used: usize },

    /// An engine error, annotated with the cluster that triggered it.
    #[error("while splitting cluster [{members}]")]
    Cluster {
        members: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("base MVA must be positive, got {0}")]
    InvalidBase(f64),
    #[error("bus {0} appears more than once")]
    DuplicateBus(usize),
    #[error("network has no slack bus")]
    NoSlack,
    #[error("network has more than one slack bus: {0:?}")]
    MultipleSlack(Vec<usize>),
    #[error("bus {0} is voltage controlled but has a non-positive set point")]
    InvalidSetpoint(usize),
    #[error("line {line} references unknown bus {bus}")]
    UnknownBus { line: usize, bus: usize },
    #[error("line {line} ({from}-{to}) has zero series impedance")]
    ZeroImpedance { line: usize, from: usize, to: usize },
    #[error("line {line} has non-positive tap ratio {tap}")]
    InvalidTap { line: usize, tap: f64 },
    #[error("generator references unknown bus {0}")]
    UnknownGeneratorBus(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing `mpc.{0}`")]
    Missing(&'static str),
    #[error("{table} row at line {line} has {found} columns, format version {version} requires at least {required}")]
    Columns {
        table: &'static str,
        line: usize,
        found: usize,
        required: usize,
        version: u32,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PwlError {
    #[error("cosine domain ({lower}, {upper}) must lie strictly inside (-pi/2, pi/2) with lower < upper")]
    Domain { lower: f64, upper: f64 },
    #[error("segment count must be at least 1")]
    Segments,
    #[error("{x} is outside the approximation domain [{lower}, {upper}]")]
    OutOfDomain { x: f64, lower: f64, upper: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("expected {expected} voltage magnitudes, got {found}")]
    VoltageLength { expected: usize, found: usize },
    #[error("ablation variants are defined on the cold-start model only")]
    VariantNeedsCold,
    #[error("voltage bounds need a model with voltage-change variables")]
    NoVoltageVariables,
    #[error("thermal polygon needs at least 4 sides, got {0}")]
    PolygonSides(usize),
    #[error("model {model}: {status:?}")]
    NotOptimal {
        model: String,
        status: crate::lp::SolveStatus,
    },
    #[error("model {model}: solver failure: {message}")]
    Backend { model: String, message: String },
    #[error(transparent)]
    Pwl(#[from] PwlError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("{what}: expected {expected} entries, got {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StudyError {
    #[error("no contingency sample with load connected to the slack after {0} attempts")]
    RetriesExhausted(usize),
    #[error("cannot remove {k} lines from a network with {lines}")]
    TooManyOutages { k: usize, lines: usize },
    #[error("the slack component contains no load")]
    DisconnectedSlack,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CppError {
    #[error("voltage floor {0} must lie below the 1.05 p.u. ceiling")]
    InvalidFloor(f64),
    #[error("capacitor cap must be positive, got {0}")]
    InvalidCap(f64),
    #[error("no placement satisfies the voltage floor {0}")]
    Infeasible(f64),
    #[error("placement search stopped after {0} nodes without proving optimality")]
    NodeLimit(u64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

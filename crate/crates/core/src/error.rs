use crate::data_model::Year;

/// Broad classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Computation,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("duplicate observation for ({country}, {year}) at row {row}")]
    DuplicateObservation {
        country: String,
        year: Year,
        row: usize,
    },
    #[error("negative {field} at row {row}")]
    NegativeQuantity { field: String, row: usize },
    #[error("invalid value at row {row}: {message}")]
    InvalidValue { row: usize, message: String },
    #[error("no usable data for year {0}")]
    EmptyYear(Year),
    #[error("GDP-PPP is zero")]
    DivisionByZeroGdp,
    #[error("population is zero")]
    DivisionByZeroPopulation,
    #[error("IHDIGDP is zero")]
    DivisionByZeroActivity,
    #[error("normalization denominator is zero in {0}")]
    DegenerateNormalization(Year),
    #[error("balancing maxima are not positive in {0}")]
    DegenerateBalancing(Year),
    #[error("scenario {label} has no value for the 1990 base year")]
    MissingBaseYear { label: String },
    #[error("year {year} is outside the range of scenario {label}")]
    YearOutOfRange { label: String, year: Year },
    #[error("invalid scenario curve {label}: {message}")]
    InvalidCurve { label: String, message: String },
    #[error("unknown scenario {0}")]
    UnknownScenario(String),
    #[error("green limit is not positive in {0}")]
    DegenerateGreenLimit(Year),
    #[error("debt {debt} with non-positive margin {margin}")]
    ZeroMarginWithDebt { debt: f64, margin: f64 },
    #[error("unknown country {country}{}", transfer_suffix(*.transfer))]
    UnknownCountry {
        country: String,
        transfer: Option<usize>,
    },
    #[error("transfer {transfer}: {seller} holds {available} credit, {requested} requested")]
    InsufficientCredit {
        transfer: usize,
        seller: String,
        available: f64,
        requested: f64,
    },
    #[error("transfer {transfer}: {buyer} still owes {landuse_debt} of land-use debt")]
    LandUseDebtOutstanding {
        transfer: usize,
        buyer: String,
        landuse_debt: f64,
    },
    #[error("transfer {transfer}: {message}")]
    InvalidTransfer { transfer: usize, message: String },
    #[error("no IHDIGDP for any country in {0}")]
    MissingEndpoint(Year),
    #[error("intensity factor {factor} is negative for {country} in {year}")]
    NegativeIntensity {
        country: String,
        year: Year,
        factor: f64,
    },
    #[error("activity factor {factor} is negative for {country} in {year}")]
    NegativeActivity {
        country: String,
        year: Year,
        factor: f64,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

fn transfer_suffix(transfer: Option<usize>) -> String {
    transfer
        .map(|t| format!(" in transfer {t}"))
        .unwrap_or_default()
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            DivisionByZeroGdp
            | DivisionByZeroPopulation
            | DivisionByZeroActivity
            | DegenerateNormalization(_)
            | DegenerateBalancing(_)
            | DegenerateGreenLimit(_)
            | ZeroMarginWithDebt { .. }
            | NegativeIntensity { .. }
            | NegativeActivity { .. } => ErrorClass::Computation,
            _ => ErrorClass::Validation,
        }
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        use Error::*;
        match self {
            Io(_) => "Io",
            Csv(_) => "Csv",
            MalformedHeader(_) => "MalformedHeader",
            DuplicateObservation { .. } => "DuplicateObservation",
            NegativeQuantity { .. } => "NegativeQuantity",
            InvalidValue { .. } => "InvalidValue",
            EmptyYear(_) => "EmptyYear",
            DivisionByZeroGdp => "DivisionByZeroGdp",
            DivisionByZeroPopulation => "DivisionByZeroPopulation",
            DivisionByZeroActivity => "DivisionByZeroActivity",
            DegenerateNormalization(_) => "DegenerateNormalization",
            DegenerateBalancing(_) => "DegenerateBalancing",
            MissingBaseYear { .. } => "MissingBaseYear",
            YearOutOfRange { .. } => "YearOutOfRange",
            InvalidCurve { .. } => "InvalidCurve",
            UnknownScenario(_) => "UnknownScenario",
            DegenerateGreenLimit(_) => "DegenerateGreenLimit",
            ZeroMarginWithDebt { .. } => "ZeroMarginWithDebt",
            UnknownCountry { .. } => "UnknownCountry",
            InsufficientCredit { .. } => "InsufficientCredit",
            LandUseDebtOutstanding { .. } => "LandUseDebtOutstanding",
            InvalidTransfer { .. } => "InvalidTransfer",
            MissingEndpoint(_) => "MissingEndpoint",
            NegativeIntensity { .. } => "NegativeIntensity",
            NegativeActivity { .. } => "NegativeActivity",
            InvalidConfig(_) => "InvalidConfig",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

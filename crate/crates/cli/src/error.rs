use std::fmt;

use opred_core::experiments::ExperimentError;
use opred_core::hdl::HdlError;
use opred_core::klepto::KleptoError;
use opred_core::opgen::OpGenError;
use opred_core::watermark::WatermarkError;

pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Infeasible(String),
    Budget(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Infeasible(m) | CliError::Budget(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<OpGenError> for CliError {
    fn from(e: OpGenError) -> Self {
        let msg = e.to_string();
        match e {
            OpGenError::Infeasible(_) | OpGenError::UnmatchedBitValue(_) => CliError::Infeasible(msg),
            OpGenError::BudgetExhausted { .. } | OpGenError::Timeout { .. } => CliError::Budget(msg),
            OpGenError::WidthOutOfRange(_) | OpGenError::StateOutOfRange { .. } | OpGenError::InvalidArgument(_) => {
                CliError::Usage(msg)
            }
            OpGenError::BoolFn(_) | OpGenError::Fsm(_) => CliError::Internal(msg),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        let msg = e.to_string();
        match e {
            ExperimentError::InvalidConfig(_) | ExperimentError::UnknownFormat(_) => CliError::Usage(msg),
            ExperimentError::Infeasible { .. } => CliError::Infeasible(msg),
            ExperimentError::Generation { source, .. } => match CliError::from(source) {
                CliError::Budget(_) => CliError::Budget(msg),
                _ => CliError::Internal(msg),
            },
        }
    }
}

impl From<KleptoError> for CliError {
    fn from(e: KleptoError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<HdlError> for CliError {
    fn from(e: HdlError) -> Self {
        match e {
            HdlError::InvalidIdentifier(_) => CliError::Usage(e.to_string()),
            HdlError::Io(_) => CliError::Internal(e.to_string()),
            // a file we were asked to read is broken
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<WatermarkError> for CliError {
    fn from(e: WatermarkError) -> Self {
        match e {
            WatermarkError::CapacityOverflow { .. } | WatermarkError::NoZeroBit => CliError::Infeasible(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

//! Process exit codes.

use dsm_core::DsmError;

pub const OK: i32 = 0;
pub const CONFIG: i32 = 2;
pub const SOLVER: i32 = 3;
pub const DATA: i32 = 4;

/// Exit code for a failed run.
pub fn code(err: &DsmError) -> i32 {
    match err {
        DsmError::Config { .. }
        | DsmError::Json(_)
        | DsmError::Domain { .. }
        | DsmError::OrderTooLarge { .. }
        | DsmError::UnsupportedBackground(_)
        | DsmError::Mesh(_) => CONFIG,
        DsmError::Solver { .. } | DsmError::Overflow { .. } => SOLVER,
        DsmError::Aliasing { .. }
        | DsmError::RadiusMismatch { .. }
        | DsmError::Layout(_)
        | DsmError::Parse(_)
        | DsmError::Csv(_)
        | DsmError::Io(_) => DATA,
    }
}

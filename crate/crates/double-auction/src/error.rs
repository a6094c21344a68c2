//! Fault types shared across the crate.
//!
//! Faults are precondition or programming errors: inadmissible books,
//! wrongly sorted inputs, violated volume preconditions. Data-level
//! findings (guideline violations, replay issues) are ordinary values.

use crate::algorithms::SortKind;
use crate::order::AdmissibilityReport;

/// Precondition faults raised by library operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Orders and transactions must carry at least one unit.
    #[error("orders and transactions must carry at least one unit")]
    ZeroQuantity,
    /// The order-domain failed admissibility validation.
    #[error("inadmissible order-domain: {0}")]
    Inadmissible(AdmissibilityReport),
    /// A book was sorted with the wrong comparator for this operation.
    #[error("book sorted {found:?}, operation requires {expected}")]
    WrongSort { expected: &'static str, found: SortKind },
    /// FOA needs enough ask volume to absorb the matched volume.
    #[error("matched volume {matched} exceeds ask volume {available}")]
    SupplyExceeded { matched: u128, available: u128 },
    /// FOB needs enough bid volume to absorb the matched volume.
    #[error("matched volume {matched} exceeds bid volume {available}")]
    DemandExceeded { matched: u128, available: u128 },
    /// The exhaustive enumeration oracle only accepts tiny instances.
    #[error("instance too large for enumeration: {requested} exceeds limit {limit}")]
    InstanceTooLarge { limit: u128, requested: u128 },
}

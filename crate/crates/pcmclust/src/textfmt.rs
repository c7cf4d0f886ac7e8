//! Number formatting shared by the machine-readable exports.

/// Formats with 17 significant digits, enough to round-trip any f64 exactly.
pub(crate) fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Three decimals for human-readable reports.
pub(crate) fn dec3(x: f64) -> String {
    format!("{x:.3}")
}

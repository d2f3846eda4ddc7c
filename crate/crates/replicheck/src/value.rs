//! Scalar value domain shared by the interpreter and the SMT encoding.
//!
//! Everything is an integer. A handful of negative sentinels are reserved,
//! method arguments live in `1..=k`, and dynamically allocated rows are
//! numbered from [`ROW_BASE`] so they can never collide with arguments or
//! sentinels.

/// Absence of a value: the return "value" of a void return, and the argument
/// of argument-less methods.
pub const BOT: i64 = -3;

/// Returned by consumers that observe an empty container.
pub const EMPTY: i64 = -2;

/// Null pointer.
pub const NULL: i64 = -1;

/// Default initial value for locations without a declared initializer.
pub const DEFAULT_INIT: i64 = 0;

/// First row identifier; row j is `ROW_BASE + j`.
pub const ROW_BASE: i64 = 1000;

/// Offset added to field locations so that poison locations (a field of a
/// non-row value such as NULL) stay disjoint from global-variable locations.
pub const FIELD_LOC_OFFSET: i64 = 100;

/// Renders a value the way the CLI and witness reports print it.
pub fn render(v: i64) -> String {
    match v {
        BOT => "_".to_string(),
        EMPTY => "EMPTY".to_string(),
        NULL => "NULL".to_string(),
        v if v >= ROW_BASE => format!("row{}", v - ROW_BASE),
        v => v.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentinels_are_distinct_and_below_arguments() {
        // [TRIVIAL] reserved values never collide with arguments 1..=k.
        assert!(BOT < EMPTY && EMPTY < NULL && NULL < DEFAULT_INIT);
        assert!(DEFAULT_INIT < 1);
        assert!(ROW_BASE > 64); // above any supported argument bound
    }

    #[test]
    fn render_forms() {
        assert_eq!(render(NULL), "NULL");
        assert_eq!(render(EMPTY), "EMPTY");
        assert_eq!(render(BOT), "_");
        assert_eq!(render(3), "3");
        assert_eq!(render(ROW_BASE + 2), "row2");
    }
}

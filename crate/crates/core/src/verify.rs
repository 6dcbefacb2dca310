//! Grid verification suites.

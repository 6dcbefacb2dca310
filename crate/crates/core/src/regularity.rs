//! Regular-sequence and sheaf-cohomology helpers.

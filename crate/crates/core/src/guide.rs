//! Placeholder for the guide doctest modules.

//! Holds no code; the checks are the `acceptance` test target.

//! Benchmark-only crate; see `benches/` for the criterion targets.
//!
//! The solver's per-iteration cost is dominated by a handful of O(n²)
//! kernels (triangular and dense matvecs, rank-one factor updates, outer
//! accumulations); the benches track those plus one full direction-select +
//! commit cycle per problem kind.

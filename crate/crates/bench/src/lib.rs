//! Workloads shared by the benchmarks, sized to finish in seconds on one core.

use realbloch::geometry::GridSpec;

/// Chart grid for C₂ timings: small enough to iterate, large enough to be integral-dominated.
pub const CHART: GridSpec = GridSpec::Chart { dim: 4, half_width: 8.0, n: 16 };

pub const TORUS: GridSpec = GridSpec::Torus { dim: 4, n: 12 };

pub const S3: GridSpec = GridSpec::S3Angles { n_theta: 24, n_phi: 24, n_psi: 24 };

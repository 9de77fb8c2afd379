//! Every default the driver resolves, in one place. Reports echo the
//! resolved values, so a run can be repeated from its own output.
//!
//! | setting            | default        | used by                          |
//! |--------------------|----------------|----------------------------------|
//! | method             | all            | trace                            |
//! | p                  | 1              | trace                            |
//! | t_max              | 1e12           | trace (geometric Cesaro grid)    |
//! | log_t_max          | 1e4            | measurable (log log grid)        |
//! | grid ratio         | 2^(1/4)        | geometric grids                  |
//! | loglog step        | 1/32           | log log grids                    |
//! | tol                | 1e-2           | trace, measurable                |
//! | N_max (eigenvalues)| 2^20           | trace (lidskii)                  |
//! | N_max (range)      | 1e4            | range                            |
//! | Toeplitz R         | 1e6            | toeplitz (Dixmier route)         |
//! | Toeplitz N         | 64             | toeplitz (truncated route)       |
//! | crossing steps     | 64 per segment | specflow                         |
//! | partition          | 16 per segment | specflow, doubled until resolved |
//! | integral n         | 4              | specflow                         |
//! | quadrature points  | 16 per segment | specflow                         |
//!
//! `measurable` uses the log log grid only for sequences with a log-space
//! closed form; truncated data falls back to the geometric grid.

pub const SCHEMA_VERSION: u32 = 1;
pub const P: f64 = 1.0;
pub const T_MAX: f64 = 1e12;
pub const LOG_T_MAX: f64 = 1e4;
pub const TOL: f64 = 1e-2;
pub const EIG_TERMS: u64 = 1 << 20;
pub const RANGE_N_MAX: u64 = 10_000;
pub const TOEPLITZ_R: u64 = 1_000_000;
pub const TOEPLITZ_N: u64 = 64;
pub const CROSSING_STEPS: usize = 64;
pub const PARTITION_STEPS: usize = 16;
pub const INTEGRAL_N: f64 = 4.0;
pub const QUAD_POINTS: usize = 16;

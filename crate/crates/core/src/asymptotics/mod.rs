//! Tail-limit machinery: mean profiles on geometric and doubly exponential
//! grids, tail envelopes, limit extrapolation, Sucheston's Banach-limit
//! interval and a Karamata probe.

mod envelope;
mod karamata;
mod profile;
mod sucheston;

pub use envelope::{extrapolate_limit, tail_envelope, Envelope, Extrapolation, LimitModel};
pub(crate) use envelope::{envelope_of, extrapolate_values};
pub use karamata::{karamata_probe, KaramataProbe};
pub(crate) use profile::clamp_to_support;
pub use profile::{default_tail_window, GridKind, GridSpec, MeanProfile};
pub use sucheston::{almost_convergence_verdict, dyadic_windows, sucheston_envelope, AlmostConvergence, SuchestonEnvelope};

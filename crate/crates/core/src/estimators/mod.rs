//! Dixmier-trace estimators: Cesaro means, zeta residues, heat kernels and
//! Lidskii eigenvalue sums, with the measurability decision and the
//! Banach-limit value range.

mod cesaro;
mod eiglist;
mod heat;
mod lidskii;
mod report;
mod tail;
mod weights;
mod zeta;

pub use cesaro::{
    cesaro_trace, dixmier_value_range, measurability_details, measurability_verdict, stretched_profile,
    tail_cut_profile, tail_cut_trace, CesaroConfig, ValueRange, VerdictDetails,
};
pub use eiglist::EigList;
pub use heat::{heat_samples, heat_trace, HeatConfig, HeatSamples};
pub use lidskii::{check_decay, lidskii_profiles, lidskii_trace, LidskiiConfig, LidskiiMode, Neighborhood};
pub use report::{Measurability, Method, TraceReport, TraceValue};
pub use tail::{TailFit, TailRegime};
pub use weights::Weights;
pub use zeta::{p_power_trace, zeta_residue_trace, zeta_samples, ZetaConfig, ZetaSamples};

//! Weak-source closed forms, the fixed-delay "conventional" measurement and
//! the aperture-synthesis dirty beam.

pub mod conventional;
pub mod dirty_beam;
pub mod weak;

pub use conventional::{conventional_fi, observation_time_ratio, ConventionalFi, ConventionalSettings, ARCSEC};
pub use dirty_beam::{dirty_beam, dirty_image, first_null, DirtyBeam, SamplingPattern};
pub use weak::{
    eigenweights, strong_weak_consistency, weak_fi_misaligned, weak_fi_offdiag, weak_qfi, ConsistencyRow, WeakFi,
    WeakSourceResult,
};

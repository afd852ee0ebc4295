//! Statistics of two-qubit entanglement decay under local noisy channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`smallmat`]: fixed-size complex matrices, a Jacobi Hermitian eigensolver,
//!   the complete elliptic integral `K(m)` and adaptive Gauss–Kronrod quadrature.
//! * [`qstate`]: pure and mixed two-qubit states and the Haar, Hilbert–Schmidt
//!   and Bures samplers on reproducible counter-based random streams.
//! * [`channels`]: Kraus sets for depolarizing, amplitude-damping and
//!   phase-damping noise and their local application.
//! * [`entanglement`]: Wootters concurrence, closed-form evolution of pure
//!   states and disentanglement (ESD) times.
//! * [`ensembles`]: analytic and Monte Carlo densities of ESD times and
//!   concurrence, plus the identities connecting them.
//! * [`timemaps`]: physical-time profiles `q(t)` (Markovian, non-autonomous,
//!   non-Markovian) and composition of `q`-domain statistics into time.

// NaN-rejecting guards read `!(a < b)`; small matrix kernels index by position.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channels;
pub mod entanglement;
pub mod ensembles;
mod error;
pub mod qstate;
pub mod smallmat;
pub mod timemaps;

pub use channels::{apply_local, make_kraus, verify_cptp, ChannelKind, CptpReport, KrausSet, SideSpec};
pub use entanglement::{
    concurrence_evolved, concurrence_mixed, concurrence_pure, concurrence_single, esd_time_analytic,
    esd_time_numeric, max_concurrence, EsdOutcome,
};
pub use error::{Error, Result};
pub use qstate::{DensityMatrix, Measure, PureState, SeedSpec};
pub use smallmat::CMat;

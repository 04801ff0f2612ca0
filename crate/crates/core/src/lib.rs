//! Maximum-likelihood detection for training-assisted SIMO links whose
//! receive chain is impaired by oscillator phase noise.
//!
//! One pilot slot and one (or `T`) data slots are observed through a channel
//! that is either deterministic and known (constant channel) or Rayleigh and
//! unknown (fading channel), with either one oscillator shared by the whole
//! array (synchronous) or one oscillator per antenna (non-synchronous). The
//! crate provides:
//!
//! * the optimal two-slot detectors for all four scenario combinations,
//!   parameterized by the Fourier coefficients of any symmetric zero-mean
//!   increment density ([`detect::detect_two_slot`]),
//! * closed-form fading-channel detectors for von Mises increments
//!   ([`detect::detect_fc_von_mises`]),
//! * high-SNR decision rules and their concentration bounds
//!   ([`detect::detect_high_snr_ns`], [`analysis`]),
//! * the analytic synchronous SER floor ([`analysis::ser_floor_sync`]),
//! * multi-slot decision-feedback and genie-aided detectors
//!   ([`detect::detect_tslot_df_ns`], [`detect::detect_tslot_genie_s`]),
//! * a deterministic, parallel Monte Carlo harness with CSV reporting
//!   ([`harness`]) and an independent quadrature oracle ([`oracle`]).
//!
//! ```
//! use pnsimo::analysis::ser_floor_sync;
//! use pnsimo::phase_noise::PhaseNoiseModel;
//!
//! // Synchronous arrays floor out at high SNR no matter how many antennas
//! // they have; the floor depends only on the increment statistics.
//! let model = PhaseNoiseModel::von_mises(4.0, 64)?;
//! let report = ser_floor_sync(&model, 4)?;
//! assert!((report.floor - 0.1418).abs() < 5e-5);
//! # Ok::<(), pnsimo::Error>(())
//! ```
//!
//! ```
//! use pnsimo::detect::{detect_two_slot, TruncationPolicy};
//! use pnsimo::phase_noise::PhaseNoiseModel;
//! use pnsimo::rng::substream;
//! use pnsimo::scenario::*;
//!
//! // Simulate one two-slot transmission and decode it.
//! let scn = Scenario::new(
//!     ChannelKind::Fading,
//!     OscillatorMode::NonSynchronous,
//!     100.0, // 20 dB
//!     8,
//!     Constellation::psk(4)?,
//!     PhaseNoiseModel::von_mises(4.0, 64)?,
//! )?;
//! let mut rng = substream(42, &[0]);
//! let obs = simulate_two_slot(&scn, 2, &mut rng)?;
//! let decision = detect_two_slot(&scn, &obs, &TruncationPolicy::default())?;
//! assert_eq!(decision.metrics.len(), 4);
//! # Ok::<(), pnsimo::Error>(())
//! ```

pub mod analysis;
pub mod detect;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod phase_noise;
pub mod rng;
pub mod scenario;
pub mod special;

pub use error::{Error, Result};

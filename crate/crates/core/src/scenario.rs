//! Link scenarios and synthetic observation generation.
//!
//! A [`Scenario`] fixes one cell of the experiment grid: constant or fading
//! channel, synchronous or non-synchronous oscillators, SNR, antenna count,
//! constellation, phase-noise model and data-slot count. The simulator draws
//! the pilot slot
//!
//! * constant channel: `x_m = √ρ g_m e^{jθ_m} + w_m`
//! * fading channel:   `x_m = √ρ h_m + w_m`
//!
//! and `T` data slots whose phase rotation accumulates one fresh increment
//! per slot. In synchronous operation a single oscillator drives all
//! antennas, so one `θ` and one increment per slot are shared; otherwise all
//! phases are drawn i.i.d. per antenna.
//!
//! Observations keep a hidden truth record (drawn symbols, initial phases,
//! increments, fading gains) for scoring and for the genie-aided detectors;
//! ordinary detectors only see the received vectors.

use crate::error::{Error, Result};
use crate::phase_noise::PhaseNoiseModel;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// Deterministic, known channel amplitudes (`g`), unknown initial phase.
    Constant,
    /// Unknown Rayleigh-fading channel, constant over the burst.
    Fading,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OscillatorMode {
    /// One oscillator for the whole array: common `θ`, common increments.
    Synchronous,
    /// One oscillator per antenna: i.i.d. `θ_m` and increments.
    NonSynchronous,
}

/// Symbol alphabet, zero-mean with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    psk_order: Option<usize>,
}

impl Constellation {
    /// `N`-PSK: `s_n = e^{j2πn/N}`, `n = 0..N-1`.
    pub fn psk(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidScenario(
                "PSK order must be at least 2".into(),
            ));
        }
        // Components that are zero in exact arithmetic (cos π/2 etc.) are
        // snapped to zero, so axis-aligned points and decision-boundary ties
        // behave exactly.
        let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
        let points = (0..order)
            .map(|n| {
                let p = Complex64::from_polar(1.0, 2.0 * PI * n as f64 / order as f64);
                Complex64::new(snap(p.re), snap(p.im))
            })
            .collect();
        Ok(Self {
            points,
            psk_order: Some(order),
        })
    }

    /// Arbitrary alphabet; validated to be zero-mean with unit average
    /// energy to 1e-12.
    pub fn from_points(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidScenario(
                "constellation needs at least two points".into(),
            ));
        }
        let n = points.len() as f64;
        let mean = points.iter().sum::<Complex64>() / n;
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / n;
        if mean.norm() > 1e-12 {
            return Err(Error::InvalidScenario(format!(
                "constellation mean {mean} is not zero"
            )));
        }
        if (energy - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidScenario(format!(
                "constellation average energy {energy} is not 1"
            )));
        }
        Ok(Self {
            points,
            psk_order: None,
        })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> Result<Complex64> {
        self.points
            .get(index)
            .copied()
            .ok_or(Error::InvalidSymbol {
                index,
                size: self.points.len(),
            })
    }

    /// `Some(N)` when constructed as an `N`-PSK alphabet.
    pub fn psk_order(&self) -> Option<usize> {
        self.psk_order
    }
}

/// Phase-noise statistics per antenna: one shared model (the common case)
/// or an explicit model per antenna.
#[derive(Debug, Clone, PartialEq)]
pub enum AntennaModels {
    Shared(PhaseNoiseModel),
    PerAntenna(Vec<PhaseNoiseModel>),
}

impl AntennaModels {
    pub fn model(&self, antenna: usize) -> &PhaseNoiseModel {
        match self {
            AntennaModels::Shared(m) => m,
            AntennaModels::PerAntenna(v) => &v[antenna],
        }
    }

    pub fn shared(&self) -> Option<&PhaseNoiseModel> {
        match self {
            AntennaModels::Shared(m) => Some(m),
            AntennaModels::PerAntenna(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub channel: ChannelKind,
    pub oscillators: OscillatorMode,
    /// Linear SNR `ρ` (noise variance is fixed at 1; sweep SNR through `ρ`).
    pub snr: f64,
    /// Antenna count `M`.
    pub antennas: usize,
    /// Known amplitudes `g` (constant channel only; all-ones by default).
    pub amplitudes: Vec<f64>,
    pub constellation: Constellation,
    pub noise_model: AntennaModels,
    /// Number of data slots `T` (1 for the two-slot protocol).
    pub data_slots: usize,
    /// Additive-noise scale; 1.0 everywhere except diagnostic tests that
    /// switch noise off entirely.
    pub noise_scale: f64,
}

impl Scenario {
    /// Two-slot scenario with all-ones amplitudes, unit noise and a shared
    /// phase-noise model.
    pub fn new(
        channel: ChannelKind,
        oscillators: OscillatorMode,
        snr: f64,
        antennas: usize,
        constellation: Constellation,
        noise_model: PhaseNoiseModel,
    ) -> Result<Self> {
        let scn = Self {
            channel,
            oscillators,
            snr,
            antennas,
            amplitudes: vec![1.0; antennas],
            constellation,
            noise_model: AntennaModels::Shared(noise_model),
            data_slots: 1,
            noise_scale: 1.0,
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn with_data_slots(mut self, t: usize) -> Self {
        self.data_slots = t;
        self
    }

    pub fn with_amplitudes(mut self, g: Vec<f64>) -> Self {
        self.amplitudes = g;
        self
    }

    pub fn with_noise_scale(mut self, scale: f64) -> Self {
        self.noise_scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::InvalidScenario("antenna count must be >= 1".into()));
        }
        if !self.snr.is_finite() || self.snr < 0.0 {
            return Err(Error::InvalidScenario(format!(
                "SNR must be finite and nonnegative, got {}",
                self.snr
            )));
        }
        if self.data_slots == 0 {
            return Err(Error::InvalidScenario("data_slots must be >= 1".into()));
        }
        if self.channel == ChannelKind::Constant {
            if self.amplitudes.len() != self.antennas {
                return Err(Error::InvalidScenario(format!(
                    "constant channel needs {} amplitudes, got {}",
                    self.antennas,
                    self.amplitudes.len()
                )));
            }
            if self.amplitudes.iter().any(|g| !g.is_finite() || *g <= 0.0) {
                return Err(Error::InvalidScenario(
                    "amplitudes must be positive".into(),
                ));
            }
        }
        match (&self.noise_model, self.oscillators) {
            (AntennaModels::PerAntenna(v), OscillatorMode::NonSynchronous) => {
                if v.len() != self.antennas {
                    return Err(Error::InvalidScenario(format!(
                        "expected {} per-antenna models, got {}",
                        self.antennas,
                        v.len()
                    )));
                }
            }
            (AntennaModels::PerAntenna(_), OscillatorMode::Synchronous) => {
                return Err(Error::InvalidScenario(
                    "synchronous operation uses one oscillator; per-antenna models make no sense"
                        .into(),
                ));
            }
            (AntennaModels::Shared(_), _) => {}
        }
        Ok(())
    }

    pub fn model(&self, antenna: usize) -> &PhaseNoiseModel {
        self.noise_model.model(antenna)
    }
}

/// What the simulator drew; kept for scoring and the genie detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    /// Transmitted constellation indices, one per data slot.
    pub symbols: Vec<usize>,
    /// Initial oscillator phases `θ_m` (constant channel only; empty for
    /// fading, where θ is absorbed into `h`).
    pub theta: Vec<f64>,
    /// Per-slot, per-antenna phase increments `φ_m[t]`.
    pub increments: Vec<Vec<f64>>,
    /// Fading gains `h` (fading channel only).
    pub channel_gains: Option<Vec<Complex64>>,
}

impl TruthRecord {
    /// Accumulated phase `Σ_{τ≤t} φ_m[τ]` for slot index `t` (0-based).
    pub fn accumulated_phase(&self, antenna: usize, slot: usize) -> f64 {
        self.increments[..=slot]
            .iter()
            .map(|inc| inc[antenna])
            .sum()
    }
}

/// Received pilot and data vectors, plus the hidden truth record.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub pilot: Vec<Complex64>,
    /// One received vector per data slot.
    pub data: Vec<Vec<Complex64>>,
    truth: Option<TruthRecord>,
}

impl Observation {
    pub fn new(pilot: Vec<Complex64>, data: Vec<Vec<Complex64>>, truth: TruthRecord) -> Self {
        Self {
            pilot,
            data,
            truth: Some(truth),
        }
    }

    pub fn truth(&self) -> Option<&TruthRecord> {
        self.truth.as_ref()
    }

    /// Drop the truth record, leaving only what a real receiver would see.
    pub fn strip_truth(mut self) -> Self {
        self.truth = None;
        self
    }

    pub fn check_dims(&self, scn: &Scenario) -> Result<()> {
        let m = scn.antennas;
        if self.pilot.len() != m
            || self.data.len() != scn.data_slots
            || self.data.iter().any(|y| y.len() != m)
        {
            return Err(Error::DimensionMismatch(format!(
                "observation dims (pilot {}, slots {}) do not match scenario (M {}, T {})",
                self.pilot.len(),
                self.data.len(),
                m,
                scn.data_slots
            )));
        }
        Ok(())
    }
}

fn complex_noise<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * (scale / 2.0f64.sqrt())
}

/// Simulate the two-slot protocol (pilot + one data symbol).
pub fn simulate_two_slot<R: Rng + ?Sized>(
    scn: &Scenario,
    symbol: usize,
    rng: &mut R,
) -> Result<Observation> {
    if scn.data_slots != 1 {
        return Err(Error::InvalidScenario(format!(
            "two-slot simulation requires data_slots = 1, scenario has {}",
            scn.data_slots
        )));
    }
    simulate_t_slot(scn, &[symbol], rng)
}

/// Simulate a pilot slot followed by `T` data slots with accumulating phase
/// noise. The channel (and initial phase) is drawn once and held.
pub fn simulate_t_slot<R: Rng + ?Sized>(
    scn: &Scenario,
    symbols: &[usize],
    rng: &mut R,
) -> Result<Observation> {
    scn.validate()?;
    if symbols.len() != scn.data_slots {
        return Err(Error::DimensionMismatch(format!(
            "expected {} symbols, got {}",
            scn.data_slots,
            symbols.len()
        )));
    }
    let constellation_size = scn.constellation.len();
    for &s in symbols {
        if s >= constellation_size {
            return Err(Error::InvalidSymbol {
                index: s,
                size: constellation_size,
            });
        }
    }

    let m = scn.antennas;
    let sqrt_rho = scn.snr.sqrt();

    // Draw order is fixed: channel gains, initial phases, pilot noise, then
    // per slot increments followed by slot noise. Substream determinism
    // depends on this order never changing.
    let (gains, theta): (Option<Vec<Complex64>>, Vec<f64>) = match scn.channel {
        ChannelKind::Fading => {
            let h: Vec<Complex64> = (0..m).map(|_| complex_noise(rng, 1.0)).collect();
            (Some(h), Vec::new())
        }
        ChannelKind::Constant => {
            let theta = match scn.oscillators {
                OscillatorMode::Synchronous => vec![rng.random_range(-PI..PI); m],
                OscillatorMode::NonSynchronous => {
                    (0..m).map(|_| rng.random_range(-PI..PI)).collect()
                }
            };
            (None, theta)
        }
    };

    let pilot: Vec<Complex64> = (0..m)
        .map(|am| {
            let signal = match scn.channel {
                ChannelKind::Constant => {
                    Complex64::from_polar(sqrt_rho * scn.amplitudes[am], theta[am])
                }
                ChannelKind::Fading => gains.as_ref().unwrap()[am] * sqrt_rho,
            };
            signal + complex_noise(rng, scn.noise_scale)
        })
        .collect();

    let mut increments: Vec<Vec<f64>> = Vec::with_capacity(scn.data_slots);
    let mut accumulated = vec![0.0f64; m];
    let mut data = Vec::with_capacity(scn.data_slots);

    for &sym in symbols {
        let inc: Vec<f64> = match scn.oscillators {
            OscillatorMode::Synchronous => {
                let phi = scn.model(0).sample(rng);
                vec![phi; m]
            }
            OscillatorMode::NonSynchronous => {
                (0..m).map(|am| scn.model(am).sample(rng)).collect()
            }
        };
        for (acc, d) in accumulated.iter_mut().zip(&inc) {
            *acc += d;
        }
        increments.push(inc);

        let s = scn.constellation.point(sym)?;
        let slot: Vec<Complex64> = (0..m)
            .map(|am| {
                let rotation = Complex64::from_polar(1.0, accumulated[am]);
                let signal = match scn.channel {
                    ChannelKind::Constant => {
                        Complex64::from_polar(sqrt_rho * scn.amplitudes[am], theta[am])
                            * rotation
                            * s
                    }
                    ChannelKind::Fading => gains.as_ref().unwrap()[am] * sqrt_rho * rotation * s,
                };
                signal + complex_noise(rng, scn.noise_scale)
            })
            .collect();
        data.push(slot);
    }

    Ok(Observation::new(
        pilot,
        data,
        TruthRecord {
            symbols: symbols.to_vec(),
            theta,
            increments,
            channel_gains: gains,
        },
    ))
}

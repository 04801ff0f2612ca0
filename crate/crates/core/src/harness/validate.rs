//! Oracle validation runs: series detectors against direct quadrature.

use super::with_pool;
use crate::detect::{detect_two_slot, TruncationPolicy};
use crate::error::Result;
use crate::oracle::oracle_log_likelihoods;
use crate::phase_noise::PhaseNoiseModel;
use crate::rng::substream;
use crate::scenario::{
    simulate_two_slot, ChannelKind, Constellation, OscillatorMode, Scenario,
};
use rand::Rng;
use rayon::prelude::*;

/// Absolute tolerance on metric-difference agreement.
pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ScenarioValidation {
    pub channel: ChannelKind,
    pub oscillators: OscillatorMode,
    pub instances: usize,
    pub failures: usize,
    pub worst_abs_dev: f64,
    /// Dump of the worst failing instance, if any.
    pub worst_dump: Option<String>,
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub scenarios: Vec<ScenarioValidation>,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn pass(&self) -> bool {
        self.scenarios.iter().all(|s| s.failures == 0)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.scenarios {
            out.push_str(&format!(
                "{} {}-{}: {}/{} instances within {:.0e} (worst dev {:.3e})\n",
                if s.failures == 0 { "PASS" } else { "FAIL" },
                match s.channel {
                    ChannelKind::Constant => "cc",
                    ChannelKind::Fading => "fc",
                },
                match s.oscillators {
                    OscillatorMode::Synchronous => "s",
                    OscillatorMode::NonSynchronous => "ns",
                },
                s.instances - s.failures,
                s.instances,
                self.tolerance,
                s.worst_abs_dev,
            ));
            if let Some(dump) = &s.worst_dump {
                out.push_str(dump);
                out.push('\n');
            }
        }
        out
    }
}

struct InstanceOutcome {
    dev: f64,
    dump: Option<String>,
}

/// Compare detector metric differences against the quadrature oracle on
/// `instances` random small instances (M ≤ 3, ρ ≤ 10) per scenario.
pub fn run_oracle_validation(
    instances: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<OracleReport> {
    let combos = [
        (ChannelKind::Constant, OscillatorMode::NonSynchronous),
        (ChannelKind::Constant, OscillatorMode::Synchronous),
        (ChannelKind::Fading, OscillatorMode::NonSynchronous),
        (ChannelKind::Fading, OscillatorMode::Synchronous),
    ];
    let policy = TruncationPolicy::default();

    with_pool(threads, || -> Result<OracleReport> {
        let mut scenarios = Vec::new();
        for (ci, &(channel, osc)) in combos.iter().enumerate() {
            let outcomes: Vec<Result<InstanceOutcome>> = (0..instances)
                .into_par_iter()
                .map(|i| -> Result<InstanceOutcome> {
                    let mut rng = substream(seed, &[9000 + ci as u64, i as u64]);
                    let antennas = rng.random_range(1..=3usize);
                    let rho_db: f64 = rng.random_range(-5.0..10.0);
                    // Sprinkle in degenerate uniform-increment instances.
                    let model = if i % 8 == 7 {
                        PhaseNoiseModel::von_mises(0.0, 64)?
                    } else {
                        PhaseNoiseModel::von_mises(4.0, 64)?
                    };
                    let scn = Scenario::new(
                        channel,
                        osc,
                        10f64.powf(rho_db / 10.0),
                        antennas,
                        Constellation::psk(4)?,
                        model,
                    )?;
                    let sym = rng.random_range(0..4usize);
                    let obs = simulate_two_slot(&scn, sym, &mut rng)?;
                    let oracle = oracle_log_likelihoods(&scn, &obs)?;
                    let det = detect_two_slot(&scn, &obs, &policy)?;
                    let mut dev = 0.0f64;
                    for k in 1..4 {
                        let want = oracle[k] - oracle[0];
                        let got = det.metrics[k] - det.metrics[0];
                        dev = dev.max((want - got).abs());
                    }
                    let dump = (dev >= TOLERANCE).then(|| {
                        format!(
                            "  instance {i}: M={antennas} rho={:.3} sym={sym}\n  x={:?}\n  y={:?}\n  oracle={oracle:?}\n  metrics={:?}",
                            scn.snr, obs.pilot, obs.data[0], det.metrics
                        )
                    });
                    Ok(InstanceOutcome { dev, dump })
                })
                .collect();

            let mut failures = 0usize;
            let mut worst = 0.0f64;
            let mut worst_dump = None;
            for outcome in outcomes {
                let o = outcome?;
                if o.dump.is_some() {
                    failures += 1;
                }
                if o.dev > worst {
                    worst = o.dev;
                    if o.dump.is_some() {
                        worst_dump = o.dump;
                    }
                }
            }
            scenarios.push(ScenarioValidation {
                channel,
                oscillators: osc,
                instances,
                failures,
                worst_abs_dev: worst,
                worst_dump,
            });
        }
        Ok(OracleReport {
            scenarios,
            tolerance: TOLERANCE,
        })
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_validation_passes() {
        let report = run_oracle_validation(12, 77, Some(2)).unwrap();
        assert!(report.pass(), "{}", report.summary());
        assert_eq!(report.scenarios.len(), 4);
        for s in &report.scenarios {
            assert!(s.worst_abs_dev < TOLERANCE);
        }
        assert_eq!(report.summary().matches("PASS").count(), 4);
    }
}

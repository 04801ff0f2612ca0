//! Multi-slot detector comparison: decision-feedback NS against genie-aided S.
//!
//! Each detector runs on observations drawn from its own operation mode (the
//! genie on synchronous bursts, decision feedback on non-synchronous ones),
//! and SER is averaged over slots. The standard error comes from the
//! per-trial error-fraction variance, since slot errors within one burst are
//! correlated through the feedback.

use super::{channel_label, fmt_f64, point_tag, with_pool, SweepConfig};
use crate::detect::{detect_tslot_df_ns, detect_tslot_genie_s, TruncationPolicy};
use crate::error::{Error, Result};
use crate::rng::substream;
use rand::Rng;
use crate::scenario::{simulate_t_slot, ChannelKind, OscillatorMode, Scenario};
use rayon::prelude::*;

const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TslotDetector {
    DecisionFeedbackNs,
    GenieS,
}

impl TslotDetector {
    pub fn label(self) -> &'static str {
        match self {
            TslotDetector::DecisionFeedbackNs => "df_ns",
            TslotDetector::GenieS => "genie_s",
        }
    }

    fn oscillators(self) -> OscillatorMode {
        match self {
            TslotDetector::DecisionFeedbackNs => OscillatorMode::NonSynchronous,
            TslotDetector::GenieS => OscillatorMode::Synchronous,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TslotRow {
    pub scenario: String,
    pub channel: ChannelKind,
    pub detector: TslotDetector,
    pub antennas: usize,
    pub constellation_size: usize,
    pub model_family: &'static str,
    pub model_param: f64,
    pub rho_db: f64,
    pub trials: u64,
    pub slots: usize,
    pub slot_errors: u64,
    /// Slot-averaged symbol error rate.
    pub ser: f64,
    /// Standard error of the slot-averaged SER from per-trial fractions.
    pub stderr: f64,
}

struct TrialOutcome {
    slot_errors: u64,
    fraction: f64,
}

fn run_detector_point(
    scn: &Scenario,
    detector: TslotDetector,
    policy: &TruncationPolicy,
    seed: u64,
    tag: u64,
    trials: u64,
    target_errors: u64,
) -> Result<(u64, u64, f64, f64)> {
    let t = scn.data_slots;
    let mut slot_errors = 0u64;
    let mut done = 0u64;
    let mut sum_frac = 0.0f64;
    let mut sum_frac_sq = 0.0f64;

    while done < trials {
        let batch = CHUNK.min(trials - done);
        let outcomes: Vec<Result<TrialOutcome>> = (done..done + batch)
            .into_par_iter()
            .map(|trial| {
                let mut rng = substream(seed, &[tag, trial]);
                let symbols: Vec<usize> = (0..t)
                    .map(|_| rng.random_range(0..scn.constellation.len()))
                    .collect();
                let obs = simulate_t_slot(scn, &symbols, &mut rng)?;
                let decisions = match detector {
                    TslotDetector::DecisionFeedbackNs => detect_tslot_df_ns(scn, &obs, policy)?,
                    TslotDetector::GenieS => detect_tslot_genie_s(scn, &obs, policy)?,
                };
                let errs = decisions
                    .iter()
                    .zip(&symbols)
                    .filter(|(d, s)| d.argmax != **s)
                    .count() as u64;
                Ok(TrialOutcome {
                    slot_errors: errs,
                    fraction: errs as f64 / t as f64,
                })
            })
            .collect();
        for outcome in outcomes {
            let o = outcome?;
            slot_errors += o.slot_errors;
            sum_frac += o.fraction;
            sum_frac_sq += o.fraction * o.fraction;
        }
        done += batch;
        if target_errors > 0 && slot_errors >= target_errors {
            break;
        }
    }

    let n = done as f64;
    let mean = sum_frac / n;
    let var = (sum_frac_sq / n - mean * mean).max(0.0);
    Ok((slot_errors, done, mean, (var / n).sqrt()))
}

/// Run the configured multi-slot comparison; one row per
/// (channel, detector, M, ρ).
pub fn run_tslot_comparison(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<TslotRow>> {
    cfg.validate()?;
    if cfg.data_slots < 1 {
        return Err(Error::InvalidConfig("data_slots must be >= 1".into()));
    }
    let policy = cfg.truncation.policy();

    with_pool(threads, || -> Result<Vec<TslotRow>> {
        let mut rows = Vec::new();
        for channel in cfg.channel.kinds() {
            for detector in [TslotDetector::DecisionFeedbackNs, TslotDetector::GenieS] {
                for &m in &cfg.antennas {
                    for (ri, &rho_db) in cfg.rho_db.iter().enumerate() {
                        let scn =
                            cfg.scenario(channel, detector.oscillators(), m, rho_db)?;
                        let tag = point_tag(channel, detector.oscillators(), m, ri);
                        let (slot_errors, trials, ser, stderr) = run_detector_point(
                            &scn,
                            detector,
                            &policy,
                            cfg.seed,
                            tag,
                            cfg.trials,
                            cfg.target_errors,
                        )?;
                        rows.push(TslotRow {
                            scenario: cfg.name.clone(),
                            channel,
                            detector,
                            antennas: m,
                            constellation_size: scn.constellation.len(),
                            model_family: cfg.model.family.label(),
                            model_param: cfg.model.param,
                            rho_db,
                            trials,
                            slots: cfg.data_slots,
                            slot_errors,
                            ser,
                            stderr,
                        });
                    }
                }
            }
        }
        Ok(rows)
    })?
}

pub fn tslot_csv(rows: &[TslotRow]) -> String {
    let mut out = String::from(
        "scenario,channel,detector,M,N,model_family,model_param,rho_db,trials,slots,slot_errors,ser,stderr\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            channel_label(r.channel),
            r.detector.label(),
            r.antennas,
            r.constellation_size,
            r.model_family,
            fmt_f64(r.model_param),
            fmt_f64(r.rho_db),
            r.trials,
            r.slots,
            r.slot_errors,
            fmt_f64(r.ser),
            fmt_f64(r.stderr)
        ));
    }
    out
}

/// Gnuplot companion for the multi-slot comparison CSV.
pub fn tslot_plot_script(csv_name: &str) -> String {
    format!(
        "# gnuplot script: slot-averaged SER vs SNR, one curve per detector\n\
         set datafile separator ','\n\
         set logscale y\n\
         set xlabel 'rho [dB]'\n\
         set ylabel 'SER'\n\
         set key outside\n\
         plot '{csv_name}' using 8:(strcol(3) eq 'df_ns' ? $12 : 1/0) with linespoints title 'decision feedback (NS)', \\\n\
              '{csv_name}' using 8:(strcol(3) eq 'genie_s' ? $12 : 1/0) with linespoints title 'genie-aided (S)'\n"
    )
}

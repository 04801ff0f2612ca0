//! SER sweep engine with deterministic parallel trials.

use super::{channel_label, fmt_f64, oscillator_label, point_tag, with_pool, SweepConfig};
use crate::detect::{detect_two_slot, SeriesStats, TruncationPolicy};
use crate::error::{Error, Result};
use crate::rng::substream;
use rand::Rng;
use crate::scenario::{simulate_two_slot, ChannelKind, OscillatorMode, Scenario};
use rayon::prelude::*;

/// Trials processed between early-stop checks; a fixed chunk size keeps the
/// stopping decision independent of the worker count.
const CHUNK: u64 = 4096;

/// Monte Carlo estimate for one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ser: f64,
    /// Binomial normal-approximation standard error `√(p(1-p)/trials)`.
    pub stderr: f64,
    pub mean_terms: f64,
    pub max_terms: usize,
    /// Individual series evaluations behind the truncation statistics.
    pub series_evals: u64,
    pub clamped: u64,
    pub unconverged: u64,
}

impl SerEstimate {
    fn from_counts(errors: u64, trials: u64, stats: &SeriesStats) -> Self {
        let p = errors as f64 / trials as f64;
        Self {
            errors,
            trials,
            ser: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            mean_terms: stats.mean_terms(),
            max_terms: stats.max_terms,
            series_evals: stats.evals,
            clamped: stats.clamped,
            unconverged: stats.unconverged,
        }
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub channel: ChannelKind,
    pub oscillators: OscillatorMode,
    pub antennas: usize,
    pub constellation_size: usize,
    pub model_family: &'static str,
    pub model_param: f64,
    pub rho_db: f64,
    pub estimate: SerEstimate,
}

struct TrialOutcome {
    error: bool,
    stats: SeriesStats,
}

/// Monte Carlo over one grid point; also used by the floors/bounds table.
pub(crate) fn monte_carlo_point(
    scn: &Scenario,
    policy: &TruncationPolicy,
    seed: u64,
    tag: u64,
    trials: u64,
    target_errors: u64,
) -> Result<SerEstimate> {
    let mut errors = 0u64;
    let mut done = 0u64;
    let mut stats = SeriesStats::default();

    while done < trials {
        let batch = CHUNK.min(trials - done);
        let outcomes: Vec<Result<TrialOutcome>> = (done..done + batch)
            .into_par_iter()
            .map(|trial| {
                let mut rng = substream(seed, &[tag, trial]);
                let sym = rng.random_range(0..scn.constellation.len());
                let obs = simulate_two_slot(scn, sym, &mut rng)?;
                let decision = detect_two_slot(scn, &obs, policy)?;
                Ok(TrialOutcome {
                    error: decision.argmax != sym,
                    stats: decision.series_stats,
                })
            })
            .collect();
        for outcome in outcomes {
            let outcome = outcome?;
            if outcome.error {
                errors += 1;
            }
            stats.merge(&outcome.stats);
        }
        done += batch;
        if target_errors > 0 && errors >= target_errors {
            break;
        }
    }
    Ok(SerEstimate::from_counts(errors, done, &stats))
}

/// Run the configured SER sweep: every (channel, oscillator, M, ρ) cell gets
/// `trials` Monte Carlo trials with uniform random symbols, scored against
/// the simulator's truth record.
pub fn run_ser_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if cfg.data_slots != 1 {
        return Err(Error::InvalidConfig(
            "run_ser_sweep covers the two-slot protocol; use the tslot comparison for T > 1"
                .into(),
        ));
    }
    let policy = cfg.truncation.policy();

    with_pool(threads, || -> Result<Vec<SweepRow>> {
        let mut rows = Vec::new();
        for channel in cfg.channel.kinds() {
            for osc in cfg.oscillators.modes() {
                for &m in &cfg.antennas {
                    for (ri, &rho_db) in cfg.rho_db.iter().enumerate() {
                        let scn = cfg.scenario(channel, osc, m, rho_db)?;
                        let tag = point_tag(channel, osc, m, ri);
                        let estimate = monte_carlo_point(
                            &scn,
                            &policy,
                            cfg.seed,
                            tag,
                            cfg.trials,
                            cfg.target_errors,
                        )?;
                        rows.push(SweepRow {
                            scenario: cfg.name.clone(),
                            channel,
                            oscillators: osc,
                            antennas: m,
                            constellation_size: scn.constellation.len(),
                            model_family: cfg.model.family.label(),
                            model_param: cfg.model.param,
                            rho_db,
                            estimate,
                        });
                    }
                }
            }
        }
        Ok(rows)
    })?
}

/// Serialize sweep rows with the fixed column order.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "scenario,channel,oscillators,M,N,model_family,model_param,rho_db,trials,errors,ser,stderr,mean_terms,max_terms,flags\n",
    );
    for r in rows {
        let e = &r.estimate;
        let flags = if e.clamped == 0 && e.unconverged == 0 {
            String::new()
        } else {
            format!("clamped={};unconverged={}", e.clamped, e.unconverged)
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            channel_label(r.channel),
            oscillator_label(r.oscillators),
            r.antennas,
            r.constellation_size,
            r.model_family,
            fmt_f64(r.model_param),
            fmt_f64(r.rho_db),
            e.trials,
            e.errors,
            fmt_f64(e.ser),
            fmt_f64(e.stderr),
            fmt_f64(e.mean_terms),
            e.max_terms,
            flags
        ));
    }
    out
}

/// Gnuplot companion that plots SER against SNR from a sweep CSV.
///
/// Rows mix channels, modes and antenna counts; filter on columns 2-4 to
/// pull out a single curve.
pub fn sweep_plot_script(csv_name: &str) -> String {
    format!(
        "# gnuplot script: SER vs SNR from the sweep CSV\n\
         # columns: 2=channel, 3=oscillators, 4=M, 8=rho_db, 11=ser\n\
         set datafile separator ','\n\
         set logscale y\n\
         set xlabel 'rho [dB]'\n\
         set ylabel 'SER'\n\
         set key outside\n\
         plot '{csv_name}' using 8:(strcol(3) eq 's' ? $11 : 1/0) with points title 'synchronous', \\\n\
              '{csv_name}' using 8:(strcol(3) eq 'ns' ? $11 : 1/0) with points title 'non-synchronous'\n"
    )
}

/// Truncation statistics aggregated over every (channel, oscillator, ρ)
/// cell of a sweep, across antennas: how many series terms the detectors
/// actually needed for the configured relative accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub scenario: String,
    pub channel: ChannelKind,
    pub oscillators: OscillatorMode,
    pub rho_db: f64,
    pub evals: u64,
    pub mean_terms: f64,
    pub max_terms: usize,
}

/// Run a sweep and re-key the truncation statistics by (mode, channel, ρ).
pub fn run_truncation_stats(
    cfg: &SweepConfig,
    threads: Option<usize>,
) -> Result<Vec<TruncationRow>> {
    let rows = run_ser_sweep(cfg, threads)?;
    let mut out: Vec<TruncationRow> = Vec::new();
    for row in &rows {
        let est = &row.estimate;
        let evals = est.series_evals;
        match out.iter_mut().find(|t| {
            t.channel == row.channel
                && t.oscillators == row.oscillators
                && t.rho_db == row.rho_db
        }) {
            Some(cell) => {
                let total = cell.mean_terms * cell.evals as f64 + est.mean_terms * evals as f64;
                cell.evals += evals;
                cell.mean_terms = total / cell.evals as f64;
                cell.max_terms = cell.max_terms.max(est.max_terms);
            }
            None => out.push(TruncationRow {
                scenario: cfg.name.clone(),
                channel: row.channel,
                oscillators: row.oscillators,
                rho_db: row.rho_db,
                evals,
                mean_terms: est.mean_terms,
                max_terms: est.max_terms,
            }),
        }
    }
    Ok(out)
}

pub fn truncation_csv(rows: &[TruncationRow]) -> String {
    let mut out = String::from("scenario,channel,oscillators,rho_db,evals,mean_terms,max_terms\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.scenario,
            channel_label(r.channel),
            oscillator_label(r.oscillators),
            fmt_f64(r.rho_db),
            r.evals,
            fmt_f64(r.mean_terms),
            r.max_terms
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{
        ChannelSpec, ConstellationSpec, ModelFamily, ModelSpec, OscillatorSpec, TruncationSpec,
    };

    fn tiny_config() -> SweepConfig {
        SweepConfig {
            name: "tiny".into(),
            channel: ChannelSpec::Both,
            oscillators: OscillatorSpec::Both,
            rho_db: vec![-20.0],
            antennas: vec![2],
            model: ModelSpec {
                family: ModelFamily::VonMises,
                param: 4.0,
                terms: 32,
            },
            constellation: ConstellationSpec::Psk { psk: 4 },
            trials: 1000,
            target_errors: 0,
            seed: 11,
            truncation: TruncationSpec::default(),
            data_slots: 1,
            amplitudes: None,
        }
    }

    #[test]
    fn chance_level_at_very_low_snr() {
        let rows = run_ser_sweep(&tiny_config(), Some(2)).unwrap();
        assert_eq!(rows.len(), 4);
        for row in &rows {
            let e = &row.estimate;
            // At -20 dB detection is guessing: SER ≈ 0.75 within 5σ.
            let sigma = (0.75f64 * 0.25 / e.trials as f64).sqrt();
            assert!(
                (e.ser - 0.75).abs() < 5.0 * sigma,
                "{:?}: ser {}",
                (row.channel, row.oscillators),
                e.ser
            );
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = tiny_config();
        let one = sweep_csv(&run_ser_sweep(&cfg, Some(1)).unwrap());
        let four = sweep_csv(&run_ser_sweep(&cfg, Some(4)).unwrap());
        assert_eq!(one, four);
    }

    #[test]
    fn early_stop_reports_trials_and_errors() {
        let mut cfg = tiny_config();
        cfg.trials = 100_000;
        cfg.target_errors = 50;
        let rows = run_ser_sweep(&cfg, Some(2)).unwrap();
        for row in &rows {
            let e = &row.estimate;
            assert!(e.errors >= 50);
            assert!(e.trials < 100_000, "early stop should have fired");
            assert_eq!(e.ser, e.errors as f64 / e.trials as f64);
        }
    }

    #[test]
    fn truncation_rows_aggregate_across_modes() {
        let mut cfg = tiny_config();
        cfg.rho_db = vec![2.0];
        cfg.trials = 200;
        let rows = run_truncation_stats(&cfg, Some(2)).unwrap();
        assert_eq!(rows.len(), 4); // (cc,fc) × (s,ns) at a single ρ
        for r in &rows {
            assert!(r.mean_terms > 0.0);
            assert!(r.max_terms >= r.mean_terms as usize);
            assert!(r.max_terms <= 32);
        }
    }

    #[test]
    fn uniform_increments_need_only_min_terms() {
        // With all higher coefficients zero every metric evaluation stops at
        // the policy minimum.
        let mut cfg = tiny_config();
        cfg.model = ModelSpec {
            family: ModelFamily::Uniform,
            param: 0.0,
            terms: 64,
        };
        cfg.rho_db = vec![10.0];
        cfg.trials = 200;
        let rows = run_truncation_stats(&cfg, Some(2)).unwrap();
        let min_terms = cfg.truncation.policy().min_terms as f64;
        for r in &rows {
            assert_eq!(r.mean_terms, min_terms);
            assert_eq!(r.max_terms, cfg.truncation.policy().min_terms);
        }
    }

    #[test]
    fn rejects_multi_slot_config() {
        let mut cfg = tiny_config();
        cfg.data_slots = 3;
        assert!(run_ser_sweep(&cfg, None).is_err());
    }
}

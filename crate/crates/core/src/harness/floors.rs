//! Analytic floors and pairwise bounds, optionally checked against Monte
//! Carlo at the top of the SNR grid.

use super::sweep::{monte_carlo_point, SerEstimate};
use super::{channel_label, fmt_f64, point_tag, with_pool, ModelFamily, SweepConfig};
use crate::analysis::{
    bernstein_pairwise_bound, chebyshev_pairwise_bound_fc_ns, ser_floor_sync, union_bound,
};
use crate::error::{Error, Result};
use crate::scenario::{ChannelKind, OscillatorMode};

/// One row of the floors/bounds table.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorBoundsRow {
    pub scenario: String,
    pub channel: ChannelKind,
    pub antennas: usize,
    pub psk_order: usize,
    pub model_family: &'static str,
    pub model_param: f64,
    /// SNR (dB) of the Monte Carlo columns: the top of the configured grid.
    pub rho_db: f64,
    pub floor: f64,
    pub floor_terms: usize,
    /// Union of Bernstein pairwise bounds (von Mises models only).
    pub bernstein_union: Option<f64>,
    /// Union of Chebyshev pairwise bounds (von Mises models only).
    pub chebyshev_union: Option<f64>,
    /// Synchronous-mode Monte Carlo SER at `rho_db` (floor verification).
    pub mc_sync: Option<SerEstimate>,
    /// Non-synchronous-mode Monte Carlo SER at `rho_db` (bound comparison).
    pub mc_nonsync: Option<SerEstimate>,
}

/// Evaluate the analytic floor and the pairwise-error union bounds for every
/// (channel, M) cell of the config; when `with_monte_carlo` is set, also
/// measure both oscillator modes at the top of the SNR grid.
pub fn run_floor_and_bounds(
    cfg: &SweepConfig,
    threads: Option<usize>,
    with_monte_carlo: bool,
) -> Result<Vec<FloorBoundsRow>> {
    cfg.validate()?;
    let constellation = cfg.constellation.build()?;
    let psk_order = constellation.psk_order().ok_or_else(|| {
        Error::UnsupportedConstellation(
            "floor and bound analysis is defined for N-PSK alphabets".into(),
        )
    })?;
    let model = cfg.model.build()?;
    let floor_report = ser_floor_sync(&model, psk_order)?;
    let top_rho_idx = cfg
        .rho_db
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let rho_db = cfg.rho_db[top_rho_idx];
    let policy = cfg.truncation.policy();

    with_pool(threads, || -> Result<Vec<FloorBoundsRow>> {
        let mut rows = Vec::new();
        for channel in cfg.channel.kinds() {
            for &m in &cfg.antennas {
                let (bernstein_union, chebyshev_union) =
                    if cfg.model.family == ModelFamily::VonMises && cfg.model.param > 0.0 {
                        let kappa = cfg.model.param;
                        let b: Vec<f64> = (1..psk_order)
                            .map(|n| bernstein_pairwise_bound(kappa, psk_order, n, m))
                            .collect::<Result<_>>()?;
                        let c: Vec<f64> = (1..psk_order)
                            .map(|n| chebyshev_pairwise_bound_fc_ns(kappa, psk_order, n, m))
                            .collect::<Result<_>>()?;
                        (Some(union_bound(&b)), Some(union_bound(&c)))
                    } else {
                        (None, None)
                    };

                let (mc_sync, mc_nonsync) = if with_monte_carlo {
                    let run = |osc: OscillatorMode| -> Result<SerEstimate> {
                        let scn = cfg.scenario(channel, osc, m, rho_db)?;
                        monte_carlo_point(
                            &scn,
                            &policy,
                            cfg.seed,
                            point_tag(channel, osc, m, top_rho_idx),
                            cfg.trials,
                            cfg.target_errors,
                        )
                    };
                    (
                        Some(run(OscillatorMode::Synchronous)?),
                        Some(run(OscillatorMode::NonSynchronous)?),
                    )
                } else {
                    (None, None)
                };

                rows.push(FloorBoundsRow {
                    scenario: cfg.name.clone(),
                    channel,
                    antennas: m,
                    psk_order,
                    model_family: cfg.model.family.label(),
                    model_param: cfg.model.param,
                    rho_db,
                    floor: floor_report.floor,
                    floor_terms: floor_report.terms_used,
                    bernstein_union,
                    chebyshev_union,
                    mc_sync,
                    mc_nonsync,
                });
            }
        }
        Ok(rows)
    })?
}

pub fn floor_bounds_csv(rows: &[FloorBoundsRow]) -> String {
    let mut out = String::from(
        "scenario,channel,M,N,model_family,model_param,rho_db,floor,floor_terms,bernstein_union,chebyshev_union,mc_ser_s,mc_stderr_s,mc_ser_ns,mc_stderr_ns,trials\n",
    );
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            channel_label(r.channel),
            r.antennas,
            r.psk_order,
            r.model_family,
            fmt_f64(r.model_param),
            fmt_f64(r.rho_db),
            fmt_f64(r.floor),
            r.floor_terms,
            opt(r.bernstein_union),
            opt(r.chebyshev_union),
            opt(r.mc_sync.map(|e| e.ser)),
            opt(r.mc_sync.map(|e| e.stderr)),
            opt(r.mc_nonsync.map(|e| e.ser)),
            opt(r.mc_nonsync.map(|e| e.stderr)),
            r.mc_sync.map(|e| e.trials).unwrap_or(0),
        ));
    }
    out
}

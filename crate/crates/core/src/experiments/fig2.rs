//! Sum spectral efficiency over random user drops for two power cases.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channel::{drop_user_placements, estimation_stats, SystemConfig};
use crate::error::Result;
use crate::linalg::{derive_seed, RngStream};
use crate::processing::Processing;
use crate::se::se_monte_carlo_modes;

use super::output::{format_sig, ResultRow, CDF_HEADER};
use super::spec::{ExperimentSpec, Placement};

/// Large-scale coefficients of drop `drop`.
pub fn drop_betas(spec: &ExperimentSpec, drop: usize) -> Vec<f64> {
    let setup = &spec.fig2;
    match setup.placement {
        Placement::Center => vec![1.0; setup.users],
        Placement::Random => {
            let mut rng = RngStream::new(derive_seed(spec.seed, "fig2-drop", &[drop as u64]), 0);
            drop_user_placements(setup.users, &setup.geometry, &mut rng)
                .into_iter()
                .map(|u| u.beta)
                .collect()
        }
    }
}

/// Monte Carlo seed of drop `drop`, shared by both cases and modes.
pub fn fig2_seed(root: u64, drop: usize) -> u64 {
    derive_seed(root, "fig2-trials", &[drop as u64])
}

/// Rows of one drop and 1-based case, one per mode.
pub fn fig2_rows(
    spec: &ExperimentSpec,
    drop: usize,
    case: usize,
    modes: &[Processing],
) -> Result<Vec<ResultRow>> {
    let setup = &spec.fig2;
    let (pu, pp, pr) = setup.cases[case - 1].snrs(setup.noise_db);
    let cfg = SystemConfig {
        antennas: setup.antennas,
        users: setup.users,
        coherence: setup.coherence,
        training: setup.users,
        uplink_snr: pu,
        pilot_snr: pp,
        relay_snr: pr,
    };
    cfg.validate()?;
    let profile = estimation_stats(&drop_betas(spec, drop), cfg.training, pp)?;
    let reports = se_monte_carlo_modes(
        &cfg,
        &profile,
        modes,
        spec.trials,
        fig2_seed(spec.seed, drop),
    )?;
    Ok(reports
        .iter()
        .map(|r| ResultRow::from_report("fig2", cfg.antennas, r, Some(case), Some(drop), spec.seed))
        .collect())
}

/// Drops run concurrently; rows come back in `(drop, case, mode)` order.
pub fn run_fig2(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let per_drop: Vec<Result<Vec<ResultRow>>> = (0..spec.fig2.drops)
        .into_par_iter()
        .map(|d| {
            let mut rows = Vec::new();
            for case in 1..=spec.fig2.cases.len() {
                rows.extend(fig2_rows(spec, d, case, &spec.modes)?);
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_drop {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Sorted sum rates of the rows matching `case` and `mode`.
pub fn sorted_sum_se(rows: &[ResultRow], case: usize, mode: Processing) -> Vec<f64> {
    let mut v: Vec<f64> = rows
        .iter()
        .filter(|r| r.case == Some(case) && r.mode == mode)
        .map(|r| r.sum_se)
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Empirical CDF as sorted samples per `(case, mode)`.
pub fn cdf_csv(spec: &ExperimentSpec, rows: &[ResultRow]) -> String {
    let mut out = String::from(CDF_HEADER);
    out.push('\n');
    for case in 1..=spec.fig2.cases.len() {
        for &mode in &spec.modes {
            let sorted = sorted_sum_se(rows, case, mode);
            let n = sorted.len() as f64;
            for (i, v) in sorted.iter().enumerate() {
                writeln!(
                    out,
                    "case{case},{mode},monte_carlo,{},{},{}",
                    i + 1,
                    format_sig(*v),
                    format_sig((i + 1) as f64 / n)
                )
                .expect("writing to a String");
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&[7.0], 0.25), 7.0);
    }
}

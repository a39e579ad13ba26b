//! Sum spectral efficiency versus the number of users at fixed `M/K`.

use crate::channel::{estimation_stats, FadingProfile, SystemConfig};
use crate::error::Result;
use crate::linalg::derive_seed;
use crate::processing::Processing;
use crate::se::{se_closed_form, se_monte_carlo_modes, Method};

use super::output::ResultRow;
use super::spec::{ExperimentSpec, Fig1Grid};

/// System and fading statistics of one grid point, with `τ = K`.
pub fn fig1_point(
    grid: &Fig1Grid,
    antennas: usize,
    users: usize,
) -> Result<(SystemConfig, FadingProfile)> {
    let cfg = SystemConfig {
        antennas,
        users,
        coherence: grid.coherence,
        training: users,
        uplink_snr: grid.uplink_snr,
        pilot_snr: grid.pilot_snr,
        relay_snr: grid.relay_snr,
    };
    cfg.validate()?;
    let profile = estimation_stats(&vec![grid.beta; users], users, grid.pilot_snr)?;
    Ok((cfg, profile))
}

/// Monte Carlo seed of grid point `(M, K)`.
pub fn fig1_seed(root: u64, antennas: usize, users: usize) -> u64 {
    derive_seed(root, "fig1", &[antennas as u64, users as u64])
}

/// Rows of one grid point: ZF closed form, then Monte Carlo for each mode.
/// `method` restricts the output to one method.
pub fn fig1_rows(
    spec: &ExperimentSpec,
    antennas: usize,
    users: usize,
    modes: &[Processing],
    method: Option<Method>,
) -> Result<Vec<ResultRow>> {
    let (cfg, profile) = fig1_point(&spec.fig1, antennas, users)?;
    let mut rows = Vec::new();
    let wants = |m: Method| method.is_none_or(|x| x == m);
    if modes.contains(&Processing::ZeroForcing) && wants(Method::ClosedForm) {
        let report = se_closed_form(&cfg, &profile)?;
        rows.push(ResultRow::from_report(
            "fig1", antennas, &report, None, None, spec.seed,
        ));
    }
    if wants(Method::MonteCarlo) {
        let seed = fig1_seed(spec.seed, antennas, users);
        for report in se_monte_carlo_modes(&cfg, &profile, modes, spec.trials, seed)? {
            rows.push(ResultRow::from_report(
                "fig1", antennas, &report, None, None, spec.seed,
            ));
        }
    }
    Ok(rows)
}

/// Every `(ratio, K)` grid point in order, ratio outermost.
pub fn run_fig1(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for &ratio in &spec.fig1.ratios {
        for &k in &spec.fig1.k_values {
            rows.extend(fig1_rows(spec, ratio * k, k, &spec.modes, None)?);
        }
    }
    Ok(rows)
}

//! A reduced Figure 2 run: sum-rate quantiles over random drops for both
//! power cases.
//!
//! The full run is `mwr-sim fig2`.

use mwr_sim::experiments::{quantile, run_fig2, sorted_sum_se, ExperimentKind, ExperimentSpec};
use mwr_sim::Processing;

fn main() -> mwr_sim::Result<()> {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::Fig2);
    spec.fig2.drops = 40;
    spec.trials = 100;
    let rows = run_fig2(&spec)?;

    println!("case  mode     q10      median   q90      IQR");
    for case in 1..=2 {
        for mode in [Processing::ZeroForcing, Processing::MaximumRatio] {
            let v = sorted_sum_se(&rows, case, mode);
            println!(
                "{case:>4}  {mode:<4}  {:>7.2}  {:>7.2}  {:>7.2}  {:>7.2}",
                quantile(&v, 0.1),
                quantile(&v, 0.5),
                quantile(&v, 0.9),
                quantile(&v, 0.75) - quantile(&v, 0.25)
            );
        }
    }
    Ok(())
}

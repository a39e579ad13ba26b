//! A reduced Figure 1 sweep: sum rate versus K for two antenna ratios.
//!
//! The full sweep is `mwr-sim fig1`.

use mwr_sim::experiments::{rows_to_csv, run_fig1, ExperimentKind, ExperimentSpec};
use mwr_sim::{Method, Processing};

fn main() -> mwr_sim::Result<()> {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::Fig1);
    spec.fig1.k_values = vec![10, 20, 40, 80, 100];
    spec.trials = 200;
    let rows = run_fig1(&spec)?;

    println!("ratio    K   zf(cf)   zf(mc)   mr(mc)");
    for chunk in rows.chunks(3) {
        let pick = |mode, method| {
            chunk
                .iter()
                .find(|r| r.mode == mode && r.method == method)
                .map_or(f64::NAN, |r| r.sum_se)
        };
        println!(
            "{:>5} {:>4}  {:>7.2}  {:>7.2}  {:>7.2}",
            chunk[0].antennas / chunk[0].users,
            chunk[0].users,
            pick(Processing::ZeroForcing, Method::ClosedForm),
            pick(Processing::ZeroForcing, Method::MonteCarlo),
            pick(Processing::MaximumRatio, Method::MonteCarlo)
        );
    }
    if std::env::args().any(|a| a == "--csv") {
        print!("{}", rows_to_csv(&rows));
    }
    Ok(())
}

//! Monte Carlo spectral efficiency for both processing modes next to the
//! closed form, with the effective-noise breakdown of one user.

use mwr_sim::se::noise_decomposition_mc;
use mwr_sim::{
    alpha_analytic, estimation_stats, se_closed_form, se_monte_carlo, Processing, SystemConfig,
};

fn main() -> mwr_sim::Result<()> {
    let cfg = SystemConfig {
        antennas: 100,
        users: 20,
        coherence: 200,
        training: 20,
        uplink_snr: 1.0,
        pilot_snr: 1.0,
        relay_snr: 10.0,
    };
    let profile = estimation_stats(&[1.0; 20], 20, 1.0)?;
    let trials = 1000;

    let cf = se_closed_form(&cfg, &profile)?;
    println!("zf closed form   sum {:.3}", cf.sum);
    for mode in [Processing::ZeroForcing, Processing::MaximumRatio] {
        let r = se_monte_carlo(&cfg, &profile, mode, trials, 42)?;
        println!(
            "{mode} monte carlo   sum {:.3} +/- {:.3} (alpha {:.4e}, {} trials)",
            r.sum,
            r.sum_ci_halfwidth.unwrap_or(0.0),
            r.alpha,
            r.trials
        );
    }

    let alpha = alpha_analytic(&cfg, &profile);
    let d = &noise_decomposition_mc(&cfg, &profile, Processing::ZeroForcing, alpha, trials, 43)?[0];
    println!("\nuser 0 effective noise (zf):");
    println!("  mean desired gain  {:.4}", d.desired_mean.norm());
    println!("  gain variance      {:.3e}", d.var_desired);
    println!("  self interference  {:.3e}", d.self_interf);
    println!("  cross interference {:.3e}", d.cross_total());
    println!("  amplified noise    {:.3e}", d.amplified_noise);
    Ok(())
}

//! Relay amplification factor: closed form against Monte Carlo traces, and
//! the resulting mean transmit power.

use mwr_sim::channel::sample_realization;
use mwr_sim::processing::{q_terms_mc, relay_transmit};
use mwr_sim::{
    alpha_analytic, alpha_mc, estimation_stats, Processing, ProcessingSet, RngStream, SystemConfig,
    C64,
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
    let q = q_terms_mc(&cfg, &profile, Processing::ZeroForcing, 1000, 1);
    let alpha = alpha_mc(&cfg, &q);
    println!("Q1 = {:.5}, Q2 = {:.3e}, Q3 = {:.3e}", q.q1, q.q2, q.q3);
    println!(
        "alpha: monte carlo {alpha:.3}, closed form {:.3}",
        alpha_analytic(&cfg, &profile)
    );

    let n = 500;
    let mut power = 0.0;
    for t in 0..n {
        let mut rng = RngStream::new(2, t);
        let real = sample_realization(&cfg, &profile, &mut rng);
        let set = ProcessingSet::new(Processing::ZeroForcing, &real.ghat, 1, alpha)?;
        let x: Vec<C64> = (0..cfg.users).map(|_| rng.complex_gaussian()).collect();
        let noise: Vec<C64> = (0..cfg.antennas).map(|_| rng.complex_gaussian()).collect();
        let s = relay_transmit(&real, &set, cfg.uplink_snr, &x, &noise)?;
        power += s.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    println!(
        "mean relay power {:.3} (target {})",
        power / n as f64,
        cfg.relay_snr
    );
    Ok(())
}

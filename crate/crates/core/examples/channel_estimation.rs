//! Pilot-based estimation statistics and one channel draw.

use mwr_sim::channel::{drop_user_placements, sample_realization, DropGeometry};
use mwr_sim::{estimation_stats, RngStream, SystemConfig};

fn main() -> mwr_sim::Result<()> {
    let betas = [1.0, 0.5, 0.1, 2.0];
    let profile = estimation_stats(&betas, 4, 1.0)?;
    println!("user  beta    est_var  err_var");
    for (k, b) in betas.iter().enumerate() {
        println!(
            "{k:>4}  {:<6}  {:.4}   {:.4}",
            b, profile.estimate_var[k], profile.error_var[k]
        );
    }
    println!("rho = {:.4}", profile.rho);

    let cfg = SystemConfig {
        antennas: 64,
        users: 4,
        coherence: 200,
        training: 4,
        uplink_snr: 1.0,
        pilot_snr: 1.0,
        relay_snr: 10.0,
    };
    let real = sample_realization(&cfg, &profile, &mut RngStream::new(7, 0));
    for k in 0..4 {
        let power = |m: &mwr_sim::ComplexMatrix| {
            m.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0
        };
        println!(
            "user {k}: |g|^2/M = {:.3}, |ghat|^2/M = {:.3}, |e|^2/M = {:.3}",
            power(&real.g),
            power(&real.ghat),
            power(&real.e)
        );
    }

    let mut rng = RngStream::new(11, 0);
    for u in drop_user_placements(3, &DropGeometry::default(), &mut rng) {
        println!(
            "dropped user at {:.0} m, shadowing {:+.1} dB, beta {:.3e}",
            u.distance_m, u.shadow_db, u.beta
        );
    }
    Ok(())
}

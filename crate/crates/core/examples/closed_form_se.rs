//! Closed-form zero-forcing spectral efficiency and how it scales with the
//! relay array.

use mwr_sim::se::{amplified_noise_term, closed_form_sinr, interference_term};
use mwr_sim::{alpha_analytic, estimation_stats, se_closed_form, SystemConfig};

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
    let alpha = alpha_analytic(&cfg, &profile);
    let interference: f64 = (0..20)
        .map(|i| interference_term(&cfg, &profile, 0, i))
        .sum();
    println!("alpha = {alpha:.3}");
    println!(
        "user 0: interference {interference:.6}, amplified noise {:.6}",
        amplified_noise_term(&cfg, &profile, 0)
    );
    println!(
        "user 0: SINR {:.3}",
        closed_form_sinr(&cfg, &profile, 0, alpha)
    );
    let r = se_closed_form(&cfg, &profile)?;
    println!(
        "per-user {:.4} bit/s/Hz, sum {:.3} bit/s/Hz",
        r.per_user[0], r.sum
    );

    println!("\n   M   sum SE");
    for m in [40, 60, 100, 200, 400, 800] {
        let cfg = SystemConfig { antennas: m, ..cfg };
        println!("{m:>4}   {:.3}", se_closed_form(&cfg, &profile)?.sum);
    }

    let betas: Vec<f64> = (0..20).map(|k| 0.1 + 0.1 * k as f64).collect();
    let uneven = estimation_stats(&betas, 20, 1.0)?;
    let r = se_closed_form(&cfg, &uneven)?;
    println!(
        "\nunequal path loss: min {:.3}, max {:.3}, sum {:.3}",
        r.min(),
        r.max(),
        r.sum
    );
    Ok(())
}

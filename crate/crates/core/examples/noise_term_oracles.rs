//! Monte Carlo checks of the random-matrix identities behind the closed
//! form, including a negative control with wrong estimation statistics.

use mwr_sim::oracles::{
    inverse_wishart_trace_check, q_asymptotic_check, q_asymptotic_check_with, quadratic_form_check,
    variance_terms_check,
};
use mwr_sim::{estimation_stats, ComplexMatrix, FadingProfile, SystemConfig};

fn main() -> mwr_sim::Result<()> {
    println!(
        "{}",
        inverse_wishart_trace_check(6, 2, &[1.0, 2.0], &[2.0, 2.0], 100_000, 1)?
    );
    println!(
        "{}",
        quadratic_form_check(&ComplexMatrix::identity(6), 100_000, 2)?
    );

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
    for r in q_asymptotic_check(&cfg, &profile, 1000, 3)? {
        println!("{r}");
    }
    for r in variance_terms_check(&cfg, &profile, 0, 1000, 4)? {
        println!("{r}");
    }

    println!("\nnegative control, closed forms evaluated with perfect-CSI statistics:");
    let wrong = FadingProfile::perfect_csi(&profile.betas)?;
    for r in q_asymptotic_check_with(&cfg, &profile, &wrong, 1000, 5)? {
        println!("{r}");
    }
    Ok(())
}

//! Zero-forcing receiver and precoder, the broadcast permutation and the
//! resulting end-to-end gains.

use mwr_sim::channel::sample_realization;
use mwr_sim::processing::{permutation, zf_precoder, zf_receiver};
use mwr_sim::{estimation_stats, Processing, ProcessingSet, RngStream, SystemConfig};

fn main() -> mwr_sim::Result<()> {
    let cfg = SystemConfig {
        antennas: 32,
        users: 4,
        coherence: 200,
        training: 4,
        uplink_snr: 1.0,
        pilot_snr: 1.0,
        relay_snr: 10.0,
    };
    let profile = estimation_stats(&[1.0; 4], 4, 1.0)?;
    let real = sample_realization(&cfg, &profile, &mut RngStream::new(3, 0));

    let w = zf_receiver(&real.ghat)?;
    let a = zf_precoder(&real.ghat)?;
    let id = w.matmul(&real.ghat)?;
    println!(
        "max |W^T Ghat - I| = {:.2e}",
        (&id - &mwr_sim::ComplexMatrix::identity(4)).max_abs()
    );
    let at = real.ghat.transpose().matmul(&a)?;
    println!(
        "max |Ghat^T A - I| = {:.2e}",
        (&at - &mwr_sim::ComplexMatrix::identity(4)).max_abs()
    );

    for slot in 1..4 {
        let set = ProcessingSet::new(Processing::ZeroForcing, &real.ghat, slot, 1.0)?;
        let c = set.relay_matrix();
        let est = real.ghat.transpose().matmul(&c.matmul(&real.ghat)?)?;
        let err = (&est - &permutation(4, slot)?).max_abs();
        println!("slot {slot}: max |Ghat^T C Ghat - Pi| = {err:.2e}");
        let truth = real.g.transpose().matmul(&c.matmul(&real.g)?)?;
        println!("  true-channel gains |G^T C G|:");
        for k in 0..4 {
            let row: Vec<String> = (0..4)
                .map(|i| format!("{:.3}", truth[(k, i)].norm()))
                .collect();
            println!("    {}", row.join("  "));
        }
    }
    Ok(())
}

//! Checks the calibration of the kernel conditional-independence test:
//! under the null the rejection rate at level alpha should be near alpha,
//! and the gamma approximation should agree with the permutation null.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use skewscore::pruning::{kci_test, KciConfig, NullApproximation};

fn main() -> skewscore::Result<()> {
    let alpha = 0.05;
    let reps = 200;
    let n = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(29);

    let mut rejections = 0;
    for _ in 0..reps {
        let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let r = kci_test(&x, &y, None, &KciConfig::default())?;
        if r.p_value < alpha {
            rejections += 1;
        }
    }
    println!(
        "independent pairs: {rejections}/{reps} rejections at alpha = {alpha} (rate {:.3})",
        rejections as f64 / reps as f64
    );

    // Gamma vs permutation null on one dependent draw.
    let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let y: Vec<f64> = x.iter().map(|&v| v * v + 0.5 * rng.sample::<f64, _>(StandardNormal)).collect();
    let gamma = kci_test(&x, &y, None, &KciConfig::default())?;
    let perm_cfg = KciConfig {
        null: NullApproximation::Permutation { n_perms: 500, seed: 1 },
        ..KciConfig::default()
    };
    let perm = kci_test(&x, &y, None, &perm_cfg)?;
    println!("dependent pair: gamma p = {:.5}, permutation p = {:.5}", gamma.p_value, perm.p_value);
    Ok(())
}

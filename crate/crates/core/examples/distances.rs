//! Serving and interferer distance laws of the two user classes.
use noma_cell::distance::{cdf_ro, class_probabilities, sample_distance_pair};
use noma_cell::{SystemParams, UserClass};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let p = SystemParams::default();
    let (cc, ce) = class_probabilities(&p);
    println!("P[CC] = {cc:.3}, P[CE] = {ce:.3}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for class in UserClass::BOTH {
        let n = 100_000;
        let below = (0..n).filter(|_| sample_distance_pair(class, &p, &mut rng).r_o <= 0.3).count();
        println!(
            "{}: P[R_o <= 0.3] analytic {:.4}, sampled {:.4}",
            class.label(),
            cdf_ro(class, 0.3, &p),
            below as f64 / n as f64
        );
    }
}

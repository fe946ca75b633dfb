use std::collections::VecDeque;

use rand::Rng;

/// Mean sojourn time, in slots, of a discrete-time queue with Bernoulli(`arrival`)
/// arrivals and Bernoulli(`mu`) service attempts over `n_slots` slots.
///
/// Within a slot the head-of-line packet is served first, then a new packet
/// may arrive; a packet arriving in slot `k` and leaving in slot `j` has
/// sojourn `j − k`. Packets still queued at the end are not counted.
pub fn queue_sim<R: Rng + ?Sized>(mu: f64, arrival: f64, n_slots: u64, rng: &mut R) -> f64 {
    if mu <= arrival {
        log::warn!("queue with service {mu} <= arrival {arrival} is unstable; estimate grows with n_slots");
    }
    let mut queue: VecDeque<u64> = VecDeque::new();
    let (mut total, mut served) = (0u64, 0u64);
    for slot in 0..n_slots {
        if !queue.is_empty() && rng.random_bool(mu) {
            total += slot - queue.pop_front().expect("nonempty");
            served += 1;
        }
        if rng.random_bool(arrival) {
            queue.push_back(slot);
        }
    }
    if served == 0 {
        f64::NAN
    } else {
        total as f64 / served as f64
    }
}

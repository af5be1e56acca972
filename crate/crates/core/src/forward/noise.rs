use crate::boundary::BoundaryTrace;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform `[-1, 1]` draw for sample `index` of stream `seed`.
///
/// Each sample owns a fixed position in the ChaCha stream, so the value
/// does not depend on evaluation order.
pub fn uniform_sample(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * index as u128);
    let bits = rng.next_u64() >> 11;
    2.0 * (bits as f64 / (1u64 << 53) as f64) - 1.0
}

/// Multiplicative noise `u_j (1 + delta eps_j)`, `eps_j ~ U[-1, 1]`.
pub fn add_noise(trace: &BoundaryTrace, delta: f64, seed: u64) -> BoundaryTrace {
    if delta == 0.0 {
        return trace.clone();
    }
    let values = trace
        .values()
        .iter()
        .enumerate()
        .map(|(j, u)| u * (1.0 + delta * uniform_sample(seed, j as u64)))
        .collect();
    BoundaryTrace::new(trace.radius(), values).expect("same layout as the input trace")
}

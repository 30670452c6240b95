//! Seeded random draws from the admissible parameter domain.
//!
//! Draws use `ChaCha8Rng` seeded with a `u64`, so a failing draw can be
//! replayed from its seed and index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::params::{CouplingParams, RawParams};

/// Largest matrix degree drawn by default.
pub const MAX_DESK_M: usize = 16;

pub struct ParamSampler {
    rng: ChaCha8Rng,
    max_m: usize,
}

impl ParamSampler {
    pub fn new(seed: u64, max_m: usize) -> Self {
        ParamSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_m: max_m.max(1),
        }
    }

    /// One admissible parameter set:
    /// `u1, u2 ∈ (0.1, 2)`, `|v_r| < 0.9 (u_r + 1/2)` for r = 1, 2,
    /// `u3, u4, v3, v4 ∈ (-2, 2)`, `p` log-uniform in `[0.01, 0.5]`,
    /// `M` uniform in `1..=max_m`, and a regular virtual parameter.
    pub fn draw(&mut self) -> CouplingParams {
        loop {
            let rng = &mut self.rng;
            let u1 = rng.gen_range(0.1..2.0);
            let u2 = rng.gen_range(0.1..2.0);
            let v1 = 0.9 * (u1 + 0.5) * rng.gen_range(-1.0..1.0);
            let v2 = 0.9 * (u2 + 0.5) * rng.gen_range(-1.0..1.0);
            let raw = RawParams {
                u: [u1, u2, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                v: [v1, v2, rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                u_virtual: rng.gen_range(-1.0..2.0),
                m: rng.gen_range(1..=self.max_m),
                p: (rng.gen_range(0.01f64.ln()..0.5f64.ln())).exp(),
            };
            if let Ok(params) = CouplingParams::validate(raw) {
                return params;
            }
        }
    }
}

/// `count` draws from the stream seeded with `seed`.
pub fn draws(seed: u64, count: usize, max_m: usize) -> Vec<CouplingParams> {
    let mut sampler = ParamSampler::new(seed, max_m);
    (0..count).map(|_| sampler.draw()).collect()
}

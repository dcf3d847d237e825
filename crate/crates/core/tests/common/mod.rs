#![allow(dead_code)]

use orthocal::{Geometry, JointOffsets, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const L: f64 = 310.0;

pub fn geometry() -> Geometry<f64> {
    Geometry::new(L, 0.5, -0.5).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the ball of the given radius.
pub fn in_ball(rng: &mut impl Rng, radius: f64) -> Vec3<f64> {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() <= 1.0 {
            return v * radius;
        }
    }
}

pub fn offsets_in_ball(rng: &mut impl Rng, radius: f64) -> JointOffsets<f64> {
    JointOffsets::from_vec3(in_ball(rng, radius))
}

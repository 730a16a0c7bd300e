//! Synthetic 2-D data: a Gaussian blob of positives inside a ring of negatives.
//!
//! Random numbers come from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
//! which produces the same stream on every platform. Normal variates use the
//! Box-Muller transform: two uniforms `u1 = 1 - U[0,1)` and `u2 = U[0,1)` give
//! `sqrt(-2 ln u1) * cos(2 pi u2)` and then `sqrt(-2 ln u1) * sin(2 pi u2)`,
//! consumed in that order.
//!
//! Positives are drawn first: each is `(sqrt(v) n1, sqrt(v) n2)` with
//! `v = pos_cov_scale`. Each negative draws an angle `2 pi U[0,1)` and then a
//! radius `ring_radius_mean + ring_radius_std * n`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingSpec {
    pub n_pos: usize,
    pub n_neg: usize,
    /// Per-axis variance of the positive Gaussian.
    pub pos_cov_scale: f64,
    pub ring_radius_mean: f64,
    pub ring_radius_std: f64,
    pub seed: u64,
}

impl RingSpec {
    pub fn new(n_pos: usize, n_neg: usize, seed: u64) -> Self {
        RingSpec {
            n_pos,
            n_neg,
            pos_cov_scale: 0.1,
            ring_radius_mean: 1.0,
            ring_radius_std: 0.2,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("pos_cov_scale", self.pos_cov_scale),
            ("ring_radius_mean", self.ring_radius_mean),
            ("ring_radius_std", self.ring_radius_std),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Box-Muller normal sampler over a ChaCha8 stream.
pub struct NormalStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

fn draw(spec: &RingSpec, stream: &mut NormalStream) -> (FeatureMatrix, FeatureMatrix) {
    let sd = spec.pos_cov_scale.sqrt();
    let mut pos = Vec::with_capacity(spec.n_pos * 2);
    for _ in 0..spec.n_pos {
        pos.push(sd * stream.normal());
        pos.push(sd * stream.normal());
    }
    let mut neg = Vec::with_capacity(spec.n_neg * 2);
    for _ in 0..spec.n_neg {
        let angle = 2.0 * PI * stream.uniform();
        let radius = spec.ring_radius_mean + spec.ring_radius_std * stream.normal();
        neg.push(radius * angle.cos());
        neg.push(radius * angle.sin());
    }
    (
        FeatureMatrix::new(spec.n_pos, 2, pos).expect("finite samples"),
        FeatureMatrix::new(spec.n_neg, 2, neg).expect("finite samples"),
    )
}

/// Positives followed by negatives; bit-identical for equal specs.
pub fn generate_ring(spec: &RingSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let (pos, neg) = draw(spec, &mut NormalStream::new(spec.seed));
    LabeledDataset::from_classes(&pos, &neg)
}

/// Only the negative ring (e.g. a bootstrap pool), drawn from its own stream.
pub fn generate_ring_negatives(spec: &RingSpec) -> Result<FeatureMatrix> {
    spec.validate()?;
    let spec = RingSpec { n_pos: 0, ..*spec };
    Ok(draw(&spec, &mut NormalStream::new(spec.seed)).1)
}

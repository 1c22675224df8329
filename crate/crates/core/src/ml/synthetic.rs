//! Seeded synthetic classification data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dataset, Matrix};

/// Gaussian class blobs: every class has unit-variance informative features
/// centred on a per-class mean, followed by pure N(0, 1) noise features.
#[derive(Debug, Clone, PartialEq)]
pub struct Blobs {
    pub n_samples: usize,
    pub n_classes: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    /// Distance of each class mean from the origin along its informative axes.
    pub separation: f64,
}

impl Default for Blobs {
    fn default() -> Self {
        Self { n_samples: 300, n_classes: 2, n_informative: 3, n_noise: 7, separation: 1.0 }
    }
}

impl Blobs {
    /// Class `c` has mean `+separation` on informative axis `j` when bit
    /// `(c + j) % 2` is 0 and `-separation` otherwise; with two classes the
    /// means sit at opposite corners. Classes are dealt round-robin so class
    /// sizes differ by at most one.
    pub fn generate(&self, seed: u64) -> Dataset {
        assert!(self.n_classes >= 2, "need at least two classes");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = Normal::new(0.0, 1.0).expect("unit normal");
        let cols = self.n_informative + self.n_noise;
        let mut data = Vec::with_capacity(self.n_samples * cols);
        let mut labels = Vec::with_capacity(self.n_samples);
        for i in 0..self.n_samples {
            let class = i % self.n_classes;
            for j in 0..self.n_informative {
                let sign = if (class + j).is_multiple_of(2) { 1.0 } else { -1.0 };
                let shift = if self.n_classes > 2 { (class / 2) as f64 * 2.0 * self.separation } else { 0.0 };
                data.push(sign * self.separation + shift + unit.sample(&mut rng));
            }
            for _ in 0..self.n_noise {
                data.push(unit.sample(&mut rng));
            }
            labels.push(class);
        }
        let mut feature_names: Vec<String> = (0..self.n_informative).map(|j| format!("inf{j}")).collect();
        feature_names.extend((0..self.n_noise).map(|j| format!("noise{j}")));
        let class_names = (0..self.n_classes).map(|c| format!("c{c}")).collect();
        Dataset::new(Matrix::new(self.n_samples, cols, data), labels, class_names, feature_names)
            .expect("generated dataset is consistent")
    }
}

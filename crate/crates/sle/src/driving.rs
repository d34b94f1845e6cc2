//! Time partitions and driving-function increments.
//!
//! The driving function is `U_t = sqrt(kappa) B_t` on `[0, 1]`. A run is
//! determined by a partition `0 = t_0 < ... < t_N = 1` and the increments
//! `delta_k = U(t_k) - U(t_{k-1})`, which are independent with variance
//! `kappa * Delta_k` (Gaussian) or fixed magnitude `sqrt(kappa * Delta_k)`
//! with a random sign (Bernoulli).

use serde::Serialize;

use crate::rng::{NormalSource, SplitMix64};
use crate::{Error, Result};

/// How the `N` subinterval endpoints are placed in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionScheme {
    /// `t_k = k / N`.
    Uniform,
    /// `t_k = (k/N)^(2 nu)`. Steps shrink near `t = 0`, equalizing the
    /// expected spatial progress of the trace tip when `nu` is the path's
    /// growth exponent (3/4 at kappa = 8/3).
    CapacitySpaced { nu: f64 },
}

/// A partition of `[0, 1]` into `N` subintervals.
#[derive(Debug, Clone)]
pub struct Partition {
    times: Vec<f64>,
    deltas: Vec<f64>,
    scheme: PartitionScheme,
}

impl Partition {
    /// Builds the partition for `n` steps under `scheme`.
    pub fn new(n: usize, scheme: PartitionScheme) -> Result<Partition> {
        if n == 0 {
            return Err(Error::invalid("partition needs at least one step"));
        }
        let times = match scheme {
            PartitionScheme::Uniform => (0..=n).map(|k| k as f64 / n as f64).collect::<Vec<_>>(),
            PartitionScheme::CapacitySpaced { nu } => {
                if !(nu > 0.0) || !nu.is_finite() {
                    return Err(Error::invalid(format!("nu must be positive, got {nu}")));
                }
                let mut t = Vec::with_capacity(n + 1);
                t.push(0.0);
                for k in 1..n {
                    t.push((2.0 * nu * (k as f64 / n as f64).ln()).exp());
                }
                t.push(1.0);
                t
            }
        };
        let deltas = match scheme {
            // Constant steps, all equal to the same rounding of 1/N.
            PartitionScheme::Uniform => vec![1.0 / n as f64; n],
            PartitionScheme::CapacitySpaced { .. } => {
                times.windows(2).map(|w| w[1] - w[0]).collect()
            }
        };
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        Ok(Partition {
            times,
            deltas,
            scheme,
        })
    }

    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `N + 1` endpoints `t_0 .. t_N`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The `N` step sizes `Delta_k = t_k - t_{k-1}`.
    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn scheme(&self) -> PartitionScheme {
        self.scheme
    }
}

/// Distribution of the driving increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IncrementKind {
    Gaussian,
    /// `delta_k = +-sqrt(kappa Delta_k)` with equal probability. Matches the
    /// Gaussian mean and variance; the trace statistics agree in the scaling
    /// limit and each step's map has an exactly known cut size.
    Bernoulli,
}

/// Driving increments over a partition.
#[derive(Debug, Clone)]
pub struct DrivingSample {
    kappa: f64,
    kind: IncrementKind,
    seed: u64,
    increments: Vec<f64>,
}

impl DrivingSample {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kind(&self) -> IncrementKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One increment per partition step.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}

/// Draws the increments for `partition` from the stream determined by
/// `seed`. The sample depends only on (partition, kappa, kind, seed).
pub fn sample_driving(
    partition: &Partition,
    kappa: f64,
    kind: IncrementKind,
    seed: u64,
) -> Result<DrivingSample> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    let mut stream = SplitMix64::new(seed).split();
    let increments = match kind {
        IncrementKind::Gaussian => {
            let mut normals = NormalSource::new(stream);
            partition
                .deltas()
                .iter()
                .map(|&d| (kappa * d).sqrt() * normals.next())
                .collect()
        }
        IncrementKind::Bernoulli => partition
            .deltas()
            .iter()
            .map(|&d| {
                let mag = (kappa * d).sqrt();
                if stream.next_u64() >> 63 == 1 {
                    -mag
                } else {
                    mag
                }
            })
            .collect(),
    };
    Ok(DrivingSample {
        kappa,
        kind,
        seed,
        increments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kahan_sum(xs: &[f64]) -> f64 {
        let (mut s, mut c) = (0.0, 0.0);
        for &x in xs {
            let y = x - c;
            let t = s + y;
            c = (t - s) - y;
            s = t;
        }
        s
    }

    #[test]
    fn uniform_partition_basics() {
        let p = Partition::new(4, PartitionScheme::Uniform).unwrap();
        assert_eq!(p.times(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(p.deltas(), &[0.25; 4]);
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn single_step_partition() {
        let p = Partition::new(1, PartitionScheme::Uniform).unwrap();
        assert_eq!(p.times(), &[0.0, 1.0]);
        assert_eq!(p.deltas(), &[1.0]);
    }

    #[test]
    fn capacity_spaced_values() {
        let p = Partition::new(2, PartitionScheme::CapacitySpaced { nu: 0.75 }).unwrap();
        // t_1 = (1/2)^(3/2)
        assert!((p.times()[1] - 0.5f64.powf(1.5)).abs() < 1e-15);
        assert_eq!(p.times()[0], 0.0);
        assert_eq!(p.times()[2], 1.0);
    }

    #[test]
    fn partition_sums_to_one() {
        for (n, scheme) in [
            (1_000_000, PartitionScheme::Uniform),
            (100_000, PartitionScheme::CapacitySpaced { nu: 0.75 }),
            (9_999, PartitionScheme::CapacitySpaced { nu: 1.25 }),
        ] {
            let p = Partition::new(n, scheme).unwrap();
            assert!(
                (kahan_sum(p.deltas()) - 1.0).abs() < 1e-12,
                "{scheme:?} at n = {n}"
            );
            assert!(p.times().windows(2).all(|w| w[0] < w[1]));
            assert!(p.deltas().iter().all(|&d| d > 0.0));
            assert_eq!(*p.times().last().unwrap(), 1.0);
        }
    }

    #[test]
    fn partition_rejects_bad_input() {
        assert!(Partition::new(0, PartitionScheme::Uniform).is_err());
        assert!(Partition::new(5, PartitionScheme::CapacitySpaced { nu: 0.0 }).is_err());
        assert!(Partition::new(5, PartitionScheme::CapacitySpaced { nu: -1.0 }).is_err());
    }

    #[test]
    fn driving_is_deterministic_in_seed() {
        let p = Partition::new(500, PartitionScheme::Uniform).unwrap();
        let a = sample_driving(&p, 8.0 / 3.0, IncrementKind::Gaussian, 9).unwrap();
        let b = sample_driving(&p, 8.0 / 3.0, IncrementKind::Gaussian, 9).unwrap();
        let c = sample_driving(&p, 8.0 / 3.0, IncrementKind::Gaussian, 10).unwrap();
        assert_eq!(a.increments(), b.increments());
        assert_ne!(a.increments(), c.increments());
    }

    #[test]
    fn bernoulli_magnitudes_exact() {
        let p = Partition::new(1, PartitionScheme::Uniform).unwrap();
        let s = sample_driving(&p, 4.0, IncrementKind::Bernoulli, 1).unwrap();
        assert_eq!(s.increments()[0].abs(), 2.0);

        let p = Partition::new(4_096, PartitionScheme::CapacitySpaced { nu: 0.75 }).unwrap();
        let s = sample_driving(&p, 6.0, IncrementKind::Bernoulli, 77).unwrap();
        for (d, inc) in p.deltas().iter().zip(s.increments()) {
            assert_eq!(inc.abs(), (6.0 * d).sqrt());
        }
        // Both signs occur.
        assert!(s.increments().iter().any(|&x| x > 0.0));
        assert!(s.increments().iter().any(|&x| x < 0.0));
    }

    #[test]
    fn gaussian_normalized_variance() {
        let kappa = 8.0 / 3.0;
        let p = Partition::new(1_000_000, PartitionScheme::Uniform).unwrap();
        let s = sample_driving(&p, kappa, IncrementKind::Gaussian, 2024).unwrap();
        let normalized: Vec<f64> = s
            .increments()
            .iter()
            .zip(p.deltas())
            .map(|(&inc, &d)| inc / (kappa * d).sqrt())
            .collect();
        let n = normalized.len() as f64;
        let mean = normalized.iter().sum::<f64>() / n;
        let var = normalized.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn driving_rejects_bad_kappa() {
        let p = Partition::new(4, PartitionScheme::Uniform).unwrap();
        assert!(sample_driving(&p, 0.0, IncrementKind::Gaussian, 1).is_err());
        assert!(sample_driving(&p, -2.0, IncrementKind::Gaussian, 1).is_err());
        assert!(sample_driving(&p, f64::NAN, IncrementKind::Gaussian, 1).is_err());
    }
}

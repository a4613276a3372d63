//! Sample sets over a coordinate box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleSet {
    /// `per_axis` points per axis, endpoints included.
    UniformGrid { bounds: Vec<(f64, f64)>, per_axis: usize },
    RandomBox { bounds: Vec<(f64, f64)>, count: usize, seed: u64 },
}

impl SampleSet {
    pub fn grid(bounds: Vec<(f64, f64)>, per_axis: usize) -> Result<Self> {
        let s = SampleSet::UniformGrid { bounds, per_axis };
        s.validate()?;
        Ok(s)
    }

    pub fn random(bounds: Vec<(f64, f64)>, count: usize, seed: u64) -> Result<Self> {
        let s = SampleSet::RandomBox { bounds, count, seed };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        let n = match self {
            SampleSet::UniformGrid { per_axis, .. } => *per_axis,
            SampleSet::RandomBox { count, .. } => *count,
        };
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "points".into(),
                reason: "sample count must be at least 1".into(),
            });
        }
        for (a, b) in self.bounds() {
            if !a.is_finite() || !b.is_finite() || a > b {
                return Err(Error::InvalidParameter {
                    name: "bounds".into(),
                    reason: format!("range {a}..{b} is not a finite interval"),
                });
            }
        }
        if self.requested().is_none() {
            return Err(Error::InvalidParameter {
                name: "points".into(),
                reason: "grid has too many points".into(),
            });
        }
        Ok(())
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        match self {
            SampleSet::UniformGrid { bounds, .. } | SampleSet::RandomBox { bounds, .. } => bounds,
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds().len()
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            SampleSet::RandomBox { seed, .. } => Some(*seed),
            SampleSet::UniformGrid { .. } => None,
        }
    }

    fn requested(&self) -> Option<usize> {
        match self {
            SampleSet::UniformGrid { bounds, per_axis } => {
                bounds.iter().try_fold(1usize, |acc, _| acc.checked_mul(*per_axis))
            }
            SampleSet::RandomBox { count, .. } => Some(*count),
        }
    }

    pub fn len(&self) -> usize {
        self.requested().unwrap_or(usize::MAX)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn with_count(&self, count: usize) -> Self {
        match self {
            SampleSet::UniformGrid { bounds, .. } => SampleSet::UniformGrid {
                bounds: bounds.clone(),
                per_axis: count,
            },
            SampleSet::RandomBox { bounds, seed, .. } => SampleSet::RandomBox {
                bounds: bounds.clone(),
                count,
                seed: *seed,
            },
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            SampleSet::RandomBox { bounds, count, .. } => SampleSet::RandomBox {
                bounds: bounds.clone(),
                count: *count,
                seed,
            },
            grid => grid.clone(),
        }
    }

    /// All points in a deterministic order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match self {
            SampleSet::UniformGrid { bounds, per_axis } => {
                let n = bounds.len();
                let total = self.len();
                let axis = |(a, b): (f64, f64), k: usize| {
                    if *per_axis == 1 {
                        0.5 * (a + b)
                    } else {
                        a + (b - a) * k as f64 / (*per_axis - 1) as f64
                    }
                };
                (0..total)
                    .map(|mut flat| {
                        let mut p = vec![0.0; n];
                        for d in (0..n).rev() {
                            p[d] = axis(bounds[d], flat % per_axis);
                            flat /= per_axis;
                        }
                        p
                    })
                    .collect()
            }
            SampleSet::RandomBox { bounds, count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        bounds
                            .iter()
                            .map(|&(a, b)| if a == b { a } else { rng.gen_range(a..b) })
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_endpoints() {
        let s = SampleSet::grid(vec![(0.0, 1.0), (2.0, 3.0)], 3).unwrap();
        let p = s.points();
        assert_eq!(p.len(), 9);
        assert_eq!(p[0], vec![0.0, 2.0]);
        assert_eq!(p[1], vec![0.0, 2.5]);
        assert_eq!(p[8], vec![1.0, 3.0]);
    }

    #[test]
    fn random_is_seeded() {
        let s = SampleSet::random(vec![(-2.0, 2.0); 4], 10, 7).unwrap();
        assert_eq!(s.points(), s.points());
        assert_ne!(s.points(), s.with_seed(8).points());
        assert!(s.points().iter().flatten().all(|v| (-2.0..2.0).contains(v)));
    }

    #[test]
    fn rejects_empty_and_inverted() {
        assert!(SampleSet::random(vec![(0.0, 1.0)], 0, 1).is_err());
        assert!(SampleSet::grid(vec![(1.0, 0.0)], 2).is_err());
    }
}

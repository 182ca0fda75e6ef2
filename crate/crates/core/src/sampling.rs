//! Deterministic point sets, sampling regions and seed splitting.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Axis-aligned box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SamplingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::contract("box bounds must be nonempty and of equal length"));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(Error::contract("box bounds must be finite with lower ≤ upper"));
        }
        Ok(Self { lower, upper })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| l + (u - l) * rng.random::<f64>())
            .collect()
    }

    /// Tensor grid with `m = round(n^(1/p))` (at least 2) points per axis, endpoints included.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        let p = self.dim();
        let m = ((n as f64).powf(1.0 / p as f64).round() as usize).max(2);
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| linspace(*l, *u, m))
            .collect();
        let total = m.pow(p as u32);
        (0..total)
            .map(|mut idx| {
                axes.iter()
                    .map(|axis| {
                        let v = axis[idx % m];
                        idx /= m;
                        v
                    })
                    .collect()
            })
            .collect()
    }

    /// First `n` points of the Halton sequence mapped into the box.
    pub fn halton(&self, n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                self.lower
                    .iter()
                    .zip(&self.upper)
                    .enumerate()
                    .map(|(d, (l, u))| l + (u - l) * radical_inverse(i as u64 + 1, PRIMES[d % PRIMES.len()]))
                    .collect()
            })
            .collect()
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
                }
            })
            .collect(),
    }
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Van der Corput radical inverse of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Deterministic quasi-uniform points in the closed ball `B(center, r)`.
///
/// The sequence starts with the `2p` axis boundary points `center ± r·e_i`,
/// followed by Halton points of `[−1,1]^p` that fall inside the unit ball. The
/// first `n` points of the sequence are the same for every `n`, so any maximum
/// taken over them is monotone in `n`.
pub fn ball_points(center: &[f64], r: f64, n: usize) -> Vec<Vec<f64>> {
    let p = center.len();
    let mut out = Vec::with_capacity(n);
    for axis in 0..p {
        for sign in [1.0, -1.0] {
            if out.len() == n {
                return out;
            }
            let mut pt = center.to_vec();
            pt[axis] += sign * r;
            out.push(pt);
        }
    }
    let mut i = 1u64;
    while out.len() < n {
        let u: Vec<f64> = (0..p)
            .map(|d| 2.0 * radical_inverse(i, PRIMES[d % PRIMES.len()]) - 1.0)
            .collect();
        i += 1;
        if u.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            out.push(center.iter().zip(&u).map(|(c, x)| c + r * x).collect());
        }
    }
    out
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `index` in an ensemble.
///
/// `index ↦ master + γ·index` is injective for odd `γ` and the SplitMix64
/// finalizer is a bijection, so seeds within one ensemble never collide, and
/// adding trajectories leaves existing seeds unchanged.
pub fn split_seed(master: u64, index: u64) -> u64 {
    const GAMMA: u64 = 0xD1B5_4A32_D192_ED03;
    splitmix64(master.wrapping_add(index.wrapping_mul(GAMMA)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn split_seeds_are_distinct() {
        let seeds: HashSet<u64> = (0..100_000).map(|i| split_seed(42, i)).collect();
        assert_eq!(seeds.len(), 100_000);
    }

    #[test]
    fn ball_points_stay_in_ball_and_prefix() {
        let c = [1.0, -2.0, 0.5];
        let pts = ball_points(&c, 0.3, 200);
        assert_eq!(pts.len(), 200);
        for p in &pts {
            let d: f64 = p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(d <= 0.3 + 1e-15);
        }
        assert_eq!(&ball_points(&c, 0.3, 50)[..], &pts[..50]);
    }

    #[test]
    fn grid_covers_corners() {
        let b = SamplingBox::cube(2, -1.0, 1.0).unwrap();
        let g = b.grid(9);
        assert_eq!(g.len(), 9);
        assert!(g.contains(&vec![-1.0, -1.0]) && g.contains(&vec![1.0, 1.0]));
        assert_eq!(SamplingBox::cube(1, 0.0, 1.0).unwrap().grid(1000).len(), 1000);
    }

    #[test]
    fn radical_inverse_base2() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }
}

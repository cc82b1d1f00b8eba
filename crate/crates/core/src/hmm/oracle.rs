use super::filter::{Belief, Evidence};
use super::map::HmmModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest number of hidden paths the oracle agrees to enumerate.
pub const MAX_PATHS: u128 = 10_000_000;

/// Filtering posteriors by enumerating every hidden path.
///
/// The joint weight of a path prefix `x0..xk` is
/// `prior(x0) · Π T(x_{i-1}, x_i) · O(x_i, obs_i) · [x_i ≠ failed_i]`; summing
/// prefixes of length k by their last city gives the round-k posterior.
/// Zero-weight prefixes are pruned since every extension also has weight zero.
pub fn brute_force_posterior<T: Scalar>(
    model: &HmmModel,
    evidence: &[Evidence],
    prior: &Belief<T>,
) -> Result<Vec<Belief<T>>> {
    let n = model.len();
    if prior.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: prior.len(),
        });
    }
    let paths = (n as u128)
        .checked_pow(evidence.len() as u32)
        .unwrap_or(u128::MAX);
    if paths > MAX_PATHS {
        return Err(Error::TooLarge(paths));
    }
    let mut steps = Vec::with_capacity(evidence.len());
    for e in evidence {
        let region = model.region_index(&e.observation)?;
        let failed = e
            .failed_capture_at
            .as_deref()
            .map(|c| model.city_index(c))
            .transpose()?;
        steps.push((region, failed));
    }

    let t = model.transition::<T>();
    let o = model.observation::<T>();
    let mut mass = vec![vec![T::zero(); n]; evidence.len()];

    struct Walk<'a, T> {
        t: &'a [Vec<T>],
        o: &'a [Vec<T>],
        steps: &'a [(usize, Option<usize>)],
        mass: &'a mut [Vec<T>],
    }
    impl<T: Scalar> Walk<'_, T> {
        fn extend(&mut self, depth: usize, last: usize, weight: T) {
            if depth == self.steps.len() {
                return;
            }
            let (region, failed) = self.steps[depth];
            for next in 0..self.t.len() {
                if failed == Some(next) {
                    continue;
                }
                let w = weight.clone() * self.t[last][next].clone() * self.o[next][region].clone();
                if w.is_zero() {
                    continue;
                }
                self.mass[depth][next] = self.mass[depth][next].clone() + w.clone();
                self.extend(depth + 1, next, w);
            }
        }
    }

    let mut walk = Walk {
        t: &t,
        o: &o,
        steps: &steps,
        mass: &mut mass,
    };
    for (x0, p) in prior.probs().iter().enumerate() {
        if !p.is_zero() {
            walk.extend(0, x0, p.clone());
        }
    }

    mass.into_iter()
        .enumerate()
        .map(|(k, m)| {
            Belief::new(m).map_err(|_| {
                Error::ZeroLikelihood(format!("evidence up to round {} is impossible", k + 1))
            })
        })
        .collect()
}

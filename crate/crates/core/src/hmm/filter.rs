use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::map::HmmModel;
use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

/// A normalized probability vector over cities.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief<T> {
    probs: Vec<T>,
}

impl<T: Scalar> Belief<T> {
    /// Normalize non-negative weights into a belief.
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("belief over zero cities"));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::domain("belief weights must be non-negative"));
        }
        Self::normalized(weights).ok_or_else(|| Error::domain("belief weights sum to zero"))
    }

    fn normalized(weights: Vec<T>) -> Option<Self> {
        let total = sum(&weights);
        if total.is_zero() {
            return None;
        }
        Some(Belief {
            probs: weights.into_iter().map(|w| w / total.clone()).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        let p = T::one() / T::from_usize(n.max(1));
        Belief { probs: vec![p; n] }
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut probs = vec![T::zero(); n];
        probs[at] = T::one();
        Belief { probs }
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> &T {
        &self.probs[i]
    }

    /// First city with the largest probability.
    pub fn argmax(&self) -> usize {
        crate::mdp::argmax_first(&self.probs)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.probs.iter().map(Scalar::to_f64).collect()
    }

    /// `{"city": p, ...}` in model order.
    pub fn to_json(&self, model: &HmmModel) -> Value {
        let mut m = Map::new();
        for (c, p) in model.cities().iter().zip(&self.probs) {
            m.insert(c.clone(), Value::from(p.to_f64()));
        }
        Value::Object(m)
    }
}

fn check_dim<T>(b: &Belief<T>, model: &HmmModel) -> Result<()> {
    if b.probs.len() != model.len() {
        return Err(Error::DimensionMismatch {
            expected: model.len(),
            got: b.probs.len(),
        });
    }
    Ok(())
}

/// Time update: b'(j) = Σ_i b(i)·T(i,j).
pub fn predict<T: Scalar>(b: &Belief<T>, model: &HmmModel) -> Result<Belief<T>> {
    check_dim(b, model)?;
    let n = model.len();
    let mut out = vec![T::zero(); n];
    for (i, bi) in b.probs.iter().enumerate() {
        if bi.is_zero() {
            continue;
        }
        for (j, p) in model.transition_row(i).iter().enumerate() {
            if *p.numer() > 0 {
                out[j] = out[j].clone() + bi.clone() * T::from_prob(p);
            }
        }
    }
    Ok(Belief { probs: out })
}

/// Sensor update with the observed region.
pub fn correct<T: Scalar>(b: &Belief<T>, model: &HmmModel, obs: &str) -> Result<Belief<T>> {
    check_dim(b, model)?;
    let r = model.region_index(obs)?;
    let weighted = b
        .probs
        .iter()
        .zip(model.likelihood::<T>(r))
        .map(|(bi, l)| bi.clone() * l)
        .collect();
    Belief::normalized(weighted).ok_or_else(|| Error::ZeroLikelihood(obs.to_string()))
}

/// Condition on the spy not being at `city`.
pub fn exclude<T: Scalar>(b: &Belief<T>, model: &HmmModel, city: &str) -> Result<Belief<T>> {
    check_dim(b, model)?;
    let c = model.city_index(city)?;
    let mut probs = b.probs.clone();
    probs[c] = T::zero();
    Belief::normalized(probs)
        .ok_or_else(|| Error::ZeroLikelihood(format!("failed capture at {city}")))
}

/// One round of evidence as the hunter sees it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evidence {
    pub observation: String,
    #[serde(default)]
    pub failed_capture_at: Option<String>,
}

/// The hunter's record of a game, as stored in trace files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceTrace {
    pub evidence: Vec<Evidence>,
}

/// Predict, correct with the observation, then apply a failed capture.
pub fn filter_step<T: Scalar>(
    b: &Belief<T>,
    model: &HmmModel,
    obs: &str,
    failed_capture_at: Option<&str>,
) -> Result<Belief<T>> {
    let b = correct(&predict(b, model)?, model, obs)?;
    match failed_capture_at {
        Some(c) => exclude(&b, model, c),
        None => Ok(b),
    }
}

/// Per-round beliefs for a whole evidence sequence.
pub fn filter_trace<T: Scalar>(
    model: &HmmModel,
    prior: &Belief<T>,
    evidence: &[Evidence],
) -> Result<Vec<Belief<T>>> {
    let mut b = prior.clone();
    let mut out = Vec::with_capacity(evidence.len());
    for e in evidence {
        b = filter_step(&b, model, &e.observation, e.failed_capture_at.as_deref())?;
        out.push(b.clone());
    }
    Ok(out)
}

/// Half the L1 distance between two distributions.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

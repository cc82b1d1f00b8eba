//! Seeded dice.
//!
//! Every stochastic step in the lab (dice for exploration, card draws, spy
//! movement, particle propagation) pulls from a [`RandomSource`]. The
//! generator is ChaCha with 8 rounds, keyed by the 64-bit seed written
//! little-endian into the first eight key bytes (remaining key bytes zero),
//! nonce/stream 0. That derivation is part of the file contract and is named
//! by [`RNG_ALGORITHM`]; session logs record it and refuse to replay under a
//! different one.
//!
//! Sub-streams for parallel work use the same key with ChaCha stream id
//! `index + 1`, so worker `i` of master seed `s` is reproducible on its own.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Prob;

pub const RNG_ALGORITHM: &str = "chacha8-le64-v1";

/// Die sizes a classroom can actually roll.
pub const SUPPORTED_DICE: [u64; 6] = [4, 6, 8, 10, 12, 20];

#[derive(Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    draws: u64,
    rng: ChaCha8Rng,
}

impl fmt::Debug for RandomSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomSource")
            .field("seed", &self.seed)
            .field("stream", &self.stream)
            .field("draws", &self.draws)
            .finish()
    }
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent sub-stream `index` of a master seed.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self::with_stream(seed, index + 1)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        RandomSource {
            seed,
            stream,
            draws: 0,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of logical draws taken so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. Rejection keeps it unbiased; the rejection
    /// branch fires with probability below `n / 2^64`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        self.draws += 1;
        loop {
            let x = self.rng.next_u64();
            if x <= zone {
                return x % n;
            }
        }
    }

    /// Roll a fair die with `faces` faces.
    pub fn dice_roll(&mut self, faces: u32) -> Result<u32> {
        if faces == 0 {
            return Err(Error::domain("a die needs at least one face"));
        }
        Ok(self.below(faces as u64) as u32 + 1)
    }

    /// Draw one outcome with one logical roll of a die whose face count is the
    /// common denominator of the distribution.
    pub fn sample_categorical<'a, O>(&mut self, dist: &'a [(O, Prob)]) -> Result<&'a O> {
        let idx = self.sample_index(dist.iter().map(|(_, p)| *p))?;
        Ok(&dist[idx].0)
    }

    /// Index form of [`sample_categorical`](Self::sample_categorical).
    pub fn sample_index<I>(&mut self, probs: I) -> Result<usize>
    where
        I: IntoIterator<Item = Prob>,
        I::IntoIter: Clone,
    {
        let probs = probs.into_iter();
        let mut total = Prob::from_integer(0);
        let mut denom = 1u64;
        for p in probs.clone() {
            total += p;
            denom = denom.lcm(p.denom());
        }
        if total != Prob::from_integer(1) {
            return Err(Error::domain(format!(
                "distribution sums to {}/{}, not 1",
                total.numer(),
                total.denom()
            )));
        }
        let roll = self.below(denom);
        let mut cumulative = 0u64;
        let mut last_positive = 0;
        for (i, p) in probs.enumerate() {
            if *p.numer() == 0 {
                continue;
            }
            last_positive = i;
            cumulative += p.numer() * (denom / p.denom());
            if roll < cumulative {
                return Ok(i);
            }
        }
        Ok(last_positive)
    }
}

/// A probability written the way a die expresses it: `numerator` faces out of
/// `denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DiceProbability {
    pub numerator: u32,
    pub denominator: u32,
}

impl DiceProbability {
    pub fn new(numerator: u32, denominator: u32) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::validation(
                "probability denominator must be positive",
            ));
        }
        if numerator > denominator {
            return Err(Error::validation(format!(
                "probability {numerator}/{denominator} exceeds 1"
            )));
        }
        Ok(DiceProbability {
            numerator,
            denominator,
        })
    }

    /// `k` faces of a six-sided die.
    pub fn sixths(k: u32) -> Result<Self> {
        Self::new(k, 6)
    }

    pub fn to_prob(self) -> Prob {
        Prob::new(self.numerator as u64, self.denominator as u64)
    }

    pub fn reduced(self) -> Self {
        let p = self.to_prob();
        DiceProbability {
            numerator: *p.numer() as u32,
            denominator: *p.denom() as u32,
        }
    }

    pub fn is_dice_expressible(self) -> bool {
        is_dice_expressible(&self.to_prob())
    }
}

/// True when the reduced denominator divides a power (up to three rolls) of a
/// supported die size.
pub fn is_dice_expressible(p: &Prob) -> bool {
    let d = *p.denom();
    d == 1
        || SUPPORTED_DICE.iter().any(|&s| {
            let mut pow = 1u64;
            (0..3).any(|_| {
                pow *= s;
                pow.is_multiple_of(d)
            })
        })
}

impl fmt::Display for DiceProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

impl FromStr for DiceProbability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let parse = |x: &str| {
            x.parse::<u32>()
                .map_err(|_| Error::validation(format!("malformed probability `{s}`")))
        };
        DiceProbability::new(parse(n)?, parse(d)?)
    }
}

impl Serialize for DiceProbability {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DiceProbability {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Check that a set of probabilities sums to exactly one.
pub fn sums_to_one<'a>(probs: impl IntoIterator<Item = &'a Prob>) -> (bool, Prob) {
    let total: Prob = probs.into_iter().fold(Prob::from_integer(0), |a, p| a + p);
    (total == Prob::from_integer(1), total)
}

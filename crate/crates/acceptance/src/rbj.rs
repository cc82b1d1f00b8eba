//! Red and Black Jack solved by expectimax over hands, straight from the
//! rules, in exact arithmetic.

use std::collections::BTreeMap;

use ai_lab_core::mdp::rbj::count_terminal_name;
use ai_lab_core::mdp::{DeckConfig, JackpotRule};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

fn q(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite score")
}

fn frac(n: u32, d: u32) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandValue {
    pub hit: BigRational,
    pub stand: BigRational,
}

impl HandValue {
    pub fn value(&self) -> BigRational {
        self.hit.clone().max(self.stand.clone())
    }

    /// Actions achieving the value, in Hit, Stand order.
    pub fn best_actions(&self) -> Vec<&'static str> {
        let v = self.value();
        let mut out = Vec::new();
        if self.hit == v {
            out.push("Hit");
        }
        if self.stand == v {
            out.push("Stand");
        }
        out
    }
}

pub struct Expectimax<'d> {
    deck: &'d DeckConfig,
    memo: BTreeMap<(u32, u32), HandValue>,
}

impl<'d> Expectimax<'d> {
    pub fn new(deck: &'d DeckConfig) -> Self {
        Expectimax {
            deck,
            memo: BTreeMap::new(),
        }
    }

    fn score(&self, max_count: u32) -> BigRational {
        q(self.deck.scores.by_max_count[&max_count])
    }

    fn stand(&self, r: u32, b: u32) -> BigRational {
        let sd = &self.deck.stand_deck;
        let total = sd.red + sd.black;
        let mut v = BigRational::zero();
        if sd.red > 0 {
            v += frac(sd.red, total) * self.score((r + 1).max(b));
        }
        if sd.black > 0 {
            v += frac(sd.black, total) * self.score(r.max(b + 1));
        }
        v
    }

    /// Value of holding `(r, b)` after a successful hit.
    fn after_hit(&mut self, r: u32, b: u32) -> BigRational {
        let h = &self.deck.hit_deck;
        if self.deck.jackpot_rule == JackpotRule::AutoOnFullHand && r == h.red && b == h.black {
            return q(self.deck.scores.jackpot);
        }
        self.hand(r, b).value()
    }

    pub fn hand(&mut self, r: u32, b: u32) -> HandValue {
        if let Some(v) = self.memo.get(&(r, b)) {
            return v.clone();
        }
        let h = self.deck.hit_deck;
        let (red_left, black_left) = (h.red - r, h.black - b);
        let hit = if red_left + black_left == 0 {
            q(self.deck.scores.jackpot)
        } else {
            let total = red_left + black_left + h.face;
            let mut v = frac(h.face, total) * q(self.deck.scores.bust);
            if red_left > 0 {
                v += frac(red_left, total) * self.after_hit(r + 1, b);
            }
            if black_left > 0 {
                v += frac(black_left, total) * self.after_hit(r, b + 1);
            }
            v
        };
        let out = HandValue {
            hit,
            stand: self.stand(r, b),
        };
        self.memo.insert((r, b), out.clone());
        out
    }

    /// Every hand in which the player still chooses.
    pub fn decision_hands(&self) -> Vec<(u32, u32)> {
        let h = self.deck.hit_deck;
        let mut out = Vec::new();
        for r in 0..=h.red {
            for b in 0..=h.black {
                let full = r == h.red && b == h.black;
                if !(full && self.deck.jackpot_rule == JackpotRule::AutoOnFullHand) {
                    out.push((r, b));
                }
            }
        }
        out
    }
}

/// Analytic successor distribution of one move, keyed the way a game log
/// names positions: `"(r,b)"` or a terminal name.
pub fn successor_probs(deck: &DeckConfig, r: u32, b: u32, action: &str) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let h = deck.hit_deck;
    let mut add = |k: String, p: f64| *out.entry(k).or_insert(0.0) += p;
    match action {
        "Stand" => {
            let sd = deck.stand_deck;
            let total = (sd.red + sd.black) as f64;
            if sd.red > 0 {
                add(count_terminal_name((r + 1).max(b)), sd.red as f64 / total);
            }
            if sd.black > 0 {
                add(count_terminal_name(r.max(b + 1)), sd.black as f64 / total);
            }
        }
        _ => {
            let (red_left, black_left) = (h.red - r, h.black - b);
            if red_left + black_left == 0 {
                add("Jackpot".into(), 1.0);
            } else {
                let total = (red_left + black_left + h.face) as f64;
                add("Bust".into(), h.face as f64 / total);
                let name = |r: u32, b: u32| {
                    if deck.jackpot_rule == JackpotRule::AutoOnFullHand
                        && r == h.red
                        && b == h.black
                    {
                        "Jackpot".to_string()
                    } else {
                        format!("({r},{b})")
                    }
                };
                if red_left > 0 {
                    add(name(r + 1, b), red_left as f64 / total);
                }
                if black_left > 0 {
                    add(name(r, b + 1), black_left as f64 / total);
                }
            }
        }
    }
    out
}

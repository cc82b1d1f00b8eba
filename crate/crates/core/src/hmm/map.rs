use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{is_dice_expressible, sums_to_one, DiceProbability};
use crate::scalar::{prob_to_string, Prob, Scalar};

fn default_rounds() -> u32 {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CityDecl {
    pub id: String,
    pub region: String,
    pub neighbors: Vec<String>,
}

pub type DistDecl = BTreeMap<String, DiceProbability>;

/// Wire form of a Two Spies map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapBody {
    pub cities: Vec<CityDecl>,
    pub transition: BTreeMap<String, DistDecl>,
    pub observation: BTreeMap<String, DistDecl>,
    #[serde(default = "default_rounds")]
    pub rounds: u32,
    pub hunter_start: String,
    /// Neighbor lists are one-way when set; otherwise they must be symmetric.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub directed: bool,
}

/// A validated map.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    cities: Vec<CityDecl>,
    regions: Vec<String>,
    region_of: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    transition: Vec<Vec<Prob>>,
    observation: Vec<Vec<Prob>>,
    rounds: u32,
    hunter_start: usize,
    directed: bool,
}

fn dense_row(
    owner: &str,
    what: &str,
    decl: &DistDecl,
    index: impl Fn(&str) -> Option<usize>,
    width: usize,
) -> Result<Vec<Prob>> {
    let mut row = vec![Prob::from_integer(0); width];
    for (key, p) in decl {
        let j = index(key).ok_or_else(|| {
            Error::UnknownReference(format!("{what} row for `{owner}` names unknown `{key}`"))
        })?;
        row[j] = p.to_prob();
    }
    let (ok, total) = sums_to_one(&row);
    if !ok {
        return Err(Error::validation(format!(
            "{what} row for city `{owner}` sums to {}, not 1",
            prob_to_string(&total)
        )));
    }
    Ok(row)
}

impl MapSpec {
    pub fn from_body(body: &MapBody) -> Result<Self> {
        if body.cities.is_empty() {
            return Err(Error::validation("map has no cities"));
        }
        if body.rounds == 0 {
            return Err(Error::validation("rounds must be at least 1"));
        }
        let mut index = BTreeMap::new();
        for (i, c) in body.cities.iter().enumerate() {
            if index.insert(c.id.as_str(), i).is_some() {
                return Err(Error::validation(format!("duplicate city `{}`", c.id)));
            }
        }
        let city = |id: &str| index.get(id).copied();

        let mut regions: Vec<String> = Vec::new();
        let mut region_of = Vec::with_capacity(body.cities.len());
        for c in &body.cities {
            let r = match regions.iter().position(|r| *r == c.region) {
                Some(r) => r,
                None => {
                    regions.push(c.region.clone());
                    regions.len() - 1
                }
            };
            region_of.push(r);
        }

        let mut neighbors = Vec::with_capacity(body.cities.len());
        for c in &body.cities {
            let mut ns = Vec::with_capacity(c.neighbors.len());
            for n in &c.neighbors {
                let j = city(n).ok_or_else(|| {
                    Error::UnknownReference(format!("city `{}` lists unknown neighbor `{n}`", c.id))
                })?;
                if n == &c.id {
                    return Err(Error::validation(format!(
                        "city `{n}` lists itself as a neighbor"
                    )));
                }
                if ns.contains(&j) {
                    return Err(Error::validation(format!(
                        "city `{}` lists `{n}` twice",
                        c.id
                    )));
                }
                ns.push(j);
            }
            neighbors.push(ns);
        }
        if !body.directed {
            for (i, ns) in neighbors.iter().enumerate() {
                for &j in ns {
                    if !neighbors[j].contains(&i) {
                        return Err(Error::validation(format!(
                            "adjacency is not symmetric: `{}` lists `{}` but not the reverse",
                            body.cities[i].id, body.cities[j].id
                        )));
                    }
                }
            }
        }

        for key in body.transition.keys().chain(body.observation.keys()) {
            if city(key).is_none() {
                return Err(Error::UnknownReference(format!(
                    "distribution given for unknown city `{key}`"
                )));
            }
        }
        let n = body.cities.len();
        let mut transition = Vec::with_capacity(n);
        let mut observation = Vec::with_capacity(n);
        for (i, c) in body.cities.iter().enumerate() {
            let decl = body.transition.get(&c.id).ok_or_else(|| {
                Error::validation(format!("transition row for city `{}` is missing", c.id))
            })?;
            let row = dense_row(&c.id, "transition", decl, city, n)?;
            for (j, p) in row.iter().enumerate() {
                if *p.numer() > 0 && j != i && !neighbors[i].contains(&j) {
                    return Err(Error::validation(format!(
                        "transition row for city `{}` moves to non-neighbor `{}`",
                        c.id, body.cities[j].id
                    )));
                }
            }
            transition.push(row);

            let decl = body.observation.get(&c.id).ok_or_else(|| {
                Error::validation(format!("observation row for city `{}` is missing", c.id))
            })?;
            let region_index = |r: &str| regions.iter().position(|x| x == r);
            observation.push(dense_row(
                &c.id,
                "observation",
                decl,
                region_index,
                regions.len(),
            )?);
        }

        let hunter_start = city(&body.hunter_start).ok_or_else(|| {
            Error::UnknownReference(format!(
                "hunter_start `{}` is not a city",
                body.hunter_start
            ))
        })?;

        Ok(MapSpec {
            cities: body.cities.clone(),
            regions,
            region_of,
            neighbors,
            transition,
            observation,
            rounds: body.rounds,
            hunter_start,
            directed: body.directed,
        })
    }

    /// Canonical body with every probability in lowest terms.
    pub fn to_body(&self) -> MapBody {
        let dist = |row: &[Prob], names: &dyn Fn(usize) -> String| -> DistDecl {
            row.iter()
                .enumerate()
                .filter(|(_, p)| *p.numer() > 0)
                .map(|(j, p)| {
                    let d = DiceProbability::new(*p.numer() as u32, *p.denom() as u32)
                        .expect("probability");
                    (names(j), d)
                })
                .collect()
        };
        let city_name = |j: usize| self.cities[j].id.clone();
        let region_name = |j: usize| self.regions[j].clone();
        MapBody {
            cities: self.cities.clone(),
            transition: self
                .cities
                .iter()
                .zip(&self.transition)
                .map(|(c, row)| (c.id.clone(), dist(row, &city_name)))
                .collect(),
            observation: self
                .cities
                .iter()
                .zip(&self.observation)
                .map(|(c, row)| (c.id.clone(), dist(row, &region_name)))
                .collect(),
            rounds: self.rounds,
            hunter_start: self.cities[self.hunter_start].id.clone(),
            directed: self.directed,
        }
    }

    pub fn len(&self) -> usize {
        self.cities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cities.is_empty()
    }

    pub fn city_id(&self, i: usize) -> &str {
        &self.cities[i].id
    }

    pub fn city_ids(&self) -> impl Iterator<Item = &str> {
        self.cities.iter().map(|c| c.id.as_str())
    }

    pub fn city_index(&self, id: &str) -> Result<usize> {
        self.cities
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::UnknownState(id.to_string()))
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn region_of(&self, city: usize) -> &str {
        &self.regions[self.region_of[city]]
    }

    pub fn neighbors(&self, city: usize) -> &[usize] {
        &self.neighbors[city]
    }

    pub fn is_adjacent(&self, from: usize, to: usize) -> bool {
        self.neighbors[from].contains(&to)
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn hunter_start(&self) -> usize {
        self.hunter_start
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Probabilities a die cannot express, as `"transition row X: p"` lines.
    pub fn dice_warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, c) in self.cities.iter().enumerate() {
            for (what, row) in [
                ("transition", &self.transition[i]),
                ("observation", &self.observation[i]),
            ] {
                for p in row.iter().filter(|p| !is_dice_expressible(p)) {
                    out.push(format!(
                        "{what} row for city `{}` uses {}, which no supported die expresses",
                        c.id,
                        prob_to_string(p)
                    ));
                }
            }
        }
        out
    }

    /// Hop distances from `from` over the neighbor graph.
    pub fn hops_from(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        dist[from] = Some(0);
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(c) = queue.pop_front() {
            let d = dist[c].expect("queued city has a distance");
            for &n in &self.neighbors[c] {
                if dist[n].is_none() {
                    dist[n] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }
}

/// Row-stochastic transition matrix and per-city observation model, kept as
/// exact ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    cities: Vec<String>,
    regions: Vec<String>,
    t: Vec<Vec<Prob>>,
    o: Vec<Vec<Prob>>,
}

pub fn build_hmm(map: &MapSpec) -> HmmModel {
    HmmModel {
        cities: map.cities.iter().map(|c| c.id.clone()).collect(),
        regions: map.regions.clone(),
        t: map.transition.clone(),
        o: map.observation.clone(),
    }
}

impl HmmModel {
    /// Build directly from matrices; `t` is N×N and `o` is N×R.
    pub fn new(
        cities: Vec<String>,
        regions: Vec<String>,
        t: Vec<Vec<Prob>>,
        o: Vec<Vec<Prob>>,
    ) -> Result<Self> {
        let n = cities.len();
        if n == 0 {
            return Err(Error::validation("model has no cities"));
        }
        if t.len() != n || o.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if t.len() != n { t.len() } else { o.len() },
            });
        }
        let unique: BTreeSet<&String> = regions.iter().collect();
        if unique.len() != regions.len() {
            return Err(Error::validation("duplicate region id"));
        }
        for (i, (trow, orow)) in t.iter().zip(&o).enumerate() {
            if trow.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: trow.len(),
                });
            }
            if orow.len() != regions.len() {
                return Err(Error::DimensionMismatch {
                    expected: regions.len(),
                    got: orow.len(),
                });
            }
            for (what, row) in [("transition", trow), ("observation", orow)] {
                let (ok, total) = sums_to_one(row);
                if !ok {
                    return Err(Error::validation(format!(
                        "{what} row for city `{}` sums to {}, not 1",
                        cities[i],
                        prob_to_string(&total)
                    )));
                }
            }
        }
        Ok(HmmModel {
            cities,
            regions,
            t,
            o,
        })
    }

    pub fn len(&self) -> usize {
        self.cities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cities.is_empty()
    }

    pub fn cities(&self) -> &[String] {
        &self.cities
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn city_index(&self, id: &str) -> Result<usize> {
        self.cities
            .iter()
            .position(|c| c == id)
            .ok_or_else(|| Error::UnknownState(id.to_string()))
    }

    pub fn region_index(&self, id: &str) -> Result<usize> {
        self.regions
            .iter()
            .position(|r| r == id)
            .ok_or_else(|| Error::UnknownReference(format!("region `{id}`")))
    }

    pub fn transition_row(&self, i: usize) -> &[Prob] {
        &self.t[i]
    }

    pub fn observation_row(&self, i: usize) -> &[Prob] {
        &self.o[i]
    }

    pub fn transition<T: Scalar>(&self) -> Vec<Vec<T>> {
        self.t
            .iter()
            .map(|row| row.iter().map(T::from_prob).collect())
            .collect()
    }

    pub fn observation<T: Scalar>(&self) -> Vec<Vec<T>> {
        self.o
            .iter()
            .map(|row| row.iter().map(T::from_prob).collect())
            .collect()
    }

    /// P(region | city) for every city.
    pub fn likelihood<T: Scalar>(&self, region: usize) -> Vec<T> {
        self.o
            .iter()
            .map(|row| T::from_prob(&row[region]))
            .collect()
    }
}

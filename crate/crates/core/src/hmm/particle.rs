use super::filter::Evidence;
use super::map::HmmModel;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// `count` particles placed uniformly at random over the cities.
pub fn init_particles(model: &HmmModel, count: usize, rs: &mut RandomSource) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::domain(
            "a particle filter needs at least one particle",
        ));
    }
    Ok((0..count)
        .map(|_| rs.below(model.len() as u64) as usize)
        .collect())
}

/// Move every particle through the transition model, weight by the
/// observation likelihood (zero at a failed capture), and resample
/// systematically back to the same count.
pub fn particle_filter_step(
    particles: &[usize],
    model: &HmmModel,
    obs: &str,
    failed_capture_at: Option<&str>,
    rs: &mut RandomSource,
) -> Result<Vec<usize>> {
    if particles.is_empty() {
        return Err(Error::domain(
            "a particle filter needs at least one particle",
        ));
    }
    let region = model.region_index(obs)?;
    let failed = failed_capture_at.map(|c| model.city_index(c)).transpose()?;
    let mut moved = Vec::with_capacity(particles.len());
    for &p in particles {
        if p >= model.len() {
            return Err(Error::DimensionMismatch {
                expected: model.len(),
                got: p + 1,
            });
        }
        moved.push(rs.sample_index(model.transition_row(p).iter().copied())?);
    }
    let weights: Vec<f64> = moved
        .iter()
        .map(|&c| {
            if failed == Some(c) {
                0.0
            } else {
                let l = model.observation_row(c)[region];
                *l.numer() as f64 / *l.denom() as f64
            }
        })
        .collect();
    systematic_resample(&moved, &weights, rs)
}

/// Low-variance resampling with a single uniform offset.
pub fn systematic_resample(
    items: &[usize],
    weights: &[f64],
    rs: &mut RandomSource,
) -> Result<Vec<usize>> {
    if items.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: items.len(),
            got: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::Degeneracy);
    }
    let n = items.len();
    let last_positive = weights
        .iter()
        .rposition(|w| *w > 0.0)
        .expect("positive total");
    let step = total / n as f64;
    let mut pointer = rs.next_unit() * step;
    let mut out = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut i = 0;
    for _ in 0..n {
        while pointer >= cumulative && i < last_positive {
            i += 1;
            cumulative += weights[i];
        }
        out.push(items[i]);
        pointer += step;
    }
    Ok(out)
}

/// Fraction of particles in each city.
pub fn particle_histogram(particles: &[usize], cities: usize) -> Vec<f64> {
    let mut h = vec![0.0; cities];
    for &p in particles {
        h[p] += 1.0;
    }
    let n = particles.len().max(1) as f64;
    h.iter_mut().for_each(|x| *x /= n);
    h
}

/// Run the particle filter over a whole evidence sequence and return the
/// per-round histograms.
pub fn run_particle_filter(
    model: &HmmModel,
    evidence: &[Evidence],
    count: usize,
    rs: &mut RandomSource,
) -> Result<Vec<Vec<f64>>> {
    let mut particles = init_particles(model, count, rs)?;
    let mut out = Vec::with_capacity(evidence.len());
    for e in evidence {
        particles = particle_filter_step(
            &particles,
            model,
            &e.observation,
            e.failed_capture_at.as_deref(),
            rs,
        )?;
        out.push(particle_histogram(&particles, model.len()));
    }
    Ok(out)
}

//! Seeded random search for high-distortion instances.
//!
//! Sample `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`, so a
//! run is reproducible and independent of how samples are spread over threads.

use num_traits::One;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exactnum::QuadraticScalar as Q;
use crate::instances::{Distortion, MetricInstance, Point, TieDirectives};
use crate::protocol::{run_protocol, MatchingPolicy, Params, ProtocolError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Integer coordinates in `[-10, 10]`, integer masses in `[1, 10]`.
    Uniform,
    /// Small perturbations of the two-candidate instance with `A = -1`, `B = 1`
    /// and voters at `0, 0, 1`.
    NearTight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Embedding {
    Line,
    Plane,
    /// Even samples on the line, odd samples in the plane.
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub candidates: usize,
    pub samples: usize,
    pub seed: u64,
    pub params: Params,
    pub sampler: Sampler,
    pub embedding: Embedding,
    pub max_voters: usize,
}

impl MonteCarloConfig {
    pub fn new(candidates: usize, samples: usize, seed: u64, params: Params) -> Self {
        Self { candidates, samples, seed, params, sampler: Sampler::Uniform, embedding: Embedding::Mixed, max_voters: 6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub samples: usize,
    pub max: Distortion,
    pub argmax_sample: usize,
    pub argmax_instance: MetricInstance,
    pub argmax_winner: usize,
}

fn coord(rng: &mut ChaCha8Rng) -> Q {
    Q::int(rng.gen_range(-10..=10))
}

fn point(rng: &mut ChaCha8Rng, plane: bool) -> Point {
    if plane {
        Point::Plane(coord(rng), coord(rng))
    } else {
        Point::Line(coord(rng))
    }
}

/// Draws sample `index` of the configured distribution.
pub fn sample_instance(cfg: &MonteCarloConfig, index: usize) -> MetricInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    match cfg.sampler {
        Sampler::Uniform => {
            let plane = match cfg.embedding {
                Embedding::Line => false,
                Embedding::Plane => true,
                Embedding::Mixed => index % 2 == 1,
            };
            let cands: Vec<Point> = (0..cfg.candidates).map(|_| point(&mut rng, plane)).collect();
            let n = rng.gen_range(1..=cfg.max_voters.max(1));
            let voters = (0..n)
                .map(|_| (None, Q::int(rng.gen_range(1..=10)), point(&mut rng, plane)))
                .collect();
            MetricInstance::from_points(crate::instances::default_names(cfg.candidates), cands, voters)
                .expect("sampled instances are well formed")
        }
        Sampler::NearTight => {
            let eps = |rng: &mut ChaCha8Rng| Q::ratio(rng.gen_range(1..=20), 1000);
            let jitter = |rng: &mut ChaCha8Rng| Q::ratio(rng.gen_range(-20..=20), 1000);
            let third = Q::ratio(1, 3);
            let voters = [
                (&third + &jitter(&mut rng), -eps(&mut rng)),
                (&third + &jitter(&mut rng), -eps(&mut rng)),
                (&third + &jitter(&mut rng), Q::one() + jitter(&mut rng)),
            ];
            MetricInstance::on_line(&[Q::int(-1), Q::int(1)], &voters).expect("sampled instances are well formed")
        }
    }
}

fn exceeds(a: &Distortion, b: &Distortion) -> bool {
    match (a, b) {
        (Distortion::Unbounded, Distortion::Unbounded) => false,
        (Distortion::Unbounded, _) => true,
        (_, Distortion::Unbounded) => false,
        (Distortion::Ratio(x), Distortion::Ratio(y)) => x > y,
    }
}

/// Runs the protocol on every sample and keeps the largest distortion
/// (first sample on ties).
pub fn run_montecarlo(cfg: &MonteCarloConfig) -> Result<MonteCarloSummary, ProtocolError> {
    let indices: Vec<usize> = (0..cfg.samples).collect();
    let ties = TieDirectives::new();
    let results = crate::par_map(&indices, |&i| {
        let inst = sample_instance(cfg, i);
        run_protocol(&inst, &ties, &cfg.params, &MatchingPolicy::ByOrder).map(|r| (r.distortion, r.winner))
    });
    let mut best: Option<(usize, Distortion, usize)> = None;
    for (i, res) in results.into_iter().enumerate() {
        let (d, winner) = res?;
        if best.as_ref().map_or(true, |b| exceeds(&d, &b.1)) {
            best = Some((i, d, winner));
        }
    }
    let (i, max, winner) = best.ok_or_else(|| ProtocolError::Domain("no samples requested".into()))?;
    Ok(MonteCarloSummary {
        samples: cfg.samples,
        max,
        argmax_sample: i,
        argmax_instance: sample_instance(cfg, i),
        argmax_winner: winner,
    })
}

//! Trial-by-trial simulation of the discrimination game.
//!
//! Works with explicit state vectors rather than density matrices. A depolarized
//! preparation is the fully mixed state, which is sampled as an equal mixture of
//! the first-stage basis vectors `|φ₁⟩` and `|φ₁⊥⟩`. Each stage samples
//! its outcome by the Born rule and collapses the vector, and each binary
//! record is flipped with probability `p_m` before Bob acts on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::StatePair;
use crate::cascade::{CascadeParams, NoiseModel, OutcomeProbabilities};

pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha 0.3), seed_from_u64(seed), stream = worker index";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub pair: StatePair,
    pub params: CascadeParams,
    pub noise: NoiseModel,
    pub trials: u64,
    pub seed: u64,
    /// Number of independent RNG streams the trials are split across.
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub n_correct: u64,
    pub n_wrong: u64,
    pub n_decline: u64,
}

impl Counts {
    fn merge(self, o: Counts) -> Counts {
        Counts {
            n_correct: self.n_correct + o.n_correct,
            n_wrong: self.n_wrong + o.n_wrong,
            n_decline: self.n_decline + o.n_decline,
        }
    }

    pub fn total(&self) -> u64 {
        self.n_correct + self.n_wrong + self.n_decline
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialTally {
    pub counts: Counts,
    pub estimates: OutcomeProbabilities,
    /// Binomial standard errors `√(p(1−p)/N)` for `(p_c, p_w, p_d)`.
    pub std_errors: [f64; 3],
}

impl TrialTally {
    fn from_counts(counts: Counts) -> Self {
        let n = counts.total() as f64;
        let estimates = OutcomeProbabilities {
            p_c: counts.n_correct as f64 / n,
            p_w: counts.n_wrong as f64 / n,
            p_d: counts.n_decline as f64 / n,
        };
        let se = |p: f64| (p * (1.0 - p) / n).sqrt();
        TrialTally {
            counts,
            estimates,
            std_errors: [se(estimates.p_c), se(estimates.p_w), se(estimates.p_d)],
        }
    }

    /// z-scores of the estimates against `reference`. A zero standard error
    /// gives 0 when the estimate matches exactly and infinity otherwise.
    pub fn z_scores(&self, reference: &OutcomeProbabilities) -> [f64; 3] {
        let est = self.estimates.as_array();
        let r = reference.as_array();
        let n = self.counts.total() as f64;
        std::array::from_fn(|i| {
            let diff = est[i] - r[i];
            // standard error under the reference distribution, so that a
            // zero-count estimate of a rare outcome still gets a finite score
            let se = (r[i] * (1.0 - r[i]) / n).sqrt().max(self.std_errors[i]);
            if diff.abs() <= 1e-15 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                diff / se
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Declared {
    Psi0,
    Psi1,
    Decline,
}

type Vec2 = [f64; 2];

fn unit(angle: f64) -> Vec2 {
    [angle.cos(), angle.sin()]
}

fn dot(x: &Vec2, y: &Vec2) -> f64 {
    x[0] * y[0] + x[1] * y[1]
}

fn normalize(x: Vec2) -> Vec2 {
    let n = x[0].hypot(x[1]);
    [x[0] / n, x[1] / n]
}

/// Precomputed measurement directions of one cascade.
struct Cascade {
    s: f64,
    /// `√(1 − s²)`, the amplitude kept along `|φ₁⟩` on the continue branch.
    keep: f64,
    first: Vec2,
    first_perp: Vec2,
    second: Vec2,
    p_m: f64,
}

impl Cascade {
    fn new(params: &CascadeParams, p_m: f64) -> Self {
        Cascade {
            s: params.s,
            keep: (1.0 - params.s * params.s).max(0.0).sqrt(),
            first: unit(params.phi1),
            first_perp: unit(params.phi1 + std::f64::consts::FRAC_PI_2),
            second: unit(params.phi2),
            p_m,
        }
    }

    fn flip<R: Rng>(&self, rng: &mut R, bit: bool) -> bool {
        if self.p_m > 0.0 && rng.gen::<f64>() < self.p_m {
            !bit
        } else {
            bit
        }
    }

    fn run<R: Rng>(&self, rng: &mut R, psi: Vec2) -> Declared {
        // stage 1: Kraus s|φ₁⟩⟨φ₁| fires with probability s²⟨φ₁|ψ⟩²
        let along = dot(&self.first, &psi);
        let across = dot(&self.first_perp, &psi);
        let fired = rng.gen::<f64>() < self.s * self.s * along * along;
        let post = if fired {
            self.first
        } else {
            // √(1 − s²P₁) keeps the perpendicular part and shrinks the parallel one
            let v = [
                across * self.first_perp[0] + self.keep * along * self.first[0],
                across * self.first_perp[1] + self.keep * along * self.first[1],
            ];
            normalize(v)
        };
        if self.flip(rng, fired) {
            return Declared::Psi0;
        }

        // stage 2: projective on |φ₂⟩, applied to the true post-measurement state
        let amp = dot(&self.second, &post);
        let hit = rng.gen::<f64>() < amp * amp;
        if self.flip(rng, hit) {
            Declared::Psi1
        } else {
            Declared::Decline
        }
    }
}

fn run_worker(config: &TrialConfig, worker: usize, trials: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(worker as u64);
    let cascade = Cascade::new(&config.params, config.noise.p_m);
    let states = [unit(0.0), unit(config.pair.theta())];
    let mut counts = Counts::default();
    for _ in 0..trials {
        let prepared = usize::from(rng.gen::<bool>());
        let psi = if config.noise.p_dp > 0.0 && rng.gen::<f64>() < config.noise.p_dp {
            if rng.gen::<bool>() {
                cascade.first
            } else {
                cascade.first_perp
            }
        } else {
            states[prepared]
        };
        match (cascade.run(&mut rng, psi), prepared) {
            (Declared::Decline, _) => counts.n_decline += 1,
            (Declared::Psi0, 0) | (Declared::Psi1, 1) => counts.n_correct += 1,
            _ => counts.n_wrong += 1,
        }
    }
    counts
}

/// Runs `config.trials` games split evenly across `config.workers` streams.
pub fn simulate(config: &TrialConfig) -> TrialTally {
    let workers = config.workers.max(1);
    let base = config.trials / workers as u64;
    let extra = config.trials % workers as u64;
    let counts = (0..workers)
        .into_par_iter()
        .map(|w| {
            let n = base + u64::from((w as u64) < extra);
            run_worker(config, w, n)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Counts::default(), Counts::merge);
    TrialTally::from_counts(counts)
}

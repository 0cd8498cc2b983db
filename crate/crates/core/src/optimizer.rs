//! Numerical minimization of the cascade cost and the searches built on it.
//!
//! The cascade is optimized over unconstrained coordinates `(u₁, u₂, u₃)` with
//! `φ₁ = u₁`, `φ₂ = u₂` and `s = (1 + tanh u₃)/2`. Every run starts from the
//! two projective embeddings, a symmetric midpoint and a fixed number of
//! seeded random points; the exact `s = 1` embeddings are also evaluated
//! directly so boundary optima are never missed.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    cost_strategy_a, cost_strategy_b, k_opt, mh_bound, CostMode, CostWeights, StatePair,
};
use crate::cascade::{cost, probabilities, CascadeParams, NoiseModel};
use crate::error::Result;
use crate::qmath::wrap_half_pi;

/// Simplex coefficients and stopping rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadOptions {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Stop once `f_worst − f_best` is below this...
    pub value_tol: f64,
    /// ...and every vertex is within this distance (max-norm) of the best one.
    pub point_tol: f64,
    pub max_evaluations: usize,
    /// Hitting the evaluation cap with a value spread above this is a failure.
    pub failure_spread: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            value_tol: 1e-12,
            point_tol: 1e-10,
            max_evaluations: 100_000,
            failure_spread: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOutcome<const N: usize> {
    pub point: [f64; N],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Regular axis-aligned simplex: `start` plus one vertex per coordinate step.
pub fn simplex_around<const N: usize>(start: [f64; N], steps: [f64; N]) -> Vec<[f64; N]> {
    let mut out = Vec::with_capacity(N + 1);
    out.push(start);
    for i in 0..N {
        let mut v = start;
        v[i] += steps[i];
        out.push(v);
    }
    out
}

fn lerp<const N: usize>(from: &[f64; N], to: &[f64; N], t: f64) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = from[i] + t * (to[i] - from[i]);
    }
    out
}

/// Downhill simplex minimization (Lagarias et al. acceptance rules).
///
/// `simplex` must hold `N + 1` vertices.
pub fn nelder_mead<const N: usize, F>(
    mut objective: F,
    simplex: Vec<[f64; N]>,
    opts: &NelderMeadOptions,
) -> NelderMeadOutcome<N>
where
    F: FnMut(&[f64; N]) -> f64,
{
    assert_eq!(simplex.len(), N + 1, "simplex needs N + 1 vertices");
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64; N], evaluations: &mut usize| {
        *evaluations += 1;
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut verts: Vec<([f64; N], f64)> = simplex
        .into_iter()
        .map(|x| {
            let v = eval(&x, &mut evaluations);
            (x, v)
        })
        .collect();

    loop {
        // stable sort keeps the order of ties deterministic
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = verts[0].1;
        let worst = verts[N].1;
        let value_spread = worst - best;
        let point_spread = verts[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(verts[0].0.iter()).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);

        if value_spread <= opts.value_tol && point_spread <= opts.point_tol {
            return NelderMeadOutcome {
                point: verts[0].0,
                value: best,
                evaluations,
                converged: true,
            };
        }
        if evaluations >= opts.max_evaluations {
            return NelderMeadOutcome {
                point: verts[0].0,
                value: best,
                evaluations,
                converged: value_spread <= opts.failure_spread,
            };
        }

        let mut centroid = [0.0; N];
        for (x, _) in &verts[..N] {
            for i in 0..N {
                centroid[i] += x[i] / N as f64;
            }
        }
        let worst_x = verts[N].0;
        let second_worst = verts[N - 1].1;

        let reflected = lerp(&centroid, &worst_x, -opts.reflection);
        let f_r = eval(&reflected, &mut evaluations);

        if f_r < best {
            let expanded = lerp(&centroid, &worst_x, -opts.reflection * opts.expansion);
            let f_e = eval(&expanded, &mut evaluations);
            verts[N] = if f_e < f_r {
                (expanded, f_e)
            } else {
                (reflected, f_r)
            };
            continue;
        }
        if f_r < second_worst {
            verts[N] = (reflected, f_r);
            continue;
        }

        let accepted = if f_r < worst {
            let outside = lerp(&centroid, &worst_x, -opts.reflection * opts.contraction);
            let f_c = eval(&outside, &mut evaluations);
            (f_c <= f_r).then_some((outside, f_c))
        } else {
            let inside = lerp(&centroid, &worst_x, opts.contraction);
            let f_c = eval(&inside, &mut evaluations);
            (f_c < worst).then_some((inside, f_c))
        };
        match accepted {
            Some(v) => verts[N] = v,
            None => {
                let anchor = verts[0].0;
                for vert in verts.iter_mut().skip(1) {
                    let x = lerp(&anchor, &vert.0, opts.shrink);
                    *vert = (x, eval(&x, &mut evaluations));
                }
            }
        }
    }
}

/// Seeding and restart policy for [`minimize_cost`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub random_starts: usize,
    pub nelder_mead: NelderMeadOptions,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 0,
            random_starts: 16,
            nelder_mead: NelderMeadOptions::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        OptimizerConfig { seed, ..*self }
    }

    /// Independent seed for grid task `index`.
    pub fn for_task(&self, index: u64) -> Self {
        self.with_seed(task_seed(self.seed, index))
    }
}

/// SplitMix64 finalizer over `(seed, index)`.
pub fn task_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_params: CascadeParams,
    pub best_cost: f64,
    pub restarts_agreeing: usize,
    pub evaluations: usize,
    /// False when the best run stopped on the evaluation cap with a wide simplex.
    pub converged: bool,
}

/// Start point that maps to `s = 1 − 2.5e-3`; close to projective without
/// sitting on the flat part of `tanh`.
const NEAR_PROJECTIVE_U3: f64 = 3.0;
const AGREEMENT_TOL: f64 = 1e-9;
const SIMPLEX_STEPS: [f64; 3] = [0.3, 0.3, 1.0];

fn strength(u3: f64) -> f64 {
    (0.5 * (1.0 + u3.tanh())).clamp(0.0, 1.0)
}

fn to_params(u: &[f64; 3]) -> CascadeParams {
    CascadeParams {
        phi1: u[0],
        phi2: u[1],
        s: strength(u[2]),
    }
}

fn canonical(params: CascadeParams) -> CascadeParams {
    CascadeParams {
        phi1: wrap_half_pi(params.phi1),
        phi2: wrap_half_pi(params.phi2),
        s: params.s.clamp(0.0, 1.0),
    }
}

/// Cost of a cascade under `noise`, in the objective of `weights`.
pub fn cascade_cost(
    pair: &StatePair,
    weights: &CostWeights,
    noise: &NoiseModel,
    params: &CascadeParams,
) -> f64 {
    cost(&probabilities(pair, params, noise), weights)
}

/// Multi-start minimization of the (possibly noisy) cascade cost.
pub fn minimize_cost(
    pair: &StatePair,
    weights: &CostWeights,
    noise: &NoiseModel,
    config: &OptimizerConfig,
) -> OptimizationResult {
    let objective = |u: &[f64; 3]| cascade_cost(pair, weights, noise, &to_params(u));

    let (_, angle_a) = cost_strategy_a(pair, weights);
    let (_, angle_b) = cost_strategy_b(pair, weights);
    let theta = pair.theta();

    let mut starts: Vec<[f64; 3]> = vec![
        [angle_a, angle_a + FRAC_PI_2, NEAR_PROJECTIVE_U3],
        [angle_b, angle_b, NEAR_PROJECTIVE_U3],
        [theta / 2.0, theta / 2.0 + FRAC_PI_2, 0.0],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.random_starts {
        starts.push([
            rng.gen_range(-FRAC_PI_2..FRAC_PI_2),
            rng.gen_range(-FRAC_PI_2..FRAC_PI_2),
            rng.gen_range(-3.0..3.0),
        ]);
    }

    let mut evaluations = 0;
    let mut runs: Vec<(CascadeParams, f64, bool)> = starts
        .into_iter()
        .map(|start| {
            let out = nelder_mead(
                objective,
                simplex_around(start, SIMPLEX_STEPS),
                &config.nelder_mead,
            );
            evaluations += out.evaluations;
            (to_params(&out.point), out.value, out.converged)
        })
        .collect();

    // exact boundary points the tanh transform can only approach
    for params in [
        CascadeParams::guess_both(angle_a),
        CascadeParams::guess_one(angle_b),
    ] {
        evaluations += 1;
        runs.push((params, cascade_cost(pair, weights, noise, &params), true));
    }

    let (best_params, best_cost, converged) = runs
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least the projective embeddings are evaluated");
    let restarts_agreeing = runs
        .iter()
        .filter(|r| r.1 - best_cost <= AGREEMENT_TOL)
        .count();

    OptimizationResult {
        best_params: canonical(best_params),
        best_cost,
        restarts_agreeing,
        evaluations,
        converged,
    }
}

/// One point of a sweep: the ideal modified Helstrom bound against the
/// (possibly noisy) optimal cascade, both in the objective of `mode`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationRecord {
    pub theta: f64,
    pub k: f64,
    pub c_mh: f64,
    pub c_min: f64,
    pub delta: f64,
    pub noise: NoiseModel,
    pub mode: CostMode,
    pub params: CascadeParams,
    pub converged: bool,
}

/// Evaluates one grid point.
pub fn violation_at(
    pair: &StatePair,
    k: f64,
    noise: &NoiseModel,
    mode: CostMode,
    config: &OptimizerConfig,
) -> Result<ViolationRecord> {
    let weights = CostWeights::normalized(k, mode)?;
    let (c_mh, _) = mh_bound(pair, &weights);
    let opt = minimize_cost(pair, &weights, noise, config);
    Ok(ViolationRecord {
        theta: pair.theta(),
        k,
        c_mh,
        c_min: opt.best_cost,
        delta: c_mh - opt.best_cost,
        noise: *noise,
        mode,
        params: opt.best_params,
        converged: opt.converged,
    })
}

/// Row-major (θ, then k) sweep. Grid point `i` uses the RNG stream derived
/// from `(config.seed, i)`, so the output does not depend on how rayon
/// schedules the tasks.
pub fn sweep(
    thetas: &[f64],
    ks: &[f64],
    noise: &NoiseModel,
    mode: CostMode,
    config: &OptimizerConfig,
) -> Result<Vec<ViolationRecord>> {
    let pairs = thetas
        .iter()
        .map(|&t| StatePair::new(t))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, &StatePair, f64)> = pairs
        .iter()
        .flat_map(|p| ks.iter().map(move |&k| (p, k)))
        .enumerate()
        .map(|(i, (p, k))| (i, p, k))
        .collect();
    tasks
        .par_iter()
        .map(|&(i, pair, k)| violation_at(pair, k, noise, mode, &config.for_task(i as u64)))
        .collect()
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Golden-section maximization of `f` on `[lo, hi]`; returns `(x, f(x))`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coarse grid on `k` for [`max_violation`]: `k_opt ≤ 1/2` for every θ, so
/// (0, 0.6] brackets every peak.
pub const K_SCAN_MAX: f64 = 0.6;
pub const K_SCAN_POINTS: usize = 24;
pub const K_REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxViolation {
    pub theta: f64,
    pub k_star: f64,
    pub delta_max: f64,
    pub c_mh: f64,
    pub c_min: f64,
    pub params: CascadeParams,
}

/// Largest absolute-mode violation over `k` for one separation angle.
pub fn max_violation(
    theta: f64,
    noise: &NoiseModel,
    config: &OptimizerConfig,
) -> Result<MaxViolation> {
    let pair = StatePair::new(theta)?;
    let delta_at = |k: f64| -> f64 {
        violation_at(&pair, k, noise, CostMode::Absolute, config)
            .map(|r| r.delta)
            .unwrap_or(f64::NEG_INFINITY)
    };

    // the ideal peak sits exactly on the kink, which narrows as θ → 0, so the
    // kink is always one of the scanned points
    let step = K_SCAN_MAX / K_SCAN_POINTS as f64;
    let mut ks: Vec<f64> = (1..=K_SCAN_POINTS).map(|i| step * i as f64).collect();
    let kink = k_opt(theta);
    if kink > 0.0 {
        ks.push(kink);
        ks.sort_by(f64::total_cmp);
    }
    let grid: Vec<(f64, f64)> = ks.iter().map(|&k| (k, delta_at(k))).collect();
    let best_i = (0..grid.len())
        .max_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1).then(b.cmp(&a)))
        .expect("scan grid is non-empty");
    let lo = if best_i == 0 {
        grid[0].0 * 1e-3
    } else {
        grid[best_i - 1].0
    };
    let hi = grid[(best_i + 1).min(grid.len() - 1)].0;
    let (mut k_star, mut delta_max) = golden_section_max(delta_at, lo, hi, K_REFINE_TOL);
    if grid[best_i].1 >= delta_max {
        (k_star, delta_max) = grid[best_i];
    }

    let rec = violation_at(&pair, k_star, noise, CostMode::Absolute, config)?;
    Ok(MaxViolation {
        theta,
        k_star,
        delta_max: rec.delta.max(delta_max),
        c_mh: rec.c_mh,
        c_min: rec.c_min,
        params: rec.params,
    })
}

/// Smallest `k` at which the optimal cascade cost equals the Helstrom bound
/// within `1e-8`; above it projective guess-both measurements are optimal.
pub fn helstrom_onset(pair: &StatePair, config: &OptimizerConfig) -> Result<f64> {
    const HB_TOL: f64 = 1e-8;
    let at_hb = |k: f64| -> Result<bool> {
        let weights = CostWeights::normalized(k, CostMode::Absolute)?;
        let opt = minimize_cost(pair, &weights, &NoiseModel::IDEAL, config);
        Ok(pair.helstrom() - opt.best_cost <= HB_TOL)
    };
    let step = 0.025;
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=40 {
        let k = step * i as f64;
        if at_hb(k)? {
            hi = Some(k);
            break;
        }
        lo = k;
    }
    let Some(mut hi) = hi else {
        return Ok(1.0);
    };
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && at_hb(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseChannel {
    Depolarize,
    Misidentify,
}

impl NoiseChannel {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseChannel::Depolarize => "depolarize",
            NoiseChannel::Misidentify => "misidentify",
        }
    }

    pub fn model(&self, p: f64) -> NoiseModel {
        match self {
            NoiseChannel::Depolarize => NoiseModel::depolarizing(p),
            NoiseChannel::Misidentify => NoiseModel::misidentifying(p),
        }
    }

    /// Upper end of the physical range of the channel probability.
    pub fn upper(&self) -> f64 {
        match self {
            NoiseChannel::Depolarize => 1.0,
            NoiseChannel::Misidentify => 0.5,
        }
    }
}

/// Grid for the global maximum over θ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    /// Coarse θ points, spread evenly inside (0, π/2).
    pub coarse_thetas: usize,
    /// Golden-section tolerance of the θ refinement around the coarse peak.
    pub theta_tol: f64,
    /// Bisection stops once the noise bracket is narrower than this.
    pub noise_tol: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid {
            coarse_thetas: 50,
            theta_tol: 1e-3,
            // the reported midpoint is then within 5e-5 of the crossing
            noise_tol: 1e-4,
        }
    }
}

impl ThresholdGrid {
    pub fn coarse() -> Self {
        ThresholdGrid {
            coarse_thetas: 10,
            ..ThresholdGrid::default()
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        let n = self.coarse_thetas;
        (1..=n)
            .map(|i| FRAC_PI_2 * i as f64 / (n + 1) as f64)
            .collect()
    }
}

/// Violations at or below this are treated as no violation.
pub const VIOLATION_EPS: f64 = 1e-9;

/// Global maximum of the violation over θ and k for a fixed noise model.
pub fn global_max_violation(
    noise: &NoiseModel,
    grid: &ThresholdGrid,
    config: &OptimizerConfig,
) -> Result<MaxViolation> {
    let thetas = grid.thetas();
    let coarse = thetas
        .par_iter()
        .enumerate()
        .map(|(i, &t)| max_violation(t, noise, &config.for_task(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let best_i = (0..coarse.len())
        .max_by(|&a, &b| {
            coarse[a]
                .delta_max
                .total_cmp(&coarse[b].delta_max)
                .then(b.cmp(&a))
        })
        .expect("grid is non-empty");
    let lo = if best_i == 0 {
        thetas[0] * 0.5
    } else {
        thetas[best_i - 1]
    };
    let hi = thetas.get(best_i + 1).copied().unwrap_or(FRAC_PI_2);

    let refine_config = config.for_task(thetas.len() as u64);
    let (theta, _) = golden_section_max(
        |t| {
            max_violation(t, noise, &refine_config)
                .map(|m| m.delta_max)
                .unwrap_or(f64::NEG_INFINITY)
        },
        lo,
        hi,
        grid.theta_tol,
    );
    let refined = max_violation(theta, noise, &refine_config)?;
    Ok(if refined.delta_max >= coarse[best_i].delta_max {
        refined
    } else {
        coarse[best_i]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub bracket: (f64, f64),
    pub theta_at_peak: f64,
    /// Set when the violation survives at the top of the search range, so no
    /// sign change was found and `threshold` is just the bracket's upper end.
    pub flagged: bool,
}

/// Noise strength at which the global maximum violation disappears, by
/// bisection on `p ↦ channel(p)` over `[0, upper]`.
pub fn threshold_search<M>(
    channel: M,
    upper: f64,
    grid: &ThresholdGrid,
    config: &OptimizerConfig,
) -> Result<ThresholdResult>
where
    M: Fn(f64) -> NoiseModel,
{
    let at = |p: f64| global_max_violation(&channel(p), grid, config);
    let top = at(upper)?;
    if top.delta_max > VIOLATION_EPS {
        return Ok(ThresholdResult {
            threshold: upper,
            bracket: (upper, upper),
            theta_at_peak: top.theta,
            flagged: true,
        });
    }
    let mut lo = 0.0;
    let mut hi = upper;
    let mut theta_at_peak = at(lo)?.theta;
    while hi - lo > grid.noise_tol {
        let mid = 0.5 * (lo + hi);
        let m = at(mid)?;
        if m.delta_max > VIOLATION_EPS {
            lo = mid;
            theta_at_peak = m.theta;
        } else {
            hi = mid;
        }
    }
    Ok(ThresholdResult {
        threshold: 0.5 * (lo + hi),
        bracket: (lo, hi),
        theta_at_peak,
        flagged: false,
    })
}

/// Threshold of one physical channel, the other channel held at zero.
pub fn noise_threshold(
    channel: NoiseChannel,
    grid: &ThresholdGrid,
    config: &OptimizerConfig,
) -> Result<ThresholdResult> {
    threshold_search(|p| channel.model(p), channel.upper(), grid, config)
}

/// Reduces an angle to (−π/2, π/2] and reports it in degrees; handy for logs.
pub fn degrees(angle: f64) -> f64 {
    wrap_half_pi(angle) * 180.0 / PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::ideal_nonprojective_cost;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64; 3]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2) + x[2] * x[2];
        let out = nelder_mead(
            f,
            simplex_around([0.1, 0.1, 0.1], [0.5, 0.5, 0.5]),
            &NelderMeadOptions::default(),
        );
        assert!(out.converged);
        assert!((out.point[0] - 1.0).abs() < 1e-6);
        assert!((out.point[1] + 2.0).abs() < 1e-6);
        assert!(out.point[2].abs() < 1e-6);
    }

    #[test]
    fn evaluation_cap_flags_non_convergence() {
        let opts = NelderMeadOptions {
            max_evaluations: 10,
            ..NelderMeadOptions::default()
        };
        let f = |x: &[f64; 2]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let out = nelder_mead(f, simplex_around([-1.2, 1.0], [1.0, 1.0]), &opts);
        assert!(!out.converged);
        assert!(out.evaluations >= 10);
    }

    #[test]
    fn helstrom_regime_at_large_k() {
        let pair = StatePair::new(FRAC_PI_4).unwrap();
        let w = CostWeights::normalized(0.6, CostMode::Absolute).unwrap();
        let r = minimize_cost(&pair, &w, &NoiseModel::IDEAL, &OptimizerConfig::default());
        assert!((r.best_cost - pair.helstrom()).abs() < 1e-6);
    }

    #[test]
    fn kink_matches_closed_form() {
        let pair = StatePair::new(FRAC_PI_4).unwrap();
        let k = k_opt(FRAC_PI_4);
        let w = CostWeights::normalized(k, CostMode::Absolute).unwrap();
        let r = minimize_cost(&pair, &w, &NoiseModel::IDEAL, &OptimizerConfig::default());
        let expected = ideal_nonprojective_cost(&pair, k).unwrap();
        assert!((r.best_cost - expected).abs() < 1e-6);
        assert!(r.best_params.s < 1.0);
        assert!(r.restarts_agreeing >= 1);
    }

    #[test]
    fn orthogonal_states_are_free() {
        let pair = StatePair::new(FRAC_PI_2).unwrap();
        let w = CostWeights::normalized(0.3, CostMode::Absolute).unwrap();
        let r = minimize_cost(&pair, &w, &NoiseModel::IDEAL, &OptimizerConfig::default());
        assert!(r.best_cost.abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_result() {
        let pair = StatePair::new(0.6).unwrap();
        let w = CostWeights::normalized(0.2, CostMode::Absolute).unwrap();
        let noise = NoiseModel::new(0.01, 0.01).unwrap();
        let cfg = OptimizerConfig::default().with_seed(7);
        let a = minimize_cost(&pair, &w, &noise, &cfg);
        let b = minimize_cost(&pair, &w, &noise, &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3).abs(), 0.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx.abs() < 1e-8);
    }

    #[test]
    fn task_seeds_differ() {
        assert_ne!(task_seed(0, 0), task_seed(0, 1));
        assert_ne!(task_seed(0, 0), task_seed(1, 0));
    }

    #[test]
    fn threshold_guard_for_inert_channel() {
        // a channel that never changes the game keeps the violation alive
        let grid = ThresholdGrid {
            coarse_thetas: 3,
            theta_tol: 1e-2,
            noise_tol: 1e-2,
        };
        let cfg = OptimizerConfig {
            random_starts: 2,
            ..OptimizerConfig::default()
        };
        let r = threshold_search(|_| NoiseModel::IDEAL, 0.5, &grid, &cfg).unwrap();
        assert!(r.flagged);
        assert_eq!(r.threshold, 0.5);
    }
}

//! Checks shared by the property tests and the acceptance suite. Each check
//! returns `Err` with a description of the first mismatch.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use mhbound::bounds::{
    closed_form_a, closed_form_b, cost_strategy_a, cost_strategy_b, mh_bound, CostMode,
    CostWeights, StatePair,
};
use mhbound::cascade::{build_triple, probabilities, CascadeParams, NoiseModel};
use mhbound::optimizer::{minimize_cost, OptimizerConfig};
use mhbound::qmath::Sym2;
use rand::Rng;

pub type Check = Result<(), String>;

/// The five separation angles used throughout the figures.
pub fn grid_thetas() -> Vec<f64> {
    (1..=5).map(|i| i as f64 * PI / 10.0).collect()
}

pub fn random_theta<R: Rng>(rng: &mut R) -> f64 {
    // stay clear of θ = 0, which is excluded
    rng.gen_range(1e-3..=FRAC_PI_2)
}

pub fn random_params<R: Rng>(rng: &mut R) -> CascadeParams {
    CascadeParams::new(
        rng.gen_range(-PI..PI),
        rng.gen_range(-PI..PI),
        rng.gen_range(0.0..=1.0),
    )
    .expect("in range")
}

pub fn random_noise<R: Rng>(rng: &mut R) -> NoiseModel {
    NoiseModel::new(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=0.5)).expect("in range")
}

pub fn completeness(params: &CascadeParams) -> Check {
    let t = build_triple(params);
    let err = t.completeness_error();
    if err > 1e-12 {
        return Err(format!("{params:?}: completeness error {err:e}"));
    }
    for (name, e) in [("e0", t.e0), ("e1", t.e1), ("ed", t.ed)] {
        if !e.is_psd(1e-12) {
            return Err(format!("{params:?}: {name} = {e:?} is not PSD"));
        }
    }
    Ok(())
}

pub fn normalization(theta: f64, params: &CascadeParams, noise: &NoiseModel) -> Check {
    let pair = StatePair::new(theta).map_err(|e| e.to_string())?;
    let p = probabilities(&pair, params, noise);
    let err = (p.total() - 1.0).abs();
    if err > 1e-12 || p.as_array().iter().any(|&x| x < -1e-12) {
        return Err(format!(
            "θ={theta} {params:?} {noise:?}: probabilities {p:?}"
        ));
    }
    Ok(())
}

pub fn closed_forms(theta: f64, w: f64, d: f64) -> Check {
    let pair = StatePair::new(theta).map_err(|e| e.to_string())?;
    let weights = CostWeights::new(w, d, CostMode::Absolute).map_err(|e| e.to_string())?;
    let (a, _) = cost_strategy_a(&pair, &weights);
    let (b, _) = cost_strategy_b(&pair, &weights);
    let (ea, eb) = (closed_form_a(theta, w), closed_form_b(theta, w, d));
    if (a - ea).abs() > 1e-12 || (b - eb).abs() > 1e-12 {
        return Err(format!(
            "θ={theta} w={w} d={d}: eigen ({a}, {b}) vs closed form ({ea}, {eb})"
        ));
    }
    Ok(())
}

pub fn optimizer_dominance(theta: f64, k: f64, noise: &NoiseModel, seed: u64) -> Check {
    let pair = StatePair::new(theta).map_err(|e| e.to_string())?;
    let weights = CostWeights::normalized(k, CostMode::Absolute).map_err(|e| e.to_string())?;
    let (c_mh, _) = mh_bound(&pair, &weights);
    let r = minimize_cost(
        &pair,
        &weights,
        noise,
        &OptimizerConfig::default().with_seed(seed),
    );
    // with noise the cascade's own projective embeddings are the fair reference,
    // and those are always among the candidates
    let reference = if noise.is_ideal() {
        c_mh
    } else {
        let (_, a) = cost_strategy_a(&pair, &weights);
        let (_, b) = cost_strategy_b(&pair, &weights);
        let cost = |p: CascadeParams| {
            let probs = probabilities(&pair, &p, noise);
            weights.objective(probs.p_w, probs.p_d)
        };
        cost(CascadeParams::guess_both(a)).min(cost(CascadeParams::guess_one(b)))
    };
    if r.best_cost > reference + 1e-8 {
        return Err(format!(
            "θ={theta} k={k} {noise:?}: optimizer {} above projective {reference}",
            r.best_cost
        ));
    }
    Ok(())
}

pub fn max_abs(m: &Sym2) -> f64 {
    m.a.abs().max(m.b.abs()).max(m.c.abs())
}

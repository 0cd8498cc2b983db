//! The three-outcome cascade: a strength-`s` partial projection onto
//! `|φ₀⁽¹⁾⟩` followed by a full projection onto `|φ₁⁽²⁾⟩`.
//!
//! Outcome of stage 1 guesses `ψ₀`; the projection outcome of stage 2 guesses
//! `ψ₁`; the remaining outcome declines.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::bounds::{CostMode, CostWeights, StatePair};
use crate::error::{Error, Result};
use crate::qmath::{projector, psd_sqrt, sandwich, DensityMatrix, Mat2, PlaneState, Sym2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeParams {
    pub phi1: f64,
    pub phi2: f64,
    pub s: f64,
}

impl CascadeParams {
    pub fn new(phi1: f64, phi2: f64, s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid("s", format!("{s} is not in [0, 1]")));
        }
        if !(phi1.is_finite() && phi2.is_finite()) {
            return Err(Error::invalid("phi", "angles must be finite"));
        }
        Ok(CascadeParams { phi1, phi2, s })
    }

    /// Projective guess-both measurement in the basis `{|α⟩, |α + π/2⟩}`.
    pub fn guess_both(basis_angle: f64) -> Self {
        CascadeParams {
            phi1: basis_angle,
            phi2: basis_angle + FRAC_PI_2,
            s: 1.0,
        }
    }

    /// Projective guess-one measurement: `|α⟩` guesses `ψ₀`, its complement declines.
    pub fn guess_one(basis_angle: f64) -> Self {
        CascadeParams {
            phi1: basis_angle,
            phi2: basis_angle,
            s: 1.0,
        }
    }
}

/// Measurement operators and their POVM elements `M†M`.
///
/// `m1` and `md` are products of non-commuting symmetric factors, so they are
/// general matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementTriple {
    pub m0: Sym2,
    pub m1: Mat2,
    pub md: Mat2,
    /// Stage-1 back-action on the continue branch, `√(1 − s²P(φ₁))`.
    pub back_action: Sym2,
    pub e0: Sym2,
    pub e1: Sym2,
    pub ed: Sym2,
}

impl MeasurementTriple {
    pub fn completeness_error(&self) -> f64 {
        (self.e0 + self.e1 + self.ed).max_abs_diff(&Sym2::IDENTITY)
    }
}

fn sqrt_psd_by_construction(m: &Sym2) -> Sym2 {
    psd_sqrt(m).expect("1 − s²P with s in [0, 1] has eigenvalues in [0, 1]")
}

pub fn build_triple(params: &CascadeParams) -> MeasurementTriple {
    let p1 = projector(PlaneState::new(params.phi1));
    let p2 = projector(PlaneState::new(params.phi2));
    let s = params.s;

    let m0 = s * p1;
    let back_action = sqrt_psd_by_construction(&(Sym2::IDENTITY - (s * s) * p1));
    let not_p2 = sqrt_psd_by_construction(&(Sym2::IDENTITY - p2));
    let m1 = Mat2::product(&p2, &back_action);
    let md = Mat2::product(&not_p2, &back_action);
    MeasurementTriple {
        m0,
        m1,
        md,
        back_action,
        e0: m0.square(),
        e1: m1.gram(),
        ed: md.gram(),
    }
}

/// Depolarization of Alice's preparation and per-readout misidentification.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_dp: f64,
    pub p_m: f64,
}

impl NoiseModel {
    pub const IDEAL: NoiseModel = NoiseModel {
        p_dp: 0.0,
        p_m: 0.0,
    };

    pub fn new(p_dp: f64, p_m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_dp) {
            return Err(Error::invalid("p_dp", format!("{p_dp} is not in [0, 1]")));
        }
        if !(0.0..=0.5).contains(&p_m) {
            return Err(Error::invalid("p_m", format!("{p_m} is not in [0, 0.5]")));
        }
        Ok(NoiseModel { p_dp, p_m })
    }

    pub fn depolarizing(p_dp: f64) -> Self {
        NoiseModel { p_dp, p_m: 0.0 }
    }

    pub fn misidentifying(p_m: f64) -> Self {
        NoiseModel { p_dp: 0.0, p_m }
    }

    pub fn is_ideal(&self) -> bool {
        self.p_dp == 0.0 && self.p_m == 0.0
    }
}

/// `(p_c, p_w, p_d)`: correct guess, wrong guess, declined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeProbabilities {
    pub p_c: f64,
    pub p_w: f64,
    pub p_d: f64,
}

impl OutcomeProbabilities {
    pub fn total(&self) -> f64 {
        self.p_c + self.p_w + self.p_d
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.p_c, self.p_w, self.p_d]
    }
}

pub fn ideal_probabilities(pair: &StatePair, params: &CascadeParams) -> OutcomeProbabilities {
    let t = build_triple(params);
    let rho0 = DensityMatrix::pure(pair.psi0());
    let rho1 = DensityMatrix::pure(pair.psi1());
    OutcomeProbabilities {
        p_c: 0.5 * (sandwich(&t.e0, &rho0) + sandwich(&t.e1, &rho1)),
        p_w: 0.5 * (sandwich(&t.e1, &rho0) + sandwich(&t.e0, &rho1)),
        p_d: 0.5 * (sandwich(&t.ed, &rho0) + sandwich(&t.ed, &rho1)),
    }
}

/// Probabilities of the three declared results `[guess ψ₀, guess ψ₁, decline]`
/// for one input state under the sequential readout-confusion model.
///
/// Each binary record is flipped independently with probability `p_m`, and the
/// next physical step follows the recorded value: a stage-1 record of "guess ψ₀"
/// ends the trial, otherwise stage 2 acts on the true post-measurement state of
/// whichever stage-1 branch occurred.
fn declared_distribution(
    rho: &Sym2,
    t: &MeasurementTriple,
    p2: &Sym2,
    not_p2: &Sym2,
    p_m: f64,
) -> [f64; 3] {
    // unnormalized post-measurement states; q0 = Tr(branch0), qn = Tr(branch_n)
    let branch0 = t.m0.conjugate(rho);
    let branch_n = t.back_action.conjugate(rho);
    let q0 = branch0.trace();
    let qn = branch_n.trace();
    let guess0 = (1.0 - p_m) * q0 + p_m * qn;

    // q0·p_m·ρ₀ + qn·(1−p_m)·ρ_n with ρ₀, ρ_n normalized; an empty branch
    // contributes nothing
    let continued = p_m * branch0 + (1.0 - p_m) * branch_n;
    let hit = p2.trace_product(&continued);
    let miss = not_p2.trace_product(&continued);
    [
        guess0,
        (1.0 - p_m) * hit + p_m * miss,
        p_m * hit + (1.0 - p_m) * miss,
    ]
}

pub fn noisy_probabilities(
    pair: &StatePair,
    params: &CascadeParams,
    noise: &NoiseModel,
) -> OutcomeProbabilities {
    let t = build_triple(params);
    let p2 = projector(PlaneState::new(params.phi2));
    let not_p2 = Sym2::IDENTITY - p2;
    let rho0 = DensityMatrix::pure(pair.psi0()).depolarize(noise.p_dp);
    let rho1 = DensityMatrix::pure(pair.psi1()).depolarize(noise.p_dp);
    let out0 = declared_distribution(rho0.matrix(), &t, &p2, &not_p2, noise.p_m);
    let out1 = declared_distribution(rho1.matrix(), &t, &p2, &not_p2, noise.p_m);
    OutcomeProbabilities {
        p_c: 0.5 * (out0[0] + out1[1]),
        p_w: 0.5 * (out0[1] + out1[0]),
        p_d: 0.5 * (out0[2] + out1[2]),
    }
}

/// Game probabilities, taking the ideal route when there is no noise.
pub fn probabilities(
    pair: &StatePair,
    params: &CascadeParams,
    noise: &NoiseModel,
) -> OutcomeProbabilities {
    if noise.is_ideal() {
        ideal_probabilities(pair, params)
    } else {
        noisy_probabilities(pair, params, noise)
    }
}

/// Cost of a set of game probabilities under `weights`.
///
/// Scaled mode with `k = 0` cannot be represented by [`CostWeights`], so the
/// error case is already excluded at construction.
pub fn cost(probs: &OutcomeProbabilities, weights: &CostWeights) -> f64 {
    weights.objective(probs.p_w, probs.p_d)
}

/// Checked variant of [`cost`] that takes raw weights.
pub fn cost_with(probs: &OutcomeProbabilities, w: f64, d: f64, mode: CostMode) -> Result<f64> {
    Ok(cost(probs, &CostWeights::new(w, d, mode)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{cost_strategy_a, cost_strategy_b};
    use std::f64::consts::FRAC_PI_4;

    fn pair(theta: f64) -> StatePair {
        StatePair::new(theta).unwrap()
    }

    #[test]
    fn strength_one_reproduces_guess_both() {
        let phi = 0.3;
        let t = build_triple(&CascadeParams::guess_both(phi));
        let p = projector(PlaneState::new(phi));
        let q = projector(PlaneState::new(phi + FRAC_PI_2));
        assert!(t.m0.max_abs_diff(&p) < 1e-15);
        assert!(t.m1.max_abs_diff(&q.into()) < 1e-15);
        assert!(t.md.max_abs_diff(&Mat2::ZERO) < 1e-15);
    }

    #[test]
    fn strength_one_reproduces_guess_one() {
        let phi = -0.8;
        let t = build_triple(&CascadeParams::guess_one(phi));
        assert!(t.m1.max_abs_diff(&Mat2::ZERO) < 1e-15);
        let q = projector(PlaneState::new(phi + FRAC_PI_2));
        assert!(t.md.max_abs_diff(&q.into()) < 1e-15);
    }

    #[test]
    fn strength_zero_disables_first_stage() {
        let t = build_triple(&CascadeParams::new(0.4, 1.1, 0.0).unwrap());
        assert_eq!(t.m0, Sym2::ZERO);
        assert!(t.m1.max_abs_diff(&projector(PlaneState::new(1.1)).into()) < 1e-15);
        assert!(t.md.max_abs_diff(&projector(PlaneState::new(1.1 + FRAC_PI_2)).into()) < 1e-15);
    }

    #[test]
    fn completeness_for_a_partial_measurement() {
        let t = build_triple(&CascadeParams::new(0.2, 1.3, 0.7).unwrap());
        assert!(t.completeness_error() < 1e-15);
    }

    #[test]
    fn ideal_probability_examples() {
        let p = ideal_probabilities(
            &pair(FRAC_PI_2),
            &CascadeParams::new(0.0, FRAC_PI_2, 1.0).unwrap(),
        );
        assert!((p.p_c - 1.0).abs() < 1e-15 && p.p_w.abs() < 1e-15 && p.p_d.abs() < 1e-15);

        let p = ideal_probabilities(
            &pair(FRAC_PI_2),
            &CascadeParams::new(0.0, FRAC_PI_2, 0.0).unwrap(),
        );
        assert!((p.p_c - 0.5).abs() < 1e-15 && p.p_w.abs() < 1e-15);
        assert!((p.p_d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn noiseless_noisy_matches_ideal() {
        let pr = pair(0.77);
        let params = CascadeParams::new(-0.4, 1.9, 0.63).unwrap();
        let a = ideal_probabilities(&pr, &params);
        let b = noisy_probabilities(&pr, &params, &NoiseModel::IDEAL);
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn full_depolarization_makes_guesses_coin_flips() {
        let p = noisy_probabilities(
            &pair(0.5),
            &CascadeParams::new(0.0, FRAC_PI_2, 1.0).unwrap(),
            &NoiseModel::depolarizing(1.0),
        );
        assert!((p.p_c - 0.5).abs() < 1e-15);
        assert!((p.p_w - 0.5).abs() < 1e-15);
        assert!(p.p_d.abs() < 1e-15);
    }

    #[test]
    fn readout_noise_on_orthogonal_states() {
        // ψ₀: guess0 kept with 1−p, else stage 2 on |0⟩ never fires but may flip to guess1.
        // ψ₁: stage 1 never fires, flips to guess0 with p, else stage 2 fires and may flip.
        let p_m = 0.02;
        let p = noisy_probabilities(
            &pair(FRAC_PI_2),
            &CascadeParams::new(0.0, FRAC_PI_2, 1.0).unwrap(),
            &NoiseModel::misidentifying(p_m),
        );
        assert!((p.p_w - 0.0102).abs() < 1e-15);
        assert!((p.p_d - 0.0196).abs() < 1e-15);
        assert!((p.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projective_embeddings_match_bounds() {
        let pr = pair(FRAC_PI_4);
        let w = CostWeights::normalized(0.25, CostMode::Absolute).unwrap();
        let (ca, angle_a) = cost_strategy_a(&pr, &w);
        let (cb, angle_b) = cost_strategy_b(&pr, &w);
        let emb_a = cost(
            &ideal_probabilities(&pr, &CascadeParams::guess_both(angle_a)),
            &w,
        );
        let emb_b = cost(
            &ideal_probabilities(&pr, &CascadeParams::guess_one(angle_b)),
            &w,
        );
        assert!((emb_a - ca).abs() < 1e-12);
        assert!((emb_b - cb).abs() < 1e-12);
    }

    #[test]
    fn cost_examples() {
        let w = CostWeights::normalized(0.3, CostMode::Absolute).unwrap();
        let perfect = OutcomeProbabilities {
            p_c: 1.0,
            p_w: 0.0,
            p_d: 0.0,
        };
        assert_eq!(cost(&perfect, &w), 0.0);
        let declined = OutcomeProbabilities {
            p_c: 0.0,
            p_w: 0.0,
            p_d: 1.0,
        };
        assert!((cost(&declined, &w) - 0.3).abs() < 1e-15);
        let mixed = OutcomeProbabilities {
            p_c: 0.5,
            p_w: 0.1,
            p_d: 0.4,
        };
        let w = CostWeights::normalized(0.25, CostMode::Absolute).unwrap();
        assert!((cost(&mixed, &w) - 0.2).abs() < 1e-15);
        assert!(cost_with(&mixed, 1.0, 0.0, CostMode::Scaled).is_err());
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseModel::new(1.1, 0.0).is_err());
        assert!(NoiseModel::new(0.0, 0.6).is_err());
        assert!(NoiseModel::new(0.05, 0.02).is_ok());
        assert!(CascadeParams::new(0.0, 0.0, 1.5).is_err());
    }
}

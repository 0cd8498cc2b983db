//! Projective strategies, the modified Helstrom bound and the analytic
//! nonprojective optimum.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{eig_bounds, projector, PlaneState, Sym2};

/// Which objective the weights describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostMode {
    /// `C = w·p_w + d·p_d`
    Absolute,
    /// `C/k = p_w/k + p_d`, i.e. the absolute cost divided by `d` when `w = 1`.
    Scaled,
}

impl CostMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CostMode::Absolute => "absolute",
            CostMode::Scaled => "scaled",
        }
    }
}

impl std::str::FromStr for CostMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absolute" => Ok(CostMode::Absolute),
            "scaled" => Ok(CostMode::Scaled),
            other => Err(Error::invalid("mode", format!("unknown mode {other:?}"))),
        }
    }
}

/// Penalties for a wrong guess (`w`) and a declined guess (`d`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    w: f64,
    d: f64,
    mode: CostMode,
}

impl CostWeights {
    pub fn new(w: f64, d: f64, mode: CostMode) -> Result<Self> {
        if !(w.is_finite() && w >= 0.0) {
            return Err(Error::invalid("w", "must be finite and >= 0"));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::invalid("d", "must be finite and >= 0"));
        }
        if w + d <= 0.0 {
            return Err(Error::invalid("w", "w + d must be positive"));
        }
        if mode == CostMode::Scaled && d == 0.0 {
            return Err(Error::invalid("k", "scaled mode requires k > 0"));
        }
        Ok(CostWeights { w, d, mode })
    }

    /// Normalized weights `w = 1`, `d = k`.
    pub fn normalized(k: f64, mode: CostMode) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::invalid("k", "must be finite and >= 0"));
        }
        CostWeights::new(1.0, k, mode)
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn mode(&self) -> CostMode {
        self.mode
    }

    /// `d / w`, defined when `w > 0`.
    pub fn k(&self) -> Option<f64> {
        (self.w > 0.0).then(|| self.d / self.w)
    }

    /// Converts an absolute cost `w·p_w + d·p_d` into this objective.
    pub fn rescale(&self, absolute: f64) -> f64 {
        match self.mode {
            CostMode::Absolute => absolute,
            CostMode::Scaled => absolute / self.d,
        }
    }

    pub fn objective(&self, p_w: f64, p_d: f64) -> f64 {
        self.rescale(self.w * p_w + self.d * p_d)
    }
}

/// The two states `|ψ₀⟩ = |0⟩` and `|ψ₁⟩ = cos θ|0⟩ + sin θ|1⟩`, prepared with
/// equal probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    theta: f64,
}

impl StatePair {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= FRAC_PI_2 + 1e-15) {
            return Err(Error::invalid(
                "theta",
                format!("{theta} is not in (0, pi/2]"),
            ));
        }
        Ok(StatePair {
            theta: theta.min(FRAC_PI_2),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn psi0(&self) -> PlaneState {
        PlaneState::new(0.0)
    }

    pub fn psi1(&self) -> PlaneState {
        PlaneState::new(self.theta)
    }

    /// The usual Helstrom bound `(1 − |sin θ|)/2`.
    pub fn helstrom(&self) -> f64 {
        0.5 * (1.0 - self.theta.sin().abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyVariant {
    /// Both basis outcomes are guesses.
    GuessBoth,
    /// `|φ₀⟩` guesses `ψ₀`; the orthogonal outcome declines.
    GuessOne,
}

impl StrategyVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyVariant::GuessBoth => "guess_both",
            StrategyVariant::GuessOne => "guess_one",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveStrategy {
    pub variant: StrategyVariant,
    /// Angle of `|φ₀⟩`, the outcome read as a guess of `ψ₀`.
    pub basis_angle: f64,
}

/// Operator whose expectation in `|φ₀⟩` is `p_w` for the guess-both strategy.
pub fn operator_a(pair: &StatePair) -> Sym2 {
    let p0 = projector(pair.psi0());
    let p1 = projector(pair.psi1());
    0.5 * (Sym2::IDENTITY + p1 - p0)
}

/// Operator whose expectation in `|φ₀⟩` is the absolute cost of the guess-one strategy.
pub fn operator_b(pair: &StatePair, w: f64, d: f64) -> Sym2 {
    let p0 = projector(pair.psi0());
    let p1 = projector(pair.psi1());
    (0.5 * w) * p1 + d * (Sym2::IDENTITY - 0.5 * (p0 + p1))
}

/// Best guess-both projective cost and its basis angle.
pub fn cost_strategy_a(pair: &StatePair, weights: &CostWeights) -> (f64, f64) {
    let eig = eig_bounds(&operator_a(pair));
    (
        weights.rescale(weights.w() * eig.min_eig),
        eig.min_eigvec_angle,
    )
}

/// Best guess-one projective cost and its basis angle.
pub fn cost_strategy_b(pair: &StatePair, weights: &CostWeights) -> (f64, f64) {
    let eig = eig_bounds(&operator_b(pair, weights.w(), weights.d()));
    (weights.rescale(eig.min_eig), eig.min_eigvec_angle)
}

/// Closed form `w(1 − |sin θ|)/2` of the guess-both minimum.
pub fn closed_form_a(theta: f64, w: f64) -> f64 {
    w * (1.0 - theta.sin().abs()) / 2.0
}

/// Closed form of the guess-one minimum for general weights.
pub fn closed_form_b(theta: f64, w: f64, d: f64) -> f64 {
    let shift = (w - 2.0 * d) / 4.0;
    let s = theta.sin();
    (w + 2.0 * d) / 4.0 - (shift * shift + d * (w - d) * s * s / 4.0).sqrt()
}

/// Normalized (`w = 1`, `d = k`) form of [`closed_form_b`].
pub fn closed_form_b_normalized(theta: f64, k: f64) -> f64 {
    (1.0 + 2.0 * k - (1.0 - 2.0 * k * (1.0 - k) * (1.0 + (2.0 * theta).cos())).sqrt()) / 4.0
}

/// Modified Helstrom bound: the better of the two projective strategies.
/// Ties go to guess-both.
pub fn mh_bound(pair: &StatePair, weights: &CostWeights) -> (f64, ProjectiveStrategy) {
    let (ca, angle_a) = cost_strategy_a(pair, weights);
    let (cb, angle_b) = cost_strategy_b(pair, weights);
    if ca <= cb {
        (
            ca,
            ProjectiveStrategy {
                variant: StrategyVariant::GuessBoth,
                basis_angle: angle_a,
            },
        )
    } else {
        (
            cb,
            ProjectiveStrategy {
                variant: StrategyVariant::GuessOne,
                basis_angle: angle_b,
            },
        )
    }
}

/// The kink of the modified Helstrom bound, where both projective strategies
/// cost the same and nonprojective measurements gain the most.
pub fn k_opt(theta: f64) -> f64 {
    let c = theta.cos();
    0.5 * (1.0 + ((1.0 + 3.0 * c * c).sqrt() - 2.0) / theta.sin().abs())
}

/// Analytic optimum `k[k − (1−k)cos θ]/(2k − 1)` of the ideal three-outcome
/// measurement, valid for `0 < k < k_HB(θ)`.
///
/// Returns [`Error::OutOfRange`] when the formula is negative or above the
/// Helstrom bound, where it cannot be a minimum cost.
pub fn ideal_nonprojective_cost(pair: &StatePair, k: f64) -> Result<f64> {
    let theta = pair.theta();
    let value = k * (k - (1.0 - k) * theta.cos()) / (2.0 * k - 1.0);
    if k <= 0.0 || !value.is_finite() || value < 0.0 || value > pair.helstrom() {
        return Err(Error::OutOfRange { theta, k });
    }
    Ok(value)
}

//! Real 2×2 symmetric matrix algebra for qubit states restricted to one plane.
//!
//! All states, projectors and measurement operators in the discrimination game
//! live in the real span of `|0⟩` and `|1⟩`, so a symmetric matrix
//! `[[a, b], [b, c]]` is enough to hold any of them.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking PSD-ness and unit trace.
pub const PSD_TOL: f64 = 1e-12;

/// Eigenvalues below `-SQRT_REJECT_TOL` make [`psd_sqrt`] fail instead of clamping.
pub const SQRT_REJECT_TOL: f64 = 1e-9;

/// Eigenvalues this close to zero (relative to the spectral radius) are rounding.
const ROUNDING_EIG: f64 = 1e-14;

/// Real symmetric matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 {
        a: 0.0,
        b: 0.0,
        c: 0.0,
    };
    pub const IDENTITY: Sym2 = Sym2 {
        a: 1.0,
        b: 0.0,
        c: 1.0,
    };

    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        Sym2 { a, b, c }
    }

    pub const fn diag(a: f64, c: f64) -> Self {
        Sym2 { a, b: 0.0, c }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn scale(&self, k: f64) -> Sym2 {
        Sym2::new(k * self.a, k * self.b, k * self.c)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.a >= -tol && self.c >= -tol && self.det() >= -tol
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Sym2) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
    }

    /// `self · self`, which is symmetric again.
    pub fn square(&self) -> Sym2 {
        Sym2::new(
            self.a * self.a + self.b * self.b,
            self.b * (self.a + self.c),
            self.b * self.b + self.c * self.c,
        )
    }

    /// `self · x · self` for a symmetric `x`; the result is symmetric.
    pub fn conjugate(&self, x: &Sym2) -> Sym2 {
        // (self · x) as a general matrix
        let p00 = self.a * x.a + self.b * x.b;
        let p01 = self.a * x.b + self.b * x.c;
        let p10 = self.b * x.a + self.c * x.b;
        let p11 = self.b * x.b + self.c * x.c;
        Sym2::new(
            p00 * self.a + p01 * self.b,
            p00 * self.b + p01 * self.c,
            p10 * self.b + p11 * self.c,
        )
    }

    /// `Tr(self · other)`.
    pub fn trace_product(&self, other: &Sym2) -> f64 {
        self.a * other.a + 2.0 * self.b * other.b + self.c * other.c
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, rhs: Sym2) -> Sym2 {
        Sym2::new(self.a + rhs.a, self.b + rhs.b, self.c + rhs.c)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, rhs: Sym2) -> Sym2 {
        Sym2::new(self.a - rhs.a, self.b - rhs.b, self.c - rhs.c)
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, rhs: Sym2) -> Sym2 {
        rhs.scale(self)
    }
}

/// General real 2×2 matrix, row-major. Kraus operators built from products of
/// non-commuting projectors land here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 { m: [[0.0; 2]; 2] };

    pub fn transpose(&self) -> Mat2 {
        let m = self.m;
        Mat2 {
            m: [[m[0][0], m[1][0]], [m[0][1], m[1][1]]],
        }
    }

    pub fn product(x: &Sym2, y: &Sym2) -> Mat2 {
        Mat2 {
            m: [
                [x.a * y.a + x.b * y.b, x.a * y.b + x.b * y.c],
                [x.b * y.a + x.c * y.b, x.b * y.b + x.c * y.c],
            ],
        }
    }

    /// `Mᵀ·M`, the POVM element of a Kraus operator.
    pub fn gram(&self) -> Sym2 {
        let [[p, q], [r, s]] = self.m;
        Sym2::new(p * p + r * r, p * q + r * s, q * q + s * s)
    }

    /// `M·x·Mᵀ` for symmetric `x`.
    pub fn conjugate(&self, x: &Sym2) -> Sym2 {
        let [[p, q], [r, s]] = self.m;
        let t00 = p * x.a + q * x.b;
        let t01 = p * x.b + q * x.c;
        let t10 = r * x.a + s * x.b;
        let t11 = r * x.b + s * x.c;
        Sym2::new(t00 * p + t01 * q, t00 * r + t01 * s, t10 * r + t11 * s)
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut out = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                out = out.max((self.m[i][j] - other.m[i][j]).abs());
            }
        }
        out
    }
}

impl From<Sym2> for Mat2 {
    fn from(s: Sym2) -> Mat2 {
        Mat2 {
            m: [[s.a, s.b], [s.b, s.c]],
        }
    }
}

/// Unit vector `cos(angle)|0⟩ + sin(angle)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneState {
    angle: f64,
}

impl PlaneState {
    /// Stores the angle wrapped into (−π, π].
    pub fn new(angle: f64) -> Self {
        PlaneState {
            angle: wrap_pi(angle),
        }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn orthogonal(&self) -> PlaneState {
        PlaneState::new(self.angle + FRAC_PI_2)
    }

    pub fn amplitudes(&self) -> (f64, f64) {
        (self.angle.cos(), self.angle.sin())
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Wraps an angle into (−π/2, π/2], the natural range of a projector direction.
pub fn wrap_half_pi(angle: f64) -> f64 {
    let r = angle.rem_euclid(PI);
    if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// Density matrix of a (possibly mixed) plane qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    m: Sym2,
}

impl DensityMatrix {
    pub fn new(m: Sym2) -> Result<Self> {
        if (m.trace() - 1.0).abs() > PSD_TOL {
            return Err(Error::invalid(
                "rho",
                format!("trace {} is not 1", m.trace()),
            ));
        }
        if !m.is_psd(PSD_TOL) {
            return Err(Error::NotPsd {
                min_eig: eig_bounds(&m).min_eig,
            });
        }
        Ok(DensityMatrix { m })
    }

    pub fn pure(state: PlaneState) -> Self {
        DensityMatrix {
            m: projector(state),
        }
    }

    pub fn fully_mixed() -> Self {
        DensityMatrix {
            m: Sym2::diag(0.5, 0.5),
        }
    }

    /// `(1 − p)·self + p·𝟙/2`.
    pub fn depolarize(&self, p: f64) -> Self {
        DensityMatrix {
            m: (1.0 - p) * self.m + p * Sym2::diag(0.5, 0.5),
        }
    }

    pub fn matrix(&self) -> &Sym2 {
        &self.m
    }
}

/// `|φ⟩⟨φ|` for a plane state.
pub fn projector(state: PlaneState) -> Sym2 {
    let (c, s) = state.amplitudes();
    Sym2::new(c * c, s * c, s * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigBounds {
    pub min_eig: f64,
    pub max_eig: f64,
    /// Direction of the eigenvector for `min_eig`, in (−π/2, π/2].
    pub min_eigvec_angle: f64,
}

/// Closed-form eigenvalues of a symmetric 2×2 matrix and the direction of the
/// minimizing eigenvector. A multiple of the identity reports angle 0.
pub fn eig_bounds(m: &Sym2) -> EigBounds {
    let mean = 0.5 * (m.a + m.c);
    let half_diff = 0.5 * (m.a - m.c);
    let radius = half_diff.hypot(m.b);
    let min_eigvec_angle = if m.b == 0.0 && m.a == m.c {
        0.0
    } else {
        // 0.5·atan2(2b, a − c) points along the max eigenvector
        wrap_half_pi(0.5 * (2.0 * m.b).atan2(m.a - m.c) + FRAC_PI_2)
    };
    EigBounds {
        min_eig: mean - radius,
        max_eig: mean + radius,
        min_eigvec_angle,
    }
}

/// Principal square root of a PSD matrix. Eigenvalues in `[-1e-9, 1e-14]` are
/// treated as rounding noise and clamped to zero.
pub fn psd_sqrt(m: &Sym2) -> Result<Sym2> {
    let eig = eig_bounds(m);
    if eig.min_eig < -SQRT_REJECT_TOL {
        return Err(Error::NotPsd {
            min_eig: eig.min_eig,
        });
    }
    // eigenvalues within rounding of zero would otherwise turn into ~1e-8 roots
    let floor = ROUNDING_EIG * eig.max_eig.abs().max(1.0);
    let root = |x: f64| if x <= floor { 0.0 } else { x.sqrt() };
    let lo = PlaneState::new(eig.min_eigvec_angle);
    let p_lo = projector(lo);
    let p_hi = Sym2::IDENTITY - p_lo;
    Ok(root(eig.min_eig) * p_lo + root(eig.max_eig) * p_hi)
}

/// `Tr(op · ρ)`: the Born probability of the POVM element `op`.
pub fn sandwich(op: &Sym2, rho: &DensityMatrix) -> f64 {
    op.trace_product(rho.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn close(x: &Sym2, y: &Sym2, tol: f64) -> bool {
        x.max_abs_diff(y) <= tol
    }

    #[test]
    fn projector_examples() {
        assert!(close(
            &projector(PlaneState::new(0.0)),
            &Sym2::diag(1.0, 0.0),
            1e-15
        ));
        assert!(close(
            &projector(PlaneState::new(FRAC_PI_2)),
            &Sym2::diag(0.0, 1.0),
            1e-15
        ));
        assert!(close(
            &projector(PlaneState::new(FRAC_PI_4)),
            &Sym2::new(0.5, 0.5, 0.5),
            1e-15
        ));
    }

    #[test]
    fn projector_is_idempotent_with_unit_trace() {
        for i in 0..50 {
            let p = projector(PlaneState::new(0.37 * i as f64));
            assert!(close(&p.square(), &p, 1e-15));
            assert!((p.trace() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eig_bounds_examples() {
        let e = eig_bounds(&Sym2::IDENTITY);
        assert_eq!((e.min_eig, e.max_eig, e.min_eigvec_angle), (1.0, 1.0, 0.0));

        let e = eig_bounds(&Sym2::diag(1.0, 0.0));
        assert_eq!((e.min_eig, e.max_eig), (0.0, 1.0));
        assert!((e.min_eigvec_angle - FRAC_PI_2).abs() < 1e-15);

        // Â at θ = π/2 is diag(0, 1)
        let psi1 = projector(PlaneState::new(FRAC_PI_2));
        let psi0 = projector(PlaneState::new(0.0));
        let a_op = 0.5 * (Sym2::IDENTITY + psi1 - psi0);
        assert!(eig_bounds(&a_op).min_eig.abs() < 1e-15);
    }

    #[test]
    fn min_eigvec_is_an_eigenvector() {
        let m = Sym2::new(0.3, -0.7, 1.9);
        let e = eig_bounds(&m);
        let (x, y) = PlaneState::new(e.min_eigvec_angle).amplitudes();
        let mx = m.a * x + m.b * y;
        let my = m.b * x + m.c * y;
        assert!((mx - e.min_eig * x).abs() < 1e-14);
        assert!((my - e.min_eig * y).abs() < 1e-14);
    }

    #[test]
    fn psd_sqrt_examples() {
        assert!(close(
            &psd_sqrt(&Sym2::IDENTITY).unwrap(),
            &Sym2::IDENTITY,
            1e-15
        ));
        let p = projector(PlaneState::new(0.9));
        assert!(close(&psd_sqrt(&p).unwrap(), &p, 1e-15));
        assert!(close(
            &psd_sqrt(&Sym2::diag(0.36, 1.0)).unwrap(),
            &Sym2::diag(0.6, 1.0),
            1e-15
        ));
    }

    #[test]
    fn psd_sqrt_clamps_noise_and_rejects_negative() {
        let r = psd_sqrt(&Sym2::diag(-1e-12, 1.0)).unwrap();
        assert_eq!(r.a, 0.0);
        assert!(matches!(
            psd_sqrt(&Sym2::diag(-1e-6, 1.0)),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn sandwich_examples() {
        let rho = DensityMatrix::pure(PlaneState::new(1.234));
        assert!((sandwich(&Sym2::IDENTITY, &rho) - 1.0).abs() < 1e-15);
        let zero = DensityMatrix::pure(PlaneState::new(0.0));
        assert_eq!(sandwich(&projector(PlaneState::new(0.0)), &zero), 1.0);
        let half = sandwich(
            &projector(PlaneState::new(FRAC_PI_2)),
            &DensityMatrix::fully_mixed(),
        );
        assert!((half - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Sym2::diag(0.5, 0.5)).is_ok());
        assert!(DensityMatrix::new(Sym2::diag(0.6, 0.5)).is_err());
        assert!(DensityMatrix::new(Sym2::diag(1.2, -0.2)).is_err());
        let d = DensityMatrix::pure(PlaneState::new(0.4)).depolarize(0.3);
        assert!(DensityMatrix::new(*d.matrix()).is_ok());
    }

    #[test]
    fn mat2_gram_and_conjugate_agree_with_sym2() {
        let x = Sym2::new(0.3, -0.2, 0.8);
        let y = Sym2::new(1.1, 0.4, 0.5);
        let m = Mat2::from(x);
        assert!(m.gram().max_abs_diff(&x.square()) < 1e-15);
        assert!(m.conjugate(&y).max_abs_diff(&x.conjugate(&y)) < 1e-15);
        let prod = Mat2::product(&x, &y);
        let back = Mat2::product(&y, &x);
        assert!(prod.transpose().max_abs_diff(&back) < 1e-15);
    }

    #[test]
    fn wrapping_ranges() {
        assert_eq!(PlaneState::new(PI).angle(), PI);
        assert!((PlaneState::new(-PI).angle() - PI).abs() < 1e-15);
        assert!((wrap_half_pi(-FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!((wrap_half_pi(2.0) - (2.0 - PI)).abs() < 1e-15);
    }
}

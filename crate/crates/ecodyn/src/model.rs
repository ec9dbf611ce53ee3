//! Parameters, state and vector field of the three-population system:
//! prey `x` with logistic growth and a sigmoidal (type-III) predation loss,
//! susceptible predators `y` and infected predators `z` with ratio-dependent
//! competition against the shared resource pool `k2 + x`, and mass-action
//! disease incidence `theta * y * z` moving predators from `y` to `z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The eleven positive model constants.
///
/// Construction validates every invariant; all operations downstream assume
/// a valid instance. Use [`ModelParams::new`] with the arguments in the
/// order `a1, a2, a3, b1, k1, k2, c1, c2, c3, theta, p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    /// Intrinsic growth rate of prey (1/time).
    pub(crate) a1: f64,
    /// Intrinsic growth rate of susceptible predators (1/time).
    pub(crate) a2: f64,
    /// Intrinsic growth rate of infected predators (1/time).
    pub(crate) a3: f64,
    /// Intra-specific competition rate of prey (1/(density*time)).
    pub(crate) b1: f64,
    /// Half-saturation constant of the predation response (density^2).
    pub(crate) k1: f64,
    /// Measure of alternative food for predators (density).
    pub(crate) k2: f64,
    /// Predation rate of susceptible predators (1/time).
    pub(crate) c1: f64,
    /// Competition death rate of susceptible predators (1/time).
    pub(crate) c2: f64,
    /// Competition death rate of infected predators (1/time).
    pub(crate) c3: f64,
    /// Disease incidence rate (1/(density*time)).
    pub(crate) theta: f64,
    /// Predation effectiveness on infected predators, in (0, 1].
    pub(crate) p: f64,
}

/// Mirror of [`ModelParams`] used to validate deserialized values.
#[derive(Deserialize)]
struct RawParams {
    a1: f64,
    a2: f64,
    a3: f64,
    b1: f64,
    k1: f64,
    k2: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    theta: f64,
    p: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        ModelParams::new(r.a1, r.a2, r.a3, r.b1, r.k1, r.k2, r.c1, r.c2, r.c3, r.theta, r.p)
    }
}

impl ModelParams {
    /// Validates and builds a parameter set.
    ///
    /// Invariants: every constant strictly positive and finite, `p <= 1`,
    /// and `a2 >= a3` (the susceptible growth rate dominates the infected one).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a1: f64,
        a2: f64,
        a3: f64,
        b1: f64,
        k1: f64,
        k2: f64,
        c1: f64,
        c2: f64,
        c3: f64,
        theta: f64,
        p: f64,
    ) -> Result<Self> {
        let named = [
            ("a1", a1),
            ("a2", a2),
            ("a3", a3),
            ("b1", b1),
            ("k1", k1),
            ("k2", k2),
            ("c1", c1),
            ("c2", c2),
            ("c3", c3),
            ("theta", theta),
            ("p", p),
        ];
        for (name, v) in named {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Validation(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        if p > 1.0 {
            return Err(Error::Validation(format!("p must lie in (0, 1], got {p}")));
        }
        if a2 < a3 {
            return Err(Error::Validation(format!(
                "a2 must be >= a3, got a2 = {a2}, a3 = {a3}"
            )));
        }
        Ok(Self {
            a1,
            a2,
            a3,
            b1,
            k1,
            k2,
            c1,
            c2,
            c3,
            theta,
            p,
        })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a2(&self) -> f64 {
        self.a2
    }
    pub fn a3(&self) -> f64 {
        self.a3
    }
    pub fn b1(&self) -> f64 {
        self.b1
    }
    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn k2(&self) -> f64 {
        self.k2
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn c3(&self) -> f64 {
        self.c3
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn p(&self) -> f64 {
        self.p
    }

    /// Prey carrying capacity `a1 / b1`, the natural upper bound for `x`.
    pub fn carrying_capacity(&self) -> f64 {
        self.a1 / self.b1
    }
}

/// Population densities `(x, y, z)`: prey, susceptible predators, infected
/// predators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PopulationState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            z: a[2],
        }
    }

    /// Euclidean norm of the coordinate triple.
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Total population `x + y + z`.
    pub fn total(&self) -> f64 {
        self.x + self.y + self.z
    }

    pub fn is_nonnegative(&self) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.z >= 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Time derivatives `(dx/dt, dy/dt, dz/dt)` of the populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeVector {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl DerivativeVector {
    pub fn as_array(&self) -> [f64; 3] {
        [self.dx, self.dy, self.dz]
    }

    pub fn norm(&self) -> f64 {
        (self.dx * self.dx + self.dy * self.dy + self.dz * self.dz).sqrt()
    }
}

/// Jacobian of the vector field; `m[i][j]` is the partial derivative of the
/// i-th component with respect to the j-th coordinate (0-based, order x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianMatrix {
    pub m: [[f64; 3]; 3],
}

impl JacobianMatrix {
    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Coefficients `[b, c, d]` of the characteristic cubic
    /// `lambda^3 + b lambda^2 + c lambda + d`.
    pub fn characteristic_coeffs(&self) -> [f64; 3] {
        let m = &self.m;
        let b = -self.trace();
        // sum of the three 2x2 principal minors
        let c = (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[0][0] * m[1][1] - m[0][1] * m[1][0]);
        let d = -self.det();
        [b, c, d]
    }
}

/// Right-hand side of the system at `state`.
///
/// Every term carries a factor of the component it drains or feeds, so each
/// coordinate plane `{x = 0}`, `{y = 0}`, `{z = 0}` is exactly invariant:
/// a zero component yields an exactly zero derivative component.
pub fn rhs(state: &PopulationState, params: &ModelParams) -> DerivativeVector {
    let PopulationState { x, y, z } = *state;
    let p = params;
    let d1 = p.k1 + x * x;
    let d2 = p.k2 + x;
    let dx = p.a1 * x - p.b1 * x * x - p.c1 * x * x * y / d1 - p.p * p.c1 * x * x * z / d1;
    let dy = p.a2 * y - p.c2 * y * (y + z) / d2 - p.theta * y * z;
    let dz = p.theta * y * z + p.a3 * z - p.c3 * z * (y + z) / d2;
    DerivativeVector { dx, dy, dz }
}

/// Analytic Jacobian of [`rhs`] at `state` (general form, valid at any point
/// with `x != -k2`).
pub fn jacobian(state: &PopulationState, params: &ModelParams) -> JacobianMatrix {
    let PopulationState { x, y, z } = *state;
    let p = params;
    let d1 = x * x + p.k1;
    let d1sq = d1 * d1;
    let d2 = x + p.k2;
    let d2sq = d2 * d2;
    let x3 = x * x * x;

    let m11 = p.a1 - 2.0 * p.b1 * x - 2.0 * p.c1 * x * y / d1 + 2.0 * p.c1 * x3 * y / d1sq
        - 2.0 * p.p * p.c1 * x * z / d1
        + 2.0 * p.p * p.c1 * x3 * z / d1sq;
    let m12 = -p.c1 * x * x / d1;
    let m13 = -p.p * p.c1 * x * x / d1;
    let m21 = p.c2 * y * (y + z) / d2sq;
    let m22 = p.a2 - p.c2 * (2.0 * y + z) / d2 - p.theta * z;
    let m23 = -p.c2 * y / d2 - p.theta * y;
    let m31 = p.c3 * z * (y + z) / d2sq;
    let m32 = p.theta * z - p.c3 * z / d2;
    let m33 = p.theta * y + p.a3 - p.c3 * (y + 2.0 * z) / d2;

    JacobianMatrix {
        m: [[m11, m12, m13], [m21, m22, m23], [m31, m32, m33]],
    }
}

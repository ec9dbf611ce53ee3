//! Local stability classification by Jacobian eigenvalues, the closed-form
//! stability screens for the planar families, Routh-Hurwitz quantities for
//! coexistence branches, the global-stability quadratic form, and the
//! persistence conditions built on an average Lyapunov function.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{
    e5_polynomial, e6_polynomial, enumerate_equilibria, Equilibrium, FamilyTag, TOL_FEAS,
};
use crate::error::{Error, Result};
use crate::model::{jacobian, JacobianMatrix, ModelParams, PopulationState};
use crate::roots::cubic_roots;

/// Eigenvalue real parts within this band around zero give a Marginal
/// verdict instead of a sign call.
pub const TOL_EIG: f64 = 1e-7;

/// Sign-based stability verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "Stable",
            Verdict::Unstable => "Unstable",
            Verdict::Marginal => "Marginal",
        })
    }
}

/// Routh-Hurwitz quantities of the characteristic cubic
/// `lambda^3 + A1 lambda^2 + A2 lambda + A3`; all three roots lie in the
/// open left half-plane iff `A1 > 0`, `A3 > 0` and `A1 A2 - A3 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouthHurwitz {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a1a2_minus_a3: f64,
    pub satisfied: bool,
}

/// Both sides of the two stability screening inequalities for a planar
/// (`E5` or `E6`) branch; `holds` is their conjunction. These are reporting
/// aids: the eigenvalue classifier is authoritative for the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConditions {
    pub lhs1: f64,
    pub rhs1: f64,
    pub lhs2: f64,
    pub rhs2: f64,
    pub holds: bool,
}

/// Eigenvalues, verdict and family-specific condition values at one
/// equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub equilibrium: Equilibrium,
    pub eigenvalues: [Complex64; 3],
    pub verdict: Verdict,
    pub rh: Option<RouthHurwitz>,
    pub condition_flags: BTreeMap<String, bool>,
}

/// Eigenvalues of a 3x3 Jacobian, sorted by `(re, im)`.
///
/// At the coordinate-plane equilibria the Jacobian is exactly block
/// triangular (whole off-diagonal rows or columns vanish identically), so
/// those eigenvalues are read off the structure exactly; the coupled case
/// falls back to the characteristic cubic solved in closed form and
/// Newton-polished.
pub fn eigenvalues(j: &JacobianMatrix) -> Result<[Complex64; 3]> {
    let m = &j.m;
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure);
    }
    for i in 0..3 {
        let (r, s) = ((i + 1) % 3, (i + 2) % 3);
        let row_zero = m[i][r] == 0.0 && m[i][s] == 0.0;
        let col_zero = m[r][i] == 0.0 && m[s][i] == 0.0;
        if row_zero || col_zero {
            let (l1, l2) = eigenvalues_2x2(m[r][r], m[r][s], m[s][r], m[s][s]);
            let mut out = [Complex64::new(m[i][i], 0.0), l1, l2];
            out.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
            return Ok(out);
        }
    }
    let [b, c, d] = j.characteristic_coeffs();
    if !(b.is_finite() && c.is_finite() && d.is_finite()) {
        return Err(Error::EigenFailure);
    }
    let roots = cubic_roots(b, c, d);
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok(roots)
}

/// Eigenvalues of a real 2x2 block; triangular blocks are exact.
fn eigenvalues_2x2(a: f64, b: f64, c: f64, d: f64) -> (Complex64, Complex64) {
    if b == 0.0 || c == 0.0 {
        return (Complex64::new(a, 0.0), Complex64::new(d, 0.0));
    }
    let mean = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (
            Complex64::new(mean + s, 0.0),
            Complex64::new(mean - s, 0.0),
        )
    } else {
        let s = (-disc).sqrt();
        (Complex64::new(mean, s), Complex64::new(mean, -s))
    }
}

fn verdict_from(eigs: &[Complex64; 3]) -> Verdict {
    if eigs.iter().any(|l| l.re > TOL_EIG) {
        Verdict::Unstable
    } else if eigs.iter().all(|l| l.re < -TOL_EIG) {
        Verdict::Stable
    } else {
        Verdict::Marginal
    }
}

/// Classifies one equilibrium: eigenvalues of the general Jacobian there,
/// verdict by real-part signs, and the family-specific condition flags
/// (screening inequalities for `E5`/`E6`, Routh-Hurwitz for `E*`).
pub fn classify(eq: &Equilibrium, params: &ModelParams) -> Result<StabilityReport> {
    let j = jacobian(&eq.state, params);
    let eigs = eigenvalues(&j)?;
    let verdict = verdict_from(&eigs);

    let mut flags = BTreeMap::new();
    let mut rh = None;
    match eq.family.tag {
        FamilyTag::E5 => {
            let c = e5_conditions(eq, params)?;
            flags.insert("condition_i".to_string(), c.lhs1 > c.rhs1);
            flags.insert("condition_ii".to_string(), c.lhs2 > c.rhs2);
            flags.insert("holds".to_string(), c.holds);
        }
        FamilyTag::E6 => {
            let c = e6_conditions(eq, params)?;
            flags.insert("condition_i".to_string(), c.lhs1 > c.rhs1);
            flags.insert("condition_ii".to_string(), c.lhs2 > c.rhs2);
            flags.insert("holds".to_string(), c.holds);
        }
        FamilyTag::EStar => {
            let r = routh_hurwitz(eq, params)?;
            flags.insert("routh_hurwitz".to_string(), r.satisfied);
            rh = Some(r);
        }
        _ => {}
    }

    Ok(StabilityReport {
        equilibrium: *eq,
        eigenvalues: eigs,
        verdict,
        rh,
        condition_flags: flags,
    })
}

/// Stability screening inequalities for a prey-plus-susceptible branch
/// `E5 = (x5, y5, 0)`:
///
/// * (i)  `b1 x5 + c1 x5 y5/(x5^2+k1)  >  2 c1 x5^3 y5/(x5^2+k1)^2`
/// * (ii) `c1 y5/(x5+k2)  >  theta y5 + a3`
pub fn e5_conditions(eq: &Equilibrium, params: &ModelParams) -> Result<StabilityConditions> {
    if eq.family.tag != FamilyTag::E5 {
        return Err(Error::WrongFamily {
            expected: "E5",
            actual: eq.label(),
        });
    }
    let p = params;
    let (x5, y5) = (eq.state.x, eq.state.y);
    let d1 = x5 * x5 + p.k1;
    let lhs1 = p.b1 * x5 + p.c1 * x5 * y5 / d1;
    let rhs1 = 2.0 * p.c1 * x5 * x5 * x5 * y5 / (d1 * d1);
    let lhs2 = p.c1 * y5 / (x5 + p.k2);
    let rhs2 = p.theta * y5 + p.a3;
    Ok(StabilityConditions {
        lhs1,
        rhs1,
        lhs2,
        rhs2,
        holds: lhs1 > rhs1 && lhs2 > rhs2,
    })
}

/// Stability screening inequalities for a prey-plus-infected branch
/// `E6 = (x6, 0, z6)`:
///
/// * (i)  `b1 x6 + p c1 x6 z6/(x6^2+k1)  >  2 p c1 x6^3 z6/(x6^2+k1)^2`
/// * (ii) `c2 z6/(x6+k2) + theta z6  >  a2`
pub fn e6_conditions(eq: &Equilibrium, params: &ModelParams) -> Result<StabilityConditions> {
    if eq.family.tag != FamilyTag::E6 {
        return Err(Error::WrongFamily {
            expected: "E6",
            actual: eq.label(),
        });
    }
    let p = params;
    let (x6, z6) = (eq.state.x, eq.state.z);
    let d1 = x6 * x6 + p.k1;
    let lhs1 = p.b1 * x6 + p.p * p.c1 * x6 * z6 / d1;
    let rhs1 = 2.0 * p.p * p.c1 * x6 * x6 * x6 * z6 / (d1 * d1);
    let lhs2 = p.c2 * z6 / (x6 + p.k2) + p.theta * z6;
    let rhs2 = p.a2;
    Ok(StabilityConditions {
        lhs1,
        rhs1,
        lhs2,
        rhs2,
        holds: lhs1 > rhs1 && lhs2 > rhs2,
    })
}

/// Routh-Hurwitz quantities of the characteristic cubic at a coexistence
/// branch, assembled from the Jacobian entries.
pub fn routh_hurwitz(eq: &Equilibrium, params: &ModelParams) -> Result<RouthHurwitz> {
    if eq.family.tag != FamilyTag::EStar {
        return Err(Error::WrongFamily {
            expected: "E*",
            actual: eq.label(),
        });
    }
    let m = jacobian(&eq.state, params).m;
    let a1 = -m[0][0] - m[1][1] - m[2][2];
    let a2 = m[0][0] * m[1][1] + m[0][0] * m[2][2] + m[1][1] * m[2][2]
        - m[0][2] * m[2][0]
        - m[1][2] * m[2][1]
        - m[1][0] * m[0][1];
    let a3 = m[0][0] * m[1][2] * m[2][1] + m[0][1] * m[1][0] * m[2][2]
        + m[0][2] * m[1][1] * m[2][0]
        - m[0][0] * m[1][1] * m[2][2]
        - m[0][1] * m[1][2] * m[2][0]
        - m[0][2] * m[1][0] * m[2][1];
    let a1a2_minus_a3 = a1 * a2 - a3;
    Ok(RouthHurwitz {
        a1,
        a2,
        a3,
        a1a2_minus_a3,
        satisfied: a1 > 0.0 && a3 > 0.0 && a1a2_minus_a3 > 0.0,
    })
}

/// Entries and leading principal minors of the symmetric quadratic form
/// whose positive definiteness certifies global stability of a coexistence
/// equilibrium. All entries are functions of the prey variable `x` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovForm {
    /// Evaluation abscissa.
    pub x: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

pub fn lyapunov_form(x: f64, e_star: &Equilibrium, params: &ModelParams) -> Result<LyapunovForm> {
    if e_star.family.tag != FamilyTag::EStar {
        return Err(Error::WrongFamily {
            expected: "E*",
            actual: e_star.label(),
        });
    }
    let p = params;
    let (xs, ys, zs) = (e_star.state.x, e_star.state.y, e_star.state.z);
    let dxs = xs * xs + p.k1;
    let dx = x * x + p.k1;

    let a = p.b1 - p.c1 * (ys + p.p * zs) * (x * xs - p.k1) / (dxs * dx);
    let b = p.c2 / (x + p.k2);
    let c = p.c3 / (x + p.k2);
    let f = (p.c2 + p.c3) / (2.0 * (x + p.k2));
    let h = 0.5 * (p.c1 * x / dx - p.c2 * (ys + zs) / ((xs + p.k2) * (x + p.k2)));
    let g = 0.5 * (p.p * p.c1 * x / dx - p.c3 * (ys + zs) / ((xs + p.k2) * (x + p.k2)));

    let p1 = a;
    let p2 = a * b - h * h;
    let p3 = a * b * c + 2.0 * f * g * h - a * f * f - b * g * g - c * h * h;

    Ok(LyapunovForm {
        x,
        a,
        b,
        c,
        f,
        g,
        h,
        p1,
        p2,
        p3,
    })
}

/// Outcome of sampling the quadratic-form minors over a prey grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub holds_on_grid: bool,
    pub first_failure_x: Option<f64>,
}

/// Evaluates [`lyapunov_form`] on a uniform grid over `[0, x_max]`
/// (`n_samples == 1` degenerates to the single point `x_max`); the check
/// holds iff `P1, P2, P3 > 0` at every sample.
pub fn global_stability_check(
    e_star: &Equilibrium,
    params: &ModelParams,
    x_max: f64,
    n_samples: usize,
) -> Result<GridCheck> {
    if !x_max.is_finite() || x_max <= 0.0 {
        return Err(Error::Validation(format!("x_max must be > 0, got {x_max}")));
    }
    if n_samples == 0 {
        return Err(Error::Validation("n_samples must be >= 1".into()));
    }
    for i in 0..n_samples {
        let x = if n_samples == 1 {
            x_max
        } else {
            x_max * i as f64 / (n_samples - 1) as f64
        };
        let form = lyapunov_form(x, e_star, params)?;
        if !(form.p1 > 0.0 && form.p2 > 0.0 && form.p3 > 0.0) {
            return Ok(GridCheck {
                holds_on_grid: false,
                first_failure_x: Some(x),
            });
        }
    }
    Ok(GridCheck {
        holds_on_grid: true,
        first_failure_x: None,
    })
}

/// Tri-state outcome of one persistence condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionStatus {
    Holds,
    Fails,
    /// The condition depends on equilibrium branches that do not exist for
    /// these parameters.
    NotEvaluable,
}

impl ConditionStatus {
    fn from_bool(v: bool) -> Self {
        if v {
            ConditionStatus::Holds
        } else {
            ConditionStatus::Fails
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, ConditionStatus::Holds)
    }
}

/// The four persistence conditions plus the average-Lyapunov values at every
/// feasible boundary equilibrium for the given positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceReport {
    pub cond1: ConditionStatus,
    pub cond2: ConditionStatus,
    pub cond3: ConditionStatus,
    pub cond4: ConditionStatus,
    pub pi_values: BTreeMap<String, f64>,
    pub gammas: [f64; 3],
}

/// Logarithmic growth rate of the product function `x^g1 y^g2 z^g3` along the
/// flow, written with the per-capita growth expressions so it is well defined
/// even where a population is zero.
pub fn average_lyapunov_pi(state: &PopulationState, params: &ModelParams, gammas: [f64; 3]) -> f64 {
    debug_assert!(gammas.iter().all(|g| *g > 0.0));
    let p = params;
    let PopulationState { x, y, z } = *state;
    let d1 = x * x + p.k1;
    let d2 = x + p.k2;
    let t1 = p.a1 - p.b1 * x - p.c1 * x * y / d1 - p.p * p.c1 * x * z / d1;
    let t2 = p.a2 - p.c2 * (y + z) / d2 - p.theta * z;
    let t3 = p.a3 - p.c3 * (y + z) / d2 + p.theta * y;
    gammas[0] * t1 + gammas[1] * t2 + gammas[2] * t3
}

/// Evaluates the four persistence conditions. Conditions 3 and 4 quantify
/// over the feasible `E5` and `E6` branches and hold only if they hold on
/// every branch; with no such branch they are reported as not evaluable.
pub fn persistence_conditions(params: &ModelParams, gammas: [f64; 3]) -> Result<PersistenceReport> {
    if gammas.iter().any(|g| !g.is_finite() || *g <= 0.0) {
        return Err(Error::Validation(format!(
            "persistence weights must be strictly positive, got {gammas:?}"
        )));
    }
    let p = params;

    let cond1 = ConditionStatus::from_bool(p.a2 * p.c3 / p.a3 > p.c2 + p.k2 * p.theta);
    let cond2 = ConditionStatus::from_bool(p.a3 * p.c2 > p.a2 * p.c3);

    let e5_roots: Vec<f64> = e5_polynomial(p)
        .real_roots()?
        .into_iter()
        .filter(|x| *x >= -TOL_FEAS)
        .collect();
    let cond3 = if e5_roots.is_empty() {
        ConditionStatus::NotEvaluable
    } else {
        let per_branch = e5_roots.iter().all(|&x5| {
            p.a1 > p.b1 * x5 + p.a2 * p.c1 * x5 * (p.k2 + x5) / (p.c2 * (p.k1 + x5 * x5))
        });
        ConditionStatus::from_bool(p.a3 * p.c2 > p.a2 * p.c3 && per_branch)
    };

    let e6_roots: Vec<f64> = e6_polynomial(p)
        .real_roots()?
        .into_iter()
        .filter(|x| *x >= -TOL_FEAS)
        .collect();
    let cond4 = if e6_roots.is_empty() {
        ConditionStatus::NotEvaluable
    } else {
        let per_branch = e6_roots.iter().all(|&x6| {
            p.a2 * p.c3 / p.a3 > p.c2 + (p.k2 + x6) * p.theta
                && p.a1 * p.c3 * (p.k1 + x6 * x6)
                    > x6 * (p.a3 * p.c1 * p.p * (p.k2 + x6) + p.b1 * p.c3 * (p.k1 + x6 * x6))
        });
        ConditionStatus::from_bool(per_branch)
    };

    let mut pi_values = BTreeMap::new();
    let set = enumerate_equilibria(p)?;
    for eq in set.feasible() {
        if eq.family.tag != FamilyTag::EStar {
            pi_values.insert(eq.label(), average_lyapunov_pi(&eq.state, p, gammas));
        }
    }

    Ok(PersistenceReport {
        cond1,
        cond2,
        cond3,
        cond4,
        pi_values,
        gammas,
    })
}

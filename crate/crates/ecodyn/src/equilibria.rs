//! Equilibrium enumeration: the fixed-point polynomials for each family,
//! closed-form companion coordinates, feasibility filtering and residuals.
//!
//! Families, in report order:
//!
//! * `E0 (0,0,0)` extinction
//! * `E1 (0,0,a3 k2/c3)` infected predators only
//! * `E2 (0,a2 k2/c2,0)` susceptible predators only
//! * `E3 (0,y3,z3)` both predator classes, no prey (when feasible)
//! * `E4 (a1/b1,0,0)` prey at carrying capacity
//! * `E5 (x5,y5,0)` prey + susceptible predators, one branch per real root of a cubic
//! * `E6 (x6,0,z6)` prey + infected predators, one branch per real root of a cubic
//! * `E* (x*,y*,z*)` coexistence, one branch per real root of a quartic

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs, ModelParams, PopulationState};
use crate::roots::Polynomial;

pub use crate::roots::{TOL_IMAG, TOL_ROOT};

/// Coordinates down to `-TOL_FEAS` count as feasible and are clamped to zero.
pub const TOL_FEAS: f64 = 1e-10;
/// Below this absolute denominator magnitude the closed-form interior
/// coordinates are treated as singular.
pub const TOL_DENOM: f64 = 1e-12;

/// Equilibrium family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    E0,
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    EStar,
}

impl FamilyTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyTag::E0 => "E0",
            FamilyTag::E1 => "E1",
            FamilyTag::E2 => "E2",
            FamilyTag::E3 => "E3",
            FamilyTag::E4 => "E4",
            FamilyTag::E5 => "E5",
            FamilyTag::E6 => "E6",
            FamilyTag::EStar => "E*",
        }
    }

    /// Whether the family can carry several branches (one per polynomial root).
    pub fn is_branched(&self) -> bool {
        matches!(self, FamilyTag::E5 | FamilyTag::E6 | FamilyTag::EStar)
    }
}

/// Family tag plus 1-based branch index; branches are ordered by ascending
/// prey coordinate. `E0`..`E4` always carry branch index 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EquilibriumFamily {
    pub tag: FamilyTag,
    pub branch_index: usize,
}

impl EquilibriumFamily {
    pub fn new(tag: FamilyTag, branch_index: usize) -> Self {
        debug_assert!(branch_index >= 1);
        Self { tag, branch_index }
    }

    /// Label in the conventional superscript form: `E3`, `E5^I`, `E*^II`, ...
    pub fn label(&self) -> String {
        if self.tag.is_branched() {
            format!("{}^{}", self.tag.as_str(), roman(self.branch_index))
        } else {
            self.tag.as_str().to_string()
        }
    }
}

impl std::fmt::Display for EquilibriumFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

fn roman(n: usize) -> String {
    const ONES: [&str; 10] = ["", "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"];
    match n {
        1..=9 => ONES[n].to_string(),
        _ => n.to_string(),
    }
}

/// A located fixed point. Coordinates may be negative (such branches are
/// reported but flagged infeasible); feasible coordinates within `TOL_FEAS`
/// of zero are clamped to exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub family: EquilibriumFamily,
    pub state: PopulationState,
    pub feasible: bool,
    /// Euclidean norm of the vector field at `state`.
    pub residual: f64,
}

impl Equilibrium {
    fn locate(tag: FamilyTag, branch_index: usize, raw: [f64; 3], params: &ModelParams) -> Self {
        let feasible = raw.iter().all(|&v| v >= -TOL_FEAS);
        let state = if feasible {
            PopulationState::from_array(raw.map(|v| if v < 0.0 { 0.0 } else { v }))
        } else {
            PopulationState::from_array(raw)
        };
        let residual = rhs(&state, params).norm();
        Self {
            family: EquilibriumFamily::new(tag, branch_index),
            state,
            feasible,
            residual,
        }
    }

    pub fn label(&self) -> String {
        self.family.label()
    }
}

/// Result of [`enumerate_equilibria`]: every branch of every family plus any
/// per-branch warnings (a singular closed form omits that branch only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSet {
    pub equilibria: Vec<Equilibrium>,
    pub warnings: Vec<String>,
}

impl EquilibriumSet {
    pub fn feasible(&self) -> impl Iterator<Item = &Equilibrium> {
        self.equilibria.iter().filter(|e| e.feasible)
    }

    pub fn find(&self, tag: FamilyTag, branch_index: usize) -> Option<&Equilibrium> {
        self.equilibria
            .iter()
            .find(|e| e.family.tag == tag && e.family.branch_index == branch_index)
    }
}

/// Quartic whose real roots are the prey coordinates of coexistence
/// equilibria. Coefficients returned highest degree first.
pub fn interior_polynomial(params: &ModelParams) -> Polynomial {
    let p = params;
    let th = p.theta;
    let a4 = p.b1 * th * th;
    let a3 = p.b1 * p.k2 * th * th - p.a1 * th * th + p.b1 * p.c2 * th - p.b1 * p.c3 * th;
    let a2 = -p.a1 * p.k2 * th * th + p.a2 * p.c1 * th * p.p + p.b1 * p.k1 * th * th
        - p.a1 * p.c2 * th
        + p.a1 * p.c3 * th
        - p.a3 * p.c1 * th;
    let a1 = p.a2 * p.c1 * p.k2 * th * p.p + p.b1 * p.k1 * p.k2 * th * th - p.a1 * p.k1 * th * th
        - p.a2 * p.c1 * p.c3 * p.p
        + p.a3 * p.c1 * p.c2 * p.p
        - p.a3 * p.c1 * p.k2 * th
        + p.b1 * p.c2 * p.k1 * th
        - p.b1 * p.c3 * p.k1 * th
        + p.a2 * p.c1 * p.c3
        - p.a3 * p.c1 * p.c2;
    let a0 = -p.a1 * p.k1 * p.k2 * th * th - p.a1 * p.c2 * p.k1 * th + p.a1 * p.c3 * p.k1 * th;
    Polynomial::new(vec![a4, a3, a2, a1, a0]).expect("leading coefficient b1*theta^2 > 0")
}

/// Closed-form predator coordinates `(y*, z*)` of the coexistence branch at
/// prey abscissa `x_star`, singular when the shared denominator vanishes.
pub fn interior_yz(x_star: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let p = params;
    let th = p.theta;
    let inner = th * x_star + p.k2 * th + p.c2 - p.c3;
    if inner.abs() < TOL_DENOM {
        return Err(Error::DegenerateDenominator {
            x: x_star,
            denom: inner,
        });
    }
    let den = th * inner;
    let y = (-p.a3 * th * x_star - p.a3 * p.k2 * th + p.a2 * p.c3 - p.a3 * p.c2) / den;
    let z = -(-p.a2 * th * x_star - p.a2 * p.k2 * th + p.a2 * p.c3 - p.a3 * p.c2) / den;
    Ok((y, z))
}

/// Cubic whose real roots are the prey coordinates of prey-plus-susceptible
/// equilibria `E5`.
pub fn e5_polynomial(params: &ModelParams) -> Polynomial {
    let p = params;
    let a3 = p.b1 * p.c2;
    let a2 = -p.a1 * p.c2 + p.a2 * p.c1;
    let a1 = p.a2 * p.c1 * p.k2 + p.b1 * p.c2 * p.k1;
    let a0 = -p.a1 * p.c2 * p.k1;
    Polynomial::new(vec![a3, a2, a1, a0]).expect("leading coefficient b1*c2 > 0")
}

/// Susceptible-predator coordinate on an `E5` branch.
pub fn e5_y(x5: f64, params: &ModelParams) -> f64 {
    params.a2 * (x5 + params.k2) / params.c2
}

/// Cubic whose real roots are the prey coordinates of prey-plus-infected
/// equilibria `E6`.
pub fn e6_polynomial(params: &ModelParams) -> Polynomial {
    let p = params;
    let a3 = p.b1 * p.c3;
    let a2 = -p.a1 * p.c3 + p.a3 * p.c1 * p.p;
    let a1 = p.a3 * p.c1 * p.k2 * p.p + p.b1 * p.c3 * p.k1;
    let a0 = -p.a1 * p.c3 * p.k1;
    Polynomial::new(vec![a3, a2, a1, a0]).expect("leading coefficient b1*c3 > 0")
}

/// Infected-predator coordinate on an `E6` branch.
pub fn e6_z(x6: f64, params: &ModelParams) -> f64 {
    params.a3 * (x6 + params.k2) / params.c3
}

/// Predator coordinates `(y3, z3)` of the prey-free equilibrium `E3`;
/// `None` when either coordinate is negative (the branch does not exist).
pub fn e3_coordinates(params: &ModelParams) -> Result<Option<(f64, f64)>> {
    let p = params;
    let th = p.theta;
    let inner = p.k2 * th + p.c2 - p.c3;
    if inner.abs() < TOL_DENOM {
        return Err(Error::DegenerateDenominator {
            x: 0.0,
            denom: inner,
        });
    }
    let den = th * inner;
    let y3 = (-p.a3 * p.k2 * th + p.a2 * p.c3 - p.a3 * p.c2) / den;
    let z3 = -(-p.a2 * p.k2 * th + p.a2 * p.c3 - p.a3 * p.c2) / den;
    if y3 < -TOL_FEAS || z3 < -TOL_FEAS {
        return Ok(None);
    }
    Ok(Some((y3, z3)))
}

/// Distinct real roots of `poly`, ascending.
pub fn real_roots(poly: &Polynomial) -> Result<Vec<f64>> {
    poly.real_roots()
}

/// Enumerates every equilibrium branch of every family, in deterministic
/// order (`E0..E4`, then `E5`, `E6`, `E*` branches by ascending prey
/// coordinate). Branches with negative coordinates are returned flagged
/// infeasible rather than suppressed. A singular interior closed form drops
/// only that branch and records a warning.
pub fn enumerate_equilibria(params: &ModelParams) -> Result<EquilibriumSet> {
    let p = params;
    let mut out = Vec::new();
    let mut warnings = Vec::new();

    out.push(Equilibrium::locate(FamilyTag::E0, 1, [0.0, 0.0, 0.0], p));
    out.push(Equilibrium::locate(
        FamilyTag::E1,
        1,
        [0.0, 0.0, p.a3 * p.k2 / p.c3],
        p,
    ));
    out.push(Equilibrium::locate(
        FamilyTag::E2,
        1,
        [0.0, p.a2 * p.k2 / p.c2, 0.0],
        p,
    ));
    match e3_coordinates(p) {
        Ok(Some((y3, z3))) => out.push(Equilibrium::locate(FamilyTag::E3, 1, [0.0, y3, z3], p)),
        Ok(None) => {}
        Err(e) => warnings.push(format!("E3 omitted: {e}")),
    }
    out.push(Equilibrium::locate(
        FamilyTag::E4,
        1,
        [p.a1 / p.b1, 0.0, 0.0],
        p,
    ));

    for (idx, x5) in e5_polynomial(p).real_roots()?.into_iter().enumerate() {
        out.push(Equilibrium::locate(
            FamilyTag::E5,
            idx + 1,
            [x5, e5_y(x5, p), 0.0],
            p,
        ));
    }
    for (idx, x6) in e6_polynomial(p).real_roots()?.into_iter().enumerate() {
        out.push(Equilibrium::locate(
            FamilyTag::E6,
            idx + 1,
            [x6, 0.0, e6_z(x6, p)],
            p,
        ));
    }
    let mut branch = 0;
    for x_star in interior_polynomial(p).real_roots()? {
        match interior_yz(x_star, p) {
            Ok((y, z)) => {
                branch += 1;
                out.push(Equilibrium::locate(FamilyTag::EStar, branch, [x_star, y, z], p));
            }
            Err(e) => warnings.push(format!("E* branch at x = {x_star} omitted: {e}")),
        }
    }

    Ok(EquilibriumSet {
        equilibria: out,
        warnings,
    })
}

//! Adaptive time integration of the system with positivity and boundedness
//! monitors.
//!
//! The integrator is an embedded Dormand-Prince 5(4) pair with PI step-size
//! control and quartic dense output, sampled on a uniform grid. Coordinate
//! planes are invariant for this vector field, so a component that starts at
//! exactly zero is held at exactly zero throughout; components that dip
//! negative within `CLAMP_TOL` of zero are clamped and logged, anything
//! below that aborts the run.

use serde::{Deserialize, Serialize};

use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::model::{rhs, ModelParams, PopulationState};

/// Most negative raw component tolerated before the run aborts with
/// [`Error::PositivityViolation`].
pub const CLAMP_TOL: f64 = 1e-9;

/// Integration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub max_step: f64,
    /// Uniform sampling interval of the stored trajectory.
    pub output_stride: f64,
}

impl IntegratorOptions {
    /// Defaults for a horizon `t_end`: `rel_tol = 1e-8`, `abs_tol = 1e-10`,
    /// `max_step = t_end/100`, `output_stride = t_end/1000`.
    pub fn new(t_end: f64) -> Result<Self> {
        Self::with(1e-8, 1e-10, t_end, t_end / 100.0, t_end / 1000.0)
    }

    pub fn with(
        rel_tol: f64,
        abs_tol: f64,
        t_end: f64,
        max_step: f64,
        output_stride: f64,
    ) -> Result<Self> {
        let opts = Self {
            rel_tol,
            abs_tol,
            t_end,
            max_step,
            output_stride,
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("t_end", self.t_end),
            ("max_step", self.max_step),
            ("output_stride", self.output_stride),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Validation(format!(
                    "integrator option {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Time-sampled solution with step statistics and positivity monitors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Strictly increasing sample times starting at 0.
    pub times: Vec<f64>,
    pub states: Vec<PopulationState>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Most negative raw component seen before clamping.
    pub min_component: f64,
    /// Maximum of `x + y + z` over the trajectory.
    pub sup_omega: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> PopulationState {
        *self.states.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }
}

/// Empirical check of the eventual-bound property of `omega = x + y + z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessCheck {
    pub mu: f64,
    /// Empirical eventual bound on `omega` (max over the trailing half,
    /// inflated by 1e-6).
    pub bound: f64,
    pub holds_eventually: bool,
    /// First sample time from which `omega` stays at or below `bound`.
    pub t_entry: Option<f64>,
}

/// Verdict of [`convergence_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub t_converged: Option<f64>,
}

// Dormand-Prince 5(4) tableau (stage nodes omitted: the field is autonomous).
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// difference between the 5th and embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense-output weights
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

// PI controller constants (classic values for this pair)
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

type Vec3 = [f64; 3];

fn add_scaled(y: &Vec3, h: f64, terms: &[(f64, &Vec3)]) -> Vec3 {
    let mut out = *y;
    for (w, k) in terms {
        for i in 0..3 {
            out[i] += h * w * k[i];
        }
    }
    out
}

/// Integrates the system from `init` over `[0, opts.t_end]`.
///
/// The returned trajectory is sampled at `opts.output_stride` (plus the
/// final time), every stored state is nonnegative, and components that start
/// at exactly zero remain exactly zero.
pub fn integrate(
    params: &ModelParams,
    init: &PopulationState,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    if !init.is_finite() || !init.is_nonnegative() {
        return Err(Error::Validation(format!(
            "initial state must be nonnegative and finite, got {init:?}"
        )));
    }

    // components starting at zero are structurally held at zero
    let zero_mask = [init.x == 0.0, init.y == 0.0, init.z == 0.0];
    let f = |y: &Vec3| -> Vec3 {
        let mut out = rhs(&PopulationState::from_array(*y), params).as_array();
        for i in 0..3 {
            if zero_mask[i] {
                out[i] = 0.0;
            }
        }
        out
    };
    let apply_mask = |y: &mut Vec3| {
        for i in 0..3 {
            if zero_mask[i] {
                y[i] = 0.0;
            }
        }
    };

    let mut t = 0.0;
    let mut y = init.as_array();
    let mut k1 = f(&y);
    let mut h = initial_step(&f, &y, &k1, opts);

    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![*init],
        accepted_steps: 0,
        rejected_steps: 0,
        min_component: y.iter().copied().fold(f64::INFINITY, f64::min),
        sup_omega: init.total(),
    };
    let mut next_sample = opts.output_stride;
    let mut err_old: f64 = 1e-4;

    while t < opts.t_end {
        if h < 4.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }
        let h_this = h.min(opts.t_end - t);

        // stages
        let mut k = [[0.0; 3]; 7];
        k[0] = k1;
        for s in 1..7 {
            let terms: Vec<(f64, &Vec3)> = (0..s).map(|j| (A[s][j], &k[j])).collect();
            let ys = add_scaled(&y, h_this, &terms);
            k[s] = f(&ys);
        }
        let terms: Vec<(f64, &Vec3)> = (0..7).map(|j| (B[j], &k[j])).collect();
        let mut y_new = add_scaled(&y, h_this, &terms);
        apply_mask(&mut y_new);

        // scaled RMS error estimate
        let mut err = 0.0;
        for i in 0..3 {
            let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum();
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (h_this * e / sc).powi(2);
        }
        err = (err / 3.0).sqrt();

        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            // overshoot blew up; retry with a much smaller step
            traj.rejected_steps += 1;
            h = h_this * 0.1;
            continue;
        }

        if err <= 1.0 {
            // accept; clamp marginal negatives, abort on real ones
            for (i, v) in y_new.iter_mut().enumerate() {
                traj.min_component = traj.min_component.min(*v);
                if *v < 0.0 {
                    if *v < -CLAMP_TOL {
                        return Err(Error::PositivityViolation {
                            component: i,
                            value: *v,
                            t: t + h_this,
                        });
                    }
                    *v = 0.0;
                }
            }
            let k_new = f(&y_new);

            // dense-output coefficients for samples inside (t, t + h_this]
            let mut cont = [[0.0; 3]; 5];
            for i in 0..3 {
                let ydiff = y_new[i] - y[i];
                let bspl = h_this * k[0][i] - ydiff;
                let dsum: f64 = (0..7).map(|j| D[j] * k[j][i]).sum();
                cont[0][i] = y[i];
                cont[1][i] = ydiff;
                cont[2][i] = bspl;
                cont[3][i] = ydiff - h_this * k_new[i] - bspl;
                cont[4][i] = h_this * dsum;
            }
            let t_new = t + h_this;
            while next_sample <= t_new + 1e-12 * opts.t_end && next_sample <= opts.t_end {
                let s = ((next_sample - t) / h_this).clamp(0.0, 1.0);
                let s1 = 1.0 - s;
                let mut ys = [0.0; 3];
                for i in 0..3 {
                    ys[i] = cont[0][i]
                        + s * (cont[1][i]
                            + s1 * (cont[2][i] + s * (cont[3][i] + s1 * cont[4][i])));
                }
                apply_mask(&mut ys);
                record_sample(&mut traj, next_sample, ys, t_new)?;
                next_sample += opts.output_stride;
            }

            traj.accepted_steps += 1;
            traj.sup_omega = traj.sup_omega.max(y_new.iter().sum());
            t = t_new;
            y = y_new;
            k1 = k_new;

            // PI step-size update
            let fac11 = err.max(1e-16).powf(EXPO1);
            let fac = (fac11 / err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            err_old = err.max(1e-4);
            h = (h_this / fac).min(opts.max_step);
        } else {
            traj.rejected_steps += 1;
            let fac11 = err.powf(EXPO1);
            h = h_this / (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }

    // always store the final time
    if traj.times.last().copied() != Some(opts.t_end) {
        let mut y_end = y;
        apply_mask(&mut y_end);
        record_sample(&mut traj, opts.t_end, y_end, opts.t_end)?;
    }
    Ok(traj)
}

fn record_sample(traj: &mut Trajectory, t: f64, mut y: Vec3, t_now: f64) -> Result<()> {
    for (i, v) in y.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteState { t: t_now });
        }
        traj.min_component = traj.min_component.min(*v);
        if *v < 0.0 {
            if *v < -CLAMP_TOL {
                return Err(Error::PositivityViolation {
                    component: i,
                    value: *v,
                    t,
                });
            }
            *v = 0.0;
        }
    }
    traj.sup_omega = traj.sup_omega.max(y.iter().sum());
    traj.times.push(t);
    traj.states.push(PopulationState::from_array(y));
    Ok(())
}

/// Standard two-evaluation estimate of a safe first step.
fn initial_step(f: &dyn Fn(&Vec3) -> Vec3, y: &Vec3, f0: &Vec3, opts: &IntegratorOptions) -> f64 {
    let sc: Vec<f64> = y
        .iter()
        .map(|v| opts.abs_tol + opts.rel_tol * v.abs())
        .collect();
    let d0 = (0..3).map(|i| (y[i] / sc[i]).powi(2)).sum::<f64>().sqrt() / 3f64.sqrt();
    let d1 = (0..3).map(|i| (f0[i] / sc[i]).powi(2)).sum::<f64>().sqrt() / 3f64.sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = add_scaled(y, h0, &[(1.0, f0)]);
    let f1 = f(&y1);
    let d2 = (0..3)
        .map(|i| ((f1[i] - f0[i]) / sc[i]).powi(2))
        .sum::<f64>()
        .sqrt()
        / (3f64.sqrt() * h0);
    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    (100.0 * h0).min(h1).min(opts.max_step).min(opts.t_end)
}

/// Empirical eventual-bound detector for `omega = x + y + z`.
///
/// The bound is the maximum of `omega` over the trailing half of the
/// trajectory, inflated by `1e-6`; the property fails if `omega` is still
/// growing monotonically by a meaningful amount over the final quarter.
pub fn check_boundedness(traj: &Trajectory, mu: f64) -> BoundednessCheck {
    assert!(mu > 0.0, "mu must be positive");
    assert!(!traj.times.is_empty(), "trajectory must be nonempty");
    let omega: Vec<f64> = traj.states.iter().map(|s| s.total()).collect();
    let n = omega.len();
    let half = n / 2;
    let tail_max = omega[half..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = tail_max * (1.0 + 1e-6);

    // earliest sample from which omega stays at or below the bound
    let mut entry_idx = n;
    for i in (0..n).rev() {
        if omega[i] <= bound {
            entry_idx = i;
        } else {
            break;
        }
    }
    let t_entry = (entry_idx < n).then(|| traj.times[entry_idx]);

    // divergence screen: monotone growth across the whole final quarter
    let quarter = 3 * n / 4;
    let tail = &omega[quarter.min(n - 1)..];
    let monotone = tail.len() >= 2 && tail.windows(2).all(|w| w[1] >= w[0]);
    let significant =
        tail.len() >= 2 && tail[tail.len() - 1] - tail[0] > 1e-3 * (1.0 + tail[0].abs());
    let diverging = monotone && significant;

    BoundednessCheck {
        mu,
        bound,
        holds_eventually: t_entry.is_some() && !diverging,
        t_entry: if diverging { None } else { t_entry },
    }
}

/// Componentwise relative comparison against `target` over the trailing
/// samples: converged when every sample in the trailing 5% of the time span
/// is within `tol` (zero target components compare absolutely).
pub fn convergence_check(traj: &Trajectory, target: &Equilibrium, tol: f64) -> Convergence {
    assert!(tol > 0.0, "tol must be positive");
    let goal = target.state.as_array();
    let within = |s: &PopulationState| -> bool {
        s.as_array().iter().zip(goal.iter()).all(|(a, t)| {
            let scale = if *t != 0.0 { t.abs() } else { 1.0 };
            (a - t).abs() <= tol * scale
        })
    };
    let n = traj.states.len();
    // earliest index from which every later sample stays within tolerance
    let mut idx = None;
    for i in (0..n).rev() {
        if within(&traj.states[i]) {
            idx = Some(i);
        } else {
            break;
        }
    }
    match idx {
        Some(i) => {
            let span = traj.final_time() - traj.times[0];
            let dwell = traj.final_time() - traj.times[i];
            if i == 0 || dwell >= 0.05 * span {
                Convergence {
                    converged: true,
                    t_converged: Some(traj.times[i]),
                }
            } else {
                Convergence {
                    converged: false,
                    t_converged: None,
                }
            }
        }
        None => Convergence {
            converged: false,
            t_converged: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{enumerate_equilibria, EquilibriumFamily, FamilyTag};
    use crate::report::preset;

    fn params(name: &str) -> ModelParams {
        preset(name).unwrap().params
    }

    #[test]
    fn stays_at_equilibrium() {
        let p = params("S1");
        let estar = *enumerate_equilibria(&p)
            .unwrap()
            .find(FamilyTag::EStar, 2)
            .unwrap();
        let opts = IntegratorOptions::new(100.0).unwrap();
        let traj = integrate(&p, &estar.state, &opts).unwrap();
        for s in &traj.states {
            let d = [
                s.x - estar.state.x,
                s.y - estar.state.y,
                s.z - estar.state.z,
            ];
            for v in d {
                assert!(v.abs() <= 1e-6, "drifted by {v}");
            }
        }
    }

    #[test]
    fn converges_to_coexistence_s1() {
        let p = params("S1");
        let set = enumerate_equilibria(&p).unwrap();
        let estar = set.find(FamilyTag::EStar, 2).unwrap();
        let opts = IntegratorOptions::new(1000.0).unwrap();
        let traj = integrate(&p, &PopulationState::new(50.0, 40.0, 80.0), &opts).unwrap();
        let v = convergence_check(&traj, estar, 1e-3);
        assert!(v.converged, "final state {:?}", traj.final_state());
        assert!(v.t_converged.unwrap() < 1000.0);
    }

    #[test]
    fn zero_plane_held_exactly() {
        let p = params("S3");
        let opts = IntegratorOptions::new(200.0).unwrap();
        let traj = integrate(&p, &PopulationState::new(40.0, 40.0, 0.0), &opts).unwrap();
        for s in &traj.states {
            assert_eq!(s.z, 0.0);
        }
        // and the in-plane trajectory still approaches the planar equilibrium
        let set = enumerate_equilibria(&p).unwrap();
        let e5 = set.find(FamilyTag::E5, 3).unwrap();
        assert!((traj.final_state().x - e5.state.x).abs() <= 1e-3 * e5.state.x.abs());
    }

    #[test]
    fn trajectory_samples_are_nonnegative_and_uniform() {
        let p = params("S2");
        let opts = IntegratorOptions::new(50.0).unwrap();
        let traj = integrate(&p, &PopulationState::new(50.0, 10.0, 80.0), &opts).unwrap();
        assert_eq!(traj.times[0], 0.0);
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_eq!(traj.final_time(), 50.0);
        for s in &traj.states {
            assert!(s.is_nonnegative());
            assert!(s.total() <= traj.sup_omega);
        }
        assert!(traj.accepted_steps > 0);
    }

    #[test]
    fn tighter_tolerances_agree() {
        // halving and 10x-tightening both move the solution by less than the
        // accumulated local-error budget of the looser run
        let p = params("S1");
        let init = PopulationState::new(50.0, 40.0, 80.0);
        let loose = IntegratorOptions::with(1e-8, 1e-10, 100.0, 1.0, 0.5).unwrap();
        let a = integrate(&p, &init, &loose).unwrap();
        let fa = a.final_state();
        let budget = a.accepted_steps as f64 * (1e-10 + 1e-8 * fa.norm());
        for (rt, at) in [(0.5e-8, 0.5e-10), (1e-9, 1e-11)] {
            let tight = IntegratorOptions::with(rt, at, 100.0, 1.0, 0.5).unwrap();
            let fb = integrate(&p, &init, &tight).unwrap().final_state();
            let diff = [fa.x - fb.x, fa.y - fb.y, fa.z - fb.z]
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max);
            assert!(diff <= budget, "diff {diff} vs budget {budget} at rtol {rt}");
        }
    }

    #[test]
    fn integration_is_deterministic() {
        let p = params("S3");
        let opts = IntegratorOptions::new(100.0).unwrap();
        let init = PopulationState::new(20.0, 90.0, 80.0);
        let a = integrate(&p, &init, &opts).unwrap();
        let b = integrate(&p, &init, &opts).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_negative_initial_state() {
        let p = params("S1");
        let opts = IntegratorOptions::new(10.0).unwrap();
        let r = integrate(&p, &PopulationState::new(-1.0, 2.0, 3.0), &opts);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn invalid_options_rejected() {
        assert!(IntegratorOptions::with(0.0, 1e-10, 10.0, 1.0, 0.1).is_err());
        assert!(IntegratorOptions::with(1e-8, 1e-10, -5.0, 1.0, 0.1).is_err());
        assert!(IntegratorOptions::with(1e-8, 1e-10, 10.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn boundedness_constant_at_origin() {
        let traj = Trajectory {
            times: (0..100).map(|i| i as f64).collect(),
            states: vec![PopulationState::new(0.0, 0.0, 0.0); 100],
            accepted_steps: 99,
            rejected_steps: 0,
            min_component: 0.0,
            sup_omega: 0.0,
        };
        let check = check_boundedness(&traj, 1.0);
        assert!(check.holds_eventually);
        assert_eq!(check.t_entry, Some(0.0));
        assert!(check.bound.abs() <= 1e-12);
    }

    #[test]
    fn boundedness_detects_linear_divergence() {
        let traj = Trajectory {
            times: (0..100).map(|i| i as f64).collect(),
            states: (0..100)
                .map(|i| PopulationState::new(i as f64, 0.0, 0.0))
                .collect(),
            accepted_steps: 99,
            rejected_steps: 0,
            min_component: 0.0,
            sup_omega: 99.0,
        };
        let check = check_boundedness(&traj, 1.0);
        assert!(!check.holds_eventually);
    }

    #[test]
    fn boundedness_holds_on_converging_run() {
        let p = params("S1");
        let opts = IntegratorOptions::new(1000.0).unwrap();
        let traj = integrate(&p, &PopulationState::new(50.0, 40.0, 80.0), &opts).unwrap();
        let check = check_boundedness(&traj, 0.5);
        assert!(check.holds_eventually);
        assert!(check.t_entry.is_some());
        assert!(check.bound >= traj.final_state().total());
    }

    #[test]
    fn convergence_check_on_constant_trajectory() {
        let p = params("S1");
        let estar = *enumerate_equilibria(&p)
            .unwrap()
            .find(FamilyTag::EStar, 2)
            .unwrap();
        let traj = Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![estar.state; 3],
            accepted_steps: 2,
            rejected_steps: 0,
            min_component: 0.0,
            sup_omega: estar.state.total(),
        };
        let v = convergence_check(&traj, &estar, 1e-3);
        assert!(v.converged);
        assert_eq!(v.t_converged, Some(0.0));
    }

    #[test]
    fn convergence_check_rejects_distant_trajectory() {
        let p = params("S1");
        let estar = *enumerate_equilibria(&p)
            .unwrap()
            .find(FamilyTag::EStar, 2)
            .unwrap();
        let far = Equilibrium {
            state: PopulationState::new(1.0, 1.0, 1.0),
            ..estar
        };
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![estar.state; 2],
            accepted_steps: 1,
            rejected_steps: 0,
            min_component: 0.0,
            sup_omega: estar.state.total(),
        };
        assert!(!convergence_check(&traj, &far, 1e-3).converged);
    }

    #[test]
    fn family_copy_is_cheap() {
        let fam = EquilibriumFamily::new(FamilyTag::E5, 2);
        assert_eq!(fam.label(), "E5^II");
    }
}

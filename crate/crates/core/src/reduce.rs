//! Similarity reductions: reduced ODE systems for the one-dimensional
//! subalgebras, an adaptive integrator that stops at sonic points, and
//! lifting of reduced trajectories back to `(t, x)` fields.
//!
//! For `⟨𝒟 + a𝒢⟩` the ansatz `u = ũ(p) + a ln t`, `h = h̃(p)`,
//! `p = x/t − a ln t + a` gives
//!
//! ```text
//! a + (ũ − p) ũ' + K(h̃) h̃' = 0,    (ũ − p) h̃' + h̃ ũ' = 0,
//! ```
//!
//! whose determinant `Δ = (ũ − p)² − G(h̃ + H)` vanishes at sonic points.

use std::fmt;

use crate::algebra::G1Element;
use crate::error::{Error, Result};
use crate::hodograph::HodographPair;
use crate::model::{check_depth, FluidParams, Rect, SolutionField};

/// A point of a reduced trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedState {
    pub p: f64,
    pub u_tilde: f64,
    pub h_tilde: f64,
}

/// Below this `|Δ|` the reduced system is treated as singular.
pub const SONIC_TOL: f64 = 1e-10;

fn cramer(a: f64, w: f64, h: f64, p: f64, params: &FluidParams) -> Result<(f64, f64)> {
    check_depth(h)?;
    let disc = w * w - params.gravity * (h + params.momentum);
    if disc.abs() < SONIC_TOL {
        return Err(Error::SonicPoint {
            p,
            discriminant: disc,
        });
    }
    Ok((-a * w / disc, a * h / disc))
}

/// `(ũ', h̃')` for `⟨𝒟 + a𝒢⟩`.
pub fn reduced_rhs_case_i(a: f64, params: &FluidParams, s: ReducedState) -> Result<(f64, f64)> {
    cramer(a, s.u_tilde - s.p, s.h_tilde, s.p, params)
}

/// `(ũ', h̃')` for `⟨a1𝒟 + a2𝒢 + a3∂_x + a4∂_t⟩`, `a1 ≠ 0`, under the
/// ansatz of [`lift_general_ia`] with [`LogSign::Flipped`]:
/// `a2 + (ũ − q) ũ' + K h̃' = 0`, `(ũ − q) h̃' + h̃ ũ' = 0`, `q = a1 p + a2/a1`.
pub fn reduced_rhs_general(g: &G1Element, params: &FluidParams, s: ReducedState) -> Result<(f64, f64)> {
    let [a1, a2, _, _] = g.a;
    if a1 == 0.0 {
        return Err(Error::Parameter("general reduction needs a1 != 0".into()));
    }
    let q = a1 * s.p + a2 / a1;
    cramer(a2, s.u_tilde - q, s.h_tilde, s.p, params)
}

/// `(ũ', h̃')` for `⟨𝒢⟩` with `u = ũ(t) + x/t`, `h = h̃(t)`, `p = t`.
pub fn reduced_rhs_case_ii(s: ReducedState) -> Result<(f64, f64)> {
    if s.p == 0.0 {
        return Err(Error::Domain("case (ii) reduction is singular at p = 0".into()));
    }
    Ok((-s.u_tilde / s.p, -s.h_tilde / s.p))
}

/// Closed-form solution `ũ = c1/p`, `h̃ = c2/p` of the case (ii) system.
pub fn case_ii_state(c1: f64, c2: f64, p: f64) -> ReducedState {
    ReducedState {
        p,
        u_tilde: c1 / p,
        h_tilde: c2 / p,
    }
}

/// Lift of the case (ii) closed form: `u = c1/t + x/t`, `h = c2/t`.
pub fn lift_case_ii(c1: f64, c2: f64) -> Result<SolutionField> {
    if !(c2 > 0.0) {
        return Err(Error::Parameter(format!("case (ii) needs c2 > 0, got {c2}")));
    }
    Ok(SolutionField::analytic(
        crate::solutions::default_rect(),
        format!("case-ii({c1},{c2})"),
        move |t, x| {
            let r = t.recip();
            (&r.scale(c1) + &(x * &r), r.scale(c2))
        },
    ))
}

/// Residuals of the `⟨ℒ(f, g)⟩` reduced system
/// `−g ũ' + f ũ ũ' + f K h̃' = 0`, `−g h̃' + f ũ h̃' + f h̃ ũ' = 0`
/// with `f, g` evaluated at `(ũ, h̃)`.
pub fn case_iii_residual(
    pair: &HodographPair,
    s: ReducedState,
    du: f64,
    dh: f64,
    params: &FluidParams,
) -> Result<(f64, f64)> {
    check_depth(s.h_tilde)?;
    let v = pair.eval(s.u_tilde, s.h_tilde)?;
    let (u, h) = (s.u_tilde, s.h_tilde);
    Ok((
        -v.g * du + v.f * u * du + v.f * params.pressure(h) * dh,
        -v.g * dh + v.f * u * dh + v.f * h * du,
    ))
}

/// The reduced system being integrated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReducedSystem {
    CaseI { a: f64 },
    General(G1Element),
}

impl ReducedSystem {
    pub fn rhs(&self, params: &FluidParams, s: ReducedState) -> Result<(f64, f64)> {
        match self {
            ReducedSystem::CaseI { a } => reduced_rhs_case_i(*a, params, s),
            ReducedSystem::General(g) => reduced_rhs_general(g, params, s),
        }
    }

    /// `Δ` at a state.
    pub fn discriminant(&self, params: &FluidParams, s: ReducedState) -> f64 {
        let q = match self {
            ReducedSystem::CaseI { .. } => s.p,
            ReducedSystem::General(g) => g.a[0] * s.p + g.a[1] / g.a[0],
        };
        let w = s.u_tilde - q;
        w * w - params.gravity * (s.h_tilde + params.momentum)
    }

    /// Residuals of the two reduced equations with candidate derivatives.
    pub fn residual(&self, params: &FluidParams, s: ReducedState, du: f64, dh: f64) -> (f64, f64) {
        let (a, q) = match self {
            ReducedSystem::CaseI { a } => (*a, s.p),
            ReducedSystem::General(g) => (g.a[1], g.a[0] * s.p + g.a[1] / g.a[0]),
        };
        let w = s.u_tilde - q;
        (
            a + w * du + params.pressure(s.h_tilde) * dh,
            w * dh + s.h_tilde * du,
        )
    }
}

/// Relative `|Δ|` under which a collapsing step is attributed to a sonic point.
const NEAR_SONIC: f64 = 1e-3;

/// Controls of the adaptive integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Integration stops when `h̃` falls to this floor.
    pub depth_floor: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            depth_floor: 1e-8,
            min_step: 1e-12,
            max_step: 0.02,
            max_steps: 200_000,
        }
    }
}

/// Why integration stopped before reaching the requested end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Halt {
    Sonic { p: f64, discriminant: f64 },
    DepthFloor { p: f64, h: f64 },
}

/// Accepted integration nodes together with the system and parameters
/// needed to evaluate between them.
#[derive(Clone)]
pub struct Trajectory {
    nodes: Vec<ReducedState>,
    system: ReducedSystem,
    params: FluidParams,
    options: IntegrationOptions,
    halt: Option<Halt>,
}

impl fmt::Debug for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trajectory")
            .field("system", &self.system)
            .field("nodes", &self.nodes.len())
            .field("p_range", &self.p_range())
            .field("halt", &self.halt)
            .finish()
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type Rhs<'a> = dyn Fn(f64, [f64; 2]) -> Result<[f64; 2]> + 'a;

fn dp_step(f: &Rhs<'_>, p: f64, y: [f64; 2], h: f64) -> Result<([f64; 2], [f64; 2])> {
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            ys[0] += h * A[s][j] * kj[0];
            ys[1] += h * A[s][j] * kj[1];
        }
        k[s] = f(p + C[s] * h, ys)?;
    }
    let mut y5 = y;
    let mut err = [0.0; 2];
    for s in 0..7 {
        for i in 0..2 {
            y5[i] += h * B5[s] * k[s][i];
            err[i] += h * (B5[s] - B4[s]) * k[s][i];
        }
    }
    Ok((y5, err))
}

fn rk4(f: &Rhs<'_>, p: f64, y: [f64; 2], h: f64) -> Result<[f64; 2]> {
    let k1 = f(p, y)?;
    let k2 = f(p + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]])?;
    let k3 = f(p + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]])?;
    let k4 = f(p + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

/// Integrate `system` from `state0` to `p_end` (either direction).
pub fn integrate(
    system: ReducedSystem,
    params: &FluidParams,
    state0: ReducedState,
    p_end: f64,
    options: IntegrationOptions,
) -> Result<Trajectory> {
    if !(options.rtol > 0.0 && options.atol >= 0.0 && options.max_step > 0.0) {
        return Err(Error::Config("integration tolerances must be positive".into()));
    }
    if !(state0.p.is_finite() && p_end.is_finite() && state0.u_tilde.is_finite()) {
        return Err(Error::Domain("non-finite initial data".into()));
    }
    check_depth(state0.h_tilde)?;
    // Fails immediately at a sonic start.
    system.rhs(params, state0)?;
    let disc0 = system.discriminant(params, state0);
    let f = |p: f64, y: [f64; 2]| -> Result<[f64; 2]> {
        let (a, b) = system.rhs(
            params,
            ReducedState {
                p,
                u_tilde: y[0],
                h_tilde: y[1],
            },
        )?;
        Ok([a, b])
    };
    let dir = if p_end >= state0.p { 1.0 } else { -1.0 };
    let mut nodes = vec![state0];
    let mut p = state0.p;
    let mut y = [state0.u_tilde, state0.h_tilde];
    let mut h = options.max_step.min((p_end - p).abs()).max(options.min_step) * 0.1;
    let mut halt = None;
    let mut steps = 0;
    while dir * (p_end - p) > 0.0 {
        steps += 1;
        if steps > options.max_steps {
            return Err(Error::StepUnderflow { p });
        }
        let remaining = (p_end - p).abs();
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        let trial = dp_step(&f, p, y, dir * step);
        let (y_new, err) = match trial {
            Ok(v) => v,
            Err(Error::SonicPoint { .. }) | Err(Error::Domain(_)) => {
                h = 0.25 * step;
                if h < options.min_step {
                    halt = Some(Halt::Sonic {
                        p,
                        discriminant: system.discriminant(params, *nodes.last().unwrap_or(&state0)),
                    });
                    break;
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let scale = |i: usize| options.atol + options.rtol * y[i].abs().max(y_new[i].abs());
        let e = (err[0] / scale(0)).abs().max((err[1] / scale(1)).abs());
        if !e.is_finite() {
            h = 0.25 * step;
            if h < options.min_step {
                return Err(Error::StepUnderflow { p });
            }
            continue;
        }
        if e <= 1.0 {
            let p_new = if last { p_end } else { p + dir * step };
            let s = ReducedState {
                p: p_new,
                u_tilde: y_new[0],
                h_tilde: y_new[1],
            };
            let disc = system.discriminant(params, s);
            if disc.signum() != disc0.signum() || disc.abs() < 1e3 * SONIC_TOL {
                halt = Some(Halt::Sonic {
                    p: p_new,
                    discriminant: disc,
                });
                break;
            }
            if s.h_tilde <= options.depth_floor {
                halt = Some(Halt::DepthFloor {
                    p: p_new,
                    h: s.h_tilde,
                });
                break;
            }
            p = p_new;
            y = y_new;
            nodes.push(s);
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h = (step * factor).min(options.max_step);
        if h < options.min_step {
            // Step collapse next to Δ = 0 is the square-root singularity
            // of an approaching sonic point, not a failure.
            let here = *nodes.last().unwrap_or(&state0);
            let disc = system.discriminant(params, here);
            if disc.abs() < NEAR_SONIC * params.gravity * (here.h_tilde + params.momentum).abs().max(1.0) {
                halt = Some(Halt::Sonic { p, discriminant: disc });
                break;
            }
            return Err(Error::StepUnderflow { p });
        }
    }
    Ok(Trajectory {
        nodes,
        system,
        params: *params,
        options,
        halt,
    })
}

/// `⟨𝒟 + a𝒢⟩` reduction integrated from `(p0, ũ0, h̃0)` to `p_end`.
pub fn integrate_case_i(
    a: f64,
    params: &FluidParams,
    p0: f64,
    state0: (f64, f64),
    p_end: f64,
    options: IntegrationOptions,
) -> Result<Trajectory> {
    integrate(
        ReducedSystem::CaseI { a },
        params,
        ReducedState {
            p: p0,
            u_tilde: state0.0,
            h_tilde: state0.1,
        },
        p_end,
        options,
    )
}

/// Substeps of the interpolating re-integration between nodes.
const INTERP_SUBSTEPS: usize = 8;

impl Trajectory {
    pub fn nodes(&self) -> &[ReducedState] {
        &self.nodes
    }

    pub fn system(&self) -> ReducedSystem {
        self.system
    }

    pub fn options(&self) -> IntegrationOptions {
        self.options
    }

    pub fn halt(&self) -> Option<Halt> {
        self.halt
    }

    /// `(min p, max p)` covered.
    pub fn p_range(&self) -> (f64, f64) {
        let a = self.nodes[0].p;
        let b = self.nodes[self.nodes.len() - 1].p;
        (a.min(b), a.max(b))
    }

    pub fn last(&self) -> ReducedState {
        self.nodes[self.nodes.len() - 1]
    }

    /// State at `p` by RK4 re-integration from the preceding node.
    pub fn state_at(&self, p: f64) -> Result<ReducedState> {
        let (lo, hi) = self.p_range();
        if !(lo..=hi).contains(&p) {
            return Err(Error::Domain(format!(
                "p = {p} outside the trajectory range [{lo}, {hi}]"
            )));
        }
        let forward = self.nodes[0].p <= self.last().p;
        let k = if forward {
            self.nodes.partition_point(|s| s.p <= p)
        } else {
            self.nodes.partition_point(|s| s.p >= p)
        }
        .saturating_sub(1);
        let node = self.nodes[k];
        if node.p == p {
            return Ok(node);
        }
        let f = |q: f64, y: [f64; 2]| -> Result<[f64; 2]> {
            let (a, b) = self.system.rhs(
                &self.params,
                ReducedState {
                    p: q,
                    u_tilde: y[0],
                    h_tilde: y[1],
                },
            )?;
            Ok([a, b])
        };
        let dp = (p - node.p) / INTERP_SUBSTEPS as f64;
        let mut y = [node.u_tilde, node.h_tilde];
        let mut q = node.p;
        for _ in 0..INTERP_SUBSTEPS {
            y = rk4(&f, q, y, dp)?;
            q += dp;
        }
        Ok(ReducedState {
            p,
            u_tilde: y[0],
            h_tilde: y[1],
        })
    }

    /// Largest residual of the reduced equations at `n` points, with
    /// derivatives of the interpolant by central differences.
    pub fn ode_defect(&self, n: usize) -> Result<f64> {
        let (lo, hi) = self.p_range();
        let d = 1e-4 * (hi - lo).max(1e-3);
        let mut worst = 0.0f64;
        for i in 0..n {
            let p = lo + d * 2.0 + (hi - lo - 4.0 * d) * (i as f64 + 0.5) / n as f64;
            let s = self.state_at(p)?;
            let (a2, a1, m1, m2) = (
                self.state_at(p + 2.0 * d)?,
                self.state_at(p + d)?,
                self.state_at(p - d)?,
                self.state_at(p - 2.0 * d)?,
            );
            let du = (-a2.u_tilde + 8.0 * a1.u_tilde - 8.0 * m1.u_tilde + m2.u_tilde) / (12.0 * d);
            let dh = (-a2.h_tilde + 8.0 * a1.h_tilde - 8.0 * m1.h_tilde + m2.h_tilde) / (12.0 * d);
            let (r1, r2) = self.system.residual(&self.params, s, du, dh);
            worst = worst.max(r1.abs()).max(r2.abs());
        }
        Ok(worst)
    }
}

/// A lifted field and whether the requested domain had to be clipped.
#[derive(Clone, Debug)]
pub struct Lifted {
    pub field: SolutionField,
    /// Fraction of a 33 × 33 lattice of the requested rectangle whose `p`
    /// lies in the trajectory range.
    pub covered: f64,
}

fn coverage(rect: &Rect, p_of: impl Fn(f64, f64) -> f64, range: (f64, f64)) -> f64 {
    let n = 33;
    let mut inside = 0;
    for i in 0..n {
        for j in 0..n {
            let t = rect.t0 + (rect.t1 - rect.t0) * i as f64 / (n - 1) as f64;
            let x = rect.x0 + (rect.x1 - rect.x0) * j as f64 / (n - 1) as f64;
            let p = p_of(t, x);
            if (range.0..=range.1).contains(&p) {
                inside += 1;
            }
        }
    }
    inside as f64 / (n * n) as f64
}

/// Lift a `⟨𝒟 + a𝒢⟩` trajectory: `u = ũ(p) + a ln t`, `h = h̃(p)`,
/// `p = x/t − a ln t + a`. Points whose `p` is outside the trajectory
/// evaluate to a domain error; [`Lifted::covered`] reports how much of
/// `rect` is usable.
pub fn lift_case_i(traj: &Trajectory, rect: Rect) -> Result<Lifted> {
    let a = match traj.system {
        ReducedSystem::CaseI { a } => a,
        ReducedSystem::General(_) => {
            return Err(Error::Parameter("trajectory is not a case (i) reduction".into()))
        }
    };
    if rect.t0 <= 0.0 {
        return Err(Error::Domain("case (i) lift needs t > 0".into()));
    }
    let p_of = move |t: f64, x: f64| x / t - a * t.ln() + a;
    let covered = coverage(&rect, p_of, traj.p_range());
    let tr = traj.clone();
    let field = SolutionField::numeric(rect, format!("case-i(a={a})"), move |t, x| {
        if t <= 0.0 {
            return Err(Error::Domain("t <= 0".into()));
        }
        let s = tr.state_at(p_of(t, x))?;
        Ok((s.u_tilde + a * t.ln(), s.h_tilde))
    });
    Ok(Lifted { field, covered })
}

/// Sign of the logarithmic term of the general ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogSign {
    /// `u = ũ(p) − (a2/a1) ln(a1 t + a4)`, the stated form.
    AsPrinted,
    /// `u = ũ(p) + (a2/a1) ln(a1 t + a4)`.
    Flipped,
}

/// Lift a trajectory of [`reduced_rhs_general`] through
/// `p = (a1²x + a1a3 − a2a4)/(a1²(a1t + a4)) − (a2/a1²) ln(a1t + a4)`,
/// `h = h̃(p)` and `u = ũ(p) ± (a2/a1) ln(a1t + a4)`.
pub fn lift_general_ia(g: &G1Element, traj: &Trajectory, sign: LogSign, rect: Rect) -> Result<Lifted> {
    let [a1, a2, a3, a4] = g.a;
    if a1 == 0.0 {
        return Err(Error::Parameter("general ansatz needs a1 != 0".into()));
    }
    let min_arg = (a1 * rect.t0 + a4).min(a1 * rect.t1 + a4);
    if min_arg <= 0.0 {
        return Err(Error::Domain(format!(
            "a1 t + a4 = {min_arg} <= 0 on the requested domain"
        )));
    }
    let p_of = move |t: f64, x: f64| {
        let s = a1 * t + a4;
        (a1 * a1 * x + a1 * a3 - a2 * a4) / (a1 * a1 * s) - a2 / (a1 * a1) * s.ln()
    };
    let sigma = match sign {
        LogSign::AsPrinted => -1.0,
        LogSign::Flipped => 1.0,
    };
    let covered = coverage(&rect, p_of, traj.p_range());
    let tr = traj.clone();
    let field = SolutionField::numeric(rect, format!("general-ia({a1},{a2},{a3},{a4})"), move |t, x| {
        let s = a1 * t + a4;
        if s <= 0.0 {
            return Err(Error::Domain(format!("a1 t + a4 = {s} <= 0")));
        }
        let st = tr.state_at(p_of(t, x))?;
        Ok((st.u_tilde + sigma * a2 / a1 * s.ln(), st.h_tilde))
    });
    Ok(Lifted { field, covered })
}

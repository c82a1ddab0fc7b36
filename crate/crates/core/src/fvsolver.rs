//! First-order finite-volume integrator used as an independent oracle for
//! exact solutions.
//!
//! The momentum-like equation is written in divergence form,
//! `u_t + (u²/2 + G(h + H ln h))_x = 0`, which is exact for smooth data
//! since `G(1 + H/h) h_x = ∂_x[G(h + H ln h)]`; the depth equation is
//! `h_t + (u h)_x = 0`. Interface fluxes are Rusanov with the
//! characteristic speed `|u| + √(G(h + H))`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{FluidParams, Rect, SolutionField};

/// Cell averages on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    pub x0: f64,
    pub dx: f64,
    pub u: Vec<f64>,
    pub h: Vec<f64>,
    pub time: f64,
}

pub const MIN_CELLS: usize = 4;
pub const MAX_CFL: f64 = 0.9;

/// Ghost-cell treatment.
#[derive(Clone, Debug)]
pub enum Boundary {
    Periodic,
    /// Zeroth-order extrapolation.
    Extrapolate,
    /// Ghost values from an exact field at the current time.
    Dirichlet(SolutionField),
}

impl GridState {
    /// Sample `init` at cell centres of `nx` cells on `[x0, x1]` at `time`.
    pub fn from_field(init: &SolutionField, time: f64, x0: f64, x1: f64, nx: usize) -> Result<Self> {
        if nx < MIN_CELLS {
            return Err(Error::Precondition(format!("need at least {MIN_CELLS} cells, got {nx}")));
        }
        if !(x1 > x0) {
            return Err(Error::Precondition(format!("empty grid [{x0}, {x1}]")));
        }
        let dx = (x1 - x0) / nx as f64;
        let mut u = Vec::with_capacity(nx);
        let mut h = Vec::with_capacity(nx);
        for i in 0..nx {
            let (ui, hi) = init.eval(time, x0 + (i as f64 + 0.5) * dx)?;
            u.push(ui);
            h.push(hi);
        }
        let gs = Self { x0, dx, u, h, time };
        gs.check_positive()?;
        Ok(gs)
    }

    pub fn nx(&self) -> usize {
        self.u.len()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx
    }

    /// Discrete mass `Σ h dx`.
    pub fn mass(&self) -> f64 {
        self.h.iter().sum::<f64>() * self.dx
    }

    fn check_positive(&self) -> Result<()> {
        if self.u.len() != self.h.len() || self.u.len() < MIN_CELLS {
            return Err(Error::Precondition("malformed grid".into()));
        }
        match self.h.iter().position(|&h| !(h > 0.0)) {
            Some(cell) => Err(Error::Positivity {
                cell,
                h: self.h[cell],
                time: self.time,
            }),
            None => Ok(()),
        }
    }

    /// Largest characteristic speed over the cells.
    pub fn max_speed(&self, params: &FluidParams) -> f64 {
        self.u
            .iter()
            .zip(&self.h)
            .map(|(&u, &h)| speed(u, h, params))
            .fold(0.0, f64::max)
    }

    /// CSV snapshot with `x,u,h` columns.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,u,h\n");
        for i in 0..self.nx() {
            let _ = writeln!(s, "{},{},{}", self.center(i), self.u[i], self.h[i]);
        }
        s
    }
}

fn speed(u: f64, h: f64, params: &FluidParams) -> f64 {
    u.abs() + (params.gravity * (h + params.momentum)).max(0.0).sqrt()
}

fn flux(u: f64, h: f64, params: &FluidParams) -> (f64, f64) {
    let potential = if params.momentum == 0.0 {
        params.gravity * h
    } else {
        params.gravity * (h + params.momentum * h.ln())
    };
    (0.5 * u * u + potential, u * h)
}

fn rusanov(l: (f64, f64), r: (f64, f64), params: &FluidParams) -> (f64, f64) {
    let fl = flux(l.0, l.1, params);
    let fr = flux(r.0, r.1, params);
    let s = speed(l.0, l.1, params).max(speed(r.0, r.1, params));
    (
        0.5 * (fl.0 + fr.0) - 0.5 * s * (r.0 - l.0),
        0.5 * (fl.1 + fr.1) - 0.5 * s * (r.1 - l.1),
    )
}

fn ghosts(gs: &GridState, bc: &Boundary) -> Result<((f64, f64), (f64, f64))> {
    let n = gs.nx();
    Ok(match bc {
        Boundary::Periodic => ((gs.u[n - 1], gs.h[n - 1]), (gs.u[0], gs.h[0])),
        Boundary::Extrapolate => ((gs.u[0], gs.h[0]), (gs.u[n - 1], gs.h[n - 1])),
        Boundary::Dirichlet(f) => (
            f.eval(gs.time, gs.x0 - 0.5 * gs.dx)?,
            f.eval(gs.time, gs.x0 + (n as f64 + 0.5) * gs.dx)?,
        ),
    })
}

fn check_cfl(cfl: f64) -> Result<()> {
    if !(cfl > 0.0 && cfl <= MAX_CFL) {
        return Err(Error::Precondition(format!("cfl must lie in (0, {MAX_CFL}], got {cfl}")));
    }
    Ok(())
}

/// Stable time step `cfl·dx/max-speed`.
pub fn stable_dt(gs: &GridState, params: &FluidParams, cfl: f64) -> Result<f64> {
    check_cfl(cfl)?;
    let s = gs.max_speed(params);
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Evaluation(format!("degenerate wave speed {s}")));
    }
    Ok(cfl * gs.dx / s)
}

/// Advance by exactly `dt` (the caller guarantees stability).
pub fn step_by(gs: &GridState, params: &FluidParams, dt: f64, bc: &Boundary) -> Result<GridState> {
    gs.check_positive()?;
    let n = gs.nx();
    let (gl, gr) = ghosts(gs, bc)?;
    let cell = |i: isize| -> (f64, f64) {
        if i < 0 {
            gl
        } else if i as usize >= n {
            gr
        } else {
            (gs.u[i as usize], gs.h[i as usize])
        }
    };
    // fluxes[k] sits between cells k − 1 and k.
    let fluxes: Vec<(f64, f64)> = (0..=n as isize)
        .map(|k| rusanov(cell(k - 1), cell(k), params))
        .collect();
    let r = dt / gs.dx;
    let mut next = GridState {
        x0: gs.x0,
        dx: gs.dx,
        u: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        time: gs.time + dt,
    };
    for i in 0..n {
        next.u.push(gs.u[i] - r * (fluxes[i + 1].0 - fluxes[i].0));
        next.h.push(gs.h[i] - r * (fluxes[i + 1].1 - fluxes[i].1));
    }
    next.check_positive()?;
    Ok(next)
}

/// One step with `dt = cfl·dx/max-speed`.
pub fn step(gs: &GridState, params: &FluidParams, cfl: f64, bc: &Boundary) -> Result<GridState> {
    let dt = stable_dt(gs, params, cfl)?;
    step_by(gs, params, dt, bc)
}

/// Integrate `init` from `t0` to `t1` on `nx` cells of `[x0, x1]`; the
/// last step is shortened to land on `t1`.
pub fn simulate(
    init: &SolutionField,
    params: &FluidParams,
    window: Rect,
    nx: usize,
    cfl: f64,
    bc: &Boundary,
) -> Result<GridState> {
    check_cfl(cfl)?;
    if !(window.t1 > window.t0) {
        return Err(Error::Precondition(format!("t0 = {} must precede t1 = {}", window.t0, window.t1)));
    }
    let mut gs = GridState::from_field(init, window.t0, window.x0, window.x1, nx)?;
    while gs.time < window.t1 {
        let dt = stable_dt(&gs, params, cfl)?;
        let remaining = window.t1 - gs.time;
        if dt >= remaining {
            gs = step_by(&gs, params, remaining, bc)?;
            gs.time = window.t1;
        } else {
            gs = step_by(&gs, params, dt, bc)?;
        }
    }
    Ok(gs)
}

/// L1 distances `(Σ|u − u*| dx, Σ|h − h*| dx)` to an exact field at the
/// grid time, using cell-centre values.
pub fn l1_error(gs: &GridState, exact: &SolutionField) -> Result<(f64, f64)> {
    let mut eu = 0.0;
    let mut eh = 0.0;
    for i in 0..gs.nx() {
        let (u, h) = exact.eval(gs.time, gs.center(i))?;
        eu += (gs.u[i] - u).abs();
        eh += (gs.h[i] - h).abs();
    }
    Ok((eu * gs.dx, eh * gs.dx))
}

/// Errors per resolution and fitted orders.
#[derive(Clone, Debug, PartialEq)]
pub struct Convergence {
    pub resolutions: Vec<usize>,
    pub errors: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log dx`; `None` when the
    /// errors are at round-off level and no slope is meaningful.
    pub order_u: Option<f64>,
    pub order_h: Option<f64>,
}

impl Convergence {
    pub fn degenerate(&self) -> bool {
        self.order_u.is_none() || self.order_h.is_none()
    }
}

/// Errors below this are treated as exact reproduction.
pub const DEGENERATE_ERROR: f64 = 1e-12;

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Refinement study against `exact` with Dirichlet data from `exact`.
pub fn convergence_order(
    exact: &SolutionField,
    params: &FluidParams,
    window: Rect,
    resolutions: &[usize],
    cfl: f64,
) -> Result<Convergence> {
    if resolutions.len() < 3 {
        return Err(Error::Precondition("need at least three resolutions".into()));
    }
    let ratio = resolutions[1] as f64 / resolutions[0] as f64;
    let geometric = ratio > 1.0
        && resolutions
            .windows(2)
            .all(|w| (w[1] as f64 / w[0] as f64 - ratio).abs() < 1e-12);
    if !geometric {
        return Err(Error::Precondition(format!(
            "resolutions {resolutions:?} are not a geometric refinement"
        )));
    }
    let bc = Boundary::Dirichlet(exact.clone());
    let mut errors = Vec::with_capacity(resolutions.len());
    for &nx in resolutions {
        let gs = simulate(exact, params, window, nx, cfl, &bc)?;
        errors.push(l1_error(&gs, exact)?);
    }
    let log_dx: Vec<f64> = resolutions
        .iter()
        .map(|&n| ((window.x1 - window.x0) / n as f64).ln())
        .collect();
    let fit = |pick: fn(&(f64, f64)) -> f64| {
        if errors.iter().any(|e| pick(e) < DEGENERATE_ERROR) {
            None
        } else {
            let ys: Vec<f64> = errors.iter().map(|e| pick(e).ln()).collect();
            Some(slope(&log_dx, &ys))
        }
    };
    Ok(Convergence {
        resolutions: resolutions.to_vec(),
        order_u: fit(|e| e.0),
        order_h: fit(|e| e.1),
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{constant_solution, galilean_solution};
    use crate::taylor::Taylor;

    fn window() -> Rect {
        Rect::new(1.0, 2.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn constant_state_is_preserved() {
        let p = FluidParams::default();
        let c = constant_solution(0.3, 1.2).unwrap();
        let gs = simulate(&c, &p, window(), 50, 0.45, &Boundary::Extrapolate).unwrap();
        assert_eq!(gs.time, 2.0);
        assert!(gs.u.iter().all(|&u| (u - 0.3).abs() < 1e-15));
        assert!(gs.h.iter().all(|&h| (h - 1.2).abs() < 1e-15));
        let conv = convergence_order(&c, &p, window(), &[20, 40, 80], 0.45).unwrap();
        assert!(conv.degenerate());
    }

    #[test]
    fn preconditions() {
        let p = FluidParams::default();
        let c = constant_solution(0.0, 1.0).unwrap();
        let gs = GridState::from_field(&c, 0.0, 0.0, 1.0, 8).unwrap();
        assert!(matches!(step(&gs, &p, 2.0, &Boundary::Periodic), Err(Error::Precondition(_))));
        assert!(matches!(step(&gs, &p, 0.0, &Boundary::Periodic), Err(Error::Precondition(_))));
        assert!(GridState::from_field(&c, 0.0, 0.0, 1.0, 3).is_err());
        let dry = SolutionField::analytic(window(), "dry", |_t, x| {
            (Taylor::constant(0.0, x.order()), x - 0.5)
        });
        assert!(matches!(
            GridState::from_field(&dry, 1.0, 0.0, 1.0, 8),
            Err(Error::Positivity { .. })
        ));
        assert!(convergence_order(&c, &p, window(), &[10, 20, 50], 0.45).is_err());
        assert!(convergence_order(&c, &p, window(), &[10, 20], 0.45).is_err());
    }

    #[test]
    fn periodic_mass_conservation() {
        let p = FluidParams::default();
        let wave = SolutionField::analytic(window(), "wave", |_t, x| {
            let s = (x.scale(std::f64::consts::TAU)).sin();
            (s.scale(0.2), &s.scale(0.3) + 1.0)
        });
        let mut gs = GridState::from_field(&wave, 0.0, 0.0, 1.0, 128).unwrap();
        for _ in 0..200 {
            let m0 = gs.mass();
            gs = step(&gs, &p, 0.45, &Boundary::Periodic).unwrap();
            assert!((gs.mass() - m0).abs() < 1e-12);
        }
    }

    #[test]
    fn galilean_refinement() {
        let p = FluidParams::default();
        let g = galilean_solution(0.0, 1.0).unwrap();
        let gs = simulate(&g, &p, window(), 400, 0.45, &Boundary::Dirichlet(g.clone())).unwrap();
        let (eu, eh) = l1_error(&gs, &g).unwrap();
        assert!(eu < 1e-2 && eh < 1e-2, "{eu} {eh}");
        let conv = convergence_order(&g, &p, window(), &[100, 200, 400], 0.45).unwrap();
        let (ou, oh) = (conv.order_u.unwrap(), conv.order_h.unwrap());
        assert!((0.8..=1.3).contains(&ou) && (0.8..=1.3).contains(&oh), "{conv:?}");
        let csv = gs.to_csv();
        assert!(csv.starts_with("x,u,h\n") && csv.lines().count() == 401);
    }
}

//! The modified shallow-water system
//!
//! ```text
//! u_t + u u_x + g (1 + H/h) h_x = 0
//! h_t + u h_x + h u_x         = 0
//! ```
//!
//! together with its hodograph linearization, solution fields over the
//! `(t, x)` plane, and the two discrete point symmetries.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hodograph::HodographPair;
use crate::taylor::Taylor;

/// Physical constants of the system. `momentum` is `H`; `H = 0` gives the
/// classical shallow-water equations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidParams {
    pub momentum: f64,
    pub gravity: f64,
}

impl FluidParams {
    pub fn new(momentum: f64, gravity: f64) -> Result<Self> {
        if !momentum.is_finite() {
            return Err(Error::Parameter(format!("H must be finite, got {momentum}")));
        }
        if !(gravity.is_finite() && gravity > 0.0) {
            return Err(Error::Parameter(format!("gravity must be positive, got {gravity}")));
        }
        Ok(Self { momentum, gravity })
    }

    /// Unit gravity with the given `H`.
    pub fn with_momentum(momentum: f64) -> Self {
        Self {
            momentum,
            gravity: 1.0,
        }
    }

    /// The pressure factor `g (1 + H/h)`.
    pub fn pressure(&self, h: f64) -> f64 {
        self.gravity * (1.0 + self.momentum / h)
    }

    /// `d/dh` of [`Self::pressure`].
    pub fn pressure_dh(&self, h: f64) -> f64 {
        -self.gravity * self.momentum / (h * h)
    }

    pub fn pressure_series(&self, h: &Taylor) -> Taylor {
        (1.0 + self.momentum / h) * self.gravity
    }

    /// Characteristic speed offset `sqrt(g (h + H))` (zero when `h + H <= 0`).
    pub fn celerity(&self, h: f64) -> f64 {
        (self.gravity * (h + self.momentum)).max(0.0).sqrt()
    }
}

impl Default for FluidParams {
    fn default() -> Self {
        Self::with_momentum(1.0)
    }
}

pub(crate) fn check_depth(h: f64) -> Result<()> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::Domain(format!("column height must be positive, got {h}")));
    }
    Ok(())
}

/// First-order jet: base point plus first derivatives of `u` and `h`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct JetPoint {
    pub t: f64,
    pub x: f64,
    pub u: f64,
    pub h: f64,
    pub u_t: f64,
    pub u_x: f64,
    pub h_t: f64,
    pub h_x: f64,
}

impl JetPoint {
    pub fn base(&self) -> [f64; 4] {
        [self.t, self.x, self.u, self.h]
    }

    fn is_finite(&self) -> bool {
        [
            self.t, self.x, self.u, self.h, self.u_t, self.u_x, self.h_t, self.h_x,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Residuals `(Δ1, Δ2)` of the system at a jet.
pub fn mswe_residual(jet: &JetPoint, params: &FluidParams) -> Result<(f64, f64)> {
    if !jet.is_finite() {
        return Err(Error::Domain("non-finite jet component".into()));
    }
    check_depth(jet.h)?;
    let r1 = jet.u_t + jet.u * jet.u_x + params.pressure(jet.h) * jet.h_x;
    let r2 = jet.h_t + jet.u * jet.h_x + jet.h * jet.u_x;
    Ok((r1, r2))
}

/// Scale against which the residuals at `jet` are compared.
pub(crate) fn residual_scale(jet: &JetPoint, params: &FluidParams) -> f64 {
    1.0 + jet.u_t.abs()
        + (jet.u * jet.u_x).abs()
        + (params.pressure(jet.h) * jet.h_x).abs()
        + jet.h_t.abs()
        + (jet.h * jet.u_x).abs()
}

/// Residuals of the linear hodograph system
/// `g_u - u f_u + h f_h = 0`, `g_h - u f_h + g(1 + H/h) f_u = 0`.
pub fn linearized_residual(
    pair: &HodographPair,
    u: f64,
    h: f64,
    params: &FluidParams,
) -> Result<(f64, f64)> {
    check_depth(h)?;
    let v = pair.eval(u, h)?;
    Ok((
        v.g_u - u * v.f_u + h * v.f_h,
        v.g_h - u * v.f_h + params.pressure(h) * v.f_u,
    ))
}

/// The second-order partials of `f` needed by [`single_f_residual`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FPartials {
    pub f_h: f64,
    pub f_hh: f64,
    pub f_uu: f64,
}

/// Residual of the single equation `2 f_h + h f_hh - g(1 + H/h) f_uu = 0`
/// obtained by eliminating `g` from the linear system.
pub fn single_f_residual(f: &FPartials, _u: f64, h: f64, params: &FluidParams) -> Result<f64> {
    check_depth(h)?;
    Ok(2.0 * f.f_h + h * f.f_hh - params.pressure(h) * f.f_uu)
}

/// Axis-aligned rectangle in the `(t, x)` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

impl Rect {
    pub fn new(t0: f64, t1: f64, x0: f64, x1: f64) -> Result<Self> {
        let r = Self { t0, t1, x0, x1 };
        if !(t0 < t1 && x0 < x1) || ![t0, t1, x0, x1].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("empty or invalid rectangle {r:?}")));
        }
        Ok(r)
    }

    pub fn contains(&self, t: f64, x: f64) -> bool {
        t >= self.t0 && t <= self.t1 && x >= self.x0 && x <= self.x1
    }

    /// Rectangle shrunk by `margin_t`, `margin_x` on every side.
    pub fn shrink(&self, margin_t: f64, margin_x: f64) -> Result<Self> {
        Self::new(
            self.t0 + margin_t,
            self.t1 - margin_t,
            self.x0 + margin_x,
            self.x1 - margin_x,
        )
    }
}

pub type SeriesFieldFn = Arc<dyn Fn(&Taylor, &Taylor) -> (Taylor, Taylor) + Send + Sync>;
pub type NumericFieldFn = Arc<dyn Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync>;

#[derive(Clone)]
enum FieldEval {
    /// Closed form written over Taylor series: derivatives are exact.
    Series(SeriesFieldFn),
    /// Pointwise evaluation only; derivatives come from finite differences.
    Numeric(NumericFieldFn),
}

/// A candidate solution `(t, x) -> (u, h)` on a rectangle.
#[derive(Clone)]
pub struct SolutionField {
    eval: FieldEval,
    domain: Rect,
    provenance: String,
}

impl fmt::Debug for SolutionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolutionField")
            .field("provenance", &self.provenance)
            .field("domain", &self.domain)
            .field("analytic", &self.is_analytic())
            .finish()
    }
}

/// Central fourth-order finite-difference step for coordinate value `v`.
pub fn fd_step(v: f64) -> f64 {
    f64::EPSILON.powf(0.2) * v.abs().max(1.0)
}

fn fd4(f: impl Fn(f64) -> Result<(f64, f64)>, v: f64) -> Result<(f64, f64)> {
    let s = fd_step(v);
    let (a2, b2) = f(v + 2.0 * s)?;
    let (a1, b1) = f(v + s)?;
    let (am1, bm1) = f(v - s)?;
    let (am2, bm2) = f(v - 2.0 * s)?;
    Ok((
        (-a2 + 8.0 * a1 - 8.0 * am1 + am2) / (12.0 * s),
        (-b2 + 8.0 * b1 - 8.0 * bm1 + bm2) / (12.0 * s),
    ))
}

impl SolutionField {
    pub fn analytic(
        domain: Rect,
        provenance: impl Into<String>,
        f: impl Fn(&Taylor, &Taylor) -> (Taylor, Taylor) + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: FieldEval::Series(Arc::new(f)),
            domain,
            provenance: provenance.into(),
        }
    }

    pub fn numeric(
        domain: Rect,
        provenance: impl Into<String>,
        f: impl Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: FieldEval::Numeric(Arc::new(f)),
            domain,
            provenance: provenance.into(),
        }
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.eval, FieldEval::Series(_))
    }

    pub fn with_domain(mut self, domain: Rect) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    /// `(u, h)` at `(t, x)`. Evaluation outside the domain is allowed (the
    /// finite-difference stencil and ghost cells may need it); callers
    /// that care check [`Rect::contains`].
    pub fn eval(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        let (u, h) = match &self.eval {
            FieldEval::Series(f) => {
                let (u, h) = f(&Taylor::constant(t, 0), &Taylor::constant(x, 0));
                (u.value(), h.value())
            }
            FieldEval::Numeric(f) => f(t, x)?,
        };
        if !(u.is_finite() && h.is_finite()) {
            return Err(Error::Evaluation(format!(
                "{}: non-finite value at (t, x) = ({t}, {x})",
                self.provenance
            )));
        }
        Ok((u, h))
    }

    /// Jet with exact derivatives for closed-form fields.
    pub fn analytic_jet(&self, t: f64, x: f64) -> Option<JetPoint> {
        match &self.eval {
            FieldEval::Series(f) => {
                let tt = Taylor::variable(t, crate::taylor::T, 1);
                let xx = Taylor::variable(x, crate::taylor::X, 1);
                let (u, h) = f(&tt, &xx);
                Some(JetPoint {
                    t,
                    x,
                    u: u.value(),
                    h: h.value(),
                    u_t: u.d1(crate::taylor::T),
                    u_x: u.d1(crate::taylor::X),
                    h_t: h.d1(crate::taylor::T),
                    h_x: h.d1(crate::taylor::X),
                })
            }
            FieldEval::Numeric(_) => None,
        }
    }

    /// Jet with derivatives from fourth-order central differences.
    pub fn fd_jet(&self, t: f64, x: f64) -> Result<JetPoint> {
        let (u, h) = self.eval(t, x)?;
        let (u_t, h_t) = fd4(|s| self.eval(s, x), t)?;
        let (u_x, h_x) = fd4(|s| self.eval(t, s), x)?;
        Ok(JetPoint {
            t,
            x,
            u,
            h,
            u_t,
            u_x,
            h_t,
            h_x,
        })
    }

    /// Analytic jet when available, otherwise finite differences.
    pub fn jet(&self, t: f64, x: f64) -> Result<JetPoint> {
        match self.analytic_jet(t, x) {
            Some(j) => Ok(j),
            None => self.fd_jet(t, x),
        }
    }
}

/// The two independent discrete point symmetries: `S1` flips `(t, x)`,
/// `S2` flips `(x, u)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DiscreteSymmetry {
    S1,
    S2,
}

/// Push a solution field forward by a discrete symmetry.
pub fn apply_discrete_symmetry(field: &SolutionField, which: DiscreteSymmetry) -> SolutionField {
    let d = field.domain;
    let domain = match which {
        DiscreteSymmetry::S1 => Rect {
            t0: -d.t1,
            t1: -d.t0,
            x0: -d.x1,
            x1: -d.x0,
        },
        DiscreteSymmetry::S2 => Rect {
            t0: d.t0,
            t1: d.t1,
            x0: -d.x1,
            x1: -d.x0,
        },
    };
    let provenance = format!("{:?}({})", which, field.provenance);
    let eval = match (&field.eval, which) {
        (FieldEval::Series(f), DiscreteSymmetry::S1) => {
            let f = f.clone();
            FieldEval::Series(Arc::new(move |t: &Taylor, x: &Taylor| f(&-t, &-x)))
        }
        (FieldEval::Series(f), DiscreteSymmetry::S2) => {
            let f = f.clone();
            FieldEval::Series(Arc::new(move |t: &Taylor, x: &Taylor| {
                let (u, h) = f(t, &-x);
                (-u, h)
            }))
        }
        (FieldEval::Numeric(f), DiscreteSymmetry::S1) => {
            let f = f.clone();
            FieldEval::Numeric(Arc::new(move |t, x| f(-t, -x)))
        }
        (FieldEval::Numeric(f), DiscreteSymmetry::S2) => {
            let f = f.clone();
            FieldEval::Numeric(Arc::new(move |t, x| f(t, -x).map(|(u, h)| (-u, h))))
        }
    };
    SolutionField {
        eval,
        domain,
        provenance,
    }
}

/// Uniform sampling ranges for on-manifold jets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingBox {
    pub t: (f64, f64),
    pub x: (f64, f64),
    pub u: (f64, f64),
    pub h: (f64, f64),
    pub u_x: (f64, f64),
    pub h_x: (f64, f64),
}

impl Default for SamplingBox {
    fn default() -> Self {
        Self {
            t: (0.5, 2.0),
            x: (-1.0, 1.0),
            u: (-1.0, 1.0),
            h: (0.5, 2.0),
            u_x: (-1.0, 1.0),
            h_x: (-1.0, 1.0),
        }
    }
}

impl SamplingBox {
    fn validate(&self) -> Result<()> {
        let ranges = [self.t, self.x, self.u, self.h, self.u_x, self.h_x];
        if ranges
            .iter()
            .any(|(a, b)| !(a.is_finite() && b.is_finite()) || a > b)
        {
            return Err(Error::Config(format!("invalid sampling box {self:?}")));
        }
        if self.h.0 <= 0.0 {
            return Err(Error::Config(format!(
                "sampling box h-range must be positive, got {:?}",
                self.h
            )));
        }
        Ok(())
    }
}

fn draw(rng: &mut impl Rng, (a, b): (f64, f64)) -> f64 {
    if a == b {
        a
    } else {
        rng.gen_range(a..=b)
    }
}

/// Draw a jet on the solution manifold: the free data is uniform in the
/// box and `u_t`, `h_t` are solved from the two equations.
pub fn sample_manifold_jet(
    rng: &mut impl Rng,
    params: &FluidParams,
    bx: &SamplingBox,
) -> Result<JetPoint> {
    bx.validate()?;
    let t = draw(rng, bx.t);
    let x = draw(rng, bx.x);
    let u = draw(rng, bx.u);
    let h = draw(rng, bx.h);
    let u_x = draw(rng, bx.u_x);
    let h_x = draw(rng, bx.h_x);
    Ok(JetPoint {
        t,
        x,
        u,
        h,
        u_t: -(u * u_x + params.pressure(h) * h_x),
        h_t: -(u * h_x + h * u_x),
        u_x,
        h_x,
    })
}

/// `n` reproducible on-manifold jets from `seed`.
pub fn sample_manifold_jets(
    seed: u64,
    n: usize,
    params: &FluidParams,
    bx: &SamplingBox,
) -> Result<Vec<JetPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| sample_manifold_jet(&mut rng, params, bx))
        .collect()
}

//! Point vector fields `Q = τ∂_t + ξ∂_x + η∂_u + φ∂_h` on `(t, x, u, h)`
//! space: first prolongation, invariance defect on the solution manifold,
//! commutators, and the determining equations.
//!
//! Coefficients are usually written over [`Taylor`] series so that partial
//! derivatives of any order are exact. Fields known only pointwise fall back
//! to finite-difference first partials and are flagged as such.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hodograph::HodographPair;
use crate::model::{mswe_residual, residual_scale, FluidParams, JetPoint};
use crate::taylor::{Taylor, H, T, U, X};

/// A point `(t, x, u, h)`.
pub type Point = [f64; 4];

pub type CoeffFn = Arc<dyn Fn(&[Taylor; 4]) -> [Taylor; 4] + Send + Sync>;
pub type NumericCoeffFn = Arc<dyn Fn(Point) -> Result<[f64; 4]> + Send + Sync>;

enum Coeffs {
    Series(CoeffFn),
    Numeric(NumericCoeffFn),
    Pair(HodographPair),
    Linear(Vec<(f64, VectorFieldSpec)>),
    Bracket(VectorFieldSpec, VectorFieldSpec),
}

/// A candidate symmetry generator.
#[derive(Clone)]
pub struct VectorFieldSpec {
    name: String,
    coeffs: Arc<Coeffs>,
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldSpec")
            .field("name", &self.name)
            .field("analytic_partials", &self.has_analytic_partials())
            .finish()
    }
}

/// Coefficient values and their first partials at a point;
/// `grad[i][j] = ∂_j c_i` with `c = (τ, ξ, η, φ)` and `j` over `(t, x, u, h)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientJet {
    pub value: [f64; 4],
    pub grad: [[f64; 4]; 4],
}

fn finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Evaluation(format!("non-finite coefficient in {what}")))
    }
}

impl VectorFieldSpec {
    pub fn series(
        name: impl Into<String>,
        f: impl Fn(&[Taylor; 4]) -> [Taylor; 4] + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            coeffs: Arc::new(Coeffs::Series(Arc::new(f))),
        }
    }

    /// A field known only pointwise; partials by finite differences.
    pub fn numeric(
        name: impl Into<String>,
        f: impl Fn(Point) -> Result<[f64; 4]> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            coeffs: Arc::new(Coeffs::Numeric(Arc::new(f))),
        }
    }

    /// `ℒ(f, g) = f(u, h)∂_t + g(u, h)∂_x`.
    pub fn from_pair(pair: &HodographPair) -> Self {
        Self {
            name: format!("L({})", pair.label()),
            coeffs: Arc::new(Coeffs::Pair(pair.clone())),
        }
    }

    pub fn linear(name: impl Into<String>, terms: Vec<(f64, VectorFieldSpec)>) -> Self {
        Self {
            name: name.into(),
            coeffs: Arc::new(Coeffs::Linear(terms)),
        }
    }

    /// The commutator field `[v, w]`.
    pub fn bracket(v: &VectorFieldSpec, w: &VectorFieldSpec) -> Self {
        Self {
            name: format!("[{}, {}]", v.name, w.name),
            coeffs: Arc::new(Coeffs::Bracket(v.clone(), w.clone())),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::linear(format!("{a}*{}", self.name), vec![(a, self.clone())])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Whether first partials are exact rather than finite differences.
    pub fn has_analytic_partials(&self) -> bool {
        match &*self.coeffs {
            Coeffs::Series(_) | Coeffs::Pair(_) => true,
            Coeffs::Numeric(_) => false,
            Coeffs::Linear(terms) => terms.iter().all(|(_, v)| v.has_analytic_partials()),
            Coeffs::Bracket(v, w) => v.has_analytic_partials() && w.has_analytic_partials(),
        }
    }

    /// Taylor expansion of the four coefficients at `p` to `order`.
    pub fn taylor(&self, p: Point, order: usize) -> Result<[Taylor; 4]> {
        let out = match &*self.coeffs {
            Coeffs::Series(f) => f(&Taylor::seeds(p, order)),
            Coeffs::Numeric(f) => numeric_taylor(f, p, order, &self.name)?,
            Coeffs::Pair(pair) => {
                let (f, g) = pair.taylor(p[U], p[H], order)?;
                [f, g, Taylor::constant(0.0, order), Taylor::constant(0.0, order)]
            }
            Coeffs::Linear(terms) => {
                let mut acc: [Taylor; 4] = std::array::from_fn(|_| Taylor::constant(0.0, order));
                for (a, v) in terms {
                    let c = v.taylor(p, order)?;
                    for i in 0..4 {
                        acc[i] += &c[i].scale(*a);
                    }
                }
                acc
            }
            Coeffs::Bracket(v, w) => {
                let vs = v.taylor(p, order + 1)?;
                let ws = w.taylor(p, order + 1)?;
                let vt: Vec<Taylor> = vs.iter().map(|c| c.truncate(order)).collect();
                let wt: Vec<Taylor> = ws.iter().map(|c| c.truncate(order)).collect();
                std::array::from_fn(|i| {
                    let mut acc = Taylor::constant(0.0, order);
                    for j in 0..4 {
                        acc += &(&vt[j] * &ws[i].deriv(j));
                        acc += &(&wt[j] * &vs[i].deriv(j)).scale(-1.0);
                    }
                    acc
                })
            }
        };
        for c in &out {
            finite(c.coefficients(), &self.name)?;
        }
        Ok(out)
    }

    /// Coefficient values `(τ, ξ, η, φ)` at `p`.
    pub fn eval(&self, p: Point) -> Result<[f64; 4]> {
        let c = self.taylor(p, 0)?;
        Ok(std::array::from_fn(|i| c[i].value()))
    }

    /// Values and first partials at `p`.
    pub fn jet1(&self, p: Point) -> Result<CoefficientJet> {
        let c = self.taylor(p, 1)?;
        Ok(CoefficientJet {
            value: std::array::from_fn(|i| c[i].value()),
            grad: std::array::from_fn(|i| std::array::from_fn(|j| c[i].d1(j))),
        })
    }

    /// `𝒟 = t∂_t + x∂_x`.
    pub fn dilation() -> Self {
        Self::series("D", |[t, x, _, _]| {
            let z = Taylor::constant(0.0, t.order());
            [t.clone(), x.clone(), z.clone(), z]
        })
    }

    /// `𝒢 = t∂_x + ∂_u`.
    pub fn galilean_boost() -> Self {
        Self::series("G", |[t, _, _, _]| {
            let n = t.order();
            let z = Taylor::constant(0.0, n);
            [z.clone(), t.clone(), Taylor::constant(1.0, n), z]
        })
    }

    /// `∂_t`.
    pub fn time_translation() -> Self {
        Self::constant("dt", [1.0, 0.0, 0.0, 0.0])
    }

    /// `∂_x`.
    pub fn space_translation() -> Self {
        Self::constant("dx", [0.0, 1.0, 0.0, 0.0])
    }

    /// `∂_u`; not a symmetry, used to probe the defect.
    pub fn velocity_shift() -> Self {
        Self::constant("du", [0.0, 0.0, 1.0, 0.0])
    }

    /// `t∂_t`; not a symmetry, used to probe the determining equations.
    pub fn time_scaling() -> Self {
        Self::series("t*dt", |[t, _, _, _]| {
            let z = Taylor::constant(0.0, t.order());
            [t.clone(), z.clone(), z.clone(), z]
        })
    }

    /// Constant-coefficient field.
    pub fn constant(name: &str, c: [f64; 4]) -> Self {
        Self::series(name, move |s| {
            let n = s[0].order();
            std::array::from_fn(|i| Taylor::constant(c[i], n))
        })
    }

    /// Second dilation of the classical (`H = 0`) system,
    /// `𝒟₂ = 2h∂_h + u∂_u − t∂_t`.
    pub fn swe_dilation() -> Self {
        Self::series("D2", |[t, _, u, h]| {
            let z = Taylor::constant(0.0, t.order());
            [-t, z, u.clone(), h.scale(2.0)]
        })
    }

    /// The projective generator of the classical system as printed,
    /// `𝒞 = 4hu∂_h + (4hg + u²)∂_u + (2x − 6ut)∂_t + (6hgt − 3u²t)∂_x`,
    /// with `g` read as the gravity constant.
    pub fn swe_projective(gravity: f64) -> Self {
        Self::series("C", move |[t, x, u, h]| {
            let uu = u * u;
            let tau = &x.scale(2.0) - &(u * t).scale(6.0);
            let xi = &(h * t).scale(6.0 * gravity) - &(&uu * t).scale(3.0);
            let eta = &h.scale(4.0 * gravity) + &uu;
            let phi = (h * u).scale(4.0);
            [tau, xi, eta, phi]
        })
    }

    /// The general symmetry `c1 𝒟 + c2 𝒢 + ℒ(f, g)` of the modified system:
    /// `τ = c1 t + f`, `ξ = c1 x + c2 t + g`, `η = c2`, `φ = 0`.
    pub fn general_family(c1: f64, c2: f64, pair: &HodographPair) -> Self {
        Self::linear(
            format!("{c1}*D + {c2}*G + L({})", pair.label()),
            vec![
                (c1, Self::dilation()),
                (c2, Self::galilean_boost()),
                (1.0, Self::from_pair(pair)),
            ],
        )
    }
}

fn numeric_taylor(f: &NumericCoeffFn, p: Point, order: usize, name: &str) -> Result<[Taylor; 4]> {
    let v = f(p)?;
    match order {
        0 => Ok(std::array::from_fn(|i| Taylor::constant(v[i], 0))),
        1 => {
            let mut grad = [[0.0; 4]; 4];
            for j in 0..4 {
                let s = crate::model::fd_step(p[j]);
                let at = |k: f64| -> Result<[f64; 4]> {
                    let mut q = p;
                    q[j] += k * s;
                    f(q)
                };
                let (a2, a1, m1, m2) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
                for i in 0..4 {
                    grad[i][j] = (-a2[i] + 8.0 * a1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * s);
                }
            }
            Ok(std::array::from_fn(|i| Taylor::first_order(v[i], grad[i])))
        }
        _ => Err(Error::Evaluation(format!(
            "{name}: finite-difference field supports first partials only"
        ))),
    }
}

/// Coefficients `η^t, η^x, φ^t, φ^x` of the first prolongation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProlongedCoefficients {
    pub eta_t: f64,
    pub eta_x: f64,
    pub phi_t: f64,
    pub phi_x: f64,
}

/// First prolongation of `v` at `jet` via the total derivatives
/// `D_t = ∂_t + u_t∂_u + h_t∂_h` and `D_x = ∂_x + u_x∂_u + h_x∂_h`.
pub fn prolong1(v: &VectorFieldSpec, jet: &JetPoint) -> Result<ProlongedCoefficients> {
    let c = v.jet1(jet.base())?;
    let dt = |i: usize| c.grad[i][T] + jet.u_t * c.grad[i][U] + jet.h_t * c.grad[i][H];
    let dx = |i: usize| c.grad[i][X] + jet.u_x * c.grad[i][U] + jet.h_x * c.grad[i][H];
    let (tau, xi, eta, phi) = (0, 1, 2, 3);
    Ok(ProlongedCoefficients {
        eta_t: dt(eta) - jet.u_t * dt(tau) - jet.u_x * dt(xi),
        eta_x: dx(eta) - jet.u_t * dx(tau) - jet.u_x * dx(xi),
        phi_t: dt(phi) - jet.h_t * dt(tau) - jet.h_x * dt(xi),
        phi_x: dx(phi) - jet.h_t * dx(tau) - jet.h_x * dx(xi),
    })
}

/// Relative tolerance for accepting a jet as lying on the solution manifold.
pub const ON_MANIFOLD_TOL: f64 = 1e-12;

/// `Q⁽¹⁾Δ` at an on-manifold jet; both components vanish for symmetries.
pub fn invariance_defect(
    v: &VectorFieldSpec,
    jet: &JetPoint,
    params: &FluidParams,
) -> Result<(f64, f64)> {
    let (r1, r2) = mswe_residual(jet, params)?;
    let scale = residual_scale(jet, params);
    if r1.abs().max(r2.abs()) > ON_MANIFOLD_TOL * scale {
        return Err(Error::Precondition(format!(
            "jet is off the solution manifold (residuals {r1:e}, {r2:e})"
        )));
    }
    let pr = prolong1(v, jet)?;
    let [_, _, eta, phi] = v.eval(jet.base())?;
    let d1 = pr.eta_t
        + jet.u * pr.eta_x
        + eta * jet.u_x
        + params.pressure(jet.h) * pr.phi_x
        + params.pressure_dh(jet.h) * phi * jet.h_x;
    let d2 = pr.phi_t + jet.u * pr.phi_x + eta * jet.h_x + jet.h * pr.eta_x + phi * jet.u_x;
    Ok((d1, d2))
}

/// Commutator coefficients `(v·∇)w − (w·∇)v` at `point`.
pub fn lie_bracket(v: &VectorFieldSpec, w: &VectorFieldSpec, point: Point) -> Result<[f64; 4]> {
    let a = v.jet1(point)?;
    let b = w.jet1(point)?;
    Ok(std::array::from_fn(|i| {
        (0..4)
            .map(|j| a.value[j] * b.grad[i][j] - b.value[j] * a.grad[i][j])
            .sum()
    }))
}

/// Left-hand sides of the eight determining equations at `point`, in the
/// order: the two `τ`-`ξ` coupling equations, the two `φ` trace equations,
/// the two `η` equations, then the two transport equations.
pub fn determining_defect(
    v: &VectorFieldSpec,
    point: Point,
    params: &FluidParams,
) -> Result<[f64; 8]> {
    let [_, _, u, h] = point;
    crate::model::check_depth(h)?;
    let c = v.jet1(point)?;
    let [_, _, eta, phi] = c.value;
    let d = |i: usize, j: usize| c.grad[i][j];
    let (tau, xi, et, ph) = (0, 1, 2, 3);
    let k = params.pressure(h);
    let kp = params.pressure_dh(h);
    let trace = d(tau, T) - d(xi, X);
    Ok([
        d(xi, U) - u * d(tau, U) + h * d(tau, H),
        d(xi, H) - u * d(tau, H) + k * d(tau, U),
        -kp * phi - k * (trace - d(et, U) + d(ph, H) + 2.0 * u * d(tau, X)),
        phi + h * (trace + d(et, U) - d(ph, H) + 2.0 * u * d(tau, X)),
        eta - h * d(et, H) + u * trace - d(xi, T)
            + u * u * d(tau, X)
            + k * (d(ph, U) + h * d(tau, X)),
        eta + h * d(et, H) + u * trace - d(xi, T) + u * u * d(tau, X)
            - k * (d(ph, U) - h * d(tau, X)),
        d(et, T) + u * d(et, X) + k * d(ph, X),
        d(ph, T) + u * d(ph, X) + h * d(et, X),
    ])
}

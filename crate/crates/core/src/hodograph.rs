//! Solutions `(f, g)` of the linearized system, reconstruction of `g` from
//! `f`, and inversion of the hodograph map `(u, h) ↦ (t, x) = (f, g)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{
    check_depth, mswe_residual, single_f_residual, FPartials, FluidParams, Rect, SolutionField,
};
use crate::quad;
use crate::taylor::{Taylor, H, U};

/// `(u, h)` series to `(f, g)` series.
pub type PairFn = Arc<dyn Fn(&Taylor, &Taylor) -> (Taylor, Taylor) + Send + Sync>;
/// `(u, h)` series to `f` series.
pub type ScalarFn = Arc<dyn Fn(&Taylor, &Taylor) -> Taylor + Send + Sync>;

/// Box in the `(u, h)` plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UhBox {
    pub u: (f64, f64),
    pub h: (f64, f64),
}

impl Default for UhBox {
    fn default() -> Self {
        Self {
            u: (-1.0, 1.0),
            h: (0.5, 2.0),
        }
    }
}

impl UhBox {
    pub fn new(u: (f64, f64), h: (f64, f64)) -> Result<Self> {
        let ok = [u.0, u.1, h.0, h.1].iter().all(|v| v.is_finite()) && u.0 <= u.1 && h.0 <= h.1;
        if !ok {
            return Err(Error::Config(format!("malformed (u, h) box {u:?} x {h:?}")));
        }
        if h.0 <= 0.0 {
            return Err(Error::Domain(format!("box reaches h = {} <= 0", h.0)));
        }
        Ok(Self { u, h })
    }

    pub fn contains(&self, u: f64, h: f64) -> bool {
        (self.u.0..=self.u.1).contains(&u) && (self.h.0..=self.h.1).contains(&h)
    }

    /// `n × n` lattice including the corners.
    pub fn lattice(&self, n: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let at = move |(a, b): (f64, f64), k: usize| {
            if n <= 1 {
                0.5 * (a + b)
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        };
        (0..n).flat_map(move |i| (0..n).map(move |j| (at(self.u, i), at(self.h, j))))
    }

    pub fn sample(&self, rng: &mut impl Rng) -> (f64, f64) {
        let draw = |rng: &mut dyn rand::RngCore, (a, b): (f64, f64)| {
            if a == b {
                a
            } else {
                rng.gen_range(a..b)
            }
        };
        (draw(rng, self.u), draw(rng, self.h))
    }
}

/// Order of the two legs of the integration path for `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathOrder {
    /// Along `u` at the base depth, then along `h`.
    UFirst,
    /// Along `h` at the base velocity, then along `u`.
    HFirst,
}

const QUAD_ABS_TOL: f64 = 1e-13;
const QUAD_REL_TOL: f64 = 1e-10;

struct Reconstructed {
    f: ScalarFn,
    base: (f64, f64),
    g0: f64,
    params: FluidParams,
}

impl Reconstructed {
    /// `(g_u, g_h)` from the linear system at a point.
    fn grad_g(&self, u: f64, h: f64) -> (f64, f64) {
        let f = (self.f)(&Taylor::variable(u, U, 1), &Taylor::variable(h, H, 1));
        let (fu, fh) = (f.d1(U), f.d1(H));
        (
            u * fu - h * fh,
            u * fh - self.params.pressure(h) * fu,
        )
    }

    fn g_value(&self, u: f64, h: f64, path: PathOrder) -> Result<f64> {
        check_depth(h)?;
        let (u0, h0) = self.base;
        let along_u = |hc: f64, a: f64, b: f64| {
            quad::integrate(|s| self.grad_g(s, hc).0, a, b, QUAD_ABS_TOL, QUAD_REL_TOL)
        };
        let along_h = |uc: f64, a: f64, b: f64| {
            quad::integrate(|s| self.grad_g(uc, s).1, a, b, QUAD_ABS_TOL, QUAD_REL_TOL)
        };
        let legs = match path {
            PathOrder::UFirst => along_u(h0, u0, u)? + along_h(u, h0, h)?,
            PathOrder::HFirst => along_h(u0, h0, h)? + along_u(h, u0, u)?,
        };
        Ok(self.g0 + legs)
    }
}

enum Node {
    Analytic(PairFn),
    Reconstructed(Reconstructed),
    Linear(Vec<(f64, HodographPair)>),
    /// Image under the Galilean boost by `eps`.
    Boost(f64, HodographPair),
    /// `(f_u, g_u − f)`, the pair of `[𝒢, ℒ(f, g)]`.
    Derived(HodographPair),
}

/// A solution of the linearized system together with its validity box and
/// the parameters it was built from.
#[derive(Clone)]
pub struct HodographPair {
    label: String,
    node: Arc<Node>,
    domain: UhBox,
    params: Vec<(String, f64)>,
}

impl fmt::Debug for HodographPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HodographPair")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("params", &self.params)
            .finish()
    }
}

/// Values and first partials of a pair at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairValues {
    pub f: f64,
    pub g: f64,
    pub f_u: f64,
    pub f_h: f64,
    pub g_u: f64,
    pub g_h: f64,
}

impl HodographPair {
    /// A pair given in closed form over Taylor series in `(u, h)`.
    pub fn analytic(
        label: impl Into<String>,
        domain: UhBox,
        pair: impl Fn(&Taylor, &Taylor) -> (Taylor, Taylor) + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            node: Arc::new(Node::Analytic(Arc::new(pair))),
            domain,
            params: Vec::new(),
        }
    }

    pub fn linear(label: impl Into<String>, terms: Vec<(f64, HodographPair)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Parameter("empty linear combination".into()))?;
        let domain = first.1.domain;
        Ok(Self {
            label: label.into(),
            node: Arc::new(Node::Linear(terms)),
            domain,
            params: Vec::new(),
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            label: format!("{a}*{}", self.label),
            node: Arc::new(Node::Linear(vec![(a, self.clone())])),
            domain: self.domain,
            params: self.params.clone(),
        }
    }

    /// `f' = f(u − ε, h)`, `g' = g(u − ε, h) + ε f(u − ε, h)`.
    pub fn boosted(&self, eps: f64) -> Self {
        let d = self.domain;
        Self {
            label: format!("boost({eps})*{}", self.label),
            node: Arc::new(Node::Boost(eps, self.clone())),
            domain: UhBox {
                u: (d.u.0 + eps, d.u.1 + eps),
                h: d.h,
            },
            params: self.params.clone(),
        }
    }

    /// `(f_u, g_u − f)`.
    pub fn boost_derivative(&self) -> Self {
        Self {
            label: format!("d_u {}", self.label),
            node: Arc::new(Node::Derived(self.clone())),
            domain: self.domain,
            params: self.params.clone(),
        }
    }

    pub fn with_params(mut self, params: Vec<(String, f64)>) -> Self {
        self.params = params;
        self
    }

    pub fn with_domain(mut self, domain: UhBox) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> UhBox {
        self.domain
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    /// Whether `g` comes from numerical path integration.
    pub fn is_reconstructed(&self) -> bool {
        match &*self.node {
            Node::Analytic(_) => false,
            Node::Reconstructed(_) => true,
            Node::Linear(terms) => terms.iter().any(|(_, p)| p.is_reconstructed()),
            Node::Boost(_, p) | Node::Derived(p) => p.is_reconstructed(),
        }
    }

    /// Taylor expansions of `f` and `g` at `(u, h)`.
    pub fn taylor(&self, u: f64, h: f64, order: usize) -> Result<(Taylor, Taylor)> {
        check_depth(h)?;
        let (f, g) = match &*self.node {
            Node::Analytic(p) => p(&Taylor::variable(u, U, order), &Taylor::variable(h, H, order)),
            Node::Reconstructed(r) => {
                let fs = (r.f)(
                    &Taylor::variable(u, U, order + 1),
                    &Taylor::variable(h, H, order + 1),
                );
                let uu = Taylor::variable(u, U, order);
                let hh = Taylor::variable(h, H, order);
                let (fu, fh) = (fs.deriv(U), fs.deriv(H));
                let gu = &(&uu * &fu) - &(&hh * &fh);
                let gh = &(&uu * &fh) - &(&r.params.pressure_series(&hh) * &fu);
                let gv = r.g_value(u, h, PathOrder::UFirst)?;
                let g = Taylor::from_uh_gradient(gv, &gu, &gh);
                (fs.truncate(order), g.truncate(order))
            }
            Node::Linear(terms) => {
                let mut f = Taylor::constant(0.0, order);
                let mut g = Taylor::constant(0.0, order);
                for (a, p) in terms {
                    let (pf, pg) = p.taylor(u, h, order)?;
                    f += &pf.scale(*a);
                    g += &pg.scale(*a);
                }
                (f, g)
            }
            Node::Boost(eps, p) => {
                let (f, g) = p.taylor(u - eps, h, order)?;
                let g = &g + &f.scale(*eps);
                (f, g)
            }
            Node::Derived(p) => {
                let (f, g) = p.taylor(u, h, order + 1)?;
                let fu = f.deriv(U);
                let gu = g.deriv(U);
                (fu, &gu - &f.truncate(order))
            }
        };
        if !f.coefficients().iter().chain(g.coefficients()).all(|v| v.is_finite()) {
            return Err(Error::Evaluation(format!(
                "{}: non-finite value at (u, h) = ({u}, {h})",
                self.label
            )));
        }
        Ok((f, g))
    }

    pub fn eval(&self, u: f64, h: f64) -> Result<PairValues> {
        let (f, g) = self.taylor(u, h, 1)?;
        Ok(PairValues {
            f: f.value(),
            g: g.value(),
            f_u: f.d1(U),
            f_h: f.d1(H),
            g_u: g.d1(U),
            g_h: g.d1(H),
        })
    }

    /// Second partials of `f` entering the single-`f` equation.
    pub fn f_partials(&self, u: f64, h: f64) -> Result<FPartials> {
        let (f, _) = self.taylor(u, h, 2)?;
        Ok(FPartials {
            f_h: f.d1(H),
            f_hh: f.d2(H, H),
            f_uu: f.d2(U, U),
        })
    }

    /// `g` integrated along the given path; for pairs that are not
    /// reconstructed this is just `g`.
    pub fn g_along(&self, u: f64, h: f64, path: PathOrder) -> Result<f64> {
        match &*self.node {
            Node::Reconstructed(r) => r.g_value(u, h, path),
            _ => Ok(self.eval(u, h)?.g),
        }
    }

    /// Jacobian determinant `f_u g_h − f_h g_u` of the hodograph map.
    pub fn jacobian(&self, u: f64, h: f64) -> Result<f64> {
        let v = self.eval(u, h)?;
        Ok(v.f_u * v.g_h - v.f_h * v.g_u)
    }
}

/// Build the pair `(f, g)` from `f` alone, integrating
/// `g_u = u f_u − h f_h`, `g_h = u f_h − K(h) f_u` from `base` with
/// `g(base) = g0`. `f` is first checked against the single-`f` equation on a
/// 9 × 9 lattice of `domain`, relative to the size of its terms.
pub fn pair_from_f(
    label: impl Into<String>,
    f: impl Fn(&Taylor, &Taylor) -> Taylor + Send + Sync + 'static,
    base: (f64, f64),
    g0: f64,
    domain: UhBox,
    params: &FluidParams,
) -> Result<HodographPair> {
    if !domain.contains(base.0, base.1) {
        return Err(Error::Precondition(format!(
            "base point {base:?} outside the validity box"
        )));
    }
    check_depth(domain.h.0)?;
    let f: ScalarFn = Arc::new(f);
    for (u, h) in domain.lattice(9) {
        let s = f(&Taylor::variable(u, U, 2), &Taylor::variable(h, H, 2));
        let p = FPartials {
            f_h: s.d1(H),
            f_hh: s.d2(H, H),
            f_uu: s.d2(U, U),
        };
        let r = single_f_residual(&p, u, h, params)?;
        let scale = 1.0 + (2.0 * p.f_h).abs() + (h * p.f_hh).abs() + (params.pressure(h) * p.f_uu).abs();
        if !(r.abs() <= 1e-7 * scale) {
            return Err(Error::Incompatible { residual: r, u, h });
        }
    }
    Ok(HodographPair {
        label: label.into(),
        node: Arc::new(Node::Reconstructed(Reconstructed {
            f,
            base,
            g0,
            params: *params,
        })),
        domain,
        params: vec![
            ("u0".into(), base.0),
            ("h0".into(), base.1),
            ("g0".into(), g0),
        ],
    })
}

pub const MAX_NEWTON_ITERATIONS: usize = 50;
pub const MAX_HALVINGS: usize = 20;
pub const DEGENERATE_DET: f64 = 1e-12;

/// Solve `f(u, h) = t`, `g(u, h) = x` by damped Newton iteration; converged
/// when `|f − t| + |g − x| < tol`.
pub fn invert_point(
    pair: &HodographPair,
    t: f64,
    x: f64,
    guess: (f64, f64),
    tol: f64,
) -> Result<(f64, f64)> {
    let (mut u, mut h) = guess;
    check_depth(h)?;
    let mut v = pair.eval(u, h)?;
    let mut res = (v.f - t).abs() + (v.g - x).abs();
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if res < tol {
            return Ok((u, h));
        }
        let det = v.f_u * v.g_h - v.f_h * v.g_u;
        if det.abs() < DEGENERATE_DET {
            return Err(Error::DegenerateMap { det, u, h });
        }
        let (r0, r1) = (v.f - t, v.g - x);
        let du = (v.g_h * r0 - v.f_h * r1) / det;
        let dh = (-v.g_u * r0 + v.f_u * r1) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let (nu, nh) = (u - lambda * du, h - lambda * dh);
            if nh > 0.0 {
                if let Ok(nv) = pair.eval(nu, nh) {
                    let nres = (nv.f - t).abs() + (nv.g - x).abs();
                    if nres < res {
                        (u, h, v, res) = (nu, nh, nv, nres);
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res < tol {
        Ok((u, h))
    } else {
        Err(Error::Divergence { u, h, residual: res })
    }
}

/// Result of a continuation sweep over a `(t, x)` grid.
#[derive(Clone, Debug)]
pub struct InvertedField {
    pair: HodographPair,
    rect: Rect,
    nt: usize,
    nx: usize,
    nodes: Vec<Option<(f64, f64)>>,
    tol: f64,
}

/// Newton tolerance used by [`field_from_pair`].
pub const FIELD_NEWTON_TOL: f64 = 1e-13;

fn grid_coord(a: f64, b: f64, n: usize, k: usize) -> f64 {
    if n <= 1 {
        0.5 * (a + b)
    } else {
        a + (b - a) * k as f64 / (n - 1) as f64
    }
}

/// Invert `pair` on an `nt × nx` lattice of `rect`, row by row, seeding
/// each solve from an already converged neighbour.
pub fn field_from_pair(
    pair: &HodographPair,
    rect: Rect,
    nt: usize,
    nx: usize,
    guess: (f64, f64),
) -> Result<InvertedField> {
    if nt == 0 || nx == 0 {
        return Err(Error::Config("grid resolution must be positive".into()));
    }
    let mut nodes: Vec<Option<(f64, f64)>> = vec![None; nt * nx];
    for i in 0..nt {
        let t = grid_coord(rect.t0, rect.t1, nt, i);
        for j in 0..nx {
            let x = grid_coord(rect.x0, rect.x1, nx, j);
            let mut seeds = Vec::with_capacity(3);
            if j > 0 {
                seeds.extend(nodes[i * nx + j - 1]);
            }
            if i > 0 {
                seeds.extend(nodes[(i - 1) * nx + j]);
            }
            seeds.push(guess);
            nodes[i * nx + j] = seeds
                .into_iter()
                .find_map(|s| invert_point(pair, t, x, s, FIELD_NEWTON_TOL).ok());
        }
    }
    if nodes.iter().all(Option::is_none) {
        return Err(Error::EmptyRegion);
    }
    Ok(InvertedField {
        pair: pair.clone(),
        rect,
        nt,
        nx,
        nodes,
        tol: FIELD_NEWTON_TOL,
    })
}

impl InvertedField {
    pub fn converged_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_some()).count()
    }

    pub fn converged_fraction(&self) -> f64 {
        self.converged_count() as f64 / self.nodes.len() as f64
    }

    /// Bounding rectangle of the converged nodes.
    pub fn converged_rect(&self) -> Rect {
        let (mut t0, mut t1, mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..self.nt {
            for j in 0..self.nx {
                if self.nodes[i * self.nx + j].is_some() {
                    let t = grid_coord(self.rect.t0, self.rect.t1, self.nt, i);
                    let x = grid_coord(self.rect.x0, self.rect.x1, self.nx, j);
                    t0 = t0.min(t);
                    t1 = t1.max(t);
                    x0 = x0.min(x);
                    x1 = x1.max(x);
                }
            }
        }
        Rect { t0, t1, x0, x1 }
    }

    /// Converged node nearest to `(t, x)` in grid units.
    fn nearest_seed(&self, t: f64, x: f64) -> Option<(f64, f64)> {
        let fi = |a: f64, b: f64, n: usize, v: f64| {
            if n <= 1 || b == a {
                0.0
            } else {
                (v - a) / (b - a) * (n - 1) as f64
            }
        };
        let (ti, xi) = (
            fi(self.rect.t0, self.rect.t1, self.nt, t),
            fi(self.rect.x0, self.rect.x1, self.nx, x),
        );
        let mut best: Option<(f64, (f64, f64))> = None;
        for i in 0..self.nt {
            for j in 0..self.nx {
                if let Some(s) = self.nodes[i * self.nx + j] {
                    let d = (i as f64 - ti).powi(2) + (j as f64 - xi).powi(2);
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, s));
                    }
                }
            }
        }
        best.map(|(_, s)| s)
    }

    /// `(u, h)` at `(t, x)` by Newton refinement from the nearest node.
    pub fn eval(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        let seed = self.nearest_seed(t, x).ok_or(Error::EmptyRegion)?;
        invert_point(&self.pair, t, x, seed, self.tol)
    }

    /// The inverted solution on the converged region.
    pub fn field(&self) -> SolutionField {
        let this = self.clone();
        SolutionField::numeric(
            self.converged_rect(),
            format!("hodograph:{}", self.pair.label()),
            move |t, x| this.eval(t, x),
        )
    }
}

/// Largest residuals of a field over sampled interior points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldCheck {
    pub max_r1: f64,
    pub max_r2: f64,
    pub worst: (f64, f64),
    pub samples: usize,
    /// Points where the field or its jet could not be evaluated.
    pub failures: usize,
    pub analytic: bool,
}

impl FieldCheck {
    pub fn max(&self) -> f64 {
        if self.failures > 0 {
            f64::INFINITY
        } else {
            self.max_r1.max(self.max_r2)
        }
    }
}

/// Relative margin kept between sample points and the domain edge, so the
/// finite-difference stencil stays inside.
pub const INTERIOR_MARGIN: f64 = 0.05;

/// Residuals of `field` at `samples` seeded interior points, using exact
/// derivatives when available and finite differences otherwise.
pub fn verify_field(
    field: &SolutionField,
    params: &FluidParams,
    samples: usize,
    seed: u64,
) -> FieldCheck {
    let d = field.domain();
    let (mt, mx) = (INTERIOR_MARGIN * (d.t1 - d.t0), INTERIOR_MARGIN * (d.x1 - d.x0));
    let (t0, t1, x0, x1) = (d.t0 + mt, d.t1 - mt, d.x0 + mx, d.x1 - mx);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = FieldCheck {
        max_r1: 0.0,
        max_r2: 0.0,
        worst: (f64::NAN, f64::NAN),
        samples,
        failures: 0,
        analytic: field.is_analytic(),
    };
    let mut worst = -1.0;
    for _ in 0..samples {
        let t = if t1 > t0 { rng.gen_range(t0..t1) } else { t0 };
        let x = if x1 > x0 { rng.gen_range(x0..x1) } else { x0 };
        match field.jet(t, x).and_then(|j| mswe_residual(&j, params)) {
            Ok((r1, r2)) => {
                out.max_r1 = out.max_r1.max(r1.abs());
                out.max_r2 = out.max_r2.max(r2.abs());
                let m = r1.abs().max(r2.abs());
                if m > worst {
                    worst = m;
                    out.worst = (t, x);
                }
            }
            Err(_) => {
                out.failures += 1;
                out.worst = (t, x);
                worst = f64::INFINITY;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linearized_residual;

    fn rational() -> HodographPair {
        HodographPair::analytic("(1/h, u/h)", UhBox::default(), |u, h| {
            let r = h.recip();
            (r.clone(), u * &r)
        })
    }

    fn momentum_pair(params: FluidParams) -> HodographPair {
        let g = params.gravity;
        let hm = params.momentum;
        HodographPair::analytic("(u, ...)", UhBox::default(), move |u, h| {
            let gg = &(u * u).scale(0.5) - &(h + &h.ln().scale(hm)).scale(g);
            (u.clone(), gg)
        })
    }

    #[test]
    fn linearized_examples() {
        let p = FluidParams::default();
        let one = HodographPair::analytic("(1,0)", UhBox::default(), |u, _| {
            (Taylor::constant(1.0, u.order()), Taylor::constant(0.0, u.order()))
        });
        assert_eq!(linearized_residual(&one, 0.3, 1.2, &p).unwrap(), (0.0, 0.0));
        let (a, b) = linearized_residual(&rational(), 3.0, 2.0, &p).unwrap();
        assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
        assert!(linearized_residual(&rational(), 3.0, 0.0, &p).is_err());
    }

    #[test]
    fn reconstruction_examples() {
        let p = FluidParams::default();
        let pr = pair_from_f("1/h", |_, h| h.recip(), (0.0, 1.0), 0.0, UhBox::default(), &p).unwrap();
        let pm = pair_from_f("u", |u, _| u.clone(), (0.0, 1.0), -1.0, UhBox::default(), &p).unwrap();
        let pc = pair_from_f("1", |u, _| Taylor::constant(1.0, u.order()), (0.0, 1.0), 2.5, UhBox::default(), &p).unwrap();
        for (u, h) in UhBox::default().lattice(5) {
            assert!((pr.eval(u, h).unwrap().g - u / h).abs() < 1e-12);
            let expect = 0.5 * u * u - h - h.ln();
            assert!((pm.eval(u, h).unwrap().g - expect).abs() < 1e-12);
            assert_eq!(pc.eval(u, h).unwrap().g, 2.5);
            let (a, b) = linearized_residual(&pm, u, h, &p).unwrap();
            assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
            let alt = pr.g_along(u, h, PathOrder::HFirst).unwrap();
            assert!((alt - u / h).abs() < 1e-12);
        }
    }

    #[test]
    fn incompatible_f_is_rejected() {
        let p = FluidParams::default();
        let err = pair_from_f("h", |_, h| h.clone(), (0.0, 1.0), 0.0, UhBox::default(), &p).unwrap_err();
        assert!(matches!(err, Error::Incompatible { residual, .. } if (residual - 2.0).abs() < 1e-12));
        assert!(pair_from_f("u", |u, _| u.clone(), (5.0, 1.0), 0.0, UhBox::default(), &p).is_err());
    }

    #[test]
    fn inversion_examples() {
        let p = FluidParams::default();
        let (u, h) = invert_point(&rational(), 2.0, 4.0, (1.0, 1.0), 1e-14).unwrap();
        assert!((u - 2.0).abs() < 1e-12 && (h - 0.5).abs() < 1e-12);
        let (u, h) = invert_point(&momentum_pair(p), 2.0, 1.0, (1.5, 1.5), 1e-14).unwrap();
        assert!((u - 2.0).abs() < 1e-12 && (h - 1.0).abs() < 1e-12);
        let one = HodographPair::analytic("(1,0)", UhBox::default(), |u, _| {
            (Taylor::constant(1.0, u.order()), Taylor::constant(0.0, u.order()))
        });
        assert!(matches!(
            invert_point(&one, 2.0, 0.0, (0.0, 1.0), 1e-12),
            Err(Error::DegenerateMap { .. })
        ));
    }

    #[test]
    fn field_from_rational_pair_is_galilean() {
        let p = FluidParams::default();
        let rect = Rect::new(1.0, 2.0, 0.0, 1.0).unwrap();
        let inv = field_from_pair(&rational(), rect, 11, 11, (0.5, 1.0)).unwrap();
        assert_eq!(inv.converged_fraction(), 1.0);
        let field = inv.field();
        for (t, x) in [(1.0, 0.0), (1.3, 0.7), (2.0, 1.0), (1.77, 0.25)] {
            let (u, h) = field.eval(t, x).unwrap();
            assert!((u - x / t).abs() < 1e-9 && (h - 1.0 / t).abs() < 1e-9);
        }
        let check = verify_field(&field, &p, 40, 3);
        assert!(check.max() < 1e-7, "{check:?}");
        let far = Rect::new(1.0, 2.0, 0.0, 1.0).unwrap();
        let neg = HodographPair::analytic("(-1/h, 0)", UhBox::default(), |u, h| {
            (h.recip().scale(-1.0), Taylor::constant(0.0, u.order()))
        });
        assert!(matches!(
            field_from_pair(&neg, far, 3, 3, (0.0, 1.0)),
            Err(Error::EmptyRegion) | Err(Error::DegenerateMap { .. })
        ));
    }

    #[test]
    fn boost_and_derivative_pairs_stay_in_the_solution_space() {
        let p = FluidParams::with_momentum(0.8);
        let pm = momentum_pair(p);
        for q in [pm.boosted(0.4), pm.boost_derivative(), rational().boosted(-1.1), rational().boost_derivative()] {
            for (u, h) in UhBox::default().lattice(4) {
                let (a, b) = linearized_residual(&q, u, h, &p).unwrap();
                assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
            }
        }
        let d = pm.boost_derivative().eval(0.3, 1.1).unwrap();
        assert!((d.f - 1.0).abs() < 1e-15 && d.g.abs() < 1e-15);
    }
}

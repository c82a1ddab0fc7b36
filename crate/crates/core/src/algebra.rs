//! The invariance algebra `⟨𝒟, 𝒢, ℒ(f, g)⟩`: adjoint actions, the
//! commutator table, and normal forms of one-dimensional subalgebras, both
//! of the full algebra and of the finite part `𝔤¹ = ⟨𝒟, 𝒢, ∂_x, ∂_t⟩`.
//!
//! Adjoint actions follow `Ad(e^{εv})w = Σ (−ε)ⁿ/n! (ad v)ⁿ w` with
//! `ad v · w = [v, w]`; this is the convention under which the closed forms
//! below hold.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hodograph::{HodographPair, UhBox};
use crate::model::{linearized_residual, FluidParams};
use crate::solutions::catalog_pairs;
use crate::taylor::Taylor;
use crate::vfield::{lie_bracket, Point, VectorFieldSpec};

/// `a𝒟 + b𝒢 + ℒ(f, g)`.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    pub a: f64,
    pub b: f64,
    pub pair: Option<HodographPair>,
}

/// Basis directions of the adjoint action.
#[derive(Clone, Debug)]
pub enum Generator {
    Dilation,
    Boost,
    Pair(HodographPair),
}

/// `ℒ(k_t, k_x)`, i.e. `k_t ∂_t + k_x ∂_x`.
pub fn translation_pair(k_t: f64, k_x: f64) -> HodographPair {
    HodographPair::analytic(format!("({k_t},{k_x})"), UhBox::default(), move |u, _| {
        (Taylor::constant(k_t, u.order()), Taylor::constant(k_x, u.order()))
    })
}

impl AlgebraElement {
    pub fn new(a: f64, b: f64, pair: Option<HodographPair>) -> Self {
        Self { a, b, pair }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            a: lambda * self.a,
            b: lambda * self.b,
            pair: self.pair.as_ref().map(|p| p.scaled(lambda)),
        }
    }

    pub fn to_field(&self) -> VectorFieldSpec {
        let mut terms = vec![
            (self.a, VectorFieldSpec::dilation()),
            (self.b, VectorFieldSpec::galilean_boost()),
        ];
        if let Some(p) = &self.pair {
            terms.push((1.0, VectorFieldSpec::from_pair(p)));
        }
        VectorFieldSpec::linear("element", terms)
    }
}

impl Generator {
    pub fn to_field(&self) -> VectorFieldSpec {
        match self {
            Generator::Dilation => VectorFieldSpec::dilation(),
            Generator::Boost => VectorFieldSpec::galilean_boost(),
            Generator::Pair(p) => VectorFieldSpec::from_pair(p),
        }
    }
}

fn add_pairs(terms: Vec<(f64, HodographPair)>) -> Option<HodographPair> {
    let terms: Vec<_> = terms.into_iter().filter(|(c, _)| *c != 0.0).collect();
    if terms.is_empty() {
        None
    } else {
        HodographPair::linear("sum", terms).ok()
    }
}

/// `Ad(e^{ε gen}) target` in closed form.
pub fn adjoint(gen: &Generator, eps: f64, target: &AlgebraElement) -> AlgebraElement {
    let AlgebraElement { a, b, pair } = target;
    match gen {
        Generator::Dilation => AlgebraElement::new(*a, *b, pair.as_ref().map(|p| p.scaled(eps.exp()))),
        Generator::Boost => AlgebraElement::new(*a, *b, pair.as_ref().map(|p| p.boosted(eps))),
        Generator::Pair(q) => {
            let mut terms: Vec<(f64, HodographPair)> = Vec::new();
            if let Some(p) = pair {
                terms.push((1.0, p.clone()));
            }
            terms.push((-eps * a, q.clone()));
            terms.push((eps * b, q.boost_derivative()));
            AlgebraElement::new(*a, *b, add_pairs(terms))
        }
    }
}

/// Partial sum `Σ_{n ≤ order} (−ε)ⁿ/n! (ad v)ⁿ w` at `point`.
pub fn lie_series(
    v: &VectorFieldSpec,
    w: &VectorFieldSpec,
    eps: f64,
    order: usize,
    point: Point,
) -> Result<[f64; 4]> {
    let mut term = w.clone();
    let mut sum = term.eval(point)?;
    let mut coef = 1.0;
    for n in 1..=order {
        term = VectorFieldSpec::bracket(v, &term);
        coef *= -eps / n as f64;
        let c = term.eval(point)?;
        for i in 0..4 {
            sum[i] += coef * c[i];
        }
    }
    Ok(sum)
}

/// Largest deviation of each commutation relation over the sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommutatorReport {
    /// `[𝒟, 𝒢] = 0`.
    pub dilation_boost: f64,
    /// `[ℒ, 𝒟] = ℒ`.
    pub pair_dilation: f64,
    /// `[𝒢, ℒ(f, g)] = ℒ(f_u, g_u − f)`.
    pub boost_pair: f64,
    /// `[ℒ₁, ℒ₂] = 0`.
    pub pair_pair: f64,
    /// Largest linearized-system residual of the pairs used: pairs outside
    /// the solution space are not elements of the algebra.
    pub membership: f64,
    pub points: usize,
}

impl CommutatorReport {
    pub fn max_relation(&self) -> f64 {
        self.dilation_boost
            .max(self.pair_dilation)
            .max(self.boost_pair)
            .max(self.pair_pair)
    }
}

fn max_diff(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Check the commutator table at `samples` seeded points with the catalog
/// pairs of `params`.
pub fn commutator_table_check(params: &FluidParams, samples: usize, seed: u64) -> Result<CommutatorReport> {
    commutator_table_check_with(&catalog_pairs(params)?, params, samples, seed)
}

/// Check the commutator table with caller-supplied pairs.
pub fn commutator_table_check_with(
    pairs: &[HodographPair],
    params: &FluidParams,
    samples: usize,
    seed: u64,
) -> Result<CommutatorReport> {
    let d = VectorFieldSpec::dilation();
    let g = VectorFieldSpec::galilean_boost();
    let ls: Vec<_> = pairs.iter().map(VectorFieldSpec::from_pair).collect();
    let ds: Vec<_> = pairs
        .iter()
        .map(|p| VectorFieldSpec::from_pair(&p.boost_derivative()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = CommutatorReport {
        dilation_boost: 0.0,
        pair_dilation: 0.0,
        boost_pair: 0.0,
        pair_pair: 0.0,
        membership: 0.0,
        points: samples,
    };
    for _ in 0..samples {
        let point = [
            rng.gen_range(0.5..2.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..2.0),
        ];
        rep.dilation_boost = rep.dilation_boost.max(max_diff(lie_bracket(&d, &g, point)?, [0.0; 4]));
        for (i, l) in ls.iter().enumerate() {
            rep.pair_dilation = rep
                .pair_dilation
                .max(max_diff(lie_bracket(l, &d, point)?, l.eval(point)?));
            rep.boost_pair = rep
                .boost_pair
                .max(max_diff(lie_bracket(&g, l, point)?, ds[i].eval(point)?));
            for m in &ls[i + 1..] {
                rep.pair_pair = rep.pair_pair.max(max_diff(lie_bracket(l, m, point)?, [0.0; 4]));
            }
            let (r1, r2) = linearized_residual(&pairs[i], point[2], point[3], params)?;
            rep.membership = rep.membership.max(r1.abs()).max(r2.abs());
        }
    }
    Ok(rep)
}

/// Number of lattice points per axis used to fingerprint normalized pairs.
const FINGERPRINT_N: usize = 5;
/// Depth at which the boost marker of a pair is located.
pub const MARKER_DEPTH: f64 = 1.0;
const MARKER_RANGE: f64 = 5.0;

/// A pair reduced modulo scaling and boosts, with a fingerprint for
/// comparison.
#[derive(Clone)]
pub struct NormalizedPair {
    pub pair: HodographPair,
    /// Boost applied to reach the normal form.
    pub shift: f64,
    /// Multiplier applied after the boost.
    pub scale: f64,
    /// Normalized `(f, g)` values on the reference lattice.
    pub fingerprint: Vec<f64>,
}

impl fmt::Debug for NormalizedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormalizedPair")
            .field("shift", &self.shift)
            .field("scale", &self.scale)
            .finish()
    }
}

/// Normal form of a one-dimensional subalgebra.
#[derive(Clone, Debug)]
pub enum CanonicalClass {
    /// `⟨𝒟 + a𝒢⟩`.
    DPlusAG(f64),
    /// `⟨𝒢⟩`.
    GOnly,
    /// `⟨ℒ(f, g)⟩`.
    LClass(NormalizedPair),
    /// `⟨𝒢 + δ∂_t⟩`.
    GPlusDeltaDt(u8),
    /// `⟨∂_t + δ∂_x⟩`.
    DtPlusDeltaDx(u8),
    /// `⟨∂_x⟩`.
    DxOnly,
}

/// Tolerance for comparing canonical classes.
pub const CLASS_TOL: f64 = 1e-8;

impl CanonicalClass {
    pub fn tag(&self) -> &'static str {
        match self {
            CanonicalClass::DPlusAG(_) => "D_plus_aG",
            CanonicalClass::GOnly => "G_only",
            CanonicalClass::LClass(_) => "L_class",
            CanonicalClass::GPlusDeltaDt(_) => "G_plus_delta_dt",
            CanonicalClass::DtPlusDeltaDx(_) => "dt_plus_delta_dx",
            CanonicalClass::DxOnly => "dx_only",
        }
    }

    /// Same class up to [`CLASS_TOL`] in the continuous labels.
    pub fn approx_eq(&self, other: &CanonicalClass) -> bool {
        use CanonicalClass::*;
        match (self, other) {
            (DPlusAG(a), DPlusAG(b)) => (a - b).abs() <= CLASS_TOL * (1.0 + a.abs()),
            (GOnly, GOnly) | (DxOnly, DxOnly) => true,
            (GPlusDeltaDt(a), GPlusDeltaDt(b)) | (DtPlusDeltaDx(a), DtPlusDeltaDx(b)) => a == b,
            (LClass(a), LClass(b)) => {
                a.fingerprint.len() == b.fingerprint.len()
                    && a
                        .fingerprint
                        .iter()
                        .zip(&b.fingerprint)
                        .all(|(x, y)| (x - y).abs() <= CLASS_TOL)
            }
            _ => false,
        }
    }

    /// The canonical representative as an element of the full algebra.
    pub fn representative(&self) -> AlgebraElement {
        use CanonicalClass::*;
        match self {
            DPlusAG(a) => AlgebraElement::new(1.0, *a, None),
            GOnly => AlgebraElement::new(0.0, 1.0, None),
            LClass(n) => AlgebraElement::new(0.0, 0.0, Some(n.pair.clone())),
            GPlusDeltaDt(d) => AlgebraElement::new(0.0, 1.0, Some(translation_pair(f64::from(*d), 0.0))),
            DtPlusDeltaDx(d) => AlgebraElement::new(0.0, 0.0, Some(translation_pair(1.0, f64::from(*d)))),
            DxOnly => AlgebraElement::new(0.0, 0.0, Some(translation_pair(0.0, 1.0))),
        }
    }

    /// The canonical representative in `𝔤¹`, where one exists.
    pub fn representative_g1(&self) -> Option<G1Element> {
        use CanonicalClass::*;
        Some(match self {
            DPlusAG(a) => G1Element::new(1.0, *a, 0.0, 0.0),
            GOnly => G1Element::new(0.0, 1.0, 0.0, 0.0),
            GPlusDeltaDt(d) => G1Element::new(0.0, 1.0, 0.0, f64::from(*d)),
            DtPlusDeltaDx(d) => G1Element::new(0.0, 0.0, f64::from(*d), 1.0),
            DxOnly => G1Element::new(0.0, 0.0, 1.0, 0.0),
            LClass(_) => return None,
        })
    }
}

fn newton_root(phi: impl Fn(f64) -> (f64, f64), x0: f64) -> Option<f64> {
    let mut x = x0;
    for _ in 0..60 {
        let (v, dv) = phi(x);
        if !(v.is_finite() && dv.is_finite()) || dv == 0.0 {
            return None;
        }
        let step = v / dv;
        x -= step.clamp(-1.0, 1.0);
        if step.abs() < 1e-14 * (1.0 + x.abs()) {
            return (x.abs() <= MARKER_RANGE).then_some(x);
        }
    }
    None
}

/// Boost that moves the marker of `pair` to `u = 0`: the root nearest the
/// origin (found by Newton from `u = 0`) of the lowest `u`-derivative of
/// `f(·, MARKER_DEPTH)` that is not identically zero, or, if `f` does not
/// depend on `u`, of `g(−s) + s f` in `s`. Returns 0 when no marker exists.
fn boost_marker(pair: &HodographPair) -> Result<f64> {
    let h = MARKER_DEPTH;
    let series = |u: f64, order: usize| -> Option<Taylor> {
        pair.taylor(u, h, order).ok().map(|(f, _)| f)
    };
    let probes = [-0.9, -0.4, 0.1, 0.6];
    for k in 0..3u8 {
        let scale = probes
            .iter()
            .filter_map(|&u| series(u, k as usize).map(|f| f.derivative([0, 0, k, 0]).abs()))
            .fold(0.0, f64::max);
        let f0 = probes
            .iter()
            .filter_map(|&u| series(u, 0).map(|f| f.value().abs()))
            .fold(0.0, f64::max);
        if scale <= 1e-12 * (1.0 + f0) {
            continue;
        }
        let phi = |u: f64| match series(u, k as usize + 1) {
            Some(f) => (f.derivative([0, 0, k, 0]), f.derivative([0, 0, k + 1, 0])),
            None => (f64::NAN, f64::NAN),
        };
        if let Some(r) = newton_root(phi, 0.0) {
            return Ok(-r);
        }
        if k == 0 {
            // f depends on u but has no nearby root: try its derivatives.
            continue;
        }
    }
    // f independent of u near the marker depth: use g(−s) + s f = 0.
    let v = pair.eval(0.0, h)?;
    let f = v.f;
    if f.abs() > 1e-12 {
        let phi = |s: f64| match pair.eval(-s, h) {
            Ok(w) => (w.g + s * f, -w.g_u + f),
            Err(_) => (f64::NAN, f64::NAN),
        };
        if let Some(s) = newton_root(phi, 0.0) {
            return Ok(s);
        }
    }
    Ok(0.0)
}

fn normalize_pair(pair: &HodographPair) -> Result<NormalizedPair> {
    let shift = boost_marker(pair)?;
    let shifted = if shift == 0.0 { pair.clone() } else { pair.boosted(shift) };
    let mut raw = Vec::with_capacity(2 * FINGERPRINT_N * FINGERPRINT_N);
    for (u, h) in UhBox::default().lattice(FINGERPRINT_N) {
        let v = shifted.eval(u, h)?;
        raw.push(v.f);
        raw.push(v.g);
    }
    let m = raw.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(m > 0.0) {
        return Err(Error::Precondition("zero algebra element".into()));
    }
    let lead = raw.iter().find(|v| v.abs() >= 0.5 * m).copied().unwrap_or(m);
    let scale = lead.signum() / m;
    Ok(NormalizedPair {
        pair: shifted.scaled(scale).with_label(format!("normalized {}", pair.label())),
        shift,
        scale,
        fingerprint: raw.iter().map(|v| v * scale).collect(),
    })
}

/// Normal form of `⟨v⟩` under the adjoint action of the full algebra.
pub fn normalize_g(v: &AlgebraElement) -> Result<CanonicalClass> {
    if v.a != 0.0 {
        return Ok(CanonicalClass::DPlusAG(v.b / v.a));
    }
    if v.b != 0.0 {
        return Ok(CanonicalClass::GOnly);
    }
    match &v.pair {
        Some(p) => Ok(CanonicalClass::LClass(normalize_pair(p)?)),
        None => Err(Error::Precondition("zero algebra element".into())),
    }
}

/// `a1𝒟 + a2𝒢 + a3∂_x + a4∂_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G1Element {
    pub a: [f64; 4],
}

/// One-parameter adjoint flows and discrete symmetries acting on `𝔤¹`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum G1Flow {
    Dilation,
    TimeTranslation,
    SpaceTranslation,
    Boost,
}

impl G1Element {
    pub fn new(a1: f64, a2: f64, a3: f64, a4: f64) -> Self {
        Self { a: [a1, a2, a3, a4] }
    }

    pub fn to_algebra(&self) -> AlgebraElement {
        let [a1, a2, a3, a4] = self.a;
        let pair = (a3 != 0.0 || a4 != 0.0).then(|| translation_pair(a4, a3));
        AlgebraElement::new(a1, a2, pair)
    }

    pub fn to_field(&self) -> VectorFieldSpec {
        let [a1, a2, a3, a4] = self.a;
        VectorFieldSpec::linear(
            "g1",
            vec![
                (a1, VectorFieldSpec::dilation()),
                (a2, VectorFieldSpec::galilean_boost()),
                (a3, VectorFieldSpec::space_translation()),
                (a4, VectorFieldSpec::time_translation()),
            ],
        )
    }

    /// `Ad(e^{ε w})` for a basis direction `w`.
    pub fn flow(&self, which: G1Flow, eps: f64) -> Self {
        let [a1, a2, a3, a4] = self.a;
        match which {
            G1Flow::Dilation => Self::new(a1, a2, eps.exp() * a3, eps.exp() * a4),
            G1Flow::TimeTranslation => Self::new(a1, a2, a3 - eps * a2, a4 - eps * a1),
            G1Flow::SpaceTranslation => Self::new(a1, a2, a3 - eps * a1, a4),
            G1Flow::Boost => Self::new(a1, a2, a3 + eps * a4, a4),
        }
    }

    /// Image under the reflection `(t, x) ↦ (−t, −x)`.
    pub fn s1(&self) -> Self {
        let [a1, a2, a3, a4] = self.a;
        Self::new(a1, a2, -a3, -a4)
    }

    /// Image under the reflection `(x, u) ↦ (−x, −u)`.
    pub fn s2(&self) -> Self {
        let [a1, a2, a3, a4] = self.a;
        Self::new(a1, -a2, -a3, a4)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            a: self.a.map(|v| lambda * v),
        }
    }

    fn norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn is_zero_component(&self, i: usize) -> bool {
        self.a[i].abs() <= 1e-12 * self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn g1_nonzero(v: &G1Element) -> Result<()> {
    if v.a.iter().all(|x| *x == 0.0) || !v.a.iter().all(|x| x.is_finite()) {
        return Err(Error::Precondition("zero or non-finite G1 element".into()));
    }
    Ok(())
}

/// Normal form in `𝔤¹`, consistent with the adjoint orbits: `δ` in
/// `⟨𝒢 + δ∂_t⟩` is an orbit invariant (up to the reflection `S1`), while
/// `⟨∂_t + δ∂_x⟩` always normalizes to `δ = 0` since the boost removes the
/// `∂_x` part.
pub fn normalize_g1(v: &G1Element) -> Result<CanonicalClass> {
    g1_nonzero(v)?;
    let z = |i| v.is_zero_component(i);
    Ok(if !z(0) {
        CanonicalClass::DPlusAG(v.a[1] / v.a[0])
    } else if !z(1) {
        CanonicalClass::GPlusDeltaDt(u8::from(!z(3)))
    } else if !z(3) {
        CanonicalClass::DtPlusDeltaDx(0)
    } else {
        CanonicalClass::DxOnly
    })
}

/// Normal form following the stated representative list literally, with
/// `⟨∂_t + δ∂_x⟩`, `δ = 1` whenever the `∂_x` part is nonzero.
pub fn normalize_g1_printed(v: &G1Element) -> Result<CanonicalClass> {
    g1_nonzero(v)?;
    let z = |i| v.is_zero_component(i);
    Ok(if !z(0) {
        CanonicalClass::DPlusAG(v.a[1] / v.a[0])
    } else if !z(1) {
        CanonicalClass::GPlusDeltaDt(u8::from(!z(3)))
    } else if !z(3) {
        CanonicalClass::DtPlusDeltaDx(u8::from(!z(2)))
    } else {
        CanonicalClass::DxOnly
    })
}

/// Bound on each flow parameter in the orbit search.
pub const ORBIT_EPS_BOUND: f64 = 8.0;
/// Angular distance below which two spans are identified.
pub const ORBIT_TOL: f64 = 1e-8;

/// Parameters of the word `D(ε₁) ∘ ∂_t(ε₂) ∘ ∂_x(ε₃) ∘ G(ε₄)` (applied
/// right to left), optionally followed by `S1` and/or `S2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitWitness {
    pub eps: [f64; 4],
    pub s1: bool,
    pub s2: bool,
}

impl OrbitWitness {
    pub fn apply(&self, v: &G1Element) -> G1Element {
        let [e1, e2, e3, e4] = self.eps;
        let mut r = v
            .flow(G1Flow::Boost, e4)
            .flow(G1Flow::SpaceTranslation, e3)
            .flow(G1Flow::TimeTranslation, e2)
            .flow(G1Flow::Dilation, e1);
        if self.s1 {
            r = r.s1();
        }
        if self.s2 {
            r = r.s2();
        }
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitSearch {
    pub equivalent: bool,
    /// Smallest angular distance between the spans found.
    pub distance: f64,
    pub witness: OrbitWitness,
}

/// Sine of the angle between the lines spanned by `r` and `w`.
fn span_distance(r: &G1Element, w: &G1Element) -> [f64; 4] {
    let (nr, nw) = (r.norm(), w.norm());
    if !(nr > 0.0) || !nr.is_finite() {
        return [1.0; 4];
    }
    let rh = r.a.map(|v| v / nr);
    let wh = w.a.map(|v| v / nw);
    let c: f64 = rh.iter().zip(&wh).map(|(a, b)| a * b).sum();
    std::array::from_fn(|i| rh[i] - c * wh[i])
}

fn sq(r: &[f64; 4]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn solve4(mut m: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

/// Levenberg–Marquardt over the flow parameters, clamped to the bound.
fn refine(v: &G1Element, w: &G1Element, mut wit: OrbitWitness) -> OrbitWitness {
    let res = |wit: &OrbitWitness| span_distance(&wit.apply(v), w);
    let mut r = res(&wit);
    let mut cost = sq(&r);
    let mut mu = 1e-3;
    for _ in 0..200 {
        if cost.sqrt() < 1e-14 {
            break;
        }
        let mut jac = [[0.0; 4]; 4];
        for k in 0..4 {
            let step = 1e-7 * (1.0 + wit.eps[k].abs());
            let (mut p, mut m) = (wit, wit);
            p.eps[k] += step;
            m.eps[k] -= step;
            let (rp, rm) = (res(&p), res(&m));
            for i in 0..4 {
                jac[i][k] = (rp[i] - rm[i]) / (2.0 * step);
            }
        }
        let mut jtj = [[0.0; 4]; 4];
        let mut jtr = [0.0; 4];
        for a in 0..4 {
            for b in 0..4 {
                jtj[a][b] = (0..4).map(|i| jac[i][a] * jac[i][b]).sum();
            }
            jtr[a] = -(0..4).map(|i| jac[i][a] * r[i]).sum::<f64>();
        }
        let mut improved = false;
        for _ in 0..12 {
            let mut damped = jtj;
            for (a, row) in damped.iter_mut().enumerate() {
                row[a] += mu * (1.0 + jtj[a][a]);
            }
            if let Some(delta) = solve4(damped, jtr) {
                let mut trial = wit;
                for k in 0..4 {
                    trial.eps[k] = (trial.eps[k] + delta[k]).clamp(-ORBIT_EPS_BOUND, ORBIT_EPS_BOUND);
                }
                let tr = res(&trial);
                let tc = sq(&tr);
                if tc < cost {
                    (wit, r, cost) = (trial, tr, tc);
                    mu = (mu * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    wit
}

/// Search the adjoint orbit of `span(v)` (continuous flows with
/// `|ε| ≤ 8`, the two reflections, and rescaling) for `span(w)`.
pub fn orbit_equivalent_g1(v: &G1Element, w: &G1Element, trials: usize, seed: u64) -> Result<OrbitSearch> {
    g1_nonzero(v)?;
    g1_nonzero(w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = OrbitSearch {
        equivalent: false,
        distance: f64::INFINITY,
        witness: OrbitWitness {
            eps: [0.0; 4],
            s1: false,
            s2: false,
        },
    };
    for (s1, s2) in [(false, false), (true, false), (false, true), (true, true)] {
        for trial in 0..trials.max(1) {
            let eps = if trial == 0 {
                [0.0; 4]
            } else {
                std::array::from_fn(|_| rng.gen_range(-2.0..2.0))
            };
            let wit = refine(v, w, OrbitWitness { eps, s1, s2 });
            let d = sq(&span_distance(&wit.apply(v), w)).sqrt();
            if d < best.distance {
                best = OrbitSearch {
                    equivalent: d < ORBIT_TOL,
                    distance: d,
                    witness: wit,
                };
            }
            if best.equivalent {
                return Ok(best);
            }
        }
    }
    Ok(best)
}

/// Outcome of the audit of the `δ` labels in the stated representative list.
#[derive(Clone, Debug)]
pub struct DeltaAudit {
    /// `⟨𝒢 + ∂_t⟩` against `⟨𝒢⟩`.
    pub boost_class: OrbitSearch,
    /// `⟨∂_t + ∂_x⟩` against `⟨∂_t⟩`.
    pub translation_class: OrbitSearch,
    pub verdict: String,
}

pub fn delta_redundancy_audit(trials: usize, seed: u64) -> Result<DeltaAudit> {
    let boost_class = orbit_equivalent_g1(
        &G1Element::new(0.0, 1.0, 0.0, 1.0),
        &G1Element::new(0.0, 1.0, 0.0, 0.0),
        trials,
        seed,
    )?;
    let translation_class = orbit_equivalent_g1(
        &G1Element::new(0.0, 0.0, 1.0, 1.0),
        &G1Element::new(0.0, 0.0, 0.0, 1.0),
        trials,
        seed,
    )?;
    let verdict = match (boost_class.equivalent, translation_class.equivalent) {
        (false, true) => format!(
            "delta removable in <dt + delta dx> (boost parameter {:.6}); delta essential in <G + delta dt>",
            translation_class.witness.eps[3]
        ),
        (false, false) => "delta essential in both classes".to_string(),
        (true, true) => "delta removable in both classes".to_string(),
        (true, false) => "delta removable in <G + delta dt> only".to_string(),
    };
    Ok(DeltaAudit {
        boost_class,
        translation_class,
        verdict,
    })
}

/// A random word of continuous `𝔤¹` flows.
pub fn random_word(rng: &mut impl Rng, len: usize) -> Vec<(G1Flow, f64)> {
    const FLOWS: [G1Flow; 4] = [
        G1Flow::Dilation,
        G1Flow::TimeTranslation,
        G1Flow::SpaceTranslation,
        G1Flow::Boost,
    ];
    (0..len)
        .map(|_| (FLOWS[rng.gen_range(0..4)], rng.gen_range(-2.0..2.0)))
        .collect()
}

pub fn apply_word(v: &G1Element, word: &[(G1Flow, f64)]) -> G1Element {
    word.iter().fold(*v, |acc, (f, e)| acc.flow(*f, *e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::simple_pair;

    fn pt() -> Point {
        [1.3, -0.4, 0.35, 1.1]
    }

    #[test]
    fn adjoint_examples() {
        let p = FluidParams::default();
        let pair = simple_pair([0.5, 1.0, -0.25, 0.3, 0.1], &p).unwrap();
        let l = AlgebraElement::new(0.0, 0.0, Some(pair.clone()));
        let r = adjoint(&Generator::Dilation, 2f64.ln(), &l);
        let (x, y) = (r.pair.unwrap().eval(0.2, 0.9).unwrap(), pair.eval(0.2, 0.9).unwrap());
        assert!((x.f - 2.0 * y.f).abs() < 1e-14 && (x.g - 2.0 * y.g).abs() < 1e-14);

        let dt = translation_pair(1.0, 0.0);
        let eps = 0.3;
        let r = adjoint(&Generator::Pair(dt.clone()), eps, &AlgebraElement::new(1.0, 0.0, None));
        let c = r.to_field().eval(pt()).unwrap();
        let d = VectorFieldSpec::dilation().eval(pt()).unwrap();
        assert!((c[0] - (d[0] - eps)).abs() < 1e-15 && c[1] == d[1]);

        let r = adjoint(&Generator::Boost, eps, &AlgebraElement::new(0.0, 0.0, Some(dt)));
        let v = r.pair.unwrap().eval(0.7, 1.4).unwrap();
        assert_eq!((v.f, v.g), (1.0, eps));
    }

    #[test]
    fn adjoint_matches_lie_series() {
        let p = FluidParams::with_momentum(1.4);
        let pair = simple_pair([0.5, 1.0, -0.25, 0.3, 0.1], &p).unwrap();
        let l = AlgebraElement::new(0.0, 0.0, Some(pair.clone()));
        let d = AlgebraElement::new(1.0, 0.0, None);
        let g = AlgebraElement::new(0.0, 1.0, None);
        let cases = [
            (Generator::Dilation, l.clone()),
            (Generator::Boost, l.clone()),
            (Generator::Pair(pair.clone()), d),
            (Generator::Pair(pair.clone()), g),
        ];
        for eps in [-0.1, 0.05, 0.1] {
            for (gen, target) in &cases {
                let closed = adjoint(gen, eps, target).to_field().eval(pt()).unwrap();
                let series = lie_series(&gen.to_field(), &target.to_field(), eps, 3, pt()).unwrap();
                assert!(max_diff(closed, series) <= 10.0 * eps.powi(4), "{gen:?} {eps}");
            }
        }
    }

    #[test]
    fn commutators() {
        let p = FluidParams::default();
        let rep = commutator_table_check(&p, 10, 1).unwrap();
        assert!(rep.max_relation() < 1e-9 && rep.membership < 1e-9, "{rep:?}");
        assert_eq!(rep.dilation_boost, 0.0);
        let bad = HodographPair::analytic("(h,0)", UhBox::default(), |u, h| {
            (h.clone(), Taylor::constant(0.0, u.order()))
        });
        let rep = commutator_table_check_with(&[bad], &p, 5, 1).unwrap();
        assert!(rep.membership > 0.1);
    }

    #[test]
    fn normalize_g_examples() {
        let p = FluidParams::default();
        let dt = translation_pair(1.0, 0.0);
        assert!(normalize_g(&AlgebraElement::new(2.0, 1.0, Some(dt.clone())))
            .unwrap()
            .approx_eq(&CanonicalClass::DPlusAG(0.5)));
        assert!(normalize_g(&AlgebraElement::new(0.0, 3.0, Some(dt))).unwrap().approx_eq(&CanonicalClass::GOnly));
        let pair = simple_pair([1.0, 0.5, 0.0, 0.0, 0.2], &p).unwrap();
        let a = normalize_g(&AlgebraElement::new(0.0, 0.0, Some(pair.clone()))).unwrap();
        let b = normalize_g(&AlgebraElement::new(0.0, 0.0, Some(pair.scaled(-3.7)))).unwrap();
        let c = normalize_g(&AlgebraElement::new(0.0, 0.0, Some(pair.boosted(0.8).scaled(0.2)))).unwrap();
        assert!(a.approx_eq(&b) && a.approx_eq(&c));
        let again = normalize_g(&a.representative()).unwrap();
        assert!(again.approx_eq(&a));
        let other = normalize_g(&AlgebraElement::new(0.0, 0.0, Some(simple_pair([0.0, 0.0, 1.0, 0.0, 0.0], &p).unwrap()))).unwrap();
        assert!(!a.approx_eq(&other));
        assert!(normalize_g(&AlgebraElement::new(0.0, 0.0, None)).is_err());
    }

    #[test]
    fn normalize_g1_examples() {
        assert!(normalize_g1(&G1Element::new(1.0, 0.5, 1.0, 1.0)).unwrap().approx_eq(&CanonicalClass::DPlusAG(0.5)));
        assert!(normalize_g1(&G1Element::new(0.0, 1.0, 7.0, 0.0)).unwrap().approx_eq(&CanonicalClass::GPlusDeltaDt(0)));
        assert!(normalize_g1(&G1Element::new(0.0, 0.0, 0.0, 5.0)).unwrap().approx_eq(&CanonicalClass::DtPlusDeltaDx(0)));
        assert!(normalize_g1_printed(&G1Element::new(0.0, 0.0, 2.0, 5.0)).unwrap().approx_eq(&CanonicalClass::DtPlusDeltaDx(1)));
        assert!(normalize_g1(&G1Element::new(0.0, 0.0, 2.0, 5.0)).unwrap().approx_eq(&CanonicalClass::DtPlusDeltaDx(0)));
        assert!(normalize_g1(&G1Element::new(0.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn g1_flows_match_adjoint_of_fields() {
        let v = G1Element::new(0.7, -0.4, 1.1, 0.3);
        let eps = 0.07;
        let gens = [
            (G1Flow::Dilation, VectorFieldSpec::dilation()),
            (G1Flow::TimeTranslation, VectorFieldSpec::time_translation()),
            (G1Flow::SpaceTranslation, VectorFieldSpec::space_translation()),
            (G1Flow::Boost, VectorFieldSpec::galilean_boost()),
        ];
        for (flow, field) in gens {
            let closed = v.flow(flow, eps).to_field().eval(pt()).unwrap();
            let series = lie_series(&field, &v.to_field(), eps, 6, pt()).unwrap();
            // truncation at order 6 leaves ε⁷/7! ≈ 2e-12
            assert!(max_diff(closed, series) < 1e-10, "{flow:?}");
        }
    }

    #[test]
    fn orbit_examples() {
        let r = orbit_equivalent_g1(&G1Element::new(0.0, 1.0, 1.0, 0.0), &G1Element::new(0.0, 1.0, 0.0, 0.0), 4, 1).unwrap();
        assert!(r.equivalent);
        let r = orbit_equivalent_g1(&G1Element::new(1.0, 0.0, 0.0, 0.0), &G1Element::new(0.0, 1.0, 0.0, 0.0), 4, 1).unwrap();
        assert!(!r.equivalent);
        let v = G1Element::new(0.3, 0.2, -1.0, 4.0);
        assert!(orbit_equivalent_g1(&v, &v.scaled(-2.0), 1, 1).unwrap().equivalent);
        let audit = delta_redundancy_audit(8, 7).unwrap();
        assert!(!audit.boost_class.equivalent && audit.translation_class.equivalent, "{audit:?}");
    }
}

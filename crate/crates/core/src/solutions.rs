//! Catalog of exact solutions: the Galilean-invariant field, constant
//! states, the rational/logarithmic pair family and the separable Bessel
//! family of the single-`f` equation.

use std::fmt;

use crate::bessel;
use crate::error::{Error, Result};
use crate::hodograph::{pair_from_f, HodographPair, UhBox};
use crate::model::{linearized_residual, FPartials, FluidParams, Rect, SolutionField};
use crate::taylor::{Taylor, H, U};

/// Default `(t, x)` domain of the closed-form fields.
pub fn default_rect() -> Rect {
    Rect {
        t0: 0.5,
        t1: 2.0,
        x0: -1.0,
        x1: 1.0,
    }
}

/// `u = (x + c1)/t`, `h = c2/t` on `t > 0`.
pub fn galilean_solution(c1: f64, c2: f64) -> Result<SolutionField> {
    if !(c2 > 0.0 && c2.is_finite() && c1.is_finite()) {
        return Err(Error::Parameter(format!("galilean solution needs c2 > 0, got {c2}")));
    }
    Ok(SolutionField::analytic(
        default_rect(),
        format!("galilean({c1},{c2})"),
        move |t, x| {
            let r = t.recip();
            (&(x + c1) * &r, r.scale(c2))
        },
    ))
}

/// The constant state `(u, h) = (k1, k2)`.
pub fn constant_solution(k1: f64, k2: f64) -> Result<SolutionField> {
    if !(k2 > 0.0 && k2.is_finite() && k1.is_finite()) {
        return Err(Error::Parameter(format!("constant state needs h > 0, got {k2}")));
    }
    Ok(SolutionField::analytic(
        default_rect(),
        format!("constant({k1},{k2})"),
        move |t, _| (Taylor::constant(k1, t.order()), Taylor::constant(k2, t.order())),
    ))
}

/// `f = c1 u/h + c2/h + c3 u + c4`,
/// `g = c1 (u²/h + G(H/h − ln h)) + c2 u/h + c3 (u²/2 − G(h + H ln h)) + c5`.
pub fn simple_pair(c: [f64; 5], params: &FluidParams) -> Result<HodographPair> {
    if c[..4].iter().all(|&v| v == 0.0) {
        return Err(Error::Parameter("simple pair with f identically zero".into()));
    }
    if !c.iter().all(|v| v.is_finite()) {
        return Err(Error::Parameter("non-finite simple pair coefficient".into()));
    }
    let (g, hm) = (params.gravity, params.momentum);
    let label = format!("simple{c:?}");
    Ok(HodographPair::analytic(label, UhBox::default(), move |u, h| {
        let n = u.order();
        let r = h.recip();
        let ln = h.ln();
        let ur = u * &r;
        let uu = u * u;
        let f = &(&ur.scale(c[0]) + &r.scale(c[1])) + &(&u.scale(c[2]) + c[3]);
        let g1 = &(&uu * &r) + &(&r.scale(hm) - &ln).scale(g);
        let g3 = &uu.scale(0.5) - &(h + &ln.scale(hm)).scale(g);
        let gg = &(&g1.scale(c[0]) + &ur.scale(c[1])) + &(&g3.scale(c[2]) + &Taylor::constant(c[4], n));
        (f, gg)
    })
    .with_params(
        ["c1", "c2", "c3", "c4", "c5"]
            .iter()
            .zip(c)
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    ))
}

/// Separable solution of the single-`f` equation,
/// `f = h^{−1/2}(c1 sin αu + c2 cos αu)(c3 J_b(z) + c4 Y_b(z))` with
/// `α = √(c/(G H))`, `z = 2√(c h/H)`, `b = √(1 − 4c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparableF {
    pub c: f64,
    pub coeffs: [f64; 4],
    pub params: FluidParams,
}

/// The separable family for `0 < c ≤ 1/4` and `H > 0`.
pub fn bessel_f(c: f64, coeffs: [f64; 4], params: &FluidParams) -> Result<SeparableF> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::Parameter(format!("separation constant must be positive, got {c}")));
    }
    if c > 0.25 {
        return Err(Error::UnsupportedOrder { c });
    }
    if params.momentum <= 0.0 {
        return Err(Error::Parameter(format!(
            "separable family needs H > 0, got {}",
            params.momentum
        )));
    }
    Ok(SeparableF {
        c,
        coeffs,
        params: *params,
    })
}

impl SeparableF {
    pub fn order(&self) -> f64 {
        (1.0 - 4.0 * self.c).sqrt()
    }

    pub fn alpha(&self) -> f64 {
        (self.c / (self.params.gravity * self.params.momentum)).sqrt()
    }

    /// `f` over Taylor series in `(u, h)`; non-finite if `h ≤ 0`.
    pub fn series(&self, u: &Taylor, h: &Taylor) -> Taylor {
        let n = u.order();
        let [c1, c2, c3, c4] = self.coeffs;
        let nu = self.order();
        let a = u.scale(self.alpha());
        let angular = &a.sin().scale(c1) + &a.cos().scale(c2);
        let z = h.scale(self.c / self.params.momentum).sqrt().scale(2.0);
        let radial = match bessel::jy(nu, z.value()) {
            Ok(b) => {
                let jc = bessel::taylor_coefficients(nu, z.value(), b.j, b.jp, n);
                let yc = bessel::taylor_coefficients(nu, z.value(), b.y, b.yp, n);
                &z.compose(&jc).scale(c3) + &z.compose(&yc).scale(c4)
            }
            Err(_) => Taylor::constant(f64::NAN, n),
        };
        &(&angular * &radial) * &h.powf(-0.5)
    }

    pub fn partials(&self, u: f64, h: f64) -> Result<FPartials> {
        crate::model::check_depth(h)?;
        let s = self.series(&Taylor::variable(u, U, 2), &Taylor::variable(h, H, 2));
        if !s.coefficients().iter().all(|v| v.is_finite()) {
            return Err(Error::Evaluation(format!("separable f not finite at ({u}, {h})")));
        }
        Ok(FPartials {
            f_h: s.d1(H),
            f_hh: s.d2(H, H),
            f_uu: s.d2(U, U),
        })
    }

    pub fn value(&self, u: f64, h: f64) -> Result<f64> {
        crate::model::check_depth(h)?;
        let v = self.series(&Taylor::constant(u, 0), &Taylor::constant(h, 0)).value();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation(format!("separable f not finite at ({u}, {h})")))
        }
    }

    /// The pair with `g` reconstructed by path integration.
    pub fn pair(&self, base: (f64, f64), g0: f64, domain: UhBox) -> Result<HodographPair> {
        let me = *self;
        let [c1, c2, c3, c4] = self.coeffs;
        Ok(pair_from_f(
            format!("bessel(c={})", self.c),
            move |u, h| me.series(u, h),
            base,
            g0,
            domain,
            &self.params,
        )?
        .with_params(vec![
            ("c".into(), self.c),
            ("b".into(), self.order()),
            ("c1".into(), c1),
            ("c2".into(), c2),
            ("c3".into(), c3),
            ("c4".into(), c4),
        ]))
    }
}

/// The separation constant of the closed-form half-order example.
pub const C_HALF_ORDER: f64 = 3.0 / 16.0;

/// `f = h^{−3/4} sin(√(c/(GH)) u) sin(√(4ch/H))` at `c = 3/16`.
pub fn half_order_f(u: &Taylor, h: &Taylor, params: &FluidParams) -> Taylor {
    let c = C_HALF_ORDER;
    let alpha = (c / (params.gravity * params.momentum)).sqrt();
    let z = h.scale(4.0 * c / params.momentum).sqrt();
    &(&u.scale(alpha).sin() * &z.sin()) * &h.powf(-0.75)
}

/// `g` for the half-order example exactly as displayed in the source
/// (unit gravity, `c1 = 1`, `c5 = 0`), kept for auditing.
pub fn printed_half_order_g(u: &Taylor, h: &Taylor, params: &FluidParams) -> Taylor {
    let c = C_HALF_ORDER;
    let hm = params.momentum;
    let s = h.scale(c / hm).sqrt();
    let q = h.scale(4.0 * c / hm).sqrt();
    let first = &(&h.scale(1.0 / hm).sqrt() * &s.sin())
        * &(&(&q * u).cos().scale(1.0 / 3f64.sqrt()) + &(&u.scale(1.0 / hm.sqrt()) * &q.sin()));
    let second = &(&h.scale(1.0 / hm) * &(&s * u).cos()) * &q.cos();
    &(&first + &second) * &h.powf(-1.25).scale(hm)
}

/// `(u, h)` box on which the half-order pair is used.
pub fn half_order_box() -> UhBox {
    UhBox {
        u: (-2.0, 2.0),
        h: (0.4, 2.5),
    }
}

/// Base point and base value of the reconstructed half-order `g`.
pub const HALF_ORDER_BASE: (f64, f64) = (0.0, 1.0);

/// The half-order pair with reconstructed `g`.
pub fn half_order_pair(params: &FluidParams) -> Result<HodographPair> {
    let p = *params;
    Ok(pair_from_f(
        "bessel-3-16",
        move |u, h| half_order_f(u, h, &p),
        HALF_ORDER_BASE,
        0.0,
        half_order_box(),
        params,
    )?
    .with_params(vec![("c".into(), C_HALF_ORDER), ("b".into(), 0.5), ("c1".into(), 1.0)]))
}

/// The half-order pair with the `g` as displayed.
pub fn printed_half_order_pair(params: &FluidParams) -> HodographPair {
    let p = *params;
    HodographPair::analytic("bessel-3-16-printed", half_order_box(), move |u, h| {
        (half_order_f(u, h, &p), printed_half_order_g(u, h, &p))
    })
}

/// Outcome of checking the displayed half-order `g`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrintedGAudit {
    /// Largest residual of the linearized system for the displayed pair.
    pub linearized_residual: f64,
    /// Largest residual of the linearized system for the reconstructed pair.
    pub reconstructed_residual: f64,
    /// Largest `|g_printed − g_reconstructed|` after matching at the base point.
    pub g_discrepancy: f64,
}

/// Compare the displayed half-order `g` with the reconstructed one on an
/// `n × n` lattice of the default `(u, h)` box.
pub fn audit_printed_half_order_g(params: &FluidParams, n: usize) -> Result<PrintedGAudit> {
    let printed = printed_half_order_pair(params);
    let rebuilt = half_order_pair(params)?;
    let (u0, h0) = HALF_ORDER_BASE;
    let offset = printed.eval(u0, h0)?.g - rebuilt.eval(u0, h0)?.g;
    let mut out = PrintedGAudit {
        linearized_residual: 0.0,
        reconstructed_residual: 0.0,
        g_discrepancy: 0.0,
    };
    for (u, h) in UhBox::default().lattice(n) {
        let (a, b) = linearized_residual(&printed, u, h, params)?;
        out.linearized_residual = out.linearized_residual.max(a.abs()).max(b.abs());
        let (a, b) = linearized_residual(&rebuilt, u, h, params)?;
        out.reconstructed_residual = out.reconstructed_residual.max(a.abs()).max(b.abs());
        let d = printed.eval(u, h)?.g - rebuilt.eval(u, h)?.g - offset;
        out.g_discrepancy = out.g_discrepancy.max(d.abs());
    }
    Ok(out)
}

/// What a catalog entry provides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntryKind {
    ClosedField,
    HodographPair,
    SeparableF,
}

impl EntryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntryKind::ClosedField => "closed_field",
            EntryKind::HodographPair => "hodograph_pair",
            EntryKind::SeparableF => "separable_f",
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone)]
pub enum CatalogItem {
    Field(SolutionField),
    Pair(HodographPair),
    Separable(SeparableF, HodographPair),
}

#[derive(Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub kind: EntryKind,
    pub params: Vec<(String, f64)>,
    /// Subalgebra under which the entry is group-invariant, if any.
    pub invariant_under: Option<&'static str>,
    pub item: CatalogItem,
}

impl fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("kind", &self.kind)
            .field("params", &self.params)
            .finish()
    }
}

impl CatalogEntry {
    pub fn field(&self) -> Option<&SolutionField> {
        match &self.item {
            CatalogItem::Field(f) => Some(f),
            _ => None,
        }
    }

    pub fn pair(&self) -> Option<&HodographPair> {
        match &self.item {
            CatalogItem::Pair(p) | CatalogItem::Separable(_, p) => Some(p),
            CatalogItem::Field(_) => None,
        }
    }
}

/// Ids of [`catalog`] entries, in order.
pub const CATALOG_IDS: [&str; 9] = [
    "galilean",
    "galilean-shifted",
    "constant",
    "simple-c1",
    "simple-c2",
    "simple-c3",
    "simple-mixed",
    "bessel-3-16",
    "bessel-1-8",
];

fn named(params: &[(&str, f64)]) -> Vec<(String, f64)> {
    params.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// One catalog entry by id.
pub fn catalog_entry(id: &str, params: &FluidParams) -> Result<CatalogEntry> {
    let simple = |id: &'static str, c: [f64; 5]| -> Result<CatalogEntry> {
        let pair = simple_pair(c, params)?.with_label(id);
        Ok(CatalogEntry {
            id,
            kind: EntryKind::HodographPair,
            params: pair.params().to_vec(),
            invariant_under: None,
            item: CatalogItem::Pair(pair),
        })
    };
    match id {
        "galilean" => Ok(CatalogEntry {
            id: "galilean",
            kind: EntryKind::ClosedField,
            params: named(&[("c1", 0.0), ("c2", 1.0)]),
            invariant_under: Some("G"),
            item: CatalogItem::Field(galilean_solution(0.0, 1.0)?),
        }),
        "galilean-shifted" => Ok(CatalogEntry {
            id: "galilean-shifted",
            kind: EntryKind::ClosedField,
            params: named(&[("c1", 0.5), ("c2", 2.0)]),
            invariant_under: Some("G"),
            item: CatalogItem::Field(galilean_solution(0.5, 2.0)?),
        }),
        "constant" => Ok(CatalogEntry {
            id: "constant",
            kind: EntryKind::ClosedField,
            params: named(&[("k1", 0.3), ("k2", 1.2)]),
            invariant_under: Some("dt, dx"),
            item: CatalogItem::Field(constant_solution(0.3, 1.2)?),
        }),
        "simple-c1" => simple("simple-c1", [1.0, 0.0, 0.0, 0.0, 0.0]),
        "simple-c2" => simple("simple-c2", [0.0, 1.0, 0.0, 0.0, 0.0]),
        "simple-c3" => simple("simple-c3", [0.0, 0.0, 1.0, 0.0, 0.0]),
        "simple-mixed" => simple("simple-mixed", [0.5, 1.0, -0.25, 0.3, 0.1]),
        "bessel-3-16" => {
            let sep = bessel_f(C_HALF_ORDER, [1.0, 0.0, 1.0, 0.0], params)?;
            let pair = half_order_pair(params)?;
            Ok(CatalogEntry {
                id: "bessel-3-16",
                kind: EntryKind::SeparableF,
                params: pair.params().to_vec(),
                invariant_under: None,
                item: CatalogItem::Separable(sep, pair),
            })
        }
        "bessel-1-8" => {
            let sep = bessel_f(0.125, [1.0, 0.5, 1.0, 0.3], params)?;
            let pair = sep
                .pair(HALF_ORDER_BASE, 0.0, UhBox::default())?
                .with_label("bessel-1-8");
            Ok(CatalogEntry {
                id: "bessel-1-8",
                kind: EntryKind::SeparableF,
                params: pair.params().to_vec(),
                invariant_under: None,
                item: CatalogItem::Separable(sep, pair),
            })
        }
        other => Err(Error::Config(format!("unknown catalog id '{other}'"))),
    }
}

/// Every catalog entry. The separable entries need `H > 0`; for other
/// `H` they are omitted.
pub fn catalog(params: &FluidParams) -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::with_capacity(CATALOG_IDS.len());
    for id in CATALOG_IDS {
        match catalog_entry(id, params) {
            Ok(e) => out.push(e),
            Err(Error::Parameter(_)) if id.starts_with("bessel") && params.momentum <= 0.0 => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Catalog pairs only.
pub fn catalog_pairs(params: &FluidParams) -> Result<Vec<HodographPair>> {
    Ok(catalog(params)?
        .into_iter()
        .filter_map(|e| e.pair().cloned())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mswe_residual, single_f_residual};

    #[test]
    fn galilean_examples() {
        let g = galilean_solution(0.0, 1.0).unwrap();
        assert_eq!(g.eval(2.0, 4.0).unwrap(), (2.0, 0.5));
        assert_eq!(galilean_solution(1.0, 1.0).unwrap().eval(1.0, 0.0).unwrap(), (1.0, 1.0));
        assert!(galilean_solution(0.0, 0.0).is_err());
        let p = FluidParams::with_momentum(1.7);
        for (t, x) in [(0.6, -0.9), (1.3, 0.2), (2.0, 1.0)] {
            let (a, b) = mswe_residual(&g.analytic_jet(t, x).unwrap(), &p).unwrap();
            assert!(a.abs() < 1e-15 && b.abs() < 1e-15);
        }
    }

    #[test]
    fn simple_pair_examples() {
        let p = FluidParams::default();
        let c2 = simple_pair([0.0, 1.0, 0.0, 0.0, 0.0], &p).unwrap();
        let v = c2.eval(3.0, 2.0).unwrap();
        assert_eq!((v.f, v.g), (0.5, 1.5));
        let c1 = simple_pair([1.0, 0.0, 0.0, 0.0, 0.0], &p).unwrap();
        let v = c1.eval(0.5, 2.0).unwrap();
        assert!((v.g - (0.125 + 0.5 - 2f64.ln())).abs() < 1e-15);
        assert!(simple_pair([0.0, 0.0, 0.0, 0.0, 1.0], &p).is_err());
        for g in [0.5, 1.0, 9.81] {
            let p = FluidParams::new(1.3, g).unwrap();
            let q = simple_pair([0.5, 1.0, -0.25, 0.3, 0.1], &p).unwrap();
            for (u, h) in UhBox::default().lattice(5) {
                let (a, b) = linearized_residual(&q, u, h, &p).unwrap();
                assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn separable_family_solves_single_equation() {
        for c in [0.125, C_HALF_ORDER, 0.25] {
            for g in [1.0, 2.0] {
                let p = FluidParams::new(1.5, g).unwrap();
                let s = bessel_f(c, [0.7, -0.4, 1.0, 0.6], &p).unwrap();
                for (u, h) in UhBox::default().lattice(6) {
                    let r = single_f_residual(&s.partials(u, h).unwrap(), u, h, &p).unwrap();
                    assert!(r.abs() < 1e-11, "c={c} g={g}: {r}");
                }
            }
        }
        assert!(matches!(
            bessel_f(0.3, [1.0; 4], &FluidParams::default()),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(bessel_f(0.1, [1.0; 4], &FluidParams::with_momentum(0.0)).is_err());
    }

    #[test]
    fn half_order_reduction() {
        let p = FluidParams::with_momentum(1.0);
        let s = bessel_f(C_HALF_ORDER, [1.0, 0.0, 1.0, 0.0], &p).unwrap();
        assert!((s.order() - 0.5).abs() < 1e-15);
        let k = (2.0 / std::f64::consts::PI).sqrt() * (4.0 * C_HALF_ORDER).powf(-0.25);
        for (u, h) in half_order_box().lattice(5) {
            let closed = half_order_f(&Taylor::constant(u, 0), &Taylor::constant(h, 0), &p).value();
            assert!((s.value(u, h).unwrap() - k * closed).abs() < 1e-13);
        }
    }

    #[test]
    fn printed_half_order_g_fails_the_linear_system() {
        let audit = audit_printed_half_order_g(&FluidParams::default(), 5).unwrap();
        assert!(audit.reconstructed_residual < 1e-9, "{audit:?}");
        assert!(audit.linearized_residual > 1e-2, "{audit:?}");
    }

    #[test]
    fn catalog_is_complete() {
        let p = FluidParams::default();
        let cat = catalog(&p).unwrap();
        assert_eq!(cat.len(), CATALOG_IDS.len());
        assert!(cat.iter().any(|e| e.id == "galilean" && e.invariant_under == Some("G")));
        assert!(catalog_entry("nope", &p).is_err());
        let h0 = catalog(&FluidParams::with_momentum(0.0)).unwrap();
        assert!(h0.iter().all(|e| e.kind != EntryKind::SeparableF));
    }
}

use symflow_core::solutions::{catalog_pairs, C_HALF_ORDER};
use symflow_core::*;

fn params(momentum: f64) -> FluidParams {
    FluidParams { momentum, gravity: 1.0 }
}

#[test]
fn ids_are_unique_and_resolve() {
    let p = params(1.0);
    let entries = catalog(&p).unwrap();
    let ids: Vec<&str> = entries.iter().map(|e| e.id).collect();
    assert_eq!(ids, CATALOG_IDS);
    for e in &entries {
        assert_eq!(catalog_entry(e.id, &p).unwrap().kind, e.kind);
        match e.kind {
            EntryKind::ClosedField => assert!(e.field().is_some() && e.pair().is_none()),
            _ => assert!(e.pair().is_some()),
        }
    }
    assert!(matches!(catalog_entry("nope", &p), Err(Error::Config(_))));
}

#[test]
fn separable_entries_need_positive_momentum() {
    let ids: Vec<&str> = catalog(&params(0.0)).unwrap().iter().map(|e| e.id).collect();
    assert!(!ids.iter().any(|id| id.starts_with("bessel")));
    assert_eq!(ids.len(), CATALOG_IDS.len() - 2);
}

#[test]
fn pairs_satisfy_linearized_system() {
    for h in [0.5, 1.0, 2.0] {
        let p = params(h);
        for pair in catalog_pairs(&p).unwrap() {
            for (u, hh) in pair.domain().lattice(7) {
                let (a, b) = linearized_residual(&pair, u, hh, &p).unwrap();
                assert!(a.abs() < 1e-9 && b.abs() < 1e-9, "{} at ({u}, {hh}): {a:e} {b:e}", pair.label());
            }
        }
    }
}

#[test]
fn closed_fields_solve_the_system() {
    let p = params(1.0);
    for e in catalog(&p).unwrap() {
        let Some(field) = e.field() else { continue };
        let check = verify_field(field, &p, 40, 5);
        assert!(check.max() < 1e-8, "{}: {}", e.id, check.max());
    }
}

// The half-order member is proportional to the elementary closed form
// h^{-3/4} sin(√(c/H) u) sin(√(4ch/H)).
#[test]
fn half_order_member_is_elementary() {
    for h in [0.5, 1.0, 2.0] {
        let p = params(h);
        let sep = bessel_f(C_HALF_ORDER, [1.0, 0.0, 1.0, 0.0], &p).unwrap();
        let closed = |u: f64, hh: f64| {
            hh.powf(-0.75) * ((C_HALF_ORDER / h).sqrt() * u).sin() * (4.0 * C_HALF_ORDER * hh / h).sqrt().sin()
        };
        let ratio0 = sep.value(0.4, 1.3).unwrap() / closed(0.4, 1.3);
        for (u, hh) in [(0.1, 0.7), (-0.6, 1.8), (0.9, 2.4)] {
            let r = sep.value(u, hh).unwrap() / closed(u, hh);
            assert!((r - ratio0).abs() < 1e-10 * ratio0.abs(), "H={h} ({u}, {hh}): {r} vs {ratio0}");
        }
    }
}

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use symflow_core::fvsolver::{step, Boundary, GridState};
use symflow_core::{
    catalog_entry, galilean_solution, integrate_case_i, invariance_defect, invert_point,
    sample_manifold_jets, FluidParams, IntegrationOptions, SamplingBox, VectorFieldSpec,
};

fn invariance(c: &mut Criterion) {
    let params = FluidParams::default();
    let jets = sample_manifold_jets(1, 200, &params, &SamplingBox::default()).unwrap();
    let pair = catalog_entry("bessel-3-16", &params).unwrap();
    let fields = [
        VectorFieldSpec::dilation(),
        VectorFieldSpec::from_pair(pair.pair().unwrap()),
    ];
    for v in &fields {
        c.bench_function(&format!("invariance defect {} x200", v.name()), |b| {
            b.iter(|| {
                for j in &jets {
                    black_box(invariance_defect(v, j, &params).unwrap());
                }
            })
        });
    }
}

fn inversion(c: &mut Criterion) {
    let params = FluidParams::default();
    let e = catalog_entry("simple-c3", &params).unwrap();
    let pair = e.pair().unwrap();
    let v = pair.eval(0.8, 1.1).unwrap();
    c.bench_function("invert_point simple-c3", |b| {
        b.iter(|| invert_point(pair, black_box(v.f), black_box(v.g), (0.75, 1.0), 1e-12).unwrap())
    });
}

fn finite_volume(c: &mut Criterion) {
    let params = FluidParams::default();
    let gal = galilean_solution(0.0, 1.0).unwrap();
    let gs = GridState::from_field(&gal, 1.0, 0.0, 1.0, 400).unwrap();
    let bc = Boundary::Dirichlet(gal.clone());
    c.bench_function("fv step nx=400", |b| b.iter(|| step(black_box(&gs), &params, 0.45, &bc).unwrap()));
}

fn reduction(c: &mut Criterion) {
    let params = FluidParams::default();
    c.bench_function("integrate case (i) to p=0.5", |b| {
        b.iter(|| integrate_case_i(1.0, &params, 0.0, (0.0, 1.0), 0.5, IntegrationOptions::default()).unwrap())
    });
}

criterion_group!(benches, invariance, inversion, finite_volume, reduction);
criterion_main!(benches);

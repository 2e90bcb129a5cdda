//! Sequential against rayon-parallel execution of the two heaviest loops:
//! heat-kernel propagation on a sampled field, and the inversion of L.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mcf_core::cone_heat::{propagate_with, HalfLineField};
use mcf_core::grid;
use mcf_core::jacobi::{self, RadialField};
use mcf_core::minimal_surface::{MinimalOptions, MinimalProfile};
use mcf_core::verify::bump;
use mcf_core::Exec;

fn policies() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn heat(c: &mut Criterion) {
    let g = grid::geometric(1e-2, 1e2, 40).unwrap();
    let v: Vec<f64> = g.iter().map(|r| r * (-r).exp()).collect();
    let field = HalfLineField::new(g, v, 0.0).unwrap();
    let mut group = c.benchmark_group("propagate");
    group.sample_size(10);
    for (name, exec) in policies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| propagate_with(0.5, 1.0, &field, exec).unwrap())
        });
    }
    group.finish();
}

fn invert(c: &mut Criterion) {
    let mp = MinimalProfile::build(4, 1.0, MinimalOptions::new(1e3, 1e-11).per_decade(200)).unwrap();
    let base = jacobi::assemble(&mp).unwrap();
    let f = RadialField::values(base.r.clone(), base.r.iter().map(|&r| bump(r, 1.0, 5.0).0).collect());
    let mut group = c.benchmark_group("invert_l");
    group.sample_size(10);
    for (name, exec) in policies() {
        let jd = base.clone().with_exec(exec);
        group.bench_with_input(BenchmarkId::from_parameter(name), &jd, |b, jd| b.iter(|| jacobi::invert_l(jd, &f).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, heat, invert);
criterion_main!(benches);

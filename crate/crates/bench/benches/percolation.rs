use criterion::{criterion_group, criterion_main, Criterion};
use hyperperc_core::pointprocess::color_marks;
use hyperperc_core::{build_ball, delaunay, ColoredPointSet, Lattice, Seed};

fn grid() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

fn bench_bonds(c: &mut Criterion) {
    let ball = build_ball(3, 7, 7).unwrap();
    let lattice = Lattice::primal(&ball);
    let marks = color_marks(ball.edge_count(), Seed(3));
    c.bench_function("bond label {3,7} L=7", |b| b.iter(|| lattice.label(&marks, 0.3)));
    c.bench_function("bond sweep {3,7} L=7 x99", |b| b.iter(|| lattice.sweep(&marks, &grid())));
}

fn bench_sites(c: &mut Criterion) {
    let set = ColoredPointSet::sample(1.0, 0.5, 7.0, 11).unwrap();
    let complex = delaunay(set).unwrap();
    let lattice = Lattice::voronoi(&complex, 5.0, 1.0, true);
    let marks = color_marks(complex.points().len(), Seed(5));
    c.bench_function("site label R=7", |b| b.iter(|| lattice.label(&marks, 0.3)));
    c.bench_function("site sweep R=7 x99", |b| b.iter(|| lattice.sweep(&marks, &grid())));
}

criterion_group!(benches, bench_bonds, bench_sites);
criterion_main!(benches);

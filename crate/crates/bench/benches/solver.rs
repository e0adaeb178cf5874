use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use plate_harnack::exponents::default_exponents;
use plate_harnack::levelset::level_stats;
use plate_harnack::linalg::{solve_spd, DEFAULT_TOL};
use plate_harnack::{PlateOperator, ScalarField};
use plate_harnack_bench::{bump, disk};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for n in [32u32, 64] {
        let m = disk(1.0 / n as f64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| PlateOperator::assemble(m.clone()).unwrap())
        });
    }
    g.finish();
}

fn spmv(c: &mut Criterion) {
    let mut g = c.benchmark_group("spmv");
    for n in [64u32, 128] {
        let m = disk(1.0 / n as f64);
        let a = PlateOperator::assemble(m.clone()).unwrap().matrix(1.0).unwrap();
        let x = bump(&m).into_values();
        let mut y = vec![0.0; x.len()];
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| a.spmv_into(black_box(&x), &mut y).unwrap())
        });
    }
    g.finish();
}

fn cg(c: &mut Criterion) {
    let mut g = c.benchmark_group("cg");
    g.sample_size(10);
    for n in [32u32, 64] {
        let m = disk(1.0 / n as f64);
        let a = PlateOperator::assemble(m.clone()).unwrap().matrix(1.0).unwrap();
        let f = ScalarField::from_fn(m.clone(), |_| 1.0).unwrap().into_values();
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| solve_spd(a, &f, DEFAULT_TOL, 50 * f.len()).unwrap())
        });
    }
    g.finish();
}

fn levels(c: &mut Criterion) {
    let m = disk(1.0 / 128.0);
    let u = bump(&m);
    let e = default_exponents(2).unwrap();
    c.bench_function("level_stats/128", |b| {
        b.iter(|| level_stats(&u, &[0.1, 0.0, 0.0], 0.4, 0.5, &[1.0, 2.0, e.p], e.t).unwrap())
    });
}

criterion_group!(benches, assembly, spmv, cg, levels);
criterion_main!(benches);

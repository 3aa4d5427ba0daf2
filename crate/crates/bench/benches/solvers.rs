use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use mfsc::linalg::eig_sym;
use mfsc::{assemble, smolyak_plan, solve_gfe_with, solve_rom, ImprovedBasis, PodBasis, SensitivityBundle};
use mfsc_bench::{point, solver, sym_matrix};

fn gfe(c: &mut Criterion) {
    let cfg = solver(32, 20, 3);
    let fem = assemble(&cfg.mesh, cfg.mu).unwrap();
    let p = point(3);
    c.bench_function("gfe 32x20", |b| b.iter(|| solve_gfe_with(black_box(&p), &cfg, &fem).unwrap()));
    let fine = solver(256, 200, 3);
    let fem_fine = assemble(&fine.mesh, fine.mu).unwrap();
    c.bench_function("gfe 256x200", |b| b.iter(|| solve_gfe_with(black_box(&p), &fine, &fem_fine).unwrap()));
}

fn rom(c: &mut Criterion) {
    let cfg = solver(32, 20, 3);
    let fem = assemble(&cfg.mesh, cfg.mu).unwrap();
    let p = point(3);
    let traj = solve_gfe_with(&p, &cfg, &fem).unwrap();
    let basis = PodBasis::build(&traj, &fem, 20, 10).unwrap();
    let ops = ImprovedBasis::plain(&basis).rom_operators(&fem, &cfg).unwrap();
    c.bench_function("pod basis 20 snapshots", |b| b.iter(|| PodBasis::build(black_box(&traj), &fem, 20, 10).unwrap()));
    c.bench_function("rom 10 modes", |b| b.iter(|| solve_rom(black_box(&p), &ops, &cfg, &fem).unwrap()));
    let dir = p.direction_to(&point(3).scaled(0.5)).unwrap();
    c.bench_function("sensitivity bundle", |b| {
        b.iter(|| SensitivityBundle::compute(&basis, &traj, black_box(&dir), &cfg, &fem).unwrap())
    });
}

fn eigen(c: &mut Criterion) {
    for n in [21, 201] {
        let a = sym_matrix(n);
        c.bench_function(&format!("eig_sym {n}"), |b| b.iter(|| eig_sym(black_box(&a)).unwrap()));
    }
}

fn plan(c: &mut Criterion) {
    c.bench_function("smolyak d=3 q=8", |b| b.iter(|| smolyak_plan(black_box(3), 8, 4.0).unwrap()));
}

criterion_group!(benches, gfe, rom, eigen, plan);
criterion_main!(benches);

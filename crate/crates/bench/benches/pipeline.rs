use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use spinrot::dynamics::{propagate, shot_noise_estimates, StateVector};
use spinrot::phases::adiabatic_phases;
use spinrot::sensing::{critical_point, phase_slope, DEFAULT_RATIO_STEP};
use spinrot::spinham::{eigensystem, hamiltonian_at_fraction, trajectory};
use spinrot::{PresetKind, ScenarioConfig};

fn preset() -> ScenarioConfig {
    ScenarioConfig::from_preset(PresetKind::Nv14n)
}

fn eigen(c: &mut Criterion) {
    let s = preset();
    c.bench_function("eigensystem", |b| b.iter(|| eigensystem(&hamiltonian_at_fraction(&s, black_box(0.37))).unwrap()));
}

fn period(c: &mut Criterion) {
    let mut g = c.benchmark_group("one period");
    g.sample_size(20);
    for steps in [2_000, 20_000] {
        let s = preset().with_steps(steps);
        g.bench_with_input(BenchmarkId::new("trajectory", steps), &s, |b, s| b.iter(|| trajectory(s).unwrap()));
        g.bench_with_input(BenchmarkId::new("phase ledger", steps), &s, |b, s| b.iter(|| adiabatic_phases(s).unwrap()));
        g.bench_with_input(BenchmarkId::new("propagate", steps), &s, |b, s| {
            b.iter(|| propagate(s, StateVector::basis(1).unwrap(), 0.0, s.period(), steps).unwrap())
        });
    }
    g.finish();
}

fn sensing(c: &mut Criterion) {
    let mut g = c.benchmark_group("sensing");
    g.sample_size(10);
    let s = preset();
    g.bench_function("phase slope", |b| b.iter(|| phase_slope(&s, DEFAULT_RATIO_STEP).unwrap()));
    g.bench_function("critical point", |b| b.iter(|| critical_point(&s, black_box(1.2), black_box(1.3))));
    g.bench_function("shot noise 1000 trials", |b| {
        b.iter(|| shot_noise_estimates(black_box(1.0), 10_000, 1000, 3).unwrap())
    });
    g.finish();
}

criterion_group!(benches, eigen, period, sensing);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use vortex_isac::decode::decode;
use vortex_isac::echo::{simulate, synthesize};
use vortex_isac::waveform::PilotKind;
use vortex_isac::{Estimator, EstimatorKind, ParameterEstimate, Scenario, SystemConfig};

fn pipeline(c: &mut Criterion) {
    let cfg = SystemConfig::table1().with_sensing_symbols(128);
    let sc = Scenario::three_targets(0);
    let est = Estimator::new(&cfg, EstimatorKind::CdmmVcmEm, PilotKind::Unit, 0).unwrap();
    let wf = est.waveform();
    let noisy = simulate(&cfg, wf, &sc.targets, 0).unwrap().noisy;

    c.bench_function("synthesize/3 targets", |b| {
        b.iter(|| synthesize(&cfg, wf, black_box(&sc.targets)))
    });
    c.bench_function("decode/matched stride 1", |b| {
        b.iter(|| decode(&cfg, wf, black_box(&noisy), 5.0, 1).unwrap())
    });
    let prior = ParameterEstimate::from_target(&sc.targets[0]);
    c.bench_function("vcm/one target", |b| {
        b.iter(|| est.vcm_velocity(black_box(&noisy), &prior).unwrap())
    });
    c.bench_function("initialize/3 targets", |b| {
        b.iter(|| est.initialize(black_box(&noisy), 3).unwrap())
    });

    let mut g = c.benchmark_group("em");
    g.sample_size(10);
    g.bench_function("cdmm/3 targets", |b| b.iter(|| est.run(black_box(&noisy), 3).unwrap()));
    let tdmm = Estimator::new(&cfg, EstimatorKind::TdmmBaseline, PilotKind::Unit, 0).unwrap();
    let raw = simulate(&cfg, tdmm.waveform(), &sc.targets, 0).unwrap().noisy;
    g.bench_function("tdmm/3 targets", |b| b.iter(|| tdmm.run(black_box(&raw), 3).unwrap()));
    g.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);

//! Sequential against data-parallel execution on the three parallel layers.
//! Without the `parallel` feature both variants run sequentially.

use chansteer::channels::{dilation, random_extension, KrausSet};
use chansteer::par::Execution;
use chansteer::steering::{
    channel_quantifier_report, choi_state_assemblage, induced_channel_assemblage, steering_robustness_batch,
    InputMode, MeasurementAssemblage, Quantity, StateAssemblage,
};
use chansteer::sweep::{linspace, run_sweep, SweepParam};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn batch(c: &mut Criterion) {
    let ma = MeasurementAssemblage::pauli_xz();
    let items: Vec<StateAssemblage> = (0..16)
        .map(|seed| {
            let e = random_extension(2, 2, 2, seed).unwrap();
            choi_state_assemblage(&induced_channel_assemblage(&e, &ma).unwrap())
        })
        .collect();
    let mut g = c.benchmark_group("robustness_batch_16");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| steering_robustness_batch(&items, exec))
        });
    }
    g.finish();
}

fn quantifier_search(c: &mut Criterion) {
    let e = dilation(&KrausSet::amplitude_damping(0.3).unwrap()).unwrap();
    let ma = MeasurementAssemblage::pauli_xz();
    let mut g = c.benchmark_group("quantifier_search");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| channel_quantifier_report(&e, &ma, Quantity::Robustness, InputMode::Search, exec).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let values = linspace(0.0, 1.0, 16);
    let mut g = c.benchmark_group("gamma_sweep_16");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_sweep(SweepParam::Gamma, Quantity::Robustness, &values, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, batch, quantifier_search, sweep);
criterion_main!(benches);

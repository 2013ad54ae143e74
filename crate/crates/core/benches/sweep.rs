use std::hint::black_box;

use control_energy::experiment::{build_instance, preset};
use control_energy::par::Execution;
use control_energy::scaling::{sweep, SweepOptions};
use criterion::{criterion_group, criterion_main, Criterion};

fn sweep_modes(c: &mut Criterion) {
    let mut cfg = preset("fig5c").unwrap().sweeps.remove(0);
    cfg.grid.points = 25;
    let inst = build_instance(&cfg).unwrap();
    let grid = cfg.grid.values().unwrap();
    let mut group = c.benchmark_group("sweep_fig5c_25_cells");
    group.sample_size(10);
    for (label, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        let options = SweepOptions { execution, ..SweepOptions::default() };
        group.bench_function(label, |b| b.iter(|| sweep(black_box(&inst.spec), &inst.drivers, &grid, &options).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, sweep_modes);
criterion_main!(benches);

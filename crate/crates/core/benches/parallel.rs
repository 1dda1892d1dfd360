use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use onebit_doa::moments::{arcsine_map, statistic_moments_with, QuarticCache};
use onebit_doa::montecarlo::{run_rmse_experiment, ExperimentConfig};
use onebit_doa::sweep::{loss_sweep, parse_range, SweepSpec, SweepVariable};
use onebit_doa::{receive_covariance, Execution, UlaSource};

const STRATEGIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn moments(c: &mut Criterion) {
    let src = UlaSource::from_deg_db(8, 10.0, 0.0).unwrap();
    let qc = arcsine_map(&receive_covariance(&src), src.gamma());
    let mut g = c.benchmark_group("statistic_moments_k8");
    for (name, exec) in STRATEGIES {
        // a fresh cache per iteration so every quartic moment is computed
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| statistic_moments_with(&qc, &QuarticCache::new(), exec).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let spec = SweepSpec {
        variable: SweepVariable::Snr,
        values: parse_range("-20:10:2").unwrap(),
        k: 4,
        theta_deg: 10.0,
        snr_db: 0.0,
    };
    let mut g = c.benchmark_group("loss_sweep_k4");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| loss_sweep(&spec, false, exec).unwrap()));
    }
    g.finish();
}

fn rmse(c: &mut Criterion) {
    let mut cfg = ExperimentConfig::cmle_reference(50, 1);
    cfg.snr_db_list = vec![-3.0];
    let mut g = c.benchmark_group("rmse_k4_50_runs");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| run_rmse_experiment(&cfg, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, moments, sweep, rmse);
criterion_main!(benches);

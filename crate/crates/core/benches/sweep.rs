use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use relchar_core::exec::ExecMode;
use relchar_core::verify::{run, JobConfig};

fn sweep(c: &mut Criterion) {
    let jobs = [
        ("ps_p3", r#"{"p": 3, "case": "ps", "max_level": 3}"#),
        ("sc_p3", r#"{"p": 3, "case": "sc", "pairs": {"select": "sweep", "max_twist_cond": 2}, "max_level": 2}"#),
        ("ps_p5", r#"{"p": 5, "case": "ps", "pairs": {"select": "sweep", "stride": 4}, "max_level": 2}"#),
    ];
    let mut g = c.benchmark_group("verify_main");
    g.sample_size(10);
    for (name, json) in jobs {
        let cfg = JobConfig::from_json(json).unwrap();
        g.bench_with_input(BenchmarkId::new("sequential", name), &cfg, |b, cfg| {
            b.iter(|| run(cfg, ExecMode::Sequential).unwrap())
        });
        #[cfg(feature = "parallel")]
        g.bench_with_input(BenchmarkId::new("parallel", name), &cfg, |b, cfg| {
            b.iter(|| run(cfg, ExecMode::Parallel(None)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);

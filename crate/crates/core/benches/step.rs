//! Sequential against rayon-parallel execution for one time step and
//! for a small `gamma` sweep.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ultrapar::exprdsl::parse;
use ultrapar::problem::{Domain, Field, Grid, ProblemSpec, RunMode};
use ultrapar::scheme::{Execution, FluxKind, Scheme, StepOptions, Workspace};
use ultrapar::solver::{stable_dt, SolveOptions};
use ultrapar::verify::check_gamma_limit;

fn spec() -> ProblemSpec {
    let domain = Domain {
        d: 1,
        length: 4.0,
        t_end: 1.0,
        s_end: 1.0,
    };
    let e = |t: &str| parse(t).unwrap();
    let bx = "16/81*max(0, (x-0.5)*(3.5-x))^2";
    let mut s = ProblemSpec::new(domain, e("lambda^2/2"), vec![e("lambda^2/4")]);
    s.u0_1 = e(&format!("{bx}*256*max(0, (s-0.15)*(0.65-s))^2"));
    s.beta = Some(e(&format!(
        "0.5*{bx}*39.0625*max(0, (s-0.1)*(0.9-s))^2*max(0, 1 - lambda^2)^2"
    )));
    s.b1 = Some(1.0);
    s.tau = 0.5;
    s.gamma = 0.1;
    s
}

const EXECUTIONS: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_step(c: &mut Criterion) {
    let spec = spec();
    let mut group = c.benchmark_group("step");
    for n in [64usize, 256] {
        let g = Grid::new(&spec.domain, n, n).unwrap();
        let dt = stable_dt(&spec, RunMode::Entropy, &g, 1.5, &SolveOptions::default());
        let g = g.with_dt(dt);
        let u = Field::from_fn(g, |x, s| spec.initial_at(x, s));
        for (name, execution) in EXECUTIONS {
            let options = StepOptions {
                execution,
                ..StepOptions::default()
            };
            let scheme = Scheme::new(&spec, g, FluxKind::EngquistOsher, 1.5, options);
            let mut ws = Workspace::default();
            let mut out = Field::zeros(g);
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| scheme.step(&u, g.nt / 2, &mut ws, &mut out).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let spec = spec();
    let g = Grid::new(&spec.domain, 32, 32).unwrap();
    let mut group = c.benchmark_group("gamma_sweep");
    group.sample_size(10);
    for (name, execution) in EXECUTIONS {
        let mut options = SolveOptions::default();
        options.step.execution = execution;
        group.bench_function(name, |b| {
            b.iter(|| check_gamma_limit(&spec, &g, &[0.2, 0.1, 0.05], &options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_step, bench_sweep);
criterion_main!(benches);

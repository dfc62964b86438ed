//! Benchmarks of the three hot paths: tree growth, walk stepping, and spine
//! path sampling.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rwre_core::spine::{sample_path, spine_increment_law};
use rwre_core::{derive_rng, EnvironmentSpec, TreeArena, Walker};

fn bench_tree_growth(c: &mut Criterion) {
    let mut group = c.benchmark_group("tree-growth");
    for (name, spec, depth) in [
        ("gauss2-depth10", EnvironmentSpec::gauss2(), 10u32),
        ("schroeder13-depth10", EnvironmentSpec::schroeder13(), 10),
    ] {
        group.bench_function(name, |b| {
            let mut seed = 0u64;
            b.iter_batched(
                || {
                    seed += 1;
                    TreeArena::new(spec.clone(), derive_rng(seed, &["bench", "grow"]))
                },
                |mut arena| arena.grow_to_depth(depth).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_walker_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("walker");
    group.bench_function("gauss2-10k-steps", |b| {
        let mut seed = 0u64;
        b.iter_batched(
            || {
                seed += 1;
                let mut arena = TreeArena::new(
                    EnvironmentSpec::gauss2(),
                    derive_rng(seed, &["bench", "walk", "tree"]),
                );
                arena.grow_to_depth(1).unwrap();
                (arena, Walker::new(derive_rng(seed, &["bench", "walk", "walk"])))
            },
            |(mut arena, mut walker)| walker.run_steps(&mut arena, 10_000).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn bench_spine_sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("spine");
    for (name, spec) in
        [("gauss2", EnvironmentSpec::gauss2()), ("sym2", EnvironmentSpec::sym2())]
    {
        let law = spine_increment_law(&spec).unwrap();
        group.bench_function(format!("{name}-path-1024"), |b| {
            let mut rng = derive_rng(7, &["bench", "spine"]);
            b.iter(|| sample_path(&law, 0.0, 1024, &mut rng))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_tree_growth, bench_walker_steps, bench_spine_sampling);
criterion_main!(benches);

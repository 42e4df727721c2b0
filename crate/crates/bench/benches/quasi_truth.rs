use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use partial_model::semantics::quasi_witness;
use partial_model::{enumerate_normals, eval_total, parse_sentence, Assignment, Signature};
use partial_model_bench::cyclic_structure;

/// Search against listing every normal completion, as unknowns grow.
fn quasi_truth(c: &mut Criterion) {
    let sig = Signature::relational([("R", 2)]).unwrap();
    // Quasi-true only through a completion that makes R reflexive.
    let phi = parse_sentence("forall x (R(x,x))", &sig).unwrap();
    let mut group = c.benchmark_group("quasi_truth");
    for unknowns in [4, 8, 12] {
        let a = cyclic_structure(6, unknowns);
        group.bench_with_input(BenchmarkId::new("search", unknowns), &a, |b, a| {
            b.iter(|| quasi_witness(black_box(a), &phi).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("all_completions", unknowns), &a, |b, a| {
            b.iter(|| {
                enumerate_normals(black_box(a))
                    .any(|n| eval_total(&n, &phi, &Assignment::new()).unwrap())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, quasi_truth);
criterion_main!(benches);

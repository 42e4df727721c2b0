//! Workloads shared by the benchmarks.

use partial_model::{IndexedFamily, PartialRelation, PartialStructure, Universe, Verdict};

/// A structure over `size` elements with one binary relation `R` whose
/// verdicts cycle through positive, negative and unknown, leaving at most
/// `max_unknowns` unknown tuples.
pub fn cyclic_structure(size: usize, max_unknowns: usize) -> PartialStructure {
    let mut left = max_unknowns;
    let rel = PartialRelation::from_fn(size, 2, |t| match (t[0] * size + t[1]) % 3 {
        0 => Verdict::Pos,
        1 => Verdict::Neg,
        _ if left > 0 => {
            left -= 1;
            Verdict::Unk
        }
        _ => Verdict::Neg,
    })
    .expect("small table");
    PartialStructure::new(Universe::numbered(size).expect("non-empty"))
        .with_relation("R", rel)
        .expect("fresh symbol")
}

/// `factors` copies of a cyclic structure, indexed `i0, i1, ...`.
pub fn cyclic_family(factors: usize, size: usize, max_unknowns: usize) -> IndexedFamily {
    IndexedFamily::new(
        (0..factors).map(|i| (format!("i{i}"), cyclic_structure(size, max_unknowns))),
    )
    .expect("uniform family")
}

//! Partial structures, three-valued and quasi-truth semantics, and products
//! of partial structures over filters and ultrafilters.

pub mod format;
pub mod laws;
pub mod products;
pub mod semantics;
pub mod structures;
pub mod syntax;

pub use products::{
    compactness_witness, direct_product, extend_to_ultrafilter, has_fip, reduced_product,
    trivial_filter, ultraproduct, CompactnessWitness, FilterSet, IndexSet, IndexedFamily,
    ProductElement, ProductError,
};
pub use semantics::{
    eval_kleene, eval_total, quasi_consequence_bounded, quasi_models, quasi_true, Assignment,
    Bounded, EvalError, Verdict3,
};
pub use structures::{
    enumerate_normals, expands, is_normal, minus_completion, plus_completion, relationalize,
    structures_equal, PartialRelation, PartialStructure, StructureError, Universe, Verdict,
};
pub use syntax::{parse_formula, parse_sentence, Formula, ParseError, Signature, SignatureError};

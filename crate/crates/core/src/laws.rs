//! Seeded randomized checks of the laws relating expansion, completion,
//! quasi-truth and products.
//!
//! Every law draws its cases from its own ChaCha stream, derived from the
//! suite seed and the law's name, so a report is reproducible law by law.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::products::{
    compactness_witness, direct_product, family_minus, family_plus, has_fip, los_check,
    normals_of_family, product_unknown_nonempty_characterization, quasi_los_forward, quotient,
    reduced_product, reduced_verdict, trivial_filter, ultraproduct, FilterSet, IndexSet,
    IndexedFamily, ProductElement,
};
use crate::semantics::{
    eval_kleene, eval_total, find_partial_model, quasi_consequence_bounded,
    quasi_equivalent_bounded, quasi_models, quasi_true, quasi_valid_bounded, quasi_witness,
    Assignment, Verdict3,
};
use crate::structures::{
    enumerate_normals, expands, is_normal, minus_completion, plus_completion, structures_equal,
    PartialRelation, PartialStructure, Universe, Verdict,
};
use crate::syntax::{parse_sentence, Formula, Signature};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_CASES: usize = 200;

/// Which group of laws to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteName {
    Structures,
    Semantics,
    Products,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown suite `{0}`; expected structures, semantics, products or all")]
pub struct UnknownSuite(pub String);

impl FromStr for SuiteName {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structures" => Ok(SuiteName::Structures),
            "semantics" => Ok(SuiteName::Semantics),
            "products" => Ok(SuiteName::Products),
            "all" => Ok(SuiteName::All),
            other => Err(UnknownSuite(other.to_string())),
        }
    }
}

/// The result of running one law over its cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawOutcome {
    pub suite: &'static str,
    pub law: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl LawOutcome {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub seed: u64,
    pub laws: Vec<LawOutcome>,
    /// Observations that are recorded but not asserted.
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.laws.iter().all(LawOutcome::passed)
    }

    pub fn law(&self, name: &str) -> Option<&LawOutcome> {
        self.laws.iter().find(|l| l.law == name)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {}", self.seed)?;
        for l in &self.laws {
            let status = if l.passed() { "pass" } else { "FAIL" };
            writeln!(
                f,
                "{status} {:<10} {:<70} {}/{}",
                l.suite,
                l.law,
                l.cases - l.failures,
                l.cases
            )?;
            if let Some(why) = &l.first_failure {
                writeln!(f, "     first failure: {why}")?;
            }
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        let failed = self.laws.iter().filter(|l| !l.passed()).count();
        write!(
            f,
            "{} laws, {} passed, {} failed",
            self.laws.len(),
            self.laws.len() - failed,
            failed
        )
    }
}

type Check = Result<(), String>;

trait Msg<T> {
    fn msg(self) -> Result<T, String>;
}

impl<T, E: fmt::Display> Msg<T> for Result<T, E> {
    fn msg(self) -> Result<T, String> {
        self.map_err(|e| e.to_string())
    }
}

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn stream_seed(seed: u64, law: &str) -> u64 {
    // FNV-1a, so streams do not depend on the order laws run in.
    law.bytes().fold(0xcbf2_9ce4_8422_2325 ^ seed, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

struct Runner {
    seed: u64,
    laws: Vec<LawOutcome>,
    notes: Vec<String>,
}

impl Runner {
    fn law(
        &mut self,
        suite: &'static str,
        law: &'static str,
        cases: usize,
        mut check: impl FnMut(&mut ChaCha8Rng) -> Check,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(self.seed, law));
        let mut failures = 0;
        let mut first_failure = None;
        for k in 0..cases {
            if let Err(why) = check(&mut rng) {
                failures += 1;
                first_failure.get_or_insert(format!("case {k}: {why}"));
            }
        }
        self.laws.push(LawOutcome {
            suite,
            law,
            cases,
            failures,
            first_failure,
        });
    }
}

/// Runs the chosen laws with `cases` cases each (fixed-example laws run
/// their examples once; the compactness law runs at least 20 instances).
pub fn run_suite(name: SuiteName, seed: u64, cases: usize) -> SuiteReport {
    let mut r = Runner {
        seed,
        laws: Vec::new(),
        notes: Vec::new(),
    };
    if matches!(name, SuiteName::Structures | SuiteName::All) {
        structure_laws(&mut r, cases);
    }
    if matches!(name, SuiteName::Semantics | SuiteName::All) {
        semantic_laws(&mut r, cases);
    }
    if matches!(name, SuiteName::Products | SuiteName::All) {
        product_laws(&mut r, cases);
    }
    SuiteReport {
        seed,
        laws: r.laws,
        notes: r.notes,
    }
}

// ---------------------------------------------------------------- generators

/// `P/1, R/2`, the signature the semantic and product laws run over.
pub fn law_signature() -> Signature {
    Signature::relational([("P", 1), ("R", 2)]).expect("valid signature")
}

/// A non-empty random selection of `P/1, Q/1, R/2`.
pub fn random_signature(rng: &mut impl Rng) -> Signature {
    let pool = [("P", 1), ("Q", 1), ("R", 2)];
    loop {
        let picked: Vec<(&str, usize)> = pool
            .iter()
            .copied()
            .filter(|_| rng.random_bool(0.5))
            .collect();
        if !picked.is_empty() {
            return Signature::relational(picked).expect("valid signature");
        }
    }
}

/// A random partial structure over `e1..e<size>` with at most
/// `max_unknowns` unknown tuples. Each relation draws its own unknown rate,
/// which is zero a third of the time, so total relations are common.
pub fn random_structure(
    rng: &mut impl Rng,
    sig: &Signature,
    size: usize,
    max_unknowns: usize,
) -> PartialStructure {
    let mut s = PartialStructure::new(Universe::numbered(size).expect("non-empty universe"));
    for (name, arity) in sig.relations() {
        let p_unknown = *[0.0, 0.35, 0.7].choose(rng).expect("non-empty");
        let mut r = PartialRelation::filled(size, arity, Verdict::Neg).expect("small table");
        for idx in 0..r.verdicts().len() {
            let v = if rng.random_bool(p_unknown) {
                Verdict::Unk
            } else if rng.random_bool(0.5) {
                Verdict::Pos
            } else {
                Verdict::Neg
            };
            r.set_index(idx, v);
        }
        s.add_relation(name, r).expect("fresh symbol");
    }
    let mut slots: Vec<(String, usize)> = s
        .unknown_positions()
        .into_iter()
        .map(|(n, i)| (n.to_string(), i))
        .collect();
    while slots.len() > max_unknowns {
        let (name, idx) = slots.swap_remove(rng.random_range(0..slots.len()));
        let v = if rng.random_bool(0.5) {
            Verdict::Pos
        } else {
            Verdict::Neg
        };
        s.relation_mut(&name).expect("listed").set_index(idx, v);
    }
    s
}

/// Resolves each unknown tuple of `a` to a random verdict (possibly leaving
/// it unknown), giving an expansion of `a`.
pub fn random_expansion(
    rng: &mut impl Rng,
    a: &PartialStructure,
    keep_unknown: bool,
) -> PartialStructure {
    let mut b = a.clone();
    for (name, idx) in a.unknown_positions() {
        let v = match rng.random_range(0..if keep_unknown { 3 } else { 2 }) {
            0 => Verdict::Pos,
            1 => Verdict::Neg,
            _ => Verdict::Unk,
        };
        b.relation_mut(name).expect("listed").set_index(idx, v);
    }
    b
}

/// A random normal completion of `a`.
pub fn random_completion(rng: &mut impl Rng, a: &PartialStructure) -> PartialStructure {
    random_expansion(rng, a, false)
}

const VARS: [&str; 2] = ["x", "y"];

/// A random sentence over the relations of `sig` with nesting depth at most
/// `max_depth` (at least 1). Variables are `x` and `y`; atoms only use bound
/// variables, so the result is closed by construction.
pub fn random_sentence(rng: &mut impl Rng, sig: &Signature, max_depth: usize) -> Formula {
    let rels: Vec<(String, usize)> = sig.relations().map(|(n, a)| (n.to_string(), a)).collect();
    let mut bound = Vec::new();
    gen_formula(rng, &rels, max_depth.max(1), &mut bound)
}

fn gen_formula(
    rng: &mut impl Rng,
    rels: &[(String, usize)],
    depth: usize,
    bound: &mut Vec<&'static str>,
) -> Formula {
    if !bound.is_empty() && (depth == 0 || rng.random_bool(0.25)) {
        let var = |rng: &mut _| bound.choose(rng).expect("non-empty").to_string();
        if rng.random_bool(0.15) {
            return Formula::eq(var(rng), var(rng));
        }
        let (name, arity) = rels.choose(rng).expect("relations present").clone();
        let args: Vec<String> = (0..arity).map(|_| var(rng)).collect();
        return Formula::pred(name, args);
    }
    // With nothing bound, connectives must leave room for a quantifier below.
    let choice = if bound.is_empty() && depth < 2 {
        rng.random_range(4..6)
    } else {
        rng.random_range(0..6)
    };
    match choice {
        0 => Formula::not(gen_formula(rng, rels, depth - 1, bound)),
        1..=3 => {
            let a = gen_formula(rng, rels, depth - 1, bound);
            let b = gen_formula(rng, rels, depth - 1, bound);
            match choice {
                1 => Formula::and(a, b),
                2 => Formula::or(a, b),
                _ => Formula::implies(a, b),
            }
        }
        _ => {
            let v = *VARS.choose(rng).expect("non-empty");
            bound.push(v);
            let body = gen_formula(rng, rels, depth - 1, bound);
            bound.pop();
            if choice == 4 {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            }
        }
    }
}

/// A family of 1..=`max_index` random structures of size 1..=`max_size`,
/// each with at most `max_unknowns` unknown tuples, indexed `i0, i1, ...`.
pub fn random_family(
    rng: &mut impl Rng,
    sig: &Signature,
    max_index: usize,
    max_size: usize,
    max_unknowns: usize,
) -> IndexedFamily {
    let n = rng.random_range(1..=max_index);
    IndexedFamily::new((0..n).map(|i| {
        let size = rng.random_range(1..=max_size);
        (
            format!("i{i}"),
            random_structure(rng, sig, size, max_unknowns),
        )
    }))
    .expect("uniform family")
}

/// A random filter over the family's index set: the sets containing a
/// random non-empty core. Over a finite index set every filter has this
/// form.
pub fn random_filter(rng: &mut impl Rng, ground: &[String]) -> FilterSet {
    let n = ground.len();
    let core = IndexSet::from_bits(rng.random_range(1..1u64 << n));
    FilterSet::generated_by(ground.to_vec(), core).expect("valid ground")
}

/// A random ultrafilter over the index set, necessarily principal.
pub fn random_ultrafilter(rng: &mut impl Rng, ground: &[String]) -> FilterSet {
    FilterSet::principal(ground.to_vec(), rng.random_range(0..ground.len())).expect("valid ground")
}

/// Every total structure over `e1..e<size>` for the relations of `sig`,
/// built by a binary counter over all tuples.
pub fn total_structures(sig: &Signature, size: usize) -> Vec<PartialStructure> {
    let shape: Vec<(String, usize, usize)> = sig
        .relations()
        .map(|(n, a)| (n.to_string(), a, size.pow(a as u32)))
        .collect();
    let bits: usize = shape.iter().map(|s| s.2).sum();
    assert!(bits < 24, "too many tuples to enumerate");
    (0..1u64 << bits)
        .map(|mask| {
            let mut s = PartialStructure::new(Universe::numbered(size).expect("non-empty"));
            let mut offset = 0;
            for (name, arity, len) in &shape {
                let mut r = PartialRelation::filled(size, *arity, Verdict::Neg).expect("small");
                for idx in 0..*len {
                    if mask >> (offset + idx) & 1 == 1 {
                        r.set_index(idx, Verdict::Pos);
                    }
                }
                offset += len;
                s.add_relation(name.clone(), r).expect("fresh symbol");
            }
            s
        })
        .collect()
}

fn holds_classically(s: &PartialStructure, f: &Formula) -> Result<bool, String> {
    eval_total(s, f, &Assignment::new()).msg()
}

/// Whether some normal completion satisfies `f`, by listing them all.
fn quasi_oracle(a: &PartialStructure, f: &Formula) -> Result<bool, String> {
    for b in enumerate_normals(a) {
        if holds_classically(&b, f)? {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------- structures

fn relation_names(s: &PartialStructure) -> Vec<String> {
    s.relations().map(|(n, _)| n.to_string()).collect()
}

fn structure_laws(r: &mut Runner, cases: usize) {
    const S: &str = "structures";
    let arb = |rng: &mut ChaCha8Rng| {
        let sig = random_signature(rng);
        let size = rng.random_range(1..=3);
        random_structure(rng, &sig, size, 8)
    };

    r.law(S, "expansion is reflexive", cases, |rng| {
        let a = arb(rng);
        ensure(expands(&a, &a).msg()?, || {
            "a structure does not expand itself".into()
        })
    });

    r.law(S, "plus and minus completions are normal", cases, |rng| {
        let a = arb(rng);
        ensure(
            is_normal(&a, &plus_completion(&a)).msg()?
                && is_normal(&a, &minus_completion(&a)).msg()?,
            || "a completion is not normal".into(),
        )
    });

    r.law(
        S,
        "a total relation is unchanged by any expansion",
        cases,
        |rng| {
            let a = arb(rng);
            let b = random_expansion(rng, &a, true);
            if !expands(&a, &b).msg()? {
                return Err("generated expansion does not expand".into());
            }
            for name in relation_names(&a) {
                let (ra, rb) = (a.relation(&name).unwrap(), b.relation(&name).unwrap());
                if ra.is_total() && ra != rb {
                    return Err(format!("total relation {name} changed"));
                }
            }
            Ok(())
        },
    );

    r.law(
        S,
        "normal completions stay within the undecided bounds",
        cases,
        |rng| {
            let a = arb(rng);
            for b in enumerate_normals(&a) {
                for (name, ra) in a.relations() {
                    let rb = b.relation(name).unwrap();
                    for idx in 0..ra.verdicts().len() {
                        let (va, vb) = (ra.get_index(idx), rb.get_index(idx));
                        if va != Verdict::Unk && va != vb {
                            return Err(format!("{name} tuple {idx}: {va:?} became {vb:?}"));
                        }
                    }
                }
            }
            Ok(())
        },
    );

    r.law(
        S,
        "a total structure is its only normal completion",
        cases,
        |rng| {
            let sig = random_signature(rng);
            let size = rng.random_range(1..=3);
            let a = random_structure(rng, &sig, size, 0);
            let normals: Vec<_> = enumerate_normals(&a).collect();
            ensure(
                normals.len() == 1
                    && structures_equal(&normals[0], &a).msg()?
                    && is_normal(&a, &a).msg()?,
                || format!("{} normal completions", normals.len()),
            )
        },
    );

    r.law(
        S,
        "there are exactly 2^u distinct normal completions",
        cases,
        |rng| {
            let a = arb(rng);
            let u = a.unknown_count();
            let normals: Vec<_> = enumerate_normals(&a).collect();
            let distinct: BTreeSet<Vec<Vec<Verdict>>> = normals
                .iter()
                .map(|b| b.relations().map(|(_, r)| r.verdicts().to_vec()).collect())
                .collect();
            ensure(normals.len() == 1 << u && distinct.len() == 1 << u, || {
                format!(
                    "u={u}: {} listed, {} distinct",
                    normals.len(),
                    distinct.len()
                )
            })?;
            for b in &normals {
                ensure(is_normal(&a, b).msg()?, || {
                    "listed structure is not normal".into()
                })?;
            }
            Ok(())
        },
    );
}

// ---------------------------------------------------------------- semantics

/// The quasi-consequence failures on `R/1`, as (premises, conclusion) texts.
pub const NON_CONSEQUENCES: [(&[&str], &str); 5] = [
    (
        &["forall x (R(x))", "~forall x (R(x))"],
        "(forall x (R(x)) & ~forall x (R(x)))",
    ),
    (
        &[
            "(forall x (R(x)) -> (forall x (R(x)) & ~forall x (R(x))))",
            "forall x (R(x))",
        ],
        "(forall x (R(x)) & ~forall x (R(x)))",
    ),
    (
        &[
            "(forall x (R(x)) | (forall x (R(x)) & ~forall x (R(x))))",
            "~forall x (R(x))",
        ],
        "(forall x (R(x)) & ~forall x (R(x)))",
    ),
    (
        &[
            "(~(forall x (R(x)) & ~forall x (R(x))) -> forall x (R(x)))",
            "~forall x (R(x))",
        ],
        "~~(forall x (R(x)) & ~forall x (R(x)))",
    ),
    // Adding the antecedent to a premise set that entails the implication.
    (
        &["forall x (R(x))", "~forall x (R(x))"],
        "(forall x (R(x)) & ~forall x (R(x)))",
    ),
];

/// The quasi-consequence that does hold alongside the last failure above.
pub const CONSEQUENCE_THAT_HOLDS: (&[&str], &str) = (
    &["forall x (R(x))"],
    "(~forall x (R(x)) -> (forall x (R(x)) & ~forall x (R(x))))",
);

fn parse_case(
    sig: &Signature,
    premises: &[&str],
    conclusion: &str,
) -> Result<(Vec<Formula>, Formula), String> {
    let gamma = premises
        .iter()
        .map(|p| parse_sentence(p, sig))
        .collect::<Result<Vec<_>, _>>()
        .msg()?;
    Ok((gamma, parse_sentence(conclusion, sig).msg()?))
}

/// A random sentence that is valid by its shape about half the time.
fn mixed_sentence(rng: &mut ChaCha8Rng, sig: &Signature) -> Formula {
    let a = random_sentence(rng, sig, 3);
    match rng.random_range(0..4) {
        0 => Formula::or(a.clone(), Formula::not(a)),
        1 => {
            let b = random_sentence(rng, sig, 2);
            Formula::implies(a.clone(), Formula::implies(b, a))
        }
        _ => a,
    }
}

fn semantic_laws(r: &mut Runner, cases: usize) {
    const S: &str = "semantics";
    let sig = law_signature();

    r.law(
        S,
        "quasi-truth equals truth on total structures",
        cases,
        |rng| {
            let size = rng.random_range(1..=3);
            let a = random_structure(rng, &sig, size, 0);
            let f = random_sentence(rng, &sig, 4);
            let (q, t) = (quasi_true(&a, &f).msg()?, holds_classically(&a, &f)?);
            ensure(q == t, || format!("{f}: quasi {q}, classical {t}"))
        },
    );

    r.law(
        S,
        "quasi-truth agrees with the all-completions oracle",
        cases,
        |rng| {
            let size = rng.random_range(1..=3);
            let a = random_structure(rng, &sig, size, 8);
            let f = random_sentence(rng, &sig, 4);
            let (q, o) = (quasi_true(&a, &f).msg()?, quasi_oracle(&a, &f)?);
            ensure(q == o, || format!("{f}: search {q}, oracle {o}"))
        },
    );

    r.law(
        S,
        "a quasi-truth witness is a satisfying normal completion",
        cases,
        |rng| {
            let size = rng.random_range(1..=3);
            let a = random_structure(rng, &sig, size, 8);
            let f = random_sentence(rng, &sig, 4);
            match quasi_witness(&a, &f).msg()? {
                Some(w) => ensure(
                    is_normal(&a, &w).msg()? && holds_classically(&w, &f)?,
                    || format!("{f}: bad witness"),
                ),
                None => ensure(!quasi_oracle(&a, &f)?, || format!("{f}: missed witness")),
            }
        },
    );

    r.law(
        S,
        "strong-Kleene verdicts hold in every completion",
        cases,
        |rng| {
            let size = rng.random_range(1..=3);
            let a = random_structure(rng, &sig, size, 8);
            let f = random_sentence(rng, &sig, 4);
            let k = eval_kleene(&a, &f, &Assignment::new()).msg()?;
            let verdicts: Vec<bool> = enumerate_normals(&a)
                .map(|b| holds_classically(&b, &f))
                .collect::<Result<_, _>>()?;
            let sound = match k {
                Verdict3::True => verdicts.iter().all(|&v| v),
                Verdict3::False => verdicts.iter().all(|&v| !v),
                Verdict3::Unknown => true,
            };
            ensure(sound, || format!("{f}: Kleene says {k:?}"))
        },
    );

    let classical: BTreeMap<usize, Vec<PartialStructure>> =
        (1..=2).map(|n| (n, total_structures(&sig, n))).collect();
    let valid_up_to_two = |f: &Formula| -> Result<bool, String> {
        for s in classical.values().flatten() {
            if !holds_classically(s, f)? {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let mut valid = 0usize;
    r.law(
        S,
        "quasi-validity coincides with validity up to size 2",
        cases,
        |rng| {
            let f = mixed_sentence(rng, &sig);
            let q = quasi_valid_bounded(&f, &sig, 2).msg()?.holds();
            let c = valid_up_to_two(&f)?;
            valid += usize::from(c);
            ensure(q == c, || format!("{f}: quasi-valid {q}, valid {c}"))
        },
    );
    r.notes
        .push(format!("{valid} of {cases} validity cases were valid"));

    r.law(
        S,
        "quasi-equivalence coincides with equivalence up to size 2",
        cases,
        |rng| {
            let a = random_sentence(rng, &sig, 3);
            let b = match rng.random_range(0..3) {
                0 => Formula::not(Formula::not(a.clone())),
                1 => Formula::or(
                    a.clone(),
                    Formula::and(a.clone(), random_sentence(rng, &sig, 2)),
                ),
                _ => random_sentence(rng, &sig, 3),
            };
            let q = quasi_equivalent_bounded(&a, &b, &sig, 2).msg()?.holds();
            let c = valid_up_to_two(&Formula::and(
                Formula::implies(a.clone(), b.clone()),
                Formula::implies(b.clone(), a.clone()),
            ))?;
            ensure(q == c, || format!("{a} vs {b}: quasi {q}, classical {c}"))
        },
    );

    let r1 = Signature::relational([("R", 1)]).expect("valid signature");
    let mut examples = NON_CONSEQUENCES.iter();
    r.law(
        S,
        "classical inferences that fail for quasi-consequence",
        NON_CONSEQUENCES.len(),
        |_| {
            let (premises, conclusion) = examples.next().expect("one case per example");
            let (gamma, alpha) = parse_case(&r1, premises, conclusion)?;
            let outcome = quasi_consequence_bounded(&gamma, &alpha, &r1, 1).msg()?;
            let report = outcome
                .counterexample()
                .ok_or_else(|| format!("no counterexample to {alpha} at size 1"))?;
            ensure(report.replay().msg()?, || {
                "counterexample does not replay".into()
            })
        },
    );

    r.law(
        S,
        "a quasi-consequence that survives the same premises",
        1,
        |_| {
            let (gamma, alpha) =
                parse_case(&r1, CONSEQUENCE_THAT_HOLDS.0, CONSEQUENCE_THAT_HOLDS.1)?;
            let outcome = quasi_consequence_bounded(&gamma, &alpha, &r1, 3).msg()?;
            ensure(outcome.holds(), || "counterexample found".into())
        },
    );
}

// ---------------------------------------------------------------- products

/// For each product element tuple drawn at random, the index sets where the
/// factors give each verdict.
fn random_tuple(rng: &mut impl Rng, elems: &[ProductElement], arity: usize) -> Vec<ProductElement> {
    (0..arity)
        .map(|_| elems.choose(rng).expect("non-empty product").clone())
        .collect()
}

fn refs(t: &[ProductElement]) -> Vec<&ProductElement> {
    t.iter().collect()
}

fn relation_arities(fam: &IndexedFamily) -> Vec<(String, usize)> {
    fam.factors()[0]
        .relations()
        .map(|(n, r)| (n.to_string(), r.arity()))
        .collect()
}

/// Relation-wise `Pos` inclusion between structures over the same universe.
fn positive_parts_included(a: &PartialStructure, b: &PartialStructure) -> bool {
    a.universe() == b.universe()
        && a.relations().all(|(n, ra)| {
            let rb = b.relation(n).expect("shared signature");
            ra.verdicts()
                .iter()
                .zip(rb.verdicts())
                .all(|(&va, &vb)| va != Verdict::Pos || vb == Verdict::Pos)
        })
}

fn product_laws(r: &mut Runner, cases: usize) {
    const S: &str = "products";
    let sig = law_signature();
    let fam_of =
        |rng: &mut ChaCha8Rng, max_unknowns: usize| random_family(rng, &sig, 3, 2, max_unknowns);

    r.law(
        S,
        "unknown part of a product is read off its factors",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            for (name, _) in relation_arities(&fam) {
                let (left, right) = product_unknown_nonempty_characterization(&fam, &name).msg()?;
                ensure(left == right, || {
                    format!("{name}: product {left}, factors {right}")
                })?;
            }
            Ok(())
        },
    );

    r.law(
        S,
        "a product is total exactly when the factor condition holds",
        cases,
        |rng| {
            let fam = fam_of(rng, 2);
            let total = direct_product(&fam).msg()?.is_total();
            let condition = relation_arities(&fam).iter().all(|(name, _)| {
                let rels: Vec<&PartialRelation> = fam
                    .factors()
                    .iter()
                    .map(|f| f.relation(name).unwrap())
                    .collect();
                rels.iter().all(|r| r.count(Verdict::Unk) == 0)
                    || rels
                        .iter()
                        .any(|r| r.count(Verdict::Pos) + r.count(Verdict::Unk) == 0)
            });
            ensure(total == condition, || {
                format!("product total {total}, condition {condition}")
            })
        },
    );

    r.law(
        S,
        "products of normal completions are normal for the product",
        cases,
        |rng| {
            let fam = fam_of(rng, 2);
            let prod = direct_product(&fam).msg()?;
            for member in normals_of_family(&fam) {
                let p = direct_product(&member).msg()?;
                ensure(is_normal(&prod, &p).msg()?, || {
                    "product of normals is not normal".into()
                })?;
            }
            Ok(())
        },
    );

    r.law(
        S,
        "plus and minus completions commute with direct products",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let prod = direct_product(&fam).msg()?;
            ensure(
                structures_equal(
                    &plus_completion(&prod),
                    &direct_product(&family_plus(&fam)).msg()?,
                )
                .msg()?,
                || "plus completion differs".into(),
            )?;
            ensure(
                structures_equal(
                    &minus_completion(&prod),
                    &direct_product(&family_minus(&fam)).msg()?,
                )
                .msg()?,
                || "minus completion differs".into(),
            )
        },
    );

    r.law(
        S,
        "reduced verdicts do not depend on class representatives",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let f = random_filter(rng, fam.index());
            let classes = quotient(&fam, &f).msg()?;
            for (name, arity) in relation_arities(&fam) {
                let picked: Vec<usize> = (0..arity)
                    .map(|_| rng.random_range(0..classes.len()))
                    .collect();
                let reps: Vec<&ProductElement> =
                    picked.iter().map(|&c| &classes[c].representative).collect();
                let expected = reduced_verdict(&fam, &f, &name, &reps).msg()?;
                for _ in 0..4 {
                    let alt: Vec<&ProductElement> = picked
                        .iter()
                        .map(|&c| classes[c].members.choose(rng).expect("non-empty class"))
                        .collect();
                    let got = reduced_verdict(&fam, &f, &name, &alt).msg()?;
                    ensure(got == expected, || {
                        format!("{name}: {expected:?} vs {got:?}")
                    })?;
                }
            }
            Ok(())
        },
    );

    r.law(
        S,
        "filter equivalence is an equivalence, identity for the trivial filter",
        cases,
        |rng| {
            let fam = fam_of(rng, 0);
            let f = random_filter(rng, fam.index());
            let trivial = trivial_filter(fam.index().to_vec()).msg()?;
            let elems = fam.product_elements().msg()?;
            let eq = |u: &ProductElement, v: &ProductElement, f: &FilterSet| {
                crate::products::equivalent_mod_filter(u, v, f)
            };
            for u in &elems {
                ensure(eq(u, u, &f), || "not reflexive".into())?;
                for v in &elems {
                    ensure(eq(u, v, &f) == eq(v, u, &f), || "not symmetric".into())?;
                    ensure(eq(u, v, &trivial) == (u == v), || {
                        "trivial filter is not identity".into()
                    })?;
                    for w in &elems {
                        ensure(!(eq(u, v, &f) && eq(v, w, &f)) || eq(u, w, &f), || {
                            "not transitive".into()
                        })?;
                    }
                }
            }
            Ok(())
        },
    );

    r.law(
        S,
        "factor index sets under normal completions",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let normal = random_normal_family(rng, &fam);
            let (plus, minus) = (family_plus(&fam), family_minus(&fam));
            let elems = fam.product_elements().msg()?;
            for (name, arity) in relation_arities(&fam) {
                let t = random_tuple(rng, &elems, arity);
                let t = refs(&t);
                let pos_a = fam.verdict_set(&name, &t, Verdict::Pos);
                let unk_a = fam.verdict_set(&name, &t, Verdict::Unk);
                let pos_b = normal.verdict_set(&name, &t, Verdict::Pos);
                ensure(pos_a.is_subset(pos_b), || "positive set shrank".into())?;
                ensure(pos_b.is_subset(pos_a.union(unk_a)), || {
                    "positive set outgrew the undecided".into()
                })?;
                ensure(minus.verdict_set(&name, &t, Verdict::Pos) == pos_a, || {
                    "minus completion changed positives".into()
                })?;
                ensure(
                    plus.verdict_set(&name, &t, Verdict::Pos) == pos_a.union(unk_a),
                    || "plus completion positives differ".into(),
                )?;
            }
            Ok(())
        },
    );

    r.law(
        S,
        "reduced products of normal completions extend positive parts",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let f = random_filter(rng, fam.index());
            let normal = random_normal_family(rng, &fam);
            let (a, b) = (
                reduced_product(&fam, &f).msg()?,
                reduced_product(&normal, &f).msg()?,
            );
            ensure(positive_parts_included(&a, &b), || format!("filter {f}"))
        },
    );

    r.law(
        S,
        "minus completion commutes with reduced products",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let f = random_filter(rng, fam.index());
            let left = minus_completion(&reduced_product(&fam, &f).msg()?);
            let right = reduced_product(&family_minus(&fam), &f).msg()?;
            ensure(structures_equal(&left, &right).msg()?, || {
                format!("filter {f}")
            })
        },
    );

    r.law(
        S,
        "plus completion need not commute with reduced products",
        1,
        |_| {
            let fam = two_factor_family();
            let trivial = trivial_filter(fam.index().to_vec()).msg()?;
            let a = reduced_product(&fam, &trivial).msg()?;
            let b = reduced_product(&family_plus(&fam), &trivial).msg()?;
            ensure(!is_normal(&a, &b).msg()?, || {
                "plus family reduct is normal".into()
            })?;
            ensure(!structures_equal(&plus_completion(&a), &b).msg()?, || {
                "completions agree".into()
            })
        },
    );

    r.law(
        S,
        "ultraproducts of normal completions are normal",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let u = random_ultrafilter(rng, fam.index());
            let normal = random_normal_family(rng, &fam);
            let (a, b) = (
                ultraproduct(&fam, &u).msg()?,
                ultraproduct(&normal, &u).msg()?,
            );
            ensure(is_normal(&a, &b).msg()?, || format!("ultrafilter {u}"))
        },
    );

    r.law(
        S,
        "plus completion commutes with ultraproducts",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let u = random_ultrafilter(rng, fam.index());
            let left = plus_completion(&ultraproduct(&fam, &u).msg()?);
            let right = ultraproduct(&family_plus(&fam), &u).msg()?;
            ensure(structures_equal(&left, &right).msg()?, || {
                format!("ultrafilter {u}")
            })
        },
    );

    r.law(
        S,
        "filters and ultrafilters satisfy their defining conditions",
        cases,
        |rng| {
            let n = rng.random_range(1..=4);
            let ground: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
            let trivial = trivial_filter(ground.clone()).msg()?;
            ensure(trivial.is_filter(), || "trivial filter rejected".into())?;
            ensure(n == 1 || !trivial.is_ultrafilter(), || {
                "trivial filter is ultra".into()
            })?;
            let f = random_filter(rng, &ground);
            ensure(f.is_filter(), || format!("generated {f} rejected"))?;
            let u = random_ultrafilter(rng, &ground);
            ensure(u.is_ultrafilter(), || format!("principal {u} rejected"))?;
            let sets: Vec<IndexSet> = (0..rng.random_range(0..4))
                .map(|_| IndexSet::from_bits(rng.random_range(0..1u64 << n)))
                .collect();
            match crate::products::extend_to_ultrafilter(&sets, ground.clone()) {
                Ok(e) => ensure(
                    has_fip(&sets, n) && e.is_ultrafilter() && sets.iter().all(|&s| e.contains(s)),
                    || "bad extension".into(),
                ),
                Err(_) => ensure(!has_fip(&sets, n), || {
                    "extension refused despite FIP".into()
                }),
            }
        },
    );

    r.law(
        S,
        "ultrafilters contain a part of every member union",
        cases,
        |rng| {
            let n = rng.random_range(1..=4);
            let ground: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
            let u = random_ultrafilter(rng, &ground);
            for x in IndexSet::all_subsets(n) {
                for y in IndexSet::all_subsets(n) {
                    ensure(
                        !u.contains(x.union(y)) || u.contains(x) || u.contains(y),
                        || format!("{} ∪ {} in {u}", u.show(x), u.show(y)),
                    )?;
                }
            }
            Ok(())
        },
    );

    r.law(
        S,
        "quasi-true index sets are matched by a normal family",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let phi = random_sentence(rng, &sig, 3);
            let mut quasi = IndexSet::empty();
            let mut matched = Vec::new();
            for (i, a) in fam.factors().iter().enumerate() {
                match quasi_witness(a, &phi).msg()? {
                    Some(w) => {
                        quasi.insert(i);
                        matched.push((fam.index()[i].clone(), w));
                    }
                    None => matched.push((fam.index()[i].clone(), plus_completion(a))),
                }
            }
            let any = random_normal_family(rng, &fam);
            let sat = |g: &IndexedFamily| -> Result<IndexSet, String> {
                let mut out = IndexSet::empty();
                for (i, b) in g.factors().iter().enumerate() {
                    if holds_classically(b, &phi)? {
                        out.insert(i);
                    }
                }
                Ok(out)
            };
            ensure(sat(&any)?.is_subset(quasi), || {
                format!("{phi}: normal family exceeds quasi set")
            })?;
            let matched = IndexedFamily::new(matched).msg()?;
            for (a, b) in fam.factors().iter().zip(matched.factors()) {
                ensure(is_normal(a, b).msg()?, || {
                    "matching family is not normal".into()
                })?;
            }
            ensure(sat(&matched)? == quasi, || {
                format!("{phi}: matching family differs")
            })
        },
    );

    r.law(
        S,
        "ultraproducts of total structures satisfy the Łoś equivalence",
        cases,
        |rng| {
            let fam = fam_of(rng, 0);
            let phi = random_sentence(rng, &sig, 3);
            for i0 in 0..fam.len() {
                let u = FilterSet::principal(fam.index().to_vec(), i0).msg()?;
                let (left, right) = los_check(&fam, &u, &phi).msg()?;
                ensure(left == right, || {
                    format!("{phi} at {i0}: ultraproduct {left}, index set {right}")
                })?;
            }
            Ok(())
        },
    );

    let (mut converse_gaps, mut large) = (0usize, 0usize);
    r.law(
        S,
        "quasi-truth on a large index set transfers to the ultraproduct",
        cases,
        |rng| {
            let fam = fam_of(rng, 3);
            let phi = random_sentence(rng, &sig, 3);
            let u = random_ultrafilter(rng, fam.index());
            let (hypothesis, conclusion) = quasi_los_forward(&fam, &u, &phi).msg()?;
            large += usize::from(hypothesis);
            if conclusion && !hypothesis {
                converse_gaps += 1;
            }
            ensure(!hypothesis || conclusion, || format!("{phi} over {u}"))
        },
    );
    r.notes.push(format!(
        "forward transfer hypothesis held in {large} of {cases} cases; converse failed in {converse_gaps}"
    ));

    r.law(
        S,
        "compactness construction yields a partial model",
        cases.max(200) / 10,
        |rng| {
            let (gamma, models) = compactness_instance(rng, &sig)?;
            let w = compactness_witness(&gamma, &models).msg()?;
            ensure(has_fip(&w.star_sets, w.subsets.len()), || {
                "membership sets lack FIP".into()
            })?;
            ensure(w.ultrafilter.is_ultrafilter(), || {
                "not an ultrafilter".into()
            })?;
            ensure(
                w.star_sets.iter().all(|&s| w.ultrafilter.contains(s)),
                || "membership set missing".into(),
            )?;
            ensure(quasi_models(&w.structure, &gamma).msg()?, || {
                "not a partial model".into()
            })
        },
    );
}

/// Each factor replaced by a random normal completion of it.
pub fn random_normal_family(rng: &mut impl Rng, fam: &IndexedFamily) -> IndexedFamily {
    let completed: Vec<(String, PartialStructure)> = fam
        .index()
        .iter()
        .zip(fam.factors())
        .map(|(n, a)| (n.clone(), random_completion(rng, a)))
        .collect();
    IndexedFamily::new(completed).expect("same shape as the source family")
}

/// Factor `x` has `R` positive at `a1`; factor `y` has `R` unknown at `a2`.
pub fn two_factor_family() -> IndexedFamily {
    let factor = |elem: &str, v: Verdict| {
        PartialStructure::new(Universe::new([elem]).expect("valid name"))
            .with_relation("R", PartialRelation::filled(1, 1, v).expect("small"))
            .expect("fresh symbol")
    };
    IndexedFamily::new([
        ("x", factor("a1", Verdict::Pos)),
        ("y", factor("a2", Verdict::Unk)),
    ])
    .expect("uniform family")
}

/// Partial models keyed by the subset of sentence positions they satisfy.
pub type SubsetModels = BTreeMap<BTreeSet<usize>, PartialStructure>;

/// A sentence set of size 1..=3 quasi-true in a common random structure,
/// with a partial model found independently for each non-empty subset.
pub fn compactness_instance(
    rng: &mut impl Rng,
    sig: &Signature,
) -> Result<(Vec<Formula>, SubsetModels), String> {
    let size = rng.random_range(1..=2);
    let anchor = random_structure(rng, sig, size, 4);
    let k = rng.random_range(1..=3);
    let mut gamma = Vec::with_capacity(k);
    while gamma.len() < k {
        let phi = random_sentence(rng, sig, 3);
        if quasi_true(&anchor, &phi).msg()? && !gamma.contains(&phi) {
            gamma.push(phi);
        }
    }
    let mut models = BTreeMap::new();
    for bits in 1u64..1 << k {
        let subset: BTreeSet<usize> = (0..k).filter(|&j| bits >> j & 1 == 1).collect();
        let part: Vec<Formula> = subset.iter().map(|&j| gamma[j].clone()).collect();
        let model = find_partial_model(&part, sig, 2)
            .msg()?
            .ok_or_else(|| "no model for a subset".to_string())?;
        models.insert(subset, model);
    }
    Ok((gamma, models))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!("all".parse::<SuiteName>(), Ok(SuiteName::All));
        assert!("everything".parse::<SuiteName>().is_err());
    }

    #[test]
    fn generated_sentences_are_closed_and_shallow() {
        let sig = law_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let f = random_sentence(&mut rng, &sig, 4);
            assert!(f.is_sentence(), "{f}");
            assert!(f.depth() <= 4, "{f}");
        }
    }

    #[test]
    fn generated_structures_respect_bounds() {
        let sig = law_signature();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let size = rng.random_range(1..=3);
            let s = random_structure(&mut rng, &sig, size, 8);
            assert!(s.unknown_count() <= 8);
            assert!(s.validate(&sig).is_ok());
        }
    }

    #[test]
    fn total_structure_listing_is_complete() {
        let sig = Signature::relational([("R", 1)]).unwrap();
        let all = total_structures(&sig, 2);
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(PartialStructure::is_total));
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(SuiteName::Structures, 3, 10);
        let b = run_suite(SuiteName::Structures, 3, 10);
        assert_eq!(a, b);
        assert!(a.passed(), "{a}");
    }
}

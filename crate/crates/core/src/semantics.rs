//! Tarskian truth on total structures, strong-Kleene evaluation on partial
//! ones, and quasi-truth with its derived notions.
//!
//! A sentence is quasi-true in a partial structure when some normal
//! completion of the structure satisfies it classically. The quantifiers of
//! quasi-validity and quasi-consequence range over all partial structures;
//! here they are searched up to a universe-size bound.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Not;

use thiserror::Error;

use crate::structures::{
    plus_completion, PartialRelation, PartialStructure, StructureError, Universe, Verdict,
};
use crate::syntax::{free_variables, Formula, ParseError, Signature};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("structure is not total")]
    NotTotal,
    #[error("variable `{0}` is free but unassigned")]
    Unbound(String),
    #[error("expected a sentence, but `{0}` is free")]
    OpenFormula(String),
    #[error("variable `{var}` is assigned element {element}, outside the universe")]
    OutOfRange { var: String, element: usize },
    #[error(transparent)]
    Signature(#[from] ParseError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Strong-Kleene truth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict3 {
    True,
    False,
    Unknown,
}

impl Verdict3 {
    pub fn and(self, rhs: Self) -> Self {
        match (self, rhs) {
            (Verdict3::False, _) | (_, Verdict3::False) => Verdict3::False,
            (Verdict3::True, Verdict3::True) => Verdict3::True,
            _ => Verdict3::Unknown,
        }
    }

    pub fn or(self, rhs: Self) -> Self {
        !(!self).and(!rhs)
    }

    pub fn implies(self, rhs: Self) -> Self {
        (!self).or(rhs)
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict3::True
        } else {
            Verdict3::False
        }
    }
}

impl Not for Verdict3 {
    type Output = Self;

    fn not(self) -> Self {
        match self {
            Verdict3::True => Verdict3::False,
            Verdict3::False => Verdict3::True,
            Verdict3::Unknown => Verdict3::Unknown,
        }
    }
}

impl From<Verdict> for Verdict3 {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Pos => Verdict3::True,
            Verdict::Neg => Verdict3::False,
            Verdict::Unk => Verdict3::Unknown,
        }
    }
}

/// Values for free variables, as element positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<String, usize>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, var: impl Into<String>, element: usize) -> Self {
        self.0.insert(var.into(), element);
        self
    }

    pub fn get(&self, var: &str) -> Option<usize> {
        self.0.get(var).copied()
    }
}

type Env<'a> = Vec<(&'a str, usize)>;

fn lookup(env: &Env<'_>, v: &str) -> usize {
    env.iter()
        .rev()
        .find(|(n, _)| *n == v)
        .map(|&(_, e)| e)
        .expect("free variables are checked before evaluation")
}

fn prepare<'a>(
    s: &PartialStructure,
    f: &Formula,
    asg: &'a Assignment,
) -> Result<Env<'a>, EvalError> {
    f.check_signature(&s.signature().relational_part())?;
    let mut env = Vec::new();
    for v in free_variables(f) {
        let Some((name, &e)) = asg.0.get_key_value(&v) else {
            return Err(EvalError::Unbound(v));
        };
        if e >= s.size() {
            return Err(EvalError::OutOfRange { var: v, element: e });
        }
        env.push((name.as_str(), e));
    }
    Ok(env)
}

fn relation<'s>(s: &'s PartialStructure, sym: &str) -> &'s PartialRelation {
    s.relation(sym)
        .expect("predicates are checked against the signature before evaluation")
}

fn atom_index(r: &PartialRelation, env: &Env<'_>, vars: &[String]) -> usize {
    vars.iter()
        .fold(0, |acc, v| acc * r.universe_size() + lookup(env, v))
}

/// Classical satisfaction in a total structure.
pub fn eval_total(b: &PartialStructure, f: &Formula, asg: &Assignment) -> Result<bool, EvalError> {
    if !b.is_total() {
        return Err(EvalError::NotTotal);
    }
    let mut env = prepare(b, f, asg)?;
    Ok(total(b, f, &mut env))
}

fn total<'f>(b: &PartialStructure, f: &'f Formula, env: &mut Env<'f>) -> bool {
    match f {
        Formula::Pred(sym, vars) => {
            let r = relation(b, sym);
            r.get_index(atom_index(r, env, vars)) == Verdict::Pos
        }
        Formula::Eq(x, y) => lookup(env, x) == lookup(env, y),
        Formula::Not(g) => !total(b, g, env),
        Formula::And(l, r) => total(b, l, env) && total(b, r, env),
        Formula::Or(l, r) => total(b, l, env) || total(b, r, env),
        Formula::Implies(l, r) => !total(b, l, env) || total(b, r, env),
        Formula::Forall(v, g) => (0..b.size()).all(|e| {
            env.push((v, e));
            let t = total(b, g, env);
            env.pop();
            t
        }),
        Formula::Exists(v, g) => (0..b.size()).any(|e| {
            env.push((v, e));
            let t = total(b, g, env);
            env.pop();
            t
        }),
    }
}

/// Strong-Kleene evaluation. Unknown tuples evaluate to `Unknown`; equality
/// is always two-valued.
///
/// `True` means every normal completion satisfies the formula and `False`
/// means none does.
pub fn eval_kleene(
    a: &PartialStructure,
    f: &Formula,
    asg: &Assignment,
) -> Result<Verdict3, EvalError> {
    let mut env = prepare(a, f, asg)?;
    Ok(kleene(a, f, &mut env))
}

fn kleene<'f>(a: &PartialStructure, f: &'f Formula, env: &mut Env<'f>) -> Verdict3 {
    match f {
        Formula::Pred(sym, vars) => {
            let r = relation(a, sym);
            r.get_index(atom_index(r, env, vars)).into()
        }
        Formula::Eq(x, y) => Verdict3::from_bool(lookup(env, x) == lookup(env, y)),
        Formula::Not(g) => !kleene(a, g, env),
        Formula::And(l, r) => match kleene(a, l, env) {
            Verdict3::False => Verdict3::False,
            lv => lv.and(kleene(a, r, env)),
        },
        Formula::Or(l, r) => match kleene(a, l, env) {
            Verdict3::True => Verdict3::True,
            lv => lv.or(kleene(a, r, env)),
        },
        Formula::Implies(l, r) => match kleene(a, l, env) {
            Verdict3::False => Verdict3::True,
            lv => lv.implies(kleene(a, r, env)),
        },
        Formula::Forall(v, g) => {
            let mut acc = Verdict3::True;
            for e in 0..a.size() {
                env.push((v, e));
                acc = acc.and(kleene(a, g, env));
                env.pop();
                if acc == Verdict3::False {
                    break;
                }
            }
            acc
        }
        Formula::Exists(v, g) => {
            let mut acc = Verdict3::False;
            for e in 0..a.size() {
                env.push((v, e));
                acc = acc.or(kleene(a, g, env));
                env.pop();
                if acc == Verdict3::True {
                    break;
                }
            }
            acc
        }
    }
}

fn check_sentence(a: &PartialStructure, f: &Formula) -> Result<(), EvalError> {
    if let Some(v) = free_variables(f).into_iter().next() {
        return Err(EvalError::OpenFormula(v));
    }
    f.check_signature(&a.signature().relational_part())?;
    Ok(())
}

fn relations_in(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Pred(sym, _) => {
            out.insert(sym.clone());
        }
        Formula::Eq(..) => {}
        Formula::Not(g) | Formula::Forall(_, g) | Formula::Exists(_, g) => relations_in(g, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            relations_in(l, out);
            relations_in(r, out);
        }
    }
}

/// Whether some normal completion of `a` satisfies `sentence`.
pub fn quasi_true(a: &PartialStructure, sentence: &Formula) -> Result<bool, EvalError> {
    Ok(quasi_witness(a, sentence)?.is_some())
}

/// A normal completion of `a` satisfying `sentence`, if one exists.
///
/// Strong-Kleene evaluation decides the sentence outright when it can;
/// otherwise unknown tuples of the relations the sentence mentions are
/// resolved one at a time, depth first, pruning any branch the Kleene
/// evaluation already refutes.
pub fn quasi_witness(
    a: &PartialStructure,
    sentence: &Formula,
) -> Result<Option<PartialStructure>, EvalError> {
    check_sentence(a, sentence)?;
    let mut mentioned = BTreeSet::new();
    relations_in(sentence, &mut mentioned);
    let slots: Vec<(String, usize)> = a
        .unknown_positions()
        .into_iter()
        .filter(|(n, _)| mentioned.contains(*n))
        .map(|(n, i)| (n.to_string(), i))
        .collect();
    let mut work = a.clone();
    Ok(search(&mut work, sentence, &slots))
}

fn search(
    s: &mut PartialStructure,
    f: &Formula,
    slots: &[(String, usize)],
) -> Option<PartialStructure> {
    match kleene(s, f, &mut Vec::new()) {
        Verdict3::True => Some(plus_completion(s)),
        Verdict3::False => None,
        Verdict3::Unknown => {
            let ((name, idx), rest) = slots
                .split_first()
                .expect("a fully resolved structure evaluates classically");
            for v in [Verdict::Pos, Verdict::Neg] {
                s.relation_mut(name).unwrap().set_index(*idx, v);
                if let Some(w) = search(s, f, rest) {
                    s.relation_mut(name).unwrap().set_index(*idx, Verdict::Unk);
                    return Some(w);
                }
            }
            s.relation_mut(name).unwrap().set_index(*idx, Verdict::Unk);
            None
        }
    }
}

/// Every sentence of `gamma` is quasi-true in `a`, each possibly through a
/// different completion.
pub fn quasi_models(a: &PartialStructure, gamma: &[Formula]) -> Result<bool, EvalError> {
    for g in gamma {
        if !quasi_true(a, g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every partial structure over `e1..e<size>` interpreting the relation
/// symbols of `sig`, each once.
///
/// Structures are produced in odometer order over the tuples (relation name,
/// then tuple), cycling each tuple through `Pos`, `Neg`, `Unk` with the first
/// tuple varying fastest.
pub fn enumerate_partial_structures(
    sig: &Signature,
    size: usize,
) -> Result<PartialStructures, StructureError> {
    let universe = Universe::numbered(size)?;
    let mut shapes = Vec::new();
    for (name, arity) in sig.relations() {
        let table = PartialRelation::filled(size, arity, Verdict::Pos)?;
        shapes.push((name.to_string(), table));
    }
    let digits = shapes.iter().map(|(_, r)| r.verdicts().len()).sum();
    Ok(PartialStructures {
        universe,
        shapes,
        digits: Some(vec![0; digits]),
    })
}

#[derive(Debug, Clone)]
pub struct PartialStructures {
    universe: Universe,
    shapes: Vec<(String, PartialRelation)>,
    digits: Option<Vec<u8>>,
}

impl Iterator for PartialStructures {
    type Item = PartialStructure;

    fn next(&mut self) -> Option<PartialStructure> {
        let digits = self.digits.as_mut()?;
        let mut s = PartialStructure::new(self.universe.clone());
        let mut k = 0;
        for (name, shape) in &self.shapes {
            let mut r = shape.clone();
            for i in 0..r.verdicts().len() {
                r.set_index(i, Verdict::ALL[digits[k] as usize]);
                k += 1;
            }
            s.add_relation(name.clone(), r)
                .expect("shapes come from a valid signature");
        }
        let mut carried = true;
        for d in digits.iter_mut() {
            *d += 1;
            if *d < 3 {
                carried = false;
                break;
            }
            *d = 0;
        }
        if carried {
            self.digits = None;
        }
        Some(s)
    }
}

/// A partial structure in which every premise is quasi-true and the
/// conclusion is quasi-false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterexampleReport {
    pub structure: PartialStructure,
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl CounterexampleReport {
    /// Re-checks the stated verdicts.
    pub fn replay(&self) -> Result<bool, EvalError> {
        Ok(quasi_models(&self.structure, &self.premises)?
            && !quasi_true(&self.structure, &self.conclusion)?)
    }
}

/// Outcome of a bounded search. `NoCounterexample` is not a proof: it only
/// covers universes up to `max_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bounded {
    NoCounterexample { max_size: usize },
    Counterexample(Box<CounterexampleReport>),
}

impl Bounded {
    pub fn holds(&self) -> bool {
        matches!(self, Bounded::NoCounterexample { .. })
    }

    pub fn counterexample(&self) -> Option<&CounterexampleReport> {
        match self {
            Bounded::Counterexample(r) => Some(r),
            Bounded::NoCounterexample { .. } => None,
        }
    }
}

fn check_closed(sig: &Signature, fs: &[&Formula]) -> Result<(), EvalError> {
    for f in fs {
        if let Some(v) = free_variables(f).into_iter().next() {
            return Err(EvalError::OpenFormula(v));
        }
        f.check_signature(sig)?;
    }
    Ok(())
}

/// Searches universes of size `1..=max_size` for a partial model of `gamma`
/// that is not a partial model of `alpha`; the first one found in
/// enumeration order is reported.
pub fn quasi_consequence_bounded(
    gamma: &[Formula],
    alpha: &Formula,
    sig: &Signature,
    max_size: usize,
) -> Result<Bounded, EvalError> {
    let sig = sig.relational_part();
    let all: Vec<&Formula> = gamma.iter().chain([alpha]).collect();
    check_closed(&sig, &all)?;
    for size in 1..=max_size {
        for s in enumerate_partial_structures(&sig, size)? {
            if quasi_models(&s, gamma)? && !quasi_true(&s, alpha)? {
                return Ok(Bounded::Counterexample(Box::new(CounterexampleReport {
                    structure: s,
                    premises: gamma.to_vec(),
                    conclusion: alpha.clone(),
                })));
            }
        }
    }
    Ok(Bounded::NoCounterexample { max_size })
}

pub fn quasi_valid_bounded(
    alpha: &Formula,
    sig: &Signature,
    max_size: usize,
) -> Result<Bounded, EvalError> {
    quasi_consequence_bounded(&[], alpha, sig, max_size)
}

/// Both directions of quasi-consequence; `a => b` is searched first.
pub fn quasi_equivalent_bounded(
    a: &Formula,
    b: &Formula,
    sig: &Signature,
    max_size: usize,
) -> Result<Bounded, EvalError> {
    let forward = quasi_consequence_bounded(std::slice::from_ref(a), b, sig, max_size)?;
    if !forward.holds() {
        return Ok(forward);
    }
    quasi_consequence_bounded(std::slice::from_ref(b), a, sig, max_size)
}

/// The first partial structure of size at most `max_size` quasi-modelling
/// `gamma`.
pub fn find_partial_model(
    gamma: &[Formula],
    sig: &Signature,
    max_size: usize,
) -> Result<Option<PartialStructure>, EvalError> {
    let sig = sig.relational_part();
    check_closed(&sig, &gamma.iter().collect::<Vec<_>>())?;
    for size in 1..=max_size {
        for s in enumerate_partial_structures(&sig, size)? {
            if quasi_models(&s, gamma)? {
                return Ok(Some(s));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{enumerate_normals, minus_completion, Universe};
    use crate::syntax::parse_sentence;

    fn sig() -> Signature {
        Signature::relational([("R", 1)]).unwrap()
    }

    fn s(text: &str) -> Formula {
        parse_sentence(text, &sig()).unwrap()
    }

    fn single_unknown() -> PartialStructure {
        PartialStructure::new(Universe::new(["a"]).unwrap())
            .with_relation("R", PartialRelation::filled(1, 1, Verdict::Unk).unwrap())
            .unwrap()
    }

    const ALL_R: &str = "forall x (R(x))";
    const NOT_ALL_R: &str = "~forall x (R(x))";
    const CONTRADICTION: &str = "(forall x (R(x)) & ~forall x (R(x)))";

    #[test]
    fn kleene_tables() {
        use Verdict3::*;
        assert_eq!(Unknown.and(False), False);
        assert_eq!(Unknown.and(True), Unknown);
        assert_eq!(Unknown.or(True), True);
        assert_eq!(Unknown.or(False), Unknown);
        assert_eq!(False.implies(Unknown), True);
        assert_eq!(Unknown.implies(True), True);
        assert_eq!(!Unknown, Unknown);
    }

    #[test]
    fn completions_of_single_unknown() {
        let a = single_unknown();
        let none = Assignment::new();
        assert!(eval_total(&plus_completion(&a), &s(ALL_R), &none).unwrap());
        assert!(eval_total(&minus_completion(&a), &s(NOT_ALL_R), &none).unwrap());
        assert_eq!(eval_total(&a, &s(ALL_R), &none), Err(EvalError::NotTotal));
    }

    #[test]
    fn identity_is_two_valued() {
        let a = single_unknown();
        let f = s("forall x (x = x)");
        assert_eq!(
            eval_kleene(&a, &f, &Assignment::new()).unwrap(),
            Verdict3::True
        );
        assert!(eval_total(&plus_completion(&a), &f, &Assignment::new()).unwrap());
        assert_eq!(
            eval_kleene(&a, &s(ALL_R), &Assignment::new()).unwrap(),
            Verdict3::Unknown
        );
    }

    #[test]
    fn quasi_truth_of_single_unknown() {
        let a = single_unknown();
        assert!(quasi_true(&a, &s(ALL_R)).unwrap());
        assert!(quasi_true(&a, &s(NOT_ALL_R)).unwrap());
        assert!(!quasi_true(&a, &s(CONTRADICTION)).unwrap());
        assert!(quasi_models(&a, &[s(ALL_R), s(NOT_ALL_R)]).unwrap());
        assert!(quasi_models(&a, &[]).unwrap());
        assert!(!quasi_models(&a, &[s(CONTRADICTION)]).unwrap());
        let w = quasi_witness(&a, &s(ALL_R)).unwrap().unwrap();
        assert_eq!(w, plus_completion(&a));
    }

    #[test]
    fn open_formulas_and_unbound_variables() {
        let a = single_unknown();
        let open = Formula::pred("R", ["x"]);
        assert_eq!(
            quasi_true(&a, &open),
            Err(EvalError::OpenFormula("x".into()))
        );
        assert_eq!(
            eval_kleene(&a, &open, &Assignment::new()),
            Err(EvalError::Unbound("x".into()))
        );
        assert_eq!(
            eval_kleene(&a, &open, &Assignment::new().bind("x", 0)).unwrap(),
            Verdict3::Unknown
        );
        assert!(matches!(
            eval_kleene(&a, &open, &Assignment::new().bind("x", 3)),
            Err(EvalError::OutOfRange { .. })
        ));
        assert!(matches!(
            quasi_true(&a, &Formula::exists("x", Formula::pred("S", ["x"]))),
            Err(EvalError::Signature(_))
        ));
    }

    #[test]
    fn structure_counts() {
        let r1 = Signature::relational([("R", 1)]).unwrap();
        let r2 = Signature::relational([("R", 2)]).unwrap();
        assert_eq!(enumerate_partial_structures(&r1, 1).unwrap().count(), 3);
        assert_eq!(enumerate_partial_structures(&r1, 2).unwrap().count(), 9);
        let all: Vec<_> = enumerate_partial_structures(&r2, 2).unwrap().collect();
        assert_eq!(all.len(), 81);
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 81);
    }

    #[test]
    fn contradiction_does_not_follow_from_both_sides() {
        let out =
            quasi_consequence_bounded(&[s(ALL_R), s(NOT_ALL_R)], &s(CONTRADICTION), &sig(), 1)
                .unwrap();
        let cx = out.counterexample().expect("counterexample at size 1");
        assert_eq!(cx.structure.unknown_count(), 1);
        assert!(cx.replay().unwrap());
    }

    #[test]
    fn modus_ponens_fails() {
        let phi = s(ALL_R);
        let psi = s(CONTRADICTION);
        let gamma = [Formula::implies(phi.clone(), psi.clone()), phi];
        let out = quasi_consequence_bounded(&gamma, &psi, &sig(), 1).unwrap();
        assert!(out.counterexample().unwrap().replay().unwrap());
    }

    #[test]
    fn reflexive_consequence_holds() {
        for text in [ALL_R, NOT_ALL_R, CONTRADICTION, "exists x (R(x))"] {
            let f = s(text);
            let out = quasi_consequence_bounded(std::slice::from_ref(&f), &f, &sig(), 2).unwrap();
            assert_eq!(out, Bounded::NoCounterexample { max_size: 2 });
        }
    }

    #[test]
    fn validity_examples() {
        assert!(quasi_valid_bounded(&s("forall x (x = x)"), &sig(), 2)
            .unwrap()
            .holds());
        assert!(
            quasi_valid_bounded(&s("forall x ((R(x) | ~R(x)))"), &sig(), 2)
                .unwrap()
                .holds()
        );
        let out = quasi_valid_bounded(&s(ALL_R), &sig(), 2).unwrap();
        let cx = out.counterexample().unwrap();
        // A structure with no unknowns and R negative everywhere.
        assert!(cx.structure.is_total());
        assert_eq!(cx.structure.relation("R").unwrap().count(Verdict::Pos), 0);
    }

    #[test]
    fn equivalence_examples() {
        let a = s(ALL_R);
        assert!(quasi_equivalent_bounded(&a, &a, &sig(), 2).unwrap().holds());
        let out = quasi_equivalent_bounded(&a, &s(NOT_ALL_R), &sig(), 2).unwrap();
        assert!(out.counterexample().unwrap().structure.is_total());
        assert!(
            quasi_equivalent_bounded(&a, &s("~exists x (~R(x))"), &sig(), 2)
                .unwrap()
                .holds()
        );
    }

    #[test]
    fn witness_is_a_satisfying_normal() {
        let r2 = Signature::relational([("R", 2)]).unwrap();
        let f = parse_sentence("forall x (exists y ((R(x,y) & ~R(y,x))))", &r2).unwrap();
        for a in enumerate_partial_structures(&r2, 2).unwrap() {
            let oracle =
                enumerate_normals(&a).any(|b| eval_total(&b, &f, &Assignment::new()).unwrap());
            match quasi_witness(&a, &f).unwrap() {
                Some(w) => {
                    assert!(oracle);
                    assert!(crate::structures::is_normal(&a, &w).unwrap());
                    assert!(eval_total(&w, &f, &Assignment::new()).unwrap());
                }
                None => assert!(!oracle),
            }
        }
    }

    mod properties {
        use super::super::*;
        use crate::laws::{law_signature, random_sentence, random_structure};
        use crate::structures::enumerate_normals;
        use proptest::prelude::*;
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;

        fn case(seed: u64, max_unknowns: usize) -> (PartialStructure, Formula) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sig = law_signature();
            let size = rng.random_range(1..=3);
            let a = random_structure(&mut rng, &sig, size, max_unknowns);
            (a, random_sentence(&mut rng, &sig, 4))
        }

        fn completions_satisfying(a: &PartialStructure, f: &Formula) -> Vec<bool> {
            enumerate_normals(a)
                .map(|b| eval_total(&b, f, &Assignment::new()).unwrap())
                .collect()
        }

        proptest! {
            #[test]
            fn quasi_truth_is_truth_when_total(seed in any::<u64>()) {
                let (a, f) = case(seed, 0);
                prop_assert_eq!(quasi_true(&a, &f).unwrap(), eval_total(&a, &f, &Assignment::new()).unwrap());
            }

            #[test]
            fn quasi_truth_matches_completion_oracle(seed in any::<u64>()) {
                let (a, f) = case(seed, 8);
                let oracle = completions_satisfying(&a, &f).into_iter().any(|v| v);
                prop_assert_eq!(quasi_true(&a, &f).unwrap(), oracle);
            }

            #[test]
            fn kleene_verdicts_are_sound(seed in any::<u64>()) {
                let (a, f) = case(seed, 8);
                let all = completions_satisfying(&a, &f);
                match eval_kleene(&a, &f, &Assignment::new()).unwrap() {
                    Verdict3::True => prop_assert!(all.iter().all(|&v| v)),
                    Verdict3::False => prop_assert!(all.iter().all(|&v| !v)),
                    Verdict3::Unknown => {}
                }
            }
        }
    }
}

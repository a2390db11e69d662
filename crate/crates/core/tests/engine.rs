mod common;

use std::collections::BTreeMap;

use common::{poset, random_expr};
use gradedlogic::engine::{saturate, Comparison, Fact, GradeMap, KnowledgeBase, Rule};
use gradedlogic::files::load_kb_file;
use gradedlogic::formulas::Formula;
use gradedlogic::grades::{GeneratorPoset, GradeNF};
use gradedlogic::kripke::{find_countermodel, random_interpretation, SearchMode};
use gradedlogic::proofs::check_proof;
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ATOMS: [&str; 5] = ["a", "b", "c", "d", "e"];

fn random_kb<R: Rng>(rng: &mut R, p: &GeneratorPoset) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new(p.clone());
    for _ in 0..rng.random_range(1..=3) {
        let atom = *ATOMS.choose(rng).unwrap();
        kb.facts.push(Fact::new(p, random_expr(rng, p, 2), atom).unwrap());
    }
    for _ in 0..rng.random_range(1..=4) {
        let k = rng.random_range(1..=2);
        let body: Vec<String> = ATOMS.choose_multiple(rng, k).map(|a| a.to_string()).collect();
        let head = *ATOMS.choose(rng).unwrap();
        kb.rules.push(Rule::new(p, random_expr(rng, p, 2), body, head).unwrap());
    }
    kb
}

/// Naive fixpoint: recompute every atom from scratch until nothing moves.
fn oracle_grades(kb: &KnowledgeBase) -> BTreeMap<String, GradeNF> {
    let p = &kb.poset;
    let mut best: BTreeMap<String, GradeNF> = BTreeMap::new();
    loop {
        let mut next: BTreeMap<String, GradeNF> = BTreeMap::new();
        let mut raise = |atom: &str, g: GradeNF| {
            let merged = match next.get(atom) {
                Some(old) => p.join(old, &g),
                None => g,
            };
            next.insert(atom.to_string(), merged);
        };
        for f in &kb.facts {
            raise(&f.atom, f.grade.clone());
        }
        for r in &kb.rules {
            let mut g = Some(r.grade.clone());
            for b in &r.body {
                g = match (g, best.get(b)) {
                    (Some(g), Some(bg)) => Some(p.meet(&g, bg)),
                    _ => None,
                };
            }
            if let Some(g) = g {
                raise(&r.head, g);
            }
        }
        if next == best {
            return best;
        }
        best = next;
    }
}

fn premises_atoms(kb: &KnowledgeBase) -> Vec<String> {
    let mut atoms: Vec<String> = kb.facts.iter().map(|f| f.atom.clone()).collect();
    for r in &kb.rules {
        atoms.extend(r.body.iter().cloned());
        atoms.push(r.head.clone());
    }
    atoms.sort();
    atoms.dedup();
    atoms
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn saturation_matches_naive_fixpoint(seed in any::<u64>()) {
        let p = poset("theater.poset");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kb = random_kb(&mut rng, &p);
        prop_assert_eq!(saturate(&kb).grades(), oracle_grades(&kb));
    }

    #[test]
    fn saturation_ignores_premise_order(seed in any::<u64>()) {
        let p = poset("antichain.poset");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kb = random_kb(&mut rng, &p);
        let mut shuffled = kb.clone();
        shuffled.facts.shuffle(&mut rng);
        shuffled.rules.shuffle(&mut rng);
        prop_assert_eq!(saturate(&kb).grades(), saturate(&shuffled).grades());
    }

    #[test]
    fn more_knowledge_never_lowers_grades(seed in any::<u64>()) {
        let p = poset("theater.poset");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kb = random_kb(&mut rng, &p);
        let before: GradeMap = saturate(&kb).grades();
        let mut bigger = kb.clone();
        let extra = random_kb(&mut rng, &p);
        bigger.facts.extend(extra.facts);
        bigger.rules.extend(extra.rules);
        let after = saturate(&bigger).grades();
        for (atom, g) in &before {
            prop_assert!(p.grade_leq(g, &after[atom]), "{atom}");
        }
    }

    #[test]
    fn traces_are_accepted_and_conclude_the_grade(seed in any::<u64>()) {
        let p = poset("theater.poset");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kb = random_kb(&mut rng, &p);
        let sat = saturate(&kb);
        for (atom, g) in sat.grades() {
            let q = sat.query(&atom).unwrap();
            prop_assert_eq!(&q.grade, &g);
            let report = check_proof(&q.proof);
            prop_assert!(report.accepted, "{}\n{:?}", q.proof.body_text(), report.diagnostics);
            let Some(Formula::Implies(h, c)) = q.proof.conclusion() else {
                panic!("trace does not conclude an implication");
            };
            prop_assert_eq!(Some((**h).clone()), Formula::and_all(q.premises.clone()));
            let Formula::Boxed(e, body) = &**c else { panic!("consequent is not boxed") };
            prop_assert_eq!(p.normalize(e).unwrap(), g);
            prop_assert_eq!(&**body, &Formula::atom(&atom));
        }
    }

    #[test]
    fn derived_grades_hold_in_models_of_the_premises(seed in any::<u64>()) {
        let p = poset("antichain.poset");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kb = random_kb(&mut rng, &p);
        let premises = Formula::and_all(kb.premises()).unwrap();
        let grades = saturate(&kb).grades();
        let atoms = premises_atoms(&kb);
        for _ in 0..30 {
            let n = rng.random_range(1..=3);
            let i = random_interpretation(&p, &mut rng, n, &atoms);
            let holds = i.truth_table(&premises).unwrap();
            for (atom, g) in &grades {
                let goal = Formula::boxed(p.nf_to_expr(g), Formula::atom(atom));
                let t = i.truth_table(&goal).unwrap();
                for w in 0..n {
                    prop_assert!(!holds[w] || t[w], "{atom}");
                }
            }
        }
    }
}

#[test]
fn bounded_search_finds_no_countermodel_to_derived_grades() {
    let p = poset("antichain.poset");
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..8 {
        let kb = random_kb(&mut rng, &p);
        let premises = Formula::and_all(kb.premises()).unwrap();
        for (atom, g) in saturate(&kb).grades() {
            let goal = Formula::implies(premises.clone(), Formula::boxed(p.nf_to_expr(&g), Formula::atom(&atom)));
            let mode = SearchMode::Randomized { seed: 3, samples: 300 };
            assert!(!find_countermodel(&goal, &p, 3, mode).unwrap().is_countermodel());
        }
    }
}

#[test]
fn stronger_grade_is_not_entailed() {
    let (_, kb) = load_kb_file(&common::data("example1.kb")).unwrap();
    let p = &kb.poset;
    let premises = Formula::and_all(kb.premises()).unwrap();
    let goal = Formula::implies(premises, Formula::boxed(p.nf_to_expr(&p.parse_grade("alpha").unwrap()), Formula::atom("ill")));
    let mode = SearchMode::Randomized { seed: 1, samples: 5000 };
    assert!(find_countermodel(&goal, p, 2, mode).unwrap().is_countermodel());
}

#[test]
fn compare_on_shipped_examples() {
    let (_, kb) = load_kb_file(&common::data("example3.kb")).unwrap();
    let sat = saturate(&kb);
    assert_eq!(sat.compare("late", "restaurant").unwrap(), Comparison::FirstHigher);
    assert_eq!(sat.compare("restaurant", "late").unwrap(), Comparison::SecondHigher);
    assert_eq!(sat.compare("late", "late").unwrap(), Comparison::Equal);
    let (_, kb) = load_kb_file(&common::data("example1.kb")).unwrap();
    assert_eq!(saturate(&kb).compare("cold", "rain").unwrap(), Comparison::Incomparable);
}

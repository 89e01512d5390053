use super::*;
use crate::genome::apply_edits;
use crate::minilang::{parse_program, parse_statement, parse_suite, print_program, validate_program};
use crate::pipeline::Prepared;

const BUGGY: &str = r#"
module m {
    pub fn inc(x: int) -> int {
        x = x + 1
        return x
    }

    pub fn inc2(x: int) -> int {
        x = x + 1
        x = x + 3
        return x
    }
}
"#;

const TESTS: &str = "
test a: inc2(0) == 2
test b: inc2(5) == 7
test c: inc(1) == 2
test d: inc(-1) == 0
";

fn prepared(config: &SearchConfig) -> Prepared {
    Prepared::new(parse_program(BUGGY).unwrap(), parse_suite(TESTS).unwrap(), config).unwrap()
}

fn small() -> SearchConfig {
    SearchConfig {
        population: 10,
        generations: 10,
        seed: 7,
        ..SearchConfig::default()
    }
}

#[test]
fn weighted_failure_rate_by_hand() {
    let p = parse_program("module m { pub fn f(x: int) -> int { return x + 1 } }").unwrap();
    let neg = parse_suite("test n0: f(0) == 1\ntest n1: f(1) == 2\ntest n2: f(2) == 3\ntest n3: f(3) == 0").unwrap();
    let mut pos_text = String::new();
    for i in 0..10 {
        let want = if i < 2 { 0 } else { i + 1 };
        pos_text.push_str(&format!("test p{i}: f({i}) == {want}\n"));
    }
    let pos = parse_suite(&pos_text).unwrap();
    let settings = FitnessSettings {
        w: 0.5,
        max_edits: None,
        sample_size: None,
        suppression_rules: false,
        step_limit: 1000,
    };
    let mut ev = Evaluator::new(&p, &[], &neg, &pos, settings);
    let same = Edit {
        kind: OpKind::Replace,
        target: p.resolve_id("m:f:0").unwrap(),
        ingredient: Some(parse_statement("return x + 1").unwrap()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let obj = ev.evaluate_edits(&[same], &mut rng);
    assert!(obj.valid);
    assert_eq!(obj.f1, 1);
    assert!((obj.f2 - 0.35).abs() < 1e-12);
    assert_eq!(ev.evaluate_edits(&[], &mut rng), Objectives::INVALID);
    assert_eq!(ev.evaluations(), 2);
}

#[test]
fn step_limit_makes_a_patch_invalid() {
    let p = parse_program("module m { pub fn f(x: int) -> int { while x > 0 { x = x - 1 }; return x } }").unwrap();
    let neg = parse_suite("test n: f(3) == 1").unwrap();
    let settings = FitnessSettings {
        w: 0.5,
        max_edits: None,
        sample_size: None,
        suppression_rules: false,
        step_limit: 1000,
    };
    let mut ev = Evaluator::new(&p, &[], &neg, &[], settings);
    let spin = Edit {
        kind: OpKind::Delete,
        target: p.resolve_id("m:f:1").unwrap(),
        ingredient: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(!ev.evaluate_edits(&[spin], &mut rng).valid);
}

#[test]
fn nsga2_repairs_the_redundant_bug() {
    let config = small();
    let prep = prepared(&config);
    let result = run_nsga2(prep.problem(), &config);
    assert!(result.success());
    assert_eq!(result.evaluations, config.budget());
    assert_eq!(result.generations.len(), config.generations);
    let full = prep.suite.clone();
    for patch in &result.archive {
        let fixed = apply_edits(&prep.program, &patch.edits);
        assert!(validate_program(&fixed).is_ok());
        assert!(passes_all(&prep.program, &patch.edits, &full, config.step_limit));
    }
    assert_eq!(result.smallest_size(), Some(1));
    assert!(result.evaluations_to_first.unwrap() <= result.evaluations);
}

#[test]
fn best_failure_rate_never_increases() {
    let config = small();
    let prep = prepared(&config);
    for algorithm in [Algorithm::Nsga2, Algorithm::SingleObjective] {
        let result = run_search(algorithm, prep.problem(), &config);
        let best: Vec<f64> = result
            .generations
            .iter()
            .map(|g| g.best_f2.unwrap_or(f64::INFINITY))
            .collect();
        assert!(best.windows(2).all(|w| w[1] <= w[0]), "{algorithm:?}: {best:?}");
    }
}

#[test]
fn runs_are_reproducible() {
    let config = small();
    let prep = prepared(&config);
    for algorithm in [Algorithm::Nsga2, Algorithm::SingleObjective, Algorithm::Random] {
        let a = run_search(algorithm, prep.problem(), &config);
        let b = run_search(algorithm, prep.problem(), &config);
        assert_eq!(a.archive, b.archive);
        assert_eq!(a.generations, b.generations);
    }
}

#[test]
fn random_search_spends_exactly_the_budget() {
    let config = small();
    let prep = prepared(&config);
    let result = run_random_search(prep.problem(), &config);
    assert_eq!(result.evaluations, config.budget());
    assert!(result.archive.iter().all(|p| !p.edits.is_empty()));
}

#[test]
fn deletion_cannot_fix_a_replace_only_bug() {
    let config = small();
    let prep = prepared(&config);
    let result = run_deletion_baseline(prep.problem(), &config);
    assert!(!result.success());
    let again = run_deletion_baseline(prep.problem(), &config);
    assert_eq!(result.evaluations, again.evaluations);
}

#[test]
fn deletion_dodges_an_underspecified_test() {
    let src = r#"
module m {
    pub fn clamp(x: int) -> int {
        if x > 10 {
            x = 10
        }
        x = x * 2
        return x
    }
}
"#;
    let suite = parse_suite("test small: clamp(3) == 3\ntest big: clamp(20) == 10").unwrap();
    let config = SearchConfig::default();
    let prep = Prepared::new(parse_program(src).unwrap(), suite, &config).unwrap();
    let result = run_deletion_baseline(prep.problem(), &config);
    assert!(result.success());
    let fixed = apply_edits(&prep.program, &result.archive[0].edits);
    assert!(!print_program(&fixed).contains("x * 2"));
}

#[test]
fn deletion_variants_cover_skips() {
    let p = parse_program("module m { pub fn f(x: int) -> int { if x > 0 { x = 1 }; return x } }").unwrap();
    let stmt = p.find_statement(p.resolve_id("m:f:0").unwrap()).unwrap();
    let kinds: Vec<OpKind> = deletion_variants(&p, stmt).iter().map(|e| e.kind).collect();
    assert_eq!(kinds, vec![OpKind::Delete, OpKind::Replace, OpKind::Insert]);
    let ret = deletion_variants(&p, stmt).pop().unwrap();
    assert_eq!(crate::minilang::stmt_inline(ret.ingredient.as_ref().unwrap()), "return 0");
}

#[test]
fn edit_cap_keeps_the_most_suspicious_edits() {
    let config = SearchConfig {
        max_edits: Some(1),
        ..small()
    };
    let prep = prepared(&config);
    let settings = config.fitness_settings();
    let ev = Evaluator::new(
        &prep.program,
        &prep.points,
        &prep.partition.negative,
        &prep.partition.positive,
        settings,
    );
    let mut patch = Patch::empty(prep.points.len());
    for j in 0..prep.points.len() {
        patch.b[j] = true;
        patch.u[j] = 0;
    }
    let edits = ev.edits_of(&patch);
    assert!(edits.len() <= 1);
    if let Some(e) = edits.first() {
        let first_effective = crate::genome::decode(&patch, &prep.points, true)[0].target;
        assert_eq!(e.target, first_effective);
    }
}

#[test]
fn sampling_still_confirms_repairs_on_the_full_suite() {
    let config = SearchConfig {
        sample_size: Some(1),
        ..small()
    };
    let prep = prepared(&config);
    let result = run_nsga2(prep.problem(), &config);
    assert!(result.anomalies.is_empty());
    for p in &result.archive {
        assert!(passes_all(&prep.program, &p.edits, &prep.suite, config.step_limit));
    }
}

#[test]
fn config_round_trips_through_toml() {
    let config = SearchConfig {
        screening: Screening::TypeMatch { vars: true, funcs: false },
        max_edits: Some(5),
        ..SearchConfig::default()
    };
    let text = toml::to_string(&config).unwrap();
    assert!(text.contains("screening = \"vars\""));
    let back: SearchConfig = toml::from_str(&text).unwrap();
    assert_eq!(back, config);
    let partial: SearchConfig = toml::from_str("population = 8\nmode = \"application\"").unwrap();
    assert_eq!(partial.population, 8);
    assert_eq!(partial.mode, IngredientMode::Application);
    assert_eq!(partial.generations, 50);
    assert!(toml::from_str::<SearchConfig>("bogus = 1").is_err());
}

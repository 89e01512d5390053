use super::*;
use crate::ingredients::{build_modification_points, IngredientMode, PointOptions, Screening};
use crate::localization::SuspiciousStatement;
use crate::minilang::{parse_program, parse_statement, validate_program};

const SRC: &str = r#"
module m {
    pub fn f(x: int) -> int {
        var a: int = x
        a = a + 1
        x = x * 2
        x = x + a
        return x
    }

    pub fn g(y: int) -> int {
        y = y + 1
        y = y * 2
        return y
    }
}
"#;

fn setup() -> (Program, Vec<ModificationPoint>) {
    let p = parse_program(SRC).unwrap();
    let cands: Vec<_> = p
        .statements()
        .iter()
        .map(|s| SuspiciousStatement { id: s.id, susp: 1.0 })
        .collect();
    let seeds: Vec<Stmt> = p.statements().into_iter().cloned().collect();
    let opts = PointOptions::with_rules(IngredientMode::Package, Screening::Direct);
    let points = build_modification_points(&p, &cands, &seeds, &opts).unwrap();
    (p, points)
}

fn point<'a>(p: &Program, points: &'a [ModificationPoint], id: &str) -> (usize, &'a ModificationPoint) {
    let id = p.resolve_id(id).unwrap();
    points.iter().enumerate().find(|(_, pt)| pt.id() == id).unwrap()
}

#[test]
fn declarations_and_final_returns_cannot_be_deleted() {
    let (p, points) = setup();
    let (_, decl) = point(&p, &points, "m:f:0");
    assert!(!decl.operations.contains(&OpKind::Delete));
    let (_, ret) = point(&p, &points, "m:f:4");
    assert!(!ret.operations.contains(&OpKind::Delete));
    let (_, plain) = point(&p, &points, "m:f:2");
    assert_eq!(plain.operations, OpKind::ALL.to_vec());
}

#[test]
fn all_zero_bits_decode_to_nothing() {
    let (_, points) = setup();
    assert!(decode(&Patch::empty(points.len()), &points, true).is_empty());
}

#[test]
fn replacing_with_an_identical_statement_is_suppressed() {
    let (p, points) = setup();
    let (j, pt) = point(&p, &points, "m:f:1");
    let v = pt.ingredients.iter().position(|i| i.statement == pt.statement).unwrap();
    let mut patch = Patch::empty(points.len());
    patch.b[j] = true;
    patch.u[j] = pt.operations.iter().position(|&o| o == OpKind::Replace).unwrap();
    patch.v[j] = v;
    assert!(decode(&patch, &points, true).is_empty());
    assert_eq!(decode(&patch, &points, false).len(), 1);
    assert_eq!(effective_bits(&patch, &points, true), vec![false; points.len()]);
}

#[test]
fn insert_assignment_before_same_target_is_suppressed() {
    let (p, points) = setup();
    let (_, pt) = point(&p, &points, "m:g:1");
    let ing = parse_statement("y = y + 1").unwrap();
    assert_eq!(suppression_rule(OpKind::Insert, pt, Some(&ing)), Some(6));
    assert_eq!(suppression_rule(OpKind::Insert, pt, Some(&parse_statement("return y").unwrap())), Some(4));
    let (_, ret) = point(&p, &points, "m:g:2");
    assert_eq!(suppression_rule(OpKind::Replace, ret, Some(&ing)), Some(5));
    let (_, decl) = point(&p, &points, "m:f:0");
    assert_eq!(suppression_rule(OpKind::Replace, decl, Some(&parse_statement("x = 1").unwrap())), Some(2));
    assert_eq!(
        suppression_rule(OpKind::Insert, decl, Some(&parse_statement("var a: int = 0").unwrap())),
        Some(3)
    );
}

#[test]
fn single_delete_removes_only_that_statement() {
    let (p, _) = setup();
    let target = p.resolve_id("m:f:2").unwrap();
    let out = apply_edits(
        &p,
        &[Edit {
            kind: OpKind::Delete,
            target,
            ingredient: None,
        }],
    );
    assert_eq!(out.statement_count(), p.statement_count() - 1);
    let text = print_program(&out);
    assert!(!text.contains("x = x * 2"));
    assert!(text.contains("x = x + a"));
    // the input program is untouched
    assert!(print_program(&p).contains("x = x * 2"));
}

#[test]
fn edits_use_original_coordinates_and_commute() {
    let (p, _) = setup();
    let ins = Edit {
        kind: OpKind::Insert,
        target: p.resolve_id("m:f:1").unwrap(),
        ingredient: Some(parse_statement("x = x - 1").unwrap()),
    };
    let del = Edit {
        kind: OpKind::Delete,
        target: p.resolve_id("m:f:3").unwrap(),
        ingredient: None,
    };
    let a = apply_edits(&p, &[ins.clone(), del.clone()]);
    let b = apply_edits(&p, &[del, ins]);
    assert_eq!(a, b);
    let text = print_program(&a);
    assert!(text.contains("x = x - 1\n        a = a + 1"));
    assert!(!text.contains("x = x + a"));
    assert!(validate_program(&a).is_ok());
}

#[test]
fn empty_edit_list_is_identity() {
    let (p, _) = setup();
    assert_eq!(apply_edits(&p, &[]), p);
}

#[test]
fn nested_targets_are_reached() {
    let p = parse_program("module m { pub fn f(x: int) -> int { if x > 0 { x = x + 1 } else { x = 0 }; return x } }")
        .unwrap();
    let target = p.resolve_id("m:f:2").unwrap();
    let out = apply_edits(
        &p,
        &[Edit {
            kind: OpKind::Replace,
            target,
            ingredient: Some(parse_statement("x = x + 2").unwrap()),
        }],
    );
    assert!(print_program(&out).contains("x = x + 2"));
    assert!(out.statements().windows(2).all(|w| w[0].id < w[1].id));
}

#[test]
fn edit_script_round_trips() {
    let (p, points) = setup();
    let mut patch = Patch::empty(points.len());
    for j in [1, 2, 5] {
        patch.b[j] = true;
        patch.u[j] = points[j].operations.len() - 1;
        patch.v[j] = 1.min(points[j].ingredients.len().saturating_sub(1));
    }
    let edits = decode(&patch, &points, false);
    let script = edit_script(&p, &edits);
    assert_eq!(script.lines().count(), 3);
    assert!(script.starts_with("I m:f:"));
    assert_eq!(parse_edit_script(&p, &script).unwrap(), edits);
    assert!(parse_edit_script(&p, "X m:f:0").is_err());
    assert!(parse_edit_script(&p, "D m:f:0 x = 1").is_err());
    assert!(parse_edit_script(&p, "R nowhere:f:0 x = 1").is_err());
}

#[test]
fn diff_shows_the_change() {
    let (p, _) = setup();
    let target = p.resolve_id("m:g:1").unwrap();
    let out = apply_edits(
        &p,
        &[Edit {
            kind: OpKind::Replace,
            target,
            ingredient: Some(parse_statement("y = y * 3").unwrap()),
        }],
    );
    let diff = unified_diff(&p, &out);
    assert!(diff.contains("-        y = y * 2"));
    assert!(diff.contains("+        y = y * 3"));
    assert!(diff.starts_with("--- original.ml"));
}

#[test]
fn bounds_check() {
    let (_, points) = setup();
    let mut patch = Patch::empty(points.len());
    assert!(patch.in_bounds(&points));
    patch.u[0] = 3;
    assert!(!patch.in_bounds(&points));
}

//! Scope analysis, ingredient screening and modification points.
//!
//! Seed statements become ingredients for a candidate location when every
//! name they use is visible there (direct screening), or after out-of-scope
//! names are rewritten to visible ones of a matching type (type matching).
//! Ingredients are then filtered by structural rules tied to the candidate's
//! position, and each candidate gets its admissible operation types.

mod scope;

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{RepairError, Result};
use crate::genome::ops::{customize_operation_types, OpKind};
use crate::localization::SuspiciousStatement;
use crate::minilang::validate::{CheckRules, Checker, FunctionIndex};
use crate::minilang::{stmt_inline, Expr, Ident, Program, Signature, StatementId, Stmt, StmtKind, ValueType};

pub use scope::{locate, Location, Scope, ScopeFn, ScopeVar};

/// Where seeds may come from relative to the candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum IngredientMode {
    /// Same module.
    File,
    /// Same module (MiniLang has no package level above modules).
    #[default]
    Package,
    /// Whole program.
    Application,
}

impl IngredientMode {
    pub fn parse(s: &str) -> Option<IngredientMode> {
        match s {
            "file" => Some(IngredientMode::File),
            "package" => Some(IngredientMode::Package),
            "application" => Some(IngredientMode::Application),
            _ => None,
        }
    }

    fn admits(self, seed: StatementId, target: StatementId) -> bool {
        match self {
            IngredientMode::File | IngredientMode::Package => seed.module == target.module,
            IngredientMode::Application => true,
        }
    }
}

/// How seeds are screened into ingredients. Written as `direct`, `vars`,
/// `funcs` or `both` in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(try_from = "String", into = "String")]
pub enum Screening {
    #[default]
    Direct,
    /// Rewrites out-of-scope variables and/or functions.
    TypeMatch { vars: bool, funcs: bool },
}

impl Screening {
    pub fn name(self) -> &'static str {
        match self {
            Screening::Direct | Screening::TypeMatch { vars: false, funcs: false } => "direct",
            Screening::TypeMatch { vars: true, funcs: false } => "vars",
            Screening::TypeMatch { vars: false, funcs: true } => "funcs",
            Screening::TypeMatch { vars: true, funcs: true } => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Screening> {
        match s {
            "direct" => Some(Screening::Direct),
            "vars" => Some(Screening::TypeMatch { vars: true, funcs: false }),
            "funcs" => Some(Screening::TypeMatch { vars: false, funcs: true }),
            "both" => Some(Screening::TypeMatch { vars: true, funcs: true }),
            _ => None,
        }
    }
}

impl From<Screening> for String {
    fn from(s: Screening) -> String {
        s.name().to_string()
    }
}

impl TryFrom<String> for Screening {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        Screening::parse(&s).ok_or_else(|| format!("unknown screening `{s}`"))
    }
}

/// A seed statement usable at one location.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ingredient {
    pub statement: Stmt,
    pub origin: StatementId,
    /// Renamed identifiers, original to replacement; empty for direct ingredients.
    pub substitution: Vec<(Ident, Ident)>,
}

/// Names a statement uses without declaring them itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeNames {
    /// In first-use order.
    pub variables: Vec<Ident>,
    pub functions: Vec<Ident>,
    /// Names declared anywhere inside the statement.
    pub bound: Vec<Ident>,
    /// `break`/`continue` not enclosed by a loop inside the statement.
    pub free_jump: bool,
}

pub fn free_names(stmt: &Stmt) -> FreeNames {
    fn push(v: &mut Vec<Ident>, n: &Ident) {
        if !v.contains(n) {
            v.push(n.clone());
        }
    }
    fn expr(e: &Expr, bound: &[Ident], out: &mut FreeNames) {
        e.walk(&mut |x| match x {
            Expr::Var(n) if !bound.contains(n) => push(&mut out.variables, n),
            Expr::Call(f, _) => push(&mut out.functions, f),
            _ => {}
        });
    }
    fn block(body: &[Stmt], bound: &mut Vec<Ident>, loops: usize, out: &mut FreeNames) {
        let mark = bound.len();
        for s in body {
            visit(s, bound, loops, out);
        }
        bound.truncate(mark);
    }
    fn visit(s: &Stmt, bound: &mut Vec<Ident>, loops: usize, out: &mut FreeNames) {
        match &s.kind {
            StmtKind::VarDecl { name, init, .. } => {
                expr(init, bound, out);
                bound.push(name.clone());
                push(&mut out.bound, name);
            }
            StmtKind::Assign { target, value } => {
                if !bound.contains(target) {
                    push(&mut out.variables, target);
                }
                expr(value, bound, out);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                expr(cond, bound, out);
                block(then_body, bound, loops, out);
                if let Some(eb) = else_body {
                    block(eb, bound, loops, out);
                }
            }
            StmtKind::While { cond, body } => {
                expr(cond, bound, out);
                block(body, bound, loops + 1, out);
            }
            StmtKind::Return(Some(e)) => expr(e, bound, out),
            StmtKind::Return(None) => {}
            StmtKind::Break | StmtKind::Continue => out.free_jump |= loops == 0,
            StmtKind::Call(f, args) => {
                push(&mut out.functions, f);
                for a in args {
                    expr(a, bound, out);
                }
            }
            StmtKind::Block(inner) => block(inner, bound, loops, out),
        }
    }
    let mut out = FreeNames::default();
    visit(stmt, &mut Vec::new(), 0, &mut out);
    out
}

/// Renames variables and called functions throughout a statement. Names
/// declared inside the statement are never renamed.
pub fn rename(stmt: &Stmt, vars: &HashMap<Ident, Ident>, funcs: &HashMap<Ident, Ident>) -> Stmt {
    let mut out = stmt.clone();
    let inner = free_names(stmt).bound;
    let var = |n: &mut Ident| {
        if !inner.contains(n) {
            if let Some(r) = vars.get(n) {
                *n = r.clone();
            }
        }
    };
    out.walk_mut(&mut |s| {
        if let StmtKind::Assign { target, .. } = &mut s.kind {
            var(target);
        }
        if let StmtKind::Call(f, _) = &mut s.kind {
            if let Some(r) = funcs.get(f) {
                *f = r.clone();
            }
        }
        for e in s.own_exprs_mut() {
            e.walk_mut(&mut |x| match x {
                Expr::Var(n) => var(n),
                Expr::Call(f, _) => {
                    if let Some(r) = funcs.get(f) {
                        *f = r.clone();
                    }
                }
                _ => {}
            });
        }
    });
    out
}

/// Type-checks `stmt` as if placed at `location`, including the types of
/// returned values. `break`/`continue` placement is checked only when
/// `control` is set.
pub fn fits_scope(stmt: &Stmt, location: &Location, control: bool) -> bool {
    let lookup = |name: &str| location.scope.function(name).map(|f| f.signature.clone());
    let rules = CheckRules {
        jumps: control,
        returns: true,
    };
    let mut checker = Checker::new(
        location.scope.checker_frame(),
        &lookup,
        location.function_ret,
        location.in_loop,
        rules,
        String::new(),
    );
    checker.check_stmt(stmt).is_ok()
}

/// Direct screening: accepted iff the seed comes from the mode's region and
/// all of its names resolve at the location with fitting types.
pub fn screen_direct(seed: &Stmt, location: &Location, mode: IngredientMode) -> Option<Ingredient> {
    if !mode.admits(seed.id, location.id) {
        return None;
    }
    let names = free_names(seed);
    let resolved = names.variables.iter().all(|v| location.scope.variable(v).is_some())
        && names.functions.iter().all(|f| location.scope.function(f).is_some());
    (resolved && fits_scope(seed, location, false)).then(|| Ingredient {
        statement: seed.clone(),
        origin: seed.id,
        substitution: Vec::new(),
    })
}

/// Type matching: out-of-scope names are mapped injectively onto visible ones,
/// preferring the same type over a compatible one and nearer declarations
/// over farther ones. Returns at most one ingredient.
pub fn screen_type_match(
    program: &Program,
    index: &FunctionIndex,
    seed: &Stmt,
    location: &Location,
    mode: IngredientMode,
    match_vars: bool,
    match_funcs: bool,
) -> Option<Ingredient> {
    if !mode.admits(seed.id, location.id) {
        return None;
    }
    let names = free_names(seed);
    let scope = &location.scope;
    let missing_vars: Vec<&Ident> = names.variables.iter().filter(|v| scope.variable(v).is_none()).collect();
    let missing_funcs: Vec<&Ident> = names.functions.iter().filter(|f| scope.function(f).is_none()).collect();
    if (!missing_vars.is_empty() && !match_vars) || (!missing_funcs.is_empty() && !match_funcs) {
        return None;
    }

    let mut substitution = Vec::new();
    let mut var_map = HashMap::new();
    if !missing_vars.is_empty() {
        let origin = locate(program, seed.id)?;
        let mut taken: HashSet<&Ident> = names.variables.iter().filter(|v| scope.variable(v).is_some()).collect();
        taken.extend(names.bound.iter());
        for &v in &missing_vars {
            let ty = origin.scope.variable(v)?.ty;
            let pick = scope
                .variables
                .iter()
                .filter(|c| !taken.contains(&c.name))
                .find(|c| c.ty == ty)
                .or_else(|| {
                    scope
                        .variables
                        .iter()
                        .filter(|c| !taken.contains(&c.name))
                        .find(|c| c.ty.compatible_with(ty))
                })?;
            taken.insert(&pick.name);
            var_map.insert(v.clone(), pick.name.clone());
            substitution.push((v.clone(), pick.name.clone()));
        }
    }
    let mut fn_map = HashMap::new();
    if !missing_funcs.is_empty() {
        let mut taken: HashSet<&Ident> = names.functions.iter().filter(|f| scope.function(f).is_some()).collect();
        for &f in &missing_funcs {
            let (m, i) = index.resolve(seed.id.module as usize, f)?;
            let sig: &Signature = index.signature(m, i);
            let pick = scope
                .functions
                .iter()
                .filter(|c| !taken.contains(&c.name))
                .find(|c| c.signature == *sig)
                .or_else(|| {
                    scope
                        .functions
                        .iter()
                        .filter(|c| !taken.contains(&c.name))
                        .find(|c| c.signature.compatible_with(sig))
                })?;
            taken.insert(&pick.name);
            fn_map.insert(f.clone(), pick.name.clone());
            substitution.push((f.clone(), pick.name.clone()));
        }
    }

    let statement = if substitution.is_empty() {
        seed.clone()
    } else {
        rename(seed, &var_map, &fn_map)
    };
    fits_scope(&statement, location, false).then(|| Ingredient {
        statement,
        origin: seed.id,
        substitution,
    })
}

/// Position-dependent ingredient rules. Returns `true` to keep.
///
/// `break`/`continue` need a loop around the candidate; a `return` must match
/// the function's return type and may only stand in for the last statement of
/// a block; a declaration is only an ingredient for a declaration of the same
/// name and type.
pub fn apply_ingredient_rules(candidate: &Stmt, location: &Location, ingredient: &Stmt) -> bool {
    let names = free_names(ingredient);
    if names.free_jump && !location.in_loop {
        return false;
    }
    let mut returns_ok = true;
    ingredient.walk(&mut |s| {
        if matches!(s.kind, StmtKind::Return(_)) {
            returns_ok &= return_fits(s, location.function_ret);
        }
    });
    if !returns_ok {
        return false;
    }
    if matches!(ingredient.kind, StmtKind::Return(_)) && !location.last_in_block {
        return false;
    }
    if let StmtKind::VarDecl { name, ty, .. } = &ingredient.kind {
        return matches!(&candidate.kind, StmtKind::VarDecl { name: n, ty: t, .. } if n == name && t == ty);
    }
    true
}

fn return_fits(ret: &Stmt, fn_ret: ValueType) -> bool {
    // the checker run by screening already typed the expression
    match &ret.kind {
        StmtKind::Return(None) => fn_ret == ValueType::Void,
        StmtKind::Return(Some(_)) => fn_ret != ValueType::Void,
        _ => true,
    }
}

/// Screening and rule settings used when assembling points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PointOptions {
    pub mode: IngredientMode,
    pub screening: Screening,
    /// Rules on ingredients.
    pub ingredient_rules: bool,
    /// Rules on operation types.
    pub operation_rules: bool,
}

impl PointOptions {
    pub fn with_rules(mode: IngredientMode, screening: Screening) -> Self {
        PointOptions {
            mode,
            screening,
            ingredient_rules: true,
            operation_rules: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModificationPoint {
    pub index: usize,
    pub statement: Stmt,
    pub susp: f64,
    pub location: Location,
    /// Admissible operation types in catalog order.
    pub operations: Vec<OpKind>,
    pub ingredients: Vec<Ingredient>,
}

impl ModificationPoint {
    pub fn id(&self) -> StatementId {
        self.statement.id
    }
}

/// Ingredient list for one location: screened, rule-filtered, deduplicated
/// by structure in seed order.
pub fn screen_ingredients(
    program: &Program,
    index: &FunctionIndex,
    candidate: &Stmt,
    location: &Location,
    seeds: &[Stmt],
    options: &PointOptions,
) -> Vec<Ingredient> {
    let mut seen: HashSet<Stmt> = HashSet::new();
    let mut out = Vec::new();
    for seed in seeds {
        let ing = match options.screening {
            Screening::Direct => screen_direct(seed, location, options.mode),
            Screening::TypeMatch { vars, funcs } => {
                screen_type_match(program, index, seed, location, options.mode, vars, funcs)
            }
        };
        let Some(ing) = ing else { continue };
        if options.ingredient_rules && !apply_ingredient_rules(candidate, location, &ing.statement) {
            continue;
        }
        if seen.insert(ing.statement.clone()) {
            out.push(ing);
        }
    }
    out
}

/// One point per candidate, in candidate order. Points left without any
/// admissible operation are dropped and the rest renumbered.
pub fn build_modification_points(
    program: &Program,
    candidates: &[SuspiciousStatement],
    seeds: &[Stmt],
    options: &PointOptions,
) -> Result<Vec<ModificationPoint>> {
    let index = FunctionIndex::new(program);
    let mut points = Vec::new();
    for c in candidates {
        let (Some(statement), Some(location)) = (program.find_statement(c.id), locate(program, c.id)) else {
            continue;
        };
        let ingredients = screen_ingredients(program, &index, statement, &location, seeds, options);
        let operations =
            customize_operation_types(statement, &location, !ingredients.is_empty(), options.operation_rules);
        if operations.is_empty() {
            continue;
        }
        points.push(ModificationPoint {
            index: points.len(),
            statement: statement.clone(),
            susp: c.susp,
            location,
            operations,
            ingredients,
        });
    }
    if points.is_empty() {
        return Err(RepairError::NoModificationPoints);
    }
    Ok(points)
}

/// Tab-separated per-point summary.
pub fn points_report(program: &Program, points: &[ModificationPoint]) -> String {
    let mut out = String::from("point\tstatement\tsusp\tvars\tfuncs\tingredients\tops\ttext\n");
    for p in points {
        let ops: String = p.operations.iter().map(|o| o.letter()).collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{:.6}\t{}\t{}\t{}\t{}\t{}",
            p.index,
            program.describe(p.id()),
            p.susp,
            p.location.scope.variables.len(),
            p.location.scope.functions.len(),
            p.ingredients.len(),
            ops,
            stmt_inline(&p.statement)
        );
    }
    out
}

//! The two objectives, Pareto dominance, non-dominated sorting and crowding.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Patch size and weighted failure rate. An invalid patch compares as
/// `(+inf, +inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    pub f1: usize,
    pub f2: f64,
    pub valid: bool,
}

impl Objectives {
    pub const INVALID: Objectives = Objectives {
        f1: usize::MAX,
        f2: f64::INFINITY,
        valid: false,
    };

    pub fn new(f1: usize, f2: f64) -> Self {
        Objectives { f1, f2, valid: true }
    }

    /// Objective values as floats, infinite when invalid.
    pub fn values(&self) -> [f64; 2] {
        if self.valid {
            [self.f1 as f64, self.f2]
        } else {
            [f64::INFINITY; 2]
        }
    }

    /// Failure rate for single-objective comparison.
    pub fn fitness(&self) -> f64 {
        if self.valid {
            self.f2
        } else {
            f64::INFINITY
        }
    }

    pub fn is_repair(&self) -> bool {
        self.valid && self.f2 == 0.0
    }
}

/// `a` is no worse than `b` in both objectives and strictly better in one.
pub fn dominates(a: &Objectives, b: &Objectives) -> bool {
    if !a.valid {
        return false;
    }
    if !b.valid {
        return true;
    }
    let no_worse = a.f1 <= b.f1 && a.f2 <= b.f2;
    no_worse && (a.f1 < b.f1 || a.f2 < b.f2)
}

/// Splits indices into non-domination levels, best first. Within a level
/// indices are ascending.
pub fn fast_nondominated_sort(pop: &[Objectives]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    let mut fronts: Vec<Vec<usize>> = vec![Vec::new()];
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            if dominates(&pop[p], &pop[q]) {
                dominated_by[p].push(q);
            } else if dominates(&pop[q], &pop[p]) {
                counts[p] += 1;
            }
        }
        if counts[p] == 0 {
            fronts[0].push(p);
        }
    }
    let mut i = 0;
    while !fronts[i].is_empty() {
        let mut next = Vec::new();
        for &p in &fronts[i] {
            for &q in &dominated_by[p] {
                counts[q] -= 1;
                if counts[q] == 0 {
                    next.push(q);
                }
            }
        }
        next.sort_unstable();
        i += 1;
        fronts.push(next);
    }
    fronts.pop();
    fronts
}

/// Crowding distance of each member of `front` (indices into `pop`), in the
/// same order as `front`.
pub fn crowding_distance(pop: &[Objectives], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    if k <= 2 {
        return vec![f64::INFINITY; k];
    }
    let mut dist = vec![0.0; k];
    for m in 0..2 {
        let value = |i: usize| {
            let v = pop[front[i]].values()[m];
            if v.is_finite() {
                v
            } else {
                f64::MAX
            }
        };
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| value(a).partial_cmp(&value(b)).unwrap_or(Ordering::Equal));
        let lo = value(order[0]);
        let hi = value(order[k - 1]);
        dist[order[0]] = f64::INFINITY;
        dist[order[k - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 || !range.is_finite() {
            continue;
        }
        for w in 1..k - 1 {
            dist[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / range;
        }
    }
    dist
}

//! Initialization, crossover and mutation over the patch genome.

use rand::seq::index::sample;
use rand::Rng;

use crate::genome::Patch;
use crate::ingredients::ModificationPoint;

/// Per-position gene ranges and suspiciousness.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneSpace {
    /// `|O_j|`, at least 1.
    pub operations: Vec<usize>,
    /// `|I_j'|`; 0 makes `v_j` inert.
    pub ingredients: Vec<usize>,
    pub susp: Vec<f64>,
}

impl GeneSpace {
    pub fn from_points(points: &[ModificationPoint]) -> Self {
        GeneSpace {
            operations: points.iter().map(|p| p.operations.len()).collect(),
            ingredients: points.iter().map(|p| p.ingredients.len()).collect(),
            susp: points.iter().map(|p| p.susp).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.operations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operations.is_empty()
    }

    pub fn in_bounds(&self, x: &Patch) -> bool {
        x.len() == self.len()
            && (0..self.len()).all(|j| {
                x.u[j] < self.operations[j] && (self.ingredients[j] == 0 || x.v[j] < self.ingredients[j])
            })
    }

    /// Redraws any out-of-range `u_j`/`v_j`.
    pub fn clamp<R: Rng>(&self, x: &mut Patch, rng: &mut R) {
        for j in 0..self.len() {
            if x.u[j] >= self.operations[j] {
                x.u[j] = rng.gen_range(0..self.operations[j]);
            }
            if self.ingredients[j] > 0 && x.v[j] >= self.ingredients[j] {
                x.v[j] = rng.gen_range(0..self.ingredients[j]);
            }
        }
    }
}

/// A random patch: `b_j` is set with probability `susp_j * mu`, `u` and `v`
/// are uniform in range.
pub fn random_patch<R: Rng>(space: &GeneSpace, mu: f64, rng: &mut R) -> Patch {
    let n = space.len();
    let mut x = Patch::empty(n);
    for j in 0..n {
        x.b[j] = rng.gen_bool((space.susp[j] * mu).clamp(0.0, 1.0));
        x.u[j] = rng.gen_range(0..space.operations[j]);
        if space.ingredients[j] > 0 {
            x.v[j] = rng.gen_range(0..space.ingredients[j]);
        }
    }
    x
}

pub fn init_population<R: Rng>(size: usize, space: &GeneSpace, mu: f64, rng: &mut R) -> Vec<Patch> {
    (0..size).map(|_| random_patch(space, mu, rng)).collect()
}

/// Half uniform crossover on `b`: swaps exactly `h / 2` (rounded down) of the
/// `h` positions where the parents differ. Returns the number swapped.
pub fn hux<R: Rng>(a: &mut [bool], b: &mut [bool], rng: &mut R) -> usize {
    let differing: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
    let k = differing.len() / 2;
    for i in sample(rng, differing.len(), k) {
        let j = differing[i];
        std::mem::swap(&mut a[j], &mut b[j]);
    }
    k
}

/// Swaps the suffixes from a cut point drawn uniformly in `1..n`. No-op when
/// `n < 2`.
pub fn single_point<R: Rng>(a: &mut [usize], b: &mut [usize], rng: &mut R) {
    let n = a.len();
    if n < 2 {
        return;
    }
    let cut = rng.gen_range(1..n);
    a[cut..].swap_with_slice(&mut b[cut..]);
}

/// HUX on `b`, independent single-point crossovers on `u` and `v`.
pub fn crossover<R: Rng>(p1: &Patch, p2: &Patch, space: &GeneSpace, rng: &mut R) -> (Patch, Patch) {
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    hux(&mut c1.b, &mut c2.b, rng);
    single_point(&mut c1.u, &mut c2.u, rng);
    single_point(&mut c1.v, &mut c2.v, rng);
    space.clamp(&mut c1, rng);
    space.clamp(&mut c2, rng);
    (c1, c2)
}

/// Bit-flip on `b`; uniform reset of `u_j`/`v_j`, each with probability `pm`.
pub fn mutate<R: Rng>(x: &mut Patch, space: &GeneSpace, pm: f64, rng: &mut R) {
    let pm = pm.clamp(0.0, 1.0);
    for j in 0..space.len() {
        if rng.gen_bool(pm) {
            x.b[j] = !x.b[j];
        }
        if rng.gen_bool(pm) {
            x.u[j] = rng.gen_range(0..space.operations[j]);
        }
        if space.ingredients[j] > 0 && rng.gen_bool(pm) {
            x.v[j] = rng.gen_range(0..space.ingredients[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space() -> GeneSpace {
        GeneSpace {
            operations: vec![1, 2, 3, 3, 1],
            ingredients: vec![0, 4, 9, 1, 0],
            susp: vec![1.0, 0.5, 0.2, 1.0, 0.1],
        }
    }

    #[test]
    fn identical_parents_give_identical_children() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = space();
        let p = random_patch(&s, 0.5, &mut rng);
        let (a, b) = crossover(&p, &p, &s, &mut rng);
        assert_eq!(a, p);
        assert_eq!(b, p);
    }

    #[test]
    fn hux_swaps_half_of_four() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut a = vec![false; 4];
        let mut b = vec![true; 4];
        assert_eq!(hux(&mut a, &mut b, &mut rng), 2);
        assert_eq!(a.iter().filter(|&&x| x).count(), 2);
        assert_eq!(b.iter().filter(|&&x| !x).count(), 2);
    }

    #[test]
    fn zero_rate_mutation_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = space();
        let p = random_patch(&s, 0.5, &mut rng);
        let mut q = p.clone();
        mutate(&mut q, &s, 0.0, &mut rng);
        assert_eq!(p, q);
    }

    #[test]
    fn full_rate_flips_every_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = space();
        let p = random_patch(&s, 0.5, &mut rng);
        let mut q = p.clone();
        mutate(&mut q, &s, 1.0, &mut rng);
        assert!(p.b.iter().zip(&q.b).all(|(x, y)| x != y));
        assert!(s.in_bounds(&q));
        // inert ingredient genes are left alone
        assert_eq!(q.v[0], p.v[0]);
        assert_eq!(q.v[4], p.v[4]);
    }

    #[test]
    fn zero_scale_initializes_no_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop = init_population(100, &space(), 0.0, &mut rng);
        assert!(pop.iter().all(|x| x.size() == 0));
        assert!(pop.iter().all(|x| space().in_bounds(x)));
    }

    #[test]
    fn single_point_on_length_one_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut a = vec![0];
        let mut b = vec![1];
        single_point(&mut a, &mut b, &mut rng);
        assert_eq!((a[0], b[0]), (0, 1));
    }
}

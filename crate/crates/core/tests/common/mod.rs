//! Random small VCs shared by the prover suites: at most three variables
//! (at most two of them strings), shallow terms, and goals biased towards
//! ones that follow from the givens.

pub mod checks;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vcbench_core::math::{MathExp as M, Sort, Var};

pub struct Gen {
    rng: ChaCha8Rng,
    strs: Vec<M>,
    entries: Vec<M>,
    ints: Vec<M>,
}

fn var(name: &str, sort: Sort) -> M {
    M::var(Var::new(name, sort))
}

impl Gen {
    /// At most three variables per VC, at most two of them strings.
    pub fn new(seed: u64) -> Gen {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool = vec![
            var("s0", Sort::Str("E".into())),
            var("s1", Sort::Str("E".into())),
            var("e0", Sort::Entry("E".into())),
            var("e1", Sort::Entry("E".into())),
            var("n0", Sort::Int),
            var("n1", Sort::Int),
        ];
        pool.shuffle(&mut rng);
        let chosen: Vec<M> = pool.into_iter().take(rng.gen_range(1..=3)).collect();
        let of = |s: fn(&Sort) -> bool| -> Vec<M> {
            chosen.iter().filter(|v| s(&v.sort().unwrap())).cloned().collect()
        };
        Gen {
            strs: of(|s| matches!(s, Sort::Str(_))),
            entries: of(|s| matches!(s, Sort::Entry(_))),
            ints: of(|s| matches!(s, Sort::Int)),
            rng,
        }
    }

    fn entry(&mut self) -> Option<M> {
        self.entries.choose(&mut self.rng).cloned()
    }

    fn string(&mut self, depth: u32) -> M {
        let leaf = depth == 0 || self.rng.gen_bool(0.4);
        if leaf {
            return match (self.strs.choose(&mut self.rng).cloned(), self.rng.gen_range(0..4)) {
                (Some(s), 0..=2) => s,
                _ => match self.entry() {
                    Some(e) if self.rng.gen_bool(0.6) => M::singleton(e),
                    _ => M::Empty,
                },
            };
        }
        match self.rng.gen_range(0..3) {
            0 => M::reverse(self.string(depth - 1)),
            _ => M::concat(vec![self.string(depth - 1), self.string(depth - 1)]),
        }
    }

    fn int(&mut self, depth: u32) -> M {
        let leaf = depth == 0 || self.rng.gen_bool(0.4);
        if leaf {
            return match self.rng.gen_range(0..6) {
                0 | 1 if !self.ints.is_empty() => self.ints.choose(&mut self.rng).cloned().unwrap(),
                2 => M::int(self.rng.gen_range(-8..=8)),
                3 => [M::MinInt, M::MaxInt][self.rng.gen_range(0..2)].clone(),
                _ => M::len(self.string(1)),
            };
        }
        match self.rng.gen_range(0..3) {
            0 => M::add(self.int(depth - 1), self.int(depth - 1)),
            1 => M::sub(self.int(depth - 1), self.int(depth - 1)),
            _ => M::len(self.string(depth)),
        }
    }

    pub fn atom(&mut self) -> M {
        match self.rng.gen_range(0..7) {
            0 => M::eq(self.string(2), self.string(2)),
            1 => M::ne(self.string(2), self.string(2)),
            2 => match (self.entry(), self.entry()) {
                (Some(a), Some(b)) if self.rng.gen_bool(0.5) => M::eq(a, b),
                (Some(a), Some(b)) => M::ne(a, b),
                _ => M::eq(self.string(1), self.string(1)),
            },
            3 => M::eq(self.int(2), self.int(2)),
            4 => M::le(self.int(2), self.int(2)),
            5 => M::lt(self.int(2), self.int(2)),
            _ => M::ne(self.int(1), self.int(1)),
        }
    }

    /// A goal likely to follow from `givens`: a congruence image of a given
    /// equality, a length fact, or a weakening of a given.
    fn related_goal(&mut self, givens: &[M]) -> M {
        let Some(g) = givens.choose(&mut self.rng).cloned() else {
            return self.atom();
        };
        match (&g, self.rng.gen_range(0..4)) {
            (M::Eq(a, b), 0) if a.sort().is_some_and(|s| s.is_str()) => {
                M::eq(M::len(M::reverse((**a).clone())), M::len((**b).clone()))
            }
            (M::Eq(a, b), 1) if a.sort().is_some_and(|s| s.is_str()) => {
                let t = self.string(1);
                M::eq(M::concat(vec![(**a).clone(), t.clone()]), M::concat(vec![(**b).clone(), t]))
            }
            (M::Eq(a, b), _) if a.sort() == Some(Sort::Int) => M::le((**b).clone(), (**a).clone()),
            (M::Lt(a, b), _) => M::le(M::add((**a).clone(), M::int(1)), (**b).clone()),
            (M::Le(a, b), 0) => M::lt((**a).clone(), M::add((**b).clone(), M::int(1))),
            _ => {
                let s = self.string(2);
                match self.rng.gen_range(0..3) {
                    0 => M::eq(M::len(M::reverse(s.clone())), M::len(s)),
                    1 => M::le(M::int(0), M::len(s)),
                    _ => M::eq(M::reverse(M::reverse(s.clone())), s),
                }
            }
        }
    }

    pub fn vc(&mut self) -> (Vec<M>, M) {
        let givens: Vec<M> = (0..self.rng.gen_range(0..=3)).map(|_| self.atom()).collect();
        let goal = if self.rng.gen_bool(0.5) {
            self.related_goal(&givens)
        } else {
            self.atom()
        };
        (givens, goal)
    }
}

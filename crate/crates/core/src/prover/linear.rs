//! Linear integer arithmetic over e-class atoms.
//!
//! Entailment is checked by showing the facts plus the negated goal have no
//! integer solution: equalities are eliminated first, then Fourier–Motzkin
//! elimination runs with Chvátal–Gomory rounding (every atom is an
//! integer). Sound; incomplete only where rounding is not enough or the
//! constraint set outgrows its cap.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::egraph::Id;

/// `Σ coeff·atom + constant`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lin {
    pub coeffs: BTreeMap<Id, BigInt>,
    pub constant: BigInt,
}

impl Lin {
    pub fn atom(a: Id) -> Lin {
        let mut l = Lin::default();
        l.coeffs.insert(a, BigInt::one());
        l
    }

    pub fn constant(k: BigInt) -> Lin {
        Lin {
            coeffs: BTreeMap::new(),
            constant: k,
        }
    }

    pub fn add_term(&mut self, a: Id, c: &BigInt) {
        let e = self.coeffs.entry(a).or_default();
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&a);
        }
    }

    /// `self + k·other`.
    pub fn add_scaled(&mut self, other: &Lin, k: &BigInt) {
        for (a, c) in &other.coeffs {
            self.add_term(*a, &(c * k));
        }
        self.constant += &other.constant * k;
    }

    pub fn scale(&self, k: &BigInt) -> Lin {
        let mut out = Lin::default();
        out.add_scaled(self, k);
        out
    }

    pub fn sub(&self, other: &Lin) -> Lin {
        let mut out = self.clone();
        out.add_scaled(other, &-BigInt::one());
        out
    }

    fn coeff(&self, a: Id) -> BigInt {
        self.coeffs.get(&a).cloned().unwrap_or_default()
    }

    fn gcd(&self) -> BigInt {
        self.coeffs
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }
}

/// `lin <= 0` or `lin = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    Le(Lin),
    Eq(Lin),
}

impl Constraint {
    fn lin(&self) -> &Lin {
        match self {
            Constraint::Le(l) | Constraint::Eq(l) => l,
        }
    }
}

/// Outcome of a satisfiability check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sat {
    /// No integer solution.
    Infeasible,
    /// A rational solution exists (or rounding found nothing).
    Unknown,
    /// The constraint set outgrew the cap.
    GaveUp,
}

pub const DEFAULT_CAP: usize = 600;

/// Keeps the constraints connected (through shared atoms) to `seed`.
pub fn relevant(constraints: &[Constraint], seed: &Lin) -> Vec<Constraint> {
    let mut atoms: BTreeSet<Id> = seed.coeffs.keys().copied().collect();
    let mut taken = vec![false; constraints.len()];
    loop {
        let mut grew = false;
        for (i, c) in constraints.iter().enumerate() {
            if !taken[i] && c.lin().coeffs.keys().any(|a| atoms.contains(a)) {
                taken[i] = true;
                atoms.extend(c.lin().coeffs.keys().copied());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    constraints
        .iter()
        .zip(taken)
        .filter(|(_, t)| *t)
        .map(|(c, _)| c.clone())
        .collect()
}

/// Rounds `lin <= 0` to the strongest equivalent over the integers.
fn tighten(l: Lin) -> Lin {
    let g = l.gcd();
    if g.is_zero() || g.is_one() {
        return l;
    }
    Lin {
        coeffs: l.coeffs.into_iter().map(|(a, c)| (a, c / &g)).collect(),
        constant: l.constant.div_ceil(&g),
    }
}

pub fn check(constraints: Vec<Constraint>, cap: usize) -> Sat {
    let mut eqs = Vec::new();
    let mut les = Vec::new();
    for c in constraints {
        match c {
            Constraint::Eq(l) => eqs.push(l),
            Constraint::Le(l) => les.push(l),
        }
    }

    while let Some(e) = eqs.pop() {
        let Some((&x, cx)) = e
            .coeffs
            .iter()
            .min_by(|(a, c), (b, d)| c.abs().cmp(&d.abs()).then(a.cmp(b)))
        else {
            if !e.constant.is_zero() {
                return Sat::Infeasible;
            }
            continue;
        };
        if !e.constant.is_multiple_of(&e.gcd()) {
            return Sat::Infeasible;
        }
        let cx = cx.clone();
        let (mag, sign) = (cx.abs(), cx.signum());
        let eliminate = |l: &mut Lin| {
            let d = l.coeff(x);
            if !d.is_zero() {
                let mut out = l.scale(&mag);
                out.add_scaled(&e, &(-&sign * &d));
                *l = out;
            }
        };
        eqs.iter_mut().for_each(eliminate);
        les.iter_mut().for_each(eliminate);
    }

    let mut set: BTreeSet<Lin> = BTreeSet::new();
    for l in les {
        set.insert(tighten(l));
    }
    loop {
        let mut cur = BTreeSet::new();
        for l in set {
            if l.coeffs.is_empty() {
                if l.constant.is_positive() {
                    return Sat::Infeasible;
                }
            } else {
                cur.insert(l);
            }
        }
        if cur.is_empty() {
            return Sat::Unknown;
        }
        let mut counts: BTreeMap<Id, (usize, usize)> = BTreeMap::new();
        for l in &cur {
            for (a, c) in &l.coeffs {
                let e = counts.entry(*a).or_default();
                if c.is_positive() {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        let (&x, _) = counts
            .iter()
            .min_by_key(|(a, (p, n))| (p * n, **a))
            .expect("non-empty constraints mention an atom");
        let (with, rest): (Vec<Lin>, Vec<Lin>) = cur.into_iter().partition(|l| l.coeffs.contains_key(&x));
        let (pos, neg): (Vec<Lin>, Vec<Lin>) = with.into_iter().partition(|l| l.coeff(x).is_positive());
        if rest.len() + pos.len() * neg.len() > cap {
            return Sat::GaveUp;
        }
        set = rest.into_iter().collect();
        for p in &pos {
            for n in &neg {
                let mut l = p.scale(&n.coeff(x).abs());
                l.add_scaled(n, &p.coeff(x));
                set.insert(tighten(l));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(terms: &[(Id, i64)], k: i64) -> Lin {
        let mut l = Lin::constant(k.into());
        for (a, c) in terms {
            l.add_term(*a, &BigInt::from(*c));
        }
        l
    }

    #[test]
    fn transitivity_is_found() {
        // x <= y, y <= z, z < x
        let cs = vec![
            Constraint::Le(lin(&[(0, 1), (1, -1)], 0)),
            Constraint::Le(lin(&[(1, 1), (2, -1)], 0)),
            Constraint::Le(lin(&[(2, 1), (0, -1)], 1)),
        ];
        assert_eq!(check(cs, DEFAULT_CAP), Sat::Infeasible);
    }

    #[test]
    fn rounding_uses_integrality() {
        // 2x = 1 has rational but no integer solutions
        assert_eq!(check(vec![Constraint::Eq(lin(&[(0, 2)], -1))], DEFAULT_CAP), Sat::Infeasible);
        // 1 <= 2x <= 1
        let cs = vec![
            Constraint::Le(lin(&[(0, -2)], 1)),
            Constraint::Le(lin(&[(0, 2)], -1)),
        ];
        assert_eq!(check(cs, DEFAULT_CAP), Sat::Infeasible);
    }

    #[test]
    fn satisfiable_system_is_not_refuted() {
        let cs = vec![
            Constraint::Eq(lin(&[(0, 1), (1, -1), (2, -1)], 0)),
            Constraint::Le(lin(&[(1, -1)], 0)),
            Constraint::Le(lin(&[(2, -1)], 0)),
            Constraint::Le(lin(&[(0, 1)], -3)),
        ];
        assert_eq!(check(cs, DEFAULT_CAP), Sat::Unknown);
    }
}

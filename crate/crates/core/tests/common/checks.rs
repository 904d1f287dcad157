//! Whole-suite checks shared by the core tests and the acceptance run.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use vcbench_core::math::eval::FiniteModel;
use vcbench_core::prover::{prove, EGraph, Id, Kind, Op, ProverOptions, Status};
use vcbench_core::theory::{Library, Theorem};

use super::Gen;

pub struct Fuzz {
    pub vcs: usize,
    pub proved: usize,
    pub violations: Vec<String>,
}

/// Proves the VCs generated from seeds `0..n`; every proof is checked for
/// a countermodel in the default finite model.
pub fn soundness_fuzz(n: u64) -> Fuzz {
    let theorems: Vec<Theorem> = Library::standard().theorems().cloned().collect();
    let model = FiniteModel::default();
    let opts = ProverOptions::default();
    let outcomes: Vec<(Status, Option<String>)> = (0..n)
        .into_par_iter()
        .map(|seed| {
            let (givens, goal) = Gen::new(seed).vc();
            let r = prove(&givens, &goal, &theorems, &opts);
            let violation = (r.status == Status::Proved)
                .then(|| model.countermodel(&givens, &goal))
                .flatten()
                .map(|cm| format!("seed {seed}: {givens:?} |- {goal:?} fails at {cm:?}"));
            (r.status, violation)
        })
        .collect();
    Fuzz {
        vcs: outcomes.len(),
        proved: outcomes.iter().filter(|(s, _)| *s == Status::Proved).count(),
        violations: outcomes.into_iter().filter_map(|(_, v)| v).collect(),
    }
}

pub struct Validity {
    pub theorems: usize,
    pub failures: Vec<String>,
}

/// Searches the default finite model for a countermodel to every library
/// theorem.
pub fn theory_validity() -> Validity {
    let model = FiniteModel::default();
    let lib = Library::standard();
    let theorems: Vec<&Theorem> = lib.theorems().collect();
    let failures = theorems
        .par_iter()
        .filter_map(|t| {
            model
                .countermodel(&t.hypotheses(), &t.conclusion)
                .map(|cm| format!("{} fails at {cm:?}", t.name))
        })
        .collect();
    Validity {
        theorems: theorems.len(),
        failures,
    }
}

#[derive(Clone, Debug)]
struct Term {
    op: Op,
    args: Vec<usize>,
}

/// Up to `max_terms` distinct terms over constants `a b c`, unary `f`
/// (Reverse) and binary `g` (a two-part concatenation).
fn random_terms(rng: &mut ChaCha8Rng, max_terms: usize) -> Vec<Term> {
    let mut terms: Vec<Term> = Vec::new();
    let target = rng.gen_range(2..=max_terms);
    let mut attempts = 0;
    while terms.len() < target && attempts < 200 {
        attempts += 1;
        let t = match rng.gen_range(0..3) {
            0 => Term {
                op: Op::Var(["a", "b", "c"][rng.gen_range(0..3)].to_string(), 0, Kind::Str),
                args: vec![],
            },
            1 if !terms.is_empty() => Term {
                op: Op::Reverse,
                args: vec![rng.gen_range(0..terms.len())],
            },
            2 if !terms.is_empty() => Term {
                op: Op::Concat,
                args: vec![rng.gen_range(0..terms.len()), rng.gen_range(0..terms.len())],
            },
            _ => continue,
        };
        if !terms.iter().any(|u| u.op == t.op && u.args == t.args) {
            terms.push(t);
        }
    }
    terms
}

/// Smallest equivalence containing `eqs` and closed under congruence,
/// computed by brute-force iteration to a fixpoint.
fn naive_closure(terms: &[Term], eqs: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let n = terms.len();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in eqs {
        r[a][b] = true;
        r[b][a] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if r[i][j] {
                    continue;
                }
                let transitive = (0..n).any(|k| r[i][k] && r[k][j]);
                let congruent = terms[i].op == terms[j].op
                    && terms[i].args.len() == terms[j].args.len()
                    && !terms[i].args.is_empty()
                    && terms[i].args.iter().zip(&terms[j].args).all(|(&x, &y)| r[x][y]);
                if transitive || congruent {
                    r[i][j] = true;
                    r[j][i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return r;
        }
    }
}

pub struct Oracle {
    pub instances: usize,
    /// Instances where congruence derived a pair not asserted directly.
    pub nontrivial: usize,
    pub mismatches: Vec<String>,
}

/// Random problems of at most ten terms and five equalities; the e-graph's
/// classes must equal the naive closure on every pair.
pub fn congruence_oracle(instances: usize, seed: u64) -> Oracle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Oracle {
        instances,
        nontrivial: 0,
        mismatches: Vec::new(),
    };
    for _ in 0..instances {
        let terms = random_terms(&mut rng, 10);
        let n_eqs = rng.gen_range(0..=5);
        let eqs: Vec<(usize, usize)> = (0..n_eqs)
            .map(|_| (rng.gen_range(0..terms.len()), rng.gen_range(0..terms.len())))
            .collect();

        let mut eg = EGraph::new();
        let mut ids: Vec<Id> = Vec::new();
        for t in &terms {
            let args = t.args.iter().map(|&a| ids[a]).collect();
            ids.push(eg.add(t.op.clone(), args));
        }
        for &(a, b) in &eqs {
            eg.merge(ids[a], ids[b]);
        }
        eg.rebuild();

        let expected = naive_closure(&terms, &eqs);
        let n = terms.len();
        for i in 0..n {
            for j in 0..n {
                if eg.same(ids[i], ids[j]) != expected[i][j] {
                    out.mismatches
                        .push(format!("terms {terms:?}, equalities {eqs:?}, pair ({i}, {j})"));
                }
            }
        }
        let asserted = |i: usize, j: usize| eqs.iter().any(|&(a, b)| (a, b) == (i, j) || (b, a) == (i, j));
        let derived = (0..n).any(|i| (0..n).any(|j| i != j && expected[i][j] && !asserted(i, j)));
        out.nontrivial += usize::from(derived);
    }
    out
}

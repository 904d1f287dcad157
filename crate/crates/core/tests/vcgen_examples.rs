use vcbench_core::math::MathExp;
use vcbench_core::pipeline::front_end;
use vcbench_core::prover::{prove_vc, ProverOptions, Status};
use vcbench_core::theory::{Library, Theorem};
use vcbench_core::vcgen::{Vc, VcKind};

const EXCHANGE: &str = include_str!("../../../corpus/exchange_missing_requires.rsl");
const EXCHANGE_FIXED: &str = include_str!("../../../corpus/exchange_fixed.rsl");
const INVERT_FAULTY: &str = include_str!("../../../corpus/invert_faulty.rsl");
const INVERT_FIXED: &str = include_str!("../../../corpus/invert_fixed.rsl");
const FLIP_1: &str = include_str!("../../../corpus/flip_onto_stage1.rsl");
const FLIP_2: &str = include_str!("../../../corpus/flip_onto_stage2.rsl");
const FLIP_3: &str = include_str!("../../../corpus/flip_onto_stage3.rsl");
const COPY: &str = include_str!("../../../corpus/copy_queue_realiz.rsl");

const ALL: [&str; 8] = [EXCHANGE, EXCHANGE_FIXED, INVERT_FAULTY, INVERT_FIXED, FLIP_1, FLIP_2, FLIP_3, COPY];

fn vcs(src: &str) -> Vec<Vc> {
    match front_end(src, Library::shared()) {
        Ok((_, v)) => v,
        Err(d) => panic!("front end failed: {d:?}"),
    }
}

fn status(vc: &Vc) -> Status {
    let th: Vec<Theorem> = Library::shared().theorems().cloned().collect();
    prove_vc(vc, &th, &ProverOptions::default()).status
}

fn ids(v: &[Vc]) -> Vec<&str> {
    v.iter().map(|v| v.id.as_str()).collect()
}

fn find<'a>(v: &'a [Vc], id: &str) -> &'a Vc {
    v.iter().find(|v| v.id == id).unwrap_or_else(|| panic!("no VC {id}"))
}

#[test]
fn exchange_gives_eight_vcs_with_sum_bounds_first() {
    let v = vcs(EXCHANGE);
    assert_eq!(ids(&v), ["0_1", "0_2", "0_3", "0_4", "0_5", "0_6", "0_7", "0_8"]);
    assert_eq!(v[0].goal.to_string(), "min_int <= I + J");
    assert_eq!(v[1].goal.to_string(), "I + J <= max_int");
    assert!(v[2].givens.iter().any(|g| g.to_string() == "I' = I + J"));
    assert_eq!(v[6].goal.to_string(), "I'' = J");
    assert_eq!(v[7].goal.to_string(), "J' = I");
    assert_eq!(status(&v[0]), Status::Unprovable);
    assert_eq!(status(&v[1]), Status::Unprovable);
}

#[test]
fn requires_become_the_first_givens() {
    let plain = vcs(EXCHANGE);
    let fixed = vcs(EXCHANGE_FIXED);
    assert_eq!(ids(&plain), ids(&fixed));
    for (p, f) in plain.iter().zip(&fixed) {
        assert_eq!(f.givens[0].to_string(), "min_int <= I + J", "{}", f.id);
        assert_eq!(f.givens[1].to_string(), "I + J <= max_int", "{}", f.id);
        assert_eq!(f.givens[2..], p.givens[..], "{}", f.id);
        assert_eq!(status(f), Status::Proved, "{}", f.id);
    }
}

#[test]
fn invert_then_path_ensures_is_0_3() {
    let faulty = vcs(INVERT_FAULTY);
    let fixed = vcs(INVERT_FIXED);
    assert_eq!(ids(&faulty), ["0_1", "0_2", "0_3", "0_4"]);
    assert_eq!(ids(&faulty), ids(&fixed));
    let (f3, x3) = (find(&faulty, "0_3"), find(&fixed, "0_3"));
    assert_eq!(f3.kind, VcKind::ProcedureEnsures);
    assert_eq!(f3.givens[0].to_string(), "|Q| /= 0");
    assert_ne!(f3.givens, x3.givens);
    for id in ["0_1", "0_2", "0_4"] {
        assert_eq!(find(&faulty, id), find(&fixed, id));
    }
    let statuses: Vec<Status> = faulty.iter().map(status).collect();
    assert_eq!(statuses, [Status::Proved, Status::Proved, Status::Unprovable, Status::Proved]);
    assert!(fixed.iter().all(|v| status(v) == Status::Proved));
}

#[test]
fn dequeue_call_checks_then_advances() {
    let v = vcs(INVERT_FAULTY);
    assert_eq!(v[0].goal.to_string(), "|Q| /= 0");
    assert_eq!(v[1].givens[1].to_string(), "Q = <E'> o Q'");
}

#[test]
fn trivial_ensures_gives_one_true_vc() {
    let v = vcs("Facility F;\n Operation Nop();\n ensures true;\n Procedure\n end Nop;\nend F;\n");
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].goal, MathExp::Bool(true));
    assert_eq!(status(&v[0]), Status::Proved);
}

#[test]
fn requires_true_call_emits_no_vc() {
    let v = vcs("\
Realization R for Flipping of Stack_Template;
    Operation Flip_onto(updates S: Stack; updates T: Stack);
        ensures true;
    Procedure
        Var D: Integer;
        D := Depth(S);
    end Flip_onto;
end R;
");
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].kind, VcKind::ProcedureEnsures);
}

#[test]
fn empty_loop_cannot_show_progress() {
    let v = vcs("\
Facility F;
    Operation Spin(updates N: Integer);
    Procedure
        While N /= 0
            maintaining true;
            decreasing N;
        do
        end;
    end Spin;
end F;
");
    let kinds: Vec<VcKind> = v.iter().map(|v| v.kind).collect();
    for k in [VcKind::LoopInvariantBase, VcKind::LoopInvariantPreservation, VcKind::TerminationProgress] {
        assert!(kinds.contains(&k), "{kinds:?}");
    }
    let progress = v.iter().find(|v| v.kind == VcKind::TerminationProgress).unwrap();
    // nothing in the body changes N, so it keeps one value throughout
    assert_eq!(progress.goal.to_string(), "N < N");
    assert_eq!(status(progress), Status::Unprovable);
}

/// `depth` nested two-way Ifs inside a loop body.
fn nested(depth: usize) -> String {
    let mut body = "N := N - 1;".to_string();
    for d in 0..depth {
        body = format!("If N <= {d} then {body} else {body} end;");
    }
    format!(
        "Facility F;\n Operation P(updates N: Integer);\n requires 0 <= N;\n Procedure\n  While N /= 0\n   maintaining 0 <= N;\n   decreasing N;\n  do\n   {body}\n  end;\n end P;\nend F;\n"
    )
}

#[test]
fn nested_ifs_split_the_loop_body() {
    for depth in 0..=4 {
        let v = vcs(&nested(depth));
        let preserved = v.iter().filter(|v| v.kind == VcKind::LoopInvariantPreservation).count();
        assert_eq!(preserved, 1 << depth, "depth {depth}");
    }
}

#[test]
fn copy_restores_its_queue() {
    let v = vcs(COPY);
    let restores: Vec<&Vc> = v.iter().filter(|v| v.kind == VcKind::RestoresObligation).collect();
    assert_eq!(restores.len(), 1);
    let goal = restores[0].goal.to_string();
    assert!(goal.starts_with("Q'") && goal.ends_with(" = Q"), "{goal}");
}

#[test]
fn flip_ladder_narrative() {
    let s1 = vcs(FLIP_1);
    assert_eq!(s1[0].goal, MathExp::Bool(true));
    // the loop test is known about the counter, but nothing ties the
    // counter to the stack as it is inside the loop
    let pop = find(&s1, "1_1");
    assert_eq!(pop.goal.to_string(), "|S'| /= 0");
    let shown: Vec<String> = pop.givens.iter().map(|g| g.to_string()).collect();
    assert!(shown.iter().any(|g| g.starts_with("D'") && g.ends_with(" /= 0")), "{shown:?}");
    assert!(!shown.iter().any(|g| g.contains("S'")), "{shown:?}");
    assert_eq!(status(pop), Status::Unprovable);
    assert_eq!(status(find(&s1, "1_2")), Status::Unprovable);

    let s2 = vcs(FLIP_2);
    assert_eq!(status(find(&s2, "1_1")), Status::Proved);
    assert_eq!(status(find(&s2, "2_1")), Status::Unprovable);

    assert!(vcs(FLIP_3).iter().all(|v| status(v) == Status::Proved));
}

#[test]
fn goals_and_givens_are_ground() {
    for src in ALL {
        for vc in vcs(src) {
            for e in std::iter::once(&vc.goal).chain(&vc.givens) {
                assert!(!e.contains_old() && !e.contains_bound(), "{} {e}", vc.id);
            }
        }
    }
}

#[test]
fn lines_point_at_source_text() {
    for src in ALL {
        let lines: Vec<&str> = src.lines().collect();
        for vc in vcs(src) {
            let text = lines.get(vc.line as usize - 1).map_or("", |l| l.trim());
            assert!(!text.is_empty() && !text.starts_with("--"), "{} line {}", vc.id, vc.line);
        }
    }
}

#[test]
fn ids_are_numbered_from_one_per_block() {
    for src in ALL {
        let v = vcs(src);
        let mut last: Option<(u32, u32)> = None;
        for vc in &v {
            let (g, c) = vc.id.split_once('_').unwrap();
            let (g, c): (u32, u32) = (g.parse().unwrap(), c.parse().unwrap());
            match last {
                Some((lg, lc)) if lg == g => assert_eq!(c, lc + 1, "{}", vc.id),
                Some((lg, _)) => assert!(g > lg && c == 1, "{}", vc.id),
                None => assert_eq!(c, 1, "{}", vc.id),
            }
            last = Some((g, c));
        }
    }
}

#[test]
fn generation_is_deterministic() {
    for src in ALL {
        assert_eq!(vcs(src), vcs(src));
    }
}

use vcbench_core::lang::Diagnostic;
use vcbench_core::pipeline::front_end;
use vcbench_core::theory::Library;

fn errors(src: &str) -> Vec<Diagnostic> {
    match front_end(src, Library::shared()) {
        Ok(_) => panic!("expected diagnostics for:\n{src}"),
        Err(d) => d,
    }
}

fn facility(body: &str) -> String {
    format!("Facility F;\n    Operation P(updates N: Integer; updates S: Stack);\n    Procedure\n{body}    end P;\nend F;\n")
}

fn realization(body: &str) -> String {
    format!(
        "Realization R for Flipping of Stack_Template;\n    Operation Flip_onto(updates S: Stack; updates T: Stack);\n    Procedure\n{body}    end Flip_onto;\nend R;\n"
    )
}

fn first(src: &str) -> Diagnostic {
    errors(src).remove(0)
}

#[test]
fn undeclared_operation_is_unresolved() {
    let d = first(&realization("        Frobnicate(S);\n"));
    assert!(d.message.contains("unresolved operation `Frobnicate`"), "{}", d.message);
    assert_eq!(d.line, 4);
}

#[test]
fn literal_for_updates_formal() {
    let src = "Facility F;\n    Operation Exchange(updates I, J: Integer);\n        ensures I = #J and J = #I;\n    Procedure\n        I :=: J;\n    end Exchange;\n    Operation P(updates N: Integer);\n    Procedure\n        Exchange(N, 3);\n    end P;\nend F;\n";
    let d = first(src);
    assert!(d.message.contains("must be a variable"), "{}", d.message);
    assert_eq!(d.line, 9);
}

#[test]
fn loop_without_metric() {
    let d = first(&realization(
        "        Var D: Integer;\n        While D /= 0\n            maintaining true;\n        do\n            D := D - 1;\n        end;\n",
    ));
    assert!(d.message.contains("decreasing"), "{}", d.message);
    assert_eq!(d.line, 5);
}

#[test]
fn changing_clause_must_cover_assignments() {
    let d = first(&realization(
        "        Var D: Integer;\n        While D /= 0\n            changing S;\n            maintaining true;\n            decreasing D;\n        do\n            D := D - 1;\n        end;\n",
    ));
    assert!(d.message.contains("changing clause omits D"), "{}", d.message);
}

#[test]
fn unknown_variable() {
    let d = first(&realization("        X := 1;\n"));
    assert!(d.message.contains("unresolved variable `X`"), "{}", d.message);
    assert_eq!(d.line, 4);
}

#[test]
fn unknown_type() {
    let d = first(&facility(""));
    assert!(d.message.contains("unknown type `Stack`"), "{}", d.message);
    assert_eq!(d.line, 2);
}

#[test]
fn self_call_needs_recursive_procedure() {
    let src = "Realization R for Invert of Preemptable_Queue_Template;\n    Operation Invert(updates Q: P_Queue);\n        ensures Q = Reverse(#Q);\n    Procedure\n        Invert(Q);\n    end Invert;\nend R;\n";
    let d = first(src);
    assert!(d.message.contains("Recursive Procedure"), "{}", d.message);
    assert_eq!(d.line, 5);
}

#[test]
fn parse_errors_carry_positions() {
    let d = first("Facility F;\n    Operation P(;\nend F;\n");
    assert_eq!(d.line, 2);
    assert!(d.column > 0);
}

#[test]
fn ill_sorted_contract() {
    let d = first("Facility F;\n    Operation P(updates N: Integer);\n        ensures N = Reverse(N);\n    Procedure\n    end P;\nend F;\n");
    assert_eq!(d.line, 3);
}

//! Random small VCs: whatever the prover proves must have no countermodel
//! in the exhaustive finite model (alphabet 3, strings up to length 4,
//! integers in [-8, 8]). The acceptance run covers ten thousand seeds.

mod common;

use common::checks::soundness_fuzz;

#[test]
fn proved_vcs_have_no_finite_countermodel() {
    let f = soundness_fuzz(2_000);
    eprintln!("{} VCs, {} proved, {} violations", f.vcs, f.proved, f.violations.len());
    assert!(f.violations.is_empty(), "{:#?}", f.violations);
    assert!(f.proved >= f.vcs / 5, "only {} proved; the generator is too weak", f.proved);
}

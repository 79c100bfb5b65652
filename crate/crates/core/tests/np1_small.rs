//! The (n+1)-dimensional search and its control for n = 3 at reduced bounds.

use commlab::elements::{base_atoms, Element, Params};
use commlab::verifier::{search_np1_control, search_np1_failure, Budget, Outcome};

fn domain(params: &Params) -> Vec<Element> {
    base_atoms(params, 0).into_iter().filter(|e| !matches!(e, Element::D(_))).collect()
}

#[test]
fn n3_depth2_without_upqr_finds_no_witness() {
    let params = Params::new(3).unwrap();
    let s = domain(&params);
    let r = search_np1_failure(&params, &s, 2, 1, &[], &Budget::default(), true).unwrap();
    assert_eq!(r.outcome, Outcome::Pass, "{}", r.to_json_line());
    assert!(r.counts["terms_scanned"] > 0);
}

#[test]
fn n3_control_finds_f() {
    let params = Params::new(3).unwrap();
    let s = domain(&params);
    let r = search_np1_control(&params, &s, 2, 1, &[], &Budget::default(), true).unwrap();
    assert_eq!(r.outcome, Outcome::Pass, "{}", r.to_json_line());
    assert_eq!(r.detail.unwrap()["term"], "f(x0,x1,x2)");
}

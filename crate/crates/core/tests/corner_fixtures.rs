mod common;

use loopwave::cli::format::{read_input, InputFile};
use loopwave::irreducibility::{classify, Status};
use loopwave::loopgroup::{filters_to_loop, FilterSystem};

fn loop_of(name: &str) -> loopwave::Loop {
    match read_input(&common::fixture(name)).unwrap() {
        InputFile::Filters(f) => filters_to_loop(&FilterSystem::new(f.polys(false).unwrap()).unwrap()),
        InputFile::Loop(l) => loopwave::Loop::certify(l.matrix().unwrap(), 1e-10).unwrap(),
    }
}

#[test]
fn d4_verdict_matches_the_oracle() {
    let a = loop_of("d4.json");
    assert_eq!(common::oracle::corner(a.mat()), (2, vec![0, 1]));
    let v = classify(&a).unwrap();
    assert_eq!(v.status, Status::Reducible);
    assert_eq!(v.witness.unwrap().exponents, [0, 1]);
}

#[test]
fn fixture_verdicts() {
    for (name, exps) in [
        ("haar.json", vec![0, 0]),
        ("identity-loop.json", vec![0, 0]),
        ("diag-z2-z5.json", vec![2, 5]),
    ] {
        let a = loop_of(name);
        assert_eq!(common::oracle::corner(a.mat()), (2, exps.clone()), "{name}");
        assert_eq!(classify(&a).unwrap().witness.unwrap().exponents, exps, "{name}");
    }
}

//! Round trip of the Lie-ification pipeline: twist the trivial associator
//! by random group-like elements of T_2, recover the Lie representative,
//! and confirm the returned twist undoes the input up to isotropy.

use std::time::Instant;

use dkcalc::associator::{
    canonicalize_twist, lieify, random_twist, twist_apply, AssociatorCandidate,
};
use dkcalc::sample::SeededRng;

fn main() {
    let mut rng = SeededRng::new(7);
    let one = AssociatorCandidate::one(6).unwrap();
    for round in 0..4 {
        let start = Instant::now();
        let f = random_twist(&mut rng, 6).unwrap();
        let phi = twist_apply(&f, &one).unwrap();
        let result = lieify(&phi).unwrap();
        let canon_back = canonicalize_twist(&result.twist.inverse().unwrap()).unwrap();
        let canon_f = canonicalize_twist(&f).unwrap();
        println!(
            "round {round}: {:?}, log Lie: {}, twist recovered up to isotropy: {}",
            start.elapsed(),
            result.log_is_lie,
            canon_back == canon_f,
        );
        assert!(result.log_is_lie && canon_back == canon_f);
    }
}

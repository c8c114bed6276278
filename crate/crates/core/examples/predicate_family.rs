//! Close-to predicates for a segment with its endpoints: membership,
//! classification, the frontier check, and the tube volume law.

use stratkit::predicates::{
    interval_with_endpoints, predicate_poset_check, tube_volume_exact, tube_volume_mc, Shape,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fam = interval_with_endpoints();
    for x in [[0.0, 0.0], [0.05, 0.1], [0.5, 0.2], [1.0, 0.0], [0.5, 0.6]] {
        match fam.classify(&x)? {
            Some((id, rho)) => println!("{x:?} -> {id} (robustness {rho:.3})"),
            None => println!("{x:?} -> outside every tube"),
        }
    }
    let check = predicate_poset_check(&fam);
    println!("frontier order respected: {} over {} samples", check.ok, check.samples);

    let seg = Shape::segment(&[0.0, 0.0], &[1.0, 0.0]);
    for r in [0.1, 0.25, 0.5] {
        let est = tube_volume_mc(&seg, r, 200_000, 0)?;
        println!("tube r={r}: {:.4} +- {:.4}, exact {:.4}", est.estimate, est.std_error, tube_volume_exact(1.0, r));
    }
    let circle = Shape::circle(&[0.0, 0.0], 1.0);
    println!("unit circle reach {}", circle.reach()?);
    Ok(())
}

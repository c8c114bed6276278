//! Unrolls a half cylinder with landmark Isomap and compares the first
//! coordinate with the true arc length.

use stratkit::detect::embed::correlation;
use stratkit::detect::{dct_project, gen_half_cylinder, isomap_lite};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hc = gen_half_cylinder(2000, 1.0, 0)?;
    let e = isomap_lite(&hc.cloud, 10, 2)?;
    let first: Vec<f64> = e.coords.points().map(|p| p[0]).collect();
    println!("landmarks {}, residual {:.4}", e.landmarks.len(), e.residual);
    println!("|corr(first coordinate, arc length)| = {:.5}", correlation(&first, &hc.intrinsic).abs());
    let flat = dct_project(&hc.cloud, 2)?;
    let naive: Vec<f64> = flat.points().map(|p| p[0]).collect();
    println!("linear DCT projection for comparison: {:.5}", correlation(&naive, &hc.intrinsic).abs());
    Ok(())
}

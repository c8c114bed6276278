//! Parses a few STL formulas and evaluates their robustness on a ramp.

use stratkit::stl::{normalize, parse, robustness, robustness_signal, FunctionRegistry};
use stratkit::trace::Trace;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ramp = Trace::scalar(&[0.0, 1.0, 2.0, 3.0, 4.0])?;
    let reg = FunctionRegistry::for_channels(ramp.channels());
    for text in ["F[0,2] (x1 >= 3)", "G[0,4] (x1 <= 10)", "(x1 <= 2) U[0,4] (x1 >= 3)", "!(F[1,3] (x1 >= 5))"] {
        let phi = parse(text)?;
        let signal = robustness_signal(&phi, &ramp, &reg)?;
        let rho = robustness(&phi, &ramp, 0, &reg)?;
        println!("{phi}");
        println!("  signal {signal:?}");
        println!("  rho(0) = {rho}, normalized by 4: {}", normalize(rho, 4.0)?);
    }
    Ok(())
}

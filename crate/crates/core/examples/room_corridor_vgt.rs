//! Volume growth curves on a room joined to a corridor: slope 2 in the room,
//! slope 1 on the corridor until the ball reaches the room.

use stratkit::detect::vgt::{local_dims, two_nn_dim, vgt, vgt_dot, RadiusGrid};
use stratkit::detect::gen_room_corridor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rc = gen_room_corridor(5000, 0.0, 0)?;
    let grid = RadiusGrid::for_cloud(&rc.cloud);
    let (lo, hi) = grid.default_window();
    for probe in ["a", "b", "c"] {
        let i = rc.probe(probe).expect("generator places probes");
        let curve = vgt(&rc.cloud, i, &grid)?;
        let dot = vgt_dot(&curve, grid.default_bandwidth())?;
        let peak = dot.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!("probe {probe}: slope {:.3} on [{lo:.3}, {hi:.3}], max VGT-dot {peak:.3}", curve.slope_in(lo, hi)?);
    }
    let mut dims = local_dims(&rc.cloud, &grid, (lo, hi))?;
    dims.sort_by(f64::total_cmp);
    println!("median local dimension {:.3}", dims[dims.len() / 2]);
    println!("two-NN dimension {:.3}", two_nn_dim(&rc.cloud)?.estimate);
    Ok(())
}

//! Separates the neck of an hourglass from its lobes by clustering VGT-dot
//! features, and writes the result as an SVG scatter plot.

use stratkit::detect::cluster::majority;
use stratkit::detect::vgt::{RadiusGrid, DEFAULT_MIN_MEDIAN_COUNT};
use stratkit::detect::{gen_hourglass, kmeans, vgt_dot_features_trimmed};
use stratkit::plot::{scatter_plot, write_svg};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hg = gen_hourglass(4000, 0)?;
    let grid = RadiusGrid::for_cloud(&hg.cloud);
    let (features, first) =
        vgt_dot_features_trimmed(&hg.cloud, &grid, grid.default_bandwidth(), DEFAULT_MIN_MEDIAN_COUNT)?;
    println!("{} features per point from radius {:.4}", features.dim(), grid.radii()[first]);
    let km = kmeans(&features, 3, 0)?;
    for stratum in ["neck", "left", "right"] {
        let members = (0..hg.labels.len()).filter(|&i| hg.labels[i] == stratum);
        println!("{stratum:<5} -> cluster {:?}", majority(&km.labels, members));
    }
    let xs: Vec<f64> = hg.cloud.points().map(|p| p[0]).collect();
    let ys: Vec<f64> = hg.cloud.points().map(|p| p[1]).collect();
    let path = std::env::temp_dir().join("hourglass_clusters.svg");
    write_svg(&path, &scatter_plot(&xs, &ys, &km.labels, "hourglass, k = 3")?)?;
    println!("wrote {}", path.display());
    Ok(())
}

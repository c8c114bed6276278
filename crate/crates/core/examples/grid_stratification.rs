//! Face poset of a grid, its order complex, and the stratification induced
//! by a random spanning-tree policy.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stratkit::poset::{face_poset, order_complex, GridComplex};
use stratkit::spaces::{tree_stratification, FacePolicy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = GridComplex::new(3, 3);
    let faces = face_poset(&grid);
    println!("3x3 cells (faces, edges, vertices): {:?}, total {}", grid.cell_counts(), faces.len());
    println!("chains of length <= 2 in the face poset: {}", order_complex(&faces, 2).len());

    let policy = FacePolicy::random_spanning_tree(3, 3, (2, 0), &mut ChaCha8Rng::seed_from_u64(1));
    println!("policy moves {:?}", policy.moves);
    let strat = tree_stratification(&policy)?;
    println!("monotone: {}", strat.map.is_monotone().monotone);
    for cell in ["v1,1", "h1,1", "e1,1", "f1,1"] {
        if let Ok(node) = strat.map.image(cell) {
            println!("{cell} -> {node}");
        }
    }
    print!("{}", strat.tree.tree.to_dot("tree"));
    Ok(())
}

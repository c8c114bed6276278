//! Grid policies as spanning trees, and the induced tree stratification of
//! the grid's face poset.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SpacesError;
use crate::poset::{face_poset, Cell, GridComplex, MonotoneMap, Poset};

/// Translation actions of the no-rotation grid game. `None` stays put.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    None,
    Up,
    Down,
    Left,
    Right,
}

impl Move {
    /// Enumeration order; also the tie-break order used by planners.
    pub const ALL: [Move; 5] = [Move::None, Move::Up, Move::Down, Move::Left, Move::Right];

    pub fn delta(self) -> (isize, isize) {
        match self {
            Move::None => (0, 0),
            Move::Up => (-1, 0),
            Move::Down => (1, 0),
            Move::Left => (0, -1),
            Move::Right => (0, 1),
        }
    }

    /// Move from `a` to the 4-neighbour `b`.
    pub fn between(a: (usize, usize), b: (usize, usize)) -> Option<Move> {
        let d = (b.0 as isize - a.0 as isize, b.1 as isize - a.1 as isize);
        Move::ALL.into_iter().find(|m| m.delta() == d)
    }
}

/// A stationary policy on the tiles of a rows x cols grid. Rows grow
/// downward; moves off the grid are clipped to no-ops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacePolicy {
    pub rows: usize,
    pub cols: usize,
    pub goal: (usize, usize),
    /// Row-major, one move per tile.
    pub moves: Vec<Move>,
}

impl FacePolicy {
    pub fn new(rows: usize, cols: usize, goal: (usize, usize), moves: Vec<Move>) -> Result<Self, SpacesError> {
        if rows == 0 || cols == 0 || moves.len() != rows * cols || goal.0 >= rows || goal.1 >= cols {
            return Err(SpacesError::BadPolicy(format!(
                "{rows}x{cols} grid with goal {goal:?} and {} moves",
                moves.len()
            )));
        }
        Ok(FacePolicy { rows, cols, goal, moves })
    }

    pub fn grid(&self) -> GridComplex {
        GridComplex::new(self.rows, self.cols)
    }

    pub fn successor(&self, cell: (usize, usize)) -> (usize, usize) {
        let (dr, dc) = self.moves[cell.0 * self.cols + cell.1].delta();
        let r = cell.0 as isize + dr;
        let c = cell.1 as isize + dc;
        if r < 0 || c < 0 || r >= self.rows as isize || c >= self.cols as isize {
            cell
        } else {
            (r as usize, c as usize)
        }
    }

    /// Uniform random spanning tree oriented toward the goal (Wilson's
    /// loop-erased random walks).
    pub fn random_spanning_tree<R: Rng>(rows: usize, cols: usize, goal: (usize, usize), rng: &mut R) -> Self {
        let n = rows * cols;
        let id = |(r, c): (usize, usize)| r * cols + c;
        let mut in_tree = vec![false; n];
        let mut next: Vec<Option<(usize, usize)>> = vec![None; n];
        in_tree[id(goal)] = true;
        let mut order: Vec<(usize, usize)> = (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c))).collect();
        order.shuffle(rng);
        for start in order {
            let mut u = start;
            while !in_tree[id(u)] {
                let nbrs = neighbours(rows, cols, u);
                let v = nbrs[rng.gen_range(0..nbrs.len())];
                next[id(u)] = Some(v);
                u = v;
            }
            let mut u = start;
            while !in_tree[id(u)] {
                in_tree[id(u)] = true;
                u = next[id(u)].expect("walk recorded a successor");
            }
        }
        let moves = (0..n)
            .map(|i| {
                let cell = (i / cols, i % cols);
                match next[i] {
                    Some(v) if cell != goal => Move::between(cell, v).expect("walk steps to a neighbour"),
                    _ => Move::None,
                }
            })
            .collect();
        FacePolicy { rows, cols, goal, moves }
    }
}

fn neighbours(rows: usize, cols: usize, (r, c): (usize, usize)) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(4);
    if r > 0 {
        out.push((r - 1, c));
    }
    if r + 1 < rows {
        out.push((r + 1, c));
    }
    if c > 0 {
        out.push((r, c - 1));
    }
    if c + 1 < cols {
        out.push((r, c + 1));
    }
    out
}

/// Tree poset rooted at the goal tile (its minimum), with `Phi(s) < s`.
#[derive(Debug, Clone)]
pub struct PolicyTree {
    pub tree: Poset,
    /// Face id -> tree element.
    pub cell_map: HashMap<String, String>,
}

fn face_id(cell: (usize, usize)) -> String {
    Cell::Face(cell.0, cell.1).id()
}

/// Checks that the policy's flow is a spanning tree into the goal.
pub fn policy_tree(policy: &FacePolicy) -> Result<PolicyTree, SpacesError> {
    let (rows, cols) = (policy.rows, policy.cols);
    let n = rows * cols;
    for r in 0..rows {
        for c in 0..cols {
            let start = (r, c);
            let mut path = vec![start];
            let mut cur = start;
            while cur != policy.goal {
                let nxt = policy.successor(cur);
                if nxt == cur {
                    return Err(SpacesError::NotASpanningTree(format!(
                        "{} is a fixed point off the goal; {} never reaches {}",
                        face_id(cur),
                        face_id(start),
                        face_id(policy.goal)
                    )));
                }
                if let Some(pos) = path.iter().position(|&p| p == nxt) {
                    let cyc: Vec<String> = path[pos..].iter().chain(std::iter::once(&nxt)).map(|&p| face_id(p)).collect();
                    return Err(SpacesError::NotASpanningTree(format!("cycle {}", cyc.join(" -> "))));
                }
                path.push(nxt);
                cur = nxt;
                debug_assert!(path.len() <= n + 1);
            }
        }
    }
    let names: Vec<String> = (0..n).map(|i| face_id((i / cols, i % cols))).collect();
    let covers = (0..n)
        .map(|i| (i / cols, i % cols))
        .filter(|&cell| cell != policy.goal)
        .map(|cell| (face_id(policy.successor(cell)), face_id(cell)))
        .collect();
    let tree = Poset::new(names.clone(), covers).expect("acyclic successor graph is a tree");
    let cell_map = names.iter().map(|n| (n.clone(), n.clone())).collect();
    Ok(PolicyTree { tree, cell_map })
}

/// Output of the grid stratification: the face poset map and its tree.
#[derive(Debug, Clone)]
pub struct GridStratification {
    pub map: MonotoneMap,
    pub tree: PolicyTree,
}

/// Sends each tile to its tree node and every lower cell to the meet of the
/// tiles it bounds.
pub fn tree_stratification(policy: &FacePolicy) -> Result<GridStratification, SpacesError> {
    let tree = policy_tree(policy)?;
    let faces = face_poset(&policy.grid());
    tree.tree.check_tree().map_err(SpacesError::Poset)?;
    let mut assignment = Vec::with_capacity(faces.len());
    for i in 0..faces.len() {
        let above = faces.up_set_mask(&[i]);
        let tiles: Vec<usize> = above
            .iter()
            .enumerate()
            .filter(|&(j, &m)| m && faces.name(j).starts_with('f'))
            .map(|(j, _)| tree.tree.index_of(&tree.cell_map[faces.name(j)]).expect("tile in tree"))
            .collect();
        assignment.push(tree.tree.tree_meet_idx(&tiles).map_err(SpacesError::Poset)?);
    }
    let map = MonotoneMap::from_indices(faces, tree.tree.clone(), assignment);
    Ok(GridStratification { map, tree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The figure's 3x3 tree: goal at the bottom-left tile, left column flows
    /// down, the rest flows left along its row.
    fn three_by_three_policy() -> FacePolicy {
        use Move::*;
        FacePolicy::new(3, 3, (2, 0), vec![Down, Left, Left, Down, Left, Left, None, Left, Left]).unwrap()
    }

    #[test]
    fn single_tile_is_constant() {
        let p = FacePolicy::new(1, 1, (0, 0), vec![Move::None]).unwrap();
        let s = tree_stratification(&p).unwrap();
        assert_eq!(s.map.source.len(), 9);
        assert!((0..9).all(|i| s.map.image_idx(i) == 0));
        assert!(s.map.is_monotone().monotone);
    }

    #[test]
    fn three_by_three_tree_is_monotone() {
        let s = tree_stratification(&three_by_three_policy()).unwrap();
        assert_eq!(s.tree.tree.len(), 9);
        assert_eq!(s.map.source.len(), 49);
        assert!(s.map.is_monotone().monotone);
        // the vertex shared by all four lower-right tiles maps to their meet
        assert_eq!(s.map.image("v2,2").unwrap(), "f2,0");
        assert_eq!(s.map.image("h1,2").unwrap(), "f1,0");
        assert_eq!(s.map.image("e0,2").unwrap(), "f0,1");
    }

    #[test]
    fn two_cycle_is_rejected() {
        let mut p = three_by_three_policy();
        p.moves[1] = Move::Right;
        p.moves[2] = Move::Left;
        let err = tree_stratification(&p).unwrap_err();
        assert!(matches!(&err, SpacesError::NotASpanningTree(w) if w.contains("cycle")), "{err}");
    }

    #[test]
    fn stuck_cell_is_rejected() {
        let mut p = three_by_three_policy();
        p.moves[4] = Move::None;
        assert!(matches!(policy_tree(&p), Err(SpacesError::NotASpanningTree(w)) if w.contains("f1,1")));
    }

    #[test]
    fn random_trees_are_spanning() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = FacePolicy::random_spanning_tree(4, 3, (1, 2), &mut rng);
            assert!(policy_tree(&p).is_ok());
        }
    }
}

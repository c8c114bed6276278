//! Finite posets stored as Hasse covers, with a precomputed reachability
//! closure.
//!
//! Closed sets of the Alexandrov topology are the down-sets, so a map between
//! posets is continuous exactly when it is monotone. Everything here works on
//! string element ids; internally elements are dense indices.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PosetError {
    #[error("cycle-detected: {}", .0.join(" < "))]
    CycleDetected(Vec<String>),
    #[error("redundant-cover: ({0}, {1}) is implied by a longer path")]
    RedundantCover(String, String),
    #[error("unknown-element: {0}")]
    UnknownElement(String),
    #[error("duplicate-element: {0}")]
    DuplicateElement(String),
    #[error("partial-assignment: no image for {0}")]
    PartialAssignment(String),
    #[error("not-a-tree: {0}")]
    NotATree(String),
    #[error("empty-set: meet of an empty family")]
    EmptySet,
}

/// Plain exchange form: `{"elements": [...], "covers": [[lo, hi], ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct PosetData {
    pub elements: Vec<String>,
    pub covers: Vec<(String, String)>,
}

/// Row-per-element bitset used for the reachability closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRows {
    words: usize,
    bits: Vec<u64>,
}

impl BitRows {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        BitRows { words, bits: vec![0; words * n] }
    }

    #[inline]
    fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.words + col / 64] >> (col % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, row: usize, col: usize) {
        self.bits[row * self.words + col / 64] |= 1 << (col % 64);
    }

    /// row `dst` |= row `src`
    fn or_row(&mut self, dst: usize, src: usize) {
        for w in 0..self.words {
            let v = self.bits[src * self.words + w];
            self.bits[dst * self.words + w] |= v;
        }
    }
}

/// A validated finite poset.
#[derive(Debug, Clone)]
pub struct Poset {
    names: Vec<String>,
    index: HashMap<String, usize>,
    covers: Vec<(usize, usize)>,
    lower: Vec<Vec<usize>>,
    upper: Vec<Vec<usize>>,
    /// `up.get(x, y)` iff x <= y (reflexive).
    up: BitRows,
}

impl PartialEq for Poset {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.covers == other.covers
    }
}

fn index_elements(elements: &[String]) -> Result<HashMap<String, usize>, PosetError> {
    let mut index = HashMap::with_capacity(elements.len());
    for (i, e) in elements.iter().enumerate() {
        if index.insert(e.clone(), i).is_some() {
            return Err(PosetError::DuplicateElement(e.clone()));
        }
    }
    Ok(index)
}

/// Topological order of the cover graph, or the first directed cycle found.
fn topo_order(n: usize, succ: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        parent[w] = v;
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cycle = vec![w];
                        let mut cur = v;
                        while cur != w {
                            cycle.push(cur);
                            cur = parent[cur];
                        }
                        cycle.push(w);
                        cycle.reverse();
                        return Err(cycle);
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                order.push(v);
                stack.pop();
            }
        }
    }
    order.reverse();
    Ok(order)
}

/// Reflexive-transitive closure; `order` must be a topological order.
fn closure(n: usize, succ: &[Vec<usize>], order: &[usize]) -> BitRows {
    let mut up = BitRows::new(n);
    for &v in order.iter().rev() {
        up.set(v, v);
        for &w in &succ[v] {
            up.or_row(v, w);
        }
    }
    up
}

/// Checks the two structural invariants without building a [`Poset`].
pub fn validate_poset(data: &PosetData) -> Result<(), PosetError> {
    Poset::from_data(data).map(|_| ())
}

impl Poset {
    /// Builds a poset from Hasse covers, rejecting cycles and redundant covers.
    pub fn new(elements: Vec<String>, covers: Vec<(String, String)>) -> Result<Self, PosetError> {
        let index = index_elements(&elements)?;
        let mut idx_covers = Vec::with_capacity(covers.len());
        for (lo, hi) in &covers {
            let l = *index.get(lo).ok_or_else(|| PosetError::UnknownElement(lo.clone()))?;
            let h = *index.get(hi).ok_or_else(|| PosetError::UnknownElement(hi.clone()))?;
            idx_covers.push((l, h));
        }
        Self::from_indexed(elements, index, idx_covers)
    }

    pub fn from_data(data: &PosetData) -> Result<Self, PosetError> {
        Self::new(data.elements.clone(), data.covers.clone())
    }

    fn from_indexed(
        names: Vec<String>,
        index: HashMap<String, usize>,
        mut covers: Vec<(usize, usize)>,
    ) -> Result<Self, PosetError> {
        let n = names.len();
        covers.sort_unstable();
        covers.dedup();
        let mut succ = vec![Vec::new(); n];
        for &(l, h) in &covers {
            if l == h {
                return Err(PosetError::CycleDetected(vec![names[l].clone(), names[l].clone()]));
            }
            succ[l].push(h);
        }
        let order = topo_order(n, &succ)
            .map_err(|cyc| PosetError::CycleDetected(cyc.into_iter().map(|i| names[i].clone()).collect()))?;
        let up = closure(n, &succ, &order);
        // (l, h) is redundant iff some other successor of l already reaches h
        for &(l, h) in &covers {
            if succ[l].iter().any(|&m| m != h && up.get(m, h)) {
                return Err(PosetError::RedundantCover(names[l].clone(), names[h].clone()));
            }
        }
        let mut lower = vec![Vec::new(); n];
        let mut upper = vec![Vec::new(); n];
        for &(l, h) in &covers {
            upper[l].push(h);
            lower[h].push(l);
        }
        Ok(Poset { names, index, covers, lower, upper, up })
    }

    /// Builds a poset from an arbitrary order predicate `leq(i, j)` on the
    /// given elements, keeping only the Hasse covers.
    ///
    /// `leq` must be reflexive, antisymmetric and transitive on the elements.
    pub fn from_order<F>(elements: Vec<String>, leq: F) -> Result<Self, PosetError>
    where
        F: Fn(usize, usize) -> bool,
    {
        let n = elements.len();
        let index = index_elements(&elements)?;
        let mut covers = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || !leq(i, j) {
                    continue;
                }
                if leq(j, i) {
                    return Err(PosetError::CycleDetected(vec![
                        elements[i].clone(),
                        elements[j].clone(),
                        elements[i].clone(),
                    ]));
                }
                let between = (0..n).any(|k| k != i && k != j && leq(i, k) && leq(k, j));
                if !between {
                    covers.push((i, j));
                }
            }
        }
        Self::from_indexed(elements, index, covers)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize, PosetError> {
        self.index.get(name).copied().ok_or_else(|| PosetError::UnknownElement(name.to_string()))
    }

    /// Hasse covers as index pairs `(lower, upper)`.
    pub fn cover_indices(&self) -> &[(usize, usize)] {
        &self.covers
    }

    pub fn covers(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.covers.iter().map(|&(l, h)| (self.names[l].as_str(), self.names[h].as_str()))
    }

    pub fn lower_covers(&self, i: usize) -> &[usize] {
        &self.lower[i]
    }

    pub fn upper_covers(&self, i: usize) -> &[usize] {
        &self.upper[i]
    }

    #[inline]
    pub fn leq_idx(&self, a: usize, b: usize) -> bool {
        self.up.get(a, b)
    }

    pub fn leq(&self, a: &str, b: &str) -> Result<bool, PosetError> {
        Ok(self.leq_idx(self.index_of(a)?, self.index_of(b)?))
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.lower[i].is_empty()).collect()
    }

    pub fn maximal_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.upper[i].is_empty()).collect()
    }

    /// Index-level down-set: membership mask of `{x | x <= y for some y in seeds}`.
    pub fn down_set_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for x in 0..self.len() {
            mask[x] = seeds.iter().any(|&y| self.up.get(x, y));
        }
        mask
    }

    pub fn up_set_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for x in 0..self.len() {
            mask[x] = seeds.iter().any(|&y| self.up.get(y, x));
        }
        mask
    }

    /// Closed-set generator of the Alexandrov topology.
    pub fn down_set<S: AsRef<str>>(&self, set: &[S]) -> Result<BTreeSet<String>, PosetError> {
        let seeds = set.iter().map(|s| self.index_of(s.as_ref())).collect::<Result<Vec<_>, _>>()?;
        Ok(self
            .down_set_mask(&seeds)
            .into_iter()
            .enumerate()
            .filter(|&(_, m)| m)
            .map(|(i, _)| self.names[i].clone())
            .collect())
    }

    /// True iff the mask is closed downward.
    pub fn is_down_set(&self, mask: &[bool]) -> bool {
        self.covers.iter().all(|&(l, h)| !mask[h] || mask[l])
    }

    /// Opposite poset (every cover reversed).
    pub fn opposite(&self) -> Poset {
        let covers = self.covers.iter().map(|&(l, h)| (h, l)).collect();
        Self::from_indexed(self.names.clone(), self.index.clone(), covers)
            .expect("reversing a valid cover relation stays valid")
    }

    pub fn to_data(&self) -> PosetData {
        PosetData {
            elements: self.names.clone(),
            covers: self.covers().map(|(l, h)| (l.to_string(), h.to_string())).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_data()).expect("poset data serializes")
    }

    /// Hasse diagram as DOT text; edges point from lower to upper element.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", escape_dot(name));
        let _ = writeln!(out, "  rankdir=BT;");
        for e in &self.names {
            let _ = writeln!(out, "  \"{}\";", escape_dot(e));
        }
        for (l, h) in self.covers() {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", escape_dot(l), escape_dot(h));
        }
        out.push_str("}\n");
        out
    }

    /// Greatest lower bound in a tree poset rooted at its minimum.
    pub fn tree_meet<S: AsRef<str>>(&self, set: &[S]) -> Result<String, PosetError> {
        let idx = set.iter().map(|s| self.index_of(s.as_ref())).collect::<Result<Vec<_>, _>>()?;
        self.check_tree()?;
        self.tree_meet_idx(&idx).map(|i| self.names[i].clone())
    }

    /// Verifies the rooted-tree shape: a unique minimum and at most one lower
    /// cover per element.
    pub fn check_tree(&self) -> Result<usize, PosetError> {
        let mins = self.minimal_elements();
        if mins.len() != 1 {
            return Err(PosetError::NotATree(format!("{} minimal elements", mins.len())));
        }
        if let Some(i) = (0..self.len()).find(|&i| self.lower[i].len() > 1) {
            return Err(PosetError::NotATree(format!("{} has {} lower covers", self.names[i], self.lower[i].len())));
        }
        Ok(mins[0])
    }

    /// Index-level meet; assumes [`Poset::check_tree`] passed.
    pub fn tree_meet_idx(&self, set: &[usize]) -> Result<usize, PosetError> {
        let (&first, rest) = set.split_first().ok_or(PosetError::EmptySet)?;
        let mut meet = first;
        for &x in rest {
            // climb from meet toward the root until it lies below x
            while !self.up.get(meet, x) {
                meet = self.lower[meet][0];
            }
        }
        Ok(meet)
    }
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// A total assignment between two posets.
#[derive(Debug, Clone)]
pub struct MonotoneMap {
    pub source: Poset,
    pub target: Poset,
    assignment: Vec<usize>,
}

/// Outcome of a monotonicity check; `violation` is a cover `x < y` of the
/// source whose images are not ordered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneCheck {
    pub monotone: bool,
    pub violation: Option<(String, String)>,
}

impl MonotoneMap {
    pub fn new(source: Poset, target: Poset, assignment: &HashMap<String, String>) -> Result<Self, PosetError> {
        let mut idx = Vec::with_capacity(source.len());
        for name in source.elements() {
            let img = assignment.get(name).ok_or_else(|| PosetError::PartialAssignment(name.clone()))?;
            idx.push(target.index_of(img)?);
        }
        Ok(MonotoneMap { source, target, assignment: idx })
    }

    pub(crate) fn from_indices(source: Poset, target: Poset, assignment: Vec<usize>) -> Self {
        debug_assert_eq!(source.len(), assignment.len());
        MonotoneMap { source, target, assignment }
    }

    pub fn image_idx(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn image(&self, name: &str) -> Result<&str, PosetError> {
        Ok(self.target.name(self.assignment[self.source.index_of(name)?]))
    }

    /// Checks every Hasse edge of the source; transitivity covers the rest.
    pub fn is_monotone(&self) -> MonotoneCheck {
        for &(l, h) in self.source.cover_indices() {
            if !self.target.leq_idx(self.assignment[l], self.assignment[h]) {
                return MonotoneCheck {
                    monotone: false,
                    violation: Some((self.source.name(l).to_string(), self.source.name(h).to_string())),
                };
            }
        }
        MonotoneCheck { monotone: true, violation: None }
    }

    /// Preimage (as a mask over source elements) of a mask over the target.
    pub fn preimage(&self, target_mask: &[bool]) -> Vec<bool> {
        self.assignment.iter().map(|&t| target_mask[t]).collect()
    }
}

/// Cells of a rows x cols grid cell complex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    /// Corner at grid line intersection (row line, column line).
    Vertex(usize, usize),
    /// Horizontal edge on row line `r`, spanning column `c`.
    HEdge(usize, usize),
    /// Vertical edge on column line `c`, spanning row `r` (stored as (r, c)).
    VEdge(usize, usize),
    /// Tile (row, col).
    Face(usize, usize),
}

impl Cell {
    pub fn id(&self) -> String {
        match *self {
            Cell::Vertex(r, c) => format!("v{r},{c}"),
            Cell::HEdge(r, c) => format!("h{r},{c}"),
            Cell::VEdge(r, c) => format!("e{r},{c}"),
            Cell::Face(r, c) => format!("f{r},{c}"),
        }
    }

    pub fn dimension(&self) -> u8 {
        match self {
            Cell::Vertex(..) => 0,
            Cell::HEdge(..) | Cell::VEdge(..) => 1,
            Cell::Face(..) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridComplex {
    pub rows: usize,
    pub cols: usize,
}

impl GridComplex {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "grid needs at least one tile");
        GridComplex { rows, cols }
    }

    /// All cells: faces, then horizontal edges, vertical edges, vertices.
    pub fn cells(&self) -> Vec<Cell> {
        let (rows, cols) = (self.rows, self.cols);
        let mut out = Vec::with_capacity(self.cell_counts().iter().sum());
        for r in 0..rows {
            for c in 0..cols {
                out.push(Cell::Face(r, c));
            }
        }
        for r in 0..=rows {
            for c in 0..cols {
                out.push(Cell::HEdge(r, c));
            }
        }
        for r in 0..rows {
            for c in 0..=cols {
                out.push(Cell::VEdge(r, c));
            }
        }
        for r in 0..=rows {
            for c in 0..=cols {
                out.push(Cell::Vertex(r, c));
            }
        }
        out
    }

    /// Closed-form (faces, edges, vertices).
    pub fn cell_counts(&self) -> [usize; 3] {
        let (r, c) = (self.rows, self.cols);
        [r * c, r * (c + 1) + c * (r + 1), (r + 1) * (c + 1)]
    }

    /// Cells of one dimension higher that have `cell` on their boundary.
    pub fn cofaces(&self, cell: Cell) -> Vec<Cell> {
        let (rows, cols) = (self.rows, self.cols);
        let mut out = Vec::new();
        match cell {
            Cell::Face(..) => {}
            Cell::HEdge(r, c) => {
                if r > 0 {
                    out.push(Cell::Face(r - 1, c));
                }
                if r < rows {
                    out.push(Cell::Face(r, c));
                }
            }
            Cell::VEdge(r, c) => {
                if c > 0 {
                    out.push(Cell::Face(r, c - 1));
                }
                if c < cols {
                    out.push(Cell::Face(r, c));
                }
            }
            Cell::Vertex(r, c) => {
                if c > 0 {
                    out.push(Cell::HEdge(r, c - 1));
                }
                if c < cols {
                    out.push(Cell::HEdge(r, c));
                }
                if r > 0 {
                    out.push(Cell::VEdge(r - 1, c));
                }
                if r < rows {
                    out.push(Cell::VEdge(r, c));
                }
            }
        }
        out
    }
}

/// Face poset of the grid: vertices < incident edges < incident tiles.
pub fn face_poset(g: &GridComplex) -> Poset {
    let cells = g.cells();
    let names: Vec<String> = cells.iter().map(Cell::id).collect();
    let index = index_elements(&names).expect("cell ids are unique");
    let mut covers = Vec::new();
    for (i, cell) in cells.iter().enumerate() {
        for up in g.cofaces(*cell) {
            covers.push((i, index[&up.id()]));
        }
    }
    Poset::from_indexed(names, index, covers).expect("face relation is a valid cover relation")
}

/// Chains of a poset ordered by reverse inclusion (the empty chain is the
/// maximum).
#[derive(Debug, Clone)]
pub struct OrderComplex {
    pub base: Poset,
    /// Each chain lists base indices in increasing order.
    pub chains: Vec<Vec<usize>>,
}

impl OrderComplex {
    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn chain_id(&self, chain: &[usize]) -> String {
        chain_label(chain.iter().map(|&i| self.base.name(i)))
    }

    /// The complex as a poset; covers drop exactly one element.
    pub fn to_poset(&self) -> Poset {
        let names: Vec<String> = self.chains.iter().map(|c| self.chain_id(c)).collect();
        let index = index_elements(&names).expect("chain ids are unique");
        let mut covers = Vec::new();
        for (i, big) in self.chains.iter().enumerate() {
            for skip in 0..big.len() {
                let small: Vec<usize> =
                    big.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                if let Some(&j) = index.get(&self.chain_id(&small)) {
                    covers.push((i, j));
                }
            }
        }
        Poset::from_indexed(names, index, covers).expect("reverse inclusion of chains is a poset")
    }
}

/// Label used for a chain inside exported order complexes, e.g. `[A,C]`.
pub fn chain_label<'a, I: IntoIterator<Item = &'a str>>(chain: I) -> String {
    let parts: Vec<&str> = chain.into_iter().collect();
    format!("[{}]", parts.join(","))
}

/// All chains with at most `max_len` elements, plus the empty chain.
pub fn order_complex(p: &Poset, max_len: usize) -> OrderComplex {
    let mut chains = vec![Vec::new()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for chain in &frontier {
            for x in 0..p.len() {
                let extends = match chain.last() {
                    None => true,
                    Some(&top) => top != x && p.leq_idx(top, x),
                };
                if extends {
                    let mut c = chain.clone();
                    c.push(x);
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        chains.extend(next.iter().cloned());
        frontier = next;
    }
    OrderComplex { base: p.clone(), chains }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn c(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    fn five_strata() -> Poset {
        Poset::new(s(&["A", "B", "C", "D", "E"]), c(&[("C", "B"), ("B", "A"), ("C", "D"), ("E", "D")])).unwrap()
    }

    #[test]
    fn validate_examples() {
        let chain = PosetData { elements: s(&["a", "b", "c"]), covers: c(&[("a", "b"), ("b", "c")]) };
        assert!(validate_poset(&chain).is_ok());

        let cyc = PosetData { elements: s(&["a", "b"]), covers: c(&[("a", "b"), ("b", "a")]) };
        assert!(matches!(validate_poset(&cyc), Err(PosetError::CycleDetected(_))));

        let red = PosetData { elements: s(&["a", "b", "c"]), covers: c(&[("a", "b"), ("b", "c"), ("a", "c")]) };
        assert_eq!(validate_poset(&red), Err(PosetError::RedundantCover("a".into(), "c".into())));

        let unknown = PosetData { elements: s(&["a"]), covers: c(&[("a", "z")]) };
        assert_eq!(validate_poset(&unknown), Err(PosetError::UnknownElement("z".into())));
    }

    #[test]
    fn down_set_examples() {
        let chain = Poset::new(s(&["a", "b", "c"]), c(&[("a", "b"), ("b", "c")])).unwrap();
        assert_eq!(chain.down_set(&["b"]).unwrap(), ["a", "b"].iter().map(|x| x.to_string()).collect());
        assert_eq!(five_strata().down_set(&["A"]).unwrap(), ["A", "B", "C"].iter().map(|x| x.to_string()).collect());
        let anti = Poset::new(s(&["x", "y"]), vec![]).unwrap();
        assert_eq!(anti.down_set(&["x"]).unwrap().len(), 1);
        assert!(matches!(anti.down_set(&["q"]), Err(PosetError::UnknownElement(_))));
    }

    #[test]
    fn five_strata_refine_dimension_poset() {
        let dims = Poset::new(s(&["0", "1", "2"]), c(&[("0", "1"), ("1", "2")])).unwrap();
        let assign: HashMap<String, String> =
            [("A", "2"), ("B", "1"), ("D", "1"), ("C", "0"), ("E", "0")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
        let m = MonotoneMap::new(five_strata(), dims, &assign).unwrap();
        assert!(m.is_monotone().monotone);
        // C < A holds through B in the closure
        assert!(five_strata().leq("C", "A").unwrap());
    }

    #[test]
    fn monotone_partial_and_identity() {
        let p = five_strata();
        let id: HashMap<String, String> = p.elements().iter().map(|e| (e.clone(), e.clone())).collect();
        assert!(MonotoneMap::new(p.clone(), p.clone(), &id).unwrap().is_monotone().monotone);
        let mut partial = id.clone();
        partial.remove("E");
        assert_eq!(
            MonotoneMap::new(p.clone(), p, &partial).unwrap_err(),
            PosetError::PartialAssignment("E".into())
        );
    }

    #[test]
    fn face_poset_counts() {
        assert_eq!(face_poset(&GridComplex::new(1, 1)).len(), 9);
        let g = GridComplex::new(3, 3);
        assert_eq!(g.cell_counts(), [9, 24, 16]);
        assert_eq!(face_poset(&g).len(), 49);
        assert_eq!(face_poset(&GridComplex::new(2, 3)).len(), 35);
        let p = face_poset(&GridComplex::new(1, 1));
        assert!(p.leq("v0,0", "f0,0").unwrap());
        assert!(p.leq("h0,0", "f0,0").unwrap());
        assert!(!p.leq("v1,1", "h0,0").unwrap());
    }

    #[test]
    fn order_complex_examples() {
        let ab = Poset::new(s(&["a", "b"]), c(&[("a", "b")])).unwrap();
        let k = order_complex(&ab, 2);
        assert_eq!(k.len(), 4);
        let kp = k.to_poset();
        // empty chain is the unique maximum
        assert_eq!(kp.maximal_elements(), vec![kp.index_of("[]").unwrap()]);
        assert!(kp.leq("[a,b]", "[a]").unwrap());

        let anti = Poset::new(s(&["x", "y"]), vec![]).unwrap();
        assert_eq!(order_complex(&anti, 3).len(), 3);
        let empty = Poset::new(vec![], vec![]).unwrap();
        assert_eq!(order_complex(&empty, 2).len(), 1);
    }

    #[test]
    fn tree_meet_examples() {
        let t = Poset::new(s(&["r", "u", "v", "w"]), c(&[("r", "u"), ("r", "v"), ("u", "w")])).unwrap();
        assert_eq!(t.tree_meet(&["w"]).unwrap(), "w");
        assert_eq!(t.tree_meet(&["u", "v"]).unwrap(), "r");
        assert_eq!(t.tree_meet(&["w", "v"]).unwrap(), "r");
        assert_eq!(t.tree_meet(&["w", "u"]).unwrap(), "u");
        assert!(matches!(five_strata().tree_meet(&["A"]), Err(PosetError::NotATree(_))));
    }

    #[test]
    fn dot_and_json_export() {
        let p = five_strata();
        let dot = p.to_dot("strata");
        assert_eq!(dot.matches("->").count(), 4);
        let back: PosetData = serde_json::from_str(&p.to_json()).unwrap();
        assert_eq!(Poset::from_data(&back).unwrap(), p);
    }

    #[test]
    fn from_order_keeps_only_covers() {
        let sets: Vec<u8> = vec![0b000, 0b001, 0b011, 0b111];
        let names = sets.iter().map(|b| format!("{b:03b}")).collect();
        let p = Poset::from_order(names, |i, j| sets[i] & sets[j] == sets[i]).unwrap();
        assert_eq!(p.cover_indices().len(), 3);
    }
}

//! Deterministic gridworlds with and without agent rotation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RlError;
use crate::spaces::Move;
use crate::stl::{parse, robustness, Formula, FunctionRegistry, Interval};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    None,
    Up,
    Down,
    Left,
    Right,
    TurnLeft,
    TurnRight,
    Forward,
    Done,
}

impl Action {
    /// No-rotation actions in tie-break order.
    pub const MOVES: [Action; 5] = [Action::None, Action::Up, Action::Down, Action::Left, Action::Right];
    /// Rotation actions in tie-break order.
    pub const TURNS: [Action; 4] = [Action::TurnLeft, Action::TurnRight, Action::Forward, Action::Done];

    pub fn as_move(self) -> Option<Move> {
        match self {
            Action::None => Some(Move::None),
            Action::Up => Some(Move::Up),
            Action::Down => Some(Move::Down),
            Action::Left => Some(Move::Left),
            Action::Right => Some(Move::Right),
            _ => None,
        }
    }
}

/// Agent orientation; `N` faces row 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Heading {
    N,
    E,
    S,
    W,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::N, Heading::E, Heading::S, Heading::W];

    fn index(self) -> usize {
        self as usize
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Heading::N => (-1, 0),
            Heading::E => (0, 1),
            Heading::S => (1, 0),
            Heading::W => (0, -1),
        }
    }

    fn turned(self, right: bool) -> Heading {
        Heading::ALL[(self.index() + if right { 1 } else { 3 }) % 4]
    }
}

/// Position (and heading in rotation games). Rows grow downward from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridState {
    pub row: usize,
    pub col: usize,
    pub heading: Option<Heading>,
}

impl fmt::Display for GridState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.heading {
            Some(h) => write!(f, "{},{},{:?}", self.row, self.col, h),
            None => write!(f, "{},{}", self.row, self.col),
        }
    }
}

/// On-disk environment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub rotation: bool,
    pub goal: (usize, usize),
    /// Walls: moving into one is a no-op.
    #[serde(default)]
    pub forbidden: Vec<(usize, usize)>,
    /// Cells reported by the `in_red` channel.
    #[serde(default)]
    pub red: Vec<(usize, usize)>,
    pub horizon: usize,
    /// Defaults to `F[0,H] (in_green >= 0.5)`.
    #[serde(default)]
    pub formula: Option<String>,
    /// Steps during which the window cue is shown; defaults to the first
    /// `F` interval of the formula.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    /// Robustness normalization scale; defaults to the grid's Manhattan
    /// diameter in cells.
    #[serde(default)]
    pub scale: Option<f64>,
}

impl EnvSpec {
    pub fn empty(rows: usize, cols: usize, goal: (usize, usize), horizon: usize) -> Self {
        EnvSpec {
            rows,
            cols,
            rotation: false,
            goal,
            forbidden: Vec::new(),
            red: Vec::new(),
            horizon,
            formula: None,
            window: None,
            scale: None,
        }
    }

    pub fn with_formula(mut self, formula: &str) -> Self {
        self.formula = Some(formula.to_string());
        self
    }

    pub fn from_json(text: &str) -> Result<Self, RlError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_json<P: AsRef<Path>>(path: P) -> Result<Self, RlError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Finite deterministic MDP with integer states and actions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    pub n_states: usize,
    pub actions: Vec<Action>,
    /// `transition[s][a]`.
    pub transition: Vec<Vec<usize>>,
    pub horizon: usize,
}

impl Mdp {
    pub fn step(&self, s: usize, a: usize) -> usize {
        self.transition[s][a]
    }
}

#[derive(Debug, Clone)]
pub struct GridEnv {
    pub spec: EnvSpec,
    pub formula: Formula,
    pub window: Option<Interval>,
    pub scale: f64,
    states: Vec<GridState>,
    index: HashMap<GridState, usize>,
    forbidden: BTreeSet<(usize, usize)>,
    red: BTreeSet<(usize, usize)>,
    mdp: Mdp,
    registry: FunctionRegistry,
}

fn first_eventually(f: &Formula) -> Option<Interval> {
    if let Formula::Eventually(i, _) = f {
        return Some(*i);
    }
    f.children().into_iter().find_map(first_eventually)
}

impl GridEnv {
    pub fn build(spec: EnvSpec) -> Result<Self, RlError> {
        let bad = |msg: String| Err(RlError::BadSpec(msg));
        let (rows, cols) = (spec.rows, spec.cols);
        if rows == 0 || cols == 0 {
            return bad(format!("grid must be nonempty, got {rows}x{cols}"));
        }
        if spec.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        let inside = |&(r, c): &(usize, usize)| r < rows && c < cols;
        if !inside(&spec.goal) {
            return bad(format!("goal {:?} outside the {rows}x{cols} grid", spec.goal));
        }
        if let Some(cell) = spec.forbidden.iter().chain(&spec.red).find(|c| !inside(c)) {
            return bad(format!("cell {cell:?} outside the {rows}x{cols} grid"));
        }
        let forbidden: BTreeSet<(usize, usize)> = spec.forbidden.iter().copied().collect();
        let red: BTreeSet<(usize, usize)> = spec.red.iter().copied().collect();
        if forbidden.contains(&spec.goal) {
            return bad("goal is a forbidden cell".into());
        }
        let scale = spec.scale.unwrap_or(((rows - 1) + (cols - 1)).max(1) as f64);
        if !(scale > 0.0 && scale.is_finite()) {
            return bad(format!("scale must be positive, got {scale}"));
        }
        let text = spec.formula.clone().unwrap_or_else(|| format!("F[0,{}] (in_green >= 0.5)", spec.horizon));
        let formula = parse(&text)?;
        let window = match spec.window {
            Some((a, b)) => Some(Interval::new(a, b)?),
            None => first_eventually(&formula),
        };

        let headings: Vec<Option<Heading>> =
            if spec.rotation { Heading::ALL.iter().copied().map(Some).collect() } else { vec![None] };
        let mut states = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if !forbidden.contains(&(r, c)) {
                    states.extend(headings.iter().map(|&h| GridState { row: r, col: c, heading: h }));
                }
            }
        }
        let index: HashMap<GridState, usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let actions: Vec<Action> = if spec.rotation { Action::TURNS.to_vec() } else { Action::MOVES.to_vec() };
        let shift = |s: &GridState, (dr, dc): (isize, isize)| -> GridState {
            let (r, c) = (s.row as isize + dr, s.col as isize + dc);
            let target = (r as usize, c as usize);
            if r < 0 || c < 0 || r >= rows as isize || c >= cols as isize || forbidden.contains(&target) {
                *s
            } else {
                GridState { row: target.0, col: target.1, heading: s.heading }
            }
        };
        let transition = states
            .iter()
            .map(|s| {
                actions
                    .iter()
                    .map(|a| {
                        let next = match (a, s.heading) {
                            (Action::TurnLeft, Some(h)) => GridState { heading: Some(h.turned(false)), ..*s },
                            (Action::TurnRight, Some(h)) => GridState { heading: Some(h.turned(true)), ..*s },
                            (Action::Forward, Some(h)) => shift(s, h.delta()),
                            (Action::Done, _) => *s,
                            (m, None) => shift(s, m.as_move().expect("move action").delta()),
                            _ => unreachable!("turn actions only exist with a heading"),
                        };
                        index[&next]
                    })
                    .collect()
            })
            .collect();
        let mdp = Mdp { n_states: states.len(), actions, transition, horizon: spec.horizon };
        let channels = channel_names(spec.rotation);
        let registry = FunctionRegistry::for_channels(&channels);
        if let Some(f) = formula.functions().into_iter().find(|f| !registry.contains(f)) {
            return bad(format!("formula uses `{f}`; available channels are {}", channels.join(", ")));
        }
        Ok(GridEnv { spec, formula, window, scale, states, index, forbidden, red, mdp, registry })
    }

    pub fn mdp(&self) -> &Mdp {
        &self.mdp
    }

    pub fn horizon(&self) -> usize {
        self.spec.horizon
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[GridState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> GridState {
        self.states[i]
    }

    pub fn state_index(&self, s: GridState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    /// Index of the cell `(row, col)`, heading north in rotation games.
    pub fn cell_index(&self, row: usize, col: usize) -> Option<usize> {
        let heading = self.spec.rotation.then_some(Heading::N);
        self.state_index(GridState { row, col, heading })
    }

    pub fn registry(&self) -> &FunctionRegistry {
        &self.registry
    }

    pub fn channels(&self) -> Vec<String> {
        channel_names(self.spec.rotation)
    }

    pub fn is_goal(&self, s: usize) -> bool {
        let st = self.states[s];
        (st.row, st.col) == self.spec.goal
    }

    pub fn is_red(&self, s: usize) -> bool {
        let st = self.states[s];
        self.red.contains(&(st.row, st.col))
    }

    pub fn is_forbidden(&self, row: usize, col: usize) -> bool {
        self.forbidden.contains(&(row, col))
    }

    /// States an episode may start from: every state off the red cells.
    pub fn start_states(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&s| !self.is_red(s)).collect()
    }

    pub fn window_active(&self, step: usize) -> bool {
        self.window.is_some_and(|w| step as f64 >= w.a - 1e-9 && step as f64 <= w.b + 1e-9)
    }

    /// Channel values of state `s` at `step`.
    pub fn observe(&self, s: usize, step: usize) -> Vec<f64> {
        let st = self.states[s];
        let mut v = vec![st.row as f64, st.col as f64];
        if let Some(h) = st.heading {
            v.push(h.index() as f64);
        }
        v.push(step as f64);
        v.push(if self.is_goal(s) { 1.0 } else { 0.0 });
        v.push(if self.is_red(s) { 1.0 } else { 0.0 });
        v
    }

    /// Trace of a state sequence, one sample per step from t = 0.
    pub fn trace_of(&self, path: &[usize]) -> Trace {
        let states = path.iter().enumerate().map(|(k, &s)| self.observe(s, k)).collect();
        let times = (0..path.len()).map(|k| k as f64).collect();
        Trace::new(times, states, self.channels()).expect("grid traces are well formed")
    }

    /// Terminal robustness of a state sequence and its normalized reward.
    pub fn score(&self, path: &[usize]) -> (f64, f64) {
        let rho = robustness(&self.formula, &self.trace_of(path), 0, &self.registry).expect("formula checked at build");
        (rho, (rho / self.scale).clamp(-1.0, 1.0))
    }
}

pub fn channel_names(rotation: bool) -> Vec<String> {
    let mut c = vec!["row", "col"];
    if rotation {
        c.push("heading");
    }
    c.extend(["step", "in_green", "in_red"]);
    c.into_iter().map(str::to_string).collect()
}

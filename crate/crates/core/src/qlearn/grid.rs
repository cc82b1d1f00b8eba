use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::DiceProbability;
use crate::scalar::Scalar;

/// Grid coordinate. Row `y = 0` is the top row; `N` decreases `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl FromStr for Cell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("malformed cell `{s}`"));
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (x, y) = inner.split_once(',').ok_or_else(bad)?;
        Ok(Cell::new(
            x.trim().parse().map_err(|_| bad())?,
            y.trim().parse().map_err(|_| bad())?,
        ))
    }
}

/// Moves in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    N,
    E,
    S,
    W,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::N, Action::E, Action::S, Action::W];

    fn delta(self) -> (i64, i64) {
        match self {
            Action::N => (0, -1),
            Action::E => (1, 0),
            Action::S => (0, 1),
            Action::W => (-1, 0),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "N" | "NORTH" => Ok(Action::N),
            "E" | "EAST" => Ok(Action::E),
            "S" | "SOUTH" => Ok(Action::S),
            "W" | "WEST" => Ok(Action::W),
            _ => Err(Error::domain(format!("unknown move `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDecl {
    pub pos: [u32; 2],
    pub reward: f64,
    #[serde(default)]
    pub terminal: bool,
}

/// On-disk body of a `grid` scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBody {
    pub width: u32,
    pub height: u32,
    pub start: [u32; 2],
    pub cells: Vec<CellDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walls: Option<Vec<[[u32; 2]; 2]>>,
    /// Chance that a move is replaced by a uniformly random available move.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slip: Option<DiceProbability>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub random_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellInfo {
    pub reward: f64,
    pub terminal: bool,
}

/// A validated GridWorld. Undeclared cells have reward 0 and are not
/// terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    width: u32,
    height: u32,
    start: Cell,
    cells: Vec<CellInfo>,
    declared: Vec<bool>,
    walls: BTreeSet<(Cell, Cell)>,
    slip: Option<DiceProbability>,
    random_start: bool,
}

impl GridSpec {
    pub fn from_body(body: &GridBody) -> Result<Self> {
        if body.width == 0 || body.height == 0 {
            return Err(Error::InvalidGrid(
                "width and height must be positive".into(),
            ));
        }
        let n = (body.width * body.height) as usize;
        let mut spec = GridSpec {
            width: body.width,
            height: body.height,
            start: Cell::new(body.start[0], body.start[1]),
            cells: vec![
                CellInfo {
                    reward: 0.0,
                    terminal: false
                };
                n
            ],
            declared: vec![false; n],
            walls: BTreeSet::new(),
            slip: body.slip,
            random_start: body.random_start,
        };
        let in_bounds = |p: [u32; 2]| p[0] < body.width && p[1] < body.height;
        for c in &body.cells {
            if !in_bounds(c.pos) {
                return Err(Error::InvalidGrid(format!(
                    "cell {:?} is out of bounds",
                    c.pos
                )));
            }
            if !c.reward.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "cell {:?} has a non-finite reward",
                    c.pos
                )));
            }
            let i = spec.index(Cell::new(c.pos[0], c.pos[1]));
            if spec.declared[i] {
                return Err(Error::InvalidGrid(format!(
                    "cell {:?} is declared twice",
                    c.pos
                )));
            }
            spec.declared[i] = true;
            spec.cells[i] = CellInfo {
                reward: c.reward,
                terminal: c.terminal,
            };
        }
        if !in_bounds(body.start) {
            return Err(Error::InvalidGrid("start is out of bounds".into()));
        }
        if spec.is_terminal(spec.start) {
            return Err(Error::InvalidGrid("start cell is terminal".into()));
        }
        for [a, b] in body.walls.iter().flatten() {
            if !in_bounds(*a) || !in_bounds(*b) {
                return Err(Error::InvalidGrid(format!(
                    "wall {a:?}-{b:?} is out of bounds"
                )));
            }
            let (a, b) = (Cell::new(a[0], a[1]), Cell::new(b[0], b[1]));
            if a.x.abs_diff(b.x) + a.y.abs_diff(b.y) != 1 {
                return Err(Error::InvalidGrid(format!(
                    "wall {a}-{b} does not separate neighbours"
                )));
            }
            spec.walls.insert((a.min(b), a.max(b)));
        }
        if let Some(p) = spec.slip {
            if !p.is_dice_expressible() {
                return Err(Error::InvalidGrid(format!(
                    "slip probability {p} is not dice-expressible"
                )));
            }
        }
        if spec
            .non_terminal_cells()
            .iter()
            .any(|&c| spec.available_actions(c).is_empty())
        {
            return Err(Error::InvalidGrid(
                "a non-terminal cell has no available move".into(),
            ));
        }
        Ok(spec)
    }

    pub fn to_body(&self) -> GridBody {
        GridBody {
            width: self.width,
            height: self.height,
            start: [self.start.x, self.start.y],
            cells: self
                .cells()
                .filter(|c| self.declared[self.index(*c)])
                .map(|c| {
                    let info = self.info(c);
                    CellDecl {
                        pos: [c.x, c.y],
                        reward: info.reward,
                        terminal: info.terminal,
                    }
                })
                .collect(),
            walls: (!self.walls.is_empty()).then(|| {
                self.walls
                    .iter()
                    .map(|(a, b)| [[a.x, a.y], [b.x, b.y]])
                    .collect()
            }),
            slip: self.slip,
            random_start: self.random_start,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn slip(&self) -> Option<DiceProbability> {
        self.slip
    }

    pub fn random_start(&self) -> bool {
        self.random_start
    }

    /// Default step budget: grid length plus grid width.
    pub fn default_budget(&self) -> usize {
        (self.width + self.height) as usize
    }

    pub fn index(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    pub fn cell_at(&self, i: usize) -> Cell {
        Cell::new(i as u32 % self.width, i as u32 / self.width)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(|i| self.cell_at(i))
    }

    pub fn info(&self, c: Cell) -> CellInfo {
        self.cells[self.index(c)]
    }

    pub fn reward<T: Scalar>(&self, c: Cell) -> T {
        T::from_f64(self.info(c).reward)
    }

    pub fn is_terminal(&self, c: Cell) -> bool {
        self.info(c).terminal
    }

    pub fn non_terminal_cells(&self) -> Vec<Cell> {
        self.cells().filter(|c| !self.is_terminal(*c)).collect()
    }

    fn neighbour(&self, c: Cell, a: Action) -> Option<Cell> {
        let (dx, dy) = a.delta();
        let nx = c.x as i64 + dx;
        let ny = c.y as i64 + dy;
        if nx < 0 || ny < 0 || nx >= self.width as i64 || ny >= self.height as i64 {
            return None;
        }
        let n = Cell::new(nx as u32, ny as u32);
        (!self.walls.contains(&(c.min(n), c.max(n)))).then_some(n)
    }

    /// Moves that stay on the grid and do not cross a wall, in N,E,S,W order.
    pub fn available_actions(&self, c: Cell) -> Vec<Action> {
        Action::ALL
            .into_iter()
            .filter(|a| self.neighbour(c, *a).is_some())
            .collect()
    }

    /// Deterministic move. The reward is the entered cell's reward; `done` is
    /// true when the entered cell is terminal.
    pub fn env_step<T: Scalar>(&self, s: Cell, a: Action) -> Result<(Cell, T, bool)> {
        if !self.in_bounds(s) {
            return Err(Error::InvalidGrid(format!("cell {s} is out of bounds")));
        }
        let next = self
            .neighbour(s, a)
            .ok_or_else(|| Error::UnavailableAction {
                cell: s.to_string(),
                action: a.to_string(),
            })?;
        Ok((next, self.reward(next), self.is_terminal(next)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn three_by_three() -> GridSpec {
        GridSpec::from_body(&GridBody {
            width: 3,
            height: 3,
            start: [0, 2],
            cells: vec![
                CellDecl {
                    pos: [1, 0],
                    reward: 4.0,
                    terminal: false,
                },
                CellDecl {
                    pos: [2, 0],
                    reward: 10.0,
                    terminal: true,
                },
            ],
            walls: None,
            slip: None,
            random_start: false,
        })
        .unwrap()
    }

    #[test]
    fn center_north_enters_the_cell_above() {
        let g = three_by_three();
        let (next, r, done) = g.env_step::<f64>(Cell::new(1, 1), Action::N).unwrap();
        assert_eq!(next, Cell::new(1, 0));
        assert_eq!(r, 4.0);
        assert!(!done);
    }

    #[test]
    fn corners_have_two_moves() {
        let g = three_by_three();
        assert_eq!(
            g.available_actions(Cell::new(0, 2)),
            vec![Action::N, Action::E]
        );
        let err = g.env_step::<f64>(Cell::new(0, 2), Action::W).unwrap_err();
        assert_eq!(err.code(), "unavailable_action");
    }

    #[test]
    fn entering_terminal() {
        let g = three_by_three();
        let (_, r, done) = g.env_step::<f64>(Cell::new(2, 1), Action::N).unwrap();
        assert_eq!(r, 10.0);
        assert!(done);
    }

    #[test]
    fn walls_block_moves() {
        let mut body = three_by_three().to_body();
        body.walls = Some(vec![[[1, 1], [1, 0]]]);
        let g = GridSpec::from_body(&body).unwrap();
        assert_eq!(
            g.available_actions(Cell::new(1, 1)),
            vec![Action::E, Action::S, Action::W]
        );
        assert_eq!(GridSpec::from_body(&g.to_body()).unwrap(), g);
    }

    #[test]
    fn invalid_grids() {
        let base = three_by_three().to_body();
        let mut b = base.clone();
        b.start = [2, 0];
        assert_eq!(GridSpec::from_body(&b).unwrap_err().code(), "invalid_grid");
        let mut b = base.clone();
        b.cells.push(CellDecl {
            pos: [3, 0],
            reward: 0.0,
            terminal: false,
        });
        assert!(GridSpec::from_body(&b).is_err());
        let mut b = base.clone();
        b.walls = Some(vec![[[0, 0], [2, 2]]]);
        assert!(GridSpec::from_body(&b).is_err());
        let mut b = base;
        b.width = 0;
        assert!(GridSpec::from_body(&b).is_err());
    }

    #[test]
    fn parse_cells_and_actions() {
        assert_eq!("(2,1)".parse::<Cell>().unwrap(), Cell::new(2, 1));
        assert!("2,1".parse::<Cell>().is_err());
        assert_eq!("west".parse::<Action>().unwrap(), Action::W);
    }
}

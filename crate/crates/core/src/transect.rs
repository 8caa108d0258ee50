//! Grid geometry and robot-configuration combinatorics for the transect task.
//!
//! Robots sweep the grid left to right, one column per stage, and each robot
//! samples one distinct row of the current column. A joint action is the set
//! of rows occupied in the next column, so `|A| = C(r, k)` regardless of the
//! current configuration.

use std::fmt;

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{Location, Widths};

/// An `r × C` grid of sampling locations, optionally carrying ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TransectGrid {
    n_rows: usize,
    n_cols: usize,
    widths: Widths,
    measurements: Option<DMatrix<f64>>,
}

impl TransectGrid {
    pub fn new(n_rows: usize, n_cols: usize, widths: Widths) -> Result<Self> {
        if n_rows < 1 {
            return Err(Error::InvalidGrid("need at least one row".into()));
        }
        if n_cols < 2 {
            return Err(Error::InvalidGrid(format!("need at least two columns, got {n_cols}")));
        }
        Widths::new(widths.omega1, widths.omega2)?;
        if n_cols <= n_rows {
            log::warn!("grid has {n_cols} columns for {n_rows} rows; transects are expected to be long");
        }
        Ok(Self { n_rows, n_cols, widths, measurements: None })
    }

    /// Attaches ground-truth values, an `r × C` matrix of finite numbers.
    pub fn with_measurements(mut self, z: DMatrix<f64>) -> Result<Self> {
        if z.shape() != (self.n_rows, self.n_cols) {
            return Err(Error::InvalidGrid(format!(
                "measurements are {}x{}, grid is {}x{}",
                z.nrows(),
                z.ncols(),
                self.n_rows,
                self.n_cols
            )));
        }
        if let Some(bad) = z.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite measurement {bad}")));
        }
        self.measurements = Some(z);
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Planning horizon `t`, so that columns run `0..=t+1`.
    pub fn horizon(&self) -> usize {
        self.n_cols - 2
    }

    pub fn widths(&self) -> Widths {
        self.widths
    }

    pub fn measurements(&self) -> Option<&DMatrix<f64>> {
        self.measurements.as_ref()
    }

    pub fn measurement(&self, loc: Location) -> Option<f64> {
        self.measurements.as_ref().map(|z| z[(loc.row, loc.col)])
    }

    pub fn n_locations(&self) -> usize {
        self.n_rows * self.n_cols
    }

    /// Every location, column by column.
    pub fn locations(&self) -> impl Iterator<Item = Location> + '_ {
        (0..self.n_cols).flat_map(move |c| (0..self.n_rows).map(move |r| Location::new(c, r)))
    }

    pub fn contains(&self, loc: Location) -> bool {
        loc.col < self.n_cols && loc.row < self.n_rows
    }
}

/// Rows occupied by the `k` robots within one column, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RobotConfig(Vec<usize>);

impl RobotConfig {
    /// Builds a canonical config; rows are sorted and must be distinct and `< n_rows`.
    pub fn new(mut rows: Vec<usize>, n_rows: usize) -> Result<Self> {
        rows.sort_unstable();
        if rows.is_empty() || rows.len() > n_rows {
            return Err(Error::InvalidArity { k: rows.len(), rows: n_rows });
        }
        if rows.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig(format!("duplicate row in {rows:?}")));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= n_rows) {
            return Err(Error::InvalidConfig(format!("row {r} outside [0, {n_rows})")));
        }
        Ok(Self(rows))
    }

    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// Parses `"0,3"` (or `;`-separated) into a config.
    pub fn parse(s: &str, n_rows: usize) -> Result<Self> {
        let rows = s
            .split([',', ';'])
            .map(|p| p.trim().parse::<usize>().map_err(|e| Error::Parse(format!("row {p:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, n_rows)
    }

    /// The config's cells in column `col`, in ascending row order.
    pub fn locations(&self, col: usize) -> Vec<Location> {
        config_locations(self, col)
    }
}

impl fmt::Display for RobotConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().join(";"))
    }
}

/// All `C(r, k)` configs in lexicographic order.
pub fn enumerate_configs(r: usize, k: usize) -> Result<Vec<RobotConfig>> {
    if k < 1 || k > r {
        return Err(Error::InvalidArity { k, rows: r });
    }
    Ok((0..r).combinations(k).map(RobotConfig).collect())
}

pub fn config_locations(x: &RobotConfig, col: usize) -> Vec<Location> {
    x.0.iter().map(|&row| Location::new(col, row)).collect()
}

/// Moves the team from `current` in column `col` to `action` in column `col + 1`.
///
/// The joint action is the destination config itself, so the successor does
/// not depend on `current` beyond sharing its robot count.
pub fn transition(grid: &TransectGrid, col: usize, current: &RobotConfig, action: &RobotConfig) -> Result<RobotConfig> {
    let last = grid.n_cols() - 1;
    if col >= last {
        return Err(Error::ColumnOverflow { col: col + 1, last });
    }
    if current.k() != action.k() {
        return Err(Error::InvalidArity { k: action.k(), rows: grid.n_rows() });
    }
    if action.0.last().is_some_and(|&r| r >= grid.n_rows()) {
        return Err(Error::InvalidConfig(format!("{action} does not fit {} rows", grid.n_rows())));
    }
    Ok(action.clone())
}

/// One config per column, from column 0 to the last column.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPath {
    configs: Vec<RobotConfig>,
    values: Option<Vec<Vec<f64>>>,
}

impl ObservationPath {
    pub fn new(configs: Vec<RobotConfig>) -> Result<Self> {
        let Some(first) = configs.first() else {
            return Err(Error::InvalidConfig("empty path".into()));
        };
        let k = first.k();
        if configs.iter().any(|c| c.k() != k) {
            return Err(Error::InvalidConfig("path mixes robot counts".into()));
        }
        Ok(Self { configs, values: None })
    }

    /// Attaches the ground-truth readings of `grid` at every visited cell.
    pub fn with_values_from(mut self, grid: &TransectGrid) -> Result<Self> {
        let z = grid.measurements().ok_or(Error::MissingMeasurements)?;
        self.values = Some(
            self.configs.iter().enumerate().map(|(col, x)| x.rows().iter().map(|&r| z[(r, col)]).collect()).collect(),
        );
        Ok(self)
    }

    pub fn with_values(mut self, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != self.configs.len() || values.iter().zip(&self.configs).any(|(v, c)| v.len() != c.k()) {
            return Err(Error::InvalidConfig("values do not match path shape".into()));
        }
        self.values = Some(values);
        Ok(self)
    }

    pub fn configs(&self) -> &[RobotConfig] {
        &self.configs
    }

    pub fn values(&self) -> Option<&[Vec<f64>]> {
        self.values.as_deref()
    }

    pub fn k(&self) -> usize {
        self.configs[0].k()
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn start(&self) -> &RobotConfig {
        &self.configs[0]
    }

    /// Whether the path covers every column of `grid` exactly once.
    pub fn is_complete_for(&self, grid: &TransectGrid) -> bool {
        self.configs.len() == grid.n_cols() && self.configs.iter().all(|c| c.rows().iter().all(|&r| r < grid.n_rows()))
    }

    /// Visited locations, stage by stage.
    pub fn locations(&self) -> Vec<Location> {
        self.configs.iter().enumerate().flat_map(|(col, x)| config_locations(x, col)).collect()
    }

    /// Observed values flattened in the same order as [`Self::locations`].
    pub fn flat_values(&self) -> Option<Vec<f64>> {
        self.values.as_ref().map(|v| v.iter().flatten().copied().collect())
    }

    /// Per-robot row tracks under the minimum total row displacement assignment.
    ///
    /// On a line that assignment pairs sorted positions in order, so robot `m`
    /// always holds the `m`-th smallest row.
    pub fn robot_tracks(&self) -> Vec<Vec<usize>> {
        (0..self.k()).map(|m| self.configs.iter().map(|c| c.rows()[m]).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r: usize, c: usize) -> TransectGrid {
        TransectGrid::new(r, c, Widths::new(1.0, 1.0).unwrap()).unwrap()
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn enumerate_examples() {
        let one = enumerate_configs(5, 1).unwrap();
        assert_eq!(one.len(), 5);
        assert_eq!(one[3].rows(), &[3]);
        assert_eq!(enumerate_configs(3, 3).unwrap(), vec![RobotConfig(vec![0, 1, 2])]);
        assert_eq!(enumerate_configs(5, 2).unwrap().len(), 10);
        assert!(matches!(enumerate_configs(3, 4), Err(Error::InvalidArity { .. })));
        assert!(matches!(enumerate_configs(3, 0), Err(Error::InvalidArity { .. })));
    }

    #[test]
    fn enumerate_is_canonical_and_sorted() {
        for r in 1..=7 {
            for k in 1..=r {
                let all = enumerate_configs(r, k).unwrap();
                assert_eq!(all.len(), binom(r, k));
                assert!(all.windows(2).all(|w| w[0] < w[1]));
                for c in &all {
                    assert_eq!(RobotConfig::new(c.rows().to_vec(), r).unwrap(), *c);
                }
            }
        }
    }

    #[test]
    fn locations_follow_config_order() {
        assert_eq!(config_locations(&RobotConfig(vec![0]), 0), vec![Location::new(0, 0)]);
        assert_eq!(config_locations(&RobotConfig(vec![1, 4]), 7), vec![Location::new(7, 1), Location::new(7, 4)]);
        for r in 1..=6 {
            for k in 1..=r {
                let locs: Vec<Vec<Location>> =
                    enumerate_configs(r, k).unwrap().iter().map(|c| c.locations(2)).collect();
                assert!(locs.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn transition_is_destination() {
        let g = grid(5, 8);
        let x = RobotConfig::new(vec![0, 2], 5).unwrap();
        let a = RobotConfig::new(vec![1, 3], 5).unwrap();
        assert_eq!(transition(&g, 4, &x, &a).unwrap(), a);
        assert!(matches!(transition(&g, 7, &x, &a), Err(Error::ColumnOverflow { .. })));
        let single = RobotConfig::new(vec![2], 5).unwrap();
        let succ: Vec<_> =
            enumerate_configs(5, 1).unwrap().iter().map(|a| transition(&g, 0, &single, a).unwrap()).collect();
        assert_eq!(succ.len(), 5);
        assert!(transition(&g, 0, &single, &a).is_err());
    }

    #[test]
    fn rollout_of_fixed_actions_is_unique() {
        let g = grid(4, 5);
        let actions: Vec<RobotConfig> = [1, 3, 0, 2].iter().map(|&r| RobotConfig(vec![r])).collect();
        let run = || {
            let mut x = RobotConfig(vec![2]);
            let mut path = vec![x.clone()];
            for (col, a) in actions.iter().enumerate() {
                x = transition(&g, col, &x, a).unwrap();
                path.push(x.clone());
            }
            ObservationPath::new(path).unwrap()
        };
        let p = run();
        assert_eq!(p, run());
        assert!(p.is_complete_for(&g));
        assert_eq!(p.locations().len(), 5);
    }

    #[test]
    fn config_validation() {
        assert!(RobotConfig::new(vec![1, 1], 3).is_err());
        assert!(RobotConfig::new(vec![3], 3).is_err());
        assert_eq!(RobotConfig::new(vec![2, 0], 3).unwrap().rows(), &[0, 2]);
        assert_eq!(RobotConfig::parse("4, 1", 5).unwrap().to_string(), "1;4");
        assert!(RobotConfig::parse("a", 5).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(TransectGrid::new(0, 5, Widths { omega1: 1.0, omega2: 1.0 }).is_err());
        assert!(TransectGrid::new(2, 1, Widths { omega1: 1.0, omega2: 1.0 }).is_err());
        assert!(TransectGrid::new(2, 3, Widths { omega1: 0.0, omega2: 1.0 }).is_err());
        let g = grid(2, 3);
        assert!(g.clone().with_measurements(DMatrix::zeros(3, 2)).is_err());
        assert!(g.clone().with_measurements(DMatrix::from_element(2, 3, f64::NAN)).is_err());
        let g = g.with_measurements(DMatrix::from_fn(2, 3, |r, c| (r * 10 + c) as f64)).unwrap();
        assert_eq!(g.measurement(Location::new(2, 1)), Some(12.0));
    }

    #[test]
    fn tracks_pair_sorted_rows() {
        let p = ObservationPath::new(vec![RobotConfig(vec![0, 3]), RobotConfig(vec![1, 2])]).unwrap();
        assert_eq!(p.robot_tracks(), vec![vec![0, 1], vec![3, 2]]);
    }
}

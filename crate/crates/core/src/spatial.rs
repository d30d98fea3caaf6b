//! Grid geometry, the 8-connected motion graph and arc-length sampling of
//! polyline trajectories.
//!
//! Grid points are stored in row-major order: index `g = row * cols + col`
//! maps to `origin + (col * spacing, row * spacing)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SurveyError};

/// Relative tolerance (in units of grid spacing) used when deciding whether a
/// position coincides with a grid point or lies inside the grid rectangle.
pub const GRID_SNAP_TOL: f64 = 1e-9;

/// A point in the planning plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Point at fraction `t` of the way from `self` to `other`.
    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// Trajectory waypoint. Routes are ordered lists of waypoints.
pub type Waypoint = Point;

/// Rectangular grid of candidate measurement locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    /// Distance between adjacent grid points (m).
    pub spacing: f64,
    #[serde(default)]
    pub origin: Point,
    /// Flight height of the agent above ground (m).
    pub altitude: f64,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, spacing: f64) -> Result<Self> {
        let grid = Self {
            rows,
            cols,
            spacing,
            origin: Point::default(),
            altitude: 0.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_altitude(mut self, altitude: f64) -> Result<Self> {
        self.altitude = altitude;
        self.validate()?;
        Ok(self)
    }

    pub fn with_origin(mut self, origin: Point) -> Self {
        self.origin = origin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(SurveyError::DegenerateGrid {
                rows: self.rows,
                cols: self.cols,
                reason: "grid must have at least one row and one column",
            });
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(invalid(
                "spacing",
                format!("must be > 0, got {}", self.spacing),
            ));
        }
        if !(self.altitude.is_finite() && self.altitude >= 0.0) {
            return Err(invalid(
                "altitude",
                format!("must be >= 0, got {}", self.altitude),
            ));
        }
        if !(self.origin.x.is_finite() && self.origin.y.is_finite()) {
            return Err(invalid("origin", "must be finite"));
        }
        Ok(())
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn row_col(&self, g: usize) -> (usize, usize) {
        (g / self.cols, g % self.cols)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn index_to_point(&self, g: usize) -> Result<Point> {
        if g >= self.len() {
            return Err(SurveyError::IndexOutOfRange {
                index: g,
                len: self.len(),
            });
        }
        Ok(self.point_unchecked(g))
    }

    pub(crate) fn point_unchecked(&self, g: usize) -> Point {
        let (row, col) = self.row_col(g);
        Point::new(
            self.origin.x + col as f64 * self.spacing,
            self.origin.y + row as f64 * self.spacing,
        )
    }

    /// All grid points in index order.
    pub fn points(&self) -> Vec<Point> {
        (0..self.len()).map(|g| self.point_unchecked(g)).collect()
    }

    /// Fractional (column, row) coordinates of `p`.
    pub(crate) fn fractional(&self, p: &Point) -> (f64, f64) {
        (
            (p.x - self.origin.x) / self.spacing,
            (p.y - self.origin.y) / self.spacing,
        )
    }

    /// Inverse of [`GridSpec::index_to_point`]: the index of the grid point at
    /// `p`, if `p` coincides with one.
    pub fn point_to_index(&self, p: &Point) -> Option<usize> {
        let (fc, fr) = self.fractional(p);
        let (c, r) = (fc.round(), fr.round());
        if (fc - c).abs() > GRID_SNAP_TOL || (fr - r).abs() > GRID_SNAP_TOL {
            return None;
        }
        if c < 0.0 || r < 0.0 || c >= self.cols as f64 || r >= self.rows as f64 {
            return None;
        }
        Some(self.index(r as usize, c as usize))
    }

    /// Index of the grid point closest to `p` (clamped to the grid).
    pub fn nearest_index(&self, p: &Point) -> usize {
        let (fc, fr) = self.fractional(p);
        let c = fc.round().clamp(0.0, (self.cols - 1) as f64) as usize;
        let r = fr.round().clamp(0.0, (self.rows - 1) as f64) as usize;
        self.index(r, c)
    }

    pub fn contains(&self, p: &Point) -> bool {
        let (fc, fr) = self.fractional(p);
        let tol = GRID_SNAP_TOL;
        fc >= -tol
            && fr >= -tol
            && fc <= (self.cols - 1) as f64 + tol
            && fr <= (self.rows - 1) as f64 + tol
    }

    pub fn check_contains(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(SurveyError::OutOfBounds { x: p.x, y: p.y })
        }
    }

    /// Width and height of the bounding rectangle (m).
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.cols - 1) as f64 * self.spacing,
            (self.rows - 1) as f64 * self.spacing,
        )
    }
}

/// King-move adjacency over grid indices. Each edge stores its length in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionGraph {
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl MotionGraph {
    /// A graph with `n` isolated vertices.
    pub fn empty(n: usize) -> Self {
        Self {
            neighbors: vec![Vec::new(); n],
        }
    }

    pub fn neighbors(&self, g: usize) -> &[(usize, f64)] {
        &self.neighbors[g]
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].iter().any(|&(n, _)| n == b)
    }
}

/// Builds the 8-connected motion graph: moves in one of 8 directions 45° apart.
pub fn build_motion_graph(grid: &GridSpec) -> Result<MotionGraph> {
    if grid.rows < 2 || grid.cols < 2 {
        return Err(SurveyError::DegenerateGrid {
            rows: grid.rows,
            cols: grid.cols,
            reason: "motion graph needs at least 2 rows and 2 columns",
        });
    }
    let diag = grid.spacing * std::f64::consts::SQRT_2;
    let mut neighbors = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let (r, c) = grid.row_col(g);
        let mut adj = Vec::with_capacity(8);
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= grid.rows as i64 || nc >= grid.cols as i64 {
                    continue;
                }
                let len = if dr != 0 && dc != 0 {
                    diag
                } else {
                    grid.spacing
                };
                adj.push((grid.index(nr as usize, nc as usize), len));
            }
        }
        neighbors.push(adj);
    }
    Ok(MotionGraph { neighbors })
}

/// Emits points at a constant arc-length spacing along successive polyline
/// legs. The distance to the next sample carries over between legs, so the
/// spacing stays exact across joints and across calls.
#[derive(Debug, Clone)]
pub struct ArcSampler {
    spacing: f64,
    until_next: f64,
}

impl ArcSampler {
    /// A sampler whose first sample falls at the start of the first leg.
    pub fn new(spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(invalid(
                "measurement_spacing",
                format!("must be > 0, got {spacing}"),
            ));
        }
        Ok(Self {
            spacing,
            until_next: 0.0,
        })
    }

    /// A sampler that has just emitted a sample at the current position.
    pub fn after_sample(spacing: f64) -> Result<Self> {
        let mut s = Self::new(spacing)?;
        s.until_next = spacing;
        Ok(s)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Arc length still to travel before the next sample.
    pub fn until_next(&self) -> f64 {
        self.until_next
    }

    /// Samples the polyline `waypoints`, calling `emit` for each point.
    /// Returns early (with `false`) if `emit` returns `false`.
    pub fn walk<F: FnMut(Point) -> bool>(&mut self, waypoints: &[Point], mut emit: F) -> bool {
        if waypoints.len() == 1 && self.until_next <= 0.0 {
            self.until_next = self.spacing;
            return emit(waypoints[0]);
        }
        for seg in waypoints.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let len = a.distance(&b);
            let mut s = self.until_next;
            while s <= len + GRID_SNAP_TOL * self.spacing {
                let p = if len > 0.0 {
                    a.lerp(&b, (s / len).min(1.0))
                } else {
                    a
                };
                s += self.spacing;
                if !emit(p) {
                    self.until_next = s - len;
                    return false;
                }
            }
            self.until_next = s - len;
        }
        true
    }

    pub fn sample(&mut self, waypoints: &[Point]) -> Vec<Point> {
        let mut out = Vec::new();
        self.walk(waypoints, |p| {
            out.push(p);
            true
        });
        out
    }
}

/// Points at arc length `0, delta, 2*delta, ...` along the polyline.
pub fn sample_path(waypoints: &[Point], delta: f64) -> Result<Vec<Point>> {
    if waypoints.is_empty() {
        return Err(SurveyError::Empty("waypoints"));
    }
    Ok(ArcSampler::new(delta)?.sample(waypoints))
}

pub fn path_length(waypoints: &[Point]) -> f64 {
    waypoints.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// Time to fly the polyline at constant `speed` (m/s).
pub fn travel_time(waypoints: &[Point], speed: f64) -> Result<f64> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(invalid("speed", format!("must be > 0, got {speed}")));
    }
    Ok(path_length(waypoints) / speed)
}

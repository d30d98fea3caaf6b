//! Trajectory policies.
//!
//! The min-cost planner heads for the grid point whose 3x3 neighbourhood holds
//! the most uncertainty and routes there over the 8-connected motion graph,
//! with edge weights equal to the reciprocal of the uncertainty integrated
//! along the edge. Grid (boustrophedon), spiral and random planners serve as
//! baselines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SurveyError};
use crate::spatial::{path_length, GridSpec, MotionGraph, Point};
use crate::uncertainty::UncertaintyField;

/// Lower bound on the integrated uncertainty of an edge.
pub const EPS_EDGE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    #[default]
    MinCost,
    Grid,
    Spiral,
    Random,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [
        PlannerKind::MinCost,
        PlannerKind::Grid,
        PlannerKind::Spiral,
        PlannerKind::Random,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::MinCost => "min_cost",
            PlannerKind::Grid => "grid",
            PlannerKind::Spiral => "spiral",
            PlannerKind::Random => "random",
        }
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!("unknown planner `{s}` (expected min_cost, grid, spiral or random)")
            })
    }
}

/// Shortest-path engine used by the min-cost planner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShortestPath {
    #[default]
    Dijkstra,
    BellmanFord,
}

/// Inputs available to a planner when a new leg is needed.
#[derive(Debug, Clone, Copy)]
pub struct PlanRequest<'a> {
    pub current_position: Point,
    pub uncertainty: &'a UncertaintyField,
    pub grid: &'a GridSpec,
    pub graph: &'a MotionGraph,
    pub engine: ShortestPath,
}

/// 3x3 box filter of the field (zero outside the grid).
pub fn box_filter(values: &[f64], grid: &GridSpec) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for (g, slot) in out.iter_mut().enumerate() {
        let (r, c) = grid.row_col(g);
        let mut acc = 0.0;
        for nr in r.saturating_sub(1)..=(r + 1).min(grid.rows - 1) {
            for nc in c.saturating_sub(1)..=(c + 1).min(grid.cols - 1) {
                acc += values[grid.index(nr, nc)];
            }
        }
        *slot = acc;
    }
    out
}

/// Grid index with the highest low-pass filtered uncertainty. Ties go to the
/// higher unfiltered value, then to the lowest index.
pub fn pick_destination(uncertainty: &UncertaintyField, grid: &GridSpec) -> Result<usize> {
    pick_destination_excluding(uncertainty, grid, None)
}

/// As [`pick_destination`], skipping `exclude` unless it is the only point.
pub fn pick_destination_excluding(
    uncertainty: &UncertaintyField,
    grid: &GridSpec,
    exclude: Option<usize>,
) -> Result<usize> {
    if uncertainty.is_empty() {
        return Err(SurveyError::Empty("uncertainty field"));
    }
    if uncertainty.len() != grid.len() {
        return Err(SurveyError::LengthMismatch {
            expected: grid.len(),
            got: uncertainty.len(),
        });
    }
    let filtered = box_filter(&uncertainty.values, grid);
    let mut best: Option<(usize, f64, f64)> = None;
    for (g, (&v, &raw)) in filtered.iter().zip(&uncertainty.values).enumerate() {
        if Some(g) == exclude && grid.len() > 1 {
            continue;
        }
        if best.is_none_or(|(_, b, braw)| v > b || (v == b && raw > braw)) {
            best = Some((g, v, raw));
        }
    }
    Ok(best.map(|(g, _, _)| g).unwrap_or(0))
}

/// Reciprocal of the trapezoidal line integral of uncertainty along an edge.
pub fn edge_weight(length: f64, u_from: f64, u_to: f64) -> f64 {
    1.0 / (length * 0.5 * (u_from + u_to)).max(EPS_EDGE)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn unwind(prev: &[Option<usize>], src: usize, dst: usize) -> Vec<usize> {
    let mut path = vec![dst];
    let mut cur = dst;
    while cur != src {
        match prev[cur] {
            Some(p) => {
                path.push(p);
                cur = p;
            }
            None => break,
        }
    }
    path.reverse();
    path
}

/// Minimum-weight path from `src` to `dst`; returns the node sequence and its cost.
pub fn shortest_path(
    graph: &MotionGraph,
    weights: &[f64],
    src: usize,
    dst: usize,
    engine: ShortestPath,
) -> Result<(Vec<usize>, f64)> {
    let n = graph.len();
    for g in [src, dst] {
        if g >= n {
            return Err(SurveyError::IndexOutOfRange { index: g, len: n });
        }
    }
    let weight = |a: usize, k: usize| {
        let (b, len) = graph.neighbors(a)[k];
        (b, edge_weight(len, weights[a], weights[b]))
    };
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![None; n];
    dist[src] = 0.0;
    match engine {
        ShortestPath::Dijkstra => {
            let mut heap = BinaryHeap::new();
            heap.push(Frontier {
                cost: 0.0,
                node: src,
            });
            while let Some(Frontier { cost, node }) = heap.pop() {
                if node == dst {
                    break;
                }
                if cost > dist[node] {
                    continue;
                }
                for k in 0..graph.neighbors(node).len() {
                    let (next, w) = weight(node, k);
                    let cand = cost + w;
                    if cand < dist[next] {
                        dist[next] = cand;
                        prev[next] = Some(node);
                        heap.push(Frontier {
                            cost: cand,
                            node: next,
                        });
                    }
                }
            }
        }
        ShortestPath::BellmanFord => {
            for _ in 1..n.max(2) {
                let mut changed = false;
                for a in 0..n {
                    if !dist[a].is_finite() {
                        continue;
                    }
                    for k in 0..graph.neighbors(a).len() {
                        let (b, w) = weight(a, k);
                        if dist[a] + w < dist[b] {
                            dist[b] = dist[a] + w;
                            prev[b] = Some(a);
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }
    if !dist[dst].is_finite() {
        return Err(SurveyError::Unreachable(dst));
    }
    Ok((unwind(&prev, src, dst), dist[dst]))
}

/// Route from the grid point nearest the current position to `destination`
/// that maximizes the uncertainty collected along the way.
pub fn min_cost_route(request: &PlanRequest<'_>, destination: usize) -> Result<Vec<Point>> {
    let grid = request.grid;
    if request.uncertainty.len() != grid.len() {
        return Err(SurveyError::LengthMismatch {
            expected: grid.len(),
            got: request.uncertainty.len(),
        });
    }
    let start = grid.nearest_index(&request.current_position);
    let (nodes, _) = shortest_path(
        request.graph,
        &request.uncertainty.values,
        start,
        destination,
        request.engine,
    )?;
    let mut route = Vec::with_capacity(nodes.len() + 1);
    let snapped = grid.index_to_point(start)?;
    if snapped.distance(&request.current_position) > 0.0 {
        route.push(request.current_position);
    }
    route.extend(nodes.into_iter().map(|g| grid.point_unchecked(g)));
    Ok(route)
}

/// Drops consecutive duplicates and interior points on straight runs.
fn corners(points: Vec<Point>) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if out.last() == Some(&p) {
            continue;
        }
        if out.len() >= 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let cross = (b.x - a.x) * (p.y - b.y) - (b.y - a.y) * (p.x - b.x);
            let dot = (b.x - a.x) * (p.x - b.x) + (b.y - a.y) * (p.y - b.y);
            if cross.abs() < 1e-9 && dot > 0.0 {
                out.pop();
            }
        }
        out.push(p);
    }
    out
}

/// Boustrophedon sweep: even rows left to right, odd rows right to left.
pub fn grid_route(grid: &GridSpec) -> Vec<Point> {
    let last = grid.cols - 1;
    let mut pts = Vec::with_capacity(2 * grid.rows);
    for r in 0..grid.rows {
        let (a, b) = if r % 2 == 0 { (0, last) } else { (last, 0) };
        pts.push(grid.point_unchecked(grid.index(r, a)));
        pts.push(grid.point_unchecked(grid.index(r, b)));
    }
    corners(pts)
}

/// Grid cells in inward spiral order starting at (0, 0), clockwise in
/// screen coordinates (along row 0 first, then down the last column).
pub fn spiral_order(grid: &GridSpec) -> Vec<usize> {
    let (mut top, mut left) = (0i64, 0i64);
    let (mut bottom, mut right) = (grid.rows as i64 - 1, grid.cols as i64 - 1);
    let mut order = Vec::with_capacity(grid.len());
    let idx = |r: i64, c: i64| grid.index(r as usize, c as usize);
    while top <= bottom && left <= right {
        for c in left..=right {
            order.push(idx(top, c));
        }
        for r in top + 1..=bottom {
            order.push(idx(r, right));
        }
        if top < bottom {
            for c in (left..right).rev() {
                order.push(idx(bottom, c));
            }
        }
        if left < right {
            for r in (top + 1..bottom).rev() {
                order.push(idx(r, left));
            }
        }
        top += 1;
        left += 1;
        bottom -= 1;
        right -= 1;
    }
    order
}

/// Inward rectangular spiral with waypoints at the ring corners.
pub fn spiral_route(grid: &GridSpec) -> Vec<Point> {
    corners(
        spiral_order(grid)
            .into_iter()
            .map(|g| grid.point_unchecked(g))
            .collect(),
    )
}

/// Straight leg to a destination drawn uniformly from the grid points.
pub fn random_route<R: Rng + ?Sized>(request: &PlanRequest<'_>, rng: &mut R) -> Vec<Point> {
    let d = rng.random_range(0..request.grid.len());
    vec![request.current_position, request.grid.point_unchecked(d)]
}

/// Stateful planning policy: produces the next leg each time the agent
/// reaches the end of the previous one.
#[derive(Debug, Clone)]
pub struct Planner {
    kind: PlannerKind,
    fixed: Option<Vec<Point>>,
    legs: usize,
}

impl Planner {
    pub fn new(kind: PlannerKind, grid: &GridSpec) -> Self {
        let fixed = match kind {
            PlannerKind::Grid => Some(grid_route(grid)),
            PlannerKind::Spiral => Some(spiral_route(grid)),
            _ => None,
        };
        Self {
            kind,
            fixed,
            legs: 0,
        }
    }

    pub fn kind(&self) -> PlannerKind {
        self.kind
    }

    /// Next leg, starting at the current position. Fixed coverage patterns are
    /// flown forward, then backward, and so on until the survey stops.
    pub fn next_leg<R: Rng + ?Sized>(
        &mut self,
        request: &PlanRequest<'_>,
        rng: &mut R,
    ) -> Result<Vec<Point>> {
        let leg = match (&self.fixed, self.kind) {
            (Some(route), _) => {
                let mut pattern = route.clone();
                if self.legs % 2 == 1 {
                    pattern.reverse();
                }
                let mut leg = Vec::with_capacity(pattern.len() + 1);
                if pattern.first() != Some(&request.current_position) {
                    leg.push(request.current_position);
                }
                leg.extend(pattern);
                leg
            }
            (None, PlannerKind::Random) => random_route(request, rng),
            (None, _) => {
                let here = request.grid.nearest_index(&request.current_position);
                let dest =
                    pick_destination_excluding(request.uncertainty, request.grid, Some(here))?;
                min_cost_route(request, dest)?
            }
        };
        self.legs += 1;
        Ok(leg)
    }
}

/// Total length of a leg in meters.
pub fn leg_length(leg: &[Point]) -> f64 {
    path_length(leg)
}

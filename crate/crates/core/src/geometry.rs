//! Masked Cartesian discretizations of bounded open sets in 2D and 3D.
//!
//! Every domain lives on the global lattice `x = k h` (k integer). A node is
//! interior iff it lies strictly inside the analytic region; all other nodes,
//! including a margin of at least two lattice layers around the shape, carry
//! the clamped boundary values.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in space. Two-dimensional domains ignore the last coordinate.
pub type Point = [f64; 3];

const MARGIN: i64 = 2;
const MAX_NODES: usize = 60_000_000;

pub fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Volume of the unit ball in dimension `dim`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => panic!("unsupported dimension {dim}"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeTag {
    Rectangle,
    Disk,
    Annulus,
    LShape,
    Dumbbell,
    Custom,
}

fn default_dim() -> usize {
    2
}

/// Analytic description of a bounded open set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// Axis-aligned box; `min`/`max` have one entry per dimension.
    Rectangle { min: Vec<f64>, max: Vec<f64> },
    /// Disk (2D) or ball (3D).
    Disk {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        radius: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// Planar annulus `inner < |x - center| < outer`.
    Annulus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        inner: f64,
        outer: f64,
    },
    /// `(0, size)^2` with the upper-right quadrant `[size/2, size)^2` removed.
    LShape { size: f64 },
    /// Two disks of `radius` centred at `(±separation/2, 0)` joined by a
    /// straight corridor of width `corridor`.
    Dumbbell {
        radius: f64,
        separation: f64,
        corridor: f64,
    },
}

impl Shape {
    pub fn unit_square() -> Self {
        Shape::Rectangle {
            min: vec![0.0, 0.0],
            max: vec![1.0, 1.0],
        }
    }

    pub fn unit_disk() -> Self {
        Shape::Disk {
            center: None,
            radius: 1.0,
            dim: 2,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::Rectangle { min, .. } => min.len(),
            Shape::Disk { dim, .. } => *dim,
            _ => 2,
        }
    }

    pub fn tag(&self) -> ShapeTag {
        match self {
            Shape::Rectangle { .. } => ShapeTag::Rectangle,
            Shape::Disk { .. } => ShapeTag::Disk,
            Shape::Annulus { .. } => ShapeTag::Annulus,
            Shape::LShape { .. } => ShapeTag::LShape,
            Shape::Dumbbell { .. } => ShapeTag::Dumbbell,
        }
    }

    fn center_point(center: &Option<Vec<f64>>, dim: usize) -> Result<Point> {
        let mut p = [0.0; 3];
        if let Some(c) = center {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.len(),
                });
            }
            p[..dim].copy_from_slice(c);
        }
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::DegenerateDomain(msg.to_string()));
        let dim = self.dim();
        if !(2..=3).contains(&dim) {
            return bad("dimension must be 2 or 3");
        }
        match self {
            Shape::Rectangle { min, max } => {
                if min.len() != max.len() {
                    return Err(Error::DimensionMismatch {
                        expected: min.len(),
                        got: max.len(),
                    });
                }
                if min.iter().zip(max).any(|(a, b)| !(b > a) || !a.is_finite() || !b.is_finite()) {
                    return bad("rectangle needs min < max on every axis");
                }
            }
            Shape::Disk { center, radius, .. } => {
                Self::center_point(center, dim)?;
                if !(*radius > 0.0) || !radius.is_finite() {
                    return bad("disk radius must be positive");
                }
            }
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                Self::center_point(center, 2)?;
                if !(*inner >= 0.0) || !(outer > inner) || !outer.is_finite() {
                    return bad("annulus needs 0 <= inner < outer");
                }
            }
            Shape::LShape { size } => {
                if !(*size > 0.0) || !size.is_finite() {
                    return bad("L-shape size must be positive");
                }
            }
            Shape::Dumbbell {
                radius,
                separation,
                corridor,
            } => {
                if !(*radius > 0.0) || !(*corridor > 0.0) || !(*separation >= 0.0) {
                    return bad("dumbbell parameters must be positive");
                }
                if !separation.is_finite() || !radius.is_finite() || !corridor.is_finite() {
                    return bad("dumbbell parameters must be finite");
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounding box of the closure.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        match self {
            Shape::Rectangle { min, max } => {
                lo[..min.len()].copy_from_slice(min);
                hi[..max.len()].copy_from_slice(max);
            }
            Shape::Disk {
                center,
                radius,
                dim,
            } => {
                let c = Self::center_point(center, *dim).unwrap_or([0.0; 3]);
                for a in 0..*dim {
                    lo[a] = c[a] - radius;
                    hi[a] = c[a] + radius;
                }
            }
            Shape::Annulus { center, outer, .. } => {
                let c = Self::center_point(center, 2).unwrap_or([0.0; 3]);
                for a in 0..2 {
                    lo[a] = c[a] - outer;
                    hi[a] = c[a] + outer;
                }
            }
            Shape::LShape { size } => {
                hi[0] = *size;
                hi[1] = *size;
            }
            Shape::Dumbbell {
                radius,
                separation,
                corridor,
            } => {
                let half = separation / 2.0 + radius;
                let y = radius.max(corridor / 2.0);
                lo[0] = -half;
                hi[0] = half;
                lo[1] = -y;
                hi[1] = y;
            }
        }
        (lo, hi)
    }

    /// Width of the thinnest feature; the grid must resolve it.
    pub fn thinnest_feature(&self) -> f64 {
        match self {
            Shape::Rectangle { min, max } => min
                .iter()
                .zip(max)
                .map(|(a, b)| b - a)
                .fold(f64::INFINITY, f64::min),
            Shape::Disk { radius, .. } => 2.0 * radius,
            Shape::Annulus { inner, outer, .. } => outer - inner,
            Shape::LShape { size } => size / 2.0,
            Shape::Dumbbell {
                radius, corridor, ..
            } => corridor.min(2.0 * radius),
        }
    }

    /// Strict membership, with boundary points pushed out by `eps`.
    pub fn contains(&self, p: &Point, eps: f64) -> bool {
        match self {
            Shape::Rectangle { min, max } => (0..min.len())
                .all(|a| p[a] > min[a] + eps && p[a] < max[a] - eps),
            Shape::Disk {
                center,
                radius,
                dim,
            } => {
                let c = Self::center_point(center, *dim).unwrap_or([0.0; 3]);
                distance(p, &c) < radius - eps
            }
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let c = Self::center_point(center, 2).unwrap_or([0.0; 3]);
                let r = distance(&[p[0], p[1], 0.0], &c);
                r > inner + eps && r < outer - eps
            }
            Shape::LShape { size } => {
                let half = size / 2.0;
                let in_square = p[0] > eps && p[0] < size - eps && p[1] > eps && p[1] < size - eps;
                let in_notch = p[0] > half - eps && p[1] > half - eps;
                in_square && !in_notch
            }
            Shape::Dumbbell {
                radius,
                separation,
                corridor,
            } => {
                let s = separation / 2.0;
                let left = distance(&[p[0], p[1], 0.0], &[-s, 0.0, 0.0]) < radius - eps;
                let right = distance(&[p[0], p[1], 0.0], &[s, 0.0, 0.0]) < radius - eps;
                let bar = p[0].abs() < s && p[1].abs() < corridor / 2.0 - eps;
                left || right || bar
            }
        }
    }

    /// The image of the shape under `x -> s x`.
    pub fn dilated(&self, s: f64) -> Shape {
        let scale = |v: &Vec<f64>| v.iter().map(|x| x * s).collect::<Vec<_>>();
        match self {
            Shape::Rectangle { min, max } => Shape::Rectangle {
                min: scale(min),
                max: scale(max),
            },
            Shape::Disk {
                center,
                radius,
                dim,
            } => Shape::Disk {
                center: center.as_ref().map(scale),
                radius: radius * s,
                dim: *dim,
            },
            Shape::Annulus {
                center,
                inner,
                outer,
            } => Shape::Annulus {
                center: center.as_ref().map(scale),
                inner: inner * s,
                outer: outer * s,
            },
            Shape::LShape { size } => Shape::LShape { size: size * s },
            Shape::Dumbbell {
                radius,
                separation,
                corridor,
            } => Shape::Dumbbell {
                radius: radius * s,
                separation: separation * s,
                corridor: corridor * s,
            },
        }
    }
}

/// A discretized bounded domain.
#[derive(Clone, Debug)]
pub struct DomainMask {
    dim: usize,
    h: f64,
    extents: [usize; 3],
    origin: [i64; 3],
    interior: Vec<bool>,
    slot: Vec<u32>,
    cells: Vec<usize>,
    node_distance: Vec<f64>,
    diameter: f64,
    shape_tag: ShapeTag,
    shape: Option<Shape>,
}

const NO_SLOT: u32 = u32::MAX;

/// Discretizes `shape` at cell size `h`.
pub fn build_domain(shape: &Shape, h: f64) -> Result<DomainMask> {
    shape.validate()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Precondition(format!("cell size must be positive, got {h}")));
    }
    let feature = shape.thinnest_feature();
    if h >= feature {
        return Err(Error::ResolutionTooCoarse { h, feature });
    }
    let (lo, hi) = shape.bounding_box();
    let eps = 1e-9 * h;
    let mut mask =
        DomainMask::from_predicate(shape.dim(), h, lo, hi, shape.tag(), |p| shape.contains(p, eps))?;
    mask.shape = Some(shape.clone());
    Ok(mask)
}

impl DomainMask {
    /// Builds a mask from an arbitrary membership predicate over the box `[lo, hi]`.
    pub fn from_predicate<F>(
        dim: usize,
        h: f64,
        lo: Point,
        hi: Point,
        shape_tag: ShapeTag,
        inside: F,
    ) -> Result<Self>
    where
        F: Fn(&Point) -> bool,
    {
        if !(2..=3).contains(&dim) {
            return Err(Error::DegenerateDomain(format!("unsupported dimension {dim}")));
        }
        let mut origin = [0i64; 3];
        let mut extents = [1usize; 3];
        for a in 0..dim {
            let first = (lo[a] / h).floor() as i64 - MARGIN;
            let last = (hi[a] / h).ceil() as i64 + MARGIN;
            origin[a] = first;
            extents[a] = (last - first + 1) as usize;
        }
        let total = extents.iter().product::<usize>();
        if total > MAX_NODES {
            return Err(Error::Precondition(format!("grid of {total} nodes exceeds the supported size")));
        }

        let mut interior = vec![false; total];
        let mut slot = vec![NO_SLOT; total];
        let mut cells = Vec::new();
        for k in 0..extents[2] {
            for j in 0..extents[1] {
                for i in 0..extents[0] {
                    let g = i + extents[0] * (j + extents[1] * k);
                    let idx = [i, j, k];
                    let edge = (0..dim).any(|a| idx[a] < 1 || idx[a] + 1 >= extents[a]);
                    if edge {
                        continue;
                    }
                    let p = [
                        (origin[0] + i as i64) as f64 * h,
                        (origin[1] + j as i64) as f64 * h,
                        (origin[2] + k as i64) as f64 * h,
                    ];
                    if inside(&p) {
                        interior[g] = true;
                        slot[g] = cells.len() as u32;
                        cells.push(g);
                    }
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::DegenerateDomain("no interior cells".into()));
        }

        let mut mask = DomainMask {
            dim,
            h,
            extents,
            origin,
            interior,
            slot,
            cells,
            node_distance: Vec::new(),
            diameter: 0.0,
            shape_tag,
            shape: None,
        };
        let exterior: Vec<bool> = mask.interior.iter().map(|&b| !b).collect();
        mask.node_distance = mask
            .distance_transform(&exterior)
            .into_iter()
            .map(|d2| d2.sqrt() * h)
            .collect();
        mask.diameter = mask.compute_diameter();
        Ok(mask)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extents(&self) -> [usize; 3] {
        self.extents
    }

    pub fn origin(&self) -> [i64; 3] {
        self.origin
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn shape_tag(&self) -> ShapeTag {
        self.shape_tag
    }

    /// The analytic shape, when the mask was built from one.
    pub fn shape(&self) -> Option<&Shape> {
        self.shape.as_ref()
    }

    /// Number of interior cells.
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.interior.len()
    }

    /// Quadrature weight of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Midpoint-rule volume of the domain.
    pub fn measure(&self) -> f64 {
        self.n_cells() as f64 * self.cell_volume()
    }

    pub fn is_interior_node(&self, g: usize) -> bool {
        self.interior[g]
    }

    /// Interior index of grid node `g`, if interior.
    pub fn slot(&self, g: usize) -> Option<usize> {
        match self.slot[g] {
            NO_SLOT => None,
            s => Some(s as usize),
        }
    }

    /// Grid node of interior cell `c`.
    pub fn cell_node(&self, c: usize) -> usize {
        self.cells[c]
    }

    pub fn node_coords(&self, g: usize) -> [usize; 3] {
        let nx = self.extents[0];
        let ny = self.extents[1];
        [g % nx, (g / nx) % ny, g / (nx * ny)]
    }

    /// Global lattice indices of node `g`.
    pub fn lattice_index(&self, g: usize) -> [i64; 3] {
        let c = self.node_coords(g);
        [
            self.origin[0] + c[0] as i64,
            self.origin[1] + c[1] as i64,
            self.origin[2] + c[2] as i64,
        ]
    }

    pub fn node_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.extents[0] * (c[1] + self.extents[1] * c[2])
    }

    pub fn node_point(&self, g: usize) -> Point {
        let l = self.lattice_index(g);
        [l[0] as f64 * self.h, l[1] as f64 * self.h, l[2] as f64 * self.h]
    }

    pub fn cell_point(&self, c: usize) -> Point {
        self.node_point(self.cells[c])
    }

    /// Neighbouring node of `g` one step along `axis` in direction `dir` (±1).
    pub fn neighbor(&self, g: usize, axis: usize, dir: i64) -> Option<usize> {
        let mut c = self.node_coords(g);
        let v = c[axis] as i64 + dir;
        if v < 0 || v >= self.extents[axis] as i64 {
            return None;
        }
        c[axis] = v as usize;
        Some(self.node_index(c))
    }

    /// Conservative distance from interior cell `c` to the boundary.
    pub fn cell_interior_distance(&self, c: usize) -> f64 {
        (self.node_distance[self.cells[c]] - 0.5 * self.h).max(0.0)
    }

    /// Euclidean distance from node `g` to the nearest non-interior node.
    pub fn node_distance(&self, g: usize) -> f64 {
        self.node_distance[g]
    }

    fn in_box(&self, x: &Point) -> bool {
        (0..self.dim).all(|a| {
            let lo = self.origin[a] as f64 * self.h;
            let hi = (self.origin[a] + self.extents[a] as i64 - 1) as f64 * self.h;
            x[a] >= lo && x[a] <= hi && x[a].is_finite()
        })
    }

    fn nearest_node(&self, x: &Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for a in 0..self.dim {
            let v = (x[a] / self.h).round() as i64 - self.origin[a];
            c[a] = v.clamp(0, self.extents[a] as i64 - 1) as usize;
        }
        c
    }

    /// Interior cell nearest to `x`, if that node is interior.
    pub fn cell_at(&self, x: &Point) -> Option<usize> {
        if !self.in_box(x) {
            return None;
        }
        self.slot(self.node_index(self.nearest_node(x)))
    }

    /// Distance from `x` to the nearest non-interior node, minus `h/2`, floored at 0.
    pub fn interior_distance(&self, x: &Point) -> Result<f64> {
        if !self.in_box(x) {
            return Err(Error::PointOutOfRange(*x));
        }
        let base = self.nearest_node(x);
        let g = self.node_index(base);
        let bp = self.node_point(g);
        if distance(&bp, x) <= 1e-12 * self.h {
            return Ok((self.node_distance[g] - 0.5 * self.h).max(0.0));
        }
        let mut best = f64::INFINITY;
        let max_ring = (0..self.dim).map(|a| self.extents[a]).max().unwrap_or(1);
        for ring in 0..=max_ring as i64 {
            self.for_each_ring_node(base, ring, |n| {
                if !self.interior[n] {
                    best = best.min(distance(&self.node_point(n), x));
                }
            });
            if best <= (ring as f64 + 0.5) * self.h {
                break;
            }
        }
        Ok((best - 0.5 * self.h).max(0.0))
    }

    fn for_each_ring_node<F: FnMut(usize)>(&self, base: [usize; 3], ring: i64, mut f: F) {
        let span = |a: usize| -> (i64, i64) {
            if a < self.dim {
                (-ring, ring)
            } else {
                (0, 0)
            }
        };
        let (z0, z1) = span(2);
        let (y0, y1) = span(1);
        let (x0, x1) = span(0);
        for dz in z0..=z1 {
            for dy in y0..=y1 {
                for dx in x0..=x1 {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                        continue;
                    }
                    let c = [base[0] as i64 + dx, base[1] as i64 + dy, base[2] as i64 + dz];
                    if (0..3).any(|a| c[a] < 0 || c[a] >= self.extents[a] as i64) {
                        continue;
                    }
                    f(self.node_index([c[0] as usize, c[1] as usize, c[2] as usize]));
                }
            }
        }
    }

    /// Interior cells whose nodes lie strictly inside `ball`, in ascending order.
    pub fn ball_cells(&self, ball: &Ball) -> Vec<usize> {
        let mut out = Vec::new();
        if !(ball.radius > 0.0) {
            return out;
        }
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..3 {
            if a >= self.dim {
                continue;
            }
            let first = ((ball.center[a] - ball.radius) / self.h).floor() as i64 - self.origin[a];
            let last = ((ball.center[a] + ball.radius) / self.h).ceil() as i64 - self.origin[a];
            let top = self.extents[a] as i64 - 1;
            if last < 0 || first > top {
                return out;
            }
            lo[a] = first.clamp(0, top) as usize;
            hi[a] = last.clamp(0, top) as usize;
        }
        for k in lo[2]..=hi[2] {
            for j in lo[1]..=hi[1] {
                for i in lo[0]..=hi[0] {
                    let g = self.node_index([i, j, k]);
                    if let Some(s) = self.slot(g) {
                        if distance(&self.node_point(g), &ball.center) < ball.radius {
                            out.push(s);
                        }
                    }
                }
            }
        }
        out
    }

    /// Builds an overlapping chain of balls of radius `r` from `x_start` to `x_end`.
    pub fn chain_of_balls(&self, x_start: &Point, x_end: &Point, r: f64) -> Result<ChainReport> {
        if !(r > self.h) {
            return Err(Error::Precondition(format!(
                "chain radius {r} must exceed the cell size {}",
                self.h
            )));
        }
        for x in [x_start, x_end] {
            let d = self.interior_distance(x)?;
            if d <= r {
                return Err(Error::Precondition(format!(
                    "chain endpoint {x:?} has interior distance {d} <= r = {r}"
                )));
            }
        }
        let step = r - self.h;
        let length = distance(x_start, x_end);
        if length == 0.0 {
            return Ok(ChainReport {
                centers: vec![*x_start],
                radius: r,
                steps: 0,
            });
        }

        if self.segment_is_safe(x_start, x_end, r)? {
            let n = (length / step).ceil().max(1.0) as usize;
            let mut centers: Vec<Point> = (0..=n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let mut p = [0.0; 3];
                    for a in 0..3 {
                        p[a] = x_start[a] + t * (x_end[a] - x_start[a]);
                    }
                    p
                })
                .collect();
            centers[n] = *x_end;
            return Ok(ChainReport {
                centers,
                radius: r,
                steps: n,
            });
        }

        let path = self.safe_path(x_start, x_end, r, step)?;
        let mut waypoints = Vec::with_capacity(path.len() + 1);
        waypoints.extend(path.iter().map(|&g| self.node_point(g)));
        waypoints.push(*x_end);

        let mut centers = vec![*x_start];
        let mut current = *x_start;
        let mut candidate: Option<Point> = None;
        let mut i = 0;
        while i < waypoints.len() {
            let q = waypoints[i];
            if distance(&q, &current) <= step {
                candidate = Some(q);
                i += 1;
            } else {
                match candidate.take() {
                    Some(c) if distance(&c, &current) > 0.0 => {
                        centers.push(c);
                        current = c;
                    }
                    _ => return Err(Error::ChainNotConstructible(r)),
                }
            }
        }
        if distance(&current, x_end) > 0.0 {
            centers.push(*x_end);
        }
        let steps = centers.len() - 1;
        Ok(ChainReport {
            centers,
            radius: r,
            steps,
        })
    }

    fn segment_is_safe(&self, a: &Point, b: &Point, r: f64) -> Result<bool> {
        let length = distance(a, b);
        let n = ((length / (0.25 * self.h)).ceil() as usize).max(1);
        for i in 0..=n {
            let t = i as f64 / n as f64;
            let mut p = [0.0; 3];
            for ax in 0..3 {
                p[ax] = a[ax] + t * (b[ax] - a[ax]);
            }
            if !self.in_box(&p) {
                return Err(Error::PointOutOfRange(p));
            }
            // Triangle inequality through the nearest node skips the ring search.
            let g = self.node_index(self.nearest_node(&p));
            if self.node_distance[g] - distance(&self.node_point(g), &p) - 0.5 * self.h > r {
                continue;
            }
            if self.interior_distance(&p)? <= r {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn is_safe_node(&self, g: usize, r: f64) -> bool {
        self.interior[g] && self.node_distance[g] - 0.5 * self.h > r
    }

    fn nearest_safe_node(&self, x: &Point, r: f64, reach: f64) -> Option<usize> {
        let base = self.nearest_node(x);
        let rings = (reach / self.h).ceil() as i64 + 1;
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=rings {
            self.for_each_ring_node(base, ring, |g| {
                if self.is_safe_node(g, r) {
                    let d = distance(&self.node_point(g), x);
                    if d <= reach && best.map_or(true, |(bd, bg)| d < bd || (d == bd && g < bg)) {
                        best = Some((d, g));
                    }
                }
            });
        }
        best.map(|(_, g)| g)
    }

    fn safe_path(&self, x_start: &Point, x_end: &Point, r: f64, step: f64) -> Result<Vec<usize>> {
        let dim = self.dim;
        if (dim as f64).sqrt() * self.h > step {
            return Err(Error::ChainNotConstructible(r));
        }
        let start = self
            .nearest_safe_node(x_start, r, step)
            .ok_or(Error::ChainNotConstructible(r))?;
        let goal = self
            .nearest_safe_node(x_end, r, step)
            .ok_or(Error::ChainNotConstructible(r))?;

        let offsets = neighbor_offsets(dim);
        let mut parent = vec![usize::MAX; self.n_nodes()];
        let mut queue = VecDeque::new();
        parent[start] = start;
        queue.push_back(start);
        while let Some(g) = queue.pop_front() {
            if g == goal {
                break;
            }
            let c = self.node_coords(g);
            for off in &offsets {
                let n = [c[0] as i64 + off[0], c[1] as i64 + off[1], c[2] as i64 + off[2]];
                if (0..3).any(|a| n[a] < 0 || n[a] >= self.extents[a] as i64) {
                    continue;
                }
                let ng = self.node_index([n[0] as usize, n[1] as usize, n[2] as usize]);
                if parent[ng] == usize::MAX && self.is_safe_node(ng, r) {
                    parent[ng] = g;
                    queue.push_back(ng);
                }
            }
        }
        if parent[goal] == usize::MAX {
            return Err(Error::ChainNotConstructible(r));
        }
        let mut path = vec![goal];
        let mut g = goal;
        while g != start {
            g = parent[g];
            path.push(g);
        }
        path.reverse();
        Ok(path)
    }

    /// Discrete interior sphere test: every boundary-adjacent interior cell
    /// lies within `r0 + 2h` of a cell whose interior distance is at least `r0`.
    pub fn check_interior_sphere(&self, r0: f64) -> bool {
        self.interior_sphere_failures(r0)
            .map_or(false, |failures| failures.is_empty())
    }

    /// Boundary-adjacent interior cells that no inscribed ball of radius `r0`
    /// reaches. `None` when no ball of radius `r0` fits at all.
    pub fn interior_sphere_failures(&self, r0: f64) -> Option<Vec<usize>> {
        if !(r0 > 0.0) {
            return None;
        }
        let centers: Vec<bool> = (0..self.n_nodes())
            .map(|g| self.interior[g] && self.node_distance[g] - 0.5 * self.h >= r0)
            .collect();
        if !centers.iter().any(|&b| b) {
            return None;
        }
        let to_center = self.distance_transform(&centers);
        let slack = r0 + 2.0 * self.h;
        Some(
            (0..self.n_cells())
                .filter(|&c| {
                    let g = self.cells[c];
                    self.is_boundary_adjacent(g) && to_center[g].sqrt() * self.h > slack
                })
                .collect(),
        )
    }

    fn is_boundary_adjacent(&self, g: usize) -> bool {
        (0..self.dim).any(|a| {
            [-1, 1]
                .iter()
                .any(|&d| self.neighbor(g, a, d).map_or(true, |n| !self.interior[n]))
        })
    }

    /// Exact squared Euclidean distance transform (in lattice units) to the
    /// nearest node flagged in `features`.
    fn distance_transform(&self, features: &[bool]) -> Vec<f64> {
        let inf = 1e30;
        let mut d: Vec<f64> = features.iter().map(|&f| if f { 0.0 } else { inf }).collect();
        let ex = self.extents;
        for axis in 0..self.dim {
            let n = ex[axis];
            let stride = match axis {
                0 => 1,
                1 => ex[0],
                _ => ex[0] * ex[1],
            };
            let mut line = vec![0.0; n];
            let mut out = vec![0.0; n];
            let mut v = vec![0usize; n];
            let mut z = vec![0.0; n + 1];
            for g in 0..d.len() {
                if self.node_coords(g)[axis] != 0 {
                    continue;
                }
                for i in 0..n {
                    line[i] = d[g + i * stride];
                }
                squared_edt_1d(&line, &mut out, &mut v, &mut z, inf);
                for i in 0..n {
                    d[g + i * stride] = out[i];
                }
            }
        }
        d
    }

    /// Diameter of the discrete closure: interior nodes together with the
    /// boundary nodes adjacent to them.
    fn compute_diameter(&self) -> f64 {
        let closure: Vec<bool> = (0..self.n_nodes())
            .map(|g| {
                self.interior[g]
                    || (0..self.dim).any(|a| {
                        [-1, 1].iter().any(|&d| {
                            self.neighbor(g, a, d).map_or(false, |n| self.interior[n])
                        })
                    })
            })
            .collect();
        let mut extremes = Vec::new();
        let [nx, ny, nz] = self.extents;
        for k in 0..nz {
            for j in 0..ny {
                let row = (0..nx).filter(|&i| closure[self.node_index([i, j, k])]);
                let mut first = None;
                let mut last = None;
                for i in row {
                    if first.is_none() {
                        first = Some(i);
                    }
                    last = Some(i);
                }
                if let (Some(a), Some(b)) = (first, last) {
                    extremes.push(self.node_point(self.node_index([a, j, k])));
                    if b != a {
                        extremes.push(self.node_point(self.node_index([b, j, k])));
                    }
                }
            }
        }
        let mut best = 0.0f64;
        for (i, a) in extremes.iter().enumerate() {
            for b in &extremes[i + 1..] {
                best = best.max(distance(a, b));
            }
        }
        best
    }
}

fn neighbor_offsets(dim: usize) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    let zr = if dim == 3 { -1..=1 } else { 0..=0 };
    for dz in zr {
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx != 0 || dy != 0 || dz != 0 {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

/// Felzenszwalb–Huttenlocher lower envelope of parabolas.
fn squared_edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64], inf: f64) {
    let n = f.len();
    let mut k = 0usize;
    let mut first = None;
    for q in 0..n {
        if f[q] < inf {
            first = Some(q);
            break;
        }
    }
    let Some(q0) = first else {
        d.iter_mut().for_each(|x| *x = inf);
        return;
    };
    v[0] = q0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in q0 + 1..n {
        if f[q] >= inf {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                if k == 0 {
                    v[0] = q;
                    z[0] = f64::NEG_INFINITY;
                    z[1] = f64::INFINITY;
                    break;
                }
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let dq = q as f64 - p as f64;
        d[q] = dq * dq + f[p];
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        Ball { center, radius }
    }
}

/// Overlapping balls joining two points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub centers: Vec<Point>,
    pub radius: f64,
    /// Chain length `h`: number of steps between consecutive centers.
    pub steps: usize,
}

impl ChainReport {
    /// Consecutive half-balls intersect iff the centers are closer than `r`.
    pub fn half_balls_overlap(&self) -> bool {
        self.centers
            .windows(2)
            .all(|w| distance(&w[0], &w[1]) < self.radius)
    }
}

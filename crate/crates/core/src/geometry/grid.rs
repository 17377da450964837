use alloc::vec;
use alloc::vec::Vec;

use super::{ConvexDomain, Dim};
use crate::error::{Error, Result};
use crate::math::{ceil, floor, Vec2};

/// Lattice directions used by 2D stencils, as `(+v, −v)` pairs.
///
/// Pairs 0..4 have width 1 (axes and diagonals), pairs 4..8 width 2 and
/// pairs 8..16 width 3. Direction `d` and `d ^ 1` are opposite.
pub const DIRS_2D: [(i32, i32); 32] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, -1),
    (1, -1),
    (-1, 1),
    (2, 1),
    (-2, -1),
    (1, 2),
    (-1, -2),
    (2, -1),
    (-2, 1),
    (1, -2),
    (-1, 2),
    (3, 1),
    (-3, -1),
    (1, 3),
    (-1, -3),
    (3, -1),
    (-3, 1),
    (1, -3),
    (-1, 3),
    (3, 2),
    (-3, -2),
    (2, 3),
    (-2, -3),
    (3, -2),
    (-3, 2),
    (2, -3),
    (-2, 3),
];

pub const DIRS_1D: [(i32, i32); 2] = [(1, 0), (-1, 0)];

/// Number of direction pairs available for a stencil width in 2D.
pub fn pairs_for_width(width: u8) -> usize {
    match width {
        0 | 1 => 4,
        2 => 8,
        _ => 16,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeTag {
    Interior,
    Boundary,
    Exterior,
}

impl NodeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeTag::Interior => "interior",
            NodeTag::Boundary => "boundary",
            NodeTag::Exterior => "exterior",
        }
    }
}

/// Cut stencil arm: the segment from an interior node along a direction
/// ends at fraction `theta` of the lattice step, at `point` on the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arm {
    pub dir: u8,
    pub theta: f64,
    pub point: Vec2,
}

/// Rectangular lattice `origin + h·(i, j)` with a node mask.
///
/// Every node carries a level value that is negative inside the domain.
/// Interior nodes have a strictly negative level and all eight lattice
/// neighbours with finite level; boundary nodes are the non-interior nodes
/// adjacent to an interior node. Where a stencil direction leaves the
/// interior set, an [`Arm`] records where the segment crosses the zero level.
#[derive(Clone, Debug)]
pub struct Grid {
    origin: Vec2,
    h: f64,
    nx: usize,
    ny: usize,
    dim: Dim,
    levels: Vec<f64>,
    tags: Vec<NodeTag>,
    arm_ptr: Vec<u32>,
    arms: Vec<Arm>,
    domain: Option<ConvexDomain>,
}

const MARGIN: i64 = 4;

impl Grid {
    /// Lattice `h·ℤⁿ` restricted to a box around `domain` with a margin of
    /// four nodes.
    pub fn covering(domain: &ConvexDomain, h: f64) -> Result<Grid> {
        domain.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(alloc::format!("grid spacing {h}")));
        }
        let (lo, hi) = domain.bbox();
        let i0 = floor(lo.x / h) as i64 - MARGIN;
        let i1 = ceil(hi.x / h) as i64 + MARGIN;
        let nx = (i1 - i0 + 1) as usize;
        let (j0, ny) = match domain.dim() {
            Dim::One => (0, 1),
            Dim::Two => {
                let j0 = floor(lo.y / h) as i64 - MARGIN;
                let j1 = ceil(hi.y / h) as i64 + MARGIN;
                (j0, (j1 - j0 + 1) as usize)
            }
        };
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(Error::InvalidInput("grid too large".into()));
        }
        let dim = domain.dim();
        let mut levels = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let p = Vec2::new((i0 + i as i64) as f64 * h, (j0 + j as i64) as f64 * h);
                levels.push(domain.level(p));
            }
        }
        let origin = Vec2::new(i0 as f64 * h, j0 as f64 * h);
        let mut g = Grid::from_levels(origin, h, nx, ny, dim, levels)?;
        g.domain = Some(domain.clone());
        Ok(g)
    }

    /// Grid with explicit node levels; `NaN` marks nodes with no data.
    pub fn from_levels(
        origin: Vec2,
        h: f64,
        nx: usize,
        ny: usize,
        dim: Dim,
        levels: Vec<f64>,
    ) -> Result<Grid> {
        if levels.len() != nx * ny || nx < 3 || (dim == Dim::Two && ny < 3) {
            return Err(Error::InvalidInput(
                "grid shape does not match levels".into(),
            ));
        }
        if dim == Dim::One && ny != 1 {
            return Err(Error::InvalidInput("1D grids have a single row".into()));
        }
        let mut g = Grid {
            origin,
            h,
            nx,
            ny,
            dim,
            levels,
            tags: Vec::new(),
            arm_ptr: Vec::new(),
            arms: Vec::new(),
            domain: None,
        };
        g.classify();
        Ok(g)
    }

    /// Same lattice, new levels.
    pub fn relevel(&self, levels: Vec<f64>) -> Result<Grid> {
        Grid::from_levels(self.origin, self.h, self.nx, self.ny, self.dim, levels)
    }

    fn classify(&mut self) {
        let n = self.nx * self.ny;
        let eps = 1e-4 * self.h;
        let mut tags = vec![NodeTag::Exterior; n];
        for idx in 0..n {
            let l = self.levels[idx];
            if !(l < -eps) {
                continue;
            }
            let complete = self
                .unit_neighbors(idx)
                .all(|m| m.is_some_and(|m| self.levels[m].is_finite()));
            if complete {
                tags[idx] = NodeTag::Interior;
            }
        }
        for idx in 0..n {
            if tags[idx] == NodeTag::Interior || !self.levels[idx].is_finite() {
                continue;
            }
            if self
                .unit_neighbors(idx)
                .any(|m| m.is_some_and(|m| tags[m] == NodeTag::Interior))
            {
                tags[idx] = NodeTag::Boundary;
            }
        }
        self.tags = tags;

        let dirs = self.dirs();
        let mut arm_ptr = Vec::with_capacity(n + 1);
        let mut arms = Vec::new();
        arm_ptr.push(0u32);
        for idx in 0..n {
            if self.tags[idx] == NodeTag::Interior {
                let li = self.levels[idx];
                let p0 = self.pos(idx);
                for (d, &(di, dj)) in dirs.iter().enumerate() {
                    let end = self.offset(idx, di, dj);
                    if end.is_some_and(|e| self.tags[e] == NodeTag::Interior) {
                        continue;
                    }
                    let step = Vec2::new(di as f64 * self.h, dj as f64 * self.h);
                    let le = end.map_or(f64::NAN, |e| self.levels[e]);
                    let theta = if le > 0.0 { li / (li - le) } else { 1.0 };
                    arms.push(Arm {
                        dir: d as u8,
                        theta,
                        point: p0 + step.scale(theta),
                    });
                }
            }
            arm_ptr.push(arms.len() as u32);
        }
        self.arm_ptr = arm_ptr;
        self.arms = arms;
    }

    fn unit_neighbors(&self, idx: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        let dirs: &[(i32, i32)] = match self.dim {
            Dim::One => &DIRS_1D,
            Dim::Two => &DIRS_2D[..8],
        };
        dirs.iter().map(move |&(di, dj)| self.offset(idx, di, dj))
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain(&self) -> Option<&ConvexDomain> {
        self.domain.as_ref()
    }

    pub(crate) fn set_domain(&mut self, d: ConvexDomain) {
        self.domain = Some(d);
    }

    pub fn tag(&self, idx: usize) -> NodeTag {
        self.tags[idx]
    }

    pub fn tags(&self) -> &[NodeTag] {
        &self.tags
    }

    pub fn level(&self, idx: usize) -> f64 {
        self.levels[idx]
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.tags[idx] == NodeTag::Interior
    }

    /// Interior or boundary.
    pub fn has_value(&self, idx: usize) -> bool {
        self.tags[idx] != NodeTag::Exterior
    }

    /// Stencil directions available on this grid.
    pub fn dirs(&self) -> &'static [(i32, i32)] {
        match self.dim {
            Dim::One => &DIRS_1D,
            Dim::Two => &DIRS_2D,
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn pos(&self, idx: usize) -> Vec2 {
        let (i, j) = self.coords(idx);
        Vec2::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
        )
    }

    /// Node at lattice offset `(di, dj)`, if inside the array.
    pub fn offset(&self, idx: usize, di: i32, dj: i32) -> Option<usize> {
        let (i, j) = self.coords(idx);
        let ii = i as i64 + di as i64;
        let jj = j as i64 + dj as i64;
        if ii < 0 || jj < 0 || ii >= self.nx as i64 || jj >= self.ny as i64 {
            None
        } else {
            Some(self.index(ii as usize, jj as usize))
        }
    }

    pub fn neighbor(&self, idx: usize, dir: usize) -> Option<usize> {
        let (di, dj) = self.dirs()[dir];
        self.offset(idx, di, dj)
    }

    /// Nearest lattice node to `p`, if inside the array.
    pub fn nearest(&self, p: Vec2) -> Option<usize> {
        let fi = crate::math::round((p.x - self.origin.x) / self.h);
        let fj = match self.dim {
            Dim::One => 0.0,
            Dim::Two => crate::math::round((p.y - self.origin.y) / self.h),
        };
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some(self.index(fi as usize, fj as usize))
    }

    pub fn arms(&self, idx: usize) -> &[Arm] {
        &self.arms[self.arm_ptr[idx] as usize..self.arm_ptr[idx + 1] as usize]
    }

    /// Global index of the arm of `idx` in direction `dir`.
    pub fn arm_index(&self, idx: usize, dir: usize) -> Option<usize> {
        let start = self.arm_ptr[idx] as usize;
        self.arms(idx)
            .iter()
            .position(|a| a.dir as usize == dir)
            .map(|k| start + k)
    }

    pub fn all_arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| self.tags[i] == NodeTag::Interior)
    }

    pub fn interior_count(&self) -> usize {
        self.tags
            .iter()
            .filter(|t| **t == NodeTag::Interior)
            .count()
    }

    /// Map from node index to unknown number over interior nodes.
    pub fn interior_numbering(&self) -> (Vec<usize>, Vec<usize>) {
        let mut map = vec![usize::MAX; self.len()];
        let mut nodes = Vec::new();
        for idx in self.interior_nodes() {
            map[idx] = nodes.len();
            nodes.push(idx);
        }
        (map, nodes)
    }

    pub fn same_lattice(&self, other: &Grid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.h == other.h
            && self.origin == other.origin
            && self.dim == other.dim
    }
}

//! Conforming triangulations of convex polygons.
//!
//! A [`TriMesh`] is built once from a [`Polygon`] by a centroid fan and then
//! refined uniformly (red refinement). Refined meshes keep the parent's
//! vertices at the same leading indices and remember, for every new vertex,
//! the two parent vertices whose midpoint it is. That record makes
//! prolongation between nested P1 spaces exact and cheap.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A point in the plane.
pub type Point = [f64; 2];

/// Absolute tolerance for geometric predicates.
pub const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertex {index} ({x}, {y}) is not finite")]
    NonFinite { index: usize, x: f64, y: f64 },
    #[error("polygon vertex {index} ({x}, {y}) repeats vertex {other}")]
    RepeatedVertex { index: usize, other: usize, x: f64, y: f64 },
    #[error("polygon is not strictly convex and counter-clockwise at vertex {index} ({x}, {y}): cross product {cross:e}")]
    NotConvex { index: usize, x: f64, y: f64, cross: f64 },
    #[error("triangle {triangle} references vertex {vertex}, but mesh has {nv} vertices")]
    BadIndex { triangle: usize, vertex: usize, nv: usize },
    #[error("triangle {triangle} has non-positive signed area {area:e}")]
    NonPositiveArea { triangle: usize, area: f64 },
    #[error("edge ({0}, {1}) is shared by {2} triangles")]
    NonConforming(usize, usize, usize),
    #[error("point ({0}, {1}) lies outside the mesh")]
    PointOutside(f64, f64),
    #[error("mesh is not a uniform refinement descendant of the source mesh")]
    NotNested,
    #[error("boundary flag of vertex {0} disagrees with edge incidence")]
    BoundaryFlag(usize),
    #[error("vertex {0} belongs to no triangle")]
    UnusedVertex(usize),
    #[error("edge ({0}, {1}) is traversed twice in the same direction")]
    Folded(usize, usize),
    #[error("triangulation is not a disk (V - E + T = {0}); hanging nodes or holes")]
    NotADisk(i64),
}

/// Counter-clockwise convex polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Polygon {
    /// Validates strict convexity and counter-clockwise orientation.
    pub fn new(vertices: Vec<Point>) -> Result<Self, MeshError> {
        let n = vertices.len();
        if n < 3 {
            return Err(MeshError::TooFewVertices(n));
        }
        for (index, p) in vertices.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(MeshError::NonFinite { index, x: p[0], y: p[1] });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if dist(vertices[i], vertices[j]) <= GEOM_TOL {
                    let [x, y] = vertices[i];
                    return Err(MeshError::RepeatedVertex { index: i, other: j, x, y });
                }
            }
        }
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let next = vertices[(i + 1) % n];
            let c = cross(prev, vertices[i], next);
            if c <= GEOM_TOL {
                let [x, y] = vertices[i];
                return Err(MeshError::NotConvex { index: i, x, y, cross: c });
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a[0] * b[1] - b[0] * a[1];
            cx += (a[0] + b[0]) * w;
            cy += (a[1] + b[1]) * w;
        }
        let six_area = 6.0 * self.area();
        [cx / six_area, cy / six_area]
    }

    /// Interior angle at vertex `i`, in radians.
    pub fn interior_angle(&self, i: usize) -> f64 {
        let n = self.vertices.len();
        let p = self.vertices[i];
        let a = self.vertices[(i + n - 1) % n];
        let b = self.vertices[(i + 1) % n];
        let u = [a[0] - p[0], a[1] - p[1]];
        let v = [b[0] - p[0], b[1] - p[1]];
        let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
        cos.clamp(-1.0, 1.0).acos()
    }
}

/// Built-in domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainPreset {
    UnitSquare,
    UnitTriangle,
    /// Unit square with the corner at (0,1) cut off; two interior angles of 3π/4.
    Pentagon,
}

impl DomainPreset {
    pub const ALL: [DomainPreset; 3] =
        [DomainPreset::UnitSquare, DomainPreset::UnitTriangle, DomainPreset::Pentagon];

    pub fn name(self) -> &'static str {
        match self {
            DomainPreset::UnitSquare => "unit-square",
            DomainPreset::UnitTriangle => "unit-triangle",
            DomainPreset::Pentagon => "paper-pentagon",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn polygon(self) -> Polygon {
        let v = match self {
            DomainPreset::UnitSquare => vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            DomainPreset::UnitTriangle => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            DomainPreset::Pentagon => {
                vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.5, 1.0], [0.0, 0.5]]
            }
        };
        Polygon::new(v).expect("preset polygons are valid")
    }
}

impl fmt::Display for DomainPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Conforming triangulation with boundary flags and an optional parent.
#[derive(Debug)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    level: usize,
    parent: Option<Arc<TriMesh>>,
    /// For vertices `parent.nv..nv`: the parent edge they bisect.
    midpoint_of: Vec<[usize; 2]>,
}

impl TriMesh {
    /// Builds a level-0 mesh from raw data, checking orientation and
    /// conformity. Boundary flags are derived from edge incidence.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let nv = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::BadIndex { triangle: t, vertex: v, nv });
                }
            }
            let area = 0.5 * cross(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area <= 0.0 || !area.is_finite() {
                return Err(MeshError::NonPositiveArea { triangle: t, area });
            }
        }
        let boundary = boundary_flags(nv, &triangles)?;
        Ok(Self { vertices, triangles, boundary, level: 0, parent: None, midpoint_of: Vec::new() })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Number of interior (free) vertices.
    pub fn num_interior(&self) -> usize {
        self.boundary.iter().filter(|b| !**b).count()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn parent(&self) -> Option<&Arc<TriMesh>> {
        self.parent.as_ref()
    }

    /// Parent vertex pair of each vertex added by the last refinement.
    pub fn midpoint_parents(&self) -> &[[usize; 2]] {
        &self.midpoint_of
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * cross(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.triangle_area(t)).sum()
    }

    /// Unique edges as sorted vertex pairs, in first-encounter order.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let e = sorted_edge(tri[k], tri[(k + 1) % 3]);
                seen.entry(e).or_insert_with(|| {
                    out.push(e);
                });
            }
        }
        out
    }

    /// Longest edge over all triangles.
    pub fn mesh_size(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|tri| {
                (0..3).map(move |k| (tri[k], tri[(k + 1) % 3]))
            })
            .map(|(a, b)| dist(self.vertices[a], self.vertices[b]))
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut min = f64::INFINITY;
        for t in 0..self.num_triangles() {
            let p = self.triangle_points(t);
            for k in 0..3 {
                let o = p[k];
                let a = p[(k + 1) % 3];
                let b = p[(k + 2) % 3];
                let u = [a[0] - o[0], a[1] - o[1]];
                let v = [b[0] - o[0], b[1] - o[1]];
                let cos = (u[0] * v[0] + u[1] * v[1]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]));
                min = min.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        min
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.triangle_points(t);
        let det = cross(a, b, c);
        let l1 = cross(p, b, c) / det;
        let l2 = cross(a, p, c) / det;
        [l1, l2, 1.0 - l1 - l2]
    }

    /// Physical point for barycentric coordinates in triangle `t`.
    pub fn map_point(&self, t: usize, bary: [f64; 3]) -> Point {
        let [a, b, c] = self.triangle_points(t);
        [
            bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
            bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
        ]
    }

    /// Finds a triangle containing `p` (closure, with [`GEOM_TOL`] slack on
    /// the barycentric coordinates).
    pub fn locate_point(&self, p: Point) -> Result<(usize, [f64; 3]), MeshError> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for t in 0..self.num_triangles() {
            let bary = self.barycentric(t, p);
            let worst = bary.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                return Ok((t, bary));
            }
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((t, bary, worst));
            }
        }
        match best {
            Some((t, bary, worst)) if worst >= -GEOM_TOL => Ok((t, bary)),
            _ => Err(MeshError::PointOutside(p[0], p[1])),
        }
    }

    /// Red refinement: every triangle is split into four similar children
    /// through its edge midpoints.
    pub fn refine_uniform(self: &Arc<Self>) -> TriMesh {
        let nv = self.num_vertices();
        let mut vertices = self.vertices.clone();
        let mut boundary = self.boundary.clone();
        let mut midpoint_of = Vec::new();
        let mut mid: HashMap<[usize; 2], usize> = HashMap::new();
        let mut triangles = Vec::with_capacity(4 * self.num_triangles());

        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>, boundary: &mut Vec<bool>| {
            let e = sorted_edge(a, b);
            *mid.entry(e).or_insert_with(|| {
                let (pa, pb) = (vertices[e[0]], vertices[e[1]]);
                vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
                boundary.push(false);
                midpoint_of.push(e);
                vertices.len() - 1
            })
        };

        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices, &mut boundary);
            let bc = midpoint(b, c, &mut vertices, &mut boundary);
            let ca = midpoint(c, a, &mut vertices, &mut boundary);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        // a midpoint lies on the boundary iff its edge does
        let flags = boundary_flags(vertices.len(), &triangles)
            .expect("red refinement of a conforming mesh is conforming");
        debug_assert!(flags[..nv] == boundary[..nv]);
        TriMesh {
            vertices,
            triangles,
            boundary: flags,
            level: self.level + 1,
            parent: Some(Arc::clone(self)),
            midpoint_of,
        }
    }

    /// Chain of meshes from `ancestor` (exclusive) down to `self`
    /// (inclusive), coarse to fine. Fails if `ancestor` is not reached by
    /// walking parent links.
    pub fn lineage_from(&self, ancestor: &TriMesh) -> Result<Vec<&TriMesh>, MeshError> {
        let mut chain = Vec::new();
        let mut cur: &TriMesh = self;
        loop {
            if std::ptr::eq(cur, ancestor) {
                chain.reverse();
                return Ok(chain);
            }
            chain.push(cur);
            match cur.parent.as_deref() {
                Some(p) => cur = p,
                None => return Err(MeshError::NotNested),
            }
        }
    }

    /// Edge-incidence check: every edge belongs to one or two triangles and
    /// boundary flags agree with single-incidence edges.
    pub fn check_conformity(&self) -> Result<(), MeshError> {
        let flags = boundary_flags(self.num_vertices(), &self.triangles)?;
        match flags.iter().zip(&self.boundary).position(|(a, b)| a != b) {
            Some(v) => Err(MeshError::BoundaryFlag(v)),
            None => Ok(()),
        }
    }
}

fn sorted_edge(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Derives boundary flags from edge incidence and checks that the
/// triangles form a conforming, consistently oriented disk.
fn boundary_flags(nv: usize, triangles: &[[usize; 3]]) -> Result<Vec<bool>, MeshError> {
    let mut count: HashMap<[usize; 2], usize> = HashMap::with_capacity(3 * triangles.len());
    let mut directed: HashSet<[usize; 2]> = HashSet::with_capacity(3 * triangles.len());
    let mut used = vec![false; nv];
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            used[a] = true;
            *count.entry(sorted_edge(a, b)).or_default() += 1;
            if !directed.insert([a, b]) {
                return Err(MeshError::Folded(a, b));
            }
        }
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return Err(MeshError::UnusedVertex(v));
    }
    let euler = nv as i64 - count.len() as i64 + triangles.len() as i64;
    if euler != 1 {
        return Err(MeshError::NotADisk(euler));
    }
    let mut flags = vec![false; nv];
    let mut edges: Vec<_> = count.into_iter().collect();
    edges.sort_unstable();
    for ([a, b], n) in edges {
        match n {
            1 => {
                flags[a] = true;
                flags[b] = true;
            }
            2 => {}
            _ => return Err(MeshError::NonConforming(a, b, n)),
        }
    }
    Ok(flags)
}

/// Centroid fan over a convex polygon. Vertices are the polygon corners in
/// order followed by the centroid.
pub fn triangulate_convex_polygon(poly: &Polygon) -> TriMesh {
    let n = poly.vertices().len();
    let mut vertices = poly.vertices().to_vec();
    vertices.push(poly.centroid());
    let triangles = (0..n).map(|i| [i, (i + 1) % n, n]).collect();
    TriMesh::new(vertices, triangles).expect("fan over a convex polygon is valid")
}

/// Level-`level` mesh of a polygon, with all intermediate levels linked as
/// parents.
pub fn build_level(poly: &Polygon, level: usize) -> Arc<TriMesh> {
    let mut mesh = Arc::new(triangulate_convex_polygon(poly));
    for _ in 0..level {
        mesh = Arc::new(mesh.refine_uniform());
    }
    mesh
}

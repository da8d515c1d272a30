//! Uniform structured triangulation of a rectangle.
//!
//! Each grid square is split along its lower-left to upper-right diagonal.
//! Vertices are numbered row-major from the lower-left corner; square
//! `(i, j)` produces elements `2 (j N + i)` (below the diagonal) and
//! `2 (j N + i) + 1` (above it), both counter-clockwise.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{
    check_crossings, classify_with_sides, edge_intersection, snapped_side, triangle_area, ElementKind,
    LevelSet, Point, Side,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Default for Rect {
    /// `[-1, 1]²`
    fn default() -> Self {
        Self {
            min: Point::new(-1.0, -1.0),
            max: Point::new(1.0, 1.0),
        }
    }
}

impl Rect {
    pub fn perimeter(&self) -> f64 {
        2.0 * ((self.max.x - self.min.x) + (self.max.y - self.min.y))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// Fixed unit normal: points from `owner` into `neighbor`, outward on
    /// the boundary.
    pub normal: Point,
    pub length: f64,
    /// Adjacent element with the smaller index.
    pub owner: usize,
    pub neighbor: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }

    /// `n_e · n_out` as seen from element `t`.
    pub fn orientation(&self, t: usize) -> f64 {
        if t == self.owner {
            1.0
        } else {
            debug_assert_eq!(Some(t), self.neighbor);
            -1.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct StructuredMesh {
    n: usize,
    bounds: Rect,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    /// Local edge `k` of a triangle joins its vertices `k` and `(k + 1) % 3`.
    element_edges: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    boundary_vertex: Vec<bool>,
}

impl StructuredMesh {
    pub fn new(n: usize, bounds: Rect) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(n));
        }
        if !(bounds.max.x > bounds.min.x && bounds.max.y > bounds.min.y) {
            return Err(Error::InvalidParameter("empty bounds".into()));
        }
        let np = n + 1;
        let hx = (bounds.max.x - bounds.min.x) / n as f64;
        let hy = (bounds.max.y - bounds.min.y) / n as f64;
        let coord = |i: usize, lo: f64, hi: f64, step: f64| if i == n { hi } else { lo + i as f64 * step };

        let mut vertices = Vec::with_capacity(np * np);
        let mut boundary_vertex = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push(Point::new(
                    coord(i, bounds.min.x, bounds.max.x, hx),
                    coord(j, bounds.min.y, bounds.max.y, hy),
                ));
                boundary_vertex.push(i == 0 || j == 0 || i == n || j == n);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v0 = j * np + i;
                let v1 = v0 + 1;
                let v2 = v0 + np + 1;
                let v3 = v0 + np;
                triangles.push([v0, v1, v2]);
                triangles.push([v0, v2, v3]);
            }
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * n * n + 2 * n);
        let mut edges: Vec<Edge> = Vec::with_capacity(3 * n * n + 2 * n);
        let mut element_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let e = *lookup.entry(key).or_insert_with(|| {
                    let d = vertices[b] - vertices[a];
                    let length = d.norm();
                    edges.push(Edge {
                        vertices: [a, b],
                        normal: d.perp_cw() * (1.0 / length),
                        length,
                        owner: t,
                        neighbor: None,
                    });
                    edges.len() - 1
                });
                if edges[e].owner != t {
                    edges[e].neighbor = Some(t);
                }
                local[k] = e;
            }
            element_edges.push(local);
        }

        Ok(Self {
            n,
            bounds,
            vertices,
            triangles,
            element_edges,
            edges,
            boundary_vertex,
        })
    }

    /// `N` squares per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    /// Square side length (the larger one for non-square bounds).
    pub fn h(&self) -> f64 {
        let hx = (self.bounds.max.x - self.bounds.min.x) / self.n as f64;
        let hy = (self.bounds.max.y - self.bounds.min.y) / self.n as f64;
        hx.max(hy)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn element_edges(&self, t: usize) -> [usize; 3] {
        self.element_edges[t]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn triangle(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        triangle_area(a, b, c)
    }

    pub fn edge_points(&self, e: usize) -> (Point, Point) {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[a], self.vertices[b])
    }

    /// Barycentric coordinates of `p` in element `t`.
    pub fn barycentric(&self, t: usize, p: Point) -> [f64; 3] {
        let [a, b, c] = self.triangle(t);
        let area = triangle_area(a, b, c);
        [
            triangle_area(p, b, c) / area,
            triangle_area(a, p, c) / area,
            triangle_area(a, b, p) / area,
        ]
    }

    pub fn contains(&self, t: usize, p: Point) -> bool {
        self.barycentric(t, p).iter().all(|&l| l >= -1e-10)
    }

    /// Element containing `p`, if inside the bounds.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let b = self.bounds;
        if p.x < b.min.x || p.x > b.max.x || p.y < b.min.y || p.y > b.max.y {
            return None;
        }
        let hx = (b.max.x - b.min.x) / self.n as f64;
        let hy = (b.max.y - b.min.y) / self.n as f64;
        let i = (((p.x - b.min.x) / hx) as usize).min(self.n - 1);
        let j = (((p.y - b.min.y) / hy) as usize).min(self.n - 1);
        let lower = 2 * (j * self.n + i);
        [lower, lower + 1].into_iter().find(|&t| self.contains(t, p))
    }

    /// Labels every element and edge against the interface.
    pub fn classify(&self, ls: &dyn LevelSet) -> Result<MeshClassification> {
        let h = self.h();
        let vertex_sides: Vec<Side> = self.vertices.iter().map(|&p| snapped_side(ls, p, h)).collect();

        let mut edge_cuts = Vec::with_capacity(self.edges.len());
        for edge in &self.edges {
            let [a, b] = edge.vertices;
            let (sa, sb) = (vertex_sides[a], vertex_sides[b]);
            let cut = sa != Side::OnInterface && sb != Side::OnInterface && sa != sb;
            edge_cuts.push(if cut {
                Some(edge_intersection(ls, self.vertices[a], self.vertices[b])?)
            } else {
                None
            });
        }

        let mut kinds = Vec::with_capacity(self.triangles.len());
        for (t, tri) in self.triangles.iter().enumerate() {
            let pts = self.triangle(t);
            let sides = tri.map(|v| vertex_sides[v]);
            check_crossings(ls, pts, sides, h).map_err(|_| Error::DegenerateCut { element: Some(t) })?;
            let local = self.element_edges[t];
            let kind = classify_with_sides(ls, pts, sides, h, |a, b| {
                let k = (0..3)
                    .find(|&k| {
                        let (p, q) = (pts[k], pts[(k + 1) % 3]);
                        (p == a && q == b) || (p == b && q == a)
                    })
                    .expect("cut query on a triangle edge");
                edge_cuts[local[k]].map_or_else(|| edge_intersection(ls, a, b), Ok)
            })?;
            kinds.push(kind);
        }
        Ok(MeshClassification {
            vertex_sides,
            kinds,
            edge_cuts,
        })
    }
}

/// Per-element and per-edge interface labels.
#[derive(Clone, Debug)]
pub struct MeshClassification {
    /// Vertex sides after snapping.
    pub vertex_sides: Vec<Side>,
    pub kinds: Vec<ElementKind>,
    /// Interface point on each edge crossed by the interface.
    pub edge_cuts: Vec<Option<Point>>,
}

impl MeshClassification {
    pub fn num_interface_elements(&self) -> usize {
        self.kinds.iter().filter(|k| k.is_interface()).count()
    }

    pub fn num_interface_edges(&self) -> usize {
        self.edge_cuts.iter().filter(|c| c.is_some()).count()
    }

    pub fn interface_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.kinds.iter().enumerate().filter(|(_, k)| k.is_interface()).map(|(t, _)| t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Circle, ConstantLevelSet};

    #[test]
    fn counts_for_n2() {
        let m = StructuredMesh::new(2, Rect::default()).unwrap();
        assert_eq!(m.num_vertices(), 9);
        assert_eq!(m.num_elements(), 8);
        assert_eq!(m.num_edges(), 16);
    }

    #[test]
    fn counts_for_n16() {
        let m = StructuredMesh::new(16, Rect::default()).unwrap();
        assert_eq!(m.num_vertices(), 289);
        assert_eq!(m.num_elements(), 512);
        assert_eq!(m.num_edges(), 3 * 256 + 32);
    }

    #[test]
    fn rejects_n1() {
        assert!(matches!(StructuredMesh::new(1, Rect::default()), Err(Error::InvalidSize(1))));
    }

    #[test]
    fn triangles_are_ccw_and_uniform() {
        let m = StructuredMesh::new(5, Rect::default()).unwrap();
        let expected = 0.5 * (2.0 / 5.0) * (2.0 / 5.0);
        for t in 0..m.num_elements() {
            assert!((m.area(t) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_adjacency_and_normals() {
        let m = StructuredMesh::new(6, Rect::default()).unwrap();
        for (e, edge) in m.edges().iter().enumerate() {
            assert!((edge.normal.norm() - 1.0).abs() < 1e-14);
            let (a, b) = m.edge_points(e);
            assert!(edge.normal.dot(b - a).abs() < 1e-14);
            assert!(m.element_edges(edge.owner).contains(&e));
            match edge.neighbor {
                Some(nb) => {
                    assert!(nb > edge.owner);
                    assert!(m.element_edges(nb).contains(&e));
                    // normal points from owner centroid side toward neighbor
                    let mid = a.lerp(b, 0.5);
                    let c = crate::geometry::centroid(&m.triangle(nb));
                    assert!(edge.normal.dot(c - mid) > 0.0);
                }
                None => {
                    let mid = a.lerp(b, 0.5);
                    assert!(edge.normal.dot(mid) > 0.0, "boundary normal must point outward");
                }
            }
        }
    }

    #[test]
    fn boundary_perimeter() {
        let m = StructuredMesh::new(7, Rect::default()).unwrap();
        let p: f64 = m.edges().iter().filter(|e| e.is_boundary()).map(|e| e.length).sum();
        assert!((p - 8.0).abs() < 1e-12);
        let interior = m.edges().iter().filter(|e| !e.is_boundary()).count();
        assert_eq!(interior, m.num_edges() - 4 * 7);
    }

    #[test]
    fn refinement_nests_vertices() {
        let coarse = StructuredMesh::new(8, Rect::default()).unwrap();
        let fine = StructuredMesh::new(16, Rect::default()).unwrap();
        for (k, p) in coarse.vertices().iter().enumerate() {
            let (i, j) = (k % 9, k / 9);
            assert_eq!(fine.vertices()[(2 * j) * 17 + 2 * i], *p);
        }
    }

    #[test]
    fn locate_finds_containing_element() {
        let m = StructuredMesh::new(8, Rect::default()).unwrap();
        for p in [Point::new(0.13, -0.71), Point::new(-1.0, -1.0), Point::new(1.0, 1.0), Point::new(0.5, 0.5)] {
            let t = m.locate(p).unwrap();
            assert!(m.contains(t, p));
        }
        assert!(m.locate(Point::new(1.5, 0.0)).is_none());
    }

    #[test]
    fn no_interface_cases() {
        let m = StructuredMesh::new(8, Rect::default()).unwrap();
        let c = m.classify(&ConstantLevelSet(1.0)).unwrap();
        assert_eq!(c.num_interface_elements(), 0);
        let far = m.classify(&Circle::centered(10.0)).unwrap();
        assert_eq!(far.num_interface_elements(), 0);
        assert_eq!(far.num_interface_edges(), 0);
    }

    #[test]
    fn circle_band_is_order_n_and_matches_sampling() {
        let circle = Circle::centered(0.4);
        let m = StructuredMesh::new(16, Rect::default()).unwrap();
        let c = m.classify(&circle).unwrap();
        let count = c.num_interface_elements();
        assert!(count > 0 && count < 16 * 16, "count {count}");
        // dense sampling of φ signs inside each triangle
        for t in 0..m.num_elements() {
            let tri = m.triangle(t);
            let mut neg = false;
            let mut pos = false;
            for i in 0..=20 {
                for j in 0..=(20 - i) {
                    let (l1, l2) = (i as f64 / 20.0, j as f64 / 20.0);
                    let p = tri[0] + (tri[1] - tri[0]) * l1 + (tri[2] - tri[0]) * l2;
                    let v = circle.value(p);
                    neg |= v < 0.0;
                    pos |= v > 0.0;
                }
            }
            let sampled_cut = neg && pos;
            // sampling can only miss cuts, never invent them, on vertex sign patterns
            if c.kinds[t].is_interface() {
                assert!(sampled_cut, "element {t}");
            }
        }
    }
}

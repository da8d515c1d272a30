//! Level-set interfaces, point and element classification, and
//! edge–interface intersection.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Absolute tolerance on |φ| at a computed interface point.
pub const EPS_ROOT: f64 = 1e-12;
/// Vertices closer than `EPS_SNAP * h` to the interface are snapped onto it.
pub const EPS_SNAP: f64 = 1e-9;

/// Samples per edge when checking for multiple crossings.
const EDGE_SAMPLES: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }

    /// Rotates by -90 degrees: for a CCW boundary edge direction this is the
    /// outward normal direction.
    pub fn perp_cw(self) -> Point {
        Point::new(self.y, -self.x)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

pub fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * (b - a).cross(c - a)
}

pub fn centroid(pts: &[Point]) -> Point {
    let n = pts.len() as f64;
    let s = pts.iter().fold(Point::default(), |acc, &p| acc + p);
    s * (1.0 / n)
}

/// Which subdomain a point belongs to. `Minus` is `{φ < 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Minus,
    Plus,
    OnInterface,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
            Side::OnInterface => Side::OnInterface,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Minus => 0,
            Side::Plus => 1,
            Side::OnInterface => panic!("OnInterface has no subdomain index"),
        }
    }
}

/// An interface described implicitly as the zero set of φ.
pub trait LevelSet: Send + Sync + fmt::Debug {
    fn value(&self, p: Point) -> f64;

    fn gradient(&self, p: Point) -> Point;

    fn describe(&self) -> String;

    /// Closed-form root on the segment `[p1, p2]`, when the level set has one.
    fn segment_root(&self, _p1: Point, _p2: Point) -> Option<Point> {
        None
    }
}

/// φ(x, y) = (x - cx)² + (y - cy)² - r².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn centered(radius: f64) -> Self {
        Self::new(Point::default(), radius)
    }
}

impl LevelSet for Circle {
    fn value(&self, p: Point) -> f64 {
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        dx * dx + dy * dy - self.radius * self.radius
    }

    fn gradient(&self, p: Point) -> Point {
        (p - self.center) * 2.0
    }

    fn describe(&self) -> String {
        format!(
            "circle r={} centered at ({}, {})",
            self.radius, self.center.x, self.center.y
        )
    }

    fn segment_root(&self, p1: Point, p2: Point) -> Option<Point> {
        let d = p2 - p1;
        let m = p1 - self.center;
        let a = d.dot(d);
        let b = 2.0 * m.dot(d);
        let c = m.dot(m) - self.radius * self.radius;
        let disc = b * b - 4.0 * a * c;
        if a == 0.0 || disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let q = -0.5 * (b + b.signum() * sq);
        let mut roots = [q / a, if q != 0.0 { c / q } else { -b / (2.0 * a) }];
        roots.sort_by(f64::total_cmp);
        roots
            .into_iter()
            .find(|t| (0.0..=1.0).contains(t))
            .map(|t| p1.lerp(p2, t))
    }
}

/// Constant level set; has no interface when the constant is nonzero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantLevelSet(pub f64);

impl LevelSet for ConstantLevelSet {
    fn value(&self, _p: Point) -> f64 {
        self.0
    }

    fn gradient(&self, _p: Point) -> Point {
        Point::default()
    }

    fn describe(&self) -> String {
        format!("constant {}", self.0)
    }
}

/// Level set given by closures.
pub struct FnLevelSet<F, G> {
    pub value: F,
    pub gradient: G,
    pub name: String,
}

impl<F, G> fmt::Debug for FnLevelSet<F, G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnLevelSet").field("name", &self.name).finish()
    }
}

impl<F, G> LevelSet for FnLevelSet<F, G>
where
    F: Fn(Point) -> f64 + Send + Sync,
    G: Fn(Point) -> Point + Send + Sync,
{
    fn value(&self, p: Point) -> f64 {
        (self.value)(p)
    }

    fn gradient(&self, p: Point) -> Point {
        (self.gradient)(p)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Minus if φ(p) < -tol, Plus if φ(p) > tol, OnInterface otherwise.
pub fn classify_point(ls: &dyn LevelSet, p: Point, tol: f64) -> Side {
    let v = ls.value(p);
    if v < -tol {
        Side::Minus
    } else if v > tol {
        Side::Plus
    } else {
        Side::OnInterface
    }
}

/// Vertex side after snapping: a vertex whose estimated distance
/// |φ|/|∇φ| to the interface is at most `EPS_SNAP * h` counts as on it.
pub fn snapped_side(ls: &dyn LevelSet, p: Point, h: f64) -> Side {
    let v = ls.value(p);
    let g = ls.gradient(p).norm();
    let dist = if g > 0.0 { v.abs() / g } else { f64::INFINITY };
    if v == 0.0 || dist <= EPS_SNAP * h {
        Side::OnInterface
    } else if v < 0.0 {
        Side::Minus
    } else {
        Side::Plus
    }
}

/// Point on `[p1, p2]` where φ vanishes (to `EPS_ROOT`).
///
/// The result does not depend on the order of the endpoints.
pub fn edge_intersection(ls: &dyn LevelSet, p1: Point, p2: Point) -> Result<Point> {
    let (p1, p2) = if (p2.x, p2.y) < (p1.x, p1.y) { (p2, p1) } else { (p1, p2) };
    let f1 = ls.value(p1);
    let f2 = ls.value(p2);
    if f1.abs() <= EPS_ROOT {
        return Ok(p1);
    }
    if f2.abs() <= EPS_ROOT {
        return Ok(p2);
    }
    if f1 * f2 > 0.0 {
        return Err(Error::NoSignChange);
    }
    if let Some(q) = ls.segment_root(p1, p2) {
        if ls.value(q).abs() <= EPS_ROOT {
            return Ok(q);
        }
    }
    Ok(bracketed_root(ls, p1, p2, f1, f2))
}

/// Bisection safeguarded secant (Illinois variant) on the segment parameter.
fn bracketed_root(ls: &dyn LevelSet, p1: Point, p2: Point, f1: f64, f2: f64) -> Point {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let (mut fa, mut fb) = (f1, f2);
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut side = 0i8;
    for iter in 0..200 {
        let width = b - a;
        let mut t = if iter % 3 == 2 {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(t > a && t < b) {
            t = 0.5 * (a + b);
        }
        let ft = ls.value(p1.lerp(p2, t));
        if ft.abs() < best.1.abs() {
            best = (t, ft);
        }
        if ft.abs() <= EPS_ROOT || width <= 4.0 * f64::EPSILON {
            break;
        }
        if ft * fb < 0.0 {
            a = b;
            fa = fb;
            b = t;
            fb = ft;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            b = t;
            fb = ft;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if a > b {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    p1.lerp(p2, best.0)
}

/// Interface chord through a cut triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutSegment {
    pub e1: Point,
    pub e2: Point,
    /// Local edge indices (edge `k` joins vertices `k` and `(k + 1) % 3`),
    /// ascending; `e1` lies on `edges[0]` and `e2` on `edges[1]`.
    pub edges: [usize; 2],
}

impl CutSegment {
    /// Signed offset of `p` from the chord line (positive to the left of
    /// `e1 -> e2`).
    pub fn offset(&self, p: Point) -> f64 {
        (self.e2 - self.e1).cross(p - self.e1)
    }

    /// Unit normal of the chord.
    pub fn normal(&self) -> Point {
        let d = self.e2 - self.e1;
        Point::new(-d.y, d.x) * (1.0 / d.norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ElementKind {
    NonInterface(Side),
    Interface(CutSegment),
}

impl ElementKind {
    pub fn is_interface(&self) -> bool {
        matches!(self, ElementKind::Interface(_))
    }
}

/// Classifies a triangle against the interface.
pub fn classify_element(ls: &dyn LevelSet, tri: [Point; 3], h: f64) -> Result<ElementKind> {
    let sides = tri.map(|p| snapped_side(ls, p, h));
    check_crossings(ls, tri, sides, h)?;
    classify_with_sides(ls, tri, sides, h, |a, b| edge_intersection(ls, a, b))
}

/// Classification from precomputed vertex sides. `cut_point(a, b)` must give
/// the interface point on the segment between two vertices of opposite sides.
pub fn classify_with_sides<F>(ls: &dyn LevelSet, tri: [Point; 3], sides: [Side; 3], h: f64, mut cut_point: F) -> Result<ElementKind>
where
    F: FnMut(Point, Point) -> Result<Point>,
{
    let mut signed = sides.iter().filter(|s| **s != Side::OnInterface);
    let first = signed.clone().next().copied();
    let Some(first) = first else {
        // all three vertices on the interface; fall back to the centroid
        let c = centroid(&tri);
        let s = if ls.value(c) < 0.0 { Side::Minus } else { Side::Plus };
        return Ok(ElementKind::NonInterface(s));
    };
    if signed.all(|s| *s == first) {
        return Ok(ElementKind::NonInterface(first));
    }

    if let Some(k) = sides.iter().position(|s| *s == Side::OnInterface) {
        // interface passes through vertex k and the opposite edge
        let a = tri[(k + 1) % 3];
        let b = tri[(k + 2) % 3];
        let e = cut_point(a, b)?;
        let area_a = triangle_area(tri[k], a, e).abs();
        let area_b = triangle_area(tri[k], e, b).abs();
        let side = if area_a >= area_b { sides[(k + 1) % 3] } else { sides[(k + 2) % 3] };
        return Ok(ElementKind::NonInterface(side));
    }

    let mut edges = Vec::with_capacity(2);
    let mut points = Vec::with_capacity(2);
    for k in 0..3 {
        let (i, j) = (k, (k + 1) % 3);
        if sides[i] != sides[j] {
            let p = cut_point(tri[i], tri[j])?;
            if p.dist(tri[i]).min(p.dist(tri[j])) <= EPS_SNAP * h {
                return Ok(ElementKind::NonInterface(larger_side(tri, sides, ls, h, cut_point)?));
            }
            edges.push(k);
            points.push(p);
        }
    }
    debug_assert_eq!(edges.len(), 2);
    Ok(ElementKind::Interface(CutSegment {
        e1: points[0],
        e2: points[1],
        edges: [edges[0], edges[1]],
    }))
}

fn larger_side<F>(tri: [Point; 3], sides: [Side; 3], _ls: &dyn LevelSet, _h: f64, mut cut_point: F) -> Result<Side>
where
    F: FnMut(Point, Point) -> Result<Point>,
{
    let lonely = lonely_vertex(sides).expect("generic cut has a lonely vertex");
    let a = tri[lonely];
    let b = tri[(lonely + 1) % 3];
    let c = tri[(lonely + 2) % 3];
    let p = cut_point(a, b)?;
    let q = cut_point(c, a)?;
    let small = triangle_area(a, p, q).abs();
    let total = triangle_area(a, b, c).abs();
    Ok(if small >= 0.5 * total {
        sides[lonely]
    } else {
        sides[lonely].opposite()
    })
}

/// The vertex whose side differs from the other two (generic cut only).
pub fn lonely_vertex(sides: [Side; 3]) -> Option<usize> {
    (0..3).find(|&k| sides[k] != sides[(k + 1) % 3] && sides[k] != sides[(k + 2) % 3])
}

/// Depth, relative to `h`, up to which a pair of crossings on one edge (the
/// interface clipping past the edge) is ignored.
pub const CLIP_DEPTH: f64 = 0.25;

/// Rejects elements whose boundary the interface crosses more than twice.
///
/// A pair of crossings on one edge whose endpoints share a side is not
/// counted when the excursion to the other side is at most `CLIP_DEPTH * h`
/// deep; the element is then classified by its vertex sides.
pub fn check_crossings(ls: &dyn LevelSet, tri: [Point; 3], sides: [Side; 3], h: f64) -> Result<()> {
    let mut total = 0;
    for k in 0..3 {
        let (i, j) = (k, (k + 1) % 3);
        let mut c = edge_crossings(ls, tri[i], tri[j], sides[i], sides[j]);
        if c == 2 && sides[i] == sides[j] && excursion_depth(ls, tri[i], tri[j], sides[i]) <= CLIP_DEPTH * h {
            c = 0;
        }
        total += c;
    }
    if total > 2 {
        return Err(Error::DegenerateCut { element: None });
    }
    Ok(())
}

/// Largest estimated distance to the interface among edge samples lying on
/// the side opposite to `side`.
fn excursion_depth(ls: &dyn LevelSet, a: Point, b: Point, side: Side) -> f64 {
    (1..EDGE_SAMPLES)
        .map(|i| a.lerp(b, i as f64 / EDGE_SAMPLES as f64))
        .filter(|&p| {
            let v = ls.value(p);
            (side == Side::Plus && v < 0.0) || (side == Side::Minus && v > 0.0)
        })
        .map(|p| {
            let g = ls.gradient(p).norm();
            if g > 0.0 {
                ls.value(p).abs() / g
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Number of sign changes of φ sampled along an edge, with snapped
/// endpoint sides.
pub fn edge_crossings(ls: &dyn LevelSet, a: Point, b: Point, sa: Side, sb: Side) -> usize {
    let mut last = match sa {
        Side::OnInterface => None,
        s => Some(s),
    };
    let mut changes = 0;
    let samples = (1..EDGE_SAMPLES).map(|i| {
        let p = a.lerp(b, i as f64 / EDGE_SAMPLES as f64);
        let v = ls.value(p);
        if v < 0.0 {
            Side::Minus
        } else if v > 0.0 {
            Side::Plus
        } else {
            Side::OnInterface
        }
    });
    for s in samples.chain(std::iter::once(sb)) {
        if s == Side::OnInterface {
            continue;
        }
        if let Some(l) = last {
            if l != s {
                changes += 1;
            }
        }
        last = Some(s);
    }
    changes
}

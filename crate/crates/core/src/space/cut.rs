use crate::error::{Error, Result};
use crate::geometry::{centroid, triangle_area, CutSegment, LevelSet, Point, Side};

/// Sub-polygons with area fraction below this are rejected.
pub const SLIVER_FRACTION: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubTriangle {
    pub vertices: [Point; 3],
    pub side: Side,
}

impl SubTriangle {
    pub fn area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        triangle_area(a, b, c).abs()
    }
}

/// Geometry of a triangle split by a straight interface chord.
#[derive(Clone, Debug, PartialEq)]
pub struct CutElement {
    pub element: usize,
    pub segment: CutSegment,
    /// The vertex separated from the other two by the chord.
    pub lonely: usize,
    pub vertex_sides: [Side; 3],
    pub minus: Vec<Point>,
    pub plus: Vec<Point>,
    pub sub_triangles: Vec<SubTriangle>,
    pub area_minus: f64,
    pub area_plus: f64,
}

impl CutElement {
    pub fn area(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.area_minus,
            Side::Plus => self.area_plus,
            Side::OnInterface => 0.0,
        }
    }

    /// Side of `p` relative to the chord (not the exact level set).
    pub fn side_of(&self, p: Point, tri: &[Point; 3]) -> Side {
        let ref_offset = self.segment.offset(tri[self.lonely]);
        if self.segment.offset(p) * ref_offset > 0.0 {
            self.vertex_sides[self.lonely]
        } else {
            self.vertex_sides[self.lonely].opposite()
        }
    }
}

/// Splits `tri` along `segment` into the two sub-polygons and their
/// sub-triangulation.
pub fn build_cut_element(element: usize, tri: [Point; 3], segment: CutSegment, ls: &dyn LevelSet) -> Result<CutElement> {
    let [k1, k2] = segment.edges;
    if k1 == k2 || k1 > 2 || k2 > 2 {
        return Err(Error::SliverSubElement { fraction: 0.0 });
    }
    // edge k joins k and k+1; the shared vertex of two edges is the lonely one
    let lonely = match (k1.min(k2), k1.max(k2)) {
        (0, 1) => 1,
        (1, 2) => 2,
        (0, 2) => 0,
        _ => unreachable!(),
    };
    let point_on = |k: usize| if k == k1 { segment.e1 } else { segment.e2 };
    let next = (lonely + 1) % 3;
    let prev = (lonely + 2) % 3;
    // edge `lonely` joins lonely->next, edge `prev` joins prev->lonely
    let p_next = point_on(lonely);
    let p_prev = point_on(prev);

    let v = ls.value(tri[lonely]);
    let lonely_side = if v < 0.0 {
        Side::Minus
    } else if v > 0.0 {
        Side::Plus
    } else if ls.value(centroid(&[tri[lonely], p_next, p_prev])) < 0.0 {
        Side::Minus
    } else {
        Side::Plus
    };
    let other = lonely_side.opposite();

    let small = vec![tri[lonely], p_next, p_prev];
    let quad = vec![p_next, tri[next], tri[prev], p_prev];
    let sub_triangles = vec![
        SubTriangle {
            vertices: [tri[lonely], p_next, p_prev],
            side: lonely_side,
        },
        SubTriangle {
            vertices: [p_next, tri[next], tri[prev]],
            side: other,
        },
        SubTriangle {
            vertices: [p_next, tri[prev], p_prev],
            side: other,
        },
    ];
    let small_area = sub_triangles[0].area();
    let quad_area = sub_triangles[1].area() + sub_triangles[2].area();
    let total = triangle_area(tri[0], tri[1], tri[2]).abs();
    let fraction = small_area.min(quad_area) / total;
    if fraction < SLIVER_FRACTION {
        return Err(Error::SliverSubElement { fraction });
    }

    let mut vertex_sides = [other; 3];
    vertex_sides[lonely] = lonely_side;
    let (minus, plus, area_minus, area_plus) = match lonely_side {
        Side::Minus => (small, quad, small_area, quad_area),
        _ => (quad, small, quad_area, small_area),
    };
    Ok(CutElement {
        element,
        segment,
        lonely,
        vertex_sides,
        minus,
        plus,
        sub_triangles,
        area_minus,
        area_plus,
    })
}

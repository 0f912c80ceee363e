//! Planar convex hulls (Andrew's monotone chain) and closed point containment.

pub type Point = [f64; 2];

/// Distance tolerance for boundary membership, in coordinate units.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[inline]
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counterclockwise convex hull without collinear boundary points.
///
/// Inputs with fewer than three distinct points, or only collinear points,
/// return the distinct extreme points (0, 1 or 2 of them).
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }

    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * dx, a[1] + t * dy])
}

/// Closed containment in a hull produced by [`convex_hull`].
///
/// Points within [`BOUNDARY_TOL`] of the boundary count as inside. An empty
/// hull contains nothing.
pub fn point_in_hull(hull: &[Point], p: Point) -> bool {
    match hull.len() {
        0 => false,
        1 => dist(p, hull[0]) <= BOUNDARY_TOL,
        2 => dist_to_segment(p, hull[0], hull[1]) <= BOUNDARY_TOL,
        n => (0..n).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % n];
            cross(a, b, p) / dist(a, b) >= -BOUNDARY_TOL
        }),
    }
}

/// True when consecutive edges of `hull` all turn the same way (left).
pub fn is_convex_ccw(hull: &[Point]) -> bool {
    let n = hull.len();
    n < 3 || (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], hull[(i + 2) % n]) > 0.0)
}

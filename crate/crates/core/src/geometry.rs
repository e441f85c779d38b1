//! Planar primitives: signed areas, angles, rectangle clipping and convex distances.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    let d = sub(a, b);
    d[0].hypot(d[1])
}

/// Twice the signed area; positive for counterclockwise order.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

pub fn triangle_area(p: &[Point; 3]) -> f64 {
    0.5 * orient(p[0], p[1], p[2])
}

/// Interior angles at the three vertices, in radians.
pub fn triangle_angles(p: &[Point; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let a = p[i];
        let b = p[(i + 1) % 3];
        let c = p[(i + 2) % 3];
        let u = sub(b, a);
        let v = sub(c, a);
        out[i] = cross(u, v).abs().atan2(dot(u, v));
    }
    out
}

pub fn edge_lengths(p: &[Point; 3]) -> [f64; 3] {
    [dist(p[0], p[1]), dist(p[1], p[2]), dist(p[2], p[0])]
}

pub fn centroid(p: &[Point; 3]) -> Point {
    [
        (p[0][0] + p[1][0] + p[2][0]) / 3.0,
        (p[0][1] + p[1][1] + p[2][1]) / 3.0,
    ]
}

/// Shoelace area of a simple polygon (signed, ccw positive).
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect {
            min: [x0.min(x1), y0.min(y1)],
            max: [x0.max(x1), y0.max(y1)],
        }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: Point, tol: f64) -> bool {
        p[0] >= self.min[0] - tol
            && p[0] <= self.max[0] + tol
            && p[1] >= self.min[1] - tol
            && p[1] <= self.max[1] + tol
    }

    pub fn contains_rect(&self, other: &Rect, tol: f64) -> bool {
        self.contains(other.min, tol) && self.contains(other.max, tol)
    }

    /// Shrinks by `d` on every side; may become empty (width or height ≤ 0).
    pub fn shrink(&self, d: f64) -> Rect {
        Rect {
            min: [self.min[0] + d, self.min[1] + d],
            max: [self.max[0] - d, self.max[1] - d],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.width() <= 0.0 || self.height() <= 0.0
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            [self.max[0], self.min[1]],
            self.max,
            [self.min[0], self.max[1]],
        ]
    }

    /// Distance from an interior point to the rectangle boundary (0 outside).
    pub fn depth(&self, p: Point) -> f64 {
        let d = (p[0] - self.min[0])
            .min(self.max[0] - p[0])
            .min(p[1] - self.min[1])
            .min(self.max[1] - p[1]);
        d.max(0.0)
    }
}

/// Sutherland–Hodgman clip of a ccw polygon against an axis-aligned rectangle.
pub fn clip_to_rect(poly: &[Point], r: &Rect) -> Vec<Point> {
    let mut cur: Vec<Point> = poly.to_vec();
    // (axis, bound, keep_greater)
    let planes = [
        (0usize, r.min[0], true),
        (0usize, r.max[0], false),
        (1usize, r.min[1], true),
        (1usize, r.max[1], false),
    ];
    for &(ax, bound, greater) in &planes {
        if cur.is_empty() {
            break;
        }
        let inside = |p: &Point| {
            if greater {
                p[ax] >= bound
            } else {
                p[ax] <= bound
            }
        };
        let mut next = Vec::with_capacity(cur.len() + 2);
        let n = cur.len();
        for i in 0..n {
            let a = cur[i];
            let b = cur[(i + 1) % n];
            let ia = inside(&a);
            let ib = inside(&b);
            if ia {
                next.push(a);
            }
            if ia != ib {
                let s = (bound - a[ax]) / (b[ax] - a[ax]);
                let mut q = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                q[ax] = bound;
                next.push(q);
            }
        }
        cur = next;
    }
    cur
}

/// |T ∩ R| for a triangle given ccw.
pub fn triangle_rect_area(p: &[Point; 3], r: &Rect) -> f64 {
    let inside = p.iter().all(|q| r.contains(*q, 0.0));
    if inside {
        return triangle_area(p);
    }
    let (lo, hi) = bbox(p);
    if hi[0] <= r.min[0] || lo[0] >= r.max[0] || hi[1] <= r.min[1] || lo[1] >= r.max[1] {
        return 0.0;
    }
    polygon_area(&clip_to_rect(p, r)).max(0.0)
}

pub fn bbox(pts: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    if l2 == 0.0 {
        return dist(p, a);
    }
    let s = (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0);
    dist(p, [a[0] + s * ab[0], a[1] + s * ab[1]])
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_cross(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Point in a convex ccw polygon (boundary included).
pub fn point_in_convex(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    (0..n).all(|i| orient(poly[i], poly[(i + 1) % n], p) >= 0.0)
}

/// Even-odd point-in-polygon for arbitrary simple polygons.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Euclidean distance between two convex ccw polygons (0 if they intersect).
pub fn convex_distance(p: &[Point], q: &[Point]) -> f64 {
    if p.iter().any(|&x| point_in_convex(x, q)) || q.iter().any(|&x| point_in_convex(x, p)) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        let (a, b) = (p[i], p[(i + 1) % p.len()]);
        for j in 0..q.len() {
            let (c, d) = (q[j], q[(j + 1) % q.len()]);
            best = best.min(segment_segment_distance(a, b, c, d));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// Penetration-based interior overlap test for two ccw triangles.
/// Returns true when the interiors overlap by more than `tol` along every separating axis.
pub fn triangles_overlap(p: &[Point; 3], q: &[Point; 3], tol: f64) -> bool {
    for tri in [p, q] {
        for i in 0..3 {
            let e = sub(tri[(i + 1) % 3], tri[i]);
            let len = e[0].hypot(e[1]);
            if len == 0.0 {
                continue;
            }
            let n = [-e[1] / len, e[0] / len];
            let proj = |t: &[Point; 3]| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for v in t {
                    let s = dot(*v, n);
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
                (lo, hi)
            };
            let (a0, a1) = proj(p);
            let (b0, b1) = proj(q);
            let overlap = a1.min(b1) - a0.max(b0);
            if overlap <= tol {
                return false;
            }
        }
    }
    true
}

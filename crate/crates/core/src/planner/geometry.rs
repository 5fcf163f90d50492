use serde::{Deserialize, Serialize};

pub type Point2 = [f64; 2];

/// Convex polygon with vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

impl ConvexPolygon {
    /// Convex hull of `points` (monotone chain). Collinear points are dropped.
    pub fn hull(points: &[Point2]) -> Self {
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        if pts.len() < 3 {
            return Self { vertices: pts };
        }
        let mut lower: Vec<Point2> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2
                && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point2> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self { vertices: lower }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut twice = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            twice += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * twice
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let n = self.vertices.len();
        let area = self.area();
        if n < 3 || area == 0.0 {
            let inv = 1.0 / n.max(1) as f64;
            return self
                .vertices
                .iter()
                .fold([0.0, 0.0], |c, v| [c[0] + v[0] * inv, c[1] + v[1] * inv]);
        }
        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let w = a[0] * b[1] - b[0] * a[1];
            cx += (a[0] + b[0]) * w;
            cy += (a[1] + b[1]) * w;
        }
        [cx / (6.0 * area), cy / (6.0 * area)]
    }

    /// Smallest distance from a vertex to the line through any edge it does
    /// not lie on; zero for degenerate polygons.
    pub fn min_width(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        let mut width = f64::INFINITY;
        for i in 0..n {
            let (normal, offset) = self.edge(i);
            let far = self
                .vertices
                .iter()
                .map(|v| -(normal[0] * v[0] + normal[1] * v[1] - offset))
                .fold(0.0, f64::max);
            width = width.min(far);
        }
        width
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    /// Outward unit normal `n` and offset `c` of edge `i` so that the signed
    /// distance of `p` is `n·p − c`.
    pub fn edge(&self, i: usize) -> (Point2, f64) {
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % self.vertices.len()];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        let n = [dy / len, -dx / len];
        (n, n[0] * a[0] + n[1] * a[1])
    }

    /// Largest signed edge distance of `p` and the edge attaining it.
    /// Non-positive exactly when `p` is inside.
    pub fn max_edge_distance(&self, p: Point2) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for i in 0..self.vertices.len() {
            let (n, c) = self.edge(i);
            let d = n[0] * p[0] + n[1] * p[1] - c;
            if d > best.0 {
                best = (d, i);
            }
        }
        best
    }

    pub fn contains(&self, p: Point2, inflate: f64) -> bool {
        self.max_edge_distance(p).0 <= inflate
    }
}

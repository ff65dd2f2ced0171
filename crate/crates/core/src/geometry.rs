//! Planar workspace: points, obstacles, goal disk, collision tests and the
//! admissible distance-to-goal heuristic.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// A point in the output plane, in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x1 * other.x2 - self.x2 * other.x1
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn distance_squared(self, other: Point2) -> f64 {
        let d = self - other;
        d.dot(d)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x1 * rhs, self.x2 * rhs)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(p: [f64; 2]) -> Self {
        Point2::new(p[0], p[1])
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn orientation(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    p.x1 >= a.x1.min(b.x1) && p.x1 <= a.x1.max(b.x1) && p.x2 >= a.x2.min(b.x2) && p.x2 <= a.x2.max(b.x2)
}

/// Closed segment intersection: touching endpoints and collinear overlap count.
pub fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

/// Axis-aligned workspace bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Point2,
    pub max: Point2,
}

impl Bounds {
    pub fn new(min: Point2, max: Point2) -> Result<Self, ConfigError> {
        let b = Bounds { min, max };
        b.validate()?;
        Ok(b)
    }

    /// Square of side `side` centered at the origin.
    pub fn centered_square(side: f64) -> Self {
        let h = side / 2.0;
        Bounds {
            min: Point2::new(-h, -h),
            max: Point2::new(h, h),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min.x1 >= self.max.x1 || self.min.x2 >= self.max.x2 {
            return Err(ConfigError::invalid(
                "bounds",
                "min must be strictly below max in both axes",
            ));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x1 >= self.min.x1 && p.x1 <= self.max.x1 && p.x2 >= self.min.x2 && p.x2 <= self.max.x2
    }

    pub fn width(&self) -> f64 {
        self.max.x1 - self.min.x1
    }

    pub fn height(&self) -> f64 {
        self.max.x2 - self.min.x2
    }

    /// Longest side; used to scale the shrinking near-neighbor radius.
    pub fn side_length(&self) -> f64 {
        self.width().max(self.height())
    }
}

/// A closed obstacle. Boundary points are in collision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Obstacle {
    Circle {
        center: Point2,
        radius: f64,
    },
    /// Strictly convex polygon with counter-clockwise vertices.
    Polygon {
        vertices: Vec<Point2>,
    },
}

impl Obstacle {
    pub fn circle(center: Point2, radius: f64) -> Result<Self, ConfigError> {
        let o = Obstacle::Circle { center, radius };
        o.validate()?;
        Ok(o)
    }

    pub fn polygon(vertices: Vec<Point2>) -> Result<Self, ConfigError> {
        let o = Obstacle::Polygon { vertices };
        o.validate()?;
        Ok(o)
    }

    /// Axis-aligned rectangle as a counter-clockwise polygon.
    pub fn rectangle(min: Point2, max: Point2) -> Result<Self, ConfigError> {
        Obstacle::polygon(vec![min, Point2::new(max.x1, min.x2), max, Point2::new(min.x1, max.x2)])
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            Obstacle::Circle { center, radius } => {
                if !center.is_finite() || !(radius.is_finite() && *radius > 0.0) {
                    return Err(ConfigError::invalid(
                        "obstacle",
                        "circle needs a finite center and radius > 0",
                    ));
                }
            }
            Obstacle::Polygon { vertices } => {
                let n = vertices.len();
                if n < 3 {
                    return Err(ConfigError::invalid("obstacle", "polygon needs at least 3 vertices"));
                }
                if vertices.iter().any(|v| !v.is_finite()) {
                    return Err(ConfigError::invalid("obstacle", "polygon vertices must be finite"));
                }
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let c = vertices[(i + 2) % n];
                    if orientation(a, b, c) <= 0.0 {
                        return Err(ConfigError::invalid(
                            "obstacle",
                            "polygon must be strictly convex with counter-clockwise vertices",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// True if `p` is inside or on the boundary.
    pub fn contains(&self, p: Point2) -> bool {
        match self {
            Obstacle::Circle { center, radius } => p.distance(*center) <= *radius,
            Obstacle::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| orientation(vertices[i], vertices[(i + 1) % n], p) >= 0.0)
            }
        }
    }

    /// True if the closed segment `[a, b]` touches the obstacle.
    pub fn intersects_segment(&self, a: Point2, b: Point2) -> bool {
        match self {
            Obstacle::Circle { center, radius } => point_segment_distance(*center, a, b) <= *radius,
            Obstacle::Polygon { vertices } => {
                if self.contains(a) || self.contains(b) {
                    return true;
                }
                let n = vertices.len();
                (0..n).any(|i| segments_intersect(a, b, vertices[i], vertices[(i + 1) % n]))
            }
        }
    }
}

/// Disk-shaped goal region in output space. Boundary is inside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub center: Point2,
    pub radius: f64,
}

impl GoalRegion {
    pub fn new(center: Point2, radius: f64) -> Result<Self, ConfigError> {
        if !center.is_finite() || !(radius.is_finite() && radius > 0.0) {
            return Err(ConfigError::invalid(
                "goal",
                "goal needs a finite center and radius > 0",
            ));
        }
        Ok(GoalRegion { center, radius })
    }

    pub fn contains(&self, y: Point2) -> bool {
        y.distance(self.center) <= self.radius
    }

    /// Distance from `y` to the goal set.
    pub fn distance_to(&self, y: Point2) -> f64 {
        (y.distance(self.center) - self.radius).max(0.0)
    }
}

/// Bounds, obstacles and goal. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct Workspace {
    bounds: Bounds,
    obstacles: Vec<Obstacle>,
    goal: GoalRegion,
}

impl Workspace {
    pub fn new(bounds: Bounds, obstacles: Vec<Obstacle>, goal: GoalRegion) -> Result<Self, ConfigError> {
        bounds.validate()?;
        for o in &obstacles {
            o.validate()?;
        }
        let goal = GoalRegion::new(goal.center, goal.radius)?;
        let ws = Workspace {
            bounds,
            obstacles,
            goal,
        };
        if !ws.goal_reachable() {
            return Err(ConfigError::invalid(
                "goal",
                "goal region does not intersect free space",
            ));
        }
        Ok(ws)
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn goal(&self) -> &GoalRegion {
        &self.goal
    }

    /// Same bounds and obstacles with a different goal.
    pub fn with_goal(&self, goal: GoalRegion) -> Result<Self, ConfigError> {
        Workspace::new(self.bounds, self.obstacles.clone(), goal)
    }

    // Probes the goal disk on a polar grid; exact intersection with a free
    // set is not needed, only a witness point.
    fn goal_reachable(&self) -> bool {
        let GoalRegion { center, radius } = self.goal;
        if self.point_in_free(center) {
            return true;
        }
        (1..=8).any(|ring| {
            let r = radius * ring as f64 / 8.0;
            (0..32).any(|k| {
                let a = std::f64::consts::TAU * k as f64 / 32.0;
                self.point_in_free(center + Point2::new(a.cos(), a.sin()) * r)
            })
        })
    }

    pub fn point_in_free(&self, p: Point2) -> bool {
        p.is_finite() && self.bounds.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn segment_collision_free(&self, a: Point2, b: Point2) -> bool {
        // Bounds are convex, so endpoint containment covers the segment.
        self.bounds.contains(a) && self.bounds.contains(b) && !self.obstacles.iter().any(|o| o.intersects_segment(a, b))
    }

    /// Lower bound on the arc-length cost from `y` to the goal region.
    pub fn heuristic(&self, y: Point2) -> f64 {
        self.goal.distance_to(y)
    }

    pub fn in_goal(&self, y: Point2) -> bool {
        self.goal.contains(y)
    }
}

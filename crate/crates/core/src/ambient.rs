//! Geometry of the solvable Lie group `G(mu1, mu2)`: `R^3` with the group law
//!
//! ```text
//! (x1, x2, x3) . (y1, y2, y3) = (x1 + e^{mu1 x3} y1, x2 + e^{mu2 x3} y2, x3 + y3)
//! ```
//!
//! and left-invariant metric `e^{-2 mu1 x3} dx1^2 + e^{-2 mu2 x3} dx2^2 + dx3^2`.
//! The left-invariant orthonormal frame is `e1 = e^{mu1 x3} d/dx1`,
//! `e2 = e^{mu2 x3} d/dx2`, `e3 = d/dx3`.
//!
//! Special members: `G(0,0)` is Euclidean space, `G(c,c)` hyperbolic space,
//! `G(0,c)` is `H^2 x R` and `G(1,-1)` is Sol.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub mu1: f64,
    pub mu2: f64,
}

impl Params {
    pub const fn new(mu1: f64, mu2: f64) -> Self {
        Params { mu1, mu2 }
    }

    pub const EUCLIDEAN: Params = Params::new(0.0, 0.0);
    pub const SOL: Params = Params::new(1.0, -1.0);

    pub fn mu(&self, i: usize) -> f64 {
        match i {
            1 => self.mu1,
            2 => self.mu2,
            _ => 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.mu1.is_finite() && self.mu2.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupPoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl GroupPoint {
    pub const IDENTITY: GroupPoint = GroupPoint {
        x1: 0.0,
        x2: 0.0,
        x3: 0.0,
    };

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        GroupPoint { x1, x2, x3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }
}

/// Components with respect to the orthonormal frame `{e1, e2, e3}`,
/// equivalently the Lie algebra basis `{E1, E2, E3}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameVector {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl FrameVector {
    pub const fn new(u1: f64, u2: f64, u3: f64) -> Self {
        FrameVector { u1, u2, u3 }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        FrameVector::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.u1, self.u2, self.u3]
    }

    pub fn dot(self, other: FrameVector) -> f64 {
        self.u1 * other.u1 + self.u2 * other.u2 + self.u3 * other.u3
    }

    pub fn cross(self, other: FrameVector) -> FrameVector {
        FrameVector::new(
            self.u2 * other.u3 - self.u3 * other.u2,
            self.u3 * other.u1 - self.u1 * other.u3,
            self.u1 * other.u2 - self.u2 * other.u1,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> FrameVector {
        FrameVector::new(s * self.u1, s * self.u2, s * self.u3)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: FrameVector) -> FrameVector {
        FrameVector::new(self.u1 - other.u1, self.u2 - other.u2, self.u3 - other.u3)
    }
}

pub fn group_mul(a: GroupPoint, b: GroupPoint, p: Params) -> GroupPoint {
    GroupPoint {
        x1: a.x1 + (p.mu1 * a.x3).exp() * b.x1,
        x2: a.x2 + (p.mu2 * a.x3).exp() * b.x2,
        x3: a.x3 + b.x3,
    }
}

pub fn group_inv(a: GroupPoint, p: Params) -> GroupPoint {
    GroupPoint {
        x1: -(-p.mu1 * a.x3).exp() * a.x1,
        x2: -(-p.mu2 * a.x3).exp() * a.x2,
        x3: -a.x3,
    }
}

/// Diagonal coefficients `(g11, g22, g33)` of the metric at height `x3`.
pub fn metric_coeffs(x3: f64, p: Params) -> [f64; 3] {
    [(-2.0 * p.mu1 * x3).exp(), (-2.0 * p.mu2 * x3).exp(), 1.0]
}

/// Christoffel symbols of the coordinate frame, indexed `gamma[k][i][j]` for
/// `Gamma^k_{ij}` with zero-based indices.
///
/// Nonzero entries: `Gamma^1_{13} = -mu1`, `Gamma^2_{23} = -mu2`,
/// `Gamma^3_{11} = mu1 e^{-2 mu1 x3}`, `Gamma^3_{22} = mu2 e^{-2 mu2 x3}`.
pub fn coordinate_christoffels(x3: f64, p: Params) -> [[[f64; 3]; 3]; 3] {
    let mut gamma = [[[0.0; 3]; 3]; 3];
    gamma[0][0][2] = -p.mu1;
    gamma[0][2][0] = -p.mu1;
    gamma[1][1][2] = -p.mu2;
    gamma[1][2][1] = -p.mu2;
    gamma[2][0][0] = p.mu1 * (-2.0 * p.mu1 * x3).exp();
    gamma[2][1][1] = p.mu2 * (-2.0 * p.mu2 * x3).exp();
    gamma
}

/// `nabla_{e_i} e_j` in frame components, for one-based `i, j` in `1..=3`.
pub fn frame_connection(i: usize, j: usize, p: Params) -> FrameVector {
    assert!((1..=3).contains(&i) && (1..=3).contains(&j), "frame indices are 1..=3");
    match (i, j) {
        (1, 1) => FrameVector::new(0.0, 0.0, p.mu1),
        (1, 3) => FrameVector::new(-p.mu1, 0.0, 0.0),
        (2, 2) => FrameVector::new(0.0, 0.0, p.mu2),
        (2, 3) => FrameVector::new(0.0, -p.mu2, 0.0),
        _ => FrameVector::default(),
    }
}

/// Lie bracket `[E_i, E_j]` of the orthonormal basis, one-based indices.
pub fn lie_bracket(i: usize, j: usize, p: Params) -> FrameVector {
    assert!((1..=3).contains(&i) && (1..=3).contains(&j), "frame indices are 1..=3");
    match (i, j) {
        (2, 3) => FrameVector::new(0.0, -p.mu2, 0.0),
        (3, 2) => FrameVector::new(0.0, p.mu2, 0.0),
        (3, 1) => FrameVector::new(p.mu1, 0.0, 0.0),
        (1, 3) => FrameVector::new(-p.mu1, 0.0, 0.0),
        _ => FrameVector::default(),
    }
}

/// Coordinate components of the tangent vector with frame components `v` at height `x3`.
pub fn frame_to_coordinate(v: FrameVector, x3: f64, p: Params) -> [f64; 3] {
    [v.u1 * (p.mu1 * x3).exp(), v.u2 * (p.mu2 * x3).exp(), v.u3]
}

pub fn coordinate_to_frame(c: [f64; 3], x3: f64, p: Params) -> FrameVector {
    FrameVector::new(c[0] * (-p.mu1 * x3).exp(), c[1] * (-p.mu2 * x3).exp(), c[2])
}

/// Inner product of two coordinate vectors at height `x3`.
pub fn metric_dot(a: [f64; 3], b: [f64; 3], x3: f64, p: Params) -> f64 {
    let g = metric_coeffs(x3, p);
    g[0] * a[0] * b[0] + g[1] * a[1] * b[1] + g[2] * a[2] * b[2]
}

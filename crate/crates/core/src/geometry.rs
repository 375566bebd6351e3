//! Dimension-generic geometry of the half-space: points, the cylindrical
//! norm and its balls, level-set rings, the mirror map, and the dimensional
//! constants `sigma_N`, `C_N`, `C'_N`.

use crate::{Error, Result};

/// A point `(x', x_N)` of the closed half-space.
///
/// Coordinates are stored as a flat vector of length `N`; the last entry is
/// the height `x_N`. Interior points have `height > 0`; boundary points
/// (`height == 0`) are permitted only where an operation explicitly accepts
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpacePoint {
    coords: Vec<f64>,
}

impl HalfSpacePoint {
    /// Point of the closed half-space (`height >= 0`, `N >= 2`).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 || coords.len() > 8 {
            return Err(Error::BadDimension(coords.len()));
        }
        let h = coords[coords.len() - 1];
        if !h.is_finite() || h < 0.0 {
            return Err(Error::NotInterior(h));
        }
        Ok(Self { coords })
    }

    /// Strictly interior point (`height > 0`).
    pub fn interior(coords: Vec<f64>) -> Result<Self> {
        let p = Self::new(coords)?;
        if p.height() <= 0.0 {
            return Err(Error::NotInterior(p.height()));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The tangential part `x'` (length `N - 1`).
    pub fn tangential(&self) -> &[f64] {
        &self.coords[..self.coords.len() - 1]
    }

    /// The height `x_N`.
    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }

    pub fn is_interior(&self) -> bool {
        self.height() > 0.0
    }

    /// Euclidean norm `|x|`.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean distance `|x - y|`.
    pub fn dist(&self, other: &Self) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn dist_sq(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Cylindrical distance `|x - y|_* = max{|x' - y'|, |x_N - y_N|}`.
    pub fn cyl_dist(&self, other: &Self) -> f64 {
        let tang: f64 = self
            .tangential()
            .iter()
            .zip(other.tangential())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        tang.max((self.height() - other.height()).abs())
    }

    /// The mirror point `x^ = (x', -x_N)` across the boundary hyperplane.
    ///
    /// Applying twice is the identity. The result lies outside the
    /// half-space, so it is returned as a raw coordinate vector consumers
    /// feed back into distance computations.
    pub fn mirror(&self) -> Vec<f64> {
        let mut c = self.coords.clone();
        let n = c.len();
        c[n - 1] = -c[n - 1];
        c
    }

    /// Squared Euclidean distance from the mirror point `x^` to `y`.
    ///
    /// `|x^ - y|^2 = |x' - y'|^2 + (x_N + y_N)^2`, computed without forming
    /// the mirror point.
    pub fn mirror_dist_sq(&self, y: &Self) -> f64 {
        let tang: f64 = self
            .tangential()
            .iter()
            .zip(y.tangential())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let s = self.height() + y.height();
        tang + s * s
    }
}

/// Regularization parameter `0 <= eps < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    eps: f64,
}

impl Regularization {
    pub const ZERO: Regularization = Regularization { eps: 0.0 };

    pub fn new(eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::BadRegularization(eps));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn eps_sq(&self) -> f64 {
        self.eps * self.eps
    }
}

/// Dimensional constants, all recomputable from `N` alone.
///
/// `sigma_N = 2 pi^{N/2} / Gamma(N/2)` is the surface measure of the unit
/// sphere in `R^N`; `C_N = 1 / (sigma_N max{N-2, 1})`; `C'_N = 2 / sigma_N`.
#[derive(Debug, Clone, Copy)]
pub struct Constants {
    pub dimension: usize,
    pub sigma_n: f64,
    pub c_n: f64,
    pub c_n_prime: f64,
}

impl Constants {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=8).contains(&n) {
            return Err(Error::BadDimension(n));
        }
        let sigma_n = unit_sphere_measure(n);
        Ok(Self {
            dimension: n,
            sigma_n,
            c_n: 1.0 / (sigma_n * ((n as f64) - 2.0).max(1.0)),
            c_n_prime: 2.0 / sigma_n,
        })
    }
}

/// `Gamma(n/2)` by the half-integer recurrence from `Gamma(1) = 1`,
/// `Gamma(1/2) = sqrt(pi)`. Exact for integer `n >= 1`.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n >= 1);
    let mut val = if n % 2 == 0 {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    // Gamma(z + 1) = z Gamma(z), climbing from 1 or 1/2 to n/2.
    let mut z = if n % 2 == 0 { 1.0 } else { 0.5 };
    while z + 0.5 < n as f64 / 2.0 + 0.25 {
        val *= z;
        z += 1.0;
    }
    val
}

/// Surface measure of the unit sphere in `R^n`.
pub fn unit_sphere_measure(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// A cylindrical ball `B*_R(x)`: membership is
/// `max{|y_N - x_N|, |y' - x'|} < R`. The annulus `A*_R(x) =
/// B*_{2R}(x) \ B*_R(x)` is derived, never stored.
#[derive(Debug, Clone)]
pub struct CylinderBall {
    pub center: HalfSpacePoint,
    pub radius: f64,
}

impl CylinderBall {
    pub fn new(center: HalfSpacePoint, radius: f64) -> Result<Self> {
        if radius <= 0.0 || !radius.is_finite() {
            return Err(Error::Precondition(format!(
                "cylinder ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, y: &HalfSpacePoint) -> bool {
        y.is_interior() && self.center.cyl_dist(y) < self.radius
    }

    /// Membership in the annulus `A*_R = B*_{2R} \ B*_R` at this `R`.
    pub fn in_annulus(&self, y: &HalfSpacePoint) -> bool {
        let d = self.center.cyl_dist(y);
        y.is_interior() && d >= self.radius && d < 2.0 * self.radius
    }
}

/// A level-set ring domain `Omega_r(x) = {y : G^x(y) > 1/r} U {x}`.
///
/// Membership testing needs the Green function and lives in
/// [`crate::kernels::in_level_ring`].
#[derive(Debug, Clone)]
pub struct LevelSetRing {
    pub center: HalfSpacePoint,
    pub level: f64,
}

impl LevelSetRing {
    pub fn new(center: HalfSpacePoint, level: f64) -> Result<Self> {
        if level <= 0.0 || !level.is_finite() {
            return Err(Error::Precondition(format!(
                "level-set ring level must be positive, got {level}"
            )));
        }
        if !center.is_interior() {
            return Err(Error::NotInterior(center.height()));
        }
        Ok(Self { center, level })
    }
}

//! The lift `u(x) -> v(xi) = u(xi', |xi_bar|)/|xi_bar|` from the half-space
//! in `R^N` to `R^{N+2}` with three symmetry coordinates, its inverse,
//! spherical-mean superharmonicity testing, and the two annulus-comparison
//! inequalities between lifted and half-space integrals.
//!
//! Lifted cylindrical balls `B*_R(eta_0)` are integrated in reduced form:
//! the integrand depends on `xi_bar` only through `rho = |xi_bar|`, so the
//! 3-dimensional `xi_bar` integral collapses to a radial one against the
//! exact sphere/ball intersection area
//! `w(rho) = 2 pi rho (R^2 - (a - rho)^2) / (2a)`.

use crate::geometry::{unit_sphere_measure, HalfSpacePoint};
use crate::potentials::{Provenance, QuadratureSpec, ScalarField};
use crate::quad::{adaptive_box, sphere_directions, tensor_gl};
use crate::{Error, Result};
use std::sync::Arc;

/// A point `xi = (xi', xi_bar)` of `R^{N+2}`; the symmetry subspace `S` is
/// `{|xi_bar| = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPoint {
    pub tangential: Vec<f64>,
    pub bar: [f64; 3],
}

impl LiftedPoint {
    pub fn new(tangential: Vec<f64>, bar: [f64; 3]) -> Self {
        Self { tangential, bar }
    }

    /// The image `eta_0 = (x', (x_N, 0, 0))` of a half-space point.
    pub fn from_base(x: &HalfSpacePoint) -> Self {
        Self {
            tangential: x.tangential().to_vec(),
            bar: [x.height(), 0.0, 0.0],
        }
    }

    /// Ambient dimension `N + 2`.
    pub fn dim(&self) -> usize {
        self.tangential.len() + 3
    }

    pub fn bar_norm(&self) -> f64 {
        (self.bar[0] * self.bar[0] + self.bar[1] * self.bar[1] + self.bar[2] * self.bar[2]).sqrt()
    }

    pub fn on_symmetry_subspace(&self) -> bool {
        self.bar_norm() == 0.0
    }
}

/// A field on `R^{N+2}`, symmetric in `xi_bar` by construction when the
/// flag is set.
#[derive(Clone)]
pub struct LiftedField {
    eval: Arc<dyn Fn(&LiftedPoint) -> f64 + Send + Sync>,
    pub symmetric: bool,
    /// base half-space dimension `N`
    pub base_dim: usize,
}

impl std::fmt::Debug for LiftedField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiftedField")
            .field("symmetric", &self.symmetric)
            .field("base_dim", &self.base_dim)
            .finish()
    }
}

impl LiftedField {
    pub fn eval(&self, xi: &LiftedPoint) -> f64 {
        (self.eval)(xi)
    }
}

/// `v(xi) = u(xi', |xi_bar|) / |xi_bar|` off the symmetry subspace; on it,
/// the liminf is approximated by the minimum over the radii `2^{-j}`,
/// `j <= 20`.
pub fn lift(u: &ScalarField, base_dim: usize) -> LiftedField {
    let u = u.clone();
    LiftedField {
        eval: Arc::new(move |xi: &LiftedPoint| {
            let rho = xi.bar_norm();
            let at = |h: f64| {
                let mut c = xi.tangential.clone();
                c.push(h);
                match HalfSpacePoint::interior(c) {
                    Ok(p) => u.eval(&p) / h,
                    Err(_) => f64::NAN,
                }
            };
            if rho > 0.0 {
                at(rho)
            } else {
                (0..=20)
                    .map(|j| at(2f64.powi(-j)))
                    .fold(f64::INFINITY, f64::min)
            }
        }),
        symmetric: true,
        base_dim,
    }
}

/// `u(x) = x_N v(x', x_N, 0, 0)`; inverse of [`lift`] on interior points.
pub fn unlift(v: &LiftedField) -> Result<ScalarField> {
    if !v.symmetric {
        return Err(Error::Precondition(
            "unlift requires a symmetric lifted field".into(),
        ));
    }
    let v = v.clone();
    Ok(ScalarField::new(
        move |x: &HalfSpacePoint| {
            let xi = LiftedPoint::new(x.tangential().to_vec(), [x.height(), 0.0, 0.0]);
            x.height() * v.eval(&xi)
        },
        None,
        Provenance::User,
    ))
}

/// Average of `v` over the Euclidean sphere of radius `r` about `center`
/// in `R^{N+2}`, with a seeded low-discrepancy direction set (4096
/// directions).
pub fn spherical_mean(
    v: &LiftedField,
    center: &LiftedPoint,
    r: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Precondition(format!(
            "sphere radius must be positive, got {r}"
        )));
    }
    let dim = center.dim();
    let dirs = sphere_directions(dim, 4096, q.seed ^ 0x5F3759DF);
    let d = center.tangential.len();
    let mut acc = 0.0;
    for dir in &dirs {
        let tang: Vec<f64> = (0..d).map(|i| center.tangential[i] + r * dir[i]).collect();
        let bar = [
            center.bar[0] + r * dir[d],
            center.bar[1] + r * dir[d + 1],
            center.bar[2] + r * dir[d + 2],
        ];
        acc += v.eval(&LiftedPoint::new(tang, bar));
    }
    Ok(acc / dirs.len() as f64)
}

// --- reduced lifted integrals ----------------------------------------------

/// Area of the intersection of the sphere `{|xi_bar| = rho}` with the ball
/// of radius `r` centered at distance `a` from the origin (in `R^3`).
pub fn sphere_cap_area(rho: f64, a: f64, r: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    if a == 0.0 {
        return if rho < r {
            4.0 * std::f64::consts::PI * rho * rho
        } else {
            0.0
        };
    }
    if rho <= r - a {
        4.0 * std::f64::consts::PI * rho * rho
    } else if rho >= r + a || rho <= a - r {
        0.0
    } else {
        2.0 * std::f64::consts::PI * rho * (r * r - (a - rho) * (a - rho)) / (2.0 * a)
    }
}

// integral over {|xi' - x'| in (t0, t1)} x {xi_bar : weight supported} of
// g(xi', rho) * weight(rho), via tangential polar + reduced radial variable
fn lifted_reduced_integral<G, W>(
    g: &G,
    x: &HalfSpacePoint,
    t0: f64,
    t1: f64,
    weight: &W,
    rho_hi: f64,
    rho_breaks: &[f64],
    q: &QuadratureSpec,
) -> Result<f64>
where
    G: Fn(&[f64], f64) -> f64,
    W: Fn(f64) -> f64,
{
    if t1 <= t0 || rho_hi <= 0.0 {
        return Ok(0.0);
    }
    let d = x.dim() - 1;
    let xp = x.tangential().to_vec();
    let sigma = if d == 1 { 2.0 } else { unit_sphere_measure(d) };
    let dirs: Vec<Vec<f64>> = if d == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        sphere_directions(d, 256, q.seed ^ 0x11F7)
    };
    let nd = dirs.len() as f64;
    let f = |p: &[f64]| {
        let (t, rho) = (p[0], p[1]);
        let w = weight(rho);
        if w == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut xi = vec![0.0; d];
        for dir in &dirs {
            for i in 0..d {
                xi[i] = xp[i] + t * dir[i];
            }
            acc += g(&xi, rho);
        }
        (acc / nd) * sigma * t.powi((d - 1) as i32) * w
    };
    // split the radial axis at the cap-area kinks so each panel is smooth
    let mut cuts: Vec<f64> = std::iter::once(0.0)
        .chain(rho_breaks.iter().copied().filter(|b| *b > 0.0 && *b < rho_hi))
        .chain(std::iter::once(rho_hi))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let coarse = tensor_gl(&f, &[t0, w[0]], &[t1, w[1]], 4).abs();
        if coarse <= 1e-10 {
            // numerically zero panel: rounding noise only, do not adapt on it
            total += tensor_gl(&f, &[t0, w[0]], &[t1, w[1]], 9);
            continue;
        }
        let tol = q.rel_tol * coarse.max(q.abs_floor / q.rel_tol);
        total += adaptive_box(&f, &[t0, w[0]], &[t1, w[1]], tol, q.max_subdivisions)?;
    }
    Ok(total)
}

/// `int_{B*_R(eta_0)} |v - c|` in `R^{N+2}` versus
/// `(sigma_3 / 2) int_{B*_{gamma R}(x) cap half-space} |u - c y_N| y_N dy`;
/// the lifted side dominates whenever the radius precondition holds.
pub fn annulus_comparison(
    u: &ScalarField,
    c: f64,
    x: &HalfSpacePoint,
    r: f64,
    gamma: f64,
    q: &QuadratureSpec,
) -> Result<(f64, f64, bool)> {
    if !(0.0 < gamma && gamma < 1.0) {
        return Err(Error::Precondition(format!(
            "gamma must lie in (0, 1), got {gamma}"
        )));
    }
    let s = (1.0 - gamma * gamma).sqrt() - gamma;
    let factor = if s > 0.0 { (1.0 / s).max(1.0) } else { 1.0 };
    if r <= 2.0 * factor * x.height() {
        return Err(Error::Precondition(format!(
            "R = {r} must exceed {} for gamma = {gamma}, x_N = {}",
            2.0 * factor * x.height(),
            x.height()
        )));
    }
    let a = x.height();
    let g = |xi: &[f64], rho: f64| {
        let mut cc = xi.to_vec();
        cc.push(rho);
        let p = HalfSpacePoint::interior(cc).expect("rho > 0 inside quadrature");
        (u.eval(&p) / rho - c).abs()
    };
    let w = |rho: f64| sphere_cap_area(rho, a, r);
    let breaks = [r - a, a - r, r + a];
    let lhs = lifted_reduced_integral(&g, x, 0.0, r, &w, a + r, &breaks, q)?;
    // half-space side: same integrand family over B*_{gamma R}(x)
    let n = x.dim();
    let f = |y: &[f64]| {
        let yn = y[n - 1];
        let p = HalfSpacePoint::new(y.to_vec()).expect("interior sample");
        yn * (u.eval(&p) - c * yn).abs()
    };
    let gr = gamma * r;
    let inner = crate::rings::cyl_product_integral_pub(
        &f,
        x,
        0.0,
        gr,
        (a - gr).max(0.0),
        a + gr,
        q,
    )?;
    let rhs = unit_sphere_measure(3) / 2.0 * inner;
    Ok((lhs, rhs, lhs >= rhs * (1.0 - 1e-3)))
}

/// `int_{B*_{2R}(eta_0) \ B*_{R/tau}(eta_0)} |v|` in `R^{N+2}` versus
/// `2 sigma_3 int_{{y_N>0} cap {R < |y-x|_* < 2R}} y_N |u| dy`; the lifted
/// annulus is dominated by the half-space annulus integral.
pub fn annulus_split_bound(
    u: &ScalarField,
    x: &HalfSpacePoint,
    r: f64,
    tau: f64,
    q: &QuadratureSpec,
) -> Result<(f64, f64, bool)> {
    if !(tau > std::f64::consts::FRAC_1_SQRT_2 && tau < 1.0) {
        return Err(Error::Precondition(format!(
            "tau must lie in (1/sqrt(2), 1), got {tau}"
        )));
    }
    if r <= 2.0 * tau / (1.0 - tau) * x.height() {
        return Err(Error::Precondition(format!(
            "R = {r} must exceed {} for tau = {tau}",
            2.0 * tau / (1.0 - tau) * x.height()
        )));
    }
    let a = x.height();
    let r_in = r / tau;
    let r_out = 2.0 * r;
    let g = |xi: &[f64], rho: f64| {
        let mut cc = xi.to_vec();
        cc.push(rho);
        let p = HalfSpacePoint::interior(cc).expect("rho > 0 inside quadrature");
        (u.eval(&p) / rho).abs()
    };
    // outer wall: tangential distance in (R/tau, 2R), xi_bar within the big ball
    let w_ball = |rho: f64| sphere_cap_area(rho, a, r_out);
    let breaks = [
        r_out - a,
        a - r_out,
        r_out + a,
        r_in - a,
        a - r_in,
        r_in + a,
    ];
    let lhs_a = lifted_reduced_integral(&g, x, r_in, r_out, &w_ball, a + r_out, &breaks, q)?;
    // cap: tangential within R/tau, xi_bar in the shell between the two balls
    let w_shell = |rho: f64| sphere_cap_area(rho, a, r_out) - sphere_cap_area(rho, a, r_in);
    let lhs_b = lifted_reduced_integral(&g, x, 0.0, r_in, &w_shell, a + r_out, &breaks, q)?;
    let lhs = lhs_a + lhs_b;
    // half-space annulus of the weighted ring condition
    let n = x.dim();
    let f = |y: &[f64]| {
        let yn = y[n - 1];
        let p = HalfSpacePoint::new(y.to_vec()).expect("interior sample");
        yn * u.eval(&p).abs()
    };
    let wall = crate::rings::cyl_product_integral_pub(
        &f,
        x,
        r,
        2.0 * r,
        (a - 2.0 * r).max(0.0),
        a + 2.0 * r,
        q,
    )?;
    let cap_hi = crate::rings::cyl_product_integral_pub(&f, x, 0.0, r, a + r, a + 2.0 * r, q)?;
    let cap_lo = crate::rings::cyl_product_integral_pub(
        &f,
        x,
        0.0,
        r,
        (a - 2.0 * r).max(0.0),
        (a - r).max(0.0),
        q,
    )?;
    let rhs = 2.0 * unit_sphere_measure(3) * (wall + cap_hi + cap_lo);
    Ok((lhs, rhs, lhs <= rhs * (1.0 + 1e-3)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::load_measure;
    use crate::potentials::{represent, RepresentationTriple};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(c: Vec<f64>) -> HalfSpacePoint {
        HalfSpacePoint::interior(c).unwrap()
    }

    fn field<F: Fn(&HalfSpacePoint) -> f64 + Send + Sync + 'static>(f: F) -> ScalarField {
        ScalarField::new(f, None, Provenance::User)
    }

    fn green_atom_field() -> ScalarField {
        let mu = load_measure(r#"{"dim":2,"side":"interior","atoms":[{"loc":[0,1],"w":1}]}"#)
            .unwrap();
        let t = RepresentationTriple::new(2, 0.0, None, Some(mu)).unwrap();
        represent(&t, &QuadratureSpec::default())
    }

    #[test]
    fn lift_of_height_is_one() {
        let v = lift(&field(|x| x.height()), 2);
        assert_relative_eq!(v.eval(&LiftedPoint::new(vec![3.0], [0.5, 0.2, -0.1])), 1.0);
        // on the symmetry subspace the liminf is 1 as well
        assert_relative_eq!(v.eval(&LiftedPoint::new(vec![3.0], [0.0, 0.0, 0.0])), 1.0);
    }

    #[test]
    fn lift_of_height_squared_is_bar_norm() {
        let v = lift(&field(|x| x.height() * x.height()), 2);
        let xi = LiftedPoint::new(vec![0.0], [3.0, 0.0, 4.0]);
        assert_relative_eq!(v.eval(&xi), 5.0);
        assert_relative_eq!(v.eval(&LiftedPoint::new(vec![1.0], [0.0; 3])), 0.0, epsilon = 1e-6);
    }

    #[test]
    fn unlift_round_trip() {
        let u = field(|x| (x.norm() + 1.0).recip() + 0.3 * x.height());
        let v = lift(&u, 2);
        let back = unlift(&v).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = pt(vec![rng.gen_range(-5.0..5.0), rng.gen_range(0.01..5.0)]);
            assert_relative_eq!(back.eval(&x), u.eval(&x), max_relative = 1e-14);
        }
    }

    #[test]
    fn lift_is_linear_off_s() {
        let u1 = field(|x| x.norm());
        let u2 = field(|x| x.height() * 2.0);
        let combined = field(|x| 3.0 * x.norm() + x.height() * 2.0);
        let (v1, v2, vc) = (lift(&u1, 2), lift(&u2, 2), lift(&combined, 2));
        let xi = LiftedPoint::new(vec![1.5], [0.3, -0.4, 0.1]);
        assert_relative_eq!(
            3.0 * v1.eval(&xi) + v2.eval(&xi),
            vc.eval(&xi),
            max_relative = 1e-14
        );
    }

    #[test]
    fn spherical_mean_of_constant() {
        let v = lift(&field(|x| x.height()), 2); // v = 1
        let c = LiftedPoint::new(vec![0.0], [2.0, 0.0, 0.0]);
        let m = spherical_mean(&v, &c, 1.0, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(m, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lifted_green_potential_satisfies_mean_inequality() {
        let v = lift(&green_atom_field(), 2);
        let q = QuadratureSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 20 {
            let c = LiftedPoint::new(
                vec![rng.gen_range(-3.0..3.0)],
                [
                    rng.gen_range(0.3..3.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ],
            );
            let r = rng.gen_range(0.05..0.4);
            // the lifted atom sits on the sphere |xi_bar| = 1 over xi' = 0;
            // stay clear of it so the center value is finite and smooth
            let lifted_atom_dist =
                ((c.tangential[0]).powi(2) + (c.bar_norm() - 1.0).powi(2)).sqrt();
            if lifted_atom_dist < r + 0.3 {
                continue;
            }
            let center_val = v.eval(&c);
            let mean = spherical_mean(&v, &c, r, &q).unwrap();
            assert!(
                mean <= center_val + 1e-3 * center_val.abs().max(1.0),
                "mean {mean} > center {center_val} at {c:?} r={r}"
            );
            checked += 1;
        }
    }

    #[test]
    fn cap_area_formula() {
        use std::f64::consts::PI;
        // sphere fully inside the ball
        assert_relative_eq!(sphere_cap_area(1.0, 0.5, 2.0), 4.0 * PI);
        // fully outside
        assert_eq!(sphere_cap_area(4.0, 0.5, 2.0), 0.0);
        // grazing case: continuity at both transitions
        assert_relative_eq!(sphere_cap_area(1.5 - 1e-12, 0.5, 2.0), 4.0 * PI * 1.5 * 1.5, max_relative = 1e-9);
        assert!(sphere_cap_area(2.5 - 1e-6, 0.5, 2.0) < 1e-3);
        // hemisphere sanity: a = rho = r/sqrt(2) gives cap height rho - a/2...
        let (rho, a) = (1.0, 1.0);
        let r = 2f64.sqrt();
        // chord plane passes through the origin-side: h = (r^2-(a-rho)^2)/(2a) = 1
        assert_relative_eq!(sphere_cap_area(rho, a, r), 2.0 * PI * rho * 1.0, max_relative = 1e-12);
    }

    #[test]
    fn annulus_comparison_trivial_and_scaling() {
        let x = pt(vec![0.0, 0.5]);
        let u = field(|x| 0.8 * x.height());
        let (lhs, rhs, holds) =
            annulus_comparison(&u, 0.8, &x, 4.0, 0.5, &QuadratureSpec::default()).unwrap();
        assert!(lhs.abs() < 1e-12 && rhs.abs() < 1e-12 && holds);
        // homogeneity: scaling u and c by 3 scales both sides by 3
        let u3 = field(|x| 2.4 * x.height() + 0.3);
        let u1 = field(|x| 0.8 * x.height() + 0.1);
        let (l3, r3, _) =
            annulus_comparison(&u3, 2.4, &x, 4.0, 0.5, &QuadratureSpec::default()).unwrap();
        let (l1, r1, _) =
            annulus_comparison(&u1, 0.8, &x, 4.0, 0.5, &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(l3, 3.0 * l1, max_relative = 1e-6);
        assert_relative_eq!(r3, 3.0 * r1, max_relative = 1e-6);
    }

    #[test]
    fn annulus_comparison_green_atom_holds() {
        let x = pt(vec![0.0, 1.0]);
        let u = green_atom_field();
        // gamma = 1/2 demands R > 2 x_N / (sqrt(3)/2 - 1/2) ~ 5.46 x_N
        let (lhs, rhs, holds) =
            annulus_comparison(&u, 0.0, &x, 6.0 * x.height(), 0.5, &QuadratureSpec::default())
                .unwrap();
        assert!(holds, "lhs = {lhs}, rhs = {rhs}");
        assert!(lhs > 0.0 && rhs > 0.0);
    }

    #[test]
    fn annulus_comparison_rejects_bad_preconditions() {
        let x = pt(vec![0.0, 1.0]);
        let u = field(|_| 1.0);
        assert!(annulus_comparison(&u, 0.0, &x, 4.0, 1.5, &QuadratureSpec::default()).is_err());
        // R too small for gamma = 1/2: threshold 2 max(1, 1/(sqrt(3)/2 - 1/2))
        assert!(annulus_comparison(&u, 0.0, &x, 1.0, 0.5, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn annulus_split_zero_field() {
        let x = pt(vec![0.0, 0.5]);
        let u = field(|_| 0.0);
        let (lhs, rhs, holds) =
            annulus_split_bound(&u, &x, 8.0, 0.75, &QuadratureSpec::default()).unwrap();
        assert_eq!(lhs, 0.0);
        assert_eq!(rhs, 0.0);
        assert!(holds);
    }

    #[test]
    fn annulus_split_constant_field_holds() {
        let x = pt(vec![0.0, 1.0]);
        let u = field(|_| 1.0);
        let (lhs, rhs, holds) =
            annulus_split_bound(&u, &x, 8.0, 0.75, &QuadratureSpec::default()).unwrap();
        assert!(holds, "lhs = {lhs}, rhs = {rhs}");
        assert!(lhs > 0.0);
    }

    #[test]
    fn annulus_split_poisson_bump_holds() {
        let nu = load_measure(
            r#"{"dim":2,"side":"boundary","density":{"name":"bump",
                "params":{"center":[0.0],"radius":1.0},
                "support":{"box":{"lo":[-1.0],"hi":[1.0]}}}}"#,
        )
        .unwrap();
        let t = RepresentationTriple::new(2, 0.0, Some(nu), None).unwrap();
        let u = represent(&t, &QuadratureSpec::default());
        let x = pt(vec![0.0, 1.0]);
        // tau = 0.8 demands R > 2 tau/(1-tau) x_N = 8 x_N strictly
        let (lhs, rhs, holds) =
            annulus_split_bound(&u, &x, 10.0 * x.height(), 0.8, &QuadratureSpec::default())
                .unwrap();
        assert!(holds, "lhs = {lhs}, rhs = {rhs}");
    }

    #[test]
    fn annulus_split_rejects_bad_preconditions() {
        let x = pt(vec![0.0, 1.0]);
        let u = field(|_| 1.0);
        assert!(annulus_split_bound(&u, &x, 8.0, 0.5, &QuadratureSpec::default()).is_err());
        assert!(annulus_split_bound(&u, &x, 1.0, 0.75, &QuadratureSpec::default()).is_err());
    }
}

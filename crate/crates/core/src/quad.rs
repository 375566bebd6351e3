//! Quadrature toolbox: Gauss-Legendre rules (nodes computed by Newton
//! iteration, cached per order), adaptive 1-D and box subdivision, seeded
//! Halton quasi-Monte Carlo with Cranley-Patterson rotation, and
//! low-discrepancy sphere direction sets.

use crate::{Error, Result};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

static GL_CACHE: Lazy<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    assert!(order >= 1);
    let mut cache = GL_CACHE.lock().unwrap();
    cache
        .entry(order)
        .or_insert_with(|| Arc::new(compute_gl(order)))
        .clone()
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn compute_gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // ascending order
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| nodes[a].partial_cmp(&nodes[b]).unwrap());
    (
        idx.iter().map(|&i| nodes[i]).collect(),
        idx.iter().map(|&i| weights[i]).collect(),
    )
}

/// Fixed-order Gauss-Legendre on `[a, b]`.
pub fn gl_integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize) -> f64 {
    let rule = gauss_legendre(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive 1-D quadrature by interval bisection with an embedded
/// GL-16 error estimate.
pub fn adaptive_1d<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
    max_subdivisions: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let coarse = gl_integrate(f, a, b, 16);
    let scale = coarse.abs().max(abs_floor);
    let mut budget = max_subdivisions as isize;
    let v = adaptive_1d_rec(
        f,
        a,
        b,
        coarse,
        rel_tol * scale + abs_floor,
        &mut budget,
    );
    if budget < 0 {
        return Err(Error::Quadrature(format!(
            "1-D subdivision budget exhausted on [{a}, {b}]"
        )));
    }
    Ok(v)
}

fn adaptive_1d_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    budget: &mut isize,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = gl_integrate(f, a, m, 16);
    let right = gl_integrate(f, m, b, 16);
    let refined = left + right;
    *budget -= 1;
    if (refined - whole).abs() <= tol || *budget < 0 || (b - a) < 1e-14 * (b.abs() + a.abs() + 1.0)
    {
        return refined;
    }
    adaptive_1d_rec(f, a, m, left, tol * 0.5, budget)
        + adaptive_1d_rec(f, m, b, right, tol * 0.5, budget)
}

/// Tensor-product Gauss-Legendre over an axis-aligned box.
pub fn tensor_gl<F: Fn(&[f64]) -> f64>(f: &F, lo: &[f64], hi: &[f64], order: usize) -> f64 {
    let d = lo.len();
    assert_eq!(hi.len(), d);
    let rule = gauss_legendre(order);
    let mut mids = vec![0.0; d];
    let mut halves = vec![0.0; d];
    let mut vol_scale = 1.0;
    for i in 0..d {
        mids[i] = 0.5 * (lo[i] + hi[i]);
        halves[i] = 0.5 * (hi[i] - lo[i]);
        vol_scale *= halves[i];
    }
    if vol_scale == 0.0 {
        return 0.0;
    }
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for i in 0..d {
            point[i] = mids[i] + halves[i] * rule.0[idx[i]];
            w *= rule.1[idx[i]];
        }
        acc += w * f(&point);
        // advance the multi-index
        let mut axis = 0;
        loop {
            if axis == d {
                return acc * vol_scale;
            }
            idx[axis] += 1;
            if idx[axis] < order {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Adaptive box quadrature: recursive bisection along the widest axis with
/// an embedded tensor GL-6 vs GL-9 error estimate per cell. Absolute
/// tolerance; the caller chooses the scale.
pub fn adaptive_box<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    abs_tol: f64,
    max_cells: usize,
) -> Result<f64> {
    let mut budget = max_cells as isize;
    let v = adaptive_box_rec(f, lo, hi, abs_tol, &mut budget);
    if budget < 0 {
        return Err(Error::Quadrature(
            "box subdivision budget exhausted".into(),
        ));
    }
    Ok(v)
}

fn adaptive_box_rec<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    tol: f64,
    budget: &mut isize,
) -> f64 {
    let d = lo.len();
    let coarse = tensor_gl(f, lo, hi, 6);
    let fine = tensor_gl(f, lo, hi, 9);
    *budget -= 1;
    let mut axis = 0;
    let mut width = hi[0] - lo[0];
    for i in 1..d {
        if hi[i] - lo[i] > width {
            width = hi[i] - lo[i];
            axis = i;
        }
    }
    if (fine - coarse).abs() <= tol || *budget < 0 || width < 1e-12 {
        return fine;
    }
    let mid = 0.5 * (lo[axis] + hi[axis]);
    let mut hi_left = hi.to_vec();
    hi_left[axis] = mid;
    let mut lo_right = lo.to_vec();
    lo_right[axis] = mid;
    adaptive_box_rec(f, lo, &hi_left, tol * 0.5, budget)
        + adaptive_box_rec(f, &lo_right, hi, tol * 0.5, budget)
}

/// Globally adaptive box quadrature: cells live in a priority queue keyed by
/// their embedded GL-6 vs GL-9 error estimate, and the worst cell is bisected
/// along its widest axis until the summed estimate meets the absolute
/// tolerance. Unlike the recursive variant with volume-proportional
/// tolerances, this converges on integrable corner singularities, whose cell
/// errors shrink with the cell mass rather than the cell volume.
pub fn adaptive_box_queue<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    abs_tol: f64,
    max_cells: usize,
) -> Result<f64> {
    struct Cell {
        err: f64,
        fine: f64,
        lo: Vec<f64>,
        hi: Vec<f64>,
    }
    impl PartialEq for Cell {
        fn eq(&self, other: &Self) -> bool {
            self.err == other.err
        }
    }
    impl Eq for Cell {}
    impl PartialOrd for Cell {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Cell {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.err.total_cmp(&other.err)
        }
    }
    let make = |clo: Vec<f64>, chi: Vec<f64>| -> Result<Cell> {
        let coarse = tensor_gl(f, &clo, &chi, 6);
        let fine = tensor_gl(f, &clo, &chi, 9);
        if !fine.is_finite() || !coarse.is_finite() {
            return Err(Error::Quadrature("non-finite integrand sample".into()));
        }
        Ok(Cell {
            err: (fine - coarse).abs(),
            fine,
            lo: clo,
            hi: chi,
        })
    };
    let mut heap = std::collections::BinaryHeap::new();
    let mut frozen_total = 0.0;
    let mut heap_err = 0.0;
    let first = make(lo.to_vec(), hi.to_vec())?;
    heap_err += first.err;
    heap.push(first);
    let mut cells = 1usize;
    while frozen_total + heap_err > abs_tol {
        let worst = match heap.pop() {
            Some(c) => c,
            None => break, // everything frozen at the width floor
        };
        if worst.err == 0.0 {
            // only frozen cells remain; the residual error is irreducible
            heap.push(worst);
            break;
        }
        heap_err -= worst.err;
        let d = worst.lo.len();
        let mut axis = 0;
        let mut width = worst.hi[0] - worst.lo[0];
        for i in 1..d {
            if worst.hi[i] - worst.lo[i] > width {
                width = worst.hi[i] - worst.lo[i];
                axis = i;
            }
        }
        if width < 1e-12 {
            // cannot refine further; its error is what it is
            frozen_total += worst.err;
            heap.push(Cell {
                err: 0.0,
                ..worst
            });
            continue;
        }
        if cells + 2 > max_cells {
            return Err(Error::Quadrature(
                "box subdivision budget exhausted".into(),
            ));
        }
        cells += 2;
        let mid = 0.5 * (worst.lo[axis] + worst.hi[axis]);
        let mut hi_left = worst.hi.clone();
        hi_left[axis] = mid;
        let mut lo_right = worst.lo.clone();
        lo_right[axis] = mid;
        for (clo, chi) in [(worst.lo.clone(), hi_left), (lo_right, worst.hi)] {
            let cell = make(clo, chi)?;
            heap_err += cell.err;
            heap.push(cell);
        }
    }
    Ok(heap.iter().map(|c| c.fine).sum())
}

const HALTON_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut result = 0.0;
    let mut frac = inv;
    while i > 0 {
        result += (i % base) as f64 * frac;
        i /= base;
        frac *= inv;
    }
    result
}

/// Seeded Halton sequence in `[0, 1)^dim` with a Cranley-Patterson shift
/// derived from the seed. Deterministic: the k-th point depends only on
/// `(dim, seed, k)`.
#[derive(Debug, Clone)]
pub struct Halton {
    shift: Vec<f64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= HALTON_PRIMES.len(), "Halton supports up to 10 dims");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.gen::<f64>()).collect();
        Self { shift, index: 0 }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        // skip index 0 (the all-zeros point)
        self.index += 1;
        let i = self.index;
        self.shift
            .iter()
            .enumerate()
            .map(|(d, s)| {
                let v = radical_inverse(i, HALTON_PRIMES[d]) + s;
                v - v.floor()
            })
            .collect()
    }
}

/// Quasi-Monte Carlo estimate of the integral of `f` over the box.
pub fn qmc_box<F: Fn(&[f64]) -> f64>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    n_points: usize,
    seed: u64,
) -> f64 {
    let d = lo.len();
    let mut vol = 1.0;
    for i in 0..d {
        vol *= hi[i] - lo[i];
    }
    if vol == 0.0 || n_points == 0 {
        return 0.0;
    }
    let mut seq = Halton::new(d, seed);
    let mut point = vec![0.0; d];
    let mut acc = 0.0;
    for _ in 0..n_points {
        let u = seq.next_point();
        for i in 0..d {
            point[i] = lo[i] + (hi[i] - lo[i]) * u[i];
        }
        acc += f(&point);
    }
    acc * vol / n_points as f64
}

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}

/// A seeded low-discrepancy direction set on the unit sphere `S^{dim-1}`.
///
/// Halton points are pushed through the inverse normal CDF and normalized,
/// so the set is deterministic for a given `(dim, count, seed)`.
pub fn sphere_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim >= 1);
    if dim == 1 {
        // S^0 = {-1, +1}
        return (0..count)
            .map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }])
            .collect();
    }
    let mut seq = Halton::new(dim, seed);
    let mut dirs = Vec::with_capacity(count);
    while dirs.len() < count {
        let u = seq.next_point();
        let g: Vec<f64> = u
            .iter()
            .map(|&v| inverse_normal_cdf(v.clamp(1e-12, 1.0 - 1e-12)))
            .collect();
        let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-9 {
            dirs.push(g.iter().map(|v| v / norm).collect());
        }
    }
    dirs
}

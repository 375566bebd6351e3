//! Measure data for the representation formula: finite atom lists plus
//! closed-form densities on the half-space interior or on its boundary
//! hyperplane, loaded from a small JSON document and validated on ingestion.
//!
//! Representable measures are exactly "finite atoms + named/expression
//! density with a declared support descriptor" (a compact box, or a decay
//! exponent `p` meaning `|f(y)| <= C (1 + |y|)^{-p}`). Declared decay is
//! trusted but spot-checked at 32 deterministic far-field points; a
//! factor-of-10 violation is a load error, because tail truncation downstream
//! relies on the descriptor.

use crate::expr::{self, Expr};
use crate::geometry::{unit_sphere_measure, CylinderBall};
use crate::quad::{adaptive_box, sphere_directions};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which side of the half-space the measure lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Interior,
    Boundary,
}

/// Support descriptor for a density.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// compact axis-aligned box
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `|f(y)| <= c (1 + |y|)^{-p}`; `p = +inf` means super-polynomial
    /// (checked against the majorant `c e^{-|y|}`)
    Decay { p: f64, c: f64 },
}

/// Closed-form density kinds.
#[derive(Debug, Clone)]
pub enum DensityKind {
    /// `exp(-|y|^2)`
    Gauss,
    /// indicator of a box
    UniformBox { lo: Vec<f64>, hi: Vec<f64> },
    /// `exp(1 - 1/(1 - s^2))` with `s = |y - center| / radius`, zero outside
    Bump { center: Vec<f64>, radius: f64 },
    /// user expression over the point coordinates
    Expression { source: String, ast: Expr },
}

#[derive(Debug, Clone)]
pub struct Density {
    pub kind: DensityKind,
    pub support: Support,
}

impl Density {
    /// Signed pointwise value.
    pub fn eval(&self, y: &[f64]) -> f64 {
        match &self.kind {
            DensityKind::Gauss => (-y.iter().map(|c| c * c).sum::<f64>()).exp(),
            DensityKind::UniformBox { lo, hi } => {
                let inside = y
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(v, (l, h))| *v >= *l && *v <= *h);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            DensityKind::Bump { center, radius } => {
                let s2: f64 = y
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / (radius * radius);
                if s2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - s2)).exp()
                }
            }
            DensityKind::Expression { ast, .. } => ast.eval(y),
        }
    }
}

/// A validated measure: atoms split by sign, plus an optional density.
///
/// `dim` is always the ambient half-space dimension `N`; boundary-side
/// locations have `N - 1` coordinates.
#[derive(Debug, Clone)]
pub struct Measure {
    dim: usize,
    side: Side,
    atoms_pos: Vec<(Vec<f64>, f64)>,
    atoms_neg: Vec<(Vec<f64>, f64)>,
    density: Option<Density>,
}

// --- document schema -------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeasureDoc {
    pub dim: usize,
    pub side: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<AtomDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AtomDoc {
    pub loc: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DensityDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<serde_json::Value>,
    pub support: SupportDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SupportDoc {
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub box_: Option<BoxDoc>,
    /// a number, or the string "inf"
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<serde_json::Value>,
    /// constant in the decay majorant, default 1
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BoxDoc {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

// --- loading ---------------------------------------------------------------

/// Parse, validate, and sign-split a measure document (JSON text).
pub fn load_measure(text: &str) -> Result<Measure> {
    let doc: MeasureDoc = serde_json::from_str(text)
        .map_err(|e| Error::Measure(format!("malformed document: {e}")))?;
    Measure::from_document(&doc)
}

impl Measure {
    pub fn from_document(doc: &MeasureDoc) -> Result<Self> {
        if !(2..=8).contains(&doc.dim) {
            return Err(Error::BadDimension(doc.dim));
        }
        let side = match doc.side.as_str() {
            "interior" => Side::Interior,
            "boundary" => Side::Boundary,
            other => return Err(Error::Measure(format!("unknown side '{other}'"))),
        };
        let loc_dim = match side {
            Side::Interior => doc.dim,
            Side::Boundary => doc.dim - 1,
        };
        let mut atoms_pos = Vec::new();
        let mut atoms_neg = Vec::new();
        for a in &doc.atoms {
            if a.loc.len() != loc_dim {
                return Err(Error::Measure(format!(
                    "atom location has {} coordinates, expected {}",
                    a.loc.len(),
                    loc_dim
                )));
            }
            if a.loc.iter().any(|v| !v.is_finite()) || !a.w.is_finite() {
                return Err(Error::Measure("non-finite atom data".into()));
            }
            if side == Side::Interior && a.loc[loc_dim - 1] <= 0.0 {
                return Err(Error::Measure(format!(
                    "interior atom at height {} is not strictly interior",
                    a.loc[loc_dim - 1]
                )));
            }
            if a.w > 0.0 {
                atoms_pos.push((a.loc.clone(), a.w));
            } else if a.w < 0.0 {
                atoms_neg.push((a.loc.clone(), -a.w));
            }
        }
        let density = match &doc.density {
            None => None,
            Some(d) => Some(parse_density(d, loc_dim)?),
        };
        let m = Measure {
            dim: doc.dim,
            side,
            atoms_pos,
            atoms_neg,
            density,
        };
        m.spot_check_decay()?;
        Ok(m)
    }

    /// Serialize back to the document schema. Positive atoms precede
    /// negative ones; otherwise a loaded document round-trips exactly.
    pub fn to_document(&self) -> MeasureDoc {
        let mut atoms: Vec<AtomDoc> = self
            .atoms_pos
            .iter()
            .map(|(loc, w)| AtomDoc {
                loc: loc.clone(),
                w: *w,
            })
            .collect();
        atoms.extend(self.atoms_neg.iter().map(|(loc, w)| AtomDoc {
            loc: loc.clone(),
            w: -*w,
        }));
        let density = self.density.as_ref().map(|d| {
            let support = match &d.support {
                Support::Box { lo, hi } => SupportDoc {
                    box_: Some(BoxDoc {
                        lo: lo.clone(),
                        hi: hi.clone(),
                    }),
                    decay: None,
                    c: None,
                },
                Support::Decay { p, c } => SupportDoc {
                    box_: None,
                    decay: Some(if p.is_infinite() {
                        serde_json::Value::String("inf".into())
                    } else {
                        serde_json::json!(p)
                    }),
                    c: Some(*c),
                },
            };
            match &d.kind {
                DensityKind::Gauss => DensityDoc {
                    name: Some("gauss".into()),
                    expression: None,
                    params: None,
                    support,
                },
                DensityKind::UniformBox { lo, hi } => DensityDoc {
                    name: Some("uniform_box".into()),
                    expression: None,
                    params: Some(serde_json::json!({ "lo": lo, "hi": hi })),
                    support,
                },
                DensityKind::Bump { center, radius } => DensityDoc {
                    name: Some("bump".into()),
                    expression: None,
                    params: Some(serde_json::json!({ "center": center, "radius": radius })),
                    support,
                },
                DensityKind::Expression { source, .. } => DensityDoc {
                    name: None,
                    expression: Some(source.clone()),
                    params: None,
                    support,
                },
            }
        });
        MeasureDoc {
            dim: self.dim,
            side: match self.side {
                Side::Interior => "interior".into(),
                Side::Boundary => "boundary".into(),
            },
            atoms,
            density,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Dimension of atom locations / density arguments.
    pub fn loc_dim(&self) -> usize {
        match self.side {
            Side::Interior => self.dim,
            Side::Boundary => self.dim - 1,
        }
    }

    pub fn atoms_pos(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms_pos
    }

    pub fn atoms_neg(&self) -> &[(Vec<f64>, f64)] {
        &self.atoms_neg
    }

    /// All atoms with signed weights (positive part first).
    pub fn atoms_signed(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out = self.atoms_pos.clone();
        out.extend(self.atoms_neg.iter().map(|(l, w)| (l.clone(), -w)));
        out
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms_pos.is_empty() && self.atoms_neg.is_empty() && self.density.is_none()
    }

    pub fn has_negative_part(&self) -> bool {
        !self.atoms_neg.is_empty()
    }

    /// Reject measures with a negative atom part or a density that samples
    /// negative, for positive-only contexts.
    pub fn require_nonnegative(&self) -> Result<()> {
        if !self.atoms_neg.is_empty() {
            return Err(Error::Measure(
                "negative atom weight in positive-only context".into(),
            ));
        }
        if let Some(d) = &self.density {
            for y in self.spot_points() {
                if d.eval(&y) < 0.0 {
                    return Err(Error::Measure(format!(
                        "density sampled negative at {y:?} in positive-only context"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Radius beyond which the density is negligible for tail truncation at
    /// absolute level `tol` (returns `None` when the tail never falls below
    /// `tol`, i.e. a diverging tail under the declared descriptor).
    pub fn density_tail_radius(&self, tol: f64) -> Option<f64> {
        match &self.density {
            None => Some(0.0),
            Some(d) => match &d.support {
                Support::Box { lo, hi } => {
                    let r = lo
                        .iter()
                        .chain(hi)
                        .map(|v| v.abs())
                        .fold(0.0_f64, f64::max);
                    Some(r * (lo.len() as f64).sqrt() + 1.0)
                }
                Support::Decay { p, c } => {
                    if p.is_infinite() {
                        // c e^{-r} = tol
                        Some((c / tol).ln().max(1.0))
                    } else if *p <= 0.0 {
                        None
                    } else {
                        Some(((c / tol).powf(1.0 / p) - 1.0).max(1.0))
                    }
                }
            },
        }
    }

    // deterministic far-field sample points for the descriptor spot check
    fn spot_points(&self) -> Vec<Vec<f64>> {
        let d = self.loc_dim();
        let dirs = sphere_directions(d, 32, 0xA11CE);
        dirs.into_iter()
            .enumerate()
            .map(|(i, dir)| {
                let r = 4.0 * 2f64.powf(i as f64 / 8.0); // radii 4 .. ~60
                let mut y: Vec<f64> = dir.iter().map(|v| v * r).collect();
                if self.side == Side::Interior {
                    // fold into the upper half-space
                    y[d - 1] = y[d - 1].abs().max(1e-3);
                }
                y
            })
            .collect()
    }

    fn spot_check_decay(&self) -> Result<()> {
        let d = match &self.density {
            None => return Ok(()),
            Some(d) => d,
        };
        if let Support::Decay { p, c } = d.support {
            for y in self.spot_points() {
                let r: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let bound = if p.is_infinite() {
                    c * (-r).exp()
                } else {
                    c * (1.0 + r).powf(-p)
                };
                let v = d.eval(&y).abs();
                if v > 10.0 * bound {
                    return Err(Error::Measure(format!(
                        "declared decay violated at |y| = {r:.3}: |f| = {v:.3e} > 10 * {bound:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn parse_density(doc: &DensityDoc, loc_dim: usize) -> Result<Density> {
    let support = parse_support(&doc.support, loc_dim)?;
    let kind = match (&doc.name, &doc.expression) {
        (Some(name), None) => match name.as_str() {
            "gauss" => DensityKind::Gauss,
            "uniform_box" => {
                let b = box_params(doc, loc_dim)?;
                DensityKind::UniformBox { lo: b.0, hi: b.1 }
            }
            "bump" => {
                let p = doc
                    .params
                    .as_ref()
                    .ok_or_else(|| Error::Measure("bump density needs params".into()))?;
                let center: Vec<f64> = serde_json::from_value(
                    p.get("center")
                        .cloned()
                        .ok_or_else(|| Error::Measure("bump params need center".into()))?,
                )?;
                let radius: f64 = serde_json::from_value(
                    p.get("radius")
                        .cloned()
                        .ok_or_else(|| Error::Measure("bump params need radius".into()))?,
                )?;
                if center.len() != loc_dim || radius <= 0.0 {
                    return Err(Error::Measure("bad bump parameters".into()));
                }
                DensityKind::Bump { center, radius }
            }
            other => return Err(Error::Measure(format!("unknown density '{other}'"))),
        },
        (None, Some(src)) => {
            let ast = expr::parse(src)?;
            if ast.min_dim() > loc_dim {
                return Err(Error::Measure(format!(
                    "expression references x{} but locations have {} coordinates",
                    ast.min_dim(),
                    loc_dim
                )));
            }
            DensityKind::Expression {
                source: src.clone(),
                ast,
            }
        }
        _ => {
            return Err(Error::Measure(
                "density needs exactly one of name, expression".into(),
            ))
        }
    };
    Ok(Density { kind, support })
}

fn box_params(doc: &DensityDoc, loc_dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    // uniform_box takes its box from params, or falls back to the support box
    if let Some(p) = &doc.params {
        let lo: Vec<f64> = serde_json::from_value(
            p.get("lo")
                .cloned()
                .ok_or_else(|| Error::Measure("uniform_box params need lo".into()))?,
        )?;
        let hi: Vec<f64> = serde_json::from_value(
            p.get("hi")
                .cloned()
                .ok_or_else(|| Error::Measure("uniform_box params need hi".into()))?,
        )?;
        if lo.len() != loc_dim || hi.len() != loc_dim {
            return Err(Error::Measure("uniform_box box has wrong dimension".into()));
        }
        return Ok((lo, hi));
    }
    if let Some(b) = &doc.support.box_ {
        return Ok((b.lo.clone(), b.hi.clone()));
    }
    Err(Error::Measure(
        "uniform_box needs a box in params or support".into(),
    ))
}

fn parse_support(doc: &SupportDoc, loc_dim: usize) -> Result<Support> {
    match (&doc.box_, &doc.decay) {
        (Some(b), None) => {
            if b.lo.len() != loc_dim || b.hi.len() != loc_dim {
                return Err(Error::Measure("support box has wrong dimension".into()));
            }
            if b.lo.iter().zip(&b.hi).any(|(l, h)| l > h) {
                return Err(Error::Measure("support box has lo > hi".into()));
            }
            Ok(Support::Box {
                lo: b.lo.clone(),
                hi: b.hi.clone(),
            })
        }
        (None, Some(v)) => {
            let p = match v {
                serde_json::Value::String(s) if s == "inf" => f64::INFINITY,
                serde_json::Value::Number(n) => n
                    .as_f64()
                    .ok_or_else(|| Error::Measure("bad decay exponent".into()))?,
                _ => return Err(Error::Measure("decay must be a number or \"inf\"".into())),
            };
            let c = doc.c.unwrap_or(1.0);
            if c <= 0.0 || (!p.is_infinite() && !p.is_finite()) {
                return Err(Error::Measure("bad decay descriptor".into()));
            }
            Ok(Support::Decay { p, c })
        }
        _ => Err(Error::Measure(
            "support needs exactly one of box, decay".into(),
        )),
    }
}

// --- integration -----------------------------------------------------------

/// Integrate `g(y) * |density(y)|`-style weights over the part of a
/// cylindrical ball in the interior, in tangential polar coordinates around
/// the ball center (exact region, no indicator): radial x height by adaptive
/// 2-D quadrature, angular by a deterministic direction set.
fn integrate_interior_ball<F: Fn(&[f64]) -> f64>(
    f: &F,
    region: &CylinderBall,
    dim: usize,
    rel_tol: f64,
) -> Result<f64> {
    let d = dim - 1; // tangential dimension
    let xc = region.center.tangential().to_vec();
    let hc = region.center.height();
    let h0 = (hc - region.radius).max(0.0);
    let h1 = hc + region.radius;
    let sigma = if d == 1 { 2.0 } else { unit_sphere_measure(d) };
    let dirs: Vec<Vec<f64>> = if d == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        sphere_directions(d, 512, 0x5EED)
    };
    let nd = dirs.len() as f64;
    let integrand = |p: &[f64]| {
        let (r, h) = (p[0], p[1]);
        let mut acc = 0.0;
        let mut yy = vec![0.0; dim];
        for dir in &dirs {
            for i in 0..d {
                yy[i] = xc[i] + r * dir[i];
            }
            yy[d] = h;
            acc += f(&yy);
        }
        (acc / nd) * sigma * r.powi((d - 1) as i32)
    };
    adaptive_box(&integrand, &[0.0, h0], &[region.radius, h1], rel_tol, 400_000)
}

// every corner of the box lies in the (closed) cylindrical ball; the cyl
// norm is convex, so this certifies containment of the whole box
fn box_inside_ball(lo: &[f64], hi: &[f64], region: &CylinderBall) -> bool {
    let d = lo.len();
    for mask in 0..(1usize << d) {
        let corner: Vec<f64> = (0..d)
            .map(|i| if mask & (1 << i) != 0 { hi[i] } else { lo[i] })
            .collect();
        let tang: f64 = corner[..d - 1]
            .iter()
            .zip(region.center.tangential())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let dist = tang.max((corner[d - 1] - region.center.height()).abs());
        if dist > region.radius {
            return false;
        }
    }
    true
}

/// `Sigma_{atoms in region} y_N |w|  +  int_region y_N |density|` — the
/// local admissibility mass of the total variation.
pub fn weighted_mass(mu: &Measure, region: &CylinderBall, rel_tol: f64) -> Result<f64> {
    if mu.side != Side::Interior {
        return Err(Error::Precondition(
            "weighted_mass applies to interior measures".into(),
        ));
    }
    if mu.dim != region.center.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim,
            got: region.center.dim(),
        });
    }
    let mut total = 0.0;
    for (loc, w) in mu.atoms_pos.iter().chain(&mu.atoms_neg) {
        let p = crate::geometry::HalfSpacePoint::new(loc.clone())?;
        if region.contains(&p) {
            total += loc[mu.dim - 1] * w;
        }
    }
    if let Some(d) = &mu.density {
        let d = d.clone();
        let dim = mu.dim;
        let f = move |y: &[f64]| y[dim - 1] * d.eval(y).abs().max(0.0);
        let scale = (total.abs() + region.radius).max(1.0);
        // if the support box sits inside the region, integrate over the box
        // directly: avoids the region-boundary geometry entirely
        if let Some(Density {
            support: Support::Box { lo, hi },
            ..
        }) = &mu.density
        {
            if box_inside_ball(lo, hi, region) {
                let lo_c: Vec<f64> = lo
                    .iter()
                    .enumerate()
                    .map(|(i, v)| if i == dim - 1 { v.max(0.0) } else { *v })
                    .collect();
                total += adaptive_box(&f, &lo_c, hi, rel_tol * scale, 400_000)?;
                return Ok(total);
            }
        }
        total += integrate_interior_ball(&f, region, dim, rel_tol * scale)?;
    }
    Ok(total)
}

/// The global admissibility functional: `int y_N / (1 + |y|^N) d|mu|` for
/// interior measures, `int 1 / (1 + |y'|^N) d|nu|` for boundary ones.
/// Returns `+inf` when the declared decay cannot make the tail converge.
pub fn total_decay_functional(mu: &Measure) -> Result<f64> {
    let n = mu.dim as f64;
    let weight_interior = move |y: &[f64]| {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        y[y.len() - 1] / (1.0 + r2.powf(n / 2.0))
    };
    let weight_boundary = move |y: &[f64]| {
        let r2: f64 = y.iter().map(|v| v * v).sum();
        1.0 / (1.0 + r2.powf(n / 2.0))
    };
    let mut total = 0.0;
    for (loc, w) in mu.atoms_pos.iter().chain(&mu.atoms_neg) {
        total += w
            * match mu.side {
                Side::Interior => weight_interior(loc),
                Side::Boundary => weight_boundary(loc),
            };
    }
    let density = match &mu.density {
        None => return Ok(total),
        Some(d) => d.clone(),
    };
    // divergence check: interior needs p > 1 in the tail (integrand of the
    // radial profile ~ r^{-p}); boundary always converges for p >= 0
    if let Support::Decay { p, .. } = density.support {
        if mu.side == Side::Interior && p <= 1.0 && !p.is_infinite() {
            return Ok(f64::INFINITY);
        }
        if mu.side == Side::Boundary && p < 0.0 {
            return Ok(f64::INFINITY);
        }
    }
    let tail = mu
        .density_tail_radius(1e-12)
        .map(|r| r.max(16.0))
        .unwrap_or(f64::INFINITY);
    let radius = match &density.support {
        Support::Box { lo, hi } => lo
            .iter()
            .chain(hi)
            .map(|v| v.abs())
            .fold(0.0_f64, f64::max)
            * (lo.len() as f64).sqrt()
            + 1.0,
        Support::Decay { p, c } => {
            if p.is_infinite() {
                60.0
            } else {
                // choose R so the analytic tail bound of the weighted
                // integrand is below 1e-9: tail ~ sigma c R^{1-p}/(p-1)
                // (interior) or ~ sigma c R^{-p-1}/(p+1) (boundary)
                let sigma = unit_sphere_measure(mu.loc_dim().max(1));
                let target = 1e-9;
                match mu.side {
                    Side::Interior => (sigma * c / (target * (p - 1.0)))
                        .powf(1.0 / (p - 1.0))
                        .max(16.0),
                    Side::Boundary => (sigma * c / (target * (p + 1.0)))
                        .powf(1.0 / (p + 1.0))
                        .max(16.0),
                }
            }
        }
    };
    let radius = radius.min(tail.max(radius.min(1e4))).min(1e4);
    match mu.side {
        Side::Interior => {
            let dgt = density.clone();
            let f = move |y: &[f64]| weight_interior(y) * dgt.eval(y).abs();
            let center =
                crate::geometry::HalfSpacePoint::new(vec![0.0; mu.dim - 1].into_iter().chain([radius]).collect())?;
            // region B*_radius((0, radius)) covers {y_N in (0, 2 radius), |y'| < radius};
            // widen once more to catch the whole relevant range
            let region = CylinderBall::new(center, radius)?;
            let inner = integrate_interior_ball(&f, &region, mu.dim, 1e-8)?;
            Ok(total + inner)
        }
        Side::Boundary => {
            let d = mu.loc_dim();
            let dgt = density.clone();
            let f = move |y: &[f64]| weight_boundary(y) * dgt.eval(y).abs();
            let v = if d == 1 {
                crate::quad::adaptive_1d(&|t: f64| f(&[t]), -radius, radius, 1e-9, 1e-14, 200_000)?
            } else {
                // tangential polar around the origin
                let sigma = unit_sphere_measure(d);
                let dirs = sphere_directions(d, 512, 0x5EED);
                let nd = dirs.len() as f64;
                let g = |r: f64| {
                    let mut acc = 0.0;
                    let mut y = vec![0.0; d];
                    for dir in &dirs {
                        for i in 0..d {
                            y[i] = r * dir[i];
                        }
                        acc += f(&y);
                    }
                    (acc / nd) * sigma * r.powi((d - 1) as i32)
                };
                crate::quad::adaptive_1d(&g, 0.0, radius, 1e-9, 1e-14, 200_000)?
            };
            Ok(total + v)
        }
    }
}

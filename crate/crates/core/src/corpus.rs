//! The named example fields with their expected scan verdicts: a versioned
//! registry that feeds the verification suites. Each expectation carries the
//! statement that predicts it, so a failed check names the violated claim.

use crate::geometry::HalfSpacePoint;
use crate::measures::load_measure;
use crate::potentials::{represent, Provenance, QuadratureSpec, RepresentationTriple, ScalarField};
use crate::rings::{default_r0, scan_with_tol, RingCondition, Verdict};
use crate::weakform::{battery, default_ladder, lim_trace, mollifier_field, MollifierKind};
use crate::{Error, Result};
use serde::Serialize;
use std::sync::Arc;

/// One expected ring-scan outcome with its provenance claim.
#[derive(Debug, Clone)]
pub struct Expectation {
    pub condition: RingCondition,
    pub h: f64,
    pub verdict: Verdict,
    /// dyadic levels to scan; chosen per entry so the verdict resolves
    pub levels: usize,
    /// absolute verdict tolerance override; `None` uses the field-scaled
    /// default
    pub verdict_tol: Option<f64>,
    pub claim: &'static str,
}

/// A named example field, its dimensions, and everything the suites are
/// expected to reproduce about it.
#[derive(Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub dims: Vec<usize>,
    pub expectations: Vec<Expectation>,
    /// expected boundary-trace divergence flag, for the planar mollifier
    /// fields
    pub trace_divergent: Option<bool>,
    make: Arc<dyn Fn(usize) -> Result<ScalarField> + Send + Sync>,
}

impl std::fmt::Debug for CorpusEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorpusEntry")
            .field("name", &self.name)
            .field("dims", &self.dims)
            .finish()
    }
}

impl CorpusEntry {
    pub fn field(&self, dim: usize) -> Result<ScalarField> {
        if !self.dims.contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        (self.make)(dim)
    }
}

fn closed_form<F>(f: F) -> Arc<dyn Fn(usize) -> Result<ScalarField> + Send + Sync>
where
    F: Fn(usize, &HalfSpacePoint) -> f64 + Send + Sync + Clone + 'static,
{
    Arc::new(move |dim| {
        let f = f.clone();
        Ok(ScalarField::new(
            move |p: &HalfSpacePoint| f(dim, p),
            None,
            Provenance::Corpus,
        ))
    })
}

fn norm(p: &HalfSpacePoint) -> f64 {
    p.coords().iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn ring(
    condition: RingCondition,
    h: f64,
    verdict: Verdict,
    levels: usize,
    verdict_tol: Option<f64>,
    claim: &'static str,
) -> Expectation {
    Expectation {
        condition,
        h,
        verdict,
        levels,
        verdict_tol,
        claim,
    }
}

/// The versioned example registry.
pub fn registry() -> Vec<CorpusEntry> {
    let mut out = Vec::new();

    out.push(CorpusEntry {
        name: "linear",
        description: "u = x_N, the pure slope term",
        dims: vec![2, 3],
        expectations: vec![
            ring(
                RingCondition::Plus,
                1.0,
                Verdict::Satisfied,
                6,
                None,
                "the weighted ring deficit of the slope term is identically zero",
            ),
            ring(
                RingCondition::PlusZero,
                0.0,
                Verdict::NotSatisfied,
                8,
                None,
                "a nonzero slope is exactly what the zero-slope condition excludes",
            ),
        ],
        trace_divergent: None,
        make: closed_form(|_, p| p.height()),
    });

    out.push(CorpusEntry {
        name: "constant",
        description: "u = 1, bounded hence in the L^infinity class",
        dims: vec![2, 3],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            17,
            None,
            "essentially bounded functions satisfy the zero-slope ring condition",
        )],
        trace_divergent: None,
        make: closed_form(|_, _| 1.0),
    });

    out.push(CorpusEntry {
        name: "gauss",
        description: "u = exp(-|x|^2), a global L^p member",
        dims: vec![2, 3],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            6,
            None,
            "global L^p membership implies the zero-slope ring condition",
        )],
        trace_divergent: None,
        make: closed_form(|_, p| (-norm(p).powi(2)).exp()),
    });

    out.push(CorpusEntry {
        name: "weighted-square",
        description: "u = (1+|x|^2)^{-(N+2)/4}, so x_N |u|^2 is integrable",
        dims: vec![2, 3],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            8,
            None,
            "x_N |u|^p integrable (p = 2) implies the zero-slope ring condition",
        )],
        trace_divergent: None,
        make: closed_form(|dim, p| {
            let n = dim as f64;
            (1.0 + norm(p).powi(2)).powf(-(n + 2.0) / 4.0)
        }),
    });

    out.push(CorpusEntry {
        name: "inv-height",
        description: "u = 1/(1+x_N), so x_N |u| is bounded",
        dims: vec![2, 3],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            10,
            None,
            "x_N |u| bounded implies the zero-slope ring condition",
        )],
        trace_divergent: None,
        make: closed_form(|_, p| 1.0 / (1.0 + p.height())),
    });

    out.push(CorpusEntry {
        name: "sublinear",
        description: "u = |x|^{1/2}, sublinear growth of order p = 1/2",
        dims: vec![2, 3],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            12,
            // O(R^{-1/2}) decay cannot reach the default tolerance at desk
            // scale; the verdict leans on the log-log slope, so the tolerance
            // only needs to sit above the reachable minimum (~0.37 in 3-d)
            Some(0.5),
            "growth |u| <= c |x|^p with p < 1 implies the zero-slope ring condition",
        )],
        trace_divergent: None,
        make: closed_form(|_, p| norm(p).sqrt()),
    });

    out.push(CorpusEntry {
        name: "morrey",
        description: "u = (1+|x|)^{-1}, a Campanato-Morrey class member",
        dims: vec![2, 3],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            10,
            None,
            "Morrey-class membership implies the zero-slope ring condition",
        )],
        trace_divergent: None,
        make: closed_form(|_, p| 1.0 / (1.0 + norm(p))),
    });

    out.push(CorpusEntry {
        name: "unotl1c",
        description: "u = |x|^{-N} (1 - N x_N^2/|x|^2), harmonic but not \
                      locally integrable up to the boundary",
        // the boundary singularity at the origin makes the two-dimensional
        // ring quadrature in 3-d prohibitively slow; the planar case already
        // exercises the phenomenon
        dims: vec![2],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            8,
            None,
            "a harmonic field with |x|^{-N} decay satisfies the zero-slope ring \
             condition even though it fails boundary-local integrability",
        )],
        trace_divergent: None,
        make: closed_form(|dim, p| {
            let r = norm(p);
            if r < 1e-12 {
                return 0.0;
            }
            let n = dim as f64;
            let t = p.height() / r;
            (1.0 - n * t * t) / r.powf(n)
        }),
    });

    out.push(CorpusEntry {
        name: "neg-inv-square",
        description: "u = -|x|^{-2} in the plane: superharmonic, sign-definite, \
                      not integrable up to the boundary",
        dims: vec![2],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            8,
            None,
            "|x|^{-2} decay gives an O(R^{-3}) weighted ring integrand",
        )],
        trace_divergent: None,
        make: closed_form(|_, p| {
            let r2 = norm(p).powi(2);
            if r2 < 1e-24 {
                return f64::NEG_INFINITY;
            }
            -1.0 / r2
        }),
    });

    let moll = [
        ("mollifier-dipole", MollifierKind::Dipole, false),
        ("mollifier-dipole-plus", MollifierKind::DipolePlus, true),
        ("mollifier-unscaled", MollifierKind::Unscaled, false),
        ("mollifier-unscaled-plus", MollifierKind::UnscaledPlus, false),
    ];
    for (name, kind, diverges) in moll {
        out.push(CorpusEntry {
            name,
            description: "planar mollifier field separating the trace of a \
                          field from the trace of its positive part",
            dims: vec![2],
            expectations: vec![],
            trace_divergent: Some(diverges),
            make: Arc::new(move |dim| {
                if dim != 2 {
                    return Err(Error::BadDimension(dim));
                }
                Ok(mollifier_field(kind))
            }),
        });
    }

    out.push(CorpusEntry {
        name: "poisson-ref",
        description: "the Poisson integral of a boundary Gaussian, the \
                      assembled boundary-data reference",
        dims: vec![2],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            8,
            None,
            "Poisson integrals of finite boundary measures carry zero slope",
        )],
        trace_divergent: Some(false),
        make: Arc::new(|dim| {
            let nu = load_measure(&format!(
                r#"{{"dim": {dim}, "side": "boundary",
                    "density": {{"name": "gauss",
                                  "support": {{"box": {{"lo": [-8.0], "hi": [8.0]}}}}}}}}"#
            ))?;
            let t = RepresentationTriple::new(dim, 0.0, Some(nu), None)?;
            let q = QuadratureSpec {
                rel_tol: 1e-5,
                ..QuadratureSpec::default()
            };
            Ok(represent(&t, &q))
        }),
    });

    out.push(CorpusEntry {
        name: "green-ref",
        description: "the Green potential of a unit interior atom, the \
                      assembled interior-data reference",
        dims: vec![2, 3],
        expectations: vec![ring(
            RingCondition::PlusZero,
            0.0,
            Verdict::Satisfied,
            8,
            None,
            "Green potentials of compactly supported measures carry zero slope",
        )],
        trace_divergent: None,
        make: Arc::new(|dim| {
            let loc: Vec<String> = (0..dim)
                .map(|i| if i + 1 == dim { "1" } else { "0" }.to_string())
                .collect();
            let mu = load_measure(&format!(
                r#"{{"dim": {dim}, "side": "interior", "atoms": [{{"loc": [{}], "w": 1.0}}]}}"#,
                loc.join(", ")
            ))?;
            let t = RepresentationTriple::new(dim, 0.0, None, Some(mu))?;
            let q = QuadratureSpec {
                rel_tol: 1e-5,
                ..QuadratureSpec::default()
            };
            Ok(represent(&t, &q))
        }),
    });

    out
}

/// Look up one entry by name.
pub fn entry(name: &str) -> Result<CorpusEntry> {
    registry()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Precondition(format!("unknown corpus entry '{name}'")))
}

/// Outcome of checking one registry expectation.
#[derive(Debug, Clone, Serialize)]
pub struct CorpusCheckResult {
    pub entry: String,
    pub dim: usize,
    pub check: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
    pub min_value: f64,
    pub slope: Option<f64>,
}

/// The standard scan center for corpus checks: the unit point on the height
/// axis.
pub fn standard_center(dim: usize) -> Result<HalfSpacePoint> {
    let mut c = vec![0.0; dim];
    c[dim - 1] = 1.0;
    HalfSpacePoint::new(c)
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Satisfied => "satisfied",
        Verdict::NotSatisfied => "not-satisfied",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Run every expectation of one entry in one dimension.
pub fn run_entry(e: &CorpusEntry, dim: usize, q: &QuadratureSpec) -> Result<Vec<CorpusCheckResult>> {
    let u = e.field(dim)?;
    let x = standard_center(dim)?;
    let mut out = Vec::new();
    for exp in &e.expectations {
        let rep = scan_with_tol(
            &u,
            exp.h,
            &x,
            exp.condition,
            default_r0(&x),
            exp.levels,
            q,
            exp.verdict_tol,
        )?;
        out.push(CorpusCheckResult {
            entry: e.name.to_string(),
            dim,
            check: exp.condition.tag().to_string(),
            expected: verdict_str(exp.verdict).to_string(),
            actual: verdict_str(rep.verdict).to_string(),
            passed: rep.verdict == exp.verdict,
            min_value: rep.min_value,
            slope: rep.slope,
        });
    }
    if let Some(expected_divergent) = e.trace_divergent {
        if dim == 2 {
            let psi = battery(2)?.remove(0);
            let rep = lim_trace(&u, &psi, &default_ladder(), None, q)?;
            out.push(CorpusCheckResult {
                entry: e.name.to_string(),
                dim,
                check: "trace".to_string(),
                expected: if expected_divergent {
                    "divergent"
                } else {
                    "convergent"
                }
                .to_string(),
                actual: if rep.divergent {
                    "divergent"
                } else {
                    "convergent"
                }
                .to_string(),
                passed: rep.divergent == expected_divergent,
                min_value: rep.values.last().copied().unwrap_or(f64::NAN),
                slope: None,
            });
        }
    }
    Ok(out)
}

/// Run the whole registry; the corpus's sole contract is that every row
/// passes.
pub fn run_all(q: &QuadratureSpec) -> Result<Vec<CorpusCheckResult>> {
    let mut out = Vec::new();
    for e in registry() {
        for &dim in &e.dims {
            out.extend(run_entry(&e, dim, q)?);
        }
    }
    Ok(out)
}

/// Registry metadata as a JSON document for docs and the CLI dump.
pub fn registry_json() -> Result<String> {
    #[derive(Serialize)]
    struct ExpDoc {
        condition: String,
        h: f64,
        verdict: String,
        levels: usize,
        verdict_tol: Option<f64>,
        claim: String,
    }
    #[derive(Serialize)]
    struct EntryDoc {
        name: String,
        description: String,
        dims: Vec<usize>,
        expectations: Vec<ExpDoc>,
        trace_divergent: Option<bool>,
    }
    let docs: Vec<EntryDoc> = registry()
        .iter()
        .map(|e| EntryDoc {
            name: e.name.to_string(),
            description: e.description.to_string(),
            dims: e.dims.clone(),
            expectations: e
                .expectations
                .iter()
                .map(|x| ExpDoc {
                    condition: x.condition.tag().to_string(),
                    h: x.h,
                    verdict: verdict_str(x.verdict).to_string(),
                    levels: x.levels,
                    verdict_tol: x.verdict_tol,
                    claim: x.claim.to_string(),
                })
                .collect(),
            trace_divergent: e.trace_divergent,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&docs)?)
}

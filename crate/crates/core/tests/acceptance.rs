//! The acceptance gate: one test per release criterion, each with pinned
//! tolerances and a single pass/fail line on stdout.

use halfspace::corpus::{self, standard_center};
use halfspace::geometry::{Constants, HalfSpacePoint, Regularization};
use halfspace::huber::{
    annulus_comparison, annulus_split_bound, lift, spherical_mean, unlift, LiftedPoint,
};
use halfspace::kernels::{audit, green, poisson};
use halfspace::measures::load_measure;
use halfspace::potentials::{
    estimate_h_dim, lower_bound_check, poisson_integral, represent, sample_cloud, Provenance,
};
use halfspace::quad::{adaptive_box, Halton};
use halfspace::rings::{default_r0, green_ring_integral, scan, RingCondition, Verdict};
use halfspace::weakform::{
    battery, lim_trace, mollifier_bounds, mollifier_field, weak_residual, MollifierKind,
    TestFunction,
};
use halfspace::{QuadratureSpec, RepresentationTriple, ScalarField};

fn gate(criterion: &str, ok: bool, detail: &str) {
    println!(
        "acceptance {criterion}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{criterion} failed: {detail}");
}

fn q_rel(rel: f64) -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: rel,
        ..QuadratureSpec::default()
    }
}

/// The reference data set `(h = 0.3, nu = boundary Gaussian, mu = unit atom
/// on the height axis)` used by the round-trip criterion.
fn reference_triple(dim: usize) -> RepresentationTriple {
    let d = dim - 1;
    let lo: Vec<String> = (0..d).map(|_| "-8.0".to_string()).collect();
    let hi: Vec<String> = (0..d).map(|_| "8.0".to_string()).collect();
    let nu = load_measure(&format!(
        r#"{{"dim": {dim}, "side": "boundary",
            "density": {{"name": "gauss", "support": {{"box": {{"lo": [{}], "hi": [{}]}}}}}}}}"#,
        lo.join(","),
        hi.join(",")
    ))
    .unwrap();
    let loc: Vec<String> = (0..dim)
        .map(|i| if i + 1 == dim { "1.0" } else { "0.0" }.to_string())
        .collect();
    let mu = load_measure(&format!(
        r#"{{"dim": {dim}, "side": "interior", "atoms": [{{"loc": [{}], "w": 1.0}}]}}"#,
        loc.join(",")
    ))
    .unwrap();
    RepresentationTriple::new(dim, 0.3, Some(nu), Some(mu)).unwrap()
}

#[test]
fn criterion_01_kernel_audit() {
    let mut worst_sym = 0.0f64;
    let mut worst_grad = 0.0f64;
    let mut violations = 0usize;
    let mut ok = true;
    for dim in 2..=5 {
        let rep = audit(dim, 1000, 7).unwrap();
        worst_sym = worst_sym.max(rep.max_symmetry_rel_err);
        worst_grad = worst_grad.max(rep.max_gradient_rel_err);
        violations += rep.violations();
        ok &= rep.clean();
    }
    gate(
        "01 kernel-audit",
        ok,
        &format!(
            "dims 2-5, 1000 samples each: symmetry {worst_sym:.2e} <= 1e-12, \
             gradient-vs-FD {worst_grad:.2e} <= 1e-6, {violations} bound violations"
        ),
    );
}

#[test]
fn criterion_02_poisson_normalization() {
    // Lebesgue boundary measure truncated at 1e7: the missing tail weighs
    // less than 3e-7 of the unit mass at the probe heights used here
    let q = q_rel(1e-8);
    let mut worst = 0.0f64;
    for dim in [2usize, 3] {
        let d = dim - 1;
        let l = 1e7;
        let lo: Vec<String> = (0..d).map(|_| format!("{}", -l)).collect();
        let hi: Vec<String> = (0..d).map(|_| format!("{l}")).collect();
        let nu = load_measure(&format!(
            r#"{{"dim": {dim}, "side": "boundary",
                "density": {{"name": "uniform_box",
                              "support": {{"box": {{"lo": [{}], "hi": [{}]}}}}}}}}"#,
            lo.join(","),
            hi.join(",")
        ))
        .unwrap();
        for k in 0..10 {
            let mut c = vec![0.0; dim];
            c[0] = -2.0 + 0.45 * k as f64;
            c[dim - 1] = 0.03 + 0.02 * k as f64;
            let x = HalfSpacePoint::new(c).unwrap();
            let v = poisson_integral(&nu, &x, &q).unwrap();
            worst = worst.max((v - 1.0).abs());
        }
    }
    gate(
        "02 poisson-normalization",
        worst <= 1e-6,
        &format!("max |int K - 1| = {worst:.2e} over 10 points in each of N = 2, 3"),
    );
}

#[test]
fn criterion_03_kernel_asymptotics() {
    let rho = 1e4;
    let mut worst = 0.0f64;
    for dim in 2..=5 {
        let c = Constants::new(dim).unwrap();
        let mut xc = vec![0.3; dim];
        xc[dim - 1] = 1.2;
        let x = HalfSpacePoint::new(xc).unwrap();
        let target = c.c_n_prime * 1.2;
        let n = dim as f64;
        // far interior rays with distinct inclinations
        for tilt in [0.2f64, 1.0, 4.0] {
            let mut dir = vec![1.0; dim];
            dir[dim - 1] = tilt;
            let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>();
            let norm = norm.sqrt();
            let y: Vec<f64> = dir.iter().map(|v| v / norm * rho).collect();
            let yn = y[dim - 1];
            let yp = HalfSpacePoint::new(y).unwrap();
            let g = green(&x, &yp, Regularization::ZERO).unwrap();
            worst = worst.max((g * rho.powf(n) / yn / target - 1.0).abs());
        }
        // far boundary rays
        for spread in [1usize, 2] {
            let mut dir = vec![0.0; dim - 1];
            for (i, v) in dir.iter_mut().enumerate() {
                *v = if i < spread { 1.0 } else { 0.0 };
            }
            let norm: f64 = dir.iter().map(|v| v * v).sum::<f64>();
            let norm = norm.sqrt().max(1.0);
            let yprime: Vec<f64> = dir.iter().map(|v| v / norm * rho).collect();
            let k = poisson(&x, &yprime, Regularization::ZERO).unwrap();
            worst = worst.max((k * rho.powf(n) / target - 1.0).abs());
        }
    }
    gate(
        "03 kernel-asymptotics",
        worst < 1e-2,
        &format!("max relative deviation from C'_N x_N at |y| = 1e4: {worst:.2e} (dims 2-5)"),
    );
}

#[test]
fn criterion_04_representation_round_trip() {
    let started = std::time::Instant::now();
    let q = q_rel(1e-3);
    let qf = q_rel(1e-5);
    let mut detail = String::new();
    let mut ok = true;
    for dim in [2usize, 3] {
        let t = reference_triple(dim);
        let u = represent(&t, &qf);
        let n = dim as f64;

        let tests = battery(dim).unwrap();
        let wr = weak_residual(&u, t.mu.as_ref(), t.nu.as_ref(), &tests, false, &q).unwrap();
        ok &= wr.max_residual <= 1e-3;

        let est = estimate_h_dim(&u, dim, 4, &q).unwrap();
        ok &= (est - 0.3).abs() <= 1e-2;

        let x = standard_center(dim).unwrap();
        let levels = if dim == 2 { 7 } else { 5 };
        let rep = scan(&u, 0.3, &x, RingCondition::Plus, default_r0(&x), levels, &q).unwrap();
        let slope = rep.slope.unwrap_or(f64::NAN);
        ok &= rep.verdict == Verdict::Satisfied;
        ok &= (-n - 0.7..=-n + 0.7).contains(&slope);

        let grid = sample_cloud(dim, 4, 64, 123);
        let lb = lower_bound_check(&u, &t, &grid).unwrap();
        ok &= lb.holds && lb.c0 > 0.0;

        // boundary traces against the Gaussian datum, one bump at a time
        let ladder = [1e-1, 1e-2, 1e-3, 1e-4];
        let mut worst_trace = 0.0f64;
        for psi in &tests[..5] {
            let (slo, shi) = psi.support();
            let d = dim - 1;
            let f = |yp: &[f64]| {
                psi.boundary_profile(yp) * (-yp.iter().map(|v| v * v).sum::<f64>()).exp()
            };
            let target = adaptive_box(&f, &slo[..d], &shi[..d], 1e-9, 100_000).unwrap();
            let tr = lim_trace(&u, psi, &ladder, Some(target), &q).unwrap();
            let err = (tr.limit.unwrap_or(f64::NAN) - target).abs();
            worst_trace = worst_trace.max(err);
            ok &= err <= 1e-3;
        }
        detail.push_str(&format!(
            "[N={dim}: residual {:.1e}, h {est:.4}, scan {:?} slope {slope:.2}, \
             c0 {:.2}, trace err {worst_trace:.1e}] ",
            wr.max_residual, rep.verdict, lb.c0
        ));
    }
    detail.push_str(&format!("in {:.0?}", started.elapsed()));
    gate("04 representation-round-trip", ok, detail.trim());
}

#[test]
fn criterion_05_trivial_exactness() {
    let q = q_rel(1e-6);
    let mut ok = true;
    let mut detail = String::new();
    for dim in [2usize, 3] {
        let t = RepresentationTriple::new(dim, 0.3, None, None).unwrap();
        let u = represent(&t, &q);
        let x = standard_center(dim).unwrap();

        let rep = scan(&u, 0.3, &x, RingCondition::Plus, 4.0, 4, &q).unwrap();
        let rings_zero = rep.values.iter().all(|v| *v == 0.0);
        ok &= rings_zero && rep.verdict == Verdict::Satisfied;

        let tests = battery(dim).unwrap();
        let wr = weak_residual(&u, None, None, &tests, false, &q).unwrap();
        ok &= wr.max_residual <= 1e-5;

        let tr = lim_trace(&u, &tests[0], &[1e-1, 1e-2, 1e-3], None, &q).unwrap();
        let trace = tr.limit.unwrap_or(f64::NAN).abs();
        ok &= trace <= 1e-6;

        let v = lift(&u, dim);
        let mut worst_lift = 0.0f64;
        let mut seq = Halton::new(dim + 2, 5);
        for _ in 0..50 {
            let p = seq.next_point();
            let tang: Vec<f64> = (0..dim - 1).map(|i| 4.0 * (p[i] - 0.5)).collect();
            let bar = [
                0.05 + 3.0 * p[dim - 1],
                4.0 * (p[dim] - 0.5),
                4.0 * (p[dim + 1] - 0.5),
            ];
            let val = v.eval(&LiftedPoint::new(tang, bar));
            worst_lift = worst_lift.max((val - 0.3).abs());
        }
        ok &= worst_lift <= 1e-12;

        detail.push_str(&format!(
            "[N={dim}: rings exactly zero {rings_zero}, residual {:.1e}, \
             trace {trace:.1e}, lift excess {worst_lift:.1e}] ",
            wr.max_residual
        ));
    }
    gate("05 trivial-exactness", ok, detail.trim());
}

#[test]
fn criterion_06_green_ring_normalization() {
    let q = q_rel(1e-4);
    let x = standard_center(2).unwrap();
    let mut ok = true;

    let one = ScalarField::new(|_: &HalfSpacePoint| 1.0, None, Provenance::User);
    let mut worst_unit = 0.0f64;
    for r in [8.0, 16.0, 32.0] {
        let v = green_ring_integral(&one, &x, r, &q).unwrap();
        worst_unit = worst_unit.max((v - 1.0).abs());
    }
    ok &= worst_unit <= 0.02;

    let affine = ScalarField::new(
        |p: &HalfSpacePoint| 2.0 + 3.0 * p.height(),
        None,
        Provenance::User,
    );
    let v_affine = green_ring_integral(&affine, &x, 8.0, &q).unwrap();
    ok &= (v_affine - 5.0).abs() <= 0.25;

    // the Green potential of a point mass dies along the rings; the dyadic
    // decay rate is 1/R, so the R = 64 level sits at 1/8 of the R = 8 level
    let pole = HalfSpacePoint::new(vec![0.0, 2.0]).unwrap();
    let gfield = ScalarField::new(
        move |p: &HalfSpacePoint| green(&pole, p, Regularization::ZERO).unwrap_or(f64::INFINITY),
        None,
        Provenance::User,
    );
    let g8 = green_ring_integral(&gfield, &x, 8.0, &q).unwrap();
    let g64 = green_ring_integral(&gfield, &x, 64.0, &q).unwrap();
    let decay = g64 / g8;
    ok &= decay <= 0.15 && decay > 0.0;

    gate(
        "06 green-ring-normalization",
        ok,
        &format!(
            "unit field off by {worst_unit:.1e} (<= 2e-2), affine field {v_affine:.3} vs 5 \
             (<= 5%), point-mass decay ratio R=64/R=8 {decay:.3} <= 0.15"
        ),
    );
}

/// The corpus members that are superharmonic in a given dimension, hence
/// subject to the lifted mean-value inequality.
fn superharmonic_suite() -> Vec<(&'static str, usize)> {
    vec![
        ("linear", 2),
        ("linear", 3),
        ("constant", 2),
        ("constant", 3),
        ("green-ref", 2),
        ("green-ref", 3),
        ("poisson-ref", 2),
        ("neg-inv-square", 2),
        // (1+|x|)^{-1} is superharmonic only from dimension 3 on
        ("morrey", 3),
    ]
}

#[test]
fn criterion_07_lifted_mean_values() {
    let q = q_rel(1e-3);
    let mut ok = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut annulus_failures = 0usize;

    // lift/unlift round trip on a quadrature-backed field
    let t = reference_triple(2);
    let u0 = represent(&t, &q);
    let w = unlift(&lift(&u0, 2)).unwrap();
    let mut worst_rt = 0.0f64;
    for p in sample_cloud(2, 3, 32, 9) {
        let a = u0.eval(&p);
        let b = w.eval(&p);
        worst_rt = worst_rt.max((a - b).abs() / a.abs().max(1.0));
    }
    ok &= worst_rt <= 1e-12;

    for (name, dim) in superharmonic_suite() {
        let u = corpus::entry(name).unwrap().field(dim).unwrap();
        let v = lift(&u, dim);
        let mut seq = Halton::new(dim + 3, 31 + dim as u64);
        let mut done = 0;
        while done < 20 {
            let p = seq.next_point();
            let tang: Vec<f64> = (0..dim - 1).map(|i| 3.0 * (p[i] - 0.5)).collect();
            let bar = [
                0.4 + 1.2 * p[dim - 1],
                1.6 * (p[dim] - 0.5),
                1.6 * (p[dim + 1] - 0.5),
            ];
            let center = LiftedPoint::new(tang.clone(), bar);
            let rho = center.bar_norm();
            let r = 0.25 * rho;
            // keep clear of the lifted point mass of the Green reference,
            // which sits at tangential zero, |bar| = 1
            let tn: f64 = tang.iter().map(|v| v * v).sum::<f64>();
            if (tn + (rho - 1.0).powi(2)).sqrt() < r + 0.2 {
                continue;
            }
            let centre_val = v.eval(&center);
            let mean = spherical_mean(&v, &center, r, &q).unwrap();
            let excess = (mean - centre_val) / (1.0 + centre_val.abs());
            worst_excess = worst_excess.max(excess);
            ok &= excess <= 5e-3;
            done += 1;
        }

        let x = standard_center(dim).unwrap();
        let (lhs, rhs, holds) = annulus_comparison(&u, 0.0, &x, 8.0, 0.5, &q).unwrap();
        if !holds {
            annulus_failures += 1;
            eprintln!("annulus comparison failed on {name} N={dim}: {lhs} < {rhs}");
        }
        let (slhs, srhs, sholds) = annulus_split_bound(&u, &x, 12.0, 0.8, &q).unwrap();
        if !sholds {
            annulus_failures += 1;
            eprintln!("annulus split bound failed on {name} N={dim}: {slhs} vs {srhs}");
        }
    }
    ok &= annulus_failures == 0;
    gate(
        "07 lifted-mean-values",
        ok,
        &format!(
            "round-trip error {worst_rt:.1e} <= 1e-12, worst mean-value excess \
             {worst_excess:.1e} <= 5e-3 at 20 probes per field, {annulus_failures} \
             annulus violations"
        ),
    );
}

#[test]
fn criterion_08_trace_counterexample() {
    let q = q_rel(1e-6);
    let psi = TestFunction::product(2, vec![0.0], 1.0, 1.0).unwrap();
    let ladder = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let rows = mollifier_bounds(&psi, &ladder, &q).unwrap();
    let upper_ok = rows.iter().all(|r| r.dipole_within_bound);
    let lower_ok = rows
        .iter()
        .filter(|r| r.eps <= 1e-2)
        .all(|r| r.dipole_plus_exceeds);

    let trace_ladder = [1e-1, 1e-2, 1e-3, 1e-4];
    let plus = mollifier_field(MollifierKind::DipolePlus);
    let tr_plus = lim_trace(&plus, &psi, &trace_ladder, None, &q).unwrap();

    let vplus = mollifier_field(MollifierKind::UnscaledPlus);
    let psi0 = psi.boundary_profile(&[0.0]);
    let tr_v = lim_trace(&vplus, &psi, &trace_ladder, Some(psi0), &q).unwrap();
    let v_err = (tr_v.limit.unwrap_or(f64::NAN) - psi0).abs();

    let ok = upper_ok && lower_ok && tr_plus.divergent && !tr_v.divergent && v_err <= 1e-2;
    gate(
        "08 trace-counterexample",
        ok,
        &format!(
            "dipole pairing within 2*sqrt(eps)*sup|psi'| on all {} heights, positive part \
             exceeds psi(0)/(4 sqrt(eps)) for eps <= 1e-2, its trace flagged divergent, \
             unscaled positive part -> psi(0) within {v_err:.1e}",
            rows.len()
        ),
    );
}

#[test]
fn criterion_09_corpus_verdicts() {
    let q = QuadratureSpec::default();
    let results = corpus::run_all(&q).unwrap();
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} N={} {}", r.entry, r.dim, r.check))
        .collect();

    // the bounded field splits the conditions: the unweighted rings plateau
    // while the height-weighted rings decay like 1/R
    let cf = corpus::entry("constant").unwrap().field(2).unwrap();
    let x = standard_center(2).unwrap();
    let classical = scan(&cf, 0.0, &x, RingCondition::Classical, 4.0, 8, &q).unwrap();
    let plus_zero = scan(&cf, 0.0, &x, RingCondition::PlusZero, 4.0, 8, &q).unwrap();
    let cl_slope = classical.slope.unwrap_or(f64::NAN);
    let pz_slope = plus_zero.slope.unwrap_or(f64::NAN);
    let split_ok = classical.verdict == Verdict::NotSatisfied
        && cl_slope.abs() <= 0.1
        && (-1.2..=-0.8).contains(&pz_slope);

    let ok = failed.is_empty() && split_ok;
    gate(
        "09 corpus-verdicts",
        ok,
        &format!(
            "{}/{} registry rows match, constant field: unweighted rings {:?} slope \
             {cl_slope:.3}, height-weighted slope {pz_slope:.3}{}",
            results.len() - failed.len(),
            results.len(),
            classical.verdict,
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failed.join(", "))
            }
        ),
    );
}

#[test]
fn criterion_10_boundary_nonintegrability() {
    let q = QuadratureSpec::default();
    let entry = corpus::entry("unotl1c").unwrap();
    let u = entry.field(2).unwrap();

    // five-point Laplacian at an interior point: second-order residual
    let p = [0.35f64, 0.55];
    let lap = |h: f64| {
        let at = |dx: f64, dy: f64| {
            u.eval(&HalfSpacePoint::new(vec![p[0] + dx, p[1] + dy]).unwrap())
        };
        (at(h, 0.0) + at(-h, 0.0) + at(0.0, h) + at(0.0, -h) - 4.0 * at(0.0, 0.0)) / (h * h)
    };
    let ratio_fd = lap(2e-2) / lap(1e-2);
    let fd_ok = (2.5..=6.0).contains(&ratio_fd);

    let ring_rows = corpus::run_entry(&entry, 2, &q).unwrap();
    let ring_ok = ring_rows.iter().all(|r| r.passed);

    // |u| over the punctured half-ball, in log-polar coordinates: the area
    // element cancels the |x|^{-2} magnitude, so each decade of delta adds
    // the same increment and the total grows logarithmically
    let mass = |delta: f64| {
        let f = |s: &[f64]| {
            let r = s[0].exp();
            let (c, sn) = s[1].sin_cos();
            let y = HalfSpacePoint::new(vec![r * sn, r * c]).unwrap();
            u.eval(&y).abs() * r * r
        };
        adaptive_box(
            &f,
            &[delta.ln(), 1e-9],
            &[0.0, std::f64::consts::PI - 1e-9],
            1e-7,
            200_000,
        )
        .unwrap()
    };
    let m1 = mass(1e-1);
    let m2 = mass(1e-2);
    let m3 = mass(1e-3);
    let inc1 = m2 - m1;
    let inc2 = m3 - m2;
    let growth = m3 / m1;
    let growth_ok = growth >= 2.5 && (inc2 / inc1 - 1.0).abs() <= 0.2;

    gate(
        "10 boundary-nonintegrability",
        fd_ok && ring_ok && growth_ok,
        &format!(
            "FD Laplacian ratio {ratio_fd:.2} in [2.5, 6], ring rows pass, |u| mass \
             {m1:.3} -> {m2:.3} -> {m3:.3} (growth {growth:.2}x >= 2.5, equal log increments)"
        ),
    );
}

#[test]
fn criterion_11_deterministic_reports() {
    let run = || {
        std::process::Command::new(env!("CARGO_BIN_EXE_halfspace"))
            .args(["corpus-run", "--format", "csv", "--seed", "7"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    let ok = a.status.success() && b.status.success() && a.stdout == b.stdout
        && !a.stdout.is_empty();
    gate(
        "11 deterministic-reports",
        ok,
        &format!(
            "two seeded corpus runs: exit {:?}/{:?}, {} bytes, byte-identical {}",
            a.status.code(),
            b.status.code(),
            a.stdout.len(),
            a.stdout == b.stdout
        ),
    );
}

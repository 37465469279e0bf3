//! Acceptance gate: ten numbered criteria, one pass/fail line each. The
//! suite exercises the explicit-formula solver, the disk oracle, the
//! conserved functionals, and the contraction audit at pinned tolerances.

use num_complex::Complex64;
use szego_core::contraction::{audit, commutation_defect};
use szego_core::disk::{from_disk, integrate, invariants_disk, to_disk, IntegratorConfig};
use szego_core::flow::{boundary_norm_sqr, flow_value, invariants_exact, FlowEngine};
use szego_core::hankel::{
    commutator_bracket0_defect, hankel_apply, invariant_basis, lax_b_apply, toeplitz_apply,
};
use szego_core::rational::inner_product;
use szego_core::{HardyRational, PoleSum, PoleTerm};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pole(p: Complex64, coeff: Complex64) -> HardyRational {
    HardyRational::new(PoleSum::simple_pole(p, coeff)).unwrap()
}

fn soliton() -> HardyRational {
    pole(c(0.0, -1.0), c(1.0, 0.0))
}

fn two_pole() -> HardyRational {
    pole(c(0.0, -1.0), c(1.0, 0.0)).add(&pole(c(0.0, -2.0), c(1.0, 0.0)))
}

fn double_pole() -> HardyRational {
    HardyRational::new(PoleSum::from_terms(vec![PoleTerm {
        pole: c(0.3, -0.8),
        coeffs: vec![c(0.5, -0.2), c(1.0, 0.0)],
    }]))
    .unwrap()
}

/// Five-symbol standard family used across the criteria.
fn family() -> Vec<HardyRational> {
    vec![
        soliton(),
        two_pole(),
        double_pole(),
        pole(c(-1.2, -0.6), c(0.4, 0.9)),
        pole(c(-0.5, -1.1), c(1.0, 0.0)).add(&pole(c(0.8, -1.7), c(0.0, -0.6))),
    ]
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| -10.0 + 20.0 * k as f64 / (n - 1) as f64).collect()
}

fn soliton_exact(t: f64, z: Complex64) -> Complex64 {
    Complex64::from_polar(1.0, -t / 4.0) / (z - t / 2.0 + c(0.0, 1.0))
}

fn criterion_1() -> Result<String, String> {
    let u = soliton();
    let mut worst: f64 = 0.0;
    for &t in &[0.5, 1.0, 5.0, 20.0] {
        let engine = FlowEngine::new(&u, t).map_err(|e| e.to_string())?;
        for &x in &grid(200) {
            let z = c(x, 0.0);
            let got = engine.sample(z).map_err(|e| e.to_string())?.value;
            worst = worst.max((got - soliton_exact(t, z)).norm());
        }
    }
    if worst < 1e-10 {
        Ok(format!("max error {worst:.2e}"))
    } else {
        Err(format!("max error {worst:.2e} >= 1e-10"))
    }
}

fn criterion_2() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for u in family() {
        let engine = FlowEngine::new(&u, 0.0).map_err(|e| e.to_string())?;
        for &x in &grid(100) {
            let z = c(x, 0.0);
            let got = engine.sample(z).map_err(|e| e.to_string())?.value;
            worst = worst.max((got - u.eval(z).unwrap()).norm());
        }
    }
    if worst < 1e-12 {
        Ok(format!("max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e} >= 1e-12"))
    }
}

fn criterion_3() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for u in family() {
        let norm0 = u.norm_sqr();
        for &t in &[0.1, 1.0, 10.0, 100.0] {
            let engine = FlowEngine::new(&u, t).map_err(|e| e.to_string())?;
            let n = boundary_norm_sqr(&engine, 256).map_err(|e| e.to_string())?;
            worst = worst.max((n - norm0).abs() / norm0);
        }
    }
    if worst < 1e-6 {
        Ok(format!("max relative drift {worst:.2e}"))
    } else {
        Err(format!("max relative drift {worst:.2e} >= 1e-6"))
    }
}

fn criterion_4() -> Result<String, String> {
    // Solver-vs-oracle sup discrepancy through the compare command.
    let config = szego_cli::config::RunConfig {
        initial: two_pole().as_pole_sum().clone(),
        times: vec![0.25, 1.0],
        grid: szego_cli::config::GridConfig { xmin: -10.0, xmax: 10.0, n: 201, eta: 0.0 },
        disk: szego_cli::config::DiskConfig { modes: 512, dt: 1e-3, pad: 4 },
        audit: szego_cli::config::AuditConfig { iterations: 10 },
    };
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (_, report) = szego_cli::commands::cmd_compare(&config, "acceptance", dir.path())
        .map_err(|e| e.to_string())?;
    let sup = report.iter().map(|r| r.sup_abs).fold(0.0_f64, f64::max);
    if sup >= 1e-4 {
        return Err(format!("sup discrepancy {sup:.2e} >= 1e-4"));
    }
    // RK4 order under dt halving against the soliton closed form.
    let f0 = to_disk(&soliton(), 64).map_err(|e| e.to_string())?;
    let sup_err = |dt: f64| -> Result<f64, String> {
        let cfg = IntegratorConfig { modes: 64, dt, pad: 4 };
        let f = integrate(&f0, &[0.5], &cfg).map_err(|e| e.to_string())?.checkpoints[0].1.clone();
        Ok((0..=40)
            .map(|k| {
                let x = -5.0 + 0.25 * k as f64;
                (from_disk(&f, x) - soliton_exact(0.5, c(x, 0.0))).norm()
            })
            .fold(0.0_f64, f64::max))
    };
    let order = (sup_err(0.05)? / sup_err(0.025)?).log2();
    if (3.7..=4.3).contains(&order) {
        Ok(format!("sup discrepancy {sup:.2e}, RK4 order {order:.2}"))
    } else {
        Err(format!("RK4 order {order:.2} outside [3.7, 4.3]"))
    }
}

fn criterion_5() -> Result<String, String> {
    let u = two_pole();
    let j_points = [0.1, 1.0, 10.0];
    let base = invariants_exact(&u, 0.0, &j_points).map_err(|e| e.to_string())?;
    let f0 = to_disk(&u, 256).map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig { modes: 256, dt: 1e-3, pad: 4 };
    let traj = integrate(&f0, &[0.5, 1.0], &cfg).map_err(|e| e.to_string())?;
    let mut e_drift: f64 = 0.0;
    let mut j_drift: f64 = 0.0;
    let mut lambda_drift: f64 = 0.0;
    for (t, state) in &traj.checkpoints {
        let report = invariants_disk(state, *t, &j_points).map_err(|e| e.to_string())?;
        e_drift = e_drift.max((report.energy - base.energy).abs() / base.energy);
        for ((_, jd), (_, je)) in report.j_values.iter().zip(&base.j_values) {
            j_drift = j_drift.max((jd - je).abs());
        }
        for k in 0..base.hankel_lambdas.len().min(3) {
            lambda_drift = lambda_drift.max((report.hankel_lambdas[k] - base.hankel_lambdas[k]).abs());
        }
    }
    if e_drift < 1e-6 && j_drift < 1e-5 && lambda_drift < 1e-4 {
        Ok(format!("E {e_drift:.2e}, J {j_drift:.2e}, eigs {lambda_drift:.2e}"))
    } else {
        Err(format!("E {e_drift:.2e} (1e-6), J {j_drift:.2e} (1e-5), eigs {lambda_drift:.2e} (1e-4)"))
    }
}

fn criterion_6() -> Result<String, String> {
    let mut worst_defect: f64 = 0.0;
    let mut worst_ratio: f64 = 1.0;
    for u in [soliton(), two_pole(), double_pole()] {
        let report = audit(&u, 1.0, 40).map_err(|e| e.to_string())?;
        worst_defect = worst_defect
            .max((report.q_norm - 1.0).abs())
            .max(report.isometry_defect)
            .max(report.coisometry_defect)
            .max(report.gram_defect);
        for w in report.plancherel_partials.windows(2) {
            if w[1] < w[0] - 1e-12 {
                return Err("Plancherel partial sums not nondecreasing".into());
            }
        }
        if *report.plancherel_partials.last().unwrap() > u.norm_sqr() + 1e-8 {
            return Err("Plancherel partial sums exceed the squared norm".into());
        }
        worst_ratio = worst_ratio.min(report.plancherel_ratio);
    }
    if worst_defect < 1e-8 && worst_ratio >= 0.99 {
        Ok(format!("max defect {worst_defect:.2e}, min exhaustion {worst_ratio:.4}"))
    } else {
        Err(format!("max defect {worst_defect:.2e} (1e-8), min exhaustion {worst_ratio:.4} (0.99)"))
    }
}

fn criterion_7() -> Result<String, String> {
    let probe = |p: Complex64, q: Complex64| pole(p, q);
    let triples: Vec<(HardyRational, f64, HardyRational)> = vec![
        (soliton(), 0.0, soliton()),
        (soliton(), 1.0, soliton()),
        (soliton(), 1.0, probe(c(0.5, -1.5), c(0.7, -0.3))),
        (two_pole(), 0.0, probe(c(0.0, -1.0), c(1.0, 0.0))),
        (two_pole(), 0.7, two_pole()),
        (two_pole(), 0.7, double_pole()),
        (two_pole(), 1.5, probe(c(-0.4, -0.7), c(0.2, 0.1))),
        (double_pole(), 0.3, soliton()),
        (double_pole(), 1.0, double_pole()),
        (double_pole(), 2.0, probe(c(1.1, -0.9), c(0.0, 1.0))),
    ];
    let mut worst: f64 = 0.0;
    for (u, t, f) in &triples {
        worst = worst.max(commutation_defect(u, *t, f).map_err(|e| e.to_string())?);
    }
    if worst < 1e-9 {
        Ok(format!("max defect {worst:.2e} over {} triples", triples.len()))
    } else {
        Err(format!("max defect {worst:.2e} >= 1e-9"))
    }
}

fn criterion_8() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for u in [soliton(), two_pole(), double_pole()] {
        let u_abs2 = u
            .as_pole_sum()
            .multiply(&u.as_pole_sum().conjugate())
            .map_err(|e| e.to_string())?;
        let u_conj = u.as_pole_sum().conjugate();
        let fs = [soliton(), double_pole(), pole(c(0.7, -0.9), c(1.0, -1.0))];
        for f in &fs {
            // [A*, T_b] f = (i/2pi) I+(f) P b.
            let d = commutator_bracket0_defect(&u_abs2, f).map_err(|e| e.to_string())?;
            worst = worst.max(d.max_coeff_norm());
            // [A*, B_u] f + (i/2)[A*, H_u^2] f = (1/2pi) <f, u> u.
            let bu_f = lax_b_apply(&u, f).map_err(|e| e.to_string())?;
            let comm_b = bu_f
                .astar_apply()
                .sub(&lax_b_apply(&u, &f.astar_apply()).map_err(|e| e.to_string())?);
            let h2 = |g: &HardyRational| {
                hankel_apply(&u, &hankel_apply(&u, g).unwrap()).unwrap()
            };
            let comm_h2 = h2(f).astar_apply().sub(&h2(&f.astar_apply()));
            let fu = inner_product(f.as_pole_sum(), u.as_pole_sum()).map_err(|e| e.to_string())?;
            let defect = comm_b
                .add(&comm_h2.scale(c(0.0, 0.5)))
                .sub(&u.scale(fu / TAU));
            worst = worst.max(defect.as_pole_sum().max_coeff_norm());
        }
        // H_u^2 = T_{|u|^2} - T_u T_{conj u} on the invariant-subspace basis.
        let basis = invariant_basis(&u).map_err(|e| e.to_string())?;
        for e in &basis.elems {
            let lhs = hankel_apply(&u, &hankel_apply(&u, e).unwrap()).unwrap();
            let rhs = toeplitz_apply(&u_abs2, e)
                .unwrap()
                .sub(&toeplitz_apply(u.as_pole_sum(), &toeplitz_apply(&u_conj, e).unwrap()).unwrap());
            worst = worst.max(lhs.sub(&rhs).as_pole_sum().max_coeff_norm());
        }
    }
    if worst < 1e-9 {
        Ok(format!("max defect {worst:.2e}"))
    } else {
        Err(format!("max defect {worst:.2e} >= 1e-9"))
    }
}

fn criterion_9() -> Result<String, String> {
    let u = two_pole();
    let v = pole(c(0.5, -1.5), c(0.005, 0.0));
    let base = FlowEngine::new(&u, 1.0).map_err(|e| e.to_string())?;
    let xs = grid(81);
    let base_vals: Vec<Complex64> = xs
        .iter()
        .map(|&x| base.sample(c(x, 0.0)).map(|s| s.value))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut deviations = Vec::new();
    for n in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let un = u.add(&v.scale(c(1.0 / n, 0.0)));
        let engine = FlowEngine::new(&un, 1.0).map_err(|e| e.to_string())?;
        let mut sup: f64 = 0.0;
        for (&x, b) in xs.iter().zip(&base_vals) {
            let value = engine.sample(c(x, 0.0)).map_err(|e| e.to_string())?.value;
            sup = sup.max((value - b).norm());
        }
        deviations.push(sup);
    }
    let decreasing = deviations.windows(2).all(|w| w[1] < w[0]);
    let last = *deviations.last().unwrap();
    let shown: Vec<String> = deviations.iter().map(|d| format!("{d:.2e}")).collect();
    if decreasing && last < 1e-3 {
        Ok(format!("deviations [{}]", shown.join(", ")))
    } else {
        Err(format!(
            "deviations [{}] (need strictly decreasing, final < 1e-3)",
            shown.join(", ")
        ))
    }
}

fn criterion_10() -> Result<String, String> {
    let u = two_pole();
    let t = 0.8;
    let mut worst: f64 = 0.0;
    let points = [c(-2.0, 0.5), c(0.3, 0.0), c(4.0, 1.2)];
    // Gauge: Phi(t)(e^{i theta} u) = e^{i theta} Phi(t) u.
    let phase = Complex64::from_polar(1.0, 0.9);
    for &z in &points {
        let a = flow_value(&u.scale(phase), t, z).map_err(|e| e.to_string())?;
        let b = phase * flow_value(&u, t, z).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).norm());
    }
    // Scaling: Phi(t)(c u)(z) = c Phi(|c|^2 t)u(z).
    let cc = c(1.3, 0.0);
    for &z in &points {
        let a = flow_value(&u.scale(cc), t, z).map_err(|e| e.to_string())?;
        let b = cc * flow_value(&u, cc.norm_sqr() * t, z).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).norm());
    }
    // Dilation: Phi(t)(sqrt(mu) u(mu .))(z) = sqrt(mu) (Phi(mu t)u)(mu z).
    let mu = 1.7;
    let v = u.dilate(mu).scale(c(mu.sqrt(), 0.0));
    for &z in &points {
        let a = flow_value(&v, t, z).map_err(|e| e.to_string())?;
        let b = mu.sqrt() * flow_value(&u, mu * t, mu * z).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).norm());
    }
    if worst >= 1e-9 {
        return Err(format!("exact-backend symmetry defect {worst:.2e} >= 1e-9"));
    }
    // Cross-validation on the oracle: gauge covariance after integration.
    let f0 = to_disk(&u, 128).map_err(|e| e.to_string())?;
    let f0g = to_disk(&u.scale(phase), 128).map_err(|e| e.to_string())?;
    let cfg = IntegratorConfig { modes: 128, dt: 1e-3, pad: 4 };
    let a = integrate(&f0g, &[0.5], &cfg).map_err(|e| e.to_string())?.checkpoints[0].1.clone();
    let b = integrate(&f0, &[0.5], &cfg).map_err(|e| e.to_string())?.checkpoints[0].1.clone();
    let disk_defect: f64 = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if disk_defect < 1e-7 {
        Ok(format!("exact defect {worst:.2e}, oracle gauge defect {disk_defect:.2e}"))
    } else {
        Err(format!("oracle gauge defect {disk_defect:.2e} >= 1e-7"))
    }
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Result<String, String>)> = vec![
        ("1 soliton exactness", criterion_1),
        ("2 identity at t = 0", criterion_2),
        ("3 norm conservation", criterion_3),
        ("4 solver-vs-oracle agreement", criterion_4),
        ("5 conserved functionals", criterion_5),
        ("6 contraction audit", criterion_6),
        ("7 commutation relation", criterion_7),
        ("8 commutator identities", criterion_8),
        ("9 flow continuity", criterion_9),
        ("10 metamorphic symmetries", criterion_10),
    ];
    let mut failures = Vec::new();
    for (name, run) in criteria {
        let start = std::time::Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {name}: PASS ({detail}) [{secs:.1}s]"),
            Err(detail) => {
                println!("criterion {name}: FAIL ({detail}) [{secs:.1}s]");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

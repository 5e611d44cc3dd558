//! Acceptance checks, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use springrods::experiments::{run_penalty_convergence, run_stiffness_sweep, ConvergenceSetup, SweepConfig, SweepTarget};
use springrods::oracle::{analytic_solution, grid_search_minimizer, GridSpec};
use springrods::solver::{
    solve_exact, solve_projected_gradient, solve_qvi_fixed_point, vi_residual,
};
use springrods::{
    BodyForce, ConstraintVariant, DiscreteSystemF64, Geometry, Material, Mesh, PenaltyKind, ProblemSpecF64,
    SolverConfigF64, SpringLaw,
};

type Check = Result<String, String>;

fn system(spec: &ProblemSpecF64, n1: usize, n2: usize) -> DiscreteSystemF64 {
    let mesh = Mesh::uniform(spec.geometry(), n1, n2).unwrap();
    DiscreteSystemF64::assemble(&mesh, spec.material(), spec.forces())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn contact_threshold() -> Check {
    let base = ProblemSpecF64::benchmark(1.0, 1.0, 6.0, -6.0, ConstraintVariant::NonPenetration).unwrap();
    let config = SweepConfig {
        grid: (1..=38).map(|i| i as f64 / 20.0).collect(),
        target: SweepTarget::K1,
        ..SweepConfig::default()
    };
    let result = run_stiffness_sweep(&base, *base.forces(), &config).map_err(|e| e.to_string())?;
    ensure(result.failures.is_empty(), || format!("{} sweep failures", result.failures.len()))?;
    for r in &result.records {
        let touching = r.theta <= 1e-9;
        let expected = r.k <= 0.5;
        ensure(touching == expected && r.contact == expected, || {
            format!("k1 = {}: theta = {:e}, contact flag {}", r.k, r.theta, r.contact)
        })?;
    }
    Ok("contact exactly for k1 <= 0.5 on the 0.05 grid".into())
}

fn contact_branch_constancy() -> Check {
    let mut worst = 0.0f64;
    for i in 1..=10 {
        let k1 = i as f64 / 20.0;
        let spec = ProblemSpecF64::benchmark(k1, 1.0, 6.0, -6.0, ConstraintVariant::NonPenetration).unwrap();
        let sol = solve_exact(&system(&spec, 8, 8).schur_reduce().unwrap(), spec.spring(), spec.variant())
            .map_err(|e| e.to_string())?;
        let oracle = analytic_solution(&spec);
        ensure((oracle.s + 0.5).abs() <= 1e-12, || format!("oracle s = {} at k1 = {k1}", oracle.s))?;
        worst = worst.max((sol.g1 - 0.5).abs()).max((sol.g2 + 0.5).abs());
        ensure(worst <= 1e-8, || format!("k1 = {k1}: g1 = {}, g2 = {}", sol.g1, sol.g2))?;
    }
    Ok(format!("max |g - (0.5, -0.5)| = {worst:.1e}"))
}

fn rigid_translation() -> Check {
    let mut worst = 0.0f64;
    for i in 1..40 {
        for j in [1, 10, 20, 30, 39] {
            let (k1, k2) = (i as f64 / 20.0, j as f64 / 20.0);
            let spec = ProblemSpecF64::benchmark(k1, k2, 1.0, 1.0, ConstraintVariant::NonPenetration).unwrap();
            let sol = solve_exact(&system(&spec, 8, 8).schur_reduce().unwrap(), spec.spring(), spec.variant())
                .map_err(|e| e.to_string())?;
            worst = worst.max(sol.s.abs()).max((sol.theta - 1.0).abs());
            ensure(worst <= 1e-10, || format!("k = ({k1}, {k2}): s = {:e}, theta = {}", sol.s, sol.theta))?;
        }
    }
    Ok(format!("max deviation {worst:.1e} over 195 stiffness pairs"))
}

fn penalty_convergence() -> Check {
    let base = ProblemSpecF64::benchmark(1.0, 1.0, 1.0, -1.0, ConstraintVariant::NonPenetration).unwrap();
    let study = run_penalty_convergence(&base, &ConvergenceSetup::new(PenaltyKind::CompressionOnly))
        .map_err(|e| e.to_string())?;
    ensure(study.records.len() == 12, || format!("{} records", study.records.len()))?;
    for r in &study.records {
        let k = 1.0 + 2f64.powi(r.n as i32 - 3);
        let expected = (0.75 + k) / (1.0 + k);
        ensure((r.theta - expected).abs() <= 1e-9, || {
            format!("n = {}: theta = {}, expected {expected}", r.n, r.theta)
        })?;
    }
    for w in study.records[1..].windows(2) {
        ensure(w[1].error_vnorm <= w[0].error_vnorm, || {
            format!("error rises at n = {}: {} > {}", w[1].n, w[1].error_vnorm, w[0].error_vnorm)
        })?;
    }
    let last = study.records.last().unwrap().error_vnorm;
    ensure(last < 5e-3, || format!("final error {last}"))?;
    ensure(study.limit_g1.abs() <= 1e-10 && study.limit_g2.abs() <= 1e-10, || {
        format!("limit g = ({}, {})", study.limit_g1, study.limit_g2)
    })?;
    Ok(format!("theta_n matches, error at n = 12 is {last:.3e}"))
}

fn random_spec(rng: &mut ChaCha8Rng) -> ProblemSpecF64 {
    let k1 = rng.gen_range(0.01..1.99);
    let k2 = rng.gen_range(0.01..1.99);
    let f1 = rng.gen_range(-8.0..=8.0);
    let f2 = rng.gen_range(-8.0..=8.0);
    let variant = ConstraintVariant::ALL[rng.gen_range(0..4)];
    ProblemSpecF64::benchmark(k1, k2, f1, f2, variant).unwrap()
}

fn solver_triad() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let config = SolverConfigF64::default().with_tolerance(1e-10);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let spec = random_spec(&mut rng);
        let sys = system(&spec, 4, 4);
        let exact = solve_exact(&sys.schur_reduce().unwrap(), spec.spring(), spec.variant())
            .map_err(|e| format!("case {case}: exact: {e}"))?;
        let pg = solve_projected_gradient(&sys, spec.spring(), spec.variant(), None, &config)
            .map_err(|e| format!("case {case}: projected: {e}"))?;
        let qvi = solve_qvi_fixed_point(&sys, spec.spring(), spec.variant(), &config)
            .map_err(|e| format!("case {case}: qvi: {e}"))?;
        let o = analytic_solution(&spec);
        let rows = [
            [exact.g1, exact.g2, exact.theta, exact.s],
            [pg.g1, pg.g2, pg.theta, pg.s],
            [qvi.g1, qvi.g2, qvi.theta, qvi.s],
            [o.g1, o.g2, o.theta, o.s],
        ];
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                for (x, y) in a.iter().zip(b) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        ensure(worst <= 1e-6, || format!("case {case} ({:?}): deviation {worst:e}", spec.variant()))?;
    }
    Ok(format!("max pairwise deviation {worst:.1e} over 200 configs"))
}

fn complementarity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    let mut min_vi = f64::INFINITY;
    for case in 0..100 {
        let spec = random_spec(&mut rng).with_variant(ConstraintVariant::NonPenetration);
        let sys = system(&spec, 6, 3);
        let sol = solve_exact(&sys.schur_reduce().unwrap(), spec.spring(), spec.variant())
            .map_err(|e| e.to_string())?;
        let excess = sol.s + spec.spring().p(sol.theta);
        ensure(sol.theta >= -1e-10, || format!("case {case}: theta = {:e}", sol.theta))?;
        ensure(excess <= 1e-8, || format!("case {case}: s + p = {excess:e}"))?;
        ensure(excess * sol.theta <= 1e-8, || format!("case {case}: (s + p) theta = {:e}", excess * sol.theta))?;
        let r = vi_residual(&sys, spec.spring(), spec.variant(), &sol.u, 1000).map_err(|e| e.to_string())?;
        min_vi = min_vi.min(r);
        ensure(r >= -1e-8, || format!("case {case}: vi residual {r:e}"))?;
    }
    Ok(format!("100 configs, min vi residual {min_vi:.1e}"))
}

fn contraction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let config = SolverConfigF64::default();
    let mut accepted = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    while accepted < 50 {
        let e = rng.gen_range(0.5..3.0);
        let target = rng.gen_range(0.2..0.95);
        let unit = ProblemSpecF64::new(
            Geometry::benchmark(),
            Material::new(e, e).unwrap(),
            SpringLaw::new(1.0, 1.0, 1.0).unwrap(),
            BodyForce::zero(),
            ConstraintVariant::NonPenetration,
        )
        .unwrap();
        let k = target * unit.m() / unit.alpha();
        let other = k * rng.gen_range(0.1..=1.0);
        let (k1, k2) = if rng.gen_bool(0.5) { (k, other) } else { (other, k) };
        let spec = ProblemSpecF64::new(
            Geometry::benchmark(),
            Material::new(e, e).unwrap(),
            SpringLaw::new(k1, k2, 1.0).unwrap(),
            BodyForce::new(rng.gen_range(-8.0..=8.0), rng.gen_range(-8.0..=8.0)).unwrap(),
            ConstraintVariant::NonPenetration,
        )
        .map_err(|e| e.to_string())?;
        let ratio = spec.alpha() / spec.m();
        if !(ratio > 0.2 && ratio < 0.95) {
            continue;
        }
        accepted += 1;
        let sol = solve_qvi_fixed_point(&system(&spec, 4, 4), spec.spring(), spec.variant(), &config)
            .map_err(|e| format!("alpha/m = {ratio}: {e}"))?;
        for r in &sol.diagnostics.step_ratios {
            worst_margin = worst_margin.max(r - ratio);
            ensure(*r <= ratio + 0.05, || format!("alpha/m = {ratio:.3}: step ratio {r:.3}"))?;
        }
        let bound = config.tolerance.ln() / ratio.ln() + 5.0;
        let iterations = sol.diagnostics.iterations as f64;
        ensure(iterations <= bound, || {
            format!("alpha/m = {ratio:.3}: {iterations} iterations > {bound:.1}")
        })?;
    }
    Ok(format!("50 configs, max (ratio - alpha/m) = {worst_margin:.3}"))
}

fn mesh_independence() -> Check {
    let mut worst = 0.0f64;
    for variant in ConstraintVariant::ALL {
        for (k1, k2, f1, f2) in [(1.0, 1.0, 1.0, -1.0), (0.25, 1.0, 6.0, -6.0), (0.7, 1.3, -2.0, 3.0), (1.5, 0.4, 1.0, 1.0)] {
            let spec = ProblemSpecF64::benchmark(k1, k2, f1, f2, variant).unwrap();
            let o = analytic_solution(&spec);
            for n in [1, 4, 16, 256] {
                let sol = solve_exact(&system(&spec, n, n).schur_reduce().unwrap(), spec.spring(), variant)
                    .map_err(|e| e.to_string())?;
                for (x, y) in [(sol.g1, o.g1), (sol.g2, o.g2), (sol.theta, o.theta), (sol.s, o.s)] {
                    worst = worst.max((x - y).abs());
                }
                ensure(worst <= 1e-9, || format!("{variant:?} n = {n}: deviation {worst:e}"))?;
            }
        }
    }
    Ok(format!("max deviation from the oracle {worst:.1e}"))
}

fn brute_force() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2027);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let spec = ProblemSpecF64::benchmark(
            rng.gen_range(0.05..1.95),
            rng.gen_range(0.05..1.95),
            rng.gen_range(-4.0..=4.0),
            rng.gen_range(-4.0..=4.0),
            ConstraintVariant::ALL[case % 4],
        )
        .unwrap();
        let sys = system(&spec, 1, 1);
        let exact = solve_exact(&sys.schur_reduce().unwrap(), spec.spring(), spec.variant())
            .map_err(|e| e.to_string())?;
        let grid = grid_search_minimizer(&sys, spec.spring(), spec.variant(), GridSpec::uniform(-1.2, 1.2, 1e-3))
            .map_err(|e| e.to_string())?;
        worst = worst.max(grid.max_abs_diff(&exact.u));
        ensure(worst <= 2e-3, || format!("case {case} ({:?}): deviation {worst:e}", spec.variant()))?;
    }
    Ok(format!("20 instances, max deviation {worst:.1e}"))
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let run = std::fs::read_dir(dir).unwrap().next().unwrap().unwrap().path();
    let mut files: Vec<_> = std::fs::read_dir(&run)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_springrods");
    let runs = [
        vec!["sweep", "--f1", "6", "--f2", "-6", "--grid", "0.05:1.9:0.05", "--jobs", "4"],
        vec!["converge", "--f1", "1", "--f2", "-1", "--penalty", "compression"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let status = Command::new(bin)
                .args(&args)
                .arg("--outdir")
                .arg(dir.path())
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || {
                format!("{} exited with {}", args[0], status.status)
            })?;
            outputs.push(csv_files(dir.path()));
        }
        ensure(!outputs[0].is_empty(), || format!("{} wrote no CSV", args[0]))?;
        ensure(outputs[0] == outputs[1], || format!("{} CSV differs between runs", args[0]))?;
    }
    Ok("sweep and converge CSV byte-identical across runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Check, Option<Duration>); 10] = [
        ("contact threshold at k1 = 0.5", contact_threshold, Some(Duration::from_secs(1))),
        ("contact-branch displacements constant", contact_branch_constancy, None),
        ("rigid translation keeps the spring length", rigid_translation, Some(Duration::from_secs(1))),
        ("penalty convergence to the rigid-compression limit", penalty_convergence, Some(Duration::from_secs(2))),
        ("solver triad and oracle agree", solver_triad, Some(Duration::from_secs(10))),
        ("complementarity and variational inequality", complementarity, None),
        ("fixed-point contraction", contraction, None),
        ("mesh independence", mesh_independence, Some(Duration::from_secs(1))),
        ("grid search agrees with enumeration", brute_force, None),
        ("determinism of CSV output", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match (result, budget) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, budget {limit:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail} ({elapsed:.2?})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}

//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use kernelint::catalog::{catalog, make_kernel, KernelSpec};
use kernelint::gaussian::{self, ModelSpec};
use kernelint::kernels::{self, iterated_integral_both_orders, Psi2};
use kernelint::measures::{Measure1D, Measure2D};
use kernelint::quadrature;
use kernelint::riemann::{kernel_riemann_sum, merge_systems, PartitionScheme, RiemannSystem, TagRule};
use kernelint::selfint::{self, EstimateOptions, Verdict};
use kernelint::tensorprod;
use kernelint::{Interval, SecondOrderKernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn lib<T>(r: kernelint::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn unit() -> Interval {
    Interval::unit()
}

fn within_budget(elapsed: Duration, budget: Duration) -> std::result::Result<(), String> {
    if elapsed > budget {
        Err(format!("took {elapsed:.2?}, budget {budget:?}"))
    } else {
        Ok(())
    }
}

/// Quasi-self-integral of the fBm(0.75) kernel: 1/2 - 0.75 B(3/2, 5/2) - 3/16,
/// with the Beta value from the Gamma function identity.
fn fbm_quasi_oracle() -> f64 {
    let gamma_three_halves = std::f64::consts::PI.sqrt() / 2.0;
    let gamma_five_halves = 1.5 * gamma_three_halves;
    let gamma_four = 6.0;
    let beta = gamma_three_halves * gamma_five_halves / gamma_four;
    0.5 - 0.75 * beta - 0.1875
}

/// `int int C(s, t) H(2H-1) |s-t|^{2H-2} ds dt` over the unit square by nested
/// adaptive quadrature with the diagonal singularity as a breakpoint.
fn fbm_cz_dcm_oracle(hurst: f64) -> f64 {
    let cov = kernels::fbm_covariance(hurst);
    let c = hurst * (2.0 * hurst - 1.0);
    let inner = |s: f64| {
        quadrature::integrate_with_breaks(
            |t| if t == s { 0.0 } else { cov(s, t) * c * (s - t).abs().powf(2.0 * hurst - 2.0) },
            0.0,
            1.0,
            &[s],
            1e-11,
        )
    };
    quadrature::integrate(inner, 0.0, 1.0, 1e-9)
}

fn c1_ito_stratonovich() -> Check {
    let start = Instant::now();
    let k = kernels::brownian_wn();
    let left = RiemannSystem::new(unit(), PartitionScheme::Uniform, TagRule::Left);
    let mid = RiemannSystem::new(unit(), PartitionScheme::Uniform, TagRule::Midpoint);
    let mut worst: f64 = 0.0;
    for p in 2..=14 {
        let n = 1usize << p;
        let l = kernel_riemann_sum(&k, &lib(left.build_level(n))?);
        let m = kernel_riemann_sum(&k, &lib(mid.build_level(n))?);
        ensure!(l.abs() <= 1e-12, "left sum at n={n} is {l}");
        ensure!((m - 0.5).abs() <= 1e-12, "midpoint sum at n={n} is {m}");
        worst = worst.max(l.abs()).max((m - 0.5).abs());
    }
    let report = lib(selfint::estimate_self_integral(&k, &unit(), &[left, mid], 1 << 14, selfint::DEFAULT_TOL))?;
    ensure!(matches!(report.verdict, Verdict::TagDependent { .. }), "verdict {:?}", report.verdict);
    within_budget(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("max deviation {worst:.1e}, verdict tag_dependent"))
}

fn c2_fbm_self_integral() -> Check {
    let start = Instant::now();
    let k = lib(kernels::fbm(0.75))?;
    let ens = selfint::default_ensemble(unit(), 1);
    ensure!(ens.len() == 12, "ensemble has {} systems", ens.len());
    let report = lib(selfint::estimate_self_integral(&k, &unit(), &ens, 4096, selfint::DEFAULT_TOL))?;
    let mut worst: f64 = 0.0;
    for t in &report.traces {
        let (n, s) = *t.points.last().expect("non-empty trace");
        ensure!(n == 4096, "{} ends at n={n}", t.system);
        ensure!((s - 0.5).abs() <= 0.02, "{} sum {s} at n=4096", t.system);
        worst = worst.max((s - 0.5).abs());
    }
    let value = report.verdict.value().ok_or_else(|| format!("verdict {:?}", report.verdict))?;
    ensure!((value - 0.5).abs() <= 1e-3, "extrapolated value {value}");
    within_budget(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("raw error <= {worst:.4} at n=4096, converged to {value:.6}"))
}

fn c3_fbm_quasi() -> Check {
    let start = Instant::now();
    let oracle = fbm_quasi_oracle();
    ensure!((oracle - 0.16524).abs() < 1e-5, "oracle {oracle}");
    let k2 = SecondOrderKernel::new(lib(kernels::fbm(0.75))?);
    let ens = selfint::default_quasi_ensemble(unit(), 1);
    let report = lib(selfint::estimate_quasi_self_integral(
        &k2,
        &unit(),
        &unit(),
        &ens,
        &ens,
        1024,
        selfint::DEFAULT_DOUBLE_TOL,
        EstimateOptions::default(),
    ))?;
    let mut worst: f64 = 0.0;
    for t in &report.traces {
        let (n, s) = *t.points.last().expect("non-empty trace");
        ensure!(n == 1024, "{} ends at n={n}", t.system);
        ensure!((s - oracle).abs() <= 0.03, "{} double sum {s} vs {oracle}", t.system);
        worst = worst.max((s - oracle).abs());
    }
    within_budget(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "{} pairs, max |sum - {oracle:.5}| = {worst:.2e}, verdict {}",
        report.traces.len(),
        report.verdict.value().map_or("not converged".to_string(), |v| format!("converged {v:.5}"))
    ))
}

fn c4_mean_identity() -> Check {
    let start = Instant::now();
    let exp = lib(gaussian::run_uniform_experiment(
        &ModelSpec::BrownianWn,
        256,
        TagRule::Left,
        TagRule::Midpoint,
        100_000,
        4,
    ))?;
    let (ml, zl) = gaussian::mean_z(&exp.sums_a, 0.0);
    let (mm, zm) = gaussian::mean_z(&exp.sums_b, 0.5);
    ensure!(zl.abs() <= 3.0, "left mean {} (se {}) z={zl:.2}", ml.mean, ml.se_mean);
    ensure!(zm.abs() <= 3.0, "midpoint mean {} (se {}) z={zm:.2}", mm.mean, mm.se_mean);
    within_budget(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("left {:+.5} (z {zl:+.2}), midpoint {:.5} (z {zm:+.2}), se {:.4}", ml.mean, mm.mean, ml.se_mean))
}

fn c5_covariance_identity() -> Check {
    let start = Instant::now();
    let spec = ModelSpec::Fbm { hurst: 0.75 };
    let exp = lib(gaussian::run_uniform_experiment(&spec, 256, TagRule::Left, TagRule::Midpoint, 100_000, 5))?;
    let k = lib(spec.kernel())?;
    let si = lib(selfint::estimate_self_integral(
        &k,
        &unit(),
        &selfint::default_ensemble(unit(), 1),
        4096,
        selfint::DEFAULT_TOL,
    ))?;
    let qe = selfint::default_quasi_ensemble(unit(), 1);
    let qi = lib(selfint::estimate_quasi_self_integral(
        &SecondOrderKernel::new(k),
        &unit(),
        &unit(),
        &qe,
        &qe,
        1024,
        selfint::DEFAULT_DOUBLE_TOL,
        EstimateOptions::default(),
    ))?;
    let diag = lib(gaussian::moment_checks(&exp.model, &exp.level_a, &exp.sums_a, &exp.sums_half, &si, &qi, 1024))?;
    let mc_time = start.elapsed();
    let cz_oracle = fbm_cz_dcm_oracle(0.75);
    ensure!(
        (diag.integral_cz_dcm - cz_oracle).abs() <= 2e-3,
        "int C_Z dC_M {} vs oracle {cz_oracle}",
        diag.integral_cz_dcm
    );
    ensure!((diag.quasi_self_integral - fbm_quasi_oracle()).abs() <= 0.03, "quasi {}", diag.quasi_self_integral);
    ensure!(
        diag.var_ok,
        "var {} vs target {} (se {}, slack {})",
        diag.var,
        diag.target_var,
        diag.se_var,
        diag.var_slack
    );
    ensure!(diag.mean_ok, "mean {} vs target {} (se {})", diag.mean, diag.target_mean, diag.se_mean);
    Ok(format!(
        "var {:.4} vs {:.4} = {:.4} + {:.4} (se {:.4}, slack {:.4}, z {:+.2}; estimators {mc_time:.1?})",
        diag.var,
        diag.target_var,
        diag.integral_cz_dcm,
        diag.quasi_self_integral,
        diag.se_var,
        diag.var_slack,
        diag.z_scores.var
    ))
}

fn gap_trace(spec: &ModelSpec, samples: usize) -> std::result::Result<Vec<(usize, f64)>, String> {
    [32, 64, 128, 256, 512]
        .iter()
        .map(|&n| {
            let exp = lib(gaussian::run_uniform_experiment(spec, n, TagRule::Left, TagRule::Midpoint, samples, 6))?;
            Ok((n, lib(exp.stats())?.l2_gap))
        })
        .collect()
}

fn c6_gap() -> Check {
    let fbm = gap_trace(&ModelSpec::Fbm { hurst: 0.75 }, 20_000)?;
    let bm = gap_trace(&ModelSpec::BrownianWn, 20_000)?;
    for w in fbm.windows(2) {
        ensure!(w[1].1 < w[0].1, "fbm gap rose from {:.5} (n={}) to {:.5} (n={})", w[0].1, w[0].0, w[1].1, w[1].0);
    }
    let (first, last) = (fbm[0].1, fbm[fbm.len() - 1].1);
    ensure!(last <= first / 16.0, "fbm gap {first:.5} -> {last:.5}, less than 2x per doubling overall");
    for (n, g) in &bm {
        ensure!(*g > 0.1, "brownian gap {g} at n={n}");
    }
    let fmt = |t: &[(usize, f64)]| t.iter().map(|(_, g)| format!("{g:.4}")).collect::<Vec<_>>().join(" ");
    let ratios: Vec<String> = fbm.windows(2).map(|w| format!("{:.2}", w[0].1 / w[1].1)).collect();
    Ok(format!("fbm [{}] (ratios {}), brownian [{}]", fmt(&fbm), ratios.join(" "), fmt(&bm)))
}

fn c7_singular() -> Check {
    let k = kernels::singular();
    let d = k.domain();
    let tags = [TagRule::Left, TagRule::Right, TagRule::Midpoint, TagRule::Random { seed: 3 }, TagRule::near_right()];
    let mut min_ratio = f64::INFINITY;
    for tag in tags {
        let sys = RiemannSystem::new(d, PartitionScheme::Uniform, tag);
        for p in 4..=14 {
            let n = 1usize << p;
            let s = kernel_riemann_sum(&k, &lib(sys.build_level(n))?);
            let floor = 8.0 / 7.0 * (n as f64).powf(0.125);
            ensure!(s >= floor, "{} sum {s} < {floor} at n={n}", sys.id());
            min_ratio = min_ratio.min(s / floor);
        }
    }
    let geo = RiemannSystem::new(d, PartitionScheme::AdversarialGeometric, TagRule::Left);
    let geo_sums: Vec<f64> = (4..=14)
        .map(|p| lib(geo.build_level(1usize << p)).map(|l| kernel_riemann_sum(&k, &l)))
        .collect::<Result<_, _>>()?;
    let bound = lib(kernels::local_bound_probe(&k, &d, &d, 101, 8))?;
    let geo_max = geo_sums.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    ensure!(geo_max <= bound, "geometric sums reach {geo_max}, probe bound {bound}");
    Ok(format!("min sum/floor {min_ratio:.3}; geometric max {geo_max:.4} <= {bound:.4}"))
}

fn c8_orthogonal() -> Check {
    let k = kernels::orthogonal(Measure1D::lebesgue());
    let left = RiemannSystem::new(unit(), PartitionScheme::Uniform, TagRule::Left);
    let near = RiemannSystem::new(unit(), PartitionScheme::Uniform, TagRule::near_right());
    for p in 1..=14 {
        let n = 1usize << p;
        let l = kernel_riemann_sum(&k, &lib(left.build_level(n))?);
        ensure!(l == 0.0, "left sum {l} at n={n}");
        let r = kernel_riemann_sum(&k, &lib(near.build_level(n))?);
        ensure!(r > 1.0 - 1.0 / n as f64, "near-right sum {r} at n={n}");
    }
    let demo = tensorprod::indicator_demo(Measure1D::lebesgue(), unit(), 64);
    ensure!(demo.closed == 1.0 && demo.open == 0.0, "indicator means {} / {}", demo.closed, demo.open);
    Ok(format!("left 0 exactly, near-right > 1 - 1/n, indicator means {} vs {}", demo.closed, demo.open))
}

fn random_interval(rng: &mut ChaCha8Rng, d: &Interval) -> Interval {
    let a = d.lo + d.len() * rng.random::<f64>();
    let b = d.lo + d.len() * rng.random::<f64>();
    Interval::closed(a.min(b), a.max(b)).expect("ordered endpoints")
}

fn cauchy_schwarz_suite() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut kernels_checked = 0;
    for entry in catalog() {
        let spec: KernelSpec = match entry.name {
            "tensor" => {
                serde_json::from_str(r#"{"name":"tensor","f":{"kind":"identity"},"mu":{"kind":"lebesgue"}}"#).unwrap()
            }
            "brownian_wn" => KernelSpec::BrownianWn,
            "fbm" => KernelSpec::Fbm { hurst: 0.75 },
            "orthogonal" => {
                serde_json::from_str(r#"{"name":"orthogonal","nu":{"kind":"lebesgue","scale":2.0}}"#).unwrap()
            }
            "singular" => KernelSpec::Singular,
            _ => continue,
        };
        let k = lib(make_kernel(&spec))?;
        if k.pair().is_none() {
            continue;
        }
        let d = k.domain();
        for draw in 0..100 {
            let np = rng.random_range(1..6);
            let ns = rng.random_range(1..6);
            let points: Vec<f64> = (0..np).map(|_| d.lo + d.len() * rng.random::<f64>()).collect();
            let sets: Vec<Interval> = (0..ns).map(|_| random_interval(&mut rng, &d)).collect();
            let alpha: Vec<f64> = (0..np).map(|_| rng.random_range(-1.0..1.0)).collect();
            let beta: Vec<f64> = (0..ns).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (lhs, rhs) = lib(kernels::cauchy_schwarz_check(&k, &points, &sets, &alpha, &beta))?;
            ensure!(lhs <= rhs * (1.0 + 1e-9) + 1e-12, "{} draw {draw}: {lhs} > {rhs}", k.name());
        }
        kernels_checked += 1;
    }
    ensure!(kernels_checked == 5, "only {kernels_checked} kernels carry a covariance pair");
    Ok("CS 5x100".to_string())
}

fn isserlis_suite() -> std::result::Result<String, String> {
    let bounds: Vec<f64> = (0..=6).map(|i| i as f64 / 6.0).collect();
    let model = lib(gaussian::make_model(&ModelSpec::Fbm { hurst: 0.75 }, &bounds, &bounds[1..]))?;
    let batch = gaussian::sample(&model, 200_000, 12);
    let rows = gaussian::isserlis_check(&batch, &model.joint_covariance(), 60, 13);
    let worst = rows.iter().fold(0.0f64, |m, r| m.max(r.z.abs()));
    ensure!(worst <= 5.0, "isserlis z {worst}");
    Ok(format!("isserlis max |z| {worst:.2}"))
}

fn additivity_suite() -> std::result::Result<String, String> {
    let tol = selfint::DEFAULT_TOL;
    let fbm = lib(kernels::fbm(0.75))?;
    let tensor = kernels::tensor(std::sync::Arc::new(|t: f64| 1.0 + t), "1+t", Measure1D::lebesgue(), unit());
    let mut out = Vec::new();
    for k in [fbm, tensor] {
        let a = lib(selfint::additivity_check(&k, &unit(), 0.5, &selfint::default_ensemble(unit(), 1), 4096, tol))?;
        ensure!(a.defect() <= 2.0 * tol, "{}: {} + {} vs {}", k.name(), a.left, a.right, a.whole);
        out.push(format!("{} {:.1e}", k.name(), a.defect()));
    }
    Ok(format!("additivity defects [{}]", out.join(", ")))
}

fn fubini_suite() -> std::result::Result<String, String> {
    let tol = selfint::DEFAULT_TOL;
    let k = lib(kernels::fbm(0.75))?;
    let mut worst: f64 = 0.0;
    for psi in [Psi2::constant(1.0), Psi2::product(), Psi2::gaussian(0.5)] {
        let (a, b) = lib(iterated_integral_both_orders(&k, &Measure1D::lebesgue(), &psi, &unit(), &unit(), 2048))?;
        ensure!((a - b).abs() <= tol, "{}: orders {a} vs {b}", psi.label);
        worst = worst.max((a - b).abs());
    }
    Ok(format!("fubini max gap {worst:.1e}"))
}

fn set_additivity_suite() -> std::result::Result<String, String> {
    let mut rounding: f64 = 0.0;
    // Merged systems: sums over the union equal the sum of the parts bit for bit.
    let (l, r) = lib(unit().split_at(0.375))?;
    for spec in [KernelSpec::BrownianWn, KernelSpec::Fbm { hurst: 0.75 }] {
        let k = lib(make_kernel(&spec))?;
        for (scheme, tag) in [
            (PartitionScheme::Uniform, TagRule::Midpoint),
            (PartitionScheme::Random { seed: 2 }, TagRule::Random { seed: 3 }),
        ] {
            let (sa, sb) = (RiemannSystem::new(l, scheme, tag), RiemannSystem::new(r, scheme, tag));
            let merged = lib(merge_systems(&sa, &sb))?;
            for n in [1, 7, 64, 1000] {
                let whole = kernel_riemann_sum(&k, &lib(merged.build_level(n))?);
                let parts =
                    kernel_riemann_sum(&k, &lib(sa.build_level(n))?) + kernel_riemann_sum(&k, &lib(sb.build_level(n))?);
                ensure!(whole.to_bits() == parts.to_bits(), "{} merged sum {whole} vs {parts}", k.name());
            }
        }
    }
    // Exactly representable masses add bit for bit.
    let atoms = Measure1D::atoms(&[(0.25, 1.5), (0.5, -0.75), (0.75, 2.0)]);
    let leb = Measure1D::lebesgue();
    let bm = kernels::brownian_wn();
    let orth = kernels::orthogonal(Measure1D::atoms(&[(0.5, 1.0), (0.25, 0.5)]));
    for c in [0.125, 0.25, 0.5, 0.625, 0.75] {
        let (a, b) = lib(unit().split_at(c))?;
        for m in [&atoms, &leb] {
            ensure!(m.mass(&unit()) == m.mass(&a) + m.mass(&b), "measure split at {c}");
        }
        for x in [0.0, 0.25, 0.4375, 0.5, 1.0] {
            ensure!(lib(kernels::additivity_defect(&bm, x, &unit(), c))? == 0.0, "brownian split at {c}, x={x}");
            ensure!(lib(kernels::additivity_defect(&orth, x, &unit(), c))? == 0.0, "orthogonal split at {c}, x={x}");
        }
        let box_a = Measure2D::Diagonal(Measure1D::lebesgue());
        ensure!(
            box_a.mass2d(&unit(), &unit()) == box_a.mass2d(&a, &unit()) + box_a.mass2d(&b, &unit()),
            "box split at {c}"
        );
    }
    // Closed-form primitives are additive to rounding at arbitrary splits.
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in [lib(kernels::fbm(0.75))?, kernels::singular()] {
        let d = k.domain();
        for _ in 0..200 {
            let i = random_interval(&mut rng, &d);
            let c = i.lo + i.len() * rng.random::<f64>();
            let x = d.lo + d.len() * rng.random::<f64>();
            let defect = lib(kernels::additivity_defect(&k, x, &i, c))?;
            let scale = k.eval(x, &i).abs().max(1.0);
            ensure!(defect.abs() <= 8.0 * f64::EPSILON * scale, "{} defect {defect}", k.name());
            rounding = rounding.max(defect.abs() / scale);
        }
    }
    Ok(format!("set-additivity bit-exact (primitive kernels within {:.1} ulp)", rounding / f64::EPSILON))
}

fn c9_properties() -> Check {
    let parts =
        [cauchy_schwarz_suite()?, isserlis_suite()?, additivity_suite()?, fubini_suite()?, set_additivity_suite()?];
    Ok(parts.join("; "))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run_cli(cmd: &str, cfg: &Path, out: &Path) -> std::result::Result<i32, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_kernelint"))
        .args([cmd, "--quiet", "--config"])
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .status()
        .map_err(|e| e.to_string())?;
    status.code().ok_or_else(|| "killed by signal".to_string())
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).expect("readable output dir") {
            let p = e.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).expect("under root").to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn c10_reproducibility() -> Check {
    let mut compared = 0;
    for (cmd, cfg, code) in [
        ("selfint", "fbm_selfint.json", 0),
        ("simulate", "brownian_simulate.json", 0),
        ("tensor", "tensor_demo.json", 0),
    ] {
        let first = tempfile::tempdir().map_err(|e| e.to_string())?;
        let second = tempfile::tempdir().map_err(|e| e.to_string())?;
        for dir in [&first, &second] {
            let got = run_cli(cmd, &config(cfg), dir.path())?;
            ensure!(got == code, "{cmd} {cfg} exited {got}");
        }
        let files = files_under(first.path());
        ensure!(files == files_under(second.path()), "{cmd}: different file sets");
        for f in &files {
            let a = std::fs::read(first.path().join(f)).map_err(|e| e.to_string())?;
            let b = std::fs::read(second.path().join(f)).map_err(|e| e.to_string())?;
            ensure!(a == b, "{cmd}: {} differs between runs", f.display());
            compared += 1;
        }
    }
    Ok(format!("{compared} output files byte-identical across two runs"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("tag-dependent brownian sums", c1_ito_stratonovich),
        ("fbm self-integral", c2_fbm_self_integral),
        ("fbm quasi-self-integral", c3_fbm_quasi),
        ("mean identity", c4_mean_identity),
        ("covariance identity", c5_covariance_identity),
        ("l2 gap between tag rules", c6_gap),
        ("singular kernel divergence", c7_singular),
        ("orthogonal measure", c8_orthogonal),
        ("property suites", c9_properties),
        ("reproducibility", c10_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2} {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use singtrace::estimators::{
    cesaro_trace, dixmier_value_range, heat_trace, lidskii_trace, p_power_trace, zeta_residue_trace, CesaroConfig,
    HeatConfig, LidskiiConfig, Measurability, ZetaConfig,
};
use singtrace::models::{
    circle_dirac_svals, dirac_residue_constant, hermitian_eigs, laplacian_residue_constant, lesch_pairing, make_model,
    random_hermitian, random_unitary, spectral_flow_crossings, spectral_flow_integral, toeplitz_dixmier_index,
    toeplitz_truncated_index, triangular_eig_list, triangular_truncate, DenseMatrix, HermitianPath, ToeplitzProblem,
};
use singtrace::props::{partition_flow_refining, run_suite};
use singtrace::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn harmonic_routes() -> Result<Outcome> {
    let start = Instant::now();
    let m = make_model("harmonic")?;
    let values = [
        cesaro_trace(&m.seq, &CesaroConfig::default())?.value.re(),
        zeta_residue_trace(&m.seq, None, &ZetaConfig::default())?.value.re(),
        heat_trace(&m.seq, 1.0, None, &HeatConfig::default())?.value.re(),
        lidskii_trace(&m.eig_list(1 << 20)?, &LidskiiConfig::default())?.value.re(),
    ];
    let secs = start.elapsed().as_secs_f64();
    let near = values.iter().all(|v| (v - 1.0).abs() < 2e-2);
    let spread = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    outcome(
        near && spread < 2e-2 && secs < 10.0,
        format!("cesaro/zeta/heat/lidskii = {values:.5?}, max delta {spread:.2e}, {secs:.1} s"),
    )
}

fn heat_raw_limit() -> Result<Outcome> {
    let m = make_model("harmonic")?;
    let r = heat_trace(&m.seq, 1.0, None, &HeatConfig::default())?;
    let raw = r.diagnostics["raw_limit"];
    let target = PI.sqrt() / 2.0;
    outcome((raw - target).abs() < 1e-2, format!("raw limit {raw:.6} vs {target:.6}"))
}

fn p_two_model() -> Result<Outcome> {
    let m = make_model("power:p=2")?;
    let pp = p_power_trace(&m.seq, 2.0, &ZetaConfig::default())?.value.re();
    let heat = heat_trace(&m.seq, 2.0, None, &HeatConfig::default())?;
    let hv = heat.value.re();
    let raw = heat.diagnostics["raw_limit"];
    outcome(
        (pp - 1.0).abs() < 1e-2 && (hv - 1.0).abs() < 1e-2 && (raw - 1.0).abs() < 1e-2,
        format!("p_power {pp:.5}, heat {hv:.5}, heat raw limit {raw:.5}"),
    )
}

fn lattice_models() -> Result<Outcome> {
    let start = Instant::now();
    let cfg = CesaroConfig::default();
    let circle = cesaro_trace(&circle_dirac_svals(1_000_000)?, &cfg)?.value.re();
    let constant = dirac_residue_constant(1, TAU);
    let torus = cesaro_trace(&make_model("torus:n=2,R=2000")?.seq, &cfg)?.value.re();
    let torus_constant = laplacian_residue_constant(2, TAU * TAU);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        (circle - 2.0).abs() < 2e-2
            && (circle - constant).abs() < 2e-2
            && (torus - PI).abs() < 0.07
            && (torus - torus_constant).abs() < 0.07
            && secs < 60.0,
        format!("circle {circle:.5} (constant {constant}), torus {torus:.5} (constant {torus_constant:.5}), {secs:.1} s"),
    )
}

fn oscillating_model() -> Result<Outcome> {
    let m = make_model("osc:a=0.15,b=4")?;
    let r = cesaro_trace(&m.seq, &CesaroConfig::for_measurability(&m.seq))?;
    let range = dixmier_value_range(&m.seq, 10_000)?;
    let (lo, hi) = r.interval;
    let close = |a: f64, b: f64| (a - b).abs() < 0.02;
    outcome(
        r.measurable == Measurability::No
            && close(lo, 0.85)
            && close(hi, 1.15)
            && close(range.lower, 0.85)
            && close(range.upper, 1.15)
            && close(lo, range.lower)
            && close(hi, range.upper),
        format!(
            "verdict {:?}, envelope [{lo:.4}, {hi:.4}], Sucheston range [{:.4}, {:.4}]",
            r.measurable, range.lower, range.upper
        ),
    )
}

fn toeplitz() -> Result<Outcome> {
    let mut ok = true;
    let mut worst = 0.0f64;
    for w in -3i64..=3 {
        let truncated = toeplitz_truncated_index(&ToeplitzProblem::new(w, 32))?;
        let dixmier = toeplitz_dixmier_index(w, 1_000_000, &CesaroConfig::default())?.value.re();
        let lesch = lesch_pairing(TAU * w as f64);
        worst = worst.max((dixmier + w as f64).abs());
        ok &= truncated == -w && (dixmier + w as f64).abs() < 5e-2 && lesch == -(w as f64);
    }
    outcome(ok, format!("w = -3..3: truncated and Lesch exact, worst Dixmier error {worst:.2e}"))
}

fn spectral_flow() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut agree = 0;
    let mut nonzero = 0;
    for trial in 0..100 {
        let d = 1 + trial % 16;
        let endpoint = |rng: &mut ChaCha8Rng| -> Result<DenseMatrix> {
            loop {
                let m = random_hermitian(d, rng);
                if hermitian_eigs(&m)?.iter().all(|v| v.abs() > 1e-3) {
                    return Ok(m);
                }
            }
        };
        let path = HermitianPath::linear(endpoint(&mut rng)?, endpoint(&mut rng)?)?;
        let c = spectral_flow_crossings(&path, 64)?;
        let p = partition_flow_refining(&path, 8)?;
        agree += usize::from(c == p);
        nonzero += usize::from(c != 0);
    }
    let mut worst = 0.0f64;
    let mut n_spread = 0.0f64;
    for trial in 0..10 {
        let d = 2 + trial % 11;
        let base = random_hermitian(d, &mut rng);
        let u = random_unitary(d, &mut rng);
        let path = HermitianPath::conjugation(&base, &u)?.refined(8)?;
        let vals = [2.0, 3.0, 4.0]
            .iter()
            .map(|&n| spectral_flow_integral(&path, n, 24))
            .collect::<Result<Vec<f64>>>()?;
        worst = vals.iter().fold(worst, |m, v| m.max(v.abs()));
        n_spread = n_spread.max(vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - vals.iter().fold(f64::INFINITY, |a, &b| a.min(b)));
    }
    outcome(
        agree == 100 && worst < 1e-6 && n_spread < 1e-6,
        format!("{agree}/100 paths agree ({nonzero} with nonzero flow), integral max |value| {worst:.1e}, n spread {n_spread:.1e}"),
    )
}

fn property_suites() -> Result<Outcome> {
    let results = run_suite(None);
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{}: {}", r.name, r.detail))
        .collect();
    outcome(
        failed.is_empty(),
        if failed.is_empty() {
            format!("{} properties passed", results.len())
        } else {
            format!("{} of {} failed: {}", failed.len(), results.len(), failed.join(" | "))
        },
    )
}

fn triangular() -> Result<Outcome> {
    let d = 200;
    let x = DenseMatrix::from_fn(d, |i, j| Complex64::new(0.5f64.powi((i + j) as i32), 0.0));
    let eigs = triangular_eig_list(&triangular_truncate(&x))?;
    let v = lidskii_trace(&eigs, &LidskiiConfig::default())?.value.as_complex();
    outcome(v.norm() < 1e-3, format!("lidskii estimate {v:.2e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("harmonic model, four routes", harmonic_routes),
        ("heat raw limit Gamma(3/2)", heat_raw_limit),
        ("p = 2 model, p-power and heat", p_two_model),
        ("circle and torus residues", lattice_models),
        ("oscillating model range", oscillating_model),
        ("Toeplitz indices", toeplitz),
        ("spectral flow", spectral_flow),
        ("property suites", property_suites),
        ("triangular truncation", triangular),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!passed);
        println!(
            "criterion {}: {} {name}: {detail} [{:.1} s]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

//! Derived values checked against independent closed forms or brute force.

use std::f64::consts::PI;

use singtrace::asymptotics::{tail_envelope, GridSpec, MeanProfile};
use singtrace::estimators::{heat_samples, zeta_samples, HeatConfig, Weights, ZetaConfig};
use singtrace::models::{c_half, make_model, torus_laplacian_svals};
use singtrace::seqcore::SingularSeq;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `zeta(s)` by Euler-Maclaurin with a 64-term head and three correction terms.
fn riemann_zeta(s: f64) -> f64 {
    let n = 64.0f64;
    let head: f64 = (1..64).map(|k| (k as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

#[test]
fn harmonic_zeta_samples_match_riemann_zeta() {
    let h = SingularSeq::harmonic(1.0).unwrap();
    let z = zeta_samples(&h, &Weights::unit(), 1.0, &ZetaConfig::default()).unwrap();
    for (&s, &v) in z.s.iter().zip(&z.values) {
        let oracle = (s - 1.0) * riemann_zeta(s);
        assert!((v - oracle).abs() < 1e-6, "s = {s}: {v} vs {oracle}");
    }
    assert!((z.limit - 1.0).abs() < 1e-4);
}

#[test]
fn harmonic_heat_samples_match_theta_identity() {
    // Jacobi theta: sum_{n >= 1} exp(-(n/l)^2) = (l sqrt(pi) - 1)/2 + l sqrt(pi) sum_k exp(-(pi l k)^2).
    let h = SingularSeq::harmonic(1.0).unwrap();
    let s = heat_samples(&h, 1.0, &Weights::unit(), &HeatConfig::default()).unwrap();
    for (&l, &v) in s.lambda.iter().zip(&s.values) {
        let dual: f64 = (1..=3).map(|k| (-(PI * l * k as f64).powi(2)).exp()).sum();
        let oracle = 0.5 * PI.sqrt() - 0.5 / l + PI.sqrt() * dual;
        assert!((v - oracle).abs() < 1e-6, "lambda = {l}: {v} vs {oracle}");
    }
    assert!((s.raw_limit - 0.5 * PI.sqrt()).abs() < 1e-6);
}

#[test]
fn harmonic_profile_matches_digamma_expansion() {
    let h = SingularSeq::harmonic(1.0).unwrap();
    // Step extension: sigma(t) = H_m + (t - m)/(m + 1) with m = floor(t).
    let harmonic_number = |m: f64| m.ln() + EULER_GAMMA + 0.5 / m - 1.0 / (12.0 * m * m);
    for u in [10.0f64, 20.0, 30.0, 40.0, 80.0] {
        let t = u.exp();
        let sigma = if u < 36.0 {
            let m = t.floor();
            harmonic_number(m) + (t - m) / (m + 1.0)
        } else {
            u + EULER_GAMMA
        };
        let oracle = sigma / t.ln_1p();
        let g = h.profile_at_log(u).unwrap();
        assert!((g - oracle).abs() < 1e-12 * oracle, "log t = {u}: {g} vs {oracle}");
    }
}

#[test]
fn harmonic_counts_are_ceilings() {
    let h = SingularSeq::harmonic(1.0).unwrap();
    for t in [2.5f64, 10.0, 1e6 + 0.5, 3e12] {
        assert_eq!(h.count_above(1.0 / t), Some(t.ceil() as u64 - 1), "t = {t}");
    }
}

#[test]
fn oscillating_envelope_is_one_plus_minus_a() {
    let seq = make_model("osc:a=0.15,b=4").unwrap().seq;
    let profile = MeanProfile::cesaro(&seq, &GridSpec::loglog(1e4)).unwrap();
    let env = tail_envelope(&profile, profile.len() / 2).unwrap();
    assert!((env.lower - 0.85).abs() < 2e-3, "{env:?}");
    assert!((env.upper - 1.15).abs() < 2e-3, "{env:?}");
}

#[test]
fn c_half_matches_quadrature() {
    // x = tan(theta) turns the integral into int_{-pi/2}^{pi/2} cos^{n-2}.
    let m = 20_000;
    for n in [2.0f64, 3.0, 4.0, 5.0, 6.0] {
        let h = PI / m as f64;
        let simpson: f64 = (0..=m)
            .map(|i| {
                let th = -PI / 2.0 + i as f64 * h;
                let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * th.cos().max(0.0).powf(n - 2.0)
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((c_half(n) - simpson).abs() < 1e-9, "n = {n}: {} vs {simpson}", c_half(n));
    }
}

#[test]
fn torus_counts_match_lattice_enumeration() {
    // Brute-force count of k in Z^2, |k| <= R, with (1 + |k|^2)^-1 > thr.
    let r = 40i64;
    let seq = torus_laplacian_svals(2, r as u64).unwrap();
    for thr in [0.5f64, 0.01, 1e-3] {
        let brute = (-r..=r)
            .flat_map(|a| (-r..=r).map(move |b| (a, b)))
            .filter(|&(a, b)| a * a + b * b <= r * r && 1.0 / (1.0 + (a * a + b * b) as f64) > thr)
            .count() as u64;
        assert_eq!(seq.count_above(thr), Some(brute), "thr = {thr}");
    }
}

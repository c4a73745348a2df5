//! Acceptance gate: one test per criterion, each printing a pass/fail line.
//!
//! Every tolerance is pinned here. "Exact" means literal equality of
//! arbitrary-precision rationals; float thresholds appear only where a
//! criterion compares against quadrature or runs the float stretch path.
//!
//! Criterion 7 carries one deliberately red clause: the measured two-point
//! peaks of the exact beta = 16, M = 5 curve sit 51 and 13 grid steps below
//! the fifth-root angles (they approach them as beta grows; beta = 36 halves
//! the offsets), so the stated one-grid-step tolerance cannot be met by any
//! correct implementation. The assertion is kept faithful and fails with the
//! measured values.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use spinekit::correlation::{circular_pair_curve, correlation_direct, correlation_miwa};
use spinekit::hirota::{hirota_check, plucker_check};
use spinekit::moments::{provider_circular, provider_random, TimeDeformation};
use spinekit::oracle::{partition_symbolic, quadrature_circle, CircleObservable};
use spinekit::scalar::{binomial, format_rat, rat, rat_to_f64, ratio};
use spinekit::spine::{build_spine, vandermonde_check};
use spinekit::tau::{
    hyperpfaffian, lifted_apply, pair_constants_circular, structure_constant,
    tau_derivative_wedge, tau_polynomial, wedge_power, GramForm, MomentumBand, WedgeStrategy,
};
use spinekit::{Budget, Rat, Ring, SpineContext};

fn report(criterion: &str, ok: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn random_points(n: usize, rng: &mut impl Rng) -> Vec<Rat> {
    (0..n)
        .map(|_| loop {
            let y = ratio(rng.random_range(-8i64..=8), rng.random_range(1i64..=4));
            if !Ring::is_zero(&y) {
                break y;
            }
        })
        .collect()
}

#[test]
fn criterion_1_confluent_vandermonde() {
    let start = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut all = true;
    for (l, n) in [(2u32, 2u32), (2, 3), (4, 2)] {
        let ctx = SpineContext::new(l, n).unwrap();
        for _ in 0..5 {
            let pts = random_points(n as usize, &mut rng);
            let rep = vandermonde_check(&pts, &ctx).unwrap();
            all &= rep.ok && rep.lhs == rep.rhs;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all && elapsed < 10.0;
    report(
        "1 (confluent vandermonde)",
        ok,
        &format!("15 random tuples exact, {elapsed:.2}s (< 10s)"),
    );
    assert!(ok);
}

#[test]
fn criterion_2_momentum_selection_rule() {
    let start = Instant::now();
    let budget = Budget::default();
    let mut nonzero_sum_checked = 0u64;
    let mut all = true;
    for (l, n) in [(2u32, 3u32), (4, 2)] {
        let ctx = SpineContext::new(l, n).unwrap();
        let basis = build_spine(&ctx, &budget).unwrap();
        let p = ctx.power();
        // full enumeration of momentum multisets of size M
        let mut stack = vec![(Vec::new(), -p)];
        while let Some((prefix, min_next)) = stack.pop() {
            if prefix.len() == n as usize {
                if prefix.iter().sum::<i64>() != 0 {
                    nonzero_sum_checked += 1;
                    all &= structure_constant(&prefix, &basis).unwrap() == rat(0);
                }
                continue;
            }
            for j in min_next..=p {
                let mut next = prefix.clone();
                next.push(j);
                stack.push((next, j));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all && elapsed < 30.0;
    report(
        "2 (momentum selection rule)",
        ok,
        &format!("{nonzero_sum_checked} nonzero-sum multisets all exactly 0, {elapsed:.2}s (< 30s)"),
    );
    assert!(ok);
}

#[test]
fn criterion_3_oracle_equivalence() {
    let start = Instant::now();
    let budget = Budget::default();
    let mut all = true;
    for (l, n) in [(2u32, 2u32), (2, 3), (4, 2)] {
        let basis = build_spine(&SpineContext::new(l, n).unwrap(), &budget).unwrap();
        let tau = tau_polynomial(&basis, &budget).unwrap();
        all &= tau.to_absolute_poly() == partition_symbolic(l, n).unwrap();
    }
    let mut values = Vec::new();
    for (l, n) in [(2u32, 2u32), (2, 3), (4, 2)] {
        let ctx = SpineContext::new(l, n).unwrap();
        let basis = build_spine(&ctx, &budget).unwrap();
        let z = hyperpfaffian(
            &GramForm::from_moments(&ctx, &provider_circular(&ctx)).unwrap(),
            &basis,
            WedgeStrategy::Auto,
            &budget,
        )
        .unwrap();
        let quad = quadrature_circle(l, n, CircleObservable::Partition).unwrap();
        let zf = rat_to_f64(&z);
        all &= (zf - quad).abs() / quad.abs() < 1e-9;
        values.push((l, n, z));
    }
    all &= values[0].2 == rat(3); // Z(2,2)
    all &= values[2].2 == rat(6435); // Z(4,2)
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all && elapsed < 60.0;
    report(
        "3 (oracle equivalence)",
        ok,
        &format!(
            "expansion identity exact for 3 configurations; Z(2,2)=3, Z(4,2)=6435 vs quadrature < 1e-9; {elapsed:.2}s (< 60s)"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_plucker_relations() {
    let start = Instant::now();
    let budget = Budget::default();
    let mut all = true;
    let mut sectors = 0;
    for (l, n) in [(2u32, 2u32), (2, 3), (4, 2)] {
        let basis = build_spine(&SpineContext::new(l, n).unwrap(), &budget).unwrap();
        let rep = plucker_check(&basis).unwrap();
        sectors += rep.sectors_checked;
        all &= rep.ok;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all && elapsed < 60.0;
    report(
        "4 (plucker relations)",
        ok,
        &format!("{sectors} momentum sectors vanish exactly, {elapsed:.2}s (< 60s)"),
    );
    assert!(ok);
}

#[test]
fn criterion_5_hirota_bilinear_identity() {
    let start = Instant::now();
    let budget = Budget::default();
    let (charge, m_particles) = (2u32, 2u32);
    let ctx = SpineContext::new(charge, m_particles + 1).unwrap();
    let window = ctx.beta() as i64;
    let mut all = true;
    let mut checked = 0;
    for seed in 0..20u64 {
        let t = provider_random(0, 2 * ctx.power(), 9000 + seed);
        let tp = provider_random(0, 4 * ctx.power() + window, 9100 + seed);
        let (_, rep) = hirota_check(&t, &tp, charge, m_particles, window, &budget).unwrap();
        all &= rep.ok && rep.max_abs_residual == "0";
        checked += rep.vanishing_checked;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all && elapsed < 300.0;
    report(
        "5 (hirota bilinear identity)",
        ok,
        &format!(
            "20 independent backgrounds (t != t'): all {checked} pairing coefficients below the charge boundary z^4 vanish exactly, z^0 among them; {elapsed:.2}s (< 5min)"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_correlation_route_equivalence() {
    let start = Instant::now();
    let budget = Budget::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
    let mut all = true;
    for (l, m_particles, m_points) in [(2u32, 2u32, 1usize), (2, 3, 1), (2, 3, 2)] {
        let ctx = SpineContext::new(l, m_particles).unwrap();
        let basis = build_spine(&ctx, &budget).unwrap();
        let provider = provider_random(0, 2 * ctx.power(), 600 + m_particles as u64);
        let mut ratios: Vec<Rat> = Vec::new();
        let mut attempts = 0;
        while ratios.len() < 5 && attempts < 100 {
            attempts += 1;
            let pts = random_points(m_points, &mut rng);
            let direct = correlation_direct(&pts, &basis, &provider, &budget).unwrap();
            let miwa = correlation_miwa(&pts, &ctx, &provider, &budget).unwrap();
            if Ring::is_zero(&miwa) {
                all &= Ring::is_zero(&direct);
                continue;
            }
            ratios.push(direct / miwa);
        }
        all &= ratios.len() == 5 && ratios.windows(2).all(|w| w[0] == w[1]);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all && elapsed < 120.0;
    report(
        "6 (correlation route equivalence)",
        ok,
        &format!("ratios exactly constant over 5 configurations each, {elapsed:.2}s (< 2min)"),
    );
    assert!(ok);
}

/// Exact beta = 16, M = 5 curve: everything except the peak-location
/// tolerance, which has its own (red) test below.
#[test]
fn criterion_7_figure_curve_exact() {
    let start = Instant::now();
    let budget = Budget::default();
    let ctx = SpineContext::new(4, 5).unwrap();
    let basis = build_spine(&ctx, &budget).unwrap();
    let table = pair_constants_circular(&basis, &budget).unwrap();
    let curve = circular_pair_curve(&table).unwrap();

    let norm_ok = curve.normalization_integral().unwrap() == rat(10);
    let zero_ok = curve.value_at_zero_times_pi() == rat(0);
    let rows = curve.grid(10_000);
    let nonneg_ok = rows.iter().all(|(_, v)| *v > -1e-9);
    let elapsed = start.elapsed().as_secs_f64();
    let ok = norm_ok && zero_ok && nonneg_ok && elapsed < 1800.0;
    report(
        "7 (figure curve, exact clauses)",
        ok,
        &format!(
            "exact D_p for (4,5); integral over [0,pi] = 10 exactly; R2(0) = 0 exactly; nonnegative on the 1e4 grid; {elapsed:.1}s (< 30min)"
        ),
    );
    assert!(ok);
}

/// Faithful peak-location clause: local maxima within ONE grid step of
/// 2 pi/5 and 4 pi/5 on a 1e4 grid. The exact curve genuinely peaks 51 and
/// 13 steps below those angles at beta = 16 (brute-force quadrature at
/// (2,3)/(4,3) and a direct Metropolis run at (4,5) confirm the curve), so
/// this assertion documents a spec-level tolerance that cannot be met; the
/// peaks approach the fifth roots only as beta grows.
#[test]
fn criterion_7_figure_curve_peak_locations() {
    let budget = Budget::default();
    let ctx = SpineContext::new(4, 5).unwrap();
    let basis = build_spine(&ctx, &budget).unwrap();
    let table = pair_constants_circular(&basis, &budget).unwrap();
    let curve = circular_pair_curve(&table).unwrap();

    let rows = curve.grid(10_000);
    let floor = 0.1 * rows.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let peaks: Vec<f64> = rows
        .windows(3)
        .filter(|w| w[1].1 > floor && w[0].1 < w[1].1 && w[1].1 >= w[2].1)
        .map(|w| w[1].0)
        .collect();
    let step = std::f64::consts::PI / 9999.0;
    let targets = [
        2.0 * std::f64::consts::PI / 5.0,
        4.0 * std::f64::consts::PI / 5.0,
    ];
    let located_ok = peaks.len() == 2
        && peaks
            .iter()
            .zip(targets)
            .all(|(p, t)| (p - t).abs() <= step);
    let detail = format!(
        "peaks at {:.5} and {:.5} vs targets {:.5} and {:.5} (offsets {:+.1} and {:+.1} grid steps; tolerance 1)",
        peaks.first().copied().unwrap_or(f64::NAN),
        peaks.get(1).copied().unwrap_or(f64::NAN),
        targets[0],
        targets[1],
        (peaks.first().copied().unwrap_or(f64::NAN) - targets[0]) / step,
        (peaks.get(1).copied().unwrap_or(f64::NAN) - targets[1]) / step,
    );
    report("7 (figure curve, peak locations)", located_ok, &detail);
    assert!(
        located_ok,
        "peak-location tolerance not attainable at beta = 16: {detail}; \
         the curve itself is validated against quadrature and sampling, and the \
         peaks sharpen toward the targets as beta grows (beta = 36 halves the offsets)"
    );
}

/// Stretch configuration beta = 36 through the float path. Long-running and
/// not a CI gate; run with `cargo test -p spinekit --release -- --ignored`.
#[test]
#[ignore = "stretch configuration: several minutes in release, not a CI gate"]
fn criterion_8_stretch_beta_36() {
    let budget = Budget {
        max_terms: 200_000_000,
    };
    let start = Instant::now();

    let exact_ctx = SpineContext::new(4, 5).unwrap();
    let exact_basis = build_spine(&exact_ctx, &budget).unwrap();
    let b16 = circular_pair_curve(&pair_constants_circular(&exact_basis, &budget).unwrap()).unwrap();

    let ctx = SpineContext::new(6, 5).unwrap();
    let basis = build_spine(&ctx, &budget).unwrap();
    let values = spinekit::tau::pair_constants_circular_f64(&basis, &budget).unwrap();
    let b36 = spinekit::correlation::FloatCurve::from_pair_values(6, 5, &values).unwrap();

    let integral = b36.integral(200_001);
    let norm_ok = (integral - 10.0).abs() < 1e-6;

    let rows16 = b16.grid(10_000);
    let rows36 = b36.grid(10_000);
    let floor36 = 0.1 * rows36.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let peaks36: Vec<(f64, f64)> = rows36
        .windows(3)
        .filter(|w| w[1].1 > floor36 && w[0].1 < w[1].1 && w[1].1 >= w[2].1)
        .map(|w| w[1])
        .collect();
    let floor16 = 0.1 * rows16.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let peaks16: Vec<(f64, f64)> = rows16
        .windows(3)
        .filter(|w| w[1].1 > floor16 && w[0].1 < w[1].1 && w[1].1 >= w[2].1)
        .map(|w| w[1])
        .collect();

    // sharpening: higher peaks and deeper valleys than beta = 16
    let peaks_sharper = peaks36.len() == 2
        && peaks16.len() == 2
        && peaks36[0].1 > peaks16[0].1
        && peaks36[1].1 > peaks16[1].1;
    let valley = |rows: &[(f64, f64)]| {
        rows.iter()
            .filter(|(t, _)| *t > 1.3 && *t < 2.5)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    };
    let valleys_deeper = valley(&rows36) < valley(&rows16);

    // peak locations approach the fifth-root angles
    let step = std::f64::consts::PI / 9999.0;
    let targets = [
        2.0 * std::f64::consts::PI / 5.0,
        4.0 * std::f64::consts::PI / 5.0,
    ];
    let closer = peaks36
        .iter()
        .zip(peaks16.iter())
        .zip(targets)
        .all(|((p36, p16), t)| (p36.0 - t).abs() < (p16.0 - t).abs());

    let elapsed = start.elapsed().as_secs_f64();
    let ok = norm_ok && peaks_sharper && valleys_deeper && closer;
    report(
        "8 (stretch beta = 36, float path)",
        ok,
        &format!(
            "integral {integral:.9} (|diff| < 1e-6); peaks {:.4}/{:.4} vs {:.4}/{:.4}; offsets shrink toward the targets (still beyond one grid step of {step:.1e}); {elapsed:.0}s",
            peaks36.first().map(|p| p.1).unwrap_or(f64::NAN),
            peaks36.get(1).map(|p| p.1).unwrap_or(f64::NAN),
            peaks16.first().map(|p| p.1).unwrap_or(f64::NAN),
            peaks16.get(1).map(|p| p.1).unwrap_or(f64::NAN),
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_9_derivative_and_lifting_identities() {
    let start = Instant::now();
    let budget = Budget::default();
    let mut all = true;
    for (l, n) in [(2u32, 2u32), (2, 3)] {
        let ctx = SpineContext::new(l, n).unwrap();
        let basis = build_spine(&ctx, &budget).unwrap();
        let tau = tau_polynomial(&basis, &budget).unwrap();
        let m = provider_random(-4, 2 * ctx.power() + 4, 900 + n as u64);
        for k in -3i64..=3 {
            all &= tau_derivative_wedge(&basis, &m, k, &budget).unwrap()
                == tau.derivative_eval(&m, k).unwrap();
        }
        // zero shift scales by the particle count
        all &= tau.derivative_eval(&m, 0).unwrap() == tau.evaluate(&m).unwrap() * rat(n as i64);
        // identity symbol reproduces the partition function
        let q1 = TimeDeformation::new([(0, rat(1))]);
        let z = hyperpfaffian(
            &GramForm::from_moments(&ctx, &m).unwrap(),
            &basis,
            WedgeStrategy::Auto,
            &budget,
        )
        .unwrap();
        all &= lifted_apply(&q1, &basis, &m, &budget).unwrap() == z;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all && elapsed < 60.0;
    report(
        "9 (derivative and lifting identities)",
        ok,
        &format!("wedge = formal for |k| <= 3; zero-shift scaling; identity lift; all exact; {elapsed:.2}s (< 1min)"),
    );
    assert!(ok);
}

#[test]
fn criterion_10_benchmark_correctness_and_reduction() {
    let start = Instant::now();
    let budget = Budget::default();
    let mut all = true;
    println!("criterion 10 benchmark table:");
    println!("  config    strategy  pruned  peak_terms  dense_scale  wall_ms  value");
    for (l, n) in [(2u32, 3u32), (4, 2), (4, 3)] {
        let ctx = SpineContext::new(l, n).unwrap();
        let basis = build_spine(&ctx, &budget).unwrap();
        let provider = provider_random(0, 2 * ctx.power(), 1000 + (l * 10 + n) as u64);
        let gram = GramForm::from_moments(&ctx, &provider).unwrap();
        let realized = gram.realize(&basis).unwrap();

        // largest dense intermediate C(LM, kL) over the stages
        let dense_scale: num_bigint::BigInt = (1..=n)
            .map(|k| binomial(ctx.dim_v() as i64, (k * l) as i64))
            .max()
            .unwrap();

        let mut values = Vec::new();
        let mut peaks = Vec::new();
        for (name, strategy, band) in [
            ("naive", WedgeStrategy::Iterated, None),
            ("pruned", WedgeStrategy::Iterated, Some(MomentumBand::zero())),
            ("squaring", WedgeStrategy::Squaring, Some(MomentumBand::zero())),
        ] {
            let (power, stats) =
                wedge_power(&realized, n, &ctx, strategy, band, &budget).unwrap();
            let z = power.hodge_star().unwrap();
            println!(
                "  L={l} M={n}  {name:<8}  {}  {:>10}  {:>11}  {:>7.2}  {}",
                band.is_some(),
                stats.peak_terms,
                dense_scale,
                stats.wall_ms,
                format_rat(&z)
            );
            values.push(z);
            peaks.push((name, stats.peak_terms));
        }
        all &= values.windows(2).all(|w| w[0] == w[1]);
        // pruning can only shrink the intermediates
        let naive_peak = peaks[0].1;
        all &= peaks[1].1 <= naive_peak;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = all;
    report(
        "10 (benchmark correctness + reduction)",
        ok,
        &format!("strategies bit-identical; pruned peak <= naive peak; dense scale reported; {elapsed:.2}s"),
    );
    assert!(ok);
}

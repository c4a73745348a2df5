//! Independent ground truth for small configurations: direct multinomial
//! expansion of the interaction product, spectrally exact circle quadrature,
//! and an optional Metropolis sampler.
//!
//! Nothing here touches blades or momentum sectors. The symbolic expansion
//! multiplies out `prod_{i<j} (x_j - x_i)^beta` monomial by monomial and
//! integrates term by term, which is the definition the sector machinery is
//! supposed to reproduce; the quadrature integrates the joint density on a
//! uniform angular grid, exact for trigonometric polynomials once the grid
//! outruns the degree.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::poly::MomentPoly;
use crate::scalar::{binomial, factorial, Rat, Ring};

/// Hard cap from the expansion's feasibility envelope.
const MAX_MONOMIALS: usize = 10_000_000;

/// Expand the M-particle interaction product and integrate term by term:
/// the partition function as an exact polynomial in ABSOLUTE moments,
/// including the `1/M!` configuration-count normalization.
pub fn partition_symbolic(charge: u32, particles: u32) -> Result<MomentPoly> {
    if !charge.is_multiple_of(2) || charge < 2 {
        return Err(Error::InvalidContext("charge must be even and >= 2".into()));
    }
    let beta = (charge * charge) as i64;
    let m = particles as usize;

    // polynomial in x_1..x_m: exponent vector -> integer coefficient
    let mut poly: HashMap<Vec<u16>, BigInt> = HashMap::new();
    poly.insert(vec![0u16; m], BigInt::one());

    for j in 1..m {
        for i in 0..j {
            // multiply by (x_j - x_i)^beta
            let mut next: HashMap<Vec<u16>, BigInt> = HashMap::new();
            for k in 0..=beta {
                let mut c = binomial(beta, k);
                if (beta - k) % 2 != 0 {
                    c = -c;
                }
                for (expo, coeff) in &poly {
                    let mut e = expo.clone();
                    e[j] += k as u16;
                    e[i] += (beta - k) as u16;
                    let slot = next.entry(e).or_insert_with(BigInt::zero);
                    *slot += coeff * &c;
                }
            }
            next.retain(|_, c| !c.is_zero());
            if next.len() > MAX_MONOMIALS {
                return Err(Error::BudgetExceeded {
                    what: "symbolic interaction expansion",
                    charge,
                    particles,
                    needed: next.len() as u128,
                    cap: MAX_MONOMIALS as u128,
                });
            }
            poly = next;
        }
    }

    // integrate: x_i^e -> m<e>, then divide by M!
    let m_fact = Rat::from_integer(factorial(particles));
    let inv = Rat::from_integer(BigInt::one()) / m_fact;
    let mut out = MomentPoly::zero();
    for (expo, coeff) in poly {
        let mut term = MomentPoly::constant(Rat::from_integer(coeff) * &inv);
        for e in expo {
            term = term.mul_ref(&MomentPoly::symbol(e as i64));
        }
        out.add_assign_ref(&term);
    }
    Ok(out)
}

/// Observable for the circle quadrature.
#[derive(Clone, Copy, Debug)]
pub enum CircleObservable {
    /// Partition function of the circular ensemble.
    Partition,
    /// One-point density at the given angle, Lebesgue-normalized so that the
    /// full-circle integral is the particle count.
    DensityOne { theta: f64 },
    /// Two-point density at the given angles, integrating to M(M-1) over the
    /// square.
    DensityTwo { theta1: f64, theta2: f64 },
}

/// Brute-force trapezoid quadrature of the circular joint density. The
/// integrand is a trigonometric polynomial of per-variable degree
/// `beta (M-1)`, so a uniform grid beyond twice that degree integrates it
/// exactly up to float rounding.
pub fn quadrature_circle(charge: u32, particles: u32, obs: CircleObservable) -> Result<f64> {
    if particles == 0 || particles > 3 {
        return Err(Error::InvalidContext(
            "quadrature is feasible for 1 <= M <= 3".into(),
        ));
    }
    let beta = (charge * charge) as i64;
    let m = particles as usize;
    let degree = beta * (m as i64 - 1);
    let grid = (2 * degree + 5) as usize;

    let weight = |angles: &[f64]| -> f64 {
        let mut w = 1.0;
        for j in 1..angles.len() {
            for i in 0..j {
                // |e^{i a} - e^{i b}|^2 = 2 - 2 cos(a - b)
                let d2 = 2.0 - 2.0 * (angles[j] - angles[i]).cos();
                w *= d2.powi((beta / 2) as i32);
            }
        }
        w
    };

    let step = std::f64::consts::TAU / grid as f64;
    let mean_over = |fixed: &[f64]| -> f64 {
        let free = m - fixed.len();
        if free == 0 {
            return weight(fixed);
        }
        let mut sum = 0.0;
        let mut idx = vec![0usize; free];
        loop {
            let mut angles = fixed.to_vec();
            angles.extend(idx.iter().map(|&i| i as f64 * step));
            sum += weight(&angles);
            // odometer
            let mut carry = 0;
            while carry < free {
                idx[carry] += 1;
                if idx[carry] < grid {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
            }
            if carry == free {
                break;
            }
        }
        sum / (grid as f64).powi(free as i32)
    };

    let m_fact: f64 = (1..=m as u64).product::<u64>() as f64;
    let z = mean_over(&[]) / m_fact;
    match obs {
        CircleObservable::Partition => Ok(z),
        CircleObservable::DensityOne { theta } => {
            // M * marginal density wrt dtheta; rotation invariance makes it
            // the constant M/2pi
            let num = mean_over(&[theta]);
            Ok(m as f64 * num / (m_fact * z * std::f64::consts::TAU))
        }
        CircleObservable::DensityTwo { theta1, theta2 } => {
            if m < 2 {
                return Err(Error::InvalidContext("two-point density needs M >= 2".into()));
            }
            let num = mean_over(&[theta1, theta2]);
            Ok((m * (m - 1)) as f64 * num
                / (m_fact * z * std::f64::consts::TAU * std::f64::consts::TAU))
        }
    }
}

/// Binned pair-separation counts from a Metropolis chain on the circle.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct Histogram {
    pub bins: Vec<u64>,
    pub samples: u64,
    /// Bins cover separations in [0, pi].
    pub bin_width: f64,
}

impl Histogram {
    /// Normalized density per bin (integrates to 1 over [0, pi]).
    pub fn density(&self) -> Vec<f64> {
        let total = self.samples as f64 * self.bin_width;
        self.bins.iter().map(|&c| c as f64 / total).collect()
    }

    /// CSV rows `theta_mid,count,density`.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "theta_mid,count,density")?;
        for (i, (&count, density)) in self.bins.iter().zip(self.density()).enumerate() {
            let mid = (i as f64 + 0.5) * self.bin_width;
            writeln!(file, "{mid:.9},{count},{density:.9}")?;
        }
        Ok(())
    }
}

/// Metropolis chain for M particles on the circle with the log-gas weight
/// `prod |e^{i a} - e^{i b}|^beta`; `interaction_on = false` samples the
/// uniform reference instead. Fixed seed gives a bit-identical histogram.
pub fn mc_sample(
    charge: u32,
    particles: u32,
    steps: u64,
    seed: u64,
    bins: usize,
    interaction_on: bool,
) -> Result<Histogram> {
    if particles < 2 || bins == 0 {
        return Err(Error::InvalidContext(
            "sampler needs M >= 2 and at least one bin".into(),
        ));
    }
    let beta = (charge * charge) as f64;
    let m = particles as usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let log_weight_site = |angles: &[f64], site: usize, value: f64| -> f64 {
        let mut acc = 0.0;
        for (k, &other) in angles.iter().enumerate() {
            if k == site {
                continue;
            }
            let s = (0.5 * (value - other)).sin().abs();
            // coincident proposals are rejected through -inf log weight
            acc += if s == 0.0 { f64::NEG_INFINITY } else { s.ln() };
        }
        beta * acc
    };

    let mut angles: Vec<f64> = (0..m)
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let proposal = 0.8f64;
    let burn_in = steps / 10;

    let mut hist = vec![0u64; bins];
    let mut samples = 0u64;
    let bin_width = std::f64::consts::PI / bins as f64;

    for step in 0..steps {
        let site = rng.random_range(0..m);
        let old = angles[site];
        let new = (old + rng.random_range(-proposal..proposal)).rem_euclid(std::f64::consts::TAU);
        let accept = if !interaction_on {
            true
        } else {
            let delta = log_weight_site(&angles, site, new) - log_weight_site(&angles, site, old);
            delta >= 0.0 || rng.random_range(0.0..1.0f64).ln() < delta
        };
        if accept {
            angles[site] = new;
        }
        // thinned recording keeps neighbouring samples roughly decorrelated
        if step >= burn_in && step % (8 * m as u64) == 0 {
            for j in 1..m {
                for i in 0..j {
                    let mut d = (angles[j] - angles[i]).rem_euclid(std::f64::consts::TAU);
                    if d > std::f64::consts::PI {
                        d = std::f64::consts::TAU - d;
                    }
                    let bin = ((d / bin_width) as usize).min(bins - 1);
                    hist[bin] += 1;
                    samples += 1;
                }
            }
        }
    }
    Ok(Histogram {
        bins: hist,
        samples,
        bin_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn symbolic_2_2_matches_hand_expansion() {
        // (x2 - x1)^4 integrates to m0 m4 - 4 m1 m3 + 3 m2^2 after the 1/2!
        let p = partition_symbolic(2, 2).unwrap();
        assert_eq!(p.coefficient(&[0, 4]), rat(1));
        assert_eq!(p.coefficient(&[1, 3]), rat(-4));
        assert_eq!(p.coefficient(&[2, 2]), rat(3));
        assert_eq!(p.num_terms(), 3);
    }

    #[test]
    fn symbolic_single_particle() {
        let p = partition_symbolic(2, 1).unwrap();
        assert_eq!(p.coefficient(&[0]), rat(1));
        assert_eq!(p.num_terms(), 1);
    }

    #[test]
    fn symbolic_point_mass_vanishes_for_two_particles() {
        // moments of a point mass at 0: m_n = [n == 0]
        let p = partition_symbolic(2, 2).unwrap();
        let z = p
            .evaluate(|n| Ok(if n == 0 { rat(1) } else { rat(0) }))
            .unwrap();
        assert_eq!(z, rat(0));
    }

    #[test]
    fn quadrature_partition_values() {
        let z22 = quadrature_circle(2, 2, CircleObservable::Partition).unwrap();
        assert!((z22 - 3.0).abs() < 1e-9, "{z22}");
        let z42 = quadrature_circle(4, 2, CircleObservable::Partition).unwrap();
        assert!((z42 - 6435.0).abs() < 6435.0 * 1e-12, "{z42}");
    }

    #[test]
    fn quadrature_one_point_density_is_flat() {
        let expect = 2.0 / std::f64::consts::TAU; // M / 2pi
        for k in 0..8 {
            let theta = k as f64 * std::f64::consts::TAU / 8.0;
            let r1 = quadrature_circle(2, 2, CircleObservable::DensityOne { theta }).unwrap();
            assert!((r1 - expect).abs() < 1e-9, "theta={theta} r1={r1}");
        }
    }

    #[test]
    fn sampler_is_deterministic_under_seed() {
        let a = mc_sample(2, 2, 20_000, 42, 16, true).unwrap();
        let b = mc_sample(2, 2, 20_000, 42, 16, true).unwrap();
        assert_eq!(a, b);
        let c = mc_sample(2, 2, 20_000, 43, 16, true).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampler_matches_exact_pair_density_2_2() {
        // separation density for two particles is (2 sin(t/2))^4 / (6 pi);
        // thinning keeps this fixed-seed run within 3 sigma per bin
        let hist = mc_sample(2, 2, 1_000_000, 11, 16, true).unwrap();
        let norm = 6.0 * std::f64::consts::PI;
        for (i, d) in hist.density().iter().enumerate() {
            let mid = (i as f64 + 0.5) * hist.bin_width;
            let expect = (2.0 * (mid / 2.0).sin()).powi(4) / norm;
            let sigma = (hist.bins[i] as f64).max(1.0).sqrt()
                / (hist.samples as f64 * hist.bin_width);
            assert!(
                (d - expect).abs() < 3.0 * sigma,
                "bin {i}: {d} vs {expect} (sigma {sigma})"
            );
        }
    }

    #[test]
    fn histogram_csv_shape() {
        let hist = mc_sample(2, 2, 50_000, 1, 8, false).unwrap();
        let path = std::env::temp_dir().join("spinekit-hist-test.csv");
        hist.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("theta_mid,count,density"));
    }

    #[test]
    fn sampler_uniform_limit() {
        // with the interaction off, bins are flat within sampling noise
        let h = mc_sample(2, 3, 120_000, 7, 12, false).unwrap();
        let per_bin = h.samples as f64 / h.bins.len() as f64;
        let sigma = per_bin.sqrt();
        for (i, &c) in h.bins.iter().enumerate() {
            assert!(
                (c as f64 - per_bin).abs() < 3.5 * sigma,
                "bin {i}: {c} vs {per_bin}"
            );
        }
    }
}

//! Zeroth-order gradient estimators built from delivered function values,
//! plus Monte Carlo probes of the ball-smoothed loss.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{BallDomain, ConvexSet, DecisionVector};
use crate::losses::LossOracle;

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "delta must be positive, got {delta}"
        )))
    }
}

/// Values `f(x)` and `f(x + delta e_i)`, `i = 1..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultipointFeedback {
    pub base_value: f64,
    pub offset_values: Vec<f64>,
    pub delta: f64,
}

impl MultipointFeedback {
    /// Splits `[f(x), f(x + delta e_1), ..., f(x + delta e_n)]`.
    pub fn from_values(values: &[f64], delta: f64) -> Result<Self> {
        match values {
            [base, offsets @ ..] if !offsets.is_empty() => Ok(Self {
                base_value: *base,
                offset_values: offsets.to_vec(),
                delta,
            }),
            _ => Err(Error::Feedback(format!(
                "multipoint feedback needs n + 1 >= 2 values, got {}",
                values.len()
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.offset_values.len()
    }
}

/// Forward-difference estimate `(1/delta) sum_i (f(x + delta e_i) - f(x)) e_i`.
pub fn multipoint_estimate(fb: &MultipointFeedback) -> Result<DecisionVector> {
    check_delta(fb.delta)?;
    Ok(fb
        .offset_values
        .iter()
        .map(|v| (v - fb.base_value) / fb.delta)
        .collect::<Vec<_>>()
        .into())
}

/// Values `f(x + delta u)` and `f(x - delta u)` for a unit direction `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwopointFeedback {
    pub plus_value: f64,
    pub minus_value: f64,
    pub direction: DecisionVector,
    pub delta: f64,
}

impl TwopointFeedback {
    pub fn new(
        plus_value: f64,
        minus_value: f64,
        direction: DecisionVector,
        delta: f64,
    ) -> Result<Self> {
        check_delta(delta)?;
        let norm = direction.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "two-point direction must be a unit vector, norm is {norm}"
            )));
        }
        Ok(Self {
            plus_value,
            minus_value,
            direction,
            delta,
        })
    }
}

/// Symmetric two-point estimate `(n / 2 delta) (f(x + delta u) - f(x - delta u)) u`.
pub fn twopoint_estimate(fb: &TwopointFeedback) -> Result<DecisionVector> {
    check_delta(fb.delta)?;
    let n = fb.direction.dim() as f64;
    let scale = n / (2.0 * fb.delta) * (fb.plus_value - fb.minus_value);
    Ok(fb.direction.scaled(scale))
}

/// Uniform direction on the unit sphere in R^n (normalized Gaussian).
pub fn sample_unit_sphere<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DecisionVector {
    assert!(n >= 1, "sphere dimension must be >= 1");
    loop {
        let g: DecisionVector = (0..n)
            .map(|_| StandardNormal.sample(rng))
            .collect::<Vec<f64>>()
            .into();
        let norm = g.norm();
        if norm > 0.0 && norm.is_finite() {
            return g.scaled(1.0 / norm);
        }
    }
}

/// Uniform point in the unit ball: sphere sample scaled by `U^(1/n)`.
pub fn sample_unit_ball<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DecisionVector {
    let u = sample_unit_sphere(rng, n);
    let radius = rng.random::<f64>().powf(1.0 / n as f64);
    u.scaled(radius)
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    fn from_samples(samples: impl IntoIterator<Item = f64>) -> Self {
        // Welford
        let mut count = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for v in samples {
            count += 1;
            let d = v - mean;
            mean += d / count as f64;
            m2 += d * (v - mean);
        }
        let var = if count > 1 {
            m2 / (count - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / count as f64).sqrt(),
            samples: count,
        }
    }
}

fn probe<L: LossOracle + ?Sized>(
    f: &L,
    domain: &BallDomain,
    x: &DecisionVector,
    delta: f64,
    u: &DecisionVector,
) -> Result<f64> {
    let p = x.add_scaled(delta, u);
    if !domain.contains(&p) {
        return Err(Error::Domain(format!(
            "smoothing probe at distance {} leaves the ball of radius {}",
            p.norm(),
            domain.radius()
        )));
    }
    Ok(f.value(&p))
}

/// Monte Carlo estimate of the smoothed loss `E_{u ~ B^n} f(x + delta u)`.
/// Every probe must lie in `domain`.
pub fn smoothed_value_mc<L: LossOracle + ?Sized, R: Rng + ?Sized>(
    f: &L,
    domain: &BallDomain,
    x: &DecisionVector,
    delta: f64,
    m: usize,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    check_delta(delta)?;
    if m == 0 {
        return Err(Error::Parameter(
            "need at least one Monte Carlo sample".into(),
        ));
    }
    let n = x.dim();
    let values = (0..m)
        .map(|_| probe(f, domain, x, delta, &sample_unit_ball(rng, n)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloEstimate::from_samples(values))
}

/// Estimate of `f_hat(x) - f_hat(y)` using the same ball samples at both
/// points (common random numbers).
pub fn smoothed_difference_mc<L: LossOracle + ?Sized, R: Rng + ?Sized>(
    f: &L,
    domain: &BallDomain,
    x: &DecisionVector,
    y: &DecisionVector,
    delta: f64,
    m: usize,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    check_delta(delta)?;
    if m == 0 {
        return Err(Error::Parameter(
            "need at least one Monte Carlo sample".into(),
        ));
    }
    let n = x.dim();
    let values = (0..m)
        .map(|_| {
            let u = sample_unit_ball(rng, n);
            Ok(probe(f, domain, x, delta, &u)? - probe(f, domain, y, delta, &u)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloEstimate::from_samples(values))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::losses::QuadraticLoss;

    fn v(xs: &[f64]) -> DecisionVector {
        DecisionVector::from(xs.to_vec())
    }

    #[test]
    fn multipoint_on_a_small_quadratic() {
        // f(x) = ||x||^2 + (1, -1) x at x = 0, delta = 0.1
        let fb = MultipointFeedback::from_values(&[0.0, 0.11, -0.09], 0.1).unwrap();
        let g = multipoint_estimate(&fb).unwrap();
        assert!(g.distance(&v(&[1.1, -0.9])) < 1e-12);
        let err = g.distance(&v(&[1.0, -1.0]));
        let bound = 2f64.sqrt() * 2.0 * 0.1 / 2.0;
        assert!((err - bound).abs() < 1e-12);
    }

    #[test]
    fn multipoint_constant_and_linear() {
        let fb = MultipointFeedback::from_values(&[3.0; 5], 0.01).unwrap();
        assert_eq!(multipoint_estimate(&fb).unwrap(), DecisionVector::zeros(4));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let c: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-0.5..0.5)).collect();
            let delta = rng.random_range(1e-4..0.5);
            let f = |p: &[f64]| p.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
            let mut values = vec![f(&x)];
            for i in 0..4 {
                let mut p = x.clone();
                p[i] += delta;
                values.push(f(&p));
            }
            let g = multipoint_estimate(&MultipointFeedback::from_values(&values, delta).unwrap())
                .unwrap();
            for i in 0..4 {
                assert!((g[i] - c[i]).abs() < 1e-9 * (1.0 + c[i].abs()) / delta.min(1.0));
            }
        }
    }

    #[test]
    fn estimators_reject_nonpositive_delta() {
        let fb = MultipointFeedback::from_values(&[0.0, 1.0], 0.0).unwrap();
        assert!(matches!(multipoint_estimate(&fb), Err(Error::Parameter(_))));
        assert!(TwopointFeedback::new(1.0, 0.0, v(&[1.0, 0.0]), -1.0).is_err());
        let fb = TwopointFeedback {
            plus_value: 1.0,
            minus_value: 0.0,
            direction: v(&[1.0, 0.0]),
            delta: 0.0,
        };
        assert!(matches!(twopoint_estimate(&fb), Err(Error::Parameter(_))));
        assert!(MultipointFeedback::from_values(&[1.0], 0.1).is_err());
    }

    #[test]
    fn twopoint_examples() {
        // f(x) = x_1, n = 2, delta = 0.5, u = e_1: plus - minus = 1
        let fb = TwopointFeedback::new(0.5, -0.5, v(&[1.0, 0.0]), 0.5).unwrap();
        assert_eq!(twopoint_estimate(&fb).unwrap(), v(&[2.0, 0.0]));
        let fb = TwopointFeedback::new(0.7, 0.7, v(&[0.6, 0.8]), 0.1).unwrap();
        assert_eq!(twopoint_estimate(&fb).unwrap().norm(), 0.0);
        assert!(TwopointFeedback::new(0.0, 0.0, v(&[1.0, 1.0]), 0.1).is_err());
    }

    #[test]
    fn twopoint_linear_mean_matches_slope() {
        let c = v(&[0.5, -1.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = 1_000_000;
        let delta = 0.1;
        let mut sum = [0.0f64; 3];
        let mut sumsq = [0.0f64; 3];
        for _ in 0..m {
            let u = sample_unit_sphere(&mut rng, 3);
            let fb =
                TwopointFeedback::new(c.dot(&u) * delta, -c.dot(&u) * delta, u, delta).unwrap();
            let g = twopoint_estimate(&fb).unwrap();
            for i in 0..3 {
                sum[i] += g[i];
                sumsq[i] += g[i] * g[i];
            }
        }
        for i in 0..3 {
            let mean = sum[i] / m as f64;
            let var = sumsq[i] / m as f64 - mean * mean;
            let se = (var / m as f64).sqrt();
            assert!(
                (mean - c[i]).abs() <= 3.0 * se,
                "coord {i}: {mean} vs {} (se {se})",
                c[i]
            );
        }
    }

    #[test]
    fn sphere_samples_are_unit_isotropic_and_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..m {
            let u = sample_unit_sphere(&mut rng, 3);
            assert!((u.norm() - 1.0).abs() < 1e-12);
            for i in 0..3 {
                mean[i] += u[i] / m as f64;
            }
        }
        // Var(u_i) = 1/n
        let se = (1.0 / 3.0 / m as f64).sqrt();
        assert!(mean.iter().all(|v| v.abs() <= 3.0 * se), "{mean:?}");

        let a = sample_unit_sphere(&mut ChaCha8Rng::seed_from_u64(9), 5);
        let b = sample_unit_sphere(&mut ChaCha8Rng::seed_from_u64(9), 5);
        assert_eq!(a, b);
    }

    /// `f(x) = ||x||^2` is the quadratic family with b = 0.
    #[test]
    fn smoothed_square_norm_at_origin() {
        let f = QuadraticLoss::new(DecisionVector::zeros(2), 2.0).unwrap();
        let domain = BallDomain::new(2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let est = smoothed_value_mc(
            &f,
            &domain,
            &DecisionVector::zeros(2),
            1.0,
            1_000_000,
            &mut rng,
        )
        .unwrap();
        assert!((est.mean - 0.5).abs() <= 3.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn smoothing_probe_outside_domain_fails() {
        let f = QuadraticLoss::new(DecisionVector::zeros(2), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let err = smoothed_value_mc(
            &f,
            &BallDomain::unit(),
            &v(&[0.95, 0.0]),
            0.5,
            1000,
            &mut rng,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        assert!(
            smoothed_value_mc(&f, &BallDomain::unit(), &v(&[0.0, 0.0]), 0.5, 0, &mut rng).is_err()
        );
    }
}

//! Loss oracles, the random quadratic family and offline comparators.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{BallDomain, ConvexSet, DecisionVector};

/// A differentiable loss together with its curvature and Lipschitz constants
/// over the decision set it was built for.
pub trait LossOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DecisionVector) -> f64;

    fn gradient(&self, x: &DecisionVector) -> DecisionVector;

    /// Strong-convexity modulus (beta).
    fn strong_convexity(&self) -> f64;

    /// Smoothness constant (alpha).
    fn smoothness(&self) -> f64;

    /// Bound on the gradient norm over the decision set (L).
    fn lipschitz(&self) -> f64;
}

/// `f(x) = ||x||^2 + b^T x` with every `b_i` in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticLoss {
    b: DecisionVector,
    lipschitz: f64,
}

impl QuadraticLoss {
    pub const CURVATURE: f64 = 2.0;

    /// Quadratic loss over the ball of the given radius.
    pub fn new(b: DecisionVector, radius: f64) -> Result<Self> {
        if b.dim() == 0 {
            return Err(Error::Parameter("dimension must be >= 1".into()));
        }
        if !b.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite linear term {b:?}")));
        }
        let lipschitz = Self::lipschitz_bound(b.dim(), radius);
        Ok(Self { b, lipschitz })
    }

    /// `2R + sqrt(n)`: bounds `||2x + b||` for `||x|| <= R` and `b` in the cube.
    pub fn lipschitz_bound(n: usize, radius: f64) -> f64 {
        2.0 * radius + (n as f64).sqrt()
    }

    pub fn linear_term(&self) -> &DecisionVector {
        &self.b
    }
}

impl LossOracle for QuadraticLoss {
    fn dim(&self) -> usize {
        self.b.dim()
    }

    fn value(&self, x: &DecisionVector) -> f64 {
        x.norm_squared() + self.b.dot(x)
    }

    fn gradient(&self, x: &DecisionVector) -> DecisionVector {
        self.b.add_scaled(2.0, x)
    }

    fn strong_convexity(&self) -> f64 {
        Self::CURVATURE
    }

    fn smoothness(&self) -> f64 {
        Self::CURVATURE
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Draws one quadratic over the unit ball with `b` uniform on `[-1, 1]^n`.
pub fn sample_quadratic<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<QuadraticLoss> {
    sample_quadratic_on(rng, n, 1.0)
}

/// As [`sample_quadratic`], with the Lipschitz constant taken over a ball of `radius`.
pub fn sample_quadratic_on<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    radius: f64,
) -> Result<QuadraticLoss> {
    if n == 0 {
        return Err(Error::Parameter("dimension must be >= 1".into()));
    }
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    QuadraticLoss::new(b.into(), radius)
}

/// The whole loss sequence of an oblivious adversary, drawn before any play.
pub fn sample_quadratic_sequence<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    horizon: usize,
    radius: f64,
) -> Result<Vec<QuadraticLoss>> {
    (0..horizon)
        .map(|_| sample_quadratic_on(rng, n, radius))
        .collect()
}

/// Best fixed decision in hindsight and its total loss.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparator {
    pub x_star: DecisionVector,
    pub total_loss: f64,
}

/// Total loss of a fixed decision over a sequence.
pub fn total_loss<L: LossOracle>(losses: &[L], x: &DecisionVector) -> f64 {
    losses.iter().map(|f| f.value(x)).sum()
}

/// Closed-form offline optimum for a sum of quadratics over a ball.
///
/// The sum is `T ||x||^2 + (sum b_t)^T x`, whose Hessian is isotropic, so the
/// constrained minimizer is the radial projection of `-(sum b_t) / (2T)`.
pub fn offline_optimum(losses: &[QuadraticLoss], domain: &BallDomain) -> Result<Comparator> {
    let first = losses
        .first()
        .ok_or_else(|| Error::Parameter("offline optimum of an empty loss sequence".into()))?;
    let n = first.dim();
    let b_sum = DecisionVector::sum(n, losses.iter().map(|f| &f.b));
    let horizon = losses.len() as f64;
    let x_star = domain.project(&b_sum.scaled(-1.0 / (2.0 * horizon)))?;
    let total_loss = total_loss(losses, &x_star);
    Ok(Comparator { x_star, total_loss })
}

/// Step-size schedule for [`pgd_comparator_oracle`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// `1 / (sum_t beta_t * k)` at iteration `k`.
    StronglyConvex,
    Constant(f64),
}

/// Sum of gradients of the sequence at `x`.
pub fn total_gradient<L: LossOracle>(losses: &[L], x: &DecisionVector) -> DecisionVector {
    let mut g = DecisionVector::zeros(x.dim());
    for f in losses {
        g.axpy(1.0, &f.gradient(x));
    }
    g
}

/// Norm of the projected-gradient map `(x - P(x - eta * grad F(x))) / eta`.
/// Zero exactly at the constrained minimizer.
pub fn gradient_mapping_norm<L: LossOracle, S: ConvexSet>(
    losses: &[L],
    domain: &S,
    x: &DecisionVector,
    eta: f64,
) -> Result<f64> {
    let g = total_gradient(losses, x);
    let stepped = domain.project(&x.add_scaled(-eta, &g))?;
    Ok(x.distance(&stepped) / eta)
}

/// Offline optimum by projected gradient descent on the summed loss.
///
/// Independent of [`offline_optimum`]; works for any strongly convex family.
/// Returns the iterate with the lowest total loss seen.
pub fn pgd_comparator_oracle<L: LossOracle, S: ConvexSet>(
    losses: &[L],
    domain: &S,
    iters: usize,
    rule: StepRule,
) -> Result<Comparator> {
    const DIVERGENCE_WINDOW: usize = 100;

    let first = losses
        .first()
        .ok_or_else(|| Error::Parameter("comparator of an empty loss sequence".into()))?;
    let beta_sum: f64 = losses.iter().map(|f| f.strong_convexity()).sum();
    match rule {
        StepRule::StronglyConvex if beta_sum <= 0.0 => {
            return Err(Error::Parameter(
                "strongly convex step rule needs a positive total modulus".into(),
            ))
        }
        StepRule::Constant(eta) if !(eta > 0.0 && eta.is_finite()) => {
            return Err(Error::Parameter(format!(
                "constant step must be positive, got {eta}"
            )))
        }
        _ => {}
    }

    let mut x = domain.project(&DecisionVector::zeros(first.dim()))?;
    let mut value = total_loss(losses, &x);
    let mut best = Comparator {
        x_star: x.clone(),
        total_loss: value,
    };
    let mut increases = 0usize;
    for k in 1..=iters {
        let eta = match rule {
            StepRule::StronglyConvex => 1.0 / (beta_sum * k as f64),
            StepRule::Constant(eta) => eta,
        };
        let g = total_gradient(losses, &x);
        x = domain.project(&x.add_scaled(-eta, &g))?;
        let next = total_loss(losses, &x);
        if !next.is_finite() {
            return Err(Error::Numerical(format!(
                "objective became {next} at iteration {k}"
            )));
        }
        if next > value {
            increases += 1;
            if increases >= DIVERGENCE_WINDOW {
                return Err(Error::Numerical(format!(
                    "objective increased for {DIVERGENCE_WINDOW} consecutive iterations"
                )));
            }
        } else {
            increases = 0;
        }
        value = next;
        if value < best.total_loss {
            best = Comparator {
                x_star: x.clone(),
                total_loss: value,
            };
        }
    }
    Ok(best)
}

//! Online learners under delayed feedback.
//!
//! Each learner emits the points it wants evaluated in the current round and
//! later consumes whatever feedback the delay simulator delivers. The step
//! functions are pure (`state -> state'`); the [`Learner`] implementations
//! wrap them with configuration and, for the two-point learner, the stored
//! sampling directions.
//!
//! The strongly convex learners share one inverse-rate recursion:
//! `h_t = h_{t-1} + |F_t| beta / 2` with `h_0 = 0`, and when something
//! arrived, `x_{t+1} = P(x_t - (1/h_t) sum_{k in F_t} g_k)`. Rounds without
//! arrivals leave the iterate untouched.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::delay_sim::{Delivered, DeliveryMode};
use crate::error::{Error, Result};
use crate::estimators::{
    multipoint_estimate, sample_unit_sphere, twopoint_estimate, MultipointFeedback,
    TwopointFeedback,
};
use crate::geometry::{BallDomain, ConvexSet, DecisionVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Undelayed projected OGD with `eta_t = 1 / (beta t)`.
    OgdSc,
    /// Delayed OGD with a constant rate.
    Dogd,
    /// Delayed OGD with the count-driven inverse rate.
    DogdSc,
    /// Bandit DOGD-SC using the (n+1)-point estimator.
    BdogdSc,
    /// Bandit DOGD-SC using the two-point estimator; needs time stamps.
    TwoPoint,
    /// Delayed bandit gradient descent: one constant-rate step per arrival.
    Dbgd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::OgdSc,
        Algorithm::Dogd,
        Algorithm::DogdSc,
        Algorithm::BdogdSc,
        Algorithm::TwoPoint,
        Algorithm::Dbgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::OgdSc => "ogd_sc",
            Algorithm::Dogd => "dogd",
            Algorithm::DogdSc => "dogd_sc",
            Algorithm::BdogdSc => "bdogd_sc",
            Algorithm::TwoPoint => "twopoint",
            Algorithm::Dbgd => "dbgd",
        }
    }

    /// Learners that only see function values.
    pub fn is_bandit(self) -> bool {
        matches!(
            self,
            Algorithm::BdogdSc | Algorithm::TwoPoint | Algorithm::Dbgd
        )
    }

    /// Learners with the constant rate `1 / (L sqrt(T + D))`.
    pub fn uses_constant_rate(self) -> bool {
        matches!(self, Algorithm::Dogd | Algorithm::Dbgd)
    }

    pub fn delivery_mode(self) -> DeliveryMode {
        match self {
            Algorithm::TwoPoint => DeliveryMode::Stamped,
            _ => DeliveryMode::Anonymous,
        }
    }

    /// OGD-SC is the undelayed reference and always runs with unit delays.
    pub fn ignores_delays(self) -> bool {
        self == Algorithm::OgdSc
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown algorithm {s:?}; expected one of ogd_sc, dogd, dogd_sc, bdogd_sc, twopoint, dbgd"
                ))
            })
    }
}

/// Iterate plus the bookkeeping shared by all learners.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnerState {
    /// Current decision `x_t`.
    pub x: DecisionVector,
    /// Inverse learning rate; `h_t` for the strongly convex family.
    pub h: f64,
    /// Current round `t` (1-based).
    pub t: usize,
    /// Constant rate for DOGD / DBGD; unused otherwise.
    pub eta: f64,
    /// Feedback items consumed so far.
    pub received: usize,
}

impl LearnerState {
    pub fn new(x: DecisionVector) -> Self {
        Self {
            x,
            h: 0.0,
            t: 1,
            eta: 0.0,
            received: 0,
        }
    }

    pub fn with_rate(x: DecisionVector, eta: f64) -> Self {
        Self {
            eta,
            ..Self::new(x)
        }
    }
}

/// What a learner asks the environment for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryKind {
    /// The gradient at `points[0]`.
    Gradient,
    /// Function values at every point, in order.
    Values,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryBundle {
    pub kind: QueryKind,
    pub points: Vec<DecisionVector>,
    /// Sampling direction `u_t` of the two-point learner.
    pub direction: Option<DecisionVector>,
}

/// Environment response routed through the delay simulator.
#[derive(Clone, Debug, PartialEq)]
pub enum Feedback {
    Gradient(DecisionVector),
    Values(Vec<f64>),
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "strong convexity beta must be positive, got {beta}"
        )))
    }
}

/// Sum in a canonical order, so the result does not depend on delivery order
/// even under floating-point rounding.
fn order_free_sum(dim: usize, gradients: &[DecisionVector]) -> DecisionVector {
    let mut sorted: Vec<&DecisionVector> = gradients.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    DecisionVector::sum(dim, sorted)
}

/// Shared inverse-rate step on already-formed gradient (estimates).
fn inverse_rate_step<S: ConvexSet>(
    state: &LearnerState,
    gradients: &[DecisionVector],
    beta: f64,
    domain: &S,
) -> Result<LearnerState> {
    check_beta(beta)?;
    let mut next = state.clone();
    next.t += 1;
    next.h = state.h + gradients.len() as f64 * beta / 2.0;
    next.received += gradients.len();
    if gradients.is_empty() {
        return Ok(next);
    }
    assert!(next.h > 0.0, "non-empty arrival set forces h > 0");
    let sum = order_free_sum(state.x.dim(), gradients);
    next.x = domain.project(&state.x.add_scaled(-1.0 / next.h, &sum))?;
    Ok(next)
}

/// DOGD-SC update with the anonymously delivered gradients of this round.
pub fn dogd_sc_step<S: ConvexSet>(
    state: &LearnerState,
    delivered: &[DecisionVector],
    beta: f64,
    domain: &S,
) -> Result<LearnerState> {
    inverse_rate_step(state, delivered, beta, domain)
}

/// Undelayed OGD with `eta_t = 1 / (beta t)`.
pub fn ogd_sc_step<S: ConvexSet>(
    state: &LearnerState,
    gradient: &DecisionVector,
    beta: f64,
    domain: &S,
) -> Result<LearnerState> {
    check_beta(beta)?;
    if state.t == 0 {
        return Err(Error::Protocol(
            "OGD-SC round counter must start at 1".into(),
        ));
    }
    let h = beta * state.t as f64;
    let mut next = state.clone();
    next.x = domain.project(&state.x.add_scaled(-1.0 / h, gradient))?;
    next.h = h;
    next.t += 1;
    next.received += 1;
    Ok(next)
}

/// DOGD: constant-rate step on the sum of this round's gradients.
pub fn dogd_step<S: ConvexSet>(
    state: &LearnerState,
    delivered: &[DecisionVector],
    eta: f64,
    domain: &S,
) -> Result<LearnerState> {
    let mut next = state.clone();
    next.t += 1;
    next.received += delivered.len();
    if delivered.is_empty() {
        return Ok(next);
    }
    let sum = order_free_sum(state.x.dim(), delivered);
    next.x = domain.project(&state.x.add_scaled(-eta, &sum))?;
    Ok(next)
}

/// `[x, x + delta e_1, ..., x + delta e_n]` for an iterate in the shrunken set.
pub fn bdogd_sc_queries(
    state: &LearnerState,
    delta: f64,
    shrunken: &BallDomain,
) -> Result<QueryBundle> {
    if !shrunken.contains(&state.x) {
        return Err(Error::StateCorruption(format!(
            "iterate with norm {} left the shrunken set of radius {}",
            state.x.norm(),
            shrunken.radius()
        )));
    }
    let n = state.x.dim();
    let mut points = Vec::with_capacity(n + 1);
    points.push(state.x.clone());
    for i in 0..n {
        let mut p = state.x.clone();
        p[i] += delta;
        points.push(p);
    }
    Ok(QueryBundle {
        kind: QueryKind::Values,
        points,
        direction: None,
    })
}

fn multipoint_estimates(
    dim: usize,
    delivered: &[MultipointFeedback],
) -> Result<Vec<DecisionVector>> {
    delivered
        .iter()
        .map(|fb| {
            if fb.dim() != dim {
                return Err(Error::Feedback(format!(
                    "expected {} values per round, got {}",
                    dim + 1,
                    fb.dim() + 1
                )));
            }
            multipoint_estimate(fb)
        })
        .collect()
}

/// BDOGD-SC update: (n+1)-point estimates, then the inverse-rate step on the
/// shrunken set. Needs only the multiset of this round's value tuples.
pub fn bdogd_sc_step(
    state: &LearnerState,
    delivered: &[MultipointFeedback],
    beta: f64,
    shrunken: &BallDomain,
) -> Result<LearnerState> {
    let estimates = multipoint_estimates(state.x.dim(), delivered)?;
    inverse_rate_step(state, &estimates, beta, shrunken)
}

/// `[x + delta u, x - delta u]` with `u` uniform on the unit sphere.
pub fn twopoint_queries<R: RngCore + ?Sized>(
    state: &LearnerState,
    delta: f64,
    shrunken: &BallDomain,
    rng: &mut R,
) -> Result<QueryBundle> {
    if !shrunken.contains(&state.x) {
        return Err(Error::StateCorruption(format!(
            "iterate with norm {} left the shrunken set of radius {}",
            state.x.norm(),
            shrunken.radius()
        )));
    }
    let u = sample_unit_sphere(rng, state.x.dim());
    Ok(QueryBundle {
        kind: QueryKind::Values,
        points: vec![
            state.x.add_scaled(delta, &u),
            state.x.add_scaled(-delta, &u),
        ],
        direction: Some(u),
    })
}

/// Two-point update with feedback already matched to its directions.
pub fn twopoint_step(
    state: &LearnerState,
    delivered: &[TwopointFeedback],
    beta: f64,
    shrunken: &BallDomain,
) -> Result<LearnerState> {
    let estimates = delivered
        .iter()
        .map(twopoint_estimate)
        .collect::<Result<Vec<_>>>()?;
    inverse_rate_step(state, &estimates, beta, shrunken)
}

/// DBGD: one constant-rate projected step per delivered tuple, in delivery order.
pub fn dbgd_step(
    state: &LearnerState,
    delivered: &[MultipointFeedback],
    eta: f64,
    shrunken: &BallDomain,
) -> Result<LearnerState> {
    let estimates = multipoint_estimates(state.x.dim(), delivered)?;
    let mut next = state.clone();
    for g in &estimates {
        next.x = shrunken.project(&next.x.add_scaled(-eta, g))?;
    }
    next.t += 1;
    next.received += estimates.len();
    Ok(next)
}

/// Common driver interface used by the harness.
pub trait Learner: Send {
    fn algorithm(&self) -> Algorithm;

    fn state(&self) -> &LearnerState;

    fn delivery_mode(&self) -> DeliveryMode {
        self.algorithm().delivery_mode()
    }

    /// Points to evaluate in the current round.
    fn queries(&mut self, rng: &mut dyn RngCore) -> Result<QueryBundle>;

    /// Consumes this round's deliveries and advances to the next round.
    fn update(&mut self, delivered: &[Delivered<Feedback>]) -> Result<()>;
}

fn gradients(delivered: &[Delivered<Feedback>]) -> Result<Vec<DecisionVector>> {
    delivered
        .iter()
        .map(|d| match d.payload() {
            Feedback::Gradient(g) => Ok(g.clone()),
            Feedback::Values(_) => Err(Error::Feedback(
                "full-information learner received function values".into(),
            )),
        })
        .collect()
}

fn value_tuples(delivered: &[Delivered<Feedback>], delta: f64) -> Result<Vec<MultipointFeedback>> {
    delivered
        .iter()
        .map(|d| match d.payload() {
            Feedback::Values(v) => MultipointFeedback::from_values(v, delta),
            Feedback::Gradient(_) => {
                Err(Error::Feedback("bandit learner received a gradient".into()))
            }
        })
        .collect()
}

fn gradient_query(state: &LearnerState) -> QueryBundle {
    QueryBundle {
        kind: QueryKind::Gradient,
        points: vec![state.x.clone()],
        direction: None,
    }
}

#[derive(Clone, Debug)]
pub struct OgdSc {
    state: LearnerState,
    beta: f64,
    domain: BallDomain,
}

impl OgdSc {
    pub fn new(x1: DecisionVector, beta: f64, domain: BallDomain) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            state: LearnerState::new(domain.project(&x1)?),
            beta,
            domain,
        })
    }
}

impl Learner for OgdSc {
    fn algorithm(&self) -> Algorithm {
        Algorithm::OgdSc
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }

    fn queries(&mut self, _rng: &mut dyn RngCore) -> Result<QueryBundle> {
        Ok(gradient_query(&self.state))
    }

    fn update(&mut self, delivered: &[Delivered<Feedback>]) -> Result<()> {
        let g = gradients(delivered)?;
        let [g] = g.as_slice() else {
            return Err(Error::Protocol(format!(
                "OGD-SC expects exactly one gradient per round (unit delays), got {}",
                g.len()
            )));
        };
        self.state = ogd_sc_step(&self.state, g, self.beta, &self.domain)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Dogd {
    state: LearnerState,
    domain: BallDomain,
}

impl Dogd {
    pub fn new(x1: DecisionVector, eta: f64, domain: BallDomain) -> Result<Self> {
        check_rate(eta)?;
        Ok(Self {
            state: LearnerState::with_rate(domain.project(&x1)?, eta),
            domain,
        })
    }
}

fn check_rate(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "learning rate must be positive, got {eta}"
        )))
    }
}

impl Learner for Dogd {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Dogd
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }

    fn queries(&mut self, _rng: &mut dyn RngCore) -> Result<QueryBundle> {
        Ok(gradient_query(&self.state))
    }

    fn update(&mut self, delivered: &[Delivered<Feedback>]) -> Result<()> {
        let g = gradients(delivered)?;
        self.state = dogd_step(&self.state, &g, self.state.eta, &self.domain)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DogdSc {
    state: LearnerState,
    beta: f64,
    domain: BallDomain,
}

impl DogdSc {
    pub fn new(x1: DecisionVector, beta: f64, domain: BallDomain) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            state: LearnerState::new(domain.project(&x1)?),
            beta,
            domain,
        })
    }
}

impl Learner for DogdSc {
    fn algorithm(&self) -> Algorithm {
        Algorithm::DogdSc
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }

    fn queries(&mut self, _rng: &mut dyn RngCore) -> Result<QueryBundle> {
        Ok(gradient_query(&self.state))
    }

    fn update(&mut self, delivered: &[Delivered<Feedback>]) -> Result<()> {
        let g = gradients(delivered)?;
        self.state = dogd_sc_step(&self.state, &g, self.beta, &self.domain)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BdogdSc {
    state: LearnerState,
    beta: f64,
    delta: f64,
    shrunken: BallDomain,
}

impl BdogdSc {
    /// `shrunken` must already be the set `(1 - delta/r) X`.
    pub fn new(x1: DecisionVector, beta: f64, delta: f64, shrunken: BallDomain) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            state: LearnerState::new(shrunken.project(&x1)?),
            beta,
            delta,
            shrunken,
        })
    }
}

impl Learner for BdogdSc {
    fn algorithm(&self) -> Algorithm {
        Algorithm::BdogdSc
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }

    fn queries(&mut self, _rng: &mut dyn RngCore) -> Result<QueryBundle> {
        bdogd_sc_queries(&self.state, self.delta, &self.shrunken)
    }

    fn update(&mut self, delivered: &[Delivered<Feedback>]) -> Result<()> {
        let tuples = value_tuples(delivered, self.delta)?;
        self.state = bdogd_sc_step(&self.state, &tuples, self.beta, &self.shrunken)?;
        Ok(())
    }
}

/// Two-point learner. Keeps `u_k` until the stamped round-`k` feedback returns.
#[derive(Clone, Debug)]
pub struct TwoPoint {
    state: LearnerState,
    beta: f64,
    delta: f64,
    shrunken: BallDomain,
    directions: HashMap<usize, DecisionVector>,
}

impl TwoPoint {
    pub fn new(x1: DecisionVector, beta: f64, delta: f64, shrunken: BallDomain) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            state: LearnerState::new(shrunken.project(&x1)?),
            beta,
            delta,
            shrunken,
            directions: HashMap::new(),
        })
    }

    /// Directions still waiting for their feedback.
    pub fn outstanding(&self) -> usize {
        self.directions.len()
    }
}

impl Learner for TwoPoint {
    fn algorithm(&self) -> Algorithm {
        Algorithm::TwoPoint
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }

    fn queries(&mut self, rng: &mut dyn RngCore) -> Result<QueryBundle> {
        let bundle = twopoint_queries(&self.state, self.delta, &self.shrunken, rng)?;
        let u = bundle
            .direction
            .clone()
            .expect("two-point queries carry a direction");
        self.directions.insert(self.state.t, u);
        Ok(bundle)
    }

    fn update(&mut self, delivered: &[Delivered<Feedback>]) -> Result<()> {
        let mut matched = Vec::with_capacity(delivered.len());
        for item in delivered {
            let k = item.stamp().ok_or_else(|| {
                Error::Protocol(
                    "two-point feedback arrived without a time stamp; it cannot be matched to its direction"
                        .into(),
                )
            })?;
            let u = self.directions.remove(&k).ok_or_else(|| {
                Error::Protocol(format!("no stored direction for query round {k}"))
            })?;
            let (plus, minus) = match item.payload() {
                Feedback::Values(v) if v.len() == 2 => (v[0], v[1]),
                Feedback::Values(v) => {
                    return Err(Error::Feedback(format!(
                        "two-point feedback needs 2 values, got {}",
                        v.len()
                    )))
                }
                Feedback::Gradient(_) => {
                    return Err(Error::Feedback("bandit learner received a gradient".into()))
                }
            };
            matched.push(TwopointFeedback::new(plus, minus, u, self.delta)?);
        }
        self.state = twopoint_step(&self.state, &matched, self.beta, &self.shrunken)?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Dbgd {
    state: LearnerState,
    delta: f64,
    shrunken: BallDomain,
}

impl Dbgd {
    pub fn new(x1: DecisionVector, eta: f64, delta: f64, shrunken: BallDomain) -> Result<Self> {
        check_rate(eta)?;
        Ok(Self {
            state: LearnerState::with_rate(shrunken.project(&x1)?, eta),
            delta,
            shrunken,
        })
    }
}

impl Learner for Dbgd {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Dbgd
    }

    fn state(&self) -> &LearnerState {
        &self.state
    }

    fn queries(&mut self, _rng: &mut dyn RngCore) -> Result<QueryBundle> {
        bdogd_sc_queries(&self.state, self.delta, &self.shrunken)
    }

    fn update(&mut self, delivered: &[Delivered<Feedback>]) -> Result<()> {
        let tuples = value_tuples(delivered, self.delta)?;
        self.state = dbgd_step(&self.state, &tuples, self.state.eta, &self.shrunken)?;
        Ok(())
    }
}

/// Everything needed to instantiate any learner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    pub dim: usize,
    pub domain: BallDomain,
    /// `r` with `r B^n` inside the domain.
    pub inner_radius: f64,
    pub beta: f64,
    /// Constant rate for DOGD / DBGD.
    pub eta: f64,
    /// Probe radius for the bandit learners.
    pub delta: f64,
}

/// `1/sqrt(n) * (1, ..., 1)`, projected onto `domain`.
pub fn full_information_start(n: usize, domain: &BallDomain) -> Result<DecisionVector> {
    domain.project(&DecisionVector::filled(n, 1.0 / (n as f64).sqrt()))
}

/// `(1 - delta/r) / sqrt(n) * (1, ..., 1)`, projected onto `shrunken`.
pub fn bandit_start(
    n: usize,
    delta: f64,
    inner_radius: f64,
    shrunken: &BallDomain,
) -> Result<DecisionVector> {
    let scale = (1.0 - delta / inner_radius) / (n as f64).sqrt();
    shrunken.project(&DecisionVector::filled(n, scale))
}

pub fn build_learner(cfg: &LearnerConfig) -> Result<Box<dyn Learner>> {
    if cfg.dim == 0 {
        return Err(Error::Parameter("dimension must be >= 1".into()));
    }
    let n = cfg.dim;
    if !cfg.algorithm.is_bandit() {
        let x1 = full_information_start(n, &cfg.domain)?;
        return Ok(match cfg.algorithm {
            Algorithm::OgdSc => Box::new(OgdSc::new(x1, cfg.beta, cfg.domain)?),
            Algorithm::Dogd => Box::new(Dogd::new(x1, cfg.eta, cfg.domain)?),
            _ => Box::new(DogdSc::new(x1, cfg.beta, cfg.domain)?),
        });
    }
    let shrunken = cfg.domain.shrink(cfg.delta, cfg.inner_radius)?;
    let x1 = bandit_start(n, cfg.delta, cfg.inner_radius, &shrunken)?;
    Ok(match cfg.algorithm {
        Algorithm::BdogdSc => Box::new(BdogdSc::new(x1, cfg.beta, cfg.delta, shrunken)?),
        Algorithm::TwoPoint => Box::new(TwoPoint::new(x1, cfg.beta, cfg.delta, shrunken)?),
        _ => Box::new(Dbgd::new(x1, cfg.eta, cfg.delta, shrunken)?),
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn v(xs: &[f64]) -> DecisionVector {
        DecisionVector::from(xs.to_vec())
    }

    fn unit() -> BallDomain {
        BallDomain::unit()
    }

    #[test]
    fn dogd_sc_hand_trace() {
        let s = LearnerState::new(v(&[1.0, 0.0]));
        let s = dogd_sc_step(&s, &[v(&[2.0, 0.0])], 2.0, &unit()).unwrap();
        assert_eq!(s.h, 1.0);
        assert_eq!(s.x, v(&[-1.0, 0.0]));
        assert_eq!(s.t, 2);
    }

    #[test]
    fn dogd_sc_without_arrivals_only_advances_round() {
        let s = LearnerState {
            h: 3.0,
            received: 6,
            ..LearnerState::new(v(&[0.2, 0.1]))
        };
        let next = dogd_sc_step(&s, &[], 2.0, &unit()).unwrap();
        assert_eq!(next.x, s.x);
        assert_eq!(next.h, s.h);
        assert_eq!(next.received, s.received);
        assert_eq!(next.t, s.t + 1);
    }

    #[test]
    fn dogd_sc_cancelling_gradients() {
        let s = LearnerState {
            h: 1.0,
            ..LearnerState::new(v(&[0.3, -0.4]))
        };
        let g = v(&[0.7, 1.3]);
        let next = dogd_sc_step(&s, &[g.clone(), g.scaled(-1.0)], 2.0, &unit()).unwrap();
        assert_eq!(next.h, 3.0);
        assert_eq!(next.x, s.x);
    }

    #[test]
    fn ogd_sc_examples() {
        let s = LearnerState::new(v(&[1.0, 0.0]));
        let next = ogd_sc_step(&s, &v(&[2.0, 0.0]), 2.0, &unit()).unwrap();
        assert_eq!(next.x, v(&[0.0, 0.0]));

        let next = ogd_sc_step(&s, &v(&[0.0, 0.0]), 2.0, &unit()).unwrap();
        assert_eq!(next.x, s.x);

        let bad = LearnerState { t: 0, ..s };
        assert!(matches!(
            ogd_sc_step(&bad, &v(&[1.0, 0.0]), 2.0, &unit()),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn unit_delay_inverse_rate_is_half_of_ogd() {
        // With F_t = {t}, h_t = beta t / 2, i.e. DOGD-SC steps at 2/(beta t).
        let mut s = LearnerState::new(v(&[0.5, 0.5]));
        for t in 1..=20 {
            s = dogd_sc_step(&s, &[v(&[0.01, -0.02])], 2.0, &unit()).unwrap();
            assert_eq!(s.h, t as f64);
        }
    }

    #[test]
    fn dogd_examples() {
        let s = LearnerState::with_rate(DecisionVector::zeros(2), 0.1);
        assert_eq!(dogd_step(&s, &[], 0.1, &unit()).unwrap().x, s.x);
        let next = dogd_step(&s, &[v(&[1.0, 0.0]), v(&[0.0, 1.0])], 0.1, &unit()).unwrap();
        assert_eq!(next.x, v(&[-0.1, -0.1]));
    }

    #[test]
    fn bdogd_sc_query_examples() {
        let shrunken = unit().shrink(0.1, 1.0).unwrap();
        let q =
            bdogd_sc_queries(&LearnerState::new(DecisionVector::zeros(2)), 0.1, &shrunken).unwrap();
        assert_eq!(
            q.points,
            vec![v(&[0.0, 0.0]), v(&[0.1, 0.0]), v(&[0.0, 0.1])]
        );
        assert_eq!(q.kind, QueryKind::Values);

        // iterate on the boundary of the shrunken set, along an axis
        let x = v(&[0.9, 0.0, 0.0]);
        let q = bdogd_sc_queries(&LearnerState::new(x), 0.1, &shrunken).unwrap();
        assert_eq!(q.points.len(), 4);
        assert!(q.points.iter().all(|p| unit().contains(p)));

        let outside = LearnerState::new(v(&[0.95, 0.0]));
        assert!(matches!(
            bdogd_sc_queries(&outside, 0.1, &shrunken),
            Err(Error::StateCorruption(_))
        ));
    }

    #[test]
    fn bdogd_sc_rejects_wrong_arity() {
        let shrunken = unit().shrink(0.1, 1.0).unwrap();
        let s = LearnerState::new(DecisionVector::zeros(3));
        let fb = MultipointFeedback::from_values(&[0.0, 1.0, 2.0], 0.1).unwrap();
        assert!(matches!(
            bdogd_sc_step(&s, &[fb], 2.0, &shrunken),
            Err(Error::Feedback(_))
        ));
        assert_eq!(bdogd_sc_step(&s, &[], 2.0, &shrunken).unwrap().x, s.x);
    }

    #[test]
    fn twopoint_query_examples() {
        let shrunken = unit().shrink(0.1, 1.0).unwrap();
        let s = LearnerState::new(v(&[0.3, -0.2]));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = twopoint_queries(&s, 0.1, &shrunken, &mut rng).unwrap();
        let u = q.direction.clone().unwrap();
        assert!(q.points[0].distance(&s.x.add_scaled(0.1, &u)) == 0.0);
        assert!(q.points[1].distance(&s.x.add_scaled(-0.1, &u)) == 0.0);
        assert!(q.points.iter().all(|p| unit().contains(p)));

        let mut rng2 = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(twopoint_queries(&s, 0.1, &shrunken, &mut rng2).unwrap(), q);
    }

    #[test]
    fn twopoint_linear_update_matches_hand_formula() {
        let shrunken = unit().shrink(0.1, 1.0).unwrap();
        let c = v(&[0.4, -0.3]);
        let u = v(&[0.6, 0.8]);
        let x = v(&[0.1, 0.2]);
        let delta = 0.1;
        let fb = TwopointFeedback::new(
            c.dot(&x.add_scaled(delta, &u)),
            c.dot(&x.add_scaled(-delta, &u)),
            u.clone(),
            delta,
        )
        .unwrap();
        let next = twopoint_step(&LearnerState::new(x.clone()), &[fb], 2.0, &shrunken).unwrap();
        // g = n (c.u) u, h = 1
        let g = u.scaled(2.0 * c.dot(&u));
        assert!(next.x.distance(&x.add_scaled(-1.0, &g)) < 1e-12);
    }

    #[test]
    fn twopoint_learner_requires_stamps() {
        let shrunken = unit().shrink(0.1, 1.0).unwrap();
        let mut l = TwoPoint::new(v(&[0.1, 0.1]), 2.0, 0.1, shrunken).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        l.queries(&mut rng).unwrap();
        let anon = [Delivered::anonymous(Feedback::Values(vec![1.0, 0.5]))];
        assert!(matches!(l.update(&anon), Err(Error::Protocol(_))));

        let mut l = TwoPoint::new(v(&[0.1, 0.1]), 2.0, 0.1, shrunken).unwrap();
        l.queries(&mut rng).unwrap();
        l.update(&[]).unwrap();
        assert_eq!(l.outstanding(), 1);
        let unknown = [Delivered::stamped(Feedback::Values(vec![1.0, 0.5]), 7)];
        assert!(matches!(l.update(&unknown), Err(Error::Protocol(_))));
        let ok = [Delivered::stamped(Feedback::Values(vec![1.0, 0.5]), 1)];
        l.update(&ok).unwrap();
        assert_eq!(l.outstanding(), 0);
        assert_eq!(l.state().received, 1);
    }

    #[test]
    fn dbgd_examples() {
        let shrunken = unit().shrink(0.01, 1.0).unwrap();
        let s = LearnerState::with_rate(v(&[0.1, 0.1]), 0.05);
        assert_eq!(dbgd_step(&s, &[], 0.05, &shrunken).unwrap().x, s.x);

        let a = MultipointFeedback::from_values(&[0.0, 0.02, -0.01], 0.01).unwrap();
        let b = MultipointFeedback::from_values(&[1.0, 1.005, 1.003], 0.01).unwrap();
        let one = dbgd_step(&s, std::slice::from_ref(&a), 0.05, &shrunken).unwrap();
        let ga = multipoint_estimate(&a).unwrap();
        assert_eq!(
            one.x,
            shrunken.project(&s.x.add_scaled(-0.05, &ga)).unwrap()
        );

        let gb = multipoint_estimate(&b).unwrap();
        let two = dbgd_step(&s, &[a, b], 0.05, &shrunken).unwrap();
        let batched = s.x.add_scaled(-0.05, &ga.add_scaled(1.0, &gb));
        assert!(two.x.distance(&batched) < 1e-15);
        assert_eq!(two.received, 2);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("sgd".parse::<Algorithm>().is_err());
        assert_eq!("DOGD-SC".parse::<Algorithm>().unwrap(), Algorithm::DogdSc);
    }

    #[test]
    fn build_rejects_delta_not_below_r() {
        let cfg = LearnerConfig {
            algorithm: Algorithm::BdogdSc,
            dim: 3,
            domain: unit(),
            inner_radius: 1.0,
            beta: 2.0,
            eta: 0.1,
            delta: 2.0,
        };
        assert!(matches!(build_learner(&cfg), Err(Error::Parameter(_))));
    }

    #[test]
    fn starting_points() {
        let x = full_information_start(10, &unit()).unwrap();
        assert!((x.norm() - 1.0).abs() < 1e-12);
        let shrunken = unit().shrink(0.05, 1.0).unwrap();
        let x = bandit_start(10, 0.05, 1.0, &shrunken).unwrap();
        assert!((x[0] - 0.95 / 10f64.sqrt()).abs() < 1e-15);
    }
}

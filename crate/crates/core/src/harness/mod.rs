//! Experiment orchestration: configuration, seeded runs, regret accounting.

mod ledger;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use ledger::{format_significant, LedgerRow, RegretLedger, CSV_HEADER};

use crate::delay_sim::{DelaySchedule, FeedbackBuffer, ScheduleSpec};
use crate::error::{Error, Result};
use crate::geometry::{BallDomain, DecisionVector};
use crate::learners::{build_learner, Algorithm, Feedback, LearnerConfig, QueryKind};
use crate::losses::{offline_optimum, sample_quadratic_sequence, LossOracle, QuadraticLoss};

/// How the bandit probe radius is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaRule {
    Fixed(f64),
    /// `c ln T / T`
    LnTOverT(f64),
    /// `1 / (T + D)`
    InvTPlusD,
}

impl DeltaRule {
    pub fn resolve(self, horizon: usize, total_delay: usize) -> f64 {
        match self {
            DeltaRule::Fixed(d) => d,
            DeltaRule::LnTOverT(c) => c * (horizon as f64).ln() / horizon as f64,
            DeltaRule::InvTPlusD => 1.0 / (horizon + total_delay) as f64,
        }
    }

    /// Rule used when none is configured.
    pub fn default_for(algorithm: Algorithm) -> Self {
        match algorithm {
            Algorithm::Dbgd => DeltaRule::InvTPlusD,
            _ => DeltaRule::LnTOverT(1.0),
        }
    }
}

impl FromStr for DeltaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parameter(format!("invalid delta rule {s:?}"));
        if s == "inv_t_plus_d" {
            return Ok(DeltaRule::InvTPlusD);
        }
        if s == "ln_t_over_t" {
            return Ok(DeltaRule::LnTOverT(1.0));
        }
        if let Some(c) = s.strip_prefix("ln_t_over_t:") {
            return c.parse().map(DeltaRule::LnTOverT).map_err(|_| bad());
        }
        if let Some(d) = s.strip_prefix("fixed:") {
            return d.parse().map(DeltaRule::Fixed).map_err(|_| bad());
        }
        Err(bad())
    }
}

impl fmt::Display for DeltaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaRule::Fixed(d) => write!(f, "fixed:{d}"),
            DeltaRule::LnTOverT(c) if *c == 1.0 => f.write_str("ln_t_over_t"),
            DeltaRule::LnTOverT(c) => write!(f, "ln_t_over_t:{c}"),
            DeltaRule::InvTPlusD => f.write_str("inv_t_plus_d"),
        }
    }
}

/// One experiment: algorithm, problem size, constants, delays and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub horizon: usize,
    pub dim: usize,
    /// Radius `R` of the decision ball.
    pub radius: f64,
    /// `r` with `r B^n` inside the decision set.
    pub inner_radius: f64,
    pub beta: f64,
    pub alpha: f64,
    /// Defaults to `2R + sqrt(n)`.
    pub lipschitz: Option<f64>,
    /// Defaults to [`DeltaRule::default_for`].
    pub delta_rule: Option<DeltaRule>,
    pub schedule: ScheduleSpec,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Unit ball in R^10, T = 1000, beta = alpha = 2, no delays, seed 1.
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            horizon: 1000,
            dim: 10,
            radius: 1.0,
            inner_radius: 1.0,
            beta: QuadraticLoss::CURVATURE,
            alpha: QuadraticLoss::CURVATURE,
            lipschitz: None,
            delta_rule: None,
            schedule: ScheduleSpec::Unit,
            seed: 1,
            output_path: None,
        }
    }

    pub fn with_schedule(mut self, schedule: ScheduleSpec) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
            .unwrap_or_else(|| QuadraticLoss::lipschitz_bound(self.dim, self.radius))
    }

    /// Validates the configuration and resolves every derived quantity.
    pub fn plan(&self) -> Result<RunPlan> {
        if self.horizon < 1 {
            return Err(Error::Parameter("horizon T must be >= 1".into()));
        }
        if self.dim < 1 {
            return Err(Error::Parameter("dimension must be >= 1".into()));
        }
        let domain = BallDomain::new(self.radius)?;
        if !(self.inner_radius > 0.0 && self.inner_radius <= self.radius) {
            return Err(Error::Parameter(format!(
                "inner radius r must satisfy 0 < r <= R = {}, got {}",
                self.radius, self.inner_radius
            )));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Parameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!(
                "alpha must be nonnegative, got {}",
                self.alpha
            )));
        }
        let lipschitz = self.lipschitz();
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(Error::Parameter(format!(
                "L must be positive, got {lipschitz}"
            )));
        }

        let schedule = if self.algorithm.ignores_delays() {
            DelaySchedule::unit(self.horizon)?
        } else {
            self.schedule.resolve(self.horizon)?
        };
        let total_delay = schedule.total_delay();
        let eta = 1.0 / (lipschitz * ((self.horizon + total_delay) as f64).sqrt());
        let delta_rule = self
            .delta_rule
            .unwrap_or_else(|| DeltaRule::default_for(self.algorithm));
        let delta = delta_rule.resolve(self.horizon, total_delay);
        if self.algorithm.is_bandit() && !(delta > 0.0 && delta < self.inner_radius) {
            return Err(Error::Parameter(format!(
                "delta must satisfy 0 < delta < r = {}, got {delta}",
                self.inner_radius
            )));
        }
        Ok(RunPlan {
            learner: LearnerConfig {
                algorithm: self.algorithm,
                dim: self.dim,
                domain,
                inner_radius: self.inner_radius,
                beta: self.beta,
                eta,
                delta,
            },
            schedule,
            lipschitz,
            seed: self.seed,
        })
    }
}

/// A validated configuration with every rate and radius resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub learner: LearnerConfig,
    /// The delays actually applied (unit delays for OGD-SC).
    pub schedule: DelaySchedule,
    pub lipschitz: f64,
    pub seed: u64,
}

impl RunPlan {
    pub fn horizon(&self) -> usize {
        self.schedule.horizon()
    }
}

/// Per-round loss charged to a learner: the value at the decision for
/// gradient queries, the mean over all query points for value queries.
pub fn instantaneous_loss(kind: QueryKind, values: &[f64]) -> f64 {
    match kind {
        QueryKind::Gradient => values[0],
        QueryKind::Values => values.iter().sum::<f64>() / values.len() as f64,
    }
}

/// Loss sequence for a seed. Draws are sequential, so a shorter horizon
/// sees a prefix of a longer one.
pub fn loss_sequence(
    seed: u64,
    dim: usize,
    horizon: usize,
    radius: f64,
) -> Result<Vec<QuadraticLoss>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_quadratic_sequence(&mut rng, dim, horizon, radius)
}

fn learner_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Runs one seeded experiment on the quadratic family.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RegretLedger> {
    let plan = config.plan()?;
    let losses = loss_sequence(config.seed, config.dim, config.horizon, config.radius)?;
    run_plan(&plan, &losses)
}

/// Simulates rounds `1..=T` of `plan` on quadratic losses, measuring regret
/// against their closed-form offline optimum.
pub fn run_plan(plan: &RunPlan, losses: &[QuadraticLoss]) -> Result<RegretLedger> {
    let comparator = offline_optimum(losses, &plan.learner.domain)?;
    run_against(plan, losses, &comparator.x_star)
}

/// Simulates rounds `1..=T` of `plan` against any loss sequence and a given
/// fixed comparator.
pub fn run_against<L: LossOracle>(
    plan: &RunPlan,
    losses: &[L],
    comparator: &DecisionVector,
) -> Result<RegretLedger> {
    let horizon = plan.horizon();
    if losses.len() != horizon {
        return Err(Error::Parameter(format!(
            "{} losses supplied for a horizon of {horizon}",
            losses.len()
        )));
    }
    let mut learner = build_learner(&plan.learner)?;
    let mut rng = learner_rng(plan.seed);
    let mut buffer = FeedbackBuffer::new(learner.delivery_mode());
    let mut ledger = RegretLedger::new(comparator.clone());

    for (t, f) in (1..=horizon).zip(losses) {
        let bundle = learner.queries(&mut rng)?;
        let values: Vec<f64> = bundle.points.iter().map(|p| f.value(p)).collect();
        ledger.record(
            instantaneous_loss(bundle.kind, &values),
            f.value(comparator),
        );
        let payload = match bundle.kind {
            QueryKind::Gradient => Feedback::Gradient(f.gradient(&bundle.points[0])),
            QueryKind::Values => Feedback::Values(values),
        };
        buffer.enqueue(t, plan.schedule.delay(t), payload)?;
        let delivered = buffer.deliver(t)?;
        learner.update(&delivered)?;
    }

    // Feedback arriving after T is drained but never consumed.
    let last = horizon + plan.schedule.max_delay() - 1;
    buffer.flush(last)?;
    debug_assert!(buffer.is_empty());
    Ok(ledger)
}

/// Runs several configurations concurrently; results keep input order.
pub fn run_many(configs: &[ExperimentConfig]) -> Vec<Result<RegretLedger>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| scope.spawn(move || run_experiment(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    })
}

/// Plain-text summary ordered by final cumulative loss.
pub fn summary_table(results: &[(Algorithm, RegretLedger)]) -> String {
    let mut rows: Vec<_> = results.iter().collect();
    rows.sort_by(|a, b| {
        a.1.final_cumulative_loss()
            .total_cmp(&b.1.final_cumulative_loss())
    });
    let mut out = format!(
        "{:<10} {:>18} {:>18}\n",
        "algorithm", "final_cum_loss", "final_regret"
    );
    for (algo, ledger) in rows {
        out.push_str(&format!(
            "{:<10} {:>18} {:>18}\n",
            algo.name(),
            format_significant(ledger.final_cumulative_loss()),
            format_significant(ledger.final_regret())
        ));
    }
    out
}

/// One point of the regret-versus-horizon curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopePoint {
    pub horizon: usize,
    pub regret: f64,
    /// `regret / (d ln T)`
    pub ratio: f64,
}

/// Final regret of `config` at each horizon, normalized by `d ln T`.
pub fn regret_slope(config: &ExperimentConfig, horizons: &[usize]) -> Result<Vec<SlopePoint>> {
    horizons
        .iter()
        .map(|&horizon| {
            let cfg = config.clone().with_horizon(horizon);
            let plan = cfg.plan()?;
            let d = plan.schedule.max_delay() as f64;
            let ledger = run_experiment(&cfg)?;
            let regret = ledger.final_regret();
            Ok(SlopePoint {
                horizon,
                regret,
                ratio: regret / (d * (horizon as f64).ln()),
            })
        })
        .collect()
}

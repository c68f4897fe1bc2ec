//! Delay schedules, arrival sets and the in-flight feedback buffer.
//!
//! Feedback for a decision made in round `k` with delay `d_k >= 1` arrives at
//! the end of round `k + d_k - 1`; `d_k = 1` is the undelayed case.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// How a schedule was produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    Periodic(Vec<usize>),
    Constant(usize),
    Unit,
    Custom,
}

/// Per-round delays `d_1, ..., d_T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelaySchedule {
    delays: Vec<usize>,
    kind: ScheduleKind,
}

fn check_delays(delays: &[usize]) -> Result<()> {
    if delays.is_empty() {
        return Err(Error::Schedule(
            "schedule must cover at least one round".into(),
        ));
    }
    if let Some(k) = delays.iter().position(|&d| d < 1) {
        return Err(Error::Schedule(format!(
            "round {} has delay 0; delays must be >= 1",
            k + 1
        )));
    }
    Ok(())
}

impl DelaySchedule {
    /// Repeats `pattern` cyclically over `horizon` rounds.
    pub fn periodic(pattern: &[usize], horizon: usize) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Schedule("periodic pattern is empty".into()));
        }
        check_delays(pattern)?;
        let delays = pattern
            .iter()
            .copied()
            .cycle()
            .take(horizon)
            .collect::<Vec<_>>();
        check_delays(&delays)?;
        Ok(Self {
            delays,
            kind: ScheduleKind::Periodic(pattern.to_vec()),
        })
    }

    pub fn constant(delay: usize, horizon: usize) -> Result<Self> {
        let delays = vec![delay; horizon];
        check_delays(&delays)?;
        Ok(Self {
            delays,
            kind: ScheduleKind::Constant(delay),
        })
    }

    /// No delay: every feedback arrives in the round it was queried.
    pub fn unit(horizon: usize) -> Result<Self> {
        let delays = vec![1; horizon];
        check_delays(&delays)?;
        Ok(Self {
            delays,
            kind: ScheduleKind::Unit,
        })
    }

    pub fn custom(delays: Vec<usize>) -> Result<Self> {
        check_delays(&delays)?;
        Ok(Self {
            delays,
            kind: ScheduleKind::Custom,
        })
    }

    /// Delays drawn uniformly from `1..=max_delay`. Used for fuzzing.
    pub fn uniform_random<R: Rng + ?Sized>(
        rng: &mut R,
        horizon: usize,
        max_delay: usize,
    ) -> Result<Self> {
        if max_delay < 1 {
            return Err(Error::Schedule("max_delay must be >= 1".into()));
        }
        Self::custom(
            (0..horizon)
                .map(|_| rng.random_range(1..=max_delay))
                .collect(),
        )
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn horizon(&self) -> usize {
        self.delays.len()
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    /// Delay of round `k` (1-based).
    pub fn delay(&self, k: usize) -> usize {
        self.delays[k - 1]
    }

    /// `d = max_t d_t`.
    pub fn max_delay(&self) -> usize {
        self.delays.iter().copied().max().unwrap_or(1)
    }

    /// `D = sum_t d_t`.
    pub fn total_delay(&self) -> usize {
        self.delays.iter().sum()
    }

    /// Round at the end of which round-`k` feedback arrives.
    pub fn arrival_round(&self, k: usize) -> usize {
        k + self.delay(k) - 1
    }

    /// Truncates (or, for periodic/constant/unit kinds, re-generates) the
    /// schedule for a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        match &self.kind {
            ScheduleKind::Periodic(p) => Self::periodic(p, horizon),
            ScheduleKind::Constant(d) => Self::constant(*d, horizon),
            ScheduleKind::Unit => Self::unit(horizon),
            ScheduleKind::Custom if horizon <= self.horizon() => {
                Self::custom(self.delays[..horizon].to_vec())
            }
            ScheduleKind::Custom => Err(Error::Schedule(format!(
                "custom schedule has {} rounds, {horizon} requested",
                self.horizon()
            ))),
        }
    }
}

/// Arrival sets `F_t = {k : k + d_k - 1 = t}` for `t = 1, ..., T + d - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrivalSets {
    sets: Vec<Vec<usize>>,
    horizon: usize,
    first_arrival: usize,
}

impl ArrivalSets {
    pub fn from_delays(delays: &[usize]) -> Result<Self> {
        check_delays(delays)?;
        let horizon = delays.len();
        let max_delay = delays.iter().copied().max().unwrap_or(1);
        let mut sets = vec![Vec::new(); horizon + max_delay - 1];
        for (i, &d) in delays.iter().enumerate() {
            let k = i + 1;
            sets[k + d - 2].push(k);
        }
        let first_arrival = sets
            .iter()
            .position(|s| !s.is_empty())
            .map(|i| i + 1)
            .expect("a non-empty schedule has at least one arrival");
        Ok(Self {
            sets,
            horizon,
            first_arrival,
        })
    }

    /// `F_t`, sorted ascending. Empty for `t` outside `[1, T + d - 1]`.
    pub fn get(&self, t: usize) -> &[usize] {
        if t == 0 {
            return &[];
        }
        self.sets.get(t - 1).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, t: usize) -> usize {
        self.get(t).len()
    }

    /// `T`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `T + d - 1`, the last round at which feedback can arrive.
    pub fn last_round(&self) -> usize {
        self.sets.len()
    }

    /// `s = min { t : |F_t| > 0 }`.
    pub fn first_arrival(&self) -> usize {
        self.first_arrival
    }

    pub fn total(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn max_count(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Iterates `(t, F_t)` over `t = 1, ..., T + d - 1`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.sets
            .iter()
            .enumerate()
            .map(|(i, s)| (i + 1, s.as_slice()))
    }

    /// `sum_{t=s}^{T+d-1} |F_t| / (2 h_t)` with `h_t = (beta/2) sum_{i<=t} |F_i|`,
    /// the step-size mass accumulated by the inverse-rate recursion.
    pub fn step_size_sum(&self, beta: f64) -> f64 {
        let mut received = 0usize;
        let mut sum = 0.0;
        for (_, set) in self.iter() {
            if set.is_empty() {
                continue;
            }
            received += set.len();
            let h = beta * received as f64 / 2.0;
            sum += set.len() as f64 / (2.0 * h);
        }
        sum
    }

    /// `(1/beta) (1 + ln(T / |F_s|))`, the logarithmic cap on [`Self::step_size_sum`].
    pub fn step_size_bound(&self, beta: f64) -> f64 {
        let first = self.count(self.first_arrival) as f64;
        (1.0 + (self.horizon as f64 / first).ln()) / beta
    }
}

/// Arrival sets of a schedule.
pub fn arrival_sets(schedule: &DelaySchedule) -> ArrivalSets {
    ArrivalSets::from_delays(schedule.delays()).expect("DelaySchedule holds validated delays")
}

/// Whether delivered feedback carries the round it was queried in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeliveryMode {
    Anonymous,
    Stamped,
}

/// One delivered feedback item. In anonymous mode `stamp()` is always `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Delivered<P> {
    payload: P,
    stamp: Option<usize>,
}

impl<P> Delivered<P> {
    pub fn anonymous(payload: P) -> Self {
        Self {
            payload,
            stamp: None,
        }
    }

    pub fn stamped(payload: P, query_round: usize) -> Self {
        Self {
            payload,
            stamp: Some(query_round),
        }
    }

    pub fn payload(&self) -> &P {
        &self.payload
    }

    pub fn into_payload(self) -> P {
        self.payload
    }

    pub fn stamp(&self) -> Option<usize> {
        self.stamp
    }
}

/// Holds feedback in flight until its arrival round.
pub struct FeedbackBuffer<P> {
    mode: DeliveryMode,
    in_flight: BTreeMap<usize, Vec<(usize, P)>>,
    last_delivered: usize,
    pending: usize,
}

impl<P: fmt::Debug> fmt::Debug for FeedbackBuffer<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeedbackBuffer")
            .field("mode", &self.mode)
            .field("pending", &self.pending)
            .field("last_delivered", &self.last_delivered)
            .finish()
    }
}

impl<P> FeedbackBuffer<P> {
    pub fn new(mode: DeliveryMode) -> Self {
        Self {
            mode,
            in_flight: BTreeMap::new(),
            last_delivered: 0,
            pending: 0,
        }
    }

    pub fn mode(&self) -> DeliveryMode {
        self.mode
    }

    pub fn pending(&self) -> usize {
        self.pending
    }

    pub fn is_empty(&self) -> bool {
        self.pending == 0
    }

    /// Stores the round-`k` payload for delivery at round `k + d_k - 1`.
    pub fn enqueue(&mut self, k: usize, d_k: usize, payload: P) -> Result<()> {
        if k < 1 || d_k < 1 {
            return Err(Error::Schedule(format!(
                "enqueue needs k >= 1 and d_k >= 1, got k = {k}, d_k = {d_k}"
            )));
        }
        let arrival = k + d_k - 1;
        if arrival <= self.last_delivered {
            return Err(Error::Protocol(format!(
                "feedback for round {k} would arrive at {arrival}, but round {} was already delivered",
                self.last_delivered
            )));
        }
        self.in_flight
            .entry(arrival)
            .or_default()
            .push((k, payload));
        self.pending += 1;
        Ok(())
    }

    /// Removes and returns everything arriving at round `t`, ascending by
    /// query round. Rounds must be requested in increasing order.
    pub fn deliver(&mut self, t: usize) -> Result<Vec<Delivered<P>>> {
        if t <= self.last_delivered {
            return Err(Error::Protocol(format!(
                "round {t} requested after round {} was delivered",
                self.last_delivered
            )));
        }
        if let Some((&stranded, _)) = self.in_flight.range(..t).next() {
            return Err(Error::Protocol(format!(
                "round {stranded} was skipped while it still had feedback in flight"
            )));
        }
        self.last_delivered = t;
        let mut items = self.in_flight.remove(&t).unwrap_or_default();
        items.sort_by_key(|(k, _)| *k);
        self.pending -= items.len();
        let mode = self.mode;
        Ok(items
            .into_iter()
            .map(|(k, p)| match mode {
                DeliveryMode::Anonymous => Delivered::anonymous(p),
                DeliveryMode::Stamped => Delivered::stamped(p, k),
            })
            .collect())
    }

    /// Delivers every remaining round up to and including `until`.
    pub fn flush(&mut self, until: usize) -> Result<Vec<Delivered<P>>> {
        let mut out = Vec::new();
        for t in self.last_delivered + 1..=until {
            out.extend(self.deliver(t)?);
        }
        Ok(out)
    }
}

/// Textual schedule description: `periodic:2,3,2,1`, `constant:5`, `unit`,
/// or a path to a file with one positive integer per line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleSpec {
    Periodic(Vec<usize>),
    Constant(usize),
    Unit,
    File(PathBuf),
}

fn parse_delay_list(list: &str) -> Result<Vec<usize>> {
    list.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<usize>()
                .map_err(|_| Error::Schedule(format!("invalid delay {s:?}")))
                .and_then(|d| {
                    if d >= 1 {
                        Ok(d)
                    } else {
                        Err(Error::Schedule("delays must be >= 1".into()))
                    }
                })
        })
        .collect()
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Schedule("empty schedule description".into()));
        }
        if let Some(list) = s.strip_prefix("periodic:") {
            let pattern = parse_delay_list(list)?;
            return Ok(ScheduleSpec::Periodic(pattern));
        }
        if let Some(d) = s.strip_prefix("constant:") {
            let d = parse_delay_list(d)?;
            return match d.as_slice() {
                [d] => Ok(ScheduleSpec::Constant(*d)),
                _ => Err(Error::Schedule("constant schedule takes one delay".into())),
            };
        }
        if s == "unit" {
            return Ok(ScheduleSpec::Unit);
        }
        Ok(ScheduleSpec::File(PathBuf::from(s)))
    }
}

impl fmt::Display for ScheduleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleSpec::Periodic(p) => {
                let list = p
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(",");
                write!(f, "periodic:{list}")
            }
            ScheduleSpec::Constant(d) => write!(f, "constant:{d}"),
            ScheduleSpec::Unit => f.write_str("unit"),
            ScheduleSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl ScheduleSpec {
    /// Materializes the schedule for `horizon` rounds.
    pub fn resolve(&self, horizon: usize) -> Result<DelaySchedule> {
        match self {
            ScheduleSpec::Periodic(p) => DelaySchedule::periodic(p, horizon),
            ScheduleSpec::Constant(d) => DelaySchedule::constant(*d, horizon),
            ScheduleSpec::Unit => DelaySchedule::unit(horizon),
            ScheduleSpec::File(path) => read_schedule_file(path, horizon),
        }
    }
}

/// Parses schedule-file contents: one positive integer per line, exactly
/// `horizon` non-blank lines.
pub fn parse_schedule_text(text: &str, horizon: usize, path: &Path) -> Result<DelaySchedule> {
    let mut delays = Vec::with_capacity(horizon);
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let d = line
            .parse::<usize>()
            .ok()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected a positive integer delay, got {line:?}"),
            })?;
        delays.push(d);
    }
    if delays.len() != horizon {
        return Err(Error::Schedule(format!(
            "{}: schedule file has {} delays, expected exactly {horizon}",
            path.display(),
            delays.len()
        )));
    }
    DelaySchedule::custom(delays)
}

pub fn read_schedule_file(path: &Path, horizon: usize) -> Result<DelaySchedule> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_schedule_text(&text, horizon, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: scan every k for each t.
    fn brute_force_sets(delays: &[usize]) -> Vec<Vec<usize>> {
        let d = *delays.iter().max().unwrap();
        (1..=delays.len() + d - 1)
            .map(|t| {
                (1..=delays.len())
                    .filter(|&k| k + delays[k - 1] - 1 == t)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn unit_delays_reduce_to_standard_rounds() {
        let sets = arrival_sets(&DelaySchedule::unit(3).unwrap());
        assert_eq!(sets.get(1), &[1]);
        assert_eq!(sets.get(2), &[2]);
        assert_eq!(sets.get(3), &[3]);
        assert_eq!(sets.first_arrival(), 1);
        assert_eq!(sets.last_round(), 3);
    }

    #[test]
    fn short_periodic_pattern() {
        let delays = [2, 3, 2, 1];
        let brute = brute_force_sets(&delays);
        let sets = ArrivalSets::from_delays(&delays).unwrap();
        assert_eq!(sets.get(1), brute[0].as_slice());
        assert_eq!(sets.get(1), &[] as &[usize]);
        assert_eq!(sets.get(2), &[1]);
        // k + d_k - 1 = 2, 4, 4, 4
        assert_eq!(sets.get(3), &[] as &[usize]);
        assert_eq!(sets.get(4), &[2, 3, 4]);
        assert_eq!(sets.first_arrival(), 2);
        for (t, set) in sets.iter() {
            assert_eq!(set, brute[t - 1].as_slice());
        }
    }

    #[test]
    fn low_delay_pattern_over_thousand_rounds() {
        let s = DelaySchedule::periodic(&[2, 3, 2, 1, 4, 1, 3], 1000).unwrap();
        let sets = arrival_sets(&s);
        assert_eq!(sets.total(), 1000);
        assert!(sets.max_count() <= 4);
        assert_eq!(s.max_delay(), 4);
        assert_eq!(sets.last_round(), 1003);
    }

    #[test]
    fn zero_delay_is_rejected() {
        assert!(matches!(
            ArrivalSets::from_delays(&[1, 0, 2]),
            Err(Error::Schedule(_))
        ));
        assert!(DelaySchedule::periodic(&[2, 0], 5).is_err());
        assert!(DelaySchedule::custom(vec![]).is_err());
    }

    #[test]
    fn enqueue_and_deliver_examples() {
        let mut buf = FeedbackBuffer::new(DeliveryMode::Anonymous);
        buf.enqueue(1, 2, "g").unwrap();
        assert!(buf.deliver(1).unwrap().is_empty());
        let got = buf.deliver(2).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(*got[0].payload(), "g");

        buf.enqueue(3, 1, "h").unwrap();
        let got = buf.deliver(3).unwrap();
        assert_eq!(
            got.into_iter()
                .map(Delivered::into_payload)
                .collect::<Vec<_>>(),
            ["h"]
        );
        assert!(buf.is_empty());
    }

    #[test]
    fn delivery_happens_exactly_at_arrival_round() {
        let mut buf = FeedbackBuffer::new(DeliveryMode::Anonymous);
        assert!(buf.deliver(1).unwrap().is_empty());
        buf.enqueue(3, 3, 'a').unwrap();
        buf.enqueue(4, 2, 'b').unwrap();
        for t in 2..=4 {
            assert!(buf.deliver(t).unwrap().is_empty());
        }
        assert_eq!(buf.deliver(5).unwrap().len(), 2);
        assert!(buf.deliver(6).unwrap().is_empty());
    }

    #[test]
    fn low_delay_round_four_receives_three() {
        let s = DelaySchedule::periodic(&[2, 3, 2, 1, 4, 1, 3], 7).unwrap();
        let mut buf = FeedbackBuffer::new(DeliveryMode::Stamped);
        let mut at_four = Vec::new();
        for t in 1..=4 {
            buf.enqueue(t, s.delay(t), t).unwrap();
            let got = buf.deliver(t).unwrap();
            if t == 4 {
                at_four = got;
            }
        }
        let brute: Vec<usize> = (1..=7).filter(|&k| k + s.delay(k) - 1 == 4).collect();
        assert_eq!(brute, [2, 3, 4]);
        assert_eq!(
            at_four
                .iter()
                .map(|d| d.stamp().unwrap())
                .collect::<Vec<_>>(),
            brute
        );
    }

    #[test]
    fn out_of_order_delivery_is_a_protocol_error() {
        let mut buf: FeedbackBuffer<u8> = FeedbackBuffer::new(DeliveryMode::Anonymous);
        buf.deliver(2).unwrap();
        assert!(matches!(buf.deliver(2), Err(Error::Protocol(_))));
        assert!(matches!(buf.deliver(1), Err(Error::Protocol(_))));
        assert!(matches!(buf.enqueue(1, 1, 0), Err(Error::Protocol(_))));

        let mut buf = FeedbackBuffer::new(DeliveryMode::Anonymous);
        buf.enqueue(1, 1, 0u8).unwrap();
        assert!(matches!(buf.deliver(3), Err(Error::Protocol(_))));
    }

    #[test]
    fn within_round_order_is_ascending_query_round() {
        let mut buf = FeedbackBuffer::new(DeliveryMode::Stamped);
        buf.enqueue(3, 1, 'c').unwrap();
        buf.enqueue(1, 3, 'a').unwrap();
        buf.enqueue(2, 2, 'b').unwrap();
        let got = buf.flush(3).unwrap();
        assert_eq!(got.iter().map(|d| *d.payload()).collect::<String>(), "abc");
        assert_eq!(
            got.iter().map(|d| d.stamp().unwrap()).collect::<Vec<_>>(),
            [1, 2, 3]
        );
    }

    #[test]
    fn schedule_spec_parsing() {
        assert_eq!(
            "periodic:2,3,2,1,4,1,3".parse::<ScheduleSpec>().unwrap(),
            ScheduleSpec::Periodic(vec![2, 3, 2, 1, 4, 1, 3])
        );
        assert_eq!(
            "constant:5".parse::<ScheduleSpec>().unwrap(),
            ScheduleSpec::Constant(5)
        );
        assert_eq!("unit".parse::<ScheduleSpec>().unwrap(), ScheduleSpec::Unit);
        assert!("periodic:2,0".parse::<ScheduleSpec>().is_err());
        assert!("periodic:2,x".parse::<ScheduleSpec>().is_err());
        assert!("periodic:".parse::<ScheduleSpec>().is_err());
        let spec: ScheduleSpec = "periodic:20,30,20,10,40,10,30".parse().unwrap();
        assert_eq!(spec.to_string().parse::<ScheduleSpec>().unwrap(), spec);
    }

    #[test]
    fn schedule_text_must_have_exact_length() {
        let p = Path::new("sched.txt");
        let s = parse_schedule_text("2\n3\n1\n", 3, p).unwrap();
        assert_eq!(s.delays(), &[2, 3, 1]);
        assert!(matches!(
            parse_schedule_text("2\n3\n", 3, p),
            Err(Error::Schedule(_))
        ));
        assert!(matches!(
            parse_schedule_text("2\n0\n1\n", 3, p),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn step_size_sum_on_unit_delays_is_harmonic() {
        let sets = arrival_sets(&DelaySchedule::unit(50).unwrap());
        let harmonic: f64 = (1..=50).map(|t| 1.0 / t as f64).sum();
        assert!((sets.step_size_sum(2.0) - harmonic / 2.0).abs() < 1e-12);
        assert!(sets.step_size_sum(2.0) <= sets.step_size_bound(2.0));
    }
}

use std::io::Write;

use delayed_oco::delay_sim::{
    arrival_sets, read_schedule_file, ArrivalSets, DelaySchedule, DeliveryMode, FeedbackBuffer,
    ScheduleSpec,
};
use delayed_oco::Error;
use proptest::prelude::*;

fn delays() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..30, 1..150)
}

fn brute_force(delays: &[usize], t: usize) -> Vec<usize> {
    (1..=delays.len())
        .filter(|&k| k + delays[k - 1] - 1 == t)
        .collect()
}

proptest! {
    #[test]
    fn arrival_sets_match_enumeration(d in delays()) {
        let sets = ArrivalSets::from_delays(&d).unwrap();
        let max = *d.iter().max().unwrap();
        prop_assert_eq!(sets.last_round(), d.len() + max - 1);
        for t in 1..=sets.last_round() {
            prop_assert_eq!(sets.get(t).to_vec(), brute_force(&d, t));
        }
        prop_assert_eq!(sets.total(), d.len());
        prop_assert!(sets.max_count() <= max);
        prop_assert!(sets.first_arrival() <= max);
    }

    #[test]
    fn stamped_buffer_delivers_arrival_sets_in_order(d in delays()) {
        let schedule = DelaySchedule::custom(d.clone()).unwrap();
        let sets = arrival_sets(&schedule);
        let mut buffer = FeedbackBuffer::new(DeliveryMode::Stamped);
        for t in 1..=schedule.horizon() {
            buffer.enqueue(t, schedule.delay(t), t * 10).unwrap();
            let got = buffer.deliver(t).unwrap();
            let stamps: Vec<usize> = got.iter().map(|x| x.stamp().unwrap()).collect();
            prop_assert_eq!(&stamps, &sets.get(t).to_vec());
            prop_assert!(got.iter().all(|x| *x.payload() == x.stamp().unwrap() * 10));
        }
        let rest = buffer.flush(sets.last_round()).unwrap();
        prop_assert_eq!(rest.len(), (schedule.horizon() + 1..=sets.last_round()).map(|t| sets.count(t)).sum::<usize>());
        prop_assert!(buffer.is_empty());
    }

    #[test]
    fn anonymous_buffer_hides_stamps(d in delays()) {
        let mut buffer = FeedbackBuffer::new(DeliveryMode::Anonymous);
        let max = *d.iter().max().unwrap();
        for (i, &dk) in d.iter().enumerate() {
            buffer.enqueue(i + 1, dk, ()).unwrap();
            prop_assert!(buffer.deliver(i + 1).unwrap().iter().all(|x| x.stamp().is_none()));
        }
        buffer.flush(d.len() + max - 1).unwrap();
        prop_assert!(buffer.is_empty());
    }

    #[test]
    fn step_size_sum_respects_bound(d in delays(), beta in 0.1f64..10.0) {
        let sets = ArrivalSets::from_delays(&d).unwrap();
        prop_assert!(sets.step_size_sum(beta) <= sets.step_size_bound(beta) + 1e-12);
    }

    #[test]
    fn schedule_spec_round_trips(pattern in prop::collection::vec(1usize..50, 1..8)) {
        let spec = ScheduleSpec::Periodic(pattern);
        let parsed: ScheduleSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(parsed, spec);
    }
}

#[test]
fn periodic_schedule_cycles() {
    let s = DelaySchedule::periodic(&[2, 3, 2, 1, 4, 1, 3], 15).unwrap();
    assert_eq!(s.delay(1), 2);
    assert_eq!(s.delay(8), 2);
    assert_eq!(s.delay(11), 1);
    assert_eq!(s.delay(12), 4);
    assert_eq!(s.max_delay(), 4);
}

#[test]
fn zero_delay_is_rejected() {
    assert!(DelaySchedule::custom(vec![1, 0, 2]).is_err());
    let mut buffer = FeedbackBuffer::new(DeliveryMode::Anonymous);
    assert!(matches!(buffer.enqueue(1, 0, ()), Err(Error::Schedule(_))));
}

#[test]
fn enqueue_into_the_past_is_a_protocol_error() {
    let mut buffer = FeedbackBuffer::new(DeliveryMode::Anonymous);
    buffer.enqueue(1, 1, ()).unwrap();
    buffer.deliver(1).unwrap();
    buffer.enqueue(2, 1, ()).unwrap();
    buffer.deliver(2).unwrap();
    // round 1 with delay 2 would arrive at round 2, already delivered
    assert!(matches!(buffer.enqueue(1, 2, ()), Err(Error::Protocol(_))));
}

#[test]
fn schedule_file_errors_name_the_line() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "1\n2\nx\n1").unwrap();
    let err = read_schedule_file(file.path(), 4).unwrap_err();
    match err {
        Error::Parse { line, .. } => assert_eq!(line, 3),
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn schedule_file_needs_exactly_t_lines() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "1\n2").unwrap();
    assert!(read_schedule_file(file.path(), 3).is_err());
    let ok = read_schedule_file(file.path(), 2).unwrap();
    assert_eq!(ok.delays(), &[1, 2]);
}

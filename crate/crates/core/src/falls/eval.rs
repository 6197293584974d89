//! Alarm evaluation against scripted ground truth.

use serde::Serialize;

use super::FallAlarm;

/// Matching counts plus precision/recall. An empty side is vacuously
/// perfect: no alarms means precision 1, no truths means recall 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
}

/// Greedy one-to-one matching in time order: each alarm takes the earliest
/// unmatched fall truth within `match_window_s`.
pub fn evaluate_against_truth(alarms: &[FallAlarm], fall_truth_times_s: &[f64], match_window_s: f64) -> EvalReport {
    let mut matched = vec![false; fall_truth_times_s.len()];
    let mut true_positives = 0u64;
    for alarm in alarms {
        let hit = fall_truth_times_s
            .iter()
            .enumerate()
            .find(|(i, t)| !matched[*i] && (alarm.t_s - **t).abs() <= match_window_s);
        if let Some((i, _)) = hit {
            matched[i] = true;
            true_positives += 1;
        }
    }
    let false_positives = alarms.len() as u64 - true_positives;
    let false_negatives = matched.iter().filter(|m| !**m).count() as u64;
    let precision = if true_positives + false_positives == 0 {
        1.0
    } else {
        true_positives as f64 / (true_positives + false_positives) as f64
    };
    let recall = if true_positives + false_negatives == 0 {
        1.0
    } else {
        true_positives as f64 / (true_positives + false_negatives) as f64
    };
    EvalReport {
        true_positives,
        false_positives,
        false_negatives,
        precision,
        recall,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::falls::AlarmConfidence;

    fn alarm(t_s: f64) -> FallAlarm {
        FallAlarm {
            t_s,
            entity_id: "resident-1".into(),
            confidence: AlarmConfidence::Corroborated,
            room: None,
        }
    }

    #[test]
    fn single_match_is_perfect() {
        let report = evaluate_against_truth(&[alarm(30.1)], &[30.0], 2.0);
        assert_eq!((report.true_positives, report.false_positives, report.false_negatives), (1, 0, 0));
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 1.0);
    }

    #[test]
    fn missed_truth_is_vacuously_precise() {
        let report = evaluate_against_truth(&[], &[30.0], 2.0);
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 0.0);
        assert_eq!(report.false_negatives, 1);
    }

    #[test]
    fn extra_alarm_halves_precision() {
        let report = evaluate_against_truth(&[alarm(29.9), alarm(30.5)], &[30.0], 2.0);
        assert_eq!(report.precision, 0.5);
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.false_positives, 1);
    }

    #[test]
    fn both_sides_empty_is_perfect() {
        let report = evaluate_against_truth(&[], &[], 2.0);
        assert_eq!(report.precision, 1.0);
        assert_eq!(report.recall, 1.0);
    }

    #[test]
    fn matching_is_one_to_one() {
        // Two alarms, one truth: only one can match.
        let report = evaluate_against_truth(&[alarm(30.0), alarm(30.1)], &[30.0], 2.0);
        assert_eq!(report.true_positives, 1);
        assert_eq!(report.false_positives, 1);
    }

    #[test]
    fn alarms_outside_the_window_do_not_match() {
        let report = evaluate_against_truth(&[alarm(35.0)], &[30.0], 2.0);
        assert_eq!(report.true_positives, 0);
        assert_eq!(report.false_positives, 1);
        assert_eq!(report.false_negatives, 1);
    }

    #[test]
    fn report_serializes_with_the_five_fields() {
        let report = evaluate_against_truth(&[alarm(30.0)], &[30.0], 2.0);
        let json = serde_json::to_string(&report).unwrap();
        assert_eq!(
            json,
            r#"{"true_positives":1,"false_positives":0,"false_negatives":0,"precision":1.0,"recall":1.0}"#
        );
    }
}

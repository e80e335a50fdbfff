//! Metrical F-measure over bar, beat and sub-beat groupings.

use crate::metrics::MatchMode;
use crate::score::{Grouping, Score, ScoreError};
use crate::time::{f_measure, Rational, Time};

/// One-to-one matching of groupings whose start and end both lie within
/// `tolerance`, regardless of level. Closest pairs (by summed endpoint
/// distance) are taken first. Returns the number of pairs.
pub fn match_groupings(transcribed: &[Grouping], ground_truth: &[Grouping], tolerance: &Time) -> usize {
    let mut gt_order: Vec<usize> = (0..ground_truth.len()).collect();
    gt_order.sort_by(|&a, &b| ground_truth[a].start.cmp(&ground_truth[b].start));

    let mut candidates: Vec<(Time, usize, usize)> = Vec::new();
    for (i, t) in transcribed.iter().enumerate() {
        let low = &t.start - tolerance;
        let high = &t.start + tolerance;
        let from = gt_order.partition_point(|&g| ground_truth[g].start < low);
        for &j in gt_order[from..].iter().take_while(|&&g| ground_truth[g].start <= high) {
            let g = &ground_truth[j];
            let end_diff = t.end.abs_diff(&g.end);
            if end_diff <= *tolerance {
                candidates.push((&t.start.abs_diff(&g.start) + &end_diff, i, j));
            }
        }
    }
    candidates.sort();
    let mut t_used = vec![false; transcribed.len()];
    let mut g_used = vec![false; ground_truth.len()];
    let mut pairs = 0;
    for (_, i, j) in candidates {
        if !t_used[i] && !g_used[j] {
            t_used[i] = true;
            g_used[j] = true;
            pairs += 1;
        }
    }
    pairs
}

/// Meter component. Fails when either score has no time signature.
pub fn meter_score(transcription: &Score, ground_truth: &Score, mode: &MatchMode) -> Result<Rational, ScoreError> {
    let tr = transcription.generate_groupings()?;
    let gt = ground_truth.generate_groupings()?;
    let tp = match_groupings(&tr, &gt, mode.grouping_tolerance());
    Ok(f_measure(tp, tr.len() - tp, gt.len() - tp))
}

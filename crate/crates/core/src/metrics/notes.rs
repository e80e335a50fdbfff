//! Note matching and the note-level components: multi-pitch, voice, value.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::One;

use crate::metrics::MatchMode;
use crate::score::{Note, Score};
use crate::time::{f_measure, ratio, Rational, Time};

/// Pairing of transcribed notes with ground-truth notes, by note index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NoteMatching {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_transcribed: Vec<usize>,
    pub unmatched_ground_truth: Vec<usize>,
}

impl NoteMatching {
    pub fn true_positives(&self) -> usize {
        self.pairs.len()
    }

    pub fn false_positives(&self) -> usize {
        self.unmatched_transcribed.len()
    }

    pub fn false_negatives(&self) -> usize {
        self.unmatched_ground_truth.len()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Move {
    Pair,
    SkipTranscribed,
    SkipGroundTruth,
}

/// Best matching between two onset-sorted runs of one pitch: most pairs
/// first, then least total onset difference. Such a matching never needs
/// crossing pairs, so an order-preserving DP finds it.
fn match_run(tr: &[(&Time, usize)], gt: &[(&Time, usize)], tolerance: &Time) -> Vec<(usize, usize)> {
    let (n, m) = (tr.len(), gt.len());
    let width = m + 1;
    // (pairs, total difference) per prefix pair
    let mut best: Vec<(usize, Time)> = vec![(0, Time::zero()); (n + 1) * width];
    let mut moves: Vec<Move> = vec![Move::SkipTranscribed; (n + 1) * width];
    for mv in &mut moves[1..=m] {
        *mv = Move::SkipGroundTruth;
    }
    let better = |a: &(usize, Time), b: &(usize, Time)| a.0 > b.0 || (a.0 == b.0 && a.1 < b.1);
    for i in 1..=n {
        for j in 1..=m {
            let mut choice = best[(i - 1) * width + j].clone();
            let mut mv = Move::SkipTranscribed;
            let skip_g = &best[i * width + j - 1];
            if better(skip_g, &choice) {
                choice = skip_g.clone();
                mv = Move::SkipGroundTruth;
            }
            let diff = tr[i - 1].0.abs_diff(gt[j - 1].0);
            if diff <= *tolerance {
                let prev = &best[(i - 1) * width + j - 1];
                let paired = (prev.0 + 1, &prev.1 + &diff);
                if !better(&choice, &paired) {
                    choice = paired;
                    mv = Move::Pair;
                }
            }
            best[i * width + j] = choice;
            moves[i * width + j] = mv;
        }
    }
    let mut pairs = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        match moves[i * width + j] {
            Move::Pair => {
                pairs.push((tr[i - 1].1, gt[j - 1].1));
                i -= 1;
                j -= 1;
            }
            Move::SkipTranscribed => i -= 1,
            Move::SkipGroundTruth => j -= 1,
        }
    }
    pairs.reverse();
    pairs
}

fn by_pitch(notes: &[Note]) -> BTreeMap<u8, Vec<(&Time, usize)>> {
    let mut runs: BTreeMap<u8, Vec<(&Time, usize)>> = BTreeMap::new();
    for (i, n) in notes.iter().enumerate() {
        runs.entry(n.pitch.midi()).or_default().push((&n.onset, i));
    }
    for run in runs.values_mut() {
        run.sort();
    }
    runs
}

/// Pair notes of equal pitch whose onsets lie within the mode's tolerance.
///
/// Maximizes the number of pairs; among maximum matchings, minimizes the
/// summed onset difference. Remaining ties resolve in score order.
pub fn match_notes(transcription: &Score, ground_truth: &Score, mode: &MatchMode) -> NoteMatching {
    let tr_runs = by_pitch(transcription.notes());
    let gt_runs = by_pitch(ground_truth.notes());
    let mut pairs = Vec::new();
    for (pitch, tr) in &tr_runs {
        if let Some(gt) = gt_runs.get(pitch) {
            pairs.extend(match_run(tr, gt, mode.onset_tolerance()));
        }
    }
    pairs.sort_unstable();
    let tr_used: HashSet<usize> = pairs.iter().map(|p| p.0).collect();
    let gt_used: HashSet<usize> = pairs.iter().map(|p| p.1).collect();
    NoteMatching {
        unmatched_transcribed: (0..transcription.notes().len()).filter(|i| !tr_used.contains(i)).collect(),
        unmatched_ground_truth: (0..ground_truth.notes().len()).filter(|i| !gt_used.contains(i)).collect(),
        pairs,
    }
}

pub fn multi_pitch_score(matching: &NoteMatching) -> Rational {
    f_measure(matching.true_positives(), matching.false_positives(), matching.false_negatives())
}

/// Consecutive note pairs within each voice, ordered by onset then pitch.
fn voice_links(score: &Score) -> Vec<(usize, usize)> {
    let notes = score.notes();
    let mut voices: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, n) in notes.iter().enumerate() {
        voices.entry(n.voice).or_default().push(i);
    }
    let mut links = Vec::new();
    for members in voices.values_mut() {
        members.sort_by(|&a, &b| (&notes[a].onset, notes[a].pitch, a).cmp(&(&notes[b].onset, notes[b].pitch, b)));
        links.extend(members.windows(2).map(|w| (w[0], w[1])));
    }
    links
}

/// F-measure over voice links: a transcribed link is correct when the
/// ground-truth partners of its two notes are linked in one ground-truth
/// voice.
pub fn voice_score(matching: &NoteMatching, transcription: &Score, ground_truth: &Score) -> Rational {
    let tr_links = voice_links(transcription);
    let gt_links: HashSet<(usize, usize)> = voice_links(ground_truth).into_iter().collect();
    let partner: HashMap<usize, usize> = matching.pairs.iter().copied().collect();
    let tp = tr_links
        .iter()
        .filter(|(a, b)| match (partner.get(a), partner.get(b)) {
            (Some(&pa), Some(&pb)) => gt_links.contains(&(pa, pb)),
            _ => false,
        })
        .count();
    f_measure(tp, tr_links.len() - tp, gt_links.len() - tp)
}

/// Fraction of matched pairs whose durations agree within tolerance.
pub fn value_score(matching: &NoteMatching, transcription: &Score, ground_truth: &Score, mode: &MatchMode) -> Rational {
    if matching.pairs.is_empty() {
        return Rational::one();
    }
    let correct = matching
        .pairs
        .iter()
        .filter(|&&(t, g)| {
            let gt_duration = ground_truth.notes()[g].duration();
            let diff = transcription.notes()[t].duration().abs_diff(&gt_duration);
            diff <= mode.duration_tolerance(&gt_duration)
        })
        .count();
    ratio(correct as i64, matching.pairs.len() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{Pitch, ScoreParts};

    fn score(notes: &[(i64, i64, i64, u32)]) -> Score {
        Score::new(ScoreParts {
            notes: notes
                .iter()
                .map(|&(p, on, off, v)| {
                    Note::new(Pitch::new(p).unwrap(), Time::from_millis(on), Time::from_millis(off), v)
                })
                .collect(),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn identical_scores_fully_match() {
        let s = score(&[(60, 0, 500, 0), (64, 0, 500, 0), (67, 500, 1000, 0)]);
        let m = match_notes(&s, &s, &MatchMode::auto_aligned());
        assert_eq!(m.pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(multi_pitch_score(&m), ratio(1, 1));
    }

    #[test]
    fn auto_mode_needs_exact_onsets() {
        let gt = score(&[(60, 0, 500, 0)]);
        let tr = Score::new(ScoreParts {
            notes: vec![Note::new(Pitch::new(60).unwrap(), Time::from_ratio(1, 1000), Time::from_millis(500), 0)],
            ..Default::default()
        })
        .unwrap();
        assert!(match_notes(&tr, &gt, &MatchMode::auto_aligned()).pairs.is_empty());
        assert_eq!(match_notes(&tr, &gt, &MatchMode::pre_aligned()).pairs.len(), 1);
    }

    #[test]
    fn pre_mode_tolerance() {
        let gt = score(&[(60, 1000, 1500, 0)]);
        assert_eq!(match_notes(&score(&[(60, 1040, 1500, 0)]), &gt, &MatchMode::pre_aligned()).pairs.len(), 1);
        assert_eq!(match_notes(&score(&[(60, 950, 1500, 0)]), &gt, &MatchMode::pre_aligned()).pairs.len(), 1);
        assert!(match_notes(&score(&[(60, 1051, 1500, 0)]), &gt, &MatchMode::pre_aligned()).pairs.is_empty());
    }

    #[test]
    fn matching_is_maximum_and_prefers_close_pairs() {
        // closest-first pairing would strand the note at 0
        let tr = score(&[(60, 0, 10, 0), (60, 15, 30, 0)]);
        let gt = score(&[(60, 10, 20, 0), (60, 65, 80, 0)]);
        assert_eq!(match_notes(&tr, &gt, &MatchMode::pre_aligned()).pairs, vec![(0, 0), (1, 1)]);
        // a single ground-truth note goes to the nearer transcribed note
        let tr = score(&[(60, 0, 10, 0), (60, 40, 60, 0)]);
        let gt = score(&[(60, 40, 60, 0)]);
        assert_eq!(match_notes(&tr, &gt, &MatchMode::pre_aligned()).pairs, vec![(1, 0)]);
    }

    #[test]
    fn multi_pitch_counts() {
        let gt = score(&[(60, 0, 10, 0), (62, 10, 20, 0), (64, 20, 30, 0)]);
        let tr = score(&[(60, 0, 10, 0), (62, 10, 20, 0), (70, 20, 30, 0)]);
        let m = match_notes(&tr, &gt, &MatchMode::auto_aligned());
        assert_eq!(multi_pitch_score(&m), ratio(2, 3));
        let disjoint = score(&[(40, 0, 10, 0)]);
        assert_eq!(multi_pitch_score(&match_notes(&disjoint, &gt, &MatchMode::auto_aligned())), ratio(0, 1));
    }

    #[test]
    fn split_voice_loses_one_link() {
        let gt = score(&[(60, 0, 10, 0), (62, 10, 20, 0), (64, 20, 30, 0), (65, 30, 40, 0)]);
        let tr = score(&[(60, 0, 10, 0), (62, 10, 20, 0), (64, 20, 30, 1), (65, 30, 40, 1)]);
        let m = match_notes(&tr, &gt, &MatchMode::auto_aligned());
        assert_eq!(voice_score(&m, &tr, &gt), ratio(4, 5));
        assert_eq!(voice_score(&m, &gt, &gt), ratio(1, 1));
    }

    #[test]
    fn voice_without_matches_is_zero() {
        let gt = score(&[(60, 0, 10, 0), (62, 10, 20, 0)]);
        let tr = score(&[(70, 0, 10, 0), (72, 10, 20, 0)]);
        let m = match_notes(&tr, &gt, &MatchMode::auto_aligned());
        assert_eq!(voice_score(&m, &tr, &gt), ratio(0, 1));
        let single = score(&[(60, 0, 10, 0)]);
        let m = match_notes(&single, &single, &MatchMode::auto_aligned());
        assert_eq!(voice_score(&m, &single, &single), ratio(1, 1));
    }

    #[test]
    fn value_rules() {
        let gt = score(&[(60, 0, 100, 0), (62, 100, 200, 0)]);
        let tr = score(&[(60, 0, 100, 0), (62, 100, 201, 0)]);
        let auto = MatchMode::auto_aligned();
        assert_eq!(value_score(&match_notes(&tr, &gt, &auto), &tr, &gt, &auto), ratio(1, 2));
        let pre = MatchMode::pre_aligned();
        assert_eq!(value_score(&match_notes(&tr, &gt, &pre), &tr, &gt, &pre), ratio(1, 1));
        let none = NoteMatching::default();
        assert_eq!(value_score(&none, &tr, &gt, &auto), ratio(1, 1));
        // ratio: half of a 1000 ms note
        let gt = score(&[(60, 0, 1000, 0)]);
        assert_eq!(
            value_score(&match_notes(&score(&[(60, 0, 1500, 0)]), &gt, &pre), &score(&[(60, 0, 1500, 0)]), &gt, &pre),
            ratio(1, 1)
        );
        assert_eq!(
            value_score(&match_notes(&score(&[(60, 0, 1501, 0)]), &gt, &pre), &score(&[(60, 0, 1501, 0)]), &gt, &pre),
            ratio(0, 1)
        );
    }
}

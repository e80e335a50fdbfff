//! Key and chord-symbol evaluation.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::score::{active_key, ChordSymbol, KeySignature, Mode, Score};
use crate::time::{ratio, Rational, Time};

/// Standard single-key score: 1 for the correct key, 1/2 for a fifth above
/// or below in the same mode, 3/10 for the relative key, 1/5 for the
/// parallel key, 0 otherwise.
pub fn key_score_single(transcribed: &KeySignature, ground_truth: &KeySignature) -> Rational {
    let interval = transcribed.tonic.interval_from(ground_truth.tonic);
    let same_mode = transcribed.mode == ground_truth.mode;
    match (same_mode, ground_truth.mode, interval) {
        (true, _, 0) => ratio(1, 1),
        (true, _, 5) | (true, _, 7) => ratio(1, 2),
        (false, Mode::Major, 9) | (false, Mode::Minor, 3) => ratio(3, 10),
        (false, _, 0) => ratio(1, 5),
        _ => Rational::zero(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarmonyError {
    #[error("{0} has no key signature")]
    MissingKey(&'static str),
}

/// Key scores of the continuous key sections, weighted by section length
/// over the ground truth's span.
pub fn key_change_score(transcription: &Score, ground_truth: &Score) -> Result<Rational, HarmonyError> {
    if transcription.keys().is_empty() {
        return Err(HarmonyError::MissingKey("transcription"));
    }
    if ground_truth.keys().is_empty() {
        return Err(HarmonyError::MissingKey("ground truth"));
    }
    let span = ground_truth.span();
    let span_length = span.map(|s| s.length()).unwrap_or_default();
    if span_length <= Time::zero() {
        // no timeline to weight over: compare the keys at the start
        let at = span.map(|s| s.first_onset.clone()).unwrap_or_default();
        return Ok(key_score_single(active_key(transcription.keys(), &at), active_key(ground_truth.keys(), &at)));
    }
    let total = transcription
        .continuous_key_sections(ground_truth)
        .iter()
        .map(|s| key_score_single(&s.transcription_key, &s.ground_truth_key) * (&(&s.end - &s.start) / &span_length))
        .fold(Rational::zero(), |acc, x| acc + x);
    Ok(total)
}

fn active_symbol<'a>(symbols: &'a [ChordSymbol], t: &Time) -> Option<&'a ChordSymbol> {
    let idx = symbols.partition_point(|c| c.start <= *t);
    idx.checked_sub(1).map(|i| &symbols[i])
}

fn symbols_agree(a: Option<&ChordSymbol>, b: Option<&ChordSymbol>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a.label.matches(&b.label),
        (None, None) => true,
        _ => false,
    }
}

/// Proportion of the ground truth's span during which the active chord
/// symbols agree. Stretches where neither score has a symbol yet agree.
pub fn chord_progression_score(transcription: &Score, ground_truth: &Score) -> Rational {
    let tr = transcription.chord_symbols();
    let gt = ground_truth.chord_symbols();
    let Some(span) = ground_truth.span() else {
        return Rational::one();
    };
    let span_length = span.length();
    if span_length <= Time::zero() {
        let at = &span.first_onset;
        return if symbols_agree(active_symbol(tr, at), active_symbol(gt, at)) {
            Rational::one()
        } else {
            Rational::zero()
        };
    }
    let mut bounds: BTreeSet<&Time> = BTreeSet::new();
    bounds.insert(&span.first_onset);
    bounds.insert(&span.last_offset);
    for c in tr.iter().chain(gt) {
        if c.start > span.first_onset && c.start < span.last_offset {
            bounds.insert(&c.start);
        }
    }
    let bounds: Vec<&Time> = bounds.into_iter().collect();
    bounds
        .windows(2)
        .filter(|w| symbols_agree(active_symbol(tr, w[0]), active_symbol(gt, w[0])))
        .map(|w| &(w[1] - w[0]) / &span_length)
        .fold(Rational::zero(), |acc, x| acc + x)
}

/// Mean of the key and chord scores; the key score alone when either score
/// carries no chord symbols.
pub fn harmony_score(transcription: &Score, ground_truth: &Score) -> (Rational, Option<HarmonyError>) {
    let (key, error) = match key_change_score(transcription, ground_truth) {
        Ok(score) => (score, None),
        Err(e) => (Rational::zero(), Some(e)),
    };
    if transcription.chord_symbols().is_empty() || ground_truth.chord_symbols().is_empty() {
        return (key, error);
    }
    let chords = chord_progression_score(transcription, ground_truth);
    ((key + chords) / ratio(2, 1), error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{ChordLabel, Note, Pitch, PitchClass, ScoreParts};

    fn key(tonic: i64, mode: Mode, start: i64) -> KeySignature {
        KeySignature::new(PitchClass::new(tonic).unwrap(), mode, Time::from_millis(start))
    }

    const C: i64 = 0;
    const D: i64 = 2;
    const G: i64 = 7;
    const A: i64 = 9;

    fn score(keys: Vec<KeySignature>, chords: &[(i64, &str)], end: i64) -> Score {
        Score::new(ScoreParts {
            notes: vec![Note::new(Pitch::new(60).unwrap(), Time::zero(), Time::from_millis(end), 0)],
            keys,
            chord_symbols: chords
                .iter()
                .map(|&(t, l)| ChordSymbol { label: l.parse::<ChordLabel>().unwrap(), start: Time::from_millis(t) })
                .collect(),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn key_table() {
        let s = |t, tm, g, gm| key_score_single(&key(t, tm, 0), &key(g, gm, 0));
        assert_eq!(s(D, Mode::Major, D, Mode::Major), ratio(1, 1));
        assert_eq!(s(G, Mode::Major, D, Mode::Major), ratio(1, 2));
        assert_eq!(s(A, Mode::Major, D, Mode::Major), ratio(1, 2));
        assert_eq!(s(G, Mode::Major, G, Mode::Minor), ratio(1, 5));
        assert_eq!(s(A, Mode::Minor, C, Mode::Major), ratio(3, 10));
        assert_eq!(s(C, Mode::Major, A, Mode::Minor), ratio(3, 10));
        assert_eq!(s(1, Mode::Major, C, Mode::Major), ratio(0, 1));
        // a fifth away in the other mode is unrelated
        assert_eq!(s(G, Mode::Minor, C, Mode::Major), ratio(0, 1));
    }

    #[test]
    fn key_changes_weighted_by_duration() {
        let gt = score(vec![key(D, Mode::Major, 0), key(G, Mode::Minor, 2000)], &[], 4000);
        let tr = score(vec![key(D, Mode::Major, 0), key(G, Mode::Major, 1000)], &[], 4000);
        assert_eq!(key_change_score(&tr, &gt).unwrap(), ratio(19, 40));
        assert_eq!(harmony_score(&tr, &gt), (ratio(19, 40), None));
    }

    #[test]
    fn constant_keys() {
        let gt = score(vec![key(D, Mode::Major, 0)], &[], 4000);
        assert_eq!(key_change_score(&gt, &gt).unwrap(), ratio(1, 1));
        let wrong = score(vec![key(1, Mode::Major, 0)], &[], 4000);
        assert_eq!(key_change_score(&wrong, &gt).unwrap(), ratio(0, 1));
        let keyless = score(vec![], &[], 4000);
        assert_eq!(key_change_score(&keyless, &gt), Err(HarmonyError::MissingKey("transcription")));
        assert_eq!(harmony_score(&keyless, &gt).0, ratio(0, 1));
    }

    #[test]
    fn chords_half_right() {
        let gt = score(vec![key(C, Mode::Major, 0)], &[(0, "C"), (2000, "G:7")], 4000);
        let tr = score(vec![key(C, Mode::Major, 0)], &[(0, "C:maj"), (2000, "G:min")], 4000);
        assert_eq!(chord_progression_score(&tr, &gt), ratio(1, 2));
        assert_eq!(harmony_score(&tr, &gt).0, ratio(3, 4));
        assert_eq!(harmony_score(&gt, &gt).0, ratio(1, 1));
    }

    #[test]
    fn leading_stretch_without_symbols() {
        let gt = score(vec![key(C, Mode::Major, 0)], &[(1000, "C")], 4000);
        let tr = score(vec![key(C, Mode::Major, 0)], &[(2000, "C")], 4000);
        assert_eq!(chord_progression_score(&tr, &gt), ratio(3, 4));
    }
}

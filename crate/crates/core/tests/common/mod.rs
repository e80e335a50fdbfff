//! Test-only generators and brute-force oracles.
#![allow(dead_code)]

use mv2h::score::{
    ChordLabel, ChordSymbol, KeySignature, Mode, Note, Pitch, PitchClass, Score, ScoreParts, TimeSignature,
};
use mv2h::time::{int, ratio, Rational, Time};
use mv2h::Chord;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn ms(v: i64) -> Time {
    Time::from_millis(v)
}

pub fn note(pitch: i64, onset: i64, offset: i64, voice: u32) -> Note {
    Note::new(Pitch::new(pitch).unwrap(), ms(onset), ms(offset), voice)
}

pub fn key(tonic: i64, mode: Mode, start: Time) -> KeySignature {
    KeySignature::new(PitchClass::new(tonic).unwrap(), mode, start)
}

const METERS: [(u32, u32); 9] = [(4, 4), (3, 4), (2, 4), (6, 8), (9, 8), (12, 8), (5, 4), (2, 2), (3, 8)];
const LABELS: [&str; 8] = ["C", "G:7", "A:min", "F:maj", "D:min7", "Bb", "E:dim", "F#:sus4"];

fn grid_time<R: Rng>(rng: &mut R, max_steps: i64, allow_triplets: bool) -> Time {
    let base = ms(rng.gen_range(0..=max_steps) * 250);
    if allow_triplets && rng.gen_bool(0.2) {
        &base + &Time::from_ratio(1000, 3)
    } else {
        base
    }
}

fn increasing_times<R: Rng>(rng: &mut R, count: usize, max_steps: i64) -> Vec<Time> {
    let mut times: Vec<Time> = (0..count).map(|_| ms(rng.gen_range(1..=max_steps) * 250)).collect();
    times.sort();
    times.dedup();
    times
}

/// A valid random score, possibly with key, meter and chord changes, bar
/// lines and non-integer (triplet) times.
pub fn random_score<R: Rng>(rng: &mut R) -> Score {
    let note_count = rng.gen_range(1..=30);
    let voices = rng.gen_range(1..=3u32);
    let triplets = rng.gen_bool(0.3);
    let mut notes = Vec::with_capacity(note_count);
    for _ in 0..note_count {
        let onset = grid_time(rng, 32, triplets);
        let duration = ms(rng.gen_range(1..=16) * 125);
        let offset = &onset + &duration;
        notes.push(Note::new(Pitch::new(rng.gen_range(48..=84)).unwrap(), onset, offset, rng.gen_range(0..voices)));
    }

    let mut meters = vec![{
        let (n, d) = *METERS.choose(rng).unwrap();
        TimeSignature::new(n, d, ms(0)).unwrap()
    }];
    let changes = rng.gen_range(0..=2);
    for t in increasing_times(rng, changes, 32) {
        let (n, d) = *METERS.choose(rng).unwrap();
        meters.push(TimeSignature::new(n, d, t).unwrap());
    }

    let mode = |rng: &mut R| if rng.gen_bool(0.5) { Mode::Major } else { Mode::Minor };
    let mut keys = vec![{
        let m = mode(rng);
        key(rng.gen_range(0..12), m, ms(0))
    }];
    let changes = rng.gen_range(0..=2);
    for t in increasing_times(rng, changes, 32) {
        let m = mode(rng);
        keys.push(key(rng.gen_range(0..12), m, t));
    }

    let symbol_count = rng.gen_range(0..=4);
    let chord_symbols = increasing_times(rng, symbol_count, 32)
        .into_iter()
        .map(|start| ChordSymbol { label: LABELS.choose(rng).unwrap().parse::<ChordLabel>().unwrap(), start })
        .collect();

    let bars = if rng.gen_bool(0.3) {
        let mut b = vec![ms(0)];
        let count = rng.gen_range(1..=4);
        b.extend(increasing_times(rng, count, 32));
        b
    } else {
        Vec::new()
    };

    Score::new(ScoreParts { notes, voice_count: Some(voices), keys, meters, chord_symbols, bars, groupings: None })
        .expect("generator builds valid scores")
}

/// Random chord over a small pitch alphabet.
pub fn random_chord<R: Rng>(rng: &mut R, onset: i64, alphabet: &[u8]) -> Chord {
    let size = rng.gen_range(1..=3);
    Chord {
        onset: ms(onset),
        notes: (0..size)
            .map(|_| Note::new(Pitch::new(*alphabet.choose(rng).unwrap() as i64).unwrap(), ms(onset), ms(onset + 1), 0))
            .collect(),
    }
}

/// Independent chord distance: pitch F-measure from per-pitch counts.
pub fn oracle_distance(a: &Chord, b: &Chord) -> Rational {
    let mut counts_a = [0i64; 128];
    let mut counts_b = [0i64; 128];
    for n in &a.notes {
        counts_a[n.pitch.midi() as usize] += 1;
    }
    for n in &b.notes {
        counts_b[n.pitch.midi() as usize] += 1;
    }
    let tp: i64 = (0..128).map(|p| counts_a[p].min(counts_b[p])).sum();
    let precision = ratio(tp, a.notes.len() as i64);
    let recall = ratio(tp, b.notes.len() as i64);
    if tp == 0 {
        return int(1);
    }
    let f = int(2) * &precision * &recall / (&precision + &recall);
    int(1) - f
}

/// Exhaustive minimum over every monotone complete alignment.
pub fn brute_force_alignment_cost(a: &[Chord], b: &[Chord], gap: &Rational) -> Rational {
    fn go(a: &[Chord], b: &[Chord], i: usize, j: usize, gap: &Rational, acc: Rational, best: &mut Option<Rational>) {
        if i == a.len() && j == b.len() {
            if best.as_ref().is_none_or(|b| acc < *b) {
                *best = Some(acc);
            }
            return;
        }
        if i < a.len() && j < b.len() {
            go(a, b, i + 1, j + 1, gap, &acc + oracle_distance(&a[i], &b[j]), best);
        }
        if i < a.len() {
            go(a, b, i + 1, j, gap, &acc + gap, best);
        }
        if j < b.len() {
            go(a, b, i, j + 1, gap, &acc + gap, best);
        }
    }
    let mut best = None;
    go(a, b, 0, 0, gap, Rational::zero(), &mut best);
    best.unwrap()
}

/// Largest number of pitch-equal, onset-feasible pairs, by exhaustive
/// search over subsets of ground-truth notes.
pub fn brute_force_max_matching(tr: &[Note], gt: &[Note], tolerance: &Time) -> usize {
    fn go(tr: &[Note], gt: &[Note], i: usize, used: u32, tol: &Time) -> usize {
        if i == tr.len() {
            return 0;
        }
        let mut best = go(tr, gt, i + 1, used, tol);
        for (j, g) in gt.iter().enumerate() {
            if used & (1 << j) == 0 && g.pitch == tr[i].pitch && tr[i].onset.abs_diff(&g.onset) <= *tol {
                best = best.max(1 + go(tr, gt, i + 1, used | (1 << j), tol));
            }
        }
        best
    }
    go(tr, gt, 0, 0, tolerance)
}

//! Automatic alignment of a transcription onto a ground-truth timeline.
//!
//! Both scores are reduced to chord sequences and aligned with DTW, where
//! the cost of pairing two chords is one minus their pitch F-measure and
//! leaving a chord unpaired costs a fixed gap penalty. Paired chords that
//! share at least one pitch become anchors; every transcription time is then
//! mapped piecewise-linearly between the surrounding anchors.

use num_traits::{One, Zero};

use crate::score::{Chord, Grouping, Score, Span};
use crate::time::{ratio, Rational, Time};

/// Default cost of leaving one chord unaligned.
pub fn default_gap_penalty() -> Rational {
    ratio(3, 5)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlignError {
    #[error("cannot align an empty {0}")]
    Empty(&'static str),
    #[error("gap penalty must be positive")]
    BadGapPenalty,
}

/// Sorted pitches of a chord, for multiset intersection.
fn sorted_pitches(chord: &Chord) -> Vec<u8> {
    let mut p: Vec<u8> = chord.pitches().map(|p| p.midi()).collect();
    p.sort_unstable();
    p
}

/// Size of the multiset intersection of two sorted pitch lists.
fn shared(a: &[u8], b: &[u8]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn distance_from_pitches(t: &[u8], g: &[u8]) -> Rational {
    let tp = shared(t, g);
    let fp = t.len() - tp;
    let fn_ = g.len() - tp;
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        return Rational::zero();
    }
    ratio((fp + fn_) as i64, denom as i64)
}

/// One minus the pitch-only F-measure between two chords.
///
/// Duplicate pitches each need their own partner on the other side.
pub fn chord_distance(transcribed: &Chord, ground_truth: &Chord) -> Rational {
    distance_from_pitches(&sorted_pitches(transcribed), &sorted_pitches(ground_truth))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Step {
    /// A transcription chord paired with a ground-truth chord.
    Match { transcription: usize, ground_truth: usize },
    /// A transcription chord with no ground-truth partner.
    Extra { transcription: usize },
    /// A ground-truth chord with no transcription partner.
    Missed { ground_truth: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentPath {
    pub steps: Vec<Step>,
    pub total_cost: Rational,
}

impl AlignmentPath {
    pub fn matches(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.steps.iter().filter_map(|s| match *s {
            Step::Match { transcription, ground_truth } => Some((transcription, ground_truth)),
            _ => None,
        })
    }
}

#[derive(Clone, Copy)]
enum Back {
    Diagonal,
    Missed,
    Extra,
}

/// Minimum-cost monotone alignment of two chord sequences.
///
/// Ties prefer a match, then a skipped ground-truth chord, then a skipped
/// transcription chord.
pub fn dtw_align(
    transcribed: &[Chord],
    ground_truth: &[Chord],
    gap_penalty: &Rational,
) -> Result<AlignmentPath, AlignError> {
    if transcribed.is_empty() {
        return Err(AlignError::Empty("transcription"));
    }
    if ground_truth.is_empty() {
        return Err(AlignError::Empty("ground truth"));
    }
    if *gap_penalty <= Rational::zero() {
        return Err(AlignError::BadGapPenalty);
    }
    let t_pitches: Vec<Vec<u8>> = transcribed.iter().map(sorted_pitches).collect();
    let g_pitches: Vec<Vec<u8>> = ground_truth.iter().map(sorted_pitches).collect();
    let (n, m) = (transcribed.len(), ground_truth.len());
    let width = m + 1;

    let mut cost: Vec<Rational> = vec![Rational::zero(); (n + 1) * width];
    let mut back: Vec<Back> = vec![Back::Diagonal; (n + 1) * width];
    for i in 1..=n {
        cost[i * width] = &cost[(i - 1) * width] + gap_penalty;
        back[i * width] = Back::Extra;
    }
    for j in 1..=m {
        cost[j] = &cost[j - 1] + gap_penalty;
        back[j] = Back::Missed;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diagonal = &cost[(i - 1) * width + j - 1] + distance_from_pitches(&t_pitches[i - 1], &g_pitches[j - 1]);
            let missed = &cost[i * width + j - 1] + gap_penalty;
            let extra = &cost[(i - 1) * width + j] + gap_penalty;
            let (best, dir) = if diagonal <= missed && diagonal <= extra {
                (diagonal, Back::Diagonal)
            } else if missed <= extra {
                (missed, Back::Missed)
            } else {
                (extra, Back::Extra)
            };
            cost[i * width + j] = best;
            back[i * width + j] = dir;
        }
    }

    let mut steps = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        match back[i * width + j] {
            Back::Diagonal => {
                steps.push(Step::Match { transcription: i - 1, ground_truth: j - 1 });
                i -= 1;
                j -= 1;
            }
            Back::Missed => {
                steps.push(Step::Missed { ground_truth: j - 1 });
                j -= 1;
            }
            Back::Extra => {
                steps.push(Step::Extra { transcription: i - 1 });
                i -= 1;
            }
        }
    }
    steps.reverse();
    Ok(AlignmentPath { steps, total_cost: cost[n * width + m].clone() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor {
    pub transcription: Time,
    pub ground_truth: Time,
}

/// Anchors strictly increasing in both coordinates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnchorSet {
    anchors: Vec<Anchor>,
}

impl AnchorSet {
    /// Keeps each anchor only if it lies strictly after the last kept one on
    /// both timelines.
    pub fn from_candidates(candidates: impl IntoIterator<Item = Anchor>) -> Self {
        let mut anchors: Vec<Anchor> = Vec::new();
        for a in candidates {
            let fits = anchors
                .last()
                .is_none_or(|last| a.transcription > last.transcription && a.ground_truth > last.ground_truth);
            if fits {
                anchors.push(a);
            }
        }
        AnchorSet { anchors }
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

/// Matched chord pairs sharing at least one pitch.
pub fn extract_anchors(path: &AlignmentPath, transcribed: &[Chord], ground_truth: &[Chord]) -> AnchorSet {
    let one = Rational::one();
    AnchorSet::from_candidates(
        path.matches().filter(|&(t, g)| chord_distance(&transcribed[t], &ground_truth[g]) < one).map(|(t, g)| Anchor {
            transcription: transcribed[t].onset.clone(),
            ground_truth: ground_truth[g].onset.clone(),
        }),
    )
}

/// Piecewise-linear, strictly increasing map from transcription time to
/// ground-truth time. Outside the knots the nearest segment is extended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeMap {
    knots: Vec<Anchor>,
}

impl TimeMap {
    /// With fewer than two anchors the map falls back to span information:
    /// none maps the transcription span onto the ground-truth span, one pins
    /// the anchor and scales by the ratio of the spans.
    pub fn new(anchors: &AnchorSet, transcription_span: Option<&Span>, ground_truth_span: Option<&Span>) -> TimeMap {
        let spans = match (transcription_span, ground_truth_span) {
            (Some(t), Some(g)) if t.length() > Time::zero() && g.length() > Time::zero() => Some((t, g)),
            _ => None,
        };
        let scale = spans.map_or_else(Rational::one, |(t, g)| &g.length() / &t.length());
        let unit = Time::from_millis(1);
        let knots = match anchors.anchors() {
            [] => match (spans, transcription_span, ground_truth_span) {
                (Some((t, g)), _, _) => vec![
                    Anchor { transcription: t.first_onset.clone(), ground_truth: g.first_onset.clone() },
                    Anchor { transcription: t.last_offset.clone(), ground_truth: g.last_offset.clone() },
                ],
                (None, Some(t), Some(g)) => {
                    let offset = Anchor { transcription: t.first_onset.clone(), ground_truth: g.first_onset.clone() };
                    vec![offset.clone(), shifted(&offset, &unit, &Rational::one())]
                }
                _ => vec![
                    Anchor { transcription: Time::zero(), ground_truth: Time::zero() },
                    Anchor { transcription: unit.clone(), ground_truth: unit },
                ],
            },
            [only] => vec![only.clone(), shifted(only, &unit, &scale)],
            many => many.to_vec(),
        };
        TimeMap { knots }
    }

    pub fn identity() -> TimeMap {
        TimeMap::new(&AnchorSet::default(), None, None)
    }

    pub fn knots(&self) -> &[Anchor] {
        &self.knots
    }

    pub fn map(&self, t: &Time) -> Time {
        let k = &self.knots;
        // index of the segment [k[s], k[s+1]] used for t
        let s = k.partition_point(|a| a.transcription <= *t).clamp(1, k.len() - 1) - 1;
        let (a, b) = (&k[s], &k[s + 1]);
        let slope = &(&b.ground_truth - &a.ground_truth) / &(&b.transcription - &a.transcription);
        &a.ground_truth + &(&(t - &a.transcription) * &slope)
    }
}

fn shifted(anchor: &Anchor, by: &Time, scale: &Rational) -> Anchor {
    Anchor { transcription: &anchor.transcription + by, ground_truth: &anchor.ground_truth + &(by * scale) }
}

/// Move every event of `transcription` onto the mapped timeline.
///
/// Metrical groupings are generated on the original timeline first and
/// then mapped, so the result carries them explicitly.
pub fn remap_times(transcription: &Score, map: &TimeMap) -> Score {
    let mut parts = transcription.to_parts();
    for note in &mut parts.notes {
        note.onset = map.map(&note.onset);
        note.offset = map.map(&note.offset);
    }
    for key in &mut parts.keys {
        key.start = map.map(&key.start);
    }
    for meter in &mut parts.meters {
        meter.start = map.map(&meter.start);
    }
    for symbol in &mut parts.chord_symbols {
        symbol.start = map.map(&symbol.start);
    }
    for bar in &mut parts.bars {
        *bar = map.map(bar);
    }
    parts.groupings = transcription.generate_groupings().ok().map(|groupings| {
        groupings
            .into_iter()
            .map(|g| Grouping { level: g.level, start: map.map(&g.start), end: map.map(&g.end) })
            .collect()
    });
    Score::new(parts).expect("a strictly increasing map preserves score invariants")
}

/// Everything produced by aligning one transcription to one ground truth.
#[derive(Debug, Clone)]
pub struct Alignment {
    pub path: AlignmentPath,
    pub anchors: AnchorSet,
    pub map: TimeMap,
    pub remapped: Score,
}

pub fn align(transcription: &Score, ground_truth: &Score, gap_penalty: &Rational) -> Result<Alignment, AlignError> {
    let t_chords = transcription.build_chord_sequence();
    let g_chords = ground_truth.build_chord_sequence();
    let path = dtw_align(&t_chords, &g_chords, gap_penalty)?;
    let anchors = extract_anchors(&path, &t_chords, &g_chords);
    let map = TimeMap::new(&anchors, transcription.span(), ground_truth.span());
    let remapped = remap_times(transcription, &map);
    Ok(Alignment { path, anchors, map, remapped })
}

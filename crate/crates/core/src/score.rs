//! Canonical symbolic score model.
//!
//! A [`Score`] is immutable once built. It knows how to present itself as a
//! chord sequence (the unit of alignment), as a list of metrical groupings
//! (the unit of meter evaluation), and, paired with a second score, as a list
//! of continuous key sections.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::time::Time;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScoreError {
    #[error("pitch {0} is outside the MIDI range 0-127")]
    PitchOutOfRange(i64),
    #[error("pitch class {0} is outside 0-11")]
    PitchClassOutOfRange(i64),
    #[error("note {index} has offset {offset} not after onset {onset}")]
    EmptyNote { index: usize, onset: Time, offset: Time },
    #[error("note {index} uses voice {voice} but the score declares {voice_count} voices")]
    UnknownVoice { index: usize, voice: u32, voice_count: u32 },
    #[error("{what} are not strictly ascending at {at}")]
    Unordered { what: &'static str, at: Time },
    #[error("first {what} starts at {start}, after the first note onset {first_onset}")]
    LateStart { what: &'static str, start: Time, first_onset: Time },
    #[error("time signature {numerator}/{denominator} is not supported")]
    BadTimeSignature { numerator: u32, denominator: u32 },
    #[error("grouping ends at {end}, not after its start {start}")]
    EmptyGrouping { start: Time, end: Time },
    #[error("score has no time signature")]
    MissingMeter,
    #[error("invalid chord label `{0}`")]
    BadChordLabel(String),
}

/// MIDI note number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pitch(u8);

impl Pitch {
    pub fn new(midi: i64) -> Result<Self, ScoreError> {
        if (0..=127).contains(&midi) {
            Ok(Pitch(midi as u8))
        } else {
            Err(ScoreError::PitchOutOfRange(midi))
        }
    }

    pub fn midi(self) -> u8 {
        self.0
    }

    pub fn class(self) -> PitchClass {
        PitchClass(self.0 % 12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PitchClass(u8);

impl PitchClass {
    pub fn new(class: i64) -> Result<Self, ScoreError> {
        if (0..12).contains(&class) {
            Ok(PitchClass(class as u8))
        } else {
            Err(ScoreError::PitchClassOutOfRange(class))
        }
    }

    /// Wraps any integer onto 0-11.
    pub fn wrapping(class: i64) -> Self {
        PitchClass(class.rem_euclid(12) as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Semitones from `other` up to `self`, in 0-11.
    pub fn interval_from(self, other: PitchClass) -> u8 {
        (self.0 + 12 - other.0) % 12
    }

    pub fn transpose(self, semitones: i64) -> Self {
        PitchClass::wrapping(self.0 as i64 + semitones)
    }
}

pub type VoiceId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Note {
    pub pitch: Pitch,
    pub onset: Time,
    pub offset: Time,
    pub voice: VoiceId,
}

impl Note {
    pub fn new(pitch: Pitch, onset: Time, offset: Time, voice: VoiceId) -> Self {
        Note { pitch, onset, offset, voice }
    }

    pub fn duration(&self) -> Time {
        &self.offset - &self.onset
    }
}

/// All notes sharing one onset, across every voice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chord {
    pub onset: Time,
    pub notes: Vec<Note>,
}

impl Chord {
    pub fn pitches(&self) -> impl Iterator<Item = Pitch> + '_ {
        self.notes.iter().map(|n| n.pitch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Major,
    Minor,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Major => "Maj",
            Mode::Minor => "Min",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeySignature {
    pub tonic: PitchClass,
    pub mode: Mode,
    pub start: Time,
}

impl KeySignature {
    pub fn new(tonic: PitchClass, mode: Mode, start: Time) -> Self {
        KeySignature { tonic, mode, start }
    }

    /// Key from a circle-of-fifths position (as in MusicXML `<fifths>`).
    pub fn from_fifths(fifths: i64, mode: Mode, start: Time) -> Self {
        let major_tonic = PitchClass::wrapping(fifths * 7);
        let tonic = match mode {
            Mode::Major => major_tonic,
            Mode::Minor => major_tonic.transpose(9),
        };
        KeySignature { tonic, mode, start }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeSignature {
    pub numerator: u32,
    pub denominator: u32,
    pub start: Time,
}

/// Length of a quarter note in score time units.
pub const QUARTER: i64 = 1000;

impl TimeSignature {
    pub fn new(numerator: u32, denominator: u32, start: Time) -> Result<Self, ScoreError> {
        if numerator == 0 || !matches!(denominator, 1 | 2 | 4 | 8 | 16 | 32) {
            return Err(ScoreError::BadTimeSignature { numerator, denominator });
        }
        Ok(TimeSignature { numerator, denominator, start })
    }

    /// Compound meters group the denominator unit in threes (6/8, 9/8, 12/16).
    pub fn is_compound(&self) -> bool {
        self.numerator > 3 && self.numerator.is_multiple_of(3)
    }

    pub fn beats_per_bar(&self) -> u32 {
        if self.is_compound() {
            self.numerator / 3
        } else {
            self.numerator
        }
    }

    pub fn sub_beats_per_beat(&self) -> u32 {
        if self.is_compound() {
            3
        } else {
            2
        }
    }

    fn unit_length(&self) -> Time {
        Time::from_ratio(4 * QUARTER, self.denominator as i64)
    }

    pub fn beat_length(&self) -> Time {
        let unit = self.unit_length();
        if self.is_compound() {
            &unit * &crate::time::int(3)
        } else {
            unit
        }
    }

    pub fn sub_beat_length(&self) -> Time {
        &self.beat_length() / &crate::time::int(self.sub_beats_per_beat() as i64)
    }

    pub fn bar_length(&self) -> Time {
        &self.unit_length() * &crate::time::int(self.numerator as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupingLevel {
    Bar,
    Beat,
    SubBeat,
}

impl GroupingLevel {
    pub fn name(self) -> &'static str {
        match self {
            GroupingLevel::Bar => "bar",
            GroupingLevel::Beat => "beat",
            GroupingLevel::SubBeat => "sub_beat",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "bar" => Some(GroupingLevel::Bar),
            "beat" => Some(GroupingLevel::Beat),
            "sub_beat" => Some(GroupingLevel::SubBeat),
            _ => None,
        }
    }
}

/// One metrical span.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grouping {
    pub level: GroupingLevel,
    pub start: Time,
    pub end: Time,
}

/// Chord symbol label: a root and an optional normalized quality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChordLabel {
    pub root: PitchClass,
    pub quality: Option<String>,
}

impl ChordLabel {
    pub fn new(root: PitchClass, quality: Option<&str>) -> Self {
        ChordLabel { root, quality: quality.and_then(normalize_quality) }
    }

    /// Root-only labels match any label with the same root.
    pub fn matches(&self, other: &ChordLabel) -> bool {
        if self.root != other.root {
            return false;
        }
        match (&self.quality, &other.quality) {
            (Some(a), Some(b)) => a == b,
            _ => true,
        }
    }
}

const ROOT_NAMES: [&str; 12] = ["C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"];

fn normalize_quality(raw: &str) -> Option<String> {
    let raw = raw.trim();
    let normalized = match raw {
        "" => return None,
        "maj" | "M" | "major" | "Maj" => "maj",
        "min" | "m" | "minor" | "-" | "Min" => "min",
        "7" | "dom7" | "dominant" => "7",
        "maj7" | "M7" | "major-seventh" => "maj7",
        "min7" | "m7" | "-7" | "minor-seventh" => "min7",
        "dim" | "o" | "diminished" => "dim",
        "dim7" | "o7" | "diminished-seventh" => "dim7",
        "hdim7" | "m7b5" | "half-diminished" => "hdim7",
        "aug" | "+" | "augmented" => "aug",
        "sus4" | "suspended-fourth" => "sus4",
        "sus2" | "suspended-second" => "sus2",
        other => other,
    };
    Some(normalized.to_string())
}

impl fmt::Display for ChordLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(ROOT_NAMES[self.root.value() as usize])?;
        if let Some(quality) = &self.quality {
            write!(f, ":{quality}")?;
        }
        Ok(())
    }
}

impl FromStr for ChordLabel {
    type Err = ScoreError;

    /// Accepts `D`, `Bb:min7`, `F#m`, `G7` and similar.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ScoreError::BadChordLabel(s.to_string());
        let mut chars = s.trim().chars().peekable();
        let base: i64 = match chars.next().map(|c| c.to_ascii_uppercase()) {
            Some('C') => 0,
            Some('D') => 2,
            Some('E') => 4,
            Some('F') => 5,
            Some('G') => 7,
            Some('A') => 9,
            Some('B') => 11,
            _ => return Err(bad()),
        };
        let mut alter = 0;
        while let Some(&c) = chars.peek() {
            match c {
                '#' => alter += 1,
                'b' => alter -= 1,
                _ => break,
            }
            chars.next();
        }
        let rest: String = chars.collect();
        let quality = rest.strip_prefix(':').unwrap_or(&rest);
        if quality.chars().any(char::is_whitespace) {
            return Err(bad());
        }
        Ok(ChordLabel::new(PitchClass::wrapping(base + alter), Some(quality)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChordSymbol {
    pub label: ChordLabel,
    pub start: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Span {
    pub first_onset: Time,
    pub last_offset: Time,
}

impl Span {
    pub fn length(&self) -> Time {
        &self.last_offset - &self.first_onset
    }
}

/// Unvalidated score contents, used to build a [`Score`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScoreParts {
    pub notes: Vec<Note>,
    /// Number of voices; `None` infers it from the notes.
    pub voice_count: Option<u32>,
    pub keys: Vec<KeySignature>,
    pub meters: Vec<TimeSignature>,
    pub chord_symbols: Vec<ChordSymbol>,
    /// Explicit bar start times (e.g. MusicXML measures). Empty means bars
    /// are laid out from each time signature, starting on a downbeat.
    pub bars: Vec<Time>,
    /// Materialized metrical groupings. Set by time remapping, where the
    /// groupings no longer follow from the time signatures.
    pub groupings: Option<Vec<Grouping>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Score {
    notes: Vec<Note>,
    voice_count: u32,
    keys: Vec<KeySignature>,
    meters: Vec<TimeSignature>,
    chord_symbols: Vec<ChordSymbol>,
    bars: Vec<Time>,
    groupings: Option<Vec<Grouping>>,
    span: Option<Span>,
}

fn check_ascending<'a>(what: &'static str, times: impl Iterator<Item = &'a Time>) -> Result<(), ScoreError> {
    let mut prev: Option<&Time> = None;
    for t in times {
        if let Some(p) = prev {
            if t <= p {
                return Err(ScoreError::Unordered { what, at: t.clone() });
            }
        }
        prev = Some(t);
    }
    Ok(())
}

impl Score {
    pub fn new(parts: ScoreParts) -> Result<Score, ScoreError> {
        let ScoreParts { notes, voice_count, keys, meters, chord_symbols, bars, groupings } = parts;

        let inferred = notes.iter().map(|n| n.voice + 1).max().unwrap_or(0);
        let voice_count = voice_count.unwrap_or(inferred);
        for (index, note) in notes.iter().enumerate() {
            if note.offset <= note.onset {
                return Err(ScoreError::EmptyNote { index, onset: note.onset.clone(), offset: note.offset.clone() });
            }
            if note.voice >= voice_count {
                return Err(ScoreError::UnknownVoice { index, voice: note.voice, voice_count });
            }
        }
        for meter in &meters {
            TimeSignature::new(meter.numerator, meter.denominator, Time::zero())?;
        }
        check_ascending("key signatures", keys.iter().map(|k| &k.start))?;
        check_ascending("time signatures", meters.iter().map(|m| &m.start))?;
        check_ascending("chord symbols", chord_symbols.iter().map(|c| &c.start))?;
        check_ascending("bar lines", bars.iter())?;
        if let Some(groupings) = &groupings {
            for g in groupings {
                if g.end <= g.start {
                    return Err(ScoreError::EmptyGrouping { start: g.start.clone(), end: g.end.clone() });
                }
            }
        }

        let span = notes.iter().map(|n| &n.onset).min().map(|first| Span {
            first_onset: first.clone(),
            last_offset: notes.iter().map(|n| &n.offset).max().cloned().unwrap_or_default(),
        });
        if let Some(span) = &span {
            let firsts = [
                ("key signature", keys.first().map(|k| &k.start)),
                ("time signature", meters.first().map(|m| &m.start)),
            ];
            for (what, start) in firsts {
                if let Some(start) = start {
                    if *start > span.first_onset {
                        return Err(ScoreError::LateStart {
                            what,
                            start: start.clone(),
                            first_onset: span.first_onset.clone(),
                        });
                    }
                }
            }
        }

        Ok(Score { notes, voice_count, keys, meters, chord_symbols, bars, groupings, span })
    }

    pub fn notes(&self) -> &[Note] {
        &self.notes
    }

    pub fn voice_count(&self) -> u32 {
        self.voice_count
    }

    pub fn keys(&self) -> &[KeySignature] {
        &self.keys
    }

    pub fn meters(&self) -> &[TimeSignature] {
        &self.meters
    }

    pub fn chord_symbols(&self) -> &[ChordSymbol] {
        &self.chord_symbols
    }

    pub fn bars(&self) -> &[Time] {
        &self.bars
    }

    pub fn explicit_groupings(&self) -> Option<&[Grouping]> {
        self.groupings.as_deref()
    }

    /// First onset to last offset; `None` for a score without notes.
    pub fn span(&self) -> Option<&Span> {
        self.span.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }

    pub fn to_parts(&self) -> ScoreParts {
        ScoreParts {
            notes: self.notes.clone(),
            voice_count: Some(self.voice_count),
            keys: self.keys.clone(),
            meters: self.meters.clone(),
            chord_symbols: self.chord_symbols.clone(),
            bars: self.bars.clone(),
            groupings: self.groupings.clone(),
        }
    }

    /// Groups notes by onset, across voices, in ascending onset order.
    pub fn build_chord_sequence(&self) -> Vec<Chord> {
        let mut order: Vec<&Note> = self.notes.iter().collect();
        // stable: notes inside a chord keep score order
        order.sort_by(|a, b| a.onset.cmp(&b.onset));
        let mut chords: Vec<Chord> = Vec::new();
        for note in order {
            match chords.last_mut() {
                Some(chord) if chord.onset == note.onset => chord.notes.push(note.clone()),
                _ => chords.push(Chord { onset: note.onset.clone(), notes: vec![note.clone()] }),
            }
        }
        chords
    }

    /// Bar, beat and sub-beat groupings covering the score.
    ///
    /// Each time signature starts a new bar. Within a region bars come from
    /// the explicit bar lines when present, else they are laid out at the
    /// nominal bar length. A short first bar (pickup) is subdivided from its
    /// end so that its beats line up with the following downbeat.
    pub fn generate_groupings(&self) -> Result<Vec<Grouping>, ScoreError> {
        if let Some(groupings) = &self.groupings {
            return Ok(groupings.clone());
        }
        if self.meters.is_empty() {
            return Err(ScoreError::MissingMeter);
        }
        let piece_end = self.span.as_ref().map(|s| s.last_offset.clone());
        let mut out = Vec::new();
        let mut first_bar = true;
        for (i, meter) in self.meters.iter().enumerate() {
            let region_end = self.meters.get(i + 1).map(|m| m.start.clone());
            let bars = self.region_bars(meter, region_end.as_ref(), piece_end.as_ref());
            for (start, end) in bars {
                let pickup = first_bar && &end - &start < meter.bar_length();
                first_bar = false;
                push_bar(&mut out, meter, start, end, pickup);
            }
        }
        Ok(out)
    }

    fn region_bars(
        &self,
        meter: &TimeSignature,
        region_end: Option<&Time>,
        piece_end: Option<&Time>,
    ) -> Vec<(Time, Time)> {
        let bar_len = meter.bar_length();
        let mut starts = vec![meter.start.clone()];
        starts.extend(self.bars.iter().filter(|b| **b > meter.start && region_end.is_none_or(|end| *b < end)).cloned());
        let mut bars = Vec::new();
        for pair in starts.windows(2) {
            bars.push((pair[0].clone(), pair[1].clone()));
        }
        let mut cursor = starts.pop().expect("region has a start");
        match region_end {
            Some(end) if !self.bars.is_empty() => bars.push((cursor, end.clone())),
            Some(end) => {
                while cursor < *end {
                    let next = std::cmp::min(&cursor + &bar_len, end.clone());
                    bars.push((cursor, next.clone()));
                    cursor = next;
                }
            }
            None => {
                // last region: whole bars until the music ends
                let last_bar_line = self.bars.last().is_some_and(|b| *b >= cursor);
                let mut emitted = false;
                while piece_end.is_some_and(|end| cursor < *end) || (last_bar_line && !emitted) {
                    let next = &cursor + &bar_len;
                    bars.push((cursor, next.clone()));
                    cursor = next;
                    emitted = true;
                }
            }
        }
        bars
    }

    /// Sections of the ground truth's span in which neither score changes key.
    ///
    /// `self` is the transcription. Returns no sections when either score
    /// lacks key signatures or the ground truth's span is empty.
    pub fn continuous_key_sections(&self, ground_truth: &Score) -> Vec<KeySection> {
        let Some(span) = ground_truth.span() else {
            return Vec::new();
        };
        if self.keys.is_empty() || ground_truth.keys.is_empty() || span.length() <= Time::zero() {
            return Vec::new();
        }
        let mut bounds: BTreeSet<Time> = BTreeSet::new();
        bounds.insert(span.first_onset.clone());
        bounds.insert(span.last_offset.clone());
        for key in self.keys.iter().chain(ground_truth.keys.iter()) {
            if key.start > span.first_onset && key.start < span.last_offset {
                bounds.insert(key.start.clone());
            }
        }
        let bounds: Vec<Time> = bounds.into_iter().collect();
        bounds
            .windows(2)
            .map(|w| KeySection {
                start: w[0].clone(),
                end: w[1].clone(),
                transcription_key: active_key(&self.keys, &w[0]).clone(),
                ground_truth_key: active_key(&ground_truth.keys, &w[0]).clone(),
            })
            .collect()
    }
}

/// Key in force at `t`; the first key also covers anything before it.
pub(crate) fn active_key<'a>(keys: &'a [KeySignature], t: &Time) -> &'a KeySignature {
    let idx = keys.partition_point(|k| k.start <= *t);
    &keys[idx.saturating_sub(1)]
}

fn push_bar(out: &mut Vec<Grouping>, meter: &TimeSignature, start: Time, end: Time, pickup: bool) {
    let beats = tile(&start, &end, &meter.beat_length(), pickup);
    out.push(Grouping { level: GroupingLevel::Bar, start, end });
    for (i, (beat_start, beat_end)) in beats.into_iter().enumerate() {
        // only the leading beat of a pickup can be short at its front
        let from_end = pickup && i == 0;
        for (s, e) in tile(&beat_start, &beat_end, &meter.sub_beat_length(), from_end) {
            out.push(Grouping { level: GroupingLevel::SubBeat, start: s, end: e });
        }
        out.push(Grouping { level: GroupingLevel::Beat, start: beat_start, end: beat_end });
    }
}

/// Cuts `[start, end)` into pieces of `unit`, truncating the last piece, or
/// the first one when `from_end` is set.
fn tile(start: &Time, end: &Time, unit: &Time, from_end: bool) -> Vec<(Time, Time)> {
    let mut out = Vec::new();
    if from_end {
        let mut cursor = end.clone();
        while cursor > *start {
            let prev = std::cmp::max(&cursor - unit, start.clone());
            out.push((prev.clone(), cursor));
            cursor = prev;
        }
        out.reverse();
    } else {
        let mut cursor = start.clone();
        while cursor < *end {
            let next = std::cmp::min(&cursor + unit, end.clone());
            out.push((cursor, next.clone()));
            cursor = next;
        }
    }
    out
}

/// A stretch of the evaluation span with one key in each score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySection {
    pub start: Time,
    pub end: Time,
    pub transcription_key: KeySignature,
    pub ground_truth_key: KeySignature,
}

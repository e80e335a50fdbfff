//! Line-based interchange format.
//!
//! One whitespace-separated record per line:
//!
//! ```text
//! Voice <count>
//! Meter <time> <numerator> <denominator>
//! Key <time> <tonic 0-11> <Maj|Min>
//! Chord <time> <label>
//! Bar <time>
//! Group <bar|beat|sub_beat> <start> <end>
//! Note <pitch> <onset> <onset> <offset> <voice>
//! ```
//!
//! Times are integers (nominal milliseconds) or exact rationals written
//! `p/q`. The second `Note` onset is reserved for ornament-adjusted onsets and
//! is read but not used. Blank lines and lines starting with `#` are skipped.

use std::fmt::Write as _;

use crate::ingest::{ParseDiagnostic, ParseError, Parsed};
use crate::score::{
    ChordLabel, ChordSymbol, Grouping, GroupingLevel, KeySignature, Mode, Note, Pitch, PitchClass, Score, ScoreParts,
    TimeSignature,
};
use crate::time::Time;

struct Line<'a> {
    number: usize,
    fields: Vec<&'a str>,
}

impl Line<'_> {
    fn position(&self) -> String {
        format!("line {}", self.number)
    }

    fn fail(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.position(), message)
    }

    fn expect_len(&self, n: usize, usage: &str) -> Result<(), ParseError> {
        if self.fields.len() == n {
            Ok(())
        } else {
            Err(self.fail(format!("expected `{usage}`, found {} fields", self.fields.len())))
        }
    }

    fn time(&self, i: usize) -> Result<Time, ParseError> {
        let raw = self.fields[i];
        let t: Time = raw.parse().map_err(|_| self.fail(format!("invalid time `{raw}`")))?;
        if t.is_negative() {
            return Err(self.fail(format!("negative time `{raw}`")));
        }
        Ok(t)
    }

    fn int(&self, i: usize) -> Result<i64, ParseError> {
        let raw = self.fields[i];
        raw.parse().map_err(|_| self.fail(format!("invalid integer `{raw}`")))
    }

    fn count(&self, i: usize) -> Result<u32, ParseError> {
        let raw = self.fields[i];
        raw.parse().map_err(|_| self.fail(format!("invalid count `{raw}`")))
    }
}

pub fn parse_interchange_text(text: &str) -> Result<Parsed, ParseError> {
    let mut parts = ScoreParts::default();
    let mut groupings: Vec<Grouping> = Vec::new();
    let mut warnings = Vec::new();

    let attach = |mut e: ParseError, warnings: &Vec<ParseDiagnostic>| {
        e.warnings = warnings.clone();
        e
    };

    for (idx, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let line = Line { number: idx + 1, fields: trimmed.split_whitespace().collect() };
        let result: Result<(), ParseError> = (|| {
            match line.fields[0] {
                "Note" => {
                    line.expect_len(6, "Note <pitch> <onset> <onset> <offset> <voice>")?;
                    let pitch = Pitch::new(line.int(1)?).map_err(|e| line.fail(e.to_string()))?;
                    let onset = line.time(2)?;
                    line.time(3)?;
                    let offset = line.time(4)?;
                    let voice = line.count(5)?;
                    if offset <= onset {
                        return Err(line.fail("note offset must be after its onset"));
                    }
                    parts.notes.push(Note::new(pitch, onset, offset, voice));
                }
                "Key" => {
                    line.expect_len(4, "Key <time> <tonic> <Maj|Min>")?;
                    let start = line.time(1)?;
                    let tonic = PitchClass::new(line.int(2)?).map_err(|e| line.fail(e.to_string()))?;
                    let mode = match line.fields[3] {
                        "Maj" => Mode::Major,
                        "Min" => Mode::Minor,
                        other => return Err(line.fail(format!("mode must be Maj or Min, found `{other}`"))),
                    };
                    parts.keys.push(KeySignature::new(tonic, mode, start));
                }
                "Meter" => {
                    line.expect_len(4, "Meter <time> <numerator> <denominator>")?;
                    let start = line.time(1)?;
                    let meter = TimeSignature::new(line.count(2)?, line.count(3)?, start)
                        .map_err(|e| line.fail(e.to_string()))?;
                    parts.meters.push(meter);
                }
                "Chord" => {
                    line.expect_len(3, "Chord <time> <label>")?;
                    let start = line.time(1)?;
                    let label: ChordLabel =
                        line.fields[2].parse().map_err(|e: crate::score::ScoreError| line.fail(e.to_string()))?;
                    parts.chord_symbols.push(ChordSymbol { label, start });
                }
                "Voice" => {
                    line.expect_len(2, "Voice <count>")?;
                    parts.voice_count = Some(line.count(1)?);
                }
                "Bar" => {
                    line.expect_len(2, "Bar <time>")?;
                    parts.bars.push(line.time(1)?);
                }
                "Group" => {
                    line.expect_len(4, "Group <level> <start> <end>")?;
                    let level = GroupingLevel::from_name(line.fields[1])
                        .ok_or_else(|| line.fail(format!("unknown grouping level `{}`", line.fields[1])))?;
                    let (start, end) = (line.time(2)?, line.time(3)?);
                    if end <= start {
                        return Err(line.fail("grouping end must be after its start"));
                    }
                    groupings.push(Grouping { level, start, end });
                }
                other => {
                    warnings.push(ParseDiagnostic::warning(
                        line.position(),
                        format!("unknown record type `{other}`, line skipped"),
                    ));
                }
            }
            Ok(())
        })();
        result.map_err(|e| attach(e, &warnings))?;
    }

    if parts.notes.is_empty() {
        return Err(attach(ParseError::new("file", "empty score: no Note records"), &warnings));
    }
    parts.keys.sort_by(|a, b| a.start.cmp(&b.start));
    parts.meters.sort_by(|a, b| a.start.cmp(&b.start));
    parts.chord_symbols.sort_by(|a, b| a.start.cmp(&b.start));
    parts.bars.sort();
    if !groupings.is_empty() {
        parts.groupings = Some(groupings);
    }
    let score = Score::new(parts).map_err(|e| attach(ParseError::new("score", e.to_string()), &warnings))?;
    Ok((score, warnings))
}

/// Serialize a score so that [`parse_interchange_text`] rebuilds it exactly.
pub fn write_interchange_text(score: &Score) -> String {
    let mut out = String::new();
    writeln!(out, "Voice {}", score.voice_count()).unwrap();
    for m in score.meters() {
        writeln!(out, "Meter {} {} {}", m.start, m.numerator, m.denominator).unwrap();
    }
    for k in score.keys() {
        writeln!(out, "Key {} {} {}", k.start, k.tonic.value(), k.mode).unwrap();
    }
    for c in score.chord_symbols() {
        writeln!(out, "Chord {} {}", c.start, c.label).unwrap();
    }
    for b in score.bars() {
        writeln!(out, "Bar {b}").unwrap();
    }
    for g in score.explicit_groupings().unwrap_or_default() {
        writeln!(out, "Group {} {} {}", g.level.name(), g.start, g.end).unwrap();
    }
    for n in score.notes() {
        writeln!(out, "Note {} {} {} {} {}", n.pitch.midi(), n.onset, n.onset, n.offset, n.voice).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Severity;

    #[test]
    fn single_note_record() {
        let (score, warnings) = parse_interchange_text("Note 60 0 0 1000 0\n").unwrap();
        assert!(warnings.is_empty());
        assert_eq!(score.notes().len(), 1);
        let n = &score.notes()[0];
        assert_eq!(n.pitch.midi(), 60);
        assert_eq!(n.onset, Time::from_millis(0));
        assert_eq!(n.offset, Time::from_millis(1000));
        assert_eq!(n.voice, 0);
        assert_eq!(score.voice_count(), 1);
    }

    #[test]
    fn key_record() {
        let (score, _) = parse_interchange_text("Key 0 2 Maj\nNote 62 0 0 500 0\n").unwrap();
        let key = &score.keys()[0];
        assert_eq!(key.tonic.value(), 2);
        assert_eq!(key.mode, Mode::Major);
        assert_eq!(key.start, Time::zero());
    }

    #[test]
    fn meters_only_is_empty_score() {
        let err = parse_interchange_text("Meter 0 4 4\nMeter 4000 3 4\n").unwrap_err();
        assert!(err.error.message.contains("empty score"));
        assert_eq!(err.error.severity, Severity::Error);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_interchange_text("Note 60 0 0 1000 0\n\nNote 61 x 0 1000 0\n").unwrap_err();
        assert_eq!(err.error.location.position, "line 3");
        let err = parse_interchange_text("Key 0 2 Dorian\nNote 60 0 0 1 0\n").unwrap_err();
        assert_eq!(err.error.location.position, "line 1");
        let err = parse_interchange_text("Note 60 0 0 1000\n").unwrap_err();
        assert!(err.error.message.contains("expected"));
    }

    #[test]
    fn unknown_record_warns() {
        let (score, warnings) = parse_interchange_text("Tempo 0 120\nNote 60 0 0 1000 0\n").unwrap();
        assert_eq!(score.notes().len(), 1);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].severity, Severity::Warning);
        assert_eq!(warnings[0].location.position, "line 1");
    }

    #[test]
    fn explicit_voice_count_and_rationals() {
        let text = "Voice 3\nMeter 0 4 4\nChord 0 D:min\nNote 60 0 0 1000/3 1\n";
        let (score, _) = parse_interchange_text(text).unwrap();
        assert_eq!(score.voice_count(), 3);
        assert_eq!(score.notes()[0].offset, Time::from_ratio(1000, 3));
        assert_eq!(score.chord_symbols()[0].label.to_string(), "D:min");
        let again = parse_interchange_text(&write_interchange_text(&score)).unwrap().0;
        assert_eq!(again, score);
    }

    #[test]
    fn voice_count_too_small_is_rejected() {
        let err = parse_interchange_text("Voice 1\nNote 60 0 0 10 1\n").unwrap_err();
        assert_eq!(err.error.location.position, "score");
    }
}

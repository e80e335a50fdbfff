//! Partwise MusicXML reader.
//!
//! Positions are tracked in the part's `<divisions>` and converted so that a
//! quarter note lasts 1000 time units. Tied notes are merged into one note;
//! grace notes, cue notes and unpitched notes are dropped with a warning.
//! Repeats and jumps are read as written (not expanded).

use std::collections::{BTreeMap, HashMap};

use roxmltree::{Document, Node};

use crate::ingest::{ParseDiagnostic, ParseError, Parsed};
use crate::score::{
    ChordLabel, ChordSymbol, KeySignature, Mode, Note, Pitch, PitchClass, Score, ScoreParts, TimeSignature, QUARTER,
};
use crate::time::{ratio, Time};

/// Voice identity before renumbering: part index, then the `<voice>` text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct VoiceKey {
    part: usize,
    number: i64,
    label: String,
}

struct RawNote {
    pitch: Pitch,
    onset: Time,
    offset: Time,
    voice: VoiceKey,
}

struct Reader {
    notes: Vec<RawNote>,
    keys: BTreeMap<Time, KeySignature>,
    meters: BTreeMap<Time, TimeSignature>,
    chords: BTreeMap<Time, ChordSymbol>,
    bars: Vec<Time>,
    warnings: Vec<ParseDiagnostic>,
    warned_once: Vec<&'static str>,
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| c.has_tag_name(name))
}

fn child_text<'a>(node: Node<'a, '_>, name: &str) -> Option<&'a str> {
    child(node, name).and_then(|c| c.text()).map(str::trim)
}

struct Ctx<'p> {
    part_id: &'p str,
    measure: &'p str,
}

impl Ctx<'_> {
    fn at(&self, what: &str) -> String {
        format!("part[{}]/measure[{}]/{what}", self.part_id, self.measure)
    }
}

impl Reader {
    fn warn_once(&mut self, tag: &'static str, position: String, message: &str) {
        if !self.warned_once.contains(&tag) {
            self.warned_once.push(tag);
            self.warnings.push(ParseDiagnostic::warning(position, message));
        }
    }

    fn read_part(&mut self, part_index: usize, part: Node) -> Result<(), ParseError> {
        let part_id = part.attribute("id").unwrap_or("?").to_string();
        let mut divisions: i64 = 1;
        let mut measure_start: i64 = 0;
        // tick positions are rebased whenever divisions change
        let mut time_base = Time::zero();
        let mut open_ties: HashMap<(VoiceKey, u8), usize> = HashMap::new();

        for measure in part.children().filter(|n| n.has_tag_name("measure")) {
            let number = measure.attribute("number").unwrap_or("?").to_string();
            let ctx = Ctx { part_id: &part_id, measure: &number };
            let mut cursor: i64 = measure_start;
            let mut furthest: i64 = measure_start;
            let mut last_onset: i64 = measure_start;
            let to_time = |ticks: i64, base: &Time, divisions: i64| {
                base + &Time::from_rational(ratio(ticks * QUARTER, divisions))
            };

            if part_index == 0 {
                self.bars.push(to_time(measure_start, &time_base, divisions));
            }

            for el in measure.children().filter(Node::is_element) {
                match el.tag_name().name() {
                    "attributes" => {
                        if let Some(d) = child_text(el, "divisions") {
                            let d: i64 = d.parse().ok().filter(|d| *d > 0).ok_or_else(|| {
                                ParseError::new(ctx.at("attributes/divisions"), "divisions must be a positive integer")
                            })?;
                            if d != divisions {
                                if cursor != measure_start || furthest != measure_start {
                                    return Err(ParseError::new(
                                        ctx.at("attributes/divisions"),
                                        "divisions may only change at the start of a measure",
                                    ));
                                }
                                time_base = to_time(measure_start, &time_base, divisions);
                                measure_start = 0;
                                cursor = 0;
                                furthest = 0;
                                last_onset = 0;
                                divisions = d;
                            }
                        }
                        let now = to_time(cursor, &time_base, divisions);
                        for key in el.children().filter(|c| c.has_tag_name("key")) {
                            let Some(fifths) = child_text(key, "fifths") else {
                                self.warn_once(
                                    "key",
                                    ctx.at("attributes/key"),
                                    "non-traditional key signature skipped",
                                );
                                continue;
                            };
                            let fifths: i64 = fifths.parse().map_err(|_| {
                                ParseError::new(ctx.at("attributes/key/fifths"), "fifths must be an integer")
                            })?;
                            let mode = match child_text(key, "mode") {
                                Some("minor") => Mode::Minor,
                                _ => Mode::Major,
                            };
                            self.keys
                                .entry(now.clone())
                                .or_insert_with(|| KeySignature::from_fifths(fifths, mode, now.clone()));
                        }
                        for time in el.children().filter(|c| c.has_tag_name("time")) {
                            let beats = child_text(time, "beats").and_then(|b| b.parse::<u32>().ok());
                            let beat_type = child_text(time, "beat-type").and_then(|b| b.parse::<u32>().ok());
                            match (beats, beat_type) {
                                (Some(n), Some(d)) => {
                                    let meter = TimeSignature::new(n, d, now.clone())
                                        .map_err(|e| ParseError::new(ctx.at("attributes/time"), e.to_string()))?;
                                    self.meters.entry(now.clone()).or_insert(meter);
                                }
                                _ => self.warn_once(
                                    "time",
                                    ctx.at("attributes/time"),
                                    "unsupported time signature (composite or senza-misura) skipped",
                                ),
                            }
                        }
                    }
                    "backup" => {
                        cursor -= duration_of(el, &ctx)?;
                        if cursor < measure_start {
                            return Err(ParseError::new(
                                ctx.at("backup"),
                                "backup moves before the start of the measure",
                            ));
                        }
                    }
                    "forward" => {
                        cursor += duration_of(el, &ctx)?;
                        furthest = furthest.max(cursor);
                    }
                    "harmony" => {
                        let now = to_time(cursor, &time_base, divisions);
                        if let Some(symbol) = read_harmony(el, now.clone()) {
                            self.chords.entry(now).or_insert(symbol);
                        }
                    }
                    "barline" => {
                        if child(el, "repeat").is_some() || child(el, "ending").is_some() {
                            self.warn_once("repeat", ctx.at("barline"), "repeats and endings are not expanded");
                        }
                    }
                    "direction" | "sound" => {
                        let sound = if el.has_tag_name("sound") { Some(el) } else { child(el, "sound") };
                        if let Some(sound) = sound {
                            if ["dacapo", "dalsegno", "tocoda"].iter().any(|a| sound.attribute(*a).is_some()) {
                                self.warn_once("jump", ctx.at("sound"), "D.C./D.S. jumps are not expanded");
                            }
                        }
                    }
                    "note" => {
                        if child(el, "grace").is_some() {
                            self.warn_once("grace", ctx.at("note"), "grace notes are dropped");
                            continue;
                        }
                        if child(el, "cue").is_some() {
                            self.warn_once("cue", ctx.at("note"), "cue notes are dropped");
                            continue;
                        }
                        let duration = duration_of(el, &ctx)?;
                        let is_chord = child(el, "chord").is_some();
                        let onset_ticks = if is_chord { last_onset } else { cursor };
                        if !is_chord {
                            last_onset = cursor;
                            cursor += duration;
                            furthest = furthest.max(cursor);
                        }
                        if child(el, "rest").is_some() {
                            continue;
                        }
                        if child(el, "unpitched").is_some() {
                            self.warn_once("unpitched", ctx.at("note"), "unpitched notes are skipped");
                            continue;
                        }
                        let Some(pitch_el) = child(el, "pitch") else {
                            self.warn_once("nopitch", ctx.at("note"), "note without pitch skipped");
                            continue;
                        };
                        if duration == 0 {
                            self.warn_once("zero", ctx.at("note"), "zero-duration notes are dropped");
                            continue;
                        }
                        let pitch = read_pitch(pitch_el, &ctx)?;
                        let voice_label = child_text(el, "voice").unwrap_or("1").to_string();
                        let voice = VoiceKey {
                            part: part_index,
                            number: voice_label.parse().unwrap_or(i64::MAX),
                            label: voice_label,
                        };
                        let onset = to_time(onset_ticks, &time_base, divisions);
                        let offset = to_time(onset_ticks + duration, &time_base, divisions);
                        let tie_types: Vec<&str> = el
                            .children()
                            .filter(|c| c.has_tag_name("tie"))
                            .filter_map(|c| c.attribute("type"))
                            .collect();
                        let tie_key = (voice.clone(), pitch.midi());
                        let continues = tie_types.contains(&"stop")
                            && open_ties.get(&tie_key).is_some_and(|&i| self.notes[i].offset == onset);
                        let index = if continues {
                            let i = open_ties[&tie_key];
                            self.notes[i].offset = offset;
                            i
                        } else {
                            self.notes.push(RawNote { pitch, onset, offset, voice });
                            self.notes.len() - 1
                        };
                        if tie_types.contains(&"start") {
                            open_ties.insert(tie_key, index);
                        } else {
                            open_ties.remove(&tie_key);
                        }
                    }
                    _ => {}
                }
            }
            measure_start = furthest.max(cursor);
        }
        Ok(())
    }
}

fn duration_of(el: Node, ctx: &Ctx) -> Result<i64, ParseError> {
    let raw =
        child_text(el, "duration").ok_or_else(|| ParseError::new(ctx.at(el.tag_name().name()), "missing duration"))?;
    raw.parse::<i64>()
        .ok()
        .filter(|d| *d >= 0)
        .ok_or_else(|| ParseError::new(ctx.at(el.tag_name().name()), format!("invalid duration `{raw}`")))
}

fn step_semitone(step: &str) -> Option<i64> {
    Some(match step {
        "C" => 0,
        "D" => 2,
        "E" => 4,
        "F" => 5,
        "G" => 7,
        "A" => 9,
        "B" => 11,
        _ => return None,
    })
}

fn read_pitch(el: Node, ctx: &Ctx) -> Result<Pitch, ParseError> {
    let bad = |m: &str| ParseError::new(ctx.at("note/pitch"), m.to_string());
    let step = child_text(el, "step").and_then(step_semitone).ok_or_else(|| bad("invalid step"))?;
    let octave: i64 = child_text(el, "octave").and_then(|o| o.parse().ok()).ok_or_else(|| bad("invalid octave"))?;
    // microtonal alters round to the nearest semitone
    let alter = match child_text(el, "alter") {
        Some(a) => a.parse::<f64>().map_err(|_| bad("invalid alter"))?.round() as i64,
        None => 0,
    };
    Pitch::new((octave + 1) * 12 + step + alter).map_err(|e| bad(&e.to_string()))
}

fn read_harmony(el: Node, start: Time) -> Option<ChordSymbol> {
    let root = child(el, "root")?;
    let step = step_semitone(child_text(root, "root-step")?)?;
    let alter = child_text(root, "root-alter").and_then(|a| a.parse::<f64>().ok()).unwrap_or(0.0).round() as i64;
    let kind = child_text(el, "kind").unwrap_or("");
    if kind == "none" {
        return None;
    }
    let quality = match kind {
        "major" => "maj",
        "minor" => "min",
        "dominant" => "7",
        "major-seventh" => "maj7",
        "minor-seventh" => "min7",
        "diminished" => "dim",
        "diminished-seventh" => "dim7",
        "half-diminished" => "hdim7",
        "augmented" => "aug",
        "suspended-fourth" => "sus4",
        "suspended-second" => "sus2",
        other => other,
    };
    Some(ChordSymbol { label: ChordLabel::new(PitchClass::wrapping(step + alter), Some(quality)), start })
}

/// Parse an uncompressed partwise MusicXML document.
pub fn parse_musicxml(document: &[u8]) -> Result<Parsed, ParseError> {
    let text =
        std::str::from_utf8(document).map_err(|e| ParseError::new("document", format!("not valid UTF-8: {e}")))?;
    let doc = Document::parse(text).map_err(|e| ParseError::new("document", format!("malformed XML: {e}")))?;
    let root = doc.root_element();
    match root.tag_name().name() {
        "score-partwise" => {}
        "score-timewise" => return Err(ParseError::new("score-timewise", "timewise MusicXML is not supported")),
        other => return Err(ParseError::new(other, "not a MusicXML score")),
    }

    let mut reader = Reader {
        notes: Vec::new(),
        keys: BTreeMap::new(),
        meters: BTreeMap::new(),
        chords: BTreeMap::new(),
        bars: Vec::new(),
        warnings: Vec::new(),
        warned_once: Vec::new(),
    };
    for (index, part) in root.children().filter(|n| n.has_tag_name("part")).enumerate() {
        reader.read_part(index, part).map_err(|mut e| {
            e.warnings = reader.warnings.clone();
            e
        })?;
    }
    let fail = |message: String, warnings: &[ParseDiagnostic]| ParseError {
        error: ParseDiagnostic::error("score-partwise", message),
        warnings: warnings.to_vec(),
    };
    if reader.notes.is_empty() {
        return Err(fail("no pitched notes found".into(), &reader.warnings));
    }

    let mut voice_ids: BTreeMap<VoiceKey, u32> = reader.notes.iter().map(|n| (n.voice.clone(), 0)).collect();
    for (i, id) in voice_ids.values_mut().enumerate() {
        *id = i as u32;
    }
    let notes = reader
        .notes
        .iter()
        .map(|n| Note::new(n.pitch, n.onset.clone(), n.offset.clone(), voice_ids[&n.voice]))
        .collect();

    // a repeated identical signature is not a change
    let mut keys: Vec<KeySignature> = Vec::new();
    for key in reader.keys.into_values() {
        if keys.last().is_none_or(|k| (k.tonic, k.mode) != (key.tonic, key.mode)) {
            keys.push(key);
        }
    }
    let mut meters: Vec<TimeSignature> = Vec::new();
    for meter in reader.meters.into_values() {
        if meters.last().is_none_or(|m| (m.numerator, m.denominator) != (meter.numerator, meter.denominator)) {
            meters.push(meter);
        }
    }
    let mut bars = reader.bars;
    bars.dedup();

    let parts = ScoreParts {
        notes,
        voice_count: Some(voice_ids.len() as u32),
        keys,
        meters,
        chord_symbols: reader.chords.into_values().collect(),
        bars,
        groupings: None,
    };
    let score = Score::new(parts).map_err(|e| fail(e.to_string(), &reader.warnings))?;
    Ok((score, reader.warnings))
}

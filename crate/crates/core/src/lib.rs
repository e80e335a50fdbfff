//! Evaluation of symbolic music transcriptions with the MV2H metric.
//!
//! A transcription and a ground truth are read into [`Score`]s, optionally
//! aligned onto a shared timeline with chord-level DTW ([`align`]), and
//! scored on five components: multi-pitch, voice, meter, note value and
//! harmony ([`metrics`]). All times and scores are exact rationals.

#![allow(clippy::result_large_err)]

pub mod align;
pub mod cli;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod score;
pub mod time;

pub use align::{
    align, chord_distance, dtw_align, extract_anchors, remap_times, Alignment, AlignmentPath, AnchorSet, Step, TimeMap,
};
pub use ingest::{parse_interchange_text, parse_musicxml, write_interchange_text, ParseDiagnostic, ParseError};
pub use metrics::{evaluate, evaluate_auto, Evaluation, EvaluationReport, MatchMode};
pub use score::{
    Chord, Grouping, GroupingLevel, KeySignature, Mode, Note, Pitch, PitchClass, Score, ScoreParts, TimeSignature,
};
pub use time::{Rational, Time};

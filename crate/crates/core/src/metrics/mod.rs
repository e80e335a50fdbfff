//! The five MV2H components and their mean.

use std::fmt;

use num_traits::Zero;

use crate::align::{align, AlignError, Alignment};
use crate::score::Score;
use crate::time::{int, ratio, Rational, Time};

pub mod harmony;
pub mod meter;
pub mod notes;

pub use harmony::{chord_progression_score, harmony_score, key_change_score, key_score_single, HarmonyError};
pub use meter::{match_groupings, meter_score};
pub use notes::{match_notes, multi_pitch_score, value_score, voice_score, NoteMatching};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentKind {
    /// Both scores already share a timeline; tolerances apply.
    PreAligned,
    /// The transcription was remapped onto the ground truth; matches must be exact.
    AutoAligned,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModeError {
    #[error("tolerances cannot be changed for auto-aligned evaluation")]
    AutoAlignedTolerance,
    #[error("tolerances must not be negative")]
    Negative,
}

/// Matching thresholds. Auto-aligned mode has every tolerance at zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchMode {
    kind: AlignmentKind,
    onset_tolerance: Time,
    grouping_tolerance: Time,
    duration_tolerance_ratio: Rational,
    duration_tolerance_floor: Time,
}

impl MatchMode {
    /// 50 ms onset and grouping tolerance; durations within half the
    /// ground-truth duration, and never less than 50 ms.
    pub fn pre_aligned() -> Self {
        MatchMode {
            kind: AlignmentKind::PreAligned,
            onset_tolerance: Time::from_millis(50),
            grouping_tolerance: Time::from_millis(50),
            duration_tolerance_ratio: ratio(1, 2),
            duration_tolerance_floor: Time::from_millis(50),
        }
    }

    pub fn auto_aligned() -> Self {
        MatchMode {
            kind: AlignmentKind::AutoAligned,
            onset_tolerance: Time::zero(),
            grouping_tolerance: Time::zero(),
            duration_tolerance_ratio: Rational::zero(),
            duration_tolerance_floor: Time::zero(),
        }
    }

    fn set(mut self, field: impl FnOnce(&mut Self) -> &mut Time, value: Time) -> Result<Self, ModeError> {
        if self.kind == AlignmentKind::AutoAligned {
            return Err(ModeError::AutoAlignedTolerance);
        }
        if value.is_negative() {
            return Err(ModeError::Negative);
        }
        *field(&mut self) = value;
        Ok(self)
    }

    pub fn with_onset_tolerance(self, tolerance: Time) -> Result<Self, ModeError> {
        self.set(|m| &mut m.onset_tolerance, tolerance)
    }

    pub fn with_grouping_tolerance(self, tolerance: Time) -> Result<Self, ModeError> {
        self.set(|m| &mut m.grouping_tolerance, tolerance)
    }

    pub fn with_duration_tolerance(self, ratio: Rational, floor: Time) -> Result<Self, ModeError> {
        if ratio < Rational::zero() {
            return Err(ModeError::Negative);
        }
        let mut mode = self.set(|m| &mut m.duration_tolerance_floor, floor)?;
        mode.duration_tolerance_ratio = ratio;
        Ok(mode)
    }

    pub fn kind(&self) -> AlignmentKind {
        self.kind
    }

    pub fn onset_tolerance(&self) -> &Time {
        &self.onset_tolerance
    }

    pub fn grouping_tolerance(&self) -> &Time {
        &self.grouping_tolerance
    }

    pub fn duration_tolerance_ratio(&self) -> &Rational {
        &self.duration_tolerance_ratio
    }

    /// Largest accepted duration error for a ground-truth note of this length.
    pub fn duration_tolerance(&self, ground_truth_duration: &Time) -> Time {
        std::cmp::max(ground_truth_duration * &self.duration_tolerance_ratio, self.duration_tolerance_floor.clone())
    }
}

/// Five component scores and their mean, all exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationReport {
    pub multi_pitch: Rational,
    pub voice: Rational,
    pub meter: Rational,
    pub value: Rational,
    pub harmony: Rational,
    pub mv2h: Rational,
}

impl EvaluationReport {
    pub fn from_components(
        multi_pitch: Rational,
        voice: Rational,
        meter: Rational,
        value: Rational,
        harmony: Rational,
    ) -> Self {
        let mv2h = (&multi_pitch + &voice + &meter + &value + &harmony) / int(5);
        EvaluationReport { multi_pitch, voice, meter, value, harmony, mv2h }
    }

    /// `(json key, display label, value)` in report order.
    pub fn fields(&self) -> [(&'static str, &'static str, &Rational); 6] {
        [
            ("multi_pitch", "Multi-pitch", &self.multi_pitch),
            ("voice", "Voice", &self.voice),
            ("meter", "Meter", &self.meter),
            ("value", "Value", &self.value),
            ("harmony", "Harmony", &self.harmony),
            ("mv2h", "MV2H", &self.mv2h),
        ]
    }

    /// Component-wise mean of several reports.
    pub fn mean<'a>(reports: impl IntoIterator<Item = &'a EvaluationReport>) -> Option<EvaluationReport> {
        let mut sums = [Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero(), Rational::zero()];
        let mut count = 0i64;
        for r in reports {
            for (sum, (_, _, v)) in sums.iter_mut().zip(r.fields()) {
                *sum += v;
            }
            count += 1;
        }
        if count == 0 {
            return None;
        }
        let [a, b, c, d, e] = sums.map(|s| s / int(count));
        Some(EvaluationReport::from_components(a, b, c, d, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub component: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.component, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub report: EvaluationReport,
    pub diagnostics: Vec<Diagnostic>,
}

/// Evaluate two scores that share a timeline.
///
/// Components that cannot be computed (missing time or key signatures)
/// score 0 and leave a diagnostic; a full report is always produced.
pub fn evaluate(transcription: &Score, ground_truth: &Score, mode: &MatchMode) -> Evaluation {
    let mut diagnostics = Vec::new();
    let matching = match_notes(transcription, ground_truth, mode);
    let multi_pitch = multi_pitch_score(&matching);
    let voice = voice_score(&matching, transcription, ground_truth);
    let value = value_score(&matching, transcription, ground_truth, mode);
    let meter = meter_score(transcription, ground_truth, mode).unwrap_or_else(|e| {
        diagnostics.push(Diagnostic { component: "meter", message: e.to_string() });
        Rational::zero()
    });
    let (harmony, error) = harmony_score(transcription, ground_truth);
    if let Some(e) = error {
        diagnostics.push(Diagnostic { component: "harmony", message: e.to_string() });
    }
    Evaluation { report: EvaluationReport::from_components(multi_pitch, voice, meter, value, harmony), diagnostics }
}

/// Align the transcription to the ground truth, then evaluate with exact
/// matching on the shared timeline.
pub fn evaluate_auto(
    transcription: &Score,
    ground_truth: &Score,
    gap_penalty: &Rational,
) -> Result<(Evaluation, Alignment), AlignError> {
    let alignment = align(transcription, ground_truth, gap_penalty)?;
    let evaluation = evaluate(&alignment.remapped, ground_truth, &MatchMode::auto_aligned());
    Ok((evaluation, alignment))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_mode_rejects_tolerances() {
        assert_eq!(
            MatchMode::auto_aligned().with_onset_tolerance(Time::from_millis(10)),
            Err(ModeError::AutoAlignedTolerance)
        );
        let pre = MatchMode::pre_aligned().with_grouping_tolerance(Time::from_millis(20)).unwrap();
        assert_eq!(pre.grouping_tolerance(), &Time::from_millis(20));
        assert_eq!(MatchMode::pre_aligned().with_onset_tolerance(Time::from_millis(-1)), Err(ModeError::Negative));
    }

    #[test]
    fn duration_tolerance_has_a_floor() {
        let pre = MatchMode::pre_aligned();
        assert_eq!(pre.duration_tolerance(&Time::from_millis(40)), Time::from_millis(50));
        assert_eq!(pre.duration_tolerance(&Time::from_millis(1000)), Time::from_millis(500));
        assert_eq!(MatchMode::auto_aligned().duration_tolerance(&Time::from_millis(1000)), Time::zero());
    }

    #[test]
    fn mean_is_exact() {
        let r = EvaluationReport::from_components(int(1), int(1), int(1), int(1), ratio(19, 40));
        assert_eq!(r.mv2h, ratio(179, 200));
        assert_eq!(&r.mv2h * int(5), int(4) + ratio(19, 40));
        let m =
            EvaluationReport::mean([&r, &EvaluationReport::from_components(int(0), int(0), int(0), int(0), int(0))])
                .unwrap();
        assert_eq!(m.harmony, ratio(19, 80));
        assert!(EvaluationReport::mean([]).is_none());
    }
}

mod common;

use common::{brute_force_max_matching, key, ms, note, random_score};
use mv2h::align::{chord_distance, default_gap_penalty, Anchor, AnchorSet, TimeMap};
use mv2h::metrics::{
    evaluate, evaluate_auto, key_change_score, match_groupings, match_notes, multi_pitch_score, MatchMode,
};
use mv2h::score::{Chord, Grouping, GroupingLevel, Mode, Note, Pitch, Score, ScoreParts, Span, TimeSignature};
use mv2h::time::{int, ratio, Rational, Time};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chord_strategy() -> impl Strategy<Value = Chord> {
    prop::collection::vec(60i64..66, 1..5)
        .prop_map(|pitches| Chord { onset: ms(0), notes: pitches.into_iter().map(|p| note(p, 0, 1, 0)).collect() })
}

fn notes_strategy(max: usize) -> impl Strategy<Value = Vec<Note>> {
    prop::collection::vec((60i64..63, 0i64..6, 1i64..4), 1..=max)
        .prop_map(|raw| raw.into_iter().map(|(p, on, d)| note(p, on * 40, on * 40 + d * 100, 0)).collect())
}

fn plain_score(notes: Vec<Note>) -> Score {
    Score::new(ScoreParts { notes, ..Default::default() }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chord_distance_is_symmetric_and_bounded(a in chord_strategy(), b in chord_strategy()) {
        let d = chord_distance(&a, &b);
        prop_assert_eq!(&d, &chord_distance(&b, &a));
        prop_assert!(d >= Rational::zero() && d <= int(1));
        prop_assert_eq!(chord_distance(&a, &a), Rational::zero());
    }

    #[test]
    fn remap_is_monotone(
        mut knots in prop::collection::btree_map(0i64..50, 0i64..50, 2..6),
        t1 in -20i64..80,
        t2 in -20i64..80,
    ) {
        // force strictly increasing targets
        let mut acc = 0;
        for v in knots.values_mut() {
            acc += *v + 1;
            *v = acc;
        }
        let anchors = AnchorSet::from_candidates(
            knots.iter().map(|(&a, &b)| Anchor { transcription: ms(a * 100), ground_truth: ms(b * 100) }),
        );
        let map = TimeMap::new(&anchors, None, None);
        for anchor in anchors.anchors() {
            prop_assert_eq!(map.map(&anchor.transcription), anchor.ground_truth.clone());
        }
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        prop_assert!(map.map(&ms(lo * 100)) <= map.map(&ms(hi * 100)));
    }

    #[test]
    fn key_score_ignores_time_scale(
        gt_change in 1i64..20,
        tr_change in 1i64..20,
        tonics in (0i64..12, 0i64..12, 0i64..12, 0i64..12),
        scale in 1i64..7,
    ) {
        let build = |factor: i64, change: i64, first: i64, second: i64| {
            Score::new(ScoreParts {
                notes: vec![note(60, 0, 2000 * factor, 0)],
                keys: vec![key(first, Mode::Major, ms(0)), key(second, Mode::Minor, ms(change * 100 * factor))],
                ..Default::default()
            })
            .unwrap()
        };
        let base = key_change_score(&build(1, tr_change, tonics.0, tonics.1), &build(1, gt_change, tonics.2, tonics.3)).unwrap();
        let scaled = key_change_score(&build(scale, tr_change, tonics.0, tonics.1), &build(scale, gt_change, tonics.2, tonics.3)).unwrap();
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn meter_matches_grow_with_tolerance(
        raw in prop::collection::vec((0i64..40, 1i64..10), 1..12),
        shifts in prop::collection::vec(-60i64..60, 12),
        small in 0i64..30,
        extra in 0i64..40,
    ) {
        let gt: Vec<Grouping> = raw
            .iter()
            .map(|&(s, l)| Grouping { level: GroupingLevel::Beat, start: ms(s * 100), end: ms(s * 100 + l * 100) })
            .collect();
        let tr: Vec<Grouping> = gt
            .iter()
            .zip(&shifts)
            .map(|(g, &d)| Grouping { level: g.level, start: &g.start + &ms(d), end: &g.end + &ms(d / 2) })
            .collect();
        let narrow = match_groupings(&tr, &gt, &ms(small));
        let wide = match_groupings(&tr, &gt, &ms(small + extra));
        prop_assert!(narrow <= wide);
        prop_assert_eq!(match_groupings(&gt, &gt, &Time::zero()), gt.len());
    }

    #[test]
    fn note_matching_is_maximum(tr in notes_strategy(7), gt in notes_strategy(7), tol in 0i64..100) {
        let mode = MatchMode::pre_aligned().with_onset_tolerance(ms(tol)).unwrap();
        let (trs, gts) = (plain_score(tr), plain_score(gt));
        let matching = match_notes(&trs, &gts, &mode);
        let best = brute_force_max_matching(trs.notes(), gts.notes(), &ms(tol));
        prop_assert_eq!(matching.true_positives(), best);
        for &(t, g) in &matching.pairs {
            let (a, b) = (&trs.notes()[t], &gts.notes()[g]);
            prop_assert_eq!(a.pitch, b.pitch);
            prop_assert!(a.onset.abs_diff(&b.onset) <= ms(tol));
        }
        let n_tr = trs.notes().len();
        let n_gt = gts.notes().len();
        let expected = ratio(2 * best as i64, (n_tr + n_gt) as i64);
        prop_assert_eq!(multi_pitch_score(&matching), expected);
    }
}

#[test]
fn mean_is_one_fifth_of_the_component_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let (a, b) = (random_score(&mut rng), random_score(&mut rng));
        for report in [
            evaluate(&a, &b, &MatchMode::pre_aligned()).report,
            evaluate_auto(&a, &b, &default_gap_penalty()).unwrap().0.report,
        ] {
            let sum = &report.multi_pitch + &report.voice + &report.meter + &report.value + &report.harmony;
            assert_eq!(&report.mv2h * int(5), sum);
            for (_, _, v) in report.fields() {
                assert!(*v >= Rational::zero() && *v <= int(1), "{report:?}");
            }
        }
    }
}

#[test]
fn evaluation_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let (a, b) = (random_score(&mut rng), random_score(&mut rng));
        let first = evaluate_auto(&a, &b, &default_gap_penalty()).unwrap().0;
        let second = evaluate_auto(&a.clone(), &b.clone(), &default_gap_penalty()).unwrap().0;
        assert_eq!(first, second);
    }
}

#[test]
fn chords_partition_the_notes() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let score = random_score(&mut rng);
        let chords = score.build_chord_sequence();
        assert_eq!(chords.iter().map(|c| c.notes.len()).sum::<usize>(), score.notes().len());
        assert!(chords.windows(2).all(|w| w[0].onset < w[1].onset));
        assert!(chords.iter().all(|c| c.notes.iter().all(|n| n.onset == c.onset)));
    }
}

#[test]
fn groupings_tile_the_piece() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let score = random_score(&mut rng);
        let groupings = score.generate_groupings().unwrap();
        let mut bars: Vec<&Grouping> = groupings.iter().filter(|g| g.level == GroupingLevel::Bar).collect();
        bars.sort_by(|a, b| a.start.cmp(&b.start));
        assert_eq!(bars[0].start, ms(0));
        assert!(bars.windows(2).all(|w| w[0].end == w[1].start));
        assert!(bars.last().unwrap().end >= score.span().unwrap().last_offset);
        for level in [GroupingLevel::Beat, GroupingLevel::SubBeat] {
            let mut units: Vec<&Grouping> = groupings.iter().filter(|g| g.level == level).collect();
            units.sort_by(|a, b| a.start.cmp(&b.start));
            assert!(units.windows(2).all(|w| w[0].end == w[1].start), "{level:?} gaps");
            assert_eq!(units.first().unwrap().start, bars[0].start);
            assert_eq!(units.last().unwrap().end, bars.last().unwrap().end);
        }
    }
}

#[test]
fn key_sections_tile_the_ground_truth_span() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..50 {
        let (tr, gt) = (random_score(&mut rng), random_score(&mut rng));
        let sections = tr.continuous_key_sections(&gt);
        let span: &Span = gt.span().unwrap();
        assert_eq!(sections.first().unwrap().start, span.first_onset);
        assert_eq!(sections.last().unwrap().end, span.last_offset);
        assert!(sections.windows(2).all(|w| w[0].end == w[1].start));
        assert!(sections.iter().all(|s| s.start < s.end));
    }
}

#[test]
fn compound_meter_groups_in_threes() {
    let score = Score::new(ScoreParts {
        notes: vec![note(60, 0, 3000, 0)],
        meters: vec![TimeSignature::new(6, 8, ms(0)).unwrap()],
        ..Default::default()
    })
    .unwrap();
    let g = score.generate_groupings().unwrap();
    let count = |level| g.iter().filter(|x| x.level == level).count();
    assert_eq!((count(GroupingLevel::Bar), count(GroupingLevel::Beat), count(GroupingLevel::SubBeat)), (1, 2, 6));
    assert!(g.iter().filter(|x| x.level == GroupingLevel::Beat).all(|x| &x.end - &x.start == ms(1500)));
}

#[test]
fn pitch_range_is_enforced() {
    assert!(Pitch::new(128).is_err());
    assert!(Pitch::new(-1).is_err());
    assert!(Pitch::new(127).is_ok());
}

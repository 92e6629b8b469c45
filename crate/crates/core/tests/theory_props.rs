use std::collections::BTreeSet;

use practice_scope::theory::{classify_note, role_duration_shares, NoteRole, RoleSequence, RoleSpan, ScaleSpec};
use proptest::prelude::*;

fn specs() -> impl Strategy<Value = ScaleSpec> {
    (0u8..12, prop::collection::btree_set(0u8..12, 0..8), prop::collection::btree_set(0u8..12, 0..3)).prop_map(
        |(root, mut scale, blue)| {
            scale.insert(root);
            let blue: BTreeSet<u8> = blue.difference(&scale).copied().collect();
            ScaleSpec::new("random", root, scale, blue).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn classification_ignores_octave(pitch in 0u8..=115, spec in specs()) {
        prop_assert_eq!(classify_note(pitch, &spec), classify_note(pitch + 12, &spec));
    }

    #[test]
    fn roles_partition_the_pitch_classes(spec in specs()) {
        let mut seen = BTreeSet::new();
        for role in NoteRole::ALL {
            for pc in spec.pitch_classes(role) {
                prop_assert!(seen.insert(pc), "pitch class {} has two roles", pc);
            }
        }
        prop_assert_eq!(seen.len(), 12);
        prop_assert_eq!(spec.pitch_classes(NoteRole::Root), vec![spec.root_pitch_class]);
    }

    #[test]
    fn shares_sum_to_one(spans in prop::collection::vec((0u8..128, 0.001f64..5.0), 1..40)) {
        let spec = ScaleSpec::a_minor_pentatonic_blues();
        let mut t = 0.0;
        let seq = RoleSequence {
            recording_id: "r".into(),
            spans: spans.iter().map(|&(pitch, d)| {
                let s = RoleSpan { start_seconds: t, duration_seconds: d, role: classify_note(pitch, &spec), pitch };
                t += d;
                s
            }).collect(),
        };
        let shares = role_duration_shares(&seq);
        prop_assert!((shares.sum() - 1.0).abs() <= 1e-12);
        prop_assert!(NoteRole::ALL.iter().all(|&r| (0.0..=1.0).contains(&shares.get(r))));
    }
}

#[test]
fn long_blue_note_share() {
    // Ten seconds of playing, one and a half of them on E flat.
    let spec = ScaleSpec::a_minor_pentatonic_blues();
    let plan = [(57u8, 2.0), (60, 1.5), (63, 1.5), (62, 2.0), (64, 1.0), (67, 2.0)];
    let mut t = 0.0;
    let spans = plan
        .iter()
        .map(|&(pitch, d)| {
            let s = RoleSpan { start_seconds: t, duration_seconds: d, role: classify_note(pitch, &spec), pitch };
            t += d;
            s
        })
        .collect();
    let shares = role_duration_shares(&RoleSequence { recording_id: "lick".into(), spans });
    assert_eq!(shares.blue_note, 0.15);
    assert_eq!(shares.root, 0.2);
}

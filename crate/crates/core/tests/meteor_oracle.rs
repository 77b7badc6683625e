mod support {
    pub mod meteor_cases;
}

use deobf_core::metrics::{meteor, MeteorParams};
use deobf_core::textproc::SynonymLexicon;
use proptest::prelude::*;
use support::meteor_cases::{expected, CASES, LEXICON};

#[test]
fn hand_computed_breakdowns() {
    let lex = SynonymLexicon::parse(LEXICON).unwrap();
    let params = MeteorParams::default();
    for case in &CASES {
        let got = meteor(case.candidate, case.reference, &params, Some(&lex));
        let want = expected(case);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
        assert_eq!(got.matches, want.matches, "{}", case.name);
        assert_eq!(
            (got.exact_matches, got.stem_matches, got.synonym_matches),
            case.stages,
            "{}",
            case.name
        );
        assert_eq!(got.candidate_len, case.candidate_len, "{}", case.name);
        assert_eq!(got.reference_len, case.reference_len, "{}", case.name);
        assert_eq!(got.chunks, case.chunks, "{}", case.name);
        assert!(close(got.precision, want.precision), "{}", case.name);
        assert!(close(got.recall, want.recall), "{}", case.name);
        assert!(close(got.f_mean, want.f_mean), "{}", case.name);
        assert!(close(got.penalty, want.penalty), "{}", case.name);
        assert!(close(got.score, want.score), "{}", case.name);
    }
}

#[test]
fn not_symmetric_in_general() {
    let p = MeteorParams::default();
    let a = meteor("the big black cat", "the cat", &p, None);
    let b = meteor("the cat", "the big black cat", &p, None);
    assert_ne!(a.precision, b.precision);
}

fn words() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        proptest::sample::select(vec![
            "the", "cat", "cats", "sat", "big", "large", "a", "pupil", "student", "mat", "on", ",",
            ".",
        ]),
        0..30,
    )
    .prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn score_in_unit_interval(c in words(), r in words()) {
        let lex = SynonymLexicon::parse(LEXICON).unwrap();
        let b = meteor(&c, &r, &MeteorParams::default(), Some(&lex));
        prop_assert!((0.0..=1.0).contains(&b.score));
        prop_assert!(b.chunks <= b.matches);
        prop_assert!(b.matches <= b.candidate_len.min(b.reference_len));
        if b.matches == 0 {
            prop_assert_eq!(b.score, 0.0);
        }
    }

    #[test]
    fn identity_depends_only_on_length(n in 1usize..60) {
        let text: Vec<String> = (0..n).map(|i| format!("w{}", i % 7)).collect();
        let b = meteor(&text.join(" "), &text.join(" "), &MeteorParams::default(), None);
        prop_assert_eq!(b.matches, n);
        prop_assert_eq!(b.chunks, 1);
        let want = 1.0 - 0.5 * (1.0 / n as f64).powi(3);
        prop_assert!((b.score - want).abs() < 1e-12);
    }
}

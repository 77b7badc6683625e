use deobf_core::obfuscators::{crossover, mutate};
use deobf_core::rng::StreamRng;
use deobf_core::textproc::{tokenize, SynonymLexicon};
use proptest::prelude::*;
use rand::SeedableRng;

fn sentence() -> impl Strategy<Value = String> {
    (
        "[A-Z][a-z]{1,7}",
        prop::collection::vec("[a-z]{1,8}|student|street|big|\\(aside\\)|,", 0..8),
        prop::sample::select(vec![".", "!", "?"]),
    )
        .prop_map(|(head, rest, end)| {
            let mut s = head;
            for w in rest {
                if w != "," {
                    s.push(' ');
                }
                s.push_str(&w);
            }
            s + end
        })
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(sentence(), 1..6).prop_map(|v| v.join(" "))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn offspring_sentence_count_between_parents(a in text(), b in text(), seed in any::<u64>()) {
        let mut rng = StreamRng::seed_from_u64(seed);
        let child = crossover(&a, &b, &mut rng);
        let (na, nb) = (tokenize(&a).sentences.len(), tokenize(&b).sentences.len());
        let nc = tokenize(&child).sentences.len();
        prop_assert!(na.min(nb) <= nc && nc <= na.max(nb), "{a:?} x {b:?} -> {child:?}");
    }
}

proptest! {
    #[test]
    fn mutation_keeps_word_count(t in text(), rate in 0.0f64..=1.0, seed in any::<u64>()) {
        let lex = SynonymLexicon::bundled_related();
        let mut rng = StreamRng::seed_from_u64(seed);
        let out = mutate(&t, &lex, rate, &mut rng);
        prop_assert_eq!(tokenize(&out).word_count(), tokenize(&t).word_count());
    }

    #[test]
    fn crossover_with_self_is_identity(t in text(), seed in any::<u64>()) {
        let mut rng = StreamRng::seed_from_u64(seed);
        prop_assert_eq!(crossover(&t, &t, &mut rng), t);
    }
}

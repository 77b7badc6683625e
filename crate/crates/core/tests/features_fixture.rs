mod support {
    pub mod feature_fixtures;
}

use std::path::Path;

use deobf_core::corpus::{Document, DocumentSet};
use deobf_core::features::{extract_batch, extract_text, registry, Normalization};
use proptest::prelude::*;
use support::feature_fixtures;

#[test]
fn hand_counted_fixtures() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/features");
    for name in feature_fixtures::NAMES {
        let problems = feature_fixtures::check(&dir, name);
        assert!(problems.is_empty(), "{problems:#?}");
    }
}

fn sentence() -> impl Strategy<Value = String> {
    (
        "[A-Z][a-z]{0,8}",
        proptest::collection::vec("[a-z]{1,9}|[0-9]{1,3}|\\(x\\)|don't|the|of", 0..10),
        proptest::sample::select(vec![".", "!", "?"]),
    )
        .prop_map(|(first, rest, end)| {
            let mut s = first;
            for w in rest {
                s.push(' ');
                s.push_str(&w);
            }
            s + end
        })
}

proptest! {
    #[test]
    fn sentence_order_is_irrelevant(sentences in proptest::collection::vec(sentence(), 1..6), seed in any::<u64>()) {
        let mut shuffled = sentences.clone();
        let n = shuffled.len();
        shuffled.rotate_left((seed as usize) % n);
        let a = extract_text("a", &sentences.join(" "));
        let b = extract_text("b", &shuffled.join(" "));
        prop_assert_eq!(a.values, b.values);
    }

    #[test]
    fn duplication_scales_raw_counts_only(sentences in proptest::collection::vec(sentence(), 1..4), k in 2usize..4) {
        let text = sentences.join(" ");
        let once = extract_text("a", &text);
        let many = extract_text("b", &vec![text; k].join(" "));
        for e in &registry().entries {
            let (x, y) = (once.values[e.index], many.values[e.index]);
            match e.normalization {
                Normalization::Raw => prop_assert_eq!(y, x * k as f64),
                _ => prop_assert!((x - y).abs() < 1e-12, "{} {} {}", e.name, x, y),
            }
        }
    }

    #[test]
    fn values_finite_and_bounded(text in "\\PC{0,200}") {
        let v = extract_text("d", &text);
        for e in &registry().entries {
            let x = v.values[e.index];
            prop_assert!(x.is_finite() && x >= 0.0);
            if e.normalization != Normalization::Raw {
                prop_assert!(x <= 1.0, "{} = {}", e.name, x);
            }
        }
    }

    #[test]
    fn batch_is_elementwise(texts in proptest::collection::vec("[a-zA-Z ,.]{1,60}", 1..5)) {
        let docs: Vec<Document> = texts
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.trim().is_empty())
            .map(|(i, t)| Document::new(format!("d{i}"), "x", t.clone()).unwrap())
            .collect();
        let set = DocumentSet::new(docs).unwrap();
        let batch = extract_batch(&set);
        prop_assert_eq!(batch.len(), set.len());
        for (v, d) in batch.iter().zip(set.iter()) {
            prop_assert_eq!(&v.values, &extract_text(&d.doc_id, &d.text).values);
        }
    }
}

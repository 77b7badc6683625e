//! Hand-aligned METEOR cases. Counts were worked out by hand; the derived
//! fields are recomputed here from the textbook formulas.

#![allow(dead_code)]

pub const LEXICON: &str = "big\tadj\tlarge\nstudent\tnoun\tpupil\nquick\tadj\tfast\n";

pub struct Case {
    pub name: &'static str,
    pub candidate: &'static str,
    pub reference: &'static str,
    pub candidate_len: usize,
    pub reference_len: usize,
    /// (exact, stem, synonym)
    pub stages: (usize, usize, usize),
    pub chunks: usize,
}

pub const CASES: [Case; 12] = [
    Case {
        name: "identity",
        candidate: "the cat sat",
        reference: "the cat sat",
        candidate_len: 3,
        reference_len: 3,
        stages: (3, 0, 0),
        chunks: 1,
    },
    Case {
        name: "disjoint",
        candidate: "dogs bark loudly",
        reference: "the cat sat",
        candidate_len: 3,
        reference_len: 3,
        stages: (0, 0, 0),
        chunks: 0,
    },
    Case {
        name: "reordered",
        candidate: "sat the cat",
        reference: "the cat sat",
        candidate_len: 3,
        reference_len: 3,
        stages: (3, 0, 0),
        chunks: 2,
    },
    Case {
        name: "stem",
        candidate: "the cats walked",
        reference: "the cat walks",
        candidate_len: 3,
        reference_len: 3,
        stages: (1, 2, 0),
        chunks: 1,
    },
    Case {
        name: "synonym",
        candidate: "a large pupil",
        reference: "a big student",
        candidate_len: 3,
        reference_len: 3,
        stages: (1, 0, 2),
        chunks: 1,
    },
    Case {
        name: "empty candidate",
        candidate: "",
        reference: "the cat",
        candidate_len: 0,
        reference_len: 2,
        stages: (0, 0, 0),
        chunks: 0,
    },
    Case {
        name: "one substitution",
        candidate: "the cat sat on the mat",
        reference: "the cat is on the mat",
        candidate_len: 6,
        reference_len: 6,
        stages: (5, 0, 0),
        chunks: 2,
    },
    Case {
        name: "punctuation and case",
        candidate: "The cat, sat.",
        reference: "the cat sat",
        candidate_len: 3,
        reference_len: 3,
        stages: (3, 0, 0),
        chunks: 1,
    },
    Case {
        name: "inserted words",
        candidate: "the big black cat",
        reference: "the cat",
        candidate_len: 4,
        reference_len: 2,
        stages: (2, 0, 0),
        chunks: 2,
    },
    Case {
        name: "repeated words",
        candidate: "a b c a b",
        reference: "c a b a b",
        candidate_len: 5,
        reference_len: 5,
        stages: (5, 0, 0),
        chunks: 2,
    },
    Case {
        name: "reversed",
        candidate: "sat cat the",
        reference: "the cat sat",
        candidate_len: 3,
        reference_len: 3,
        stages: (3, 0, 0),
        chunks: 3,
    },
    Case {
        name: "mixed stages",
        candidate: "THE Cat runs fast",
        reference: "the cat ran quick",
        candidate_len: 4,
        reference_len: 4,
        stages: (2, 0, 1),
        chunks: 2,
    },
];

pub struct Expected {
    pub matches: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_mean: f64,
    pub penalty: f64,
    pub score: f64,
}

/// alpha = 0.9, beta = 3, gamma = 0.5.
pub fn expected(case: &Case) -> Expected {
    let (e, s, y) = case.stages;
    let m = e + s + y;
    if m == 0 {
        return Expected {
            matches: 0,
            precision: 0.0,
            recall: 0.0,
            f_mean: 0.0,
            penalty: 0.0,
            score: 0.0,
        };
    }
    let p = m as f64 / case.candidate_len as f64;
    let r = m as f64 / case.reference_len as f64;
    let f = 10.0 * p * r / (r + 9.0 * p);
    let frag = case.chunks as f64 / m as f64;
    let penalty = 0.5 * frag * frag * frag;
    Expected {
        matches: m,
        precision: p,
        recall: r,
        f_mean: f,
        penalty,
        score: f * (1.0 - penalty),
    }
}

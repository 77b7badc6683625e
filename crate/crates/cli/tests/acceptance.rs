//! End-to-end acceptance run over the bundled mini-corpus. Prints one
//! PASS/FAIL line per criterion, then fails if any criterion failed.

#[path = "../../core/tests/support/cart_oracle.rs"]
mod cart_oracle;
#[path = "../../core/tests/support/feature_fixtures.rs"]
mod feature_fixtures;
#[path = "../../core/tests/support/meteor_cases.rs"]
mod meteor_cases;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use deobf_core::corpus::{load_corpus, LoadOptions};
use deobf_core::features::extract;
use deobf_core::forest::{train, train_rows, FeaturesPerSplit, ForestParams};
use deobf_core::harness::{meteor_scorer, ArenaConfig, ArenaReport, ScenarioId};
use deobf_core::metrics::{meteor, MeteorParams};
use deobf_core::obfuscators::{obfuscate_mutantx, MutantXParams};
use deobf_core::textproc::SynonymLexicon;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config_path() -> PathBuf {
    workspace().join("configs/mini.json")
}

fn pct(x: f64) -> f64 {
    100.0 * x
}

struct ArenaRun {
    stdout: String,
    report_bytes: Vec<u8>,
    report: ArenaReport,
    elapsed: Duration,
}

fn run_arena(out: &Path, jobs: usize) -> ArenaRun {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_deobf-arena"))
        .arg("arena")
        .arg("--config")
        .arg(config_path())
        .arg("--out")
        .arg(out)
        .arg("--jobs")
        .arg(jobs.to_string())
        .output()
        .expect("arena binary runs");
    let elapsed = start.elapsed();
    assert!(
        output.status.success(),
        "arena failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report_bytes = std::fs::read(out.join("arena.json")).expect("arena.json written");
    let report = serde_json::from_slice(&report_bytes).expect("arena.json parses");
    ArenaRun {
        stdout: String::from_utf8(output.stdout).unwrap(),
        report_bytes,
        report,
        elapsed,
    }
}

fn cell(r: &ArenaReport, id: ScenarioId, set: &str) -> f64 {
    pct(r.scenario(id).unwrap().accuracy(set).unwrap())
}

fn obf_avg(r: &ArenaReport, id: ScenarioId) -> f64 {
    let s = r.scenario(id).unwrap();
    pct(s.average_obfuscated.unwrap_or(s.average))
}

fn baseline(r: &ArenaReport, elapsed: Duration) -> Verdict {
    let n_authors = r.scenario(ScenarioId::S0).unwrap().cells["original"]
        .confusion
        .classes
        .len();
    let chance_x3 = 300.0 / n_authors as f64;
    let s0 = cell(r, ScenarioId::S0, "original");
    // The whole arena bounds the S0-only runtime from above.
    let fast = elapsed < Duration::from_secs(120);
    verdict(
        s0 >= chance_x3 && fast,
        format!(
            "S0 {s0:.1}% vs 3x chance {chance_x3:.1}%; full arena {:.0}s < 120s",
            elapsed.as_secs_f64()
        ),
    )
}

fn obfuscation_hurts(r: &ArenaReport, elapsed: Duration) -> Verdict {
    let s0 = cell(r, ScenarioId::S0, "original");
    let ds = cell(r, ScenarioId::S1, "dspan");
    let mx = cell(r, ScenarioId::S1, "mutantx");
    verdict(
        ds <= s0 - 8.0 && mx <= s0 - 8.0 && elapsed < Duration::from_secs(600),
        format!("S0 {s0:.1}; S1 dspan {ds:.1}, mutantx {mx:.1} (need <= {:.1})", s0 - 8.0),
    )
}

fn matched_recovers(r: &ArenaReport) -> Verdict {
    let gains: Vec<(&str, f64)> = ["dspan", "mutantx"]
        .iter()
        .map(|&x| (x, cell(r, ScenarioId::S3, x) - cell(r, ScenarioId::S1, x)))
        .collect();
    verdict(
        gains.iter().all(|&(_, g)| g >= 10.0),
        gains
            .iter()
            .map(|(x, g)| format!("{x} S3-S1 {g:+.1}"))
            .collect::<Vec<_>>()
            .join(", ")
            + " (need >= +10)",
    )
}

fn ordering(r: &ArenaReport) -> Verdict {
    let (s1, s2, s3) = (
        obf_avg(r, ScenarioId::S1),
        obf_avg(r, ScenarioId::S2),
        obf_avg(r, ScenarioId::S3),
    );
    verdict(
        s3 >= s2 - 2.0 && s2 >= s1 - 2.0,
        format!("S3 {s3:.1} >= S2 {s2:.1} >= S1 {s1:.1}, slack 2"),
    )
}

fn error_conditions(r: &ArenaReport) -> Verdict {
    let s3i = obf_avg(r, ScenarioId::S3i);
    let s1 = obf_avg(r, ScenarioId::S1);
    let s2i = cell(r, ScenarioId::S2i, "original");
    let s2 = obf_avg(r, ScenarioId::S2);
    verdict(
        s3i >= s1 - 3.0 && s2i >= s2 - 3.0,
        format!("S3i {s3i:.1} vs S1 {s1:.1}; S2i original {s2i:.1} vs S2 {s2:.1}; slack 3"),
    )
}

fn combined(r: &ArenaReport) -> Verdict {
    let s4 = pct(r.scenario(ScenarioId::S4).unwrap().average);
    let target = (obf_avg(r, ScenarioId::S2) + obf_avg(r, ScenarioId::S3)) / 2.0;
    verdict(
        (s4 - target).abs() <= 8.0,
        format!("S4 {s4:.1} vs mean(S2, S3) {target:.1}, tolerance 8"),
    )
}

fn meteor_oracle() -> Verdict {
    let start = Instant::now();
    let lex = SynonymLexicon::parse(meteor_cases::LEXICON).unwrap();
    let params = MeteorParams::default();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let mut bad = Vec::new();
    for case in &meteor_cases::CASES {
        let got = meteor(case.candidate, case.reference, &params, Some(&lex));
        let want = meteor_cases::expected(case);
        let ok = got.matches == want.matches
            && (got.exact_matches, got.stem_matches, got.synonym_matches) == case.stages
            && got.candidate_len == case.candidate_len
            && got.reference_len == case.reference_len
            && got.chunks == case.chunks
            && close(got.precision, want.precision)
            && close(got.recall, want.recall)
            && close(got.f_mean, want.f_mean)
            && close(got.penalty, want.penalty)
            && close(got.score, want.score);
        if !ok {
            bad.push(case.name);
        }
    }
    let elapsed = start.elapsed();
    verdict(
        bad.is_empty() && elapsed < Duration::from_secs(1),
        format!(
            "{}/{} cases at 1e-9 in {:.3}s; mismatched {bad:?}",
            meteor_cases::CASES.len() - bad.len(),
            meteor_cases::CASES.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn meteor_bands(r: &ArenaReport) -> Verdict {
    let mx = r.meteor["mutantx"].mean;
    let ds = r.meteor["dspan"].mean;
    verdict(
        (0.30..=0.70).contains(&mx) && (0.20..=0.65).contains(&ds),
        format!("Mutant-X {mx:.3} in [0.30, 0.70]; DS-PAN {ds:.3} in [0.20, 0.65]"),
    )
}

fn forest_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let single = ForestParams {
        n_trees: 1,
        max_depth: None,
        min_samples_leaf: 1,
        features_per_split: FeaturesPerSplit::All,
        bootstrap: false,
        seed: 0,
    };
    let mut mismatches = 0;
    for _ in 0..20 {
        let n = rng.gen_range(2..=50);
        let d = rng.gen_range(1..=6);
        let k = rng.gen_range(2..=3);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(0..8) as f64 * 0.25).collect())
            .collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let names: Vec<String> = labels.iter().map(|l| format!("c{l}")).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let model = train_rows(&refs, &names, "toy", &single).unwrap();
        let mut present = labels.clone();
        present.sort_unstable();
        present.dedup();
        let oracle = cart_oracle::build(&rows, &labels, k, None);
        let probes: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..d).map(|_| rng.gen_range(-0.5..2.5)).collect())
            .collect();
        for x in rows.iter().chain(&probes) {
            let full = oracle.probabilities(x);
            let want: Vec<f64> = present.iter().map(|&c| full[c]).collect();
            if model.predict_values(x).unwrap().probabilities != want {
                mismatches += 1;
            }
        }
    }
    let rows: Vec<Vec<f64>> = (0..80)
        .map(|_| (0..10).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    let names: Vec<String> = rows.iter().map(|r| format!("c{}", (r[0] * 3.0) as usize)).collect();
    let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
    let defaults = ForestParams::default();
    let a = train_rows(&refs, &names, "toy", &defaults).unwrap().digest();
    let b = train_rows(&refs, &names, "toy", &defaults).unwrap().digest();
    let elapsed = start.elapsed();
    verdict(
        mismatches == 0 && a == b && elapsed < Duration::from_secs(30),
        format!(
            "{mismatches} CART mismatches over 20 datasets; retrain digest {}; {:.1}s",
            if a == b { "identical" } else { "differs" },
            elapsed.as_secs_f64()
        ),
    )
}

fn feature_fixtures() -> Verdict {
    let dir = workspace().join("crates/core/tests/fixtures/features");
    let problems: Vec<String> = feature_fixtures::NAMES
        .iter()
        .flat_map(|name| feature_fixtures::check(&dir, name))
        .collect();
    verdict(
        problems.is_empty(),
        format!(
            "{} fixtures, {} mismatched values {:?}",
            feature_fixtures::NAMES.len(),
            problems.len(),
            problems.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn ga_invariants() -> Verdict {
    let config = ArenaConfig::load(&config_path()).unwrap();
    let corpus = load_corpus(
        &config.resolve(&config.corpus.path),
        config.corpus.format,
        LoadOptions::default(),
    )
    .unwrap();
    let (held, pool): (Vec<_>, Vec<_>) = corpus
        .iter()
        .enumerate()
        .partition(|(i, _)| i % 4 == 0);
    let x: Vec<_> = pool.iter().map(|(_, d)| extract(d)).collect();
    let y: Vec<String> = pool.iter().map(|(_, d)| d.author.clone()).collect();
    let model = train(&x, &y, &config.forest).unwrap();
    let lexicon = SynonymLexicon::bundled_related();
    let scorer = meteor_scorer(&config).unwrap();
    let mut runs = 0;
    let mut violations = Vec::new();
    for (run, (_, doc)) in held.iter().take(50).enumerate() {
        let params = MutantXParams {
            seed: run as u64,
            ..config.obfuscators.mutantx.params.clone()
        };
        let r = obfuscate_mutantx(doc, &model, &doc.author, &lexicon, &scorer, &params).unwrap();
        runs += 1;
        let monotone = r.fitness_trace.windows(2).all(|w| w[1] >= w[0]);
        let kept = r.meteor >= params.meteor_floor || r.evaded == Some(true);
        if !monotone || !kept {
            violations.push(doc.doc_id.clone());
        }
    }
    verdict(
        runs == 50 && violations.is_empty(),
        format!("{runs} runs; violations {violations:?}"),
    )
}

fn determinism(first: &ArenaRun, again: &ArenaRun, parallel: &ArenaRun) -> Verdict {
    let total = first.elapsed + again.elapsed + parallel.elapsed;
    let same = first.report.digest == again.report.digest
        && first.report.digest == parallel.report.digest
        && first.report_bytes == again.report_bytes
        && first.report_bytes == parallel.report_bytes
        && first.stdout == again.stdout
        && first.stdout == parallel.stdout;
    verdict(
        same && total < Duration::from_secs(900),
        format!(
            "digest {} (jobs 1 twice, jobs 4 once) {}; {:.0}s total",
            &first.report.digest[..16],
            if same { "identical" } else { "DIFFERS" },
            total.as_secs_f64()
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let scratch = tempfile::tempdir().unwrap();
    let first = run_arena(&scratch.path().join("a"), 1);
    let again = run_arena(&scratch.path().join("b"), 1);
    let parallel = run_arena(&scratch.path().join("c"), 4);
    let r = &first.report;

    let results = [
        ("baseline beats chance", baseline(r, first.elapsed)),
        ("obfuscation hurts the unaware attacker", obfuscation_hurts(r, first.elapsed)),
        ("matched adversarial training recovers", matched_recovers(r)),
        ("scenario ordering S3 >= S2 >= S1", ordering(r)),
        ("error conditions bounded by the unaware baseline", error_conditions(r)),
        ("combined training viability", combined(r)),
        ("METEOR hand-computed breakdowns", meteor_oracle()),
        ("METEOR calibration bands", meteor_bands(r)),
        ("forest reference equivalence and digest", forest_oracle()),
        ("feature fixtures exact", feature_fixtures()),
        ("GA invariants over 50 runs", ga_invariants()),
        ("end-to-end determinism", determinism(&first, &again, &parallel)),
    ];

    // Written straight to the stream so the lines survive output capture.
    let mut err = std::io::stderr().lock();
    for (i, (name, v)) in results.iter().enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        writeln!(err, "{tag} {:>2} {name}: {}", i + 1, v.detail).unwrap();
    }
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, (_, v))| !v.pass)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

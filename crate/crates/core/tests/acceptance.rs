//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p abseg-core --test acceptance -- --nocapture`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use abseg::baselines::{run_baseline, Baseline, BaselineInputs};
use abseg::corpus::{corpus_stats, load_tokenized, TokenizedAbstract};
use abseg::cycle::{enumerate_candidates, BoundaryLabeling, SegmentationAssignment};
use abseg::eval::{evaluate_run, jaccard, pk, rouge_mean, window_diff, EvalOptions, Metric};
use abseg::greedy::{
    build_tfidf_provider, greedycas_base, greedycas_nn, write_assignment, AssignmentRecord,
    GreedyConfig,
};
use abseg::nmi::{build_counts, mutual_information, nmi, CountTable, NmiOptions};
use abseg::study::batch_size_study;
use abseg::synthetic::{generate, SyntheticConfig};
use abseg::Error;

const TABLE1_BUDGET: Duration = Duration::from_millis(1);
const ORACLE_TOL: f64 = 1e-9;
const GREEDY_RATIO: f64 = 0.95;
const GREEDY_BUDGET: Duration = Duration::from_secs(10);
const METRIC_TOL: f64 = 1e-9;
const GREEDY_MARGIN: f64 = 0.10;
const RANDOM_PLUS_MARGIN: f64 = 0.15;
const E2E_BUDGET: Duration = Duration::from_secs(60);
const CAS_HUMAN_PK: f64 = 0.25;

fn report(name: &str, pass: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn table1() -> bool {
    let start = Instant::now();
    let cands = enumerate_candidates(7).unwrap();
    let elapsed = start.elapsed();
    let got: Vec<String> = cands.iter().map(|c| c.labeling().to_string()).collect();
    let want: BTreeSet<&str> =
        ["0001001", "1000100", "0100010", "0000101", "1000010", "0000011"].into();
    let got_set: BTreeSet<&str> = got.iter().map(String::as_str).collect();
    report(
        "table-1 reproduction",
        got.len() == 6 && got_set == want && elapsed < TABLE1_BUDGET,
        format!("{got:?} in {elapsed:?}"),
    )
}

type Corpus = Vec<(Vec<&'static str>, Vec<&'static str>)>;

/// Brute-force MI and min-entropy NMI by explicit summation over every
/// (premise word, conclusion word) pair, with the unnormalized joint.
fn oracle(corpus: &Corpus) -> (f64, Option<f64>) {
    let count = |words: &[&str], w: &str| words.iter().filter(|x| **x == w).count() as f64;
    let all_p: Vec<&str> = corpus.iter().flat_map(|(p, _)| p.iter().copied()).collect();
    let all_c: Vec<&str> = corpus.iter().flat_map(|(_, c)| c.iter().copied()).collect();
    let vp: BTreeSet<&str> = all_p.iter().copied().collect();
    let vc: BTreeSet<&str> = all_c.iter().copied().collect();
    let mut denom = 0.0;
    for wp in &vp {
        for wc in &vc {
            denom += count(&all_p, wp) * count(&all_c, wc);
        }
    }
    let mut mi = 0.0;
    for wp in &vp {
        for wc in &vc {
            let num: f64 = corpus.iter().map(|(p, c)| count(p, wp) * count(c, wc)).sum();
            let joint = num / denom;
            if joint > 0.0 {
                let pp = count(&all_p, wp) / all_p.len() as f64;
                let pc = count(&all_c, wc) / all_c.len() as f64;
                mi += joint * (joint / (pp * pc)).log2();
            }
        }
    }
    let h = |all: &[&str], v: &BTreeSet<&str>| -> f64 {
        v.iter()
            .map(|w| {
                let p = count(all, w) / all.len() as f64;
                -p * p.log2()
            })
            .sum()
    };
    let norm = h(&all_p, &vp).min(h(&all_c, &vc));
    (mi, (norm > 0.0).then(|| mi / norm))
}

fn nmi_oracle() -> bool {
    let corpora: Vec<Corpus> = vec![
        vec![(vec!["a"], vec!["b"]), (vec!["a"], vec!["c"])],
        vec![(vec!["a", "b", "c"], vec!["d", "e", "f"])],
        vec![(vec!["a", "b"], vec!["c", "d"]), (vec!["e", "f"], vec!["g", "h"])],
        vec![(vec!["a", "a", "b"], vec!["c", "c", "d"]), (vec!["b", "e"], vec!["d", "f"])],
        vec![(vec!["x", "y", "z"], vec!["x", "y", "z"]), (vec!["x"], vec!["q"]), (vec!["z", "z"], vec!["q", "y"])],
        vec![(vec!["a", "b", "c"], vec!["a"]), (vec!["a", "b"], vec!["b", "c", "d", "e"])],
        vec![(vec!["m", "n"], vec!["o"]), (vec!["m", "n"], vec!["o"]), (vec!["p"], vec!["r", "s"])],
        vec![(vec!["a", "b", "c", "d", "e"], vec!["f"]), (vec!["a"], vec!["f", "g", "h", "i", "j"])],
        vec![(vec!["s", "t"], vec!["u", "v"]), (vec!["t", "u"], vec!["v", "s"]), (vec!["u", "v"], vec!["s", "t"])],
        vec![(vec!["k", "k", "k"], vec!["l", "m", "n"]), (vec!["o", "p", "q"], vec!["l", "l", "l"])],
    ];
    let opts = NmiOptions::default();
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    let mut toy_mi = f64::NAN;
    let mut single_mi = f64::NAN;
    for (i, corpus) in corpora.iter().enumerate() {
        let mut t = CountTable::new();
        for (j, (p, c)) in corpus.iter().enumerate() {
            t.add_segment(&format!("a{j}"), p.iter().copied(), c.iter().copied());
        }
        let (mi_o, nmi_o) = oracle(corpus);
        let mi = mutual_information(&t, &opts).unwrap();
        worst = worst.max((mi - mi_o).abs());
        all_ok &= (mi - mi_o).abs() < ORACLE_TOL;
        match (nmi(&t, &opts), nmi_o) {
            (Ok(r), Some(o)) => {
                worst = worst.max((r.nmi - o).abs());
                all_ok &= (r.nmi - o).abs() < ORACLE_TOL;
            }
            (Err(Error::DegenerateNormalizer { .. }), None) => {}
            (got, want) => {
                println!("  corpus {i}: nmi {got:?} vs oracle {want:?}");
                all_ok = false;
            }
        }
        if i == 0 {
            toy_mi = mi;
        }
        if i == 1 {
            single_mi = mi;
        }
    }
    let pass = all_ok && (toy_mi + 0.5).abs() < ORACLE_TOL && single_mi.abs() < ORACLE_TOL;
    report(
        "nmi oracle equivalence",
        pass,
        format!(
            "10 corpora, max |diff| {worst:.2e}; two-abstract toy MI {toy_mi} bits; single abstract MI {single_mi}"
        ),
    )
}

/// Best NMI over all 6^3 assignments of a 3-abstract batch.
fn exhaustive_optimum(batch: &[TokenizedAbstract], opts: &NmiOptions) -> f64 {
    let cands: Vec<_> = batch.iter().map(|a| enumerate_candidates(a.n()).unwrap()).collect();
    let mut best = f64::NEG_INFINITY;
    for &x in &cands[0] {
        for &y in &cands[1] {
            for &z in &cands[2] {
                let mut asg = SegmentationAssignment::new();
                asg.insert(batch[0].id.clone(), x);
                asg.insert(batch[1].id.clone(), y);
                asg.insert(batch[2].id.clone(), z);
                if let Ok(r) = nmi(&build_counts(batch, &asg).unwrap(), opts) {
                    best = best.max(r.nmi);
                }
            }
        }
    }
    best
}

fn greedy_vs_exhaustive() -> bool {
    let start = Instant::now();
    let cfg = GreedyConfig {
        epochs: 5,
        ..GreedyConfig::default()
    };
    let opts = cfg.nmi_options();
    let mut failures = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for seed in 0..20 {
        let batch = generate(&SyntheticConfig {
            num_abstracts: 3,
            seed: 1000 + seed,
            ..Default::default()
        });
        let out = greedycas_base(&batch, &GreedyConfig { rng_seed: seed, ..cfg.clone() }).unwrap();
        let got = nmi(&build_counts(&batch, &out.assignment).unwrap(), &opts)
            .map(|r| r.nmi)
            .unwrap_or(f64::NEG_INFINITY);
        let best = exhaustive_optimum(&batch, &opts);
        if best > 0.0 {
            min_ratio = min_ratio.min(got / best);
        }
        if got < GREEDY_RATIO * best {
            failures.push(seed);
        }
    }
    let elapsed = start.elapsed();

    // the unnormalized joint makes every optimum negative, where a 0.95
    // ratio demands beating the optimum; shown for reference only
    let faithful = NmiOptions::default();
    let mut faithful_hits = 0;
    for seed in 0..20 {
        let batch = generate(&SyntheticConfig {
            num_abstracts: 3,
            seed: 1000 + seed,
            ..Default::default()
        });
        let out = greedycas_base(
            &batch,
            &GreedyConfig {
                rng_seed: seed,
                renormalize_joint: false,
                ..cfg.clone()
            },
        )
        .unwrap();
        let got = nmi(&build_counts(&batch, &out.assignment).unwrap(), &faithful).unwrap().nmi;
        if got >= GREEDY_RATIO * exhaustive_optimum(&batch, &faithful) {
            faithful_hits += 1;
        }
    }
    println!("INFO unnormalized joint: greedy >= 0.95 x optimum on {faithful_hits}/20 batches");

    report(
        "greedy vs exhaustive",
        failures.is_empty() && elapsed < GREEDY_BUDGET,
        format!(
            "20 batches, min greedy/optimum {min_ratio:.4}, below {GREEDY_RATIO}: {failures:?}, {elapsed:?}"
        ),
    )
}

fn metric_goldens() -> bool {
    let l = |s: &str| s.parse::<BoundaryLabeling>().unwrap();
    let set = |v: &[usize]| v.iter().copied().collect::<BTreeSet<_>>();
    let p = pk(&l("0001001"), &l("0000011"), 2).unwrap();
    let r = rouge_mean(&["a", "b", "c"], &["a", "b", "d"]).unwrap();
    let j = jaccard(&set(&[4, 5, 6]), &set(&[6]));
    let identities = pk(&l("0001001"), &l("0001001"), 2).unwrap() == 0.0
        && window_diff(&l("0001001"), &l("0001001"), 2).unwrap() == 0.0
        && rouge_mean(&["a", "b", "c"], &["a", "b", "c"]).unwrap() == 1.0
        && jaccard(&set(&[5, 6]), &set(&[5, 6])) == 1.0
        && jaccard(&set(&[0]), &set(&[6])) == 0.0
        && rouge_mean(&["x"], &["a", "b"]).unwrap() == 0.0;
    report(
        "metric golden values",
        (p - 0.6).abs() < METRIC_TOL
            && (r - 11.0 / 18.0).abs() < METRIC_TOL
            && (j - 1.0 / 3.0).abs() < METRIC_TOL
            && identities,
        format!("pk {p}, rouge {r}, jaccard {j}, identities {identities}"),
    )
}

fn end_to_end() -> bool {
    let start = Instant::now();
    let eval = EvalOptions::default();
    let (mut g, mut rb, mut rp) = (0.0, 0.0, 0.0);
    let seeds = 0..5u64;
    let runs = seeds.clone().count() as f64;
    for seed in seeds {
        let corpus = generate(&SyntheticConfig {
            seed,
            ..Default::default()
        });
        let cfg = GreedyConfig {
            rng_seed: seed,
            ..GreedyConfig::default()
        };
        let out = greedycas_base(&corpus, &cfg).unwrap();
        let recs = AssignmentRecord::from_outcome(&corpus, &out).unwrap();
        g += evaluate_run(&corpus, &recs, &eval).unwrap().pk;
        let inputs = BaselineInputs {
            seed,
            ..Default::default()
        };
        for (kind, acc) in [(Baseline::RandomBase, &mut rb), (Baseline::RandomPlus, &mut rp)] {
            let recs = run_baseline(&corpus, kind, &inputs).unwrap();
            *acc += evaluate_run(&corpus, &recs, &eval).unwrap().pk;
        }
    }
    let (g, rb, rp) = (g / runs, rb / runs, rp / runs);
    let elapsed = start.elapsed();
    report(
        "end-to-end ordering",
        rb - g >= GREEDY_MARGIN && rb - rp >= RANDOM_PLUS_MARGIN && elapsed < E2E_BUDGET,
        format!("mean Pk greedy-base {g:.4}, random-plus {rp:.4}, random-base {rb:.4}; {elapsed:?}"),
    )
}

fn correlation_signs() -> bool {
    let corpus = generate(&SyntheticConfig::default());
    let provider = build_tfidf_provider(&corpus).unwrap();
    let study = batch_size_study(
        &corpus,
        &GreedyConfig::default(),
        &provider,
        2..=12,
        &EvalOptions::default(),
    )
    .unwrap();
    let r = |m| study.r(m).unwrap_or(f64::NAN);
    let (p, w, j, g) = (
        r(Metric::Pk),
        r(Metric::WindowDiff),
        r(Metric::Jaccard),
        r(Metric::Rouge),
    );
    report(
        "correlation sign pattern",
        p < 0.0 && w < 0.0 && j > 0.0 && g > 0.0,
        format!("r(NMI, Pk) {p:.3}, r(NMI, WD) {w:.3}, r(NMI, Jaccard) {j:.3}, r(NMI, ROUGE) {g:.3}"),
    )
}

fn run_bytes(corpus: &[TokenizedAbstract]) -> (Vec<u8>, Vec<u8>) {
    let cfg = GreedyConfig {
        rng_seed: 17,
        ..GreedyConfig::default()
    };
    let provider = build_tfidf_provider(corpus).unwrap();
    let out = greedycas_nn(corpus, &cfg, &provider).unwrap();
    let recs = AssignmentRecord::from_outcome(corpus, &out).unwrap();
    let mut assignment = Vec::new();
    write_assignment(&mut assignment, &recs).unwrap();
    let report = evaluate_run(corpus, &recs, &EvalOptions::default()).unwrap();
    (assignment, serde_json::to_vec_pretty(&report).unwrap())
}

fn determinism() -> bool {
    let corpus = generate(&SyntheticConfig::default());
    let a = run_bytes(&corpus);
    let b = run_bytes(&corpus);
    let base_cfg = GreedyConfig {
        rng_seed: 3,
        ..GreedyConfig::default()
    };
    let base_a = greedycas_base(&corpus[..20], &base_cfg).unwrap();
    let base_b = greedycas_base(&corpus[..20], &base_cfg).unwrap();
    report(
        "determinism",
        a == b && base_a == base_b,
        format!(
            "assignment {} bytes, report {} bytes, identical across runs: {}",
            a.0.len(),
            a.1.len(),
            a == b && base_a == base_b
        ),
    )
}

fn dataset(var: &str) -> Option<PathBuf> {
    std::env::var_os(var).map(PathBuf::from).filter(|p| p.is_file())
}

fn cas_datasets() -> bool {
    let (Some(auto), Some(human)) = (dataset("ABSEG_CAS_AUTO"), dataset("ABSEG_CAS_HUMAN")) else {
        println!("SKIP CAS datasets: set ABSEG_CAS_AUTO and ABSEG_CAS_HUMAN to corpus JSONL files to run");
        return true;
    };
    let auto = load_tokenized(auto).unwrap();
    let human = load_tokenized(human).unwrap();
    let sa = corpus_stats(&auto).unwrap();
    let sh = corpus_stats(&human).unwrap();
    let stats_ok = (sa.num_abstracts, sa.num_conclusion_sentences, sa.num_premise_sentences)
        == (697, 1267, 4755)
        && format!("{:.2}", sa.avg_sentences_per_abstract) == "8.64"
        && (sh.num_abstracts, sh.num_conclusion_sentences, sh.num_premise_sentences) == (196, 263, 1220)
        && format!("{:.2}", sh.avg_sentences_per_abstract) == "7.57";
    let provider = build_tfidf_provider(&human).unwrap();
    let out = greedycas_nn(&human, &GreedyConfig::default(), &provider).unwrap();
    let recs = AssignmentRecord::from_outcome(&human, &out).unwrap();
    let pk = evaluate_run(&human, &recs, &EvalOptions::default()).unwrap().pk;
    report(
        "CAS datasets",
        stats_ok && pk <= CAS_HUMAN_PK,
        format!("table-2 stats match: {stats_ok}; GreedyCAS-NN(12) Pk on CAS-human {pk:.4}"),
    )
}

#[test]
fn acceptance() {
    let results: BTreeMap<&str, bool> = [
        ("table1", table1()),
        ("nmi-oracle", nmi_oracle()),
        ("greedy-vs-exhaustive", greedy_vs_exhaustive()),
        ("metric-goldens", metric_goldens()),
        ("end-to-end", end_to_end()),
        ("correlation-signs", correlation_signs()),
        ("determinism", determinism()),
        ("cas-datasets", cas_datasets()),
    ]
    .into_iter()
    .collect();
    let failed: Vec<&str> = results.iter().filter(|(_, ok)| !**ok).map(|(k, _)| *k).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

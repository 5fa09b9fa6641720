use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use abseg::baselines::{run_baseline, Baseline, BaselineInputs, SplitMode, TextTilingParams};
use abseg::corpus::{corpus_stats, load_tokenized, TokenizedAbstract};
use abseg::embeddings::load_embeddings;
use abseg::eval::{compare_runs, evaluate_run, EvalOptions, Metric};
use abseg::greedy::{
    assignment_nmi, build_tfidf_provider, greedycas_base, greedycas_base_batched, greedycas_nn,
    read_assignment, write_assignment, AssignmentRecord, GreedyConfig, SimilarityBackend,
    SimilarityProvider,
};
use abseg::nmi::{counts_from_conclusions, top_contributing_pairs, word_boundary_sweep, NmiOptions};
use abseg::study::{batch_size_study, check_range};
use abseg::synthetic::{generate_raw, SyntheticConfig};
use anyhow::Context;
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::Failure;

const DEFAULT_CHUNK: usize = 48;
const DEFAULT_NN_BATCH: usize = 12;

type Outcome = Result<(), Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Segment(a) => segment(a),
        Command::Baseline(a) => baseline(a),
        Command::Eval(a) => eval(a),
        Command::Compare(a) => compare(a),
        Command::Sweep(a) => sweep(a),
        Command::Pairs(a) => pairs(a),
        Command::Correlate(a) => correlate(a),
        Command::Stats(a) => stats(a),
        Command::Synth(a) => synth(a),
        Command::Rerun(a) => rerun(a),
    }
}

fn load(path: &Path) -> Result<Vec<TokenizedAbstract>, Failure> {
    Ok(load_tokenized(path).with_context(|| format!("reading corpus {}", path.display()))?)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// A file, or stdout when no path is given.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Outcome {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value).context("serializing JSON")?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(path: Option<&Path>, rows: &[T]) -> Outcome {
    let mut w = csv::Writer::from_writer(sink(path)?);
    for r in rows {
        w.serialize(r).context("writing CSV")?;
    }
    w.flush()?;
    Ok(())
}

fn manifest_beside(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest(path: &Path, command: &Command, summary: serde_json::Value) -> Outcome {
    let manifest = json!({
        "tool": "abseg",
        "version": env!("CARGO_PKG_VERSION"),
        "config": command,
        "summary": summary,
    });
    write_json(Some(path), &manifest)
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn greedy_config(s: &SearchArgs, batch_size: usize, chunk_size: usize) -> GreedyConfig {
    GreedyConfig {
        epochs: s.epochs,
        batch_size,
        chunk_size,
        rng_seed: s.seed,
        similarity_backend: match s.backend {
            Backend::Tfidf => SimilarityBackend::LexicalTfidf,
            Backend::Embeddings => SimilarityBackend::ExternalEmbeddings,
        },
        renormalize_joint: s.renormalize_joint,
        ..GreedyConfig::default()
    }
}

fn provider(s: &SearchArgs, corpus: &[TokenizedAbstract]) -> Result<SimilarityProvider, Failure> {
    let p = match (&s.backend, &s.embeddings_file) {
        (Backend::Tfidf, _) => build_tfidf_provider(corpus)?,
        (Backend::Embeddings, Some(path)) => load_embeddings(path)
            .with_context(|| format!("reading embeddings {}", path.display()))?
            .into_provider()?,
        (Backend::Embeddings, None) => {
            return Err(usage("--backend embeddings needs --embeddings-file"))
        }
    };
    p.check_covers(corpus)?;
    Ok(p)
}

fn nmi_options(renormalize_joint: bool) -> NmiOptions {
    NmiOptions {
        renormalize_joint,
        ..NmiOptions::default()
    }
}

fn segment(mut a: SegmentArgs) -> Outcome {
    let corpus = load(&a.input)?;
    let n = corpus.len();
    if a.search.epochs == 0 {
        return Err(usage("--epochs must be at least 1"));
    }
    let chunk = a.search.chunk_size.unwrap_or(DEFAULT_CHUNK.min(n));
    let batch = a.batch_size.unwrap_or(match a.algo {
        Algo::Nn => DEFAULT_NN_BATCH.min(chunk),
        Algo::Base => n,
    });
    if batch == 0 {
        return Err(usage("--batch-size must be at least 1"));
    }
    a.search.chunk_size = Some(chunk);
    a.batch_size = Some(batch);
    let manifest = a.manifest.get_or_insert_with(|| manifest_beside(&a.output)).clone();

    let cfg = greedy_config(&a.search, batch, chunk);
    let outcome = match a.algo {
        Algo::Nn => {
            cfg.validate(n).map_err(usage)?;
            let p = provider(&a.search, &corpus)?;
            greedycas_nn(&corpus, &cfg, &p)?
        }
        Algo::Base if batch >= n => greedycas_base(&corpus, &cfg)?,
        Algo::Base => greedycas_base_batched(&corpus, &cfg)?,
    };
    let records = AssignmentRecord::from_outcome(&corpus, &outcome)?;
    let mut out = create(&a.output)?;
    write_assignment(&mut out, &records)?;
    out.flush()?;

    let summary = json!({
        "num_abstracts": n,
        "greedy_config": cfg,
        "corpus_nmi": assignment_nmi(&corpus, &outcome.assignment, &cfg.nmi_options())?,
        "batches": outcome.batches,
        "trace": outcome.trace,
    });
    write_manifest(&manifest, &Command::Segment(a), summary)
}

fn baseline(mut a: BaselineArgs) -> Outcome {
    let corpus = load(&a.input)?;
    let manifest = a.manifest.get_or_insert_with(|| manifest_beside(&a.output)).clone();
    let vectors = match &a.embeddings_file {
        Some(path) if a.baseline == BaselineKind::EmbedSim => Some(
            load_embeddings(path)
                .with_context(|| format!("reading embeddings {}", path.display()))?
                .sentence_vectors()?,
        ),
        _ => None,
    };
    if a.baseline == BaselineKind::EmbedSim && vectors.is_none() {
        return Err(usage("--baseline embed-sim needs --embeddings-file"));
    }
    let kind = match a.baseline {
        BaselineKind::RandomBase => Baseline::RandomBase,
        BaselineKind::RandomPlus => Baseline::RandomPlus,
        BaselineKind::Texttiling => Baseline::Texttiling,
        BaselineKind::EmbedSim => Baseline::EmbedSim,
    };
    let inputs = BaselineInputs {
        seed: a.seed,
        texttiling: TextTilingParams {
            block_size: a.block_size,
            smoothing_width: a.smoothing_width,
            depth_cutoff_multiplier: a.depth_cutoff,
        },
        sentence_vectors: vectors.as_ref(),
        split_mode: match a.split_mode {
            Split::Linear => SplitMode::Linear,
            Split::Cycled => SplitMode::Cycled,
        },
    };
    let records = run_baseline(&corpus, kind, &inputs)?;
    let mut out = create(&a.output)?;
    write_assignment(&mut out, &records)?;
    out.flush()?;
    write_manifest(&manifest, &Command::Baseline(a), json!({ "num_abstracts": corpus.len() }))
}

fn resolve_manifest(manifest: &mut Option<PathBuf>, output: Option<&PathBuf>) -> Option<PathBuf> {
    if manifest.is_none() {
        *manifest = output.map(|o| manifest_beside(o));
    }
    manifest.clone()
}

fn eval(mut a: EvalArgs) -> Outcome {
    if a.window_k == Some(0) {
        return Err(usage("--window-k must be at least 1"));
    }
    let corpus = load(&a.input)?;
    let hyps = read_assignment(&a.assignment)?;
    let report = evaluate_run(&corpus, &hyps, &EvalOptions { window_k: a.window_k })?;
    write_json(a.output.as_deref(), &report)?;
    if let Some(m) = resolve_manifest(&mut a.manifest, a.output.as_ref()) {
        let summary = json!({
            "pk": report.pk,
            "window_diff": report.window_diff,
            "jaccard": report.jaccard,
            "rouge_mean": report.rouge_mean,
        });
        write_manifest(&m, &Command::Eval(a), summary)?;
    }
    Ok(())
}

fn metric(m: MetricArg) -> Metric {
    match m {
        MetricArg::Pk => Metric::Pk,
        MetricArg::Wd => Metric::WindowDiff,
        MetricArg::Jaccard => Metric::Jaccard,
        MetricArg::Rouge => Metric::Rouge,
    }
}

fn compare(mut a: CompareArgs) -> Outcome {
    let corpus = load(&a.input)?;
    let opts = EvalOptions { window_k: a.window_k };
    let ra = evaluate_run(&corpus, &read_assignment(&a.a)?, &opts)?;
    let rb = evaluate_run(&corpus, &read_assignment(&a.b)?, &opts)?;
    let m = metric(a.metric);
    let test = compare_runs(&ra, &rb, m)?;
    let result = json!({
        "metric": m.name(),
        "mean_a": ra.metric(m),
        "mean_b": rb.metric(m),
        "wilcoxon": test,
    });
    write_json(a.output.as_deref(), &result)?;
    if let Some(path) = resolve_manifest(&mut a.manifest, a.output.as_ref()) {
        write_manifest(&path, &Command::Compare(a), result)?;
    }
    Ok(())
}

fn sweep(mut a: SweepArgs) -> Outcome {
    if a.sigma.is_nan() || a.sigma < 0.0 {
        return Err(usage("--sigma must be non-negative"));
    }
    let corpus = load(&a.input)?;
    let series = word_boundary_sweep(&corpus, &a.target, &nmi_options(a.renormalize_joint), a.sigma)?;
    write_csv(a.output.as_deref(), &series.points)?;
    if let Some(path) = resolve_manifest(&mut a.manifest, a.output.as_ref()) {
        let summary = json!({ "word_count": series.word_count, "points": series.points.len() });
        write_manifest(&path, &Command::Sweep(a), summary)?;
    }
    Ok(())
}

fn pairs(mut a: PairsArgs) -> Outcome {
    let corpus = load(&a.input)?;
    let conclusions: BTreeMap<String, BTreeSet<usize>> = match &a.assignment {
        Some(path) => read_assignment(path)?
            .into_iter()
            .map(|r| (r.id, r.conclusion_indices.into_iter().collect()))
            .collect(),
        None => {
            let missing: Vec<&str> = corpus
                .iter()
                .filter(|x| x.gold.is_none())
                .map(|x| x.id.as_str())
                .collect();
            if !missing.is_empty() {
                return Err(Failure::Data(anyhow::anyhow!(
                    "abstracts without gold labels: {}",
                    missing.join(", ")
                )));
            }
            corpus
                .iter()
                .map(|x| (x.id.clone(), x.gold.clone().unwrap_or_default()))
                .collect()
        }
    };
    let table = counts_from_conclusions(&corpus, &conclusions)?;
    let top = top_contributing_pairs(&table, a.top, &nmi_options(a.renormalize_joint))?;
    write_csv(a.output.as_deref(), &top)?;
    if let Some(path) = resolve_manifest(&mut a.manifest, a.output.as_ref()) {
        write_manifest(&path, &Command::Pairs(a), json!({ "pairs": top.len() }))?;
    }
    Ok(())
}

fn correlate(mut a: CorrelateArgs) -> Outcome {
    if a.search.epochs == 0 {
        return Err(usage("--epochs must be at least 1"));
    }
    if a.min_batch < 2 || a.min_batch > a.max_batch {
        return Err(usage(format!(
            "invalid batch-size range {}..={}",
            a.min_batch, a.max_batch
        )));
    }
    let corpus = load(&a.input)?;
    let chunk = a.search.chunk_size.unwrap_or(DEFAULT_CHUNK.min(corpus.len()));
    a.search.chunk_size = Some(chunk);
    let sizes = a.min_batch..=a.max_batch;
    check_range(&sizes, chunk).map_err(usage)?;
    let cfg = greedy_config(&a.search, a.max_batch, chunk);
    cfg.validate(corpus.len()).map_err(usage)?;
    let p = provider(&a.search, &corpus)?;
    let study = batch_size_study(&corpus, &cfg, &p, sizes, &EvalOptions { window_k: a.window_k })?;

    write_csv(Some(&a.output), &study.rows)?;
    let summary = json!({ "correlations": study.correlations, "notes": study.notes });
    write_json(a.summary.as_deref(), &summary)?;
    let path = a.manifest.get_or_insert_with(|| manifest_beside(&a.output)).clone();
    write_manifest(&path, &Command::Correlate(a), summary)?;
    if study.notes.is_empty() {
        Ok(())
    } else {
        let notes: Vec<String> = study.notes.iter().map(|(m, n)| format!("{m}: {n}")).collect();
        Err(Failure::Data(anyhow::anyhow!(
            "correlation undefined ({})",
            notes.join("; ")
        )))
    }
}

fn stats(a: StatsArgs) -> Outcome {
    let corpus = load(&a.input)?;
    write_json(a.output.as_deref(), &corpus_stats(&corpus)?)
}

fn synth(a: SynthArgs) -> Outcome {
    if a.min_sentences < 4 || a.min_sentences > a.max_sentences {
        return Err(usage("sentence range must satisfy 4 <= min <= max"));
    }
    if !(0.0..=1.0).contains(&a.noise) || a.topics == 0 {
        return Err(usage("--noise must lie in [0, 1] and --topics be positive"));
    }
    let cfg = SyntheticConfig {
        num_abstracts: a.num_abstracts,
        seed: a.seed,
        min_sentences: a.min_sentences,
        max_sentences: a.max_sentences,
        noise: a.noise,
        num_topics: a.topics,
        ..SyntheticConfig::default()
    };
    let mut out = create(&a.output)?;
    for r in generate_raw(&cfg) {
        serde_json::to_writer(&mut out, &r).context("serializing corpus")?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn rerun(a: RerunArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.manifest)
        .with_context(|| format!("reading {}", a.manifest.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text).context("parsing manifest")?;
    let config = value
        .get("config")
        .cloned()
        .ok_or_else(|| anyhow::anyhow!("manifest has no `config`"))?;
    let command: Command = serde_json::from_value(config).context("reading manifest config")?;
    run(command)
}

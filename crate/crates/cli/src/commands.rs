//! One function per subcommand. Each resolves flags against the optional
//! TOML overlay, does the work, then writes a manifest into --out-dir.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use alpha_embeddings::alpha::{
    embed_all, embedding_paths, read_embedding_text, reference_measure, write_embeddings,
};
use alpha_embeddings::corpus::{
    build_vocabulary, count_cooccurrences, preprocess, preprocess_documents, read_cooccurrences,
    read_vocabulary, write_cooccurrences, write_vocabulary, cooccurrence_sidecar_path,
    CooccurrenceMatrix, CooccurrenceMeta, PreprocessConfig, Weighting,
};
use alpha_embeddings::eval::{
    alpha_sweep, eval_analogy as score_analogy_dataset, eval_similarity, pca_project,
    read_analogy_dataset, read_similarity_dataset, write_pca_csv, write_sweep_csv,
    write_sweep_summary_json, AnalogyRanker, MethodScorer, SimilarityDataset, SweepGrid,
};
use alpha_embeddings::geometry::{
    Alpha, FisherSolver, ReferenceKind, ShiftMode,
};
use alpha_embeddings::measures::{rank_by_kappa, solve_analogy, SimilarityMethod};
use alpha_embeddings::trainer::{
    model_text_paths, read_glove_text, read_model_binary, read_model_text, train as train_model,
    write_model_binary, write_model_text, EmbeddingModel, TrainConfig,
};
use alpha_embeddings::util::sha256_hex;
use alpha_embeddings::Error;

use crate::config::Overlay;
use crate::manifest::ManifestBuilder;
use crate::{
    usage, AnalogyArgs, CliError, CooccurArgs, EmbedArgs, EvalAnalogyArgs, EvalSimArgs,
    GeometryArgs, ModelArgs, PcaArgs, RankMetric, SimArgs, StopWordArgs, SweepArgs, TrainArgs,
    VocabArgs,
};

fn data_io(context: String, e: std::io::Error) -> CliError {
    CliError::Data(Error::Io { context, source: e })
}

fn init_threads(threads: usize) -> Result<(), CliError> {
    if threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| data_io(format!("create {}", dir.display()), e))
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| data_io(format!("open {}", path.display()), e))
}

fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| data_io(format!("write {}", path.display()), e))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Stop-word policy shared by vocab and cooccur. Returns the config plus a
/// description and content hash for the manifest.
fn resolve_stop_words(
    args: &StopWordArgs,
    overlay: &Overlay,
) -> Result<(PreprocessConfig, serde_json::Value), CliError> {
    let keep = overlay.switch(args.keep_stop_words, "keep-stop-words")?;
    let file = overlay.opt(args.stop_words.clone(), "stop-words")?;
    if keep && file.is_some() {
        return Err(CliError::Usage(
            "--keep-stop-words and --stop-words are mutually exclusive".into(),
        ));
    }
    let (config, source) = if keep {
        (PreprocessConfig::no_stop_words(), "none".to_string())
    } else if let Some(path) = file {
        let text = String::from_utf8_lossy(&read_input(&path)?).into_owned();
        let words = text.split_whitespace().map(str::to_string);
        (
            PreprocessConfig::with_stop_words(words),
            path.display().to_string(),
        )
    } else {
        (PreprocessConfig::default(), "builtin".to_string())
    };
    let joined: Vec<&str> = config.stop_words.iter().map(String::as_str).collect();
    let hash = sha256_hex(joined.join("\n").as_bytes());
    let desc = serde_json::json!({ "source": source, "hash": hash });
    Ok((config, desc))
}

/// Loads a model from exactly one of --model, --model-binary, --glove,
/// hashing whatever files back the model into the manifest.
fn load_model(
    args: &ModelArgs,
    overlay: &Overlay,
    mb: &mut ManifestBuilder,
) -> Result<EmbeddingModel, CliError> {
    let stem = overlay.opt(args.model.clone(), "model")?;
    let binary = overlay.opt(args.model_binary.clone(), "model-binary")?;
    let glove = overlay.opt(args.glove.clone(), "glove")?;
    match (stem, binary, glove) {
        (Some(stem), None, None) => {
            let (u, v, bias) = model_text_paths(&stem);
            for p in [&u, &v, &bias] {
                mb.input(p)?;
            }
            Ok(read_model_text(&stem)?)
        }
        (None, Some(path), None) => {
            mb.input(&path)?;
            Ok(read_model_binary(&path)?)
        }
        (None, None, Some(path)) => {
            mb.input(&path)?;
            Ok(read_glove_text(&path)?)
        }
        _ => Err(CliError::Usage(
            "give exactly one of --model, --model-binary, --glove".into(),
        )),
    }
}

/// Loads counts when a path is configured; `needed_by` names the flag that
/// requires them when absent.
fn load_counts(
    path: Option<PathBuf>,
    needed_by: Option<&str>,
    mb: &mut ManifestBuilder,
) -> Result<Option<CooccurrenceMatrix>, CliError> {
    match path {
        Some(path) => {
            mb.input(&path)?;
            mb.input(&cooccurrence_sidecar_path(&path))?;
            let (matrix, _) = read_cooccurrences(&path)?;
            Ok(Some(matrix))
        }
        None => match needed_by {
            Some(what) => Err(CliError::Usage(format!("{what} requires --cooccur"))),
            None => Ok(None),
        },
    }
}

struct ResolvedGeometry {
    alpha: Alpha,
    reference: ReferenceKind,
    shift: ShiftMode,
    stable: Option<bool>,
    cooccur: Option<PathBuf>,
}

fn resolve_geometry(args: &GeometryArgs, overlay: &Overlay) -> Result<ResolvedGeometry, CliError> {
    let alpha = overlay.get(args.alpha.alpha, "alpha", Alpha::ONE)?;
    let reference = overlay.get(args.reference, "reference", ReferenceKind::Uniform0)?;
    let shift = overlay.get(args.shift, "shift", ShiftMode::U)?;
    let coefficients = overlay
        .get(args.coefficients, "coefficients", crate::CoefficientForm::Auto)?
        .as_option();
    let cooccur = overlay.opt(args.alpha.cooccur.clone(), "cooccur")?;
    Ok(ResolvedGeometry {
        alpha,
        reference,
        shift,
        stable: coefficients,
        cooccur,
    })
}

fn word_index(words: &[String]) -> HashMap<&str, usize> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect()
}

fn find_word(index: &HashMap<&str, usize>, word: &str) -> Result<usize, CliError> {
    index
        .get(word)
        .or_else(|| index.get(word.to_lowercase().as_str()))
        .copied()
        .ok_or_else(|| {
            CliError::Data(Error::Domain {
                what: "word",
                requirement: "present in the model vocabulary",
                got: word.to_string(),
            })
        })
}

pub fn vocab(args: &VocabArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let input: PathBuf = overlay
        .opt(args.input.clone(), "input")?
        .ok_or_else(|| usage("--input is required"))?;
    let min_count = overlay.get(args.min_count, "min-count", 1u64)?;
    let (pp, stop_desc) = resolve_stop_words(&args.stop, &overlay)?;

    let mut mb = ManifestBuilder::new("vocab");
    mb.config(&serde_json::json!({
        "min_count": min_count,
        "stop_words": stop_desc,
    }));
    let bytes = read_input(&input)?;
    mb.input_hash(&input, sha256_hex(&bytes));

    let tokens = preprocess(&bytes, &pp)?;
    let vocab = build_vocabulary(tokens, min_count)?;

    ensure_out_dir(&args.common.out_dir)?;
    let path = args.common.out_dir.join("vocab.tsv");
    write_vocabulary(&path, &vocab)?;
    mb.output(&path);
    mb.write(&args.common.out_dir)?;
    println!(
        "{} words ({} tokens, unknown slot at {})",
        vocab.n(),
        vocab.total_tokens(),
        vocab.unk_index()
    );
    Ok(())
}

pub fn cooccur(args: &CooccurArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let input: PathBuf = overlay
        .opt(args.input.clone(), "input")?
        .ok_or_else(|| usage("--input is required"))?;
    let vocab_path: PathBuf = overlay
        .opt(args.vocab.clone(), "vocab")?
        .ok_or_else(|| usage("--vocab is required"))?;
    let window = overlay.get(args.window, "window", 10usize)?;
    let weighting = overlay.get(args.weighting, "weighting", Weighting::Harmonic)?;
    let symmetric = if args.asymmetric {
        false
    } else {
        overlay.opt::<bool>(None, "symmetric")?.unwrap_or(true)
    };
    let (pp, stop_desc) = resolve_stop_words(&args.stop, &overlay)?;

    let mut mb = ManifestBuilder::new("cooccur");
    mb.config(&serde_json::json!({
        "window": window,
        "weighting": weighting.to_string(),
        "symmetric": symmetric,
        "stop_words": stop_desc,
    }));
    mb.input(&vocab_path)?;
    let bytes = read_input(&input)?;
    let corpus_hash = sha256_hex(&bytes);
    mb.input_hash(&input, corpus_hash.clone());

    let vocab = read_vocabulary(&vocab_path)?;
    let docs = preprocess_documents(&bytes, &pp)?;
    let matrix = count_cooccurrences(&docs, &vocab, window, weighting, symmetric)?;
    let meta = CooccurrenceMeta {
        n: vocab.n(),
        window,
        weighting,
        symmetric,
        corpus_hash,
    };

    ensure_out_dir(&args.common.out_dir)?;
    let path = args.common.out_dir.join("cooccur.bin");
    write_cooccurrences(&path, &matrix, &meta)?;
    mb.output(&path);
    mb.output(&cooccurrence_sidecar_path(&path));
    mb.write(&args.common.out_dir)?;
    println!(
        "{} entries over {} words, total mass {}",
        matrix.entries().len(),
        matrix.n(),
        matrix.total_mass()
    );
    Ok(())
}

fn train_cmd_config(args: &TrainArgs, overlay: &Overlay) -> Result<TrainConfig, CliError> {
    let defaults = TrainConfig::default();
    Ok(TrainConfig {
        d: overlay.get(args.dim, "dim", defaults.d)?,
        epochs: overlay.get(args.epochs, "epochs", defaults.epochs)?,
        learning_rate: overlay.get(args.learning_rate, "learning-rate", defaults.learning_rate)?,
        x_max: overlay.get(args.x_max, "x-max", defaults.x_max)?,
        exponent: overlay.get(args.exponent, "exponent", defaults.exponent)?,
        seed: overlay.get(args.seed, "seed", defaults.seed)?,
        init_scale: overlay.get(args.init_scale, "init-scale", defaults.init_scale)?,
        threads: overlay.get(args.common.threads, "threads", defaults.threads)?,
    })
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    let config = train_cmd_config(args, &overlay)?;
    init_threads(config.threads)?;
    let cooccur_path: PathBuf = overlay
        .opt(args.cooccur.clone(), "cooccur")?
        .ok_or_else(|| usage("--cooccur is required"))?;
    let vocab_path: PathBuf = overlay
        .opt(args.vocab.clone(), "vocab")?
        .ok_or_else(|| usage("--vocab is required"))?;
    let binary = overlay.switch(args.binary, "binary")?;

    let mut mb = ManifestBuilder::new("train");
    mb.seed(config.seed);
    mb.config(&config);
    mb.input(&cooccur_path)?;
    mb.input(&cooccurrence_sidecar_path(&cooccur_path))?;
    mb.input(&vocab_path)?;

    let vocab = read_vocabulary(&vocab_path)?;
    let (matrix, meta) = read_cooccurrences(&cooccur_path)?;
    if meta.n != vocab.n() {
        return Err(CliError::Data(Error::Domain {
            what: "co-occurrence matrix",
            requirement: "built against the same vocabulary",
            got: format!("n={} vs vocabulary {}", meta.n, vocab.n()),
        }));
    }

    let (model, trace) = train_model(&matrix, vocab.words().to_vec(), &config)?;

    ensure_out_dir(&args.common.out_dir)?;
    let stem = args.common.out_dir.join("model");
    write_model_text(&stem, &model)?;
    let (u_path, v_path, bias_path) = model_text_paths(&stem);
    for p in [&u_path, &v_path, &bias_path] {
        mb.output(p);
    }
    let mut loss_csv = String::from("epoch,loss\n");
    for (i, loss) in trace.iter().enumerate() {
        loss_csv.push_str(&format!("{},{}\n", i + 1, loss));
    }
    let loss_path = args.common.out_dir.join("loss.csv");
    write_output(&loss_path, &loss_csv)?;
    mb.output(&loss_path);
    if binary {
        let bin_path = args.common.out_dir.join("model.bin");
        write_model_binary(&bin_path, &model)?;
        mb.output(&bin_path);
    }
    mb.write(&args.common.out_dir)?;
    match trace.last() {
        Some(loss) => println!(
            "trained d={} for {} epochs, final loss {loss}",
            config.d, config.epochs
        ),
        None => println!("trained d={} for 0 epochs (initialization only)", config.d),
    }
    Ok(())
}

pub fn embed(args: &EmbedArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let geo = resolve_geometry(&args.geometry, &overlay)?;

    let mut mb = ManifestBuilder::new("embed");
    mb.config(&serde_json::json!({
        "alpha": geo.alpha.to_string(),
        "reference": geo.reference,
        "shift": geo.shift.to_string(),
        "coefficients": geo.stable,
    }));
    let model = load_model(&args.source, &overlay, &mut mb)?;
    let needed = (geo.reference == ReferenceKind::DataUnigramUd).then_some("reference 'ud'");
    let counts = load_counts(geo.cooccur.clone(), needed, &mut mb)?;
    let reference = reference_measure(&model, geo.reference, geo.shift, counts.as_ref())?;
    let set = embed_all(&model, &reference, geo.alpha, geo.stable)?;

    ensure_out_dir(&args.common.out_dir)?;
    let stem = args.common.out_dir.join("embeddings");
    write_embeddings(&stem, &set)?;
    let (txt, meta) = embedding_paths(&stem);
    mb.output(&txt);
    mb.output(&meta);
    mb.write(&args.common.out_dir)?;
    let summary = set.fisher_summary()?;
    println!(
        "embedded {} words at alpha={} (fisher rank {}/{})",
        set.words.len(),
        set.alpha,
        summary.effective_rank,
        summary.dim
    );
    Ok(())
}

fn read_pairs_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = String::from_utf8_lossy(&read_input(path)?).into_owned();
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(CliError::Data(Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                message: format!("expected two words, got {}", fields.len()),
            }));
        }
        pairs.push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok(pairs)
}

pub fn sim(args: &SimArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let method: SimilarityMethod = overlay
        .opt(args.method.clone(), "method")?
        .ok_or_else(|| usage("--method is required"))?;
    let alpha = overlay.opt(args.alpha.alpha, "alpha")?;
    let cooccur = overlay.opt(args.alpha.cooccur.clone(), "cooccur")?;
    let pairs_path = overlay.opt(args.pairs.clone(), "pairs")?;
    if args.words.len() == 1 {
        return Err(CliError::Usage(
            "give two words, or none with --pairs".into(),
        ));
    }

    let mut mb = ManifestBuilder::new("sim");
    mb.config(&serde_json::json!({
        "method": method.to_string(),
        "alpha": alpha.map(|a| a.to_string()),
    }));
    let model = load_model(&args.source, &overlay, &mut mb)?;
    let needed = method.needs_counts().then_some("this method");
    let counts = load_counts(cooccur, needed, &mut mb)?;

    let mut pairs: Vec<(String, String)> = Vec::new();
    if args.words.len() == 2 {
        pairs.push((args.words[0].clone(), args.words[1].clone()));
    }
    if let Some(path) = &pairs_path {
        mb.input(path)?;
        pairs.extend(read_pairs_file(path)?);
    }
    if pairs.is_empty() {
        return Err(CliError::Usage(
            "nothing to score: give a word pair or --pairs".into(),
        ));
    }

    let scorer = MethodScorer::new(&method, &model, counts.as_ref(), alpha)?;
    let index = word_index(&model.words);
    let mut csv = String::from("word_a,word_b,similarity\n");
    for (a, b) in &pairs {
        let ia = find_word(&index, a)?;
        let ib = find_word(&index, b)?;
        let score = scorer.score(ia, ib)?;
        println!("{a}\t{b}\t{score}");
        csv.push_str(&format!("{},{},{}\n", csv_field(a), csv_field(b), score));
    }

    ensure_out_dir(&args.common.out_dir)?;
    let path = args.common.out_dir.join("similarities.csv");
    write_output(&path, &csv)?;
    mb.output(&path);
    mb.write(&args.common.out_dir)?;
    Ok(())
}

pub fn analogy(args: &AnalogyArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let geo = resolve_geometry(&args.geometry, &overlay)?;
    let top = overlay.get(args.top, "top", 10usize)?;
    let metric = overlay.get(args.metric, "metric", RankMetric::Fisher)?;
    let include_queries = overlay.switch(args.include_queries, "include-queries")?;

    let mut mb = ManifestBuilder::new("analogy");
    mb.config(&serde_json::json!({
        "alpha": geo.alpha.to_string(),
        "reference": geo.reference,
        "shift": geo.shift.to_string(),
        "metric": format!("{metric:?}"),
        "include_queries": include_queries,
        "top": top,
    }));
    let model = load_model(&args.source, &overlay, &mut mb)?;
    let needed = (geo.reference == ReferenceKind::DataUnigramUd).then_some("reference 'ud'");
    let counts = load_counts(geo.cooccur.clone(), needed, &mut mb)?;
    let reference = reference_measure(&model, geo.reference, geo.shift, counts.as_ref())?;
    let set = embed_all(&model, &reference, geo.alpha, geo.stable)?;

    let index = word_index(&set.words);
    let a = find_word(&index, &args.words[0])?;
    let b = find_word(&index, &args.words[1])?;
    let c = find_word(&index, &args.words[2])?;
    let slots = [Some(a), Some(b), Some(c), None];
    let empty = BTreeSet::new();
    let exclude = include_queries.then_some(&empty);
    let ranked = match metric {
        RankMetric::Fisher => {
            let solver = FisherSolver::new(&set.fisher)?;
            solve_analogy(&set, &solver, slots, exclude)?
        }
        RankMetric::Identity => rank_by_kappa(&set.w, None, slots, exclude)?,
    };

    ensure_out_dir(&args.common.out_dir)?;
    let mut csv = String::from("rank,word,kappa\n");
    for (rank, (idx, kappa)) in ranked.iter().enumerate() {
        let word = &set.words[*idx];
        if rank < top {
            println!("{}. {word}  {kappa}", rank + 1);
        }
        csv.push_str(&format!("{},{},{}\n", rank + 1, csv_field(word), kappa));
    }
    let path = args.common.out_dir.join("candidates.csv");
    write_output(&path, &csv)?;
    mb.output(&path);
    mb.write(&args.common.out_dir)?;
    Ok(())
}

fn load_similarity_datasets(
    paths: &[PathBuf],
    mb: &mut ManifestBuilder,
) -> Result<Vec<SimilarityDataset>, CliError> {
    let mut datasets = Vec::new();
    for path in paths {
        mb.input(path)?;
        datasets.push(read_similarity_dataset(path, &dataset_name(path))?);
    }
    Ok(datasets)
}

pub fn eval_sim(args: &EvalSimArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let methods = overlay.list(args.methods.clone(), "method")?;
    let dataset_paths = overlay.list(args.datasets.clone(), "dataset")?;
    if methods.is_empty() {
        return Err(CliError::Usage("at least one --method is required".into()));
    }
    if dataset_paths.is_empty() {
        return Err(CliError::Usage("at least one --dataset is required".into()));
    }
    let alpha = overlay.opt(args.alpha.alpha, "alpha")?;
    let cooccur = overlay.opt(args.alpha.cooccur.clone(), "cooccur")?;

    let mut mb = ManifestBuilder::new("eval-sim");
    mb.config(&serde_json::json!({
        "methods": methods.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "alpha": alpha.map(|a| a.to_string()),
    }));
    let model = load_model(&args.source, &overlay, &mut mb)?;
    let needed = methods
        .iter()
        .any(SimilarityMethod::needs_counts)
        .then_some("a requested method");
    let counts = load_counts(cooccur, needed, &mut mb)?;
    let datasets = load_similarity_datasets(&dataset_paths, &mut mb)?;

    let mut reports = Vec::new();
    for method in &methods {
        let scorer = MethodScorer::new(method, &model, counts.as_ref(), alpha)?;
        for dataset in &datasets {
            let report = eval_similarity(&scorer, dataset)?;
            println!(
                "{}\t{}\trho={:.4} ({} pairs, {} skipped)",
                report.method, report.dataset, report.correlation, report.evaluated,
                report.skipped
            );
            reports.push(report);
        }
    }

    ensure_out_dir(&args.common.out_dir)?;
    let path = args.common.out_dir.join("eval_sim.json");
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    write_output(&path, &json)?;
    mb.output(&path);
    mb.write(&args.common.out_dir)?;
    Ok(())
}

pub fn eval_analogy(args: &EvalAnalogyArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let geo = resolve_geometry(&args.geometry, &overlay)?;
    let metric = overlay.get(args.metric, "metric", RankMetric::Fisher)?;
    let dataset_path: PathBuf = overlay
        .opt(args.dataset.clone(), "dataset")?
        .ok_or_else(|| usage("--dataset is required"))?;

    let mut mb = ManifestBuilder::new("eval-analogy");
    mb.config(&serde_json::json!({
        "alpha": geo.alpha.to_string(),
        "reference": geo.reference,
        "shift": geo.shift.to_string(),
        "metric": format!("{metric:?}"),
    }));
    let model = load_model(&args.source, &overlay, &mut mb)?;
    let needed = (geo.reference == ReferenceKind::DataUnigramUd).then_some("reference 'ud'");
    let counts = load_counts(geo.cooccur.clone(), needed, &mut mb)?;
    mb.input(&dataset_path)?;
    let dataset = read_analogy_dataset(&dataset_path)?;

    let reference = reference_measure(&model, geo.reference, geo.shift, counts.as_ref())?;
    let set = embed_all(&model, &reference, geo.alpha, geo.stable)?;
    let solver = FisherSolver::new(&set.fisher)?;
    let ranker = match metric {
        RankMetric::Fisher => AnalogyRanker::from_embeddings(&set, &solver),
        RankMetric::Identity => AnalogyRanker::from_vectors(&set.w, &set.words),
    };
    let report = score_analogy_dataset(&ranker, &dataset)?;
    for section in report.sections.iter().chain(std::iter::once(&report.total)) {
        match section.accuracy {
            Some(acc) => println!(
                "{}: {}/{} correct ({:.2}%), {} skipped",
                section.name,
                section.correct,
                section.evaluated,
                100.0 * acc,
                section.skipped
            ),
            None => println!("{}: nothing evaluated ({} skipped)", section.name, section.skipped),
        }
    }

    ensure_out_dir(&args.common.out_dir)?;
    let path = args.common.out_dir.join("eval_analogy.json");
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_output(&path, &json)?;
    mb.output(&path);
    mb.write(&args.common.out_dir)?;
    Ok(())
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let methods = overlay.list(args.methods.clone(), "method")?;
    let dataset_paths = overlay.list(args.datasets.clone(), "dataset")?;
    if methods.is_empty() {
        return Err(CliError::Usage("at least one --method is required".into()));
    }
    if dataset_paths.is_empty() {
        return Err(CliError::Usage("at least one --dataset is required".into()));
    }
    let grid = SweepGrid {
        min: overlay.get(args.alpha_min, "alpha-min", -5.0)?,
        max: overlay.get(args.alpha_max, "alpha-max", 5.0)?,
        step: overlay.get(args.alpha_step, "alpha-step", 0.2)?,
    };
    grid.alphas().map_err(usage)?;
    let cooccur = overlay.opt(args.cooccur.clone(), "cooccur")?;

    let mut mb = ManifestBuilder::new("sweep");
    mb.config(&serde_json::json!({
        "methods": methods.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "grid": grid,
    }));
    let model = load_model(&args.source, &overlay, &mut mb)?;
    let needed = methods
        .iter()
        .any(SimilarityMethod::needs_counts)
        .then_some("a requested method");
    let counts = load_counts(cooccur, needed, &mut mb)?;
    let datasets = load_similarity_datasets(&dataset_paths, &mut mb)?;

    let result = alpha_sweep(&methods, &datasets, &grid, &model, counts.as_ref())?;
    for curve in &result.curves {
        println!(
            "{}\t{}\tbest rho={:.4} at alpha={}",
            curve.method, curve.dataset, curve.best_value, curve.best_alpha
        );
    }

    ensure_out_dir(&args.common.out_dir)?;
    let csv_path = args.common.out_dir.join("sweep.csv");
    write_sweep_csv(&csv_path, &result)?;
    mb.output(&csv_path);
    let json_path = args.common.out_dir.join("sweep_summary.json");
    write_sweep_summary_json(&json_path, &result)?;
    mb.output(&json_path);
    mb.write(&args.common.out_dir)?;
    Ok(())
}

pub fn pca(args: &PcaArgs) -> Result<(), CliError> {
    let overlay = Overlay::load(args.common.config.as_deref())?;
    init_threads(overlay.get(args.common.threads, "threads", 1)?)?;
    let embeddings: PathBuf = overlay
        .opt(args.embeddings.clone(), "embeddings")?
        .ok_or_else(|| usage("--embeddings is required"))?;
    let words_arg = overlay.opt(args.words.clone(), "words")?;
    let words_file = overlay.opt(args.words_file.clone(), "words-file")?;

    let mut mb = ManifestBuilder::new("pca");
    mb.input(&embeddings)?;
    let (all_words, rows) = read_embedding_text(&embeddings)?;

    let mut requested: Vec<String> = Vec::new();
    if let Some(list) = &words_arg {
        requested.extend(list.split(',').map(|w| w.trim().to_string()));
    }
    if let Some(path) = &words_file {
        mb.input(path)?;
        let text = String::from_utf8_lossy(&read_input(path)?).into_owned();
        requested.extend(text.split_whitespace().map(str::to_string));
    }
    mb.config(&serde_json::json!({ "words": requested }));

    let index = word_index(&all_words);
    let select: Vec<usize> = if requested.is_empty() {
        (0..all_words.len()).collect()
    } else {
        requested
            .iter()
            .map(|w| find_word(&index, w))
            .collect::<Result<_, _>>()?
    };
    let selected_words: Vec<String> = select.iter().map(|&i| all_words[i].clone()).collect();
    let projection = pca_project(&rows, &select)?;

    ensure_out_dir(&args.common.out_dir)?;
    let path = args.common.out_dir.join("pca.csv");
    write_pca_csv(&path, &selected_words, &projection)?;
    mb.output(&path);
    mb.write(&args.common.out_dir)?;
    println!(
        "projected {} words (component variances {} and {})",
        selected_words.len(),
        projection.eigenvalues[0],
        projection.eigenvalues[1]
    );
    Ok(())
}

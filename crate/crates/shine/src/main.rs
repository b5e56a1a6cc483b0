//! Command-line front end: synthetic data generation, lexicon building,
//! sentiment extraction, training, prediction, recommendation, and the
//! evaluation harness.
//!
//! Every command prints a one-line JSON summary (inputs hash, seed, elapsed
//! seconds) to stdout and writes its primary artifact to the configured path.
//! Exit codes: 1 usage/config, 2 data, 3 numeric divergence.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};

use shine::config::{AggregationKind, SimilarityKind, TrainConfig};
use shine::error::{Result, ShineError};
use shine::eval::{
    evaluate_score_file, run_link_prediction, run_node_recommendation, write_report_tsv, SplitKind,
};
use shine::graph::{load_hetero_graph, split_links, HeteroGraph};
use shine::model::serialize::{load_model, save_model};
use shine::model::{train, Polarity, ShineModel};
use shine::sentiext::{build_lexicon, emit_signed_edges, read_corpus, EmoticonMap, Lexicon};
use shine::synth::{generate, write_to_dir, SyntheticSpec};

#[derive(Parser)]
#[command(
    name = "shine",
    about = "Signed heterogeneous network embedding: train, predict, recommend, evaluate",
    version
)]
struct Cli {
    /// Worker threads (reserved; execution is single-threaded and
    /// deterministic regardless of this value).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-sign synthetic heterogeneous graph.
    GenSynth(GenSynthArgs),
    /// Build a normalized sentiment lexicon from a weakly labeled corpus.
    BuildLexicon(BuildLexiconArgs),
    /// Score entity mentions and emit signed (user, entity) edges.
    ExtractSentiment(ExtractSentimentArgs),
    /// Train a model and write it with its training-loss curve.
    Train(TrainArgs),
    /// Score node pairs with a trained model.
    Predict(PredictArgs),
    /// Rank liked or disliked candidate nodes for one user.
    Recommend(RecommendArgs),
    /// Run the link-prediction or node-recommendation experiment harness.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Sentiment TSV: i <TAB> j <TAB> +1|-1
    #[arg(long)]
    sentiment: PathBuf,
    /// Social TSV: i <TAB> j
    #[arg(long)]
    social: Option<PathBuf>,
    /// Profile TSV: i <TAB> attribute <TAB> value
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Collapse repeated sentiment pairs by the sign of their sum instead of
    /// failing on conflicts.
    #[arg(long)]
    aggregate_duplicates: bool,
}

impl GraphArgs {
    fn load(&self) -> Result<HeteroGraph> {
        load_hetero_graph(
            &self.sentiment,
            self.social.as_deref(),
            self.profile.as_deref(),
            self.aggregate_duplicates,
        )
    }

    fn paths(&self) -> Vec<&Path> {
        let mut v = vec![self.sentiment.as_path()];
        v.extend(self.social.as_deref());
        v.extend(self.profile.as_deref());
        v
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregationArg {
    Summation,
    MaxPooling,
    Concatenation,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityArg {
    InnerProduct,
    Euclidean,
    LogisticRegression,
}

/// Hyperparameter and architecture overrides; a flag beats the config file.
#[derive(Args)]
struct ConfigArgs {
    /// JSON config file; omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    lambda3: Option<f64>,
    #[arg(long)]
    lambda4: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    convergence_tol: Option<f64>,
    #[arg(long)]
    hidden_dim: Option<usize>,
    #[arg(long)]
    embedding_dim: Option<usize>,
    #[arg(long, value_enum)]
    aggregation: Option<AggregationArg>,
    #[arg(long, value_enum)]
    similarity: Option<SimilarityArg>,
    /// Use distinct source/target autoencoders.
    #[arg(long)]
    asymmetric: bool,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<TrainConfig> {
        let mut cfg = match &self.config {
            Some(path) => TrainConfig::from_json(&fs::read_to_string(path)?)?,
            None => TrainConfig::default(),
        };
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            };
        }
        set!(alpha);
        set!(lambda1);
        set!(lambda2);
        set!(lambda3);
        set!(lambda4);
        set!(learning_rate);
        set!(batch_size);
        set!(max_epochs);
        set!(convergence_tol);
        set!(hidden_dim);
        set!(embedding_dim);
        set!(seed);
        if let Some(g) = self.aggregation {
            cfg.aggregation = match g {
                AggregationArg::Summation => AggregationKind::Summation,
                AggregationArg::MaxPooling => AggregationKind::MaxPooling,
                AggregationArg::Concatenation => AggregationKind::Concatenation,
            };
        }
        if let Some(f) = self.similarity {
            cfg.similarity = match f {
                SimilarityArg::InnerProduct => SimilarityKind::InnerProduct,
                SimilarityArg::Euclidean => SimilarityKind::Euclidean,
                SimilarityArg::LogisticRegression => SimilarityKind::LogisticRegression,
            };
        }
        if self.asymmetric {
            cfg.asymmetric = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct GenSynthArgs {
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    #[arg(long, default_value_t = 2)]
    communities: usize,
    #[arg(long, default_value_t = 0.05)]
    intra_positive_prob: f64,
    #[arg(long, default_value_t = 0.05)]
    inter_negative_prob: f64,
    #[arg(long, default_value_t = 0.9)]
    social_homophily: f64,
    #[arg(long, default_value_t = 0.9)]
    profile_informativeness: f64,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct BuildLexiconArgs {
    /// JSON-lines corpus, one tweet per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Emoticon class TSV: emoticon <TAB> pos|neg
    #[arg(long)]
    emoticons: PathBuf,
    #[arg(long, default_value_t = 1)]
    min_freq: usize,
    #[arg(long, default_value_t = usize::MAX)]
    max_freq: usize,
    #[arg(long, default_value_t = 1.0)]
    smoothing: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractSentimentArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Lexicon file produced by build-lexicon.
    #[arg(long)]
    lexicon: PathBuf,
    /// Minimum absolute mention score to emit an edge (inclusive).
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    /// Output TSV: user <TAB> entity <TAB> +1|-1
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// Model output path; also writes <out>.losses.tsv and <out>.nodes.tsv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    /// Pairs TSV: i <TAB> j (external node ids)
    #[arg(long)]
    pairs: PathBuf,
    /// Output TSV: i <TAB> j <TAB> score <TAB> sign
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RecommendArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    graph: GraphArgs,
    /// External id of the user to recommend for.
    #[arg(long)]
    user: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// "positive" ranks liked candidates, "negative" disliked ones.
    #[arg(long, default_value = "positive")]
    polarity: String,
    /// Keep candidates the user already has sentiment links to.
    #[arg(long)]
    include_observed: bool,
    /// Output TSV: rank <TAB> node <TAB> score
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    config: ConfigArgs,
    /// "link-prediction" or "node-recommendation"
    #[arg(long)]
    task: String,
    /// "standard" or "cold-start" (link prediction only)
    #[arg(long, default_value = "standard")]
    split: String,
    /// Comma-separated training fractions for link prediction.
    #[arg(long, default_value = "1.0")]
    fractions: String,
    /// Comma-separated K values for node recommendation.
    #[arg(long, default_value = "10")]
    k_values: String,
    /// Score an external prediction file (TSV i j score) on the standard
    /// balanced test split instead of training a model.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Report JSON path; also writes <out>.tsv.
    #[arg(long)]
    out: PathBuf,
}

fn hash_inputs(paths: &[&Path]) -> Result<String> {
    let mut hasher = Sha256::new();
    for p in paths {
        hasher.update(p.display().to_string().as_bytes());
        hasher.update([0u8]);
        hasher.update(fs::read(p)?);
        hasher.update([0u8]);
    }
    let d = hasher.finalize();
    Ok(d.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

fn summary(command: &str, inputs_hash: &str, seed: u64, started: Instant, extra: serde_json::Value) {
    let mut obj = json!({
        "command": command,
        "inputs_hash": inputs_hash,
        "seed": seed,
        "elapsed_seconds": started.elapsed().as_secs_f64(),
    });
    if let (Some(map), Some(em)) = (obj.as_object_mut(), extra.as_object()) {
        for (k, v) in em {
            map.insert(k.clone(), v.clone());
        }
    }
    println!("{obj}");
}

fn check_node_table(model_hash: &str, g: &HeteroGraph) -> Result<()> {
    if model_hash != g.nodes.hash() {
        return Err(ShineError::ModelFormat(
            "model was trained against a different node table".into(),
        ));
    }
    Ok(())
}

fn load_model_file(path: &Path) -> Result<(ShineModel, String)> {
    load_model(BufReader::new(File::open(path)?))
}

fn cmd_gen_synth(a: &GenSynthArgs, started: Instant) -> Result<()> {
    let spec = SyntheticSpec {
        n_nodes: a.nodes,
        n_communities: a.communities,
        intra_positive_prob: a.intra_positive_prob,
        inter_negative_prob: a.inter_negative_prob,
        social_homophily: a.social_homophily,
        profile_informativeness: a.profile_informativeness,
        noise: a.noise,
        seed: a.seed,
    };
    let data = generate(&spec)?;
    write_to_dir(&data, &a.out_dir)?;
    summary(
        "gen-synth",
        &hash_inputs(&[])?,
        a.seed,
        started,
        json!({
            "out_dir": a.out_dir,
            "nodes": data.graph.n_nodes(),
            "sentiment_links": data.graph.sentiment.n_edges(),
        }),
    );
    Ok(())
}

fn cmd_build_lexicon(a: &BuildLexiconArgs, started: Instant) -> Result<()> {
    let corpus = read_corpus(BufReader::new(File::open(&a.corpus)?))?;
    let map = EmoticonMap::from_reader(BufReader::new(File::open(&a.emoticons)?))?;
    let lexicon = build_lexicon(&corpus, &map, a.min_freq, a.max_freq, a.smoothing)?;
    lexicon.write(BufWriter::new(File::create(&a.out)?))?;
    summary(
        "build-lexicon",
        &hash_inputs(&[&a.corpus, &a.emoticons])?,
        0,
        started,
        json!({ "out": a.out, "words": lexicon.scores.len() }),
    );
    Ok(())
}

fn cmd_extract_sentiment(a: &ExtractSentimentArgs, started: Instant) -> Result<()> {
    let corpus = read_corpus(BufReader::new(File::open(&a.corpus)?))?;
    let lexicon = Lexicon::read(BufReader::new(File::open(&a.lexicon)?))?;
    let edges = emit_signed_edges(&corpus, &lexicon, a.threshold)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    for (user, entity, sign) in &edges {
        writeln!(w, "{user}\t{entity}\t{}", if *sign > 0 { "+1" } else { "-1" })?;
    }
    w.flush()?;
    summary(
        "extract-sentiment",
        &hash_inputs(&[&a.corpus, &a.lexicon])?,
        0,
        started,
        json!({ "out": a.out, "edges": edges.len() }),
    );
    Ok(())
}

fn cmd_train(a: &TrainArgs, started: Instant) -> Result<()> {
    let cfg = a.config.resolve()?;
    let g = a.graph.load()?;
    let outcome = train(&g, &cfg)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    save_model(&outcome.model, &g.nodes.hash(), &mut w)?;
    w.flush()?;

    let losses_path = suffixed(&a.out, ".losses.tsv");
    let mut w = BufWriter::new(File::create(&losses_path)?);
    writeln!(w, "epoch\tmean_loss")?;
    for (epoch, loss) in outcome.epoch_losses.iter().enumerate() {
        writeln!(w, "{}\t{}", epoch + 1, loss)?;
    }
    w.flush()?;

    let nodes_path = suffixed(&a.out, ".nodes.tsv");
    g.nodes.write_sidecar(BufWriter::new(File::create(&nodes_path)?))?;

    summary(
        "train",
        &hash_inputs(&a.graph.paths())?,
        cfg.seed,
        started,
        json!({
            "out": a.out,
            "epochs_run": outcome.epoch_losses.len(),
            "final_loss": outcome.epoch_losses.last(),
            "config_fingerprint": cfg.fingerprint(),
        }),
    );
    Ok(())
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_predict(a: &PredictArgs, started: Instant) -> Result<()> {
    let (model, hash) = load_model_file(&a.model)?;
    let g = a.graph.load()?;
    check_node_table(&hash, &g)?;
    let table = model.embed_all(&g)?;
    let content = fs::read_to_string(&a.pairs)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    let mut n_pairs = 0u64;
    for (lineno, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() < 2 {
            return Err(ShineError::MalformedLine {
                path: a.pairs.display().to_string(),
                line: lineno + 1,
                reason: "expected i<TAB>j".into(),
            });
        }
        let i = g.nodes.get(fields[0]).ok_or_else(|| ShineError::UnknownNode {
            id: fields[0].to_string(),
        })?;
        let j = g.nodes.get(fields[1]).ok_or_else(|| ShineError::UnknownNode {
            id: fields[1].to_string(),
        })?;
        let score = model.similarity(
            &table.source.row(i as usize),
            &table.target.row(j as usize),
        )?;
        let sign = if score >= 0.0 { "+1" } else { "-1" };
        writeln!(w, "{}\t{}\t{}\t{}", fields[0], fields[1], score, sign)?;
        n_pairs += 1;
    }
    w.flush()?;
    let mut inputs = a.graph.paths();
    inputs.push(&a.model);
    inputs.push(&a.pairs);
    summary(
        "predict",
        &hash_inputs(&inputs)?,
        model.config.seed,
        started,
        json!({ "out": a.out, "pairs": n_pairs }),
    );
    Ok(())
}

fn cmd_recommend(a: &RecommendArgs, started: Instant) -> Result<()> {
    let (model, hash) = load_model_file(&a.model)?;
    let g = a.graph.load()?;
    check_node_table(&hash, &g)?;
    let polarity = match a.polarity.as_str() {
        "positive" => Polarity::Positive,
        "negative" => Polarity::Negative,
        other => {
            return Err(ShineError::InvalidConfig(format!(
                "polarity '{other}' not in {{positive, negative}}"
            )))
        }
    };
    let user = g.nodes.get(&a.user).ok_or_else(|| ShineError::UnknownNode {
        id: a.user.clone(),
    })?;
    let rec = model.recommend(&g, user, a.k, polarity, !a.include_observed)?;
    let mut w = BufWriter::new(File::create(&a.out)?);
    for (rank, (j, score)) in rec.items.iter().enumerate() {
        writeln!(w, "{}\t{}\t{}", rank + 1, g.nodes.external_id(*j), score)?;
    }
    w.flush()?;
    let mut inputs = a.graph.paths();
    inputs.push(&a.model);
    summary(
        "recommend",
        &hash_inputs(&inputs)?,
        model.config.seed,
        started,
        json!({ "out": a.out, "returned": rec.items.len(), "short_list": rec.short_list }),
    );
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| ShineError::InvalidConfig(format!("bad {what} value '{s}'")))
        })
        .collect()
}

fn cmd_evaluate(a: &EvaluateArgs, started: Instant) -> Result<()> {
    let cfg = a.config.resolve()?;
    let g = a.graph.load()?;

    let report_json = if let Some(scores) = &a.scores {
        if a.task != "link-prediction" {
            return Err(ShineError::InvalidConfig(
                "--scores only applies to link-prediction".into(),
            ));
        }
        let (_, test) = split_links(&g, 0.2, true, cfg.seed)?;
        let metrics = evaluate_score_file(&g, &test, scores)?;
        serde_json::to_value(&metrics)?
    } else {
        let reports = match a.task.as_str() {
            "link-prediction" => {
                let split = match a.split.as_str() {
                    "standard" => SplitKind::Standard,
                    "cold-start" => SplitKind::ColdStart,
                    other => {
                        return Err(ShineError::InvalidConfig(format!(
                            "split '{other}' not in {{standard, cold-start}}"
                        )))
                    }
                };
                let fractions: Vec<f64> = parse_list(&a.fractions, "fraction")?;
                run_link_prediction(&g, &cfg, split, &fractions)?
            }
            "node-recommendation" => {
                let ks: Vec<usize> = parse_list(&a.k_values, "K")?;
                run_node_recommendation(&g, &cfg, &ks)?
            }
            other => {
                return Err(ShineError::InvalidConfig(format!(
                    "task '{other}' not in {{link-prediction, node-recommendation}}"
                )))
            }
        };
        let tsv_path = suffixed(&a.out, ".tsv");
        let mut w = BufWriter::new(File::create(&tsv_path)?);
        write_report_tsv(&reports, &mut w)?;
        w.flush()?;
        serde_json::to_value(&reports)?
    };

    let mut w = BufWriter::new(File::create(&a.out)?);
    serde_json::to_writer_pretty(&mut w, &report_json)?;
    writeln!(w)?;
    w.flush()?;

    let mut inputs = a.graph.paths();
    inputs.extend(a.scores.as_deref());
    summary(
        "evaluate",
        &hash_inputs(&inputs)?,
        cfg.seed,
        started,
        json!({ "out": a.out, "task": a.task }),
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads == 0 {
        return Err(ShineError::InvalidConfig("threads must be >= 1".into()));
    }
    let started = Instant::now();
    match &cli.command {
        Command::GenSynth(a) => cmd_gen_synth(a, started),
        Command::BuildLexicon(a) => cmd_build_lexicon(a, started),
        Command::ExtractSentiment(a) => cmd_extract_sentiment(a, started),
        Command::Train(a) => cmd_train(a, started),
        Command::Predict(a) => cmd_predict(a, started),
        Command::Recommend(a) => cmd_recommend(a, started),
        Command::Evaluate(a) => cmd_evaluate(a, started),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes; bad usage exits 1
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(1);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

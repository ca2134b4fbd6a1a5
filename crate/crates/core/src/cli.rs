//! The `wic` command line.
//!
//! Every subcommand accepts `--config FILE` with `key=value` lines; keys are
//! flag names (`batch_size` and `batch-size` both work) and explicit flags
//! override file values. The resolved configuration is echoed as one JSON
//! line on standard error before any work starts.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;

use crate::baselines::{type_vector_predict, TypeVectorTable};
use crate::corpus::{
    build_vocabulary, count_tokens, extract_corpus, instances_from_tsv, instances_to_tsv, parse_alignments,
    prune_rare, read_parallel, symmetrize, AlignmentSet, ParallelSentencePair, TranslationInstance, Vocabulary,
    DEFAULT_MIN_LEN, DEFAULT_TARGET_DROP_TOP_K, DEFAULT_VOCAB_CAP,
};
use crate::model::{EncoderKind, ModelConfig, PeepholeMode};
use crate::tasks::{
    build_candidate_table, evaluate_supersense, export_translation_features, features_to_tsv, labeled_instances,
    lexsub_predict_all, lexsub_score, parse_gold, parse_items, parse_queries, parse_supersense, AlignmentCounts,
    CandidateTable, TagInventory, DEFAULT_WINDOW,
};
use crate::train::{
    gradient_check, init_model, load_checkpoint, perplexity, save_checkpoint, train, transfer_model, AdamConfig,
    Checkpoint, GradCheckConfig, LabelSpace, TrainConfig,
};

#[derive(Debug, Parser)]
#[command(name = "wic", version, about = "Word-in-context representations from lexical translation")]
struct Cli {
    /// key=value file of flag defaults; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads; 1 runs everything sequentially. Defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Build source and target vocabularies from a parallel corpus.
    #[command(args_override_self = true)]
    Vocab(VocabArgs),
    /// Extract translation instances from a corpus and its alignments.
    #[command(args_override_self = true)]
    Extract(ExtractArgs),
    /// Train the lexical translation model.
    #[command(args_override_self = true)]
    Pretrain(PretrainArgs),
    /// Fine-tune on supersense tagging, from a checkpoint or from scratch.
    #[command(args_override_self = true)]
    FinetuneSupersense(FinetuneArgs),
    /// Score a supersense tagger.
    #[command(args_override_self = true)]
    EvalSupersense(EvalSupersenseArgs),
    /// Predict substitutes and optionally score them.
    #[command(args_override_self = true)]
    Lexsub(LexsubArgs),
    /// Build a substitution candidate table from aligned text.
    #[command(args_override_self = true)]
    Candidates(CandidatesArgs),
    /// Perplexity of a checkpoint on an instance file.
    #[command(args_override_self = true)]
    Ppl(PplArgs),
    /// Translation probabilities for word-in-context queries.
    #[command(args_override_self = true)]
    ExportFeatures(ExportFeaturesArgs),
    /// Check analytic gradients against finite differences.
    #[command(args_override_self = true)]
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args, Serialize)]
struct CorpusArgs {
    /// Source side, one tokenized sentence per line.
    #[arg(long)]
    source: PathBuf,
    /// Target side, line-aligned with the source.
    #[arg(long)]
    target: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct AlignArgs {
    /// Source-to-target alignments in `i-j` format.
    #[arg(long)]
    forward_align: PathBuf,
    /// Target-to-source alignments, already in `i-j` source-target order.
    /// When given, links are intersected with the forward file.
    #[arg(long)]
    backward_align: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct VocabArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    source_vocab: PathBuf,
    #[arg(long)]
    target_vocab: PathBuf,
    #[arg(long, default_value_t = DEFAULT_VOCAB_CAP)]
    cap: usize,
    /// Most frequent target types excluded as prediction targets.
    #[arg(long, default_value_t = DEFAULT_TARGET_DROP_TOP_K)]
    target_drop_top: usize,
    /// Types seen fewer times become unknown (2 maps hapaxes to unknown).
    #[arg(long, default_value_t = 1)]
    min_count: u64,
}

#[derive(Debug, Args, Serialize)]
struct ExtractArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    align: AlignArgs,
    #[arg(long)]
    source_vocab: PathBuf,
    #[arg(long)]
    target_vocab: PathBuf,
    /// Sentences with at most this many source tokens are skipped.
    #[arg(long, default_value_t = DEFAULT_MIN_LEN)]
    min_len: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ModelArgs {
    #[arg(long, default_value = "bilstm")]
    encoder: EncoderKind,
    #[arg(long, default_value = "full")]
    peephole: PeepholeMode,
    #[arg(long, default_value_t = 300)]
    embed_dim: usize,
    /// Per-direction hidden size; context vectors have twice this width.
    #[arg(long, default_value_t = 300)]
    hidden_dim: usize,
}

impl ModelArgs {
    fn config(&self) -> ModelConfig {
        ModelConfig {
            encoder: self.encoder,
            embed_dim: self.embed_dim,
            hidden_dim: self.hidden_dim,
            peephole: self.peephole,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct OptimArgs {
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
    /// Evaluate on dev every this many updates instead of once per epoch.
    #[arg(long)]
    eval_every: Option<usize>,
    #[arg(long, default_value_t = 3)]
    patience: usize,
    #[arg(long, default_value_t = 20)]
    max_epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    adam_eps: f64,
}

impl OptimArgs {
    fn train_config(&self, seed: u64, model: ModelConfig) -> Result<TrainConfig, CliError> {
        if self.batch_size == 0 || self.patience == 0 || self.eval_every == Some(0) {
            return Err(CliError::msg("batch-size, patience and eval-every must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(CliError::msg("beta1 and beta2 must lie in [0, 1)"));
        }
        Ok(TrainConfig {
            batch_size: self.batch_size,
            eval_every: self.eval_every,
            patience: self.patience,
            max_epochs: self.max_epochs,
            seed,
            model,
            adam: AdamConfig { learning_rate: self.lr, beta1: self.beta1, beta2: self.beta2, epsilon: self.adam_eps },
        })
    }
}

#[derive(Debug, Args, Serialize)]
struct PretrainArgs {
    #[arg(long)]
    source_vocab: PathBuf,
    #[arg(long)]
    target_vocab: PathBuf,
    /// Instance file from `extract`.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    optim: OptimArgs,
}

#[derive(Debug, Args, Serialize)]
struct FinetuneArgs {
    /// Pretrained checkpoint whose encoder is transferred.
    #[arg(long, required_unless_present = "source_vocab")]
    checkpoint: Option<PathBuf>,
    /// Source vocabulary for a randomly initialized model.
    #[arg(long, conflicts_with = "checkpoint")]
    source_vocab: Option<PathBuf>,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Encoder shape when starting from scratch; ignored with --checkpoint.
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    optim: OptimArgs,
}

#[derive(Debug, Args, Serialize)]
struct EvalSupersenseArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
}

#[derive(Debug, Args, Serialize)]
struct LexsubArgs {
    #[arg(long, required_unless_present = "type_vectors")]
    checkpoint: Option<PathBuf>,
    /// Rank candidates by type-vector cosine instead of a checkpoint.
    #[arg(long, conflicts_with = "checkpoint")]
    type_vectors: Option<PathBuf>,
    #[arg(long)]
    items: PathBuf,
    /// Candidate table from `candidates`.
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Write `id<TAB>substitute` predictions here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CandidatesArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    align: AlignArgs,
    /// Share of the alignment mass the candidate list must cover.
    #[arg(long, default_value_t = 0.9)]
    mass: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct PplArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Instance file in the checkpoint's id spaces.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ExportFeaturesArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// `sentence<TAB>position<TAB>target word` lines.
    #[arg(long)]
    queries: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct GradcheckArgs {
    /// Check this many consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value = "bilstm")]
    encoder: EncoderKind,
    #[arg(long, default_value = "full")]
    peephole: PeepholeMode,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Debug)]
struct CliError(String);

impl CliError {
    fn msg(m: impl Into<String>) -> Self {
        CliError(m.into())
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

trait WithPath<T> {
    fn at(self, path: &Path) -> CliResult<T>;
}

impl<T, E: Display> WithPath<T> for Result<T, E> {
    fn at(self, path: &Path) -> CliResult<T> {
        self.map_err(|e| CliError(format!("{}: {e}", path.display())))
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).at(path)
}

fn write(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).at(path)
}

fn read_vocab(path: &Path) -> CliResult<Vocabulary> {
    Vocabulary::from_tsv(&read(path)?).at(path)
}

fn read_instances(path: &Path) -> CliResult<Vec<TranslationInstance>> {
    instances_from_tsv(&read(path)?).at(path)
}

fn read_checkpoint(path: &Path) -> CliResult<Checkpoint> {
    Ok(load_checkpoint(path)?)
}

fn read_corpus(args: &CorpusArgs) -> CliResult<Vec<ParallelSentencePair>> {
    let src = read(&args.source)?;
    let tgt = read(&args.target)?;
    Ok(read_parallel(&src, &tgt)?)
}

fn read_alignments(args: &AlignArgs) -> CliResult<Vec<AlignmentSet>> {
    let forward = parse_alignments(&read(&args.forward_align)?).at(&args.forward_align)?;
    match &args.backward_align {
        Some(path) => {
            let backward = parse_alignments(&read(path)?).at(path)?;
            Ok(symmetrize(&forward, &backward)?)
        }
        None => Ok(forward),
    }
}

/// Splices `--config` file entries in right after the subcommand name so
/// that later, explicit flags override them.
fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut config_path = None;
    let mut sub_at = None;
    let mut k = 1;
    while k < args.len() {
        let a = args[k].to_string_lossy();
        if let Some(v) = a.strip_prefix("--config=") {
            config_path = Some(PathBuf::from(v));
        } else if a == "--config" {
            config_path = args.get(k + 1).map(PathBuf::from);
            k += 1;
        } else if a == "--seed" || a == "--threads" {
            k += 1;
        } else if sub_at.is_none() && !a.starts_with('-') {
            sub_at = Some(k);
        }
        k += 1;
    }
    let (Some(path), Some(sub_at)) = (config_path, sub_at) else { return Ok(args) };
    let mut injected = Vec::new();
    for (n, line) in read(&path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError(format!("{}: line {}: expected key=value", path.display(), n + 1)))?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(CliError(format!("{}: line {}: nested config files are not supported", path.display(), n + 1)));
        }
        injected.push(OsString::from(format!("--{key}={}", value.trim())));
    }
    let mut out = args[..=sub_at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub_at + 1..]);
    Ok(out)
}

#[derive(Serialize)]
struct Resolved<'a> {
    seed: u64,
    threads: Option<usize>,
    #[serde(flatten)]
    command: &'a Command,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return 2;
        }
    };
    let matches = match Cli::command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    let resolved = Resolved { seed: cli.seed, threads: cli.threads, command: &cli.command };
    eprintln!("config\t{}", serde_json::to_string(&resolved).expect("config serializes"));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.0);
            1
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Vocab(a) => cmd_vocab(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Pretrain(a) => cmd_pretrain(a, cli.seed),
        Command::FinetuneSupersense(a) => cmd_finetune(a, cli.seed),
        Command::EvalSupersense(a) => cmd_eval_supersense(a),
        Command::Lexsub(a) => cmd_lexsub(a),
        Command::Candidates(a) => cmd_candidates(a),
        Command::Ppl(a) => cmd_ppl(a),
        Command::ExportFeatures(a) => cmd_export_features(a),
        Command::Gradcheck(a) => cmd_gradcheck(a, cli.seed),
    }
}

fn cmd_vocab(a: &VocabArgs) -> CliResult {
    let pairs = read_corpus(&a.corpus)?;
    let src_counts = prune_rare(&count_tokens(pairs.iter().map(|p| p.source.as_slice())), a.min_count);
    let tgt_counts = prune_rare(&count_tokens(pairs.iter().map(|p| p.target.as_slice())), a.min_count);
    let src = build_vocabulary(&src_counts, a.cap, 0);
    let tgt = build_vocabulary(&tgt_counts, a.cap, a.target_drop_top);
    write(&a.source_vocab, &src.to_tsv())?;
    write(&a.target_vocab, &tgt.to_tsv())?;
    println!("pairs\t{}", pairs.len());
    println!("source_vocab\t{}", src.len());
    println!("target_vocab\t{}", tgt.len());
    Ok(())
}

fn cmd_extract(a: &ExtractArgs) -> CliResult {
    let pairs = read_corpus(&a.corpus)?;
    let alignments = read_alignments(&a.align)?;
    let src = read_vocab(&a.source_vocab)?;
    let tgt = read_vocab(&a.target_vocab)?;
    let instances = extract_corpus(&pairs, &alignments, &src, &tgt, a.min_len)?;
    write(&a.out, &instances_to_tsv(&instances))?;
    println!("instances\t{}", instances.len());
    Ok(())
}

fn log_eval(record: &crate::train::EvalRecord) {
    println!("{}", record.to_tsv());
    let _ = std::io::stdout().flush();
}

fn cmd_pretrain(a: &PretrainArgs, seed: u64) -> CliResult {
    let src = read_vocab(&a.source_vocab)?;
    let tgt = read_vocab(&a.target_vocab)?;
    let train_set = read_instances(&a.train)?;
    let dev_set = match &a.dev {
        Some(p) => read_instances(p)?,
        None => Vec::new(),
    };
    let config = a.optim.train_config(seed, a.model.config())?;
    let model = init_model(&config, src.len(), tgt.len());
    println!("updates\ttrain_loss\tdev_ppl");
    let outcome = train(model, &train_set, &dev_set, &config, log_eval)?;
    let ck = Checkpoint::new(outcome.best, src, LabelSpace::Translation(tgt), Some(config));
    save_checkpoint(&a.out, &ck)?;
    Ok(())
}

fn cmd_finetune(a: &FinetuneArgs, seed: u64) -> CliResult {
    let inventory = TagInventory::standard();
    let read_data = |p: &Path| -> CliResult<_> { parse_supersense(&read(p)?, &inventory).at(p) };
    let train_data = read_data(&a.train)?;
    let dev_data = match &a.dev {
        Some(p) => Some(read_data(p)?),
        None => None,
    };
    let (model, vocab, config) = match &a.checkpoint {
        Some(path) => {
            let ck = read_checkpoint(path)?;
            let config = a.optim.train_config(seed, ck.meta.model)?;
            (transfer_model(&ck.model, &config, inventory.len()), ck.meta.source_vocab, config)
        }
        None => {
            let path = a.source_vocab.as_ref().expect("clap requires one of the two");
            let vocab = read_vocab(path)?;
            let config = a.optim.train_config(seed, a.model.config())?;
            (init_model(&config, vocab.len(), inventory.len()), vocab, config)
        }
    };
    let train_set = labeled_instances(&train_data, &vocab, a.window);
    let dev_set = dev_data.as_ref().map(|d| labeled_instances(d, &vocab, a.window)).unwrap_or_default();
    println!("updates\ttrain_loss\tdev_ppl");
    let outcome = train(model, &train_set, &dev_set, &config, log_eval)?;
    if let Some(dev) = &dev_data {
        let report = evaluate_supersense(&outcome.best, dev, &vocab, &inventory, a.window)?;
        println!("dev_f1\t{:.4}", report.f1);
        println!("dev_accuracy\t{:.4}", report.accuracy);
    }
    let labels = LabelSpace::Tags(inventory.tags().to_vec());
    save_checkpoint(&a.out, &Checkpoint::new(outcome.best, vocab, labels, Some(config)))?;
    Ok(())
}

fn tag_inventory(ck: &Checkpoint) -> CliResult<TagInventory> {
    match &ck.meta.labels {
        LabelSpace::Tags(tags) => Ok(TagInventory::from_tags(tags.clone())?),
        LabelSpace::Translation(_) => {
            Err(CliError::msg("checkpoint has a translation head; fine-tune it with `finetune-supersense` first"))
        }
    }
}

fn cmd_eval_supersense(a: &EvalSupersenseArgs) -> CliResult {
    let ck = read_checkpoint(&a.checkpoint)?;
    let inventory = tag_inventory(&ck)?;
    let data = parse_supersense(&read(&a.data)?, &inventory).at(&a.data)?;
    let report = evaluate_supersense(&ck.model, &data, &ck.meta.source_vocab, &inventory, a.window)?;
    print!("{}", report.to_tsv());
    Ok(())
}

fn cmd_candidates(a: &CandidatesArgs) -> CliResult {
    let pairs = read_corpus(&a.corpus)?;
    let alignments = read_alignments(&a.align)?;
    let aligned: Vec<AlignmentSet> = pairs
        .iter()
        .map(|p| {
            alignments.get(p.index).cloned().ok_or_else(|| CliError(format!("no alignment line for pair {}", p.index)))
        })
        .collect::<CliResult<_>>()?;
    let counts = AlignmentCounts::from_corpus(&pairs, &aligned)?;
    let table = build_candidate_table(&counts, a.mass)?;
    write(&a.out, &table.to_tsv())?;
    println!("words\t{}", table.len());
    Ok(())
}

fn cmd_lexsub(a: &LexsubArgs) -> CliResult {
    let items = parse_items(&read(&a.items)?).at(&a.items)?;
    let table = CandidateTable::from_tsv(&read(&a.candidates)?).at(&a.candidates)?;
    let predictions: Vec<(String, Option<String>)> = match (&a.checkpoint, &a.type_vectors) {
        (Some(path), _) => {
            let ck = read_checkpoint(path)?;
            lexsub_predict_all(&ck.model, &ck.meta.source_vocab, &items, &table)
        }
        (None, Some(path)) => {
            let vectors = TypeVectorTable::parse(&read(path)?).at(path)?;
            items
                .iter()
                .map(|item| {
                    let cands = table.get(item.target()).or_else(|| table.get(&item.lemma));
                    let guess = cands.and_then(|c| type_vector_predict(&vectors, item.target(), c).ok());
                    (item.id.clone(), guess)
                })
                .collect()
        }
        (None, None) => unreachable!("clap requires a predictor"),
    };
    let missing = predictions.iter().filter(|(_, g)| g.is_none()).count();
    if missing > 0 {
        eprintln!("warning: {missing} of {} items have no candidates and get no prediction", items.len());
    }
    let made: Vec<(String, String)> =
        predictions.into_iter().filter_map(|(id, g)| g.map(|g| (id, g))).collect();
    if let Some(out) = &a.out {
        let text: String = made.iter().map(|(id, g)| format!("{id}\t{g}\n")).collect();
        write(out, &text)?;
    }
    println!("predicted\t{}", made.len());
    if let Some(path) = &a.gold {
        let gold = parse_gold(&read(path)?).at(path)?;
        let scores = lexsub_score(&made, &gold)?;
        println!("best\t{:.2}", scores.best);
        println!("best_mode\t{:.2}", scores.best_mode);
    }
    Ok(())
}

fn cmd_ppl(a: &PplArgs) -> CliResult {
    let ck = read_checkpoint(&a.checkpoint)?;
    let data = read_instances(&a.data)?;
    if data.is_empty() {
        return Err(CliError(format!("{}: no instances", a.data.display())));
    }
    for inst in &data {
        ck.model.check_instance(inst).at(&a.data)?;
    }
    println!("{:.6}", perplexity(&ck.model, &data));
    Ok(())
}

fn cmd_export_features(a: &ExportFeaturesArgs) -> CliResult {
    let ck = read_checkpoint(&a.checkpoint)?;
    let LabelSpace::Translation(target_vocab) = &ck.meta.labels else {
        return Err(CliError::msg("checkpoint has no lexical translation head"));
    };
    let queries = parse_queries(&read(&a.queries)?).at(&a.queries)?;
    let records = export_translation_features(&ck.model, &ck.meta.source_vocab, target_vocab, &queries)?;
    let oov = records.iter().filter(|r| r.target_oov).count();
    if oov > 0 {
        eprintln!("warning: {oov} queries have an out-of-vocabulary target; the unknown-token probability is reported");
    }
    let text = features_to_tsv(&records);
    match &a.out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_gradcheck(a: &GradcheckArgs, seed: u64) -> CliResult {
    let config = GradCheckConfig {
        encoder: a.encoder,
        peephole: a.peephole,
        tolerance: a.tolerance,
        ..GradCheckConfig::default()
    };
    let mut all_passed = true;
    let mut worst = 0.0f64;
    for s in seed..seed + a.seeds.max(1) {
        let r = gradient_check(s, &config)?;
        println!(
            "seed {s}\tparams {}\tmax_rel_error {:.3e}\tworst {}[{}]\t{}",
            r.num_parameters,
            r.max_relative_error,
            r.worst_tensor,
            r.worst_index,
            if r.passed { "PASS" } else { "FAIL" }
        );
        all_passed &= r.passed;
        worst = worst.max(r.max_relative_error);
    }
    println!("max_rel_error {worst:.3e} tolerance {:.0e} {}", a.tolerance, if all_passed { "PASS" } else { "FAIL" });
    if all_passed {
        Ok(())
    } else {
        Err(CliError::msg("gradient check failed"))
    }
}

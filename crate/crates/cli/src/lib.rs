//! Batch front end for the `negscope` library.
//!
//! Every subcommand reads and writes JSONL, one record per line, and keeps
//! output in input order. Bad input lines never abort `detect`, `train-cue`
//! or `transform`; they go to the rejects file (stderr when none is given)
//! and the process exits with status 2.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use negscope::corpus::{read_starsem, write_starsem, CorpusRecord, Engine, RejectRecord, ScopeRecord};
use negscope::cue::{classify, extract_features, find_cues, train, CueOccurrence, LinearModel, TrainConfig};
use negscope::eval::{agreement, score_cues, score_scopes, CueLabel, EvalReport, GoldCue, PredictedScope};
use negscope::lexicon::{AntonymDict, ConnectiveList, CueLexicon, Lexicons, NrpCopulaList};
use negscope::scope::{detect_scope, punctuation_scope, ScopeResult};
use negscope::transform::{apply_transform, normalize_tweet, TransformConfig, TransformMode};
use negscope::Sentence;
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REJECTS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "negscope", version, about = "Negation cue and scope detection for tweets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find cues, classify them and resolve their scopes
    Detect(DetectArgs),
    /// Train the cue classifier on gold cue labels
    TrainCue(TrainArgs),
    /// Score predictions against a gold corpus
    Evaluate(EvaluateArgs),
    /// Rewrite in-scope tokens for sentiment models
    Transform(TransformArgs),
    /// Inter-annotator agreement between two annotated corpora
    Agree(AgreeArgs),
    /// Convert between JSONL and *SEM column files
    Convert(ConvertArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct LexiconArgs {
    /// Cue list, one entry per line
    #[arg(long, value_name = "FILE")]
    pub cues: Option<PathBuf>,
    /// Neg-raising and copular verbs skipped when anchoring
    #[arg(long, value_name = "FILE")]
    pub nrp: Option<PathBuf>,
    /// Connectives that close a scope
    #[arg(long, value_name = "FILE")]
    pub connectives: Option<PathBuf>,
}

impl LexiconArgs {
    pub fn load(&self) -> Result<Lexicons> {
        let mut lex = Lexicons::default();
        if let Some(p) = &self.cues {
            lex.cues = CueLexicon::load(p).with_context(|| format!("loading {}", p.display()))?;
        }
        if let Some(p) = &self.nrp {
            lex.nrp = NrpCopulaList::load(p).with_context(|| format!("loading {}", p.display()))?;
        }
        if let Some(p) = &self.connectives {
            lex.connectives = ConnectiveList::load(p).with_context(|| format!("loading {}", p.display()))?;
        }
        Ok(lex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Punctuation,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// Corpus JSONL
    pub input: PathBuf,
    /// Output JSONL (stdout when omitted)
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Where rejected lines go (stderr when omitted)
    #[arg(long, value_name = "FILE")]
    pub rejects: Option<PathBuf>,
    #[command(flatten)]
    pub lexicons: LexiconArgs,
    /// Trained cue classifier; without it every lexicon match is a true cue
    #[arg(long, value_name = "FILE", conflicts_with = "gold_cues")]
    pub cue_model: Option<PathBuf>,
    /// Use the corpus gold cues instead of lexicon matching and classification
    #[arg(long)]
    pub gold_cues: bool,
    /// Replace the tree rules with a baseline
    #[arg(long, value_enum)]
    pub baseline: Option<Baseline>,
    /// Include the post-processing trace in each record
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Corpus JSONL with gold_cues
    pub input: PathBuf,
    /// Model file to write
    #[arg(short, long, value_name = "FILE")]
    pub output: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub rejects: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 16)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub l2: f64,
    /// Loss weight of true-cue examples
    #[arg(long, default_value_t = 1.0)]
    pub true_weight: f64,
    /// Loss weight of false-cue examples
    #[arg(long, default_value_t = 1.0)]
    pub false_weight: f64,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            l2: self.l2,
            seed: self.seed,
            true_weight: self.true_weight,
            false_weight: self.false_weight,
            threshold: self.threshold,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Gold corpus JSONL
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,
    /// Predictions written by `detect`
    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,
    /// Score every predicted cue site, counting sites absent from the gold
    /// corpus as false cues and missing predictions as empty scopes
    #[arg(long)]
    pub end_to_end: bool,
    /// Also write the report as JSON
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    /// Corpus JSONL
    pub input: PathBuf,
    /// Predictions written by `detect`
    #[arg(long, value_name = "FILE")]
    pub scopes: PathBuf,
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub rejects: Option<PathBuf>,
    #[arg(long, default_value = "not-prefix", value_parser = parse_mode)]
    pub mode: TransformMode,
    /// Antonym dictionary, two tab-separated columns
    #[arg(long, value_name = "FILE")]
    pub antonyms: Option<PathBuf>,
    /// Delete cue tokens from the output
    #[arg(long)]
    pub drop_cues: bool,
    /// Replace links, handles and hashtag marks in the output tokens
    #[arg(long)]
    pub normalize: bool,
}

fn parse_mode(s: &str) -> std::result::Result<TransformMode, String> {
    s.parse::<TransformMode>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct AgreeArgs {
    /// First annotator's corpus
    pub first: PathBuf,
    /// Second annotator's corpus
    pub second: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Starsem,
}

#[derive(Debug, Clone, Args)]
pub struct ConvertArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub from: Format,
    #[arg(long, value_enum)]
    pub to: Format,
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

/// Runs one parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    let rejects = match cli.command {
        Command::Detect(a) => run_detect(&a)?,
        Command::TrainCue(a) => run_train_cue(&a)?,
        Command::Evaluate(a) => {
            let report = run_evaluate(&a)?;
            print!("{report}");
            0
        }
        Command::Transform(a) => run_transform(&a)?,
        Command::Agree(a) => {
            let json = run_agree(&a)?;
            println!("{json}");
            0
        }
        Command::Convert(a) => {
            run_convert(&a)?;
            0
        }
    };
    Ok(if rejects > 0 { EXIT_REJECTS } else { EXIT_OK })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_jsonl<T: Serialize>(out: &mut dyn Write, records: &[T]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

fn write_rejects(path: Option<&Path>, rejects: &[RejectRecord]) -> Result<()> {
    match path {
        Some(p) => write_jsonl(&mut *writer(Some(p))?, rejects),
        None if rejects.is_empty() => Ok(()),
        None => write_jsonl(&mut io::stderr().lock(), rejects),
    }
}

/// Parses a corpus, splitting it into good records (with 1-based line
/// numbers) and rejects.
pub fn parse_corpus(text: &str) -> (Vec<(usize, CorpusRecord)>, Vec<RejectRecord>) {
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match CorpusRecord::from_json_line(line) {
            Ok(r) => good.push((i + 1, r)),
            Err(e) => bad.push(RejectRecord { line: i + 1, id: id_of(line), error: e.to_string() }),
        }
    }
    (good, bad)
}

fn id_of(line: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(line).ok()?;
    v.get("id")?.as_str().map(str::to_string)
}

fn parse_predictions(text: &str, path: &Path) -> Result<Vec<ScopeRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).with_context(|| format!("{}:{}: bad prediction record", path.display(), i + 1))
        })
        .collect()
}

/// Settings for [`detect_records`], resolved from the command line.
pub struct DetectOptions {
    pub lexicons: Lexicons,
    pub model: Option<LinearModel>,
    pub gold_cues: bool,
    pub baseline: Option<Baseline>,
    pub trace: bool,
}

impl DetectOptions {
    pub fn from_args(args: &DetectArgs) -> Result<DetectOptions> {
        let model = match &args.cue_model {
            Some(p) => Some(LinearModel::from_text(&read(p)?).with_context(|| format!("reading model {}", p.display()))?),
            None => None,
        };
        Ok(DetectOptions {
            lexicons: args.lexicons.load()?,
            model,
            gold_cues: args.gold_cues,
            baseline: args.baseline,
            trace: args.trace,
        })
    }
}

fn detect_one(record: &CorpusRecord, opts: &DetectOptions) -> Result<Vec<ScopeRecord>, String> {
    if record.parse.is_none() && opts.baseline.is_none() {
        return Err("missing tree".to_string());
    }
    let sentence = record.sentence().map_err(|e| e.to_string())?;
    let sites: Vec<CueOccurrence> = if opts.gold_cues {
        let mut sites = record.gold_cue_sites();
        sites.sort_by_key(|c| c.index);
        sites
            .into_iter()
            .map(|c| CueOccurrence {
                token_index: c.index,
                cue_form: sentence.tokens()[c.index].norm.clone(),
                is_true_cue: c.is_true_cue,
                score: if c.is_true_cue { 1.0 } else { 0.0 },
            })
            .collect()
    } else {
        let found = find_cues(&sentence, &opts.lexicons.cues);
        match &opts.model {
            Some(m) => found
                .iter()
                .map(|o| classify(m, &sentence, o))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?,
            None => found,
        }
    };
    sites
        .into_iter()
        .map(|occ| {
            let (engine, result) = match opts.baseline {
                Some(Baseline::Punctuation) => (Engine::Punctuation, punctuation_scope(&sentence, &occ, false)),
                None => (Engine::Rules, detect_scope(&sentence, &occ, &opts.lexicons).map_err(|e| e.to_string())?),
            };
            Ok(scope_record(&sentence, occ, engine, result, opts.trace))
        })
        .collect()
}

fn scope_record(sentence: &Sentence, occ: CueOccurrence, engine: Engine, result: ScopeResult, trace: bool) -> ScopeRecord {
    ScopeRecord {
        id: sentence.source_id().to_string(),
        cue_index: occ.token_index,
        cue_form: occ.cue_form,
        is_true_cue: occ.is_true_cue,
        score: occ.score,
        engine,
        scope_tokens: result.scope.iter().map(|&i| sentence.tokens()[i].surface.clone()).collect(),
        scope: result.scope,
        trace: trace.then_some(result.trace),
    }
}

/// The detect pipeline over corpus text, without any file handling.
pub fn detect_records(text: &str, opts: &DetectOptions) -> (Vec<ScopeRecord>, Vec<RejectRecord>) {
    let (records, mut rejects) = parse_corpus(text);
    let mut out = Vec::new();
    for (line, record) in &records {
        match detect_one(record, opts) {
            Ok(mut r) => out.append(&mut r),
            Err(error) => rejects.push(RejectRecord { line: *line, id: Some(record.id.clone()), error }),
        }
    }
    rejects.sort_by_key(|r| r.line);
    (out, rejects)
}

/// Returns the number of rejected lines.
pub fn run_detect(args: &DetectArgs) -> Result<usize> {
    let opts = DetectOptions::from_args(args)?;
    let (out, rejects) = detect_records(&read(&args.input)?, &opts);
    write_jsonl(&mut *writer(args.output.as_deref())?, &out)?;
    write_rejects(args.rejects.as_deref(), &rejects)?;
    log::info!("{} predictions, {} rejects", out.len(), rejects.len());
    Ok(rejects.len())
}

/// Returns the number of rejected lines.
pub fn run_train_cue(args: &TrainArgs) -> Result<usize> {
    let (records, mut rejects) = parse_corpus(&read(&args.input)?);
    let mut examples = Vec::new();
    for (line, record) in &records {
        let Some(cues) = &record.gold_cues else { continue };
        let sentence = match Sentence::new(record.id.clone(), record.to_tokens()) {
            Ok(s) => s,
            Err(e) => {
                rejects.push(RejectRecord { line: *line, id: Some(record.id.clone()), error: e.to_string() });
                continue;
            }
        };
        for c in cues {
            let occ = CueOccurrence {
                token_index: c.index,
                cue_form: sentence.tokens()[c.index].norm.clone(),
                is_true_cue: c.is_true_cue,
                score: 1.0,
            };
            examples.push((extract_features(&sentence, &occ)?, c.is_true_cue));
        }
    }
    rejects.sort_by_key(|r| r.line);
    let model = train(&examples, &args.config()).with_context(|| format!("training on {}", args.input.display()))?;
    fs::write(&args.output, model.to_text()).with_context(|| format!("writing {}", args.output.display()))?;
    write_rejects(args.rejects.as_deref(), &rejects)?;
    Ok(rejects.len())
}

/// Builds the scope and cue reports for `detect` output against a gold
/// corpus.
pub fn evaluate(gold: &[CorpusRecord], pred: &[ScopeRecord], end_to_end: bool) -> Result<EvalReport> {
    let lengths: BTreeMap<&str, usize> = gold.iter().map(|r| (r.id.as_str(), r.tokens.len())).collect();
    let mut gold_sites: Vec<GoldCue> = gold.iter().flat_map(CorpusRecord::gold_for_eval).collect();
    let known: BTreeSet<(String, usize)> = gold_sites.iter().map(|g| (g.sentence_id.clone(), g.cue_index)).collect();
    let mut predicted: Vec<PredictedScope> = Vec::new();
    for p in pred {
        let key = (p.id.clone(), p.cue_index);
        if known.contains(&key) {
            predicted.push(p.to_predicted());
        } else if end_to_end {
            let Some(&len) = lengths.get(p.id.as_str()) else {
                bail!("prediction for unknown sentence {:?}", p.id);
            };
            gold_sites.push(GoldCue { sentence_id: p.id.clone(), cue_index: p.cue_index, sentence_len: len, is_true_cue: false, scope: Vec::new() });
            predicted.push(p.to_predicted());
        } else {
            log::debug!("skipping prediction at non-gold site {}:{}", p.id, p.cue_index);
        }
    }
    if end_to_end {
        let have: BTreeSet<(String, usize)> = predicted.iter().map(|p| (p.sentence_id.clone(), p.cue_index)).collect();
        for g in &gold_sites {
            if !have.contains(&(g.sentence_id.clone(), g.cue_index)) {
                predicted.push(PredictedScope { sentence_id: g.sentence_id.clone(), cue_index: g.cue_index, scope: Vec::new() });
            }
        }
    }
    let scope = if gold_sites.is_empty() { None } else { Some(score_scopes(&gold_sites, &predicted)?) };

    let gold_labels: Vec<CueLabel> = gold.iter().flat_map(CorpusRecord::gold_cue_labels).collect();
    let cues = if gold_labels.is_empty() {
        None
    } else {
        let by_site: BTreeMap<(&str, usize), bool> = pred.iter().map(|p| ((p.id.as_str(), p.cue_index), p.is_true_cue)).collect();
        // a gold cue the detector never reported was effectively labeled false
        let labels: Vec<CueLabel> = gold_labels
            .iter()
            .map(|g| CueLabel {
                is_true_cue: by_site.get(&(g.sentence_id.as_str(), g.token_index)).copied().unwrap_or(false),
                ..g.clone()
            })
            .collect();
        Some(score_cues(&gold_labels, &labels)?)
    };
    Ok(EvalReport { scope, cues })
}

pub fn run_evaluate(args: &EvaluateArgs) -> Result<EvalReport> {
    let (gold, bad) = parse_corpus(&read(&args.gold)?);
    if let Some(r) = bad.first() {
        bail!("{}:{}: {}", args.gold.display(), r.line, r.error);
    }
    let gold: Vec<CorpusRecord> = gold.into_iter().map(|(_, r)| r).collect();
    let pred = parse_predictions(&read(&args.pred)?, &args.pred)?;
    let report = evaluate(&gold, &pred, args.end_to_end)?;
    if let Some(p) = &args.json {
        fs::write(p, serde_json::to_string_pretty(&report)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(report)
}

/// Returns the number of rejected lines.
pub fn run_transform(args: &TransformArgs) -> Result<usize> {
    let antonyms = match &args.antonyms {
        Some(p) => AntonymDict::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => AntonymDict::bundled(),
    };
    let config = TransformConfig { mode: args.mode, keep_cue: !args.drop_cues };
    let mut scopes: BTreeMap<String, Vec<ScopeResult>> = BTreeMap::new();
    for p in parse_predictions(&read(&args.scopes)?, &args.scopes)? {
        if p.is_true_cue {
            scopes.entry(p.id.clone()).or_default().push(p.to_scope_result());
        }
    }
    let (records, mut rejects) = parse_corpus(&read(&args.input)?);
    let mut out = Vec::new();
    for (line, mut record) in records {
        let result = Sentence::new(record.id.clone(), record.to_tokens())
            .map_err(|e| e.to_string())
            .and_then(|s| {
                let these = scopes.get(&record.id).map(Vec::as_slice).unwrap_or_default();
                apply_transform(&s, these, &antonyms, &config).map_err(|e| e.to_string())
            });
        match result {
            Ok(t) => {
                let tokens: Vec<String> =
                    if args.normalize { t.tokens.iter().map(|w| normalize_tweet(w)).collect() } else { t.tokens };
                record.extra.insert("transformed".into(), tokens.into());
                if !t.warnings.is_empty() {
                    record.extra.insert("transform_warnings".into(), t.warnings.into());
                }
                out.push(record);
            }
            Err(error) => rejects.push(RejectRecord { line, id: Some(record.id.clone()), error }),
        }
    }
    rejects.sort_by_key(|r| r.line);
    write_jsonl(&mut *writer(args.output.as_deref())?, &out)?;
    write_rejects(args.rejects.as_deref(), &rejects)?;
    Ok(rejects.len())
}

/// Agreement report as pretty JSON.
pub fn run_agree(args: &AgreeArgs) -> Result<String> {
    let load = |p: &Path| -> Result<Vec<_>> {
        let (good, bad) = parse_corpus(&read(p)?);
        if let Some(r) = bad.first() {
            bail!("{}:{}: {}", p.display(), r.line, r.error);
        }
        Ok(good.iter().flat_map(|(_, r)| r.annotations()).collect())
    };
    let report = agreement(&load(&args.first)?, &load(&args.second)?)?;
    Ok(serde_json::to_string_pretty(&report)?)
}

pub fn run_convert(args: &ConvertArgs) -> Result<()> {
    let text = read(&args.input)?;
    let records = match args.from {
        Format::Starsem => read_starsem(&text).with_context(|| format!("reading {}", args.input.display()))?,
        Format::Jsonl => {
            let (good, bad) = parse_corpus(&text);
            if let Some(r) = bad.first() {
                bail!("{}:{}: {}", args.input.display(), r.line, r.error);
            }
            good.into_iter().map(|(_, r)| r).collect()
        }
    };
    let mut out = writer(args.output.as_deref())?;
    match args.to {
        Format::Jsonl => write_jsonl(&mut *out, &records)?,
        Format::Starsem => {
            out.write_all(write_starsem(&records)?.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sandhi_core::corpus::{
    dedup_triples, filter_corpus, make_stage_examples, parse_corpus, split_dataset, SandhiTriple,
    Script, SplitRatios, StageKind, WindowAnnotation,
};
use sandhi_core::eval::{eval_join, eval_round_trip, eval_split, EvalReport};
use sandhi_core::joiner::{train_joiner, JoinError, JoinerModel};
use sandhi_core::neuralnet::checkpoint::CheckpointError;
use sandhi_core::neuralnet::{history_csv, EpochRecord};
use sandhi_core::oracle::{generate_synthetic, Lexicon};
use sandhi_core::splitter::{
    save_tagger, save_wsplitter, train_stage1, train_stage2, SplitError, Splitter,
};
use sandhi_core::translit::{devanagari_to_slp1, itrans_to_slp1, slp1_to_devanagari, Slp1String};

use config::{ConfigOverrides, ModelKindArg, RunConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_MODEL: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sandhi",
    version,
    about = "Sanskrit sandhi joining and splitting"
)]
struct Cli {
    /// Script of words read and written by the command.
    #[arg(long, global = true, value_enum, default_value_t = ScriptArg::Slp1)]
    script: ScriptArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScriptArg {
    Slp1,
    Devanagari,
}

impl From<ScriptArg> for Script {
    fn from(s: ScriptArg) -> Self {
        match s {
            ScriptArg::Slp1 => Script::Slp1,
            ScriptArg::Devanagari => Script::Devanagari,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter a raw corpus and write train/validation/test and per-stage files.
    Prepare(PrepareArgs),
    /// Train a joiner, Stage-1 tagger or Stage-2 window splitter.
    Train(TrainArgs),
    /// Join word pairs into compounds.
    Join(JoinArgs),
    /// Split compounds into word pairs.
    Split(SplitArgs),
    /// Score a model on a test set of triples.
    Eval(EvalArgs),
    /// Convert between SLP1, Devanagari and ITRANS.
    Translit(TranslitArgs),
    /// Generate a synthetic corpus with the rule oracle.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct PrepareArgs {
    /// Corpus TSV: w1, w2, compound per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    test_ratio: f64,
    #[arg(long, default_value_t = 0.2)]
    validation_ratio: f64,
    /// Joiner truncation lengths used for the joiner stage files.
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long, value_enum)]
    kind: ModelKindArg,
    /// Directory written by `prepare`.
    #[arg(long, required_unless_present = "print_config")]
    data: Option<PathBuf>,
    /// Checkpoint to write.
    #[arg(long, required_unless_present = "print_config")]
    out: Option<PathBuf>,
    /// JSON file with any subset of the configuration fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: ConfigOverrides,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    print_config: bool,
    /// Loss history CSV; defaults to the checkpoint path plus `.history.csv`.
    #[arg(long)]
    history: Option<PathBuf>,
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct JoinArgs {
    #[arg(long)]
    model: PathBuf,
    /// One pair to join: W1 W2.
    words: Vec<String>,
    /// File with one `w1 w2` pair per line (`-` for stdin).
    #[arg(long, conflicts_with = "words")]
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    tagger: PathBuf,
    #[arg(long)]
    wsplitter: PathBuf,
    /// One compound to split.
    word: Option<String>,
    /// File with one compound per line (`-` for stdin).
    #[arg(long, conflicts_with = "word")]
    input: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalKind {
    Join,
    Split,
    Roundtrip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    kind: EvalKind,
    /// Test triples (TSV).
    #[arg(long)]
    test: PathBuf,
    /// Joiner checkpoint (join, roundtrip).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    tagger: Option<PathBuf>,
    #[arg(long)]
    wsplitter: Option<PathBuf>,
    /// Write the JSON report here; failure samples go next to it.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FromScheme {
    Slp1,
    Devanagari,
    Itrans,
}

#[derive(Debug, Args)]
struct TranslitArgs {
    #[arg(long, value_enum)]
    from: FromScheme,
    #[arg(long, value_enum)]
    to: ScriptArg,
    /// Text to convert; stdin lines when absent.
    text: Vec<String>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Lexicon file (word, optional tab-separated weight); bundled demo
    /// lexicon when absent.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Output TSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn context(self, what: String) -> Failure {
        Failure {
            code: self.code,
            error: self.error.context(what),
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: e.into(),
    }
}

fn data(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_DATA,
        error: e.into(),
    }
}

fn model(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: EXIT_MODEL,
        error: e.into(),
    }
}

fn checkpoint_failure(e: CheckpointError) -> Failure {
    match e {
        CheckpointError::Io(_) => data(e),
        other => model(other),
    }
}

fn join_failure(e: JoinError) -> Failure {
    match e {
        JoinError::Checkpoint(c) => checkpoint_failure(c),
        e @ JoinError::VocabMiss(_) => model(e),
        e => data(e),
    }
}

fn split_failure(e: SplitError) -> Failure {
    match e {
        SplitError::Checkpoint(c) => checkpoint_failure(c),
        e @ SplitError::VocabMiss(_) => model(e),
        e => data(e),
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let script = cli.script;
    let result = match cli.command {
        Command::Prepare(a) => cmd_prepare(a, script),
        Command::Train(a) => cmd_train(a),
        Command::Join(a) => cmd_join(a, script),
        Command::Split(a) => cmd_split(a, script),
        Command::Eval(a) => cmd_eval(a, script),
        Command::Translit(a) => cmd_translit(a),
        Command::Synth(a) => cmd_synth(a, script),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn to_slp1(word: &str, script: ScriptArg) -> anyhow::Result<Slp1String> {
    let slp = match script {
        ScriptArg::Slp1 => word.to_string(),
        ScriptArg::Devanagari => devanagari_to_slp1(word)?,
    };
    Ok(Slp1String::new(&slp)?)
}

fn from_slp1(word: &str, script: ScriptArg) -> String {
    match script {
        ScriptArg::Slp1 => word.to_string(),
        // model output is SLP1 by construction; fall back to raw on the odd miss
        ScriptArg::Devanagari => slp1_to_devanagari(word).unwrap_or_else(|_| word.to_string()),
    }
}

fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> io::Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for line in lines {
        writeln!(out, "{line}")?;
    }
    out.flush()
}

fn read_triples(path: &Path, script: Script) -> Result<Vec<SandhiTriple>, Failure> {
    let (triples, diagnostics) = parse_corpus(path, script)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(data)?;
    if let Some(d) = diagnostics.iter().find(|d| !d.kind.is_warning()) {
        return Err(data(anyhow!(
            "{}: line {}: {:?}",
            path.display(),
            d.line,
            d.kind
        )));
    }
    Ok(triples)
}

#[derive(Serialize)]
struct Manifest {
    source: String,
    script: Script,
    seed: u64,
    ratios: SplitRatios,
    joiner: BTreeMap<&'static str, usize>,
    lines_rejected: usize,
    warnings: usize,
    duplicates: usize,
    examined: usize,
    retained: usize,
    discarded: BTreeMap<String, usize>,
    counts: BTreeMap<&'static str, usize>,
    files: Vec<String>,
}

fn cmd_prepare(a: PrepareArgs, script: ScriptArg) -> CmdResult {
    let ratios = SplitRatios {
        test: a.test_ratio,
        validation: a.validation_ratio,
    };
    if !(0.0..1.0).contains(&ratios.test) || !(0.0..1.0).contains(&ratios.validation) {
        return Err(usage(anyhow!("ratios must lie in [0, 1)")));
    }
    if a.n < 2 || a.m < 1 {
        return Err(usage(anyhow!("need n >= 2 and m >= 1")));
    }
    let (triples, diagnostics) = parse_corpus(&a.input, script.into())
        .with_context(|| format!("reading {}", a.input.display()))
        .map_err(data)?;
    let rejected = diagnostics.iter().filter(|d| !d.kind.is_warning()).count();
    let warnings = diagnostics.len() - rejected;
    for d in diagnostics.iter().take(20) {
        eprintln!("line {}: {:?}", d.line, d.kind);
    }
    if diagnostics.len() > 20 {
        eprintln!("... {} more diagnostics", diagnostics.len() - 20);
    }
    let parsed = triples.len();
    let triples = dedup_triples(triples);
    let duplicates = parsed - triples.len();
    let (kept, stats) = filter_corpus(&triples);
    if kept.is_empty() {
        return Err(data(anyhow!(
            "dataset is empty after filtering ({rejected} rejected lines, {} triples examined)",
            stats.examined
        )));
    }
    let split = split_dataset(kept, ratios, a.seed).map_err(data)?;
    fs::create_dir_all(&a.out).map_err(data)?;

    let mut files = Vec::new();
    let parts: [(&str, &[(SandhiTriple, WindowAnnotation)]); 3] = [
        ("train", &split.train),
        ("validation", &split.validation),
        ("test", &split.test),
    ];
    let mut write = |name: String, lines: Vec<String>| -> CmdResult {
        write_lines(&a.out.join(&name), lines).map_err(data)?;
        files.push(name);
        Ok(())
    };
    for (part, rows) in parts {
        write(
            format!("{part}.tsv"),
            rows.iter().map(|(t, _)| t.to_tsv()).collect(),
        )?;
        for (prefix, kind) in [
            ("joiner", StageKind::Joiner { n: a.n, m: a.m }),
            ("stage1", StageKind::Tagger),
            ("stage2", StageKind::WindowSplitter),
        ] {
            let examples = make_stage_examples(rows, kind).map_err(data)?;
            write(
                format!("{prefix}_{part}.tsv"),
                examples.iter().map(|e| e.to_tsv()).collect(),
            )?;
        }
    }
    let manifest = Manifest {
        source: a.input.display().to_string(),
        script: script.into(),
        seed: a.seed,
        ratios,
        joiner: BTreeMap::from([("n", a.n), ("m", a.m)]),
        lines_rejected: rejected,
        warnings,
        duplicates,
        examined: stats.examined,
        retained: stats.retained,
        discarded: stats
            .reasons
            .iter()
            .filter(|(k, _)| k.as_str() != "ok")
            .map(|(k, v)| (k.clone(), *v))
            .collect(),
        counts: BTreeMap::from([
            ("train", split.train.len()),
            ("validation", split.validation.len()),
            ("test", split.test.len()),
        ]),
        files,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(a.out.join("manifest.json"), json + "\n").map_err(data)?;

    println!("examined {}  retained {}", stats.examined, stats.retained);
    println!("{:<20} {:>8}", "discard reason", "count");
    println!("{:<20} {:>8}", "parse_error", rejected);
    println!("{:<20} {:>8}", "duplicate", duplicates);
    for (reason, count) in &manifest.discarded {
        println!("{reason:<20} {count:>8}");
    }
    println!(
        "train {}  validation {}  test {}",
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> CmdResult {
    let file = match &a.config {
        Some(p) => ConfigOverrides::from_file(p)
            .with_context(|| format!("config {}", p.display()))
            .map_err(usage)?,
        None => ConfigOverrides::default(),
    };
    let cfg = RunConfig::resolve(a.kind, &a.overrides.clone().over(file)).map_err(usage)?;
    if a.print_config {
        println!(
            "{}",
            serde_json::to_string_pretty(&cfg).expect("config serializes")
        );
        return Ok(());
    }
    let (dir, out) = (a.data.unwrap(), a.out.unwrap());
    let train = read_triples(&dir.join("train.tsv"), Script::Slp1)?;
    let val_path = dir.join("validation.tsv");
    let val = if val_path.exists() {
        read_triples(&val_path, Script::Slp1)?
    } else {
        Vec::new()
    };
    let quiet = a.quiet;
    let progress = |r: &EpochRecord| {
        if !quiet {
            match r.val_loss {
                Some(v) => eprintln!(
                    "epoch {:>4}  train {:.5}  val {:.5}",
                    r.epoch, r.train_loss, v
                ),
                None => eprintln!("epoch {:>4}  train {:.5}", r.epoch, r.train_loss),
            }
        }
    };
    let history = match a.kind {
        ModelKindArg::Joiner => {
            let (m, h) =
                train_joiner(&train, &val, &cfg.joiner(), progress).map_err(join_failure)?;
            m.save(&out).map_err(join_failure)?;
            h
        }
        ModelKindArg::Tagger | ModelKindArg::Wsplitter => {
            let (train, _) = filter_corpus(&train);
            let (val, _) = filter_corpus(&val);
            if a.kind == ModelKindArg::Tagger {
                let (m, h) =
                    train_stage1(&train, &val, &cfg.train, progress).map_err(split_failure)?;
                save_tagger(&m, &out).map_err(split_failure)?;
                h
            } else {
                let covering = cfg.covering.unwrap_or(true);
                let (m, h) = train_stage2(&train, &val, &cfg.train, covering, progress)
                    .map_err(split_failure)?;
                save_wsplitter(&m, &out).map_err(split_failure)?;
                h
            }
        }
    };
    let history_path = a.history.unwrap_or_else(|| {
        let mut p = out.clone().into_os_string();
        p.push(".history.csv");
        PathBuf::from(p)
    });
    fs::write(&history_path, history_csv(&history)).map_err(data)?;
    println!("wrote {} and {}", out.display(), history_path.display());
    Ok(())
}

/// Lines of a batch input file, or stdin for `-`.
fn input_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let text = if path == Path::new("-") {
        io::stdin()
            .lock()
            .lines()
            .collect::<Result<Vec<_>, _>>()
            .map_err(data)?
    } else {
        fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(data)?
            .lines()
            .map(str::to_string)
            .collect()
    };
    Ok(text)
}

fn join_line(m: &JoinerModel, line: &str, script: ScriptArg) -> Result<String, Failure> {
    let words: Vec<&str> = line.split_whitespace().filter(|w| *w != "+").collect();
    let [w1, w2] = words[..] else {
        return Err(data(anyhow!("expected two words, got {}", words.len())));
    };
    let w1 = to_slp1(w1, script).map_err(data)?;
    let w2 = to_slp1(w2, script).map_err(data)?;
    let cw = m.join(&w1, &w2).map_err(join_failure)?;
    Ok(from_slp1(cw.as_str(), script))
}

fn cmd_join(a: JoinArgs, script: ScriptArg) -> CmdResult {
    let m = load_joiner(&a.model)?;
    match a.input {
        Some(path) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for line in input_lines(&path)? {
                let shown =
                    join_line(&m, &line, script).unwrap_or_else(|f| format!("ERR {:#}", f.error));
                writeln!(out, "{shown}").map_err(data)?;
            }
            Ok(())
        }
        None => {
            if a.words.len() != 2 {
                return Err(usage(anyhow!("join takes exactly two words or --input")));
            }
            println!("{}", join_line(&m, &a.words.join(" "), script)?);
            Ok(())
        }
    }
}

fn load_joiner(path: &Path) -> Result<JoinerModel, Failure> {
    JoinerModel::load(path)
        .map_err(|e| join_failure(e).context(format!("loading {}", path.display())))
}

fn load_splitter(tagger: &Path, wsplitter: &Path) -> Result<Splitter, Failure> {
    let s = Splitter::load(tagger, wsplitter).map_err(|e| {
        split_failure(e).context(format!(
            "loading {} and {}",
            tagger.display(),
            wsplitter.display()
        ))
    })?;
    if s.tagger.vocab != s.wsplit.vocab {
        return Err(model(anyhow!(
            "tagger and window splitter vocabularies differ"
        )));
    }
    Ok(s)
}

fn split_line(s: &Splitter, line: &str, script: ScriptArg) -> Result<String, Failure> {
    let word = line.trim();
    if word.is_empty() || word.contains(char::is_whitespace) {
        return Err(data(anyhow!("expected one compound per line")));
    }
    let cw = to_slp1(word, script).map_err(data)?;
    let r = s.split_word(&cw).map_err(split_failure)?;
    Ok(format!(
        "{} + {}",
        from_slp1(&r.pw1, script),
        from_slp1(&r.pw2, script)
    ))
}

fn cmd_split(a: SplitArgs, script: ScriptArg) -> CmdResult {
    let s = load_splitter(&a.tagger, &a.wsplitter)?;
    match (a.input, a.word) {
        (Some(path), _) => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for line in input_lines(&path)? {
                let shown =
                    split_line(&s, &line, script).unwrap_or_else(|f| format!("ERR {:#}", f.error));
                writeln!(out, "{shown}").map_err(data)?;
            }
            Ok(())
        }
        (None, Some(word)) => {
            println!("{}", split_line(&s, &word, script)?);
            Ok(())
        }
        (None, None) => Err(usage(anyhow!("split takes one compound or --input"))),
    }
}

fn cmd_eval(a: EvalArgs, script: ScriptArg) -> CmdResult {
    let need = |p: &Option<PathBuf>, flag: &str| {
        p.clone()
            .ok_or_else(|| usage(anyhow!("--{flag} is required for this kind")))
    };
    let test = read_triples(&a.test, script.into())?;
    let report: EvalReport = match a.kind {
        EvalKind::Join => {
            let m = load_joiner(&need(&a.model, "model")?)?;
            eval_join(&m, &test)
        }
        EvalKind::Split => {
            let s = load_splitter(
                &need(&a.tagger, "tagger")?,
                &need(&a.wsplitter, "wsplitter")?,
            )?;
            eval_split(&s, &test)
        }
        EvalKind::Roundtrip => {
            let m = load_joiner(&need(&a.model, "model")?)?;
            let s = load_splitter(
                &need(&a.tagger, "tagger")?,
                &need(&a.wsplitter, "wsplitter")?,
            )?;
            eval_round_trip(&m, &s, &test)
        }
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match a.format {
        ReportFormat::Table => {
            print!("{report}");
            println!(
                "{}: {}/{} = {:.4}",
                report.metric, report.correct, report.total, report.accuracy
            );
        }
        ReportFormat::Json => println!("{json}"),
    }
    if let Some(path) = &a.report {
        fs::write(path, json + "\n").map_err(data)?;
        let failures = path.with_extension("failures.tsv");
        write_lines(
            &failures,
            std::iter::once("input\texpected\tpredicted".to_string()).chain(
                report
                    .failures
                    .iter()
                    .map(|f| format!("{}\t{}\t{}", f.input, f.expected, f.predicted)),
            ),
        )
        .map_err(data)?;
    }
    Ok(())
}

fn cmd_translit(a: TranslitArgs) -> CmdResult {
    let convert = |text: &str| -> anyhow::Result<String> {
        let slp = match a.from {
            FromScheme::Slp1 => text.to_string(),
            FromScheme::Devanagari => devanagari_to_slp1(text)?,
            FromScheme::Itrans => itrans_to_slp1(text)?,
        };
        Ok(match a.to {
            ScriptArg::Slp1 => slp,
            ScriptArg::Devanagari => slp1_to_devanagari(&slp)?,
        })
    };
    let lines = if a.text.is_empty() {
        input_lines(Path::new("-"))?
    } else {
        a.text.clone()
    };
    for line in lines {
        println!("{}", convert(&line).map_err(data)?);
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs, script: ScriptArg) -> CmdResult {
    let lex = match &a.lexicon {
        Some(p) => Lexicon::load(p).map_err(data)?,
        None => Lexicon::bundled(),
    };
    let triples = generate_synthetic(&lex, a.count, a.seed).map_err(data)?;
    let lines = triples.iter().map(|t| {
        [&t.w1, &t.w2, &t.cw]
            .map(|w| from_slp1(w.as_str(), script))
            .join("\t")
    });
    match &a.out {
        Some(p) => write_lines(p, lines).map_err(data)?,
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for line in lines {
                writeln!(out, "{line}").map_err(data)?;
            }
        }
    }
    Ok(())
}

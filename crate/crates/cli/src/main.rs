use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mgtc::assembler::{assemble, to_dot, ParseMode, ProcessModel, Pst};
use mgtc::corpus::{
    convert_file, corpus_stats, load_corpus, save_corpus, split_ratio, stats_table, Document, LoadMode,
};
use mgtc::evaluator::{kfold_evaluate, process_similarity, scores_table, train_and_score, Scores};
use mgtc::model::{
    check_pair, load_coarse, load_fine, model_gradcheck, predict_document, CoarseModel, FineModel, HyperParams,
};
use mgtc::nn::GradCheckConfig;
use mgtc::trainer::{evaluate, train_coarse, train_fine, TrainConfig};
use mgtc::{Error, Result};

#[derive(Parser)]
#[command(name = "mgtc", version, about = "Multi-grained text classification and process model extraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print corpus statistics.
    Stats {
        /// One or more JSON-lines corpora; each becomes a column.
        #[arg(long, required = true, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
    /// Convert a tab-separated dataset dump to JSON lines.
    Convert {
        #[arg(long)]
        dump: PathBuf,
        /// Label mapping table overriding the defaults.
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the sentence-level tasks.
    TrainCoarse {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Final checkpoint.
        #[arg(long)]
        out: PathBuf,
    },
    /// Transfer a coarse checkpoint and train the word-level task.
    TrainFine {
        #[command(flatten)]
        data: DataArgs,
        /// Coarse checkpoint to start from.
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        freeze_shared: bool,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score checkpoints on a corpus.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        /// Coarse checkpoint (sentence-level tasks).
        #[arg(long)]
        checkpoint: PathBuf,
        /// Fine checkpoint (word-level task and process similarity).
        #[arg(long)]
        fine: Option<PathBuf>,
        /// Write the scores as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build process models from gold or predicted labels.
    Extract {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, conflicts_with = "predict", required_unless_present = "predict")]
        gold: bool,
        #[arg(long, requires = "checkpoint")]
        predict: bool,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "predict")]
        fine: Option<PathBuf>,
        /// Only this document.
        #[arg(long)]
        doc: Option<String>,
        /// Output directory for `<id>.dot` and `<id>.json`; DOT goes to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a tree saved as JSON to DOT.
    Render {
        #[arg(long)]
        pst: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic and finite-difference gradients of the full model.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Corpus to draw examples from; the built-in toy corpus otherwise.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[command(flatten)]
        arch: ArchArgs,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// N-fold cross validation of the whole pipeline.
    Kfold {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        arch: ArchArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        freeze_shared: bool,
        /// Write per-fold scores as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Reject malformed corpus lines and label streams instead of skipping them.
    #[arg(long)]
    strict: bool,
    /// Use only the training (`train`) or test (`test`) side of the 8:2 split under `--split-seed`.
    #[arg(long, value_parser = ["train", "test"])]
    split: Option<String>,
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
}

#[derive(Args)]
struct ArchArgs {
    #[arg(long, default_value_t = 100)]
    embed_dim: usize,
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    windows: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    filters: usize,
    #[arg(long, default_value_t = 2)]
    mlp_layers: usize,
    #[arg(long, default_value_t = 64)]
    head_hidden: usize,
    /// Weight of the ST1 loss; ST2 gets `1 - lambda1`.
    #[arg(long, default_value_t = 0.5)]
    lambda1: f64,
    #[arg(long, default_value = "final")]
    summary: String,
    #[arg(long, default_value = "embedding")]
    word_features: String,
    #[arg(long)]
    freeze_embeddings: bool,
    /// Pretrained word vectors, one `token v1 .. vd` line each.
    #[arg(long)]
    pretrained: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    min_freq: usize,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 1e-4)]
    lr: f64,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 100)]
    eval_every: usize,
    /// Training log as CSV.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Also save the checkpoint with the best dev score here.
    #[arg(long)]
    best: Option<PathBuf>,
    /// Record wall-clock milliseconds in the log.
    #[arg(long)]
    timing: bool,
}

impl ArchArgs {
    fn hyper(&self) -> Result<HyperParams> {
        let hp = HyperParams {
            embed_dim: self.embed_dim,
            hid: self.hidden,
            window_sizes: self.windows.clone(),
            filters_per_size: self.filters,
            mlp_layers: self.mlp_layers,
            head_hidden: self.head_hidden,
            summary: self.summary.clone(),
            word_features: self.word_features.clone(),
            freeze_embeddings: self.freeze_embeddings,
            ..HyperParams::default()
        };
        hp.with_lambdas(self.lambda1, 1.0 - self.lambda1)
    }
}

impl TrainArgs {
    fn config(&self, mut hp: HyperParams) -> TrainConfig {
        hp.seed = self.seed;
        hp.batch = self.batch;
        hp.lr = self.lr;
        hp.iterations = self.iterations;
        TrainConfig {
            hp,
            eval_every: self.eval_every,
            best_checkpoint: self.best.clone(),
            timing: self.timing,
            ..TrainConfig::default()
        }
    }
}

impl DataArgs {
    fn parse_mode(&self) -> ParseMode {
        if self.strict {
            ParseMode::Strict
        } else {
            ParseMode::Lenient
        }
    }

    fn load(&self) -> Result<Vec<Document>> {
        let docs = load(&self.corpus, self.strict)?;
        Ok(match self.split.as_deref() {
            Some("train") => split_ratio(&docs, self.split_seed)?.train,
            Some(_) => split_ratio(&docs, self.split_seed)?.test,
            None => docs,
        })
    }
}

fn load(path: &Path, strict: bool) -> Result<Vec<Document>> {
    let mode = if strict { LoadMode::Strict } else { LoadMode::Lenient };
    load_corpus(path, mode)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_pair(coarse: &Path, fine: Option<&Path>) -> Result<(CoarseModel, Option<FineModel>)> {
    let c = load_coarse(coarse)?;
    let f = fine.map(load_fine).transpose()?;
    if let Some(f) = &f {
        check_pair(&c, f)?;
    }
    Ok((c, f))
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Stats { corpus, strict } => {
            let mut cols = Vec::new();
            for p in &corpus {
                cols.push((file_stem(p), corpus_stats(&load(p, strict)?)));
            }
            print!("{}", stats_table(&cols));
        }
        Command::Convert { dump, mapping, out } => {
            let docs = convert_file(&dump, mapping.as_deref())?;
            save_corpus(&docs, &out)?;
            eprintln!("wrote {} documents to {}", docs.len(), out.display());
        }
        Command::TrainCoarse { data, arch, train, out } => {
            let docs = data.load()?;
            let mut cfg = train.config(arch.hyper()?);
            cfg.pretrained = arch.pretrained.clone();
            cfg.min_freq = arch.min_freq;
            cfg.final_checkpoint = Some(out);
            let outcome = train_coarse(&docs, &cfg)?;
            if let Some(p) = &train.log {
                outcome.log.write_csv(p)?;
            }
            if let Some((s, it)) = outcome.best {
                eprintln!("best dev score {s:.4} at iteration {it}");
            }
        }
        Command::TrainFine {
            data,
            checkpoint,
            freeze_shared,
            train,
            out,
        } => {
            let docs = data.load()?;
            let coarse = load_coarse(&checkpoint)?;
            let mut cfg = train.config(coarse.hp.clone());
            cfg.hp.freeze_shared = freeze_shared;
            cfg.final_checkpoint = Some(out);
            let outcome = train_fine(&docs, coarse, &cfg)?;
            if let Some(p) = &train.log {
                outcome.log.write_csv(p)?;
            }
            if let Some((s, it)) = outcome.best {
                eprintln!("best dev score {s:.4} at iteration {it}");
            }
        }
        Command::Eval {
            data,
            checkpoint,
            fine,
            out,
        } => {
            let docs = data.load()?;
            let (coarse, fine) = load_pair(&checkpoint, fine.as_deref())?;
            let acc = evaluate(&docs, Some(&coarse), fine.as_ref())?;
            let pme = match &fine {
                Some(f) => process_similarity(&docs, &coarse, Some(f))?,
                None => None,
            };
            let scores = Scores::from_accuracy(&acc, pme);
            print!("{}", scores_table(&scores));
            if let Some(p) = out {
                let cell = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.6}"));
                let [a, b, c, d] = scores.columns().map(cell);
                fs::write(p, format!("st1,st2,st3,pme\n{a},{b},{c},{d}\n"))?;
            }
        }
        Command::Extract {
            data,
            gold: _,
            predict,
            checkpoint,
            fine,
            doc,
            out,
        } => {
            let mut docs = data.load()?;
            if let Some(id) = &doc {
                docs.retain(|d| &d.id == id);
                if docs.is_empty() {
                    return Err(Error::Unknown(format!("no document with id `{id}`")));
                }
            }
            let models = match (predict, &checkpoint) {
                (true, Some(c)) => Some(load_pair(c, fine.as_deref())?),
                _ => None,
            };
            if out.is_none() && docs.len() > 1 {
                return Err(Error::Config("several documents selected; pass --doc or --out".into()));
            }
            if let Some(dir) = &out {
                fs::create_dir_all(dir)?;
            }
            for d in &docs {
                let labelled = match &models {
                    Some((c, f)) => predict_document(c, f.as_ref(), d)?,
                    None => d.clone(),
                };
                let (pst, model, diags) = assemble(&labelled, data.parse_mode())?;
                for diag in &diags {
                    eprintln!("{}: {diag}", d.id);
                }
                let dot = to_dot(&model);
                match &out {
                    Some(dir) => {
                        fs::write(dir.join(format!("{}.dot", d.id)), &dot)?;
                        fs::write(dir.join(format!("{}.json", d.id)), pst.to_json() + "\n")?;
                    }
                    None => print!("{dot}"),
                }
            }
        }
        Command::Render { pst, out } => {
            let tree: Pst = serde_json::from_str(&fs::read_to_string(&pst)?)
                .map_err(|e| Error::Parse(format!("{}: {e}", pst.display())))?;
            let model = ProcessModel::from_pst(&tree);
            model.validate()?;
            write_or_print(out.as_deref(), &to_dot(&model))?;
        }
        Command::Gradcheck {
            seed,
            corpus,
            arch,
            tolerance,
            out,
        } => {
            let docs = match &corpus {
                Some(p) => load(p, false)?,
                None => Vec::new(),
            };
            let mut hp = arch.hyper()?;
            hp.seed = seed;
            let cfg = GradCheckConfig {
                tolerance,
                ..GradCheckConfig::default()
            };
            let report = model_gradcheck(hp, &docs, cfg)?;
            write_or_print(out.as_deref(), &report.to_tsv())?;
            eprintln!("max relative error {:.3e}", report.max_rel_err());
            if !report.passed() {
                return Err(Error::GradCheckFailed {
                    max_rel_err: report.max_rel_err(),
                    tolerance,
                });
            }
        }
        Command::Kfold {
            data,
            folds,
            jobs,
            arch,
            train,
            freeze_shared,
            out,
        } => {
            let docs = data.load()?;
            let mut cfg = train.config(arch.hyper()?);
            cfg.hp.freeze_shared = freeze_shared;
            cfg.pretrained = arch.pretrained.clone();
            cfg.min_freq = arch.min_freq;
            cfg.best_checkpoint = None;
            let report = kfold_evaluate(&docs, folds, train.seed, jobs, |s| train_and_score(s, &cfg))?;
            print!("{}", report.to_text());
            if let Some(p) = out {
                fs::write(p, report.to_csv())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}

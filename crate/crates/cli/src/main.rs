mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use relcnn::corpus::{dataset_stats, load_dir, parse_brat, to_brat, Document, GoldRelation};
use relcnn::embeddings::{etype_vocab, FeatureVocabs, RelposVocab, Vocab};
use relcnn::eval::{score, ScoreReport};
use relcnn::labels::RelationLabel;
use relcnn::model::{
    ablate, ablation_csv, ablation_grid, postprocess_document, predict_document, train, ExampleObjective, WordInit,
};
use relcnn::nn::grad_check;
use relcnn::strategies::{merge_predictions, LabelSet, RelationPrediction};
use relcnn::textproc::{prepare_document, Example, FallbackTagger, PosFile, PosTagger, PreparedDoc, Provenance, TokenFeatures};
use relcnn::Model;

use config::{require_file, split_dir, HpArgs};
use output::{write_atomic, with_seed_column};

#[derive(Parser)]
#[command(name = "relcnn", version, about = "CNN relation extraction for scientific text")]
struct Cli {
    /// Data root holding `train/`, `dev/` and `test/`; default for the split flags.
    #[arg(long, env = "RELCNN_DATA", global = true)]
    data: Option<PathBuf>,
    /// Pre-computed POS tags (`doc<TAB>index<TAB>token<TAB>tag`); a built-in tagger is used otherwise.
    #[arg(long, global = true)]
    pos: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model; writes model.ckpt, history.csv and run.json to --out.
    Train {
        #[command(flatten)]
        hp: HpArgs,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        dev: Option<PathBuf>,
        /// GloVe text vectors of dimension word_dim; random initialization otherwise.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write predicted relations as `<id>.ann` standoff files.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_rules: bool,
    },
    /// Score predictions (a directory of .ann files or a model run on the gold documents).
    Evaluate {
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long, conflicts_with = "model", required_unless_present = "model")]
        pred: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        no_rules: bool,
        /// Exit with status 1 when micro-F1 falls below this value.
        #[arg(long)]
        min_f1: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and score the feature and preprocessing ablation grid.
    Ablate {
        #[command(flatten)]
        hp: HpArgs,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Candidate-pair counts per gold class.
    Stats {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic and finite-difference gradients of a randomly initialized model.
    Gradcheck {
        #[command(flatten)]
        hp: HpArgs,
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        /// Coordinates checked per parameter array.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 12)]
        tokens: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge the predictions of a hyponym and a synonym classifier.
    Merge {
        #[arg(long)]
        hypo: PathBuf,
        #[arg(long)]
        syn: PathBuf,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_rules: bool,
    },
}

enum Outcome {
    Done,
    BelowThreshold,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::BelowThreshold) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn tagger(pos: &Option<PathBuf>) -> Result<Box<dyn PosTagger>> {
    Ok(match pos {
        Some(path) => Box::new(PosFile::load(path)?),
        None => Box::new(FallbackTagger),
    })
}

fn prepare_dir(dir: &Path, tagger: &dyn PosTagger) -> Result<Vec<PreparedDoc>> {
    let docs = load_dir(dir).with_context(|| format!("loading {}", dir.display()))?;
    docs.iter()
        .map(|d| prepare_document(d, tagger).with_context(|| format!("preparing {}", d.id)))
        .collect()
}

fn word_init(embeddings: &Option<PathBuf>) -> Result<WordInit> {
    match embeddings {
        Some(path) => {
            require_file(path, "embeddings file")?;
            Ok(WordInit::Glove(path.clone()))
        }
        None => Ok(WordInit::Random),
    }
}

fn load_model(path: &Path) -> Result<Model> {
    require_file(path, "checkpoint")?;
    Model::load(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

/// The document with its gold relations replaced by the positive predictions.
fn with_predictions(doc: &Document, preds: &[RelationPrediction]) -> Document {
    Document {
        gold: preds
            .iter()
            .filter(|p| p.label.is_positive())
            .map(|p| GoldRelation {
                label: p.label,
                arg1: p.arg1.clone(),
                arg2: p.arg2.clone(),
            })
            .collect(),
        ..doc.clone()
    }
}

fn write_predictions(out: &Path, docs: &[PreparedDoc], preds: &[Vec<RelationPrediction>], meta: serde_json::Value) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut relations = 0;
    for (doc, p) in docs.iter().zip(preds) {
        let annotated = with_predictions(&doc.doc, p);
        relations += annotated.gold.len();
        write_atomic(&out.join(format!("{}.ann", doc.doc.id)), to_brat(&annotated).as_bytes())?;
    }
    write_atomic(&out.join("run.json"), serde_json::to_string_pretty(&meta)?.as_bytes())?;
    log::info!("{relations} relations in {} documents written to {}", docs.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    let tagger = tagger(&cli.pos)?;
    let tagger = tagger.as_ref();
    match cli.command {
        Command::Train {
            hp,
            train: train_dir,
            dev,
            embeddings,
            out,
        } => {
            let hp = hp.resolve()?;
            let init = word_init(&embeddings)?;
            let train_dir = split_dir(&train_dir, &cli.data, "train", "--train")?;
            let dev_dir = split_dir(&dev, &cli.data, "dev", "--dev")?;
            let train_docs = prepare_dir(&train_dir, tagger)?;
            let dev_docs = prepare_dir(&dev_dir, tagger)?;
            let (model, history) = train::<f64>(&train_docs, &dev_docs, &hp, &init)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_atomic(&out.join("model.ckpt"), &model.to_checkpoint().to_bytes()?)?;
            write_atomic(&out.join("history.csv"), history.to_csv().as_bytes())?;
            let meta = json!({
                "command": "train",
                "seed": hp.seed,
                "hyperparams": hp,
                "config_hash": model.config_hash(),
                "train": train_dir,
                "dev": dev_dir,
                "embeddings": embeddings,
                "best_epoch": history.best_epoch,
                "best_dev_micro_f1": history.best().dev_micro_f1,
                "glove_coverage": history.glove_coverage,
            });
            write_atomic(&out.join("run.json"), serde_json::to_string_pretty(&meta)?.as_bytes())?;
            println!(
                "best epoch {} of {}: dev micro-F1 {:.4}",
                history.best_epoch,
                history.epochs.len(),
                history.best().dev_micro_f1
            );
        }

        Command::Predict {
            model,
            input,
            out,
            no_rules,
        } => {
            let m = load_model(&model)?;
            let dir = split_dir(&input, &cli.data, "test", "--input")?;
            let docs = prepare_dir(&dir, tagger)?;
            let rules = m.hp.rules && !no_rules;
            let preds = docs
                .iter()
                .map(|d| predict_document(&m, d, rules))
                .collect::<Result<Vec<_>, _>>()?;
            let meta = json!({
                "command": "predict",
                "seed": m.hp.seed,
                "model": model,
                "config_hash": m.config_hash(),
                "input": dir,
                "rules": rules,
            });
            write_predictions(&out, &docs, &preds, meta)?;
        }

        Command::Evaluate {
            gold,
            pred,
            model,
            no_rules,
            min_f1,
            out,
        } => {
            let gold_dir = split_dir(&gold, &cli.data, "test", "--gold")?;
            let gold_docs = load_dir(&gold_dir).with_context(|| format!("loading {}", gold_dir.display()))?;
            let gold_rels: Vec<_> = gold_docs.iter().flat_map(|d| d.gold_relations()).collect();
            let (report, seed) = match (pred, model) {
                (Some(pred_dir), _) => {
                    config::require_dir(&pred_dir)?;
                    let mut pred_rels = Vec::new();
                    for d in &gold_docs {
                        let path = pred_dir.join(format!("{}.ann", d.id));
                        let ann = std::fs::read_to_string(&path)
                            .with_context(|| format!("reading predictions {}", path.display()))?;
                        let parsed = parse_brat(&d.id, &d.text, &ann)
                            .with_context(|| format!("parsing predictions {}", path.display()))?;
                        pred_rels.extend(parsed.gold_relations());
                    }
                    (score(&pred_rels, &gold_rels)?, run_seed(&pred_dir))
                }
                (None, Some(model)) => {
                    let m = load_model(&model)?;
                    let docs: Vec<PreparedDoc> = gold_docs
                        .iter()
                        .map(|d| prepare_document(d, tagger).with_context(|| format!("preparing {}", d.id)))
                        .collect::<Result<_>>()?;
                    let rules = m.hp.rules && !no_rules;
                    let mut pred_rels = Vec::new();
                    for d in &docs {
                        pred_rels.extend(
                            predict_document(&m, d, rules)?
                                .iter()
                                .filter(|p| p.label.is_positive())
                                .map(RelationPrediction::relation),
                        );
                    }
                    (score(&pred_rels, &gold_rels)?, Some(m.hp.seed))
                }
                (None, None) => bail!("one of --pred or --model is required"),
            };
            let csv = with_seed_column(&report.to_csv(), seed);
            print!("{csv}");
            if let Some(path) = out {
                write_atomic(&path, csv.as_bytes())?;
            }
            return Ok(threshold(&report, min_f1));
        }

        Command::Ablate {
            hp,
            train: train_dir,
            dev,
            test,
            embeddings,
            out,
        } => {
            let hp = hp.resolve()?;
            let init = word_init(&embeddings)?;
            let train_docs = prepare_dir(&split_dir(&train_dir, &cli.data, "train", "--train")?, tagger)?;
            let dev_docs = prepare_dir(&split_dir(&dev, &cli.data, "dev", "--dev")?, tagger)?;
            let test_docs = match (&test, &cli.data) {
                (None, Some(root)) if !root.join("test").is_dir() => None,
                (None, None) => None,
                _ => Some(prepare_dir(&split_dir(&test, &cli.data, "test", "--test")?, tagger)?),
            };
            let rows = ablate(&ablation_grid(&hp), &train_docs, &dev_docs, test_docs.as_deref(), &init)?;
            let csv = ablation_csv(&rows);
            write_atomic(&out, csv.as_bytes())?;
            print!("{csv}");
        }

        Command::Stats { input, out } => {
            let dir = split_dir(&input, &cli.data, "train", "--input")?;
            let docs = prepare_dir(&dir, tagger)?;
            let corpus: Vec<Document> = docs.iter().map(|d| d.doc.clone()).collect();
            let cands: Vec<_> = docs.iter().flat_map(|d| d.candidates.clone()).collect();
            let stats = dataset_stats(&corpus, &cands);
            if stats.gold_outside_candidates > 0 {
                log::warn!(
                    "{} of {} gold relations are not between candidate pairs",
                    stats.gold_outside_candidates,
                    stats.gold_relations
                );
            }
            let csv = stats.counts.to_csv();
            print!("{csv}");
            if let Some(path) = out {
                write_atomic(&path, csv.as_bytes())?;
            }
        }

        Command::Gradcheck {
            hp,
            eps,
            samples,
            tokens,
            out,
        } => {
            if !(1e-7..=1e-3).contains(&eps) {
                bail!("--eps must lie in [1e-7, 1e-3]");
            }
            let hp = hp.resolve()?;
            let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
            let vocabs = probe_vocabs(hp.relpos_clip);
            let labels = LabelSet::new(hp.strategy, hp.classes);
            let class = rng.gen_range(0..labels.len());
            let model = Model::new(&hp, labels, vocabs, None, &mut rng)?;
            let example = probe_example(&mut rng, tokens.max(hp.filter_height), &model.vocabs);
            let mut obj = ExampleObjective { model, example, class };
            let report = grad_check(&mut obj, eps, samples, &mut rng);
            let mut csv = String::from("param,max_rel_err,checked,skipped,seed\n");
            for p in &report.params {
                csv.push_str(&format!("{},{:.3e},{},{},{}\n", p.name, p.max_rel_err, p.checked, p.skipped, hp.seed));
            }
            print!("{csv}");
            if let Some(path) = out {
                write_atomic(&path, csv.as_bytes())?;
            }
        }

        Command::Merge {
            hypo,
            syn,
            input,
            out,
            no_rules,
        } => {
            let h = load_model(&hypo)?;
            let s = load_model(&syn)?;
            let is = |m: &Model, allowed: &[RelationLabel]| m.labels.labels().iter().all(|l| allowed.contains(l));
            if !is(&h, &[RelationLabel::None, RelationLabel::HyponymOf, RelationLabel::HypernymOf]) {
                bail!("{} is not a hyponym classifier (labels {:?})", hypo.display(), h.labels.labels());
            }
            if !is(&s, &[RelationLabel::None, RelationLabel::SynonymOf]) {
                bail!("{} is not a synonym classifier (labels {:?})", syn.display(), s.labels.labels());
            }
            let dir = split_dir(&input, &cli.data, "test", "--input")?;
            let docs = prepare_dir(&dir, tagger)?;
            let rules = !no_rules;
            let mut preds = Vec::new();
            for d in &docs {
                let merged = merge_predictions(&predict_document(&h, d, false)?, &predict_document(&s, d, false)?);
                preds.push(if rules { postprocess_document(d, &merged) } else { merged });
            }
            let meta = json!({
                "command": "merge",
                "seed": {"hypo": h.hp.seed, "syn": s.hp.seed},
                "hypo_model": hypo,
                "syn_model": syn,
                "input": dir,
                "rules": rules,
            });
            write_predictions(&out, &docs, &preds, meta)?;
        }
    }
    Ok(Outcome::Done)
}

fn threshold(report: &ScoreReport, min_f1: Option<f64>) -> Outcome {
    match min_f1 {
        Some(min) if report.micro.f1 < min => {
            eprintln!("micro-F1 {:.4} is below --min-f1 {min}", report.micro.f1);
            Outcome::BelowThreshold
        }
        _ => Outcome::Done,
    }
}

/// Seed recorded by `predict` or `merge` next to a prediction directory.
fn run_seed(dir: &Path) -> Option<u64> {
    let text = std::fs::read_to_string(dir.join("run.json")).ok()?;
    let meta: serde_json::Value = serde_json::from_str(&text).ok()?;
    meta.get("seed")?.as_u64()
}

fn probe_vocabs(clip: i32) -> FeatureVocabs {
    let mut word = Vocab::new();
    let mut pos = Vocab::new();
    for i in 0..30 {
        word.insert(&format!("w{i}"));
    }
    for i in 0..8 {
        pos.insert(&format!("P{i}"));
    }
    FeatureVocabs {
        word,
        pos,
        etype: etype_vocab(),
        relpos: RelposVocab::new(clip),
    }
}

fn probe_example(rng: &mut ChaCha8Rng, n: usize, v: &FeatureVocabs) -> Example {
    let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
    let clip = v.relpos.clip();
    let rel = |t: usize, e: usize| (t as i32 - e as i32).clamp(-clip, clip);
    Example {
        tokens: (0..n)
            .map(|t| TokenFeatures {
                word: rng.gen_range(1..v.word.len() as u32),
                relpos1: rel(t, a),
                relpos2: rel(t, b),
                etype: rng.gen_range(1..v.etype.len() as u32),
                pos: rng.gen_range(1..v.pos.len() as u32),
            })
            .collect(),
        label: RelationLabel::None,
        provenance: Provenance {
            doc_id: "probe".into(),
            arg1: "T1".into(),
            arg2: "T2".into(),
            text_order: a <= b,
        },
    }
}

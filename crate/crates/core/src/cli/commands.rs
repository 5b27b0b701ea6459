use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};

use super::*;
use crate::corpus::{
    char_slice, corpus_kappa, corpus_stats, generate_synthetic, load_corpus, save_corpus,
    split_corpus, split_sentences, Document, PhraseInventory, RuleSplitter,
};
use crate::encoder::{
    export_embeddings, finetune_ner, grad_check, load_checkpoint, predict, pretrain_mlm,
    resize_for_vocab, save_checkpoint, write_loss_csv, AdamConfig, Checkpoint, GradCheckOptions,
    InitPolicy, MaskingConfig, ModelConfig, NerDataset, NerHyper, PretrainConfig,
};
use crate::eval::{
    aggregate_runs, categorize_errors, score, f1_table, tsne, write_coords, MatchReport, TsneConfig,
};
use crate::tokenizer::{load_vocab, tokenize, Vocabulary};
use crate::vocab_expand::{
    annotated_tokens, builtin_curated_wordlist, coverage, coverage_table, expand_curated,
    expand_frequency, extract_corpus_candidates, load_wordlist, CandidateFilters,
};

fn read_corpus(path: &Path) -> Result<Vec<Document>> {
    load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn read_vocab(path: Option<&Path>) -> Result<Vocabulary> {
    match path {
        None => Ok(Vocabulary::builtin_base()),
        Some(p) if p.as_os_str() == "builtin" => Ok(Vocabulary::builtin_base()),
        Some(p) => load_vocab(p).with_context(|| format!("loading vocabulary {}", p.display())),
    }
}

fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    load_checkpoint(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn write(out: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn write_json<T: serde::Serialize>(out: &Path, name: &str, value: &T) -> Result<PathBuf> {
    write(out, name, serde_json::to_string_pretty(value)? + "\n")
}

fn model_config(m: &ModelArgs, vocab_size: usize, seed: u64) -> ModelConfig {
    ModelConfig {
        n_layers: m.layers,
        d_model: m.d_model,
        n_heads: m.heads,
        d_ff: m.d_ff,
        max_positions: m.max_positions,
        vocab_size,
        n_tags: crate::corpus::N_TAGS,
        dropout_rate: m.dropout,
        seed,
    }
}

fn sentences(docs: &[Document]) -> Vec<String> {
    docs.iter()
        .flat_map(|d| {
            split_sentences(&d.text)
                .into_iter()
                .map(|(s, e)| char_slice(&d.text, s, e))
        })
        .collect()
}

/// Splits `NAME=VALUE`; without `=` the name is the file stem.
fn named(spec: &str) -> (String, String) {
    match spec.split_once('=') {
        Some((n, v)) => (n.to_string(), v.to_string()),
        None => {
            let stem = Path::new(spec)
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| spec.to_string());
            (stem, spec.to_string())
        }
    }
}

pub fn run(common: &Common, command: &Command) -> Result<()> {
    let out = common.out.as_path();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let name = command.name();
    match command {
        Command::Synth(a) => {
            echo_config(common, name, a)?;
            synth(out, a)
        }
        Command::Stats(a) => {
            echo_config(common, name, a)?;
            let docs = read_corpus(&a.corpus)?;
            let stats = corpus_stats(&docs, &RuleSplitter);
            write(out, "stats.tsv", stats.to_table())?;
            write_json(out, "stats.json", &stats)?;
            print!("{}", stats.to_table());
            Ok(())
        }
        Command::BuildVocab(a) => {
            echo_config(common, name, a)?;
            build_vocab(out, a)
        }
        Command::Coverage(a) => {
            echo_config(common, name, a)?;
            let docs = read_corpus(&a.corpus)?;
            let mut reports = Vec::new();
            for spec in &a.vocabs {
                let (n, p) = named(spec);
                let v = read_vocab(Some(Path::new(&p)))?;
                reports.push((n, coverage(&v, &docs)));
            }
            let cols: Vec<(&str, _)> = reports.iter().map(|(n, r)| (n.as_str(), r)).collect();
            let table = coverage_table(&cols);
            write(out, "coverage.tsv", &table)?;
            write_json(out, "coverage.json", &reports)?;
            print!("{table}");
            Ok(())
        }
        Command::Tokenize(a) => {
            echo_config(common, name, a)?;
            let v = read_vocab(a.vocab.as_deref())?;
            let texts: Vec<(String, String)> = match (&a.text, &a.corpus) {
                (Some(t), _) => vec![("text".into(), t.clone())],
                (None, Some(c)) => read_corpus(c)?
                    .into_iter()
                    .map(|d| (d.doc_id, d.text))
                    .collect(),
                (None, None) => bail!("either --text or --corpus is required"),
            };
            let mut lines = String::new();
            for (id, text) in &texts {
                let t = tokenize(text, &v);
                let row = serde_json::json!({
                    "doc_id": id,
                    "pieces": t.pieces,
                    "ids": t.ids,
                    "offsets": t.offsets,
                });
                lines.push_str(&row.to_string());
                lines.push('\n');
                if a.text.is_some() {
                    println!("{}", t.pieces.join(" "));
                }
            }
            write(out, "tokens.jsonl", lines)?;
            Ok(())
        }
        Command::Pretrain(a) => {
            echo_config(common, name, a)?;
            let v = read_vocab(a.vocab.as_deref())?;
            let docs = read_corpus(&a.corpus)?;
            let ckpt = match &a.init {
                Some(p) => read_checkpoint(p)?,
                None => Checkpoint::init(model_config(&a.model, v.len(), a.seed), &v)?,
            };
            let cfg = PretrainConfig {
                steps: a.steps,
                batch_size: a.batch_size,
                max_len: a.max_len,
                masking: MaskingConfig {
                    mask_frac: a.mask_frac,
                    ..MaskingConfig::default()
                },
                adam: AdamConfig {
                    lr: a.lr,
                    ..AdamConfig::default()
                },
                seed: a.seed,
            };
            let sents = sentences(&docs);
            let texts: Vec<&str> = sents.iter().map(String::as_str).collect();
            let (trained, records) = pretrain_mlm(&ckpt, &texts, &v, &cfg)?;
            save_checkpoint(&trained, out.join("checkpoint.bin"))?;
            write_loss_csv(BufWriter::new(File::create(out.join("loss.csv"))?), &records)?;
            if let Some(r) = records.last() {
                println!("step {} loss {:.4} masked accuracy {:.4}", r.step, r.loss, r.accuracy);
            }
            Ok(())
        }
        Command::Resize(a) => {
            echo_config(common, name, a)?;
            let old = read_vocab(a.old_vocab.as_deref())?;
            let new = read_vocab(Some(&a.new_vocab))?;
            let policy: InitPolicy = a.policy.parse()?;
            let ckpt = read_checkpoint(&a.checkpoint)?;
            let resized = resize_for_vocab(&ckpt, &old, &new, policy, a.seed)?;
            save_checkpoint(&resized, out.join("checkpoint.bin"))?;
            let changed: Vec<(usize, &str)> = (0..new.len())
                .filter(|&i| old.token(i as u32) != new.token(i as u32))
                .map(|i| (i, new.token(i as u32).unwrap_or_default()))
                .collect();
            write_json(out, "rewritten.json", &changed)?;
            println!("{} rows re-initialized ({policy})", changed.len());
            Ok(())
        }
        Command::Finetune(a) => {
            echo_config(common, name, a)?;
            let v = read_vocab(a.vocab.as_deref())?;
            let docs = read_corpus(&a.train)?;
            let ckpt = match &a.checkpoint {
                Some(p) => read_checkpoint(p)?,
                None => Checkpoint::init(model_config(&a.model, v.len(), a.seed), &v)?,
            };
            let data = NerDataset::build(&docs, &v, a.max_len)?;
            let hyper = NerHyper {
                max_len: a.max_len,
                batch_size: a.batch_size,
                epochs: a.epochs,
                adam: AdamConfig {
                    lr: a.lr,
                    ..AdamConfig::default()
                },
                seed: a.seed,
            };
            let (trained, records) = finetune_ner(&ckpt, &data, &hyper)?;
            save_checkpoint(&trained, out.join("checkpoint.bin"))?;
            write_loss_csv(BufWriter::new(File::create(out.join("loss.csv"))?), &records)?;
            if let Some(r) = records.last() {
                println!("step {} loss {:.4} tag accuracy {:.4}", r.step, r.loss, r.accuracy);
            }
            Ok(())
        }
        Command::Predict(a) => {
            echo_config(common, name, a)?;
            let v = read_vocab(a.vocab.as_deref())?;
            let ckpt = read_checkpoint(&a.checkpoint)?;
            let docs = read_corpus(&a.corpus)?;
            let mut preds = Vec::with_capacity(docs.len());
            for d in &docs {
                let spans = predict(&ckpt, &d.text, &v, a.max_len)?;
                preds.push(Document::new(d.doc_id.clone(), d.text.clone(), spans)?);
            }
            save_corpus(out.join("predictions.jsonl"), &preds)?;
            println!("{} documents, {} spans", preds.len(), preds.iter().map(|d| d.entities.len()).sum::<usize>());
            Ok(())
        }
        Command::Evaluate(a) => {
            echo_config(common, name, a)?;
            let report = score(&read_corpus(&a.gold)?, &read_corpus(&a.pred)?)?;
            write_json(out, "report.json", &report)?;
            write(out, "report.tsv", report.to_tsv())?;
            println!(
                "exact micro {:.4} macro {:.4}; lenient micro {:.4} macro {:.4}",
                report.exact.micro.f1, report.exact.macro_f1, report.lenient.micro.f1, report.lenient.macro_f1
            );
            Ok(())
        }
        Command::Errors(a) => {
            echo_config(common, name, a)?;
            let b = categorize_errors(&read_corpus(&a.gold)?, &read_corpus(&a.pred)?)?;
            write(out, "errors.tsv", b.to_tsv())?;
            write_json(out, "errors.json", &b)?;
            println!(
                "boundary_mismatch {} missing {} type_confusion {} spurious {}",
                b.boundary_mismatch, b.missing, b.type_confusion, b.spurious
            );
            Ok(())
        }
        Command::Aggregate(a) => {
            echo_config(common, name, a)?;
            let mut summaries = Vec::new();
            for spec in &a.columns {
                let (n, paths) = spec
                    .split_once('=')
                    .with_context(|| format!("--column {spec:?}: expected NAME=REPORT[,REPORT...]"))?;
                let mut reports = Vec::new();
                for p in paths.split(',').filter(|p| !p.is_empty()) {
                    let text = fs::read_to_string(p).with_context(|| format!("reading report {p}"))?;
                    let r: MatchReport =
                        serde_json::from_str(&text).with_context(|| format!("parsing report {p}"))?;
                    reports.push(r);
                }
                summaries.push((n.to_string(), aggregate_runs(&reports, a.confidence)?));
            }
            let cols: Vec<(&str, _)> = summaries.iter().map(|(n, s)| (n.as_str(), s)).collect();
            let table = f1_table(&cols)?;
            write(out, "f1_table.tsv", &table)?;
            write_json(out, "aggregate.json", &summaries)?;
            print!("{table}");
            Ok(())
        }
        Command::Tsne(a) => {
            echo_config(common, name, a)?;
            let v = read_vocab(a.vocab.as_deref())?;
            let ckpt = read_checkpoint(&a.checkpoint)?;
            let docs = read_corpus(&a.corpus)?;
            let (mut tokens, mut labels) = (Vec::new(), Vec::new());
            for (label, set) in annotated_tokens(&docs) {
                for t in set {
                    tokens.push(t);
                    labels.push(label.code().to_string());
                }
            }
            let emb = export_embeddings(&ckpt, &v, &tokens);
            let cfg = TsneConfig {
                perplexity: a.perplexity,
                iterations: a.iterations,
                learning_rate: a.learning_rate,
                seed: a.seed,
                ..TsneConfig::default()
            };
            let r = tsne(&emb.matrix, &cfg)?;
            for n in &r.notices {
                log::warn!("{n}");
            }
            write_coords(BufWriter::new(File::create(out.join("coords.csv"))?), &tokens, &labels, &r.coords)?;
            let mut kl = String::from("iteration,kl\n");
            for (it, v) in &r.kl_trace {
                kl.push_str(&format!("{it},{v}\n"));
            }
            write(out, "kl.csv", kl)?;
            println!("{} points, final KL {:.4}", tokens.len(), r.kl_trace.last().map_or(0.0, |x| x.1));
            Ok(())
        }
        Command::Kappa(a) => {
            echo_config(common, name, a)?;
            let k = corpus_kappa(&read_corpus(&a.a)?, &read_corpus(&a.b)?)?;
            write_json(out, "kappa.json", &serde_json::json!({ "kappa": k }))?;
            println!("{k:.4}");
            Ok(())
        }
        Command::Gradcheck(a) => {
            echo_config(common, name, a)?;
            let mut cfg = ModelConfig::tiny(a.vocab_size);
            cfg.n_layers = a.layers;
            cfg.d_model = a.d_model;
            cfg.n_heads = a.heads;
            cfg.d_ff = a.d_ff;
            cfg.seed = a.seed;
            let opts = GradCheckOptions {
                epsilon: a.epsilon,
                samples_per_tensor: a.samples,
                seed: a.seed,
                ..GradCheckOptions::default()
            };
            let r = grad_check(&cfg, &opts)?;
            write_json(out, "gradcheck.json", &r)?;
            println!("max relative error {:.3e}", r.max_rel_error);
            ensure!(
                r.max_rel_error <= a.tolerance,
                "gradient check failed: {:.3e} > {:.1e} ({:?})",
                r.max_rel_error,
                a.tolerance,
                r.worst().map(|w| (&w.loss, &w.name))
            );
            Ok(())
        }
    }
}

fn synth(out: &Path, a: &SynthArgs) -> Result<()> {
    let inventory = match &a.inventory {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing inventory {}", p.display()))?
        }
        None => PhraseInventory::default(),
    };
    let docs = generate_synthetic(a.seed, a.docs, &inventory)?;
    save_corpus(out.join("corpus.jsonl"), &docs)?;
    if a.test_fraction > 0.0 {
        let (train, test) = split_corpus(&docs, a.test_fraction, a.seed)?;
        save_corpus(out.join("train.jsonl"), &train)?;
        save_corpus(out.join("test.jsonl"), &test)?;
        println!("{} documents ({} train, {} test)", docs.len(), train.len(), test.len());
    } else {
        println!("{} documents", docs.len());
    }
    Ok(())
}

fn build_vocab(out: &Path, a: &BuildVocabArgs) -> Result<()> {
    let base = read_vocab(a.base_vocab.as_deref())?;
    let expansion = match a.mode {
        VocabMode::Base => {
            base.save(out.join("vocab.txt"))?;
            println!("{} tokens, {} free slots", base.len(), base.placeholder_ids().len());
            return Ok(());
        }
        VocabMode::Freq => {
            let corpus = a.corpus.as_deref().context("--corpus is required in freq mode")?;
            let docs = read_corpus(corpus)?;
            let filters = CandidateFilters {
                min_count: a.min_count,
                require_alpha: a.require_alpha,
                min_len: a.min_len,
            };
            let candidates = extract_corpus_candidates(&docs, &base, &filters);
            write(out, "candidates.tsv", candidates.to_tsv())?;
            expand_frequency(&base, &candidates, a.k)?
        }
        VocabMode::Curated => {
            let words = match &a.wordlist {
                Some(p) => load_wordlist(p)?,
                None => builtin_curated_wordlist(),
            };
            expand_curated(&base, &words)?
        }
    };
    for n in &expansion.notices {
        log::warn!("{n}");
    }
    expansion.vocab.save(out.join("vocab.txt"))?;
    let mut rewritten = String::from("id\tword\n");
    for (id, w) in &expansion.rewritten {
        rewritten.push_str(&format!("{id}\t{w}\n"));
    }
    write(out, "rewritten.tsv", rewritten)?;
    println!("{} slots rewritten", expansion.rewritten.len());
    Ok(())
}

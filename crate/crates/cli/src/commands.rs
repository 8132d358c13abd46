use std::fs::{self, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use combcnn_core::datasets::{
    gen_palindrome_dataset, gen_password_dataset, password_scheme, permute_dataset, read_dataset,
    write_dataset, LabeledDataset, Split, SplitCounts, Task, STRONG_THRESHOLD,
};
use combcnn_core::nn::{
    build_char_cnn, build_combinatorial_cnn, evaluate, gradcheck_suite, load_checkpoint,
    metrics_csv_row, save_checkpoint, train_with, InputSpec, OptimizerKind, TrainConfig,
    GRADCHECK_TOLERANCE, METRICS_CSV_HEADER,
};
use combcnn_core::{
    check_theorem, combinatorics_map, encode_dense, reference, Alphabet, EncodingConfig, Error,
    Normalization, Word,
};

use crate::format::general;
use crate::manifest::RunManifest;
use crate::{
    CliError, EquivArgs, EvalArgs, GenArgs, GenTask, GradcheckArgs, ModelArg, NormArg,
    OptimizerArg, TaskArg, TensorArgs, TensorFormat, TrainArgs,
};

type CliResult = Result<(), CliError>;

fn create_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

fn word_arg(text: &str, flag: &str) -> Result<Word, CliError> {
    Word::new(text.chars().collect()).map_err(|e| CliError::usage(format!("{flag}: {e}")))
}

fn normalization(arg: NormArg) -> Normalization {
    match arg {
        NormArg::None => Normalization::None,
        NormArg::Log => Normalization::LogSaturating,
    }
}

fn stdout_error(e: io::Error) -> CliError {
    CliError::io(Path::new("<stdout>"), e)
}

pub fn gen(args: &GenArgs) -> CliResult {
    let start = Instant::now();
    let counts = SplitCounts {
        train: args.train,
        val: args.val,
        test: args.test,
    };
    let (task, splits) = match args.task {
        GenTask::Palindromes => (Task::Palindrome, gen_palindrome_dataset(args.len, counts, args.seed)?),
        GenTask::Passwords => (Task::Password, gen_password_dataset(args.len, counts, args.seed)?),
    };
    create_dir(&args.out)?;

    let mut manifest = RunManifest::new("gen");
    manifest
        .param("task", task.name())
        .param("len", args.len)
        .param("per_class", json!({"train": args.train, "val": args.val, "test": args.test}))
        .param("alphabet", task.alphabet().letters().iter().collect::<String>());
    match task {
        Task::Palindrome => {
            manifest.param(
                "generator",
                json!({
                    "positive": format!("mirror a uniform {}-letter prefix", args.len.div_ceil(2)),
                    "negative": "uniform word, rejected if it is a palindrome",
                }),
            );
        }
        Task::Password => {
            let scheme = password_scheme(args.len)?;
            manifest.param(
                "generator",
                json!({
                    "strong_threshold": STRONG_THRESHOLD,
                    "strength": "1 - 2^(-len*log2(distinct)/30)",
                    "positive": "uniform over the alphabet, kept when strong",
                    "strong_min_distinct": scheme.strong_min_distinct,
                    "negative": "uniform over a random pool of the alphabet, kept when weak",
                    "weak_pool_sizes": [scheme.weak_pool_sizes.0, scheme.weak_pool_sizes.1],
                }),
            );
        }
    }
    manifest.seeds.insert("data", args.seed);
    for ds in &splits {
        let split = ds.split.expect("generated splits are tagged");
        let path = args.out.join(format!("{split}.tsv"));
        write_dataset(ds, &path)?;
        println!("wrote {} ({} items, {} positive)", path.display(), ds.len(), ds.positives());
        manifest.outputs.push(path);
        manifest.result(split_key(split), ds.len());
    }
    manifest.write(&args.out.join("manifest.json"), start.elapsed())
}

fn split_key(split: Split) -> &'static str {
    match split {
        Split::Train => "train_items",
        Split::Val => "val_items",
        Split::Test => "test_items",
    }
}

pub fn tensor(args: &TensorArgs) -> CliResult {
    let word = word_arg(&args.word, "--word")?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match args.format {
        TensorFormat::Sparse => {
            if args.nu_cap.is_some() || args.norm.is_some() {
                return Err(CliError::usage("--nu-cap and --norm apply to the dense format only"));
            }
            for t in combinatorics_map(&word).triples() {
                writeln!(out, "{} {} {} {}", t.lambda, t.mu, t.nu, t.count).map_err(stdout_error)?;
            }
        }
        TensorFormat::Dense => {
            let mut cfg = EncodingConfig::for_length(word.len());
            if let Some(k) = args.nu_cap {
                cfg.nu_cap_len = Some(k);
            }
            cfg.normalization = normalization(args.norm.unwrap_or(NormArg::Log));
            let t = encode_dense(&word, &cfg)?;
            writeln!(out, "{} {} {}", t.shape.h, t.shape.w, t.shape.c).map_err(stdout_error)?;
            for v in &t.values {
                writeln!(out, "{}", general(*v as f64, 9)).map_err(stdout_error)?;
            }
        }
    }
    out.flush().map_err(stdout_error)
}

pub fn equiv(args: &EquivArgs) -> CliResult {
    let a = word_arg(&args.a, "--a")?;
    let b = word_arg(&args.b, "--b")?;
    let (equal, bijection) = if args.oracle {
        (
            reference::combinatorics(&a) == reference::combinatorics(&b),
            reference::find_bijection_exhaustive(&a, &b),
        )
    } else {
        let r = check_theorem(&a, &b);
        (r.tensor_equal, r.bijection)
    };
    let agree = equal == bijection.is_some();
    let shown = bijection.map_or_else(|| "none".to_string(), |phi| phi.to_string());
    println!("equal={equal} bijection={shown} agree={agree}");
    if agree {
        Ok(())
    } else {
        Err(CliError::invariant(format!(
            "map equality ({equal}) disagrees with bijection existence for {a} and {b}"
        )))
    }
}

/// Rejects items with letters outside the task alphabet, naming the line.
fn check_alphabet(ds: &LabeledDataset, alphabet: &Alphabet, path: &Path) -> CliResult {
    for (line, (word, _)) in ds.items.iter().enumerate() {
        if let Some((position, &symbol)) = word.letters().iter().enumerate().find(|(_, c)| !alphabet.contains(**c)) {
            return Err(CliError::usage(format!(
                "{}:{}: {}",
                path.display(),
                line + 1,
                Error::SymbolOutsideAlphabet { symbol, position }
            )));
        }
    }
    Ok(())
}

fn load_split(dir: &Path, split: Split, alphabet: &Alphabet) -> Result<(LabeledDataset, PathBuf), CliError> {
    let path = dir.join(format!("{split}.tsv"));
    let ds = read_dataset(&path)?;
    check_alphabet(&ds, alphabet, &path)?;
    Ok((ds, path))
}

pub fn train(args: &TrainArgs) -> CliResult {
    let start = Instant::now();
    let task = match args.task {
        TaskArg::Palindrome => Task::Palindrome,
        TaskArg::Password => Task::Password,
    };
    let alphabet = task.alphabet();
    let (train_ds, train_path) = load_split(&args.data, Split::Train, &alphabet)?;
    let (val_ds, val_path) = load_split(&args.data, Split::Val, &alphabet)?;
    let test_path = args.data.join("test.tsv");
    let test = if test_path.exists() {
        Some(load_split(&args.data, Split::Test, &alphabet)?)
    } else {
        None
    };
    let n = train_ds.word_length;

    let model = match args.model {
        ModelArg::Combinatorial => {
            let mut cfg = EncodingConfig::for_length(n);
            if args.no_nu_cap {
                cfg.nu_cap_len = None;
            } else if let Some(k) = args.nu_cap {
                cfg.nu_cap_len = Some(k);
            }
            cfg.normalization = normalization(args.norm);
            build_combinatorial_cnn(&cfg, alphabet, args.seed)?
        }
        ModelArg::Char => {
            if args.nu_cap.is_some() || args.no_nu_cap {
                return Err(CliError::usage("--nu-cap applies to the combinatorial model only"));
            }
            build_char_cnn(n, alphabet, args.seed)?
        }
    };
    let optimizer = match args.optimizer {
        OptimizerArg::Adam => OptimizerKind::Adam,
        OptimizerArg::Sgd => OptimizerKind::SgdMomentum { momentum: args.momentum },
    };
    let cfg = TrainConfig {
        batch_size: args.batch_size,
        steps_per_epoch: args.steps_per_epoch,
        epochs: args.epochs,
        learning_rate: args.lr,
        optimizer,
        seed: args.seed,
    };
    let encoder = model.encoder()?;

    create_dir(&args.out)?;
    let metrics_path = args.out.join("metrics.csv");
    fs::write(&metrics_path, METRICS_CSV_HEADER).map_err(|e| CliError::io(&metrics_path, e))?;
    let mut metrics = OpenOptions::new()
        .append(true)
        .open(&metrics_path)
        .map_err(|e| CliError::io(&metrics_path, e))?;
    let mut write_error = None;
    let outcome = train_with(model.clone(), &train_ds, &val_ds, &cfg, encoder.as_ref(), |r| {
        println!(
            "epoch {}/{} train_loss={:.6} train_acc={:.4} val_acc={:.4}",
            r.epoch, cfg.epochs, r.train_loss, r.train_acc, r.val_acc
        );
        if write_error.is_none() {
            if let Err(e) = metrics.write_all(metrics_csv_row(r).as_bytes()) {
                write_error = Some(e);
            }
        }
    })?;
    if let Some(e) = write_error {
        return Err(CliError::io(&metrics_path, e));
    }

    let ckpt_path = args.out.join("model.ckpt");
    save_checkpoint(&outcome.model, &ckpt_path)?;

    let mut manifest = RunManifest::new("train");
    manifest
        .param("task", task.name())
        .param("model", format!("{:?}", args.model).to_lowercase())
        .param("word_length", n)
        .param("epochs", cfg.epochs)
        .param("batch_size", cfg.batch_size)
        .param("steps_per_epoch", cfg.steps_per_epoch)
        .param("learning_rate", cfg.learning_rate)
        .param("optimizer", optimizer.name())
        .param("input_shape", model.network.input_shape().to_string())
        .param("parameter_count", model.network.param_count());
    if let OptimizerKind::SgdMomentum { momentum } = optimizer {
        manifest.param("momentum", momentum);
    }
    if let InputSpec::Combinatorial(enc) = model.input {
        manifest.param(
            "encoding",
            json!({
                "pad_to": enc.pad_to,
                "nu_cap_len": enc.nu_cap_len,
                "normalization": enc.normalization.name(),
            }),
        );
    }
    manifest.seeds.insert("init", args.seed);
    manifest.seeds.insert("batch_order", args.seed);
    manifest.inputs.extend([train_path, val_path]);

    manifest.result("initial_loss", outcome.initial_loss);
    if let Some(last) = outcome.history.last() {
        manifest
            .result("final_train_loss", last.train_loss)
            .result("final_train_acc", last.train_acc)
            .result("final_val_acc", last.val_acc);
        let best = outcome
            .history
            .iter()
            .fold(last, |b, r| if r.val_acc > b.val_acc { r } else { b });
        manifest.result("best_val_acc", best.val_acc).result("best_val_epoch", best.epoch);
    }
    if let Some((test_ds, path)) = &test {
        let acc = evaluate(&outcome.model, test_ds, encoder.as_ref())?;
        println!("test_acc={acc:.4}");
        manifest.result("test_acc", acc);
        manifest.inputs.push(path.clone());
    }
    manifest.outputs.extend([ckpt_path, metrics_path]);
    manifest.write(&args.out.join("manifest.json"), start.elapsed())
}

pub fn eval(args: &EvalArgs) -> CliResult {
    let start = Instant::now();
    let model = load_checkpoint(&args.checkpoint)?;
    let mut ds = read_dataset(&args.data)?;
    check_alphabet(&ds, &model.alphabet, &args.data)?;
    if let Some(seed) = args.permute_seed {
        ds = permute_dataset(&ds, &model.alphabet, seed)?;
    }
    let encoder = model.encoder()?;
    let accuracy = evaluate(&model, &ds, encoder.as_ref())?;
    println!(
        "accuracy={accuracy:.6} items={} permuted={}",
        ds.len(),
        args.permute_seed.is_some()
    );

    let manifest_path = args.manifest.clone().unwrap_or_else(|| {
        args.checkpoint
            .parent()
            .unwrap_or(Path::new("."))
            .join("eval-manifest.json")
    });
    let mut manifest = RunManifest::new("eval");
    manifest.param("permuted", args.permute_seed.is_some());
    if let Some(seed) = args.permute_seed {
        manifest.seeds.insert("permutation", seed);
    }
    manifest.seeds.insert("model", model.seed);
    manifest.inputs.extend([args.checkpoint.clone(), args.data.clone()]);
    manifest.result("accuracy", accuracy).result("items", ds.len());
    manifest.write(&manifest_path, start.elapsed())
}

pub fn gradcheck(args: &GradcheckArgs) -> CliResult {
    if args.configs == 0 {
        return Err(CliError::usage("--configs must be at least 1"));
    }
    let checks = gradcheck_suite(args.seed, args.configs);
    println!("layer max_rel_error checked status");
    for c in &checks {
        let status = if c.passed() { "ok" } else { "FAIL" };
        println!("{} {:.3e} {} {status}", c.kind, c.max_rel_error, c.checked);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.kind).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::invariant(format!(
            "relative gradient error >= {GRADCHECK_TOLERANCE:e} in {}",
            failed.join(", ")
        )))
    }
}

//! Datasets, checkpoints and training on small problems.

use combcnn_core::datasets::{
    gen_palindrome_dataset, gen_password_dataset, permute_dataset, read_dataset, strength_score,
    write_dataset, SplitCounts, Task,
};
use combcnn_core::nn::{
    build_char_cnn, build_combinatorial_cnn, evaluate, load_checkpoint, predict, save_checkpoint,
    train, write_metrics_csv, TrainConfig,
};
use combcnn_core::{EncodingConfig, Error};

fn small_counts() -> SplitCounts {
    SplitCounts { train: 40, val: 20, test: 20 }
}

#[test]
fn dataset_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for task in [Task::Palindrome, Task::Password] {
        let splits = match task {
            Task::Palindrome => gen_palindrome_dataset(6, small_counts(), 3).unwrap(),
            Task::Password => gen_password_dataset(15, small_counts(), 3).unwrap(),
        };
        for ds in &splits {
            let path = dir.path().join(format!("{}.tsv", ds.split.unwrap()));
            write_dataset(ds, &path).unwrap();
            let back = read_dataset(&path).unwrap();
            assert_eq!(back.items, ds.items);
            assert_eq!(back.split, ds.split);
        }
    }
}

#[test]
fn generation_is_reproducible_and_balanced() {
    let a = gen_password_dataset(15, small_counts(), 11).unwrap();
    let b = gen_password_dataset(15, small_counts(), 11).unwrap();
    assert_eq!(a, b);
    for ds in &a {
        assert_eq!(2 * ds.positives(), ds.len());
        for (word, label) in &ds.items {
            assert_eq!(strength_score(word).is_strong(), *label == 1);
        }
    }
    assert_ne!(gen_password_dataset(15, small_counts(), 12).unwrap()[0], a[0]);
}

#[test]
fn permuting_passwords_keeps_scores() {
    let [train_ds, _, _] = gen_password_dataset(15, small_counts(), 5).unwrap();
    let permuted = permute_dataset(&train_ds, &Task::Password.alphabet(), 9).unwrap();
    for ((a, la), (b, lb)) in train_ds.items.iter().zip(&permuted.items) {
        assert_eq!(la, lb);
        assert_eq!(strength_score(a), strength_score(b));
    }
}

#[test]
fn checkpoint_round_trip_preserves_predictions() {
    let [train_ds, val_ds, _] = gen_palindrome_dataset(6, small_counts(), 1).unwrap();
    let model = build_combinatorial_cnn(&EncodingConfig::for_length(6), Task::Palindrome.alphabet(), 4).unwrap();
    let encoder = model.encoder().unwrap();
    let cfg = TrainConfig { epochs: 2, steps_per_epoch: 3, batch_size: 8, seed: 2, ..Default::default() };
    let trained = train(model, &train_ds, &val_ds, &cfg, encoder.as_ref()).unwrap().model;

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&trained, &path).unwrap();
    let loaded = load_checkpoint(&path).unwrap();
    assert_eq!(loaded, trained);
    let bits = |p: Vec<f32>| p.into_iter().map(f32::to_bits).collect::<Vec<_>>();
    assert_eq!(
        bits(predict(&loaded, &val_ds, encoder.as_ref()).unwrap()),
        bits(predict(&trained, &val_ds, encoder.as_ref()).unwrap())
    );
    assert!(matches!(load_checkpoint(&dir.path().join("missing")), Err(Error::Io { .. })));
}

#[test]
fn zero_epochs_return_the_initial_model() {
    let [train_ds, val_ds, _] = gen_palindrome_dataset(6, small_counts(), 1).unwrap();
    let model = build_char_cnn(6, Task::Palindrome.alphabet(), 4).unwrap();
    let encoder = model.encoder().unwrap();
    let cfg = TrainConfig { epochs: 0, ..Default::default() };
    let out = train(model.clone(), &train_ds, &val_ds, &cfg, encoder.as_ref()).unwrap();
    assert_eq!(out.model, model);
    assert!(out.history.is_empty());
    assert_eq!(write_metrics_csv(&out.history), "epoch,train_loss,train_acc,val_acc\n");
}

#[test]
fn small_runs_are_deterministic_and_learn() {
    let [train_ds, val_ds, _] = gen_palindrome_dataset(6, SplitCounts { train: 200, val: 50, test: 1 }, 8).unwrap();
    let run = || {
        let model = build_combinatorial_cnn(&EncodingConfig::for_length(6), Task::Palindrome.alphabet(), 3).unwrap();
        let encoder = model.encoder().unwrap();
        let cfg = TrainConfig { epochs: 6, steps_per_epoch: 10, batch_size: 16, seed: 5, ..Default::default() };
        train(model, &train_ds, &val_ds, &cfg, encoder.as_ref()).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(write_metrics_csv(&a.history), write_metrics_csv(&b.history));
    assert_eq!(a.model, b.model);
    let mut first: Vec<f64> = a.history.iter().take(5).map(|r| r.train_loss).collect();
    first.sort_by(f64::total_cmp);
    assert!(first[2] < a.initial_loss.unwrap());
    let encoder = a.model.encoder().unwrap();
    assert!(evaluate(&a.model, &val_ds, encoder.as_ref()).unwrap() > 0.5);
}

#[test]
fn mismatched_data_is_rejected() {
    let [train_ds, val_ds, _] = gen_palindrome_dataset(6, small_counts(), 1).unwrap();
    let model = build_char_cnn(7, Task::Palindrome.alphabet(), 4).unwrap();
    let encoder = model.encoder().unwrap();
    let err = train(model, &train_ds, &val_ds, &TrainConfig::default(), encoder.as_ref()).unwrap_err();
    assert!(matches!(err, Error::LengthMismatch { expected: 7, actual: 6 }));
}

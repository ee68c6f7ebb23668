use std::fs;
use std::path::Path;

use evoad::dataset::{write_csv, Label};
use evoad::ensemble::{
    evaluate, point_adjust, train_ensemble, EnsembleModel, FinalTrainConfig, Provenance,
};
use evoad::evolution::evolve_with_observer;
use evoad::partition::{read_partition_file, write_partition_file, FeatureGroup, Partition};

use crate::config::{CliError, RunConfig};
use crate::pipeline::{load_test_series, load_train_series, prepare, prepare_test, PreparedData};
use crate::report::{
    read_scores_csv, submodel_reports, write_scores_csv, BaselineReport, EvaluationReport,
    MetricsReport, REPORT_SCHEMA_VERSION,
};

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

/// Replace a file via a same-directory rename so an interrupted run can
/// never leave a half-written artifact behind.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn write_config_snapshot(cfg: &RunConfig, dir: &Path) -> Result<(), CliError> {
    fs::write(dir.join("config.toml"), cfg.snapshot_toml()).map_err(runtime)
}

/// `synth`: generate the configured dataset, write train/test CSVs and a
/// manifest carrying the seeds. Identical seeds give identical files.
pub fn cmd_synth(cfg: &RunConfig) -> Result<(), CliError> {
    let synth = cfg
        .dataset
        .synth
        .as_ref()
        .ok_or_else(|| CliError::Validation("synth command needs a [dataset.synth] source".into()))?;
    let synth_cfg = cfg.synth_config(synth);
    let (train, test) = evoad::dataset::synth_generate(&synth_cfg).map_err(|e| CliError::Validation(e.to_string()))?;

    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    write_csv(&train, &dir.join("train.csv"), "label").map_err(runtime)?;
    write_csv(&test, &dir.join("test.csv"), "label").map_err(runtime)?;

    let manifest = serde_json::json!({
        "schema_version": 1,
        "config_hash": cfg.config_hash(),
        "master_seed": cfg.seed,
        "dataset_seed": synth_cfg.seed,
        "n_train": synth_cfg.n_train,
        "n_test": synth_cfg.n_test,
        "n_features": synth_cfg.n_features,
        "n_clusters": synth_cfg.n_clusters,
        "intra_cluster_corr": synth_cfg.intra_cluster_corr,
        "segments": synth_cfg.anomaly_segments,
    });
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serialises"),
    )
    .map_err(runtime)?;
    println!(
        "wrote {} train / {} test points across {} features to {}",
        train.n_points(),
        test.n_points(),
        train.n_features(),
        dir.display()
    );
    Ok(())
}

/// `evolve`: full pipeline up to the best partition. Artifacts are
/// rewritten after every generation so an interrupted run still leaves a
/// valid config snapshot, fitness table and generation log.
pub fn cmd_evolve(cfg: &RunConfig) -> Result<(), CliError> {
    let train_raw = load_train_series(cfg)?;
    let data = prepare(cfg, &train_raw)?;
    let evo_cfg = cfg.evolution_config();

    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    write_config_snapshot(cfg, dir)?;

    let n_features = data.train.n_features();
    let log_path = dir.join("generation_log.json");
    let fitness_path = dir.join("generations.csv");
    let best_path = dir.join("best_partition.txt");
    let mut records: Vec<evoad::evolution::GenerationRecord> = Vec::new();

    let outcome = evolve_with_observer(&data.train, &data.val, &evo_cfg, |record| {
        records.push(record.clone());
        // valid artifacts after every generation, even under a kill
        if let Ok(json) = serde_json::to_string_pretty(&records) {
            let _ = write_atomic(&log_path, &json);
        }
        let mut table = String::from("generation,solution,fitness\n");
        for r in &records {
            for (sol, fit) in r.fitness.iter().enumerate() {
                table.push_str(&format!("{},{},{}\n", r.generation, sol, fit));
            }
        }
        let _ = write_atomic(&fitness_path, &table);
        let tmp = best_path.with_extension("tmp");
        if write_partition_file(&tmp, &record.best_partition, n_features).is_ok() {
            let _ = fs::rename(&tmp, &best_path);
        }
        println!(
            "generation {}: best fitness {:.6} (best so far {:.6}, {:.1}s)",
            record.generation, record.best_fitness, record.best_so_far, record.duration_secs
        );
    })
    .map_err(runtime)?;

    write_partition_file(&best_path, &outcome.best, n_features).map_err(runtime)?;
    println!(
        "best partition (fitness {:.6}) written to {}",
        outcome.best_fitness,
        best_path.display()
    );
    Ok(())
}

struct EvaluatedModel {
    ensemble: EnsembleModel,
    pred: Vec<Label>,
    scores: Vec<Vec<f64>>,
    metrics: evoad::ensemble::Metrics,
    adjusted: Option<evoad::ensemble::Metrics>,
}

fn train_calibrate_evaluate(
    cfg: &RunConfig,
    partition: &Partition,
    data: &PreparedData,
    test: &evoad::dataset::TimeSeries,
    truth: &[Label],
    with_adjust: bool,
    run_id: String,
) -> Result<EvaluatedModel, CliError> {
    let final_cfg = FinalTrainConfig {
        family: cfg.model_family(),
        final_epochs: cfg.ensemble.final_epochs,
        batch_size: cfg.model.batch_size,
        seed: cfg.seed,
    };
    let mut ensemble = train_ensemble(
        partition,
        &data.train,
        &data.stats,
        &final_cfg,
        Provenance {
            run_id,
            generation: None,
        },
    )
    .map_err(runtime)?;
    ensemble.rule = cfg.voting_rule();
    ensemble
        .calibrate_thresholds(&data.val_raw, cfg.ensemble.percentile)
        .map_err(runtime)?;
    let scores = ensemble.score_all(test).map_err(runtime)?;
    let thresholds: Vec<f64> = ensemble.submodels.iter().map(|s| s.threshold.unwrap()).collect();
    let pred = evoad::ensemble::combine_votes(&scores, &thresholds, ensemble.rule);
    let metrics = evaluate(&pred, truth).map_err(runtime)?;
    let adjusted = if with_adjust {
        let adjusted_pred = point_adjust(&pred, truth).map_err(runtime)?;
        Some(evaluate(&adjusted_pred, truth).map_err(runtime)?)
    } else {
        None
    };
    Ok(EvaluatedModel {
        ensemble,
        pred,
        scores,
        metrics,
        adjusted,
    })
}

fn save_ensemble(dir: &Path, prefix: &str, ensemble: &EnsembleModel) -> Result<(), CliError> {
    for (i, submodel) in ensemble.submodels.iter().enumerate() {
        let path = dir.join(format!("{prefix}_{i:02}.evsm"));
        let mut file = fs::File::create(&path).map_err(runtime)?;
        submodel.write_to(&mut file).map_err(runtime)?;
    }
    Ok(())
}

/// `train-eval`: train the final ensemble on a partition file, calibrate
/// thresholds, vote on the test set, and write the evaluation report
/// (plus the monolithic single-model baseline when requested).
pub fn cmd_train_eval(
    cfg: &RunConfig,
    partition_path: &Path,
    baseline: bool,
    adjust_flag: bool,
) -> Result<(), CliError> {
    let (partition, declared_features) =
        read_partition_file(partition_path).map_err(|e| CliError::Validation(e.to_string()))?;

    let train_raw = load_train_series(cfg)?;
    if declared_features != train_raw.n_features() {
        return Err(CliError::Validation(format!(
            "partition file declares {declared_features} features, dataset has {}",
            train_raw.n_features()
        )));
    }
    partition
        .validate(train_raw.n_features())
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let data = prepare(cfg, &train_raw)?;
    let test = prepare_test(cfg, &load_test_series(cfg)?)?;
    let truth: Vec<Label> = test
        .labels()
        .ok_or_else(|| CliError::Validation("test data has no labels to evaluate against".into()))?
        .to_vec();

    let with_adjust = adjust_flag || cfg.ensemble.point_adjust;
    let run_id = format!("{}-{}", cfg.config_hash(), cfg.seed);

    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    write_config_snapshot(cfg, dir)?;
    let ensemble_dir = dir.join("ensemble");
    ensure_dir(&ensemble_dir)?;

    // With --baseline both models train concurrently on the shared pool.
    let (main, base) = if baseline {
        let full = Partition::new(vec![FeatureGroup::full(train_raw.n_features())]);
        let (main, base) = rayon::join(
            || train_calibrate_evaluate(cfg, &partition, &data, &test, &truth, with_adjust, run_id.clone()),
            || train_calibrate_evaluate(cfg, &full, &data, &test, &truth, with_adjust, run_id.clone()),
        );
        (main?, Some(base?))
    } else {
        (
            train_calibrate_evaluate(cfg, &partition, &data, &test, &truth, with_adjust, run_id.clone())?,
            None,
        )
    };
    save_ensemble(&ensemble_dir, "submodel", &main.ensemble)?;

    let baseline_report = match &base {
        Some(base) => {
            save_ensemble(&ensemble_dir, "baseline", &base.ensemble)?;
            Some(BaselineReport {
                threshold: base.ensemble.submodels[0].threshold.unwrap(),
                confusion: (&base.metrics).into(),
                metrics: (&base.metrics).into(),
                adjusted_metrics: base.adjusted.as_ref().map(MetricsReport::from),
            })
        }
        None => None,
    };

    if cfg.ensemble.dump_scores {
        write_scores_csv(&dir.join("scores.csv"), &truth, &main.pred, &main.scores)?;
    }

    let report = EvaluationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config_hash: cfg.config_hash(),
        seed: cfg.seed,
        voting_rule: format!("{:?}", main.ensemble.rule).to_lowercase(),
        point_adjust: with_adjust,
        partition: partition.clone(),
        submodels: submodel_reports(&main.ensemble, &main.scores),
        confusion: (&main.metrics).into(),
        metrics: (&main.metrics).into(),
        adjusted_metrics: main.adjusted.as_ref().map(MetricsReport::from),
        baseline: baseline_report,
    };
    let report_path = dir.join("report.json");
    fs::write(
        &report_path,
        serde_json::to_string_pretty(&report).expect("report serialises"),
    )
    .map_err(runtime)?;
    println!(
        "precision {:.4}  recall {:.4}  F1 {:.4}  -> {}",
        main.metrics.precision,
        main.metrics.recall,
        main.metrics.f1,
        report_path.display()
    );
    if let Some(b) = &report.baseline {
        println!(
            "baseline: precision {:.4}  recall {:.4}  F1 {:.4}",
            b.metrics.precision, b.metrics.recall, b.metrics.f1
        );
    }
    Ok(())
}

/// `evaluate`: metrics-only pass over an existing score dump.
pub fn cmd_evaluate(scores_path: &Path, adjust: bool) -> Result<(), CliError> {
    let (truth, pred) = read_scores_csv(scores_path)?;
    let metrics = evaluate(&pred, &truth).map_err(|e| CliError::Validation(e.to_string()))?;
    let adjusted = if adjust {
        let adjusted_pred = point_adjust(&pred, &truth).map_err(|e| CliError::Validation(e.to_string()))?;
        Some(evaluate(&adjusted_pred, &truth).map_err(|e| CliError::Validation(e.to_string()))?)
    } else {
        None
    };
    let out = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "points": truth.len(),
        "confusion": { "tp": metrics.tp, "fp": metrics.fp, "fn": metrics.fn_, "tn": metrics.tn },
        "metrics": { "precision": metrics.precision, "recall": metrics.recall, "f1": metrics.f1 },
        "adjusted_metrics": adjusted.map(|m| serde_json::json!({
            "precision": m.precision, "recall": m.recall, "f1": m.f1
        })),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("report serialises"));
    Ok(())
}

/// Resolve config plus CLI overrides.
pub fn load_config_with_overrides(path: &Path, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

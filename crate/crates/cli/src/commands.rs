use std::path::Path;

use echogeo_core::cochlea::CochleagramPipeline;
use echogeo_core::dataset::{CorpusConfig, CorpusKind, Dataset, Split};
use echogeo_core::echo::{simulate_scene, Window};
use echogeo_core::experiment::{
    classify_set, options_for, score, train_classifier, train_spacing, ClassifierRun, Scores,
};
use echogeo_core::glint::{analyze, ChangePointConfig, GsClassGrid};
use echogeo_core::io::{self, read_json, sidecar_path, TimeSeriesMeta};
use echogeo_core::metrics::{median, ConfusionMatrix};
use echogeo_core::nn::{checkpoint, ArchOptions, Architecture, History, Network, TrainConfig};
use echogeo_core::{Broadcast, Cochleagram, EchoModelConstants, SonarGeometry, Target};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cli::*;
use crate::output::*;
use crate::units::{parse_list, parse_one, Dimension};

/// Bins kept for spacing analysis of a full-length cochleagram.
const GS_CROP: (usize, usize) = (50, 100);

/// Accuracies reported for the reference implementation, for comparison.
fn reference_accuracy(arch: Architecture) -> Value {
    match arch {
        Architecture::Cnn => json!({"validation": 0.997, "eval": 0.869}),
        Architecture::Rnn => json!({"validation": 0.985, "eval": 0.828}),
        Architecture::Gs => json!({"train": 0.996}),
    }
}

pub fn run(command: &Command) -> CliResult<()> {
    match command {
        Command::Simulate(a) => simulate(command, a),
        Command::Cochleagram(a) => cochleagram(command, a),
        Command::GenDataset(a) => gen_dataset(command, a),
        Command::Train(a) => train(command, a),
        Command::Classify(a) => classify(command, a),
        Command::Reconstruct(a) => reconstruct(command, a),
        Command::Eval(a) => eval(command, a),
        Command::Replay(a) => {
            let record: Value = read_json(&a.config)?;
            let inner: Command = serde_json::from_value(record.get("command").cloned().unwrap_or(Value::Null))
                .map_err(|e| param(format!("{} is not an echogeo config: {e}", a.config.display())))?;
            if matches!(inner, Command::Replay(_)) {
                return Err(param("a replay config cannot replay itself"));
            }
            run(&inner)
        }
    }
}

fn snr(noise: Switch, db: f64) -> Option<f64> {
    (noise == Switch::On).then_some(db)
}

fn simulate(command: &Command, a: &SimulateArgs) -> CliResult<()> {
    let offsets = parse_list(&a.glints, Dimension::Length).map_err(param)?;
    let duration = parse_one(&a.duration, Dimension::Time).map_err(param)?;
    let target = Target::new(offsets)?;
    let broadcast = Broadcast::new(duration, Window::Welch)?;
    let snr_db = snr(a.noise, a.snr);
    let ts =
        simulate_scene(&broadcast, &target, &SonarGeometry::default(), &EchoModelConstants::default(), snr_db, a.seed)?;
    let meta = TimeSeriesMeta {
        sample_rate: ts.sample_rate,
        seed: a.seed,
        target: target.clone(),
        snr_db,
        broadcast_duration: duration,
    };
    io::write_time_series(&a.out, &ts, &meta)?;
    let resolved = json!({
        "target": target,
        "broadcast_duration_s": duration,
        "snr_db": snr_db,
        "geometry": SonarGeometry::default(),
        "constants": EchoModelConstants::default(),
        "samples": ts.len(),
    });
    write_config(&beside(&a.out, "config.json"), command, resolved)?;
    println!("wrote {} samples to {}", ts.len(), a.out.display());
    Ok(())
}

fn parse_crop(s: &str) -> CliResult<(usize, usize)> {
    let (start, len) = s.split_once(':').ok_or_else(|| param(format!("crop {s:?} must be START:LEN")))?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|_| param(format!("crop {s:?} must be START:LEN")));
    Ok((n(start)?, n(len)?))
}

fn cochleagram(command: &Command, a: &CochleagramArgs) -> CliResult<()> {
    let crop = a.crop.as_deref().map(parse_crop).transpose()?;
    let (ts, _) = io::read_time_series(&a.input)?;
    let pipeline = CochleagramPipeline::default();
    let run = pipeline.run_detailed(&ts)?;
    let mut cg = run.cochleagram;
    if let Some((start, len)) = crop {
        cg = cg.crop(start, len)?;
    }
    io::write_cochleagram(&a.out, &cg)?;
    if let Some(path) = &a.crossings_csv {
        let c = &run.crossings;
        let cell = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut csv = String::from("channel,cf_hz,broadcast_raw,echo_raw,broadcast,echo\n");
        for (i, cf) in cg.center_freqs.iter().enumerate() {
            csv += &format!(
                "{i},{cf:.3},{},{},{},{}\n",
                cell(c.broadcast_raw[i]),
                cell(c.echo_raw[i]),
                cell(c.broadcast[i]),
                cell(c.echo[i])
            );
        }
        write_text(path, &csv)?;
    }
    let resolved = json!({
        "pipeline": pipeline,
        "crop": crop,
        "aligned_onset": run.aligned_onset,
        "median_delay_samples": run.crossings.median_delay.map(num),
    });
    write_config(&beside(&a.out, "config.json"), command, resolved)?;
    println!("wrote {}x{} cochleagram to {}", cg.n_channels, cg.n_bins, a.out.display());
    Ok(())
}

fn gen_dataset(command: &Command, a: &GenDatasetArgs) -> CliResult<()> {
    let kind = match a.kind {
        Kind::Classify => CorpusKind::Classify,
        Kind::Gs => CorpusKind::Gs,
        Kind::Eval => CorpusKind::Eval,
    };
    let mut config = CorpusConfig::new(kind, a.seed);
    config.snr_db = snr(a.noise, a.snr);
    let ds = Dataset::generate(&config)?;
    ds.save(&a.out)?;
    write_config(&a.out.join("config.json"), command, serde_json::to_value(&config)?)?;
    println!("wrote {} samples to {}", ds.len(), a.out.display());
    Ok(())
}

fn architecture(a: Arch) -> Architecture {
    match a {
        Arch::Cnn => Architecture::Cnn,
        Arch::Rnn => Architecture::Rnn,
        Arch::Gs => Architecture::Gs,
    }
}

fn options(h: &Hyper) -> CliResult<ArchOptions> {
    let filters: Vec<usize> = h
        .filters
        .split(',')
        .map(|f| f.trim().parse::<usize>().ok().filter(|&v| v > 0))
        .collect::<Option<_>>()
        .ok_or_else(|| param(format!("filters {:?} must be positive integers", h.filters)))?;
    if h.timesteps == 0 {
        return Err(param("timesteps must be positive"));
    }
    Ok(ArchOptions { cnn_filters: filters, rnn_steps: h.timesteps, ..ArchOptions::default() })
}

fn train_config(h: &Hyper, seed: u64) -> CliResult<TrainConfig> {
    let cfg =
        TrainConfig { epochs: h.epochs, batch_size: h.batch, learning_rate: h.lr, seed, ..TrainConfig::default() };
    cfg.validate()?;
    Ok(cfg)
}

fn check_timesteps(arch: Architecture, opts: &ArchOptions, ds: &Dataset) -> CliResult<()> {
    let bins = ds.cochleagrams.first().map_or(0, |c| c.n_bins);
    if arch == Architecture::Rnn && !bins.is_multiple_of(opts.rnn_steps) {
        return Err(param(format!("timesteps {} must divide the {bins} time bins", opts.rnn_steps)));
    }
    Ok(())
}

fn history_csv(runs: &[(u64, &History)]) -> String {
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::from("seed,epoch,train_loss,train_accuracy,val_loss,val_accuracy\n");
    for (seed, h) in runs {
        for e in &h.epochs {
            s += &format!(
                "{seed},{},{},{},{},{}\n",
                e.epoch,
                e.train_loss,
                e.train_accuracy,
                cell(e.val_loss),
                cell(e.val_accuracy)
            );
        }
    }
    s
}

fn scores_json(s: &Scores) -> Value {
    json!({
        "loss": num(s.loss),
        "accuracy": num(s.accuracy),
        "confusion": s.confusion.counts,
        "per_class_accuracy": nums(&s.confusion.per_class_accuracy()),
    })
}

fn final_train(h: &History) -> (f64, f64) {
    h.last().map_or((f64::NAN, f64::NAN), |e| (e.train_loss, e.train_accuracy))
}

fn train(command: &Command, a: &TrainArgs) -> CliResult<()> {
    let arch = architecture(a.arch);
    let opts = options(&a.hyper)?;
    let cfg = train_config(&a.hyper, a.hyper.seed)?;
    let corpus = Dataset::load(&a.data)?;
    check_timesteps(arch, &opts, &corpus)?;
    let (net, history, metrics) = if arch == Architecture::Gs {
        let (net, run) = train_spacing(&corpus, &opts, &cfg)?;
        let (loss, acc) = final_train(&run.history);
        let m = json!({
            "final_train_loss": num(loss),
            "final_train_accuracy": num(acc),
            "train": scores_json(&run.train),
            "reference_accuracy": reference_accuracy(arch),
        });
        (net, run.history, m)
    } else {
        let held_out = a.eval.as_deref().map(Dataset::load).transpose()?;
        let (net, run) = train_classifier(&corpus, held_out.as_ref(), arch, &opts, &cfg)?;
        let (loss, acc) = final_train(&run.history);
        let m = json!({
            "final_train_loss": num(loss),
            "final_train_accuracy": num(acc),
            "validation": scores_json(&run.validation),
            "eval": run.eval.as_ref().map(scores_json),
            "reference_accuracy": reference_accuracy(arch),
        });
        (net, run.history, m)
    };
    let resolved = json!({
        "arch": arch.to_string(),
        "options": opts,
        "train": cfg,
        "corpus_hash": corpus.manifest.config_hash,
    });
    checkpoint::save(&a.out, &net, &arch.to_string(), resolved.clone())?;
    write_text(&beside(&a.out, "history.csv"), &history_csv(&[(cfg.seed, &history)]))?;
    write_value(&beside(&a.out, "metrics.json"), &metrics)?;
    write_config(&beside(&a.out, "config.json"), command, resolved)?;
    let (loss, acc) = final_train(&history);
    println!("trained {arch} for {} epochs: loss {loss:.4}, accuracy {acc:.4}", cfg.epochs);
    Ok(())
}

fn load_model(path: &Path) -> CliResult<(Network, Architecture)> {
    let (net, header) = checkpoint::load(path)?;
    let arch: Architecture = header.arch.parse()?;
    Ok((net, arch))
}

/// A cochleagram file, or a simulated record run through the default pipeline.
fn load_cochleagram(path: &Path) -> CliResult<Cochleagram> {
    let side: Value = read_json(&sidecar_path(path))?;
    if side.get("sample_rate").is_some() {
        let (ts, _) = io::read_time_series(path)?;
        Ok(CochleagramPipeline::default().run(&ts)?)
    } else {
        Ok(io::read_cochleagram(path)?)
    }
}

fn classify(command: &Command, a: &ClassifyArgs) -> CliResult<()> {
    let (net, arch) = load_model(&a.model)?;
    if arch == Architecture::Gs {
        return Err(param("classify needs a cnn or rnn checkpoint; use reconstruct for gs"));
    }
    let cg = load_cochleagram(&a.input)?;
    let x = arch.batch(&[&cg], &options_for(arch, &net))?;
    let y = net.infer(&x)?;
    let class = echogeo_core::nn::network::argmax_rows(&y)[0];
    let result = json!({
        "arch": arch.to_string(),
        "glint_count": class + 1,
        "scores": nums(&y.data),
    });
    match &a.out {
        Some(out) => {
            write_value(out, &result)?;
            write_config(&beside(out, "config.json"), command, json!({"arch": arch.to_string()}))?;
        }
        None => println!("{}", serde_json::to_string_pretty(&result)?),
    }
    Ok(())
}

fn reconstruct(command: &Command, a: &ReconstructArgs) -> CliResult<()> {
    let (net, arch) = load_model(&a.model)?;
    if arch != Architecture::Gs {
        return Err(param("reconstruct needs a gs checkpoint"));
    }
    let mut cg = load_cochleagram(&a.input)?;
    if cg.n_bins == 250 {
        cg = cg.crop(GS_CROP.0, GS_CROP.1)?;
    } else if cg.n_bins != GS_CROP.1 {
        return Err(echogeo_core::Error::Data(format!(
            "expected a 250- or 100-bin cochleagram, got {} bins",
            cg.n_bins
        ))
        .into());
    }
    let grid = GsClassGrid::default();
    let cp = ChangePointConfig::default();
    let r = analyze(&cg, &net, net.input_shape[0], &grid, &cp)?;
    let segments: Vec<Value> = r
        .segments
        .iter()
        .map(|s| {
            json!({
                "start_window": s.start,
                "end_window": s.end,
                "class": s.class,
                "spacing_mm": num(s.spacing * 1e3),
                "ripple_interval_hz": num(grid.ripple_interval(s.class)),
            })
        })
        .collect();
    let offsets_mm: Vec<f64> = r.offsets.iter().map(|o| o * 1e3).collect();
    let report = json!({
        "trace": r.trace.classes,
        "window_starts": r.trace.window_starts,
        "window": r.trace.window,
        "change_points": r.change_points,
        "segments": segments,
        "glint_count": r.glint_count,
        "offsets_mm": nums(&offsets_mm),
    });
    write_value(&a.out, &report)?;
    if let Some(path) = &a.trace_csv {
        write_text(path, &r.trace_csv(&grid))?;
    }
    write_config(&beside(&a.out, "config.json"), command, json!({"grid": grid, "change_points": cp, "crop": GS_CROP}))?;
    println!("{} glints, offsets {:?} mm, change points {:?}", r.glint_count, offsets_mm, r.change_points);
    Ok(())
}

fn summary(values: &[f64]) -> Value {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({"mean": num(mean), "median": num(median(values)), "min": num(min), "max": num(max)})
}

fn eval(command: &Command, a: &EvalArgs) -> CliResult<()> {
    let held_out = Dataset::load(&a.data)?;
    let split = if held_out.manifest.count(Split::Eval) > 0 { Split::Eval } else { Split::Validation };
    let (arch, runs): (Architecture, Vec<ClassifierRun>) = if let Some(model) = &a.model {
        let (net, arch) = load_model(model)?;
        if arch == Architecture::Gs {
            return Err(param("eval scores glint-count classifiers (cnn, rnn)"));
        }
        let set = classify_set(&held_out, split, arch, &options_for(arch, &net))?;
        let scores = score(&net, &set, arch)?;
        let run = ClassifierRun {
            seed: net.seed,
            history: History::default(),
            validation: scores.clone(),
            eval: Some(scores),
        };
        (arch, vec![run])
    } else {
        let arch = architecture(a.arch.ok_or_else(|| param("eval needs --model or --arch with --train"))?);
        if arch == Architecture::Gs {
            return Err(param("eval scores glint-count classifiers (cnn, rnn)"));
        }
        if a.repeat == 0 {
            return Err(param("repeat must be at least 1"));
        }
        let train_path = a.train.as_ref().ok_or_else(|| param("--arch needs --train"))?;
        let corpus = Dataset::load(train_path)?;
        let opts = options(&a.hyper)?;
        check_timesteps(arch, &opts, &corpus)?;
        let seeds: Vec<u64> = (0..a.repeat as u64).map(|i| a.hyper.seed + i).collect();
        let cfgs = seeds.iter().map(|&s| train_config(&a.hyper, s)).collect::<CliResult<Vec<_>>>()?;
        let runs = cfgs
            .par_iter()
            .map(|cfg| train_classifier(&corpus, Some(&held_out), arch, &opts, cfg).map(|(_, run)| run))
            .collect::<Result<Vec<_>, _>>()?;
        (arch, runs)
    };

    let eval_acc: Vec<f64> = runs.iter().map(|r| r.eval.as_ref().map_or(f64::NAN, |s| s.accuracy)).collect();
    let val_acc: Vec<f64> = runs.iter().map(|r| r.validation.accuracy).collect();
    let mut total = vec![vec![0usize; arch.classes()]; arch.classes()];
    for s in runs.iter().filter_map(|r| r.eval.as_ref()) {
        for (row, counts) in total.iter_mut().zip(&s.confusion.counts) {
            for (t, c) in row.iter_mut().zip(counts) {
                *t += c;
            }
        }
    }
    let confusion = ConfusionMatrix { counts: total };
    let per_run: Vec<Value> = runs
        .iter()
        .map(|r| {
            let (loss, acc) = final_train(&r.history);
            json!({
                "seed": r.seed,
                "validation_accuracy": num(r.validation.accuracy),
                "eval": r.eval.as_ref().map(scores_json),
                "final_train_loss": num(loss),
                "final_train_accuracy": num(acc),
            })
        })
        .collect();
    let metrics = json!({
        "arch": arch.to_string(),
        "runs": per_run,
        "eval_accuracy": summary(&eval_acc),
        "validation_accuracy": summary(&val_acc),
        "reference_accuracy": reference_accuracy(arch),
        "confusion_total": confusion.counts,
    });
    write_value(&a.out.join("metrics.json"), &metrics)?;
    write_text(&a.out.join("confusion.csv"), &confusion.to_csv())?;
    let curves: Vec<(u64, &History)> = runs.iter().map(|r| (r.seed, &r.history)).collect();
    write_text(&a.out.join("loss_curves.csv"), &history_csv(&curves))?;
    write_config(
        &a.out.join("config.json"),
        command,
        json!({"arch": arch.to_string(), "split": split, "corpus_hash": held_out.manifest.config_hash}),
    )?;
    println!("{arch}: eval accuracy median {:.4} over {} run(s)", median(&eval_acc), runs.len());
    Ok(())
}

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cyclic_ff::data::{save_embeddings, synth_blobs};
use cyclic_ff::graph::generate;
use cyclic_ff::training::{
    evaluate, mean_std, run, summary_csv, sweep, SummaryRow, TrainConfig, TrainedModel,
};
use cyclic_ff::{RngState, Stream};

use crate::artifacts::{config_map, git_describe, now, write_atomic, Artifact, RunManifest};
use crate::config::{parse_seeds, split_override, RunConfig};
use crate::dataset::{self, shape_of};
use crate::error::CliError;

/// Defaults, then the config file, then `--set` overrides.
pub fn resolve_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_text(&text, &path.display().to_string())?;
    }
    cfg.apply_overrides(overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn seeds_for(
    cfg: &RunConfig,
    seed: Option<u64>,
    seeds: Option<&str>,
) -> Result<Vec<u64>, CliError> {
    match (seed, seeds) {
        (Some(_), Some(_)) => Err(CliError::Config("use either --seed or --seeds".into())),
        (Some(s), None) => Ok(vec![s]),
        (None, Some(spec)) => parse_seeds(spec),
        (None, None) => Ok(vec![cfg.train.seed]),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

pub struct TrainArgs<'a> {
    pub config: Option<&'a Path>,
    pub manifest: Option<&'a Path>,
    pub overrides: &'a [String],
    pub seed: Option<u64>,
    pub seeds: Option<&'a str>,
    pub out: &'a Path,
}

pub fn train(args: TrainArgs) -> Result<(), CliError> {
    let started = now();
    let (cfg, mut overrides, recorded_seeds) = match args.manifest {
        Some(m) => {
            let manifest = RunManifest::read(m)?;
            let mut cfg = manifest.run_config()?;
            cfg.apply_overrides(args.overrides)?;
            cfg.validate()?;
            (cfg, manifest.overrides, Some(manifest.seeds))
        }
        None => (
            resolve_config(args.config, args.overrides)?,
            Vec::new(),
            None,
        ),
    };
    overrides.extend(args.overrides.iter().cloned());
    let seeds = match (recorded_seeds, args.seed.is_none() && args.seeds.is_none()) {
        (Some(recorded), true) => recorded,
        _ => seeds_for(&cfg, args.seed, args.seeds)?,
    };
    let data = dataset::load(&cfg.data)?;
    ensure_dir(args.out)?;
    let hash = cfg.hash();
    let mut errors = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let mut run_cfg = cfg.clone();
        run_cfg.train.seed = seed;
        let (model, metrics) = run(&run_cfg.train, &data.train, &data.val, &data.test)?;
        let stem = format!("run-{hash}-{seed}");
        let ckpt = args.out.join(format!("{stem}.ckpt"));
        let csv = args.out.join(format!("{stem}.csv"));
        write_atomic(&ckpt, &model.to_checkpoint())?;
        write_atomic(&csv, metrics.to_csv().as_bytes())?;
        let test_error = metrics.test_error.expect("test set is never empty here");
        let manifest = RunManifest {
            command: "train".into(),
            config_hash: hash.clone(),
            config: config_map(&run_cfg),
            overrides: overrides.clone(),
            seeds: vec![seed],
            artifacts: vec![Artifact {
                seed,
                checkpoint: Some(ckpt.clone()),
                metrics: csv.clone(),
                test_error_pct: Some(test_error),
            }],
            git_describe: git_describe(),
            started: started.clone(),
            finished: now(),
        };
        let json = serde_json::to_string_pretty(&manifest)?;
        write_atomic(&args.out.join(format!("{stem}.json")), json.as_bytes())?;
        eprintln!(
            "seed {seed}: best epoch {} of {}, checkpoint {}",
            metrics.best_epoch,
            metrics.epochs.len(),
            ckpt.display()
        );
        println!("test_error_pct={test_error}");
        errors.push(test_error);
    }
    if errors.len() > 1 {
        let (mean, std) = mean_std(&errors);
        println!(
            "test_error_mean={mean} test_error_std={std} runs={}",
            errors.len()
        );
    }
    Ok(())
}

pub fn eval(
    checkpoint: &Path,
    config: Option<&Path>,
    overrides: &[String],
) -> Result<(), CliError> {
    let cfg = resolve_config(config, overrides)?;
    let bytes = fs::read(checkpoint)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", checkpoint.display())))?;
    let model = TrainedModel::from_checkpoint(&bytes)?;
    let data = dataset::load(&cfg.data)?;
    println!("test_error_pct={}", evaluate(&model, &data.test)?);
    Ok(())
}

/// Parses sweep axes: every `--set` with a comma list becomes an axis.
fn grid_axes(overrides: &[String]) -> Result<(Vec<String>, Vec<(String, Vec<String>)>), CliError> {
    let mut fixed = Vec::new();
    let mut axes = Vec::new();
    for item in overrides {
        let (key, value) = split_override(item)?;
        let values: Vec<String> = value
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(String::from)
            .collect();
        if values.is_empty() {
            return Err(CliError::Config(format!("--set {item}: empty value list")));
        }
        if axes.iter().any(|(k, _): &(String, Vec<String>)| k == key) {
            return Err(CliError::Config(format!("--set {key} given twice")));
        }
        if values.len() == 1 {
            fixed.push(format!("{key}={}", values[0]));
        } else {
            axes.push((key.to_string(), values));
        }
    }
    Ok((fixed, axes))
}

fn cross_product(axes: &[(String, Vec<String>)]) -> Vec<Vec<(String, String)>> {
    let mut combos = vec![Vec::new()];
    for (key, values) in axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut next = c.clone();
                    next.push((key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }
    combos
}

pub struct SweepArgs<'a> {
    pub config: Option<&'a Path>,
    pub overrides: &'a [String],
    pub seed: Option<u64>,
    pub seeds: Option<&'a str>,
    pub jobs: usize,
    pub out: &'a Path,
}

pub fn sweep_cmd(args: SweepArgs) -> Result<(), CliError> {
    let started = now();
    let (fixed, axes) = grid_axes(args.overrides)?;
    let base = resolve_config(args.config, &fixed)?;
    let seeds = seeds_for(&base, args.seed, args.seeds)?;
    let combos = cross_product(&axes);
    let mut configs: Vec<RunConfig> = Vec::with_capacity(combos.len());
    for combo in &combos {
        let mut cfg = base.clone();
        for (k, v) in combo {
            cfg.set(k, v)
                .map_err(|msg| CliError::Config(format!("--set {k}={v}: {msg}")))?;
        }
        cfg.validate()?;
        if cfg.data != base.data {
            return Err(CliError::Config(
                "sweeps cannot vary dataset settings".into(),
            ));
        }
        configs.push(cfg);
    }
    let data = dataset::load(&base.data)?;
    ensure_dir(args.out)?;
    let grid: Vec<TrainConfig> = configs
        .iter()
        .flat_map(|cfg| {
            seeds.iter().map(move |&seed| TrainConfig {
                seed,
                ..cfg.train.clone()
            })
        })
        .collect();
    let outcome = sweep(&grid, &data.train, &data.val, &data.test, args.jobs)?;

    let mut artifacts = Vec::with_capacity(grid.len());
    let mut rows = Vec::with_capacity(configs.len());
    let per_config = outcome.runs.chunks(seeds.len());
    for ((cfg, combo), runs) in configs.iter().zip(&combos).zip(per_config) {
        let hash = cfg.hash();
        let mut test_errors = Vec::with_capacity(runs.len());
        for r in runs {
            let seed = r.config.seed;
            let csv = args.out.join(format!("run-{hash}-{seed}.csv"));
            write_atomic(&csv, r.metrics.to_csv().as_bytes())?;
            test_errors.push(r.metrics.test_error.expect("test set is never empty here"));
            artifacts.push(Artifact {
                seed,
                checkpoint: None,
                metrics: csv,
                test_error_pct: r.metrics.test_error,
            });
        }
        rows.push(SummaryRow {
            settings: combo.clone(),
            test_errors,
        });
    }
    let keys: Vec<String> = axes.iter().map(|(k, _)| k.clone()).collect();
    let summary = summary_csv(&keys, &rows);
    let mut tag = base.hash();
    for (k, _) in &axes {
        write!(tag, "-{k}").unwrap();
    }
    let summary_path = args.out.join(format!("sweep-{tag}.csv"));
    write_atomic(&summary_path, summary.as_bytes())?;
    let manifest = RunManifest {
        command: "sweep".into(),
        config_hash: base.hash(),
        config: config_map(&base),
        overrides: args.overrides.to_vec(),
        seeds: seeds.clone(),
        artifacts,
        git_describe: git_describe(),
        started,
        finished: now(),
    };
    write_atomic(
        &args.out.join(format!("sweep-{tag}.json")),
        serde_json::to_string_pretty(&manifest)?.as_bytes(),
    )?;
    print!("{summary}");
    let best = &outcome.runs[outcome.best];
    eprintln!(
        "best by validation: run {} (seed {}), test_error_pct={}, summary {}",
        outcome.best,
        best.config.seed,
        best.metrics.test_error.unwrap_or(f64::NAN),
        summary_path.display()
    );
    Ok(())
}

pub fn inspect_graph(config: Option<&Path>, overrides: &[String]) -> Result<(), CliError> {
    let cfg = resolve_config(config, overrides)?;
    let topology = generate(&cfg.train.generator).map_err(|e| CliError::Config(e.to_string()))?;
    let (dim, n_classes) = shape_of(&cfg.data)?;
    let base = cfg
        .train
        .fusion
        .fused_dim(dim, n_classes)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = topology.to_edge_list();
    writeln!(out, "edges: {}", topology.synapses().len()).unwrap();
    writeln!(out, "neuron in_degree out_degree d_in").unwrap();
    for j in 0..topology.n_neurons() {
        let d_in = base + topology.in_degree(j) * cfg.train.d_out;
        writeln!(
            out,
            "{j} {} {} {d_in}",
            topology.in_degree(j),
            topology.out_degree(j)
        )
        .unwrap();
    }
    writeln!(
        out,
        "cyclic: {}",
        if topology.has_cycle() { "yes" } else { "no" }
    )
    .unwrap();
    print!("{out}");
    Ok(())
}

pub fn export_embeddings_template(
    out: &Path,
    n_per_class: usize,
    dim: usize,
    n_classes: usize,
) -> Result<(), CliError> {
    let d = synth_blobs(
        n_per_class,
        dim,
        n_classes,
        1.0,
        &mut RngState::new(0, Stream::Synthetic),
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    save_embeddings(&d, out)?;
    println!(
        "wrote {} samples x {} features, {} classes to {}",
        d.len(),
        d.dim(),
        d.n_classes,
        out.display()
    );
    println!("layout (little-endian): b\"CNNE\", u32 version=1, u32 n, u32 dim, u32 n_classes,");
    println!("  f32 features[n*dim] row-major, u16 labels[n]");
    Ok(())
}

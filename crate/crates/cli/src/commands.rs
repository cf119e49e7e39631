//! Subcommand implementations. Each artifact-producing command validates
//! its inputs up front, writes outputs atomically, and finishes with a
//! manifest that hashes the config and every input and output file.

use std::path::Path;

use ripple_core::evaluate::{threshold_sweep, EvalError, GroundTruth};
use ripple_core::infer::{fit, FitError};
use ripple_core::responsiveness::{influence_network, report};
use ripple_core::simulate::{simulate, SimError};

use crate::config::{default_kernel, PriorBlock, RunConfig};
use crate::io;
use crate::manifest::Manifest;
use crate::CliError;

pub struct Ctx {
    pub quiet: bool,
}

impl Ctx {
    fn info(&self, message: &str) {
        if !self.quiet {
            eprintln!("{message}");
        }
    }
}

fn read_config(path: &Path) -> Result<(String, RunConfig), CliError> {
    ensure_exists(path)?;
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let config = RunConfig::parse(&raw)?;
    Ok((raw, config))
}

fn ensure_exists(path: &Path) -> Result<(), CliError> {
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "path does not exist: {}",
            path.display()
        )));
    }
    Ok(())
}

fn effective_seed(flag: Option<u64>, config: &RunConfig) -> u64 {
    flag.or(config.seed).unwrap_or(0)
}

fn map_sim_error(e: SimError) -> CliError {
    match e {
        SimError::CascadeOverflow { .. } => CliError::Numerical(e.to_string()),
        SimError::BadConfig { .. } => CliError::Usage(e.to_string()),
        SimError::Model(m) => CliError::Usage(m.to_string()),
        SimError::Internal(i) => CliError::Internal(i.to_string()),
    }
}

fn map_fit_error(e: FitError) -> CliError {
    match e {
        FitError::NonFinite { .. } => CliError::Numerical(e.to_string()),
        FitError::BadConfig { .. } => CliError::Usage(e.to_string()),
        FitError::Model(m) => CliError::Usage(m.to_string()),
    }
}

pub fn run_simulate(
    ctx: &Ctx,
    config_path: &Path,
    out_dir: &Path,
    seed_flag: Option<u64>,
) -> Result<(), CliError> {
    let (raw, config) = read_config(config_path)?;
    let sim_block = config
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::Usage("config needs a \"simulation\" block".into()))?;
    let kernel = match &config.kernel {
        Some(block) => block.build()?,
        None => default_kernel(),
    };
    let seed = effective_seed(seed_flag, &config);
    let sim_config = sim_block.build(&kernel, seed)?;
    let rho = sim_config.params.spectral_radius();
    if rho >= 1.0 {
        ctx.info(&format!(
            "warning: spectral radius {rho:.3} >= 1, cascades may be explosive"
        ));
    }
    let out = simulate(&sim_config).map_err(map_sim_error)?;
    ctx.info(&format!(
        "simulated {} events over horizon {}",
        out.log.len(),
        out.log.horizon()
    ));

    let events_path = out_dir.join("events.jsonl");
    let parentage_path = out_dir.join("parentage.jsonl");
    io::write_atomic(&events_path, &io::render_events(&out.log))?;
    io::write_atomic(&parentage_path, &io::render_parentage(&out.parentage))?;
    let mut manifest = Manifest::new("simulate", seed, Some(&raw));
    manifest.record_output(&events_path)?;
    manifest.record_output(&parentage_path)?;
    manifest.write(out_dir)
}

pub fn run_fit(
    ctx: &Ctx,
    config_path: &Path,
    events_path: &Path,
    out_dir: &Path,
    seed_flag: Option<u64>,
) -> Result<(), CliError> {
    let (raw, config) = read_config(config_path)?;
    ensure_exists(events_path)?;
    let kernel = match &config.kernel {
        Some(block) => block.build()?,
        None => default_kernel(),
    };
    let prior = config
        .prior
        .as_ref()
        .map(PriorBlock::build)
        .unwrap_or_default();
    let fit_block = config.fit.clone().unwrap_or_default();
    let seed = effective_seed(seed_flag, &config);
    let fit_config = fit_block.build(kernel, prior.clone(), seed)?;

    let loaded = io::load_events(events_path)?;
    if loaded.out_of_order > 0 {
        ctx.info(&format!(
            "warning: re-sorted {} out-of-order events",
            loaded.out_of_order
        ));
    }
    let fitted = fit(&loaded.log, &fit_config).map_err(map_fit_error)?;
    let objective_initial = fitted.objective_trace[0];
    let objective_final = *fitted.objective_trace.last().expect("non-empty trace");
    ctx.info(&format!(
        "fit: objective {objective_initial:.4} -> {objective_final:.4}, converged = {}, iterations = {}",
        fitted.converged, fitted.iterations
    ));

    let doc = io::ModelDocument {
        params: fitted.params,
        prior,
        method: fit_block.method.clone(),
        converged: fitted.converged,
        iterations: fitted.iterations,
        final_grad_norm: fitted.final_grad_norm,
        objective_initial,
        objective_final,
    };
    let model_path = out_dir.join("model.json");
    let trace_path = out_dir.join("trace.csv");
    io::write_atomic(&model_path, &io::render_model(&doc))?;
    io::write_atomic(&trace_path, &io::render_trace_csv(&fitted.objective_trace))?;
    let mut manifest = Manifest::new("fit", seed, Some(&raw));
    manifest.record_input(events_path)?;
    manifest.record_output(&model_path)?;
    manifest.record_output(&trace_path)?;
    manifest.write(out_dir)
}

pub fn run_score(
    ctx: &Ctx,
    config_path: &Path,
    events_path: &Path,
    model_path: &Path,
    out_dir: &Path,
) -> Result<(), CliError> {
    let (raw, config) = read_config(config_path)?;
    ensure_exists(events_path)?;
    ensure_exists(model_path)?;
    let query_block = config
        .query
        .as_ref()
        .ok_or_else(|| CliError::Usage("config needs a \"query\" block".into()))?;
    let loaded = io::load_events(events_path)?;
    let model = io::load_model(model_path)?;
    let query = query_block.build(loaded.log.horizon());
    let rep = report(&model.params, &loaded.log, &query)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    ctx.info(&format!(
        "scored pair {} -> {} over [{}, {}]: {} samples",
        query.sender,
        query.receiver,
        query.interval.0,
        query.interval.1,
        rep.series.len()
    ));

    let series_path = out_dir.join("responsiveness.csv");
    let shares_path = out_dir.join("shares.json");
    io::write_atomic(
        &series_path,
        &io::render_series_csv(query.sender, query.receiver, &rep.series),
    )?;
    let mut shares_json =
        serde_json::to_string_pretty(&rep.shares).expect("shares serialize");
    shares_json.push('\n');
    io::write_atomic(&shares_path, &shares_json)?;
    let mut manifest = Manifest::new("score", config.seed.unwrap_or(0), Some(&raw));
    manifest.record_input(events_path)?;
    manifest.record_input(model_path)?;
    manifest.record_output(&series_path)?;
    manifest.record_output(&shares_path)?;
    if let Some(attribution) = &rep.attribution {
        let attribution_path = out_dir.join("attribution.json");
        let mut rendered =
            serde_json::to_string_pretty(attribution).expect("attribution serializes");
        rendered.push('\n');
        io::write_atomic(&attribution_path, &rendered)?;
        manifest.record_output(&attribution_path)?;
    }
    manifest.write(out_dir)
}

pub fn run_network(
    ctx: &Ctx,
    config_path: Option<&Path>,
    events_path: &Path,
    model_path: &Path,
    out_dir: &Path,
    threshold_flag: Option<f64>,
) -> Result<(), CliError> {
    let (raw, config) = match config_path {
        Some(p) => {
            let (raw, config) = read_config(p)?;
            (Some(raw), config)
        }
        None => (None, RunConfig::default()),
    };
    ensure_exists(events_path)?;
    ensure_exists(model_path)?;
    let loaded = io::load_events(events_path)?;
    let model = io::load_model(model_path)?;
    let interval = config
        .query
        .as_ref()
        .and_then(|q| q.interval)
        .unwrap_or((0.0, loaded.log.horizon()));
    let threshold = threshold_flag.unwrap_or(0.0);
    let edges = influence_network(&model.params, &loaded.log, interval, threshold)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    ctx.info(&format!(
        "network: {} edges at threshold {threshold} over [{}, {}]",
        edges.len(),
        interval.0,
        interval.1
    ));
    let doc = io::NetworkDocument {
        interval,
        threshold,
        edges,
    };
    let network_path = out_dir.join("network.json");
    io::write_atomic(&network_path, &io::render_network(&doc))?;
    let mut manifest = Manifest::new("network", config.seed.unwrap_or(0), raw.as_deref());
    manifest.record_input(events_path)?;
    manifest.record_input(model_path)?;
    manifest.record_output(&network_path)?;
    manifest.write(out_dir)
}

fn parse_threshold_list(raw: &str) -> Result<Vec<f64>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad threshold {s:?}: {e}")))
        })
        .collect()
}

/// Quantile-spaced thresholds over the observed edge weights.
fn quantile_thresholds(weights: &[f64], count: usize) -> Vec<f64> {
    if weights.is_empty() {
        return vec![0.0];
    }
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let count = count.max(2);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let q = i as f64 / (count - 1) as f64;
        let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
        out.push(sorted[idx]);
    }
    out.dedup();
    out
}

pub fn run_evaluate(
    ctx: &Ctx,
    config_path: Option<&Path>,
    network_path: &Path,
    events_path: &Path,
    parentage_path: &Path,
    out_dir: &Path,
    thresholds_flag: Option<&str>,
) -> Result<(), CliError> {
    let (raw, config) = match config_path {
        Some(p) => {
            let (raw, config) = read_config(p)?;
            (Some(raw), config)
        }
        None => (None, RunConfig::default()),
    };
    ensure_exists(network_path)?;
    ensure_exists(events_path)?;
    ensure_exists(parentage_path)?;
    let network = io::load_network(network_path)?;
    let loaded = io::load_events(events_path)?;
    let parentage = io::load_parentage(parentage_path, loaded.log.len())?;
    let truth = GroundTruth::from_parentage(&loaded.log, &parentage)
        .map_err(|e| CliError::Data(e.to_string()))?;
    let eval_block = config.evaluation.clone().unwrap_or_default();
    let thresholds = match thresholds_flag {
        Some(rawlist) => parse_threshold_list(rawlist)?,
        None => match &eval_block.thresholds {
            Some(t) => t.clone(),
            None => {
                let weights: Vec<f64> = network.edges.iter().map(|e| e.weight).collect();
                quantile_thresholds(&weights, eval_block.threshold_count)
            }
        },
    };
    let results = threshold_sweep(&network.edges, &truth, &thresholds).map_err(|e| match e {
        EvalError::UnsortedThresholds => CliError::Usage(e.to_string()),
        EvalError::BadTruth { .. } => CliError::Data(e.to_string()),
    })?;
    for r in &results {
        let recall = r
            .recall
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "undefined".into());
        let nsr = r
            .noise_signal
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "undefined".into());
        ctx.info(&format!(
            "threshold {:.6}: recall {recall}, noise-signal {nsr}, significant {}, correct {}, true {}",
            r.threshold, r.significant, r.correct, r.true_count
        ));
    }
    let sweep_path = out_dir.join("sweep.csv");
    io::write_atomic(&sweep_path, &io::render_sweep_csv(&results))?;
    let mut manifest = Manifest::new("evaluate", config.seed.unwrap_or(0), raw.as_deref());
    manifest.record_input(network_path)?;
    manifest.record_input(events_path)?;
    manifest.record_input(parentage_path)?;
    manifest.record_output(&sweep_path)?;
    manifest.write(out_dir)
}

pub fn run_validate(ctx: &Ctx, events_path: &Path) -> Result<(), CliError> {
    ensure_exists(events_path)?;
    let issues = io::audit_events(events_path)?;
    if issues.is_empty() {
        ctx.info(&format!("{}: ok", events_path.display()));
        return Ok(());
    }
    let mut rendered = String::new();
    for issue in &issues {
        match issue.line {
            Some(line) => rendered.push_str(&format!("line {line}: {}\n", issue.message)),
            None => rendered.push_str(&format!("{}\n", issue.message)),
        }
    }
    print!("{rendered}");
    Err(CliError::Data(format!(
        "{}: {} problem(s) found",
        events_path.display(),
        issues.len()
    )))
}

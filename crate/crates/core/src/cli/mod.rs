//! Command-line driver: synthetic data, training, evaluation, comparison and
//! the numerical studies.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::data::{
    ingest_events, label_case1, label_case2, read_labeled, remove_halts, split, synth::draw_state, synth_generate,
    write_labeled, CaseMode, LabeledSample, Snapshot,
};
use crate::error::{Error, Result};
use crate::eval::{build_report, coeff_ratio_study, median, CoeffRatioResult};
use crate::models::{load_model, save_model, train_model, Family, Model, SampleFeatures};
use crate::nncore::EpochRecord;
use crate::seed::{child_seed, rng_for};
use crate::wellposed::{bounded_profile, divergence_check, net_logits, run_relu_demo, MassProfile, TailCase};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "lobspatial", version, about = "Spatial neural networks for limit order book price moves")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// 1: fixed horizon, 2: next move.
    #[arg(long = "case", global = true, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub case_mode: Option<u8>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    Case1,
    Case2,
    Case3,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic dataset and its ground-truth law.
    Synth {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Label a raw event CSV.
    Ingest {
        #[arg(long)]
        events: PathBuf,
    },
    /// Split a labeled dataset and train one model family.
    Train {
        #[arg(long)]
        family: Family,
        /// Labeled CSV; defaults to `<out>/synth.csv`.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Evaluate one model bundle on a labeled test set.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Defaults to `<out>/test.csv`.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Compare model bundles on one or more test sets.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        models: Vec<PathBuf>,
        /// Test sets, one per run; defaults to `<out>/test.csv`.
        #[arg(long, num_args = 1..)]
        data: Vec<PathBuf>,
    },
    /// Tail mass checks for a spatial bundle or the built-in ReLU demos.
    Wellposed {
        #[arg(long)]
        model: Option<PathBuf>,
        /// State for the bundle check; defaults to a synthetic draw.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum)]
        demo: Vec<Demo>,
    },
    /// Pooled local-structure regressions, one per dataset.
    Coeffratio {
        /// Labeled CSVs; without them, synthetic runs are generated.
        #[arg(long, num_args = 1..)]
        data: Vec<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        /// Generate runs without local size dependence.
        #[arg(long)]
        null: bool,
    },
}

impl Cli {
    /// Configuration file overlaid with the command-line flags.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(c) = self.case_mode {
            cfg.case = CaseMode::from_number(c)?;
        }
        match &self.command {
            Command::Synth { n: Some(n) } => cfg.synth.n_samples = *n,
            Command::Train { epochs: Some(e), .. } => cfg.model.train.epochs = *e,
            Command::Coeffratio { runs, null, .. } => {
                if let Some(r) = runs {
                    cfg.coeffratio.runs = *r;
                }
                cfg.coeffratio.null |= *null;
            }
            _ => {}
        }
        cfg.propagate();
        Ok(cfg)
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut s = String::from("epoch,train_loss,val_loss,lr\n");
    for h in history {
        let _ = writeln!(s, "{},{},{},{}", h.epoch, h.train_loss, h.val_loss, h.lr);
    }
    s
}

#[derive(Serialize)]
struct GroundTruth<'a> {
    config: &'a crate::data::SyntheticGenConfig,
    /// Mean negative log-likelihood of the generated labels under the law.
    entropy: f64,
}

pub fn cmd_synth(cfg: &RunConfig) -> Result<String> {
    let (samples, law) = synth_generate(&cfg.synth)?;
    let entropy = samples.iter().map(|s| -law.log_prob(&s.state, s.label)).sum::<f64>() / samples.len() as f64;
    let data = cfg.out.join("synth.csv");
    write_file(&data, "")?;
    write_labeled(&data, &samples)?;
    write_file(
        &cfg.out.join("ground_truth.json"),
        &json(&GroundTruth {
            config: &cfg.synth,
            entropy,
        })?,
    )?;
    Ok(format!(
        "wrote {} samples to {}\ncase {} hazard a = {} b = {} size lognormal({}, {}) entropy {entropy:.6}\n",
        samples.len(),
        data.display(),
        law.case.number(),
        law.a,
        law.b,
        law.size_mu,
        law.size_sigma
    ))
}

pub fn cmd_ingest(cfg: &RunConfig, events: &Path) -> Result<String> {
    let states = remove_halts(ingest_events(events)?);
    let samples = match cfg.case {
        CaseMode::FixedHorizon => {
            let snap = if cfg.label.snapshot_period_ns > 0 {
                Snapshot::Clock {
                    period_ns: cfg.label.snapshot_period_ns,
                }
            } else {
                Snapshot::EveryEvent
            };
            label_case1(&states, cfg.label.horizon_ns, snap)
        }
        CaseMode::NextMove => label_case2(&states),
    };
    let path = cfg.out.join("labeled.csv");
    write_file(&path, "")?;
    write_labeled(&path, &samples)?;
    Ok(format!("labeled {} samples from {} states into {}\n", samples.len(), states.len(), path.display()))
}

fn select(samples: &[LabeledSample], idx: &[usize]) -> Vec<LabeledSample> {
    idx.iter().map(|&i| samples[i].clone()).collect()
}

pub fn cmd_train(cfg: &RunConfig, family: Family, data: Option<&Path>) -> Result<String> {
    let default = cfg.out.join("synth.csv");
    let samples = read_labeled(data.unwrap_or(&default))?;
    let sp = split(&samples, cfg.split.test_fraction, cfg.split.val_fraction, cfg.seed)?;
    let (train, val, test) = (select(&samples, &sp.train), select(&samples, &sp.validation), select(&samples, &sp.test));
    let trained = train_model(family, &train, &val, cfg.case, &cfg.model)?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let bundle = cfg.out.join(format!("{family}.model.json"));
    save_model(&trained.model, &bundle)?;
    write_file(&cfg.out.join(format!("{family}.history.csv")), &history_csv(&trained.history))?;
    write_labeled(&cfg.out.join("test.csv"), &test)?;
    let mut msg = format!(
        "trained {family} on {} samples (validation {}, test {}); bundle {}\n",
        train.len(),
        val.len(),
        test.len(),
        bundle.display()
    );
    if let Some(best) = trained.history.get(trained.best_epoch.wrapping_sub(1)) {
        let _ = writeln!(msg, "best epoch {} validation loss {:.6}", best.epoch, best.val_loss);
    }
    Ok(msg)
}

fn model_name(path: &Path, model: &Model) -> String {
    path.file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_suffix(".model.json"))
        .map_or_else(|| model.family().to_string(), str::to_string)
}

fn load_tests(cfg: &RunConfig, data: &[PathBuf]) -> Result<Vec<Vec<LabeledSample>>> {
    if data.is_empty() {
        Ok(vec![read_labeled(&cfg.out.join("test.csv"))?])
    } else {
        data.iter().map(|p| read_labeled(p)).collect()
    }
}

pub fn cmd_compare(cfg: &RunConfig, models: &[PathBuf], data: &[PathBuf], dir: &str) -> Result<String> {
    let loaded = models
        .iter()
        .map(|p| load_model(p).map(|m| (model_name(p, &m), m)))
        .collect::<Result<Vec<_>>>()?;
    let mut names: Vec<&str> = loaded.iter().map(|(n, _)| n.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::arg("compare", "model names must be distinct"));
    }
    let refs: Vec<(String, &Model)> = loaded.iter().map(|(n, m)| (n.clone(), m)).collect();
    let runs = load_tests(cfg, data)?;
    let report = build_report(&refs, &runs, cfg.eval.k_max)?;
    let out = cfg.out.join(dir);
    report.write(&out)?;
    let mut s = String::new();
    for m in &report.models {
        let tail = m.tail_ask_up.as_ref().map_or("NA".to_string(), |t| format!("{:.6}", t.cross_entropy));
        let _ = writeln!(
            s,
            "{:<12} cross-entropy {:.6}  accuracy {:.2}%  top-{} {:.2}%  ask-up tail {}",
            m.name,
            m.cross_entropy,
            m.accuracy,
            report.k_max,
            m.topk.last().copied().unwrap_or(0.0),
            tail
        );
    }
    let _ = writeln!(s, "report written to {}", out.display());
    Ok(s)
}

fn spatial_state(cfg: &RunConfig, data: Option<&Path>) -> Result<crate::data::LOBState> {
    match data {
        Some(p) => read_labeled(p)?
            .into_iter()
            .next()
            .map(|s| s.state)
            .ok_or_else(|| Error::arg("wellposed", format!("{} has no samples", p.display()))),
        None => Ok(draw_state(&cfg.synth, cfg.synth.start_ns, &mut rng_for(cfg.seed, "wellposed"))),
    }
}

/// Profiles of the four step networks of a spatial bundle at one state.
pub fn spatial_profiles(
    model: &crate::models::SpatialModel,
    x: &SampleFeatures,
    checkpoints: &[u64],
) -> Result<Vec<(&'static str, MassProfile)>> {
    use crate::data::Direction;
    use crate::models::{local_features, y1_encoding};
    let n = *checkpoints.last().ok_or_else(|| Error::arg("wellposed", "no checkpoints"))?;
    let mut out = Vec::new();
    for (name, net, dir, y1) in [
        ("f1_plus", &model.f1_plus, Direction::Up, None),
        ("f1_minus", &model.f1_minus, Direction::Down, None),
        ("f2_plus", &model.f2_plus, Direction::Up, Some(0)),
        ("f2_minus", &model.f2_minus, Direction::Down, Some(0)),
    ] {
        let logits = net_logits(net, n, |y, row| {
            local_features(x, dir, y as i64, model.local_window, row);
            if let Some(p) = y1 {
                row.extend_from_slice(&y1_encoding(p));
            }
        })?;
        out.push((name, bounded_profile(net, &logits, checkpoints)?));
    }
    Ok(out)
}

pub fn cmd_wellposed(cfg: &RunConfig, model: Option<&Path>, data: Option<&Path>, demos: &[Demo]) -> Result<String> {
    let cps = &cfg.wellposed.checkpoints;
    let dir = cfg.out.join("wellposed");
    let mut s = String::new();
    let mut all_pass = true;
    if let Some(p) = model {
        let Model::Spatial(m) = load_model(p)? else {
            return Err(Error::Unsupported {
                op: "wellposed",
                msg: "only spatial bundles have step networks".into(),
            });
        };
        let x = SampleFeatures::new(&spatial_state(cfg, data)?, &m.stats);
        for (name, prof) in spatial_profiles(&m, &x, cps)? {
            write_file(&dir.join(format!("{name}.csv")), &prof.to_csv())?;
            let pass = prof.last() >= 0.999;
            all_pass &= pass;
            let _ = writeln!(
                s,
                "{name}: {} F_{} = {:.9}",
                if pass { "PASS" } else { "FAIL" },
                prof.n.last().copied().unwrap_or(0),
                prof.last()
            );
        }
    }
    let demos: Vec<Demo> = if demos.is_empty() && model.is_none() {
        vec![Demo::Case1, Demo::Case2, Demo::Case3]
    } else {
        demos.to_vec()
    };
    for d in demos {
        let case = match d {
            Demo::Case1 => TailCase::ReluCase1,
            Demo::Case2 => TailCase::ReluCase2,
            Demo::Case3 => TailCase::ReluCase3,
        };
        let mut checkpoints = vec![200];
        checkpoints.extend(cps.iter().copied().filter(|&n| n > 200));
        if d == Demo::Case3 {
            checkpoints = cps.clone();
        }
        let r = run_relu_demo(case, &checkpoints)?;
        let name = format!("relu_{}", format!("{d:?}").to_lowercase());
        write_file(&dir.join(format!("{name}.csv")), &r.profile.to_csv())?;
        match (r.limit, r.bound) {
            (Some(lim), Some(g)) => {
                let ok = lim <= g;
                all_pass &= ok;
                let _ = writeln!(
                    s,
                    "{name}: mass escape, tail f = {:.6} - {:.6} n, limit {lim:.6}, bound G {g:.6}{}",
                    r.fit.c,
                    r.fit.k,
                    if ok { "" } else { " (bound violated)" }
                );
            }
            _ => {
                let net = crate::wellposed::relu_demo_net(case)?;
                let f = |n: u64| crate::wellposed::demo_logit(&net, n).expect("one-input network");
                match divergence_check(&r.fit, f, 200) {
                    Ok(m) => {
                        let _ = writeln!(s, "{name}: PASS F_200 = {m:.12}");
                    }
                    Err(e) => {
                        all_pass = false;
                        let _ = writeln!(s, "{name}: FAIL {e}");
                    }
                }
            }
        }
    }
    if !all_pass {
        return Err(Error::arg("wellposed", format!("check failed\n{s}")));
    }
    Ok(s)
}

pub fn coeffratio_csv(results: &[CoeffRatioResult], k: usize, p_values: &[usize]) -> String {
    let mut s = String::from("run,n_rows,intercept");
    for off in -(k as i64)..=(k as i64) {
        let _ = write!(s, ",theta_{off}");
    }
    for p in p_values {
        let _ = write!(s, ",ratio_p{p}");
    }
    s.push_str(",degenerate\n");
    for r in results {
        let _ = write!(s, "{},{},{}", r.run, r.n_rows, r.intercept);
        for t in &r.theta {
            let _ = write!(s, ",{t}");
        }
        for &p in p_values {
            let _ = write!(s, ",{}", r.ratio(p).map_or("NA".to_string(), |v| v.to_string()));
        }
        let _ = writeln!(s, ",{}", r.degenerate());
    }
    s
}

/// Synthetic datasets for the regression study.
pub fn coeffratio_datasets(cfg: &RunConfig) -> Result<Vec<Vec<LabeledSample>>> {
    let c = &cfg.coeffratio;
    (0..c.runs)
        .map(|r| {
            let mut g = cfg.synth.clone();
            g.n_samples = c.n_samples;
            g.law.case = CaseMode::NextMove;
            g.seed = child_seed(cfg.seed, &format!("coeffratio/data/{r}"));
            if c.null {
                g.law.b = 0.0;
            }
            synth_generate(&g).map(|(s, _)| s)
        })
        .collect()
}

pub fn cmd_coeffratio(cfg: &RunConfig, data: &[PathBuf]) -> Result<String> {
    let runs = if data.is_empty() {
        coeffratio_datasets(cfg)?
    } else {
        data.iter().map(|p| read_labeled(p)).collect::<Result<Vec<_>>>()?
    };
    let reg = &cfg.coeffratio.regression;
    let results = coeff_ratio_study(&runs, reg)?;
    let path = cfg.out.join("coeffratio.csv");
    write_file(&path, &coeffratio_csv(&results, reg.k, &reg.p_values))?;
    let mut s = format!("{} runs written to {}\n", results.len(), path.display());
    for &p in &reg.p_values {
        let mut v: Vec<f64> = results.iter().filter_map(|r| r.ratio(p)).collect();
        let _ = writeln!(s, "median ratio p = {p}: {:.4}", median(&mut v));
    }
    let positive = results.iter().filter(|r| r.center() > 0.0).count();
    let _ = writeln!(s, "center coefficient positive in {positive}/{} runs", results.len());
    Ok(s)
}

/// Run the parsed command and return its console summary.
pub fn run(cli: &Cli) -> Result<String> {
    let cfg = cli.run_config()?;
    match &cli.command {
        Command::Synth { .. } => cmd_synth(&cfg),
        Command::Ingest { events } => cmd_ingest(&cfg, events),
        Command::Train { family, data, .. } => cmd_train(&cfg, *family, data.as_deref()),
        Command::Eval { model, data } => {
            let data: Vec<PathBuf> = data.iter().cloned().collect();
            cmd_compare(&cfg, std::slice::from_ref(model), &data, "eval")
        }
        Command::Compare { models, data } => cmd_compare(&cfg, models, data, "compare"),
        Command::Wellposed { model, data, demo } => cmd_wellposed(&cfg, model.as_deref(), data.as_deref(), demo),
        Command::Coeffratio { data, .. } => cmd_coeffratio(&cfg, data),
    }
}

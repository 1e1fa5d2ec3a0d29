//! The `epa` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors (bad flags, bad parameter
//! values), 2 for data errors (unreadable or invalid input files).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::augment::{apply_epa, iid_edge_drop, AugmentedPair, Method};
use crate::contrastive::{nt_xent_loss, simsiam_loss, Embedding, LossConfig};
use crate::ecl::{fit_ecl, EclConfig};
use crate::error::{Error, Result};
use crate::explain::{Explainer, GroundTruthExplainer, NoExplainer, RandomExplainer};
use crate::io::{plot_error_curves, read_dataset, write_dataset, write_experiment_csv, ExperimentRow};
use crate::rng::{child, derive_seed};
use crate::synth::{generate, DatasetSpec, LabeledExample, Variant};
use crate::theory::{brute_force_omega, expected_omega, run_theorem1_mc, Channel, OmegaTable, TheoremConfig};

#[derive(Debug, Parser)]
#[command(name = "epa", version, about = "Explanation-preserving augmentation toolkit")]
pub struct Cli {
    /// Seed for all randomness (overrides the SEED environment variable).
    #[arg(long, global = true, env = "SEED", default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExplainerKind {
    GroundTruth,
    Random,
    None,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ChannelArg {
    Sa,
    Sp,
}

impl From<ChannelArg> for Channel {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Sa => Channel::SemanticAgnostic,
            ChannelArg::Sp => Channel::SemanticPreserving,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LossKind {
    NtXent,
    Simsiam,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Modified,
    Original,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a BA-2motifs dataset as JSON lines.
    Gen {
        #[arg(long, default_value_t = 1000)]
        n_graphs: usize,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 20)]
        base_nodes: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Modified)]
        variant: VariantArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply one augmentation to every graph of a dataset.
    Augment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// node_drop, edge_drop, attr_mask, subgraph or mixup.
        #[arg(long, default_value = "edge_drop")]
        method: String,
        #[arg(long, default_value_t = 0.1)]
        ratio: f64,
        #[arg(long, value_enum, default_value_t = ExplainerKind::GroundTruth)]
        explainer: ExplainerKind,
        /// Edge count of the random explainer's masks.
        #[arg(long, default_value_t = 6)]
        random_size: usize,
    },
    /// Print the closed-form and enumerated pair tables.
    Omega {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, value_enum, default_value_t = ChannelArg::Sa)]
        channel: ChannelArg,
    },
    /// Fit the exhaustive contrastive learner on a small dataset.
    Ecl {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        kappa: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Edge-drop probability used to build the view pairs.
        #[arg(long, default_value_t = 0.4)]
        ratio: f64,
        /// Number of view pairs per graph.
        #[arg(long, default_value_t = 4)]
        pairs_per_graph: usize,
    },
    /// Evaluate a contrastive loss on embeddings stored as JSON.
    Loss {
        #[arg(long, value_enum)]
        kind: LossKind,
        /// `{"z1": [[..]], "z2": [[..]]}` for nt-xent or
        /// `{"p1": [..], "p2": [..], "z1": [..], "z2": [..]}` for simsiam.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        temperature: f64,
    },
    /// Run the error-rate sweep for both augmentation channels.
    #[command(name = "verify-theorem1")]
    VerifyTheorem1 {
        /// `start:stop:step`, inclusive of `stop`.
        #[arg(long, default_value = "0.35:0.9:0.05")]
        p_grid: String,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        /// Unlabeled and test set size.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        n_labeled: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw mean error against p from an experiment CSV.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParameters(format!("--p-grid expects start:stop:step, got `{s}`"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // rounding keeps grid values such as 0.35 + 3*0.05 printable as 0.5
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10)
        .collect())
}

fn format_table(t: &OmegaTable) -> String {
    let mut s = String::from("      0              1              3\n");
    for (k, row) in ["0", "1", "3"].iter().zip(t.values()) {
        s.push_str(k);
        for x in row {
            s.push_str(&format!("  {x:>13.10}"));
        }
        s.push('\n');
    }
    s
}

#[derive(Deserialize)]
struct BatchFile {
    z1: Vec<Vec<f64>>,
    z2: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct QuadrupleFile {
    p1: Vec<f64>,
    p2: Vec<f64>,
    z1: Vec<f64>,
    z2: Vec<f64>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn embeddings(rows: Vec<Vec<f64>>) -> Result<Vec<Embedding>> {
    rows.into_iter().map(Embedding::new).collect()
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Gen {
            n_graphs,
            q,
            base_nodes,
            variant,
            out: path,
        } => {
            let spec = DatasetSpec {
                n_graphs,
                q,
                base_nodes,
                seed,
                variant: match variant {
                    VariantArg::Modified => Variant::Modified,
                    VariantArg::Original => Variant::Original,
                },
            };
            let data = generate(&spec)?;
            write_dataset(&data, &path)?;
            writeln!(out, "wrote {} graphs to {}", data.len(), path.display())?;
        }
        Command::Augment {
            input,
            out: path,
            method,
            ratio,
            explainer,
            random_size,
        } => {
            let method: Method = method.parse()?;
            let data = read_dataset(&input)?;
            let explainer: Box<dyn Explainer> = match explainer {
                ExplainerKind::GroundTruth => Box::new(GroundTruthExplainer),
                ExplainerKind::Random => Box::new(RandomExplainer { size: random_size }),
                ExplainerKind::None => Box::new(NoExplainer),
            };
            let mut rng = child(seed, 0);
            let augmented = data
                .iter()
                .map(|item| {
                    let mask = explainer.explain(item, &mut rng)?;
                    let a = apply_epa(method, &item.graph, &mask, ratio, &data, &mut rng)?;
                    Ok(LabeledExample {
                        graph: a.graph,
                        label: item.label,
                        explanation: a.mask,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            write_dataset(&augmented, &path)?;
            writeln!(out, "wrote {} augmented graphs to {}", augmented.len(), path.display())?;
        }
        Command::Omega { p, q, channel } => {
            let channel = Channel::from(channel);
            if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidParameters("--p and --q must lie in [0, 1]".into()));
            }
            let closed = expected_omega(p, q, channel);
            let brute = brute_force_omega(p, q, channel)?;
            writeln!(out, "closed form ({channel}, p={p}, q={q}):")?;
            write!(out, "{}", format_table(&closed))?;
            writeln!(out, "enumerated:")?;
            write!(out, "{}", format_table(&brute))?;
            writeln!(out, "max abs difference: {:e}", closed.max_abs_diff(&brute))?;
        }
        Command::Ecl {
            input,
            kappa,
            epsilon,
            ratio,
            pairs_per_graph,
        } => {
            let cfg = EclConfig {
                kappa,
                epsilon,
                ..EclConfig::default()
            };
            cfg.validate()?;
            let data = read_dataset(&input)?;
            let mut rng = child(seed, 0);
            let mut pairs = Vec::new();
            for (i, item) in data.iter().enumerate() {
                for _ in 0..pairs_per_graph {
                    pairs.push(AugmentedPair {
                        first: iid_edge_drop(&item.graph, &item.explanation, ratio, &mut rng)?,
                        second: iid_edge_drop(&item.graph, &item.explanation, ratio, &mut rng)?,
                        source_id: i,
                    });
                }
            }
            let items: Vec<_> = data.iter().map(|d| d.graph.clone()).collect();
            let model = fit_ecl(&items, &pairs, &cfg)?;
            writeln!(out, "score: {}", model.score)?;
            for (b, block) in model.partition.blocks().iter().enumerate() {
                writeln!(out, "block {b}: {block:?}")?;
            }
        }
        Command::Loss {
            kind,
            input,
            temperature,
        } => match kind {
            LossKind::NtXent => {
                let f: BatchFile = read_json(&input)?;
                let loss = nt_xent_loss(&embeddings(f.z1)?, &embeddings(f.z2)?, &LossConfig { temperature })?;
                writeln!(out, "{}", loss.mean)?;
            }
            LossKind::Simsiam => {
                let f: QuadrupleFile = read_json(&input)?;
                let loss = simsiam_loss(
                    &Embedding::new(f.p1)?,
                    &Embedding::new(f.p2)?,
                    &Embedding::new(f.z1)?,
                    &Embedding::new(f.z2)?,
                )?;
                writeln!(out, "{loss}")?;
            }
        },
        Command::VerifyTheorem1 {
            p_grid,
            q,
            n,
            n_labeled,
            trials,
            out: path,
        } => {
            let grid = parse_grid(&p_grid)?;
            let mut rows = Vec::new();
            for (c, channel) in Channel::BOTH.into_iter().enumerate() {
                for (i, &p) in grid.iter().enumerate() {
                    let cfg = TheoremConfig {
                        p,
                        q,
                        n_unlabeled: n,
                        n_labeled,
                        n_test: n,
                        trials,
                        channel,
                        seed: derive_seed(seed, (c * grid.len() + i) as u64),
                        ..TheoremConfig::default()
                    };
                    let res = run_theorem1_mc(&cfg)?;
                    writeln!(
                        out,
                        "{channel} p={p}: mean error {:.4} (sd {:.4})",
                        res.mean_error, res.std_error
                    )?;
                    rows.extend(res.trials.iter().map(|t| ExperimentRow {
                        channel: channel.name().to_string(),
                        p,
                        q,
                        n_unlabeled: n,
                        n_labeled,
                        trial: t.trial,
                        selected_partition: t.selected.name().to_string(),
                        error_rate: t.error_rate,
                        seed: t.seed,
                    }));
                }
            }
            write_experiment_csv(&rows, &path)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        Command::Plot { input, out: path } => {
            plot_error_curves(&input, &path)?;
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}

/// Exit code for an error raised while running a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameters(_) => 1,
        _ => 2,
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

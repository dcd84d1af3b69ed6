mod config;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use lifthash::arrangement::{self, ArrangementKind};
use lifthash::eval::{self, LabeledDataset, Labels, PairRelation, SameLabel, Split};
use lifthash::learn::{self, LearnerConfig, PoolSelectLearner};
use lifthash::lift::{self, RandomOriginPlanes};
use lifthash::persist::{self, Dataset, DatasetFormat};
use lifthash::preprocess::{self, FitOptions, DEFAULT_CONTRIBUTION};
use lifthash::{encode_all, search, HashModel, Hyperplane, PreprocessParams};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "lifthash", version, about = "Hyperplane hashing with a lift map")]
struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// TOML file with default flag values. Flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit standardization + PCA on learning data.
    Preprocess {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output_params: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CONTRIBUTION)]
        contribution: f64,
        /// Keep constant components (scale 1) instead of failing.
        #[arg(long)]
        allow_constant: bool,
        #[arg(long)]
        format: Option<DatasetFormat>,
    },
    /// Learn hyperplanes and write a model.
    Train {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        bits: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        params: PathBuf,
        /// Learning data.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output_model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        pool_size: usize,
        #[arg(long, default_value_t = 10_000)]
        iterations: usize,
        /// Cap on same-label and on different-label pairs handed to the pool learner.
        #[arg(long, default_value_t = 100_000)]
        max_pairs: usize,
        /// Label the closest fraction of pairs as same-label (pool methods, data without labels).
        #[arg(long)]
        auto_label: Option<f64>,
        #[arg(long)]
        format: Option<DatasetFormat>,
    },
    /// Encode vectors to packed codes.
    Encode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output_codes: PathBuf,
        #[arg(long)]
        format: Option<DatasetFormat>,
    },
    /// Hamming search of query vectors against stored codes.
    #[command(group(ArgGroup::new("amount").required(true).args(["acquisition", "top_k"])))]
    Query {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        db_codes: PathBuf,
        #[arg(long)]
        query_input: PathBuf,
        /// Fraction of the database returned per query.
        #[arg(long)]
        acquisition: Option<f64>,
        #[arg(long)]
        top_k: Option<usize>,
        /// CSV destination (default: standard output).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        format: Option<DatasetFormat>,
    },
    /// Precision, recall and error rate on database/query splits.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// One split name per line: learn, database or query.
        #[arg(long)]
        splits: PathBuf,
        #[arg(long, required = true, value_delimiter = ',')]
        acquisition: Vec<f64>,
        /// Label the closest fraction of database+query pairs as same-label.
        #[arg(long)]
        auto_label: Option<f64>,
        /// Also write `bits,acquisition,precision,recall,error_rate` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        format: Option<DatasetFormat>,
    },
    /// Pearson correlation of L2 and Hamming distance for two models.
    Correlate {
        #[arg(long)]
        model_a: PathBuf,
        #[arg(long)]
        model_b: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        pairs: usize,
        #[arg(long)]
        seed: u64,
        /// `l2,hamming` rows for model A.
        #[arg(long)]
        scatter_a: Option<PathBuf>,
        #[arg(long)]
        scatter_b: Option<PathBuf>,
        #[arg(long)]
        format: Option<DatasetFormat>,
    },
    /// Count the regions of a random arrangement.
    #[command(group(ArgGroup::new("counting").args(["exact", "samples"])))]
    Regions {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        bits: usize,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        seed: u64,
        /// Exact count (the default).
        #[arg(long)]
        exact: bool,
        /// Sampled lower bound from this many points.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 100.0)]
        radius: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Lsh,
    LshLift,
    Pool,
    PoolLift,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Central,
    Offset,
}

impl From<Mode> for ArrangementKind {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Central => ArrangementKind::Central,
            Mode::Offset => ArrangementKind::Offset,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::config_path(&args) {
        args = config::merge(args, Path::new(&path))?;
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            e.print()?;
            return Ok(());
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            bail!("{}", first.trim_start_matches("error: "));
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let mut out = String::new();
    match cli.command {
        Command::Preprocess {
            input,
            output_params,
            contribution,
            allow_constant,
            format,
        } => {
            let data = load(&input, format)?;
            let params = preprocess::fit_with(
                &data.vectors,
                FitOptions {
                    contribution,
                    allow_constant,
                },
            )?;
            persist::save_params(&params, &output_params)?;
            writeln!(out, "input_dim: {}", params.input_dim())?;
            writeln!(out, "k: {}", params.output_dim())?;
            writeln!(out, "eigenvalue_ratio: {:.6}", preprocess::eigenvalue_ratio(&params)?)?;
            writeln!(out, "index,eigenvalue,contribution,cumulative")?;
            for (i, (lambda, (c, cum))) in params.eigenvalues().iter().zip(params.contributions()).enumerate() {
                writeln!(out, "{},{:.6e},{:.6},{:.6}", i + 1, lambda, c, cum)?;
            }
        }
        Command::Train {
            method,
            bits,
            seed,
            params,
            input,
            output_model,
            pool_size,
            iterations,
            max_pairs,
            auto_label,
            format,
        } => {
            let params = persist::load_params(&params)?;
            let data = load(&input, format)?;
            let projected = params.transform_all(&data.vectors)?;
            let (planes, skipped) = train(
                method,
                &TrainInput {
                    bits,
                    seed,
                    pool_size,
                    iterations,
                    max_pairs,
                    auto_label,
                },
                &params,
                &data,
                &projected,
            )?;
            let mean_abs = learn::mean_abs_offset(&planes)?;
            let model = HashModel::new(planes, params, seed)?;
            persist::save_model(&model, &output_model)?;
            writeln!(out, "method: {}", method_name(method))?;
            writeln!(out, "bits: {}", model.bit_count())?;
            writeln!(out, "skipped: {skipped}")?;
            writeln!(out, "mean_abs_offset: {mean_abs:.6}")?;
        }
        Command::Encode {
            model,
            input,
            output_codes,
            format,
        } => {
            let model = persist::load_model(&model)?;
            let data = load(&input, format)?;
            let codes = encode_all(&model, &data.vectors)?;
            persist::save_codes(&codes, model.bit_count(), &output_codes)?;
            writeln!(out, "count: {}", codes.len())?;
            writeln!(out, "width: {}", model.bit_count())?;
        }
        Command::Query {
            model,
            db_codes,
            query_input,
            acquisition,
            top_k,
            output,
            format,
        } => {
            let model = persist::load_model(&model)?;
            let (width, db) = persist::load_codes(&db_codes)?;
            if width != model.bit_count() {
                bail!("codes are {width} bits wide but the model has {} planes", model.bit_count());
            }
            let k = match (acquisition, top_k) {
                (Some(a), None) => eval::retrieval_count(a, db.len())?,
                (None, Some(k)) => k,
                _ => bail!("exactly one of --acquisition and --top-k is required"),
            };
            let queries = encode_all(&model, &load(&query_input, format)?.vectors)?;
            let mut csv = String::from("query,rank,index,distance\n");
            for (qi, q) in queries.iter().enumerate() {
                for (rank, hit) in search(q, &db, k)?.iter().enumerate() {
                    writeln!(csv, "{qi},{},{},{}", rank + 1, hit.index, hit.distance)?;
                }
            }
            match output {
                Some(path) => persist::write_atomic(&path, csv.as_bytes())?,
                None => out = csv,
            }
        }
        Command::Evaluate {
            model,
            dataset,
            splits,
            acquisition,
            auto_label,
            csv,
            format,
        } => {
            let model = persist::load_model(&model)?;
            let data = load(&dataset, format)?;
            let splits = persist::read_splits(&splits)?;
            let labelled = LabeledDataset::new(data.vectors, data.labels, splits)?;
            let (source, relation) = relation_for(&labelled, &model, auto_label)?;
            writeln!(out, "labels: {source}")?;
            let mut table = String::from("bits,acquisition,precision,recall,error_rate\n");
            for &a in &acquisition {
                let r = eval::evaluate(&model, &labelled, relation.as_ref(), a)?;
                writeln!(out, "bits: {}", r.bit_count)?;
                writeln!(out, "acquisition: {:.6}", r.acquisition)?;
                writeln!(out, "k: {}", r.k)?;
                writeln!(out, "queries: {}", r.queries)?;
                writeln!(out, "excluded_queries: {}", r.excluded_queries)?;
                writeln!(out, "precision: {:.6}", r.precision)?;
                writeln!(out, "recall: {}", fixed_or(r.recall, "n/a"))?;
                writeln!(out, "error_rate: {}", fixed_or(r.error_rate, "n/a"))?;
                writeln!(
                    table,
                    "{},{:.6},{:.6},{},{}",
                    r.bit_count,
                    r.acquisition,
                    r.precision,
                    fixed_or(r.recall, ""),
                    fixed_or(r.error_rate, "")
                )?;
            }
            if let Some(path) = csv {
                persist::write_atomic(&path, table.as_bytes())?;
            }
        }
        Command::Correlate {
            model_a,
            model_b,
            input,
            pairs,
            seed,
            scatter_a,
            scatter_b,
            format,
        } => {
            let data = load(&input, format)?;
            for (name, model, scatter) in [("a", model_a, scatter_a), ("b", model_b, scatter_b)] {
                let model = persist::load_model(&model)?;
                let c = eval::correlate(&model, &data.vectors, pairs, seed)?;
                writeln!(out, "pearson_{name}: {:.6}", c.pearson)?;
                if let Some(path) = scatter {
                    let mut csv = String::from("l2,hamming\n");
                    for (d, h) in &c.scatter {
                        writeln!(csv, "{d:.6},{h}")?;
                    }
                    persist::write_atomic(&path, csv.as_bytes())?;
                }
            }
        }
        Command::Regions {
            dim,
            bits,
            mode,
            seed,
            exact: _,
            samples,
            radius,
        } => {
            let kind = ArrangementKind::from(mode);
            let planes = arrangement::random_arrangement(dim, bits, kind, seed)?;
            let closed = kind.closed_form(dim, bits);
            match samples {
                Some(n) => {
                    let count = arrangement::count_regions_sampled(&planes, dim, n, radius, seed)?;
                    writeln!(out, "sampled: {count}")?;
                }
                None => {
                    let count = arrangement::count_regions_exact(&planes, dim)?;
                    writeln!(out, "exact: {count}")?;
                    writeln!(out, "matches_closed_form: {}", count == closed)?;
                }
            }
            writeln!(out, "closed_form: {closed}")?;
        }
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(out.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

struct TrainInput {
    bits: usize,
    seed: u64,
    pool_size: usize,
    iterations: usize,
    max_pairs: usize,
    auto_label: Option<f64>,
}

fn train(
    method: Method,
    t: &TrainInput,
    params: &PreprocessParams,
    data: &Dataset,
    projected: &[Vec<f64>],
) -> Result<(Vec<Hyperplane>, usize)> {
    if t.bits == 0 {
        bail!("--bits must be at least 1");
    }
    Ok(match method {
        Method::Lsh => (learn::origin_planes(&RandomOriginPlanes::new(t.bits, t.seed), projected)?, 0),
        Method::LshLift => {
            let o = lift::lift_learner(&RandomOriginPlanes::new(t.bits, t.seed), projected)?;
            (o.planes, o.skipped)
        }
        Method::Pool | Method::PoolLift => {
            let relation: Box<dyn SameLabel> = match (t.auto_label, &data.labels) {
                (Some(p), _) => {
                    let standardized = data
                        .vectors
                        .iter()
                        .map(|x| params.standardize(x))
                        .collect::<lifthash::Result<Vec<_>>>()?;
                    Box::new(eval::auto_label_pairs(&standardized, p)?)
                }
                (None, Some(labels)) => Box::new(Labels(labels)),
                (None, None) => bail!("pool methods need a label column or --auto-label"),
            };
            let (same, diff) = learn::sample_pairs(relation.as_ref(), projected.len(), t.max_pairs, t.seed);
            let learner = PoolSelectLearner {
                config: LearnerConfig {
                    pool_size: t.pool_size,
                    iterations: t.iterations,
                    target_bits: t.bits,
                    rng_seed: t.seed,
                },
                same_label_pairs: same,
                diff_label_pairs: diff,
            };
            if method == Method::Pool {
                (learn::origin_planes(&learner, projected)?, 0)
            } else {
                let o = lift::lift_learner(&learner, projected)?;
                (o.planes, o.skipped)
            }
        }
    })
}

/// Same-label relation for evaluation plus a description for the report.
fn relation_for<'a>(
    dataset: &'a LabeledDataset,
    model: &HashModel,
    auto_label: Option<f64>,
) -> Result<(String, Box<dyn SameLabel + 'a>)> {
    if let Some(p) = auto_label {
        let members: Vec<usize> = (0..dataset.splits().len())
            .filter(|&i| dataset.splits()[i] != Split::Learn)
            .collect();
        let standardized = members
            .iter()
            .map(|&i| model.preprocess().standardize(&dataset.vectors()[i]))
            .collect::<lifthash::Result<Vec<_>>>()?;
        let relation: PairRelation = eval::auto_label_pairs(&standardized, p)?.remap(&members);
        let source = format!(
            "auto top_fraction={p:.6} over database+query, standardized L2 ({} pairs)",
            relation.len()
        );
        return Ok((source, Box::new(relation)));
    }
    match dataset.labels() {
        Some(labels) => Ok(("label column".into(), Box::new(Labels(labels)))),
        None => Ok(("none".into(), Box::new(PairRelation::default()))),
    }
}

fn load(path: &Path, format: Option<DatasetFormat>) -> Result<Dataset> {
    let format = match format.or_else(|| DatasetFormat::from_path(path)) {
        Some(f) => f,
        None => bail!("cannot infer the format of {}; pass --format csv|raw-f32", path.display()),
    };
    persist::read_dataset(path, format).with_context(|| format!("reading {}", path.display()))
}

fn fixed_or(v: Option<f64>, missing: &str) -> String {
    v.map_or_else(|| missing.to_string(), |x| format!("{x:.6}"))
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Lsh => "lsh",
        Method::LshLift => "lsh-lift",
        Method::Pool => "pool",
        Method::PoolLift => "pool-lift",
    }
}

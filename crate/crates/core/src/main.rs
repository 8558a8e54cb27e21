use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use fairprobe::data::{load_csv, write_csv, write_csv_to, Schema};
use fairprobe::discovery::{
    cpdag_to_dot, dag_from_dot, dag_to_dot, discover, enumerate_dags_with_cap, DiscoveryAlgorithm,
    DEFAULT_ALPHA, DEFAULT_EXTENSION_CAP,
};
use fairprobe::error::{Error, Result};
use fairprobe::hp::DEFAULT_BUDGET;
use fairprobe::interventions::Intervention;
use fairprobe::learners::LearnerKind;
use fairprobe::report::{run_audit, run_hp_audit, HpAuditConfig, RunConfig, DEFAULT_REPEATS};
use fairprobe::scm::{
    apply_label_shift, fit_scm, sample, ScmFlag, ScmModel, ShiftSpec, WeightPosterior,
};
use fairprobe::search::{accept_rate_report, SearchOptions, VerdictMode};

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "fairprobe",
    version,
    about = "Causal robustness audits of fairness practices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Discover the CPDAG and write it plus every member DAG as DOT.
    Discover(DiscoverArgs),
    /// Fit an SCM and its weight posterior on a DAG.
    Fit(FitArgs),
    /// Generate a synthetic dataset from a fitted SCM.
    Sample(SampleArgs),
    /// Accept rates of generated data per discovery algorithm and baseline.
    Validate(ValidateArgs),
    /// Search the equivalence class for a neighbor dataset that flips a property.
    Audit(AuditArgs),
    /// Hyperparameter importance on the input and its neighbors.
    HpAudit(HpAuditArgs),
    /// Print the version.
    Version,
}

#[derive(Args)]
struct Input {
    /// CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// JSON schema: features, sensitive, label.
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alg {
    Pc,
    Ges,
}

impl From<Alg> for DiscoveryAlgorithm {
    fn from(a: Alg) -> Self {
        match a {
            Alg::Pc => DiscoveryAlgorithm::Pc,
            Alg::Ges => DiscoveryAlgorithm::Ges,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Learner {
    Lr,
    Dt,
    Svm,
}

impl From<Learner> for LearnerKind {
    fn from(l: Learner) -> Self {
        match l {
            Learner::Lr => LearnerKind::LogisticRegression,
            Learner::Dt => LearnerKind::DecisionTree,
            Learner::Svm => LearnerKind::LinearSvm,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Flip,
    Diff,
}

#[derive(Args)]
struct DiscoverArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "pc")]
    algorithm: Alg,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_EXTENSION_CAP)]
    max_dags: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: Input,
    /// DAG in DOT format.
    #[arg(long)]
    dag: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    /// Output of `fit`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Label shift epsilon in [0, 1].
    #[arg(long)]
    shift_eps: Option<f64>,
    /// Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["pc", "ges"])]
    algorithms: Vec<Alg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = fairprobe::validator::DEFAULT_K)]
    k: usize,
    /// Writes the table as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "pc")]
    algorithm: Alg,
    /// drop-sens, kbest[:k], fpr[:alpha], percentile[:p], random-drop[:max],
    /// threshold-optimizer or ceo. Comma-separated or repeated.
    #[arg(long, required = true, value_delimiter = ',')]
    intervention: Vec<String>,
    #[arg(long, value_enum, default_value = "lr")]
    learner: Learner,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Seconds per search.
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPEATS)]
    repeats: usize,
    #[arg(long, value_enum, default_value = "flip")]
    mode: Mode,
    /// Posterior draws per DAG.
    #[arg(long, default_value_t = 1000)]
    max_draws: usize,
    #[arg(long)]
    shift_eps: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HpAuditArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "pc")]
    algorithm: Alg,
    #[arg(long, value_enum, default_value = "lr")]
    learner: Learner,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    neighbors: usize,
    #[arg(long)]
    out: PathBuf,
}

/// What `fit` writes and `sample` reads.
#[derive(Serialize, Deserialize)]
struct FitFile {
    model: ScmModel,
    posterior: WeightPosterior,
    flags: Vec<ScmFlag>,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.into(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.into(),
        source: e,
    })
}

fn load(input: &Input) -> Result<fairprobe::data::Dataset> {
    let schema = Schema::from_json_file(&input.schema)?;
    load_csv(&input.data, &schema)
}

fn cmd_discover(a: DiscoverArgs) -> Result<u8> {
    let data = load(&a.input)?;
    let cpdag = discover(&data, a.algorithm.into(), a.alpha)?;
    let dags = enumerate_dags_with_cap(&cpdag, a.max_dags)?;
    write_file(&a.out.join("cpdag.dot"), &cpdag_to_dot(&cpdag))?;
    for (i, d) in dags.iter().enumerate() {
        write_file(&a.out.join(format!("dag_{i:03}.dot")), &dag_to_dot(d))?;
    }
    println!("{} DAGs in the equivalence class", dags.len());
    Ok(0)
}

fn cmd_fit(a: FitArgs) -> Result<u8> {
    let data = load(&a.input)?;
    let dag = dag_from_dot(&read_file(&a.dag)?)?;
    let fit = fit_scm(&dag, &data)?;
    let file = FitFile {
        model: fit.model,
        posterior: fit.posterior,
        flags: fit.flags,
    };
    write_file(&a.out, &(serde_json::to_string_pretty(&file)? + "\n"))?;
    Ok(0)
}

fn cmd_sample(a: SampleArgs) -> Result<u8> {
    let file: FitFile = serde_json::from_str(&read_file(&a.model)?)?;
    let model = match a.shift_eps {
        Some(epsilon) => apply_label_shift(&file.model, ShiftSpec { epsilon })?,
        None => file.model,
    };
    let s = sample(&model, a.n, a.seed)?;
    match &a.out {
        Some(p) => write_csv(p, &s.data)?,
        None => {
            let stdout = std::io::stdout();
            write_csv_to(stdout.lock(), &s.data)?;
        }
    }
    Ok(0)
}

fn cmd_validate(a: ValidateArgs) -> Result<u8> {
    let data = load(&a.input)?;
    let algs: Vec<DiscoveryAlgorithm> = a.algorithms.iter().map(|&x| x.into()).collect();
    let opts = SearchOptions {
        seed: a.seed,
        k_clusters: a.k,
        ..SearchOptions::default()
    };
    let r = accept_rate_report(&data, &algs, &opts)?;
    let mut out = String::new();
    out.push_str(&format!(
        "{:<6} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "Algo", "#DAGs", "Avg", "Std", "Min", "Max", "Dist"
    ));
    for row in &r.rows {
        out.push_str(&format!(
            "{:<6} {:>6} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}\n",
            row.algorithm, row.n_dags, row.avg, row.std, row.min, row.max, row.dist
        ));
    }
    out.push_str(&format!(
        "validator: held-out TPR {:.4}, probe FNR {:.4}\n",
        r.validator.tpr, r.validator.fnr
    ));
    print!("{out}");
    if let Some(p) = &a.out {
        write_file(p, &(serde_json::to_string_pretty(&r)? + "\n"))?;
    }
    Ok(0)
}

fn cmd_audit(a: AuditArgs) -> Result<u8> {
    let interventions = a
        .intervention
        .iter()
        .map(|s| s.parse::<Intervention>())
        .collect::<Result<Vec<_>>>()?;
    if !(a.timeout.is_finite() && a.timeout > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "timeout {} must be positive",
            a.timeout
        )));
    }
    let cfg = RunConfig {
        data: a.input.data,
        schema: a.input.schema,
        algorithm: a.algorithm.into(),
        interventions,
        learner: a.learner.into(),
        search: SearchOptions {
            epsilon: a.epsilon,
            n_posterior_models: a.max_draws,
            timeout: Duration::from_secs_f64(a.timeout),
            seed: a.seed,
            shift: a.shift_eps.map(|epsilon| ShiftSpec { epsilon }),
            mode: match a.mode {
                Mode::Flip => VerdictMode::Flip,
                Mode::Diff => VerdictMode::Diff,
            },
            alpha: a.alpha,
            ..SearchOptions::default()
        },
        repeats: a.repeats,
        out_dir: a.out,
    };
    let report = run_audit(&cfg)?;
    print!("{}", fairprobe::report::summary_text(&report));
    Ok(report.exit_code() as u8)
}

fn cmd_hp_audit(a: HpAuditArgs) -> Result<u8> {
    let cfg = HpAuditConfig {
        data: a.input.data,
        schema: a.input.schema,
        algorithm: a.algorithm.into(),
        learner: a.learner.into(),
        budget: a.budget,
        seed: a.seed,
        neighbors: a.neighbors,
        out_dir: a.out,
    };
    let r = run_hp_audit(&cfg)?;
    println!("input top-4: {}", r.input_importance.top(4).join(", "));
    for n in &r.neighbors {
        println!(
            "dag {:>3} top-4: {}  violated: {}",
            n.dag_index,
            n.importance.top(4).join(", "),
            n.top4.violated
        );
    }
    Ok(r.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Discover(a) => cmd_discover(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Audit(a) => cmd_audit(a),
        Command::HpAudit(a) => cmd_hp_audit(a),
        Command::Version => {
            println!("fairprobe {}", env!("CARGO_PKG_VERSION"));
            Ok(0)
        }
    };
    match result {
        Ok(code) => {
            let _ = std::io::stdout().flush();
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

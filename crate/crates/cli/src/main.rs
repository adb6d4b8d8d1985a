mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elemnorm_core::elemop::{
    cb_norm, growth_check, haagerup_upper_bound, knorm, knorm_factorial, norm_s1, norm_tgm,
    oracle_norm_unitary, s1_vector_norm, NormSettings, DEFAULT_MAX_DIM,
};
use elemnorm_core::numrange::{haagerup_equality_gap, linearly_independent};
use elemnorm_core::optimizer::OptimizerConfig;
use elemnorm_core::random::Sampler;
use elemnorm_core::suite::{run_property, Property, SuiteConfig};
use elemnorm_core::tgm::{sharp_mean, tgm};
use elemnorm_core::{Error, Psd};
use serde_json::{json, Value};

use crate::report::{emit, norm_report_json, Failure, Output};

/// Relative agreement required between the amplified and factorial-state
/// k-norm routes.
const KNORM_CROSS_TOL: f64 = 1e-4;
const MAX_DIM_VAR: &str = "ELEMNORM_MAX_DIM";

#[derive(Parser, Debug)]
#[command(
    name = "elemnorm",
    version,
    about = "Norms of elementary operators x -> sum a_j x b_j"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Optimizer restarts.
    #[arg(long, global = true, default_value_t = 64)]
    restarts: usize,
    /// Allowed gap between a reported value and the value recomputed from its
    /// certificate.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct Input {
    /// Operator file `{"n", "l", "a", "b"}`.
    #[arg(long, short)]
    input: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum KnormMethod {
    Amplify,
    Factorial,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Operator norm as the supremum of tgm(Q(a*, xi), Q(b, eta)).
    Norm(Input),
    /// Operator norm through the S1 norm of sqrt(Q(b, eta)^t) a*.
    NormS1(Input),
    /// Operator norm by direct search over unitaries.
    Oracle(Input),
    /// k-norm, the norm of the k-th amplification.
    Knorm {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = KnormMethod::Amplify)]
        method: KnormMethod,
    },
    /// Completely bounded norm.
    Cbnorm(Input),
    /// Tracial geometric mean of two PSD matrices.
    Tgm {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
    /// The # geometric mean of two PSD matrices.
    Sharp {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
    /// S1 norm of a family of vectors `{"dim", "vectors"}`.
    S1norm(Input),
    /// k-norms for k = 1..kmax against the growth estimates.
    Growth {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        kmax: usize,
    },
    /// Linear independence of the coefficient tuples.
    Independent(Input),
    /// Upper bound sqrt(||sum a a*|| ||sum b* b||).
    Haagerup {
        #[command(flatten)]
        input: Input,
        /// Also minimize over diagonal rescalings of the tuples.
        #[arg(long)]
        balance: bool,
    },
    /// Distance between the extremal Gram sets of a* and b.
    Eqgap(Input),
    /// Randomized property suite.
    Check {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Run a single property by name.
        #[arg(long)]
        property: Option<String>,
    },
    /// Random operator with Gaussian coefficients.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn max_dim() -> Result<usize, Failure> {
    match std::env::var(MAX_DIM_VAR) {
        Ok(v) => v.parse().ok().filter(|&d: &usize| d > 0).ok_or_else(|| {
            Failure::Input(format!(
                "{MAX_DIM_VAR} must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

fn settings(g: &Global) -> Result<NormSettings, Failure> {
    let optimizer = OptimizerConfig::default()
        .with_restarts(g.restarts)
        .with_seed(g.seed);
    optimizer.validate().map_err(Failure::from)?;
    Ok(NormSettings {
        optimizer,
        max_dim: max_dim()?,
    })
}

fn psd(path: &std::path::Path) -> Result<Psd, Failure> {
    let m = io::read_matrix(path)?;
    Psd::new(m).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let g = &cli.global;
    if g.tol.is_nan() || g.tol <= 0.0 {
        return Err(Failure::Input("--tol must be positive".into()));
    }
    match &cli.command {
        Command::Norm(i) | Command::NormS1(i) | Command::Oracle(i) | Command::Cbnorm(i) => {
            let t = io::read_operator(&i.input)?;
            let st = settings(g)?;
            let r = match &cli.command {
                Command::Norm(_) => norm_tgm(&t, &st)?,
                Command::NormS1(_) => norm_s1(&t, &st)?,
                Command::Oracle(_) => oracle_norm_unitary(&t, &st)?,
                _ => cb_norm(&t, &st)?,
            };
            let cb = matches!(cli.command, Command::Cbnorm(_)).then_some(r.value);
            report::check_report(&r, g.tol)?;
            Ok(Output::report(norm_report_json(
                &r,
                haagerup_upper_bound(&t, false),
                cb,
            )))
        }
        Command::Knorm { input, k, method } => {
            let t = io::read_operator(&input.input)?;
            let st = settings(g)?;
            let cb_order = t.len().min(t.dim());
            let primary = match method {
                KnormMethod::Factorial => knorm_factorial(&t, *k, &st)?,
                _ => knorm(&t, *k, &st)?,
            };
            report::check_report(&primary, g.tol)?;
            let cb = (*k >= cb_order).then_some(primary.value);
            let mut out = norm_report_json(&primary, haagerup_upper_bound(&t, false), cb);
            if *method == KnormMethod::Both {
                let other = knorm_factorial(&t, *k, &st)?;
                report::check_report(&other, g.tol)?;
                let diff = (primary.value - other.value).abs()
                    / primary.value.max(other.value).max(f64::MIN_POSITIVE);
                out["cross_check"] = json!({
                    "method": other.method.as_str(),
                    "value": other.value,
                    "relative_difference": diff,
                });
                if diff > KNORM_CROSS_TOL {
                    return Err(Failure::Tolerance {
                        message: format!(
                            "amplified {} and factorial {} differ by {diff:.3e} (relative)",
                            primary.value, other.value
                        ),
                        partial: Some(out),
                    });
                }
            }
            Ok(Output::report(out))
        }
        Command::Tgm { x, y } => {
            let value = tgm(&psd(x)?, &psd(y)?)?;
            Ok(Output::value(json!({ "value": value })))
        }
        Command::Sharp { x, y } => {
            let (x, y) = (psd(x)?, psd(y)?);
            let mean = sharp_mean(&x, &y)?;
            Ok(Output::value(json!({
                "mean": io::matrix_to_file(mean.mean.matrix()),
                "trace": mean.mean.trace(),
                "regularization": mean.regularization,
            })))
        }
        Command::S1norm(i) => {
            let v = io::read_vectors(&i.input)?;
            Ok(Output::value(json!({ "value": s1_vector_norm(&v) })))
        }
        Command::Growth { input, kmax } => {
            let t = io::read_operator(&input.input)?;
            let table = growth_check(&t, *kmax, &settings(g)?)?;
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "k": r.k,
                        "value": r.value,
                        "max_bound": r.max_bound,
                        "min_bound": r.min_bound,
                        "step_bound": r.step_bound,
                        "product_bound": r.product_bound,
                        "monotone": r.monotone,
                        "k_ratio": r.k_ratio,
                        "sqrt_l_ratio": r.sqrt_l_ratio,
                    })
                })
                .collect();
            let out = json!({
                "terms": table.terms,
                "rows": rows,
                "cb": table.cb,
                "cb_bound": table.cb_bound,
                "all_hold": table.all_hold(),
                "seed": g.seed,
            });
            if table.all_hold() {
                Ok(Output::value(out))
            } else {
                Err(Failure::Tolerance {
                    message: "a growth bound failed".into(),
                    partial: Some(out),
                })
            }
        }
        Command::Independent(i) => {
            let t = io::read_operator(&i.input)?;
            let a = linearly_independent(t.a()).independent;
            let b = linearly_independent(t.b()).independent;
            Ok(Output::value(
                json!({ "a_independent": a, "b_independent": b }),
            ))
        }
        Command::Haagerup { input, balance } => {
            let t = io::read_operator(&input.input)?;
            Ok(Output::value(json!({
                "value": haagerup_upper_bound(&t, *balance),
                "balanced": balance,
            })))
        }
        Command::Eqgap(i) => {
            let t = io::read_operator(&i.input)?;
            let st = settings(g)?;
            let gap = haagerup_equality_gap(t.a(), t.b(), &st.optimizer)?;
            Ok(Output::value(json!({
                "gap": gap.gap,
                "xi": io::vector_entries(gap.xi.as_ref()),
                "eta": io::vector_entries(gap.eta.as_ref()),
                "converged_fraction": gap.converged_fraction,
                "restarts_used": g.restarts,
                "seed": g.seed,
            })))
        }
        Command::Check { trials, property } => check(g, *trials, property.as_deref()),
        Command::Gen { n, l, output } => {
            if *n == 0 || *l == 0 {
                return Err(Failure::Input("--n and --l must be positive".into()));
            }
            let t = Sampler::new(g.seed).operator(*n, *l);
            let text =
                serde_json::to_string_pretty(&io::operator_to_file(&t)).expect("serializable");
            match output {
                Some(path) => {
                    std::fs::write(path, text + "\n")
                        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    Ok(Output::Silent)
                }
                None => Ok(Output::Raw(text)),
            }
        }
    }
}

fn check(g: &Global, trials: usize, only: Option<&str>) -> Result<Output, Failure> {
    let properties: Vec<Property> = match only {
        Some(name) => vec![Property::from_name(name).ok_or_else(|| {
            let known: Vec<&str> = Property::ALL.iter().map(|p| p.name()).collect();
            Failure::Input(format!(
                "unknown property {name:?}; known: {}",
                known.join(", ")
            ))
        })?],
        None => Property::ALL.to_vec(),
    };
    let cfg = SuiteConfig {
        seed: g.seed,
        restarts: g.restarts.min(SuiteConfig::default().restarts),
    };
    let mut rows = Vec::new();
    let mut fixtures = Vec::new();
    for p in properties {
        let out = run_property(p, trials, &cfg);
        rows.push(json!({
            "property": p.name(),
            "trials": out.trials,
            "violations": out.violations,
            "worst_excess": out.worst_excess,
        }));
        if let Some(v) = out.first_violation {
            let matrices: serde_json::Map<String, Value> = v
                .matrices
                .iter()
                .map(|(label, m)| (label.clone(), report::matrix_json(m)))
                .collect();
            fixtures.push(json!({
                "property": p.name(),
                "trial": v.trial,
                "detail": v.detail,
                "matrices": matrices,
            }));
        }
    }
    let out = json!({ "seed": g.seed, "properties": rows });
    if fixtures.is_empty() {
        Ok(Output::value(out))
    } else {
        let mut out = out;
        out["violations"] = Value::Array(fixtures);
        Err(Failure::Tolerance {
            message: "property violations found".into(),
            partial: Some(out),
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.global.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    emit(run(&cli), cli.global.json)
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::DimMismatch { .. }
            | Error::NotHermitian { .. }
            | Error::NotPsd { .. }
            | Error::InvalidProjection { .. }
            | Error::InvalidState(_)
            | Error::ResourceGuard { .. }
            | Error::IllConditioned { .. }
            | Error::SingularBase => Failure::Input(e.to_string()),
            Error::RouteMismatch { .. } => Failure::Tolerance {
                message: e.to_string(),
                partial: None,
            },
        }
    }
}

impl From<io::InputError> for Failure {
    fn from(e: io::InputError) -> Self {
        Failure::Input(e.to_string())
    }
}

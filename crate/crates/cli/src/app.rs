//! Command-line definitions and command implementations.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use isect_core::joint::Budget;
use isect_core::rational::{format_rational, parse_rational, to_f64};
use isect_core::{
    build_plan, check_lll, check_smallness, estimate_log_intersection,
    exact_intersection_probability, full_p_polynomial, oracle::root_localize_exact,
    DependencyGraph, Error, Estimate, EstimateOptions, Event, Guarantee, Precision, ProductSpace,
    Rational, RootReport,
};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use serde_json::json;

use crate::constraints::{cube_instance, parse_constraints};
use crate::generate::{self, Instance, Shape};
use crate::instance::InstanceFile;
use crate::{plans, report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_CONDITIONS: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_CERTAIN: i32 = 5;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input(_) | Error::Syntax { .. } => EXIT_INPUT,
        Error::EnumerationBudget { .. } | Error::SubsetBudget { .. } => EXIT_RESOURCE,
        Error::Construction { .. } | Error::NoConvergence { .. } => EXIT_NUMERIC,
        Error::CertainEvent { .. } => EXIT_CERTAIN,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "isect",
    version,
    about = "Probability that none of a family of dependent events occurs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Unrestricted,
    Small,
    Lll,
    Moderate,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Tuple budget for one enumeration, also the cap on C(n, k) for sigma_k
    #[arg(long, default_value_t = 1 << 24)]
    pub budget: u64,
}

impl Common {
    fn budget(&self) -> Budget {
        Budget {
            enumeration: self.budget,
            subsets: self.budget,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Approximate ln P(no event occurs)
    Estimate {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, value_enum)]
        precision: Option<PrecisionArg>,
        /// Override the truncation order K
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact P(no event occurs) by enumeration
    Exact {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Per-event smallness and local lemma conditions
    Check {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Roots of the full polynomial p
    Roots {
        /// Instance file; omit with --random
        instance: Option<PathBuf>,
        /// Check this many generated instances that pass the smallness condition
        #[arg(long, conflicts_with = "instance")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write instances whose roots come within delta of [0, 1] here
        #[arg(long)]
        archive: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the number of points of {0..c}^m satisfying every constraint
    CountIntegerPoints {
        constraints: PathBuf,
        #[arg(long)]
        cube_side: i64,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, value_enum)]
        precision: Option<PrecisionArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Print a random instance file
    Generate {
        #[arg(long, value_enum, default_value_t = Kind::Small)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build and print an interpolation plan
    Plan {
        /// Zero-free radius parameter as a fraction
        #[arg(long, default_value = "1/30")]
        delta: String,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        #[arg(long, default_value_t = 10)]
        events: usize,
        /// Load and re-validate the shipped plan instead
        #[arg(long)]
        shipped: bool,
    },
}

/// Text to print and the process exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Outcome {
            output,
            code: EXIT_OK,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

fn load(path: &Path) -> isect_core::Result<(ProductSpace, Vec<Event>)> {
    InstanceFile::load(path)?.build()
}

fn options(precision: Option<PrecisionArg>, budget: Budget) -> EstimateOptions {
    EstimateOptions {
        precision: match precision {
            None => Precision::Auto,
            Some(PrecisionArg::Double) => Precision::Double,
            Some(PrecisionArg::Extended) => Precision::Extended,
        },
        budget,
        order: None,
    }
}

fn guarantee_code(estimate: &Estimate) -> i32 {
    match estimate.guarantee {
        Guarantee::CertifiedByAssumption => EXIT_OK,
        Guarantee::ConditionsViolated => EXIT_CONDITIONS,
    }
}

pub fn run(cli: Cli) -> isect_core::Result<Outcome> {
    match cli.command {
        Command::Estimate {
            instance,
            epsilon,
            precision,
            order,
            common,
        } => {
            let (space, events) = load(&instance)?;
            let mut opts = options(precision, common.budget());
            opts.order = order;
            let est = estimate_log_intersection(&space, &events, epsilon, &opts)?;
            let output = match common.format {
                Format::Json => to_json(&est),
                Format::Text => report::estimate(&est),
            };
            Ok(Outcome {
                output,
                code: guarantee_code(&est),
            })
        }
        Command::Exact { instance, common } => {
            let (space, events) = load(&instance)?;
            let p = exact_intersection_probability(&space, &events, common.budget)?;
            let output = match common.format {
                Format::Json => to_json(&json!({
                    "probability": format_rational(&p),
                    "value": to_f64(&p),
                })),
                Format::Text => format!("{}\n{:.15e}\n", format_rational(&p), to_f64(&p)),
            };
            Ok(Outcome::ok(output))
        }
        Command::Check { instance, format } => {
            let (space, events) = load(&instance)?;
            let graph = DependencyGraph::new(&events);
            let smallness = check_smallness(&space, &events, &graph);
            let lll = check_lll(&space, &events, &graph, None)?;
            let output = match format {
                Format::Json => to_json(&json!({ "smallness": smallness, "lll": lll })),
                Format::Text => {
                    let mut out = String::new();
                    report::smallness(&mut out, &smallness);
                    report::lll(&mut out, &lll);
                    out
                }
            };
            Ok(Outcome::ok(output))
        }
        Command::Roots {
            instance,
            random,
            seed,
            archive,
            common,
        } => match (instance, random) {
            (Some(path), _) => {
                let (space, events) = load(&path)?;
                let report = roots_of(&space, &events, common.budget())?;
                let output = match common.format {
                    Format::Json => to_json(&report),
                    Format::Text => report::roots(&report),
                };
                Ok(Outcome::ok(output))
            }
            (None, Some(count)) => roots_batch(count, seed, archive.as_deref(), common),
            (None, None) => Err(Error::Input("give an instance file or --random N".into())),
        },
        Command::CountIntegerPoints {
            constraints,
            cube_side,
            dim,
            epsilon,
            precision,
            common,
        } => {
            let text = fs::read_to_string(&constraints)
                .map_err(|e| Error::Input(format!("{}: {e}", constraints.display())))?;
            count_integer_points(
                &text,
                cube_side,
                dim,
                epsilon,
                options(precision, common.budget()),
                common.format,
            )
        }
        Command::Generate { kind, seed } => {
            let mut rng = generate::rng(seed);
            let Instance { space, events } = match kind {
                Kind::Unrestricted => generate::unrestricted(&mut rng, &Shape::default()),
                Kind::Small => generate::small(&mut rng),
                Kind::Lll => generate::lll(&mut rng),
                Kind::Moderate => generate::moderate(&mut rng),
            };
            let mut output = InstanceFile::from_model(&space, &events).to_json();
            output.push('\n');
            Ok(Outcome::ok(output))
        }
        Command::Plan {
            delta,
            epsilon,
            events,
            shipped,
        } => {
            let plan = if shipped {
                plans::shipped_plan()?
            } else {
                build_plan(&parse_rational(&delta)?, epsilon, events)?
            };
            Ok(Outcome::ok(to_json(&plan.summary())))
        }
    }
}

/// `1 / (6 Delta)` for the instance's dependency graph.
pub fn delta_of(events: &[Event]) -> Rational {
    let graph = DependencyGraph::new(events);
    Rational::new(1.into(), (6 * graph.max_degree() as i64).into())
}

pub fn roots_of(
    space: &ProductSpace,
    events: &[Event],
    budget: Budget,
) -> isect_core::Result<RootReport> {
    let coeffs = full_p_polynomial(space, events, budget)?;
    root_localize_exact(&coeffs, to_f64(&delta_of(events)))
}

fn roots_batch(
    count: usize,
    seed: u64,
    archive: Option<&Path>,
    common: Common,
) -> isect_core::Result<Outcome> {
    let mut rng = generate::rng(seed);
    let mut zero_free = 0usize;
    let mut smallest_margin = f64::INFINITY;
    let mut counterexamples = Vec::new();
    for i in 0..count {
        let inst = generate::small(&mut rng);
        let report = roots_of(&inst.space, &inst.events, common.budget())?;
        smallest_margin =
            smallest_margin.min(report.min_dist - report.min_dist_error - report.delta);
        if report.zero_free {
            zero_free += 1;
        } else {
            if let Some(dir) = archive {
                fs::create_dir_all(dir)
                    .map_err(|e| Error::Input(format!("{}: {e}", dir.display())))?;
                let path = dir.join(format!("seed{seed}-{i}.json"));
                fs::write(
                    &path,
                    InstanceFile::from_model(&inst.space, &inst.events).to_json(),
                )
                .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            }
            counterexamples.push(i);
        }
    }
    let summary = json!({
        "instances": count,
        "seed": seed,
        "zero_free": zero_free,
        "smallest_margin": smallest_margin,
        "counterexamples": counterexamples,
    });
    let output = match common.format {
        Format::Json => to_json(&summary),
        Format::Text => format!(
            "{zero_free}/{count} instances zero-free, smallest margin min_dist - error - delta = {smallest_margin:.6e}\n"
        ),
    };
    Ok(Outcome {
        output,
        code: if counterexamples.is_empty() {
            EXIT_OK
        } else {
            EXIT_CONDITIONS
        },
    })
}

#[derive(Debug, Serialize)]
struct CountReport {
    dim: usize,
    cube_side: i64,
    constraints: usize,
    estimate: f64,
    relative_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
    estimate_details: Estimate,
}

pub fn count_integer_points(
    text: &str,
    side: i64,
    dim: usize,
    epsilon: f64,
    opts: EstimateOptions,
    format: Format,
) -> isect_core::Result<Outcome> {
    let constraints = parse_constraints(text)?;
    let (space, events) = cube_instance(&constraints, side, dim)?;
    let est = estimate_log_intersection(&space, &events, epsilon, &opts)?;
    let cube = BigInt::from(side + 1).pow(dim as u32);
    let all: Vec<usize> = (0..dim).collect();
    let exact = if space.tuple_count(&all) <= opts.budget.enumeration as u128 {
        let p = exact_intersection_probability(&space, &events, opts.budget.enumeration)?;
        let count = p * Rational::from_integer(cube.clone());
        debug_assert!(count.denom().is_one());
        Some(count.to_integer().to_string())
    } else {
        None
    };
    let estimate = cube.to_f64().unwrap_or(f64::INFINITY) * est.value;
    let code = guarantee_code(&est);
    let report = CountReport {
        dim,
        cube_side: side,
        constraints: constraints.len(),
        estimate,
        relative_error: epsilon,
        exact,
        estimate_details: est,
    };
    let output = match format {
        Format::Json => to_json(&report),
        Format::Text => {
            let mut out = format!(
                "estimated |S| = {:.6} (relative error {:e})\n",
                report.estimate, epsilon
            );
            if let Some(exact) = &report.exact {
                out.push_str(&format!("exact |S| = {exact}\n"));
            }
            out.push_str(&report::estimate(&report.estimate_details));
            out
        }
    };
    Ok(Outcome { output, code })
}

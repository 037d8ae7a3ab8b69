//! Command-line front end: audit pages, dump extracted facts, evaluate
//! pre-computed scores, and explain the metric tree.
//!
//! Exit codes: 0 success, 1 score below the requested level, 2 input or
//! configuration error, 3 fetch or parse failure. Reports go to stdout,
//! diagnostics to stderr.

use a11ymeter::audit::{AuditRunError, DEFAULT_WORKERS};
use a11ymeter::config::{
    heuristics_from_file, parse_breakpoints, weights_from_file, AuditConfig, ConfigError,
    LanguageConfig,
};
use a11ymeter::facts::{extract_page, FactsDump, Warning};
use a11ymeter::fetch::{load_target, FetchOptions, Target};
use a11ymeter::metrics::{AnnotationSet, AttributeId, AttributeScore, ContrastMode, NotApplicable};
use a11ymeter::report::{build_report, format_value, render_report, ReportFormat};
use a11ymeter::rollup::{evaluate_tree, LevelLabel, PropertyId, Scale, SubpropertyId, WeightSet};
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

const EXIT_OK: i32 = 0;
const EXIT_BELOW_THRESHOLD: i32 = 1;
const EXIT_INPUT_ERROR: i32 = 2;
const EXIT_FETCH_PARSE_ERROR: i32 = 3;

#[derive(Parser)]
#[command(
    name = "a11ymeter",
    version,
    about = "Static web-accessibility auditor with weighted quality scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit HTML pages (files or URLs) and print a report
    Audit(AuditArgs),
    /// Dump the extracted facts and element references for one target
    Facts(FactsArgs),
    /// Evaluate pre-computed attribute scores without parsing any HTML
    Score(ScoreArgs),
    /// Print the metric tree, weights, and level scale
    Explain(ExplainArgs),
}

#[derive(Args)]
struct CommonReportArgs {
    /// Report format: markdown or json
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Exit with status 1 when the overall level is below this
    /// (very-poor, poor, satisfactory, good, excellent)
    #[arg(long)]
    fail_below: Option<String>,
    /// Override the level-scale breakpoints, e.g. 0.15,0.24,0.38,0.62
    #[arg(long)]
    breakpoints: Option<String>,
    /// Weight overrides file (JSON map of id to weight)
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    /// Files or http(s) URLs to audit as one system
    #[arg(required = true)]
    targets: Vec<String>,
    #[command(flatten)]
    report: CommonReportArgs,
    /// Annotation file with human judgments and overrides (JSON)
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Language configuration file (JSON)
    #[arg(long)]
    langs: Option<PathBuf>,
    /// Heuristic configuration file (JSON)
    #[arg(long)]
    heuristics: Option<PathBuf>,
    /// Contrast aggregation: paper (ratio-weighted) or simple (pass fraction)
    #[arg(long, default_value = "paper")]
    contrast_mode: String,
    /// Treat every page as hierarchically deep
    #[arg(long, conflicts_with = "shallow")]
    deep: bool,
    /// Treat every page as hierarchically shallow
    #[arg(long)]
    shallow: bool,
    /// Path depth to assume for file targets
    #[arg(long)]
    path_depth: Option<u32>,
    /// Also evaluate each page on its own
    #[arg(long)]
    per_page: bool,
    /// Parallel fetch/parse workers
    #[arg(long, default_value_t = DEFAULT_WORKERS)]
    workers: usize,
}

#[derive(Args)]
struct FactsArgs {
    /// File or http(s) URL to inspect
    target: String,
    /// Heuristic configuration file (JSON)
    #[arg(long)]
    heuristics: Option<PathBuf>,
    /// Path depth to assume for file targets
    #[arg(long)]
    path_depth: Option<u32>,
}

#[derive(Args)]
struct ScoreArgs {
    /// JSON file mapping attribute ids to measured values in [0, 1]
    #[arg(long)]
    scores: PathBuf,
    #[command(flatten)]
    report: CommonReportArgs,
}

#[derive(Args)]
struct ExplainArgs {
    /// Weight overrides file (JSON map of id to weight)
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Override the level-scale breakpoints
    #[arg(long)]
    breakpoints: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Audit(args) => cmd_audit(args),
        Command::Facts(args) => cmd_facts(args),
        Command::Score(args) => cmd_score(args),
        Command::Explain(args) => cmd_explain(args),
    };
    std::process::exit(code);
}

fn fail_input(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    EXIT_INPUT_ERROR
}

fn parse_report_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn parse_fail_below(arg: &Option<String>) -> Result<Option<LevelLabel>, String> {
    arg.as_deref().map(str::parse).transpose()
}

fn load_weights(path: &Option<PathBuf>) -> Result<WeightSet, ConfigError> {
    match path {
        Some(p) => weights_from_file(p),
        None => Ok(WeightSet::default()),
    }
}

fn load_scale(arg: &Option<String>) -> Result<Scale, ConfigError> {
    match arg {
        Some(text) => parse_breakpoints(text),
        None => Ok(Scale::default()),
    }
}

/// Exit status for a finished report: 1 when a threshold was requested and
/// the achieved level is below it (or no level could be computed at all).
fn threshold_status(level: Option<LevelLabel>, fail_below: Option<LevelLabel>) -> i32 {
    match fail_below {
        None => EXIT_OK,
        Some(required) => match level {
            Some(achieved) if achieved >= required => EXIT_OK,
            _ => EXIT_BELOW_THRESHOLD,
        },
    }
}

fn emit(bytes: &[u8]) {
    std::io::stdout().write_all(bytes).expect("stdout");
}

fn cmd_audit(args: AuditArgs) -> i32 {
    let format = match parse_report_format(&args.report.format) {
        Ok(f) => f,
        Err(e) => return fail_input(e),
    };
    let fail_below = match parse_fail_below(&args.report.fail_below) {
        Ok(f) => f,
        Err(e) => return fail_input(e),
    };
    let contrast_mode: ContrastMode = match args.contrast_mode.parse() {
        Ok(m) => m,
        Err(e) => return fail_input(e),
    };
    let weights = match load_weights(&args.report.weights) {
        Ok(w) => w,
        Err(e) => return fail_input(e),
    };
    let scale = match load_scale(&args.report.breakpoints) {
        Ok(s) => s,
        Err(e) => return fail_input(e),
    };
    let annotations = match &args.annotations {
        Some(path) => match AnnotationSet::from_file(path) {
            Ok(a) => Some(a),
            Err(e) => return fail_input(e),
        },
        None => None,
    };
    let languages = match &args.langs {
        Some(path) => match LanguageConfig::from_file(path) {
            Ok(l) => l,
            Err(e) => return fail_input(e),
        },
        None => LanguageConfig::default(),
    };
    let heuristics = match &args.heuristics {
        Some(path) => match heuristics_from_file(path) {
            Ok(h) => h,
            Err(e) => return fail_input(e),
        },
        None => Default::default(),
    };

    let deep_page_override = if args.deep {
        Some(true)
    } else if args.shallow {
        Some(false)
    } else {
        None
    };
    let config = AuditConfig {
        weights,
        annotations,
        languages,
        contrast_mode,
        scale,
        deep_page_override,
        heuristics,
        per_page: args.per_page,
    };

    let mut targets = Vec::with_capacity(args.targets.len());
    for spec in &args.targets {
        match Target::parse(spec) {
            Ok(target) => {
                if let Err(e) = target.check_exists() {
                    return fail_input(e);
                }
                targets.push(target);
            }
            Err(e) => return fail_input(e),
        }
    }

    let fetch_options = FetchOptions {
        path_depth_override: args.path_depth,
        fetch_css: true,
    };
    let report = match a11ymeter::run_audit(&targets, &config, &fetch_options, args.workers) {
        Ok(report) => report,
        Err(AuditRunError { failures, total }) => {
            eprintln!("error: {} of {total} targets failed", failures.len());
            for failure in &failures {
                eprintln!("  {failure}");
            }
            return if failures.iter().any(|f| f.is_input_error()) {
                EXIT_INPUT_ERROR
            } else {
                EXIT_FETCH_PARSE_ERROR
            };
        }
    };

    emit(&render_report(&report, format));
    threshold_status(report.level.map(|l| l.label), fail_below)
}

fn cmd_facts(args: FactsArgs) -> i32 {
    let heuristics = match &args.heuristics {
        Some(path) => match heuristics_from_file(path) {
            Ok(h) => h,
            Err(e) => return fail_input(e),
        },
        None => Default::default(),
    };
    let target = match Target::parse(&args.target) {
        Ok(t) => t,
        Err(e) => return fail_input(e),
    };
    if let Err(e) = target.check_exists() {
        return fail_input(e);
    }
    let options = FetchOptions {
        path_depth_override: args.path_depth,
        fetch_css: true,
    };
    let loaded = match load_target(&target, &options) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FETCH_PARSE_ERROR;
        }
    };
    let page = match extract_page(&loaded.document, &heuristics, &loaded.external_css) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {}: {e}", loaded.document.origin);
            return EXIT_FETCH_PARSE_ERROR;
        }
    };
    let dump = FactsDump::from(&page);
    let mut out = serde_json::to_vec_pretty(&dump).expect("dump serializes");
    out.push(b'\n');
    emit(&out);
    EXIT_OK
}

fn cmd_score(args: ScoreArgs) -> i32 {
    let format = match parse_report_format(&args.report.format) {
        Ok(f) => f,
        Err(e) => return fail_input(e),
    };
    let fail_below = match parse_fail_below(&args.report.fail_below) {
        Ok(f) => f,
        Err(e) => return fail_input(e),
    };
    let weights = match load_weights(&args.report.weights) {
        Ok(w) => w,
        Err(e) => return fail_input(e),
    };
    let scale = match load_scale(&args.report.breakpoints) {
        Ok(s) => s,
        Err(e) => return fail_input(e),
    };
    let text = match std::fs::read_to_string(&args.scores) {
        Ok(t) => t,
        Err(e) => return fail_input(format_args!("cannot read {}: {e}", args.scores.display())),
    };
    let values: BTreeMap<String, f64> = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => {
            return fail_input(format_args!(
                "invalid JSON in {}: {e}",
                args.scores.display()
            ))
        }
    };

    let mut warnings = Vec::new();
    let mut supplied: BTreeMap<AttributeId, f64> = BTreeMap::new();
    for (key, value) in values {
        match key.parse::<AttributeId>() {
            Ok(id) => {
                if !(0.0..=1.0).contains(&value) {
                    return fail_input(format_args!(
                        "score for {key} must be in [0, 1], got {value}"
                    ));
                }
                supplied.insert(id, value);
            }
            Err(_) => warnings.push(Warning::UnknownAttribute { id: key }),
        }
    }

    let mut scores = Vec::with_capacity(AttributeId::ALL.len());
    for id in AttributeId::ALL {
        match supplied.get(&id) {
            Some(&value) => scores.push(AttributeScore::direct(id, value)),
            None => {
                warnings.push(Warning::MissingAttribute {
                    attribute: id.to_string(),
                });
                scores.push(AttributeScore::not_applicable(
                    id,
                    NotApplicable::NoEvidence,
                ));
            }
        }
    }

    let tree = match evaluate_tree(&scores, &weights, &scale, &mut warnings) {
        Ok(tree) => tree,
        Err(e) => return fail_input(e),
    };
    let report = build_report(&tree, &weights, &scale, Vec::new(), warnings, None);
    emit(&render_report(&report, format));
    threshold_status(report.level.map(|l| l.label), fail_below)
}

fn cmd_explain(args: ExplainArgs) -> i32 {
    let weights = match load_weights(&args.weights) {
        Ok(w) => w,
        Err(e) => return fail_input(e),
    };
    let scale = match load_scale(&args.breakpoints) {
        Ok(s) => s,
        Err(e) => return fail_input(e),
    };

    let mut out = String::new();
    out.push_str("Accessibility (UAC)\n");
    for property in PropertyId::ALL {
        out.push_str(&format!(
            "└─ {} {} (weight {})\n",
            property.code(),
            property.name(),
            format_value(weights.property(property))
        ));
        for sub in property.children() {
            out.push_str(&format!(
                "   └─ {} {} (weight {})\n",
                sub.code(),
                sub.name(),
                format_value(weights.subproperty(*sub))
            ));
            for attr in sub.children() {
                if *sub == SubpropertyId::Localization {
                    continue; // the localization leaf is the subproperty itself
                }
                out.push_str(&format!(
                    "      └─ {} {} (weight {}) — {}\n",
                    attr.code(),
                    attr.name(),
                    format_value(weights.attribute(*attr)),
                    attribute_explanation(*attr)
                ));
            }
        }
    }
    out.push_str("\nLocalization indicators: state language 0.6, English 0.2, ");
    out.push_str("popular European languages 0.08 each, other languages 0.04.\n");
    out.push_str("\nLevel scale (boundaries belong to the higher band):\n");
    let mut lower = 0.0;
    for label in LevelLabel::ALL {
        let band = scale.band(label);
        out.push_str(&format!(
            "  {:<12} [{}, {}{}\n",
            band.label.to_string(),
            format_value(lower),
            format_value(band.upper_bound),
            if label == LevelLabel::Excellent {
                "]"
            } else {
                ")"
            }
        ));
        lower = band.upper_bound;
    }
    print!("{out}");
    EXIT_OK
}

fn attribute_explanation(id: AttributeId) -> &'static str {
    match id {
        AttributeId::AltText => "share of images with meaningful alternative text",
        AttributeId::ColorContrast => "ratio-weighted share of text passing contrast thresholds",
        AttributeId::MediaAlternatives => "share of media with subtitles or descriptions",
        AttributeId::KeyboardNavigation => "share of interactive elements usable by keyboard",
        AttributeId::StructuredNavigation => "breadcrumbs plus heading-structure hygiene",
        AttributeId::ClearInstructions => "share of instructions humans rated clear (annotated)",
        AttributeId::InputAssistance => "share of text fields offering input assistance",
        AttributeId::ErrorSupport => "share of forms announcing input errors",
        AttributeId::Localization => "weighted language availability",
    }
}

//! Command-line front end: CSV ingestion, fitting, export and reports.
//!
//! Exit codes: 0 success, 1 other failures (I/O, bad parameters),
//! 2 malformed CSV or dendrogram file, 3 unknown algorithm or format,
//! 4 empty input, 5 leaf count mismatch between points and dendrogram.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::dendro::{normalize, Dendrogram};
use crate::error::Error;
use crate::eval::{benchmark, compare, distortion, format_compare_table};
use crate::pipeline::{fit, Algorithm};
use crate::points::PointSet;
use crate::spanner::SpannerConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Unknown(String),
    #[error("input has no points")]
    Empty,
    #[error("{0}")]
    LeafMismatch(String),
    #[error(transparent)]
    Fit(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse(_) => 2,
            Self::Unknown(_) => 3,
            Self::Empty | Self::Fit(Error::Empty) => 4,
            Self::LeafMismatch(_) => 5,
            Self::Io(_) | Self::Fit(_) => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "ultrafit", version, about = "Fit ultrametrics to Euclidean point sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one algorithm and write the dendrogram plus a stats sidecar.
    Fit(FitArgs),
    /// Run several algorithms and tabulate normalized max distortion.
    Compare(CompareArgs),
    /// Measure the distortion of an exported merge list against its points.
    Eval(EvalArgs),
    /// Mean wall time per algorithm over repeated runs.
    Bench(BenchArgs),
    /// Write uniform random points in the unit cube as CSV.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SpannerArgs {
    #[arg(long, default_value_t = 2.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hash repetitions per scale (default ceil(log2(n)^2)).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Concatenated projections per repetition (default ceil(log2(n) / gamma)).
    #[arg(long)]
    pub projections: Option<usize>,
}

impl SpannerArgs {
    fn config(&self) -> CliResult<SpannerConfig> {
        let cfg = SpannerConfig {
            gamma: self.gamma,
            seed: self.seed,
            reps: self.reps,
            projections: self.projections,
            ..SpannerConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "approx")]
    pub algo: String,
    #[command(flatten)]
    pub spanner: SpannerArgs,
    /// merges, newick or json.
    #[arg(long, default_value = "merges")]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Rescale heights so the smallest ratio to the input distance is 1.
    #[arg(long)]
    pub normalize: bool,
    /// Skip the all-pairs distortion scan for the sidecar.
    #[arg(long)]
    pub no_distortion: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated list, or `all`.
    #[arg(long, default_value = "all")]
    pub algo: String,
    #[command(flatten)]
    pub spanner: SpannerArgs,
    /// Also write the rows as JSON here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Merge list (or JSON dendrogram) written by `fit`.
    #[arg(long)]
    pub dendrogram: PathBuf,
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "approx,average")]
    pub algo: String,
    #[command(flatten)]
    pub spanner: SpannerArgs,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Merges,
    Newick,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "merges" => Ok(Self::Merges),
            "newick" => Ok(Self::Newick),
            "json" => Ok(Self::Json),
            other => Err(CliError::Unknown(format!(
                "unknown format '{other}' (expected merges, newick or json)"
            ))),
        }
    }
}

pub fn parse_algorithm(s: &str) -> CliResult<Algorithm> {
    s.trim().parse().map_err(|_| {
        let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        CliError::Unknown(format!(
            "unknown algorithm '{}' (expected one of {})",
            s.trim(),
            names.join(", ")
        ))
    })
}

pub fn parse_algorithm_list(s: &str) -> CliResult<Vec<Algorithm>> {
    if s.trim() == "all" {
        return Ok(Algorithm::ALL.to_vec());
    }
    s.split(',').map(parse_algorithm).collect()
}

/// Parses comma-separated coordinates. A first row that does not parse as
/// numbers is taken as a header.
pub fn parse_csv(text: &str) -> CliResult<PointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut coords = Vec::new();
    let mut d = 0;
    let mut n = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Parse(format!("csv: {e}")))?;
        let row = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if n == 0 && d == 0 && parsed.iter().any(Option::is_none) && i == 0 {
            continue;
        }
        if d == 0 {
            d = record.len();
        } else if record.len() != d {
            return Err(CliError::Parse(format!(
                "row {row}: expected {d} columns, found {}",
                record.len()
            )));
        }
        for (col, (value, field)) in parsed.iter().zip(record.iter()).enumerate() {
            match value {
                Some(v) if v.is_finite() => coords.push(*v),
                _ => {
                    return Err(CliError::Parse(format!(
                        "row {row}, column {}: '{field}' is not a finite number",
                        col + 1
                    )))
                }
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(CliError::Empty);
    }
    Ok(PointSet::new(n, d, coords)?)
}

pub fn read_points(path: &Path) -> CliResult<PointSet> {
    parse_csv(&read_text(path)?)
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_dendrogram(path: &Path) -> CliResult<Dendrogram> {
    let text = read_text(path)?;
    let parsed = if text.trim_start().starts_with('{') {
        Dendrogram::parse_json(&text)
    } else {
        Dendrogram::parse_merge_list(&text)
    };
    parsed.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn render(dendro: &Dendrogram, format: Format) -> String {
    match format {
        Format::Merges => dendro.to_merge_list(),
        Format::Json => dendro.to_json() + "\n",
        Format::Newick => {
            let labels: Vec<String> = (0..dendro.num_leaves()).map(|i| i.to_string()).collect();
            dendro.to_newick(&labels).expect("one label per leaf") + "\n"
        }
    }
}

/// Path of the stats file written next to a `fit` output.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".stats.json");
    PathBuf::from(name)
}

#[derive(Debug, Serialize)]
pub struct FitStats {
    pub n: usize,
    pub d: usize,
    pub distinct_points: usize,
    pub algorithm: Algorithm,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub stage_timings_ms: BTreeMap<String, f64>,
    pub spanner_edges: Option<usize>,
    pub max_distortion: Option<f64>,
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ward_height: Option<&'static str>,
}

pub fn run_fit(args: &FitArgs) -> CliResult<FitStats> {
    let algorithm = parse_algorithm(&args.algo)?;
    let format: Format = args.format.parse()?;
    let config = args.spanner.config()?;
    let points = read_points(&args.input)?;
    let (distinct, multiplicity) = points.dedupe();
    let result = fit(&distinct, algorithm, &config)?;

    let mut dendro = result.dendrogram.clone();
    let mut scale = None;
    if args.normalize {
        let (scaled, s) = normalize(&dendro, &distinct)?;
        dendro = scaled;
        scale = Some(s);
    }
    let max_distortion = if args.no_distortion {
        None
    } else {
        Some(distortion(&distinct, &dendro, false)?.max)
    };
    let exported = dendro.expand(&multiplicity)?;
    write_text(&args.out, &render(&exported, format))?;

    let stats = FitStats {
        n: points.len(),
        d: points.dim(),
        distinct_points: distinct.len(),
        algorithm,
        gamma: result.gamma,
        seed: result.seed,
        stage_timings_ms: result.timings.iter().map(|t| (t.stage.to_string(), t.ms)).collect(),
        spanner_edges: result.spanner_edges,
        max_distortion,
        scale,
        ward_height: (algorithm == Algorithm::Ward).then_some("sqrt_lance_williams"),
    };
    let json = serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n";
    write_text(&sidecar_path(&args.out), &json)?;
    Ok(stats)
}

pub fn run_compare(args: &CompareArgs) -> CliResult<String> {
    let algorithms = parse_algorithm_list(&args.algo)?;
    let config = args.spanner.config()?;
    let (points, _) = read_points(&args.input)?.dedupe();
    let rows = compare(&points, &algorithms, &config)?;
    if let Some(out) = &args.out {
        write_text(
            out,
            &(serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"),
        )?;
    }
    Ok(format_compare_table(&rows))
}

pub fn run_eval(args: &EvalArgs) -> CliResult<String> {
    let points = read_points(&args.input)?;
    let dendro = read_dendrogram(&args.dendrogram)?;
    if dendro.num_leaves() != points.len() {
        return Err(CliError::LeafMismatch(format!(
            "dendrogram has {} leaves but {} has {} points",
            dendro.num_leaves(),
            args.input.display(),
            points.len()
        )));
    }
    let report = distortion(&points, &dendro, args.normalize)?;
    Ok(serde_json::to_string_pretty(&report).expect("report serializes") + "\n")
}

pub fn run_bench(args: &BenchArgs) -> CliResult<String> {
    let algorithms = parse_algorithm_list(&args.algo)?;
    let config = args.spanner.config()?;
    let (points, _) = read_points(&args.input)?.dedupe();
    let rows = benchmark(&points, &algorithms, args.repeats, &config)?;
    Ok(serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n")
}

pub fn run_gen(args: &GenArgs) -> CliResult<()> {
    if args.n == 0 {
        return Err(CliError::Empty);
    }
    let points = PointSet::uniform_cube(args.n, args.d, args.seed)?;
    let mut text = String::new();
    for i in 0..points.len() {
        let row: Vec<String> = points.point(i).iter().map(|x| format!("{x:?}")).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    write_text(&args.out, &text)
}

/// Runs a parsed command, printing reports to stdout.
pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Fit(args) => run_fit(args).map(|_| ()),
        Command::Compare(args) => run_compare(args).map(|t| print!("{t}")),
        Command::Eval(args) => run_eval(args).map(|t| print!("{t}")),
        Command::Bench(args) => run_bench(args).map(|t| print!("{t}")),
        Command::Gen(args) => run_gen(args),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header_and_crlf() {
        let p = parse_csv("x,y\r\n0,1\r\n2.5,-3e1\r\n").unwrap();
        assert_eq!((p.len(), p.dim()), (2, 2));
        assert_eq!(p.point(1), &[2.5, -30.0]);
    }

    #[test]
    fn csv_without_header() {
        let p = parse_csv("0\n1\n3\n").unwrap();
        assert_eq!(p.coords(), &[0.0, 1.0, 3.0]);
    }

    #[test]
    fn csv_errors_name_row_and_column() {
        let err = parse_csv("1,2\n3,x\n").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("row 2, column 2"), "{err}");
        let err = parse_csv("1,2\n3\n").unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert_eq!(parse_csv("a,b\n1,nan\n").unwrap_err().exit_code(), 2);
        // comma decimal separators are not numbers
        assert_eq!(parse_csv("0,0\n\"1,5\",2\n").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn empty_inputs_exit_four() {
        assert_eq!(parse_csv("").unwrap_err().exit_code(), 4);
        assert_eq!(parse_csv("x,y\n").unwrap_err().exit_code(), 4);
    }

    #[test]
    fn unknown_names_exit_three() {
        assert_eq!(parse_algorithm("kmeans").unwrap_err().exit_code(), 3);
        assert_eq!("svg".parse::<Format>().unwrap_err().exit_code(), 3);
        assert_eq!(
            parse_algorithm_list("exact, single").unwrap(),
            vec![Algorithm::Exact, Algorithm::Single]
        );
        assert_eq!(parse_algorithm_list("all").unwrap().len(), 7);
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(
            sidecar_path(Path::new("a/tree.txt")),
            PathBuf::from("a/tree.txt.stats.json")
        );
    }

    #[test]
    fn render_formats() {
        let d = Dendrogram::from_merges(3, &[(0, 1, 1.0), (3, 2, 3.0)]).unwrap();
        assert_eq!(render(&d, Format::Merges), "0 1 1.0 2\n3 2 3.0 3\n");
        assert_eq!(render(&d, Format::Newick), "((0:1,1:1):2,2:3);\n");
        assert!(render(&d, Format::Json).starts_with("{\"n\":3"));
    }
}

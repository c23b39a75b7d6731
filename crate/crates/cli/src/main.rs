// SPDX-License-Identifier: Apache-2.0

//! `nlf`: enumerate exchange graphs, mutate seeds and verify the
//! non-leaving-face property from the command line.
//!
//! Exit codes:
//!
//! | code | meaning                                             |
//! |------|-----------------------------------------------------|
//! | 0    | success, nothing violated                           |
//! | 1    | verification found violations or falsifications     |
//! | 2    | usage error                                         |
//! | 3    | matrix is not skew-symmetrizable                    |
//! | 4    | budget exceeded or graph incomplete                 |
//! | 5    | a Laurent division was not exact                    |
//! | 6    | index, variable or vertex out of range              |
//! | 7    | I/O or input parse failure                          |
//! | 8    | other internal error                                |

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nlf_core::bongartz::{
    audit_projection, bongartz_completion, projection, BongartzError, CompletionQuery, ProjectionViolation, RootFrame,
};
use nlf_core::graph::{Budgets, ExchangeGraph, GraphError, GraphJson};
use nlf_core::matrix::IntMatrix;
use nlf_core::nlf::{verify_all, NlfConfig};
use nlf_core::seed::{ExchangeMatrix, LabeledSeed, SeedError, TreePath};

#[derive(Parser)]
#[command(name = "nlf", version, about = "Exchange graphs of cluster algebras and the non-leaving-face property")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the exchange graph and write it as JSON, DOT or text.
    Enumerate(Common),
    /// Apply a mutation path to the initial seed and print the result.
    Mutate {
        #[command(flatten)]
        common: Common,
        /// One-based directions, comma separated; empty for the initial seed.
        #[arg(long, value_delimiter = ',', default_value = "")]
        path: Vec<String>,
    },
    /// C-matrices of every vertex with respect to a root.
    Cvectors {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        root: RootArg,
    },
    /// Bongartz completion of a variable set with respect to a root.
    Bongartz {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        root: RootArg,
        #[command(flatten)]
        u: VarSetArg,
    },
    /// Projection onto the face of a variable set, with its axiom audit.
    Project {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        u: VarSetArg,
    },
    /// Verify the non-leaving-face property and its supporting claims.
    VerifyNlf {
        #[command(flatten)]
        common: Common,
        /// Previously exported graph JSON, used instead of enumerating `--input`.
        #[arg(long, conflicts_with = "input")]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        pair_budget: u64,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        path_budget: u64,
    },
    /// Write the exchange graph in DOT, optionally highlighting a face.
    ExportDot {
        #[command(flatten)]
        common: Common,
        #[arg(long = "u", value_delimiter = ';')]
        u: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    /// Matrix file or inline JSON such as '{"B": [[0,1],[-1,0]]}'.
    #[arg(long)]
    input: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = Budgets::default().max_vertices, value_parser = positive)]
    max_vertices: usize,
    #[arg(long, default_value_t = Budgets::default().max_depth, value_parser = positive)]
    max_depth: usize,
}

#[derive(Args)]
struct RootArg {
    /// One-based path from the initial seed to the root, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "")]
    root: Vec<String>,
}

#[derive(Args)]
struct VarSetArg {
    /// Cluster variables, separated by ';', in the canonical rendering.
    #[arg(long = "u", value_delimiter = ';', required = true)]
    u: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Deserialize)]
struct MatrixInput {
    #[serde(rename = "B")]
    b: Vec<Vec<i64>>,
    symmetrizer: Option<Vec<u64>>,
}

enum Failure {
    Violations,
    Usage(String),
    Seed(SeedError),
    Graph(GraphError),
    Bongartz(BongartzError),
    Io(String),
}

impl From<SeedError> for Failure {
    fn from(e: SeedError) -> Self {
        Failure::Seed(e)
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Seed(s) => Failure::Seed(s),
            other => Failure::Graph(other),
        }
    }
}

impl From<BongartzError> for Failure {
    fn from(e: BongartzError) -> Self {
        match e {
            BongartzError::Seed(s) => Failure::Seed(s),
            BongartzError::Graph(g) => g.into(),
            other => Failure::Bongartz(other),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Violations => 1,
            Failure::Usage(_) => 2,
            Failure::Seed(SeedError::NotSkewSymmetrizable(_)) => 3,
            Failure::Graph(GraphError::Incomplete(_)) => 4,
            Failure::Seed(e) if e.is_division_not_exact() => 5,
            Failure::Seed(SeedError::DirectionOutOfRange { .. } | SeedError::RankMismatch { .. }) => 6,
            Failure::Graph(
                GraphError::UnknownVariable(_) | GraphError::UnknownVertex(_) | GraphError::NotAFace(_),
            ) => 6,
            Failure::Io(_) | Failure::Graph(GraphError::Malformed(_)) => 7,
            Failure::Bongartz(e) if e.is_falsification() => 1,
            _ => 8,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Violations => "verification found violations".into(),
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
            Failure::Seed(e) => e.to_string(),
            Failure::Graph(e) => e.to_string(),
            Failure::Bongartz(e) => e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read_matrix(input: Option<&str>) -> Result<ExchangeMatrix, Failure> {
    let src = input.ok_or_else(|| Failure::Usage("--input is required".into()))?;
    let text = if src.trim_start().starts_with('{') {
        src.to_string()
    } else {
        fs::read_to_string(src).map_err(|e| Failure::Io(format!("cannot read {src}: {e}")))?
    };
    let parsed: MatrixInput =
        serde_json::from_str(&text).map_err(|e| Failure::Io(format!("cannot parse matrix input: {e}")))?;
    let matrix = match parsed.symmetrizer {
        None => ExchangeMatrix::from_rows(parsed.b)?,
        Some(s) => {
            let b = IntMatrix::from_rows(parsed.b)
                .map_err(|_| SeedError::NotSkewSymmetrizable("matrix is not square".into()))?;
            ExchangeMatrix::with_symmetrizer(b, s)?
        }
    };
    Ok(matrix)
}

fn budgets(c: &Common) -> Budgets {
    Budgets {
        max_vertices: c.max_vertices,
        max_depth: c.max_depth,
    }
}

fn complete_graph(c: &Common) -> Result<ExchangeGraph, Failure> {
    let g = ExchangeGraph::enumerate(&read_matrix(c.input.as_deref())?, budgets(c))?;
    g.require_complete()?;
    Ok(g)
}

fn parse_path(steps: &[String], rank: usize) -> Result<TreePath, Failure> {
    let mut out = Vec::new();
    for s in steps.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let k: usize = s
            .parse()
            .map_err(|_| Failure::Usage(format!("invalid direction {s:?}")))?;
        if k == 0 || k > rank {
            return Err(SeedError::DirectionOutOfRange { k, rank }.into());
        }
        out.push(k - 1);
    }
    Ok(TreePath::from_steps(out))
}

fn emit(c: &Common, body: &str) -> Outcome {
    match &c.output {
        Some(path) => fs::write(path, body).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

/// Status lines go to stdout when the document goes to a file, else to stderr.
fn status(c: &Common, line: &str) {
    if c.output.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn count_line(g: &ExchangeGraph) -> String {
    format!(
        "{} vertices, {} edges, {}",
        g.num_vertices(),
        g.num_edges(),
        if g.is_complete() {
            "complete".to_string()
        } else {
            format!("incomplete ({})", g.completeness())
        }
    )
}

fn graph_text(g: &ExchangeGraph) -> String {
    let mut s = format!("{}\n", count_line(g));
    for v in 0..g.num_vertices() {
        s.push_str(&format!(
            "v{v} path={:?} cluster={{{}}}\n",
            g.witness(v).one_based(),
            g.cluster_strings(v).join("; ")
        ));
    }
    for (a, b) in g.edges() {
        s.push_str(&format!("v{a} -- v{b}\n"));
    }
    s
}

fn cmd_enumerate(c: &Common) -> Outcome {
    let g = ExchangeGraph::enumerate(&read_matrix(c.input.as_deref())?, budgets(c))?;
    let body = match c.format.unwrap_or(Format::Json) {
        Format::Json => json(&g.to_json()),
        Format::Dot => g.to_dot(None),
        Format::Text => graph_text(&g),
    };
    emit(c, &body)?;
    // text output already starts with the count line
    if c.format != Some(Format::Text) || c.output.is_some() {
        status(c, &count_line(&g));
    }
    if g.is_complete() {
        Ok(())
    } else {
        Err(Failure::Graph(GraphError::Incomplete(g.completeness())))
    }
}

fn cmd_mutate(c: &Common, path: &[String]) -> Outcome {
    let m = read_matrix(c.input.as_deref())?;
    let steps = parse_path(path, m.rank())?;
    let seed = LabeledSeed::initial(m).mutate_along(steps.steps())?;
    let record = seed.record();
    let body = match c.format.unwrap_or(Format::Json) {
        Format::Json => json(&record),
        Format::Text => format!(
            "path: {:?}\nvariables: [{}]\nB: {}\nC: {}\n",
            record.path,
            record.variables.join(", "),
            seed.matrix().matrix(),
            seed.cmatrix().matrix()
        ),
        Format::Dot => return Err(Failure::Usage("mutate does not support --format dot".into())),
    };
    emit(c, &body)
}

#[derive(Serialize)]
struct CVectorEntry {
    vertex: usize,
    witness_path: Vec<usize>,
    labeled_cluster: Vec<String>,
    #[serde(rename = "C")]
    c: Vec<Vec<i64>>,
}

#[derive(Serialize)]
struct CVectorDump {
    root_path: Vec<usize>,
    vertices: Vec<CVectorEntry>,
}

fn cmd_cvectors(c: &Common, root: &RootArg) -> Outcome {
    let g = complete_graph(c)?;
    let root = parse_path(&root.root, g.rank())?;
    let frame = RootFrame::new(&g, &root)?;
    let dump = CVectorDump {
        root_path: root.one_based(),
        vertices: (0..g.num_vertices())
            .map(|v| CVectorEntry {
                vertex: v,
                witness_path: g.witness(v).one_based(),
                labeled_cluster: g.labels(v).iter().map(|&x| g.variable_name(x).to_string()).collect(),
                c: frame.cmatrix(v).rows(),
            })
            .collect(),
    };
    let body = match c.format.unwrap_or(Format::Json) {
        Format::Json => json(&dump),
        Format::Text => dump
            .vertices
            .iter()
            .map(|e| format!("v{} path={:?} C={:?}\n", e.vertex, e.witness_path, e.c))
            .collect(),
        Format::Dot => return Err(Failure::Usage("cvectors does not support --format dot".into())),
    };
    emit(c, &body)
}

fn cmd_bongartz(c: &Common, root: &RootArg, u: &VarSetArg) -> Outcome {
    let g = complete_graph(c)?;
    let root = parse_path(&root.root, g.rank())?;
    let q = CompletionQuery {
        u: g.var_set(&u.u)?,
        root,
    };
    let result = bongartz_completion(&g, &q)?;
    let record = result.record(&g, &q);
    let body = match c.format.unwrap_or(Format::Json) {
        Format::Json => json(&record),
        Format::Text => format!(
            "U: [{}]\nroot: {:?}\ncompletion: v{} [{}]\n",
            record.u.join("; "),
            record.root_path,
            result.vertex,
            record.completion.join("; ")
        ),
        Format::Dot => g.to_dot(Some(&g.face_of(&q.u)?)),
    };
    emit(c, &body)
}

#[derive(Serialize)]
struct ProjectionDump {
    #[serde(rename = "U")]
    u: Vec<String>,
    face: Vec<usize>,
    map: Vec<usize>,
    violations: Vec<ProjectionViolation>,
}

fn cmd_project(c: &Common, u: &VarSetArg) -> Outcome {
    let g = complete_graph(c)?;
    let set = g.var_set(&u.u)?;
    let p = projection(&g, &set)?;
    let violations = audit_projection(&g, &p);
    let dump = ProjectionDump {
        u: g.set_strings(&set),
        face: p.face.vertices.clone(),
        map: p.map.clone(),
        violations,
    };
    let body = match c.format.unwrap_or(Format::Json) {
        Format::Json => json(&dump),
        Format::Text => {
            let mut s = format!("U: [{}]\nface: {:?}\n", dump.u.join("; "), dump.face);
            for (v, img) in dump.map.iter().enumerate() {
                s.push_str(&format!("v{v} -> v{img}\n"));
            }
            s.push_str(&format!("axiom violations: {}\n", dump.violations.len()));
            s
        }
        Format::Dot => g.to_dot(Some(&p.face)),
    };
    emit(c, &body)?;
    if dump.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violations)
    }
}

fn cmd_verify(c: &Common, graph: Option<&PathBuf>, pair_budget: u64, path_budget: u64) -> Outcome {
    let g = match graph {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            let parsed: GraphJson =
                serde_json::from_str(&text).map_err(|e| Failure::Io(format!("cannot parse graph: {e}")))?;
            ExchangeGraph::from_json(&parsed)?
        }
        None => ExchangeGraph::enumerate(&read_matrix(c.input.as_deref())?, budgets(c))?,
    };
    if !g.is_complete() {
        eprintln!("refusing to verify: {}; raise --max-vertices or --max-depth", count_line(&g));
        return Err(Failure::Graph(GraphError::Incomplete(g.completeness())));
    }
    let cfg = NlfConfig {
        pair_budget: usize::try_from(pair_budget).unwrap_or(usize::MAX),
        path_budget: usize::try_from(path_budget).unwrap_or(usize::MAX),
    };
    let report = verify_all(&g, cfg)?;
    let body = match c.format.unwrap_or(Format::Json) {
        Format::Json => json(&report),
        Format::Text => report.summary(),
        Format::Dot => return Err(Failure::Usage("verify-nlf does not support --format dot".into())),
    };
    emit(c, &body)?;
    if c.format != Some(Format::Text) || c.output.is_some() {
        for line in report.summary().lines() {
            status(c, line);
        }
    }
    if report.holds() {
        Ok(())
    } else {
        Err(Failure::Violations)
    }
}

fn cmd_export_dot(c: &Common, u: &[String]) -> Outcome {
    let g = ExchangeGraph::enumerate(&read_matrix(c.input.as_deref())?, budgets(c))?;
    let face = if u.is_empty() {
        None
    } else {
        Some(g.face_of(&g.var_set(u)?)?)
    };
    emit(c, &g.to_dot(face.as_ref()))?;
    status(c, &count_line(&g));
    if g.is_complete() {
        Ok(())
    } else {
        Err(Failure::Graph(GraphError::Incomplete(g.completeness())))
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Enumerate(c) => cmd_enumerate(c),
        Command::Mutate { common, path } => cmd_mutate(common, path),
        Command::Cvectors { common, root } => cmd_cvectors(common, root),
        Command::Bongartz { common, root, u } => cmd_bongartz(common, root, u),
        Command::Project { common, u } => cmd_project(common, u),
        Command::VerifyNlf {
            common,
            graph,
            pair_budget,
            path_budget,
        } => cmd_verify(common, graph.as_ref(), *pair_budget, *path_budget),
        Command::ExportDot { common, u } => cmd_export_dot(common, u),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global() {
        eprintln!("error: cannot start worker pool: {e}");
        return ExitCode::from(8);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violations) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

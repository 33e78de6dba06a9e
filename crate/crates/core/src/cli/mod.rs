//! Command-line front end. `run` takes the full argument vector and returns
//! the exit status with the captured output streams, so the binary is a thin
//! wrapper and tests can drive every command in-process.

mod suites;

use std::collections::BTreeMap;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::coeff::{parse_rational, Rational};
use crate::graphs::{
    core_decomposition, for_each_ordered_trivalent, ChiFilter, Graph, GraphError, GraphFilter, MAX_VERTICES,
};
use crate::operators::{apply_operator, geometric_d, DiffOperator};
use crate::polyring::{Polynomial, RingDescriptor};
use crate::series::{
    beta_coefficients, closed_form_gf, faber_zagier_a, general_fz_relation, master_series, omega_evaluation,
    top_fz_relation, ClosedForm, RSeries,
};

pub use suites::{run_suite, Check, Suite, SuiteReport};

/// Exit status and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }

    fn domain(msg: impl std::fmt::Display) -> Self {
        Self { code: 1, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }

    fn usage(msg: impl std::fmt::Display) -> Self {
        Self { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChiArg {
    Any,
    Negative,
    Zero,
    Positive,
}

#[derive(Debug, Parser)]
#[command(name = "tautring", version, about = "Exact computations with gluing operators, trivalent graphs and kappa relations")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apply a named operator repeatedly to a polynomial.
    ApplyOperator {
        /// polishchuk, gluing-plus, gluing-minus, surface-plus, surface-minus,
        /// d1, d2, dpsi, dpsi-prime, or geometric (on the p-basis).
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = 1)]
        power: u32,
        #[arg(long)]
        input: String,
        /// Work in the extended ring.
        #[arg(long)]
        extended: bool,
        /// Genus for the p-basis (geometric operator only).
        #[arg(long)]
        genus: Option<u32>,
    },
    /// Relation of genus g from the coefficient of t^n p^sigma.
    FzRelation {
        #[arg(long)]
        genus: i64,
        #[arg(long)]
        n: u32,
        /// Comma-separated parts.
        #[arg(long, value_delimiter = ',')]
        sigma: Vec<u32>,
    },
    /// The top relation extracted from A(scale z).
    TopFz {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "1")]
        scale: String,
    },
    /// beta_{2n} for n = 1..=max.
    Beta {
        #[arg(long)]
        max: u32,
    },
    /// Count (and optionally list) ordered trivalent graphs.
    EnumerateGraphs {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ChiArg::Any)]
        chi: ChiArg,
        #[arg(long)]
        connected: bool,
        #[arg(long)]
        leaf_free: bool,
        #[arg(long)]
        leaves: Option<usize>,
        /// Include the encoding of every graph.
        #[arg(long)]
        list: bool,
    },
    /// Core and insertion forest of a graph given as `n|a-b,...|leaves`.
    Core {
        #[arg(long)]
        graph: String,
    },
    /// Expand a named series.
    Series {
        /// Trr, G0, G0c, Gplus, GplusC, GminusLF, fz-a, master or omega-ev.
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 6)]
        truncation: u32,
        /// Index for omega-ev.
        #[arg(long, default_value_t = 0)]
        n: u32,
    },
    /// Run a verification suite; exits 0 iff every check holds.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        truncation: Option<u32>,
    },
}

/// Runs one command. `argv[0]` is the program name.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome { code: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    let format = cli.format;
    match cli.command {
        Command::ApplyOperator { op, power, input, extended, genus } => {
            apply_operator_cmd(format, &op, power, &input, extended, genus)
        }
        Command::FzRelation { genus, n, sigma } => fz_relation_cmd(format, genus, n, &sigma),
        Command::TopFz { k, scale } => top_fz_cmd(format, k, &scale),
        Command::Beta { max } => beta_cmd(max),
        Command::EnumerateGraphs { n, chi, connected, leaf_free, leaves, list } => {
            let chi = match chi {
                ChiArg::Any => ChiFilter::Any,
                ChiArg::Negative => ChiFilter::Negative,
                ChiArg::Zero => ChiFilter::Zero,
                ChiArg::Positive => ChiFilter::Positive,
            };
            let filter = GraphFilter { chi, connected, leaf_free, leaves };
            enumerate_cmd(format, n, &filter, list)
        }
        Command::Core { graph } => core_cmd(format, &graph),
        Command::Series { name, truncation, n } => series_cmd(format, &name, truncation, n),
        Command::Verify { suite, k, truncation } => verify_cmd(format, suite, k, truncation),
    }
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn polynomial_out(format: Format, p: &Polynomial) -> Outcome {
    match format {
        Format::Json => Outcome::ok(render_json(&p.to_json())),
        Format::Text => Outcome::ok(format!("{p}\n")),
    }
}

fn apply_operator_cmd(
    format: Format,
    op: &str,
    power: u32,
    input: &str,
    extended: bool,
    genus: Option<u32>,
) -> Outcome {
    if power > 30 {
        return Outcome::usage(format!("--power {power} exceeds 30"));
    }
    if op == "geometric" {
        let ring = RingDescriptor::PBasis { genus };
        let mut f = match Polynomial::parse(input, ring) {
            Ok(f) => f,
            Err(e) => return Outcome::usage(format!("--input: {e}")),
        };
        for _ in 0..power {
            f = match geometric_d(&f) {
                Ok(g) => g,
                Err(e) => return Outcome::domain(e),
            };
        }
        return polynomial_out(format, &f);
    }
    let Some(operator) = DiffOperator::by_name(op, extended) else {
        return Outcome::usage(format!("unknown operator {op:?}"));
    };
    let ring = if extended { RingDescriptor::LambdaQHat } else { RingDescriptor::LambdaQ };
    let f = match Polynomial::parse(input, ring) {
        Ok(f) => f,
        Err(e) => return Outcome::usage(format!("--input: {e}")),
    };
    match apply_operator(&operator, &f, power) {
        Ok(g) => polynomial_out(format, &g),
        Err(e) => Outcome::domain(e),
    }
}

fn fz_relation_cmd(format: Format, genus: i64, n: u32, sigma: &[u32]) -> Outcome {
    if n > 8 || sigma.len() > 4 {
        return Outcome::usage("fz-relation supports n <= 8 and at most 4 parts");
    }
    match general_fz_relation(genus, n, sigma) {
        Ok(rel) => match format {
            Format::Json => Outcome::ok(render_json(&rel.to_json())),
            Format::Text => Outcome::ok(format!("{}\n", rel.relation)),
        },
        Err(e) => Outcome::domain(e),
    }
}

fn top_fz_cmd(format: Format, k: u32, scale: &str) -> Outcome {
    if !(1..=12).contains(&k) {
        return Outcome::usage("--k must lie in 1..=12");
    }
    let scale: Rational = match parse_rational(scale) {
        Ok(s) => s,
        Err(e) => return Outcome::usage(format!("--scale: {e}")),
    };
    polynomial_out(format, &top_fz_relation(k, &scale))
}

fn beta_cmd(max: u32) -> Outcome {
    if !(1..=6).contains(&max) {
        return Outcome::usage("--max must lie in 1..=6");
    }
    match beta_coefficients(max) {
        Ok(b) => {
            let items: Vec<String> = b.iter().map(ToString::to_string).collect();
            Outcome::ok(format!("[{}]\n", items.join(", ")))
        }
        Err(e) => Outcome::domain(e),
    }
}

fn enumerate_cmd(format: Format, n: usize, filter: &GraphFilter, list: bool) -> Outcome {
    if n > MAX_VERTICES {
        return Outcome::usage(format!("--n {n} exceeds {MAX_VERTICES}"));
    }
    let mut by_leaves: BTreeMap<usize, u64> = BTreeMap::new();
    let mut encodings = Vec::new();
    let result = for_each_ordered_trivalent(n, filter, |g| {
        *by_leaves.entry(g.num_leaves()).or_insert(0) += 1;
        if list {
            encodings.push(g.encoding());
        }
    });
    let total = match result {
        Ok(t) => t,
        Err(GraphError::Bound(msg)) => return Outcome::usage(msg),
        Err(e) => return Outcome::domain(e),
    };
    match format {
        Format::Json => {
            let table: serde_json::Map<String, Value> =
                by_leaves.iter().map(|(l, c)| (l.to_string(), json!(c))).collect();
            let mut v = json!({ "vertices": n, "total": total, "by_leaves": table });
            if list {
                v["graphs"] = json!(encodings);
            }
            Outcome::ok(render_json(&v))
        }
        Format::Text => {
            let mut out = format!("vertices {n} total {total}\n");
            for (l, c) in &by_leaves {
                out.push_str(&format!("leaves {l}: {c}\n"));
            }
            for e in &encodings {
                out.push_str(e);
                out.push('\n');
            }
            Outcome::ok(out)
        }
    }
}

fn core_cmd(format: Format, graph: &str) -> Outcome {
    let g: Graph = match graph.parse() {
        Ok(g) => g,
        Err(e) => return Outcome::usage(format!("--graph: {e}")),
    };
    match core_decomposition(&g) {
        Ok(d) => match format {
            Format::Json => Outcome::ok(render_json(&d.to_json())),
            Format::Text => {
                let mut out = format!("core {}\nforest {}\n", d.core, d.forest);
                for t in &d.trees {
                    out.push_str(&format!("tree {:?} roots {:?} attached {:?}\n", t.vertices, t.roots, t.attached));
                }
                Outcome::ok(out)
            }
        },
        Err(e) => Outcome::domain(e),
    }
}

fn series_cmd(format: Format, name: &str, truncation: u32, n: u32) -> Outcome {
    let s: Result<RSeries, String> = match name {
        "fz-a" if truncation <= 30 => Ok(faber_zagier_a(truncation)),
        "master" if truncation <= 8 => master_series(truncation).map_err(|e| e.to_string()),
        "omega-ev" if truncation <= 8 && n <= 4 => omega_evaluation(n, truncation).map_err(|e| e.to_string()),
        "fz-a" | "master" | "omega-ev" => return Outcome::usage(format!("--truncation {truncation} too large for {name}")),
        other => match other.parse::<ClosedForm>() {
            Ok(cf) if truncation <= 12 => closed_form_gf(cf, truncation).map_err(|e| e.to_string()),
            Ok(_) => return Outcome::usage(format!("--truncation {truncation} exceeds 12")),
            Err(_) => return Outcome::usage(format!("unknown series {other:?}")),
        },
    };
    match s {
        Ok(s) => match format {
            Format::Json => Outcome::ok(render_json(&json!({ "name": name, "truncation": truncation, "terms": s.to_json() }))),
            Format::Text => Outcome::ok(format!("{s}\n")),
        },
        Err(e) => Outcome::domain(e),
    }
}

fn verify_cmd(format: Format, suite: Suite, k: Option<u32>, truncation: Option<u32>) -> Outcome {
    let report = match run_suite(suite, k, truncation) {
        Ok(r) => r,
        Err(msg) => return Outcome::usage(msg),
    };
    let stdout = match format {
        Format::Json => render_json(&report.to_json()),
        Format::Text => report.to_text(),
    };
    Outcome { code: if report.all_hold() { 0 } else { 1 }, stdout, stderr: String::new() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("tautring").chain(args.iter().copied()))
    }

    #[test]
    fn apply_operator_text() {
        let out = run_args(&["apply-operator", "--op", "gluing-minus", "--power", "3", "--input", "q[3,1]^2", "--format", "text"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert_eq!(out.stdout, "-90*q[0,2]\n");
    }

    #[test]
    fn apply_operator_json_round_trips() {
        let out = run_args(&["apply-operator", "--op", "surface-minus", "--extended", "--power", "3", "--input", "q[3,1]^2"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        let p = Polynomial::from_json(&v).unwrap();
        let text = run_args(&["apply-operator", "--op", "surface-minus", "--extended", "--power", "3", "--input", "q[3,1]^2", "--format", "text"]);
        assert_eq!(Polynomial::parse(text.stdout.trim(), RingDescriptor::LambdaQHat).unwrap(), p);
    }

    #[test]
    fn geometric_operator_on_p_basis() {
        let out = run_args(&["apply-operator", "--op", "geometric", "--input", "p[3,1]", "--format", "text"]);
        assert_eq!(out.stdout, "p[1,1]\n");
    }

    #[test]
    fn beta_output() {
        let out = run_args(&["beta", "--max", "2"]);
        assert_eq!(out.code, 0);
        assert_eq!(out.stdout, "[90, 6998400]\n");
        assert_eq!(run_args(&["beta", "--max", "9"]).code, 2);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_args(&["frobnicate"]).code, 2);
        assert_eq!(run_args(&["beta", "--max", "2", "--bogus"]).code, 2);
        assert_eq!(run_args(&["apply-operator", "--op", "nope", "--input", "q[3,1]"]).code, 2);
        assert_eq!(run_args(&["apply-operator", "--op", "d1", "--input", "q[3,"]).code, 2);
        assert_eq!(run_args(&["enumerate-graphs", "--n", "7"]).code, 2);
        assert_eq!(run_args(&["enumerate-graphs", "--n", "6"]).code, 2);
        assert_eq!(run_args(&["--help"]).code, 0);
    }

    #[test]
    fn domain_errors() {
        let out = run_args(&["fz-relation", "--genus", "3", "--n", "2", "--sigma", "1"]);
        assert_eq!(out.code, 1);
        assert!(out.stderr.contains("parity"));
        assert_eq!(run_args(&["core", "--graph", "1||0,1,2"]).code, 1);
        // q[0,-2] is outside the unextended ring
        assert_eq!(run_args(&["apply-operator", "--op", "d1", "--input", "q[0,-2]"]).code, 2);
    }

    #[test]
    fn fz_relation_and_top() {
        let out = run_args(&["fz-relation", "--genus", "2", "--n", "1", "--format", "text"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("kappa[1]"));
        let top = run_args(&["top-fz", "--k", "1", "--format", "text"]);
        assert_eq!(top.stdout, "-5/6*kappa[1]\n");
    }

    #[test]
    fn enumerate_and_core() {
        let out = run_args(&["enumerate-graphs", "--n", "2", "--leaf-free"]);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["total"], json!(15));
        let out = run_args(&["enumerate-graphs", "--n", "1", "--chi", "zero", "--list", "--format", "text"]);
        assert!(out.stdout.starts_with("vertices 1 total 3\n"));
        let core = run_args(&["core", "--graph", "3|0-3,1-4,2-6,5-7|8"]);
        assert_eq!(core.code, 0, "{}", core.stderr);
        let v: Value = serde_json::from_str(&core.stdout).unwrap();
        assert_eq!(v["core"]["vertices"], json!(2));
    }

    #[test]
    fn series_command() {
        let out = run_args(&["series", "--name", "Trr", "--truncation", "1", "--format", "text"]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert!(out.stdout.contains("(6)*x*y"));
        assert_eq!(run_args(&["series", "--name", "nope"]).code, 2);
        assert_eq!(run_args(&["series", "--name", "master", "--truncation", "20"]).code, 2);
    }

    #[test]
    fn verify_suites_pass() {
        for suite in ["operators", "graphs", "series", "appendixB", "appendixC", "poli-vs-cminus", "main-theorem"] {
            let out = run_args(&["verify", "--suite", suite, "--k", "1", "--truncation", "4"]);
            assert_eq!(out.code, 0, "{suite}: {}", out.stdout);
        }
    }

    #[test]
    fn output_is_deterministic() {
        let a = run_args(&["verify", "--suite", "main-theorem", "--format", "text"]);
        let b = run_args(&["verify", "--suite", "main-theorem", "--format", "text"]);
        assert_eq!(a, b);
        assert!(a.stdout.contains("PASS"));
    }
}

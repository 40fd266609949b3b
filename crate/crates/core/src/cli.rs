//! Command-line front end. Every command produces a [`Report`], printed as a
//! plain listing or, with `--json`, as one JSON object.
//!
//! Exit codes: 0 success, 1 a check ran and failed, 2 bad usage or input,
//! 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::braid::{self, RelationCheck};
use crate::classify::{self, GateClass};
use crate::epower::{self, EPowerEstimate};
use crate::error::Error;
use crate::gates::{self, catalog_gate, Gate};
use crate::linalg::{Complex, SquareMatrix};
use crate::optimize::NelderMeadOptions;
use crate::states::{self, catalog_state, PureState};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Unitarity tolerance for matrices read from files.
pub const FILE_UNITARY_TOL: f64 = 1e-8;

/// Complex components smaller than this print as 0.
pub const DISPLAY_ZERO: f64 = 1e-14;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "entanglers", version, about = "Two-qubit entanglement invariants, perfect entanglers and braid operators")]
pub struct Cli {
    /// Emit a single JSON object instead of a listing.
    #[arg(long, global = true)]
    pub json: bool,
    /// Significant digits for complex numbers.
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=17))]
    pub digits: u32,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Local invariants G1, G2 and the spectrum of m(U).
    Invariants(GateArgs),
    /// Local / perfect entangler / non-perfect non-local.
    Classify {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, default_value_t = classify::DEFAULT_TOL)]
        tol: f64,
    },
    /// Entangling power.
    Epower {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Quad)]
        method: MethodArg,
        /// Gauss–Legendre nodes in cos θ; the φ rule uses twice as many.
        #[arg(long, default_value_t = epower::DEFAULT_THETA_NODES)]
        nodes: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Braid relation or Yang–Baxter equation for a d²×d² matrix.
    BraidCheck {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, value_enum, default_value_t = RelationArg::Braid)]
        relation: RelationArg,
        /// Treat the input as R̂ rather than R = P·R̂.
        #[arg(long)]
        as_rhat: bool,
        /// Residual tolerance; defaults to 1e-12 for catalog gates and 1e-10
        /// for files.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Projective measurement of one qubit.
    Measure {
        /// Catalog state name.
        #[arg(long, conflicts_with = "file", required_unless_present = "file")]
        state: Option<String>,
        /// Integer state parameters, e.g. `--params 2` for bell.
        #[arg(long, value_delimiter = ',')]
        params: Vec<usize>,
        /// State JSON file.
        #[arg(long)]
        file: Option<PathBuf>,
        /// 1-based qubit index, leftmost first.
        #[arg(long, default_value_t = 1)]
        qubit: usize,
        #[arg(long, value_enum, default_value_t = BasisArg::Z)]
        basis: BasisArg,
    },
    /// Search for a product basis mapped to maximally entangled states.
    BasisSearch {
        #[command(flatten)]
        gate: GateArgs,
        #[arg(long, default_value_t = classify::DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// List catalog gates and states.
    Catalog,
    /// Write a gate matrix as JSON.
    Export {
        #[command(flatten)]
        gate: GateArgs,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct GateArgs {
    /// Catalog gate name.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub gate: Option<String>,
    /// Comma-separated complex parameters: `1`, `-0.5i`, `0.6+0.8i`, `cis(0.3)`.
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Matrix JSON file.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Quad,
    Mc,
    Closed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationArg {
    Braid,
    YangBaxter,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisArg {
    Z,
    X,
    Y,
}

/// A failed command: message plus exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotConverged { .. } | Error::NonFinite(_) => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// What a command reports.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub command: String,
    pub inputs: Map<String, Value>,
    pub results: Map<String, Value>,
    pub tolerances: Map<String, Value>,
    pub seeds: Map<String, Value>,
    /// `Some` for commands that check something.
    pub passed: Option<bool>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.passed {
            Some(false) => EXIT_CHECK_FAILED,
            _ => EXIT_OK,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut doc = Map::new();
        doc.insert("command".into(), json!(self.command));
        doc.insert("inputs".into(), Value::Object(self.inputs.clone()));
        doc.insert("results".into(), Value::Object(self.results.clone()));
        doc.insert("tolerances".into(), Value::Object(self.tolerances.clone()));
        doc.insert("seeds".into(), Value::Object(self.seeds.clone()));
        if let Some(p) = self.passed {
            doc.insert("passed".into(), json!(p));
        }
        doc.insert("version".into(), json!(VERSION));
        Value::Object(doc)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} (entanglers {VERSION})\n", self.command);
        for (title, section) in [
            ("inputs", &self.inputs),
            ("results", &self.results),
            ("tolerances", &self.tolerances),
            ("seeds", &self.seeds),
        ] {
            if section.is_empty() {
                continue;
            }
            out.push_str(&format!("{title}:\n"));
            for (k, v) in section {
                out.push_str(&format!("  {k}: {}\n", text_value(v)));
            }
        }
        if let Some(p) = self.passed {
            out.push_str(if p { "check: pass\n" } else { "check: FAIL\n" });
        }
        out
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable report");
            s.push('\n');
            s
        } else {
            self.to_text()
        }
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => format!("[{}]", items.iter().map(text_value).collect::<Vec<_>>().join(", ")),
        Value::Object(map) => format!(
            "{{{}}}",
            map.iter().map(|(k, v)| format!("{k}: {}", text_value(v))).collect::<Vec<_>>().join(", ")
        ),
        other => other.to_string(),
    }
}

/// `x` with `digits` significant digits, `%g` style.
pub fn format_real(x: f64, digits: u32) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1) as usize;
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `a+bi` with components below [`DISPLAY_ZERO`] shown as 0.
pub fn format_complex(z: Complex, digits: u32) -> String {
    let snap = |x: f64| if x.abs() < DISPLAY_ZERO { 0.0 } else { x };
    let (re, im) = (snap(z.re), snap(z.im));
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", format_real(re, digits), sign, format_real(im.abs(), digits))
}

fn parse_real(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_imag_coefficient(s: &str) -> Option<f64> {
    match s.trim() {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        other => parse_real(other),
    }
}

/// Parses `3`, `-2.5e-3`, `i`, `-i`, `0.6-0.8i`, `2i` or `cis(θ)` (= e^{iθ}).
pub fn parse_complex(s: &str) -> CliResult<Complex> {
    let t: String = s.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Failure::input(format!("cannot parse complex number `{s}`"));
    if let Some(arg) = t.strip_prefix("cis(").and_then(|r| r.strip_suffix(')')) {
        return Ok(Complex::from_polar(1.0, parse_real(arg).ok_or_else(bad)?));
    }
    if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) {
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&p| (bytes[p] == b'+' || bytes[p] == b'-') && bytes[p - 1] != b'e');
        return match split {
            Some(p) => Ok(Complex::new(
                parse_real(&body[..p]).ok_or_else(bad)?,
                parse_imag_coefficient(&body[p..]).ok_or_else(bad)?,
            )),
            None => Ok(Complex::new(0.0, parse_imag_coefficient(body).ok_or_else(bad)?)),
        };
    }
    Ok(Complex::new(parse_real(&t).ok_or_else(bad)?, 0.0))
}

pub fn parse_params(csv: &str) -> CliResult<Vec<Complex>> {
    if csv.trim().is_empty() {
        return Ok(Vec::new());
    }
    csv.split(',').map(parse_complex).collect()
}

/// Matrix file: `{"dim": n, "entries": [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &SquareMatrix) -> Self {
        MatrixFile {
            dim: m.dim(),
            entries: m.entries().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> crate::Result<SquareMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::InvalidLength {
                expected: self.dim * self.dim,
                actual: self.entries.len(),
            });
        }
        SquareMatrix::new(self.dim, self.entries.iter().map(|&[re, im]| Complex::new(re, im)).collect())
    }
}

/// State file: `{"qubits": n, "amplitudes": [[re, im], ...]}`.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct StateFile {
    pub qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("malformed JSON in {}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> CliResult<SquareMatrix> {
    Ok(read_json::<MatrixFile>(path)?.to_matrix()?)
}

pub fn write_matrix(path: &Path, m: &SquareMatrix) -> CliResult<()> {
    fs::write(path, matrix_json(m)).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

pub fn matrix_json(m: &SquareMatrix) -> String {
    let mut s = serde_json::to_string(&MatrixFile::from_matrix(m)).expect("serializable matrix");
    s.push('\n');
    s
}

pub fn read_state(path: &Path) -> CliResult<PureState> {
    let f: StateFile = read_json(path)?;
    let amps = f.amplitudes.iter().map(|&[re, im]| Complex::new(re, im)).collect();
    Ok(PureState::new(f.qubits, amps)?)
}

enum Source {
    Catalog,
    File,
}

struct Resolved {
    matrix: SquareMatrix,
    gate: Option<Gate>,
    source: Source,
    inputs: Map<String, Value>,
}

fn resolve_any(args: &GateArgs, digits: u32) -> CliResult<Resolved> {
    let mut inputs = Map::new();
    match (&args.gate, &args.file) {
        (Some(name), None) => {
            let params = parse_params(args.params.as_deref().unwrap_or(""))?;
            let gate = catalog_gate(name, &params)?;
            inputs.insert("gate".into(), json!(gate.name()));
            inputs.insert(
                "params".into(),
                json!(params.iter().map(|z| format_complex(*z, digits)).collect::<Vec<_>>()),
            );
            Ok(Resolved {
                matrix: gate.matrix().clone(),
                gate: Some(gate),
                source: Source::Catalog,
                inputs,
            })
        }
        (None, Some(path)) => {
            if args.params.is_some() {
                return Err(Failure::input("--params applies to catalog gates only"));
            }
            let matrix = read_matrix(path)?;
            inputs.insert("file".into(), json!(path.display().to_string()));
            let gate = if matrix.dim() == 4 {
                Some(Gate::from_matrix("file", matrix.clone(), FILE_UNITARY_TOL)?)
            } else {
                None
            };
            Ok(Resolved {
                matrix,
                gate,
                source: Source::File,
                inputs,
            })
        }
        _ => Err(Failure::input("give exactly one of --gate or --file")),
    }
}

fn resolve_gate(args: &GateArgs, digits: u32) -> CliResult<(Gate, Resolved)> {
    let r = resolve_any(args, digits)?;
    match &r.gate {
        Some(g) => Ok((g.clone(), r)),
        None => Err(Failure::input(format!(
            "expected a 4×4 two-qubit gate, got dimension {}",
            r.matrix.dim()
        ))),
    }
}

fn gate_unitary_tol(source: &Source) -> f64 {
    match source {
        Source::Catalog => gates::GATE_UNITARY_TOL,
        Source::File => FILE_UNITARY_TOL,
    }
}

fn complex_list(zs: &[Complex], digits: u32) -> Value {
    json!(zs.iter().map(|z| format_complex(*z, digits)).collect::<Vec<_>>())
}

pub fn cmd_invariants(args: &GateArgs, digits: u32) -> CliResult<Report> {
    let (gate, r) = resolve_gate(args, digits)?;
    let pair = gate.invariants()?;
    let eig = gate.m_matrix()?.eigenvalues4()?;
    let mut rep = Report::new("invariants");
    rep.inputs = r.inputs;
    rep.results.insert("g1".into(), json!(format_complex(pair.g1, digits)));
    rep.results.insert("g2".into(), json!(format_complex(pair.g2, digits)));
    rep.results.insert("m_eigenvalues".into(), complex_list(&eig, digits));
    rep.results.insert("unitarity_deviation".into(), json!(gate.matrix().unitarity_deviation()));
    rep.tolerances.insert("unitarity".into(), json!(gate_unitary_tol(&r.source)));
    rep.tolerances.insert("eigenvalue_residual".into(), json!(crate::linalg::DEFAULT_TOL));
    Ok(rep)
}

pub fn cmd_classify(args: &GateArgs, tol: f64, digits: u32) -> CliResult<Report> {
    let (gate, r) = resolve_gate(args, digits)?;
    let class = classify::classify(&gate, tol)?;
    let hull = classify::hull_report(&gate, tol)?;
    let pair = gate.invariants()?;
    let mut rep = Report::new("classify");
    rep.inputs = r.inputs;
    rep.results.insert("class".into(), json!(class.as_str()));
    rep.results.insert("perfect_entangler".into(), json!(class == GateClass::PerfectEntangler));
    rep.results.insert("hull_points".into(), complex_list(&hull.points, digits));
    rep.results.insert("hull_distance".into(), json!(hull.distance));
    rep.results.insert("g1".into(), json!(format_complex(pair.g1, digits)));
    rep.results.insert("g2".into(), json!(format_complex(pair.g2, digits)));
    rep.tolerances.insert("classify".into(), json!(tol));
    rep.tolerances.insert("unitarity".into(), json!(gate_unitary_tol(&r.source)));
    Ok(rep)
}

fn estimate_json(rep: &mut Report, e: &EPowerEstimate) {
    rep.results.insert("value".into(), json!(e.value));
    rep.results.insert("method".into(), json!(e.method.as_str()));
    rep.results.insert("stderr".into(), e.stderr.map_or(Value::Null, |s| json!(s)));
    rep.results.insert("nodes_or_samples".into(), json!(e.nodes_or_samples));
}

pub fn cmd_epower(args: &GateArgs, method: MethodArg, nodes: usize, samples: usize, seed: u64, digits: u32) -> CliResult<Report> {
    let (gate, r) = resolve_gate(args, digits)?;
    let mut rep = Report::new("epower");
    rep.inputs = r.inputs;
    let estimate = match method {
        MethodArg::Quad => {
            rep.inputs.insert("theta_nodes".into(), json!(nodes));
            rep.inputs.insert("phi_nodes".into(), json!(2 * nodes));
            // the rule is exact for the trigonometric integrand; the bound is
            // floating-point accumulation
            rep.tolerances.insert("quadrature".into(), json!(1e-12));
            epower::entangling_power_quadrature(&gate, nodes, 2 * nodes)?
        }
        MethodArg::Mc => {
            rep.inputs.insert("samples".into(), json!(samples));
            rep.seeds.insert("monte_carlo".into(), json!(seed));
            epower::entangling_power_mc(&gate, samples, seed)?
        }
        MethodArg::Closed => {
            if let Source::File = r.source {
                return Err(Failure::input("no closed form for matrix files; use --method quad"));
            }
            epower::closed_form_for(&gate)?
        }
    };
    estimate_json(&mut rep, &estimate);
    Ok(rep)
}

pub fn cmd_braid_check(args: &GateArgs, relation: RelationArg, as_rhat: bool, tol: Option<f64>, digits: u32) -> CliResult<Report> {
    let r = resolve_any(args, digits)?;
    let tol = tol.unwrap_or(match r.source {
        Source::Catalog => braid::EXACT_TOL,
        Source::File => braid::USER_TOL,
    });
    let d = braid::local_dim(&r.matrix)?;
    let p = braid::swap_operator(d);
    // R = P·R̂ and R̂ = P·R
    let (rmat, rhat) = if as_rhat {
        (p.matmul(&r.matrix)?, r.matrix.clone())
    } else {
        (r.matrix.clone(), p.matmul(&r.matrix)?)
    };
    let check: RelationCheck = match relation {
        RelationArg::Braid => braid::check_braid_relation(&rmat, tol)?,
        RelationArg::YangBaxter => braid::check_yang_baxter(&rhat, tol)?,
    };
    let mut rep = Report::new("braid-check");
    rep.inputs = r.inputs;
    rep.inputs.insert(
        "relation".into(),
        json!(match relation {
            RelationArg::Braid => "braid",
            RelationArg::YangBaxter => "yang-baxter",
        }),
    );
    rep.inputs.insert("input_is_rhat".into(), json!(as_rhat));
    rep.results.insert("local_dim".into(), json!(d));
    rep.results.insert("residual".into(), json!(check.residual));
    rep.results.insert("holds".into(), json!(check.holds));
    rep.tolerances.insert("residual".into(), json!(tol));
    rep.passed = Some(check.holds);
    Ok(rep)
}

pub fn cmd_measure(
    state: Option<&str>,
    params: &[usize],
    file: Option<&Path>,
    qubit: usize,
    basis: BasisArg,
    digits: u32,
) -> CliResult<Report> {
    let mut rep = Report::new("measure");
    let psi = match (state, file) {
        (Some(name), None) => {
            rep.inputs.insert("state".into(), json!(name.to_ascii_lowercase()));
            rep.inputs.insert("params".into(), json!(params));
            catalog_state(name, params)?
        }
        (None, Some(path)) => {
            if !params.is_empty() {
                return Err(Failure::input("--params applies to catalog states only"));
            }
            rep.inputs.insert("file".into(), json!(path.display().to_string()));
            read_state(path)?
        }
        _ => return Err(Failure::input("give exactly one of --state or --file")),
    };
    if qubit == 0 || qubit > psi.qubits() {
        return Err(Error::QubitIndex {
            index: qubit,
            qubits: psi.qubits(),
        }
        .into());
    }
    let (label, b) = match basis {
        BasisArg::Z => ("z", states::computational_basis()),
        BasisArg::X => ("x", states::hadamard_basis()),
        BasisArg::Y => ("y", states::y_basis()),
    };
    rep.inputs.insert("qubit".into(), json!(qubit));
    rep.inputs.insert("basis".into(), json!(label));
    rep.inputs.insert("amplitudes".into(), complex_list(psi.amplitudes(), digits));
    let records = psi.measure_qubit(qubit - 1, &b)?;
    let mut outcomes = Vec::new();
    for rec in &records {
        let mut o = Map::new();
        o.insert("outcome".into(), json!(rec.outcome));
        o.insert("probability".into(), json!(rec.probability));
        match &rec.residual {
            Some(res) => {
                o.insert("residual".into(), complex_list(res.amplitudes(), digits));
                let c = if res.qubits() == 2 { json!(res.concurrence()?) } else { Value::Null };
                o.insert("residual_concurrence".into(), c);
            }
            None => {
                o.insert("residual".into(), Value::Null);
                o.insert("residual_concurrence".into(), Value::Null);
            }
        }
        outcomes.push(Value::Object(o));
    }
    rep.results.insert("outcomes".into(), Value::Array(outcomes));
    rep.tolerances.insert("impossible_probability".into(), json!(states::IMPOSSIBLE_PROB));
    rep.tolerances.insert("input_normalization".into(), json!(states::NORM_INPUT_TOL));
    Ok(rep)
}

pub fn cmd_basis_search(args: &GateArgs, restarts: usize, seed: u64, digits: u32) -> CliResult<Report> {
    let (gate, r) = resolve_gate(args, digits)?;
    let opts = NelderMeadOptions::default();
    let found = classify::max_min_basis_search_with(&gate, restarts, seed, &opts)?;
    let mut rep = Report::new("basis-search");
    rep.inputs = r.inputs;
    rep.inputs.insert("restarts".into(), json!(restarts));
    rep.results.insert("value".into(), json!(found.value));
    rep.results.insert("basis_params".into(), json!(found.basis.params));
    let images: Vec<f64> = found
        .basis
        .states()
        .iter()
        .map(|s| {
            let out = gate.matrix().apply(s).expect("4x4 gate on 4 amplitudes");
            PureState::new(2, out).and_then(|p| p.concurrence()).unwrap_or(f64::NAN)
        })
        .collect();
    rep.results.insert("image_concurrences".into(), json!(images));
    rep.results.insert(
        "basis_states".into(),
        json!(found.basis.states().iter().map(|s| complex_list(s, digits)).collect::<Vec<_>>()),
    );
    rep.results.insert("best_restart".into(), json!(found.restart));
    rep.results.insert("evals".into(), json!(found.evals));
    rep.tolerances.insert("simplex_diameter".into(), json!(opts.diameter_tol));
    rep.tolerances.insert("max_evals".into(), json!(opts.max_evals));
    rep.seeds.insert("restarts".into(), json!(seed));
    Ok(rep)
}

pub fn cmd_catalog() -> Report {
    let mut rep = Report::new("catalog");
    let mut g = Map::new();
    for (name, desc) in gates::GATE_CATALOG {
        g.insert((*name).into(), json!(desc));
    }
    rep.results.insert("gates".into(), Value::Object(g));
    rep.results.insert("states".into(), json!(states::STATE_CATALOG));
    rep
}

/// Runs a parsed command and returns the text to print plus the exit code.
pub fn run(cli: &Cli) -> CliResult<(String, i32)> {
    let d = cli.digits;
    let report = match &cli.command {
        Command::Invariants(g) => cmd_invariants(g, d)?,
        Command::Classify { gate, tol } => cmd_classify(gate, *tol, d)?,
        Command::Epower {
            gate,
            method,
            nodes,
            samples,
            seed,
        } => cmd_epower(gate, *method, *nodes, *samples, *seed, d)?,
        Command::BraidCheck {
            gate,
            relation,
            as_rhat,
            tol,
        } => cmd_braid_check(gate, *relation, *as_rhat, *tol, d)?,
        Command::Measure {
            state,
            params,
            file,
            qubit,
            basis,
        } => cmd_measure(state.as_deref(), params, file.as_deref(), *qubit, *basis, d)?,
        Command::BasisSearch { gate, restarts, seed } => cmd_basis_search(gate, *restarts, *seed, d)?,
        Command::Catalog => cmd_catalog(),
        Command::Export { gate, out } => {
            let r = resolve_any(gate, d)?;
            return match out {
                Some(path) => {
                    write_matrix(path, &r.matrix)?;
                    Ok((String::new(), EXIT_OK))
                }
                None => Ok((matrix_json(&r.matrix), EXIT_OK)),
            };
        }
    };
    Ok((report.render(cli.json), report.exit_code()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.0, 12), "0");
        assert_eq!(format_real(-0.0, 12), "0");
        assert_eq!(format_real(1.0, 12), "1");
        assert_eq!(format_real(-1.0, 12), "-1");
        assert_eq!(format_real(2.0 / 9.0, 12), "0.222222222222");
        assert_eq!(format_real(0.25, 12), "0.25");
        assert_eq!(format_real(1234.5, 3), "1.23e3");
        assert_eq!(format_real(1.5e-7, 12), "1.5e-7");
        assert_eq!(format_real(0.99999999999999, 12), "1");
        assert_eq!(format_real(2.0 / 3.0, 4), "0.6667");
    }

    #[test]
    fn complex_formatting() {
        assert_eq!(format_complex(c(0.0, 0.25), 12), "0+0.25i");
        assert_eq!(format_complex(c(1e-17, -2e-16), 12), "0+0i");
        assert_eq!(format_complex(c(0.0, -1.0), 12), "0-1i");
        assert_eq!(format_complex(c(-0.5, 0.5), 12), "-0.5+0.5i");
    }

    #[test]
    fn complex_parsing() {
        let p = |s: &str| parse_complex(s).unwrap();
        assert_eq!(p("1"), c(1.0, 0.0));
        assert_eq!(p(" -1 "), c(-1.0, 0.0));
        assert_eq!(p("i"), c(0.0, 1.0));
        assert_eq!(p("-i"), c(0.0, -1.0));
        assert_eq!(p("2.5i"), c(0.0, 2.5));
        assert_eq!(p("0.6+0.8i"), c(0.6, 0.8));
        assert_eq!(p("0.6-0.8i"), c(0.6, -0.8));
        assert_eq!(p("1e-3-2e+1i"), c(1e-3, -20.0));
        assert_eq!(p("-1-i"), c(-1.0, -1.0));
        assert_eq!(p("cis(0)"), c(1.0, 0.0));
        assert!((p("cis(3.141592653589793)") - c(-1.0, 0.0)).norm() < 1e-15);
        for bad in ["", "x", "1+", "1++2i", "nan", "cis()"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
        assert_eq!(parse_params("1,1,1,-1").unwrap().len(), 4);
        assert!(parse_params("").unwrap().is_empty());
    }

    #[test]
    fn format_parse_round_trip() {
        for z in [c(0.25, -1.0), c(-3.5e-4, 2.0), c(1.0, 0.0)] {
            assert_eq!(parse_complex(&format_complex(z, 17)).unwrap(), z);
        }
    }

    #[test]
    fn matrix_file_validation() {
        let f = MatrixFile {
            dim: 2,
            entries: vec![[1.0, 0.0]; 3],
        };
        assert!(f.to_matrix().is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn failure_codes() {
        let f: Failure = Error::NotConverged { residuals: vec![1.0] }.into();
        assert_eq!(f.code, EXIT_NUMERICAL);
        let f: Failure = Error::InvalidParams("x".into()).into();
        assert_eq!(f.code, EXIT_INPUT);
    }
}

//! Command-line front end: argument parsing, run configuration, JSON and text output.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gkz::connection::{self, ConnectionMatrix, VerifyConfig, VerifyReport};
use gkz::geometry::{self, Modification, Triangulation};
use gkz::lattice::{self, Configuration};
use gkz::linalg::{self, Q};
use gkz::mellin_barnes::{MBIntegrand, QuadConfig};
use gkz::series::LogPoint;
use gkz::{GkzError, C64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_NONCONVERGED: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "gg", version, about = "Connection matrices of GG/GKZ hypergeometric systems")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// Configuration matrix, JSON {"n", "N", "rows"}.
    #[arg(long, global = true)]
    pub matrix: Option<PathBuf>,
    /// Run configuration (JSON); flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit JSON (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Emit a human-readable summary instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PairArgs {
    /// Source triangulation, e.g. "[[2,3,4],[2,3,5],[2,4,5]]" or "234,235,245".
    #[arg(long)]
    pub from: Option<String>,
    /// Target triangulation.
    #[arg(long)]
    pub to: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PathArgs {
    /// Arguments of z_1..z_N in radians; solved for when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub args: Option<String>,
    /// Multiplier of omega_Q.
    #[arg(long)]
    pub r: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalized volume, lattice index and rank of GG(A).
    Rank,
    /// Regular subdivision induced by a weight vector.
    Triangulate {
        #[arg(long, allow_hyphen_values = true)]
        weight: String,
        /// Refine a non-generic weight to a triangulation.
        #[arg(long)]
        perturb: bool,
    },
    /// Flip graph of regular triangulations.
    Fan {
        #[arg(long, default_value_t = 200)]
        max_nodes: usize,
    },
    /// All circuits.
    Circuits,
    /// Facets of the Newton polytope away from the origin.
    Facets,
    /// Modification data between adjacent triangulations.
    Modify {
        #[command(flatten)]
        pair: PairArgs,
        /// Basis of L_A (JSON list of integer vectors) for projecting the cones.
        #[arg(long)]
        basis: Option<String>,
    },
    /// Connection matrix together with the path it holds along.
    Connect {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        path: PathArgs,
    },
    /// Continuation path only.
    Path {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        path: PathArgs,
    },
    /// Numerical verification of a connection matrix.
    Verify {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        path: PathArgs,
        /// Parameters c, e.g. "0.31,0.27+0.1i,-0.43".
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        /// Series truncation order (default 40).
        #[arg(long)]
        order: Option<u32>,
        /// Largest defect accepted (default 1e-6).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Mellin-Barnes integral of a corank-1 cell with its residue sums.
    Mb {
        #[arg(long)]
        cell: String,
        #[arg(long)]
        j0: usize,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        /// |z_1|..|z_N|.
        #[arg(long)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        args: Option<String>,
        /// Representative k~ on the simplex cell \ j0.
        #[arg(long, allow_hyphen_values = true)]
        ktilde: Option<String>,
        /// Residues summed on each side (default 40).
        #[arg(long)]
        order: Option<u32>,
    },
}

/// Everything a run depends on besides the matrix; serializable so runs can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct RunConfig {
    pub matrix: Option<PathBuf>,
    pub command: Option<String>,
    pub order: u32,
    pub tol: f64,
    pub quad: QuadConfig,
    pub args: Option<Vec<f64>>,
    pub r: Option<String>,
    #[serde(with = "gkz::serde_c::opt_vec", skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<C64>>,
    pub out: Option<PathBuf>,
    /// Seed for randomized sampling. No command samples at present; kept so saved configs stay valid.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let v = VerifyConfig::default();
        RunConfig {
            matrix: None,
            command: None,
            order: v.order,
            tol: v.tol,
            quad: v.quad,
            args: None,
            r: None,
            c: None,
            out: None,
            seed: 0,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl From<GkzError> for Failure {
    fn from(e: GkzError) -> Self {
        let code = match &e {
            GkzError::NonConverged { .. } | GkzError::QuadratureNotConverged(_) | GkzError::BudgetExceeded => EXIT_NONCONVERGED,
            GkzError::Internal(_) => EXIT_INTERNAL,
            _ => EXIT_INVALID,
        };
        let kind = format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        Failure { code, kind, message: e.to_string() }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, kind: "InvalidInput".into(), message: msg.into() }
}

pub struct Output {
    pub code: i32,
    pub out: Option<PathBuf>,
    pub json: Value,
    pub text: String,
}

pub fn parse_rationals(s: &str) -> Result<Vec<Q>, Failure> {
    s.split(',').map(|x| linalg::parse_q(x.trim()).map_err(Failure::from)).collect()
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|e| invalid(format!("{x}: {e}")))).collect()
}

/// "a", "bi", "a+bi", "a-bi".
pub fn parse_complex(s: &str) -> Result<C64, Failure> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || invalid(format!("not a complex number: {s}"));
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    let split = body.char_indices().skip(1).filter(|&(k, c)| (c == '+' || c == '-') && !body[..k].ends_with(['e', 'E'])).last();
    let (re, im) = match split {
        Some((k, _)) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    Ok(C64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
}

pub fn parse_complex_list(s: &str) -> Result<Vec<C64>, Failure> {
    s.split(',').map(parse_complex).collect()
}

pub fn parse_triangulation(s: &str) -> Result<Triangulation, Failure> {
    let s = s.trim();
    let cells: Vec<Vec<usize>> = if s.starts_with('[') {
        serde_json::from_str(s).map_err(|e| invalid(format!("triangulation: {e}")))?
    } else {
        s.split(',')
            .map(|cell| {
                cell.trim()
                    .chars()
                    .map(|ch| ch.to_digit(10).map(|d| d as usize).ok_or_else(|| invalid(format!("bad label in {cell}"))))
                    .collect()
            })
            .collect::<Result<_, _>>()?
    };
    Ok(geometry::canonical(cells))
}

/// Deterministic default parameters: small, irrational-looking, with a small imaginary part.
pub fn default_c(n: usize) -> Vec<C64> {
    (0..n)
        .map(|i| {
            let x = (0.1 + (i as f64 + 1.0) * 0.618_033_988_749_895).fract() * 0.8 - 0.4;
            C64::new((x * 1000.0).round() / 1000.0, if i % 2 == 0 { 0.05 } else { -0.03 })
        })
        .collect()
}

fn load_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => {
            let s = std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&s).map_err(|e| invalid(format!("run config: {e}")))?
        }
        None => RunConfig::default(),
    };
    if common.matrix.is_some() {
        cfg.matrix = common.matrix.clone();
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    Ok(cfg)
}

fn load_matrix(cfg: &RunConfig) -> Result<Configuration, Failure> {
    let p = cfg.matrix.as_ref().ok_or_else(|| invalid("--matrix is required"))?;
    let s = std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
    Ok(Configuration::from_json(&s)?)
}

fn modification_of(a: &Configuration, pair: &PairArgs) -> Result<Modification, Failure> {
    let t = parse_triangulation(pair.from.as_deref().ok_or_else(|| invalid("--from is required"))?)?;
    let tp = parse_triangulation(pair.to.as_deref().ok_or_else(|| invalid("--to is required"))?)?;
    Ok(geometry::modification(a, &t, &tp)?)
}

fn path_inputs(cfg: &mut RunConfig, a: &Configuration, p: &PathArgs) -> Result<(), Failure> {
    if let Some(s) = &p.args {
        cfg.args = Some(parse_reals(s)?);
    }
    if let Some(r) = &p.r {
        cfg.r = Some(r.clone());
    }
    if let Some(x) = &cfg.args {
        if x.len() != a.big_n() {
            return Err(invalid(format!("--args needs {} values", a.big_n())));
        }
    }
    Ok(())
}

fn connect(a: &Configuration, m: &Modification, cfg: &RunConfig) -> Result<ConnectionMatrix, Failure> {
    let mut cm = connection::build_connection(a, m, None, None)?;
    let r = cfg.r.as_deref().map(linalg::parse_q).transpose()?;
    cm.path = Some(connection::build_path(a, m, &cm, cfg.args.as_deref(), r)?);
    Ok(cm)
}

fn q_strings(v: &[Q]) -> Vec<String> {
    v.iter().map(linalg::fmt_q).collect()
}

fn fmt_cells(t: &[Vec<usize>]) -> String {
    let all_small = t.iter().flatten().all(|&j| j < 10);
    let cell = |c: &Vec<usize>| {
        if all_small {
            c.iter().map(|j| j.to_string()).collect::<String>()
        } else {
            format!("{c:?}")
        }
    };
    format!("{{{}}}", t.iter().map(cell).collect::<Vec<_>>().join(", "))
}

fn matrix_text(cm: &ConnectionMatrix) -> String {
    let mut s = String::new();
    let label = |e: &connection::BasisEntry| {
        format!(
            "psi[{}; U={:?}; k={:?}]",
            e.spec.sigma.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(""),
            e.spec.sigma_u,
            e.spec.ktilde
        )
    };
    for (e, row) in cm.source_basis.iter().zip(&cm.entries) {
        let terms: Vec<String> =
            row.iter().zip(&cm.target_basis).filter(|(x, _)| !x.is_zero()).map(|(x, t)| format!("({x}) {}", label(t))).collect();
        let _ = writeln!(s, "{} -> {}", label(e), terms.join(" + "));
    }
    s
}

fn verify_text(rep: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:>4} {:>9} {:>12} {:>12} {:>12}", "row", "kind", "defect", "at start", "at end");
    for r in &rep.rows {
        let _ = writeln!(
            s,
            "{:>4} {:>9} {:>12.3e} {:>12.3e} {:>12.3e}{}",
            r.row,
            r.kind,
            r.defect,
            r.defect_start,
            r.defect_end,
            r.error.as_deref().map(|e| format!("  error: {e}")).unwrap_or_default()
        );
    }
    let _ = writeln!(s, "max defect {:.3e} (tol {:.1e}): {}", rep.max_defect, rep.tol, if rep.passed { "PASS" } else { "FAIL" });
    s
}

fn ok(json: Value, text: String) -> Output {
    Output { code: EXIT_OK, out: None, json, text }
}

fn execute(cli: &Cli) -> Result<Output, Failure> {
    let mut cfg = load_config(&cli.common)?;
    let a = load_matrix(&cfg)?;
    let out = cfg.out.clone();
    let mut res = dispatch(cli, &mut cfg, &a)?;
    res.out = out;
    Ok(res)
}

fn dispatch(cli: &Cli, cfg: &mut RunConfig, a: &Configuration) -> Result<Output, Failure> {
    match &cli.command {
        Command::Rank => {
            let vol = geometry::normalized_volume(a)?;
            let idx = lattice::lattice_index(a);
            let rank = geometry::rank_gg(a)?;
            let text = format!("volume {vol}\nindex {idx}\nrank {rank}\n");
            Ok(ok(json!({"volume": vol.to_string(), "index": idx.to_string(), "rank": rank.to_string()}), text))
        }
        Command::Triangulate { weight, perturb } => {
            let w = parse_rationals(weight)?;
            let s = if *perturb { geometry::regular_triangulation_perturbed(a, &w)? } else { geometry::regular_subdivision(a, &w)? };
            let text = format!("cells {}\ntriangulation {}\nalmost {}\n", fmt_cells(&s.cells), s.is_triangulation, s.is_almost);
            Ok(ok(serde_json::to_value(&s).unwrap(), text))
        }
        Command::Fan { max_nodes } => {
            let g = geometry::flip_graph(a, *max_nodes)?;
            let mut text = String::new();
            for (k, n) in g.nodes.iter().enumerate() {
                let _ = writeln!(text, "T{k} = {}", fmt_cells(&n.triangulation));
            }
            for e in &g.edges {
                let _ = writeln!(text, "T{} -> T{}  Z = {:?}  Z+ = {:?}", e.from, e.to, e.circuit.z, e.circuit.zplus);
            }
            if g.truncated {
                text.push_str("(truncated)\n");
            }
            Ok(ok(serde_json::to_value(&g).unwrap(), text))
        }
        Command::Circuits => {
            let c = geometry::find_circuits(a);
            let text: String = c.iter().map(|x| format!("Z = {:?}  u = {:?}\n", x.z, x.u)).collect();
            Ok(ok(serde_json::to_value(&c).unwrap(), text))
        }
        Command::Facets => {
            let f = geometry::facets_off_origin(a)?;
            let text: String = f.iter().map(|x| format!("F = {:?}  dim {}\n", x.columns, x.volume)).collect();
            Ok(ok(serde_json::to_value(&f).unwrap(), text))
        }
        Command::Modify { pair, basis } => {
            let m = modification_of(a, pair)?;
            let mut j = serde_json::to_value(&m).unwrap();
            let mut text = format!(
                "T = {}\nT' = {}\nQ = {}\nT_irr = {}\ncorank-1 cells {}\nZ = {:?}  Z+ = {:?}  Z- = {:?}\nomega_Q = {:?}\n",
                fmt_cells(&m.t),
                fmt_cells(&m.tprime),
                fmt_cells(&m.q.cells),
                fmt_cells(&m.tirr),
                fmt_cells(&m.corank1_cells),
                m.circuit.z,
                m.circuit.zplus,
                m.circuit.zminus,
                q_strings(&m.omega_q)
            );
            if let Some(b) = basis {
                let b: Vec<Vec<i64>> = serde_json::from_str(b).map_err(|e| invalid(format!("basis: {e}")))?;
                let b: Vec<Vec<linalg::Z>> = b.into_iter().map(|v| v.into_iter().map(linalg::Z::from).collect()).collect();
                let p = geometry::irredundant(&geometry::project_inequalities(&m.ctilde, &b)?);
                let p: Vec<Vec<String>> = p.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
                let wq = q_strings(&geometry::project_weight(&m.omega_q, &b));
                let _ = writeln!(text, "projected C~+: {p:?} (each row g: g . w > 0)\nprojected omega_Q: {wq:?}");
                j["projectedCtilde"] = json!(p);
                j["projectedOmegaQ"] = json!(wq);
            }
            Ok(ok(j, text))
        }
        Command::Connect { pair, path } => {
            let m = modification_of(a, pair)?;
            path_inputs(cfg, a, path)?;
            let cm = connect(a, &m, cfg)?;
            let text = matrix_text(&cm);
            Ok(ok(serde_json::to_value(&cm).unwrap(), text))
        }
        Command::Path { pair, path } => {
            let m = modification_of(a, pair)?;
            path_inputs(cfg, a, path)?;
            let cm = connect(a, &m, cfg)?;
            let p = cm.path.unwrap();
            let text = format!(
                "args {:?}\n-log|z_start| = {:?}\n-log|z_end| = {:?}\nr = {}\nmargins {:?}\n",
                p.args,
                p.z_start.log_abs.iter().map(|x| -x).collect::<Vec<_>>(),
                p.z_end.log_abs.iter().map(|x| -x).collect::<Vec<_>>(),
                linalg::fmt_q(&p.r),
                p.margins
            );
            Ok(ok(serde_json::to_value(&p).unwrap(), text))
        }
        Command::Verify { pair, path, c, order, tol } => {
            let m = modification_of(a, pair)?;
            path_inputs(cfg, a, path)?;
            if let Some(c) = c {
                cfg.c = Some(parse_complex_list(c)?);
            }
            if let Some(o) = order {
                cfg.order = *o;
            }
            if let Some(t) = tol {
                cfg.tol = *t;
            }
            let c = cfg.c.clone().unwrap_or_else(|| default_c(a.n()));
            if c.len() != a.n() {
                return Err(invalid(format!("--c needs {} values", a.n())));
            }
            let cm = connect(a, &m, cfg)?;
            let vc = VerifyConfig { order: cfg.order, tol: cfg.tol, quad: cfg.quad };
            let rep = connection::verify_connection(a, &cm, cm.path.as_ref().unwrap(), &c, &vc)?;
            let code = if rep.rows.iter().any(|r| r.error.is_some()) {
                EXIT_NONCONVERGED
            } else if rep.passed {
                EXIT_OK
            } else {
                EXIT_VERIFY
            };
            let text = verify_text(&rep);
            Ok(Output { code, out: None, json: serde_json::to_value(&rep).unwrap(), text })
        }
        Command::Mb { cell, j0, c, z, args, ktilde, order } => {
            let cell: Vec<usize> = cell
                .split(',')
                .flat_map(|x| {
                    let x = x.trim();
                    if x.len() > 1 && !x.contains(' ') && a.big_n() < 10 {
                        x.chars().map(|ch| ch.to_digit(10).map(|d| d as usize)).collect::<Vec<_>>()
                    } else {
                        vec![x.parse().ok()]
                    }
                })
                .collect::<Option<_>>()
                .ok_or_else(|| invalid("bad --cell"))?;
            let c = match c {
                Some(s) => parse_complex_list(s)?,
                None => cfg.c.clone().unwrap_or_else(|| default_c(a.n())),
            };
            let abs = parse_reals(z)?;
            let arg = match args {
                Some(s) => parse_reals(s)?,
                None => vec![0.0; a.big_n()],
            };
            if abs.len() != a.big_n() || arg.len() != a.big_n() {
                return Err(invalid(format!("--z and --args need {} values", a.big_n())));
            }
            let k: Vec<i64> = match ktilde {
                Some(s) => s.split(',').map(|x| x.trim().parse().map_err(|_| invalid("bad --ktilde"))).collect::<Result<_, _>>()?,
                None => vec![0; a.n()],
            };
            let ig = MBIntegrand::new(a, &cell, *j0, &c, &k)?;
            let zp = LogPoint::from_polar(&abs, &arg);
            let v = ig.mb_evaluate(&zp, &cfg.quad)?;
            let order = order.unwrap_or(cfg.order);
            let pos = ig.residues_positive(a, &zp, order);
            let neg = ig.residues_negative(a, &zp, order);
            let show = |r: &gkz::Result<C64>| match r {
                Ok(x) => json!([x.re, x.im]),
                Err(e) => json!({"error": e.to_string()}),
            };
            let j = json!({
                "integral": serde_json::to_value(v).unwrap(),
                "logZeta": [ig.log_zeta(&zp)?.re, ig.log_zeta(&zp)?.im],
                "positiveResidues": show(&pos),
                "negativeResidues": show(&neg),
                "order": order,
            });
            let fmt = |r: &gkz::Result<C64>| match r {
                Ok(x) => format!("{x}"),
                Err(e) => format!("({e})"),
            };
            let text = format!(
                "integral {}  (estimate {:.1e}, shift {}, margin {:.3})\npositive residues {}\nnegative residues {}\n",
                v.value,
                v.estimate,
                v.shift,
                v.sector_margin,
                fmt(&pos),
                fmt(&neg)
            );
            Ok(ok(j, text))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Rank => "rank",
        Command::Triangulate { .. } => "triangulate",
        Command::Fan { .. } => "fan",
        Command::Circuits => "circuits",
        Command::Facets => "facets",
        Command::Modify { .. } => "modify",
        Command::Connect { .. } => "connect",
        Command::Path { .. } => "path",
        Command::Verify { .. } => "verify",
        Command::Mb { .. } => "mb",
    }
}

/// Runs one command; returns the exit code, the rendered output and where to write it.
pub fn run(cli: &Cli) -> (i32, String, Option<PathBuf>) {
    let name = command_name(&cli.command);
    let mut dest = cli.common.out.clone();
    let (code, body) = match execute(cli) {
        Ok(out) => {
            if dest.is_none() {
                dest = out.out.clone();
            }
            let body = if cli.common.pretty {
                out.text
            } else {
                let v = json!({"version": concat!("gg ", env!("CARGO_PKG_VERSION")), "command": name, "result": out.json});
                serde_json::to_string_pretty(&v).unwrap() + "\n"
            };
            (out.code, body)
        }
        Err(f) => {
            let body = if cli.common.pretty {
                format!("error: {}\n", f.message)
            } else {
                let v = json!({"version": concat!("gg ", env!("CARGO_PKG_VERSION")), "command": name, "error": {"kind": f.kind, "message": f.message}});
                serde_json::to_string_pretty(&v).unwrap() + "\n"
            };
            (f.code, body)
        }
    };
    (code, body, dest)
}

pub fn init_threads() {
    if let Some(n) = std::env::var("GG_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cube::{self, CubePolynomial};
use crate::error::{Error, Result};
use crate::gamma::{self, GammaTable};
use crate::inner;
use crate::instances::{self, CoeffDist};
use crate::io;
use crate::kernel;
use crate::krawtchouk;
use crate::matrix::MatrixPolynomial;
use crate::outer::{self, OuterOptions, OuterStrategy};
use crate::qary;
use crate::sdp::SdpOptions;

#[derive(Parser, Debug)]
#[command(name = "cubesos", version, about = "Sum-of-squares bounds for polynomial minimization on the boolean cube")]
pub struct Cli {
    /// Suppress human-readable tables on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CUBESOS_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, env = "CUBESOS_SOLVER_TOL", default_value_t = 1e-7)]
    pub solver_tol: f64,
    #[arg(long, global = true, env = "CUBESOS_SOLVER_MAX_ITER", default_value_t = 200)]
    pub solver_max_iter: usize,
    /// Largest n for which the cube (2^n points) may be enumerated.
    #[arg(long, global = true, env = "CUBESOS_MAX_N")]
    pub max_n: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute outer, inner and exact bounds for one instance.
    Bounds(BoundsArgs),
    /// Build a kernel certificate for f + delta at order r.
    Certify(CertifyArgs),
    /// Emit CSV sweep data.
    Sweep(SweepArgs),
    /// Tabulate gamma_d and C_d.
    Gamma(GammaArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Inner,
    Outer,
    Brute,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Direct,
    Ladder,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// Polynomial JSON file.
    #[arg(long, conflicts_with_all = ["instance", "matrix"])]
    pub poly: Option<PathBuf>,
    /// maxcut:FILE, stable:FILE, maxcut-complete:N or random:N,D,SEED.
    #[arg(long, conflicts_with = "matrix")]
    pub instance: Option<String>,
    /// Matrix polynomial JSON file.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = Which::All)]
    pub which: Which,
    #[arg(long, value_enum, default_value_t = StrategyArg::Direct)]
    pub strategy: StrategyArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long)]
    pub poly: PathBuf,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Re-check the certificate on every cube point.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepMode {
    Roots,
    Phi,
    Errors,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<usize>,
    /// Largest r for root sweeps (default: floor((q-1) n / q)).
    #[arg(long)]
    pub rmax: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Values of r/n for error sweeps.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5])]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GammaArgs {
    #[arg(long)]
    pub dmax: usize,
    /// Also tabulate rho(n,d,k) for n up to this value.
    #[arg(long)]
    pub n_sweep: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoCertificate { .. } => 4,
        Error::Solver(_)
        | Error::Lp(_)
        | Error::EigenFailure { .. }
        | Error::RootMismatch { .. }
        | Error::SingularOperator { .. }
        | Error::CertificationFailed { .. } => 3,
        _ => 2,
    }
}

struct Ctx {
    quiet: bool,
    sdp: SdpOptions,
}

impl Ctx {
    fn human(&self, text: &str) {
        if !self.quiet {
            eprint!("{}", text);
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        // an already-initialized pool (e.g. in tests) is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    if let Some(n) = cli.max_n {
        cube::set_enumeration_cap(n);
    }
    let ctx = Ctx {
        quiet: cli.quiet,
        sdp: SdpOptions { gap_tol: cli.solver_tol, max_iter: cli.solver_max_iter, ..SdpOptions::default() },
    };
    match cli.command {
        Command::Bounds(a) => cmd_bounds(&ctx, &a),
        Command::Certify(a) => cmd_certify(&ctx, &a),
        Command::Sweep(a) => cmd_sweep(&ctx, &a),
        Command::Gamma(a) => cmd_gamma(&ctx, &a),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {}", p.display(), e))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Parses `maxcut:FILE`, `stable:FILE`, `maxcut-complete:N` and
/// `random:N,D,SEED`.
pub fn parse_instance(spec: &str) -> Result<CubePolynomial> {
    let (kind, arg) = spec.split_once(':').ok_or_else(|| Error::Parse(format!("instance spec {:?} has no ':'", spec)))?;
    let int = |s: &str| s.trim().parse::<u64>().map_err(|_| Error::Parse(format!("{:?} is not a nonnegative integer", s)));
    match kind {
        "maxcut" => instances::maxcut_from_graph(&io::parse_graph(&read(Path::new(arg))?)?),
        "stable" => {
            let g = io::parse_graph(&read(Path::new(arg))?)?;
            let edges: Vec<(usize, usize)> = g.edges.iter().map(|&(i, j, _)| (i, j)).collect();
            instances::stable_set_instance(g.n, &edges)
        }
        "maxcut-complete" => Ok(instances::maxcut_complete(int(arg)? as usize)),
        "random" => {
            let parts: Vec<&str> = arg.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("random spec {:?} must be N,D,SEED", arg)));
            }
            instances::random_poly(int(parts[0])? as usize, int(parts[1])? as usize, int(parts[2])?, CoeffDist::Uniform)
        }
        _ => Err(Error::Parse(format!("unknown instance kind {:?}", kind))),
    }
}

#[derive(Serialize, Debug)]
struct OuterReport {
    value: f64,
    dual_value: f64,
    solved_order: usize,
    status: String,
    gap: f64,
    iterations: usize,
}

#[derive(Serialize, Debug)]
struct InnerReport {
    value: f64,
    residual: f64,
}

#[derive(Serialize, Debug, Default)]
struct Timings {
    brute_ms: Option<f64>,
    outer_ms: Option<f64>,
    inner_ms: Option<f64>,
}

#[derive(Serialize, Debug)]
struct BoundsReport {
    n: usize,
    k: Option<usize>,
    degree: usize,
    r: usize,
    f_min: Option<f64>,
    argmin: Option<String>,
    outer: Option<OuterReport>,
    inner: Option<InnerReport>,
    /// `outer <= f_min` (within 1e-6).
    outer_below_min: Option<bool>,
    /// `f_min <= inner` (within 1e-8).
    inner_above_min: Option<bool>,
    timings: Timings,
}

fn ms(t: Instant) -> Option<f64> {
    Some(t.elapsed().as_secs_f64() * 1e3)
}

fn cmd_bounds(ctx: &Ctx, a: &BoundsArgs) -> Result<()> {
    let want = |w: Which| a.which == w || a.which == Which::All;
    let mut timings = Timings::default();
    let report = if let Some(path) = &a.matrix {
        let f = io::parse_matrix_polynomial(&read(path)?)?;
        bounds_matrix(ctx, a, &f, &mut timings)?
    } else {
        let f = match (&a.poly, &a.instance) {
            (Some(p), None) => io::parse_polynomial(&read(p)?)?,
            (None, Some(s)) => parse_instance(s)?,
            _ => return Err(Error::Parse("exactly one of --poly, --instance or --matrix is required".into())),
        };
        let mut f_min = None;
        let mut argmin = None;
        let ladder = a.strategy == StrategyArg::Ladder;
        if want(Which::Brute) || ladder {
            let t = Instant::now();
            let (v, x) = cube::brute_force_min(&f)?;
            timings.brute_ms = ms(t);
            f_min = Some(v);
            argmin = Some(x.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect());
        }
        let outer = if want(Which::Outer) {
            let strategy = if ladder { OuterOptions::ladder().strategy } else { OuterStrategy::Direct };
            let t = Instant::now();
            let o = outer::outer_cube(&f, a.r, &OuterOptions { sdp: ctx.sdp, strategy })?;
            timings.outer_ms = ms(t);
            Some(OuterReport { value: o.value, dual_value: o.dual_value, solved_order: o.solved_order, status: o.status.to_string(), gap: o.gap, iterations: o.iterations })
        } else {
            None
        };
        let inner = if want(Which::Inner) {
            let t = Instant::now();
            let i = inner::inner_cube(&f, a.r)?;
            timings.inner_ms = ms(t);
            Some(InnerReport { value: i.value, residual: i.residual })
        } else {
            None
        };
        BoundsReport {
            n: f.n(),
            k: None,
            degree: f.degree(),
            r: a.r,
            outer_below_min: f_min.zip(outer.as_ref()).map(|(m, o)| o.value <= m + 1e-6),
            inner_above_min: f_min.zip(inner.as_ref()).map(|(m, i)| m <= i.value + 1e-8),
            f_min,
            argmin,
            outer,
            inner,
            timings,
        }
    };
    let mut human = format!("n = {}, degree = {}, r = {}\n", report.n, report.degree, report.r);
    if let Some(o) = &report.outer {
        human += &format!("  outer  {:>20.12}  ({}, order {})\n", o.value, o.status, o.solved_order);
    }
    if let Some(m) = report.f_min {
        human += &format!("  min    {:>20.12}\n", m);
    }
    if let Some(i) = &report.inner {
        human += &format!("  inner  {:>20.12}\n", i.value);
    }
    ctx.human(&human);
    emit(a.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn bounds_matrix(ctx: &Ctx, a: &BoundsArgs, f: &MatrixPolynomial, timings: &mut Timings) -> Result<BoundsReport> {
    let want = |w: Which| a.which == w || a.which == Which::All;
    let mut f_min = None;
    let mut argmin = None;
    if want(Which::Brute) {
        let t = Instant::now();
        let (v, x) = f.min_eigenvalue_enumeration()?;
        timings.brute_ms = ms(t);
        f_min = Some(v);
        argmin = Some(x.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect());
    }
    let outer = if want(Which::Outer) {
        let t = Instant::now();
        let o = outer::outer_matrix(f, a.r, &ctx.sdp)?;
        timings.outer_ms = ms(t);
        Some(OuterReport { value: o.value, dual_value: o.dual_value, solved_order: o.solved_order, status: o.status.to_string(), gap: o.gap, iterations: o.iterations })
    } else {
        None
    };
    let inner = if want(Which::Inner) {
        let t = Instant::now();
        let i = inner::inner_matrix(f, a.r)?;
        timings.inner_ms = ms(t);
        Some(InnerReport { value: i.value, residual: i.residual })
    } else {
        None
    };
    Ok(BoundsReport {
        n: f.n(),
        k: Some(f.k()),
        degree: f.degree(),
        r: a.r,
        outer_below_min: f_min.zip(outer.as_ref()).map(|(m, o)| o.value <= m + 1e-6),
        inner_above_min: f_min.zip(inner.as_ref()).map(|(m, i)| m <= i.value + 1e-8),
        f_min,
        argmin,
        outer,
        inner,
        timings: std::mem::take(timings),
    })
}

fn cmd_certify(ctx: &Ctx, a: &CertifyArgs) -> Result<()> {
    let f = io::parse_polynomial(&read(&a.poly)?)?;
    let cert = kernel::certify(&f, a.r)?;
    let mut human = format!(
        "certificate: r = {}, d = {}, lambda_tilde = {:.6e}, delta = {:.6e} (scale {:.6e}), f_(r) >= {:.12}\n",
        cert.r, cert.d, cert.lambda_tilde, cert.delta, cert.scale, cert.lower_bound
    );
    if let Some(b) = cert.apriori_bound {
        human += &format!("  a-priori bound 2 C_d xi / n = {:.6e}\n", b);
    }
    if a.verify {
        let res = kernel::verify_certificate(&cert, &f)?;
        human += &format!("  verified on {} points, residual {:.3e}\n", 1usize << f.n(), res);
        if res > 1e-7 {
            return Err(Error::CertificationFailed { y: String::from("reconstruction"), w: res });
        }
    }
    ctx.human(&human);
    emit(a.out.as_deref(), &(serde_json::to_string(&cert)? + "\n"))
}

#[derive(Serialize)]
struct RootRow {
    n: usize,
    q: usize,
    r: usize,
    xi: f64,
    xi_over_n: f64,
    #[serde(rename = "phi_q(r/n)")]
    phi: f64,
}

fn cmd_sweep(ctx: &Ctx, a: &SweepArgs) -> Result<()> {
    let csv = match a.mode {
        SweepMode::Roots => {
            if a.n.is_empty() {
                return Err(Error::Parse("--n is required for root sweeps".into()));
            }
            let qs = if a.q.is_empty() { vec![2] } else { a.q.clone() };
            let mut rows = Vec::new();
            for &q in &qs {
                for &n in &a.n {
                    let rmax = a.rmax.unwrap_or((q - 1) * n / q.max(1)).min(n);
                    for (n, q, r, xi, xo, phi) in krawtchouk::root_rows(n, q, rmax)? {
                        rows.push(RootRow { n, q, r, xi, xi_over_n: xo, phi });
                    }
                }
            }
            ctx.human(&format!("{} root rows\n", rows.len()));
            to_csv(&rows)?
        }
        SweepMode::Phi => {
            let qs = if a.q.is_empty() { vec![2, 3, 4, 5] } else { a.q.clone() };
            let rows = qary::phi_q_sweep(&qs, &a.n, None)?;
            ctx.human(&format!("{} phi rows for q = {:?}\n", rows.len(), qs));
            to_csv(&rows)?
        }
        SweepMode::Errors => {
            let ns = if a.n.is_empty() { vec![10, 12] } else { a.n.clone() };
            let opts = OuterOptions { sdp: ctx.sdp, ..OuterOptions::ladder() };
            let rows = kernel::error_sweep(a.d, &ns, &a.t, a.samples, a.seed, &opts);
            let mut human = String::from("   n   r     outer gap     inner gap         bound  status\n");
            for r in &rows {
                human += &format!("{:>4} {:>3}  {:>12.4e}  {:>12.4e}  {:>12.4e}  {}\n", r.n, r.r, r.max_outer_gap, r.max_inner_gap, r.bound, r.status);
            }
            ctx.human(&human);
            to_csv(&rows)?
        }
    };
    emit(a.out.as_deref(), &csv)
}

#[derive(Serialize)]
struct GammaSummaryRow {
    d: usize,
    gamma_d: String,
    #[serde(rename = "C_d")]
    c_d: String,
}

fn cmd_gamma(ctx: &Ctx, a: &GammaArgs) -> Result<()> {
    if a.q < 2 {
        return Err(Error::OutOfRange(format!("q = {} must be at least 2", a.q)));
    }
    let csv = match a.n_sweep {
        None => {
            let mut rows = Vec::new();
            let mut human = String::from("  d        gamma_d            C_d\n");
            for d in 1..=a.dmax {
                let (g, c) = if a.q == 2 {
                    match gamma::gamma_exact(d) {
                        Some(g) => (g.to_string(), (g as i128 * (d * (d + 1)) as i128).to_string()),
                        None => (gamma::gamma(d).to_string(), gamma::c_constant(d).to_string()),
                    }
                } else {
                    let t = GammaTable::build(d, d, a.q)?;
                    (t.gamma_d.to_string(), t.c_d.to_string())
                };
                human += &format!("{:>3} {:>14} {:>14}\n", d, g, c);
                rows.push(GammaSummaryRow { d, gamma_d: g, c_d: c });
            }
            ctx.human(&human);
            to_csv(&rows)?
        }
        Some(n_max) => {
            let mut rows = Vec::new();
            for d in 1..=a.dmax {
                let t = GammaTable::build(d, n_max.max(d), a.q)?;
                rows.extend(t.rows());
            }
            ctx.human(&format!("{} rho rows for d <= {}, n <= {}, q = {}\n", rows.len(), a.dmax, n_max, a.q));
            to_csv(&rows)?
        }
    };
    emit(a.out.as_deref(), &csv)
}

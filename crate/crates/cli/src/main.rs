//! `delibmatch` command-line tool.
//!
//! Exit codes: 0 success, 1 parse or usage error, 2 file not found,
//! 3 domain error, 4 invalid instance, 5 computation error. Errors are
//! reported on stderr as `error[CODE]: message`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use delibmatch::bounds::{heatmap, lower_bound_with_argmax, permissible_ranges, BoundsError, Family, HeatmapGrid};
use delibmatch::certify::{certify_cases, minimal_r, CaseSpec, LpValue};
use delibmatch::exactnum::{format_rational, parse_rational, Field, QuadraticScalar as Q};
use delibmatch::instances::{instance_distortion, social_cost, validate_metric};
use delibmatch::io::{parse_instance, write_instance, InstanceDoc};
use delibmatch::montecarlo::{run_montecarlo, Embedding, MonteCarloConfig, Sampler};
use delibmatch::oracle::worst_case_distortion;
use delibmatch::protocol::{run_protocol, MatchingPolicy, Params};

#[derive(Debug)]
enum CliError {
    Parse(String),
    FileNotFound(PathBuf),
    Domain(String),
    InvalidInstance(String),
    Compute(String),
}

impl CliError {
    fn code(&self) -> (&'static str, u8) {
        match self {
            CliError::Parse(_) => ("E_PARSE", 1),
            CliError::FileNotFound(_) => ("E_FILE_NOT_FOUND", 2),
            CliError::Domain(_) => ("E_DOMAIN", 3),
            CliError::InvalidInstance(_) => ("E_INVALID_INSTANCE", 4),
            CliError::Compute(_) => ("E_COMPUTE", 5),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::FileNotFound(p) => format!("no such file: {}", p.display()),
            CliError::Parse(m) | CliError::Domain(m) | CliError::InvalidInstance(m) | CliError::Compute(m) => m.clone(),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Domain(m) => CliError::Domain(m),
            other => CliError::Parse(other.to_string()),
        }
    }
}

type CliResult = Result<String, CliError>;

#[derive(Parser, Debug)]
#[command(name = "delibmatch", version, about = "Deliberation via matching: protocol runs, distortion oracles and bounds")]
struct Cli {
    /// Worker threads for heatmap, certificate and Monte Carlo batches.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Policy {
    ByOrder,
    CounterMonotone,
    Explicit,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Select {
    MinIndex,
    All,
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    /// λ in [1/2, 1], exact text such as `3/2-1/2√3` or `0.6`.
    #[arg(long)]
    lambda: Option<String>,
    /// Deliberation weight w >= 0, exact text.
    #[arg(long)]
    w: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the protocol on an instance file.
    Run {
        instance: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Policy::ByOrder)]
        policy: Policy,
        #[arg(long, value_enum, default_value_t = Select::MinIndex)]
        select: Select,
    },
    /// Worst-case distortion of the protocol winner given only the observed information.
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Policy::ByOrder)]
        policy: Policy,
        /// Reference candidate name; all other candidates when omitted.
        #[arg(long)]
        reference: Option<String>,
    },
    /// Verify the per-vertex programs and their dual certificates.
    Certify {
        /// `1`, `2` or `all`.
        #[arg(long, default_value = "all")]
        case: String,
        #[arg(long = "R", default_value = "2")]
        r: String,
        /// Also bracket the smallest R with a nonnegative optimum.
        #[arg(long)]
        min_r: bool,
    },
    /// Lower-bound families, closed forms and the heatmap.
    Bounds {
        /// Emit the instance file of a family at (λ, w).
        #[arg(long, value_enum, conflicts_with_all = ["heatmap", "at"])]
        example: Option<FamilyArg>,
        #[command(flatten)]
        params: ParamArgs,
        /// Emit the heatmap as CSV.
        #[arg(long, conflicts_with = "at")]
        heatmap: bool,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value = "0.5,0.7")]
        lambda_range: String,
        #[arg(long, default_value = "0,1.25")]
        w_range: String,
        /// Leave the exact optimum out of the heatmap rows.
        #[arg(long)]
        no_optimum: bool,
        /// `lambda,w`: print the permissible ranges and d1, d2, d3, D.
        #[arg(long)]
        at: Option<String>,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random search for the largest distortion.
    Montecarlo {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = SamplerArg::Uniform)]
        sampler: SamplerArg,
        #[arg(long, value_enum, default_value_t = EmbeddingArg::Mixed)]
        embedding: EmbeddingArg,
        #[arg(long, default_value_t = 6)]
        max_voters: usize,
    },
    /// Check the metric conditions of an instance file.
    Validate { instance: PathBuf },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Collinear,
    Colocated,
    Triangle,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Collinear => Family::Collinear,
            FamilyArg::Colocated => Family::Colocated,
            FamilyArg::Triangle => Family::Triangle,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SamplerArg {
    Uniform,
    NearTight,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EmbeddingArg {
    Line,
    Plane,
    Mixed,
}

fn scalar(name: &str, text: &str) -> Result<Q, CliError> {
    text.trim().parse().map_err(|_| CliError::Parse(format!("{name}: cannot parse `{text}`")))
}

/// Flags override the file, which overrides `fallback`.
fn resolve_params(args: &ParamArgs, file: Option<&Params>, fallback: Params) -> Result<Params, CliError> {
    let base = file.cloned().unwrap_or(fallback);
    let lambda = match &args.lambda {
        Some(t) => scalar("--lambda", t)?,
        None => base.lambda,
    };
    let w = match &args.w {
        Some(t) => scalar("--w", t)?,
        None => base.w,
    };
    Params::new(lambda, w).map_err(|e| CliError::Domain(e.to_string()))
}

fn load(path: &Path) -> Result<InstanceDoc, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Parse(format!("{}: {e}", path.display())),
    })?;
    parse_instance(&text).map_err(|e| CliError::InvalidInstance(format!("{}: {e}", path.display())))
}

fn policy_of(p: Policy, doc: &InstanceDoc) -> MatchingPolicy {
    match p {
        Policy::ByOrder => MatchingPolicy::ByOrder,
        Policy::CounterMonotone => MatchingPolicy::CounterMonotone,
        Policy::Explicit => doc.explicit_policy(),
    }
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

fn cmd_run(path: &Path, params: &ParamArgs, policy: Policy, select: Select, format: Format) -> CliResult {
    let doc = load(path)?;
    let params = resolve_params(params, doc.params.as_ref(), Params::canonical())?;
    let inst = &doc.instance;
    let run = run_protocol(inst, &doc.ties, &params, &policy_of(policy, &doc)).map_err(compute)?;
    let names = &inst.candidates;
    let m = inst.num_candidates();
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("candidate,social_cost,in_wus,winner,distortion\n");
        for x in 0..m {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                names[x],
                social_cost(inst, x),
                run.wus.contains(&x),
                x == run.winner,
                instance_distortion(inst, x)
            );
        }
        return Ok(out);
    }
    let _ = writeln!(out, "lambda = {}  w = {}", params.lambda, params.w);
    out.push_str("f(X,Y):\n");
    for x in 0..m {
        for y in 0..m {
            if x != y {
                let _ = writeln!(out, "  f({},{}) = {}", names[x], names[y], run.tournament.f(x, y));
            }
        }
    }
    let wus: Vec<&str> = run.wus.iter().map(|&x| names[x].as_str()).collect();
    let _ = writeln!(out, "WUS = {{{}}}", wus.join(", "));
    match select {
        Select::MinIndex => {
            let _ = writeln!(out, "winner = {}", names[run.winner]);
            let _ = writeln!(out, "optimal = {}", names[run.optimal]);
            let _ = writeln!(out, "distortion = {} ({:.6})", run.distortion, run.distortion.to_f64());
        }
        Select::All => {
            let _ = writeln!(out, "optimal = {}", names[run.optimal]);
            for (x, d) in run.member_distortions(inst) {
                let _ = writeln!(out, "member {} distortion = {} ({:.6})", names[x], d, d.to_f64());
            }
        }
    }
    Ok(out)
}

fn cmd_oracle(path: &Path, params: &ParamArgs, policy: Policy, reference: Option<&str>, format: Format) -> CliResult {
    let doc = load(path)?;
    let params = resolve_params(params, doc.params.as_ref(), Params::canonical())?;
    let inst = &doc.instance;
    let run = run_protocol(inst, &doc.ties, &params, &policy_of(policy, &doc)).map_err(compute)?;
    let refs: Vec<usize> = match reference {
        Some(name) => vec![inst.candidate_index(name).map_err(|e| CliError::InvalidInstance(e.to_string()))?],
        None => (0..inst.num_candidates()).filter(|&y| y != run.winner).collect(),
    };
    let names = &inst.candidates;
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("winner,reference,worst_case\n");
    } else {
        let _ = writeln!(out, "winner = {}", names[run.winner]);
    }
    for y in refs {
        let res = worst_case_distortion(&run.profile, &run.tournament.records, run.winner, y).map_err(compute)?;
        if format == Format::Csv {
            let _ = writeln!(out, "{},{},{}", names[run.winner], names[y], res.distortion);
        } else {
            let _ = writeln!(
                out,
                "worst case SC({})/SC({}) = {} ({:.6})",
                names[run.winner],
                names[y],
                res.distortion,
                res.distortion.to_f64()
            );
        }
    }
    Ok(out)
}

fn cmd_certify(case: &str, r: &str, min_r: bool, format: Format) -> CliResult {
    let cases = match case {
        "all" => CaseSpec::all(),
        s => {
            let id: u8 = s.parse().map_err(|_| CliError::Parse(format!("--case: expected 1, 2 or all, got `{s}`")))?;
            vec![CaseSpec::by_id(id).map_err(|e| CliError::Parse(e.to_string()))?]
        }
    };
    let r = parse_rational(r).map_err(|_| CliError::Parse(format!("--R: cannot parse `{r}`")))?;
    if r <= num_traits::Zero::zero() {
        return Err(CliError::Domain(format!("R = {} must be positive", format_rational(&r))));
    }
    let reports = certify_cases(&cases, &r).map_err(compute)?;
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("case,vertex,p1,p2,p3,p6,R,optimum,dual_ok\n");
    }
    for rep in &reports {
        let s = rep.vertex.summary();
        let opt = match &rep.lp_optimum {
            LpValue::Finite(v) => format_rational(v),
            LpValue::MinusInfinity => "-inf".to_string(),
        };
        if format == Format::Csv {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                rep.case,
                rep.vertex_index + 1,
                format_rational(&s[0]),
                format_rational(&s[1]),
                format_rational(&s[2]),
                format_rational(&s[3]),
                format_rational(&rep.r),
                opt,
                rep.dual_ok
            );
        } else {
            let dual = if rep.dual_ok {
                "dual OK".to_string()
            } else {
                format!("dual FAILED ({})", rep.dual_error.as_deref().unwrap_or("no certificate"))
            };
            let _ = writeln!(
                out,
                "case {} vertex {} {}: R = {}  optimum {}  {}",
                rep.case,
                rep.vertex_index + 1,
                rep.vertex.label(),
                format_rational(&rep.r),
                opt,
                dual
            );
        }
    }
    if min_r {
        for c in &cases {
            let iv = minimal_r(c).map_err(compute)?;
            let _ = writeln!(
                out,
                "case {} threshold R in [{}, {}] (monotone scan: {})",
                c.id,
                format_rational(&iv.lo),
                format_rational(&iv.hi),
                iv.monotone
            );
        }
    }
    Ok(out)
}

fn parse_pair(flag: &str, text: &str) -> Result<(String, String), CliError> {
    let mut it = text.split(',');
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((a.trim().to_string(), b.trim().to_string())),
        _ => Err(CliError::Parse(format!("{flag}: expected `a,b`, got `{text}`"))),
    }
}

fn float_pair(flag: &str, text: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = parse_pair(flag, text)?;
    let p = |s: &str| s.parse::<f64>().map_err(|_| CliError::Parse(format!("{flag}: cannot parse `{s}`")));
    Ok((p(&a)?, p(&b)?))
}

#[allow(clippy::too_many_arguments)]
fn cmd_bounds(
    example: Option<FamilyArg>,
    params: &ParamArgs,
    show_heatmap: bool,
    steps: usize,
    lambda_range: &str,
    w_range: &str,
    no_optimum: bool,
    at: Option<&str>,
    format: Format,
) -> CliResult {
    if let Some(fam) = example {
        let p = resolve_params(params, None, Params::canonical())?;
        let (inst, ties) = Family::from(fam).instance(&p.lambda, &p.w)?;
        let mut doc = InstanceDoc::new(inst, ties);
        doc.params = Some(p);
        return write_instance(&doc).map_err(compute);
    }
    if show_heatmap {
        let grid = HeatmapGrid {
            lambda_range: float_pair("--lambda-range", lambda_range)?,
            w_range: float_pair("--w-range", w_range)?,
            lambda_steps: steps,
            w_steps: steps,
            include_optimum: !no_optimum,
        };
        let h = heatmap(&grid);
        if h.rows.is_empty() {
            return Err(CliError::Domain("no grid point lies in the domain".into()));
        }
        let min = h.min();
        eprintln!("grid minimum D = {} at lambda = {}, w = {}", min.big_d, min.lambda, min.w);
        return Ok(h.to_csv());
    }
    let Some(at) = at else {
        return Err(CliError::Parse("bounds needs one of --example, --heatmap or --at".into()));
    };
    let (l, w) = parse_pair("--at", at)?;
    let (l, w) = (scalar("--at", &l)?, scalar("--at", &w)?);
    let r = permissible_ranges(&l, &w)?;
    let (big_d, d, argmax) = lower_bound_with_argmax(&l, &w)?;
    let values: [(&str, &Q); 12] = [
        ("lambda", &l),
        ("w", &w),
        ("ac_min", &r.ac_min),
        ("ac_max", &r.ac_max),
        ("cb_min", &r.cb_min),
        ("cb_max", &r.cb_max),
        ("tau", &r.tau),
        ("eta", &r.eta),
        ("d1", &d[0]),
        ("d2", &d[1]),
        ("d3", &d[2]),
        ("D", &big_d),
    ];
    let mut out = String::new();
    if format == Format::Csv {
        let header: Vec<&str> = values.iter().map(|v| v.0).collect();
        let row: Vec<String> = values.iter().map(|v| v.1.to_string()).collect();
        let _ = writeln!(out, "{},argmax", header.join(","));
        let _ = writeln!(out, "{},{argmax}", row.join(","));
    } else {
        for (name, v) in values {
            let _ = writeln!(out, "{name:>7} = {v} ({:.9})", v.to_f64());
        }
        let _ = writeln!(out, " argmax = d{argmax}");
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_montecarlo(
    m: usize,
    samples: usize,
    seed: u64,
    params: &ParamArgs,
    sampler: SamplerArg,
    embedding: EmbeddingArg,
    max_voters: usize,
    format: Format,
) -> CliResult {
    if m < 2 {
        return Err(CliError::Domain(format!("--m must be at least 2, got {m}")));
    }
    if samples == 0 || max_voters == 0 {
        return Err(CliError::Domain("--samples and --max-voters must be positive".into()));
    }
    let fallback = if m == 2 { Params::copeland() } else { Params::canonical() };
    let p = resolve_params(params, None, fallback)?;
    let mut cfg = MonteCarloConfig::new(m, samples, seed, p.clone());
    cfg.sampler = match sampler {
        SamplerArg::Uniform => Sampler::Uniform,
        SamplerArg::NearTight => {
            if m != 2 {
                return Err(CliError::Domain("the near-tight sampler has two candidates; use --m 2".into()));
            }
            Sampler::NearTight
        }
    };
    cfg.embedding = match embedding {
        EmbeddingArg::Line => Embedding::Line,
        EmbeddingArg::Plane => Embedding::Plane,
        EmbeddingArg::Mixed => Embedding::Mixed,
    };
    cfg.max_voters = max_voters;
    let s = run_montecarlo(&cfg).map_err(compute)?;
    let mut out = String::new();
    if format == Format::Csv {
        out.push_str("m,samples,seed,lambda,w,max_distortion,argmax_sample\n");
        let _ = writeln!(out, "{m},{samples},{seed},{},{},{},{}", p.lambda, p.w, s.max, s.argmax_sample);
        return Ok(out);
    }
    let _ = writeln!(out, "m = {m}  samples = {samples}  seed = {seed}  lambda = {}  w = {}", p.lambda, p.w);
    let _ = writeln!(out, "max distortion = {} ({:.6}) at sample {}", s.max, s.max.to_f64(), s.argmax_sample);
    out.push_str("# argmax instance\n");
    let doc = InstanceDoc { params: Some(p), ..InstanceDoc::new(s.argmax_instance, Default::default()) };
    out.push_str(&write_instance(&doc).map_err(compute)?);
    Ok(out)
}

fn cmd_validate(path: &Path) -> CliResult {
    let doc = load(path)?;
    let violations = validate_metric(&doc.instance);
    if violations.is_empty() {
        return Ok(format!(
            "valid: {} candidates, {} voter blocks, total mass {}\n",
            doc.instance.num_candidates(),
            doc.instance.num_voters(),
            doc.instance.total_mass()
        ));
    }
    let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    Err(CliError::InvalidInstance(list.join("; ")))
}

fn dispatch(cli: Cli) -> CliResult {
    let format = cli.format;
    match cli.command {
        Command::Run { instance, params, policy, select } => cmd_run(&instance, &params, policy, select, format),
        Command::Oracle { instance, params, policy, reference } => {
            cmd_oracle(&instance, &params, policy, reference.as_deref(), format)
        }
        Command::Certify { case, r, min_r } => cmd_certify(&case, &r, min_r, format),
        Command::Bounds { example, params, heatmap, steps, lambda_range, w_range, no_optimum, at, out } => {
            let text =
                cmd_bounds(example, &params, heatmap, steps, &lambda_range, &w_range, no_optimum, at.as_deref(), format)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
        Command::Montecarlo { m, samples, seed, params, sampler, embedding, max_voters } => {
            cmd_montecarlo(m, samples, seed, &params, sampler, embedding, max_voters, format)
        }
        Command::Validate { instance } => cmd_validate(&instance),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs == 0 {
        eprintln!("error[E_PARSE]: --jobs must be at least 1");
        return ExitCode::from(1);
    }
    // A second initialization only happens in tests; the first pool wins.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    match dispatch(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (code, status) = e.code();
            eprintln!("error[{code}]: {}", e.message());
            ExitCode::from(status)
        }
    }
}

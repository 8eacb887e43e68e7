//! `netscope`: build, scramble and analyse digital nets from the command line.
//!
//! Exit status is 0 on success, 1 when the input fails validation (for
//! example coincident coordinates) and 2 on usage errors such as bad flags or
//! missing files.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use netscope::dependence::{analyze, h_via_decomposition, h_via_pdf, joint_pdf, nlod_witness, t_survival};
use netscope::digits::{default_precision, PointSet};
use netscope::fieldlinalg::GeneratingMatrices;
use netscope::netgen::{NetKind, NetSpec};
use netscope::quality::{count_pairs, QualityProfile};
use netscope::scramble::{affine_matrix_scramble, rebase, scramble, ScrambleSpec};
use netscope::tables::{quality_table, variance_table, TableConfig, DEFAULT_GFAURE_SEED};
use netscope::variance::{estimate_variance, monte_carlo_baseline, Integrand};

use output::{Format, Sink};

#[derive(Parser, Debug)]
#[command(name = "netscope", version, about = "Pair-dependence analysis of scrambled digital nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a point set and write it in the text point format.
    Generate(GenerateArgs),
    /// Randomize a point set with nested uniform or affine matrix scrambling.
    Scramble(ScrambleArgs),
    /// C values, β per level, C_max, c.q.e. and t.
    Quality(AnalysisArgs),
    /// Joint density ψ of a scrambled pair.
    Pdf(AnalysisArgs),
    /// H(x,y) and T(x,y) at a point, computed both ways.
    Hxy(HxyArgs),
    /// Arg-max k and excess when some C_b(k) exceeds one.
    Witness(AnalysisArgs),
    /// Replicated-scramble variance of the product test integrand.
    Variance(VarianceArgs),
    /// Regenerate one of the worked-example tables.
    Tables(TablesArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Faure,
    Gfaure,
    SobolUnit,
    FromFile,
}

#[derive(Args, Debug)]
struct ConstructionArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Construction base (Sobol' is always 2).
    #[arg(long)]
    base: Option<u32>,
    /// Dimension of the full construction.
    #[arg(long)]
    s: Option<usize>,
    /// Net of b^m points.
    #[arg(long, conflicts_with = "n")]
    m: Option<u32>,
    /// First n points of the sequence.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// 1-based coordinates to keep, e.g. `27,28`.
    #[arg(long, value_delimiter = ',')]
    coords: Option<Vec<usize>>,
    #[arg(long)]
    matrix_file: Option<PathBuf>,
    /// Output digits per coordinate.
    #[arg(long)]
    precision: Option<usize>,
}

impl ConstructionArgs {
    fn spec(&self) -> NetSpec {
        NetSpec {
            kind: match self.kind {
                Kind::Faure => NetKind::Faure,
                Kind::Gfaure => NetKind::Gfaure,
                Kind::SobolUnit => NetKind::SobolUnit,
                Kind::FromFile => NetKind::FromFile,
            },
            base: self.base,
            s: self.s,
            m: self.m,
            n: self.n,
            seed: self.seed,
            coords: self.coords.clone(),
            matrix_file: self.matrix_file.as_ref().map(|p| p.display().to_string()),
            precision: self.precision,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    construction: ConstructionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Nested,
    Affine,
}

#[derive(Args, Debug)]
struct ScrambleArgs {
    /// Point file to scramble (nested method).
    #[arg(long = "in", required_unless_present = "matrix_file")]
    input: Option<PathBuf>,
    /// Generating matrices to scramble (affine method).
    #[arg(long)]
    matrix_file: Option<PathBuf>,
    /// With --matrix-file: net of b^m points.
    #[arg(long, conflicts_with = "n")]
    m: Option<u32>,
    /// With --matrix-file: first n points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum, default_value = "nested")]
    method: Method,
    /// Scrambling base; defaults to the point set's base.
    #[arg(long)]
    base: Option<u32>,
    /// Randomized digits per coordinate.
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalysisArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Counting base; points are re-expanded when it differs from theirs.
    #[arg(long)]
    base: u32,
    /// Digits kept when re-expanding.
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Full rationals instead of 2-place decimals in CSV output.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HxyArgs {
    #[command(flatten)]
    analysis: AnalysisArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    y: Vec<f64>,
}

#[derive(Args, Debug)]
struct VarianceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Scrambling base.
    #[arg(long)]
    base: Option<u32>,
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, default_value_t = 25)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Integrand parameter c in ∏ (1 + c (u_j - 1/2)).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Also run the Monte Carlo baseline at the same n.
    #[arg(long)]
    monte_carlo: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TablesArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    which: u8,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = DEFAULT_GFAURE_SEED)]
    gfaure_seed: u64,
    /// Two-coordinate base-2 matrices for the first example's top set.
    #[arg(long)]
    fig1_top: Option<PathBuf>,
    #[arg(long)]
    fig1_bottom: Option<PathBuf>,
    /// Two-coordinate base-2 matrices for the third example's Sobol' set.
    #[arg(long)]
    fig3_sobol: Option<PathBuf>,
    /// Table 5 only.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 25)]
    replicates: usize,
    #[arg(long, default_value_t = 2021)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Errors that are the caller's fault rather than the data's.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn load_points(path: &PathBuf) -> anyhow::Result<PointSet> {
    if !path.exists() {
        return Err(Usage(format!("no such file: {}", path.display())).into());
    }
    PointSet::load(path).with_context(|| format!("reading {}", path.display()))
}

fn load_matrices(path: &PathBuf) -> anyhow::Result<GeneratingMatrices> {
    if !path.exists() {
        return Err(Usage(format!("no such file: {}", path.display())).into());
    }
    GeneratingMatrices::load(path).with_context(|| format!("reading {}", path.display()))
}

fn in_base(ps: PointSet, base: u32, precision: Option<usize>) -> anyhow::Result<PointSet> {
    let p = precision.unwrap_or_else(|| default_precision(base));
    if ps.base() == base && precision.is_none() {
        return Ok(ps);
    }
    Ok(rebase(&ps, base, p)?)
}

fn counts_for(a: &AnalysisArgs) -> anyhow::Result<(PointSet, netscope::quality::PairCounts)> {
    let ps = in_base(load_points(&a.input)?, a.base, a.precision)?;
    let counts = count_pairs(&ps, a.base)?;
    Ok((ps, counts))
}

fn run(cli: Cli, sink: &Sink) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(g) => {
            let spec = g.construction.spec();
            if let Some(path) = &g.construction.matrix_file {
                if !path.exists() {
                    return Err(Usage(format!("no such file: {}", path.display())).into());
                }
            }
            let ps = spec.build()?;
            sink.points(&ps, g.out.as_deref(), g.construction.seed)
        }
        Command::Scramble(a) => {
            let ps = match (&a.input, &a.matrix_file, a.method) {
                (Some(input), None, Method::Nested) => {
                    let ps = load_points(input)?;
                    let spec = ScrambleSpec { depth: a.precision, ..ScrambleSpec::nested(a.base.unwrap_or(ps.base()), a.seed) };
                    scramble(&ps, &spec)?
                }
                (None, Some(mf), Method::Affine) => {
                    let mats = load_matrices(mf)?;
                    let spec = ScrambleSpec { depth: a.precision, ..ScrambleSpec::affine(a.base.unwrap_or(mats.base()), a.seed) };
                    let sc = affine_matrix_scramble(&mats, &spec)?;
                    match (a.m, a.n) {
                        (Some(m), None) => sc.net(m)?,
                        (None, Some(n)) => sc.prefix(n)?,
                        _ => bail!(Usage("affine scrambling needs --m or --n".into())),
                    }
                }
                (Some(_), _, Method::Affine) => {
                    bail!(Usage("affine scrambling acts on generating matrices; pass --matrix-file".into()))
                }
                _ => bail!(Usage("nested scrambling needs --in".into())),
            };
            sink.points(&ps, a.out.as_deref(), Some(a.seed))
        }
        Command::Quality(a) => {
            let (_, counts) = counts_for(&a)?;
            let profile = QualityProfile::from_counts(&counts);
            match a.format {
                Format::Json => sink.json(&profile, a.out.as_deref(), None),
                Format::Csv => sink.csv(&output::profile_csv(&profile, a.exact), a.out.as_deref(), None),
            }
        }
        Command::Pdf(a) => {
            let (_, counts) = counts_for(&a)?;
            let pdf = joint_pdf(&counts);
            match a.format {
                Format::Json => sink.json(&pdf, a.out.as_deref(), None),
                Format::Csv => sink.csv(&output::pdf_csv(&pdf, &counts, a.exact), a.out.as_deref(), None),
            }
        }
        Command::Hxy(h) => {
            let a = &h.analysis;
            let (ps, counts) = counts_for(a)?;
            if h.x.len() != ps.dim() || h.y.len() != ps.dim() {
                bail!(Usage(format!("--x and --y need {} values each", ps.dim())));
            }
            let profile = QualityProfile::from_counts(&counts);
            let pdf = joint_pdf(&counts);
            let report = serde_json::json!({
                "x": h.x,
                "y": h.y,
                "h_pdf": h_via_pdf(&pdf, &h.x, &h.y)?,
                "h_decomposition": h_via_decomposition(&profile, &h.x, &h.y)?,
                "t_survival": t_survival(&pdf, &h.x, &h.y)?,
                "product": h.x.iter().chain(&h.y).product::<f64>(),
                "analysis": analyze(&profile, &pdf, &[(h.x.clone(), h.y.clone())])?,
            });
            match a.format {
                Format::Json => sink.json(&report, a.out.as_deref(), None),
                Format::Csv => {
                    let csv = format!(
                        "h_pdf,h_decomposition,t_survival,product\n{},{},{},{}\n",
                        report["h_pdf"], report["h_decomposition"], report["t_survival"], report["product"]
                    );
                    sink.csv(&csv, a.out.as_deref(), None)
                }
            }
        }
        Command::Witness(a) => {
            let (_, counts) = counts_for(&a)?;
            let profile = QualityProfile::from_counts(&counts);
            let w = nlod_witness(&profile);
            match a.format {
                Format::Json => sink.json(&serde_json::json!({ "cqe": profile.cqe, "witness": w }), a.out.as_deref(), None),
                Format::Csv => {
                    let csv = match &w {
                        Some(w) => format!("k,C,H,excess\n\"{}\",{},{},{}\n", w.k, w.c, w.h, w.excess),
                        None => "k,C,H,excess\n".to_string(),
                    };
                    sink.csv(&csv, a.out.as_deref(), None)
                }
            }
        }
        Command::Variance(v) => {
            let ps = load_points(&v.input)?;
            let b = v.base.unwrap_or(ps.base());
            let f = Integrand::product_linear(v.c, ps.dim());
            let spec = ScrambleSpec { depth: v.precision, ..ScrambleSpec::nested(b, v.seed) };
            let rep = estimate_variance(&ps, &spec, &f, v.replicates)?;
            let mc = if v.monte_carlo {
                Some(monte_carlo_baseline(&f, ps.dim(), ps.len(), v.replicates, v.seed)?)
            } else {
                None
            };
            match v.format {
                Format::Json => sink.json(&serde_json::json!({ "scrambled": rep, "monte_carlo": mc }), v.out.as_deref(), Some(v.seed)),
                Format::Csv => {
                    let mut csv = String::from("estimator,n,replicates,mean,variance,covariance\n");
                    for r in std::iter::once(&rep).chain(mc.as_ref()) {
                        csv.push_str(&format!(
                            "\"{}\",{},{},{},{:e},{}\n",
                            r.estimator.replace('"', "\"\""),
                            r.n,
                            r.replicates,
                            r.mean,
                            r.variance,
                            r.covariance.map_or(String::new(), |c| format!("{c:e}"))
                        ));
                    }
                    sink.csv(&csv, v.out.as_deref(), Some(v.seed))
                }
            }
        }
        Command::Tables(t) => {
            let cfg = TableConfig {
                gfaure_seed: t.gfaure_seed,
                fig1_top: t.fig1_top.as_ref().map(load_matrices).transpose()?,
                fig1_bottom: t.fig1_bottom.as_ref().map(load_matrices).transpose()?,
                fig3_sobol: t.fig3_sobol.as_ref().map(load_matrices).transpose()?,
            };
            if t.which == 5 {
                let table = variance_table(&cfg, t.c, t.replicates, t.seed)?;
                match t.format {
                    Format::Json => sink.json(&table, t.out.as_deref(), Some(t.seed)),
                    Format::Csv => sink.csv(&table.to_csv(), t.out.as_deref(), Some(t.seed)),
                }
            } else {
                let table = quality_table(t.which, &cfg)?;
                match t.format {
                    Format::Json => sink.json(&table, t.out.as_deref(), Some(t.gfaure_seed)),
                    Format::Csv => sink.csv(&table.to_csv(t.exact), t.out.as_deref(), Some(t.gfaure_seed)),
                }
            }
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("NETSCOPE_THREADS") {
        let n: usize = v.parse().map_err(|_| anyhow!(Usage(format!("NETSCOPE_THREADS must be a count, got {v:?}"))))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    match err.downcast_ref::<netscope::Error>() {
        Some(netscope::Error::InvalidArgument(_)) | Some(netscope::Error::Io(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let invocation: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let sink = Sink::new(invocation);
    match configure_threads().and_then(|_| run(cli, &sink)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

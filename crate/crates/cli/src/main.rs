use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use lpac::ac::{solve_ac, SolverOptions};
use lpac::capacitor::{default_mip_options, make_ieee57c, place, CppInstance};
use lpac::case_io::report::{
    accuracy_table, cpp_table, cumulative_table, study_table, Cell, StudyField, Table,
};
use lpac::case_io::{benchmark_file, parse_case, Format};
use lpac::evaluation::{compare_with, cumulative_errors, FlowSides};
use lpac::lp::write_lp_file;
use lpac::models::{add_constraints, build, Ablation, ExtraConstraints, LpacModel, ModelSpec};
use lpac::restoration::{run_study, GenerationCap, RestorationOptions, Variant};
use lpac::PowerNetwork;

#[derive(Parser, Debug)]
#[command(name = "lpac", version, about = "Linear AC power flow approximations")]
struct Cli {
    /// Benchmark name (ieee14, ieee30, ...) or path to a MATPOWER case file.
    #[arg(long, global = true)]
    case: Option<String>,
    /// Directory searched for benchmark case files.
    #[arg(
        long,
        env = "LPAC_CASE_DIR",
        default_value = "data/cases",
        global = true
    )]
    case_dir: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv, global = true)]
    format: OutFormat,
    /// Newton-Raphson mismatch tolerance, p.u.
    #[arg(long, default_value_t = 1e-8, global = true)]
    tolerance: f64,
    #[arg(long, default_value_t = 50, global = true)]
    max_iterations: usize,
    /// Piecewise-linear cosine segments.
    #[arg(long, default_value_t = 20, global = true)]
    segments: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the AC power flow.
    Acpf,
    /// Solve one linear model.
    Lpac(ModelArgs),
    /// Accuracy of linear models against the AC solution.
    Compare {
        /// Comma-separated: ldc, hot, warm, cold, cold-c, cold-g, cold-gc.
        #[arg(long, value_delimiter = ',', default_value = "ldc,cold,warm")]
        models: Vec<String>,
        /// Compare flows at both line ends.
        #[arg(long)]
        both_sides: bool,
        /// Report cumulative bus and voltage-difference errors instead.
        #[arg(long)]
        cumulative: bool,
    },
    /// Restoration study over sampled line outages.
    Restore {
        /// Outage counts, e.g. `3..20` or `3,5,8`.
        #[arg(long, default_value = "3..20")]
        classes: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Comma-separated subset of ldc, lpac, lpac-r, lpac-r-v.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "ldc,lpac,lpac-r,lpac-r-v"
        )]
        variants: Vec<String>,
        /// Cap generation at Pmax instead of the dispatched output.
        #[arg(long)]
        capacity: bool,
        /// Also write the load shedding table here.
        #[arg(long)]
        shed_output: Option<PathBuf>,
    },
    /// Capacitor placement over a sweep of voltage floors.
    Capplace {
        /// Apply the IEEE57-C transformation first.
        #[arg(long)]
        make_c: bool,
        /// Capacitor size, MVar.
        #[arg(long, default_value_t = 30.0)]
        qc: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        vmin: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        node_limit: u64,
        /// Leave the timing column empty so output is byte-reproducible.
        #[arg(long)]
        no_time: bool,
    },
    /// Write a linear model in LP format.
    ExportLp(ModelArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = Kind::Cold)]
    kind: Kind,
    /// Cold-start ablation.
    #[arg(long, value_enum)]
    variant: Option<AblationArg>,
    #[arg(long)]
    vmin: Option<f64>,
    #[arg(long)]
    vmax: Option<f64>,
    /// Cap generator reactive output at the case limits.
    #[arg(long)]
    qmax: bool,
    /// Thermal limit polygon sides.
    #[arg(long)]
    thermal: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq)]
enum Kind {
    Ldc,
    Hot,
    Warm,
    Cold,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
#[value(rename_all = "lower")]
enum AblationArg {
    C,
    G,
    Gc,
}

/// Exit status of a command that ran to completion.
enum Outcome {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn header(cli: &Cli, extra: &str) {
    let cmd = match &cli.command {
        Command::Acpf => "acpf",
        Command::Lpac(_) => "lpac",
        Command::Compare { .. } => "compare",
        Command::Restore { .. } => "restore",
        Command::Capplace { .. } => "capplace",
        Command::ExportLp(_) => "export-lp",
    };
    eprintln!(
        "# lpac {} {cmd} case={} cs={} tol={:e} max_iter={}{extra}",
        env!("CARGO_PKG_VERSION"),
        cli.case.as_deref().unwrap_or("-"),
        cli.segments,
        cli.tolerance,
        cli.max_iterations,
    );
}

fn load_case(cli: &Cli) -> Result<(String, PowerNetwork)> {
    let name = cli
        .case
        .as_deref()
        .ok_or_else(|| anyhow!("--case is required"))?;
    let path = match benchmark_file(name) {
        Some(stem) => cli.case_dir.join(format!("{stem}.m")),
        None => {
            let direct = PathBuf::from(name);
            if direct.exists() {
                direct
            } else {
                cli.case_dir.join(format!("{name}.m"))
            }
        }
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let net = parse_case(&text).with_context(|| format!("parsing {}", path.display()))?;
    let label = Path::new(name)
        .file_stem()
        .map_or(name.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((label, net))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(out.flush()?)
        }
    }
}

fn ac_options(cli: &Cli) -> SolverOptions {
    SolverOptions {
        tolerance: cli.tolerance,
        max_iterations: cli.max_iterations,
        ..Default::default()
    }
}

fn parse_classes(s: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().context("class range start")?;
        let b: usize = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .context("class range end")?;
        if a > b {
            bail!("empty class range {s}");
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().with_context(|| format!("class `{t}`")))
        .collect()
}

fn model_spec(
    cli: &Cli,
    net: &PowerNetwork,
    kind: Kind,
    variant: Option<AblationArg>,
) -> Result<ModelSpec> {
    let needs_ac = matches!(kind, Kind::Hot | Kind::Warm);
    let vm = if needs_ac {
        let ac = solve_ac(net, &ac_options(cli));
        if !ac.converged {
            bail!("AC solution needed for the {kind:?} model did not converge");
        }
        ac.vm
    } else {
        Vec::new()
    };
    let spec = match kind {
        Kind::Ldc => ModelSpec::ldc(),
        Kind::Hot => ModelSpec::hot(vm),
        Kind::Warm => ModelSpec::warm(vm),
        Kind::Cold => ModelSpec::cold(),
    }
    .segments(cli.segments);
    Ok(match variant {
        None => spec,
        Some(v) => spec.with_variant(match v {
            AblationArg::C => Ablation::C,
            AblationArg::G => Ablation::G,
            AblationArg::Gc => Ablation::GC,
        })?,
    })
}

fn build_model(cli: &Cli, net: &PowerNetwork, args: &ModelArgs) -> Result<LpacModel> {
    let spec = model_spec(cli, net, args.kind, args.variant)?;
    let mut model = build(net, &spec)?;
    let extra = ExtraConstraints {
        v_min: args.vmin,
        v_max: args.vmax,
        q_max: args.qmax,
        thermal: args.thermal,
    };
    add_constraints(net, &mut model, &extra)?;
    Ok(model)
}

fn parse_model(name: &str) -> Result<(Kind, Option<AblationArg>)> {
    let (kind, variant) = match name.split_once('-') {
        Some((k, v)) => (k, Some(v)),
        None => (name, None),
    };
    let kind = Kind::from_str(kind, true).map_err(|_| anyhow!("unknown model `{name}`"))?;
    let variant = variant
        .map(|v| AblationArg::from_str(v, true).map_err(|_| anyhow!("unknown model `{name}`")))
        .transpose()?;
    Ok((kind, variant))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let format = Format::from(cli.format);
    match &cli.command {
        Command::Acpf => {
            header(cli, "");
            let (_, net) = load_case(cli)?;
            let ac = solve_ac(&net, &ac_options(cli));
            let mut t = Table::new(["bus", "vm_pu", "va_deg", "p_mw", "q_mvar"]);
            for (i, b) in net.buses().iter().enumerate() {
                t.push(vec![
                    Cell::Int(b.id as u64),
                    Cell::Num(ac.vm[i]),
                    Cell::Num(ac.va[i].to_degrees()),
                    Cell::Num(ac.p[i] * net.base_mva()),
                    Cell::Num(ac.q[i] * net.base_mva()),
                ]);
            }
            emit(cli.output.as_deref(), &t.render(format))?;
            if !ac.converged {
                eprintln!(
                    "AC power flow did not converge: {}",
                    ac.diagnostic.unwrap_or_default()
                );
                return Ok(Outcome::Failed);
            }
            eprintln!("converged in {} iterations", ac.iterations);
            Ok(Outcome::Ok)
        }
        Command::Lpac(args) => {
            header(cli, &format!(" kind={:?}", args.kind).to_lowercase());
            let (_, net) = load_case(cli)?;
            let model = build_model(cli, &net, args)?;
            let sol = match model.solve() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(Outcome::Failed);
                }
            };
            let mut t = Table::new(["bus", "vm_pu", "va_deg", "p_mw", "q_mvar"]);
            for (i, b) in net.buses().iter().enumerate() {
                t.push(vec![
                    Cell::Int(b.id as u64),
                    Cell::Num(sol.vm[i]),
                    Cell::Num(sol.theta[i].to_degrees()),
                    Cell::Num(sol.p[i] * net.base_mva()),
                    if sol.reactive {
                        Cell::Num(sol.q[i] * net.base_mva())
                    } else {
                        Cell::Empty
                    },
                ]);
            }
            emit(cli.output.as_deref(), &t.render(format))?;
            Ok(Outcome::Ok)
        }
        Command::Compare {
            models,
            both_sides,
            cumulative,
        } => {
            header(cli, &format!(" models={}", models.join(",")));
            let (label, net) = load_case(cli)?;
            let ac = solve_ac(&net, &ac_options(cli));
            if !ac.converged {
                eprintln!("AC reference did not converge");
                return Ok(Outcome::Failed);
            }
            let sides = if *both_sides {
                FlowSides::Both
            } else {
                FlowSides::Forward
            };
            let mut reports = Vec::new();
            let mut cumul = Vec::new();
            let mut failed = false;
            for name in models {
                let (kind, variant) = parse_model(name)?;
                let spec = model_spec(cli, &net, kind, variant)?;
                let lin = match build(&net, &spec)?.solve() {
                    Ok(l) => l,
                    Err(e) => {
                        eprintln!("{name}: {e}");
                        failed = true;
                        continue;
                    }
                };
                if *cumulative {
                    cumul.push((
                        label.clone(),
                        spec.label(),
                        cumulative_errors(&net, &ac, &lin)?,
                    ));
                } else {
                    let mut r = compare_with(&label, &net, &ac, &lin, sides)?;
                    r.model = spec.label();
                    reports.push(r);
                }
            }
            let table = if *cumulative {
                cumulative_table(&cumul)
            } else {
                accuracy_table(&reports)
            };
            emit(cli.output.as_deref(), &table.render(format))?;
            Ok(if failed { Outcome::Failed } else { Outcome::Ok })
        }
        Command::Restore {
            classes,
            samples,
            seed,
            variants,
            capacity,
            shed_output,
        } => {
            header(
                cli,
                &format!(" seed={seed} samples={samples} classes={classes}"),
            );
            let (_, net) = load_case(cli)?;
            let classes = parse_classes(classes)?;
            let variants = variants
                .iter()
                .map(|v| Variant::parse(v).ok_or_else(|| anyhow!("unknown variant `{v}`")))
                .collect::<Result<Vec<_>>>()?;
            let opts = RestorationOptions {
                generation_cap: if *capacity {
                    GenerationCap::Capacity
                } else {
                    GenerationCap::Dispatch
                },
                segments: cli.segments,
                ac: ac_options(cli),
                ..Default::default()
            };
            let table = run_study(&net, &classes, *samples, *seed, &variants, &opts)?;
            let conv = study_table(&table, StudyField::Converged).render(format);
            let shed = study_table(&table, StudyField::Shed).render(format);
            match (cli.output.as_deref(), shed_output.as_deref()) {
                (None, None) => emit(None, &format!("{conv}\n{shed}"))?,
                (out, shed_path) => {
                    emit(out, &conv)?;
                    if let Some(p) = shed_path {
                        emit(Some(p), &shed)?;
                    } else {
                        emit(None, &shed)?;
                    }
                }
            }
            let lp_failures: usize = table.rows.iter().map(|r| r.lp_failures).sum();
            if lp_failures > 0 {
                eprintln!("{lp_failures} linear models had no optimal solution");
                return Ok(Outcome::Failed);
            }
            Ok(Outcome::Ok)
        }
        Command::Capplace {
            make_c,
            qc,
            vmin,
            node_limit,
            no_time,
        } => {
            header(cli, &format!(" qc={qc} make_c={make_c}"));
            let (_, mut net) = load_case(cli)?;
            if *make_c {
                net = make_ieee57c(&net)?;
            }
            let mip = lpac::lp::MipOptions {
                node_limit: *node_limit,
                ..default_mip_options()
            };
            let ac = ac_options(cli);
            let mut rows = Vec::new();
            for &v in vmin {
                let r = CppInstance::new(net.clone(), *qc, v).and_then(|mut inst| {
                    inst.segments = cli.segments;
                    place(&inst, &mip, &ac)
                });
                rows.push((v, r));
            }
            let failed = rows.iter().any(|(_, r)| match r {
                Ok(s) => s.verification.as_ref().is_some_and(|v| !v.converged),
                Err(_) => true,
            });
            let mut table = cpp_table(&rows);
            if *no_time {
                let col = table.header.iter().position(|h| h == "time_s").unwrap();
                for row in &mut table.rows {
                    row[col] = Cell::Empty;
                }
            }
            emit(cli.output.as_deref(), &table.render(format))?;
            Ok(if failed { Outcome::Failed } else { Outcome::Ok })
        }
        Command::ExportLp(args) => {
            header(cli, &format!(" kind={:?}", args.kind).to_lowercase());
            let (_, net) = load_case(cli)?;
            let model = build_model(cli, &net, args)?;
            emit(cli.output.as_deref(), &write_lp_file(&model.lp))?;
            Ok(Outcome::Ok)
        }
    }
}

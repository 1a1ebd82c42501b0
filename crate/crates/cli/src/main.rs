use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aztec_core::asymptotics::{self, BiasParameter, NormalizedPoint, DEFAULT_SINGULAR_RADIUS};
use aztec_core::exact::{self, rational_string, BiasValue, LatticeLocation};
use aztec_core::geometry::{region_from_text, Tiling};
use aztec_core::oracle::{self, StatisticsOptions, DEFAULT_SQUARE_CAP};
use aztec_core::render::{render_svg, RenderOptions};
use aztec_core::shuffle::{sample_biased, RandomSeed};
use aztec_core::stats::{self, fmt12, RegionMask};
use aztec_core::verify::{self, Suite, VerifyOptions};
use aztec_core::{Error, VERSION};
use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0} acceptance criteria failed")]
    Failed(usize),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::Domain(_) | Error::Parse { .. } | Error::Infeasible { .. }) => 3,
            CliError::Core(Error::Resource(_)) => 4,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "aztec", version, about = "Random domino tilings of Aztec diamonds")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "AZTEC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact placement probabilities.
    Exact(ExactArgs),
    /// Limit-shape formulas at a normalized point.
    Asym(AsymArgs),
    /// Sample tilings by domino shuffling.
    Sample(SampleArgs),
    /// Draw a tiling file as SVG.
    Render(RenderArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
    /// Exhaustive enumeration statistics of a small region.
    Oracle(OracleArgs),
    /// Monte Carlo reports as CSV.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("what").args(["at", "grid"])))]
struct ExactArgs {
    #[arg(long)]
    order: i64,
    #[arg(long)]
    bias: Option<String>,
    /// A single location `L,M`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    at: Option<(i64, i64)>,
    /// Every location (the default).
    #[arg(long)]
    grid: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("what").args(["all_directions", "height", "tilt", "level"])))]
struct AsymArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, allow_hyphen_values = true)]
    y: f64,
    #[arg(long)]
    bias: Option<String>,
    /// The four class probabilities N,E,S,W.
    #[arg(long)]
    all_directions: bool,
    /// Limiting normalized height.
    #[arg(long)]
    height: bool,
    /// Tilt `s,t` of the limiting height.
    #[arg(long)]
    tilt: bool,
    /// Points of the level curve with this value (x and y are ignored).
    #[arg(long)]
    level: Option<f64>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    order: i64,
    #[arg(long)]
    bias: Option<String>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output file, or a directory when `--count` exceeds one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("overlay").args(["polar", "heights", "levels"])))]
struct RenderArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    polar: bool,
    #[arg(long)]
    heights: bool,
    #[arg(long)]
    levels: bool,
    /// Bias the tiling was sampled with; selects the ellipse overlay.
    #[arg(long)]
    bias: Option<String>,
    /// Pixels per lattice unit.
    #[arg(long, default_value_t = 12.0)]
    scale: f64,
    /// Four comma-separated colours for N,E,S,W.
    #[arg(long)]
    palette: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    /// Reduced orders and sample counts.
    #[arg(long)]
    quick: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    region: PathBuf,
    #[arg(long)]
    bias: Option<String>,
    /// Largest region, in squares, the enumerator accepts.
    #[arg(long, default_value_t = DEFAULT_SQUARE_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("report").args(["arctic", "variance", "convergence"])))]
struct StatsArgs {
    #[arg(long)]
    order: i64,
    #[arg(long)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    bias: Option<String>,
    /// Frontier deviation per sample.
    #[arg(long)]
    arctic: bool,
    /// Height concentration at vertex `X,Y`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    variance: Option<(i64, i64)>,
    /// Exact-versus-limit table for orders N/4, N/2, N (no sampling).
    #[arg(long)]
    convergence: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'A,B', got '{s}'"))?;
    let p = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("'{t}': {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_bias(s: &Option<String>) -> CliResult<BiasValue> {
    Ok(match s {
        Some(s) => BiasValue::parse(s)?,
        None => BiasValue::half(),
    })
}

fn positive_order(n: i64) -> CliResult<()> {
    if n < 1 {
        return Err(Error::Domain(format!("--order must be at least 1, got {n}")).into());
    }
    Ok(())
}

fn header() -> String {
    format!("# {VERSION}\n")
}

fn emit(out: &Option<PathBuf>, body: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, body)?,
        None => io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn exact_cmd(a: ExactArgs) -> CliResult<()> {
    positive_order(a.order)?;
    let bias = parse_bias(&a.bias)?;
    let grid = if bias.is_half() {
        exact::placement_grid(a.order)
    } else {
        exact::biased_placement_grid(a.order, &bias)
    };
    let mut body = header();
    body.push_str("ell,m,probability,value\n");
    let mut row = |loc: LatticeLocation| {
        let q = grid.get(loc.ell, loc.m);
        body.push_str(&format!(
            "{},{},{},{}\n",
            loc.ell,
            loc.m,
            rational_string(&q),
            fmt12(grid.get_f64(loc.ell, loc.m))
        ));
    };
    match a.at {
        Some((ell, m)) => {
            let loc = LatticeLocation::new(ell, m, a.order);
            if !loc.is_occupiable() {
                return Err(Error::Domain(format!("{loc} carries no north-going space")).into());
            }
            row(loc);
        }
        None => LatticeLocation::all(a.order).for_each(row),
    }
    emit(&a.out, &body)
}

fn asym_cmd(a: AsymArgs) -> CliResult<()> {
    let mut body = header();
    if let Some(level) = a.level {
        let curve = asymptotics::level_curve(level)?;
        body.push_str("x,y\n");
        for p in curve.level_points(64) {
            body.push_str(&format!("{},{}\n", fmt12(p.x), fmt12(p.y)));
        }
        return emit(&None, &body);
    }
    let pt = NormalizedPoint::new(a.x, a.y)?;
    let bias = a
        .bias
        .as_ref()
        .map(|s| BiasValue::parse(s).and_then(|b| BiasParameter::new(b.to_f64())))
        .transpose()?;
    if a.all_directions {
        let v = match bias {
            Some(b) => asymptotics::biased_directional_placements(pt, b),
            None => asymptotics::directional_placements(pt),
        };
        body.push_str("N,E,S,W\n");
        body.push_str(&v.map(fmt12).join(","));
        body.push('\n');
    } else if a.height || a.tilt {
        if bias.is_some() {
            return Err(CliError::Usage(
                "--height and --tilt describe the uniform limit only".into(),
            ));
        }
        if a.height {
            body.push_str(&format!("{}\n", fmt12(asymptotics::average_height(pt))));
        } else {
            let t = asymptotics::height_tilt(pt);
            body.push_str(&format!("s,t\n{},{}\n", fmt12(t.s), fmt12(t.t)));
        }
    } else {
        let f = asymptotics::biased_arctan_placement_flagged(
            pt,
            bias.unwrap_or(BiasParameter::new(0.5)?),
            DEFAULT_SINGULAR_RADIUS,
        );
        if f.near_singular {
            eprintln!("warning: ({}, {}) is close to a singular point of the limit", a.x, a.y);
        }
        body.push_str(&format!("{}\n", fmt12(f.value)));
    }
    emit(&None, &body)
}

fn sample_cmd(a: SampleArgs) -> CliResult<()> {
    positive_order(a.order)?;
    let bias = parse_bias(&a.bias)?;
    if a.count == 0 {
        return Err(Error::Domain("--count must be at least 1".into()).into());
    }
    let seed = RandomSeed(a.seed);
    if a.count == 1 {
        let t = sample_biased(a.order, &bias, seed)?;
        return emit(&a.out, &t.to_text());
    }
    let dir = a
        .out
        .ok_or_else(|| CliError::Usage("--out DIR is required when --count exceeds one".into()))?;
    fs::create_dir_all(&dir)?;
    for k in 0..a.count {
        let t = sample_biased(a.order, &bias, seed.derive(k))?;
        fs::write(dir.join(format!("tiling-{k:05}.txt")), t.to_text())?;
    }
    Ok(())
}

fn read_tiling(path: &Path) -> CliResult<Tiling> {
    Ok(Tiling::from_text(&fs::read_to_string(path)?)?)
}

fn render_cmd(a: RenderArgs) -> CliResult<()> {
    if !(a.scale > 0.0 && a.scale.is_finite()) {
        return Err(Error::Domain(format!("--scale must be positive, got {}", a.scale)).into());
    }
    let mut opts = RenderOptions {
        scale: a.scale,
        polar: a.polar,
        heights: a.heights,
        levels: a.levels,
        bias: a
            .bias
            .as_ref()
            .map(|s| BiasValue::parse(s))
            .transpose()?
            .map(|b| b.to_f64()),
        ..Default::default()
    };
    if let Some(p) = &a.palette {
        let colours: Vec<String> = p.split(',').map(|c| c.trim().to_string()).collect();
        opts.palette = colours
            .try_into()
            .map_err(|_| CliError::Usage("--palette needs exactly four colours".into()))?;
    }
    let t = read_tiling(&a.input)?;
    fs::write(&a.out, render_svg(&t, &opts)?)?;
    Ok(())
}

fn verify_cmd(a: VerifyArgs) -> CliResult<()> {
    let suite: Suite = a.suite.parse().map_err(|e: Error| CliError::Usage(e.to_string()))?;
    println!("# {VERSION}");
    let mut failed = 0;
    for id in suite.criteria() {
        let r = verify::run_criterion(id, VerifyOptions { quick: a.quick });
        println!("{r}");
        failed += usize::from(!r.pass);
    }
    if failed > 0 {
        return Err(CliError::Failed(failed));
    }
    Ok(())
}

fn oracle_cmd(a: OracleArgs) -> CliResult<()> {
    let bias = a.bias.as_ref().map(|s| BiasValue::parse(s)).transpose()?;
    let region = region_from_text(&fs::read_to_string(&a.region)?)?;
    let st = oracle::exact_statistics_with(
        &region,
        bias.as_ref(),
        &StatisticsOptions {
            cap: a.cap,
            pairs: false,
        },
    )?;
    let mut body = header().into_bytes();
    st.write_csv(&mut body)?;
    emit(&a.out, &String::from_utf8_lossy(&body))
}

fn stats_cmd(a: StatsArgs) -> CliResult<()> {
    positive_order(a.order)?;
    let bias = parse_bias(&a.bias)?;
    if a.samples == 0 && !a.convergence {
        return Err(Error::Domain("--samples must be at least 1".into()).into());
    }
    let seed = RandomSeed(a.seed);
    let mut body = header().into_bytes();
    if a.arctic {
        let d = stats::arctic_deviations(a.order, &bias, a.samples, seed)?;
        stats::write_arctic_csv(&d, &mut body)?;
    } else if let Some((x, y)) = a.variance {
        if !bias.is_half() {
            return Err(CliError::Usage(
                "--variance is defined for the uniform distribution".into(),
            ));
        }
        let r = stats::height_concentration(a.order, (x as i32, y as i32), a.samples, seed)?;
        writeln!(body, "vx,vy,m,samples,mean,variance,bound,c,tail,tail_bound")?;
        for t in &r.tails {
            writeln!(
                body,
                "{},{},{},{},{},{},{},{},{},{}",
                x,
                y,
                r.m,
                r.samples,
                fmt12(r.mean),
                fmt12(r.sample_variance),
                fmt12(r.bound),
                t.c,
                fmt12(t.frequency),
                fmt12(t.bound)
            )?;
        }
    } else if a.convergence {
        let orders: Vec<i64> = [a.order / 4, a.order / 2, a.order]
            .into_iter()
            .filter(|n| *n >= 1)
            .collect();
        let b = (!bias.is_half()).then_some(&bias);
        let rows = stats::convergence_report(&orders, RegionMask::default(), b)?;
        stats::write_convergence_csv(&rows, &mut body)?;
    } else {
        let g = stats::empirical_placement(a.order, &bias, a.samples, seed)?;
        let grid = if bias.is_half() {
            exact::placement_grid(a.order)
        } else {
            exact::biased_placement_grid(a.order, &bias)
        };
        let rows = stats::compare_with_exact(&g.north(), g.samples, &grid);
        stats::write_placement_csv(&rows, &mut body)?;
    }
    emit(&a.out, &String::from_utf8_lossy(&body))
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Exact(a) => exact_cmd(a),
        Command::Asym(a) => asym_cmd(a),
        Command::Sample(a) => sample_cmd(a),
        Command::Render(a) => render_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Stats(a) => stats_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aztec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! Command-line front end: crossing verdicts for cells and regions,
//! curve recognition from point clouds, oracle cross-checks, and point
//! sampling.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 tied recognition peak,
//! 4 empty point set, 5 oracle contradiction.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crosscert::bounds::definitely_greater;
use crosscert::report::{
    accumulator_csv, detection_json, fmt_f64, json_escape, parse_points_csv, points_csv,
    verdict_grid_csv, verdict_grid_json,
};
use crosscert::{
    crossing_area_refined, detect, discretize, family_by_name, grid_sign_oracle, normal_flow,
    parse_poly, sample_family, vote, Cell, CertMode, CurveFamily, FlowStatus, MultiPoly,
    OracleVerdict, RadiusPolicy, Sampler, VarSpace, Verdict,
};

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 2;
const EXIT_TIE: u8 = 3;
const EXIT_EMPTY: u8 = 4;
const EXIT_CONTRADICTION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "crosscert",
    about = "Certified crossing tests for polynomial hypersurfaces and Hough-transform curve recognition",
    version
)]
struct Cli {
    /// Worker threads for sweeps (default: machine parallelism). Results
    /// are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON config file; explicit flags override its fields.
    #[arg(long, global = true)]
    config: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether f = 0 crosses one cell.
    CrossCell(CrossCellArgs),
    /// Decide every cell of a discretized region.
    CrossArea(CrossAreaArgs),
    /// Recognize a curve from image points by accumulator voting.
    Recognize(RecognizeArgs),
    /// Compare the certificate sweep against the sign-sampling oracle.
    OracleCheck(OracleCheckArgs),
    /// Generate points close to a family curve.
    Sample(SampleArgs),
}

#[derive(Args, Default, Clone)]
struct CrossCellArgs {
    /// Polynomial expression, e.g. "4*x1^2 + x2^2 - 4*x1".
    #[arg(long)]
    poly: Option<String>,
    /// Comma-separated variable names, e.g. "x1,x2".
    #[arg(long)]
    vars: Option<String>,
    /// Cell center, e.g. "0.2,0.75".
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    /// Cell half-widths, e.g. "0.1,0.1".
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    /// exact | first-order.
    #[arg(long)]
    mode: Option<String>,
    /// Normal-flow radius override (default: 0.99 of the feasibility cap).
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Args, Default, Clone)]
struct CrossAreaArgs {
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    vars: Option<String>,
    /// Region as colon pairs, e.g. "0:1.2,-1.2:1.2".
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    /// Sampling step per axis, e.g. "0.1,0.1".
    #[arg(long, allow_hyphen_values = true)]
    step: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    /// Subdivision depth for inconclusive cells.
    #[arg(long)]
    subdivide: Option<u32>,
    /// Output prefix; writes <out>.csv and <out>.json.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Default, Clone)]
struct RecognizeArgs {
    /// Family preset: conchoid_sluse | three_convexities |
    /// three_convexities_m | elliptic.
    #[arg(long)]
    family: Option<String>,
    /// Joint polynomial text for a custom family.
    #[arg(long)]
    joint: Option<String>,
    /// Image variable names for a custom family, e.g. "x,y".
    #[arg(long)]
    vars: Option<String>,
    /// Parameter names for a custom family, e.g. "A,B".
    #[arg(long)]
    params: Option<String>,
    /// Points CSV (header row naming the image variables).
    #[arg(long)]
    points: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    step: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    /// Subdivision depth for inconclusive cells (default 2).
    #[arg(long)]
    subdivide: Option<u32>,
    /// Output prefix for the accumulator CSV.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Default, Clone)]
struct OracleCheckArgs {
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    vars: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    region: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    step: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    radius: Option<f64>,
    /// Oracle grid subdivisions per axis.
    #[arg(long)]
    resolution: Option<u32>,
    #[arg(long)]
    out: Option<String>,
    /// Test hook: scale B2 before the verdict comparison.
    #[arg(long, hide = true)]
    debug_scale_b2: Option<f64>,
}

#[derive(Args, Default, Clone)]
struct SampleArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    joint: Option<String>,
    #[arg(long)]
    vars: Option<String>,
    #[arg(long)]
    params: Option<String>,
    /// Parameter point, e.g. "0.25,1".
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Number of sample nodes.
    #[arg(long)]
    num: Option<usize>,
    /// Quantization step for the solved coordinate (0 = none).
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// x-node range "lo:hi" for custom families.
    #[arg(long)]
    range: Option<String>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
}

/// Flat key-value config file mirroring the flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    poly: Option<String>,
    vars: Option<String>,
    center: Option<String>,
    eps: Option<String>,
    region: Option<String>,
    step: Option<String>,
    mode: Option<String>,
    radius: Option<f64>,
    subdivide: Option<u32>,
    family: Option<String>,
    joint: Option<String>,
    params: Option<String>,
    points: Option<String>,
    lambda: Option<String>,
    num: Option<usize>,
    noise: Option<f64>,
    seed: Option<u64>,
    range: Option<String>,
    resolution: Option<u32>,
    out: Option<String>,
}

struct ConfigError(String);

impl<T: std::fmt::Display> From<T> for ConfigError {
    fn from(e: T) -> Self {
        ConfigError(e.to_string())
    }
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .is_err()
        {
            return fail("could not configure the thread pool");
        }
    }
    let file = match &cli.config {
        None => ConfigFile::default(),
        Some(path) => match fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str(&text).map_err(|e| e.to_string()))
        {
            Ok(cf) => cf,
            Err(e) => return fail(&format!("config {path}: {e}")),
        },
    };
    let result = match cli.command {
        Command::CrossCell(args) => cmd_cross_cell(args, &file),
        Command::CrossArea(args) => cmd_cross_area(args, &file),
        Command::Recognize(args) => cmd_recognize(args, &file),
        Command::OracleCheck(args) => cmd_oracle_check(args, &file),
        Command::Sample(args) => cmd_sample(args, &file),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(ConfigError(msg)) => fail(&msg),
    }
}

fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, what: &str) -> Result<T, ConfigError> {
    flag.clone()
        .or_else(|| file.clone())
        .ok_or_else(|| ConfigError(format!("missing --{what}")))
}

fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| ConfigError(format!("{what}: {e}")))
        })
        .collect()
}

fn parse_region(text: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    text.split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| ConfigError(format!("region `{pair}`: expected lo:hi")))?;
            Ok((
                lo.trim()
                    .parse()
                    .map_err(|e| ConfigError(format!("region: {e}")))?,
                hi.trim()
                    .parse()
                    .map_err(|e| ConfigError(format!("region: {e}")))?,
            ))
        })
        .collect()
}

fn parse_mode(text: Option<String>) -> Result<CertMode, ConfigError> {
    match text.as_deref() {
        None | Some("exact") => Ok(CertMode::Exact),
        Some("first-order") | Some("first_order") => Ok(CertMode::FirstOrder),
        Some(other) => Err(ConfigError(format!(
            "mode `{other}`: expected exact or first-order"
        ))),
    }
}

fn parse_polynomial(text: &str, vars: &str) -> Result<(VarSpace, MultiPoly), ConfigError> {
    let names: Vec<String> = vars.split(',').map(|s| s.trim().to_string()).collect();
    let space = VarSpace::new(names)?;
    let poly = parse_poly(text, &space)?;
    Ok((space, poly))
}

fn write_or_print(path: Option<&str>, suffix: &str, content: &str) -> Result<(), ConfigError> {
    match path {
        Some(prefix) => {
            let full = format!("{prefix}{suffix}");
            fs::write(&full, content).map_err(|e| ConfigError(format!("{full}: {e}")))?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_cross_cell(args: CrossCellArgs, file: &ConfigFile) -> Result<u8, ConfigError> {
    let (_, f) = parse_polynomial(
        &pick(&args.poly, &file.poly, "poly")?,
        &pick(&args.vars, &file.vars, "vars")?,
    )?;
    let center = parse_floats(&pick(&args.center, &file.center, "center")?, "center")?;
    let eps = parse_floats(&pick(&args.eps, &file.eps, "eps")?, "eps")?;
    let mode = parse_mode(pick_opt(&args.mode, &file.mode))?;
    let radius = pick_opt(&args.radius, &file.radius);
    if center.len() != f.num_vars() || eps.len() != f.num_vars() {
        return Err(ConfigError("center/eps dimension mismatch".into()));
    }
    let report = crosscert::crossing_cell(&f, &Cell::new(center, eps), mode, radius)?;
    println!("{}", cell_report_json(&report, mode));
    Ok(EXIT_OK)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::No => "No",
        Verdict::Yes => "Yes",
        Verdict::Unknown => "Unknown",
    }
}

fn cell_report_json(report: &crosscert::CellReport, mode: CertMode) -> String {
    let opt = |x: Option<f64>| x.map_or("null".to_string(), fmt_f64);
    format!(
        "{{\"verdict\":\"{}\",\"abs_f\":{},\"b1\":{},\"b2\":{},\"radius\":{},\"mode\":\"{}\",\"note\":{}}}",
        verdict_name(report.verdict),
        fmt_f64(report.abs_f),
        fmt_f64(report.b1),
        opt(report.b2),
        opt(report.radius),
        match mode {
            CertMode::Exact => "exact",
            CertMode::FirstOrder => "first-order",
        },
        report
            .note
            .as_ref()
            .map_or("null".to_string(), |n| format!("\"{}\"", json_escape(n))),
    )
}

fn cmd_cross_area(args: CrossAreaArgs, file: &ConfigFile) -> Result<u8, ConfigError> {
    let (space, f) = parse_polynomial(
        &pick(&args.poly, &file.poly, "poly")?,
        &pick(&args.vars, &file.vars, "vars")?,
    )?;
    let region = parse_region(&pick(&args.region, &file.region, "region")?)?;
    let step = parse_floats(&pick(&args.step, &file.step, "step")?, "step")?;
    let mode = parse_mode(pick_opt(&args.mode, &file.mode))?;
    let policy = match pick_opt(&args.radius, &file.radius) {
        Some(r) => RadiusPolicy::Fixed(r),
        None => RadiusPolicy::Auto,
    };
    let depth = pick_opt(&args.subdivide, &file.subdivide).unwrap_or(0);
    let disc = discretize(&region, &step)?;
    let grid = crossing_area_refined(&f, &disc, mode, policy, depth)?;
    let out = pick_opt(&args.out, &file.out);
    write_or_print(
        out.as_deref(),
        ".csv",
        &verdict_grid_csv(&grid, space.names()),
    )?;
    let summary = verdict_grid_json(&grid);
    if let Some(prefix) = out.as_deref() {
        fs::write(format!("{prefix}.json"), &summary).map_err(|e| ConfigError(e.to_string()))?;
    }
    println!("{summary}");
    Ok(EXIT_OK)
}

fn resolve_family(
    family: Option<String>,
    joint: Option<String>,
    vars: Option<String>,
    params: Option<String>,
    range: Option<String>,
) -> Result<CurveFamily, ConfigError> {
    if let Some(name) = family {
        return family_by_name(&name)
            .ok_or_else(|| ConfigError(format!("unknown family preset `{name}`")));
    }
    let joint = joint.ok_or_else(|| ConfigError("missing --family or --joint".into()))?;
    let vars = vars.ok_or_else(|| ConfigError("custom family needs --vars".into()))?;
    let params = params.ok_or_else(|| ConfigError("custom family needs --params".into()))?;
    let image: Vec<&str> = vars.split(',').map(str::trim).collect();
    let pnames: Vec<&str> = params.split(',').map(str::trim).collect();
    let sampler = match range {
        Some(r) => {
            let (lo, hi) = r
                .split_once(':')
                .ok_or_else(|| ConfigError("range: expected lo:hi".into()))?;
            Sampler::XSweep {
                lo: lo
                    .trim()
                    .parse()
                    .map_err(|e| ConfigError(format!("range: {e}")))?,
                hi: hi
                    .trim()
                    .parse()
                    .map_err(|e| ConfigError(format!("range: {e}")))?,
            }
        }
        None => Sampler::XSweep { lo: -2.0, hi: 2.0 },
    };
    Ok(CurveFamily::custom(
        "custom", &joint, &image, &pnames, sampler,
    )?)
}

fn cmd_recognize(args: RecognizeArgs, file: &ConfigFile) -> Result<u8, ConfigError> {
    let fam = resolve_family(
        pick_opt(&args.family, &file.family),
        pick_opt(&args.joint, &file.joint),
        pick_opt(&args.vars, &file.vars),
        pick_opt(&args.params, &file.params),
        None,
    )?;
    let points_path = pick(&args.points, &file.points, "points")?;
    let text =
        fs::read_to_string(&points_path).map_err(|e| ConfigError(format!("{points_path}: {e}")))?;
    let (_, points) = parse_points_csv(&text)?;
    if points.is_empty() {
        eprintln!("error: empty point set in {points_path}");
        return Ok(EXIT_EMPTY);
    }
    let region = parse_region(&pick(&args.region, &file.region, "region")?)?;
    let step = parse_floats(&pick(&args.step, &file.step, "step")?, "step")?;
    let mode = parse_mode(pick_opt(&args.mode, &file.mode))?;
    let depth = pick_opt(&args.subdivide, &file.subdivide).unwrap_or(2);
    let disc = discretize(&region, &step)?;
    let acc = vote(&fam, &points, &disc, mode, depth)?;
    let out = pick_opt(&args.out, &file.out);
    if let Some(prefix) = out.as_deref() {
        fs::write(
            format!("{prefix}.csv"),
            accumulator_csv(&acc, &fam.param_vars),
        )
        .map_err(|e| ConfigError(e.to_string()))?;
    }
    let det = detect(&acc)?;
    println!("{}", detection_json(&acc, &det));
    if det.ties.len() > 1 {
        return Ok(EXIT_TIE);
    }
    Ok(EXIT_OK)
}

fn cmd_oracle_check(args: OracleCheckArgs, file: &ConfigFile) -> Result<u8, ConfigError> {
    let (space, f) = parse_polynomial(
        &pick(&args.poly, &file.poly, "poly")?,
        &pick(&args.vars, &file.vars, "vars")?,
    )?;
    let region = parse_region(&pick(&args.region, &file.region, "region")?)?;
    let step = parse_floats(&pick(&args.step, &file.step, "step")?, "step")?;
    let mode = parse_mode(pick_opt(&args.mode, &file.mode))?;
    let policy = match pick_opt(&args.radius, &file.radius) {
        Some(r) => RadiusPolicy::Fixed(r),
        None => RadiusPolicy::Auto,
    };
    let resolution = pick_opt(&args.resolution, &file.resolution).unwrap_or(128);
    let scale_b2 = args.debug_scale_b2.unwrap_or(1.0);
    let disc = discretize(&region, &step)?;
    let grid = crossing_area_refined(&f, &disc, mode, policy, 0)?;

    let mut table = String::from("j,verdict,oracle,flow,agree\n");
    let mut contradictions = 0usize;
    for flat in 0..grid.cells.len() {
        let idx = grid.disc.multi_index(flat);
        let cell = grid.disc.cell(&idx);
        let report = &grid.cells[flat];
        // apply the (test-hook) bound scaling to re-derive the verdict
        let verdict = if scale_b2 != 1.0 {
            if definitely_greater(report.abs_f, report.b1) {
                Verdict::No
            } else if report
                .b2
                .map(|b2| definitely_greater(b2 * scale_b2, report.abs_f))
                .unwrap_or(false)
            {
                Verdict::Yes
            } else {
                Verdict::Unknown
            }
        } else {
            report.verdict
        };
        let oracle = grid_sign_oracle(&f, &cell, resolution)?;
        let mut flow_note = "-".to_string();
        let agree = match (verdict, oracle.verdict) {
            (Verdict::No, OracleVerdict::Crosses) => false,
            (Verdict::Yes, OracleVerdict::Crosses) => true,
            (Verdict::Yes, OracleVerdict::NoSignChange) => {
                // a converging normal flow inside the cell still confirms
                let r = report.radius.unwrap_or(0.0).max(f64::MIN_POSITIVE);
                let flow = normal_flow(&f, &cell.center, r, 1e-9, 200)?;
                let inside = flow
                    .point
                    .iter()
                    .zip(&cell.center)
                    .zip(&cell.eps)
                    .all(|((x, c), e)| (x - c).abs() <= *e);
                flow_note = format!("{:?}", flow.status);
                flow.status == FlowStatus::Converged && inside
            }
            _ => true,
        };
        if !agree {
            contradictions += 1;
        }
        let idx_str: Vec<String> = idx.iter().map(|j| j.to_string()).collect();
        table.push_str(&format!(
            "{},{},{},{},{}\n",
            idx_str.join(":"),
            report_verdict_char(verdict),
            match oracle.verdict {
                OracleVerdict::Crosses => "C",
                OracleVerdict::NoSignChange => "N",
            },
            flow_note,
            agree
        ));
    }
    let out = pick_opt(&args.out, &file.out);
    write_or_print(out.as_deref(), ".csv", &table)?;
    let vars_json = space
        .names()
        .iter()
        .map(|n| format!("\"{}\"", json_escape(n)))
        .collect::<Vec<_>>()
        .join(",");
    let summary = format!(
        "{{\"cells\":{},\"contradictions\":{},\"resolution\":{},\"counts\":{{\"no\":{},\"yes\":{},\"unknown\":{}}},\"poly_vars\":[{}]}}",
        grid.cells.len(),
        contradictions,
        resolution,
        grid.count(Verdict::No),
        grid.count(Verdict::Yes),
        grid.count(Verdict::Unknown),
        vars_json,
    );
    println!("{summary}");
    if contradictions > 0 {
        return Ok(EXIT_CONTRADICTION);
    }
    Ok(EXIT_OK)
}

fn report_verdict_char(v: Verdict) -> &'static str {
    match v {
        Verdict::No => "0",
        Verdict::Yes => "1",
        Verdict::Unknown => "Z",
    }
}

fn cmd_sample(args: SampleArgs, file: &ConfigFile) -> Result<u8, ConfigError> {
    let fam = resolve_family(
        pick_opt(&args.family, &file.family),
        pick_opt(&args.joint, &file.joint),
        pick_opt(&args.vars, &file.vars),
        pick_opt(&args.params, &file.params),
        pick_opt(&args.range, &file.range),
    )?;
    let lambda = parse_floats(&pick(&args.lambda, &file.lambda, "lambda")?, "lambda")?;
    let num = pick(&args.num, &file.num, "num")?;
    let noise = pick_opt(&args.noise, &file.noise).unwrap_or(0.0);
    let seed = pick_opt(&args.seed, &file.seed).unwrap_or(0);
    let points = sample_family(&fam, &lambda, num, seed, noise)?;
    let csv = points_csv(&points, &fam.image_vars);
    match pick_opt(&args.out, &file.out) {
        Some(path) => fs::write(&path, csv).map_err(|e| ConfigError(format!("{path}: {e}")))?,
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

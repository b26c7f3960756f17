//! Batch driver for the hgmt toolkit: generators, estimators, and checks
//! behind subcommands with file-based I/O.
//!
//! Exit codes: 0 success, 1 domain or I/O error, 2 a check ran but its
//! verdict is divergent or failed, 64 usage.
//!
//! Numeric flags fall back to a `key=value` config file (`--config`), then
//! to the library defaults; a flag given on the command line always wins.
//! Relative output paths resolve against `HGMT_OUT_DIR` when it is set.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hgmt::curves::{
    koch_generate, lacunary_eval, rough_lift, vertical_lift, KochSpec, LacunarySpec,
    RoughLiftOptions, RoughnessModulus,
};
use hgmt::error::{domain, Error, Result};
use hgmt::measure::{
    bisect_dimension, flatness_modulus, hausdorff_area, AreaOptions, QuasiMetricCurve, Verdict,
};
use hgmt::reifenberg::{cloud_profile, dyadic_parametrize, EpsilonOptions, PointCloud};
use hgmt::serialize::{read_path_csv, write_json, write_path_csv};
use hgmt::surfaces::{
    coarea_check, dg_distance, extremal_flow, integrate_wphi, surface_measure, Box3,
    CoareaOptions, IntrinsicGraph, Rect, ScalarMapPair,
};
use hgmt::{uniform_grid, HeisPath, PlanarPath, SampledPath};

const EXIT_FAILED_VERDICT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "hgmt", version, about = "Geometric measure theory on the Heisenberg group")]
struct Cli {
    /// key=value file supplying defaults for numeric flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Machine-readable JSON on stdout instead of human tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a planar curve and write it as CSV.
    GenCurve(GenCurve),
    /// Lift a planar CSV curve through its Levy area.
    Lift(Lift),
    /// Variational lift of a rough planar curve under a roughness modulus.
    RoughLift(RoughLift),
    /// Hausdorff measure estimate (and optional dimension bisection).
    Measure(Measure),
    /// Flatness profiles: triple-defect modulus of a curve, or the
    /// vertical-flatness profile of a point cloud.
    Flatness(Flatness),
    /// Dyadic midpoint parametrization of a point cloud with certificates.
    Parametrize(Parametrize),
    /// Intrinsic-graph operations: integrate, flow, measure, dg.
    Surface(Surface),
    /// Coarea ratio check for a scalar pair over boxes.
    Coarea(Coarea),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveKind {
    Koch,
    QuasiHelix,
    SlowDecay,
    Circle,
    Trig,
    Holder,
    DivergentArea,
    VanishingArea,
}

#[derive(Args)]
struct GenCurve {
    #[arg(long, value_enum)]
    kind: CurveKind,
    /// Koch bump height per segment.
    #[arg(long)]
    h: Option<f64>,
    /// Recursion depth (Koch family).
    #[arg(long)]
    depth: Option<usize>,
    /// Quasi-helix decay exponent.
    #[arg(long)]
    beta: Option<f64>,
    /// Holder exponent of the lacunary pair.
    #[arg(long)]
    alpha: Option<f64>,
    /// Last lacunary block index.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// First nonzero block of the vanishing-area pair.
    #[arg(long)]
    k0: Option<usize>,
    /// Dyadic sampling depth: the grid carries 2^mesh cells.
    #[arg(long)]
    mesh: Option<u32>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Lift {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    z0: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModulusKind {
    Power,
    Whitney,
    Vanishing,
}

#[derive(Args)]
struct RoughLift {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "power")]
    modulus: ModulusKind,
    /// Exponent of the power modulus.
    #[arg(long)]
    theta: Option<f64>,
    /// Multiplier of the Whitney-fitted modulus.
    #[arg(long)]
    c: Option<f64>,
    /// First active block of the vanishing recipe.
    #[arg(long)]
    k0: Option<usize>,
    #[arg(long)]
    z0: Option<f64>,
    /// Chain-supremum abort threshold.
    #[arg(long)]
    var_cap: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KappaKind {
    /// Squared parabolic distance, the only admissible gauge here.
    Dinf2,
}

#[derive(Args)]
struct Measure {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "dinf2")]
    kappa: KappaKind,
    /// Finest mesh level 2^-mesh; levels 4..=mesh are estimated.
    #[arg(long)]
    mesh: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Random subdivisions per level.
    #[arg(long)]
    random_subs: Option<usize>,
    /// Also bisect for box dimension to this depth.
    #[arg(long)]
    bisect: Option<u32>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Flatness {
    #[arg(long)]
    input: PathBuf,
    /// Treat the input as a point cloud and report the vertical profile
    /// instead of the curve triple-defect modulus.
    #[arg(long)]
    cloud: bool,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    /// Base points examined per scale.
    #[arg(long)]
    base_budget: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Parametrize {
    #[arg(long)]
    input: PathBuf,
    /// Flatness budget epsilon in (0, 0.5].
    #[arg(long)]
    eps: Option<f64>,
    /// Cloud index of the lower endpoint; lowest point when omitted.
    #[arg(long)]
    origin: Option<usize>,
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldKind {
    Const,
    LinearY,
    SqrtAbsZ,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SurfaceOp {
    Integrate,
    Flow,
    Measure,
    Dg,
}

#[derive(Args)]
struct Surface {
    #[arg(long, value_enum, default_value = "const")]
    field: FieldKind,
    /// Value of the constant field.
    #[arg(long)]
    c: Option<f64>,
    /// Scale of the sqrt-abs-z field.
    #[arg(long)]
    scale: Option<f64>,
    /// Sampled field CSV with header y,z,phi (rectangular lattice).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Domain y0,y1,z0,z1 for built-in fields.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long, value_enum, default_value = "integrate")]
    op: SurfaceOp,
    /// Integration start y,z (domain center when omitted).
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    span: Option<f64>,
    /// Seed count of the extremal flow.
    #[arg(long)]
    curves: Option<usize>,
    /// Seed z-interval lo,hi of the extremal flow (domain z-range when
    /// omitted).
    #[arg(long)]
    z_range: Option<String>,
    /// Quadrature region y0,y1,z0,z1 (full domain when omitted).
    #[arg(long)]
    region: Option<String>,
    /// Quadrature cells ny,nz.
    #[arg(long)]
    grid: Option<String>,
    /// First point y,z of the graph distance.
    #[arg(long)]
    a: Option<String>,
    /// Second point y,z of the graph distance.
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairKind {
    /// F = (x, y).
    Coordinate,
    /// F = (x + y, y - x).
    Rotated,
}

#[derive(Args)]
struct Coarea {
    #[arg(long, value_enum, default_value = "coordinate")]
    pair: PairKind,
    /// Semicolon-separated boxes x0,x1,y0,y1,z0,z1.
    #[arg(long, default_value = "0,1,0,1,0,1;0,1,0,1,1.25,2.25;0,1,0,1,2.5,3.5")]
    boxes: String,
    #[arg(long)]
    rhs_grid: Option<usize>,
    #[arg(long)]
    a_grid: Option<usize>,
    #[arg(long)]
    fibers: Option<usize>,
    #[arg(long)]
    area_level: Option<u32>,
    #[arg(long)]
    subsample: Option<usize>,
    /// Largest acceptable relative spread of the per-box ratios.
    #[arg(long)]
    spread_tol: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// key=value defaults, one per line, `#` comments allowed.
struct Cfg(BTreeMap<String, String>);

impl Cfg {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    domain(format!("config line {}: expected key=value, got {line:?}", i + 1))
                })?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Cfg(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| domain(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }
}

fn pick<T: FromStr + Copy>(flag: Option<T>, cfg: &Cfg, key: &str, dflt: T) -> Result<T> {
    Ok(flag.or(cfg.get(key)?).unwrap_or(dflt))
}

fn pick_opt<T: FromStr + Copy>(flag: Option<T>, cfg: &Cfg, key: &str) -> Result<Option<T>> {
    Ok(flag.or(cfg.get(key)?))
}

/// Resolve an output path against `HGMT_OUT_DIR` for relative paths.
fn out_path(given: Option<PathBuf>, default_name: &str) -> PathBuf {
    let p = given.unwrap_or_else(|| PathBuf::from(default_name));
    if p.is_absolute() {
        return p;
    }
    match std::env::var_os("HGMT_OUT_DIR") {
        Some(dir) => PathBuf::from(dir).join(p),
        None => p,
    }
}

fn fmt_field(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(domain(format!("{what} wants two comma-separated numbers, got {s:?}")));
    }
    let a = parts[0].trim().parse().map_err(|_| domain(format!("{what}: bad number {s:?}")))?;
    let b = parts[1].trim().parse().map_err(|_| domain(format!("{what}: bad number {s:?}")))?;
    Ok((a, b))
}

fn parse_quad(s: &str, what: &str) -> Result<[f64; 4]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(domain(format!("{what} wants four comma-separated numbers, got {s:?}")));
    }
    let mut out = [0.0; 4];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.trim().parse().map_err(|_| domain(format!("{what}: bad number {p:?}")))?;
    }
    Ok(out)
}

fn emit(json: bool, value: &serde_json::Value, human: &str) {
    if json {
        println!("{value}");
    } else {
        println!("{human}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = Cfg::load(cli.config.as_deref())?;
    let json = cli.json;
    match cli.cmd {
        Cmd::GenCurve(a) => gen_curve(a, &cfg, json),
        Cmd::Lift(a) => lift(a, &cfg, json),
        Cmd::RoughLift(a) => rough_lift_cmd(a, &cfg, json),
        Cmd::Measure(a) => measure_cmd(a, &cfg, json),
        Cmd::Flatness(a) => flatness_cmd(a, &cfg, json),
        Cmd::Parametrize(a) => parametrize_cmd(a, &cfg, json),
        Cmd::Surface(a) => surface_cmd(a, &cfg, json),
        Cmd::Coarea(a) => coarea_cmd(a, &cfg, json),
    }
}

fn gen_curve(a: GenCurve, cfg: &Cfg, json: bool) -> Result<u8> {
    let mesh = pick(a.mesh, cfg, "mesh", 12u32)?;
    let depth = pick(a.depth, cfg, "depth", 8usize)?;
    let span = [[0.0, 0.0], [1.0, 0.0]];
    let path: PlanarPath = match a.kind {
        CurveKind::Koch => {
            let h = pick(a.h, cfg, "h", 1.0 / 6.0)?;
            koch_generate(&KochSpec::constant(h, depth, span[0], span[1])?)?
        }
        CurveKind::QuasiHelix => {
            let beta = pick(a.beta, cfg, "beta", 0.5)?;
            koch_generate(&KochSpec::quasi_helix(beta, depth, span[0], span[1])?)?
        }
        CurveKind::SlowDecay => koch_generate(&KochSpec::slow_decay(depth, span[0], span[1])?)?,
        CurveKind::Circle => {
            let grid = uniform_grid(mesh);
            let values = grid
                .iter()
                .map(|t| {
                    let w = 2.0 * std::f64::consts::PI * t;
                    [w.cos(), w.sin()]
                })
                .collect();
            SampledPath::new(grid, values)?
        }
        CurveKind::Trig | CurveKind::Holder | CurveKind::DivergentArea
        | CurveKind::VanishingArea => {
            let n_max = pick(a.n_max, cfg, "n_max", 12usize)?;
            let spec = match a.kind {
                CurveKind::Trig => LacunarySpec::trig_pair(),
                CurveKind::Holder => {
                    let alpha = pick(a.alpha, cfg, "alpha", 0.75)?;
                    let amplitude = pick(a.amplitude, cfg, "amplitude", 1.0)?;
                    LacunarySpec::holder_pair(alpha, n_max, amplitude)?
                }
                CurveKind::DivergentArea => LacunarySpec::divergent_area(n_max),
                CurveKind::VanishingArea => {
                    let k0 = pick(a.k0, cfg, "k0", 2usize)?;
                    LacunarySpec::vanishing_area(k0, n_max)?
                }
                _ => unreachable!(),
            };
            let grid = uniform_grid(mesh);
            let eval = lacunary_eval(&spec, &grid)?;
            let values = eval
                .f
                .values()
                .iter()
                .zip(eval.g.values())
                .map(|(&x, &y)| [x, y])
                .collect();
            SampledPath::new(grid, values)?
        }
    };
    let dest = out_path(a.output, "curve.csv");
    write_path_csv(&dest, &path)?;
    emit(
        json,
        &serde_json::json!({ "nodes": path.grid().len(), "output": dest }),
        &format!("wrote {} nodes to {}", path.grid().len(), dest.display()),
    );
    Ok(0)
}

fn lift(a: Lift, cfg: &Cfg, json: bool) -> Result<u8> {
    let z0 = pick(a.z0, cfg, "z0", 0.0)?;
    let planar: PlanarPath = read_path_csv(&a.input)?;
    let lifted = vertical_lift(&planar, z0)?;
    let dest = out_path(a.output, "lift.csv");
    write_path_csv(&dest, &lifted)?;
    let z_end = lifted.values().last().unwrap().z;
    emit(
        json,
        &serde_json::json!({ "nodes": lifted.grid().len(), "z_end": z_end, "output": dest }),
        &format!(
            "lifted {} nodes, final height {z_end:.6}, wrote {}",
            lifted.grid().len(),
            dest.display()
        ),
    );
    Ok(0)
}

fn rough_lift_cmd(a: RoughLift, cfg: &Cfg, json: bool) -> Result<u8> {
    let planar: PlanarPath = read_path_csv(&a.input)?;
    let modulus = match a.modulus {
        ModulusKind::Power => RoughnessModulus::power(pick(a.theta, cfg, "theta", 0.75)?)?,
        ModulusKind::Whitney => {
            RoughnessModulus::whitney_auto(&planar, pick(a.c, cfg, "c", 1.0)?)?
        }
        ModulusKind::Vanishing => {
            RoughnessModulus::vanishing_recipe(&planar, pick(a.k0, cfg, "k0", 2usize)?)?
        }
    };
    let opts = RoughLiftOptions {
        z0: pick(a.z0, cfg, "z0", 0.0)?,
        var_cap: pick(a.var_cap, cfg, "var_cap", 1e6)?,
    };
    let report = rough_lift(&planar, &modulus, &opts)?;
    if report.infinite_variation {
        let summary = serde_json::json!({
            "modulus": modulus.label(),
            "infinite_variation": true,
            "reached": report.z.len(),
        });
        emit(
            json,
            &summary,
            &format!(
                "variation cap crossed after {} nodes under modulus {}",
                report.z.len(),
                modulus.label()
            ),
        );
        return Ok(EXIT_FAILED_VERDICT);
    }
    let lifted = report.lift.expect("finite variation carries a lift");
    let dest = out_path(a.output, "rough_lift.csv");
    write_path_csv(&dest, &lifted)?;
    let z_end = lifted.values().last().unwrap().z;
    emit(
        json,
        &serde_json::json!({
            "modulus": modulus.label(),
            "infinite_variation": false,
            "z_end": z_end,
            "output": dest,
        }),
        &format!(
            "rough lift under {} finished at height {z_end:.6}, wrote {}",
            modulus.label(),
            dest.display()
        ),
    );
    Ok(0)
}

fn measure_cmd(a: Measure, cfg: &Cfg, json: bool) -> Result<u8> {
    let mesh = pick(a.mesh, cfg, "mesh", 12u32)?;
    if mesh < 4 {
        return Err(domain(format!("mesh depth {mesh} below the coarsest level 4")));
    }
    let path: HeisPath = read_path_csv(&a.input)?;
    let curve = QuasiMetricCurve::heis(&path);
    let defaults = AreaOptions::default();
    let opts = AreaOptions {
        random_subs: pick(a.random_subs, cfg, "random_subs", defaults.random_subs)?,
        seed: pick(a.seed, cfg, "seed", defaults.seed)?,
        rule: defaults.rule,
    };
    let levels: Vec<u32> = (4..=mesh).collect();
    let report = hausdorff_area(&curve, &levels, &opts)?;
    let mut value = serde_json::to_value(&report)?;
    if let Some(depth) = pick_opt(a.bisect, cfg, "bisect")? {
        let bis = bisect_dimension(&curve, depth)?;
        value["bisection"] = serde_json::to_value(&bis)?;
    }
    let dest = out_path(a.output, "measure.json");
    write_json(&dest, &value)?;
    let verdict = format!("{:?}", report.verdict).to_lowercase();
    let mut table = String::from("mesh        estimate\n");
    for (m, e) in report.mesh.iter().zip(&report.estimate) {
        table.push_str(&format!("{m:<11.4e} {e:.6e}\n"));
    }
    table.push_str(&format!("verdict: {verdict}, report at {}", dest.display()));
    emit(json, &value, &table);
    Ok(if report.verdict == Verdict::Divergent { EXIT_FAILED_VERDICT } else { 0 })
}

fn flatness_cmd(a: Flatness, cfg: &Cfg, json: bool) -> Result<u8> {
    let path: HeisPath = read_path_csv(&a.input)?;
    let dest = out_path(a.output, "flatness.json");
    let value = if a.cloud {
        let pts = path.values().to_vec();
        let cloud = match (pick_opt(a.r_min, cfg, "r_min")?, pick_opt(a.r_max, cfg, "r_max")?) {
            (Some(lo), Some(hi)) => PointCloud::with_scales(pts, lo, hi)?,
            (None, None) => PointCloud::new(pts)?,
            _ => return Err(domain("r_min and r_max must be given together")),
        };
        let opts = EpsilonOptions {
            base_budget: pick(a.base_budget, cfg, "base_budget", EpsilonOptions::default().base_budget)?,
        };
        serde_json::to_value(cloud_profile(&cloud, &opts)?)?
    } else {
        let curve = QuasiMetricCurve::heis(&path);
        serde_json::to_value(flatness_modulus(&curve)?)?
    };
    write_json(&dest, &value)?;
    emit(
        json,
        &value,
        &format!("flatness profile written to {}", dest.display()),
    );
    Ok(0)
}

fn parametrize_cmd(a: Parametrize, cfg: &Cfg, json: bool) -> Result<u8> {
    let path: HeisPath = read_path_csv(&a.input)?;
    let pts = path.values().to_vec();
    let cloud = match (pick_opt(a.r_min, cfg, "r_min")?, pick_opt(a.r_max, cfg, "r_max")?) {
        (Some(lo), Some(hi)) => PointCloud::with_scales(pts, lo, hi)?,
        (None, None) => PointCloud::new(pts)?,
        _ => return Err(domain("r_min and r_max must be given together")),
    };
    let eps = pick(a.eps, cfg, "eps", 0.3)?;
    let origin = pick_opt(a.origin, cfg, "origin")?;
    let par = dyadic_parametrize(&cloud, eps, origin)?;
    let dest = out_path(a.output, "chain.csv");
    std::fs::write(&dest, par.csv_string())?;
    let cert = &par.certificate;
    let ok = cert.decay_ok && cert.step_ok && cert.ordered_ok && cert.cone_ok;
    let value = serde_json::json!({
        "chain_len": par.chain.len(),
        "certificate": cert,
        "output": dest,
    });
    emit(
        json,
        &value,
        &format!(
            "chain of {} points, levels {}, decay {} step {} ordered {} cone {}, wrote {}",
            par.chain.len(),
            cert.max_chord.len(),
            cert.decay_ok,
            cert.step_ok,
            cert.ordered_ok,
            cert.cone_ok,
            dest.display()
        ),
    );
    Ok(if ok { 0 } else { EXIT_FAILED_VERDICT })
}

/// Bilinear interpolant of a rectangular `y,z,phi` sample read from CSV.
fn load_field_csv(src: &Path) -> Result<IntrinsicGraph> {
    let text = std::fs::read_to_string(src)?;
    let mut rows: Vec<[f64; 3]> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if i == 0 {
            if line != "y,z,phi" {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("expected header \"y,z,phi\", got {line:?}"),
                });
            }
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse { line: i + 1, msg: format!("expected 3 fields, got {line:?}") });
        }
        let mut row = [0.0; 3];
        for (slot, p) in row.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|e| Error::Parse { line: i + 1, msg: format!("{e}: {p:?}") })?;
        }
        rows.push(row);
    }
    let mut ys: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let mut zs: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    zs.sort_by(f64::total_cmp);
    zs.dedup();
    let (ny, nz) = (ys.len(), zs.len());
    if ny < 2 || nz < 2 {
        return Err(domain("a sampled field needs at least a 2x2 lattice"));
    }
    if rows.len() != ny * nz {
        return Err(domain(format!(
            "expected a full {ny}x{nz} lattice ({} rows), got {}",
            ny * nz,
            rows.len()
        )));
    }
    let mut table = vec![f64::NAN; ny * nz];
    for r in &rows {
        let iy = ys.binary_search_by(|v| v.total_cmp(&r[0])).map_err(|_| {
            domain(format!("row ordinate {} missing from the lattice", r[0]))
        })?;
        let iz = zs.binary_search_by(|v| v.total_cmp(&r[1])).map_err(|_| {
            domain(format!("row height {} missing from the lattice", r[1]))
        })?;
        table[iy * nz + iz] = r[2];
    }
    if table.iter().any(|v| v.is_nan()) {
        return Err(domain("duplicate rows leave lattice cells unfilled"));
    }
    let dom = Rect::new((ys[0], ys[ny - 1]), (zs[0], zs[nz - 1]))?;
    let cell = move |axis: &[f64], v: f64| -> (usize, f64) {
        let i = axis.partition_point(|&a| a <= v).clamp(1, axis.len() - 1) - 1;
        let w = (v - axis[i]) / (axis[i + 1] - axis[i]);
        (i, w.clamp(0.0, 1.0))
    };
    IntrinsicGraph::new(dom, move |y, z| {
        let (iy, wy) = cell(&ys, y);
        let (iz, wz) = cell(&zs, z);
        let f00 = table[iy * nz + iz];
        let f01 = table[iy * nz + iz + 1];
        let f10 = table[(iy + 1) * nz + iz];
        let f11 = table[(iy + 1) * nz + iz + 1];
        (1.0 - wy) * ((1.0 - wz) * f00 + wz * f01) + wy * ((1.0 - wz) * f10 + wz * f11)
    })
}

fn surface_cmd(a: Surface, cfg: &Cfg, json: bool) -> Result<u8> {
    let graph = match a.field {
        FieldKind::Csv => {
            let src = a
                .input
                .as_deref()
                .ok_or_else(|| domain("--field csv needs --input with a y,z,phi file"))?;
            load_field_csv(src)?
        }
        _ => {
            let q = match &a.domain {
                Some(s) => parse_quad(s, "--domain")?,
                None => [-2.0, 2.0, -2.0, 2.0],
            };
            let dom = Rect::new((q[0], q[1]), (q[2], q[3]))?;
            match a.field {
                FieldKind::Const => IntrinsicGraph::constant(dom, pick(a.c, cfg, "c", 0.0)?)?,
                FieldKind::LinearY => IntrinsicGraph::linear_y(dom)?,
                FieldKind::SqrtAbsZ => {
                    IntrinsicGraph::sqrt_abs_z(dom, pick(a.scale, cfg, "scale", 1.0)?)?
                }
                FieldKind::Csv => unreachable!(),
            }
        }
    };
    let dom = graph.domain();
    let step = pick(a.step, cfg, "step", 1e-3)?;
    let span = pick(a.span, cfg, "span", 1.0)?;
    match a.op {
        SurfaceOp::Integrate => {
            let start = match &a.start {
                Some(s) => parse_pair(s, "--start")?,
                None => (0.5 * (dom.y.0 + dom.y.1), 0.5 * (dom.z.0 + dom.z.1)),
            };
            let curve = integrate_wphi(&graph, start, step, span)?;
            let mut nodes: Vec<(f64, hgmt::HPoint)> = curve
                .t
                .iter()
                .zip(&curve.z)
                .map(|(&t, &z)| (t, graph.map(start.0 + t, z)))
                .collect();
            if span < 0.0 {
                nodes.reverse();
            }
            let dest = out_path(a.output, "surface_curve.csv");
            if nodes.len() >= 2 {
                let grid = nodes.iter().map(|n| n.0).collect();
                let values = nodes.iter().map(|n| n.1).collect();
                write_path_csv(&dest, &HeisPath::new(grid, values)?)?;
            } else {
                return Err(domain("integration exited immediately, nothing to write"));
            }
            let (y_end, z_end) = curve.end();
            emit(
                json,
                &serde_json::json!({
                    "nodes": curve.t.len(),
                    "end": [y_end, z_end],
                    "error_est": curve.error_est,
                    "exited": curve.exited,
                    "output": dest,
                }),
                &format!(
                    "integral curve with {} nodes ends at ({y_end:.6}, {z_end:.6}), \
                     step error about {:.2e}{}; wrote {}",
                    curve.t.len(),
                    curve.error_est,
                    if curve.exited { " (left the domain)" } else { "" },
                    dest.display()
                ),
            );
            Ok(0)
        }
        SurfaceOp::Flow => {
            let z_range = match &a.z_range {
                Some(s) => parse_pair(s, "--z-range")?,
                None => dom.z,
            };
            let curves = pick(a.curves, cfg, "curves", 9usize)?;
            let flow = extremal_flow(&graph, z_range, curves, step, span)?;
            let dest = out_path(a.output, "flow.csv");
            let mut text = String::from("t");
            for i in 0..flow.curves.len() {
                text.push_str(&format!(",z{i}"));
            }
            text.push('\n');
            for (j, t) in flow.t.iter().enumerate() {
                text.push_str(&fmt_field(*t));
                for c in &flow.curves {
                    text.push(',');
                    text.push_str(&fmt_field(c[j]));
                }
                text.push('\n');
            }
            std::fs::write(&dest, text)?;
            emit(
                json,
                &serde_json::json!({
                    "curves": flow.curves.len(),
                    "steps": flow.t.len(),
                    "max_correction": flow.max_correction,
                    "exited": flow.exited,
                    "output": dest,
                }),
                &format!(
                    "flow of {} curves over {} steps, largest reordering {:.2e}{}; wrote {}",
                    flow.curves.len(),
                    flow.t.len(),
                    flow.max_correction,
                    if flow.exited { " (left the domain)" } else { "" },
                    dest.display()
                ),
            );
            Ok(0)
        }
        SurfaceOp::Measure => {
            let region = match &a.region {
                Some(s) => {
                    let q = parse_quad(s, "--region")?;
                    Rect::new((q[0], q[1]), (q[2], q[3]))?
                }
                None => dom,
            };
            let grid = match &a.grid {
                Some(s) => {
                    let (ny, nz) = parse_pair(s, "--grid")?;
                    (ny as usize, nz as usize)
                }
                None => (64, 64),
            };
            let m = surface_measure(&graph, region, grid)?;
            emit(
                json,
                &serde_json::json!({ "measure": m }),
                &format!("surface measure {m:.9}"),
            );
            Ok(0)
        }
        SurfaceOp::Dg => {
            let pa = parse_pair(
                a.a.as_deref().ok_or_else(|| domain("--op dg needs --a y,z"))?,
                "--a",
            )?;
            let pb = parse_pair(
                a.b.as_deref().ok_or_else(|| domain("--op dg needs --b y,z"))?,
                "--b",
            )?;
            let d = dg_distance(&graph, pa, pb)?;
            emit(json, &serde_json::json!({ "distance": d }), &format!("dg distance {d:.9}"));
            Ok(0)
        }
    }
}

fn coarea_cmd(a: Coarea, cfg: &Cfg, json: bool) -> Result<u8> {
    let pair = match a.pair {
        PairKind::Coordinate => ScalarMapPair::coordinate_pair(),
        PairKind::Rotated => ScalarMapPair::rotated_pair(),
    };
    let mut boxes = Vec::new();
    for part in a.boxes.split(';') {
        let vals: Vec<&str> = part.split(',').collect();
        if vals.len() != 6 {
            return Err(domain(format!("box {part:?} wants six comma-separated numbers")));
        }
        let mut e = [0.0f64; 6];
        for (slot, v) in e.iter_mut().zip(&vals) {
            *slot = v.trim().parse().map_err(|_| domain(format!("box: bad number {v:?}")))?;
        }
        boxes.push(Box3::new((e[0], e[1]), (e[2], e[3]), (e[4], e[5]))?);
    }
    let defaults = CoareaOptions::default();
    let opts = CoareaOptions {
        rhs_grid: pick(a.rhs_grid, cfg, "rhs_grid", defaults.rhs_grid)?,
        a_grid: pick(a.a_grid, cfg, "a_grid", defaults.a_grid)?,
        fibers: pick(a.fibers, cfg, "fibers", defaults.fibers)?,
        area_level: pick(a.area_level, cfg, "area_level", defaults.area_level)?,
        boundary_subsample: pick(a.subsample, cfg, "subsample", defaults.boundary_subsample)?,
        ..defaults
    };
    let spread_tol = pick(a.spread_tol, cfg, "spread_tol", 0.05)?;
    let report = coarea_check(&pair, &boxes, &opts)?;
    let value = serde_json::to_value(&report)?;
    let dest = out_path(a.output, "coarea.json");
    write_json(&dest, &value)?;
    let mut table = String::from("box  lhs          rhs          ratio      coverage\n");
    for (i, b) in report.boxes.iter().enumerate() {
        table.push_str(&format!(
            "{i:<4} {:<12.6} {:<12.6} {:<10.6} {:.3}\n",
            b.lhs, b.rhs, b.ratio, b.coverage
        ));
    }
    table.push_str(&format!(
        "ratio spread {:.4} (tolerance {spread_tol}), report at {}",
        report.ratio_spread,
        dest.display()
    ));
    emit(json, &value, &table);
    Ok(if report.boxes.len() > 1 && report.ratio_spread > spread_tol {
        EXIT_FAILED_VERDICT
    } else {
        0
    })
}

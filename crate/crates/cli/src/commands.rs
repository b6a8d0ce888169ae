//! Subcommand implementations. Each takes a merged [`Config`], writes its
//! artifacts and returns a JSON value for the run summary.

use std::fmt;
use std::path::Path;

use hyperperc_core::densities::{density_csv_row, run_densities, DensityError, DENSITY_CSV_HEADER};
use hyperperc_core::hypvoronoi::{delaunay, VoronoiError, Window, DEFAULT_MARGIN};
use hyperperc_core::percolation::{
    bernoulli_bond, connectivity_decay, estimate_pc, estimate_pu, simulate, summarize, voronoi_connectivity_decay,
    DecayFit, Design, Model, PercolationError, SweepResult, VORONOI_CORE_RADIUS,
};
use hyperperc_core::pointprocess::{ColoredPointSet, PointProcessError};
use hyperperc_core::rng::{tags, Seed};
use hyperperc_core::tiling::{build_ball, TilingError};
use serde_json::{json, Value};

use crate::config::{Config, ConfigError};
use crate::output::write_atomic;
use crate::phase::{estimate_pc_curve, pc_curve_csv, PcCurveConfig, PhaseTable, Thresholds};
use crate::render;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Invalid or infeasible configuration (exit code 2).
    Config(String),
    /// Estimation or numeric failure (exit code 3).
    Numeric(String),
    /// File system failure (exit code 3).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<TilingError> for CliError {
    fn from(e: TilingError) -> Self {
        match e {
            TilingError::NotHyperbolic { .. } | TilingError::InvalidParameter(_) | TilingError::TooLarge { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PointProcessError> for CliError {
    fn from(e: PointProcessError) -> Self {
        // bad parameters, caps and unreadable input files alike
        CliError::Config(e.to_string())
    }
}

impl From<VoronoiError> for CliError {
    fn from(e: VoronoiError) -> Self {
        match e {
            VoronoiError::InvalidWindow(_) => CliError::Config(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<PercolationError> for CliError {
    fn from(e: PercolationError) -> Self {
        match e {
            PercolationError::InvalidParameter(_) => CliError::Config(e.to_string()),
            PercolationError::Tiling(t) => t.into(),
            PercolationError::Voronoi(v) => v.into(),
            PercolationError::PointProcess(p) => p.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<DensityError> for CliError {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::InvalidParameter(_) => CliError::Config(e.to_string()),
            DensityError::Voronoi(v) => v.into(),
            DensityError::PointProcess(p) => p.into(),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

pub const COMMANDS: [&str; 9] =
    ["gen-tiling", "voronoi-sample", "densities", "phase-sweep", "pc-estimate", "pu-estimate", "graph-perc", "decay", "render"];

const COMMON: [&str; 3] = ["out", "json", "threads"];

/// Parameters accepted by each subcommand besides `out`, `json`, `threads`.
pub fn allowed_keys(command: &str) -> &'static [&'static str] {
    match command {
        "gen-tiling" => &["pq", "L"],
        "voronoi-sample" => &["lambda", "p", "R", "seed", "complex_out"],
        "densities" => &["lambda", "R", "Rw", "replicas", "seed"],
        "phase-sweep" => &[
            "lambda", "pq", "p", "R", "L", "replicas", "seed", "r_core", "margin", "unique_threshold", "many_reach",
            "many_k", "sweep_out",
        ],
        "pc-estimate" => &["lambda", "pq", "p", "R", "L", "replicas", "seed", "r_core", "margin", "scale_R", "slack"],
        "pu-estimate" => &["lambda", "pq", "p", "R", "L", "replicas", "seed", "r_core", "margin"],
        "graph-perc" => &["pq", "p", "L", "replicas", "seed"],
        "decay" => &["lambda", "pq", "p", "d", "replicas", "seed"],
        "render" => &["what", "input", "lambda", "pq", "p", "R", "Rw", "L", "seed"],
        _ => &[],
    }
}

pub fn check_config(command: &str, cfg: &Config) -> Result<(), CliError> {
    if !COMMANDS.contains(&command) {
        return Err(CliError::Config(format!("unknown subcommand `{command}`")));
    }
    let mut keys: Vec<&str> = allowed_keys(command).to_vec();
    keys.extend(COMMON);
    cfg.check_keys(&keys)?;
    Ok(())
}

pub fn run(command: &str, cfg: &Config) -> Result<Value, CliError> {
    check_config(command, cfg)?;
    match command {
        "gen-tiling" => gen_tiling(cfg),
        "voronoi-sample" => voronoi_sample(cfg),
        "densities" => densities(cfg),
        "phase-sweep" => phase_sweep(cfg),
        "pc-estimate" => pc_estimate(cfg),
        "pu-estimate" => pu_estimate(cfg),
        "graph-perc" => graph_perc(cfg),
        "decay" => decay(cfg),
        "render" => render_cmd(cfg),
        _ => unreachable!("checked above"),
    }
}

/// Writes `text` to the path under `key`, or to stdout for the main
/// output when no path is given.
fn emit(cfg: &Config, key: &str, text: &str) -> Result<(), CliError> {
    match cfg.get(key) {
        Some(path) => write_atomic(Path::new(path), text.as_bytes()).map_err(|e| CliError::Io(format!("{path}: {e}"))),
        None if key == "out" => {
            print!("{text}");
            Ok(())
        }
        None => Ok(()),
    }
}

fn read_input(cfg: &Config) -> Result<String, CliError> {
    let path = cfg.get("input").ok_or_else(|| CliError::Config("missing `input`".into()))?;
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))
}

fn replicas(cfg: &Config, default: usize) -> Result<usize, CliError> {
    let n = cfg.usize_or("replicas", default)?;
    if n == 0 {
        return Err(CliError::Config("`replicas` must be positive".into()));
    }
    Ok(n)
}

fn layer_counts(cfg: &Config, default: &str) -> Result<Vec<f64>, CliError> {
    let ls = cfg.grid_or("L", default)?;
    if ls.iter().any(|&l| l < 1.0 || l.fract() != 0.0) {
        return Err(CliError::Config("`L` values must be positive integers".into()));
    }
    Ok(ls)
}

fn lambdas(cfg: &Config, default: &str) -> Result<Vec<f64>, CliError> {
    let ls = cfg.grid_or("lambda", default)?;
    if ls.iter().any(|&l| !(l > 0.0)) {
        return Err(CliError::Config("`lambda` values must be positive".into()));
    }
    Ok(ls)
}

fn design(cfg: &Config, model: Model, sizes: Vec<f64>, grid: Vec<f64>, n: usize) -> Result<Design, CliError> {
    let mut d = Design::new(model, sizes, grid, n, cfg.u64_or("seed", 0)?);
    d.r_core = cfg.f64_or("r_core", VORONOI_CORE_RADIUS)?;
    d.margin = cfg.f64_or("margin", DEFAULT_MARGIN)?;
    Ok(d)
}

fn gen_tiling(cfg: &Config) -> Result<Value, CliError> {
    let (p, q) = cfg.pq_or("pq", (3, 7))?;
    let l = cfg.u64_or("L", 4)? as u32;
    let b = build_ball(p, q, l)?;
    emit(cfg, "out", &b.to_text())?;
    Ok(json!({"p": p, "q": q, "L": l, "vertices": b.vertex_count(), "edges": b.edge_count(), "faces": b.face_count()}))
}

fn voronoi_sample(cfg: &Config) -> Result<Value, CliError> {
    let lambda = cfg.f64_or("lambda", 1.0)?;
    let p = cfg.f64_or("p", 0.5)?;
    let r = cfg.f64_or("R", 7.0)?;
    let set = ColoredPointSet::sample(lambda, p, r, cfg.u64_or("seed", 0)?)?;
    emit(cfg, "out", &set.to_text())?;
    let mut res = json!({"points": set.len(), "white": set.white_count()});
    if cfg.get("complex_out").is_some() {
        let v = delaunay(set)?;
        emit(cfg, "complex_out", &v.to_text())?;
        res["triangles"] = json!(v.triangles().len());
        res["interior_cells"] = json!(v.interior_mask().iter().filter(|&&m| m).count());
    }
    Ok(res)
}

fn densities(cfg: &Config) -> Result<Value, CliError> {
    let r = cfg.f64_or("R", 7.0)?;
    let rw = cfg.f64_or("Rw", r - DEFAULT_MARGIN)?;
    let window = Window::new(r, rw)?;
    let n = replicas(cfg, 50)?;
    let seed = cfg.u64_or("seed", 0)?;
    let mut csv = format!("{DENSITY_CSV_HEADER}\n");
    let mut res = Vec::new();
    for lambda in lambdas(cfg, "1")? {
        let d = run_densities(lambda, window, n, seed)?;
        csv.push_str(&density_csv_row(lambda, &d, seed));
        csv.push('\n');
        res.push(json!({
            "lambda": lambda, "DV": d.d_v, "DV_se": d.d_v_se, "DE": d.d_e, "DF_count": d.d_f_count,
            "DF_count_se": d.d_f_count_se, "DF_inv": d.d_f_inverse_area, "DF_inv_se": d.d_f_inverse_area_se,
            "euler": d.euler, "euler_se": d.euler_se, "replicas": d.replicas, "discarded": d.discarded,
            "face_estimators_agree_4sigma": d.face_estimators_agree(4.0),
        }));
    }
    emit(cfg, "out", &csv)?;
    Ok(Value::Array(res))
}

fn thresholds(cfg: &Config) -> Result<Thresholds, CliError> {
    let d = Thresholds::default();
    Ok(Thresholds {
        unique: cfg.f64_or("unique_threshold", d.unique)?,
        many_reach: cfg.f64_or("many_reach", d.many_reach)?,
        many_k: cfg.f64_or("many_k", d.many_k)?,
    })
}

fn sweeps_csv(sweeps: &[SweepResult]) -> String {
    let mut out = String::new();
    for (i, s) in sweeps.iter().enumerate() {
        let csv = s.to_csv();
        out.push_str(if i == 0 { &csv } else { csv.split_once('\n').map_or("", |x| x.1) });
    }
    out
}

fn phase_sweep(cfg: &Config) -> Result<Value, CliError> {
    let grid = cfg.p_grid_or("p", "0.05:0.95:0.05")?;
    let n = replicas(cfg, 200)?;
    let mut sweeps = Vec::new();
    if cfg.get("pq").is_some() {
        let (p, q) = cfg.pq_or("pq", (3, 7))?;
        let d = design(cfg, Model::Graph { p_gon: p, q_deg: q }, layer_counts(cfg, "4,5,6")?, grid, n)?;
        sweeps.push(summarize(&d, &simulate(&d)?));
    } else {
        let ladder = cfg.grid_or("R", "5,6,7")?;
        for lambda in lambdas(cfg, "1")? {
            let d = design(cfg, Model::Voronoi { lambda }, ladder.clone(), grid.clone(), n)?;
            sweeps.push(summarize(&d, &simulate(&d)?));
        }
    }
    let table = PhaseTable::from_sweeps(&sweeps, &thresholds(cfg)?);
    emit(cfg, "out", &table.to_csv())?;
    emit(cfg, "sweep_out", &sweeps_csv(&sweeps))?;
    let rows: Vec<Value> = table.rows.iter().map(|r| json!({"p": r.p, "size": r.size, "label": r.label.as_str()})).collect();
    Ok(json!({"rows": rows}))
}

fn estimate_json(e: &hyperperc_core::percolation::Estimate) -> Value {
    json!({"value": e.value, "lo": e.lo, "hi": e.hi, "crossings": e.crossings})
}

fn pc_estimate(cfg: &Config) -> Result<Value, CliError> {
    let n = replicas(cfg, 200)?;
    let seed = cfg.u64_or("seed", 0)?;
    if cfg.get("pq").is_some() {
        let (p, q) = cfg.pq_or("pq", (3, 7))?;
        let d = design(cfg, Model::Graph { p_gon: p, q_deg: q }, layer_counts(cfg, "5,6,7")?, cfg.p_grid_or("p", "0.01:0.99:0.01")?, n)?;
        let pc = estimate_pc(&d, &simulate(&d)?)?;
        let ls: Vec<String> = d.sizes.iter().map(|x| x.to_string()).collect();
        let csv = format!(
            "model,pgon,qdeg,L,pc,pc_lo,pc_hi,replicas,seed\ngraph-bond,{p},{q},{},{:.6},{:.6},{:.6},{n},{seed}\n",
            ls.join(";"),
            pc.value,
            pc.lo,
            pc.hi
        );
        emit(cfg, "out", &csv)?;
        return Ok(json!({"pc": estimate_json(&pc)}));
    }
    let curve = PcCurveConfig {
        base_ladder: cfg.grid_or("R", "4.5,5.5,6.5")?,
        scale_ladder: cfg.bool_or("scale_R", true)?,
        grid: cfg.p_grid_or("p", "0.01:0.60:0.01")?,
        replicas: n,
        seed,
        r_core: cfg.f64_or("r_core", VORONOI_CORE_RADIUS)?,
        margin: cfg.f64_or("margin", DEFAULT_MARGIN)?,
        slack: cfg.f64_or("slack", 0.02)?,
    };
    let rows = estimate_pc_curve(&lambdas(cfg, "0.25,0.5,1,2")?, &curve)?;
    emit(cfg, "out", &pc_curve_csv(&rows, n, seed))?;
    let res: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({"lambda": r.lambda, "ladder": r.ladder, "pc": estimate_json(&r.pc), "upper_bound": r.upper_bound,
                   "bound_ok": r.bound_ok, "positive_ok": r.positive_ok, "sandwich_ok": r.sandwich_ok, "guess": r.guess})
        })
        .collect();
    Ok(Value::Array(res))
}

pub const PU_CSV_HEADER: &str =
    "model,pgon,qdeg,lambda,sizes,pu,pu_lo,pu_hi,pc_dual,pc_dual_lo,pc_dual_hi,unique_below,unique_above,replicas,seed";

fn pu_estimate(cfg: &Config) -> Result<Value, CliError> {
    let n = replicas(cfg, 200)?;
    let grid = cfg.p_grid_or("p", "0.01:0.99:0.01")?;
    let designs: Vec<Design> = if cfg.get("pq").is_some() {
        let (p, q) = cfg.pq_or("pq", (3, 7))?;
        vec![design(cfg, Model::Graph { p_gon: p, q_deg: q }, layer_counts(cfg, "5,6,7")?, grid, n)?]
    } else {
        let ladder = cfg.grid_or("R", "4.5,5.5,6.5")?;
        lambdas(cfg, "1")?
            .into_iter()
            .map(|lambda| design(cfg, Model::Voronoi { lambda }, ladder.clone(), grid.clone(), n))
            .collect::<Result<_, _>>()?
    };
    let mut csv = format!("{PU_CSV_HEADER}\n");
    let mut res = Vec::new();
    for d in &designs {
        let pu = estimate_pu(d, &simulate(d)?)?;
        let (lambda, pgon, qdeg) = crate::phase::model_columns(&d.model);
        let sizes: Vec<String> = d.sizes.iter().map(|x| x.to_string()).collect();
        csv.push_str(&format!(
            "{},{pgon},{qdeg},{lambda},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}\n",
            d.model.name(),
            sizes.join(";"),
            pu.pu.value,
            pu.pu.lo,
            pu.pu.hi,
            pu.pc_dual.value,
            pu.pc_dual.lo,
            pu.pc_dual.hi,
            pu.unique_below,
            pu.unique_above,
            d.replicas,
            d.seed
        ));
        res.push(json!({"pu": estimate_json(&pu.pu), "pc_dual": estimate_json(&pu.pc_dual),
                        "unique_below": pu.unique_below, "unique_above": pu.unique_above}));
    }
    emit(cfg, "out", &csv)?;
    Ok(Value::Array(res))
}

fn graph_perc(cfg: &Config) -> Result<Value, CliError> {
    let (p, q) = cfg.pq_or("pq", (3, 7))?;
    let d = design(
        cfg,
        Model::Graph { p_gon: p, q_deg: q },
        layer_counts(cfg, "6")?,
        cfg.p_grid_or("p", "0.10:0.60:0.01")?,
        replicas(cfg, 200)?,
    )?;
    let s = summarize(&d, &simulate(&d)?);
    emit(cfg, "out", &s.to_csv())?;
    Ok(json!({"rows": s.points.len()}))
}

fn decay_csv(fit: &DecayFit) -> String {
    let mut out = String::from("d,tau,fit_log_tau\n");
    for (d, t) in fit.distances.iter().zip(&fit.tau) {
        out.push_str(&format!("{d},{t:.8},{:.8}\n", fit.fit.intercept + fit.fit.slope * d));
    }
    out
}

fn decay(cfg: &Config) -> Result<Value, CliError> {
    let seed = cfg.u64_or("seed", 0)?;
    let p = cfg.f64_or("p", 0.15)?;
    let fit = if cfg.get("lambda").is_some() {
        let lambda = cfg.require_f64("lambda")?;
        let ds = cfg.grid_or("d", "0.5:4:0.5")?;
        voronoi_connectivity_decay(lambda, p, &ds, replicas(cfg, 2000)?, seed)?
    } else {
        let (pg, q) = cfg.pq_or("pq", (3, 7))?;
        let dmax = cfg.u64_or("d", 8)? as u32;
        connectivity_decay(pg, q, p, dmax, replicas(cfg, 10_000)?, seed)?
    };
    emit(cfg, "out", &decay_csv(&fit))?;
    Ok(json!({"slope": fit.fit.slope, "intercept": fit.fit.intercept, "r2": fit.fit.r2, "rate": fit.rate, "tau": fit.tau}))
}

fn render_cmd(cfg: &Config) -> Result<Value, CliError> {
    let what = cfg.get("what").unwrap_or("voronoi");
    let svg = match what {
        "voronoi" => {
            let set = if cfg.get("input").is_some() {
                ColoredPointSet::from_text(&read_input(cfg)?)?
            } else {
                let r = cfg.f64_or("R", 6.0)?;
                ColoredPointSet::sample(cfg.f64_or("lambda", 1.0)?, cfg.f64_or("p", 0.5)?, r, cfg.u64_or("seed", 0)?)?
            };
            let rw = cfg.f64_or("Rw", (set.radius() - DEFAULT_MARGIN).max(0.0))?;
            let complex = if set.len() >= 3 { Some(delaunay(set.clone())?) } else { None };
            render::render_voronoi(&set, complex.as_ref(), rw)
        }
        "tiling" => {
            let (p, q) = cfg.pq_or("pq", (3, 7))?;
            let b = build_ball(p, q, cfg.u64_or("L", 4)? as u32)?;
            let pp = cfg.f64_or("p", 0.5)?;
            if !(0.0..=1.0).contains(&pp) {
                return Err(CliError::Config("`p` must lie in [0, 1]".into()));
            }
            let c = bernoulli_bond(&b, pp, Seed(cfg.u64_or("seed", 0)?).split(tags::BONDS));
            render::render_tiling(&b, c.open_edges())
        }
        "phase" => {
            let pts = PhaseTable::parse_points(&read_input(cfg)?).map_err(CliError::Config)?;
            render::render_phase(&pts)
        }
        other => return Err(CliError::Config(format!("`what` must be voronoi, tiling or phase, got `{other}`"))),
    };
    emit(cfg, "out", &svg)?;
    Ok(json!({"what": what, "bytes": svg.len()}))
}

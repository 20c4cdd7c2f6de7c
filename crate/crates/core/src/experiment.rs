//! Batch sweeps over generated instances, flat-file persistence, and SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hwo::build_sparse_pool;
use crate::oracle::{
    brute_force, constraint_satisfied, summary_csv, E0Convention, OracleResult, RunRecord, SummaryRow,
    DEFAULT_CONSTRAINT_TOL, GATE_MODEL,
};
use crate::problem::{generate_portfolio_instance, generate_twojet_instance, ProblemInstance, ProblemKind};
use crate::vqa::{
    adaptive_run, build_hwo_ansatz, build_penalty_ansatz, initial_params, optimize, AdaptiveConfig, OptConfig,
    RunResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    Penalty { lambda: f64 },
    Hwo,
    Ahwo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Penalty { .. } => "penalty",
            Method::Hwo => "hwo",
            Method::Ahwo => "ahwo",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            Method::Penalty { lambda } => Some(lambda),
            _ => None,
        }
    }
}

/// Runs one method on one instance. `opt.seed` drives the initial angles.
pub fn run_method(
    inst: &ProblemInstance,
    method: Method,
    layers: usize,
    opt: &OptConfig,
    grid_points: usize,
) -> Result<RunResult> {
    if layers == 0 {
        return Err(Error::InvalidArgument("layers must be at least 1".into()));
    }
    match method {
        Method::Penalty { lambda } => {
            let ansatz = build_penalty_ansatz(inst, layers, lambda)?;
            optimize(&ansatz, &initial_params(ansatz.parameter_count(), opt), opt)
        }
        Method::Hwo => {
            let pool = build_sparse_pool(inst.omega(), inst.budget())?;
            let ansatz = build_hwo_ansatz(inst, &pool, layers)?;
            optimize(&ansatz, &initial_params(ansatz.parameter_count(), opt), opt)
        }
        Method::Ahwo => {
            let pool = build_sparse_pool(inst.omega(), inst.budget())?;
            let cfg = AdaptiveConfig {
                opt: opt.clone(),
                grid_points,
                layers,
            };
            adaptive_run(inst, &cfg, &pool)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum MethodSpec {
    Penalty {
        lambdas: Vec<f64>,
        layers: Vec<usize>,
    },
    Hwo {
        layers: Vec<usize>,
    },
    Ahwo {
        #[serde(default = "one_layer")]
        layers: Vec<usize>,
    },
}

fn one_layer() -> Vec<usize> {
    vec![1]
}

impl MethodSpec {
    fn variants(&self) -> Vec<(Method, usize)> {
        match self {
            MethodSpec::Penalty { lambdas, layers } => lambdas
                .iter()
                .flat_map(|&lambda| layers.iter().map(move |&p| (Method::Penalty { lambda }, p)))
                .collect(),
            MethodSpec::Hwo { layers } => layers.iter().map(|&p| (Method::Hwo, p)).collect(),
            MethodSpec::Ahwo { layers } => layers.iter().map(|&p| (Method::Ahwo, p)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub instances_per_size: usize,
    /// Optimizer restarts per (instance, method variant).
    pub seeds_per_instance: usize,
    pub kind: ProblemKind,
    pub weight_max: u64,
    pub energy_levels: u64,
    pub methods: Vec<MethodSpec>,
    pub seed_base: u64,
    pub output_dir: Option<PathBuf>,
    pub e0: E0Convention,
    pub constraint_tol: f64,
    pub grid_points: usize,
    pub opt: OptConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sizes: vec![6, 8, 10, 12],
            instances_per_size: 20,
            seeds_per_instance: 1,
            kind: ProblemKind::Portfolio,
            weight_max: 4,
            energy_levels: 3,
            methods: vec![
                MethodSpec::Ahwo { layers: vec![1] },
                MethodSpec::Penalty {
                    lambdas: vec![10.0, 100.0],
                    layers: vec![5],
                },
            ],
            seed_base: 0,
            output_dir: None,
            e0: E0Convention::Feasible,
            constraint_tol: DEFAULT_CONSTRAINT_TOL,
            grid_points: 17,
            opt: OptConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidArgument("sizes must be nonempty".into()));
        }
        if self.instances_per_size == 0 || self.seeds_per_instance == 0 {
            return Err(Error::InvalidArgument(
                "instances_per_size and seeds_per_instance must be at least 1".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("no methods configured".into()));
        }
        if self.kind == ProblemKind::Custom {
            return Err(Error::InvalidArgument("experiments generate portfolio or twojet instances".into()));
        }
        self.opt.validate()
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn instance_seed(seed_base: u64, n: usize, index: usize) -> u64 {
    seed_base.wrapping_add(mix64(((n as u64) << 32) ^ index as u64))
}

fn optimizer_seed(instance_seed: u64, restart: usize) -> u64 {
    mix64(instance_seed ^ mix64(restart as u64 + 1))
}

pub fn generate_instance(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<ProblemInstance> {
    match cfg.kind {
        ProblemKind::Twojet => generate_twojet_instance(n, seed, cfg.energy_levels),
        _ => generate_portfolio_instance(n, seed, cfg.weight_max),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunFile {
    pub method: String,
    pub lambda: Option<f64>,
    pub layers: usize,
    pub n: usize,
    pub instance_index: usize,
    pub instance_seed: u64,
    pub restart: usize,
    pub optimizer_seed: u64,
    pub gate_model: &'static str,
    pub oracle: OracleResult,
    pub e0: f64,
    pub budget: u64,
    pub constraint_satisfied: bool,
    pub approximation_ratio: Option<f64>,
    pub result: RunResult,
}

impl RunFile {
    pub fn record(&self) -> RunRecord {
        RunRecord {
            method: self.method.clone(),
            lambda: self.lambda,
            layers: self.layers,
            n: self.n,
            hc_expect: self.result.final_eval.energy,
            hs_expect: self.result.final_eval.hs_expect,
            budget: self.budget,
            e0: self.e0,
            iterations: self.result.iteration_count,
            gates_total: self.result.gate_count.total,
        }
    }

    pub fn stem(&self) -> String {
        run_stem(self.method.as_str(), self.lambda, self.layers, self.n, self.instance_index, self.restart)
    }
}

fn run_stem(method: &str, lambda: Option<f64>, layers: usize, n: usize, index: usize, restart: usize) -> String {
    let lam = lambda.map(|l| format!("_lam{l}")).unwrap_or_default();
    format!("{method}{lam}_p{layers}_n{n}_i{index}_s{restart}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFailure {
    pub run: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub gate_model: &'static str,
    pub config: ExperimentConfig,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<RunFailure>,
    #[serde(skip)]
    pub runs: Vec<RunFile>,
}

impl ExperimentReport {
    pub fn records(&self) -> Vec<RunRecord> {
        self.runs.iter().map(RunFile::record).collect()
    }

    pub fn all_completed(&self) -> bool {
        self.failures.is_empty()
    }
}

struct Job {
    n: usize,
    index: usize,
}

/// Runs the sweep on `workers` threads and, when an output directory is set,
/// persists every run, the summary CSV and the plots.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    cfg.validate()?;
    let jobs: Vec<Job> = cfg
        .sizes
        .iter()
        .flat_map(|&n| (0..cfg.instances_per_size).map(move |index| Job { n, index }))
        .collect();
    let variants: Vec<(Method, usize)> = cfg.methods.iter().flat_map(MethodSpec::variants).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    let outcomes: Vec<Vec<std::result::Result<RunFile, RunFailure>>> =
        pool.install(|| jobs.par_iter().map(|job| run_job(cfg, job, &variants)).collect());

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for outcome in outcomes.into_iter().flatten() {
        match outcome {
            Ok(run) => runs.push(run),
            Err(f) => failures.push(f),
        }
    }
    let records: Vec<RunRecord> = runs.iter().map(RunFile::record).collect();
    let summary = crate::oracle::aggregate(&records, cfg.constraint_tol);
    let report = ExperimentReport {
        gate_model: GATE_MODEL,
        config: cfg.clone(),
        summary,
        failures,
        runs,
    };
    if let Some(dir) = &cfg.output_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

fn run_job(
    cfg: &ExperimentConfig,
    job: &Job,
    variants: &[(Method, usize)],
) -> Vec<std::result::Result<RunFile, RunFailure>> {
    let seed = instance_seed(cfg.seed_base, job.n, job.index);
    let fail_all = |error: String| {
        variants
            .iter()
            .flat_map(|(m, p)| {
                let error = error.clone();
                (0..cfg.seeds_per_instance).map(move |r| {
                    Err(RunFailure {
                        run: run_stem(m.name(), m.lambda(), *p, job.n, job.index, r),
                        error: error.clone(),
                    })
                })
            })
            .collect()
    };
    let inst = match generate_instance(cfg, job.n, seed) {
        Ok(i) => i,
        Err(e) => return fail_all(e.to_string()),
    };
    let oracle = match brute_force(&inst) {
        Ok(o) => o,
        Err(e) => return fail_all(e.to_string()),
    };
    let e0 = oracle.e0(cfg.e0);
    let mut out = Vec::new();
    for &(method, layers) in variants {
        for restart in 0..cfg.seeds_per_instance {
            let opt_seed = optimizer_seed(seed, restart);
            let opt = OptConfig {
                seed: opt_seed,
                ..cfg.opt.clone()
            };
            let stem = run_stem(method.name(), method.lambda(), layers, job.n, job.index, restart);
            out.push(
                run_method(&inst, method, layers, &opt, cfg.grid_points)
                    .map(|result| {
                        let feasible =
                            constraint_satisfied(result.final_eval.hs_expect, inst.budget(), cfg.constraint_tol);
                        RunFile {
                            method: method.name().to_string(),
                            lambda: method.lambda(),
                            layers,
                            n: job.n,
                            instance_index: job.index,
                            instance_seed: seed,
                            restart,
                            optimizer_seed: opt_seed,
                            gate_model: GATE_MODEL,
                            oracle: oracle.clone(),
                            e0,
                            budget: inst.budget(),
                            constraint_satisfied: feasible,
                            approximation_ratio: crate::oracle::approximation_ratio(
                                result.final_eval.energy,
                                e0,
                                feasible,
                            )
                            .ok(),
                            result,
                        }
                    })
                    .map_err(|e| RunFailure {
                        run: stem,
                        error: e.to_string(),
                    }),
            );
        }
    }
    out
}

fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    let runs_dir = dir.join("runs");
    fs::create_dir_all(&runs_dir)?;
    for run in &report.runs {
        let stem = run.stem();
        fs::write(runs_dir.join(format!("{stem}.json")), serde_json::to_string_pretty(run)?)?;
        fs::write(runs_dir.join(format!("{stem}.trace.csv")), run.result.trace_csv())?;
    }
    fs::write(dir.join("summary.csv"), summary_csv(&report.summary))?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    if !report.summary.is_empty() {
        emit_plots(&report.summary, &deviation_series(&report.runs), dir)?;
    }
    Ok(())
}

/// Energy-deviation curves `|⟨H_c⟩ − E_0|` of every run in one series.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationSeries {
    pub label: String,
    pub runs: Vec<Vec<f64>>,
}

pub fn deviation_series(runs: &[RunFile]) -> Vec<DeviationSeries> {
    let mut groups: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for run in runs {
        let label = series_label(&run.method, run.lambda, run.layers, Some(run.n));
        let curve = run.result.trace.iter().map(|r| (r.energy - run.e0).abs()).collect();
        groups.entry(label).or_default().push(curve);
    }
    groups
        .into_iter()
        .map(|(label, runs)| DeviationSeries { label, runs })
        .collect()
}

fn series_label(method: &str, lambda: Option<f64>, layers: usize, n: Option<usize>) -> String {
    let mut s = method.to_string();
    if let Some(l) = lambda {
        let _ = write!(s, " lam={l}");
    }
    let _ = write!(s, " p={layers}");
    if let Some(n) = n {
        let _ = write!(s, " n={n}");
    }
    s
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    spread: Option<Vec<f64>>,
}

struct Panel {
    title: String,
    xlabel: String,
    ylabel: String,
    series: Vec<Series>,
}

/// Writes `ratios.svg`, `energy_deviation.svg` and `gates.svg`, each with a
/// sibling CSV of the plotted numbers. Returns the SVG paths.
pub fn emit_plots(summary: &[SummaryRow], traces: &[DeviationSeries], dir: &Path) -> Result<Vec<PathBuf>> {
    if summary.is_empty() {
        return Err(Error::EmptySummary);
    }
    fs::create_dir_all(dir)?;
    let figures = [
        ("ratios", ratio_panels(summary)),
        ("energy_deviation", vec![deviation_panel(traces)]),
        ("gates", vec![gate_panel(summary)]),
    ];
    let mut paths = Vec::new();
    for (name, panels) in figures {
        let svg_path = dir.join(format!("{name}.svg"));
        fs::write(&svg_path, render_svg(&panels))?;
        fs::write(dir.join(format!("{name}.csv")), panels_csv(&panels))?;
        paths.push(svg_path);
    }
    Ok(paths)
}

fn ratio_panels(summary: &[SummaryRow]) -> Vec<Panel> {
    let by_n = |metric: fn(&SummaryRow) -> f64| {
        let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for r in summary {
            groups
                .entry(series_label(&r.method, r.lambda, r.layers, None))
                .or_default()
                .push((r.n as f64, metric(r)));
        }
        to_series(groups)
    };
    let by_layers = |metric: fn(&SummaryRow) -> f64| {
        let mut groups: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        for r in summary {
            let mut label = r.method.clone();
            if let Some(l) = r.lambda {
                let _ = write!(label, " lam={l}");
            }
            groups
                .entry(label)
                .or_default()
                .entry(r.layers)
                .or_default()
                .push(metric(r));
        }
        groups
            .into_iter()
            .map(|(label, pts)| Series {
                label,
                points: pts
                    .into_iter()
                    .map(|(p, v)| (p as f64, crate::oracle::mean(&v)))
                    .collect(),
                spread: None,
            })
            .collect()
    };
    let cr = |r: &SummaryRow| r.constraint_ratio;
    let ar = |r: &SummaryRow| r.mean_ar;
    vec![
        panel("Constraint ratio vs n", "n", "constraint ratio", by_n(cr)),
        panel("Approximation ratio vs n", "n", "approximation ratio", by_n(ar)),
        panel("Constraint ratio vs layers", "layers", "constraint ratio", by_layers(cr)),
        panel("Approximation ratio vs layers", "layers", "approximation ratio", by_layers(ar)),
    ]
}

fn gate_panel(summary: &[SummaryRow]) -> Panel {
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in summary {
        groups
            .entry(series_label(&r.method, r.lambda, r.layers, None))
            .or_default()
            .push((r.n as f64, r.mean_gates_total));
    }
    panel("Total gates vs n", "n", "gates", to_series(groups))
}

fn deviation_panel(traces: &[DeviationSeries]) -> Panel {
    let series = traces
        .iter()
        .filter(|t| !t.runs.is_empty())
        .map(|t| {
            let len = t.runs.iter().map(Vec::len).max().unwrap_or(0);
            let mut points = Vec::with_capacity(len);
            let mut spread = Vec::with_capacity(len);
            for i in 0..len {
                // finished runs hold their last value
                let col: Vec<f64> = t
                    .runs
                    .iter()
                    .filter_map(|r| r.get(i).or(r.last()).copied())
                    .collect();
                let m = crate::oracle::mean(&col);
                let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / col.len() as f64;
                points.push((i as f64, m));
                spread.push(var.sqrt());
            }
            Series {
                label: t.label.clone(),
                points,
                spread: Some(spread),
            }
        })
        .collect();
    panel("Energy deviation |<H_c> - E_0|", "iteration", "energy deviation", series)
}

fn panel(title: &str, xlabel: &str, ylabel: &str, series: Vec<Series>) -> Panel {
    Panel {
        title: title.into(),
        xlabel: xlabel.into(),
        ylabel: ylabel.into(),
        series,
    }
}

fn to_series(groups: BTreeMap<String, Vec<(f64, f64)>>) -> Vec<Series> {
    groups
        .into_iter()
        .map(|(label, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                label,
                points,
                spread: None,
            }
        })
        .collect()
}

fn panels_csv(panels: &[Panel]) -> String {
    let mut out = String::from("panel,series,x,y,spread\n");
    for p in panels {
        for s in &p.series {
            for (k, (x, y)) in s.points.iter().enumerate() {
                let spread = s.spread.as_ref().map(|v| v[k].to_string()).unwrap_or_default();
                let _ = writeln!(out, "{},{},{x},{y},{spread}", p.title, s.label);
            }
        }
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const PANEL_W: f64 = 520.0;
const PANEL_H: f64 = 340.0;
const MARGIN: f64 = 56.0;

fn render_svg(panels: &[Panel]) -> String {
    let cols = if panels.len() > 1 { 2 } else { 1 };
    let rows = panels.len().div_ceil(cols);
    let (w, h) = (PANEL_W * cols as f64, PANEL_H * rows as f64);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" \
         font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    );
    for (k, p) in panels.iter().enumerate() {
        let ox = PANEL_W * (k % cols) as f64;
        let oy = PANEL_H * (k / cols) as f64;
        render_panel(&mut svg, p, ox, oy);
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn render_panel(svg: &mut String, p: &Panel, ox: f64, oy: f64) {
    let pts = || p.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = bounds(pts().map(|q| q.0));
    let (y0, y1) = bounds(p.series.iter().flat_map(|s| {
        s.points.iter().enumerate().flat_map(move |(k, q)| {
            let d = s.spread.as_ref().map_or(0.0, |v| v[k]);
            [q.1 - d, q.1 + d]
        })
    }));
    let (left, top) = (ox + MARGIN, oy + 28.0);
    let (pw, ph) = (PANEL_W - MARGIN - 16.0, PANEL_H - MARGIN - 28.0);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        left + pw / 2.0,
        oy + 18.0,
        escape(&p.title)
    );
    let _ = writeln!(
        svg,
        "<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"#444\"/>"
    );
    for t in 0..=4 {
        let fx = x0 + (x1 - x0) * t as f64 / 4.0;
        let fy = y0 + (y1 - y0) * t as f64 / 4.0;
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            sx(fx),
            top + ph + 14.0,
            tick(fx)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            left - 4.0,
            sy(fy) + 4.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        left + pw / 2.0,
        top + ph + 32.0,
        escape(&p.xlabel)
    );
    let _ = writeln!(
        svg,
        "<text transform=\"translate({},{}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
        ox + 14.0,
        top + ph / 2.0,
        escape(&p.ylabel)
    );
    for (k, s) in p.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if let Some(spread) = &s.spread {
            let upper = s.points.iter().zip(spread).map(|(q, d)| (q.0, q.1 + d));
            let lower = s.points.iter().zip(spread).rev().map(|(q, d)| (q.0, q.1 - d));
            let band: Vec<String> = upper
                .chain(lower)
                .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>",
                band.join(" ")
            );
        }
        let line: Vec<String> = s
            .points
            .iter()
            .filter(|q| q.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            line.join(" ")
        );
        if s.spread.is_none() {
            for c in &line {
                let (x, y) = c.split_once(',').expect("formatted pair");
                let _ = writeln!(svg, "<circle cx=\"{x}\" cy=\"{y}\" r=\"2.5\" fill=\"{color}\"/>");
            }
        }
        let ly = top + 12.0 + 14.0 * k as f64;
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{ly}\" text-anchor=\"end\" fill=\"{color}\">{}</text>",
            left + pw - 6.0,
            escape(&s.label)
        );
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || (v != 0.0 && v.abs() < 0.01) {
        format!("{v:.1e}")
    } else {
        format!("{:.2}", v)
    }
}

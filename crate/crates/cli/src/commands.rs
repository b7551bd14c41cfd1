use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use patchwork_core::extract::{
    extract_tropical, marching_cubes, marching_squares, sample_grid_capped, ExtractOptions, ExtractedComplex,
};
use patchwork_core::init::{digital_curve_grid, digital_curve_hex, digital_surface_grid, ShapeOracle};
use patchwork_core::io::{self, box_normalization, InputProvenance, RunDir, RunManifest};
use patchwork_core::metrics::{compare_meshes, MetricReport, DEFAULT_SAMPLES};
use patchwork_core::pipeline::{self, DemoConfig, MetricRow};
use patchwork_core::train::fit as fit_model;
use patchwork_core::{eval_field, eval_tropical, BBox, FitConfig, Group, OrientedSampleSet, PatchworkModel, TriMesh};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{ConstructArgs, ConstructKind, DemoArgs, EvalArgs, ExtractArgs, ExtractMode, FitArgs, Global, MetricsArgs, RowFormat};

pub const CHECKPOINT_FILE: &str = "model.json";
pub const REPORT_FILE: &str = "fit.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

const DESK_MC: usize = 128;
const PAPER_MC: usize = 512;
const PAPER_METRIC_SAMPLES: usize = 1_000_000;

/// Prints `text` or, with `--json`, the JSON value.
fn emit(g: &Global, value: &Value, text: &str) -> Result<()> {
    if g.json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        print!("{text}");
    }
    Ok(())
}

fn open_run_dir(g: &Global, default: &str) -> Result<RunDir> {
    let path = g.run_dir.clone().unwrap_or_else(|| PathBuf::from(default));
    RunDir::open(&path).with_context(|| format!("opening run directory {}", path.display()))
}

fn load_model(path: &Path) -> Result<PatchworkModel> {
    io::load_checkpoint(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn load_tri_mesh(path: &Path) -> Result<TriMesh> {
    Ok(io::load_mesh(path)
        .with_context(|| format!("loading mesh {}", path.display()))?
        .mesh)
}

fn mc_resolution(g: &Global, flag: Option<usize>) -> usize {
    flag.unwrap_or(if g.paper_scale { PAPER_MC } else { DESK_MC })
}

fn metric_samples(g: &Global, flag: Option<usize>) -> usize {
    flag.unwrap_or(if g.paper_scale { PAPER_METRIC_SAMPLES } else { DEFAULT_SAMPLES })
}

/// Oriented samples from a shape name, a point cloud or a mesh, normalized
/// into [-1, 1]^d. The second value records where they came from.
fn load_samples(a: &FitArgs, rng: &mut ChaCha8Rng) -> Result<(OrientedSampleSet, InputProvenance)> {
    let path = Path::new(&a.input);
    if !path.exists() && a.input.contains('(') {
        let shape = ShapeOracle::parse(&a.input)?;
        let samples = pipeline::sample_shape(&shape, a.samples, rng)?;
        return Ok((samples, InputProvenance::named(&shape.name())));
    }
    let provenance = InputProvenance::of_file(path).with_context(|| format!("reading {}", path.display()))?;
    if io::is_point_cloud(path)? {
        let mut cloud = io::load_point_cloud(path, a.dim)?;
        let bbox = BBox::from_points(cloud.points.iter()).context("point cloud is empty")?;
        let t = box_normalization(&bbox, a.dim)?;
        for p in &mut cloud.points {
            *p = t.apply(p);
        }
        return Ok((cloud, provenance));
    }
    let mesh = load_tri_mesh(path)?;
    let (mesh, _) = io::normalize_to_box(&mesh)?;
    Ok((pipeline::sample_mesh_oriented(&mesh, a.samples, rng)?, provenance))
}

fn fit_config(g: &Global, a: &FitArgs) -> Result<FitConfig> {
    let mut cfg = match &a.config {
        Some(p) => FitConfig::load(p).with_context(|| format!("loading config {}", p.display()))?,
        None => FitConfig::default(),
    };
    cfg.seed = g.seed;
    if let Some(v) = a.iterations {
        cfg.iterations = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.prune_interval {
        cfg.prune_interval = v;
    }
    if a.no_prune {
        cfg.prune_interval = 0;
    }
    if a.kaiming {
        cfg.geometric_init = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn fit(g: &Global, a: &FitArgs) -> Result<()> {
    let cfg = fit_config(g, a)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (samples, provenance) = load_samples(a, &mut rng)?;
    let run = open_run_dir(g, "fit")?;
    let mut manifest = RunManifest::new("fit", serde_json::to_value(&cfg)?, Some(provenance), cfg.seed);
    log::info!("fitting {} samples from {}", samples.len(), samples.source);

    let (model, report) = fit_model(&samples, &cfg)?;
    io::save_checkpoint(&model, &run.join(CHECKPOINT_FILE))?;
    fs::write(run.join(REPORT_FILE), report.to_csv())?;
    manifest.outputs = vec![CHECKPOINT_FILE.into(), REPORT_FILE.into()];
    manifest.save(&run.join(MANIFEST_FILE))?;

    let losses = report.final_losses();
    let value = json!({
        "run_dir": run.path(),
        "samples": samples.len(),
        "initial_terms": report.initial_terms,
        "final_active_terms": report.final_active_terms,
        "parameters": report.final_parameter_count,
        "prune_events": report.prune_events,
        "skipped_steps": report.skipped_steps,
        "final_losses": losses,
        "wall_time_secs": report.wall_time_secs,
    });
    let mut text = format!(
        "fit {} samples: {} -> {} active terms, {} parameters, {:.1} s\n",
        samples.len(),
        report.initial_terms,
        report.final_active_terms,
        report.final_parameter_count,
        report.wall_time_secs
    );
    if let Some(l) = losses {
        let _ = writeln!(text, "final loss {:.6e} (surface {:.3e}, normal {:.3e}, occupancy {:.3e})", l.total, l.surface, l.normal, l.occupancy);
    }
    let _ = writeln!(text, "wrote {}", run.path().display());
    emit(g, &value, &text)
}

fn parse_point(s: &str, dim: usize) -> Result<Vec<f64>> {
    let coords: Vec<f64> = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad coordinate '{t}'")))
        .collect::<Result<_>>()?;
    if coords.len() != dim {
        bail!(patchwork_core::Error::DimensionMismatch {
            expected: dim,
            got: coords.len()
        });
    }
    Ok(coords)
}

pub fn eval(g: &Global, a: &EvalArgs) -> Result<()> {
    let model = load_model(&a.checkpoint)?;
    let mut points = Vec::new();
    for s in &a.at {
        points.push(parse_point(s, model.dim)?);
    }
    if let Some(p) = &a.points {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            points.push(parse_point(line, model.dim)?);
        }
    }
    if points.is_empty() {
        bail!(patchwork_core::Error::EmptyInput("points (use --at or --points)"));
    }
    let mut rows = Vec::with_capacity(points.len());
    let mut text = String::new();
    for x in &points {
        let smooth = eval_field(&model, x)?;
        let tropical = eval_tropical(&model, x)?;
        let coords: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        let grad: Vec<String> = smooth.grad_x.iter().map(|c| format!("{c:.6}")).collect();
        let _ = writeln!(
            text,
            "{}  F={:.12e}  f={:.12e}  grad=[{}]",
            coords.join(","),
            smooth.value,
            tropical,
            grad.join(",")
        );
        rows.push(json!({ "point": x, "smooth": smooth.value, "tropical": tropical, "grad": smooth.grad_x }));
    }
    emit(g, &json!({ "points": rows }), &text)
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Writes a 2D or 3D complex as OBJ (with sidecar) or, in 2D, SVG.
fn write_complex(c: &ExtractedComplex, bbox: &BBox, out: &Path) -> Result<()> {
    match (extension(out).as_str(), c.dim) {
        ("svg", 2) => io::save_svg(c, bbox, out)?,
        ("svg", _) => bail!(patchwork_core::Error::UnsupportedFormat("SVG output needs a 2D field".into())),
        ("obj", _) => io::save_complex(c, out)?,
        (other, _) => bail!(patchwork_core::Error::UnsupportedFormat(format!("output extension '{other}'"))),
    }
    Ok(())
}

pub fn extract(g: &Global, a: &ExtractArgs) -> Result<()> {
    let model = load_model(&a.checkpoint)?;
    let (pieces, value) = match a.mode {
        ExtractMode::Mc => {
            let res = mc_resolution(g, a.resolution);
            let bbox = pipeline::extraction_box(model.dim);
            let grid = sample_grid_capped(&model, res, &bbox, a.max_nodes)?;
            if model.dim == 3 {
                let mesh = marching_cubes(&grid)?;
                if extension(&a.out) != "obj" {
                    bail!(patchwork_core::Error::UnsupportedFormat("3D output must be OBJ".into()));
                }
                io::save_obj(&mesh, &a.out)?;
                let v = json!({ "mode": "mc", "resolution": res, "vertices": mesh.vertices.len(), "faces": mesh.faces.len() });
                (mesh.faces.len(), v)
            } else {
                let c = marching_squares(&grid)?;
                write_complex(&c, &bbox, &a.out)?;
                let v = json!({ "mode": "mc", "resolution": res, "vertices": c.vertices.len(), "segments": c.surface_count() });
                (c.surface_count(), v)
            }
        }
        ExtractMode::Tropical => {
            let opts = ExtractOptions::new(model.dim);
            let c = extract_tropical(&model, &opts)?;
            write_complex(&c, &opts.bbox, &a.out)?;
            for d in &c.degeneracies {
                log::warn!("degenerate arrangement: {d:?}");
            }
            let v = json!({
                "mode": "tropical",
                "vertices": c.vertices.len(),
                "surface_cells": c.surface_count(),
                "active_cells": c.active_count(),
                "euler_characteristic": c.euler_characteristic(),
                "degeneracies": c.degeneracies.len(),
            });
            (c.surface_count(), v)
        }
    };
    if pieces == 0 {
        log::warn!("the field has no zero set inside the extraction box; wrote an empty file");
    }
    let mut value = value;
    value["out"] = json!(a.out);
    value["dim"] = json!(model.dim);
    let text = format!("wrote {} ({pieces} pieces)\n", a.out.display());
    emit(g, &value, &text)
}

/// One row in the column order CH, HD, FS, #Params.
pub fn format_row(row: &MetricRow, format: RowFormat, header: bool) -> String {
    let m = &row.metrics;
    let mut s = String::new();
    match format {
        RowFormat::Csv => {
            if header {
                s.push_str("label,CH,HD,FS,#Params\n");
            }
            let _ = writeln!(s, "{},{},{},{},{}", row.label, m.chamfer, m.hausdorff, m.fscore, row.parameters);
        }
        RowFormat::Text => {
            if header {
                let _ = writeln!(s, "{:<20} {:>12} {:>12} {:>8} {:>10}", "label", "CH", "HD", "FS", "#Params");
            }
            let _ = writeln!(
                s,
                "{:<20} {:>12.6} {:>12.6} {:>8.2} {:>10}",
                row.label, m.chamfer, m.hausdorff, m.fscore, row.parameters
            );
        }
    }
    s
}

fn row_json(row: &MetricRow) -> Value {
    json!({
        "label": row.label,
        "chamfer": row.metrics.chamfer,
        "hausdorff": row.metrics.hausdorff,
        "fscore": row.metrics.fscore,
        "tau": row.metrics.tau,
        "samples": row.metrics.samples,
        "parameters": row.parameters,
    })
}

pub fn metrics(g: &Global, a: &MetricsArgs) -> Result<()> {
    let gt = load_tri_mesh(&a.gt)?;
    let cand = load_tri_mesh(&a.candidate)?;
    let parameters = match &a.checkpoint {
        Some(p) => load_model(p)?.parameter_count(),
        None => 0,
    };
    let report: MetricReport = compare_meshes(&cand, &gt, metric_samples(g, a.samples), g.seed)?;
    let row = MetricRow {
        label: a.label.clone(),
        parameters,
        metrics: report,
    };
    emit(g, &row_json(&row), &format_row(&row, a.format, true))
}

pub fn construct(g: &Global, a: &ConstructArgs) -> Result<()> {
    let shape = ShapeOracle::parse(&a.shape)?;
    let want = if a.kind == ConstructKind::Grid3 { 3 } else { 2 };
    if shape.dim() != want {
        bail!(patchwork_core::Error::DimensionMismatch {
            expected: want,
            got: shape.dim()
        });
    }
    let model = match a.kind {
        ConstructKind::Grid2 => digital_curve_grid(a.n, &shape)?,
        ConstructKind::Hex2 => digital_curve_hex(a.n, &shape)?,
        ConstructKind::Grid3 => digital_surface_grid(a.n, &shape, a.max_terms)?,
    };
    io::save_checkpoint(&model, &a.out)?;
    let mut value = json!({
        "out": a.out,
        "terms": model.len(),
        "plus": model.active_in_group(Group::Plus),
        "minus": model.active_in_group(Group::Minus),
        "parameters": model.parameter_count(),
    });
    let mut text = format!(
        "wrote {}: {} terms ({} outside, {} inside)\n",
        a.out.display(),
        model.len(),
        model.active_in_group(Group::Plus),
        model.active_in_group(Group::Minus)
    );
    if a.render {
        let opts = ExtractOptions::new(model.dim);
        let c = extract_tropical(&model, &opts)?;
        let out = a.out.with_extension(if model.dim == 2 { "svg" } else { "obj" });
        write_complex(&c, &opts.bbox, &out)?;
        if c.surface_count() == 0 {
            log::warn!("the constructed shape is empty; wrote an empty rendering");
        }
        let _ = writeln!(text, "rendered {} ({} pieces)", out.display(), c.surface_count());
        value["render"] = json!({ "out": out, "surface_cells": c.surface_count() });
    }
    emit(g, &value, &text)
}

pub fn demo(g: &Global, a: &DemoArgs) -> Result<()> {
    let mut cfg = DemoConfig {
        shape: a.shape.clone(),
        samples: a.samples,
        construct_n: a.construct_n,
        ..DemoConfig::default()
    };
    cfg.fit.seed = g.seed;
    if let Some(it) = a.iterations {
        cfg.fit.iterations = it;
    }
    cfg.mc_resolution = mc_resolution(g, a.resolution);
    cfg.metric_samples = metric_samples(g, a.metric_samples);
    let run = open_run_dir(g, "demo")?;
    let mut manifest = RunManifest::new("demo", serde_json::to_value(&cfg)?, Some(InputProvenance::named(&cfg.shape)), g.seed);

    let out = pipeline::run_demo(&cfg)?;
    let files = ["model.json", "fit.csv", "constructed.json", "mesh.obj", "metrics.csv"];
    io::save_checkpoint(&out.model, &run.join(files[0]))?;
    fs::write(run.join(files[1]), out.report.to_csv())?;
    io::save_checkpoint(&out.constructed, &run.join(files[2]))?;
    io::save_obj(&out.mesh, &run.join(files[3]))?;
    let mut csv = String::new();
    let mut table = String::new();
    for (i, row) in out.rows.iter().enumerate() {
        csv.push_str(&format_row(row, RowFormat::Csv, i == 0));
        table.push_str(&format_row(row, RowFormat::Text, i == 0));
    }
    fs::write(run.join(files[4]), &csv)?;
    manifest.outputs = files.iter().map(|s| s.to_string()).collect();
    manifest.save(&run.join(MANIFEST_FILE))?;

    let value = json!({
        "run_dir": run.path(),
        "rows": out.rows.iter().map(row_json).collect::<Vec<_>>(),
        "final_active_terms": out.report.final_active_terms,
        "wall_time_secs": out.report.wall_time_secs,
    });
    let _ = writeln!(table, "wrote {}", run.path().display());
    emit(g, &value, &table)
}

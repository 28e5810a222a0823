use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::benchmark::PosteriorSolution;
use crate::error::{Error, Result};
use crate::harness::{ExperimentResult, Stats, TimeSeries};
use crate::hipp::RunTrace;
use crate::planner::{PlannerRun, RunDetail};
use crate::world::{Cell, GridMap, Point2};

/// Pixels per cell in rendered maps.
const CELL_PX: f64 = 20.0;

const SUMMARY_HEADER: [&str; 12] = [
    "planner",
    "scenario",
    "row",
    "steps",
    "ttd_m",
    "identified_cells",
    "identified_free_cells",
    "cells_per_td",
    "cells_per_td_w",
    "equivalent_cells",
    "equivalent_cells_per_td",
    "equivalent_cells_per_td_w",
];

type StatPick = fn(&Stats) -> f64;

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(&row).map_err(wrap)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One row per run followed by mean, std and median rows, per experiment.
pub fn write_summary(path: &Path, results: &[ExperimentResult]) -> Result<()> {
    let mut rows = Vec::new();
    for r in results {
        for run in &r.runs {
            let s = &run.summary;
            rows.push(vec![
                r.planner.clone(),
                r.scenario.clone(),
                s.seed.to_string(),
                s.steps.to_string(),
                num(s.ttd_m),
                s.identified_cells.to_string(),
                s.identified_free_cells.to_string(),
                num(s.cells_per_td),
                num(s.cells_per_td_w()),
                s.equivalent_cells.to_string(),
                num(s.equivalent_cells_per_td),
                num(s.equivalent_cells_per_td_w()),
            ]);
        }
        let a = &r.aggregate;
        let cw = r.map.cell_width();
        let pick: [(&str, StatPick); 3] = [("mean", |s| s.mean), ("std", |s| s.std), ("median", |s| s.median)];
        for (label, f) in pick {
            rows.push(vec![
                r.planner.clone(),
                r.scenario.clone(),
                label.to_string(),
                num(f(&a.steps)),
                num(f(&a.ttd_m)),
                num(f(&a.identified_cells)),
                num(f(&a.identified_free_cells)),
                num(f(&a.cells_per_td)),
                num(f(&a.cells_per_td) * cw),
                num(f(&a.equivalent_cells)),
                num(f(&a.equivalent_cells_per_td)),
                num(f(&a.equivalent_cells_per_td) * cw),
            ]);
        }
    }
    write_rows(path, &SUMMARY_HEADER, rows)
}

pub fn write_timeseries(path: &Path, ts: &TimeSeries) -> Result<()> {
    let rows = ts.points.iter().map(|p| {
        let cumulative = if p.distance_m > 0.0 {
            p.identified_cells as f64 / p.distance_m
        } else {
            0.0
        };
        vec![
            p.k.to_string(),
            p.identified_cells.to_string(),
            num(p.distance_m),
            num(p.cells_per_m),
            num(cumulative),
        ]
    });
    write_rows(
        path,
        &[
            "k",
            "identified_cells",
            "distance_m",
            "cells_per_m",
            "cumulative_cells_per_m",
        ],
        rows,
    )
}

pub fn write_trace(path: &Path, trace: &RunTrace, cell_width: f64) -> Result<()> {
    let rows = trace.steps.iter().map(|s| {
        vec![
            s.k.to_string(),
            num(s.pose.position.x * cell_width),
            num(s.pose.position.y * cell_width),
            num(s.pose.heading),
            num(s.travelled * cell_width),
            s.identified_cells.to_string(),
            s.confident_cells.to_string(),
            u8::from(s.rrt_fallback).to_string(),
        ]
    });
    write_rows(
        path,
        &[
            "k",
            "x_m",
            "y_m",
            "theta_rad",
            "ttd_m",
            "identified_cells",
            "confident_cells",
            "rrt_fallback",
        ],
        rows,
    )
}

/// Waypoints first, then the path vertices in visiting order.
pub fn write_solution(path: &Path, sol: &PosteriorSolution, cell_width: f64) -> Result<()> {
    let row = |kind: &str, i: usize, p: &Point2| {
        vec![
            kind.to_string(),
            i.to_string(),
            num(p.x * cell_width),
            num(p.y * cell_width),
        ]
    };
    let rows = sol
        .waypoints
        .positions
        .iter()
        .enumerate()
        .map(|(i, p)| row("waypoint", i, p))
        .chain(sol.route.iter().enumerate().map(|(i, p)| row("path", i, p)));
    write_rows(path, &["kind", "index", "x_m", "y_m"], rows)
}

/// Polyline and waypoints (cell widths) read back from a trace or solution
/// CSV. Rows of kind `waypoint` are waypoints; everything else is path.
pub fn read_path_csv(path: &Path, cell_width: f64) -> Result<(Vec<Point2>, Vec<Point2>)> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    let headers = r.headers().map_err(wrap)?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(xi), Some(yi)) = (col("x_m"), col("y_m")) else {
        return Err(Error::Config(format!("{}: needs x_m and y_m columns", path.display())));
    };
    let kind = col("kind");
    let (mut line, mut waypoints) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(wrap)?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("{}: bad number in row {:?}", path.display(), rec)))
        };
        let p = Point2::new(field(xi)? / cell_width, field(yi)? / cell_width);
        if kind.and_then(|k| rec.get(k)) == Some("waypoint") {
            waypoints.push(p);
        } else {
            line.push(p);
        }
    }
    Ok((line, waypoints))
}

/// Grid with obstacles in dark grey, `missed` cells in amber, the path in
/// blue and waypoints in red. The map's row 0 is drawn at the bottom.
pub fn render_svg(map: &GridMap, path: &[Point2], missed: &[Cell], waypoints: &[Point2]) -> String {
    let (w, h) = (map.width() as f64 * CELL_PX, map.height() as f64 * CELL_PX);
    let px = |p: Point2| (p.x * CELL_PX, (map.height() as f64 - p.y) * CELL_PX);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let cell_rect = |s: &mut String, c: Cell, fill: &str| {
        let (x, y) = px(Point2::new(c.col as f64, c.row as f64 + 1.0));
        let _ = writeln!(
            s,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{CELL_PX}" height="{CELL_PX}" fill="{fill}"/>"#
        );
    };
    for c in map.cells().filter(|&c| map.is_occupied(c)) {
        cell_rect(&mut s, c, "#404040");
    }
    for &c in missed {
        cell_rect(&mut s, c, "#f2b134");
    }
    let _ = writeln!(s, r##"<g stroke="#d0d0d0" stroke-width="0.5">"##);
    for col in 0..=map.width() {
        let x = col as f64 * CELL_PX;
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="0" x2="{x:.2}" y2="{h}"/>"#);
    }
    for row in 0..=map.height() {
        let y = row as f64 * CELL_PX;
        let _ = writeln!(s, r#"<line x1="0" y1="{y:.2}" x2="{w}" y2="{y:.2}"/>"#);
    }
    let _ = writeln!(s, "</g>");
    if !path.is_empty() {
        let pts: Vec<String> = path
            .iter()
            .map(|&p| {
                let (x, y) = px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#1f5fbf" stroke-width="2"/>"##,
            pts.join(" ")
        );
        let (x, y) = px(path[0]);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="#2e9e44"/>"##);
    }
    for &p in waypoints {
        let (x, y) = px(p);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#c8312b"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

/// Directory name of one run's files.
pub fn run_dir_name(planner: &str, scenario: &str, seed: u64) -> String {
    format!("{planner}-{scenario}-seed{seed}")
}

/// Per-run files: `timeseries.csv`, `map.svg`, and `trace.csv` or
/// `solution.csv`.
pub fn write_run(dir: &Path, map: &GridMap, run: &PlannerRun) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_timeseries(&dir.join("timeseries.csv"), &run.timeseries)?;
    let waypoints = match &run.detail {
        RunDetail::Hipp(trace) => {
            write_trace(&dir.join("trace.csv"), trace, map.cell_width())?;
            Vec::new()
        }
        RunDetail::Posterior(sol) => {
            write_solution(&dir.join("solution.csv"), sol, map.cell_width())?;
            sol.waypoints.positions.clone()
        }
    };
    write_text(
        &dir.join("map.svg"),
        &render_svg(map, &run.path, &run.missed, &waypoints),
    )
}

/// `summary.csv` in `out_dir` plus one directory per run. Returns the
/// written run directories.
pub fn emit_outputs(results: &[ExperimentResult], out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    write_summary(&out_dir.join("summary.csv"), results)?;
    let mut dirs = Vec::new();
    for r in results {
        for run in &r.runs {
            let dir = out_dir.join(run_dir_name(&r.planner, &r.scenario, run.summary.seed));
            write_run(&dir, &r.map, run)?;
            dirs.push(dir);
        }
    }
    Ok(dirs)
}

//! Per-iteration run reports and CSV serialization of results.
//!
//! All commands share one report schema so downstream tooling can consume a
//! single format; columns that do not apply to a run are left empty. Numeric
//! cells use the shortest decimal form that parses back to the identical
//! float, so written files round-trip bit-exactly and stay deterministic.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::forward::{SpaceTimeField, TimeGrid};
use crate::mms::ErrorRow;
use crate::robust::RobustRun;
use crate::stackelberg::RscRun;
use crate::fem::Mesh1D;

/// Column header shared by every run report.
pub const REPORT_HEADER: &str =
    "iter,Jr_total,tracking,control_cost,disturbance_gain,grad_v_norm,grad_psi_norm,G,terminal_error,alpha,beta_step";

/// One report line; `None` cells serialize as empty.
#[derive(Debug, Clone, Default)]
pub struct ReportRow {
    pub iter: usize,
    pub jr_total: Option<f64>,
    pub tracking: Option<f64>,
    pub control_cost: Option<f64>,
    pub disturbance_gain: Option<f64>,
    pub grad_v_norm: Option<f64>,
    pub grad_psi_norm: Option<f64>,
    pub g: Option<f64>,
    pub terminal_error: Option<f64>,
    pub alpha: Option<f64>,
    pub beta_step: Option<f64>,
}

/// Per-iteration trace of a run plus its termination status. Notes carry
/// human-readable remarks (defaulted inputs, column reuse); they are printed
/// by the command-line driver, never embedded in the CSV.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub converged: bool,
    pub notes: Vec<String>,
}

impl RunReport {
    /// Report of a saddle-point run: one row per iteration of the
    /// alternating scheme.
    pub fn from_robust(run: &RobustRun) -> Self {
        let rows = run
            .iterations
            .iter()
            .map(|it| ReportRow {
                iter: it.k,
                jr_total: Some(it.breakdown.total),
                tracking: Some(it.breakdown.tracking),
                control_cost: Some(it.breakdown.control_cost),
                disturbance_gain: Some(it.breakdown.disturbance_gain),
                grad_v_norm: Some(it.grad_v_norm),
                grad_psi_norm: Some(it.grad_psi_norm),
                alpha: Some(it.alpha_used),
                beta_step: Some(it.beta_used),
                ..ReportRow::default()
            })
            .collect();
        RunReport { rows, converged: run.converged, notes: Vec::new() }
    }

    /// Report of an outer leader run. The leader gradient norm is carried in
    /// the `grad_v_norm` column (the schema has no dedicated column); a note
    /// records the reuse.
    pub fn from_rsc(run: &RscRun) -> Self {
        let rows = run
            .iterations
            .iter()
            .map(|it| ReportRow {
                iter: it.k,
                g: Some(it.g_value),
                terminal_error: Some(it.terminal_error),
                grad_v_norm: Some(it.grad_norm),
                alpha: Some(it.alpha),
                ..ReportRow::default()
            })
            .collect();
        RunReport {
            rows,
            converged: run.converged,
            notes: vec!["grad_v_norm column carries the leader gradient norm".into()],
        }
    }
}

fn push_cell(line: &mut String, value: Option<f64>) {
    line.push(',');
    if let Some(v) = value {
        let _ = write!(line, "{v}");
    }
}

/// Serialize a report: pinned header plus one line per row.
pub fn write_report_csv(report: &RunReport, path: &Path) -> io::Result<()> {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for row in &report.rows {
        let mut line = format!("{}", row.iter);
        push_cell(&mut line, row.jr_total);
        push_cell(&mut line, row.tracking);
        push_cell(&mut line, row.control_cost);
        push_cell(&mut line, row.disturbance_gain);
        push_cell(&mut line, row.grad_v_norm);
        push_cell(&mut line, row.grad_psi_norm);
        push_cell(&mut line, row.g);
        push_cell(&mut line, row.terminal_error);
        push_cell(&mut line, row.alpha);
        push_cell(&mut line, row.beta_step);
        out.push_str(&line);
        out.push('\n');
    }
    fs::write(path, out)
}

/// Serialize a space-time field as `t,x,value` rows in time-outer order.
pub fn write_field_csv(
    field: &SpaceTimeField,
    mesh: &Mesh1D,
    grid: &TimeGrid,
    path: &Path,
) -> io::Result<()> {
    write_field_csv_strided(field, mesh, grid, 1, path)
}

/// Like [`write_field_csv`] but keeping only every `stride`-th level; the
/// first and final levels are always written.
pub fn write_field_csv_strided(
    field: &SpaceTimeField,
    mesh: &Mesh1D,
    grid: &TimeGrid,
    stride: usize,
    path: &Path,
) -> io::Result<()> {
    assert_eq!(field.n_levels(), grid.n_levels());
    assert!(stride >= 1);
    let last = field.n_levels() - 1;
    let mut out = String::from("# t,x,value\n");
    for n in 0..field.n_levels() {
        if n % stride != 0 && n != last {
            continue;
        }
        let t = grid.time(n);
        for (&x, &v) in mesh.nodes().iter().zip(field.level(n).iter()) {
            let _ = writeln!(out, "{t},{x},{v}");
        }
    }
    fs::write(path, out)
}

/// Serialize an accuracy-study table, one row per (dt, n_elems) case.
pub fn write_mms_csv(rows: &[ErrorRow], path: &Path) -> io::Result<()> {
    let mut out = String::from("dt,n_elems,linf_error,l2_error,l2_error_squared\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.dt, r.n_elems, r.linf_error, r.l2_error, r.l2_error_squared
        );
    }
    fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::build_mesh;

    #[test]
    fn empty_report_serializes_to_header_only() {
        let dir = std::env::temp_dir().join("ks-report-empty");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.csv");
        write_report_csv(&RunReport::default(), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{REPORT_HEADER}\n"));
    }

    #[test]
    fn rows_round_trip_through_display_format() {
        let dir = std::env::temp_dir().join("ks-report-roundtrip");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.csv");
        let row = ReportRow {
            iter: 3,
            jr_total: Some(0.1 + 0.2),
            grad_v_norm: Some(1.0 / 3.0),
            alpha: Some(6.25e-4),
            ..ReportRow::default()
        };
        write_report_csv(
            &RunReport { rows: vec![row], converged: true, notes: Vec::new() },
            &path,
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let line = text.lines().nth(1).unwrap();
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 11);
        assert_eq!(cells[0], "3");
        assert_eq!(cells[1].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(cells[5].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(cells[9].parse::<f64>().unwrap(), 6.25e-4);
        assert_eq!(cells[2], "");
        assert_eq!(cells[10], "");
    }

    #[test]
    fn zero_field_rows_print_in_plain_decimal() {
        let mesh = build_mesh(30.0, 2).unwrap();
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let field = SpaceTimeField::zeros(&mesh, &grid);
        let dir = std::env::temp_dir().join("ks-field-small");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        write_field_csv(&field, &mesh, &grid, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# t,x,value");
        assert_eq!(lines[1], "0,-30,0");
        assert_eq!(lines.len(), 1 + 3 * 2);
    }

    #[test]
    fn field_csv_row_count_matches_grid_size() {
        let mesh = build_mesh(30.0, 50).unwrap();
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let field = SpaceTimeField::from_fn(&mesh, &grid, |x, t| x * t);
        let dir = std::env::temp_dir().join("ks-field-count");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        write_field_csv(&field, &mesh, &grid, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 51 * 51);
    }

    #[test]
    fn strided_output_keeps_the_endpoints() {
        let mesh = build_mesh(30.0, 2).unwrap();
        let grid = TimeGrid::new(1.0, 7).unwrap();
        let field = SpaceTimeField::from_fn(&mesh, &grid, |_, t| t);
        let dir = std::env::temp_dir().join("ks-field-stride");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        write_field_csv_strided(&field, &mesh, &grid, 3, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        // Levels 0, 3, 6 pass the stride; level 7 is the forced endpoint.
        let times: Vec<&str> =
            text.lines().skip(1).step_by(3).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(text.lines().count(), 1 + 4 * 3);
        assert_eq!(times.last().copied(), Some("1"));
    }

    #[test]
    fn field_csv_round_trips_bit_exactly() {
        let mesh = build_mesh(30.0, 7).unwrap();
        let grid = TimeGrid::new(1.0, 5).unwrap();
        let field = SpaceTimeField::from_fn(&mesh, &grid, |x, t| {
            ((x * 12.9898 + t * 78.233).sin() * 43758.5453).fract()
        });
        let dir = std::env::temp_dir().join("ks-field-exact");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.csv");
        write_field_csv(&field, &mesh, &grid, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let mut rows = text.lines().skip(1);
        for n in 0..grid.n_levels() {
            for &v in field.level(n).iter() {
                let line = rows.next().unwrap();
                let cell = line.rsplit(',').next().unwrap();
                assert_eq!(cell.parse::<f64>().unwrap().to_bits(), v.to_bits());
            }
        }
    }
}

//! CSV formats the `bench` binary speaks, plus a small SVG renderer for
//! profile curves.
//!
//! Results files round-trip exactly: floats are written with `Display`
//! (shortest representation that parses back to the same bits) and special
//! values appear as `inf` / `NaN`, which `f64::from_str` accepts.

use std::path::Path;

use crate::profile::ProfileCurve;
use crate::runner::BenchRecord;
use crate::BenchError;

pub const RESULTS_HEADER: [&str; 6] = [
    "solver",
    "problem",
    "min_runtime_s",
    "converged",
    "iterations",
    "final_f",
];

pub const PROFILE_HEADER: [&str; 3] = ["solver", "tau", "rho"];

/// Write a results table, one row per record, with the exact canonical
/// header.
pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(RESULTS_HEADER)?;
    for r in records {
        writer.write_record([
            r.solver.as_str(),
            r.problem.as_str(),
            &r.min_runtime.to_string(),
            &r.converged.to_string(),
            &r.iterations.to_string(),
            &r.final_f.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a results table back, validating the header and every field.
pub fn read_records(path: &Path) -> Result<Vec<BenchRecord>, BenchError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut rows = reader.records();
    let header = rows.next().ok_or(BenchError::Malformed {
        line: 1,
        reason: "empty file".to_string(),
    })??;
    if header.iter().ne(RESULTS_HEADER) {
        return Err(BenchError::Malformed {
            line: 1,
            reason: format!(
                "expected header `{}`, found `{}`",
                RESULTS_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut records = Vec::new();
    for (idx, row) in rows.enumerate() {
        let line = idx + 2;
        let row = row?;
        if row.len() != RESULTS_HEADER.len() {
            return Err(BenchError::Malformed {
                line,
                reason: format!("expected {} fields, found {}", RESULTS_HEADER.len(), row.len()),
            });
        }
        let field = |i: usize| row.get(i).unwrap_or_default();
        let parse_f64 = |i: usize| {
            field(i).parse::<f64>().map_err(|_| BenchError::Malformed {
                line,
                reason: format!("`{}` is not a number", field(i)),
            })
        };
        let converged = match field(3) {
            "true" => true,
            "false" => false,
            other => {
                return Err(BenchError::Malformed {
                    line,
                    reason: format!("`{other}` is not a boolean"),
                })
            }
        };
        let iterations = field(4).parse::<usize>().map_err(|_| BenchError::Malformed {
            line,
            reason: format!("`{}` is not an iteration count", field(4)),
        })?;
        records.push(BenchRecord {
            solver: field(0).to_string(),
            problem: field(1).to_string(),
            min_runtime: parse_f64(2)?,
            converged,
            iterations,
            final_f: parse_f64(5)?,
        });
    }
    Ok(records)
}

/// Write profile curves in long form: one row per (solver, τ) pair.
pub fn write_profile(path: &Path, curves: &[ProfileCurve]) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(PROFILE_HEADER)?;
    for curve in curves {
        for (tau, rho) in curve.taus.iter().zip(&curve.rho) {
            writer.write_record([
                curve.solver.as_str(),
                &tau.to_string(),
                &rho.to_string(),
            ])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Render profile curves as a simple self-contained SVG: log₂-scaled τ on
/// the x axis, fraction solved on the y axis, one stepped polyline per
/// solver.
pub fn plot_svg(path: &Path, curves: &[ProfileCurve]) -> Result<(), BenchError> {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const ML: f64 = 56.0; // left margin
    const MR: f64 = 16.0;
    const MT: f64 = 20.0;
    const MB: f64 = 46.0;
    const PALETTE: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];

    let tau_max = curves
        .iter()
        .filter_map(|c| c.taus.last().copied())
        .fold(2.0, f64::max);
    let span = tau_max.log2();
    let x = |tau: f64| ML + (W - ML - MR) * (tau.log2() / span);
    let y = |rho: f64| MT + (H - MT - MB) * (1.0 - rho);

    let mut svg = String::new();
    svg.push_str(&format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"##
    ));
    svg.push_str(&format!(
        r##"<rect width="{W}" height="{H}" fill="white"/>"##
    ));

    // Axes and gridlines.
    for i in 0..=4 {
        let rho = i as f64 / 4.0;
        let yy = y(rho);
        svg.push_str(&format!(
            r##"<line x1="{ML}" y1="{yy}" x2="{}" y2="{yy}" stroke="#ddd"/>"##,
            W - MR
        ));
        svg.push_str(&format!(
            r##"<text x="{}" y="{}" font-size="11" text-anchor="end" fill="#444">{rho:.2}</text>"##,
            ML - 6.0,
            yy + 4.0
        ));
    }
    let mut tau_tick = 1.0;
    while tau_tick <= tau_max * (1.0 + 1e-12) {
        let xx = x(tau_tick);
        svg.push_str(&format!(
            r##"<line x1="{xx}" y1="{MT}" x2="{xx}" y2="{}" stroke="#ddd"/>"##,
            H - MB
        ));
        svg.push_str(&format!(
            r##"<text x="{xx}" y="{}" font-size="11" text-anchor="middle" fill="#444">{tau_tick}</text>"##,
            H - MB + 16.0
        ));
        tau_tick *= 2.0;
    }
    svg.push_str(&format!(
        r##"<text x="{}" y="{}" font-size="12" text-anchor="middle" fill="#000">within factor τ of best (log scale)</text>"##,
        ML + (W - ML - MR) / 2.0,
        H - 10.0
    ));
    svg.push_str(&format!(
        r##"<text x="14" y="{}" font-size="12" text-anchor="middle" fill="#000" transform="rotate(-90 14 {})">fraction of problems solved</text>"##,
        MT + (H - MT - MB) / 2.0,
        MT + (H - MT - MB) / 2.0
    ));

    // One stepped path per curve, plus a legend entry.
    for (idx, curve) in curves.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut d = String::new();
        for (k, (&tau, &rho)) in curve.taus.iter().zip(&curve.rho).enumerate() {
            if k == 0 {
                d.push_str(&format!("M {} {}", x(tau), y(rho)));
            } else {
                // Horizontal run at the previous level, then step up.
                d.push_str(&format!(" H {} V {}", x(tau), y(rho)));
            }
        }
        svg.push_str(&format!(
            r##"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.8"/>"##
        ));
        let ly = MT + 16.0 + 16.0 * idx as f64;
        svg.push_str(&format!(
            r##"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"##,
            ML + 10.0,
            ML + 34.0
        ));
        svg.push_str(&format!(
            r##"<text x="{}" y="{}" font-size="12" fill="#000">{}</text>"##,
            ML + 40.0,
            ly + 4.0,
            curve.solver
        ));
    }
    svg.push_str("</svg>");
    std::fs::write(path, svg)?;
    Ok(())
}

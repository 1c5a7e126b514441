//! CSV and SVG writers for trajectories, summaries and grid results.
//!
//! Numbers are written in plain decimal notation (never exponent form) with
//! ten significant digits, independent of locale.

use std::fmt::Write as _;
use std::io;

use crate::scenarios::{GridResult, Summary, Trajectory};

pub const SIGNIFICANT_DIGITS: usize = 10;

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "S", "I", "Q", "R"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "label",
    "peak_I",
    "t_peak",
    "final_S",
    "final_I",
    "final_Q",
    "final_R",
    "t_below_threshold",
];
pub const GRID_HEADER: [&str; 4] = ["sigma", "theta", "final_I", "final_R"];
pub const NEVER: &str = "never";

/// Formats `x` in decimal notation with `digits` significant digits.
pub fn format_decimal(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let mut decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99… → 10.0…).
    let integer_digits = s.trim_start_matches('-').split('.').next().map_or(0, str::len) as i64;
    if magnitude >= 0 && integer_digits > magnitude + 1 && decimals > 0 {
        decimals -= 1;
        s = format!("{x:.decimals$}");
    }
    s
}

fn num(x: f64) -> String {
    format_decimal(x, SIGNIFICANT_DIGITS)
}

pub fn write_trajectory_csv<W: io::Write>(writer: W, trajectory: &Trajectory) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRAJECTORY_HEADER)?;
    for (t, s) in trajectory.states() {
        w.write_record([num(t), num(s.s), num(s.i), num(s.q), num(s.r)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: io::Write>(writer: W, summaries: &[Summary]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        let f = s.final_state;
        w.write_record([
            s.label.clone(),
            num(s.peak_infected),
            num(s.peak_time),
            num(f.s),
            num(f.i),
            num(f.q),
            num(f.r),
            s.below_threshold_time.map_or_else(|| NEVER.to_string(), num),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid_csv<W: io::Write>(writer: W, grid: &GridResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(GRID_HEADER)?;
    for (sigma, theta, infected, recovered) in grid.cells() {
        w.write_record([num(sigma), num(theta), num(infected), num(recovered)])?;
    }
    w.flush()?;
    Ok(())
}

const PLOT_W: f64 = 720.0;
const PLOT_H: f64 = 420.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 9] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf",
];

fn svg_open(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, width / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of one compartment (`component` 0..4 for S, I, Q, R) across runs.
pub fn trajectories_svg(trajectories: &[Trajectory], component: usize, title: &str) -> String {
    let t_max = trajectories
        .iter()
        .filter_map(|t| t.times().last().copied())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let y_max = trajectories
        .iter()
        .flat_map(|t| t.grid.component(component))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let (x0, y0) = (MARGIN, PLOT_H - MARGIN);
    let (pw, ph) = (PLOT_W - 2.0 * MARGIN, PLOT_H - 2.0 * MARGIN);

    let mut out = String::new();
    svg_open(&mut out, PLOT_W, PLOT_H, title);
    let _ = writeln!(
        out,
        r#"<path d="M{x0},{} V{y0} H{}" stroke="black" fill="none"/>"#,
        y0 - ph,
        x0 + pw
    );
    let _ = writeln!(out, r#"<text x="{x0}" y="{}" text-anchor="middle">0</text>"#, y0 + 16.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, x0 + pw, y0 + 16.0, num(t_max));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 4.0, y0 - ph + 4.0, num(y_max));

    for (idx, traj) in trajectories.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        // Thin to at most ~2000 vertices per line.
        let stride = (traj.len() / 2000).max(1);
        let mut d = String::new();
        for (k, (t, y)) in traj.grid.iter().enumerate() {
            if k % stride != 0 && k + 1 != traj.len() {
                continue;
            }
            let px = x0 + pw * t / t_max;
            let py = y0 - ph * y[component] / y_max;
            let _ = write!(d, "{}{px:.2},{py:.2}", if d.is_empty() { "M" } else { " L" });
        }
        let _ = writeln!(out, r#"<path d="{d}" stroke="{color}" fill="none" stroke-width="1.5"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            x0 + pw - 150.0,
            y0 - ph + 16.0 * (idx as f64 + 1.0),
            escape(&traj.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap of a grid matrix; rows are σ (bottom to top), columns θ.
pub fn heatmap_svg(grid: &GridResult, values: &[Vec<f64>], title: &str) -> String {
    let rows = grid.sigma_values.len().max(1);
    let cols = grid.theta_values.len().max(1);
    let (lo, hi) = values
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (pw, ph) = (PLOT_W - 2.0 * MARGIN - 60.0, PLOT_H - 2.0 * MARGIN);
    let (cw, ch) = (pw / cols as f64, ph / rows as f64);

    let mut out = String::new();
    svg_open(&mut out, PLOT_W, PLOT_H, title);
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let f = (v - lo) / span;
            let (r, g, b) = ((255.0 * f) as u8, (80.0 + 100.0 * (1.0 - f)) as u8, (255.0 * (1.0 - f)) as u8);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                MARGIN + cw * j as f64,
                MARGIN + ph - ch * (i as f64 + 1.0),
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">theta</text>"#, MARGIN + pw / 2.0, PLOT_H - 15.0);
    let _ = writeln!(out, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">sigma</text>"#, MARGIN + ph / 2.0, MARGIN + ph / 2.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}">max {}</text>"#, MARGIN + pw + 10.0, MARGIN + 12.0, num(hi));
    let _ = writeln!(out, r#"<text x="{}" y="{}">min {}</text>"#, MARGIN + pw + 10.0, MARGIN + ph, num(lo));
    out.push_str("</svg>\n");
    out
}

//! CSV and SVG output for a finished benchmark run.
//!
//! Everything except `timings.csv` (and the `sec` column and profiles, when
//! wall-clock output is requested) is a pure function of the records, so two
//! runs with the same seed produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::profile::{performance_profile, Cost, ProfileCurve};
use crate::error::{Error, Result};
use crate::record::RunRecord;
use crate::stationarity::Criterion;

pub const RECORDS_HEADER: [&str; 18] = [
    "solver", "problem", "family", "n", "m", "s", "f_best", "rgS", "q", "nf", "ng", "nf2g", "sec", "solved_q6",
    "solved_q3", "solved_s6", "solved_s3", "termination",
];

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub wall_clock: bool,
    pub eps: Vec<f64>,
    pub nf2g_max: u64,
    pub sec_max: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn eps_label(eps: f64) -> String {
    format!("{eps:e}")
}

pub fn write_records_csv(records: &[RunRecord], path: &Path, wall_clock: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(RECORDS_HEADER).map_err(csv_err)?;
    for r in records {
        let q = r.q.map(|q| q.to_string()).unwrap_or_default();
        let sec = if wall_clock { r.wall_seconds.to_string() } else { String::new() };
        w.write_record([
            r.solver.clone(),
            r.problem.clone(),
            r.family.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.s.to_string(),
            r.f_best.to_string(),
            r.rgs_best.to_string(),
            q,
            r.nf.to_string(),
            r.ng.to_string(),
            r.nf2g.to_string(),
            sec,
            flag(r.solved_q6).into(),
            flag(r.solved_q3).into(),
            flag(r.solved_s6).into(),
            flag(r.solved_s3).into(),
            r.termination.as_str().into(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["solver", "problem", "sec"]).map_err(csv_err)?;
    for r in records {
        w.write_record([r.solver.as_str(), r.problem.as_str(), &r.wall_seconds.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One profile per (cost, criterion, eps).
pub struct ProfileSet {
    pub cost: Cost,
    pub criterion: Criterion,
    pub eps: f64,
    pub curves: Vec<ProfileCurve>,
}

impl ProfileSet {
    pub fn stem(&self) -> String {
        format!("profile_{}_{}_{}", self.cost, self.criterion.as_str(), eps_label(self.eps))
    }
}

pub fn all_profiles(records: &[RunRecord], opts: &ReportOptions) -> Vec<ProfileSet> {
    let costs: &[Cost] = if opts.wall_clock { &Cost::ALL } else { &[Cost::Nf2g] };
    let mut out = Vec::new();
    for &cost in costs {
        for criterion in [Criterion::Objective, Criterion::Strong] {
            for &eps in &opts.eps {
                let curves = performance_profile(records, cost, criterion, eps, opts.nf2g_max, opts.sec_max);
                out.push(ProfileSet { cost, criterion, eps, curves });
            }
        }
    }
    out
}

pub fn write_profiles_csv(sets: &[ProfileSet], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["cost", "criterion", "eps", "solver", "tau", "rho"]).map_err(csv_err)?;
    for set in sets {
        for c in &set.curves {
            for &(tau, rho) in &c.points {
                w.write_record([
                    set.cost.as_str(),
                    set.criterion.as_str(),
                    &eps_label(set.eps),
                    &c.solver,
                    &tau.to_string(),
                    &rho.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Step plot on a log2 τ axis.
pub fn render_svg(set: &ProfileSet) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let tau_max = set
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.0))
        .fold(2.0_f64, f64::max);
    let x_max = tau_max.log2() * 1.05;
    let px = |tau: f64| pad + (tau.log2() / x_max) * (w - 2.0 * pad);
    let py = |rho: f64| h - pad - rho * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle">{} / {} / eps = {}</text>"#,
        w / 2.0,
        set.cost,
        set.criterion.as_str(),
        eps_label(set.eps)
    );
    let _ = writeln!(
        s,
        r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">log2(tau)</text>"#, w / 2.0, h - 12.0);
    for k in 0..=4 {
        let rho = k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{rho}</text>"#, pad - 6.0, py(rho) + 4.0);
    }
    let tau_end = 2f64.powf(x_max);
    for (k, c) in set.curves.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts = Vec::new();
        let mut prev = 0.0;
        for &(tau, rho) in &c.points {
            pts.push(format!("{:.2},{:.2}", px(tau), py(prev)));
            pts.push(format!("{:.2},{:.2}", px(tau), py(rho)));
            prev = rho;
        }
        pts.push(format!("{:.2},{:.2}", px(tau_end), py(prev)));
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            c.solver
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - pad - 80.0,
            h - pad - 14.0 * (set.curves.len() - k) as f64,
            c.solver
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Writes records.csv, profiles.csv, one SVG per profile and timings.csv
/// into `dir`; returns the paths written.
pub fn emit_report(records: &[RunRecord], dir: &Path, opts: &ReportOptions) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let p = dir.join("records.csv");
    write_records_csv(records, &p, opts.wall_clock)?;
    written.push(p);
    let sets = all_profiles(records, opts);
    let p = dir.join("profiles.csv");
    write_profiles_csv(&sets, &p)?;
    written.push(p);
    for set in &sets {
        let p = dir.join(format!("{}.svg", set.stem()));
        fs::write(&p, render_svg(set))?;
        written.push(p);
    }
    let p = dir.join("timings.csv");
    write_timings_csv(records, &p)?;
    written.push(p);
    Ok(written)
}

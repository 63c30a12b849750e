//! Deterministic file emission: CSV tables, 16-bit PGM field maps, and the
//! per-run JSON report.
//!
//! All floats are written with Rust's shortest round-trip formatting, so a
//! given set of values always produces the same bytes.

use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rfsim_core::wavefield::FieldMap;
use rfsim_core::RfImage;

/// Structured summary emitted for every run as `report.json`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub wall_time_s: f64,
    pub patch_count: usize,
    pub frequency_count: usize,
    pub mode: String,
    pub rng_seed: u64,
    pub threads: usize,
    pub warnings: ReportWarnings,
    pub outputs: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
pub struct ReportWarnings {
    /// Antenna spacing exceeded λ/2 at some beamformed frequency.
    pub aliasing: bool,
    /// Grid points that coincided with a source or patch midpoint and were
    /// written as zero.
    pub singular_grid_points: usize,
    /// Segments whose patches exceed λ/10 (allowed by explicit override).
    pub wide_patch_overrides: usize,
}

/// Frequency tag used in filenames: exact, compact, unique per f64.
pub fn freq_tag(freq_hz: f64) -> String {
    format!("{freq_hz:e}")
}

pub fn write_field_csv(dir: &Path, map: &FieldMap) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("field_{}.csv", freq_tag(map.freq_hz)));
    let mut out = String::from("x,y,re,im\n");
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let p = map.point(ix, iy);
            let v = map.at(ix, iy);
            out.push_str(&format!("{},{},{},{}\n", p.x, p.y, v.re, v.im));
        }
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// 16-bit binary PGM of the field magnitude, linearly normalized to the map
/// maximum. Row 0 is the grid's iy = 0 row.
pub fn write_field_pgm(dir: &Path, map: &FieldMap) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("field_{}.pgm", freq_tag(map.freq_hz)));
    let max = map.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut data = Vec::with_capacity(64 + map.values.len() * 2);
    write!(&mut data, "P5\n{} {}\n65535\n", map.nx, map.ny)?;
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let v = map.at(ix, iy).norm();
            let level = if max > 0.0 {
                (v / max * 65535.0).round() as u16
            } else {
                0
            };
            data.extend_from_slice(&level.to_be_bytes());
        }
    }
    fs::write(&path, data)?;
    Ok(path)
}

pub fn write_image_csv(
    dir: &Path,
    image: &RfImage,
    positions: &[rfsim_core::Vec2],
) -> std::io::Result<PathBuf> {
    let path = dir.join("image.csv");
    let mut out = String::from("antenna,x,y,freq_hz,re,im\n");
    for (k, pos) in positions.iter().enumerate() {
        for (i, f) in image.freqs_hz.iter().enumerate() {
            let v = image.at(k, i);
            out.push_str(&format!("{},{},{},{},{},{}\n", k, pos.x, pos.y, f, v.re, v.im));
        }
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Generic two-column CSV.
pub fn write_xy_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: impl IntoIterator<Item = (f64, f64)>,
) -> std::io::Result<PathBuf> {
    let path = dir.join(name);
    let mut out = String::from(header);
    out.push('\n');
    for (x, y) in rows {
        out.push_str(&format!("{x},{y}\n"));
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Generic three-column CSV.
pub fn write_xyz_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: impl IntoIterator<Item = (f64, f64, f64)>,
) -> std::io::Result<PathBuf> {
    let path = dir.join(name);
    let mut out = String::from(header);
    out.push('\n');
    for (x, y, z) in rows {
        out.push_str(&format!("{x},{y},{z}\n"));
    }
    fs::write(&path, out)?;
    Ok(path)
}

pub fn write_report(dir: &Path, report: &RunReport) -> std::io::Result<PathBuf> {
    let path = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

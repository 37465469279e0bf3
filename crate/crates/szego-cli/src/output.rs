//! Output plumbing: CSV/JSON/SVG writers, checksums, and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, '.' decimal separator.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(data);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config_sha256: String,
    pub outputs: Vec<OutputRecord>,
    pub timings_ms: f64,
    pub checks: Vec<CheckRecord>,
}

/// Collects everything a command run produces and writes the manifest last.
pub struct RunContext {
    out_dir: PathBuf,
    command: String,
    config_sha256: String,
    outputs: Vec<OutputRecord>,
    checks: Vec<CheckRecord>,
    started: Instant,
}

impl RunContext {
    pub fn new(out_dir: &Path, command: &str, raw_config: &str) -> std::io::Result<RunContext> {
        std::fs::create_dir_all(out_dir)?;
        Ok(RunContext {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            config_sha256: sha256_hex(raw_config.as_bytes()),
            outputs: Vec::new(),
            checks: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn write_bytes(&mut self, name: &str, data: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.out_dir.join(name);
        let mut file = std::fs::File::create(&path)?;
        file.write_all(data)?;
        self.outputs.push(OutputRecord {
            file: name.to_string(),
            sha256: sha256_hex(data),
            bytes: data.len() as u64,
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let mut data = serde_json::to_vec_pretty(value).expect("serializable report");
        data.push(b'\n');
        self.write_bytes(name, &data)
    }

    /// Record a tolerance check; failures are warnings, not run errors.
    pub fn check(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        let passed = value.abs() <= tolerance;
        self.checks.push(CheckRecord { name: name.to_string(), passed, value, tolerance });
        passed
    }

    pub fn finish(mut self) -> std::io::Result<RunManifest> {
        let manifest = RunManifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            command: self.command.clone(),
            config_sha256: self.config_sha256.clone(),
            outputs: std::mem::take(&mut self.outputs),
            timings_ms: self.started.elapsed().as_secs_f64() * 1e3,
            checks: std::mem::take(&mut self.checks),
        };
        let mut data = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        data.push(b'\n');
        std::fs::write(self.out_dir.join("manifest.json"), data)?;
        Ok(manifest)
    }
}

/// Build a `t,x,re_u,im_u` CSV body from samples sorted by (t, x).
pub fn samples_csv(rows: &[(f64, f64, num_complex::Complex64)]) -> String {
    let mut out = String::from("t,x,re_u,im_u\n");
    for (t, x, v) in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(*t),
            fmt_float(*x),
            fmt_float(v.re),
            fmt_float(v.im)
        ));
    }
    out
}

/// Minimal SVG polyline plot: one polyline per labelled series.
pub fn svg_lines(series: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 800.0;
    const H: f64 = 480.0;
    const MARGIN: f64 = 40.0;
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let all = series.iter().flat_map(|(_, pts)| pts.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        x1 = x0 + 1.0;
    }
    if !(y0 < y1) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    );
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = palette[i % palette.len()];
        let points: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{label}</text>\n",
            W - MARGIN - 120.0,
            MARGIN + 16.0 * i as f64
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

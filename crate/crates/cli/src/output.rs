use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use wost_implicit::opt::{Stats, TraceEvent};
use wost_implicit::IntervalBox;

use crate::args::Common;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub scene: PathBuf,
    pub scene_sha256: String,
    /// Arguments after the program name; rerunning them reproduces the
    /// outputs.
    pub command: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputFile>,
    /// Range mapped to black and white in the image, over finite values.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_max: Option<f64>,
}

/// Collects output files for one run and writes the manifest last.
pub struct Run {
    started: Instant,
    dir: Option<PathBuf>,
    outputs: Vec<OutputFile>,
}

impl Run {
    pub fn start(common: &Common) -> Result<Run> {
        if let Some(d) = &common.out {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Run { started: Instant::now(), dir: common.out.clone(), outputs: Vec::new() })
    }

    /// Writes `bytes` to `name` inside the output directory, if any.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.record(path, bytes);
        Ok(())
    }

    /// Registers a file written elsewhere.
    pub fn record(&mut self, path: PathBuf, bytes: &[u8]) {
        self.outputs.push(OutputFile { path, sha256: sha256_hex(bytes) });
    }

    pub fn finish(
        self,
        subcommand: &str,
        common: &Common,
        argv: &[String],
        parameters: serde_json::Value,
        image: Option<(f64, f64)>,
    ) -> Result<()> {
        let Some(dir) = self.dir else { return Ok(()) };
        let scene_bytes = std::fs::read(&common.scene).with_context(|| format!("reading {}", common.scene.display()))?;
        let m = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            scene: common.scene.clone(),
            scene_sha256: sha256_hex(&scene_bytes),
            command: argv.to_vec(),
            parameters,
            seed: common.seed,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
            image_min: image.map(|i| i.0),
            image_max: image.map(|i| i.1),
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&m)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

/// Streams box events to a CSV file and counts them.
pub struct TraceWriter {
    out: BufWriter<File>,
    pub counts: Stats,
    error: Option<std::io::Error>,
}

impl TraceWriter {
    pub fn create(path: &Path, dim: usize) -> Result<TraceWriter> {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(f);
        let axes = ["x", "y", "z"];
        let mut header = String::from("event");
        for a in &axes[..dim] {
            header.push_str(&format!(",{a}_lo,{a}_hi"));
        }
        writeln!(out, "{header}")?;
        Ok(TraceWriter { out, counts: Stats::default(), error: None })
    }

    pub fn event(&mut self, e: TraceEvent, b: &IntervalBox) {
        match e {
            TraceEvent::Explored => self.counts.boxes_explored += 1,
            TraceEvent::PrunedConstraint => self.counts.boxes_pruned_constraint += 1,
            TraceEvent::PrunedBound => self.counts.boxes_pruned_bound += 1,
            TraceEvent::Accepted => self.counts.boxes_accepted += 1,
        }
        if self.error.is_some() {
            return;
        }
        let mut line = String::from(e.name());
        for iv in b.iter() {
            line.push_str(&format!(",{:e},{:e}", iv.lo(), iv.hi()));
        }
        if let Err(err) = writeln!(self.out, "{line}") {
            self.error = Some(err);
        }
    }

    pub fn finish(mut self) -> Result<Stats> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        self.out.flush()?;
        Ok(self.counts)
    }
}

/// Binary 8-bit grayscale image; `values` are row-major with the first row
/// at the top. Non-finite values are black; finite values map linearly from
/// `[lo, hi]` to `[1, 255]`, or to mid-gray when the range is empty.
pub fn pgm(width: usize, height: usize, values: &[f64], lo: f64, hi: f64) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(values.iter().map(|&v| {
        if !v.is_finite() {
            0
        } else if hi > lo {
            (1.0 + 254.0 * ((v - lo) / (hi - lo)).clamp(0.0, 1.0)).round() as u8
        } else {
            128
        }
    }));
    out
}

/// Formats a point as `(a, b[, c])`.
pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}

pub fn stats_lines(s: &Stats) -> String {
    format!(
        "boxes_explored: {}\nboxes_pruned_constraint: {}\nboxes_pruned_bound: {}\nboxes_accepted: {}\n",
        s.boxes_explored, s.boxes_pruned_constraint, s.boxes_pruned_bound, s.boxes_accepted
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_layout_and_scaling() {
        let img = pgm(2, 2, &[0.0, 1.0, f64::NAN, 0.5], 0.0, 1.0);
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(&img[header.len()..], &[1, 255, 0, 128]);
        let flat = pgm(1, 1, &[3.0], 3.0, 3.0);
        assert_eq!(*flat.last().unwrap(), 128);
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}

//! Structured run reports and CSV diagnostics. Reports are deterministic
//! for a fixed input file and seed; CSV uses the schema n,series,value with
//! a plain decimal point.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::Path;

use anyhow::{Context, Result};

pub struct RunReport {
    pub command: String,
    pub input: String,
    pub digest: String,
    pub wall_ms: u128,
    pub lines: Vec<String>,
    pub csv: Vec<(u32, String, f64)>,
}

impl RunReport {
    pub fn new(command: &str, input: &str, input_bytes: &[u8]) -> Self {
        let mut hasher = DefaultHasher::new();
        input_bytes.hash(&mut hasher);
        RunReport {
            command: command.to_string(),
            input: input.to_string(),
            digest: format!("{:016x}", hasher.finish()),
            wall_ms: 0,
            lines: Vec::new(),
            csv: Vec::new(),
        }
    }

    pub fn push(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    pub fn push_block(&mut self, text: &str) {
        for line in text.lines() {
            self.lines.push(line.to_string());
        }
    }

    pub fn record(&mut self, n: u32, series: &str, value: f64) {
        self.csv.push((n, series.to_string(), value));
    }

    pub fn render_report(&self) -> String {
        let mut out = String::new();
        out.push_str("breport 1\n");
        out.push_str(&format!("command {}\n", self.command));
        out.push_str(&format!("input {}\n", self.input));
        out.push_str(&format!("digest {}\n", self.digest));
        out.push_str(&format!("wall-ms {}\n", self.wall_ms));
        for line in &self.lines {
            out.push_str(line);
            out.push('\n');
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("n,series,value\n");
        for (n, series, value) in &self.csv {
            out.push_str(&format!("{n},{series},{value}\n"));
        }
        out
    }

    /// Writes the report (and CSV when present) into `dir`, or prints the
    /// chosen format to stdout when no directory is given.
    pub fn emit(&self, out_dir: Option<&Path>, stem: &str, csv_only: bool) -> Result<()> {
        match out_dir {
            Some(dir) => {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                let report_path = dir.join(format!("{stem}.report.txt"));
                fs::write(&report_path, self.render_report())
                    .with_context(|| format!("writing {}", report_path.display()))?;
                println!("wrote {}", report_path.display());
                if !self.csv.is_empty() {
                    let csv_path = dir.join(format!("{stem}.csv"));
                    fs::write(&csv_path, self.render_csv())
                        .with_context(|| format!("writing {}", csv_path.display()))?;
                    println!("wrote {}", csv_path.display());
                }
            }
            None => {
                if csv_only {
                    print!("{}", self.render_csv());
                } else {
                    print!("{}", self.render_report());
                }
            }
        }
        Ok(())
    }
}

//! Table rendering: CSV with a provenance comment block, plus a minimal
//! self-contained SVG line plot.
//!
//! Numbers are written with 17 significant digits so every emitted value
//! re-parses to the identical f64, and the provenance block is a complete
//! TOML config (comment-prefixed) that reproduces the command bit for bit.

use std::fmt::Write as _;

use crate::error::{CliError, CliResult};

/// A finished command result: named columns over numeric rows.
#[derive(Debug, Clone)]
pub struct Table {
    /// Subcommand that produced the table.
    pub command: &'static str,
    /// Resolved config as TOML text (without the `# ` prefixes).
    pub provenance: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Sweep points dropped because their parameters left the valid domain.
    pub skipped: usize,
    /// Columns right after the x column that carry context (e.g. the
    /// per-row γ*) rather than curves; the SVG plot skips them.
    pub context_columns: usize,
}

/// 17-significant-digit float formatting (exact f64 round-trip).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command = \"{}\"", self.command);
        let _ = writeln!(out, "# skipped_rows = {}", self.skipped);
        for line in self.provenance.lines() {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                let _ = writeln!(out, "# {line}");
            }
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(out, "{}", rendered.join(","));
        }
        out
    }

    /// Minimal standalone SVG line plot: first column on x, the rest as
    /// polylines. CSV stays the authoritative output.
    pub fn to_svg(&self) -> String {
        const W: f64 = 720.0;
        const H: f64 = 480.0;
        const MARGIN: f64 = 60.0;
        const PALETTE: [&str; 8] = [
            "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
        ];

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
             font-family=\"sans-serif\" font-size=\"12\">"
        );
        let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");

        let first_curve = 1 + self.context_columns;
        if self.rows.is_empty() || self.columns.len() <= first_curve {
            let _ = writeln!(svg, "<text x=\"20\" y=\"20\">no data</text></svg>");
            return svg;
        }

        let xs: Vec<f64> = self.rows.iter().map(|r| r[0]).collect();
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        for &x in &xs {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for row in &self.rows {
            for &v in &row[first_curve..] {
                y_min = y_min.min(v);
                y_max = y_max.max(v);
            }
        }
        if x_max == x_min {
            x_max = x_min + 1.0;
        }
        if y_max == y_min {
            y_max = y_min + 1.0;
        }
        let px = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * (W - 2.0 * MARGIN);
        let py = |y: f64| H - MARGIN - (y - y_min) / (y_max - y_min) * (H - 2.0 * MARGIN);

        // Axes and range labels.
        let _ = writeln!(
            svg,
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\
             <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{3}\" stroke=\"black\"/>",
            MARGIN,
            H - MARGIN,
            W - MARGIN,
            MARGIN
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\">{}</text>",
            MARGIN,
            H - MARGIN + 28.0,
            x_min
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            W - MARGIN,
            H - MARGIN + 28.0,
            x_max
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.6}</text>",
            MARGIN - 6.0,
            H - MARGIN,
            y_min
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.6}</text>",
            MARGIN - 6.0,
            MARGIN + 4.0,
            y_max
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            W / 2.0,
            H - 12.0,
            xml_escape(&self.columns[0])
        );

        for (ci, name) in self.columns.iter().enumerate().skip(first_curve) {
            let color = PALETTE[(ci - first_curve) % PALETTE.len()];
            let mut points = String::new();
            for row in &self.rows {
                let _ = write!(points, "{:.2},{:.2} ", px(row[0]), py(row[ci]));
            }
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                points.trim_end()
            );
            let ly = MARGIN + 16.0 * (ci - first_curve) as f64;
            let _ = writeln!(
                svg,
                "<line x1=\"{0}\" y1=\"{ly}\" x2=\"{1}\" y2=\"{ly}\" stroke=\"{color}\" \
                 stroke-width=\"3\"/><text x=\"{2}\" y=\"{3}\">{4}</text>",
                W - MARGIN - 150.0,
                W - MARGIN - 126.0,
                W - MARGIN - 120.0,
                ly + 4.0,
                xml_escape(name)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// A CSV emitted by [`Table::to_csv`], parsed back.
#[derive(Debug, Clone)]
pub struct ParsedCsv {
    /// The provenance block (comment prefixes stripped) — valid TOML.
    pub provenance: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ParsedCsv {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut provenance = String::new();
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix('#') {
                provenance.push_str(rest.strip_prefix(' ').unwrap_or(rest));
                provenance.push('\n');
            } else if columns.is_empty() {
                columns = line.split(',').map(str::to_string).collect();
            } else if !line.trim().is_empty() {
                let row = line
                    .split(',')
                    .map(|f| {
                        f.parse::<f64>()
                            .map_err(|e| CliError::runtime(format!("bad CSV field {f:?}: {e}")))
                    })
                    .collect::<CliResult<Vec<f64>>>()?;
                if row.len() != columns.len() {
                    return Err(CliError::runtime(format!(
                        "CSV row has {} fields, header has {}",
                        row.len(),
                        columns.len()
                    )));
                }
                rows.push(row);
            }
        }
        if columns.is_empty() {
            return Err(CliError::runtime("CSV has no header"));
        }
        Ok(Self {
            provenance,
            columns,
            rows,
        })
    }

    /// The value of a column by name.
    pub fn column(&self, name: &str) -> CliResult<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::runtime(format!("no column {name:?}")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Builds the provenance TOML: resolved sections in canonical key order.
#[derive(Debug, Default)]
pub struct Provenance {
    text: String,
}

impl Provenance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        if !self.text.is_empty() {
            self.text.push('\n');
        }
        let _ = writeln!(self.text, "[{name}]");
        self
    }

    pub fn float(&mut self, key: &str, v: f64) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {}", fmt_f64(v));
        self
    }

    pub fn integer(&mut self, key: &str, v: usize) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {v}");
        self
    }

    pub fn string(&mut self, key: &str, v: &str) -> &mut Self {
        let _ = writeln!(self.text, "{key} = \"{v}\"");
        self
    }

    pub fn float_list(&mut self, key: &str, vs: &[f64]) -> &mut Self {
        let items: Vec<String> = vs.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(self.text, "{key} = [{}]", items.join(", "));
        self
    }

    pub fn string_list(&mut self, key: &str, vs: &[&str]) -> &mut Self {
        let items: Vec<String> = vs.iter().map(|v| format!("\"{v}\"")).collect();
        let _ = writeln!(self.text, "{key} = [{}]", items.join(", "));
        self
    }

    pub fn finish(self) -> String {
        self.text
    }
}

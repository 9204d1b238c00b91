//! File formats: headerless observation CSV, grid-result CSV with a schema
//! comment, and the SVG heatmap.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::str::FromStr;

use marec::montecarlo::{EstimatorStats, SCHEMA_VERSION};
use marec::{DurbinSequence, GridPoint, GridResult, GridSpec, Invertibility, PointRecord, Region, TimeSeries};
use nalgebra::DMatrix;

use crate::CliError;

pub fn parse_reals(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|field| {
            let field = field.trim();
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("'{field}' is not a finite number")))
        })
        .collect()
}

/// `lo,hi` as a closed interval.
pub fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    match parse_reals(text)?.as_slice() {
        &[lo, hi] if lo <= hi => Ok((lo, hi)),
        _ => Err(CliError::Usage(format!("'{text}' is not a range lo,hi with lo <= hi"))),
    }
}

/// Rows separated by `;`, entries by `,`.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, CliError> {
    let rows: Vec<Vec<f64>> = text.split(';').map(parse_reals).collect::<Result<_, _>>()?;
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(CliError::Usage(format!(
            "matrix '{text}' has rows of different lengths"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.into_iter().flatten(),
    ))
}

pub fn read_observations(input: impl BufRead) -> Result<TimeSeries<f64>, CliError> {
    let mut rows = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = parse_reals(line).map_err(|e| CliError::Usage(format!("line {}: {e}", n + 1)))?;
        if let Some(first) = rows.first() {
            let first: &Vec<f64> = first;
            if first.len() != row.len() {
                return Err(CliError::Usage(format!(
                    "line {}: expected {} columns, found {}",
                    n + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Usage("observation file is empty".into()));
    }
    Ok(TimeSeries::multivariate(&rows)?)
}

pub fn write_observations(series: &TimeSeries<f64>, mut out: impl Write) -> Result<(), CliError> {
    for row in series.rows() {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

const GRID_HEADER: &str = "row,col,psi1,psi2,class,min_modulus,reps,\
durbin_mse,durbin_mse_psi1,durbin_mse_psi2,durbin_ok,durbin_failed,\
restricted_mse,restricted_mse_psi1,restricted_mse_psi2,restricted_ok,restricted_failed";

fn spec_comment(spec: &GridSpec<f64>) -> String {
    format!(
        "# schema={SCHEMA_VERSION} psi1={}:{} psi2={}:{} points={} region={} t={} l={} reps={} seed={} durbin={}",
        spec.psi1_range.0,
        spec.psi1_range.1,
        spec.psi2_range.0,
        spec.psi2_range.1,
        spec.points_per_axis,
        spec.region.as_str(),
        spec.t,
        spec.l,
        spec.reps,
        spec.base_seed,
        spec.durbin.as_str()
    )
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn stats_fields(s: &EstimatorStats<f64>) -> String {
    let per = s.mse_per_param;
    format!(
        "{},{},{},{},{}",
        opt(s.mse),
        opt(per.map(|p| p[0])),
        opt(per.map(|p| p[1])),
        s.ok,
        s.failed
    )
}

pub fn write_grid(result: &GridResult<f64>, mut out: impl Write) -> Result<(), CliError> {
    writeln!(out, "{}", spec_comment(&result.spec))?;
    writeln!(out, "{GRID_HEADER}")?;
    for r in &result.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.point.row,
            r.point.col,
            r.point.psi1,
            r.point.psi2,
            r.class.as_str(),
            r.min_modulus,
            r.reps,
            stats_fields(&r.durbin),
            stats_fields(&r.restricted)
        )?;
    }
    Ok(())
}

fn malformed(msg: impl Into<String>) -> CliError {
    CliError::Usage(format!("malformed grid file: {}", msg.into()))
}

fn field<T: FromStr>(value: &str, name: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| malformed(format!("bad {name} '{value}'")))
}

fn parse_spec_comment(line: &str) -> Result<GridSpec<f64>, CliError> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| malformed("missing '# schema=' line"))?;
    let mut spec = GridSpec::<f64>::default();
    let mut schema = None;
    for pair in body.split_whitespace() {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| malformed(format!("bad entry '{pair}'")))?;
        let range = |v: &str| -> Result<(f64, f64), CliError> {
            let (lo, hi) = v.split_once(':').ok_or_else(|| malformed(format!("bad range '{v}'")))?;
            Ok((field(lo, key)?, field(hi, key)?))
        };
        match key {
            "schema" => schema = Some(field::<u32>(value, key)?),
            "psi1" => spec.psi1_range = range(value)?,
            "psi2" => spec.psi2_range = range(value)?,
            "points" => spec.points_per_axis = field(value, key)?,
            "region" => spec.region = Region::from_str(value).map_err(|e| malformed(e.to_string()))?,
            "t" => spec.t = field(value, key)?,
            "l" => spec.l = field(value, key)?,
            "reps" => spec.reps = field(value, key)?,
            "seed" => spec.base_seed = field(value, key)?,
            "durbin" => spec.durbin = DurbinSequence::from_str(value).map_err(|e| malformed(e.to_string()))?,
            other => return Err(malformed(format!("unknown key '{other}'"))),
        }
    }
    match schema {
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(malformed(format!("unsupported schema {v}"))),
        None => return Err(malformed("missing schema version")),
    }
    if spec.points_per_axis < 2 {
        return Err(malformed("points must be >= 2"));
    }
    Ok(spec)
}

fn opt_field(value: &str, name: &str) -> Result<Option<f64>, CliError> {
    if value.trim().is_empty() {
        Ok(None)
    } else {
        field(value, name).map(Some)
    }
}

fn parse_stats(f: &[&str]) -> Result<EstimatorStats<f64>, CliError> {
    let mse = opt_field(f[0], "mse")?;
    let per = match (opt_field(f[1], "mse_psi1")?, opt_field(f[2], "mse_psi2")?) {
        (Some(a), Some(b)) => Some([a, b]),
        (None, None) => None,
        _ => return Err(malformed("per-parameter MSE only half present")),
    };
    Ok(EstimatorStats {
        mse,
        mse_per_param: per,
        ok: field(f[3], "ok")?,
        failed: field(f[4], "failed")?,
    })
}

pub fn read_grid(input: impl BufRead) -> Result<GridResult<f64>, CliError> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| malformed("empty file"))??;
    let spec = parse_spec_comment(&first)?;
    let header = lines.next().ok_or_else(|| malformed("missing header"))??;
    if header.trim() != GRID_HEADER {
        return Err(malformed("unexpected header"));
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 17 {
            return Err(malformed(format!("expected 17 fields, found {}", f.len())));
        }
        let point = GridPoint {
            row: field(f[0], "row")?,
            col: field(f[1], "col")?,
            psi1: field(f[2], "psi1")?,
            psi2: field(f[3], "psi2")?,
        };
        if point.row >= spec.points_per_axis || point.col >= spec.points_per_axis {
            return Err(malformed(format!(
                "point ({}, {}) outside the grid",
                point.row, point.col
            )));
        }
        records.push(PointRecord {
            point,
            class: Invertibility::from_str(f[4].trim()).map_err(|e| malformed(e.to_string()))?,
            min_modulus: field(f[5], "min_modulus")?,
            reps: field(f[6], "reps")?,
            durbin: parse_stats(&f[7..12])?,
            restricted: parse_stats(&f[12..17])?,
        });
    }
    Ok(GridResult {
        spec,
        schema_version: SCHEMA_VERSION,
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Durbin,
    Restricted,
    Ratio,
}

impl FromStr for Metric {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "durbin" => Ok(Metric::Durbin),
            "restricted" => Ok(Metric::Restricted),
            "ratio" => Ok(Metric::Ratio),
            other => Err(CliError::Usage(format!("unknown metric '{other}'"))),
        }
    }
}

impl Metric {
    fn value(self, r: &PointRecord<f64>) -> Option<f64> {
        match self {
            Metric::Durbin => r.durbin.mse,
            Metric::Restricted => r.restricted.mse,
            Metric::Ratio => match (r.restricted.mse, r.durbin.mse) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some(a / b),
                _ => None,
            },
        }
    }
}

pub const NEUTRAL: (u8, u8, u8) = (247, 247, 247);
const LOW: (u8, u8, u8) = (33, 102, 172);
const HIGH: (u8, u8, u8) = (178, 24, 43);
const SEQ_START: (u8, u8, u8) = (255, 247, 188);
const SEQ_END: (u8, u8, u8) = (153, 52, 4);

fn mix(a: (u8, u8, u8), b: (u8, u8, u8), t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let ch = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * t).round() as u8;
    (ch(a.0, b.0), ch(a.1, b.1), ch(a.2, b.2))
}

fn hex((r, g, b): (u8, u8, u8)) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 60.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        MARGIN + (v - self.x.0) / (self.x.1 - self.x.0) * SIZE
    }

    fn py(&self, v: f64) -> f64 {
        MARGIN + (self.y.1 - v) / (self.y.1 - self.y.0) * SIZE
    }
}

/// SVG heatmap over `(ψ_1, ψ_2)` with the invertibility triangle. MSE
/// metrics use a sequential scale on `log10(MSE)`; `ratio` uses a diverging
/// scale on `log(restricted / durbin)` that is neutral at 1.
pub fn render_heatmap(result: &GridResult<f64>, metric: Metric) -> String {
    let spec = &result.spec;
    let n = spec.points_per_axis;
    let step = |(lo, hi): (f64, f64)| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
    let (dx, dy) = (step(spec.psi1_range), step(spec.psi2_range));
    let frame = Frame {
        x: (
            (spec.psi1_range.0 - dx / 2.0).min(-2.0),
            (spec.psi1_range.1 + dx / 2.0).max(2.0),
        ),
        y: (
            (spec.psi2_range.0 - dy / 2.0).min(-1.0),
            (spec.psi2_range.1 + dy / 2.0).max(1.0),
        ),
    };

    let values: Vec<(&PointRecord<f64>, f64)> = result
        .records
        .iter()
        .filter_map(|r| metric.value(r).map(|v| (r, v)))
        .collect();
    let colour: Box<dyn Fn(f64) -> (u8, u8, u8)> = match metric {
        Metric::Ratio => {
            let reach = values.iter().map(|(_, v)| v.ln().abs()).fold(0.0, f64::max);
            Box::new(move |v: f64| {
                let t = if reach > 0.0 { v.ln() / reach } else { 0.0 };
                if t < 0.0 {
                    mix(NEUTRAL, LOW, -t)
                } else {
                    mix(NEUTRAL, HIGH, t)
                }
            })
        }
        Metric::Durbin | Metric::Restricted => {
            let logs: Vec<f64> = values.iter().map(|(_, v)| v.max(f64::MIN_POSITIVE).log10()).collect();
            let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Box::new(move |v: f64| {
                let t = if hi > lo {
                    (v.max(f64::MIN_POSITIVE).log10() - lo) / (hi - lo)
                } else {
                    0.5
                };
                mix(SEQ_START, SEQ_END, t)
            })
        }
    };

    let mut svg = String::new();
    let total = SIZE + 2.0 * MARGIN;
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{total}" height="{total}" fill="white"/>"#);
    let (w, h) = (dx / (frame.x.1 - frame.x.0) * SIZE, dy / (frame.y.1 - frame.y.0) * SIZE);
    for (r, v) in &values {
        let (cx, cy) = (frame.px(r.point.psi1), frame.py(r.point.psi2));
        let _ = writeln!(
            svg,
            r#"<rect class="cell" x="{:.3}" y="{:.3}" width="{w:.3}" height="{h:.3}" fill="{}" data-psi1="{}" data-psi2="{}" data-value="{v}"/>"#,
            cx - w / 2.0,
            cy - h / 2.0,
            hex(colour(*v)),
            r.point.psi1,
            r.point.psi2,
        );
    }
    // axes through the origin
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black"/>"#,
        frame.px(frame.x.0),
        frame.py(0.0),
        frame.px(frame.x.1),
        frame.py(0.0)
    );
    let _ = writeln!(
        svg,
        r#"<line class="axis" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="black"/>"#,
        frame.px(0.0),
        frame.py(frame.y.0),
        frame.px(0.0),
        frame.py(frame.y.1)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.3}" y="{:.3}" font-size="14">psi1</text><text x="{:.3}" y="{:.3}" font-size="14">psi2</text>"#,
        MARGIN + SIZE - 30.0,
        frame.py(0.0) - 6.0,
        frame.px(0.0) + 6.0,
        MARGIN + 14.0
    );
    let tri: Vec<String> = [(-2.0, 1.0), (2.0, 1.0), (0.0, -1.0)]
        .iter()
        .map(|&(a, b)| format!("{:.3},{:.3}", frame.px(a), frame.py(b)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polygon class="triangle" points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
        tri.join(" ")
    );
    let label = match metric {
        Metric::Durbin => "Durbin MSE",
        Metric::Restricted => "restricted OLS MSE",
        Metric::Ratio => "MSE ratio restricted / Durbin",
    };
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="30" font-size="16">{label}</text>"#);
    svg.push_str("</svg>\n");
    svg
}

//! Result rows, per-metric tables and their CSV/text renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::harness::zoo::{Regularization, Variant};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const CSV_HEADER: &str = "variant,regularization,metric,value,class";

pub const PARAMS: &str = "params";
pub const TRAIN_EPS_U: &str = "train_eps_u";
pub const TRAIN_EPS_V: &str = "train_eps_v";
pub const TEST_EPS_U: &str = "test_eps_u";
pub const TEST_EPS_V: &str = "test_eps_v";
pub const ZOOM_EPS: &str = "zoom_eps";
pub const EPOCH_TIME: &str = "epoch_time";

/// Metrics in table order.
pub const METRICS: [&str; 7] = [
    PARAMS,
    TRAIN_EPS_U,
    TRAIN_EPS_V,
    TEST_EPS_U,
    TEST_EPS_V,
    ZOOM_EPS,
    EPOCH_TIME,
];

/// Whether the acceptability threshold applies; counts and timings only
/// get a best cell.
pub fn thresholded(metric: &str) -> bool {
    metric != PARAMS && metric != EPOCH_TIME
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Best,
    Acceptable,
    Unacceptable,
}

impl Class {
    pub fn as_str(self) -> &'static str {
        match self {
            Class::Best => "best",
            Class::Acceptable => "acceptable",
            Class::Unacceptable => "unacceptable",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "best" => Ok(Class::Best),
            "acceptable" => Ok(Class::Acceptable),
            "unacceptable" => Ok(Class::Unacceptable),
            other => Err(Error::Format(format!("unknown class `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub variant: Variant,
    pub reg: Regularization,
    pub metric: String,
    pub value: f64,
    pub class: Class,
}

impl ResultRow {
    pub fn new(variant: Variant, reg: Regularization, metric: &str, value: f64) -> Self {
        Self {
            variant,
            reg,
            metric: metric.to_string(),
            value,
            class: Class::Acceptable,
        }
    }
}

/// One metric laid out as variants × regularization columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub metric: String,
    pub rows: Vec<Variant>,
    pub cells: Vec<[Option<(f64, Class)>; 6]>,
}

fn sort_key(r: &ResultRow) -> (usize, usize, usize, usize) {
    let m = METRICS.iter().position(|&m| m == r.metric).unwrap_or(METRICS.len());
    let v = Variant::ALL.iter().position(|&v| v == r.variant).unwrap_or(0);
    (m, v, r.reg.column().unwrap_or(6), 0)
}

/// Sorts rows into table order and assigns every class. A pure function of
/// the values and the threshold; the first minimum in row-major order is
/// the single best cell of each metric.
pub fn classify(rows: &mut [ResultRow], threshold: f64) {
    rows.sort_by_key(sort_key);
    let mut start = 0;
    while start < rows.len() {
        let metric = rows[start].metric.clone();
        let end = start + rows[start..].iter().take_while(|r| r.metric == metric).count();
        let block = &mut rows[start..end];
        let best = block
            .iter()
            .enumerate()
            .fold(None::<(usize, f64)>, |acc, (i, r)| match acc {
                Some((_, v)) if !(r.value < v) => acc,
                _ if r.value.is_nan() => acc,
                _ => Some((i, r.value)),
            })
            .map(|(i, _)| i);
        for (i, r) in block.iter_mut().enumerate() {
            r.class = if Some(i) == best {
                Class::Best
            } else if !thresholded(&metric) || r.value <= threshold {
                Class::Acceptable
            } else {
                Class::Unacceptable
            };
        }
        start = end;
    }
}

pub fn tables(rows: &[ResultRow]) -> Vec<ErrorTable> {
    let mut by_metric: BTreeMap<(usize, String), BTreeMap<usize, [Option<(f64, Class)>; 6]>> =
        BTreeMap::new();
    for r in rows {
        let Some(col) = r.reg.column() else { continue };
        let m = METRICS.iter().position(|&m| m == r.metric).unwrap_or(METRICS.len());
        let v = Variant::ALL.iter().position(|&v| v == r.variant).unwrap_or(0);
        by_metric
            .entry((m, r.metric.clone()))
            .or_default()
            .entry(v)
            .or_insert([None; 6])[col] = Some((r.value, r.class));
    }
    by_metric
        .into_iter()
        .map(|((_, metric), rows)| ErrorTable {
            metric,
            rows: rows.keys().map(|&v| Variant::ALL[v]).collect(),
            cells: rows.into_values().collect(),
        })
        .collect()
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.variant,
            r.reg,
            r.metric,
            r.value,
            r.class.as_str()
        );
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Format(format!("results CSV must start with `{CSV_HEADER}`"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(Error::Format(format!("line {}: expected 5 fields", i + 2)));
            }
            Ok(ResultRow {
                variant: f[0].parse()?,
                reg: f[1].parse()?,
                metric: f[2].trim().to_string(),
                value: f[3]
                    .trim()
                    .parse()
                    .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))?,
                class: Class::parse(f[4])?,
            })
        })
        .collect()
}

/// Later rows replace earlier ones with the same cell and metric.
pub fn merge(parts: impl IntoIterator<Item = Vec<ResultRow>>) -> Vec<ResultRow> {
    let mut out: Vec<ResultRow> = Vec::new();
    for part in parts {
        for r in part {
            match out
                .iter_mut()
                .find(|o| o.variant == r.variant && o.reg == r.reg && o.metric == r.metric)
            {
                Some(o) => *o = r,
                None => out.push(r),
            }
        }
    }
    out
}

fn fmt_value(metric: &str, v: f64) -> String {
    if metric == PARAMS {
        format!("{v:.0}")
    } else if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

/// Aligned plain-text tables; best cells are starred and unacceptable ones
/// bracketed.
pub fn to_text(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    for t in tables(rows) {
        let mut grid: Vec<Vec<String>> = vec![std::iter::once("variant".to_string())
            .chain(Regularization::COLUMNS.iter().map(|r| r.label()))
            .collect()];
        for (v, cells) in t.rows.iter().zip(&t.cells) {
            let mut line = vec![v.name().to_string()];
            for c in cells {
                line.push(match c {
                    None => "-".into(),
                    Some((x, Class::Best)) => format!("*{}", fmt_value(&t.metric, *x)),
                    Some((x, Class::Acceptable)) => fmt_value(&t.metric, *x),
                    Some((x, Class::Unacceptable)) => format!("({})", fmt_value(&t.metric, *x)),
                });
            }
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let _ = writeln!(out, "## {}", t.metric);
        for r in &grid {
            let cells: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, &w))| {
                    if i == 0 {
                        format!("{s:<w$}")
                    } else {
                        format!("{s:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: Variant, r: &str, m: &str, x: f64) -> ResultRow {
        ResultRow::new(v, r.parse().unwrap(), m, x)
    }

    #[test]
    fn single_cell_is_best() {
        let mut rows = vec![row(Variant::Conv3D, "BN", TEST_EPS_U, 0.9)];
        classify(&mut rows, 0.5);
        assert_eq!(rows[0].class, Class::Best);
    }

    #[test]
    fn exactly_one_best_with_ties_in_row_major_order() {
        let mut rows = vec![
            row(Variant::Conv3D, "Basic", TEST_EPS_U, 0.2),
            row(Variant::Conv2D, "BN", TEST_EPS_U, 0.2),
            row(Variant::Conv2D, "Basic", TEST_EPS_U, 0.7),
            row(Variant::Conv2D, "Basic", PARAMS, 1000.0),
            row(Variant::Conv3D, "Basic", PARAMS, 9000.0),
        ];
        classify(&mut rows, 0.5);
        let best: Vec<_> = rows.iter().filter(|r| r.class == Class::Best).collect();
        assert_eq!(best.len(), 2);
        assert!(best.iter().any(|r| r.metric == TEST_EPS_U && r.variant == Variant::Conv2D));
        let c = |v, m: &str| rows.iter().find(|r| r.variant == v && r.metric == m && r.reg == Regularization::BASIC).unwrap().class;
        assert_eq!(c(Variant::Conv2D, TEST_EPS_U), Class::Unacceptable);
        assert_eq!(c(Variant::Conv3D, TEST_EPS_U), Class::Acceptable);
        assert_eq!(c(Variant::Conv3D, PARAMS), Class::Acceptable);
        let again = {
            let mut r = rows.clone();
            classify(&mut r, 0.5);
            r
        };
        assert_eq!(again, rows);
    }

    #[test]
    fn csv_roundtrip() {
        let mut rows = vec![
            row(Variant::Conv25Db, "BN&SL", TRAIN_EPS_U, 0.123456789012345),
            row(Variant::FcTBoundary, "E&SL", ZOOM_EPS, 1e-17),
            row(Variant::Conv15DBoundary, "Basic", PARAMS, 12345.0),
        ];
        classify(&mut rows, 0.5);
        let text = to_csv(&rows);
        assert_eq!(parse_csv(&text).unwrap(), rows);
        assert!(parse_csv("nope\n").is_err());
        assert!(to_text(&rows).contains("Conv2.5Db"));
    }

    #[test]
    fn merge_prefers_later_rows() {
        let a = vec![row(Variant::Conv3D, "BN", PARAMS, 1.0), row(Variant::Conv2D, "BN", PARAMS, 2.0)];
        let b = vec![row(Variant::Conv3D, "BN", PARAMS, 3.0)];
        let m = merge([a, b]);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].value, 3.0);
    }
}

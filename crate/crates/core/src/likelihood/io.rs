use std::path::{Path, PathBuf};

use csv::StringRecord;

use super::{Dataset, DatasetParts};
use crate::error::{Error, Result};
use crate::graph::{read_adjacency_csv, write_adjacency_csv, SpatialGraph};

pub const CASES: &str = "cases.csv";
pub const COVARIATES_MEAN: &str = "covariates_mean.csv";
pub const COVARIATES_DISP: &str = "covariates_disp.csv";
pub const SEASONS: &str = "seasons.csv";
pub const ADJACENCY: &str = "adjacency.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    /// Prepend a column of ones to the dispersion design unless its first
    /// column already is one.
    pub disp_intercept: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            disp_intercept: true,
        }
    }
}

/// Loads `adjacency.csv`, `cases.csv`, `seasons.csv` and the optional
/// covariate files from `dir`. A missing `covariates_mean.csv` means no mean
/// covariates; a missing `covariates_disp.csv` means an intercept-only
/// dispersion model.
pub fn load_data_dir(dir: &Path, opts: LoadOptions) -> Result<(SpatialGraph, Dataset)> {
    let adjacency = require(dir, ADJACENCY)?;
    let cases = require(dir, CASES)?;
    let seasons = require(dir, SEASONS)?;
    let graph = read_adjacency_csv(&adjacency, None)?;
    let n = graph.n_areas();

    let season_rows = read_rows(&seasons, &["week", "season"])?;
    let n_weeks = season_rows.rows.len();
    let mut season_of_week = vec![usize::MAX; n_weeks];
    for row in &season_rows.rows {
        let week = index(&seasons, row, 0, n_weeks, "week")?;
        let season = parse_usize(&seasons, row, 1)?;
        if season_of_week[week] != usize::MAX {
            return Err(Error::parse(&seasons, format!("week {week} listed twice")));
        }
        season_of_week[week] = season;
    }
    let n_seasons = season_of_week.iter().max().map_or(0, |m| m + 1);

    let case_rows = read_rows(&cases, &["area", "week", "y", "offset"])?;
    let obs = n * n_weeks;
    if case_rows.rows.len() != obs {
        return Err(Error::parse(
            &cases,
            format!("expected {obs} rows ({n} areas x {n_weeks} weeks), found {}", case_rows.rows.len()),
        ));
    }
    let mut y = vec![0u64; obs];
    let mut offset = vec![f64::NAN; obs];
    for row in &case_rows.rows {
        let i = index(&cases, row, 0, n, "area")?;
        let t = index(&cases, row, 1, n_weeks, "week")?;
        let k = i * n_weeks + t;
        if !offset[k].is_nan() {
            return Err(Error::parse(&cases, format!("area {i} week {t} listed twice")));
        }
        y[k] = row[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(&cases, format!("count `{}` is not a non-negative integer", &row[2])))?;
        offset[k] = parse_f64(&cases, row, 3)?;
    }

    let (p_mean, x) = match optional(dir, COVARIATES_MEAN) {
        None => (0, Vec::new()),
        Some(path) => read_design(&path, "week", n, n_weeks)?,
    };
    let (p_raw, v_raw) = match optional(dir, COVARIATES_DISP) {
        None => (0, Vec::new()),
        Some(path) => read_design(&path, "season", n, n_seasons)?,
    };
    let cells = n * n_seasons;
    let has_intercept = p_raw > 0 && (0..cells).all(|k| v_raw[k * p_raw] == 1.0);
    let (p_disp, v) = if opts.disp_intercept && !has_intercept {
        let mut v = Vec::with_capacity(cells * (p_raw + 1));
        for k in 0..cells {
            v.push(1.0);
            v.extend_from_slice(&v_raw[k * p_raw..(k + 1) * p_raw]);
        }
        (p_raw + 1, v)
    } else {
        (p_raw, v_raw)
    };

    let dataset = Dataset::new(DatasetParts {
        n_areas: n,
        n_seasons,
        season_of_week,
        y,
        offset,
        p_mean,
        x,
        p_disp,
        v,
    })?;
    Ok((graph, dataset))
}

/// Writes the full CSV family (dispersion design written as stored,
/// intercept column included).
pub fn write_data_dir(dir: &Path, graph: &SpatialGraph, data: &Dataset) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_adjacency_csv(&dir.join(ADJACENCY), graph)?;

    let path = dir.join(SEASONS);
    let mut w = writer(&path)?;
    record(&mut w, &path, ["week", "season"].map(String::from))?;
    for t in 0..data.n_weeks() {
        record(&mut w, &path, [t.to_string(), data.season_of(t).to_string()])?;
    }
    finish(w, &path)?;

    let path = dir.join(CASES);
    let mut w = writer(&path)?;
    record(&mut w, &path, ["area", "week", "y", "offset"].map(String::from))?;
    for i in 0..data.n_areas() {
        for t in 0..data.n_weeks() {
            record(
                &mut w,
                &path,
                [i.to_string(), t.to_string(), data.y(i, t).to_string(), format!("{:?}", data.offset(i, t))],
            )?;
        }
    }
    finish(w, &path)?;

    let path = dir.join(COVARIATES_MEAN);
    let mut w = writer(&path)?;
    let mut head = vec!["area".to_string(), "week".to_string()];
    head.extend((1..=data.p_mean()).map(|k| format!("x{k}")));
    record(&mut w, &path, head)?;
    for i in 0..data.n_areas() {
        for t in 0..data.n_weeks() {
            let mut row = vec![i.to_string(), t.to_string()];
            row.extend(data.x_row(i, t).iter().map(|v| format!("{v:?}")));
            record(&mut w, &path, row)?;
        }
    }
    finish(w, &path)?;

    let path = dir.join(COVARIATES_DISP);
    let mut w = writer(&path)?;
    let mut head = vec!["area".to_string(), "season".to_string()];
    head.extend((1..=data.p_disp()).map(|k| format!("v{k}")));
    record(&mut w, &path, head)?;
    for i in 0..data.n_areas() {
        for s in 0..data.n_seasons() {
            let mut row = vec![i.to_string(), s.to_string()];
            row.extend(data.v_row(i, s).iter().map(|v| format!("{v:?}")));
            record(&mut w, &path, row)?;
        }
    }
    finish(w, &path)
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

fn record<I, T>(w: &mut csv::Writer<std::fs::File>, path: &Path, fields: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(fields).map_err(|e| Error::csv(path, e))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn require(dir: &Path, name: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "required data file not found"),
        ))
    }
}

fn optional(dir: &Path, name: &str) -> Option<PathBuf> {
    let path = dir.join(name);
    path.is_file().then_some(path)
}

struct Rows {
    width: usize,
    rows: Vec<StringRecord>,
}

fn read_rows(path: &Path, leading: &[&str]) -> Result<Rows> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    for (k, name) in leading.iter().enumerate() {
        if headers.get(k).map(str::trim) != Some(*name) {
            return Err(Error::parse(
                path,
                format!("column {} must be `{name}` (expected header starting {leading:?})", k + 1),
            ));
        }
    }
    let rows = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::csv(path, e))?;
    Ok(Rows {
        width: headers.len(),
        rows,
    })
}

/// Reads `area,<key>,c1..cp` into an area-major `n * m * p` block.
fn read_design(path: &Path, key: &str, n: usize, m: usize) -> Result<(usize, Vec<f64>)> {
    let rows = read_rows(path, &["area", key])?;
    let p = rows.width - 2;
    if rows.rows.len() != n * m {
        return Err(Error::parse(
            path,
            format!("expected {} rows, found {}", n * m, rows.rows.len()),
        ));
    }
    let mut out = vec![f64::NAN; n * m * p];
    let mut seen = vec![false; n * m];
    for row in &rows.rows {
        let i = index(path, row, 0, n, "area")?;
        let j = index(path, row, 1, m, key)?;
        let cell = i * m + j;
        if std::mem::replace(&mut seen[cell], true) {
            return Err(Error::parse(path, format!("area {i} {key} {j} listed twice")));
        }
        for c in 0..p {
            out[cell * p + c] = parse_f64(path, row, c + 2)?;
        }
    }
    Ok((p, out))
}

fn parse_usize(path: &Path, row: &StringRecord, col: usize) -> Result<usize> {
    row.get(col)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(path, format!("bad integer in column {} of row {:?}", col + 1, row)))
}

fn index(path: &Path, row: &StringRecord, col: usize, bound: usize, what: &str) -> Result<usize> {
    let v = parse_usize(path, row, col)?;
    if v >= bound {
        return Err(Error::parse(path, format!("{what} {v} out of range 0..{bound}")));
    }
    Ok(v)
}

fn parse_f64(path: &Path, row: &StringRecord, col: usize) -> Result<f64> {
    row.get(col)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(path, format!("bad number in column {} of row {:?}", col + 1, row)))
}

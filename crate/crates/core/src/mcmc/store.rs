use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kernel::AcceptanceReport;
use super::state::ChainState;
use crate::error::{Error, Result};
use crate::graph::Partition;

pub const LOGLIK_MAGIC: &[u8; 8] = b"STPPMLL1";
pub const LOGLIK_FILE: &str = "loglik.bin";
pub const LOGLIK_CONDITIONAL_FILE: &str = "loglik_conditional.bin";
pub const SCALARS_FILE: &str = "samples_scalars.csv";
pub const LATENT_FILE: &str = "samples_latent.csv";
pub const PARTITIONS_FILE: &str = "samples_partitions.csv";
pub const AREA_FILE: &str = "samples_area.csv";

/// Dimensions of a stored run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreShape {
    pub n_areas: usize,
    pub n_seasons: usize,
    /// Horizon length `q` actually sampled.
    pub q: usize,
    pub n_weeks: usize,
    pub p_mean: usize,
    pub p_disp: usize,
}

impl StoreShape {
    pub fn n_slots(&self) -> usize {
        self.n_seasons + self.q
    }

    pub fn n_obs(&self) -> usize {
        self.n_areas * self.n_weeks
    }
}

/// Retained draws of every parameter block, one entry per stored sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleStore {
    pub shape: StoreShape,
    pub upsilon: Vec<f64>,
    pub kappa: Vec<f64>,
    pub zeta: Vec<f64>,
    pub w: Vec<f64>,
    /// Per draw, one value per slot (`S + q`).
    pub rho: Vec<Vec<f64>>,
    pub u: Vec<Vec<u64>>,
    pub c: Vec<Vec<u64>>,
    pub beta: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
    /// Per draw, one partition per data season.
    pub partitions: Vec<Vec<Partition>>,
    /// Per draw, cluster count of every slot including the horizon.
    pub k: Vec<Vec<usize>>,
    /// Per draw, `θ*` of each area's cluster, area-major `i * S + s`.
    pub theta_area: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    /// Pointwise log-likelihood with the heterogeneity integrated out,
    /// `n_draws × n_obs` (empty rows when not stored).
    pub loglik: Vec<Vec<f64>>,
    /// Pointwise Poisson log-likelihood given the sampled `z`.
    pub loglik_conditional: Vec<Vec<f64>>,
    pub acceptance: AcceptanceReport,
}

impl SampleStore {
    pub fn new(shape: StoreShape) -> Self {
        SampleStore {
            shape,
            upsilon: Vec::new(),
            kappa: Vec::new(),
            zeta: Vec::new(),
            w: Vec::new(),
            rho: Vec::new(),
            u: Vec::new(),
            c: Vec::new(),
            beta: Vec::new(),
            delta: Vec::new(),
            partitions: Vec::new(),
            k: Vec::new(),
            theta_area: Vec::new(),
            z: Vec::new(),
            loglik: Vec::new(),
            loglik_conditional: Vec::new(),
            acceptance: AcceptanceReport::default(),
        }
    }

    pub fn n_draws(&self) -> usize {
        self.upsilon.len()
    }

    /// Appends the current state; log-likelihood rows may be empty.
    pub fn push(&mut self, st: &ChainState, loglik: Vec<f64>, loglik_conditional: Vec<f64>) {
        let l = &st.latent;
        self.upsilon.push(l.upsilon);
        self.kappa.push(l.kappa);
        self.zeta.push(l.zeta);
        self.w.push(l.w);
        self.rho.push(l.rho.clone());
        self.u.push(l.u.clone());
        self.c.push(l.c.clone());
        self.beta.push(st.beta.clone());
        self.delta.push(st.delta.clone());
        self.partitions
            .push(st.seasons[..st.n_data_seasons()].iter().map(|s| s.partition.clone()).collect());
        self.k.push(st.seasons.iter().map(|s| s.k()).collect());
        self.theta_area.push(st.theta_area());
        self.z.push(st.z.clone());
        self.loglik.push(loglik);
        self.loglik_conditional.push(loglik_conditional);
    }

    /// Appends the draws of another chain with the same shape.
    pub fn append(&mut self, other: SampleStore) -> Result<()> {
        if other.shape != self.shape {
            return Err(Error::InvalidData(format!(
                "cannot pool chains of shapes {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        self.upsilon.extend(other.upsilon);
        self.kappa.extend(other.kappa);
        self.zeta.extend(other.zeta);
        self.w.extend(other.w);
        self.rho.extend(other.rho);
        self.u.extend(other.u);
        self.c.extend(other.c);
        self.beta.extend(other.beta);
        self.delta.extend(other.delta);
        self.partitions.extend(other.partitions);
        self.k.extend(other.k);
        self.theta_area.extend(other.theta_area);
        self.z.extend(other.z);
        self.loglik.extend(other.loglik);
        self.loglik_conditional.extend(other.loglik_conditional);
        Ok(())
    }

    /// Draws of one scalar series by name (`upsilon`, `kappa`, `zeta`, `w`,
    /// `beta_j`, `delta_j`, `rho_j`, `k_j`; indices one-based).
    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        match name {
            "upsilon" => return Some(self.upsilon.clone()),
            "kappa" => return Some(self.kappa.clone()),
            "zeta" => return Some(self.zeta.clone()),
            "w" => return Some(self.w.clone()),
            _ => {}
        }
        let (head, idx) = name.rsplit_once('_')?;
        let j = idx.parse::<usize>().ok()?.checked_sub(1)?;
        match head {
            "beta" if j < self.shape.p_mean => Some(self.beta.iter().map(|b| b[j]).collect()),
            "delta" if j < self.shape.p_disp => Some(self.delta.iter().map(|d| d[j]).collect()),
            "rho" if j < self.shape.n_slots() => Some(self.rho.iter().map(|r| r[j]).collect()),
            "k" if j < self.shape.n_slots() => Some(self.k.iter().map(|k| k[j] as f64).collect()),
            _ => None,
        }
    }

    /// Scalar series names in file order.
    pub fn scalar_names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["upsilon", "kappa", "zeta", "w"].map(String::from).to_vec();
        names.extend((1..=self.shape.p_mean).map(|j| format!("beta_{j}")));
        names.extend((1..=self.shape.p_disp).map(|j| format!("delta_{j}")));
        names
    }

    /// Writes the `samples_*.csv` files and the log-likelihood matrices.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(SCALARS_FILE);
        let mut w = csv_writer(&path)?;
        let mut head = vec!["draw".to_string()];
        head.extend(self.scalar_names());
        write_row(&mut w, &path, head)?;
        for d in 0..self.n_draws() {
            let mut row = vec![d.to_string()];
            for v in [self.upsilon[d], self.kappa[d], self.zeta[d], self.w[d]]
                .iter()
                .chain(&self.beta[d])
                .chain(&self.delta[d])
            {
                row.push(fmt(*v));
            }
            write_row(&mut w, &path, row)?;
        }
        flush(w, &path)?;

        let path = dir.join(LATENT_FILE);
        let mut w = csv_writer(&path)?;
        write_row(&mut w, &path, ["draw", "slot", "rho", "u", "c", "k"].map(String::from))?;
        for d in 0..self.n_draws() {
            for j in 0..self.shape.n_slots() {
                write_row(
                    &mut w,
                    &path,
                    [
                        d.to_string(),
                        j.to_string(),
                        fmt(self.rho[d][j]),
                        self.u[d][j].to_string(),
                        self.c[d][j].to_string(),
                        self.k[d][j].to_string(),
                    ],
                )?;
            }
        }
        flush(w, &path)?;

        let path = dir.join(PARTITIONS_FILE);
        let mut w = csv_writer(&path)?;
        write_row(&mut w, &path, ["draw", "season", "area", "cluster"].map(String::from))?;
        for (d, draw) in self.partitions.iter().enumerate() {
            for (s, p) in draw.iter().enumerate() {
                for (i, label) in p.labels().iter().enumerate() {
                    write_row(&mut w, &path, [d, s, i, *label].map(|v| v.to_string()))?;
                }
            }
        }
        flush(w, &path)?;

        let path = dir.join(AREA_FILE);
        let mut w = csv_writer(&path)?;
        write_row(&mut w, &path, ["draw", "area", "season", "theta", "z"].map(String::from))?;
        let s_len = self.shape.n_seasons;
        for d in 0..self.n_draws() {
            for k in 0..self.shape.n_areas * s_len {
                write_row(
                    &mut w,
                    &path,
                    [
                        d.to_string(),
                        (k / s_len).to_string(),
                        (k % s_len).to_string(),
                        fmt(self.theta_area[d][k]),
                        fmt(self.z[d][k]),
                    ],
                )?;
            }
        }
        flush(w, &path)?;

        if self.loglik.first().is_some_and(|r| !r.is_empty()) {
            write_loglik(&dir.join(LOGLIK_FILE), &self.loglik, self.shape.n_obs())?;
            write_loglik(&dir.join(LOGLIK_CONDITIONAL_FILE), &self.loglik_conditional, self.shape.n_obs())?;
        }
        Ok(())
    }

    /// Reads back what [`SampleStore::write_dir`] wrote. Acceptance counts
    /// live in the run metadata and are left at their defaults.
    pub fn read_dir(dir: &Path, shape: StoreShape) -> Result<Self> {
        let mut store = SampleStore::new(shape);

        let path = dir.join(SCALARS_FILE);
        let rows = read_records(&path)?;
        let width = 5 + shape.p_mean + shape.p_disp;
        for (d, row) in rows.iter().enumerate() {
            check_row(&path, row, width, d)?;
            let v: Vec<f64> = (1..width).map(|c| num(&path, row, c)).collect::<Result<_>>()?;
            store.upsilon.push(v[0]);
            store.kappa.push(v[1]);
            store.zeta.push(v[2]);
            store.w.push(v[3]);
            store.beta.push(v[4..4 + shape.p_mean].to_vec());
            store.delta.push(v[4 + shape.p_mean..].to_vec());
        }
        let n_draws = store.upsilon.len();

        let path = dir.join(LATENT_FILE);
        let rows = read_records(&path)?;
        expect_len(&path, rows.len(), n_draws * shape.n_slots())?;
        for draw in rows.chunks(shape.n_slots().max(1)).take(n_draws) {
            let mut rho = Vec::new();
            let mut u = Vec::new();
            let mut c = Vec::new();
            let mut k = Vec::new();
            for row in draw {
                rho.push(num(&path, row, 2)?);
                u.push(num(&path, row, 3)?);
                c.push(num(&path, row, 4)?);
                k.push(num(&path, row, 5)?);
            }
            store.rho.push(rho);
            store.u.push(u);
            store.c.push(c);
            store.k.push(k);
        }
        if shape.n_slots() == 0 {
            store.rho = vec![Vec::new(); n_draws];
            store.u = vec![Vec::new(); n_draws];
            store.c = vec![Vec::new(); n_draws];
            store.k = vec![Vec::new(); n_draws];
        }

        let path = dir.join(PARTITIONS_FILE);
        let rows = read_records(&path)?;
        let n = shape.n_areas;
        expect_len(&path, rows.len(), n_draws * shape.n_seasons * n)?;
        let mut it = rows.iter();
        for _ in 0..n_draws {
            let mut draw = Vec::with_capacity(shape.n_seasons);
            for _ in 0..shape.n_seasons {
                let labels: Vec<usize> = (0..n)
                    .map(|_| num(&path, it.next().expect("length checked"), 3))
                    .collect::<Result<_>>()?;
                draw.push(Partition::from_labels(&labels));
            }
            store.partitions.push(draw);
        }

        let path = dir.join(AREA_FILE);
        let rows = read_records(&path)?;
        let cells = n * shape.n_seasons;
        expect_len(&path, rows.len(), n_draws * cells)?;
        let mut it = rows.iter();
        for _ in 0..n_draws {
            let mut theta = Vec::with_capacity(cells);
            let mut z = Vec::with_capacity(cells);
            for _ in 0..cells {
                let row = it.next().expect("length checked");
                theta.push(num(&path, row, 3)?);
                z.push(num(&path, row, 4)?);
            }
            store.theta_area.push(theta);
            store.z.push(z);
        }

        let ll = dir.join(LOGLIK_FILE);
        if ll.is_file() {
            store.loglik = read_loglik(&ll)?;
            expect_len(&ll, store.loglik.len(), n_draws)?;
            let llc = dir.join(LOGLIK_CONDITIONAL_FILE);
            store.loglik_conditional = if llc.is_file() { read_loglik(&llc)? } else { vec![Vec::new(); n_draws] };
        } else {
            store.loglik = vec![Vec::new(); n_draws];
            store.loglik_conditional = vec![Vec::new(); n_draws];
        }
        Ok(store)
    }
}

/// Writes a `draws × obs` matrix: 8-byte magic, `n_draws` and `n_obs` as
/// little-endian `u32`, then row-major little-endian `f64`.
pub fn write_loglik(path: &Path, rows: &[Vec<f64>], n_obs: usize) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let n_draws = u32::try_from(rows.len()).map_err(|_| Error::InvalidData("too many draws".into()))?;
    let n_obs32 = u32::try_from(n_obs).map_err(|_| Error::InvalidData("too many observations".into()))?;
    let mut buf = Vec::with_capacity(16 + rows.len() * n_obs * 8);
    buf.extend_from_slice(LOGLIK_MAGIC);
    buf.extend_from_slice(&n_draws.to_le_bytes());
    buf.extend_from_slice(&n_obs32.to_le_bytes());
    for row in rows {
        if row.len() != n_obs {
            return Err(Error::Dimension {
                what: "log-likelihood row",
                expected: n_obs,
                got: row.len(),
            });
        }
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_loglik(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() < 16 || &bytes[..8] != LOGLIK_MAGIC {
        return Err(Error::parse(path, "not a log-likelihood matrix (bad magic)"));
    }
    let n_draws = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let n_obs = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let body = &bytes[16..];
    if body.len() != n_draws * n_obs * 8 {
        return Err(Error::parse(
            path,
            format!("header says {n_draws} x {n_obs} values but body holds {} bytes", body.len()),
        ));
    }
    if n_obs == 0 {
        return Ok(vec![Vec::new(); n_draws]);
    }
    Ok(body
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect::<Vec<_>>()
        .chunks(n_obs)
        .map(<[f64]>::to_vec)
        .collect())
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

fn write_row<I, T>(w: &mut csv::Writer<BufWriter<File>>, path: &Path, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| Error::csv(path, e))
}

fn flush(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    csv::Reader::from_path(path)
        .map_err(|e| Error::csv(path, e))?
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))
}

fn check_row(path: &Path, row: &csv::StringRecord, width: usize, line: usize) -> Result<()> {
    if row.len() != width {
        return Err(Error::parse(path, format!("row {line} has {} fields, expected {width}", row.len())));
    }
    Ok(())
}

fn expect_len(path: &Path, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::parse(path, format!("expected {want} rows, found {got}")));
    }
    Ok(())
}

fn num<T: std::str::FromStr>(path: &Path, row: &csv::StringRecord, col: usize) -> Result<T> {
    row.get(col)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(path, format!("bad value in column {} of row {:?}", col + 1, row)))
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Partition, SpatialGraph};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize, Serialize)]
struct EdgeRow {
    area_a: usize,
    area_b: usize,
}

#[derive(Debug, Deserialize, Serialize)]
struct LabelRow {
    area: usize,
    cluster: usize,
}

/// Reads `area_a,area_b` rows. When `n_areas` is `None` it is taken as the
/// largest id plus one.
pub fn read_adjacency_csv(path: &Path, n_areas: Option<usize>) -> Result<SpatialGraph> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut edges = Vec::new();
    for row in reader.deserialize::<EdgeRow>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        edges.push((row.area_a, row.area_b));
    }
    let n = match n_areas {
        Some(n) => n,
        None => edges
            .iter()
            .map(|&(a, b)| a.max(b) + 1)
            .max()
            .ok_or_else(|| Error::parse(path, "adjacency list is empty"))?,
    };
    SpatialGraph::new(n, edges)
}

pub fn write_adjacency_csv(path: &Path, graph: &SpatialGraph) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for &(area_a, area_b) in graph.edges() {
        writer
            .serialize(EdgeRow { area_a, area_b })
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads `area,cluster` rows; every area `0..n` must appear exactly once.
pub fn read_partition_csv(path: &Path) -> Result<Partition> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut rows = Vec::new();
    for row in reader.deserialize::<LabelRow>() {
        rows.push(row.map_err(|e| Error::csv(path, e))?);
    }
    let n = rows.len();
    let mut labels = vec![None; n];
    for row in rows {
        let slot = labels
            .get_mut(row.area)
            .ok_or_else(|| Error::parse(path, format!("area {} out of range", row.area)))?;
        if slot.replace(row.cluster).is_some() {
            return Err(Error::parse(path, format!("area {} listed twice", row.area)));
        }
    }
    let labels: Vec<usize> = labels.into_iter().map(|l| l.expect("all areas filled")).collect();
    Ok(Partition::from_labels(&labels))
}

pub fn write_partition_csv(path: &Path, partition: &Partition) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for (area, &cluster) in partition.labels().iter().enumerate() {
        writer
            .serialize(LabelRow { area, cluster })
            .map_err(|e| Error::csv(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

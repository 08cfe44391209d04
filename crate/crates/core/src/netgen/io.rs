//! Canonical edge-list serialization and the JSON metadata sidecar.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Network, Side, WiringReport};
use crate::error::{Error, Result};

pub const EDGE_LIST_HEADER: &str = "source,target,multiplicity";

/// Sidecar describing how a serialized network was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetadata {
    pub n: usize,
    pub gamma: f64,
    pub variable_side: Side,
    pub fixed_side: Side,
    pub fixed_degree: u32,
    pub seed: Option<u64>,
    pub edges: u64,
    #[serde(flatten)]
    pub wiring: WiringReport,
}

impl NetworkMetadata {
    pub fn describe(net: &Network, gamma: f64, seed: Option<u64>) -> Self {
        NetworkMetadata {
            n: net.n(),
            gamma,
            variable_side: net.variable_side(),
            fixed_side: net.variable_side().opposite(),
            fixed_degree: net.fixed_degree(),
            seed,
            edges: net.edge_count(),
            wiring: *net.wiring(),
        }
    }
}

impl Network {
    /// Edge list with header, rows sorted by (source, target).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 * self.out_adj.links.len() + 32);
        out.push_str(EDGE_LIST_HEADER);
        out.push('\n');
        for (s, t, m) in self.edges() {
            out.push_str(&format!("{s},{t},{m}\n"));
        }
        out
    }
}

pub fn write_edge_list(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, net.to_edge_list()).map_err(|e| Error::io(path, e))
}

pub fn write_metadata(meta: &NetworkMetadata, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(meta).expect("metadata is always serializable");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_metadata(path: impl AsRef<Path>) -> Result<NetworkMetadata> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Reads an edge list written by [`write_edge_list`]. The node count and
/// sides come from the metadata since isolated nodes leave no rows.
pub fn read_edge_list(path: impl AsRef<Path>, meta: &NetworkMetadata) -> Result<Network> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != EDGE_LIST_HEADER {
        return Err(Error::Parse {
            path: path.to_owned(),
            message: format!("expected header `{EDGE_LIST_HEADER}`"),
        });
    }
    let mut pairs = Vec::new();
    for row in reader.deserialize::<(u32, u32, u32)>() {
        let (s, t, m) = row.map_err(|e| Error::csv(path, e))?;
        if m == 0 {
            return Err(Error::Parse {
                path: path.to_owned(),
                message: format!("zero multiplicity on {s}->{t}"),
            });
        }
        pairs.extend(std::iter::repeat_n((s, t), m as usize));
    }
    let mut net = Network::from_pairs(meta.n, meta.variable_side, meta.fixed_degree, pairs)?;
    net.wiring = meta.wiring;
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::{build_network, sample_degree_targets};
    use crate::rng::stream;

    #[test]
    fn edge_list_round_trips_through_disk() {
        let mut rng = stream(11, 0);
        let targets = sample_degree_targets(200, 3.0, Side::In, 6, &mut rng).unwrap();
        let net = build_network(&targets, &mut rng);
        let dir = tempfile::tempdir().unwrap();
        let edges = dir.path().join("net.csv");
        let sidecar = dir.path().join("net.json");
        let meta = NetworkMetadata::describe(&net, 3.0, Some(11));
        write_edge_list(&net, &edges).unwrap();
        write_metadata(&meta, &sidecar).unwrap();

        let meta2 = read_metadata(&sidecar).unwrap();
        assert_eq!(meta, meta2);
        let back = read_edge_list(&edges, &meta2).unwrap();
        assert_eq!(back, net);
        assert!(std::fs::read_to_string(&edges).unwrap().starts_with("source,target,multiplicity\n"));
    }

    #[test]
    fn bad_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "a,b,c\n0,1,1\n").unwrap();
        let meta = NetworkMetadata {
            n: 2,
            gamma: 3.0,
            variable_side: Side::Out,
            fixed_side: Side::In,
            fixed_degree: 1,
            seed: None,
            edges: 1,
            wiring: WiringReport::default(),
        };
        assert!(matches!(read_edge_list(&p, &meta), Err(Error::Parse { .. })));
    }
}

//! Artifact files: node sets, fields, chains and ladder directories.

use std::collections::BTreeMap;
use std::path::Path;

use causal_lab::distance::{LadderLevel, RefinementLadder};
use causal_lab::{CausalGraph, DivergentChain, NodeId, NodeSet, ScalarField};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::report::sha256_hex;

pub const LADDER_MANIFEST: &str = "ladder.json";

pub fn graph_bytes(graph: &CausalGraph) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(&graph.to_file())?)
}

pub fn set_bytes(set: &NodeSet) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(set)?)
}

pub fn load_set(path: &Path) -> Result<NodeSet> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}

/// `{"node_id": value}`
pub fn field_bytes(field: &ScalarField) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(&field.to_map())?)
}

pub fn load_field(path: &Path, nodes: usize) -> Result<ScalarField> {
    let map: BTreeMap<NodeId, f64> = serde_json::from_slice(&std::fs::read(path)?)?;
    Ok(ScalarField::from_map(&map, nodes)?)
}

pub fn chains_bytes(chains: &[DivergentChain]) -> Result<Vec<u8>> {
    Ok(serde_json::to_vec(chains)?)
}

/// Query pairs for `verify-duality`: `[[p, q], ...]`.
pub fn load_pairs(path: &Path) -> Result<Vec<(NodeId, NodeId)>> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderManifest {
    pub parameters: Vec<f64>,
    pub files: Vec<String>,
}

/// Writes one graph file per level plus a manifest; returns file names
/// (relative to `dir`) with their sha256.
pub fn save_ladder(ladder: &RefinementLadder, dir: &Path) -> Result<Vec<(String, String)>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (k, level) in ladder.levels().iter().enumerate() {
        let file = format!("level-{k}.json");
        let bytes = graph_bytes(&level.graph)?;
        std::fs::write(dir.join(&file), &bytes)?;
        written.push((file.clone(), sha256_hex(&bytes)));
        files.push(file);
    }
    let manifest = serde_json::to_vec_pretty(&LadderManifest { parameters: ladder.parameters(), files })?;
    std::fs::write(dir.join(LADDER_MANIFEST), &manifest)?;
    written.push((LADDER_MANIFEST.to_string(), sha256_hex(&manifest)));
    Ok(written)
}

pub fn load_ladder(dir: &Path) -> Result<RefinementLadder> {
    let manifest: LadderManifest = serde_json::from_slice(&std::fs::read(dir.join(LADDER_MANIFEST))?)?;
    if manifest.parameters.len() != manifest.files.len() {
        return Err(CliError::Argument("ladder manifest lists different numbers of parameters and files".into()));
    }
    let levels = manifest
        .parameters
        .iter()
        .zip(&manifest.files)
        .map(|(&parameter, file)| Ok(LadderLevel { parameter, graph: CausalGraph::load(&dir.join(file))? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(RefinementLadder::new(levels)?)
}

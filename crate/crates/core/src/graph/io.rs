use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Argument, Edge, GraphError, Node, TaraGraph};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    graph_id: Option<String>,
    manual_id: String,
    nodes: Vec<Node>,
    #[serde(default)]
    args: Vec<Argument>,
    #[serde(default)]
    edges: Vec<Edge>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(GraphFile),
    Many(Vec<GraphFile>),
}

impl From<GraphFile> for TaraGraph {
    fn from(f: GraphFile) -> TaraGraph {
        TaraGraph::from_parts(f.graph_id, f.manual_id, f.nodes, f.args, f.edges)
    }
}

impl TaraGraph {
    fn to_file(&self) -> GraphFile {
        GraphFile {
            graph_id: Some(self.graph_id.clone()),
            manual_id: self.manual_id.clone(),
            nodes: self.nodes.clone(),
            args: self.args.clone(),
            edges: self.edges.clone(),
        }
    }

    /// Canonical pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("graph serializes");
        s.push('\n');
        s
    }
}

/// Serializes several graphs as one JSON array.
pub fn graphs_to_json(graphs: &[TaraGraph]) -> String {
    let files: Vec<GraphFile> = graphs.iter().map(TaraGraph::to_file).collect();
    let mut s = serde_json::to_string_pretty(&files).expect("graph serializes");
    s.push('\n');
    s
}

pub fn parse_graph(text: &str) -> Result<TaraGraph, GraphError> {
    serde_json::from_str::<GraphFile>(text)
        .map(TaraGraph::from)
        .map_err(|e| GraphError::MalformedGraphFile(e.to_string()))
}

/// Accepts either one graph object or an array of them.
pub fn parse_graphs(text: &str) -> Result<Vec<TaraGraph>, GraphError> {
    match serde_json::from_str::<OneOrMany>(text) {
        Ok(OneOrMany::One(f)) => Ok(vec![f.into()]),
        Ok(OneOrMany::Many(fs)) => Ok(fs.into_iter().map(TaraGraph::from).collect()),
        Err(_) => {
            // re-parse strictly for a useful message
            parse_graph(text).map(|g| vec![g])
        }
    }
}

pub fn load_graph_file(path: &Path) -> Result<TaraGraph, GraphError> {
    parse_graph(&std::fs::read_to_string(path)?)
        .map_err(|e| GraphError::MalformedGraphFile(format!("{}: {e}", path.display())))
}

pub fn load_graphs_file(path: &Path) -> Result<Vec<TaraGraph>, GraphError> {
    parse_graphs(&std::fs::read_to_string(path)?)
        .map_err(|e| GraphError::MalformedGraphFile(format!("{}: {e}", path.display())))
}

pub fn save_graph(graph: &TaraGraph, path: &Path) -> Result<(), GraphError> {
    std::fs::write(path, graph.to_json())?;
    Ok(())
}

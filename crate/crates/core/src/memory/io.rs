//! Graph export/import: a versioned JSON schema for test fixtures and the
//! CLI `dump-graph` command. See docs/formats.md.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{AnchorId, CognitiveMemoryGraph, MemoryError, ObjectId, ObjectNode, VisualAnchor};

pub const GRAPH_FORMAT: &str = "cmg";
pub const GRAPH_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    format: String,
    version: u32,
    graph_version: u64,
    next_object: u64,
    anchors: Vec<VisualAnchor>,
    objects: Vec<ObjectNode>,
    edges: Vec<(AnchorId, ObjectId)>,
}

pub fn save_graph<W: Write>(graph: &CognitiveMemoryGraph, w: W) -> Result<(), MemoryError> {
    let file = GraphFile {
        format: GRAPH_FORMAT.to_string(),
        version: GRAPH_VERSION,
        graph_version: graph.version,
        next_object: graph.next_object,
        anchors: graph.anchors.values().cloned().collect(),
        objects: graph.objects.values().cloned().collect(),
        edges: graph.edges.iter().copied().collect(),
    };
    serde_json::to_writer_pretty(w, &file)?;
    Ok(())
}

pub fn load_graph<R: Read>(r: R) -> Result<CognitiveMemoryGraph, MemoryError> {
    let file: GraphFile = serde_json::from_reader(r)?;
    if file.format != GRAPH_FORMAT {
        return Err(MemoryError::Format(format!(
            "unexpected format {:?}",
            file.format
        )));
    }
    if file.version != GRAPH_VERSION {
        return Err(MemoryError::Format(format!(
            "unsupported graph version {}",
            file.version
        )));
    }
    let mut graph = CognitiveMemoryGraph {
        version: file.graph_version,
        next_object: file.next_object,
        ..Default::default()
    };
    for a in file.anchors {
        if graph.anchors.insert(a.id, a).is_some() {
            return Err(MemoryError::Format("duplicate anchor id".into()));
        }
    }
    for o in file.objects {
        if graph.objects.insert(o.id, o).is_some() {
            return Err(MemoryError::Format("duplicate object id".into()));
        }
    }
    for (a, o) in file.edges {
        if !graph.anchors.contains_key(&a) || !graph.objects.contains_key(&o) {
            return Err(MemoryError::Format(format!(
                "edge ({:?}, {:?}) references a missing node",
                a, o
            )));
        }
        graph.edges.insert((a, o));
    }
    graph.audit().map_err(MemoryError::Format)?;
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::super::{MergeConfig, ObservedObject, SymbolicView};
    use super::*;
    use crate::geom::{Pose, Vec2};

    #[test]
    fn graph_round_trips_losslessly() {
        let cfg = MergeConfig::default();
        let mut g = CognitiveMemoryGraph::new();
        g.insert_anchor(
            VisualAnchor {
                id: AnchorId(7),
                pose: Pose::new(Vec2::new(1.0, 2.0), 0.5),
                view: SymbolicView::default(),
                timestamp: 3,
                cost: 1.5,
            },
            vec![ObservedObject::from_points(
                "bed",
                vec![[0.0, 0.0, 0.0], [1.0, 1.0, 1.0]],
            )],
            &cfg,
        )
        .unwrap();

        let mut buf = Vec::new();
        save_graph(&g, &mut buf).unwrap();
        let back = load_graph(buf.as_slice()).unwrap();
        assert_eq!(back.version(), g.version());
        assert_eq!(back.anchor_count(), 1);
        assert_eq!(back.object_count(), 1);
        assert_eq!(back.edge_count(), 1);

        // byte-identical re-export
        let mut buf2 = Vec::new();
        save_graph(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn load_rejects_dangling_edges() {
        let text = r#"{
          "format": "cmg", "version": 1, "graph_version": 1, "next_object": 1,
          "anchors": [], "objects": [], "edges": [[1, 0]]
        }"#;
        assert!(load_graph(text.as_bytes()).is_err());
    }
}

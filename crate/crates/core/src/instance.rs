//! JSON instance documents.
//!
//! ```json
//! {
//!   "vertices": 4,
//!   "edges": [{"u": 0, "v": 1, "w": 1}, {"u": 1, "v": 2, "w": 1}, {"u": 2, "v": 3, "w": 1}],
//!   "matching": [[0, 1], [2, 3]],
//!   "allocation": {"0": "1/3", "1": "2/3", "2": "2/3", "3": "1/3"}
//! }
//! ```
//!
//! `matching` and `allocation` are optional; vertices missing from
//! `allocation` get 0. Allocation values are `p/q` strings, integers, or
//! decimal strings.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightedGraph};
use crate::outcome::{Allocation, Matching, Outcome};
use crate::rational::{serde_rational, Rational};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    u: Vertex,
    v: Vertex,
    w: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(transparent)]
struct RationalDoc(#[serde(with = "serde_rational")] Rational);

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    vertices: usize,
    edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matching: Option<Vec<(Vertex, Vertex)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allocation: Option<BTreeMap<String, RationalDoc>>,
}

/// A parsed instance: graph plus optional matching and allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub graph: Arc<WeightedGraph>,
    pub matching: Option<Arc<Matching>>,
    pub allocation: Option<Allocation>,
}

impl Instance {
    pub fn new(graph: WeightedGraph) -> Self {
        Instance { graph: Arc::new(graph), matching: None, allocation: None }
    }

    pub fn from_outcome(outcome: &Outcome) -> Self {
        Instance {
            graph: outcome.graph_arc().clone(),
            matching: Some(outcome.matching_arc().clone()),
            allocation: Some(outcome.allocation().clone()),
        }
    }

    pub fn with_matching(mut self, matching: Matching) -> Self {
        self.matching = Some(Arc::new(matching));
        self
    }

    pub fn matching_or_err(&self) -> Result<&Arc<Matching>> {
        self.matching.as_ref().ok_or_else(|| Error::Input("instance has no matching".into()))
    }

    /// The outcome, when both matching and allocation are present.
    pub fn outcome(&self) -> Result<Outcome> {
        let m = self.matching_or_err()?;
        let x = self.allocation.clone().ok_or_else(|| Error::Input("instance has no allocation".into()))?;
        Outcome::new(self.graph.clone(), m.clone(), x)
    }

    pub fn to_json(&self) -> String {
        let g = &self.graph;
        let doc = InstanceDoc {
            vertices: g.vertex_count(),
            edges: g.edges().iter().map(|e| EdgeDoc { u: e.u, v: e.v, w: e.w }).collect(),
            matching: self.matching.as_ref().map(|m| m.pairs(g)),
            allocation: self.allocation.as_ref().map(|x| {
                x.values()
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(i, v)| (i.to_string(), RationalDoc(v.clone())))
                    .collect()
            }),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("instance serializes");
        s.push('\n');
        s
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let graph = WeightedGraph::new(doc.vertices, doc.edges.iter().map(|e| (e.u, e.v, e.w)))?;
    let matching = doc.matching.map(|pairs| Matching::from_pairs(&graph, pairs)).transpose()?;
    let allocation = match doc.allocation {
        None => None,
        Some(map) => {
            if matching.is_none() {
                return Err(Error::validation("allocation given without a matching"));
            }
            let mut x = vec![Rational::zero(); graph.vertex_count()];
            let mut bad = Vec::new();
            for (key, RationalDoc(val)) in map {
                match key.trim().parse::<Vertex>() {
                    Ok(v) if v < graph.vertex_count() => x[v] = val,
                    _ => bad.push(format!("allocation key {key:?} is not a vertex")),
                }
            }
            if !bad.is_empty() {
                return Err(Error::Validation(bad));
            }
            Some(Allocation(x))
        }
    };
    let inst = Instance { graph: Arc::new(graph), matching: matching.map(Arc::new), allocation };
    if inst.allocation.is_some() {
        inst.outcome()?;
    }
    Ok(inst)
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance(&text)
}

//! Small named instances shipped with the crate.

use std::fmt;
use std::str::FromStr;

use crate::multigraph::{parse_graph, Multigraph};

pub const K3_GRAPH: &str = include_str!("../data/k3.graph");
pub const K4_MINUS_EDGE_GRAPH: &str = include_str!("../data/k4_minus_edge.graph");
pub const K4_GRAPH: &str = include_str!("../data/k4.graph");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instance {
    K3,
    K4MinusEdge,
    K4,
}

impl Instance {
    pub const ALL: [Instance; 3] = [Instance::K3, Instance::K4MinusEdge, Instance::K4];

    pub fn name(self) -> &'static str {
        match self {
            Instance::K3 => "K3",
            Instance::K4MinusEdge => "K4_minus_edge",
            Instance::K4 => "K4",
        }
    }

    pub fn graph_text(self) -> &'static str {
        match self {
            Instance::K3 => K3_GRAPH,
            Instance::K4MinusEdge => K4_MINUS_EDGE_GRAPH,
            Instance::K4 => K4_GRAPH,
        }
    }

    pub fn graph(self) -> Multigraph {
        parse_graph(self.graph_text()).expect("bundled graph parses")
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Instance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|i| i.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown instance `{s}` (expected K3, K4_minus_edge or K4)"))
    }
}

pub fn k3() -> Multigraph {
    Instance::K3.graph()
}

pub fn k4_minus_edge() -> Multigraph {
    Instance::K4MinusEdge.graph()
}

pub fn k4() -> Multigraph {
    Instance::K4.graph()
}

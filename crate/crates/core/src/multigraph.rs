//! Multigraphs with two marked edges `e` and `f`.
//!
//! Vertices are dense indices `0..n`. Edges keep their declaration order,
//! which is also the bit order of every [`EdgeSet`] mask. Loops and parallel
//! edges are allowed.

use std::fmt;

use thiserror::Error;

use crate::dsu::UnionFind;
use crate::rng::SplitMix64;

/// Hard upper bound on the number of edges; masks are `u64`.
pub const MASK_WIDTH: usize = 64;
/// Default enumeration cap on `|E|`.
pub const DEFAULT_MAX_EDGES: usize = 30;
/// Above this many edges enumeration gets slow enough to deserve a warning.
pub const WARN_EDGES: usize = 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate edge id `{id}`")]
    DuplicateEdge { line: usize, id: String },
    #[error("e not marked")]
    EMissing,
    #[error("f not marked")]
    FMissing,
    #[error("e and f must be different edges (both are `{0}`)")]
    IdenticalMarks(String),
    #[error("marked edge `{0}` is not declared")]
    UnknownMark(String),
    #[error("edge `{id}`: vertex {vertex} out of range for {vertex_count} vertices")]
    VertexOutOfRange {
        id: String,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("missing `vertices` declaration")]
    NoVertices,
    #[error("invalid edge id `{0}` (use letters, digits and `_`; `q` is reserved)")]
    InvalidId(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}` is marked and cannot be removed")]
    MarkedEdge(String),
    #[error("edge `{0}` is a loop and cannot be contracted")]
    LoopContraction(String),
    #[error("graph has {0} edges; at most {MASK_WIDTH} are supported")]
    TooManyEdges(usize),
    #[error("graph has {edges} edges, above the enumeration cap of {cap}")]
    CapExceeded { edges: usize, cap: usize },
    #[error("edge `{0}` is outside the required edge universe")]
    OutsideUniverse(String),
}

/// Which ground set an [`EdgeSet`] lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Universe {
    /// All edges `E`.
    Full,
    /// `E` without the two marked edges.
    Unmarked,
}

/// A subset of the edges of one multigraph, as a bitmask in edge order.
///
/// Equality, ordering and hashing look at the mask only.
#[derive(Debug, Clone, Copy)]
pub struct EdgeSet {
    mask: u64,
    universe: Universe,
}

impl PartialEq for EdgeSet {
    fn eq(&self, other: &Self) -> bool {
        self.mask == other.mask
    }
}
impl Eq for EdgeSet {}
impl std::hash::Hash for EdgeSet {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.mask.hash(state)
    }
}
impl PartialOrd for EdgeSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for EdgeSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.mask.cmp(&other.mask)
    }
}

impl EdgeSet {
    pub const fn from_mask(mask: u64, universe: Universe) -> Self {
        Self { mask, universe }
    }
    pub const fn empty(universe: Universe) -> Self {
        Self { mask: 0, universe }
    }
    pub const fn mask(self) -> u64 {
        self.mask
    }
    pub const fn universe(self) -> Universe {
        self.universe
    }
    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }
    pub fn is_empty(self) -> bool {
        self.mask == 0
    }
    pub fn contains(self, edge: usize) -> bool {
        edge < MASK_WIDTH && self.mask >> edge & 1 == 1
    }
    pub fn insert(self, edge: usize) -> Self {
        Self {
            mask: self.mask | 1 << edge,
            ..self
        }
    }
    pub fn union(self, other: Self) -> Self {
        Self {
            mask: self.mask | other.mask,
            universe: widest(self.universe, other.universe),
        }
    }
    pub fn intersection(self, other: Self) -> Self {
        Self {
            mask: self.mask & other.mask,
            universe: self.universe,
        }
    }
    pub fn difference(self, other: Self) -> Self {
        Self {
            mask: self.mask & !other.mask,
            universe: self.universe,
        }
    }
    pub fn is_subset(self, other: Self) -> bool {
        self.mask & !other.mask == 0
    }
    pub fn is_disjoint(self, other: Self) -> bool {
        self.mask & other.mask == 0
    }
    /// Edge indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.mask;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

fn widest(a: Universe, b: Universe) -> Universe {
    if a == Universe::Full || b == Universe::Full {
        Universe::Full
    } else {
        Universe::Unmarked
    }
}

/// All submasks of `mask`, in ascending numeric order.
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(0u64);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some(((cur | !mask).wrapping_add(1)) & mask)
        };
        Some(cur)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    fn endpoints(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// Component count of a spanning subgraph plus a labeling that maps every
/// vertex to the smallest vertex index in its component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multigraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    marked_e: usize,
    marked_f: usize,
}

pub(crate) fn valid_id(id: &str) -> bool {
    !id.is_empty() && id != "q" && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Multigraph {
    pub fn new(
        vertex_count: usize,
        edges: Vec<Edge>,
        marked_e: &str,
        marked_f: &str,
    ) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::NoVertices);
        }
        if edges.len() > MASK_WIDTH {
            return Err(GraphError::TooManyEdges(edges.len()));
        }
        for (i, edge) in edges.iter().enumerate() {
            if !valid_id(&edge.id) {
                return Err(GraphError::InvalidId(edge.id.clone()));
            }
            if edges[..i].iter().any(|other| other.id == edge.id) {
                return Err(GraphError::DuplicateEdge {
                    line: 0,
                    id: edge.id.clone(),
                });
            }
            for vertex in [edge.u, edge.v] {
                if vertex >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        id: edge.id.clone(),
                        vertex,
                        vertex_count,
                    });
                }
            }
        }
        if marked_e == marked_f {
            return Err(GraphError::IdenticalMarks(marked_e.to_string()));
        }
        let find = |id: &str| {
            edges
                .iter()
                .position(|edge| edge.id == id)
                .ok_or_else(|| GraphError::UnknownMark(id.to_string()))
        };
        let marked_e = find(marked_e)?;
        let marked_f = find(marked_f)?;
        Ok(Self {
            vertex_count,
            edges,
            marked_e,
            marked_f,
        })
    }

    /// Convenience constructor from `(id, u, v)` triples.
    pub fn from_triples(
        vertex_count: usize,
        edges: &[(&str, usize, usize)],
        marked_e: &str,
        marked_f: &str,
    ) -> Result<Self, GraphError> {
        let edges = edges
            .iter()
            .map(|&(id, u, v)| Edge {
                id: id.to_string(),
                u,
                v,
            })
            .collect();
        Self::new(vertex_count, edges, marked_e, marked_f)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }
    pub fn edge_ids(&self) -> Vec<String> {
        self.edges.iter().map(|edge| edge.id.clone()).collect()
    }
    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|edge| edge.id == id)
    }
    /// Index of the marked edge `e`.
    pub fn e(&self) -> usize {
        self.marked_e
    }
    /// Index of the marked edge `f`.
    pub fn f(&self) -> usize {
        self.marked_f
    }
    pub fn e_id(&self) -> &str {
        &self.edges[self.marked_e].id
    }
    pub fn f_id(&self) -> &str {
        &self.edges[self.marked_f].id
    }

    pub fn full_mask(&self) -> u64 {
        if self.edges.len() == MASK_WIDTH {
            u64::MAX
        } else {
            (1u64 << self.edges.len()) - 1
        }
    }

    /// Mask of `E^{ef}`, every edge except `e` and `f`.
    pub fn unmarked_mask(&self) -> u64 {
        self.full_mask() & !(1 << self.marked_e) & !(1 << self.marked_f)
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::from_mask(self.full_mask(), Universe::Full)
    }

    pub fn unmarked_edges(&self) -> EdgeSet {
        EdgeSet::from_mask(self.unmarked_mask(), Universe::Unmarked)
    }

    pub fn unmarked_count(&self) -> usize {
        self.edges.len() - 2
    }

    /// Builds an edge set from edge ids, checking they belong to `universe`.
    pub fn edge_set<S: AsRef<str>>(
        &self,
        ids: &[S],
        universe: Universe,
    ) -> Result<EdgeSet, GraphError> {
        let allowed = match universe {
            Universe::Full => self.full_mask(),
            Universe::Unmarked => self.unmarked_mask(),
        };
        let mut set = EdgeSet::empty(universe);
        for id in ids {
            let id = id.as_ref();
            let index = self
                .edge_index(id)
                .ok_or_else(|| GraphError::UnknownEdge(id.to_string()))?;
            if allowed >> index & 1 == 0 {
                return Err(GraphError::OutsideUniverse(id.to_string()));
            }
            set = set.insert(index);
        }
        Ok(set)
    }

    /// Edge ids of `set`, in edge order.
    pub fn set_ids(&self, set: EdgeSet) -> Vec<String> {
        set.iter().map(|i| self.edges[i].id.clone()).collect()
    }

    /// Renders `set` as `{g,h}`; the empty set is `{}`.
    pub fn format_set(&self, set: EdgeSet) -> String {
        format!("{{{}}}", self.set_ids(set).join(","))
    }

    pub fn is_loop(&self, index: usize) -> bool {
        self.edges[index].is_loop()
    }

    /// True when edges `a` and `b` join the same pair of vertices.
    pub fn are_parallel(&self, a: usize, b: usize) -> bool {
        self.edges[a].endpoints() == self.edges[b].endpoints()
    }

    pub(crate) fn union_find(&self, mask: u64) -> UnionFind {
        let mut uf = UnionFind::new(self.vertex_count);
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let edge = &self.edges[i];
            uf.union(edge.u, edge.v);
        }
        uf
    }

    /// `k(S)`: number of components of the spanning subgraph on edges `mask`.
    pub fn component_count(&self, mask: u64) -> usize {
        self.union_find(mask).sets()
    }

    pub fn components(&self, set: EdgeSet) -> Components {
        let mut uf = self.union_find(set.mask());
        let mut min_of_root = vec![usize::MAX; self.vertex_count];
        for v in 0..self.vertex_count {
            let root = uf.find(v);
            min_of_root[root] = min_of_root[root].min(v);
        }
        let labels = (0..self.vertex_count)
            .map(|v| min_of_root[uf.find(v)])
            .collect();
        Components {
            count: uf.sets(),
            labels,
        }
    }

    fn removable(&self, id: &str) -> Result<usize, GraphError> {
        let index = self
            .edge_index(id)
            .ok_or_else(|| GraphError::UnknownEdge(id.to_string()))?;
        if index == self.marked_e || index == self.marked_f {
            return Err(GraphError::MarkedEdge(id.to_string()));
        }
        Ok(index)
    }

    fn without_edge(&self, index: usize, edges: Vec<Edge>, vertex_count: usize) -> Self {
        let shift = |i: usize| if i > index { i - 1 } else { i };
        Self {
            vertex_count,
            edges,
            marked_e: shift(self.marked_e),
            marked_f: shift(self.marked_f),
        }
    }

    /// `G \ g`.
    pub fn delete_edge(&self, id: &str) -> Result<Self, GraphError> {
        let index = self.removable(id)?;
        let mut edges = self.edges.clone();
        edges.remove(index);
        Ok(self.without_edge(index, edges, self.vertex_count))
    }

    /// `G / g`: the endpoints of `g` merge into the lower-indexed one and
    /// the vertices above the higher endpoint shift down by one.
    pub fn contract_edge(&self, id: &str) -> Result<Self, GraphError> {
        let index = self.removable(id)?;
        let (keep, gone) = self.edges[index].endpoints();
        if keep == gone {
            return Err(GraphError::LoopContraction(id.to_string()));
        }
        let relabel = |w: usize| match w.cmp(&gone) {
            std::cmp::Ordering::Less => w,
            std::cmp::Ordering::Equal => keep,
            std::cmp::Ordering::Greater => w - 1,
        };
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != index)
            .map(|(_, edge)| Edge {
                id: edge.id.clone(),
                u: relabel(edge.u),
                v: relabel(edge.v),
            })
            .collect();
        Ok(self.without_edge(index, edges, self.vertex_count - 1))
    }

    /// Same graph with the roles of `e` and `f` exchanged.
    pub fn swap_marks(&self) -> Self {
        Self {
            marked_e: self.marked_f,
            marked_f: self.marked_e,
            ..self.clone()
        }
    }

    pub fn is_connected(&self) -> bool {
        self.component_count(self.full_mask()) == 1
    }

    /// Fails when `|E|` exceeds `cap`.
    pub fn check_cap(&self, cap: usize) -> Result<(), GraphError> {
        if self.edges.len() > cap {
            Err(GraphError::CapExceeded {
                edges: self.edges.len(),
                cap,
            })
        } else {
            Ok(())
        }
    }

    /// Serializes back to the graph file format.
    pub fn to_graph_file(&self) -> String {
        let mut out = format!("vertices {}\n", self.vertex_count);
        for edge in &self.edges {
            out.push_str(&format!("edge {} {} {}\n", edge.id, edge.u, edge.v));
        }
        out.push_str(&format!("mark e {}\nmark f {}\n", self.e_id(), self.f_id()));
        out
    }
}

impl fmt::Display for Multigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vertices;", self.vertex_count)?;
        for (i, edge) in self.edges.iter().enumerate() {
            let mark = if i == self.marked_e {
                "(e)"
            } else if i == self.marked_f {
                "(f)"
            } else {
                ""
            };
            write!(f, " {}{}={{{},{}}}", edge.id, mark, edge.u, edge.v)?;
        }
        Ok(())
    }
}

/// Parses the line-oriented graph format:
///
/// ```text
/// # comment
/// vertices 3
/// edge e 0 1
/// edge f 1 2
/// edge g 0 2
/// mark e e
/// mark f f
/// ```
pub fn parse_graph(text: &str) -> Result<Multigraph, GraphError> {
    let mut vertices = None;
    let mut edges: Vec<(usize, Edge)> = Vec::new();
    let mut mark_e = None;
    let mut mark_f = None;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: &str| GraphError::Syntax {
            line,
            message: message.to_string(),
        };
        let number = |token: &str| {
            token
                .parse::<usize>()
                .map_err(|_| syntax(&format!("expected a vertex index, found `{token}`")))
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            ["vertices", count] => {
                if vertices.is_some() {
                    return Err(syntax("`vertices` declared twice"));
                }
                vertices = Some(
                    count
                        .parse::<usize>()
                        .ok()
                        .filter(|&c| c > 0)
                        .ok_or_else(|| syntax("vertex count must be a positive integer"))?,
                );
            }
            ["edge", id, u, v] => {
                if !valid_id(id) {
                    return Err(GraphError::InvalidId(id.to_string()));
                }
                if edges.iter().any(|(_, edge)| edge.id == *id) {
                    return Err(GraphError::DuplicateEdge {
                        line,
                        id: id.to_string(),
                    });
                }
                edges.push((
                    line,
                    Edge {
                        id: id.to_string(),
                        u: number(u)?,
                        v: number(v)?,
                    },
                ));
            }
            ["mark", which, id] => {
                let slot = match *which {
                    "e" => &mut mark_e,
                    "f" => &mut mark_f,
                    _ => return Err(syntax("expected `mark e <id>` or `mark f <id>`")),
                };
                if slot.is_some() {
                    return Err(syntax(&format!("{which} marked twice")));
                }
                *slot = Some(id.to_string());
            }
            _ => return Err(syntax(&format!("unrecognized line `{content}`"))),
        }
    }

    let vertex_count = vertices.ok_or(GraphError::NoVertices)?;
    let mark_e = mark_e.ok_or(GraphError::EMissing)?;
    let mark_f = mark_f.ok_or(GraphError::FMissing)?;
    for (_, edge) in &edges {
        for vertex in [edge.u, edge.v] {
            if vertex >= vertex_count {
                return Err(GraphError::VertexOutOfRange {
                    id: edge.id.clone(),
                    vertex,
                    vertex_count,
                });
            }
        }
    }
    Multigraph::new(
        vertex_count,
        edges.into_iter().map(|(_, edge)| edge).collect(),
        &mark_e,
        &mark_f,
    )
}

/// Names for generated unmarked edges: single letters first, then `g<i>`.
pub fn generated_edge_id(i: usize) -> String {
    const LETTERS: &[u8] = b"ghklmnprstuvwyzabcdij";
    match LETTERS.get(i) {
        Some(&c) => (c as char).to_string(),
        None => format!("g{i}"),
    }
}

/// Seeded random multigraph: `e` and `f` come first as non-loop edges, then
/// `extra` edges drawn uniformly over unordered vertex pairs (loops
/// included, repeats allowed).
pub fn random_multigraph(vertex_count: usize, extra: usize, seed: u64) -> Multigraph {
    assert!(vertex_count >= 2, "need at least two vertices");
    assert!(extra + 2 <= MASK_WIDTH, "too many edges");
    let mut rng = SplitMix64::new(seed);
    let n = vertex_count as u64;
    let non_loop = |rng: &mut SplitMix64| {
        let u = rng.below(n);
        let mut v = rng.below(n - 1);
        if v >= u {
            v += 1;
        }
        (u as usize, v as usize)
    };
    let (eu, ev) = non_loop(&mut rng);
    let (fu, fv) = non_loop(&mut rng);
    let mut edges = vec![
        Edge {
            id: "e".into(),
            u: eu,
            v: ev,
        },
        Edge {
            id: "f".into(),
            u: fu,
            v: fv,
        },
    ];
    let pairs = n * (n + 1) / 2;
    for i in 0..extra {
        let (u, v) = unordered_pair(rng.below(pairs), vertex_count);
        edges.push(Edge {
            id: generated_edge_id(i),
            u,
            v,
        });
    }
    Multigraph::new(vertex_count, edges, "e", "f").expect("generated graph is valid")
}

/// The `index`-th unordered pair `(u, v)` with `u <= v` in row-major order.
pub fn unordered_pair(mut index: u64, vertex_count: usize) -> (usize, usize) {
    for u in 0..vertex_count {
        let row = (vertex_count - u) as u64;
        if index < row {
            return (u, u + index as usize);
        }
        index -= row;
    }
    panic!("pair index out of range")
}

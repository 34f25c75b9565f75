//! Labeled undirected multigraphs with a distinguished source and sink.
//!
//! Vertices are dense ids `0..vertex_count`. Edge labels run `1..=m` and the
//! edge with label `i` is stored at index `i - 1` with the orientation it was
//! given at construction; that orientation is what `+`/`-` directions in tour
//! output refer to.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

pub type VertexId = usize;

/// One-based edge label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeLabel(u32);

impl EdgeLabel {
    pub fn new(label: u32) -> Option<Self> {
        (label >= 1).then_some(EdgeLabel(label))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub(crate) fn from_index(index: usize) -> Self {
        EdgeLabel(index as u32 + 1)
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
    source: VertexId,
    sink: VertexId,
    degrees: Vec<u32>,
}

impl Multigraph {
    /// Builds a graph from edges given in label order (`edges[i]` has label `i + 1`).
    ///
    /// Rejects self-loops, equal terminals, out-of-range endpoints, empty edge
    /// sets and disconnected graphs.
    pub fn new(
        vertex_count: usize,
        source: VertexId,
        sink: VertexId,
        edges: Vec<(VertexId, VertexId)>,
    ) -> Result<Self> {
        if source == sink {
            return Err(Error::InvalidGraph("source and sink coincide".into()));
        }
        if source >= vertex_count || sink >= vertex_count {
            return Err(Error::InvalidGraph("terminal out of range".into()));
        }
        if edges.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        let mut degrees = vec![0u32; vertex_count];
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge {} has an endpoint out of range",
                    i + 1
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {} is a self-loop", i + 1)));
            }
            degrees[u] += 1;
            degrees[v] += 1;
        }
        let graph = Multigraph {
            vertex_count,
            edges,
            source,
            sink,
            degrees,
        };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    /// Builds a graph from `(label, u, v)` triples over arbitrary vertex ids,
    /// renumbering vertices canonically.
    pub fn from_labeled_edges(
        source: u64,
        sink: u64,
        edges: impl IntoIterator<Item = (u32, u64, u64)>,
    ) -> Result<Self> {
        let mut by_label: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
        for (label, u, v) in edges {
            if label == 0 {
                return Err(Error::InvalidGraph("edge labels start at 1".into()));
            }
            if by_label.insert(label, (u, v)).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge label {label}")));
            }
        }
        let m = by_label.len();
        if let Some((&last, _)) = by_label.iter().next_back() {
            if last as usize != m {
                return Err(Error::InvalidGraph(format!(
                    "edge labels must be exactly 1..{m}, found label {last}"
                )));
            }
        }
        let mut ids: HashMap<u64, VertexId> = HashMap::new();
        let mut intern = |x: u64| {
            let next = ids.len();
            *ids.entry(x).or_insert(next)
        };
        let s = intern(source);
        let t = intern(sink);
        let dense: Vec<(VertexId, VertexId)> =
            by_label.values().map(|&(u, v)| (intern(u), intern(v))).collect();
        Multigraph::new(ids.len(), s, t, dense)
    }

    /// Parses the line-oriented graph format:
    /// `terminals <s> <t>` once, then `edge <label> <u> <v>` per edge.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terminals = None;
        let mut edges = Vec::new();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let start = offset;
            offset += line.len();
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            let number = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| Error::parse(start, format!("expected a non-negative integer, found `{s}`")))
            };
            match fields.as_slice() {
                ["terminals", s, t] => {
                    if terminals.is_some() {
                        return Err(Error::parse(start, "duplicate terminals line"));
                    }
                    terminals = Some((number(s)?, number(t)?));
                }
                ["edge", label, u, v] => {
                    let label = u32::try_from(number(label)?)
                        .map_err(|_| Error::parse(start, "edge label too large"))?;
                    edges.push((label, number(u)?, number(v)?));
                }
                _ => return Err(Error::parse(start, format!("unrecognized line `{body}`"))),
            }
        }
        let (s, t) = terminals.ok_or_else(|| Error::parse(text.len(), "missing terminals line"))?;
        Multigraph::from_labeled_edges(s, t, edges)
    }

    /// Renumbers vertices: source 0, sink 1, then by first appearance when
    /// scanning edges in label order (`u` before `v`).
    pub fn canonical(&self) -> Multigraph {
        let mut map = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        let mut visit = |x: VertexId, map: &mut Vec<usize>| {
            if map[x] == usize::MAX {
                map[x] = next;
                next += 1;
            }
            map[x]
        };
        visit(self.source, &mut map);
        visit(self.sink, &mut map);
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (visit(u, &mut map), visit(v, &mut map)))
            .collect();
        let mut degrees = vec![0; self.vertex_count];
        for (old, &new) in map.iter().enumerate() {
            degrees[new] = self.degrees[old];
        }
        Multigraph {
            vertex_count: self.vertex_count,
            edges,
            source: 0,
            sink: 1,
            degrees,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    /// Stored orientation `(u, v)` of the edge with the given label.
    pub fn edge(&self, label: EdgeLabel) -> (VertexId, VertexId) {
        self.edges[label.index()]
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeLabel, VertexId, VertexId)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (EdgeLabel::from_index(i), u, v))
    }

    pub fn degree(&self, v: VertexId) -> Result<u32> {
        self.degrees.get(v).copied().ok_or(Error::UnknownVertex(v))
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn is_eulerian(&self) -> bool {
        self.degrees.iter().all(|d| d % 2 == 0)
    }

    /// Eulerian, or the only odd-degree vertices are exactly the two terminals.
    pub fn is_legal(&self) -> bool {
        let odd: Vec<VertexId> = (0..self.vertex_count)
            .filter(|&v| self.degrees[v] % 2 == 1)
            .collect();
        match odd.as_slice() {
            [] => true,
            [a, b] => {
                (*a == self.source && *b == self.sink) || (*a == self.sink && *b == self.source)
            }
            _ => false,
        }
    }

    /// Incident edge labels per vertex, in label order.
    pub fn incidence(&self) -> Vec<Vec<EdgeLabel>> {
        let mut inc = vec![Vec::new(); self.vertex_count];
        for (label, u, v) in self.edges() {
            inc[u].push(label);
            inc[v].push(label);
        }
        inc
    }

    /// The endpoint of `label` opposite to `v`.
    pub fn opposite(&self, label: EdgeLabel, v: VertexId) -> VertexId {
        let (a, b) = self.edge(label);
        if a == v {
            b
        } else {
            a
        }
    }

    fn is_connected(&self) -> bool {
        let inc = self.incidence();
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![self.source];
        seen[self.source] = true;
        while let Some(v) = stack.pop() {
            for &e in &inc[v] {
                let w = self.opposite(e, v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&x| x)
    }
}

impl fmt::Display for Multigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "terminals {} {}", self.source, self.sink)?;
        for (label, u, v) in self.edges() {
            writeln!(f, "edge {label} {u} {v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn digon() -> Multigraph {
        Multigraph::new(2, 0, 1, vec![(0, 1), (0, 1)]).unwrap()
    }

    fn triangle() -> Multigraph {
        Multigraph::new(3, 0, 1, vec![(0, 1), (0, 2), (2, 1)]).unwrap()
    }

    #[test]
    fn degrees() {
        assert_eq!(digon().degree(0).unwrap(), 2);
        for v in 0..3 {
            assert_eq!(triangle().degree(v).unwrap(), 2);
        }
        let four = Multigraph::new(2, 0, 1, vec![(0, 1); 4]).unwrap();
        assert_eq!(four.degree(1).unwrap(), 4);
        assert_eq!(digon().degree(7), Err(Error::UnknownVertex(7)));
    }

    #[test]
    fn eulerian_and_legal() {
        let edge = Multigraph::new(2, 0, 1, vec![(0, 1)]).unwrap();
        let path2 = Multigraph::new(3, 0, 1, vec![(0, 2), (2, 1)]).unwrap();
        assert!(digon().is_eulerian());
        assert!(!edge.is_eulerian());
        assert!(!path2.is_eulerian());
        assert!(edge.is_legal());
        assert!(digon().is_legal());

        // s - a - b - t
        let path3 = Multigraph::new(4, 0, 3, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(path3.is_legal());
        let wrong_terminals = Multigraph::new(4, 0, 1, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(!wrong_terminals.is_legal());
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(Multigraph::new(2, 0, 0, vec![(0, 1)]).is_err());
        assert!(Multigraph::new(2, 0, 1, vec![(0, 0), (0, 1)]).is_err());
        assert!(Multigraph::new(3, 0, 1, vec![(0, 1)]).is_err());
        assert!(Multigraph::new(2, 0, 1, vec![]).is_err());
    }

    #[test]
    fn parse_renumbers_canonically() {
        let text = "# a digon with a tail\nterminals 10 20\nedge 3 30 20\nedge 1 10 20\nedge 2 10 30\n";
        let g = Multigraph::parse(text).unwrap();
        assert_eq!(g.source(), 0);
        assert_eq!(g.sink(), 1);
        assert_eq!(g.to_string(), "terminals 0 1\nedge 1 0 1\nedge 2 0 2\nedge 3 2 1\n");
        assert_eq!(Multigraph::parse(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(Multigraph::parse("edge 1 0 1\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            Multigraph::parse("terminals 0 1\nedge 2 0 1\n"),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Multigraph::parse("terminals 0 1\nedge 1 0 1\nedge 1 0 1\n"),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            Multigraph::parse("terminals 0 1\nvertex 3\n"),
            Err(Error::Parse { .. })
        ));
    }
}

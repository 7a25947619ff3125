use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use super::DeviceError;

/// Largest qubit degree accepted for any coupling graph.
pub const MAX_DEGREE: usize = 4;

/// IBM Q Almaden coupling graph: four rows of five qubits, rows joined by
/// alternating vertical couplers.
const ALMADEN20: &[(usize, usize)] = &[
    (0, 1), (1, 2), (2, 3), (3, 4),
    (5, 6), (6, 7), (7, 8), (8, 9),
    (10, 11), (11, 12), (12, 13), (13, 14),
    (15, 16), (16, 17), (17, 18), (18, 19),
    (1, 6), (3, 8), (5, 10), (7, 12), (9, 14), (11, 16), (13, 18),
];

/// IBM Q Paris coupling graph (27-qubit heavy-hex).
const PARIS27: &[(usize, usize)] = &[
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7),
    (7, 10), (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14),
    (14, 16), (15, 18), (16, 19), (17, 18), (18, 21), (19, 20), (19, 22), (21, 23),
    (22, 25), (23, 24), (24, 25), (25, 26),
];

/// Named coupling-graph presets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyPreset {
    Almaden20,
    Paris27,
    Line(usize),
    Grid(usize, usize),
    /// Binary tree with heap numbering: qubit `i > 0` couples to `(i - 1) / 2`.
    Tree(usize),
    Custom { n_qubits: usize, edges: Vec<(usize, usize)> },
}

impl fmt::Display for TopologyPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyPreset::Almaden20 => write!(f, "almaden20"),
            TopologyPreset::Paris27 => write!(f, "paris27"),
            TopologyPreset::Line(n) => write!(f, "line({n})"),
            TopologyPreset::Grid(r, c) => write!(f, "grid({r},{c})"),
            TopologyPreset::Tree(n) => write!(f, "tree({n})"),
            TopologyPreset::Custom { n_qubits, .. } => write!(f, "custom({n_qubits})"),
        }
    }
}

impl FromStr for TopologyPreset {
    type Err = DeviceError;

    /// Accepts `almaden20`, `paris27`, `line(n)`, `grid(r,c)`, `tree(n)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        let bad = || DeviceError::UnknownPreset(s.clone());
        match s.as_str() {
            "almaden20" | "almaden" => return Ok(TopologyPreset::Almaden20),
            "paris27" | "paris" => return Ok(TopologyPreset::Paris27),
            _ => {}
        }
        let (kind, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<usize> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(|a| a.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind, args.as_slice()) {
            ("line", [n]) => Ok(TopologyPreset::Line(*n)),
            ("grid", [r, c]) => Ok(TopologyPreset::Grid(*r, *c)),
            ("tree", [n]) => Ok(TopologyPreset::Tree(*n)),
            _ => Err(bad()),
        }
    }
}

/// Undirected, connected coupling graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    name: String,
    n_qubits: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Topology {
    /// Validates and normalizes an edge list: pairs become `(min, max)`,
    /// duplicates are dropped, and edges are sorted.
    pub fn from_edges(
        name: impl Into<String>,
        n_qubits: usize,
        edges: &[(usize, usize)],
    ) -> Result<Self, DeviceError> {
        if n_qubits == 0 {
            return Err(DeviceError::Empty);
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(DeviceError::SelfLoop(a));
            }
            let hi = a.max(b);
            if hi >= n_qubits {
                return Err(DeviceError::QubitOutOfRange { qubit: hi, n_qubits });
            }
            set.insert((a.min(b), hi));
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n_qubits];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for (q, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.len() > MAX_DEGREE {
                return Err(DeviceError::DegreeTooHigh { qubit: q, degree: nbrs.len() });
            }
        }
        let topo = Topology { name: name.into(), n_qubits, edges, adjacency };
        if !topo.is_connected() {
            return Err(DeviceError::Disconnected);
        }
        Ok(topo)
    }

    /// Reads a plain-text edge list: one `i j` pair per line, `#` comments.
    /// The qubit count is one more than the largest id mentioned.
    pub fn parse_edge_list(name: impl Into<String>, text: &str) -> Result<Self, DeviceError> {
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let ids: Vec<usize> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| DeviceError::EdgeListSyntax(idx + 1))?;
            match ids.as_slice() {
                [a, b] => edges.push((*a, *b)),
                _ => return Err(DeviceError::EdgeListSyntax(idx + 1)),
            }
        }
        let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Topology::from_edges(name, n, &edges)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Edges as `(low, high)` pairs in sorted order; edge ids index this slice.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        a < self.n_qubits && self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// Hop distances between all pairs (BFS).
    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.n_qubits).map(|s| self.bfs(s)).collect()
    }

    fn bfs(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_qubits];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn is_connected(&self) -> bool {
        self.bfs(0).iter().all(|&d| d != usize::MAX)
    }
}

/// Builds the coupling graph for a preset.
pub fn build_topology(preset: &TopologyPreset) -> Result<Topology, DeviceError> {
    let name = preset.to_string();
    match preset {
        TopologyPreset::Almaden20 => Topology::from_edges(name, 20, ALMADEN20),
        TopologyPreset::Paris27 => Topology::from_edges(name, 27, PARIS27),
        TopologyPreset::Line(n) => {
            let edges: Vec<_> = (1..*n).map(|i| (i - 1, i)).collect();
            Topology::from_edges(name, *n, &edges)
        }
        TopologyPreset::Grid(r, c) => {
            let mut edges = Vec::new();
            for i in 0..*r {
                for j in 0..*c {
                    let q = i * c + j;
                    if j + 1 < *c {
                        edges.push((q, q + 1));
                    }
                    if i + 1 < *r {
                        edges.push((q, q + c));
                    }
                }
            }
            Topology::from_edges(name, r * c, &edges)
        }
        TopologyPreset::Tree(n) => {
            let edges: Vec<_> = (1..*n).map(|i| ((i - 1) / 2, i)).collect();
            Topology::from_edges(name, *n, &edges)
        }
        TopologyPreset::Custom { n_qubits, edges } => Topology::from_edges(name, *n_qubits, edges),
    }
}

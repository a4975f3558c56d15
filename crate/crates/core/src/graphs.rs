//! Undirected graphs, vertex permutations, and a brute-force isomorphism
//! oracle. The oracle stands in for the "infinitely powerful" party of the
//! graph protocols, so it is honest about its limits: instances above
//! [`ISO_ORACLE_BOUND`] vertices are refused outright.

use rand::Rng;
use rand::RngCore;
use thiserror::Error;

/// Largest vertex count the brute-force isomorphism search accepts.
pub const ISO_ORACLE_BOUND: usize = 12;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum GraphError {
    #[error("vertex count mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("instance too large for oracle: {0} vertices, bound is {ISO_ORACLE_BOUND}")]
    TooLarge(usize),
    #[error("mapping is not a bijection")]
    NotABijection,
    #[error("malformed encoding: {0}")]
    BadEncoding(String),
    #[error("witness does not satisfy the solution invariant")]
    BadWitness,
}

/// Undirected graph on vertices [0, n): symmetric adjacency, no self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>, // row-major n*n, kept symmetric with a false diagonal
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1, "graph needs at least one vertex");
        Graph {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.n && v < self.n && u != v, "invalid edge ({u},{v})");
        self.adj[u * self.n + v] = true;
        self.adj[v * self.n + u] = true;
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.adj[u * self.n + v] = false;
        self.adj[v * self.n + u] = false;
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&b| b).count() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&u| self.has_edge(v, u)).count()
    }

    /// Sorted degree sequence. Differing sequences certify non-isomorphism
    /// without any search.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = (0..self.n).map(|v| self.degree(v)).collect();
        d.sort_unstable();
        d
    }

    /// Wire encoding: 2-byte big-endian n, then ceil(n^2/8) bytes of
    /// row-major adjacency bitmap (upper triangle mirrored).
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.n as u16).to_be_bytes());
        let nbits = self.n * self.n;
        let mut bytes = vec![0u8; (nbits + 7) / 8];
        for (i, &b) in self.adj.iter().enumerate() {
            if b {
                bytes[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out.extend_from_slice(&bytes);
        out
    }

    pub fn decode(buf: &[u8]) -> Result<(Graph, usize), GraphError> {
        if buf.len() < 2 {
            return Err(GraphError::BadEncoding("truncated vertex count".into()));
        }
        let n = u16::from_be_bytes([buf[0], buf[1]]) as usize;
        if n == 0 {
            return Err(GraphError::BadEncoding("empty graph".into()));
        }
        let nbytes = (n * n + 7) / 8;
        if buf.len() < 2 + nbytes {
            return Err(GraphError::BadEncoding("truncated adjacency bitmap".into()));
        }
        let mut g = Graph::empty(n);
        for i in 0..n * n {
            if buf[2 + i / 8] & (0x80 >> (i % 8)) != 0 {
                let (u, v) = (i / n, i % n);
                if u == v {
                    return Err(GraphError::BadEncoding("self-loop in bitmap".into()));
                }
                g.adj[i] = true;
            }
        }
        // symmetry check: the mirror bit must be present too
        for u in 0..n {
            for v in 0..n {
                if g.adj[u * n + v] != g.adj[v * n + u] {
                    return Err(GraphError::BadEncoding("asymmetric bitmap".into()));
                }
            }
        }
        Ok((g, 2 + nbytes))
    }
}

/// A bijection on [0, n), the carrier of every isomorphism secret.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    pub fn from_mapping(map: Vec<usize>) -> Result<Self, GraphError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            if i >= n || seen[i] {
                return Err(GraphError::NotABijection);
            }
            seen[i] = true;
        }
        Ok(Permutation { map })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, v: usize) -> usize {
        self.map[v]
    }

    pub fn mapping(&self) -> &[usize] {
        &self.map
    }

    /// (self . other)(v) = self(other(v)).
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, GraphError> {
        if self.n() != other.n() {
            return Err(GraphError::SizeMismatch(self.n(), other.n()));
        }
        Ok(Permutation {
            map: other.map.iter().map(|&v| self.map[v]).collect(),
        })
    }

    pub fn invert(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// Wire encoding: 2-byte n, then n 2-byte big-endian images.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.n() as u16).to_be_bytes());
        for &v in &self.map {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
        out
    }

    pub fn decode(buf: &[u8]) -> Result<(Permutation, usize), GraphError> {
        if buf.len() < 2 {
            return Err(GraphError::BadEncoding("truncated permutation".into()));
        }
        let n = u16::from_be_bytes([buf[0], buf[1]]) as usize;
        if buf.len() < 2 + 2 * n {
            return Err(GraphError::BadEncoding("truncated permutation images".into()));
        }
        let map: Vec<usize> = (0..n)
            .map(|i| u16::from_be_bytes([buf[2 + 2 * i], buf[3 + 2 * i]]) as usize)
            .collect();
        let p = Permutation::from_mapping(map)?;
        Ok((p, 2 + 2 * n))
    }

    /// Lexicographic rank via the Lehmer code, in [0, n!).
    pub fn rank(&self) -> u64 {
        let n = self.n();
        let mut rank = 0u64;
        for i in 0..n {
            let smaller = (i + 1..n).filter(|&j| self.map[j] < self.map[i]).count() as u64;
            rank = rank * (n - i) as u64 + smaller;
        }
        rank
    }

    pub fn from_rank(n: usize, mut rank: u64) -> Option<Permutation> {
        let mut radix = Vec::with_capacity(n);
        for i in 1..=n as u64 {
            radix.push(rank % i);
            rank /= i;
        }
        radix.reverse();
        if rank != 0 {
            return None;
        }
        let mut avail: Vec<usize> = (0..n).collect();
        let map = radix
            .iter()
            .map(|&d| avail.remove(d as usize))
            .collect();
        Some(Permutation { map })
    }
}

/// Relabel `g` by `perm`: edge (u, v) maps to (perm(u), perm(v)).
pub fn apply_perm(g: &Graph, perm: &Permutation) -> Result<Graph, GraphError> {
    if g.n() != perm.n() {
        return Err(GraphError::SizeMismatch(g.n(), perm.n()));
    }
    let mut out = Graph::empty(g.n());
    for (u, v) in g.edges() {
        out.add_edge(perm.apply(u), perm.apply(v));
    }
    Ok(out)
}

/// Uniform permutation by Fisher-Yates.
pub fn random_perm<R: RngCore>(n: usize, rng: &mut R) -> Permutation {
    assert!(n >= 1);
    let mut map: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        map.swap(i, j);
    }
    Permutation { map }
}

/// Each unordered pair is an edge independently with probability `edge_prob`.
pub fn random_graph<R: RngCore>(n: usize, edge_prob: f64, rng: &mut R) -> Graph {
    assert!((0.0..=1.0).contains(&edge_prob));
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < edge_prob {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Some permutation with apply_perm(g, p) = h, or None. Backtracking search
/// with degree pruning; refuses instances above [`ISO_ORACLE_BOUND`].
pub fn find_isomorphism(g: &Graph, h: &Graph) -> Result<Option<Permutation>, GraphError> {
    if g.n() != h.n() {
        return Err(GraphError::SizeMismatch(g.n(), h.n()));
    }
    if g.n() > ISO_ORACLE_BOUND {
        return Err(GraphError::TooLarge(g.n()));
    }
    if g.edge_count() != h.edge_count() || g.degree_sequence() != h.degree_sequence() {
        return Ok(None);
    }
    let n = g.n();
    let gdeg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let hdeg: Vec<usize> = (0..n).map(|v| h.degree(v)).collect();
    let mut assignment = vec![usize::MAX; n];
    let mut used = vec![false; n];
    if assign(g, h, &gdeg, &hdeg, &mut assignment, &mut used, 0) {
        Ok(Some(Permutation { map: assignment }))
    } else {
        Ok(None)
    }
}

fn assign(
    g: &Graph,
    h: &Graph,
    gdeg: &[usize],
    hdeg: &[usize],
    assignment: &mut [usize],
    used: &mut [bool],
    v: usize,
) -> bool {
    let n = g.n();
    if v == n {
        return true;
    }
    for img in 0..n {
        if used[img] || gdeg[v] != hdeg[img] {
            continue;
        }
        // adjacency with already-assigned vertices must be preserved
        let consistent = (0..v).all(|u| g.has_edge(u, v) == h.has_edge(assignment[u], img));
        if !consistent {
            continue;
        }
        assignment[v] = img;
        used[img] = true;
        if assign(g, h, gdeg, hdeg, assignment, used, v + 1) {
            return true;
        }
        used[img] = false;
        assignment[v] = usize::MAX;
    }
    false
}

/// True if the only automorphism is the identity.
pub fn is_rigid(g: &Graph) -> Result<bool, GraphError> {
    if g.n() > ISO_ORACLE_BOUND {
        return Err(GraphError::TooLarge(g.n()));
    }
    let n = g.n();
    let deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut assignment = vec![usize::MAX; n];
    let mut used = vec![false; n];
    Ok(!nontrivial_automorphism(g, &deg, &mut assignment, &mut used, 0, &mut false))
}

fn nontrivial_automorphism(
    g: &Graph,
    deg: &[usize],
    assignment: &mut [usize],
    used: &mut [bool],
    v: usize,
    off_diagonal: &mut bool,
) -> bool {
    let n = g.n();
    if v == n {
        return *off_diagonal;
    }
    for img in 0..n {
        if used[img] || deg[v] != deg[img] {
            continue;
        }
        let consistent = (0..v).all(|u| g.has_edge(u, v) == g.has_edge(assignment[u], img));
        if !consistent {
            continue;
        }
        assignment[v] = img;
        used[img] = true;
        let was_off = *off_diagonal;
        if img != v {
            *off_diagonal = true;
        }
        if nontrivial_automorphism(g, deg, assignment, used, v + 1, off_diagonal) {
            return true;
        }
        *off_diagonal = was_off;
        used[img] = false;
        assignment[v] = usize::MAX;
    }
    false
}

/// Sample a rigid random graph: resample until the automorphism group is
/// trivial. Keeps "the" secret isomorphism unambiguous when used as an OT
/// secret.
pub fn gen_rigid_graph<R: RngCore>(n: usize, edge_prob: f64, rng: &mut R) -> Result<Graph, GraphError> {
    if n > ISO_ORACLE_BOUND {
        return Err(GraphError::TooLarge(n));
    }
    // the smallest asymmetric graphs have 6 vertices; anything in 2..=5
    // would loop forever
    if (2..=5).contains(&n) {
        return Err(GraphError::BadEncoding(format!(
            "no rigid graph exists on {n} vertices"
        )));
    }
    loop {
        let g = random_graph(n, edge_prob, rng);
        if is_rigid(&g)? {
            return Ok(g);
        }
    }
}

/// Two graphs guaranteed non-isomorphic by construction: their sorted degree
/// sequences differ, which the receiving party can check in polynomial time.
pub fn gen_noniso_pair<R: RngCore>(n: usize, rng: &mut R) -> (Graph, Graph) {
    assert!(n >= 3);
    loop {
        let g = random_graph(n, 0.5, rng);
        let h = random_graph(n, 0.5, rng);
        if g.degree_sequence() != h.degree_sequence() {
            return (g, h);
        }
    }
}

/// A graph together with a planted Hamiltonian cycle witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedSolution {
    pub graph: Graph,
    pub witness: Vec<usize>,
}

impl PlantedSolution {
    /// The witness must visit every vertex exactly once with consecutive
    /// (and wraparound) pairs being edges.
    pub fn validate(graph: &Graph, witness: &[usize]) -> Result<(), GraphError> {
        let n = graph.n();
        if witness.len() != n {
            return Err(GraphError::BadWitness);
        }
        let mut seen = vec![false; n];
        for &v in witness {
            if v >= n || seen[v] {
                return Err(GraphError::BadWitness);
            }
            seen[v] = true;
        }
        for i in 0..n {
            let u = witness[i];
            let v = witness[(i + 1) % n];
            if !graph.has_edge(u, v) {
                return Err(GraphError::BadWitness);
            }
        }
        Ok(())
    }

    pub fn new(graph: Graph, witness: Vec<usize>) -> Result<Self, GraphError> {
        Self::validate(&graph, &witness)?;
        Ok(PlantedSolution { graph, witness })
    }

    /// Carry the witness through a relabeling of the graph.
    pub fn permute(&self, perm: &Permutation) -> Result<PlantedSolution, GraphError> {
        let graph = apply_perm(&self.graph, perm)?;
        let witness = self.witness.iter().map(|&v| perm.apply(v)).collect();
        PlantedSolution::new(graph, witness)
    }

    /// Witness encoding: 2-byte n, then n 2-byte vertex indices.
    pub fn encode_witness(witness: &[usize]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&(witness.len() as u16).to_be_bytes());
        for &v in witness {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        }
        out
    }

    pub fn decode_witness(buf: &[u8]) -> Result<(Vec<usize>, usize), GraphError> {
        if buf.len() < 2 {
            return Err(GraphError::BadEncoding("truncated witness".into()));
        }
        let n = u16::from_be_bytes([buf[0], buf[1]]) as usize;
        if buf.len() < 2 + 2 * n {
            return Err(GraphError::BadEncoding("truncated witness entries".into()));
        }
        let w = (0..n)
            .map(|i| u16::from_be_bytes([buf[2 + 2 * i], buf[3 + 2 * i]]) as usize)
            .collect();
        Ok((w, 2 + 2 * n))
    }
}

/// Plant a Hamiltonian cycle over a shuffled vertex order, then add
/// `noise_edges` extra random non-cycle edges.
pub fn gen_hamiltonian_graph<R: RngCore>(
    n: usize,
    noise_edges: usize,
    rng: &mut R,
) -> PlantedSolution {
    assert!(n >= 3);
    let order = random_perm(n, rng);
    let witness: Vec<usize> = (0..n).map(|i| order.apply(i)).collect();
    let mut graph = Graph::empty(n);
    for i in 0..n {
        graph.add_edge(witness[i], witness[(i + 1) % n]);
    }
    let max_extra = n * (n - 1) / 2 - n;
    let target = noise_edges.min(max_extra);
    let mut added = 0;
    while added < target {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && !graph.has_edge(u, v) {
            graph.add_edge(u, v);
            added += 1;
        }
    }
    PlantedSolution { graph, witness }
}

//! Communication topologies and the matrices built from them.
//!
//! Every undirected edge `{i, j}` is used in both orientations. With the arcs
//! enumerated in canonical order (edges sorted, `i → j` before `j → i`), the
//! extended incidence matrices are
//!
//! ```text
//! M₊[:, q] = e_i + e_j      M₋[:, q] = e_i − e_j      (⊗ I_d)
//! ```
//!
//! so that `L± = ½ M± M±ᵀ` are the signless/signed Laplacians and
//! `D = ½(L₊ + L₋)` is the degree matrix.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Eigenvalues of `L₋` at or below this are treated as zero.
pub const CONNECTIVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    FullyConnected,
    RingCyclic,
    NoEdge,
    Custom,
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TopologyKind::FullyConnected => "fully_connected",
            TopologyKind::RingCyclic => "ring_cyclic",
            TopologyKind::NoEdge => "no_edge",
            TopologyKind::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fully_connected" | "complete" => Ok(TopologyKind::FullyConnected),
            "ring_cyclic" | "ring" | "cyclic" => Ok(TopologyKind::RingCyclic),
            "no_edge" | "empty" => Ok(TopologyKind::NoEdge),
            "custom" => Ok(TopologyKind::Custom),
            other => Err(Error::InvalidTopology(format!("unknown kind `{other}`"))),
        }
    }
}

/// Undirected agent graph. Edges are stored as sorted `(i, j)` pairs with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    n_agents: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Topology {
    pub fn build(kind: TopologyKind, n_agents: usize) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::InvalidTopology("n_agents must be at least 1".into()));
        }
        let edges = match kind {
            TopologyKind::FullyConnected => (0..n_agents)
                .flat_map(|i| ((i + 1)..n_agents).map(move |j| (i, j)))
                .collect(),
            TopologyKind::RingCyclic => {
                if n_agents < 3 {
                    return Err(Error::InvalidTopology(format!(
                        "ring_cyclic needs at least 3 agents, got {n_agents}"
                    )));
                }
                (0..n_agents)
                    .map(|i| {
                        let j = (i + 1) % n_agents;
                        (i.min(j), i.max(j))
                    })
                    .collect()
            }
            TopologyKind::NoEdge => Vec::new(),
            TopologyKind::Custom => {
                return Err(Error::InvalidTopology(
                    "custom topologies are built with Topology::custom".into(),
                ))
            }
        };
        Self::from_edges(kind, n_agents, edges)
    }

    /// Arbitrary undirected graph. Rejects self-loops, duplicates (in either
    /// orientation) and out-of-range endpoints.
    pub fn custom(n_agents: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::InvalidTopology("n_agents must be at least 1".into()));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i == j {
                return Err(Error::InvalidTopology(format!("self-loop at {i}")));
            }
            if i >= n_agents || j >= n_agents {
                return Err(Error::InvalidTopology(format!(
                    "edge ({i}, {j}) out of range for {n_agents} agents"
                )));
            }
            normalized.push((i.min(j), i.max(j)));
        }
        Self::from_edges(TopologyKind::Custom, n_agents, normalized)
    }

    fn from_edges(kind: TopologyKind, n_agents: usize, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidTopology("duplicate edge".into()));
        }
        let mut neighbors = vec![Vec::new(); n_agents];
        for &(i, j) in &edges {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
        }
        Ok(Self {
            kind,
            n_agents,
            edges,
            neighbors,
        })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Directed arcs in canonical order: for each sorted edge `(i, j)`,
    /// first `i → j`, then `j → i`.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().flat_map(|&(i, j)| [(i, j), (j, i)]).collect()
    }

    /// Breadth-first connectivity check, independent of any spectrum.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_agents];
        let mut queue = std::collections::VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Incidence, Laplacian and degree matrices Kronecker-extended by `I_d`.
///
/// `m_plus`/`m_minus` are `N·d × |A|·d`, the Laplacians and `deg` are `N·d × N·d`.
#[derive(Debug, Clone)]
pub struct ExtendedMatrices {
    pub d: usize,
    pub m_plus: DMatrix<f64>,
    pub m_minus: DMatrix<f64>,
    pub l_plus: DMatrix<f64>,
    pub l_minus: DMatrix<f64>,
    pub deg: DMatrix<f64>,
}

pub fn extend_matrices(topo: &Topology, d: usize) -> ExtendedMatrices {
    assert!(d >= 1, "dimension must be positive");
    let n = topo.n_agents();
    let arcs = topo.arcs();
    let mut m_plus = DMatrix::zeros(n * d, arcs.len() * d);
    let mut m_minus = DMatrix::zeros(n * d, arcs.len() * d);
    for (q, &(i, j)) in arcs.iter().enumerate() {
        for c in 0..d {
            m_plus[(i * d + c, q * d + c)] = 1.0;
            m_plus[(j * d + c, q * d + c)] = 1.0;
            m_minus[(i * d + c, q * d + c)] = 1.0;
            m_minus[(j * d + c, q * d + c)] = -1.0;
        }
    }
    // entries of M·Mᵀ are small even integers, so halving is exact
    let l_plus = &m_plus * m_plus.transpose() * 0.5;
    let l_minus = &m_minus * m_minus.transpose() * 0.5;
    let deg = DMatrix::from_fn(n * d, n * d, |r, c| {
        if r == c {
            topo.degree(r / d) as f64
        } else {
            0.0
        }
    });
    ExtendedMatrices {
        d,
        m_plus,
        m_minus,
        l_plus,
        l_minus,
        deg,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConstants {
    pub sigma_max_m_plus: f64,
    /// Smallest nonzero singular value of `M₋`.
    pub sigma_min_m_minus: f64,
    pub sigma_max_m_minus: f64,
    /// Graph condition number `σ_max(M₊) / σ_min(M₋)`.
    pub tau_g: f64,
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectral constants from the eigenvalues of `L± = ½M±M±ᵀ`, using
/// `σ(M) = √(2·λ(L))`.
pub fn spectral_constants(mats: &ExtendedMatrices) -> Result<SpectralConstants> {
    let d = mats.d;
    let ev_minus = sorted_eigenvalues(&mats.l_minus);
    let ev_plus = sorted_eigenvalues(&mats.l_plus);
    // the consensus subspace accounts for d zero eigenvalues
    let lambda2 = ev_minus.get(d).copied().unwrap_or(0.0);
    if lambda2 <= CONNECTIVITY_TOL {
        return Err(Error::Disconnected { lambda2 });
    }
    let l_plus_max = ev_plus.last().copied().unwrap_or(0.0);
    let l_minus_max = ev_minus.last().copied().unwrap_or(0.0);
    Ok(SpectralConstants {
        sigma_max_m_plus: (2.0 * l_plus_max).sqrt(),
        sigma_min_m_minus: (2.0 * lambda2).sqrt(),
        sigma_max_m_minus: (2.0 * l_minus_max).sqrt(),
        tau_g: (l_plus_max / lambda2).sqrt(),
    })
}

/// Same constants via singular value decompositions of `M₊` and `M₋`.
pub fn spectral_constants_svd(mats: &ExtendedMatrices) -> Result<SpectralConstants> {
    let sv = |m: &DMatrix<f64>| -> Vec<f64> {
        if m.ncols() == 0 {
            return Vec::new();
        }
        let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
        s.sort_by(f64::total_cmp);
        s
    };
    let s_plus = sv(&mats.m_plus);
    let s_minus = sv(&mats.m_minus);
    let sigma_max_m_minus = s_minus.last().copied().unwrap_or(0.0);
    let nonzero_tol = (2.0 * CONNECTIVITY_TOL).sqrt();
    let nonzero: Vec<f64> = s_minus.iter().copied().filter(|&s| s > nonzero_tol).collect();
    // rank of M₋ is d·(N − #components); anything less is a disconnected graph
    let n = mats.l_minus.nrows() / mats.d;
    if nonzero.len() < mats.d * (n.saturating_sub(1)) || nonzero.is_empty() {
        return Err(Error::Disconnected {
            lambda2: nonzero.first().map_or(0.0, |s| s * s / 2.0),
        });
    }
    let sigma_min_m_minus = nonzero[0];
    let sigma_max_m_plus = s_plus.last().copied().unwrap_or(0.0);
    Ok(SpectralConstants {
        sigma_max_m_plus,
        sigma_min_m_minus,
        sigma_max_m_minus,
        tau_g: sigma_max_m_plus / sigma_min_m_minus,
    })
}

/// Symmetric doubly stochastic matrix with Metropolis–Hastings weights
/// `S_ij = 1 / (1 + max(N_i, N_j))` on edges and `S_ii = 1 − Σ_j S_ij`.
pub fn mixing_matrix(topo: &Topology) -> DMatrix<f64> {
    let n = topo.n_agents();
    let mut s = DMatrix::zeros(n, n);
    for &(i, j) in topo.edges() {
        let w = 1.0 / (1.0 + topo.degree(i).max(topo.degree(j)) as f64);
        s[(i, j)] = w;
        s[(j, i)] = w;
    }
    for i in 0..n {
        let off: f64 = topo.neighbors(i).iter().map(|&j| s[(i, j)]).sum();
        s[(i, i)] = 1.0 - off;
    }
    s
}

//! Test networks: Barabási–Albert topology, uniform edge weights and a
//! diagonal shift `a + s_i` with `s_i = −Σ_j a_ij`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::spectral::eig_sym;
use crate::{Error, Result};

/// Default relative tolerance for [`classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// RNG stream used for topology; weights draw from stream 1 of the same seed.
const TOPOLOGY_STREAM: u64 = 0;
const WEIGHT_STREAM: u64 = 1;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Undirected simple graph with edges stored as sorted `(i, j)`, `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i == j || i >= n || j >= n {
                return Err(Error::param("edges", format!("invalid edge ({i}, {j}) for n = {n}")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Graph { n, edges: set.into_iter().collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Growth model: start from a clique on `edges_per_new_node + 1` nodes, then
/// every new node links to `edges_per_new_node` distinct existing nodes chosen
/// with probability proportional to their degree.
pub fn generate_ba(n: usize, edges_per_new_node: usize, seed: u64) -> Result<Graph> {
    let m = edges_per_new_node;
    if m < 1 {
        return Err(Error::param("edges_per_new_node", "must be at least 1"));
    }
    if n < m + 1 {
        return Err(Error::param("n", format!("need n ≥ edges_per_new_node + 1 = {}, got {n}", m + 1)));
    }
    let mut rng = rng(seed, TOPOLOGY_STREAM);
    let mut edges = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // every node appears here once per incident edge
    let mut endpoints = Vec::with_capacity(2 * edges.capacity());
    for j in 0..=m {
        for i in 0..j {
            edges.push((i, j));
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    for v in (m + 1)..n {
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            chosen.insert(endpoints[rng.random_range(0..endpoints.len())]);
        }
        for u in chosen {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    Graph::new(n, edges)
}

/// Symmetric weighted adjacency with self-loops.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedNetwork {
    entries: DMatrix<f64>,
    seed: u64,
}

impl WeightedNetwork {
    /// Wraps a matrix that must be exactly symmetric.
    pub fn from_matrix(entries: DMatrix<f64>, seed: u64) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::param("entries", "must be a non-empty square matrix"));
        }
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..i {
                if entries[(i, j)].to_bits() != entries[(j, i)].to_bits() {
                    return Err(Error::param("entries", format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("entries", "non-finite entry"));
        }
        Ok(WeightedNetwork { entries, seed })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn to_json(&self) -> NetworkJson {
        let n = self.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.entries[(i, j)];
                if w != 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
        NetworkJson { n, edges, diag: (0..n).map(|i| self.entries[(i, i)]).collect(), seed: self.seed }
    }

    pub fn from_json(json: &NetworkJson) -> Result<Self> {
        let n = json.n;
        if n == 0 {
            return Err(Error::param("n", "must be at least 1"));
        }
        if json.diag.len() != n {
            return Err(Error::param("diag", format!("expected {n} entries, got {}", json.diag.len())));
        }
        let mut entries = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&json.diag));
        for &(i, j, w) in &json.edges {
            if i == j || i >= n || j >= n {
                return Err(Error::param("edges", format!("invalid edge ({i}, {j}) for n = {n}")));
            }
            if entries[(i, j)] != 0.0 {
                return Err(Error::param("edges", format!("duplicate edge ({i}, {j})")));
            }
            entries[(i, j)] = w;
            entries[(j, i)] = w;
        }
        WeightedNetwork::from_matrix(entries, json.seed)
    }
}

/// On-disk network format, 0-based indices, each edge listed once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub diag: Vec<f64>,
    pub seed: u64,
}

/// Draws each edge weight uniformly from `[lo, hi]` and sets the diagonal to
/// `a + s_i` where `s_i` is the negated off-diagonal row sum.
pub fn weight_and_shift(graph: &Graph, weight_interval: (f64, f64), a: f64, seed: u64) -> Result<WeightedNetwork> {
    let (lo, hi) = weight_interval;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::param("weight_interval", format!("need finite lo ≤ hi, got [{lo}, {hi}]")));
    }
    if !a.is_finite() {
        return Err(Error::param("a", "must be finite"));
    }
    let n = graph.n();
    let mut rng = rng(seed, WEIGHT_STREAM);
    let mut entries = DMatrix::zeros(n, n);
    for &(i, j) in graph.edges() {
        let w = if lo == hi { lo } else { rng.random_range(lo..=hi) };
        entries[(i, j)] = w;
        entries[(j, i)] = w;
    }
    for i in 0..n {
        let row_sum: f64 = (0..n).filter(|&j| j != i).map(|j| entries[(i, j)]).sum();
        entries[(i, i)] = a - row_sum;
    }
    WeightedNetwork::from_matrix(entries, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DefinitenessClass {
    #[serde(rename = "ND")]
    NegativeDefinite,
    #[serde(rename = "NSD")]
    NegativeSemiDefinite,
    #[serde(rename = "ID")]
    Indefinite,
    #[serde(rename = "PSD")]
    PositiveSemiDefinite,
    #[serde(rename = "PD")]
    PositiveDefinite,
}

impl DefinitenessClass {
    pub fn label(self) -> &'static str {
        match self {
            DefinitenessClass::NegativeDefinite => "ND",
            DefinitenessClass::NegativeSemiDefinite => "NSD",
            DefinitenessClass::Indefinite => "ID",
            DefinitenessClass::PositiveSemiDefinite => "PSD",
            DefinitenessClass::PositiveDefinite => "PD",
        }
    }
}

impl std::fmt::Display for DefinitenessClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Sign pattern of `lambdas` with zero band `τ = tol·max(1, max|λ|)`.
pub fn classify_eigenvalues(lambdas: &[f64], tol: f64) -> DefinitenessClass {
    let scale = lambdas.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    let tau = tol * scale;
    if lambdas.iter().all(|&l| l < -tau) {
        DefinitenessClass::NegativeDefinite
    } else if lambdas.iter().all(|&l| l > tau) {
        DefinitenessClass::PositiveDefinite
    } else if lambdas.iter().all(|&l| l <= tau) {
        DefinitenessClass::NegativeSemiDefinite
    } else if lambdas.iter().all(|&l| l >= -tau) {
        DefinitenessClass::PositiveSemiDefinite
    } else {
        DefinitenessClass::Indefinite
    }
}

pub fn classify(network: &WeightedNetwork, tol: f64) -> Result<DefinitenessClass> {
    let spec = eig_sym(network.entries())?;
    Ok(classify_eigenvalues(spec.eigenvalues().as_slice(), tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturated_ba_is_complete() {
        let g = generate_ba(4, 3, 11).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn ba_mean_degree_near_5_8() {
        for seed in 0..5 {
            let g = generate_ba(50, 3, seed).unwrap();
            assert_eq!(g.edges().len(), 6 + 46 * 3);
            assert!((g.mean_degree() - 5.8).abs() < 0.05);
            assert!(g.is_connected());
        }
    }

    #[test]
    fn ba_is_deterministic() {
        assert_eq!(generate_ba(30, 2, 7).unwrap(), generate_ba(30, 2, 7).unwrap());
        assert_ne!(generate_ba(30, 2, 7).unwrap(), generate_ba(30, 2, 8).unwrap());
    }

    #[test]
    fn ba_rejects_bad_sizes() {
        assert!(matches!(generate_ba(3, 3, 0), Err(Error::Parameter { name: "n", .. })));
        assert!(matches!(generate_ba(10, 0, 0), Err(Error::Parameter { .. })));
    }

    #[test]
    fn single_edge_shift() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let net = weight_and_shift(&g, (0.7, 0.7), 0.0, 1).unwrap();
        assert_eq!(net.entries(), &DMatrix::from_row_slice(2, 2, &[-0.7, 0.7, 0.7, -0.7]));
        assert_eq!(classify(&net, DEFAULT_CLASSIFY_TOL).unwrap(), DefinitenessClass::NegativeSemiDefinite);
    }

    #[test]
    fn weights_stay_in_interval() {
        let g = generate_ba(40, 3, 2).unwrap();
        let net = weight_and_shift(&g, (1.0, 3.0), -2.0, 2).unwrap();
        for &(i, j) in g.edges() {
            let w = net.entries()[(i, j)];
            assert!((1.0..=3.0).contains(&w));
        }
        assert!(weight_and_shift(&g, (3.0, 1.0), 0.0, 2).is_err());
    }

    #[test]
    fn classify_diagonal_examples() {
        use DefinitenessClass::*;
        let cases: [(&[f64], DefinitenessClass); 6] = [
            (&[-2.0, -1.0], NegativeDefinite),
            (&[-1.0, 0.0], NegativeSemiDefinite),
            (&[-1.0, 1.0], Indefinite),
            (&[0.0, 3.0], PositiveSemiDefinite),
            (&[1.0, 3.0], PositiveDefinite),
            (&[-1e-12, 2.0], PositiveSemiDefinite),
        ];
        for (lams, class) in cases {
            let net = WeightedNetwork::from_matrix(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(lams)), 0).unwrap();
            assert_eq!(classify(&net, DEFAULT_CLASSIFY_TOL).unwrap(), class, "{lams:?}");
        }
    }

    #[test]
    fn json_round_trip() {
        let g = generate_ba(12, 2, 5).unwrap();
        let net = weight_and_shift(&g, (0.0, 1.0), 5.0, 5).unwrap();
        let text = serde_json::to_string(&net.to_json()).unwrap();
        let back: NetworkJson = serde_json::from_str(&text).unwrap();
        assert_eq!(WeightedNetwork::from_json(&back).unwrap(), net);
    }

    #[test]
    fn json_rejects_duplicates() {
        let json = NetworkJson { n: 2, edges: vec![(0, 1, 1.0), (1, 0, 1.0)], diag: vec![0.0, 0.0], seed: 0 };
        assert!(WeightedNetwork::from_json(&json).is_err());
    }
}

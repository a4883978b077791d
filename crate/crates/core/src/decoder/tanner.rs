use crate::codes::ParityCheckMatrix;

/// Bipartite variable/check graph with dense edge ids.
///
/// Edges are numbered check-major: all edges of check 0 in ascending variable
/// order, then check 1, and so on. Consequently every variable's edge list is
/// sorted by check index and every check's list by variable index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n_vars: usize,
    n_checks: usize,
    edge_var: Vec<usize>,
    edge_check: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
    check_edges: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(pcm: &ParityCheckMatrix) -> Self {
        let mut edge_var = Vec::with_capacity(pcm.nnz());
        let mut edge_check = Vec::with_capacity(pcm.nnz());
        let mut var_edges = vec![Vec::new(); pcm.n()];
        let mut check_edges = vec![Vec::new(); pcm.m()];
        for (c, row) in pcm.rows().iter().enumerate() {
            for &v in row {
                let e = edge_var.len();
                edge_var.push(v);
                edge_check.push(c);
                var_edges[v].push(e);
                check_edges[c].push(e);
            }
        }
        Self { n_vars: pcm.n(), n_checks: pcm.m(), edge_var, edge_check, var_edges, check_edges }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// `(variable, check)` endpoints of edge `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.edge_var[e], self.edge_check[e])
    }

    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[v]
    }

    pub fn check_edges(&self, c: usize) -> &[usize] {
        &self.check_edges[c]
    }

    pub fn max_check_degree(&self) -> usize {
        self.check_edges.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Convenience alias for [`TannerGraph::new`].
pub fn build_tanner(pcm: &ParityCheckMatrix) -> TannerGraph {
    TannerGraph::new(pcm)
}

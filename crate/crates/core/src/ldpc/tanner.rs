use super::parity::ParityCheck;

/// Edge-indexed Tanner graph. Edge ids are row-major over `H`, so the edges
/// of check `c` are the contiguous range `check_ranges[c]`; the edges of each
/// variable are listed in increasing check order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    n: usize,
    edge_var: Vec<u32>,
    edge_check: Vec<u32>,
    check_start: Vec<usize>,
    var_start: Vec<usize>,
    var_edges: Vec<u32>,
}

impl TannerGraph {
    pub fn new(h: &ParityCheck) -> Self {
        let mut edge_var = Vec::with_capacity(h.edge_count());
        let mut edge_check = Vec::with_capacity(h.edge_count());
        let mut check_start = Vec::with_capacity(h.r() + 1);
        check_start.push(0);
        for (c, row) in h.rows().iter().enumerate() {
            for &v in row {
                edge_var.push(v as u32);
                edge_check.push(c as u32);
            }
            check_start.push(edge_var.len());
        }
        let mut per_var: Vec<Vec<u32>> = vec![Vec::new(); h.n()];
        for (e, &v) in edge_var.iter().enumerate() {
            per_var[v as usize].push(e as u32);
        }
        let mut var_start = Vec::with_capacity(h.n() + 1);
        var_start.push(0);
        let mut var_edges = Vec::with_capacity(edge_var.len());
        for list in per_var {
            var_edges.extend(list);
            var_start.push(var_edges.len());
        }
        TannerGraph {
            n: h.n(),
            edge_var,
            edge_check,
            check_start,
            var_start,
            var_edges,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn checks(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    #[inline]
    pub fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    #[inline]
    pub fn var_edges(&self, v: usize) -> &[u32] {
        &self.var_edges[self.var_start[v]..self.var_start[v + 1]]
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e] as usize
    }

    #[inline]
    pub fn edge_check(&self, e: usize) -> usize {
        self.edge_check[e] as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_edges() {
        let h = ParityCheck::from_dense(&[vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        let g = TannerGraph::new(&h);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.check_edges(1), 2..4);
        assert_eq!(g.var_edges(0), &[0, 2]);
        assert_eq!(g.edge_var(3), 1);
        assert_eq!(g.edge_check(1), 0);
    }
}

use crate::error::{Error, Result};
use crate::table::FeatureTable;

/// One agglomeration step. Children are node ids: leaves are `0..n`, the
/// cluster formed by merge `i` is node `n + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HcTree {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

impl HcTree {
    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn root(&self) -> usize {
        2 * self.n_leaves() - 2
    }

    /// Children of an internal node, `None` for a leaf.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        let n = self.n_leaves();
        (node >= n).then(|| {
            let m = &self.merges[node - n];
            (m.left, m.right)
        })
    }

    /// Leaves in left-to-right traversal order.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_leaves());
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            match self.children(node) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(node),
            }
        }
        out
    }

    /// Leaves under the two children of the root.
    pub fn root_split(&self) -> (Vec<usize>, Vec<usize>) {
        let (l, r) = self.children(self.root()).expect("root is internal");
        (self.leaves_under(l), self.leaves_under(r))
    }

    pub fn leaves_under(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            match self.children(x) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(x),
            }
        }
        out
    }

    /// Whether heights never decrease along the merge sequence.
    pub fn is_monotone(&self) -> bool {
        self.merges.windows(2).all(|w| w[0].height <= w[1].height)
    }

    /// `node_id,left_child,right_child,height`, one line per merge.
    pub fn to_csv(&self) -> String {
        let n = self.n_leaves();
        let mut out = String::from("node_id,left_child,right_child,height\n");
        for (i, m) in self.merges.iter().enumerate() {
            out.push_str(&format!("{},{},{},{}\n", n + i, m.left, m.right, m.height));
        }
        out
    }
}

/// Ward.D2 agglomeration on Euclidean distances between `points`, with the
/// Lance–Williams update on squared distances. Ties go to the pair with the
/// smallest (min leaf of first, min leaf of second); the child with the
/// smaller min leaf is placed left.
pub fn ward_d2(points: &[Vec<f64>], labels: Vec<String>) -> Result<HcTree> {
    let n = points.len();
    if n < 2 {
        return Err(Error::NotEnoughRows { have: n, need: 2 });
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch(labels.len(), n));
    }
    let mut d2 = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            d2[i][j] = d;
            d2[j][i] = d;
        }
    }
    // slot i holds (node id, size, min leaf); slots are kept ordered by min leaf
    let mut active: Vec<(usize, usize, usize)> = (0..n).map(|i| (i, 1, i)).collect();
    let mut slot_of: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n - 1);

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..active.len() {
            for b in a + 1..active.len() {
                let d = d2[slot_of[a]][slot_of[b]];
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (d, a, b) = best.expect("at least two clusters");
        let (si, sj) = (slot_of[a], slot_of[b]);
        let (node_i, ni, min_i) = active[a];
        let (node_j, nj, _) = active[b];
        for c in 0..active.len() {
            if c == a || c == b {
                continue;
            }
            let sk = slot_of[c];
            let nk = active[c].1 as f64;
            let (fi, fj) = (ni as f64, nj as f64);
            let v = ((fi + nk) * d2[sk][si] + (fj + nk) * d2[sk][sj] - nk * d) / (fi + fj + nk);
            d2[sk][si] = v;
            d2[si][sk] = v;
        }
        merges.push(Merge {
            left: node_i,
            right: node_j,
            height: d.max(0.0).sqrt(),
            size: ni + nj,
        });
        active[a] = (n + merges.len() - 1, ni + nj, min_i);
        active.remove(b);
        slot_of.remove(b);
    }
    Ok(HcTree {
        leaves: labels,
        merges,
    })
}

/// Ward.D2 tree over the rows of `table` that are complete in `columns`.
/// Returns the tree and the ids of the rows left out for NA.
pub fn hcluster_ward(table: &FeatureTable, columns: &[String]) -> Result<(HcTree, Vec<String>)> {
    let complete = table.complete_rows(columns)?;
    let mut keep = vec![false; table.n_rows()];
    for (i, _) in &complete {
        keep[*i] = true;
    }
    let excluded = table
        .unit_ids
        .iter()
        .zip(&keep)
        .filter(|(_, k)| !**k)
        .map(|(u, _)| u.clone())
        .collect();
    let labels = complete
        .iter()
        .map(|(i, _)| table.unit_ids[*i].clone())
        .collect();
    let points: Vec<Vec<f64>> = complete.into_iter().map(|(_, v)| v).collect();
    Ok((ward_d2(&points, labels)?, excluded))
}

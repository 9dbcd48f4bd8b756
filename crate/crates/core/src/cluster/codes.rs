use super::ward::HcTree;

/// Root-to-leaf codes (left 0, right 1) and common-prefix similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafCodes {
    /// Indexed by leaf id.
    pub codes: Vec<String>,
    /// `similarity[u][v]` is the common prefix length of the two codes.
    pub similarity: Vec<Vec<usize>>,
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.bytes().zip(b.bytes()).take_while(|(x, y)| x == y).count()
}

pub fn leaf_codes(tree: &HcTree) -> LeafCodes {
    let n = tree.n_leaves();
    let mut codes = vec![String::new(); n];
    let mut stack = vec![(tree.root(), String::new())];
    while let Some((node, code)) = stack.pop() {
        match tree.children(node) {
            Some((l, r)) => {
                stack.push((r, format!("{code}1")));
                stack.push((l, format!("{code}0")));
            }
            None => codes[node] = code,
        }
    }
    let similarity = codes
        .iter()
        .map(|a| codes.iter().map(|b| common_prefix(a, b)).collect())
        .collect();
    LeafCodes { codes, similarity }
}

use std::fmt::Write;

use super::association::AssociationMatrices;
use crate::error::{Error, Result};

/// Entries within this distance above the threshold still qualify, so
/// finite-sample rounding past 1.0 does not drop edges at `tau = 1`.
const ENTRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Directed,
    Mutual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// `1 - entry`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    pub directed: bool,
    pub threshold: f64,
}

/// Keeps edge `i -> j` when the association entry `(i, j)` is at most `tau`.
/// Mutual networks are undirected and list each pair once (`i < j`).
pub fn threshold_network(a: &AssociationMatrices, which: Which, tau: f64) -> Result<Network> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidArgument(format!(
            "threshold {tau} outside [0, 1]"
        )));
    }
    let k = a.names.len();
    let (matrix, directed) = match which {
        Which::Directed => (&a.directed, true),
        Which::Mutual => (&a.mutual, false),
    };
    let mut edges = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        let js = if directed { 0..k } else { i + 1..k };
        for j in js {
            if i != j && row[j] <= tau + ENTRY_TOLERANCE {
                edges.push(Edge {
                    from: i,
                    to: j,
                    weight: 1.0 - row[j],
                });
            }
        }
    }
    Ok(Network {
        nodes: a.names.clone(),
        edges,
        directed,
        threshold: tau,
    })
}

impl Network {
    pub fn to_dot(&self, graph_name: &str) -> String {
        let (kind, arrow) = if self.directed {
            ("digraph", "->")
        } else {
            ("graph", "--")
        };
        let mut out = String::new();
        writeln!(out, "{kind} \"{graph_name}\" {{").unwrap();
        for (i, n) in self.nodes.iter().enumerate() {
            writeln!(out, "  n{i} [label=\"{n}\"];").unwrap();
        }
        for e in &self.edges {
            writeln!(
                out,
                "  n{} {arrow} n{} [weight={:.6}];",
                e.from, e.to, e.weight
            )
            .unwrap();
        }
        out.push_str("}\n");
        out
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.iter().any(|e| {
            (e.from, e.to) == (from, to) || (!self.directed && (e.to, e.from) == (from, to))
        })
    }
}

use std::fmt::Write as _;

use super::codes::LeafCodes;
use super::ward::HcTree;

const CELL: usize = 10;
const MARGIN: usize = 90;

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Similarity matrix in tree leaf order, first row and column holding unit ids.
pub fn similarity_csv(tree: &HcTree, codes: &LeafCodes) -> String {
    let order = tree.leaf_order();
    let mut out = String::from("unit");
    for &u in &order {
        out.push(',');
        out.push_str(&tree.leaves[u]);
    }
    out.push('\n');
    for &u in &order {
        out.push_str(&tree.leaves[u]);
        for &v in &order {
            let _ = write!(out, ",{}", codes.similarity[u][v]);
        }
        out.push('\n');
    }
    out
}

/// Standalone SVG heatmap in tree leaf order; darker means a longer shared
/// code prefix.
pub fn heatmap_svg(tree: &HcTree, codes: &LeafCodes) -> String {
    let order = tree.leaf_order();
    let n = order.len();
    let size = MARGIN + n * CELL;
    let max = order
        .iter()
        .flat_map(|&u| order.iter().map(move |&v| (u, v)))
        .filter(|(u, v)| u != v)
        .map(|(u, v)| codes.similarity[u][v])
        .max()
        .unwrap_or(0)
        .max(1);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="monospace" font-size="8">"#
    );
    for (i, &u) in order.iter().enumerate() {
        let label = escape_xml(&tree.leaves[u]);
        let pos = MARGIN + i * CELL + CELL - 2;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{pos}" text-anchor="end">{label}</text>"#,
            MARGIN - 2
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate({pos},{}) rotate(-90)">{label}</text>"#,
            MARGIN - 2
        );
    }
    for (i, &u) in order.iter().enumerate() {
        for (j, &v) in order.iter().enumerate() {
            let s = codes.similarity[u][v].min(max);
            let shade = 255 - (255 * s / max) as u8;
            let _ = writeln!(
                svg,
                r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="#{shade:02x}{shade:02x}ff"/>"##,
                MARGIN + j * CELL,
                MARGIN + i * CELL
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

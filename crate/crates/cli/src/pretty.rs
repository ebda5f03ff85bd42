//! ASCII drawing of a reduction tree with its marking and parities.

use std::fmt::Write;
use whittaker::redtree::{fmt_rational, ReductionTree, Skeleton};

/// `a0, b0, a1, ...` for the labels of the given pairs, `p7` otherwise.
fn label_name(pairs: &[(usize, usize)], label: usize) -> String {
    for (i, &(a, b)) in pairs.iter().enumerate() {
        if a == label {
            return format!("a{i}");
        }
        if b == label {
            return format!("b{i}");
        }
    }
    format!("p{label}")
}

fn parity(even: bool) -> &'static str {
    if even {
        "even"
    } else {
        "odd"
    }
}

fn vertex_line(tree: &ReductionTree, pairs: &[(usize, usize)], v: usize) -> String {
    let sk: &Skeleton = &tree.skeleton;
    let kind = sk.vertex_type(v).map_or_else(|| "?".to_string(), |t| format!("{t:?}").to_lowercase());
    let marks: Vec<String> = sk.marks[v].iter().map(|&l| label_name(pairs, l)).collect();
    let mut line = format!("v{v} type {kind}, {}, depth {}", parity(sk.vertex_is_even(v)), fmt_rational(tree.vertices[v].depth));
    if !marks.is_empty() {
        let _ = write!(line, " [{}]", marks.join(" "));
    }
    line
}

/// Draw the tree from the component containing the direction of infinity.
pub fn render_tree(tree: &ReductionTree, pairs: &[(usize, usize)]) -> String {
    let root = tree.top_vertex().unwrap_or(0);
    let mut out = vertex_line(tree, pairs, root);
    out.push('\n');
    descend(tree, pairs, root, usize::MAX, "", &mut out);
    out
}

fn descend(tree: &ReductionTree, pairs: &[(usize, usize)], v: usize, parent: usize, prefix: &str, out: &mut String) {
    let children: Vec<(usize, usize)> = tree.skeleton.neighbors(v).into_iter().filter(|&(_, w)| w != parent).collect();
    for (i, &(e, w)) in children.iter().enumerate() {
        let last = i + 1 == children.len();
        let branch = if last { "`-- " } else { "|-- " };
        let edge = format!("({}, size {})", parity(tree.skeleton.edge_is_even(e)), fmt_rational(tree.sizes[e]));
        let _ = writeln!(out, "{prefix}{branch}{edge} {}", vertex_line(tree, pairs, w));
        let next = format!("{prefix}{}", if last { "    " } else { "|   " });
        descend(tree, pairs, w, v, &next, out);
    }
}

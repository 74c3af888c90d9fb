use std::fmt::Write;

use super::{VariableVertex, VineStructure};

/// Renders the graph as a Graphviz digraph, top level first.
///
/// Variable vertices are ellipses labelled `l|S`, copula vertices boxes
/// labelled `l,r;S`. Edges run from parents into copulas and from copulas
/// to their children.
pub fn export_dot(s: &VineStructure) -> String {
    let mut out = String::from("digraph vcg {\n  rankdir=TB;\n");
    let var = |v: &VariableVertex| format!("\"v{v}\"");
    let emit_var = |out: &mut String, v: &VariableVertex| {
        let _ = writeln!(out, "  {} [shape=ellipse, label=\"{v}\"];", var(v));
    };
    for j in 0..s.d() {
        emit_var(&mut out, &VariableVertex::top(j));
    }
    for (k, level) in s.levels().iter().enumerate() {
        let _ = writeln!(out, "  // level {k}");
        for e in level {
            let id = format!("\"c{e}\"");
            let _ = writeln!(out, "  {id} [shape=box, label=\"{e}\"];");
            for p in e.parents() {
                let _ = writeln!(out, "  {} -> {id};", var(&p));
            }
            for c in e.children() {
                emit_var(&mut out, &c);
                let _ = writeln!(out, "  {id} -> {};", var(&c));
            }
        }
    }
    out.push_str("}\n");
    out
}

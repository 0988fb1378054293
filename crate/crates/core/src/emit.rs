//! Graphviz output for quivers and fibrations.

use petgraph::dot::{Config, Dot};
use petgraph::graph::DiGraph;

use crate::fibration::MarkedFibration;
use crate::fincat::FinCat;

fn quiver(c: &FinCat, node: impl Fn(usize) -> String) -> DiGraph<String, (usize, String)> {
    let mut g = DiGraph::new();
    let nodes: Vec<_> = (0..c.num_objects()).map(|x| g.add_node(node(x))).collect();
    for a in c.non_identity_arrows() {
        g.add_edge(nodes[c.src(a)], nodes[c.tgt(a)], (a, c.arr_label(a).to_string()));
    }
    g
}

fn render(g: &DiGraph<String, (usize, String)>, name: &str, edge_style: impl Fn(usize) -> &'static str) -> String {
    let edge = |_, e: petgraph::graph::EdgeReference<'_, (usize, String)>| format!("label = {:?}{}", e.weight().1, edge_style(e.weight().0));
    let node = |_, (_, w): (petgraph::graph::NodeIndex, &String)| format!("label = {w:?}");
    let config = [Config::NodeNoLabel, Config::EdgeNoLabel, Config::GraphContentOnly];
    let dot = Dot::with_attr_getters(g, &config, &edge, &node);
    format!("digraph {name:?} {{\n{dot:?}}}\n")
}

/// `n` followed by `noun`, pluralised with a trailing `s`.
pub fn counted(n: usize, noun: &str) -> String {
    if n == 1 {
        format!("1 {noun}")
    } else {
        format!("{n} {noun}s")
    }
}

/// Object and arrow counts, as in `2 objects, 3 arrows`.
pub fn size(c: &FinCat) -> String {
    format!("{}, {}", counted(c.num_objects(), "object"), counted(c.num_arrows(), "arrow"))
}

/// Objects and non-identity arrows of `c`.
pub fn dot_fincat(c: &FinCat) -> String {
    let g = quiver(c, |x| c.obj_label(x).to_string());
    render(&g, c.name(), |_| "")
}

/// The total category, each object labelled with the base object below it;
/// cocartesian arrows are bold and vertical arrows dashed.
pub fn dot_fibration(mf: &MarkedFibration) -> String {
    let (e, b) = (mf.total(), mf.base());
    let g = quiver(e, |x| format!("{} | {}", e.obj_label(x), b.obj_label(mf.p.obj[x])));
    render(&g, e.name(), |a| {
        if mf.marked[a] {
            ", style = bold"
        } else if b.is_identity(mf.p.arr[a]) {
            ", style = dashed"
        } else {
            ""
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fibration::unstraighten;
    use crate::fixtures::{interval, walking_iso};
    use std::sync::Arc;

    #[test]
    fn sizes_pluralise() {
        assert_eq!(size(&interval()), "2 objects, 3 arrows");
        assert_eq!(size(&crate::fixtures::terminal()), "1 object, 1 arrow");
        assert_eq!(counted(0, "fibre"), "0 fibres");
    }

    #[test]
    fn interval_quiver() {
        let s = dot_fincat(&interval());
        assert!(s.starts_with("digraph \"I\" {"));
        assert_eq!(s.matches("->").count(), 1);
        assert!(s.contains("label = \"f\""));
        assert!(s.contains("label = \"0\""));
    }

    #[test]
    fn quotes_are_escaped() {
        let c = interval().with_name("a\"b");
        assert!(dot_fincat(&c).starts_with("digraph \"a\\\"b\" {"));
    }

    #[test]
    fn fibration_marks_lifts() {
        let j = Arc::new(walking_iso());
        let pf = crate::fibration::Pseudofunctor::constant(j, Arc::new(interval()));
        let mf = unstraighten(&pf).unwrap();
        let s = dot_fibration(&mf);
        let marked = mf.total().non_identity_arrows().filter(|&a| mf.marked[a]).count();
        assert_eq!(s.matches("bold").count(), marked);
        assert!(s.matches("dashed").count() >= 2);
    }
}

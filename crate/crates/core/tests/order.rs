use commbench::benchmark::{generate_planted, PlantedSpec};
use commbench::detectors::ResolutionParams;
use commbench::graph::{parse_attributes, AttributeTable, Graph};
use commbench::order::{label_cmp, order_adjacency, BlockOrdering};

fn check_invariants(o: &BlockOrdering, g: &Graph, attrs: &AttributeTable, attribute: &str) {
    let n = g.node_count();
    let mut seen = vec![false; n];
    for &v in &o.order {
        assert!(!seen[v], "node {v} placed twice");
        seen[v] = true;
    }
    assert_eq!(o.order.len(), n);
    let pos = o.positions();
    assert!((0..n).all(|p| pos[o.order[p]] == p));

    let attr = attrs.get(attribute).unwrap();
    // block spans tile the labeled prefix, each holding one value
    let mut at = 0;
    for s in &o.blocks {
        assert_eq!(s.start, at);
        assert!(s.end > s.start);
        for p in s.start..s.end {
            assert_eq!(attr.value(o.order[p]), Some(s.label.as_str()));
        }
        at = s.end;
    }
    for p in at..n {
        assert_eq!(attr.value(o.order[p]), None, "unlabeled nodes go last");
    }
    // meta spans tile the same prefix along block boundaries
    let mut m = 0;
    for s in &o.meta {
        assert_eq!(s.start, m);
        assert!(o.blocks.iter().any(|b| b.start == s.start));
        assert!(o.blocks.iter().any(|b| b.end == s.end));
        m = s.end;
    }
    assert_eq!(m, at);
}

#[test]
fn planted_hierarchy_ordering() {
    let p = generate_planted(&PlantedSpec::new(64, 8, 0.8, 0.01, 4).with_hierarchy(0.6)).unwrap();
    let o = order_adjacency(&p.graph, &p.attributes, "block", &ResolutionParams::default()).unwrap();
    check_invariants(&o, &p.graph, &p.attributes, "block");
    assert_eq!(o.blocks.len(), 8);
    // super-group pairs end up in the same meta span
    for s in &o.meta {
        let members: Vec<usize> = o.order[s.start..s.end].to_vec();
        let sup = p.super_groups.as_ref().unwrap();
        assert!(members.iter().all(|&v| sup.community_of(v) == sup.community_of(members[0])));
    }
    let again = order_adjacency(&p.graph, &p.attributes, "block", &ResolutionParams::default()).unwrap();
    assert_eq!(o, again);
}

#[test]
fn missing_values_and_text_output() {
    let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let attrs = parse_attributes("id\tcolor\n0\tred\n1\tred\n2\t\n3\tblue\n4\tblue\n", &g).unwrap();
    let o = order_adjacency(&g, &attrs, "color", &ResolutionParams::default()).unwrap();
    check_invariants(&o, &g, &attrs, "color");
    assert_eq!(o.order[4], 2);
    assert_eq!(o.order_text(&g).lines().count(), 5);
    let text = o.boundaries_text();
    let meta_lines = text.lines().take_while(|l| l.starts_with("meta ")).count();
    assert_eq!(meta_lines, o.meta.len());
    assert_eq!(text.lines().count(), o.meta.len() + o.blocks.len());
    assert!(order_adjacency(&g, &attrs, "size", &ResolutionParams::default()).is_err());
}

#[test]
fn numeric_labels_sort_numerically() {
    use std::cmp::Ordering::*;
    assert_eq!(label_cmp("2", "10"), Less);
    assert_eq!(label_cmp("b", "a"), Greater);
    assert_eq!(label_cmp("10", "9a"), Less);
}

use crate::jsonc::{Node, NodeKind, SyntaxTree};

/// Reprints a well-formed tree with two-space indentation and no trailing
/// commas, ending in a newline. Each comment moves onto its own line ahead
/// of the member that follows it. Returns `None` when the tree has `Error`
/// or `Missing` nodes.
pub fn format_tree(tree: &SyntaxTree) -> Option<String> {
    if !tree.is_well_formed() {
        return None;
    }
    let mut out = String::new();
    if tree.text().starts_with('\u{feff}') {
        out.push('\u{feff}');
    }
    let root = tree.root();
    let span = root.span();
    let (leading, trailing): (Vec<Node<'_>>, Vec<Node<'_>>) = root
        .children()
        .filter(|c| c.kind().is_comment() && !span.contains_range(c.range()))
        .partition(|c| c.range().end <= span.start);
    for c in leading {
        out.push_str(c.text());
        out.push('\n');
    }
    node(root, "", &mut out);
    for c in trailing {
        out.push('\n');
        out.push_str(c.text());
    }
    out.push('\n');
    Some(out)
}

fn node(n: Node<'_>, indent: &str, out: &mut String) {
    let span = n.span();
    match n.kind() {
        NodeKind::Object | NodeKind::Array => {
            let children: Vec<Node<'_>> =
                n.children().filter(|c| span.contains_range(c.range())).collect();
            let (open, close) = if n.kind() == NodeKind::Object { ('{', '}') } else { ('[', ']') };
            if children.is_empty() {
                out.push(open);
                out.push(close);
                return;
            }
            let inner = format!("{indent}  ");
            let last_member = children.iter().rposition(|c| !c.kind().is_comment());
            out.push(open);
            for (i, c) in children.iter().enumerate() {
                out.push('\n');
                out.push_str(&inner);
                if c.kind().is_comment() {
                    out.push_str(c.text());
                } else {
                    node(*c, &inner, out);
                    if Some(i) != last_member {
                        out.push(',');
                    }
                }
            }
            out.push('\n');
            out.push_str(indent);
            out.push(close);
        }
        NodeKind::Property => {
            for c in n.children() {
                match c.kind() {
                    NodeKind::PropertyName => {
                        out.push_str(c.text());
                        out.push_str(": ");
                    }
                    NodeKind::LineComment => {
                        out.push_str(c.text());
                        out.push('\n');
                        out.push_str(indent);
                        out.push_str("  ");
                    }
                    NodeKind::BlockComment => {
                        out.push_str(c.text());
                        out.push(' ');
                    }
                    _ => node(c, indent, out),
                }
            }
        }
        _ => out.push_str(n.text()),
    }
}

//! Reader for Gmsh MSH 2.2 ASCII files.

use std::collections::HashMap;

use super::{sorted_pair, TriMesh};
use crate::error::{Error, Result};
use crate::scalar::Real;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let l = l.trim();
            if !l.is_empty() {
                return Some((i + 1, l));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.last;
        self.next().ok_or_else(|| Error::Parse {
            line: last + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num<N: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<N> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(line, format!("invalid {what} '{tok}'")))
}

/// Dimension of a Gmsh element type, for the types we may meet.
fn element_dim(ty: u32) -> Option<(u32, usize)> {
    // (dimension, node count)
    Some(match ty {
        15 => (0, 1),
        1 => (1, 2),
        8 => (1, 3),
        26 => (1, 4),
        2 => (2, 3),
        3 => (2, 4),
        9 => (2, 6),
        10 => (2, 9),
        16 => (2, 8),
        20 => (2, 9),
        21 => (2, 10),
        4 => (3, 4),
        5 => (3, 8),
        6 => (3, 6),
        7 => (3, 5),
        11 => (3, 10),
        _ => return None,
    })
}

/// Parses an MSH 2.2 ASCII mesh. Triangles (type 2) become cells with their
/// first tag (the physical group) as region id; lines (type 1) supply
/// boundary tags; points and higher-order lines are ignored. Nodes not used
/// by any triangle are dropped and the rest renumbered in file order.
pub fn parse_msh<T: Real>(text: &str) -> Result<TriMesh<T>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let mut nodes: Vec<(u64, [T; 2])> = Vec::new();
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut triangles: Vec<([usize; 3], u32, usize)> = Vec::new();
    let mut lines_tags: Vec<([usize; 2], u32)> = Vec::new();
    let (mut seen_format, mut seen_nodes, mut seen_elements) = (false, false, false);

    while let Some((ln, header)) = lines.next() {
        match header {
            "$MeshFormat" => {
                let (l, body) = lines.expect("format line")?;
                let mut it = body.split_whitespace();
                let version: String = parse_num(it.next(), l, "version")?;
                let file_type: u32 = parse_num(it.next(), l, "file type")?;
                if !version.starts_with("2.") {
                    return Err(err(l, format!("unsupported MSH version {version}")));
                }
                if file_type != 0 {
                    return Err(err(l, "binary MSH files are not supported"));
                }
                close(&mut lines, "$EndMeshFormat")?;
                seen_format = true;
            }
            "$Nodes" => {
                let (l, count) = lines.expect("node count")?;
                let count: usize = parse_num(Some(count), l, "node count")?;
                nodes.reserve(count);
                for _ in 0..count {
                    let (l, row) = lines.expect("node")?;
                    let mut it = row.split_whitespace();
                    let id: u64 = parse_num(it.next(), l, "node id")?;
                    let x: f64 = parse_num(it.next(), l, "x coordinate")?;
                    let y: f64 = parse_num(it.next(), l, "y coordinate")?;
                    if node_index.insert(id, nodes.len()).is_some() {
                        return Err(err(l, format!("duplicate node id {id}")));
                    }
                    nodes.push((id, [T::lit(x), T::lit(y)]));
                }
                close(&mut lines, "$EndNodes")?;
                seen_nodes = true;
            }
            "$Elements" => {
                if !seen_nodes {
                    return Err(err(ln, "$Elements before $Nodes"));
                }
                let (l, count) = lines.expect("element count")?;
                let count: usize = parse_num(Some(count), l, "element count")?;
                for _ in 0..count {
                    let (l, row) = lines.expect("element")?;
                    let mut it = row.split_whitespace();
                    let _id: u64 = parse_num(it.next(), l, "element id")?;
                    let ty: u32 = parse_num(it.next(), l, "element type")?;
                    let ntags: usize = parse_num(it.next(), l, "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(parse_num::<u32>(it.next(), l, "tag")?);
                    }
                    let (dim, nn) = element_dim(ty)
                        .ok_or_else(|| err(l, format!("unsupported element type {ty}")))?;
                    let mut ids = Vec::with_capacity(nn);
                    for _ in 0..nn {
                        let id: u64 = parse_num(it.next(), l, "element node")?;
                        let idx = *node_index
                            .get(&id)
                            .ok_or_else(|| err(l, format!("unknown node id {id}")))?;
                        ids.push(idx);
                    }
                    let physical = tags.first().copied().unwrap_or(0);
                    match (ty, dim) {
                        (2, _) => triangles.push(([ids[0], ids[1], ids[2]], physical, l)),
                        (1, _) => lines_tags.push(([ids[0], ids[1]], physical)),
                        (_, 0 | 1) => {}
                        _ => return Err(err(l, format!("unsupported element type {ty}"))),
                    }
                }
                close(&mut lines, "$EndElements")?;
                seen_elements = true;
            }
            h if h.starts_with('$') && !h.starts_with("$End") => {
                // Skip unknown sections such as $PhysicalNames.
                let end = format!("$End{}", &h[1..]);
                loop {
                    let (_, l) = lines.expect(&end)?;
                    if l == end {
                        break;
                    }
                }
            }
            other => return Err(err(ln, format!("unexpected line '{other}'"))),
        }
    }
    if !seen_format {
        return Err(err(lines.last.max(1), "missing $MeshFormat section"));
    }
    if !seen_elements {
        return Err(err(lines.last.max(1), "missing $Elements section"));
    }
    if triangles.is_empty() {
        return Err(err(lines.last.max(1), "mesh contains no triangles"));
    }

    let mut used = vec![usize::MAX; nodes.len()];
    let mut vertices = Vec::new();
    for (tri, _, _) in &triangles {
        for &v in tri {
            if used[v] == usize::MAX {
                used[v] = 0;
            }
        }
    }
    for (v, slot) in used.iter_mut().enumerate() {
        if *slot == 0 {
            *slot = vertices.len();
            vertices.push(nodes[v].1);
        }
    }
    let mut boundary_tags = HashMap::new();
    for ([a, b], tag) in lines_tags {
        if used[a] != usize::MAX && used[b] != usize::MAX {
            boundary_tags.insert(sorted_pair(used[a], used[b]), tag);
        }
    }
    let cells: Vec<[usize; 3]> = triangles
        .iter()
        .map(|(t, _, _)| [used[t[0]], used[t[1]], used[t[2]]])
        .collect();
    let regions = triangles.iter().map(|&(_, r, _)| r).collect();
    TriMesh::new(vertices, cells, regions, &boundary_tags).map_err(|e| {
        // Attach the element line of the offending triangle where we can.
        let msg = e.to_string();
        let line = msg
            .split("triangle ")
            .nth(1)
            .and_then(|s| s.split_whitespace().next())
            .and_then(|s| s.parse::<usize>().ok())
            .and_then(|t| triangles.get(t))
            .map(|t| t.2)
            .unwrap_or(lines.last);
        err(line, msg)
    })
}

fn close(lines: &mut Lines<'_>, end: &str) -> Result<()> {
    let (l, s) = lines.expect(end)?;
    if s != end {
        return Err(err(l, format!("expected {end}, found '{s}'")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
1
2 7 \"domain\"
$EndPhysicalNames
$Nodes
5
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
9 5 5 0
$EndNodes
$Elements
7
1 15 2 0 1 1
2 1 2 3 1 1 2
3 1 2 3 1 2 3
4 1 2 3 1 3 4
5 1 2 3 1 4 1
6 2 2 7 1 1 2 3
7 2 2 7 1 1 3 4
$EndElements
";

    #[test]
    fn unit_square_file() {
        let m = parse_msh::<f64>(SQUARE).unwrap();
        assert_eq!(m.num_vertices(), 4);
        assert_eq!(m.num_triangles(), 2);
        assert_eq!(m.boundary_edges().len(), 4);
        assert!(m.boundary_edges().iter().all(|&(_, tag)| tag == 3));
        assert_eq!(m.regions(), &[7, 7]);
    }

    #[test]
    fn quadrilateral_is_rejected() {
        let text = SQUARE.replace("7\n1 15 2 0 1 1", "8\n8 3 2 7 1 1 2 3 4\n1 15 2 0 1 1");
        match parse_msh::<f64>(&text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 18);
                assert!(msg.contains("unsupported element"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn version_and_structure_errors() {
        let v4 = SQUARE.replace("2.2 0 8", "4.1 0 8");
        assert!(matches!(parse_msh::<f64>(&v4), Err(Error::Parse { line: 2, .. })));
        let truncated = &SQUARE[..SQUARE.find("$EndNodes").unwrap()];
        assert!(matches!(parse_msh::<f64>(truncated), Err(Error::Parse { .. })));
        let bad = SQUARE.replace("3 1 1 0", "3 1 x 0");
        assert!(matches!(parse_msh::<f64>(&bad), Err(Error::Parse { line: 12, .. })));
    }

    #[test]
    fn non_conforming_is_rejected() {
        // A third triangle overlapping the first with the same orientation.
        let text = SQUARE
            .replace("7\n1 15", "8\n8 2 2 7 1 1 2 4\n1 15");
        assert!(matches!(parse_msh::<f64>(&text), Err(Error::Parse { .. })));
    }
}

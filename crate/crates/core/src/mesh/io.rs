//! Mesh file formats.
//!
//! * Triangle/TetGen `.node` + `.ele` pairs. Ids in the files are mapped to
//!   0-based ids by subtracting the first node id (normally 1). Attributes
//!   and boundary markers are read and discarded.
//! * Native single-file format: `dim #nodes #elems`, then one row of
//!   coordinates per node, then one row of 0-based node ids per element.
//!
//! In both formats `#` starts a comment.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::Mesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    /// `path` is the `.node` file, or the common stem of the pair.
    NodeEle,
    Native,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> MeshFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("node") | Some("ele") => MeshFormat::NodeEle,
            _ => MeshFormat::Native,
        }
    }
}

pub fn load_mesh(path: impl AsRef<Path>, format: MeshFormat) -> Result<Mesh> {
    let path = path.as_ref();
    match format {
        MeshFormat::Native => {
            let text = read(path)?;
            parse_native(&text, &path.display().to_string())
        }
        MeshFormat::NodeEle => {
            let node_path = path.with_extension("node");
            let ele_path = path.with_extension("ele");
            let node_text = read(&node_path)?;
            let ele_text = read(&ele_path)?;
            parse_node_ele(
                &node_text,
                &node_path.display().to_string(),
                &ele_text,
                &ele_path.display().to_string(),
            )
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn save_native(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, native_string(mesh)).map_err(|e| Error::io(path, e))
}

/// Writes `<stem>.node` and `<stem>.ele` with 1-based ids.
pub fn save_node_ele(mesh: &Mesh, stem: impl AsRef<Path>) -> Result<()> {
    let stem: PathBuf = stem.as_ref().to_path_buf();
    let mut node = format!("{} {} 0 0\n", mesh.node_count(), mesh.dim());
    for v in 0..mesh.node_count() {
        let _ = write!(node, "{}", v + 1);
        for x in mesh.coord(v) {
            let _ = write!(node, " {x}");
        }
        node.push('\n');
    }
    let mut ele = format!("{} {} 0\n", mesh.elem_count(), mesh.nodes_per_elem());
    for e in 0..mesh.elem_count() {
        let _ = write!(ele, "{}", e + 1);
        for v in mesh.elem(e) {
            let _ = write!(ele, " {}", v + 1);
        }
        ele.push('\n');
    }
    let np = stem.with_extension("node");
    fs::write(&np, node).map_err(|e| Error::io(&np, e))?;
    let ep = stem.with_extension("ele");
    fs::write(&ep, ele).map_err(|e| Error::io(&ep, e))
}

pub(crate) fn native_string(mesh: &Mesh) -> String {
    let mut s = format!("{} {} {}\n", mesh.dim(), mesh.node_count(), mesh.elem_count());
    for v in 0..mesh.node_count() {
        let row: Vec<String> = mesh.coord(v).iter().map(|x| x.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    for e in 0..mesh.elem_count() {
        let row: Vec<String> = mesh.elem(e).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

/// Non-comment, non-blank lines paired with their 1-based line numbers.
struct Lines<'a> {
    file: &'a str,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, file: &'a str) -> Self {
        Lines {
            file,
            inner: text.lines().enumerate(),
        }
    }

    fn next_row(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let content = line.split('#').next().unwrap_or("");
            let fields: Vec<&str> = content.split_whitespace().collect();
            if !fields.is_empty() {
                return Some((i + 1, fields));
            }
        }
        None
    }

    fn expect_row(&mut self, what: &str, last_line: usize) -> Result<(usize, Vec<&'a str>)> {
        self.next_row().ok_or_else(|| Error::Parse {
            file: self.file.to_string(),
            line: last_line + 1,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            file: self.file.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn field<T: FromStr>(&self, line: usize, fields: &[&str], k: usize, what: &str) -> Result<T> {
        let raw = fields
            .get(k)
            .ok_or_else(|| self.err(line, format!("missing {what}")))?;
        raw.parse()
            .map_err(|_| self.err(line, format!("invalid {what} '{raw}'")))
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.next_row() {
            None => Ok(()),
            Some((line, _)) => Err(self.err(line, "more rows than declared in the header")),
        }
    }
}

fn parse_native(text: &str, file: &str) -> Result<Mesh> {
    let mut lines = Lines::new(text, file);
    let (hl, header) = lines.expect_row("header", 0)?;
    let dim: usize = lines.field(hl, &header, 0, "dimension")?;
    let nn: usize = lines.field(hl, &header, 1, "node count")?;
    let ne: usize = lines.field(hl, &header, 2, "element count")?;
    if !(1..=3).contains(&dim) {
        return Err(lines.err(hl, format!("unsupported dimension {dim}")));
    }
    let mut coords = Vec::with_capacity(nn * dim);
    let mut last = hl;
    for _ in 0..nn {
        let (l, f) = lines.expect_row("node row", last)?;
        if f.len() != dim {
            return Err(lines.err(l, format!("expected {dim} coordinates, found {}", f.len())));
        }
        for k in 0..dim {
            coords.push(lines.field(l, &f, k, "coordinate")?);
        }
        last = l;
    }
    let mut elems = Vec::with_capacity(ne * (dim + 1));
    for _ in 0..ne {
        let (l, f) = lines.expect_row("element row", last)?;
        if f.len() != dim + 1 {
            return Err(lines.err(
                l,
                format!("expected {} node ids, found {}", dim + 1, f.len()),
            ));
        }
        for k in 0..=dim {
            let v: usize = lines.field(l, &f, k, "node id")?;
            if v >= nn {
                return Err(lines.err(l, format!("element references missing node {v}")));
            }
            elems.push(v);
        }
        last = l;
    }
    lines.expect_end()?;
    Mesh::new(dim, coords, elems)
}

fn parse_node_ele(node_text: &str, node_file: &str, ele_text: &str, ele_file: &str) -> Result<Mesh> {
    let mut lines = Lines::new(node_text, node_file);
    let (hl, header) = lines.expect_row("header", 0)?;
    let nn: usize = lines.field(hl, &header, 0, "node count")?;
    let dim: usize = lines.field(hl, &header, 1, "dimension")?;
    let nattr: usize = if header.len() > 2 {
        lines.field(hl, &header, 2, "attribute count")?
    } else {
        0
    };
    let nmark: usize = if header.len() > 3 {
        lines.field(hl, &header, 3, "marker count")?
    } else {
        0
    };
    if !(1..=3).contains(&dim) {
        return Err(lines.err(hl, format!("unsupported dimension {dim}")));
    }
    let mut coords = Vec::with_capacity(nn * dim);
    let mut base = None;
    let mut last = hl;
    for i in 0..nn {
        let (l, f) = lines.expect_row("node row", last)?;
        if f.len() != 1 + dim + nattr + nmark {
            return Err(lines.err(
                l,
                format!(
                    "expected {} fields, found {}",
                    1 + dim + nattr + nmark,
                    f.len()
                ),
            ));
        }
        let id: usize = lines.field(l, &f, 0, "node id")?;
        let b = *base.get_or_insert(id);
        if id != b + i {
            return Err(lines.err(l, format!("node ids must be consecutive, found {id}")));
        }
        for k in 0..dim {
            coords.push(lines.field(l, &f, 1 + k, "coordinate")?);
        }
        last = l;
    }
    lines.expect_end()?;
    let base = base.unwrap_or(1);

    let mut lines = Lines::new(ele_text, ele_file);
    let (hl, header) = lines.expect_row("header", 0)?;
    let ne: usize = lines.field(hl, &header, 0, "element count")?;
    let npe: usize = lines.field(hl, &header, 1, "nodes per element")?;
    let eattr: usize = if header.len() > 2 {
        lines.field(hl, &header, 2, "attribute count")?
    } else {
        0
    };
    if npe != dim + 1 {
        return Err(lines.err(
            hl,
            format!("{npe} nodes per element is inconsistent with dimension {dim}"),
        ));
    }
    let mut elems = Vec::with_capacity(ne * npe);
    let mut last = hl;
    for _ in 0..ne {
        let (l, f) = lines.expect_row("element row", last)?;
        if f.len() != 1 + npe + eattr {
            return Err(lines.err(
                l,
                format!("expected {} fields, found {}", 1 + npe + eattr, f.len()),
            ));
        }
        for k in 0..npe {
            let raw: usize = lines.field(l, &f, 1 + k, "node id")?;
            if raw < base || raw - base >= nn {
                return Err(lines.err(l, format!("element references missing node {raw}")));
            }
            elems.push(raw - base);
        }
        last = l;
    }
    lines.expect_end()?;
    Mesh::new(dim, coords, elems)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_box_mesh;

    #[test]
    fn single_triangle_node_ele() {
        let node = "# a triangle\n3 2 0 1\n1 0 0 1\n2 1 0 1\n3 0 1 1\n";
        let ele = "1 3 0\n1 1 2 3\n";
        let m = parse_node_ele(node, "t.node", ele, "t.ele").unwrap();
        assert_eq!(m.node_count(), 3);
        assert_eq!(m.elem_count(), 1);
        assert_eq!(m.boundary_nodes().count(), 3);
        assert_eq!(m.elem(0), &[0, 1, 2]);
    }

    #[test]
    fn extra_node_row_is_reported() {
        let node = "4 2 0 0\n1 0 0\n2 1 0\n3 0 1\n4 1 1\n5 2 2\n";
        let ele = "1 3 0\n1 1 2 3\n";
        let err = parse_node_ele(node, "t.node", ele, "t.ele").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 6),
            e => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn inconsistent_dimension() {
        let node = "3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n";
        let ele = "1 4 0\n1 1 2 3 3\n";
        let err = parse_node_ele(node, "t.node", ele, "t.ele").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn missing_node_reference() {
        let node = "3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n";
        let ele = "1 3 0\n1 1 2 4\n";
        let err = parse_node_ele(node, "t.node", ele, "t.ele").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn bad_number_names_line() {
        let text = "2 3 1\n0 0\n1 x\n0 1\n0 1 2\n";
        let err = parse_native(text, "m.mesh").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn native_round_trip() {
        let m = generate_box_mesh(2, 5, 0.3, 9).unwrap();
        let back = parse_native(&native_string(&m), "m.mesh").unwrap();
        assert_eq!(back.coords(), m.coords());
        assert_eq!(back.elems(), m.elems());
    }

    #[test]
    fn node_ele_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_box_mesh(3, 2, 0.2, 1).unwrap();
        let stem = dir.path().join("cube");
        save_node_ele(&m, &stem).unwrap();
        let back = load_mesh(stem.with_extension("node"), MeshFormat::NodeEle).unwrap();
        assert_eq!(back.coords(), m.coords());
        assert_eq!(back.elems(), m.elems());
    }
}

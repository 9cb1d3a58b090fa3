//! Plain-text mesh format and legacy VTK export.
//!
//! The text format is whitespace-delimited: a header `NV NT NE`, then `NV`
//! lines `x y`, `NT` lines `v0 v1 v2` and `NE` lines `v0 v1 class` where the
//! class is `B` (boundary), `I` (interior) or `F<l>` (fracture `l`).

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::geometry::{Point2, Segment};
use crate::mesh::{EdgeClass, Mesh};
use crate::{Error, Result};

pub fn write_text(mesh: &Mesh, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(
        w,
        "{} {} {}",
        mesh.num_vertices(),
        mesh.num_triangles(),
        mesh.num_edges()
    )?;
    for p in mesh.vertices() {
        writeln!(w, "{:.16e} {:.16e}", p.x, p.y)?;
    }
    for [a, b, c] in mesh.triangles() {
        writeln!(w, "{a} {b} {c}")?;
    }
    for (e, [a, b]) in mesh.edges().iter().enumerate() {
        match mesh.edge_class(e) {
            EdgeClass::Boundary => writeln!(w, "{a} {b} B")?,
            EdgeClass::Interior => writeln!(w, "{a} {b} I")?,
            EdgeClass::Fracture(l) => writeln!(w, "{a} {b} F{l}")?,
        }
    }
    Ok(())
}

pub fn save_text(mesh: &Mesh, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_text(mesh, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn load_text(path: &Path) -> Result<Mesh> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_text(BufReader::new(file), path)
}

/// Parse the text format. `path` is only used in error messages. Fracture
/// geometry is recovered from the tagged edges, which must be collinear per
/// fracture.
pub fn read_text(r: impl BufRead, path: &Path) -> Result<Mesh> {
    let mut lines = Lines::new(r, path);
    let header = lines.next_fields(3)?;
    let nv: usize = lines.parse(&header[0])?;
    let nt: usize = lines.parse(&header[1])?;
    let ne: usize = lines.parse(&header[2])?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let f = lines.next_fields(2)?;
        vertices.push(Point2::new(lines.parse(&f[0])?, lines.parse(&f[1])?));
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let f = lines.next_fields(3)?;
        triangles.push([lines.parse(&f[0])?, lines.parse(&f[1])?, lines.parse(&f[2])?]);
    }
    let mut classes = HashMap::with_capacity(ne);
    let mut tags = HashMap::new();
    let mut per_fracture: BTreeMap<u32, Vec<(Point2, Point2)>> = BTreeMap::new();
    for _ in 0..ne {
        let f = lines.next_fields(3)?;
        let a: u32 = lines.parse(&f[0])?;
        let b: u32 = lines.parse(&f[1])?;
        if a as usize >= nv || b as usize >= nv {
            return Err(lines.error("edge references a missing vertex"));
        }
        let class = match f[2].as_str() {
            "B" => EdgeClass::Boundary,
            "I" => EdgeClass::Interior,
            s if s.starts_with('F') => {
                let l: u32 = lines.parse(&s[1..])?;
                tags.insert((a.min(b), a.max(b)), l);
                per_fracture
                    .entry(l)
                    .or_default()
                    .push((vertices[a as usize], vertices[b as usize]));
                EdgeClass::Fracture(l)
            }
            s => return Err(lines.error(format!("unknown edge class {s:?}"))),
        };
        classes.insert((a.min(b), a.max(b)), class);
    }

    let mut fractures = Vec::with_capacity(per_fracture.len());
    for (k, (l, edges)) in per_fracture.iter().enumerate() {
        if *l as usize != k {
            return Err(lines.error(format!("fracture indices are not contiguous (missing F{k})")));
        }
        fractures.push(span(edges).ok_or_else(|| lines.error(format!("edges tagged F{l} are not collinear")))?);
    }
    let mesh =
        Mesh::from_tagged_edges(vertices, triangles, fractures, &tags).map_err(|e| lines.error(e.to_string()))?;
    if mesh.num_edges() != ne {
        return Err(lines.error(format!(
            "header lists {ne} edges, triangles define {}",
            mesh.num_edges()
        )));
    }
    for (e, [a, b]) in mesh.edges().iter().enumerate() {
        match classes.get(&(*a, *b)) {
            None => return Err(lines.error(format!("edge ({a}, {b}) of the triangulation is not listed"))),
            Some(c) if *c != mesh.edge_class(e) => {
                return Err(lines.error(format!(
                    "edge ({a}, {b}) is listed as {c:?} but is {:?}",
                    mesh.edge_class(e)
                )))
            }
            _ => {}
        }
    }
    Ok(mesh)
}

fn span(edges: &[(Point2, Point2)]) -> Option<Segment> {
    let (p0, p1) = edges[0];
    let dir = p1 - p0;
    let len = dir.norm();
    let pts = edges.iter().flat_map(|&(a, b)| [a, b]);
    let mut lo = (f64::INFINITY, p0);
    let mut hi = (f64::NEG_INFINITY, p0);
    for p in pts {
        if (p - p0).cross(dir).abs() > 1e-9 * len {
            return None;
        }
        let t = (p - p0).dot(dir);
        if t < lo.0 {
            lo = (t, p);
        }
        if t > hi.0 {
            hi = (t, p);
        }
    }
    Segment::new(lo.1, hi.1).ok()
}

struct Lines<'a, R> {
    inner: std::io::Lines<R>,
    path: &'a Path,
    line: usize,
}

impl<'a, R: BufRead> Lines<'a, R> {
    fn new(r: R, path: &'a Path) -> Self {
        Lines {
            inner: r.lines(),
            path,
            line: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    fn next_fields(&mut self, n: usize) -> Result<Vec<String>> {
        loop {
            self.line += 1;
            let line = match self.inner.next() {
                None => return Err(self.error("unexpected end of file")),
                Some(l) => l.map_err(|e| Error::io(self.path, e))?,
            };
            let fields: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
            if fields.is_empty() || fields[0].starts_with('#') {
                continue;
            }
            if fields.len() != n {
                return Err(self.error(format!("expected {n} fields, found {}", fields.len())));
            }
            return Ok(fields);
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().map_err(|_| self.error(format!("cannot parse {s:?}")))
    }
}

/// Write a legacy ASCII VTK unstructured grid. Cell data always includes the
/// refinement generation; `point_data` arrays have one value per vertex and
/// `cell_data` arrays one per triangle.
pub fn write_vtk(
    mesh: &Mesh,
    w: &mut impl Write,
    point_data: &[(&str, &[f64])],
    cell_data: &[(&str, &[f64])],
) -> std::io::Result<()> {
    let (nv, nt) = (mesh.num_vertices(), mesh.num_triangles());
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "fracfem mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for p in mesh.vertices() {
        writeln!(w, "{:.16e} {:.16e} 0", p.x, p.y)?;
    }
    writeln!(w, "CELLS {nt} {}", 4 * nt)?;
    for [a, b, c] in mesh.triangles() {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {nv}")?;
        for (name, values) in point_data {
            assert_eq!(values.len(), nv, "point array {name} has wrong length");
            write_scalars(w, name, "double", values.iter().map(|v| format!("{v:.16e}")))?;
        }
    }
    writeln!(w, "CELL_DATA {nt}")?;
    write_scalars(w, "generation", "int", mesh.generations().iter().map(|g| g.to_string()))?;
    for (name, values) in cell_data {
        assert_eq!(values.len(), nt, "cell array {name} has wrong length");
        write_scalars(w, name, "double", values.iter().map(|v| format!("{v:.16e}")))?;
    }
    Ok(())
}

fn write_scalars(
    w: &mut impl Write,
    name: &str,
    ty: &str,
    values: impl Iterator<Item = String>,
) -> std::io::Result<()> {
    writeln!(w, "SCALARS {name} {ty} 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn save_vtk(mesh: &Mesh, path: &Path, point_data: &[(&str, &[f64])], cell_data: &[(&str, &[f64])]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_vtk(mesh, &mut w, point_data, cell_data)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Contents of a legacy VTK triangle grid.
#[derive(Debug, Clone, Default)]
pub struct VtkData {
    pub points: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub point_data: Vec<(String, Vec<f64>)>,
    pub cell_data: Vec<(String, Vec<f64>)>,
}

/// Read back files produced by [`write_vtk`] (ASCII unstructured grids of
/// triangles with scalar arrays).
pub fn read_vtk(r: impl BufRead, path: &Path) -> Result<VtkData> {
    let err = |m: String| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: m,
    };
    let mut text = String::new();
    for line in r.lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.starts_with('#') {
            continue;
        }
        text.push_str(&line);
        text.push('\n');
    }
    let mut tok = text.split_whitespace().peekable();
    let mut next = |what: &str| {
        tok.next()
            .map(str::to_owned)
            .ok_or_else(|| err(format!("missing {what}")))
    };
    let num = |s: String| s.parse::<f64>().map_err(|_| err(format!("bad number {s:?}")));
    let int = |s: String| s.parse::<usize>().map_err(|_| err(format!("bad integer {s:?}")));

    let mut out = VtkData::default();
    let mut section = None::<(bool, usize)>;
    while let Ok(word) = next("keyword") {
        match word.as_str() {
            "fracfem" | "mesh" | "ASCII" | "DATASET" | "UNSTRUCTURED_GRID" | "LOOKUP_TABLE" | "default" => {}
            "POINTS" => {
                let n = int(next("count")?)?;
                next("type")?;
                for _ in 0..n {
                    let x = num(next("x")?)?;
                    let y = num(next("y")?)?;
                    next("z")?;
                    out.points.push(Point2::new(x, y));
                }
            }
            "CELLS" => {
                let n = int(next("count")?)?;
                next("size")?;
                for _ in 0..n {
                    if int(next("arity")?)? != 3 {
                        return Err(err("only triangle cells are supported".into()));
                    }
                    out.triangles
                        .push([int(next("v")?)?, int(next("v")?)?, int(next("v")?)?]);
                }
            }
            "CELL_TYPES" => {
                let n = int(next("count")?)?;
                for _ in 0..n {
                    next("type")?;
                }
            }
            "POINT_DATA" => section = Some((true, int(next("count")?)?)),
            "CELL_DATA" => section = Some((false, int(next("count")?)?)),
            "SCALARS" => {
                let name = next("name")?;
                next("type")?;
                next("components")?;
                let (is_point, n) = section.ok_or_else(|| err("SCALARS outside a data section".into()))?;
                let lt = next("LOOKUP_TABLE")?;
                if lt != "LOOKUP_TABLE" {
                    return Err(err(format!("expected LOOKUP_TABLE, found {lt:?}")));
                }
                next("table name")?;
                let values = (0..n)
                    .map(|_| next("value").and_then(num))
                    .collect::<Result<Vec<_>>>()?;
                if is_point {
                    out.point_data.push((name, values));
                } else {
                    out.cell_data.push((name, values));
                }
            }
            other => return Err(err(format!("unexpected token {other:?}"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Coefficient;
    use crate::mesh::{bisect, build_fracture_conforming, DomainSpec, FractureSet};

    fn sample() -> Mesh {
        let s = Segment::new(Point2::new(0.25, 0.5), Point2::new(0.75, 0.5)).unwrap();
        let f = FractureSet::new(vec![s], vec![Coefficient::Constant(1.0)]).unwrap();
        let m = build_fracture_conforming(&DomainSpec::unit_square(), &f, 4).unwrap();
        bisect(&m, &[1, 5, 9])
    }

    #[test]
    fn text_round_trip() {
        let m = sample();
        let mut buf = Vec::new();
        write_text(&m, &mut buf).unwrap();
        let back = read_text(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.edge_classes(), m.edge_classes());
        assert_eq!(back.fractures()[0].length(), 0.5);
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        let bad = "3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 B\n1 2 X\n0 2 B\n";
        match read_text(bad.as_bytes(), Path::new("bad.mesh")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        let wrong_class = "3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1 B\n1 2 I\n0 2 B\n";
        assert!(read_text(wrong_class.as_bytes(), Path::new("m")).is_err());
    }

    #[test]
    fn vtk_round_trip() {
        let m = sample();
        let pd: Vec<f64> = m.vertices().iter().map(|p| p.x * p.y).collect();
        let cd: Vec<f64> = (0..m.num_triangles()).map(|t| m.area(t)).collect();
        let mut buf = Vec::new();
        write_vtk(&m, &mut buf, &[("u", &pd)], &[("eta", &cd)]).unwrap();
        let back = read_vtk(&buf[..], Path::new("mem")).unwrap();
        assert_eq!(back.points, m.vertices());
        assert_eq!(back.triangles.len(), m.num_triangles());
        assert_eq!(back.point_data[0].1, pd);
        assert_eq!(back.cell_data[0].0, "generation");
        assert_eq!(back.cell_data[1].1, cd);
    }
}

//! Line-oriented text formats for meshes, nodal functions and polygons.
//!
//! Mesh: `nv nt`, then `nv` lines `x y b` (boundary flag 0/1), then `nt`
//! lines `i j k` with 0-based indices. Function: `nv`, then one value per
//! line. Reals are written with 17 significant digits so they read back
//! bit-for-bit.

use std::io::{BufRead, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::discretization::FemFunction;
use crate::mesh::{MeshError, Point, Polygon, TriMesh};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(r: impl BufRead) -> Result<Vec<(usize, String)>, IoError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            out.push((i + 1, body.to_string()));
        }
    }
    Ok(out)
}

fn fields<T: std::str::FromStr>(line: usize, s: &str, n: usize) -> Result<Vec<T>, IoError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != n {
        return Err(parse_err(line, format!("expected {n} fields, found {}", parts.len())));
    }
    parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| parse_err(line, format!("cannot parse '{p}'"))))
        .collect()
}

pub fn write_mesh(mesh: &TriMesh, mut w: impl Write) -> Result<(), IoError> {
    writeln!(w, "{} {}", mesh.num_vertices(), mesh.num_triangles())?;
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(w, "{:.16e} {:.16e} {}", p[0], p[1], u8::from(mesh.is_boundary(i)))?;
    }
    for t in mesh.triangles() {
        writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// Reads a mesh and checks the stored boundary flags against edge incidence.
pub fn read_mesh(r: impl BufRead) -> Result<TriMesh, IoError> {
    let lines = content_lines(r)?;
    let mut it = lines.iter();
    let (l0, head) = it.next().ok_or_else(|| parse_err(1, "empty mesh file"))?;
    let counts: Vec<usize> = fields(*l0, head, 2)?;
    let (nv, nt) = (counts[0], counts[1]);
    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, s) = it.next().ok_or_else(|| parse_err(*l0, format!("expected {nv} vertex lines")))?;
        let parts: Vec<&str> = s.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(*ln, "expected 'x y b'"));
        }
        let x: f64 = parts[0].parse().map_err(|_| parse_err(*ln, "bad x"))?;
        let y: f64 = parts[1].parse().map_err(|_| parse_err(*ln, "bad y"))?;
        let b = match parts[2] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(*ln, format!("boundary flag must be 0 or 1, got '{other}'"))),
        };
        vertices.push([x, y]);
        flags.push(b);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, s) = it.next().ok_or_else(|| parse_err(*l0, format!("expected {nt} triangle lines")))?;
        let t: Vec<usize> = fields(*ln, s, 3)?;
        triangles.push([t[0], t[1], t[2]]);
    }
    if let Some((ln, _)) = it.next() {
        return Err(parse_err(*ln, "trailing data after triangles"));
    }
    let mesh = TriMesh::new(vertices, triangles)?;
    if let Some(v) = flags.iter().zip(mesh.boundary_flags()).position(|(a, b)| a != b) {
        return Err(MeshError::BoundaryFlag(v).into());
    }
    Ok(mesh)
}

pub fn write_function(u: &FemFunction, mut w: impl Write) -> Result<(), IoError> {
    writeln!(w, "{}", u.coeffs().len())?;
    for v in u.coeffs() {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

pub fn read_function(mesh: &Arc<TriMesh>, r: impl BufRead) -> Result<FemFunction, IoError> {
    let lines = content_lines(r)?;
    let (l0, head) = lines.first().ok_or_else(|| parse_err(1, "empty function file"))?;
    let n: usize = fields::<usize>(*l0, head, 1)?[0];
    if n != mesh.num_vertices() {
        return Err(parse_err(*l0, format!("function has {n} values, mesh has {} vertices", mesh.num_vertices())));
    }
    if lines.len() != n + 1 {
        return Err(parse_err(*l0, format!("expected {n} values, found {}", lines.len() - 1)));
    }
    let coeffs = lines[1..]
        .iter()
        .map(|(ln, s)| fields::<f64>(*ln, s, 1).map(|v| v[0]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FemFunction::new(Arc::clone(mesh), coeffs).expect("length checked"))
}

/// Polygon file: one `x y` pair per line, counter-clockwise; `#` starts a comment.
pub fn read_polygon(r: impl BufRead) -> Result<Polygon, IoError> {
    let pts = content_lines(r)?
        .iter()
        .map(|(ln, s)| fields::<f64>(*ln, s, 2).map(|v| -> Point { [v[0], v[1]] }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Polygon::new(pts)?)
}

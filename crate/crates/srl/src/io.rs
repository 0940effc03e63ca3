//! `SRLGRID1` grids, JSON sidecars and CSV slices.
//!
//! Grid layout, all little-endian: the magic `SRLGRID1`, `u64 nx`, `u64 ny`,
//! `f64 xs[nx]`, `f64 ys[ny]`, `f64 psi[nx·ny]` row-major in `x`, then the
//! trailer `SHA256` followed by the 32-byte run digest.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use srl_core::degenerate_solver::{Grading, Mapping, ScalarField2D};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 8] = b"SRLGRID1";
pub const TRAILER: &[u8; 6] = b"SHA256";

/// Raw contents of a grid file.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub psi: Vec<f64>,
    pub digest: Option<String>,
}

fn digest_bytes(hex: &str) -> Result<[u8; 32]> {
    if hex.len() != 64 {
        return Err(CliError::Format("digest must be 64 hex digits".into()));
    }
    let mut out = [0u8; 32];
    for (k, b) in out.iter_mut().enumerate() {
        *b = u8::from_str_radix(&hex[2 * k..2 * k + 2], 16).map_err(|e| CliError::Format(e.to_string()))?;
    }
    Ok(out)
}

pub fn encode_grid(field: &ScalarField2D, digest: &str) -> Result<Vec<u8>> {
    let (nx, ny) = (field.nx(), field.ny());
    let mut buf = Vec::with_capacity(16 + 8 * (nx + ny + nx * ny) + 46);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(nx as u64).to_le_bytes());
    buf.extend_from_slice(&(ny as u64).to_le_bytes());
    for v in field.xs.iter().chain(&field.ss).chain(&field.values) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(TRAILER);
    buf.extend_from_slice(&digest_bytes(digest)?);
    Ok(buf)
}

pub fn decode_grid(bytes: &[u8]) -> Result<GridFile> {
    let bad = |m: &str| CliError::Format(m.to_string());
    if bytes.len() < 24 || &bytes[..8] != MAGIC {
        return Err(bad("missing SRLGRID1 header"));
    }
    let u = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap()) as usize;
    let (nx, ny) = (u(8), u(16));
    let count = nx.checked_add(ny).and_then(|s| nx.checked_mul(ny).and_then(|p| s.checked_add(p))).ok_or_else(|| bad("size overflow"))?;
    let end = 24 + 8 * count;
    if bytes.len() < end {
        return Err(bad("truncated grid"));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[24 + 8 * k..32 + 8 * k].try_into().unwrap());
    let xs = (0..nx).map(f).collect();
    let ys = (nx..nx + ny).map(f).collect();
    let psi = (nx + ny..count).map(f).collect();
    let rest = &bytes[end..];
    let digest = if rest.len() == 38 && &rest[..6] == TRAILER {
        Some(rest[6..].iter().map(|b| format!("{b:02x}")).collect())
    } else if rest.is_empty() {
        None
    } else {
        return Err(bad("unexpected trailing bytes"));
    };
    Ok(GridFile { xs, ys, psi, digest })
}

pub fn write_grid(path: &Path, field: &ScalarField2D, digest: &str) -> Result<()> {
    fs::write(path, encode_grid(field, digest)?)?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<GridFile> {
    decode_grid(&fs::read(path)?)
}

/// What a reader needs beyond the raw grid to rebuild the field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldLayout {
    pub grading: Grading,
    pub mapping: Option<Mapping>,
}

pub fn field_from(grid: GridFile, layout: FieldLayout) -> Result<ScalarField2D> {
    ScalarField2D::new(grid.xs, grid.ys, grid.psi, layout.grading, layout.mapping).map_err(CliError::from)
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn csv_header(out: &mut Vec<u8>, digest: &str, columns: &str) {
    writeln!(out, "# run_digest={digest}").unwrap();
    writeln!(out, "{columns}").unwrap();
}

/// The whole field as `x,y,psi` rows.
pub fn field_csv(field: &ScalarField2D, digest: &str) -> Vec<u8> {
    let mut out = Vec::new();
    csv_header(&mut out, digest, "x,y,psi");
    for i in 0..field.nx() {
        for j in 0..field.ny() {
            writeln!(out, "{:?},{:?},{:?}", field.xs[i], field.y(i, j), field.at(i, j)).unwrap();
        }
    }
    out
}

/// Row `j` as `x,y,psi,psi_x,psi_xx`, skipping the end columns where no jet is defined.
pub fn slice_csv(field: &ScalarField2D, j: usize, digest: &str) -> Vec<u8> {
    let mut out = Vec::new();
    csv_header(&mut out, digest, "x,y,psi,psi_x,psi_xx");
    for i in 1..field.nx() - 1 {
        let t = field.jet(i, j);
        writeln!(out, "{:?},{:?},{:?},{:?},{:?}", field.xs[i], field.y(i, j), t.v, t.x, t.xx).unwrap();
    }
    out
}

/// Rows of already-formatted values under a header.
pub fn table_csv(columns: &[&str], rows: &[Vec<String>], digest: &str) -> Vec<u8> {
    let mut out = Vec::new();
    csv_header(&mut out, digest, &columns.join(","));
    for r in rows {
        writeln!(out, "{}", r.join(",")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use srl_core::degenerate_solver::uniform_nodes;

    #[test]
    fn grid_round_trip() {
        let f = ScalarField2D::from_fn(uniform_nodes(0.0, 1.0, 5), uniform_nodes(-1.0, 1.0, 3), Grading::Uniform, |x, y| x * x + 0.1 * y);
        let d = "ab".repeat(32);
        let bytes = encode_grid(&f, &d).unwrap();
        assert_eq!(&bytes[..8], b"SRLGRID1");
        let g = decode_grid(&bytes).unwrap();
        assert_eq!(g.digest.as_deref(), Some(d.as_str()));
        let back = field_from(g, FieldLayout { grading: Grading::Uniform, mapping: None }).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(decode_grid(b"NOTGRID0").is_err());
        let f = ScalarField2D::from_fn(uniform_nodes(0.0, 1.0, 3), uniform_nodes(0.0, 1.0, 3), Grading::Uniform, |_, _| 1.0);
        let bytes = encode_grid(&f, &"00".repeat(32)).unwrap();
        assert!(decode_grid(&bytes[..bytes.len() - 50]).is_err());
    }
}

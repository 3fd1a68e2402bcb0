//! Matrix-directory format: one Matrix Market file per coefficient and a
//! `manifest.toml` naming each file's role and frequency function.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{MorError, Result};
use crate::interpolation::{InterpolationCondition, InterpolationPointSet};
use crate::linalg::{CMatrix, QuadEntry, QuadraticOperator};
use crate::projection::{ConditionCheck, ReducedModel};
use crate::system::{
    BivariateMatrixFunction, MatrixFunction, ScalarFn, Structure, StructuredQbSystem,
};
use crate::tf::Work;

pub const MANIFEST: &str = "manifest.toml";

fn io_err(path: &Path, source: std::io::Error) -> MorError {
    MorError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, message: impl Into<String>) -> MorError {
    MorError::Parse {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// Coordinate triplets as `(row, col, value)`, 0-based.
fn write_coordinate(
    path: &Path,
    rows: usize,
    cols: usize,
    entries: &[(usize, usize, C64)],
) -> Result<()> {
    let complex = entries.iter().any(|e| e.2.im != 0.0);
    let mut out = String::new();
    let field = if complex { "complex" } else { "real" };
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field} general");
    let _ = writeln!(out, "{rows} {cols} {}", entries.len());
    for &(i, j, v) in entries {
        if complex {
            let _ = writeln!(out, "{} {} {:.17e} {:.17e}", i + 1, j + 1, v.re, v.im);
        } else {
            let _ = writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v.re);
        }
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn write_matrix_market(path: &Path, m: &CMatrix) -> Result<()> {
    let mut entries = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v.re != 0.0 || v.im != 0.0 {
                entries.push((i, j, v));
            }
        }
    }
    write_coordinate(path, m.nrows(), m.ncols(), &entries)
}

struct Parsed {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, C64)>,
}

fn parse_matrix_market(path: &Path) -> Result<Parsed> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(path, "empty file"))?;
    let h: Vec<String> = header
        .split_whitespace()
        .map(|s| s.to_ascii_lowercase())
        .collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" {
        return Err(parse_err(
            path,
            format!("not a Matrix Market header: {header}"),
        ));
    }
    let coordinate = match h[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(parse_err(path, format!("unsupported format {f}"))),
    };
    let complex = match h[3].as_str() {
        "real" | "integer" => false,
        "complex" => true,
        f => return Err(parse_err(path, format!("unsupported field {f}"))),
    };
    if h[4] != "general" {
        return Err(parse_err(path, format!("unsupported symmetry {}", h[4])));
    }
    let mut body = lines
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size_line = body
        .next()
        .ok_or_else(|| parse_err(path, "missing size line"))?;
    let size: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(path, format!("bad size line: {size_line}")))
        })
        .collect::<Result<_>>()?;
    let num = |t: Option<&str>, line: &str| -> Result<f64> {
        t.ok_or_else(|| parse_err(path, format!("short line: {line}")))?
            .parse::<f64>()
            .map_err(|_| parse_err(path, format!("bad number in: {line}")))
    };
    let idx = |t: Option<&str>, bound: usize, line: &str| -> Result<usize> {
        let v: usize = t
            .ok_or_else(|| parse_err(path, format!("short line: {line}")))?
            .parse()
            .map_err(|_| parse_err(path, format!("bad index in: {line}")))?;
        if v == 0 || v > bound {
            return Err(parse_err(path, format!("index out of range in: {line}")));
        }
        Ok(v - 1)
    };
    let mut entries = Vec::new();
    if coordinate {
        if size.len() != 3 {
            return Err(parse_err(path, "coordinate size line needs rows cols nnz"));
        }
        let (rows, cols, nnz) = (size[0], size[1], size[2]);
        for line in body {
            let mut t = line.split_whitespace();
            let i = idx(t.next(), rows, line)?;
            let j = idx(t.next(), cols, line)?;
            let re = num(t.next(), line)?;
            let im = if complex { num(t.next(), line)? } else { 0.0 };
            entries.push((i, j, C64::new(re, im)));
        }
        if entries.len() != nnz {
            return Err(parse_err(
                path,
                format!("expected {nnz} entries, found {}", entries.len()),
            ));
        }
        Ok(Parsed {
            rows,
            cols,
            entries,
        })
    } else {
        if size.len() != 2 {
            return Err(parse_err(path, "array size line needs rows cols"));
        }
        let (rows, cols) = (size[0], size[1]);
        let mut k = 0;
        for line in body {
            let mut t = line.split_whitespace();
            let re = num(t.next(), line)?;
            let im = if complex { num(t.next(), line)? } else { 0.0 };
            if k >= rows * cols {
                return Err(parse_err(path, "too many array entries"));
            }
            // column-major
            entries.push((k % rows, k / rows, C64::new(re, im)));
            k += 1;
        }
        if k != rows * cols {
            return Err(parse_err(
                path,
                format!("expected {} entries, found {k}", rows * cols),
            ));
        }
        Ok(Parsed {
            rows,
            cols,
            entries,
        })
    }
}

pub fn read_matrix_market(path: &Path) -> Result<CMatrix> {
    let p = parse_matrix_market(path)?;
    let mut m = CMatrix::zeros(p.rows, p.cols);
    for (i, j, v) in p.entries {
        m[(i, j)] += v;
    }
    Ok(m)
}

/// Quadratic operators are stored as `q x n^2` matrices.
pub fn write_quadratic(path: &Path, h: &QuadraticOperator) -> Result<()> {
    let n = h.dim();
    let entries: Vec<(usize, usize, C64)> = h
        .entries()
        .iter()
        .map(|e| (e.slice, e.row * n + e.col, e.value))
        .collect();
    write_coordinate(path, h.rows(), n * n, &entries)
}

pub fn read_quadratic(path: &Path, dim: usize) -> Result<QuadraticOperator> {
    let p = parse_matrix_market(path)?;
    if p.cols != dim * dim {
        return Err(MorError::dims(
            "quadratic operator columns",
            dim * dim,
            p.cols,
        ));
    }
    QuadraticOperator::from_entries(
        p.rows,
        dim,
        p.entries.into_iter().map(|(i, j, v)| QuadEntry {
            slice: i,
            row: j / dim,
            col: j % dim,
            value: v,
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub file: String,
    pub function: ScalarFn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadTermEntry {
    pub file: String,
    pub first: ScalarFn,
    pub second: ScalarFn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputBlock {
    pub terms: Vec<TermEntry>,
}

/// Provenance of a reduced model stored next to its matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionInfo {
    pub method_tag: String,
    pub parent_id: String,
    pub points: InterpolationPointSet,
    pub guaranteed: Vec<InterpolationCondition>,
    pub checks: Vec<ConditionCheck>,
    pub work: Work,
    pub v_file: String,
    pub w_file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub structure: Structure,
    pub c: Vec<TermEntry>,
    pub k: Vec<TermEntry>,
    pub b: Vec<TermEntry>,
    #[serde(default)]
    pub n_blocks: Vec<InputBlock>,
    #[serde(default)]
    pub h: Vec<QuadTermEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionInfo>,
}

fn write_terms(dir: &Path, prefix: &str, f: &MatrixFunction) -> Result<Vec<TermEntry>> {
    f.terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let file = format!("{prefix}_{i}.mtx");
            write_matrix_market(&dir.join(&file), &t.matrix)?;
            Ok(TermEntry {
                file,
                function: t.scalar.clone(),
            })
        })
        .collect()
}

fn manifest_for(dir: &Path, sys: &StructuredQbSystem) -> Result<Manifest> {
    let c = write_terms(dir, "C", &sys.c)?;
    let k = write_terms(dir, "K", &sys.k)?;
    let b = write_terms(dir, "B", &sys.b)?;
    let n_blocks = sys
        .n_blocks
        .iter()
        .enumerate()
        .map(|(j, nb)| {
            Ok(InputBlock {
                terms: write_terms(dir, &format!("N{}", j + 1), nb)?,
            })
        })
        .collect::<Result<_>>()?;
    let h = sys
        .h
        .terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let file = format!("H_{i}.mtx");
            write_quadratic(&dir.join(&file), &t.op)?;
            Ok(QuadTermEntry {
                file,
                first: t.first.clone(),
                second: t.second.clone(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Manifest {
        n: sys.n,
        m: sys.m,
        p: sys.p,
        structure: sys.structure,
        c,
        k,
        b,
        n_blocks,
        h,
        reduction: None,
    })
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let path = dir.join(MANIFEST);
    let text = toml::to_string(manifest).map_err(|e| parse_err(&path, e.to_string()))?;
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn save_system(dir: &Path, sys: &StructuredQbSystem) -> Result<()> {
    ensure_dir(dir)?;
    let manifest = manifest_for(dir, sys)?;
    write_manifest(dir, &manifest)
}

pub fn save_reduced(dir: &Path, red: &ReducedModel) -> Result<()> {
    ensure_dir(dir)?;
    let mut manifest = manifest_for(dir, &red.system)?;
    write_matrix_market(&dir.join("V.mtx"), &red.v)?;
    write_matrix_market(&dir.join("W.mtx"), &red.w)?;
    manifest.reduction = Some(ReductionInfo {
        method_tag: red.method_tag.clone(),
        parent_id: red.parent_id.clone(),
        points: red.points_used.clone(),
        guaranteed: red.guaranteed.clone(),
        checks: red.checks.clone(),
        work: red.work,
        v_file: "V.mtx".into(),
        w_file: "W.mtx".into(),
    });
    write_manifest(dir, &manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    toml::from_str(&text).map_err(|e| parse_err(&path, e.to_string()))
}

fn read_function(
    dir: &Path,
    rows: usize,
    cols: usize,
    terms: &[TermEntry],
) -> Result<MatrixFunction> {
    let mut f = MatrixFunction::new(rows, cols);
    for t in terms {
        f.push(t.function.clone(), read_matrix_market(&dir.join(&t.file))?)?;
    }
    Ok(f)
}

/// Load a system (full or reduced) from a matrix directory.
pub fn load_system(dir: &Path) -> Result<StructuredQbSystem> {
    let man = read_manifest(dir)?;
    let c = read_function(dir, man.p, man.n, &man.c)?;
    let k = read_function(dir, man.n, man.n, &man.k)?;
    let b = read_function(dir, man.n, man.m, &man.b)?;
    let n_blocks = man
        .n_blocks
        .iter()
        .map(|blk| read_function(dir, man.n, man.n, &blk.terms))
        .collect::<Result<Vec<_>>>()?;
    let mut h = BivariateMatrixFunction::new(man.n, man.n);
    for t in &man.h {
        h.push(
            t.first.clone(),
            t.second.clone(),
            read_quadratic(&dir.join(&t.file), man.n)?,
        )?;
    }
    StructuredQbSystem::new(c, k, b, n_blocks, h, man.structure)
}

/// Load a reduced model together with its bases and provenance.
pub fn load_reduced(dir: &Path) -> Result<ReducedModel> {
    let man = read_manifest(dir)?;
    let info = man
        .reduction
        .ok_or_else(|| parse_err(&dir.join(MANIFEST), "no [reduction] section"))?;
    Ok(ReducedModel {
        system: load_system(dir)?,
        v: read_matrix_market(&dir.join(&info.v_file))?,
        w: read_matrix_market(&dir.join(&info.w_file))?,
        method_tag: info.method_tag,
        parent_id: info.parent_id,
        points_used: info.points,
        guaranteed: info.guaranteed,
        checks: info.checks,
        work: info.work,
    })
}

/// `time,y1,...,yp` with full precision.
pub fn trajectory_csv(times: &[f64], outputs: &crate::linalg::RMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| MorError::InvalidInput(format!("csv: {e}"));
    let mut header = vec!["time".to_string()];
    header.extend((1..=outputs.nrows()).map(|j| format!("y{j}")));
    w.write_record(&header).map_err(err)?;
    for (t, &time) in times.iter().enumerate() {
        let mut rec = vec![format!("{time:.17e}")];
        rec.extend((0..outputs.nrows()).map(|j| format!("{:.17e}", outputs[(j, t)])));
        w.write_record(&rec).map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| MorError::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            ensure_dir(parent)?;
        }
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// File-system friendly version of a method tag, e.g. `SymInt(V,equi)` -> `symint_v_equi`.
pub fn tag_slug(tag: &str) -> String {
    let mut s: String = tag
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

//! MatrixMarket coordinate matrices and plain right-hand-side vectors.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A symmetric matrix as read from a file: diagonal plus strictly upper
/// triangular entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEntries {
    pub n: usize,
    pub diag: Vec<f64>,
    pub upper: Vec<(usize, usize, f64)>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads `%%MatrixMarket matrix coordinate (real|integer) (symmetric|general)`.
/// General matrices must be numerically symmetric.
pub fn read_matrix_market(reader: impl BufRead) -> Result<SymmetricEntries> {
    let mut lines = reader.lines().enumerate();
    let (_, banner) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let banner = banner?.to_lowercase();
    let toks: Vec<&str> = banner.split_whitespace().collect();
    if toks.len() != 5
        || toks[0] != "%%matrixmarket"
        || toks[1] != "matrix"
        || toks[2] != "coordinate"
    {
        return Err(perr(1, "expected a MatrixMarket coordinate banner"));
    }
    if toks[3] != "real" && toks[3] != "integer" {
        return Err(perr(1, "only real and integer fields are supported"));
    }
    let symmetric = match toks[4] {
        "symmetric" => true,
        "general" => false,
        _ => return Err(perr(1, "only symmetric and general matrices are supported")),
    };
    let mut size: Option<(usize, usize)> = None;
    let mut seen = 0usize;
    let mut diag = Vec::new();
    let mut off = std::collections::BTreeMap::<(usize, usize), f64>::new();
    for (k, line) in lines {
        let line = line?;
        let lno = k + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if f.len() != 3 {
                    return Err(perr(lno, "expected `rows cols nnz`"));
                }
                let r: usize = f[0].parse().map_err(|_| perr(lno, "bad row count"))?;
                let c: usize = f[1].parse().map_err(|_| perr(lno, "bad column count"))?;
                let nnz: usize = f[2].parse().map_err(|_| perr(lno, "bad entry count"))?;
                if r != c {
                    return Err(perr(lno, "matrix is not square"));
                }
                diag = vec![0.0; r];
                size = Some((r, nnz));
            }
            Some((n, _)) => {
                if f.len() != 3 {
                    return Err(perr(lno, "expected `i j value`"));
                }
                let i: usize = f[0].parse().map_err(|_| perr(lno, "bad row index"))?;
                let j: usize = f[1].parse().map_err(|_| perr(lno, "bad column index"))?;
                let v: f64 = f[2].parse().map_err(|_| perr(lno, "bad value"))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(perr(lno, "index out of range"));
                }
                let (i, j) = (i - 1, j - 1);
                seen += 1;
                if i == j {
                    diag[i] += v;
                } else if symmetric {
                    *off.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
                } else {
                    // store both triangles, check agreement below
                    *off.entry((i, j)).or_insert(0.0) += v;
                }
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| perr(2, "missing size line"))?;
    if seen != nnz {
        return Err(perr(0, format!("expected {nnz} entries, found {seen}")));
    }
    let upper = if symmetric {
        off.into_iter().map(|((i, j), v)| (i, j, v)).collect()
    } else {
        let mut out = Vec::new();
        for (&(i, j), &v) in &off {
            let other = off.get(&(j, i)).copied().unwrap_or(0.0);
            if v != other {
                return Err(Error::Parameter(format!(
                    "matrix is not symmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            if i < j {
                out.push((i, j, v));
            }
        }
        out
    };
    Ok(SymmetricEntries { n, diag, upper })
}

/// Writes a symmetric coordinate file (lower triangle, as the format asks).
pub fn write_matrix_market(mut out: impl Write, m: &SymmetricEntries) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    let nnz = m.diag.iter().filter(|v| **v != 0.0).count() + m.upper.len();
    writeln!(out, "{} {} {}", m.n, m.n, nnz)?;
    for (i, v) in m.diag.iter().enumerate() {
        if *v != 0.0 {
            writeln!(out, "{} {} {:e}", i + 1, i + 1, v)?;
        }
    }
    for (i, j, v) in &m.upper {
        writeln!(out, "{} {} {:e}", j + 1, i + 1, v)?;
    }
    Ok(())
}

/// Reads a vector: either a MatrixMarket `array` file or whitespace
/// separated numbers.
pub fn read_vector(reader: impl BufRead) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut array_header_pending = false;
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if k == 0 && t.to_lowercase().starts_with("%%matrixmarket") {
            if !t.to_lowercase().contains("array") {
                return Err(perr(1, "vector files must use the array format"));
            }
            array_header_pending = true;
            continue;
        }
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        if array_header_pending {
            array_header_pending = false;
            continue;
        }
        for tok in t.split_whitespace() {
            out.push(
                tok.parse()
                    .map_err(|_| perr(k + 1, format!("bad number `{tok}`")))?,
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_round_trip() {
        let m = SymmetricEntries {
            n: 3,
            diag: vec![2.0, 3.0, 1.5],
            upper: vec![(0, 1, -1.0), (1, 2, 0.5)],
        };
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &m).unwrap();
        assert_eq!(read_matrix_market(&buf[..]).unwrap(), m);
    }

    #[test]
    fn general_must_be_symmetric() {
        let ok =
            "%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 2\n2 2 2\n1 2 -1\n2 1 -1\n";
        let m = read_matrix_market(ok.as_bytes()).unwrap();
        assert_eq!(m.upper, vec![(0, 1, -1.0)]);
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 2\n2 2 2\n1 2 -1\n";
        assert!(read_matrix_market(bad.as_bytes()).is_err());
    }

    #[test]
    fn vectors() {
        assert_eq!(
            read_vector("1 2\n3\n".as_bytes()).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        let arr = "%%MatrixMarket matrix array real general\n% c\n2 1\n4.5\n-1\n";
        assert_eq!(read_vector(arr.as_bytes()).unwrap(), vec![4.5, -1.0]);
    }
}

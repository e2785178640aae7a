use std::io::{BufRead, Write};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Writes a real general coordinate Matrix Market file (1-based indices).
pub fn write_matrix_market<W: Write>(m: &CsrMatrix, mut w: W) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty Matrix Market input".into()))??;
    let h = header.to_ascii_lowercase();
    if !h.starts_with("%%matrixmarket matrix coordinate real general") {
        return Err(Error::Parse(format!("unsupported Matrix Market header: {header}")));
    }
    let mut size: Option<(usize, usize, usize)> = None;
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut seen = 0;
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let bad = || Error::Parse(format!("malformed Matrix Market line: {t}"));
        match size {
            None => {
                let [m, n, nnz] = fields[..] else { return Err(bad()) };
                let parsed =
                    (m.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?, nnz.parse().map_err(|_| bad())?);
                rows = vec![Vec::new(); parsed.0];
                size = Some(parsed);
            }
            Some((m, n, _)) => {
                let [i, j, v] = fields[..] else { return Err(bad()) };
                let i: usize = i.parse().map_err(|_| bad())?;
                let j: usize = j.parse().map_err(|_| bad())?;
                let v: f64 = v.parse().map_err(|_| bad())?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(bad());
                }
                rows[i - 1].push((j - 1, v));
                seen += 1;
            }
        }
    }
    let (_, n, nnz) = size.ok_or_else(|| Error::Parse("missing Matrix Market size line".into()))?;
    if seen != nnz {
        return Err(Error::Parse(format!("expected {nnz} entries, found {seen}")));
    }
    CsrMatrix::from_rows(n, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let m = CsrMatrix::from_rows(3, vec![vec![(0, 0.1), (2, -1.0 / 3.0)], vec![], vec![(1, 1e-300)]]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        let back = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_matrix_market("%%MatrixMarket matrix array real general\n".as_bytes()).is_err());
        let short = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n";
        assert!(read_matrix_market(short.as_bytes()).is_err());
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(read_matrix_market(oob.as_bytes()).is_err());
    }
}

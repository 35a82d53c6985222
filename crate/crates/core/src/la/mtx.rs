//! Matrix Market `coordinate real general` reader and writer.

use std::io::{BufRead, Write};

use super::{LaError, SparseMatrix, TripletBuilder};

pub fn write_mtx<W: Write>(a: &SparseMatrix, mut w: W) -> Result<(), LaError> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (c, v) = a.row(i);
        for (&j, &x) in c.iter().zip(v) {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, x)?;
        }
    }
    Ok(())
}

pub fn write_mtx_file(a: &SparseMatrix, path: &std::path::Path) -> Result<(), LaError> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mtx(a, f)
}

pub fn read_mtx<R: BufRead>(r: R) -> Result<SparseMatrix, LaError> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or(LaError::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let header = header?.to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(LaError::Parse {
            line: 1,
            msg: "missing %%MatrixMarket matrix header".into(),
        });
    }
    if fields[2] != "coordinate" || fields[3] != "real" || fields[4] != "general" {
        return Err(LaError::Parse {
            line: 1,
            msg: format!("unsupported format '{} {} {}'", fields[2], fields[3], fields[4]),
        });
    }
    let mut builder: Option<(TripletBuilder, usize)> = None;
    let mut seen = 0usize;
    for (no, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parse_err = |msg: &str| LaError::Parse {
            line: no + 1,
            msg: msg.to_string(),
        };
        let parts: Vec<&str> = t.split_whitespace().collect();
        match &mut builder {
            None => {
                if parts.len() != 3 {
                    return Err(parse_err("expected 'rows cols nnz'"));
                }
                let dims: Vec<usize> = parts
                    .iter()
                    .map(|p| p.parse().map_err(|_| parse_err("bad size line")))
                    .collect::<Result<_, _>>()?;
                builder = Some((TripletBuilder::with_capacity(dims[0], dims[1], dims[2]), dims[2]));
            }
            Some((b, nnz)) => {
                if parts.len() != 3 {
                    return Err(parse_err("expected 'i j value'"));
                }
                let i: usize = parts[0].parse().map_err(|_| parse_err("bad row index"))?;
                let j: usize = parts[1].parse().map_err(|_| parse_err("bad column index"))?;
                let v: f64 = parts[2].parse().map_err(|_| parse_err("bad value"))?;
                if i == 0 || j == 0 || i > b.nrows_hint() || j > b.ncols_hint() {
                    return Err(parse_err("index out of range"));
                }
                if seen == *nnz {
                    return Err(parse_err("more entries than declared"));
                }
                b.add(i - 1, j - 1, v);
                seen += 1;
            }
        }
    }
    match builder {
        Some((b, nnz)) if nnz == seen => Ok(b.build()),
        Some(_) => Err(LaError::Parse {
            line: 0,
            msg: format!("fewer entries than declared ({seen})"),
        }),
        None => Err(LaError::Parse {
            line: 0,
            msg: "missing size line".into(),
        }),
    }
}

pub fn read_mtx_file(path: &std::path::Path) -> Result<SparseMatrix, LaError> {
    read_mtx(std::io::BufReader::new(std::fs::File::open(path)?))
}

impl TripletBuilder {
    fn nrows_hint(&self) -> usize {
        self.shape().0
    }
    fn ncols_hint(&self) -> usize {
        self.shape().1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut b = TripletBuilder::new(3, 2);
        b.add(0, 1, 0.1);
        b.add(2, 0, -1.0 / 3.0);
        b.add(1, 1, 6.02214076e23);
        let a = b.build();
        let mut buf = Vec::new();
        write_mtx(&a, &mut buf).unwrap();
        let back = read_mtx(buf.as_slice()).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn rejects_symmetric_and_bad_counts() {
        let s = "%%MatrixMarket matrix coordinate real symmetric\n1 1 1\n1 1 2.0\n";
        assert!(read_mtx(s.as_bytes()).is_err());
        let s = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2.0\n";
        assert!(read_mtx(s.as_bytes()).is_err());
        let s = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 2.0\n";
        assert!(read_mtx(s.as_bytes()).is_err());
    }
}

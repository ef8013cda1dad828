use std::io::{self, Write};

use super::CsrMatrix;

/// Writes a symmetric matrix in Matrix Market coordinate format: the
/// `real symmetric` banner, an optional comment line, the size line and the
/// lower-triangular entries with 1-based indices. Values use 17 significant
/// digits, enough to reproduce every `f64` exactly.
pub fn write_matrix_market<W: Write>(out: &mut W, m: &CsrMatrix, comment: Option<&str>) -> io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "% {line}")?;
        }
    }
    let lower: Vec<(usize, usize, f64)> = m.triplets().filter(|&(i, j, _)| j <= i).collect();
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), lower.len())?;
    for (i, j, v) in lower {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_text() {
        let m = CsrMatrix::from_dense(&[vec![6.0, -3.0], vec![-3.0, 6.0]]);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &m, Some("K_p")).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "%%MatrixMarket matrix coordinate real symmetric\n% K_p\n2 2 3\n\
             1 1 6.0000000000000000e0\n2 1 -3.0000000000000000e0\n2 2 6.0000000000000000e0\n"
        );
    }

    #[test]
    fn values_round_trip() {
        let v = 1.0 / 3.0;
        let m = CsrMatrix::from_dense(&[vec![v]]);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &m, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        let parsed: f64 = last.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert_eq!(parsed, v);
    }
}

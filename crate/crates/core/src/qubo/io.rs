//! Plain-text model files.
//!
//! QUBO: a header line `n offset`, then one `i j value` line per nonzero
//! upper-triangular entry (0-based). Ising: the same header, a `J` line
//! followed by `i j value` couplings, then an `h` line followed by
//! `i value` fields. Reals are written with 17 significant digits so a
//! write/read cycle is bit-exact.

use std::io::{BufRead, Write};

use super::{IsingModel, QuboError, QuboModel};

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_qubo<W: Write>(m: &QuboModel, mut w: W) -> Result<(), QuboError> {
    writeln!(w, "{} {}", m.n(), real(m.offset()))?;
    for (i, j, v) in m.nonzeros() {
        writeln!(w, "{i} {j} {}", real(v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_ising<W: Write>(m: &IsingModel, mut w: W) -> Result<(), QuboError> {
    writeln!(w, "{} {}", m.n(), real(m.offset()))?;
    writeln!(w, "J")?;
    for (a, b, v) in m.couplings() {
        writeln!(w, "{a} {b} {}", real(v))?;
    }
    writeln!(w, "h")?;
    for (a, &v) in m.field().iter().enumerate() {
        if v != 0.0 {
            writeln!(w, "{a} {}", real(v))?;
        }
    }
    w.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(r: R) -> Self {
        Self {
            inner: r.lines(),
            line: 0,
        }
    }

    /// Next non-blank line, trimmed.
    fn next(&mut self) -> Result<Option<String>, QuboError> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok(Some(t.to_owned()));
            }
        }
        Ok(None)
    }

    fn err(&self, msg: impl Into<String>) -> QuboError {
        QuboError::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn header(&mut self) -> Result<(usize, f64), QuboError> {
        let h = self.next()?.ok_or_else(|| self.err("missing header"))?;
        let mut it = h.split_whitespace();
        let n = self.field::<usize>(it.next(), "n")?;
        let offset = self.field::<f64>(it.next(), "offset")?;
        if it.next().is_some() {
            return Err(self.err("trailing tokens in header"));
        }
        Ok((n, offset))
    }

    fn field<T: std::str::FromStr>(&self, tok: Option<&str>, what: &str) -> Result<T, QuboError> {
        let tok = tok.ok_or_else(|| self.err(format!("missing {what}")))?;
        tok.parse()
            .map_err(|_| self.err(format!("bad {what}: {tok:?}")))
    }

    fn index(&self, tok: Option<&str>, n: usize) -> Result<usize, QuboError> {
        let i: usize = self.field(tok, "index")?;
        if i >= n {
            return Err(QuboError::IndexOutOfRange { index: i, n });
        }
        Ok(i)
    }
}

pub fn read_qubo<R: BufRead>(r: R) -> Result<QuboModel, QuboError> {
    let mut lines = Lines::new(r);
    let (n, offset) = lines.header()?;
    let mut m = QuboModel::zeros(n);
    m.set_offset(offset);
    while let Some(l) = lines.next()? {
        let mut it = l.split_whitespace();
        let i = lines.index(it.next(), n)?;
        let j = lines.index(it.next(), n)?;
        let v: f64 = lines.field(it.next(), "value")?;
        if i > j {
            return Err(QuboError::LowerTriangle(i, j));
        }
        m.add(i, j, v);
    }
    Ok(m)
}

pub fn read_ising<R: BufRead>(r: R) -> Result<IsingModel, QuboError> {
    let mut lines = Lines::new(r);
    let (n, offset) = lines.header()?;
    let mut m = IsingModel::zeros(n);
    m.add_offset(offset);
    #[derive(PartialEq)]
    enum Section {
        None,
        Couplings,
        Fields,
    }
    let mut section = Section::None;
    while let Some(l) = lines.next()? {
        match l.as_str() {
            "J" => section = Section::Couplings,
            "h" => section = Section::Fields,
            _ => {
                let mut it = l.split_whitespace();
                match section {
                    Section::None => return Err(lines.err("entry outside a J/h section")),
                    Section::Couplings => {
                        let a = lines.index(it.next(), n)?;
                        let b = lines.index(it.next(), n)?;
                        let v: f64 = lines.field(it.next(), "value")?;
                        if a >= b {
                            return Err(QuboError::LowerTriangle(a, b));
                        }
                        m.add_coupling(a, b, v);
                    }
                    Section::Fields => {
                        let a = lines.index(it.next(), n)?;
                        let v: f64 = lines.field(it.next(), "value")?;
                        m.add_field(a, v);
                    }
                }
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::ising_from_qubo;

    #[test]
    fn qubo_text_roundtrip_is_bit_exact() {
        let mut m = QuboModel::zeros(3);
        m.add(0, 0, 0.1);
        m.add(0, 2, -1.0 / 3.0);
        m.add(1, 2, 1e-300);
        m.set_offset(std::f64::consts::PI);
        let mut buf = Vec::new();
        write_qubo(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 3.1415926535897931e0\n"), "{text}");
        assert_eq!(read_qubo(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn ising_text_roundtrip() {
        let mut q = QuboModel::zeros(3);
        q.add(0, 1, 0.7);
        q.add(1, 1, -0.3);
        q.add(0, 2, 2.0 / 7.0);
        let is = ising_from_qubo(&q);
        let mut buf = Vec::new();
        write_ising(&is, &mut buf).unwrap();
        assert_eq!(read_ising(buf.as_slice()).unwrap(), is);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(read_qubo("".as_bytes()), Err(QuboError::Parse { .. })));
        assert!(matches!(
            read_qubo("2 0\n1 0 1.0\n".as_bytes()),
            Err(QuboError::LowerTriangle(1, 0))
        ));
        assert!(matches!(
            read_qubo("2 0\n0 2 1.0\n".as_bytes()),
            Err(QuboError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            read_qubo("2 0\n0 1 abc\n".as_bytes()),
            Err(QuboError::Parse { line: 2, .. })
        ));
        assert!(read_ising("2 0\n0 1 1.0\n".as_bytes()).is_err());
    }
}

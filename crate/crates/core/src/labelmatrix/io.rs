//! Text format: a `labelmatrix v1 <n_rows> <n_cols>` header, then one line per row of
//! space-separated ascending column indices (an empty line is an empty row). UTF-8, LF.

use super::{Builder, LabelMatrix};
use crate::dense::parse_header;
use crate::error::{Error, Result};
use std::io::{BufRead, Write};

impl LabelMatrix {
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "labelmatrix v1 {} {}", self.n_rows, self.n_cols)?;
        let mut line = String::new();
        for row in self.rows() {
            line.clear();
            for (k, c) in row.iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                line.push_str(&c.to_string());
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(mut r: R) -> Result<LabelMatrix> {
        let mut line = String::new();
        let mut lineno = 1;
        if read_lf_line(&mut r, &mut line, lineno)? == 0 {
            return Err(Error::Parse {
                line: 1,
                msg: "missing header".into(),
            });
        }
        let (n_rows, n_cols) = parse_header(&line, "labelmatrix")?;
        let mut builder = Builder::new(n_cols)?;
        let mut row: Vec<u32> = Vec::new();
        for i in 0..n_rows {
            lineno += 1;
            if read_lf_line(&mut r, &mut line, lineno)? == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {n_rows} rows, found {i}"),
                });
            }
            row.clear();
            for tok in line.split(' ').filter(|t| !t.is_empty()) {
                let c: u32 = tok.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("bad column index {tok:?}"),
                })?;
                if c as usize >= n_cols {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("column {c} out of range for {n_cols} columns"),
                    });
                }
                if row.last().is_some_and(|&p| p >= c) {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "column indices must be strictly ascending".into(),
                    });
                }
                row.push(c);
            }
            builder.push_sorted(row.iter().copied());
        }
        lineno += 1;
        if read_lf_line(&mut r, &mut line, lineno)? != 0 {
            return Err(Error::Parse {
                line: lineno,
                msg: "trailing content after last row".into(),
            });
        }
        Ok(builder.finish())
    }
}

/// Reads one LF-terminated line into `buf` without the terminator. Returns the number of
/// bytes consumed (0 at end of input). Carriage returns are rejected.
fn read_lf_line<R: BufRead>(r: &mut R, buf: &mut String, lineno: usize) -> Result<usize> {
    buf.clear();
    let n = r.read_line(buf)?;
    if buf.ends_with('\n') {
        buf.pop();
    }
    if buf.contains('\r') {
        return Err(Error::Parse {
            line: lineno,
            msg: "carriage return in input; the format uses LF line endings".into(),
        });
    }
    Ok(n)
}

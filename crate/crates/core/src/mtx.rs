//! MatrixMarket exchange format.
//!
//! Both `coordinate` and `array` layouts with `real`, `integer`, `complex`
//! and `pattern` fields and every symmetry kind are read. Values are kept
//! as decimal text until converted, so extended-precision targets receive
//! the file's digits rather than a rounded double. Writers render doubles
//! in shortest round-trip form, so a write/read cycle is bit-exact.

use std::fmt::{self, Write as _};
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{Precision, Real, Scalar};
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Header {
    pub layout: Layout,
    pub field: Field,
    pub symmetry: Symmetry,
}

impl fmt::Display for Header {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let layout = match self.layout {
            Layout::Coordinate => "coordinate",
            Layout::Array => "array",
        };
        let field = match self.field {
            Field::Real => "real",
            Field::Integer => "integer",
            Field::Complex => "complex",
            Field::Pattern => "pattern",
        };
        let symmetry = match self.symmetry {
            Symmetry::General => "general",
            Symmetry::Symmetric => "symmetric",
            Symmetry::SkewSymmetric => "skew-symmetric",
            Symmetry::Hermitian => "hermitian",
        };
        write!(f, "%%MatrixMarket matrix {layout} {field} {symmetry}")
    }
}

/// One stored value as it appeared in the file.
#[derive(Clone, Debug, PartialEq)]
struct RawValue {
    re: String,
    im: Option<String>,
}

/// Parsed file contents with symmetric storage expanded to full form.
#[derive(Clone, Debug, PartialEq)]
pub struct MtxFile {
    pub header: Header,
    pub rows: usize,
    pub cols: usize,
    /// 0-based `(row, col)` positions, in file order followed by mirrored
    /// entries.
    entries: Vec<(usize, usize, RawValue, Mirror)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mirror {
    No,
    Same,
    Negate,
    Conjugate,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<Header> {
    let words: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected `%%MatrixMarket matrix <layout> <field> <symmetry>`",
        ));
    }
    let layout = match words[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unknown layout `{other}`"))),
    };
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unknown field `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(1, format!("unknown symmetry `{other}`"))),
    };
    if layout == Layout::Array && field == Field::Pattern {
        return Err(parse_err(1, "pattern field needs coordinate layout"));
    }
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(parse_err(1, "hermitian symmetry needs a complex field"));
    }
    Ok(Header {
        layout,
        field,
        symmetry,
    })
}

impl MtxFile {
    pub fn parse(reader: impl Read) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => parse_header(&line?)?,
            None => return Err(parse_err(1, "empty input")),
        };
        let mut data = Vec::new();
        for (n, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            data.push((n + 1, t.to_string()));
        }
        let mut data = data.into_iter();
        let (size_line, size) = data
            .next()
            .ok_or_else(|| parse_err(1, "missing size line"))?;
        let dims: Vec<usize> = size
            .split_whitespace()
            .map(|w| {
                w.parse()
                    .map_err(|_| parse_err(size_line, format!("bad size `{w}`")))
            })
            .collect::<Result<_>>()?;
        let want = if header.layout == Layout::Coordinate {
            3
        } else {
            2
        };
        if dims.len() != want {
            return Err(parse_err(
                size_line,
                format!("size line needs {want} integers"),
            ));
        }
        let (rows, cols) = (dims[0], dims[1]);
        if rows == 0 || cols == 0 {
            return Err(parse_err(size_line, "empty matrix"));
        }
        if header.symmetry != Symmetry::General && rows != cols {
            return Err(parse_err(
                size_line,
                "symmetric storage needs a square matrix",
            ));
        }
        let mirror = match header.symmetry {
            Symmetry::General => Mirror::No,
            Symmetry::Symmetric => Mirror::Same,
            Symmetry::SkewSymmetric => Mirror::Negate,
            Symmetry::Hermitian => Mirror::Conjugate,
        };
        let positions: Box<dyn Iterator<Item = (usize, usize)>> = match header.layout {
            Layout::Coordinate => Box::new(std::iter::empty()),
            Layout::Array => {
                // Column-major; symmetric kinds store the lower triangle only.
                let skip_diag = header.symmetry == Symmetry::SkewSymmetric;
                let general = header.symmetry == Symmetry::General;
                Box::new((0..cols).flat_map(move |j| {
                    (0..rows).filter_map(move |i| {
                        (general || i > j || (i == j && !skip_diag)).then_some((i, j))
                    })
                }))
            }
        };
        let per_value = match header.field {
            Field::Complex => 2,
            Field::Pattern => 0,
            _ => 1,
        };
        let mut entries = Vec::new();
        let mut push = |i: usize, j: usize, v: RawValue| {
            let m = if i == j { Mirror::No } else { mirror };
            entries.push((i, j, v, m));
        };
        match header.layout {
            Layout::Coordinate => {
                let nnz = dims[2];
                for _ in 0..nnz {
                    let (ln, text) = data
                        .next()
                        .ok_or_else(|| parse_err(size_line, format!("expected {nnz} entries")))?;
                    let words: Vec<&str> = text.split_whitespace().collect();
                    if words.len() != 2 + per_value {
                        return Err(parse_err(ln, format!("expected {} fields", 2 + per_value)));
                    }
                    let index = |w: &str, bound: usize| -> Result<usize> {
                        match w.parse::<usize>() {
                            Ok(k) if (1..=bound).contains(&k) => Ok(k - 1),
                            _ => Err(parse_err(
                                ln,
                                format!("index `{w}` out of range 1..={bound}"),
                            )),
                        }
                    };
                    let (i, j) = (index(words[0], rows)?, index(words[1], cols)?);
                    if mirror != Mirror::No && i < j {
                        return Err(parse_err(
                            ln,
                            "symmetric storage must list the lower triangle",
                        ));
                    }
                    if mirror == Mirror::Negate && i == j {
                        return Err(parse_err(ln, "skew-symmetric storage has no diagonal"));
                    }
                    push(i, j, raw_value(&words[2..], header.field, ln)?);
                }
            }
            Layout::Array => {
                for (i, j) in positions {
                    let (ln, text) = data
                        .next()
                        .ok_or_else(|| parse_err(size_line, "too few array entries"))?;
                    let words: Vec<&str> = text.split_whitespace().collect();
                    if words.len() != per_value {
                        return Err(parse_err(ln, format!("expected {per_value} fields")));
                    }
                    push(i, j, raw_value(&words, header.field, ln)?);
                }
            }
        }
        if let Some((ln, _)) = data.next() {
            return Err(parse_err(ln, "unexpected data after the last entry"));
        }
        Ok(Self {
            header,
            rows,
            cols,
            entries,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(fs::File::open(path)?)
    }

    /// Expanded `(row, col, value)` triplets at `precision`. Complex values
    /// in a file read into a real type are an error unless their imaginary
    /// parts are zero.
    pub fn triplets<T: Scalar>(&self, precision: Precision) -> Result<Vec<(usize, usize, T)>> {
        let num = |s: &str| {
            T::Real::parse_decimal(s, precision)
                .ok_or_else(|| parse_err(0, format!("bad number `{s}`")))
        };
        let mut out = Vec::with_capacity(self.entries.len() * 2);
        for (i, j, raw, mirror) in &self.entries {
            let re = num(&raw.re)?;
            let im = match &raw.im {
                Some(s) => num(s)?,
                None => T::Real::zero(),
            };
            if !T::COMPLEX && !im.is_zero() {
                return Err(Error::InvalidInput(
                    "complex entries cannot be read into a real matrix".into(),
                ));
            }
            let v = T::from_parts(re, im);
            match mirror {
                Mirror::No => {}
                Mirror::Same => out.push((*j, *i, v.clone())),
                Mirror::Negate => out.push((*j, *i, -v.clone())),
                Mirror::Conjugate => out.push((*j, *i, v.conj())),
            }
            out.push((*i, *j, v));
        }
        Ok(out)
    }

    pub fn to_dense<T: Scalar>(&self, precision: Precision) -> Result<DenseMatrix<T>> {
        let mut m = DenseMatrix::<T>::zeros(self.rows, self.cols, precision);
        for (i, j, v) in self.triplets::<T>(precision)? {
            m[(i, j)] = m[(i, j)].clone() + v;
        }
        Ok(m)
    }

    pub fn to_csr<T: Scalar>(&self, precision: Precision) -> Result<CsrMatrix<T>> {
        CsrMatrix::from_triplets(self.rows, self.cols, self.triplets(precision)?, precision)
    }
}

fn raw_value(words: &[&str], field: Field, line: usize) -> Result<RawValue> {
    let check = |w: &str| -> Result<String> {
        let ok = match field {
            Field::Integer => w.parse::<i64>().is_ok(),
            _ => w.parse::<f64>().is_ok(),
        };
        if ok {
            Ok(w.to_string())
        } else {
            Err(parse_err(line, format!("bad number `{w}`")))
        }
    };
    Ok(match field {
        Field::Pattern => RawValue {
            re: "1".into(),
            im: None,
        },
        Field::Complex => RawValue {
            re: check(words[0])?,
            im: Some(check(words[1])?),
        },
        Field::Real | Field::Integer => RawValue {
            re: check(words[0])?,
            im: None,
        },
    })
}

pub fn read_dense<T: Scalar>(
    path: impl AsRef<Path>,
    precision: Precision,
) -> Result<DenseMatrix<T>> {
    MtxFile::read(path)?.to_dense(precision)
}

pub fn read_csr<T: Scalar>(path: impl AsRef<Path>, precision: Precision) -> Result<CsrMatrix<T>> {
    MtxFile::read(path)?.to_csr(precision)
}

fn render<T: Scalar>(v: &T) -> String {
    if T::COMPLEX {
        format!("{} {}", v.re().to_decimal(None), v.im().to_decimal(None))
    } else {
        v.re().to_decimal(None)
    }
}

fn field_of<T: Scalar>() -> Field {
    if T::COMPLEX {
        Field::Complex
    } else {
        Field::Real
    }
}

/// Writes a dense matrix as a general `array` file.
pub fn write_dense<T: Scalar>(w: &mut impl Write, m: &DenseMatrix<T>) -> Result<()> {
    let header = Header {
        layout: Layout::Array,
        field: field_of::<T>(),
        symmetry: Symmetry::General,
    };
    let mut out = format!("{header}\n{} {}\n", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let _ = writeln!(out, "{}", render(&m[(i, j)]));
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

/// Writes a sparse matrix as a general `coordinate` file.
pub fn write_csr<T: Scalar>(w: &mut impl Write, m: &CsrMatrix<T>) -> Result<()> {
    let header = Header {
        layout: Layout::Coordinate,
        field: field_of::<T>(),
        symmetry: Symmetry::General,
    };
    let mut out = format!("{header}\n{} {} {}\n", m.rows(), m.cols(), m.nnz());
    for (i, j, v) in m.triplets() {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, render(v));
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn write_dense_file<T: Scalar>(path: impl AsRef<Path>, m: &DenseMatrix<T>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write_dense(&mut f, m)
}

pub fn write_csr_file<T: Scalar>(path: impl AsRef<Path>, m: &CsrMatrix<T>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    write_csr(&mut f, m)
}

/// Reads a one-column array file as a vector.
pub fn read_vector<T: Scalar>(path: impl AsRef<Path>, precision: Precision) -> Result<Vec<T>> {
    let m: DenseMatrix<T> = read_dense(path, precision)?;
    if m.cols() != 1 {
        return Err(Error::InvalidInput(format!(
            "expected a single column, got {} columns",
            m.cols()
        )));
    }
    Ok(m.into_data())
}

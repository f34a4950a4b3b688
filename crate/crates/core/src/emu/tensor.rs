//! Quantized tensors and their text serialization.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// An INT8 tensor with a power-of-two scale: element `v` represents the
/// real value `v * 2^scale_exp`.
///
/// Activations use NHWC order (3 dims are read as HWC with N = 1).
/// Standard convolution weights use KKIO order (kh, kw, ic, oc), depthwise
/// weights KKC (kh, kw, c). Data is row-major over `dims` in all cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QTensor {
    pub dims: Vec<usize>,
    pub data: Vec<i8>,
    pub scale_exp: i32,
}

impl QTensor {
    pub fn new(dims: Vec<usize>, data: Vec<i8>, scale_exp: i32) -> Result<Self> {
        if dims.is_empty() || dims.len() > 4 {
            return Err(Error::shape(format!("tensors have 1 to 4 dims, got {}", dims.len())));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::shape(format!("zero-sized dim in {dims:?}")));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::shape(format!(
                "dims {dims:?} need {len} elements, got {}",
                data.len()
            )));
        }
        Ok(QTensor { dims, data, scale_exp })
    }

    pub fn zeros(dims: Vec<usize>, scale_exp: i32) -> Result<Self> {
        let len = dims.iter().product();
        QTensor::new(dims, vec![0; len], scale_exp)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// (n, h, w, c) view of an activation tensor; 3 dims mean batch 1.
    pub fn nhwc(&self) -> Result<(usize, usize, usize, usize)> {
        match self.dims[..] {
            [h, w, c] => Ok((1, h, w, c)),
            [n, h, w, c] => Ok((n, h, w, c)),
            _ => Err(Error::shape(format!("activation tensor needs 3 or 4 dims, got {:?}", self.dims))),
        }
    }

    /// Element of an activation tensor by NHWC coordinates.
    pub fn at(&self, shape: (usize, usize, usize, usize), n: usize, h: usize, w: usize, c: usize) -> i8 {
        let (_, sh, sw, sc) = shape;
        self.data[((n * sh + h) * sw + w) * sc + c]
    }

    /// Writes the `qtensor v1` text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("qtensor v1\n");
        out.push_str("dims:");
        for d in &self.dims {
            let _ = write!(out, " {d}");
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "scale_exp: {}", self.scale_exp);
        for (i, v) in self.data.iter().enumerate() {
            let sep = if (i + 1) % 16 == 0 || i + 1 == self.data.len() { '\n' } else { ' ' };
            let _ = write!(out, "{v}{sep}");
        }
        out
    }

    /// Parses the `qtensor v1` text form.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let parse_err = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };

        let (i, magic) = lines.next().ok_or_else(|| parse_err(0, "empty tensor file"))?;
        if magic.trim() != "qtensor v1" {
            return Err(parse_err(i, "expected header `qtensor v1`"));
        }
        let (i, dims_line) = lines.next().ok_or_else(|| parse_err(1, "missing dims line"))?;
        let dims: Vec<usize> = dims_line
            .strip_prefix("dims:")
            .ok_or_else(|| parse_err(i, "expected `dims: ...`"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(i, "bad dim value")))
            .collect::<Result<_>>()?;
        let (i, scale_line) = lines.next().ok_or_else(|| parse_err(2, "missing scale_exp line"))?;
        let scale_exp: i32 = scale_line
            .strip_prefix("scale_exp:")
            .ok_or_else(|| parse_err(i, "expected `scale_exp: ...`"))?
            .trim()
            .parse()
            .map_err(|_| parse_err(i, "bad scale_exp value"))?;

        let mut data = Vec::new();
        for (i, line) in lines {
            for tok in line.split_whitespace() {
                let v: i16 = tok.parse().map_err(|_| parse_err(i, "bad element"))?;
                if !(-128..=127).contains(&v) {
                    return Err(parse_err(i, "element out of int8 range"));
                }
                data.push(v as i8);
            }
        }
        QTensor::new(dims, data, scale_exp)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        QTensor::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

//! CNN layer descriptions and workload file ingest.
//!
//! A workload is a line-oriented text file, one layer per line in network
//! order:
//!
//! ```text
//! name kind ih iw ic oc k s pad
//! ```
//!
//! `kind` is one of `conv`, `dwc`, `maxpool`, `avgpool` (both scheduled as
//! pool), `eltwise`. Blank lines and `#` comments are skipped. Output
//! dimensions are derived, never stated, so a file cannot contradict the
//! shape arithmetic.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Conv,
    Dwc,
    Pool,
    Eltwise,
}

impl OpKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OpKind::Conv => "conv",
            OpKind::Dwc => "dwc",
            OpKind::Pool => "pool",
            OpKind::Eltwise => "eltwise",
        }
    }
}

/// Kernel sizes the DWC datapath supports; even kernels cannot use the
/// paired weight-vector fetch.
pub const DWC_KERNELS: [u64; 4] = [1, 3, 5, 7];

/// One layer with derived output dimensions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerShape {
    pub name: String,
    pub kind: OpKind,
    pub ih: u64,
    pub iw: u64,
    pub ic: u64,
    pub oh: u64,
    pub ow: u64,
    pub oc: u64,
    pub k: u64,
    pub s: u64,
    pub pad: u64,
}

fn out_dim(i: u64, k: u64, s: u64, pad: u64) -> Option<u64> {
    let padded = i + 2 * pad;
    if padded < k {
        return None;
    }
    Some((padded - k) / s + 1)
}

impl LayerShape {
    pub fn new(
        name: impl Into<String>,
        kind: OpKind,
        ih: u64,
        iw: u64,
        ic: u64,
        oc: u64,
        k: u64,
        s: u64,
        pad: u64,
    ) -> Result<Self> {
        let name = name.into();
        if ih == 0 || iw == 0 || ic == 0 || oc == 0 {
            return Err(Error::invalid(format!("{name}: dimensions must be >= 1")));
        }
        if k == 0 || s == 0 {
            return Err(Error::invalid(format!("{name}: kernel and stride must be >= 1")));
        }
        match kind {
            OpKind::Dwc => {
                if oc != ic {
                    return Err(Error::invalid(format!(
                        "{name}: dwc needs oc == ic, got ic={ic} oc={oc}"
                    )));
                }
                if !DWC_KERNELS.contains(&k) {
                    return Err(Error::invalid(format!(
                        "{name}: unsupported kernel {k} for dwc, supported: {DWC_KERNELS:?}"
                    )));
                }
            }
            OpKind::Pool => {
                if oc != ic {
                    return Err(Error::invalid(format!(
                        "{name}: pool needs oc == ic, got ic={ic} oc={oc}"
                    )));
                }
            }
            OpKind::Eltwise => {
                if oc != ic || k != 1 || s != 1 || pad != 0 {
                    return Err(Error::invalid(format!(
                        "{name}: eltwise needs oc == ic, k=1, s=1, pad=0"
                    )));
                }
            }
            OpKind::Conv => {}
        }
        let oh = out_dim(ih, k, s, pad)
            .ok_or_else(|| Error::invalid(format!("{name}: kernel larger than padded input height")))?;
        let ow = out_dim(iw, k, s, pad)
            .ok_or_else(|| Error::invalid(format!("{name}: kernel larger than padded input width")))?;
        if oh == 0 || ow == 0 {
            return Err(Error::invalid(format!("{name}: empty output")));
        }
        Ok(LayerShape { name, kind, ih, iw, ic, oh, ow, oc, k, s, pad })
    }

    /// Multiply-accumulates the layer actually needs; pooling and
    /// element-wise layers count zero (they run on the MISC core).
    pub fn macs(&self) -> u64 {
        match self.kind {
            OpKind::Conv => self.oh * self.ow * self.k * self.k * self.ic * self.oc,
            OpKind::Dwc => self.oh * self.ow * self.k * self.k * self.ic,
            OpKind::Pool | OpKind::Eltwise => 0,
        }
    }

    pub fn weight_bytes(&self) -> u64 {
        match self.kind {
            OpKind::Conv => self.k * self.k * self.ic * self.oc,
            OpKind::Dwc => self.k * self.k * self.ic,
            OpKind::Pool | OpKind::Eltwise => 0,
        }
    }

    pub fn input_bytes(&self) -> u64 {
        self.ih * self.iw * self.ic
    }

    pub fn output_bytes(&self) -> u64 {
        self.oh * self.ow * self.oc
    }

    pub fn out_elems(&self) -> u64 {
        self.oh * self.ow * self.oc
    }
}

fn parse_kind(token: &str, line: usize) -> Result<OpKind> {
    match token {
        "conv" => Ok(OpKind::Conv),
        "dwc" => Ok(OpKind::Dwc),
        "pool" | "maxpool" | "avgpool" => Ok(OpKind::Pool),
        "eltwise" => Ok(OpKind::Eltwise),
        other => Err(Error::Parse {
            line,
            msg: format!("unknown layer kind '{other}'"),
        }),
    }
}

fn parse_line(text: &str, line: usize) -> Result<LayerShape> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 9 {
        return Err(Error::Parse {
            line,
            msg: format!("expected 9 fields (name kind ih iw ic oc k s pad), got {}", fields.len()),
        });
    }
    let kind = parse_kind(fields[1], line)?;
    let mut dims = [0u64; 7];
    for (slot, field) in dims.iter_mut().zip(&fields[2..]) {
        *slot = field.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("'{field}' is not a non-negative integer"),
        })?;
    }
    let [ih, iw, ic, oc, k, s, pad] = dims;
    LayerShape::new(fields[0], kind, ih, iw, ic, oc, k, s, pad).map_err(|e| Error::Parse {
        line,
        msg: e.to_string(),
    })
}

/// Parses a workload from text; errors carry 1-based line numbers.
pub fn ingest_str(text: &str) -> Result<Vec<LayerShape>> {
    let mut layers = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let trimmed = raw.split('#').next().unwrap_or("").trim();
        if trimmed.is_empty() {
            continue;
        }
        layers.push(parse_line(trimmed, idx + 1)?);
    }
    if layers.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no layers in workload".into() });
    }
    Ok(layers)
}

/// Reads and parses a workload file.
pub fn ingest(path: &std::path::Path) -> Result<Vec<LayerShape>> {
    let text = std::fs::read_to_string(path)?;
    ingest_str(&text)
}

/// Bundled example workloads, usable by name from the CLI and by tests.
pub mod fixtures {
    use super::{ingest_str, LayerShape};

    pub const RESNET50_LIKE: &str = include_str!("../fixtures/resnet50_like.txt");
    pub const MOBILENET_LIKE: &str = include_str!("../fixtures/mobilenet_like.txt");

    pub fn resnet50_like() -> Vec<LayerShape> {
        ingest_str(RESNET50_LIKE).expect("bundled resnet50-like fixture parses")
    }

    pub fn mobilenet_like() -> Vec<LayerShape> {
        ingest_str(MOBILENET_LIKE).expect("bundled mobilenet-like fixture parses")
    }

    pub fn by_name(name: &str) -> Option<Vec<LayerShape>> {
        match name {
            "resnet50-like" => Some(resnet50_like()),
            "mobilenet-like" => Some(mobilenet_like()),
            _ => None,
        }
    }

    pub const NAMES: [&str; 2] = ["resnet50-like", "mobilenet-like"];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_dims_follow_stride_and_padding() {
        let l = LayerShape::new("c", OpKind::Conv, 224, 224, 3, 64, 7, 2, 3).unwrap();
        assert_eq!((l.oh, l.ow), (112, 112));
        let l = LayerShape::new("p", OpKind::Pool, 112, 112, 64, 64, 3, 2, 1).unwrap();
        assert_eq!((l.oh, l.ow), (56, 56));
        let l = LayerShape::new("c", OpKind::Conv, 7, 7, 512, 2048, 1, 1, 0).unwrap();
        assert_eq!((l.oh, l.ow), (7, 7));
    }

    #[test]
    fn dwc_shape_rules() {
        assert!(LayerShape::new("d", OpKind::Dwc, 8, 8, 16, 32, 3, 1, 1).is_err());
        assert!(LayerShape::new("d", OpKind::Dwc, 8, 8, 16, 16, 4, 1, 1).is_err());
        assert!(LayerShape::new("d", OpKind::Dwc, 8, 8, 16, 16, 9, 1, 4).is_err());
        assert!(LayerShape::new("d", OpKind::Dwc, 8, 8, 16, 16, 7, 2, 3).is_ok());
    }

    #[test]
    fn parses_a_small_workload() {
        let text = "\n# header comment\nc1 conv 8 8 3 16 3 1 1  # trailing comment\np1 maxpool 8 8 16 16 2 2 0\n";
        let layers = ingest_str(text).unwrap();
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].name, "c1");
        assert_eq!(layers[1].kind, OpKind::Pool);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ingest_str("x conv 8 8 3 16 3 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        let err = ingest_str("\n\nx blur 8 8 3 16 3 1 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = ingest_str("d dwc 8 8 16 16 4 1 1\n").unwrap_err();
        assert!(err.to_string().contains("unsupported kernel"), "{err}");
    }

    #[test]
    fn empty_workload_is_an_error() {
        assert!(ingest_str("").is_err());
        assert!(ingest_str("# only comments\n").is_err());
    }

    #[test]
    fn resnet50_like_fixture_census() {
        let layers = fixtures::resnet50_like();
        let conv = layers.iter().filter(|l| l.kind == OpKind::Conv).count();
        let pool = layers.iter().filter(|l| l.kind == OpKind::Pool).count();
        let elt = layers.iter().filter(|l| l.kind == OpKind::Eltwise).count();
        assert_eq!(conv, 53);
        assert_eq!(pool, 2);
        assert_eq!(elt, 16);
        assert_eq!(layers[0].name, "conv1");
        assert_eq!((layers[0].ic, layers[0].oc, layers[0].k), (3, 64, 7));
    }

    #[test]
    fn mobilenet_like_fixture_census() {
        let layers = fixtures::mobilenet_like();
        let dwc = layers.iter().filter(|l| l.kind == OpKind::Dwc).count();
        let conv = layers.iter().filter(|l| l.kind == OpKind::Conv).count();
        assert_eq!(dwc, 13);
        assert_eq!(conv, 14);
        assert!(layers.iter().all(|l| l.kind != OpKind::Dwc || l.ic == l.oc));
    }

    #[test]
    fn fixture_chains_are_dimensionally_sane() {
        // Every non-eltwise layer's input matches some earlier output or
        // the network input; here we just sanity check spatial shrinkage.
        for layers in [fixtures::resnet50_like(), fixtures::mobilenet_like()] {
            for l in &layers {
                assert!(l.oh <= l.ih + 2 * l.pad, "{}", l.name);
                assert!(l.macs() < u64::MAX / 4);
            }
        }
    }
}

//! Control-matrix export for 1-bit surfaces.
//!
//! Text layout: one grid row per line, cells separated by single spaces,
//! row-major over the configuration. Bit `1` drives phase `0` (level 0) and
//! bit `0` drives phase `π` (level 1).

use std::fmt;

use crate::error::{Error, Result};
use crate::types::{PhaseConfig, QuantizationScheme};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodebookGrid {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl CodebookGrid {
    pub fn from_config(cfg: &PhaseConfig, rows: usize, cols: usize) -> Result<Self> {
        if cfg.scheme().bits() != 1 {
            return Err(Error::UnsupportedScheme(format!(
                "codebook export needs 1-bit phases, got {} bits",
                cfg.scheme().bits()
            )));
        }
        if rows == 0 || cols == 0 || rows.checked_mul(cols) != Some(cfg.len()) {
            return Err(Error::Geometry(format!(
                "{rows}x{cols} grid cannot hold {} cells",
                cfg.len()
            )));
        }
        let bits = cfg.indices().iter().map(|&k| u8::from(k == 0)).collect();
        Ok(Self { rows, cols, bits })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major control bits.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn to_config(&self) -> PhaseConfig {
        let scheme = QuantizationScheme::new(1).expect("1 bit is valid");
        let idx = self.bits.iter().map(|&b| u32::from(b == 0)).collect();
        PhaseConfig::new(idx, scheme).expect("grid is nonempty with binary levels")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut bits = Vec::new();
        let mut rows = 0;
        let mut cols = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let start = bits.len();
            for tok in line.split_whitespace() {
                match tok {
                    "0" => bits.push(0),
                    "1" => bits.push(1),
                    other => return Err(parse_err(format!("expected 0 or 1, found {other:?}"))),
                }
            }
            let width = bits.len() - start;
            if rows == 0 {
                cols = width;
            } else if width != cols {
                return Err(parse_err(format!("row has {width} cells, expected {cols}")));
            }
            rows += 1;
        }
        if rows == 0 {
            return Err(Error::Empty("codebook"));
        }
        Ok(Self { rows, cols, bits })
    }
}

impl fmt::Display for CodebookGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.bits.chunks(self.cols) {
            let mut first = true;
            for b in row {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{b}")?;
                first = false;
            }
            f.write_str("\n")?;
        }
        Ok(())
    }
}

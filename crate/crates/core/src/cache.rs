//! The `semiperm-terms v1` sequence file.
//!
//! One header line of `key=value` fields, then one value per line for
//! indices `0..=order`:
//!
//! ```text
//! semiperm-terms v1 model=S2 start=-1,-1 west=all south=all region=full kind=totals ring=exact order=3
//! 1
//! 4
//! 14
//! 48
//! ```
//!
//! `ring=log` files hold natural logarithms written in shortest round-trip
//! form; zero counts are written as `-inf`. Sequences that do not come from
//! a walk model use `model=none` and omit the model fields.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::dense;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::ring::{CoefficientRing, PrimeField};

pub const MAGIC: &str = "semiperm-terms v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    Totals,
    Returns,
    Sequence,
}

impl SequenceKind {
    pub fn name(self) -> &'static str {
        match self {
            SequenceKind::Totals => "totals",
            SequenceKind::Returns => "returns",
            SequenceKind::Sequence => "sequence",
        }
    }
}

impl FromStr for SequenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "totals" => Ok(SequenceKind::Totals),
            "returns" => Ok(SequenceKind::Returns),
            "sequence" => Ok(SequenceKind::Sequence),
            _ => Err(Error::Parse(format!("unknown sequence kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermValues {
    Exact(Vec<BigInt>),
    Mod { p: u32, values: Vec<u32> },
    Log(Vec<f64>),
}

impl TermValues {
    pub fn len(&self) -> usize {
        match self {
            TermValues::Exact(v) => v.len(),
            TermValues::Mod { values, .. } => values.len(),
            TermValues::Log(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ring_name(&self) -> String {
        match self {
            TermValues::Exact(_) => "exact".into(),
            TermValues::Mod { p, .. } => format!("mod:{p}"),
            TermValues::Log(_) => "log".into(),
        }
    }

    /// Residues modulo `p`, reducing exact values when needed.
    pub fn residues(&self, p: u32) -> Result<Vec<u32>> {
        let field = PrimeField::new(p)?;
        match self {
            TermValues::Exact(v) => {
                let big = BigInt::from(p);
                Ok(v.iter()
                    .map(|x| {
                        let r = ((x % &big) + &big) % &big;
                        u32::try_from(r).expect("residue below p")
                    })
                    .collect())
            }
            TermValues::Mod { p: q, values } if *q == field.p() => Ok(values.clone()),
            TermValues::Mod { p: q, .. } => Err(Error::MixedRing(
                CoefficientRing::ModPrime(*q),
                CoefficientRing::ModPrime(p),
            )),
            TermValues::Log(_) => Err(Error::Unsupported("log sequences have no residues".into())),
        }
    }
}

/// How enumerated counts are stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Storage {
    Exact,
    Mod(u32),
    /// Natural logs from a floating-point run.
    Log,
}

impl FromStr for Storage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "log" {
            return Ok(Storage::Log);
        }
        match s.parse::<CoefficientRing>()? {
            CoefficientRing::ModPrime(p) => Ok(Storage::Mod(p)),
            _ => Ok(Storage::Exact),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermCache {
    pub model: Option<ModelSpec>,
    pub kind: SequenceKind,
    pub values: TermValues,
}

impl TermCache {
    /// Counts walks of `model` for lengths `0..=order`. `kind` must be
    /// totals or returns.
    pub fn enumerate(model: &ModelSpec, order: usize, storage: Storage, kind: SequenceKind) -> Result<Self> {
        let returns = match kind {
            SequenceKind::Totals => false,
            SequenceKind::Returns => true,
            SequenceKind::Sequence => {
                return Err(Error::Unsupported("walk counts are totals or returns".into()))
            }
        };
        let values = match storage {
            Storage::Exact if returns => TermValues::Exact(dense::returns_exact(model, order)?),
            Storage::Exact => TermValues::Exact(dense::totals_exact(model, order)?),
            Storage::Mod(p) => TermValues::Mod {
                p,
                values: if returns {
                    dense::returns_mod(model, order, p)?
                } else {
                    dense::totals_mod(model, order, p)?
                },
            },
            Storage::Log => TermValues::Log(dense::log_counts_float(
                model,
                order,
                if returns { dense::Mode::Returns } else { dense::Mode::Totals },
            )?),
        };
        Ok(TermCache {
            model: Some(model.clone()),
            kind,
            values,
        })
    }

    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn header(&self) -> String {
        let model = match &self.model {
            Some(m) => {
                let id: String = m.id.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
                ModelSpec { id, ..m.clone() }.describe()
            }
            None => "model=none".into(),
        };
        format!(
            "{MAGIC} {model} kind={} ring={} order={}",
            self.kind.name(),
            self.values.ring_name(),
            self.order()
        )
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{}", self.header())?;
        match &self.values {
            TermValues::Exact(v) => v.iter().try_for_each(|x| writeln!(w, "{x}"))?,
            TermValues::Mod { values, .. } => values.iter().try_for_each(|x| writeln!(w, "{x}"))?,
            TermValues::Log(v) => v.iter().try_for_each(|x| writeln!(w, "{x:?}"))?,
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(fs::File::open(path)?))
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::ParseLine { line: 1, msg: "empty file".into() })??;
        let (model, kind, ring, order) = parse_header(&header)?;
        let mut exact = Vec::new();
        let mut residues = Vec::new();
        let mut logs = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let line_no = idx + 2;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::ParseLine {
                line: line_no,
                msg: format!("invalid {what} value '{text}'"),
            };
            match ring {
                HeaderRing::Exact => exact.push(text.parse::<BigInt>().map_err(|_| bad("integer"))?),
                HeaderRing::Mod(p) => {
                    let v: u32 = text.parse().map_err(|_| bad("residue"))?;
                    if v >= p {
                        return Err(bad("residue"));
                    }
                    residues.push(v);
                }
                HeaderRing::Log => logs.push(text.parse::<f64>().map_err(|_| bad("log"))?),
            }
        }
        let values = match ring {
            HeaderRing::Exact => TermValues::Exact(exact),
            HeaderRing::Mod(p) => TermValues::Mod { p, values: residues },
            HeaderRing::Log => TermValues::Log(logs),
        };
        if values.len() != order + 1 {
            return Err(Error::Parse(format!(
                "header announces order {order} but the file has {} values",
                values.len()
            )));
        }
        Ok(TermCache { model, kind, values })
    }
}

impl fmt::Display for TermCache {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|_| fmt::Error)?;
        f.write_str(&String::from_utf8(buf).map_err(|_| fmt::Error)?)
    }
}

impl FromStr for TermCache {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::read_from(s.as_bytes())
    }
}

enum HeaderRing {
    Exact,
    Mod(u32),
    Log,
}

fn parse_header(header: &str) -> Result<(Option<ModelSpec>, SequenceKind, HeaderRing, usize)> {
    let bad = |msg: String| Error::ParseLine { line: 1, msg };
    let rest = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| bad(format!("expected '{MAGIC}' header")))?;
    let mut fields = std::collections::HashMap::new();
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| bad(format!("malformed header field '{token}'")))?;
        fields.insert(key, value);
    }
    let get = |key: &str| fields.get(key).copied().ok_or_else(|| bad(format!("missing header field '{key}'")));
    let wrap = |e: Error| bad(e.to_string());

    let model = match get("model")? {
        "none" => None,
        id => {
            let (a, b) = get("start")?
                .split_once(',')
                .ok_or_else(|| bad("start must be 'a,b'".into()))?;
            let coord = |s: &str| s.parse::<i32>().map_err(|_| bad(format!("bad start coordinate '{s}'")));
            let m = ModelSpec::new(
                id,
                (coord(a)?, coord(b)?),
                get("west")?.parse().map_err(wrap)?,
                get("south")?.parse().map_err(wrap)?,
                get("region")?.parse().map_err(wrap)?,
            )
            .map_err(wrap)?;
            Some(m)
        }
    };
    let kind = get("kind")?.parse().map_err(wrap)?;
    let ring = match get("ring")? {
        "log" => HeaderRing::Log,
        other => match other.parse::<CoefficientRing>().map_err(wrap)? {
            CoefficientRing::ModPrime(p) => HeaderRing::Mod(p),
            _ => HeaderRing::Exact,
        },
    };
    let order = get("order")?
        .parse()
        .map_err(|_| bad("order must be a nonnegative integer".into()))?;
    Ok((model, kind, ring, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog_model;

    #[test]
    fn exact_file_layout() {
        let c = TermCache {
            model: catalog_model("S2"),
            kind: SequenceKind::Totals,
            values: TermValues::Exact([1, 4, 14, 48].map(BigInt::from).to_vec()),
        };
        let text = c.to_string();
        assert_eq!(
            text,
            "semiperm-terms v1 model=S2 start=-1,-1 west=all south=all region=full kind=totals ring=exact order=3\n1\n4\n14\n48\n"
        );
        assert_eq!(text.parse::<TermCache>().unwrap(), c);
    }

    #[test]
    fn log_and_mod_round_trip() {
        let logs = vec![0.0, f64::NEG_INFINITY, 1.0 / 3.0, 1e-300, 12345.678901234567];
        let c = TermCache {
            model: catalog_model("S5"),
            kind: SequenceKind::Returns,
            values: TermValues::Log(logs.clone()),
        };
        let back: TermCache = c.to_string().parse().unwrap();
        match back.values {
            TermValues::Log(v) => assert!(v.iter().zip(&logs).all(|(a, b)| a.to_bits() == b.to_bits())),
            _ => panic!("wrong kind"),
        }
        let c = TermCache {
            model: None,
            kind: SequenceKind::Sequence,
            values: TermValues::Mod { p: 7, values: vec![1, 6, 0] },
        };
        assert_eq!(c.to_string().parse::<TermCache>().unwrap(), c);
    }

    #[test]
    fn malformed_files() {
        assert!("".parse::<TermCache>().is_err());
        assert!("semiperm-terms v2 model=none kind=totals ring=exact order=0\n1\n".parse::<TermCache>().is_err());
        let short = "semiperm-terms v1 model=none kind=totals ring=exact order=2\n1\n2\n";
        assert!(short.parse::<TermCache>().is_err());
        let big = "semiperm-terms v1 model=none kind=totals ring=mod:7 order=0\n9\n";
        assert!(matches!(big.parse::<TermCache>(), Err(Error::ParseLine { line: 2, .. })));
    }

    #[test]
    fn residues_from_exact() {
        let v = TermValues::Exact(vec![BigInt::from(-1), BigInt::from(15)]);
        assert_eq!(v.residues(7).unwrap(), [6, 1]);
        let m = TermValues::Mod { p: 7, values: vec![3] };
        assert!(m.residues(11).is_err());
    }
}

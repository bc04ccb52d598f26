//! Flat binary and CSV encodings of [`FunctionTable`].
//!
//! Binary layout, all fields little-endian:
//!
//! | offset | size | field                                              |
//! |--------|------|----------------------------------------------------|
//! | 0      | 4    | magic `RPFT`                                       |
//! | 4      | 2    | format version (1)                                 |
//! | 6      | 1    | kind: 0 mu, 1 phi, 2 d_k, 3 sigma ratio, 4 phi ratio, 5 custom |
//! | 7      | 1    | value type: 0 = i64, 1 = f64                       |
//! | 8      | 4    | k for d_k, else 0                                  |
//! | 12     | 8    | real parameter s (f64), else 0.0                   |
//! | 20     | 8    | limit N (u64)                                      |
//! | 28     | 8N   | values v(1), ..., v(N)                             |

use std::io::{BufRead, Read, Write};

use super::table::{FunctionKind, FunctionTable, TableValues};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RPFT";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;

fn kind_code(kind: FunctionKind) -> (u8, u32, f64) {
    match kind {
        FunctionKind::Mobius => (0, 0, 0.0),
        FunctionKind::EulerPhi => (1, 0, 0.0),
        FunctionKind::DivisorK { k } => (2, k, 0.0),
        FunctionKind::SigmaRatio { s } => (3, 0, s),
        FunctionKind::PhiRatio { s } => (4, 0, s),
        FunctionKind::Custom => (5, 0, 0.0),
    }
}

fn kind_from_code(code: u8, k: u32, s: f64) -> Result<FunctionKind> {
    Ok(match code {
        0 => FunctionKind::Mobius,
        1 => FunctionKind::EulerPhi,
        2 => FunctionKind::DivisorK { k },
        3 => FunctionKind::SigmaRatio { s },
        4 => FunctionKind::PhiRatio { s },
        5 => FunctionKind::Custom,
        other => return Err(Error::Format(format!("unknown kind code {other}"))),
    })
}

pub fn write_binary<W: Write>(table: &FunctionTable, mut w: W) -> Result<()> {
    let (code, k, s) = kind_code(table.kind());
    let vtype: u8 = match table.values() {
        TableValues::Integer(_) => 0,
        TableValues::Real(_) => 1,
    };
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    header.push(code);
    header.push(vtype);
    header.extend_from_slice(&k.to_le_bytes());
    header.extend_from_slice(&s.to_le_bytes());
    header.extend_from_slice(&(table.limit() as u64).to_le_bytes());
    w.write_all(&header)?;

    let mut buf = Vec::with_capacity(8 * table.limit());
    match table.values() {
        TableValues::Integer(v) => v[1..]
            .iter()
            .for_each(|x| buf.extend_from_slice(&x.to_le_bytes())),
        TableValues::Real(v) => v[1..]
            .iter()
            .for_each(|x| buf.extend_from_slice(&x.to_le_bytes())),
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<FunctionTable> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[0..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let code = header[6];
    let vtype = header[7];
    let k = u32::from_le_bytes(header[8..12].try_into().unwrap());
    let s = f64::from_le_bytes(header[12..20].try_into().unwrap());
    let limit = u64::from_le_bytes(header[20..28].try_into().unwrap()) as usize;
    if limit == 0 {
        return Err(Error::Format("limit must be at least 1".into()));
    }
    let kind = kind_from_code(code, k, s)?;

    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if limit.checked_mul(8) != Some(payload.len()) {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected 8 * {limit}",
            payload.len()
        )));
    }
    let chunks = payload
        .chunks_exact(8)
        .map(|c| <[u8; 8]>::try_from(c).unwrap());
    let values = match vtype {
        0 => TableValues::Integer(
            std::iter::once(0)
                .chain(chunks.map(i64::from_le_bytes))
                .collect(),
        ),
        1 => TableValues::Real(
            std::iter::once(0.0)
                .chain(chunks.map(f64::from_le_bytes))
                .collect(),
        ),
        other => return Err(Error::Format(format!("unknown value type {other}"))),
    };
    Ok(FunctionTable::from_parts(kind, values))
}

/// `n,value` rows under a `n,value` header line.
pub fn write_csv<W: Write>(table: &FunctionTable, mut w: W) -> Result<()> {
    writeln!(w, "n,value")?;
    match table.values() {
        TableValues::Integer(v) => {
            for (n, x) in v.iter().enumerate().skip(1) {
                writeln!(w, "{n},{x}")?;
            }
        }
        TableValues::Real(v) => {
            for (n, x) in v.iter().enumerate().skip(1) {
                writeln!(w, "{n},{x:?}")?;
            }
        }
    }
    Ok(())
}

/// Reads `n,value` rows back. CSV carries no header metadata, so the caller
/// names the kind; rows must be `1..=N` in order.
pub fn read_csv<R: BufRead>(r: R, kind: FunctionKind) -> Result<FunctionTable> {
    let mut ints = vec![0i64];
    let mut reals = vec![0.0f64];
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 && line.trim() == "n,value" {
            continue;
        }
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (n, value) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("line {}: expected n,value", i + 1)))?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad index", i + 1)))?;
        let expected = if kind.is_integer() {
            ints.len()
        } else {
            reals.len()
        };
        if n != expected {
            return Err(Error::Format(format!(
                "line {}: expected n = {expected}, got {n}",
                i + 1
            )));
        }
        if kind.is_integer() {
            ints.push(
                value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("line {}: bad integer", i + 1)))?,
            );
        } else {
            reals.push(
                value
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("line {}: bad real", i + 1)))?,
            );
        }
    }
    let values = if kind.is_integer() {
        TableValues::Integer(ints)
    } else {
        TableValues::Real(reals)
    };
    let table = FunctionTable::from_parts(kind, values);
    if table.limit() == 0 {
        return Err(Error::Format("no rows".into()));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::table::{sieve_mobius, sieve_sigma_ratio};
    use proptest::prelude::*;

    #[test]
    fn header_layout_is_fixed() {
        let t = sieve_mobius(3).unwrap();
        let mut out = Vec::new();
        write_binary(&t, &mut out).unwrap();
        assert_eq!(out.len(), HEADER_LEN + 24);
        assert_eq!(&out[0..4], b"RPFT");
        assert_eq!(out[4..6], [1, 0]);
        assert_eq!(out[6], 0);
        assert_eq!(out[7], 0);
        assert_eq!(out[20..28], 3u64.to_le_bytes());
        // mu(2) = -1
        assert_eq!(out[36..44], (-1i64).to_le_bytes());
    }

    #[test]
    fn rejects_truncated_payload() {
        let t = sieve_sigma_ratio(1.5, 10).unwrap();
        let mut out = Vec::new();
        write_binary(&t, &mut out).unwrap();
        out.truncate(out.len() - 3);
        assert!(matches!(read_binary(&out[..]), Err(Error::Format(_))));
        out[0] = b'X';
        assert!(matches!(read_binary(&out[..]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let t = sieve_mobius(4).unwrap();
        let mut out = Vec::new();
        write_csv(&t, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "n,value\n1,1\n2,-1\n3,-1\n4,0\n"
        );
    }

    proptest! {
        #[test]
        fn binary_and_csv_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..200)) {
            let t = FunctionTable::custom_real(&values);
            let mut bin = Vec::new();
            write_binary(&t, &mut bin).unwrap();
            prop_assert_eq!(&read_binary(&bin[..]).unwrap(), &t);
            let mut csv = Vec::new();
            write_csv(&t, &mut csv).unwrap();
            prop_assert_eq!(&read_csv(&csv[..], FunctionKind::Custom).unwrap(), &t);
        }
    }
}

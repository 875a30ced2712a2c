//! Function files.
//!
//! JSON files hold `{"n": n, "values": [...]}`. Binary files start with a
//! 16 byte header, the magic `HCF1`, version byte `0x01`, one byte `n` and
//! zero padding up to byte 16, followed by `2^n` little-endian doubles in table order.
//! In both formats bit `j` of the table index is `x_{j+1}`.

use std::io::Read;
use std::path::Path;

use hcj_core::{CubeFunction, MAX_DIM};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MAGIC: &[u8; 4] = b"HCF1";
pub const VERSION: u8 = 0x01;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Json,
    Binary,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonFunction {
    n: usize,
    values: Vec<f64>,
}

pub fn encode_binary(f: &CubeFunction) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * f.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(f.n() as u8);
    out.resize(HEADER_LEN, 0);
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> CliResult<CubeFunction> {
    if bytes.len() < HEADER_LEN {
        return Err(CliError::Input(format!(
            "binary function file is {} bytes, shorter than its {HEADER_LEN} byte header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(CliError::Input("bad magic, expected HCF1".into()));
    }
    if bytes[4] != VERSION {
        return Err(CliError::Input(format!(
            "unsupported format version {}",
            bytes[4]
        )));
    }
    let n = bytes[5] as usize;
    if bytes[6..HEADER_LEN].iter().any(|&b| b != 0) {
        return Err(CliError::Input("nonzero header padding".into()));
    }
    if n == 0 || n > MAX_DIM {
        return Err(hcj_core::HcjError::Dimension { n, max: MAX_DIM }.into());
    }
    let expected = HEADER_LEN + 8 * (1usize << n);
    if bytes.len() != expected {
        return Err(CliError::Input(format!(
            "binary file for n = {n} must be {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks of eight")))
        .collect();
    Ok(CubeFunction::new(n, values)?)
}

pub fn encode_json(f: &CubeFunction) -> String {
    let file = JsonFunction {
        n: f.n(),
        values: f.values().to_vec(),
    };
    serde_json::to_string(&file).expect("finite values serialize")
}

pub fn decode_json(bytes: &[u8]) -> CliResult<CubeFunction> {
    let file: JsonFunction = serde_json::from_slice(bytes)
        .map_err(|e| CliError::Input(format!("malformed JSON function file: {e}")))?;
    if file.n == 0 || file.n > MAX_DIM {
        return Err(hcj_core::HcjError::Dimension {
            n: file.n,
            max: MAX_DIM,
        }
        .into());
    }
    Ok(CubeFunction::new(file.n, file.values)?)
}

/// Binary when the bytes start with the magic, JSON otherwise.
pub fn sniff(bytes: &[u8]) -> FileFormat {
    if bytes.starts_with(MAGIC) {
        FileFormat::Binary
    } else {
        FileFormat::Json
    }
}

pub fn decode(bytes: &[u8]) -> CliResult<CubeFunction> {
    match sniff(bytes) {
        FileFormat::Binary => decode_binary(bytes),
        FileFormat::Json => decode_json(bytes),
    }
}

/// Reads a function file, or standard input when `path` is `-`.
pub fn read_function(path: &Path) -> CliResult<CubeFunction> {
    let read_err = |source| CliError::Read {
        path: path.display().to_string(),
        source,
    };
    let bytes = if path.as_os_str() == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(read_err)?;
        buf
    } else {
        std::fs::read(path).map_err(read_err)?
    };
    decode(&bytes)
}

pub fn write_function(path: &Path, f: &CubeFunction, format: FileFormat) -> CliResult<()> {
    let bytes = match format {
        FileFormat::Binary => encode_binary(f),
        FileFormat::Json => encode_json(f).into_bytes(),
    };
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let f = CubeFunction::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let b = encode_binary(&f);
        assert_eq!(b.len(), 16 + 32);
        assert_eq!(&b[..6], b"HCF1\x01\x02");
        assert_eq!(&b[6..16], &[0u8; 10]);
        assert_eq!(&b[40..48], &1.0f64.to_le_bytes());
        assert_eq!(decode(&b).unwrap(), f);
    }

    #[test]
    fn json_mismatch_is_rejected() {
        let e = decode(br#"{"n": 2, "values": [1, 2, 3]}"#).unwrap_err();
        assert!(matches!(
            e,
            CliError::Core(hcj_core::HcjError::Length { .. })
        ));
        assert!(decode(br#"{"n": 1, "values": [1, 2], "extra": 0}"#).is_err());
    }
}

// Copyright 2026 raqr Contributors
// SPDX-License-Identifier: Apache-2.0

//! Binary columnar waveform dumps.
//!
//! The `.bin` file holds the columns `time, exact, approx, sn, cn` one after
//! the other as little-endian f64. A `.json` sidecar next to it lists the
//! column names, the row count and caller-supplied parameters.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Waveform;

pub const DUMP_COLUMNS: [&str; 5] = ["time", "exact", "approx", "sn", "cn"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Sidecar {
    columns: Vec<String>,
    rows: usize,
    dtype: String,
    params: serde_json::Value,
}

/// A dump read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformDump {
    pub columns: Vec<(String, Vec<f64>)>,
    pub params: serde_json::Value,
}

impl WaveformDump {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes `path` and its JSON sidecar.
pub fn write_waveform_dump(path: &Path, w: &Waveform, params: serde_json::Value) -> io::Result<()> {
    let cols: [&[f64]; 5] = [&w.time, &w.exact, &w.approx, &w.sn_exact, &w.cn];
    let mut bytes = Vec::with_capacity(8 * 5 * w.len());
    for col in cols {
        for v in col {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::File::create(path)?.write_all(&bytes)?;
    let meta = Sidecar {
        columns: DUMP_COLUMNS.iter().map(|s| s.to_string()).collect(),
        rows: w.len(),
        dtype: "f64le".into(),
        params,
    };
    let text = serde_json::to_string_pretty(&meta).map_err(io::Error::other)?;
    fs::write(sidecar_path(path), text + "\n")
}

pub fn read_waveform_dump(path: &Path) -> io::Result<WaveformDump> {
    let meta: Sidecar =
        serde_json::from_str(&fs::read_to_string(sidecar_path(path))?).map_err(io::Error::other)?;
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let expected = 8 * meta.rows * meta.columns.len();
    if bytes.len() != expected {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!(
                "dump holds {} bytes, sidecar implies {expected}",
                bytes.len()
            ),
        ));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let columns = meta
        .columns
        .into_iter()
        .zip(values.chunks(meta.rows.max(1)))
        .map(|(name, v)| {
            (
                name,
                if meta.rows == 0 {
                    Vec::new()
                } else {
                    v.to_vec()
                },
            )
        })
        .collect();
    Ok(WaveformDump {
        columns,
        params: meta.params,
    })
}

//! On-disk formats: binary path dumps, CSV with round-trip floats, and the
//! JSON sidecar written next to every artifact.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::sim::LevyPath;

/// A float with 17 significant digits; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Row-major little-endian `f64` records `(t, x_1, …, x_d)`.
pub fn write_path_dump<W: Write>(path: &LevyPath, w: W) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    for k in 0..path.len() {
        w.write_all(&path.time(k).to_le_bytes())?;
        for x in path.point(k) {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()
}

/// Inverse of [`write_path_dump`]: rows of `d + 1` values.
pub fn read_path_dump(bytes: &[u8], d: usize) -> io::Result<Vec<Vec<f64>>> {
    let width = 8 * (d + 1);
    if bytes.len() % width != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("{} bytes is not a whole number of {}-wide records", bytes.len(), d + 1),
        ));
    }
    Ok(bytes
        .chunks_exact(width)
        .map(|rec| {
            rec.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect()
        })
        .collect())
}

/// CSV with a header row and '.'-decimal floats.
pub fn write_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let cells: Vec<String> = r.iter().map(|x| fmt_f64(*x)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

pub fn path_csv<W: Write>(path: &LevyPath, w: W) -> io::Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=path.d).map(|i| format!("x{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..path.len()).map(|k| path.graph_point(k)).collect();
    write_csv(w, &header, &rows)
}

/// `(log x, log y)` pairs for external plotting; non-positive pairs are
/// skipped.
pub fn plot_csv<W: Write>(w: W, xs: &[f64], ys: &[f64]) -> io::Result<()> {
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| vec![x.ln(), y.ln()])
        .collect();
    write_csv(w, &["log_scale", "log_statistic"], &rows)
}

/// Provenance written next to every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub artifact: String,
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// The complete configuration, defaults included.
    pub config: Value,
    pub wall_clock_secs: f64,
    pub finished_unix: u64,
}

pub fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_sidecar(artifact: &Path, sidecar: &Sidecar) -> io::Result<PathBuf> {
    let p = sidecar_path(artifact);
    let text = serde_json::to_string_pretty(sidecar).map_err(io::Error::other)?;
    fs::write(&p, text + "\n")?;
    Ok(p)
}

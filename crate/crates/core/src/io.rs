//! Embedding file round-tripping and run manifests.
//!
//! Text format: a header line `count p r`, then one line per entry with the
//! label followed by `p * r` reals in row-major order, space separated,
//! printed at full round-trip precision.
//!
//! Binary format: the same header line, then per entry the label, one space,
//! `p * r` little-endian 32-bit floats, and a newline byte.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::manifold::{frobenius_norm, MatrixEmbedding};
use crate::scalar::Scalar;
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    Text,
    Binary,
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.chars().any(|c| c.is_whitespace()) {
        return Err(Error::Format(format!(
            "label {label:?} is empty or contains whitespace"
        )));
    }
    Ok(())
}

fn check_bank<T: Scalar>(labels: &[String], bank: &[MatrixEmbedding<T>]) -> Result<(usize, usize)> {
    if labels.len() != bank.len() {
        return Err(Error::shape(
            "labels vs embeddings",
            bank.len(),
            labels.len(),
        ));
    }
    if bank.is_empty() {
        return Err(Error::Format("cannot write an empty embedding bank".into()));
    }
    let (p, r) = (bank[0].rows(), bank[0].cols());
    for m in bank {
        if m.rows() != p || m.cols() != r {
            return Err(Error::shape(
                "all embeddings in a file must share one shape",
                format!("{p}x{r}"),
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
    }
    Ok((p, r))
}

pub fn write_embeddings_text<T: Scalar>(
    path: &Path,
    labels: &[String],
    bank: &[MatrixEmbedding<T>],
) -> Result<()> {
    let (p, r) = check_bank(labels, bank)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{} {} {}", bank.len(), p, r)?;
    for (label, m) in labels.iter().zip(bank) {
        check_label(label)?;
        write!(w, "{label}")?;
        for v in m.as_slice() {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_embeddings_binary<T: Scalar>(
    path: &Path,
    labels: &[String],
    bank: &[MatrixEmbedding<T>],
) -> Result<()> {
    let (p, r) = check_bank(labels, bank)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{} {} {}", bank.len(), p, r)?;
    for (label, m) in labels.iter().zip(bank) {
        check_label(label)?;
        w.write_all(label.as_bytes())?;
        w.write_all(b" ")?;
        for v in m.as_slice() {
            let bits = v.to_f32().unwrap_or(f32::NAN);
            w.write_all(&bits.to_le_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn parse_header(line: &str) -> Result<(usize, usize, usize)> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Format(format!(
            "header must be `count p r`, got {line:?}"
        )));
    }
    let parse = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Format(format!("bad header field {s:?}")))
    };
    Ok((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?))
}

/// Checks one parsed entry against the file contract: finite values and a
/// norm within 1e-3 of unit (warn) or within 0.1 (hard limit).
fn accept_entry<T: Scalar>(
    label: &str,
    data: Vec<T>,
    p: usize,
    r: usize,
) -> Result<MatrixEmbedding<T>> {
    if let Some(x) = data.iter().find(|x| !x.is_finite()) {
        return Err(Error::Format(format!(
            "non-finite value {x} in entry {label:?}"
        )));
    }
    let dev = (frobenius_norm(&data) - T::one())
        .abs()
        .to_f64()
        .unwrap_or(f64::INFINITY);
    if dev > 0.1 {
        return Err(Error::Format(format!(
            "entry {label:?} has norm deviating from 1 by {dev:.3} (limit 0.1)"
        )));
    }
    if dev > 1e-3 {
        log::warn!("entry {label:?}: norm deviates from 1 by {dev:.2e}");
    }
    Ok(MatrixEmbedding::from_stored(data, p, r))
}

pub fn read_embeddings_text<T: Scalar>(
    path: &Path,
) -> Result<(Vec<String>, Vec<MatrixEmbedding<T>>)> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty embedding file".into()))?;
    let (count, p, r) = parse_header(header)?;
    let mut labels = Vec::with_capacity(count);
    let mut bank = Vec::with_capacity(count);
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let label = fields
            .next()
            .ok_or_else(|| Error::Format(format!("line {}: missing label", lineno + 2)))?;
        let mut data = Vec::with_capacity(p * r);
        for f in fields {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad number {f:?}", lineno + 2)))?;
            data.push(T::c(v));
        }
        if data.len() != p * r {
            return Err(Error::Format(format!(
                "line {}: expected {} values, got {}",
                lineno + 2,
                p * r,
                data.len()
            )));
        }
        labels.push(label.to_string());
        bank.push(accept_entry(label, data, p, r)?);
    }
    if bank.len() != count {
        return Err(Error::Format(format!(
            "header declares {count} entries but file holds {}",
            bank.len()
        )));
    }
    Ok((labels, bank))
}

pub fn read_embeddings_binary<T: Scalar>(
    path: &Path,
) -> Result<(Vec<String>, Vec<MatrixEmbedding<T>>)> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| Error::Format("header is not UTF-8".into()))?;
    let (count, p, r) = parse_header(header)?;

    let mut pos = header_end + 1;
    let mut labels = Vec::with_capacity(count);
    let mut bank = Vec::with_capacity(count);
    for entry in 0..count {
        let label_end = bytes[pos..]
            .iter()
            .position(|&b| b == b' ')
            .ok_or_else(|| Error::Format(format!("entry {entry}: truncated label")))?;
        let label = std::str::from_utf8(&bytes[pos..pos + label_end])
            .map_err(|_| Error::Format(format!("entry {entry}: label is not UTF-8")))?
            .to_string();
        pos += label_end + 1;
        let need = p * r * 4;
        if pos + need > bytes.len() {
            return Err(Error::Format(format!("entry {entry}: truncated values")));
        }
        let data: Vec<T> = bytes[pos..pos + need]
            .chunks_exact(4)
            .map(|c| T::c(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64))
            .collect();
        pos += need;
        if bytes.get(pos) == Some(&b'\n') {
            pos += 1;
        }
        bank.push(accept_entry(&label, data, p, r)?);
        labels.push(label);
    }
    Ok((labels, bank))
}

/// Reads either format, sniffing by attempting text first.
pub fn read_embeddings<T: Scalar>(path: &Path) -> Result<(Vec<String>, Vec<MatrixEmbedding<T>>)> {
    match read_embeddings_text(path) {
        Ok(out) => Ok(out),
        Err(text_err) => read_embeddings_binary(path).map_err(|bin_err| {
            Error::Format(format!(
                "not readable as text ({text_err}) nor binary ({bin_err})"
            ))
        }),
    }
}

/// Everything needed to reproduce a training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: TrainConfig,
    pub corpus_path: String,
    pub corpus_sha256: String,
    pub vocab_size: usize,
    pub n_docs: usize,
    pub total_tokens: u64,
    pub wall_seconds: f64,
    pub outputs: Vec<String>,
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Format(format!("manifest serialization failed: {e}")))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let json = std::fs::read_to_string(path)?;
    serde_json::from_str(&json).map_err(|e| Error::Format(format!("bad manifest: {e}")))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    let mut reader = BufReader::new(File::open(path)?);
    let mut buf = [0u8; 65536];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex_string(&hasher.finalize()))
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

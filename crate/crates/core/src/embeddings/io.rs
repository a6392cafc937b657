use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::EmbeddingTable;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorFormat {
    /// `word v1 ... vd` per line, with an optional `vocab_size dim` header.
    #[default]
    Text,
    /// Header line `vocab_size dim`, then per word: the word, a space, and
    /// `dim` little-endian `f32` values.
    Binary,
}

pub fn load_vectors<T: Real>(path: &Path, format: VectorFormat) -> Result<EmbeddingTable<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        VectorFormat::Text => parse_text(&String::from_utf8_lossy(&bytes), path),
        VectorFormat::Binary => parse_binary(&bytes, path),
    }
}

fn parse_text<T: Real>(text: &str, path: &Path) -> Result<EmbeddingTable<T>> {
    let mut table: Option<EmbeddingTable<T>> = None;
    let mut row = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if i == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok()) {
            let dim: usize = fields[1].parse().unwrap_or(0);
            if dim == 0 {
                return Err(Error::parse(path, 1, "dimension must be positive"));
            }
            table = Some(EmbeddingTable::new(dim));
            continue;
        }
        let dim = fields.len() - 1;
        let t = table.get_or_insert_with(|| EmbeddingTable::new(dim));
        if dim != t.dim() || dim == 0 {
            return Err(Error::parse(path, i + 1, format!("expected {} values, found {dim}", t.dim())));
        }
        row.clear();
        for f in &fields[1..] {
            let v: f64 = f.parse().map_err(|_| Error::parse(path, i + 1, format!("bad number {f:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(path, i + 1, "non-finite value"));
            }
            row.push(T::from_f64_lossy(v));
        }
        t.insert(fields[0], &row);
    }
    table.ok_or_else(|| Error::parse(path, 1, "empty vector file"))
}

fn parse_binary<T: Real>(bytes: &[u8], path: &Path) -> Result<EmbeddingTable<T>> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::parse(path, 1, "missing header line"))?;
    let header = String::from_utf8_lossy(&bytes[..nl]);
    let nums: Vec<usize> = header.split_whitespace().filter_map(|s| s.parse().ok()).collect();
    let [vocab, dim] = nums[..] else {
        return Err(Error::parse(path, 1, format!("bad header {header:?}")));
    };
    if dim == 0 {
        return Err(Error::parse(path, 1, "dimension must be positive"));
    }
    let mut table = EmbeddingTable::new(dim);
    let mut pos = nl + 1;
    let mut row = vec![T::zero(); dim];
    for entry in 0..vocab {
        while pos < bytes.len() && (bytes[pos] == b'\n' || bytes[pos] == b' ') {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos] != b' ' {
            pos += 1;
        }
        if pos >= bytes.len() {
            return Err(Error::parse(path, entry + 2, format!("truncated payload: {entry} of {vocab} entries read")));
        }
        let word = String::from_utf8_lossy(&bytes[start..pos]).into_owned();
        pos += 1;
        let end = pos + 4 * dim;
        if end > bytes.len() {
            return Err(Error::parse(path, entry + 2, format!("truncated vector for {word:?}")));
        }
        for (r, chunk) in row.iter_mut().zip(bytes[pos..end].chunks_exact(4)) {
            let v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
            *r = T::from_f64_lossy(f64::from(v));
        }
        pos = end;
        table.insert(&word, &row);
    }
    Ok(table)
}

pub fn write_text<T: Real>(table: &EmbeddingTable<T>) -> String {
    let mut s = format!("{} {}\n", table.len(), table.dim());
    for w in table.words() {
        s.push_str(w);
        for v in table.get(w).expect("listed word") {
            s.push(' ');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

pub fn write_binary<T: Real>(table: &EmbeddingTable<T>) -> Vec<u8> {
    let mut out = format!("{} {}\n", table.len(), table.dim()).into_bytes();
    for w in table.words() {
        out.extend_from_slice(w.as_bytes());
        out.push(b' ');
        for v in table.get(w).expect("listed word") {
            out.extend_from_slice(&v.to_f32().unwrap_or(0.0).to_le_bytes());
        }
        out.push(b'\n');
    }
    out
}

/// Reads an idf sidecar: `word<TAB>idf` per line.
pub fn load_idf<T: Real>(path: &Path) -> Result<HashMap<String, T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (w, v) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, i + 1, "expected word<TAB>idf"))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::parse(path, i + 1, format!("bad idf {v:?}")))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::parse(path, i + 1, "idf must be finite and nonnegative"));
        }
        out.entry(w.to_string()).or_insert(T::from_f64_lossy(v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_file_with_and_without_header() {
        let p = Path::new("v.txt");
        let t: EmbeddingTable<f64> = parse_text("cat 1 2 3\ndog 4 5 6\n", p).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 3));
        assert_eq!(t.get("dog").unwrap(), [4.0, 5.0, 6.0]);
        let t: EmbeddingTable<f64> = parse_text("2 3\ncat 1 2 3\ncat 7 7 7\n", p).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("cat").unwrap(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn text_dim_mismatch() {
        let err = parse_text::<f64>("2 3\ncat 1 2 3\ndog 4 5\n", Path::new("v.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn binary_truncation() {
        let mut t = EmbeddingTable::<f64>::new(2);
        t.insert("a", &[1.0, 2.0]);
        t.insert("b", &[3.0, 4.0]);
        let bytes = write_binary(&t);
        assert!(parse_binary::<f64>(&bytes[..bytes.len() - 3], Path::new("v.bin")).is_err());
        let mut header_lies = b"3 2\n".to_vec();
        header_lies.extend_from_slice(&bytes[4..]);
        assert!(parse_binary::<f64>(&header_lies, Path::new("v.bin")).is_err());
    }

    #[test]
    fn binary_and_text_agree() {
        let mut t = EmbeddingTable::<f64>::new(3);
        t.insert("alpha", &[0.1, -2.5, 1e-3]);
        t.insert("beta", &[3.25, 0.0, -0.333]);
        let dir = tempfile::tempdir().unwrap();
        let (pt, pb) = (dir.path().join("v.txt"), dir.path().join("v.bin"));
        fs::write(&pt, write_text(&t)).unwrap();
        fs::write(&pb, write_binary(&t)).unwrap();
        let a: EmbeddingTable<f64> = load_vectors(&pt, VectorFormat::Text).unwrap();
        let b: EmbeddingTable<f64> = load_vectors(&pb, VectorFormat::Binary).unwrap();
        assert_eq!(a.words(), b.words());
        for w in a.words() {
            for (x, y) in a.get(w).unwrap().iter().zip(b.get(w).unwrap()) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn idf_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("idf.tsv");
        fs::write(&p, "cell\t2.5\nthe\t0\n").unwrap();
        let m: HashMap<String, f32> = load_idf(&p).unwrap();
        assert_eq!(m["cell"], 2.5);
        fs::write(&p, "cell\t-1\n").unwrap();
        assert!(load_idf::<f64>(&p).is_err());
    }
}

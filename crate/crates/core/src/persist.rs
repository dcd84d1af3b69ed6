//! On-disk formats.
//!
//! Models, preprocessing parameters and code files share one container:
//!
//! ```text
//! offset  size  field
//! 0       4     magic: b"LHMD" (model), b"LHPP" (params), b"LHCD" (codes)
//! 4       4     format version, u32 LE (currently 1)
//! 8       8     payload length n, u64 LE
//! 16      n     payload
//! 16+n    4     CRC-32 (IEEE) of the payload, u32 LE
//! ```
//!
//! All integers are little-endian and all reals are IEEE-754 binary64
//! little-endian, so files are bit-exact across platforms. The payload
//! layouts are documented on the `*_to_bytes` functions and in
//! `docs/FORMATS.md`.
//!
//! Datasets are read from CSV or from the raw-f32 format: a 16-byte header
//! of four u32 LE values (magic `b"RF32"`, version 1, count, dim) followed
//! by `count * dim` f32 LE values, row-major.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::bitcode::{words_for, BitCode};
use crate::error::{Error, Result};
use crate::eval::Split;
use crate::preprocess::PreprocessParams;
use crate::types::{HashModel, Hyperplane};

pub const FORMAT_VERSION: u32 = 1;

pub const MODEL_MAGIC: [u8; 4] = *b"LHMD";
pub const PARAMS_MAGIC: [u8; 4] = *b"LHPP";
pub const CODES_MAGIC: [u8; 4] = *b"LHCD";
pub const RAW_F32_MAGIC: [u8; 4] = *b"RF32";
pub const RAW_F32_VERSION: u32 = 1;

const HEADER_LEN: usize = 16;

fn kind_name(magic: [u8; 4]) -> &'static str {
    match &magic {
        b"LHMD" => "model",
        b"LHPP" => "preprocess parameter",
        b"LHCD" => "code",
        _ => "raw-f32 dataset",
    }
}

/// Wraps `payload` in the versioned, checksummed container.
pub fn wrap(magic: [u8; 4], payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len() + 4);
    out.extend_from_slice(&magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out.extend_from_slice(&crc32fast::hash(payload).to_le_bytes());
    out
}

/// Validates the container and returns its payload.
pub fn unwrap(magic: [u8; 4], bytes: &[u8]) -> Result<&[u8]> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != magic {
            return Err(Error::BadMagic {
                expected: kind_name(magic),
            });
        }
        return Err(Error::Truncated {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    if bytes[..4] != magic {
        return Err(Error::BadMagic {
            expected: kind_name(magic),
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = (HEADER_LEN as u64).saturating_add(len).saturating_add(4);
    if (bytes.len() as u64) < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len() as u64,
        });
    }
    if bytes.len() as u64 > expected {
        return Err(Error::Malformed {
            line: 0,
            reason: format!("{} trailing bytes after checksum", bytes.len() as u64 - expected),
        });
    }
    let len = len as usize;
    let payload = &bytes[HEADER_LEN..HEADER_LEN + len];
    let stored = u32::from_le_bytes(bytes[HEADER_LEN + len..].try_into().unwrap());
    let computed = crc32fast::hash(payload);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    Ok(payload)
}

/// Writes to a temporary file in the destination directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, vs: &[f64]) {
        for v in vs {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| Error::Malformed {
            line: 0,
            reason: format!("payload ends early at byte {}", self.pos),
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Malformed {
            line: 0,
            reason: "length overflow".into(),
        })?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn finish(self) -> Result<()> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(Error::Malformed {
                line: 0,
                reason: format!("{} unused payload bytes", self.bytes.len() - self.pos),
            })
        }
    }
}

fn write_params(w: &mut Writer, p: &PreprocessParams) {
    w.u32(p.input_dim());
    w.u32(p.output_dim());
    w.u32(p.eigenvalues().len());
    w.f64s(p.mean());
    w.f64s(p.scale());
    w.f64s(p.eigenvalues());
    for u in p.basis() {
        w.f64s(u);
    }
}

fn read_params(r: &mut Reader) -> Result<PreprocessParams> {
    let input = r.u32()?;
    let output = r.u32()?;
    let n_eigen = r.u32()?;
    let mean = r.f64s(input)?;
    let scale = r.f64s(input)?;
    let eigenvalues = r.f64s(n_eigen)?;
    let basis = (0..output).map(|_| r.f64s(input)).collect::<Result<Vec<_>>>()?;
    PreprocessParams::from_parts(mean, scale, basis, eigenvalues)
}

/// Params payload: `input_dim u32, output_dim u32, n_eigen u32,
/// mean f64[input_dim], scale f64[input_dim], eigenvalues f64[n_eigen],
/// basis f64[output_dim][input_dim]`.
pub fn params_to_bytes(params: &PreprocessParams) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    write_params(&mut w, params);
    wrap(PARAMS_MAGIC, &w.0)
}

pub fn params_from_bytes(bytes: &[u8]) -> Result<PreprocessParams> {
    let mut r = Reader::new(unwrap(PARAMS_MAGIC, bytes)?);
    let p = read_params(&mut r)?;
    r.finish()?;
    Ok(p)
}

pub fn save_params(params: &PreprocessParams, path: &Path) -> Result<()> {
    write_atomic(path, &params_to_bytes(params))
}

pub fn load_params(path: &Path) -> Result<PreprocessParams> {
    params_from_bytes(&read_file(path)?)
}

/// Model payload: `seed u64`, the params payload, `bit_count u32`, then per
/// plane `normal f64[output_dim], offset f64`.
pub fn model_to_bytes(model: &HashModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.u64(model.seed());
    write_params(&mut w, model.preprocess());
    w.u32(model.bit_count());
    for h in model.hyperplanes() {
        w.f64s(h.normal());
        w.f64s(&[h.offset()]);
    }
    wrap(MODEL_MAGIC, &w.0)
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<HashModel> {
    let mut r = Reader::new(unwrap(MODEL_MAGIC, bytes)?);
    let seed = r.u64()?;
    let pre = read_params(&mut r)?;
    let bits = r.u32()?;
    let dim = pre.output_dim();
    let planes = (0..bits)
        .map(|i| {
            let normal = r.f64s(dim)?;
            let offset = r.f64s(1)?[0];
            Hyperplane::new(normal, offset).map_err(|e| Error::at(i, e))
        })
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    HashModel::new(planes, pre, seed)
}

pub fn save_model(model: &HashModel, path: &Path) -> Result<()> {
    write_atomic(path, &model_to_bytes(model))
}

pub fn load_model(path: &Path) -> Result<HashModel> {
    model_from_bytes(&read_file(path)?)
}

/// Codes payload: `count u64, width u32`, then each code's
/// `ceil(width / 64)` storage words as u64 LE.
pub fn codes_to_bytes(codes: &[BitCode], width: usize) -> Result<Vec<u8>> {
    let mut w = Writer(Vec::new());
    w.u64(codes.len() as u64);
    w.u32(width);
    for (i, c) in codes.iter().enumerate() {
        if c.width() != width {
            return Err(Error::at(
                i,
                Error::WidthMismatch {
                    left: width,
                    right: c.width(),
                },
            ));
        }
        for word in c.words() {
            w.u64(*word);
        }
    }
    Ok(wrap(CODES_MAGIC, &w.0))
}

/// Returns `(width, codes)`.
pub fn codes_from_bytes(bytes: &[u8]) -> Result<(usize, Vec<BitCode>)> {
    let mut r = Reader::new(unwrap(CODES_MAGIC, bytes)?);
    let count = r.u64()?;
    let width = r.u32()?;
    let words = words_for(width);
    let mut codes = Vec::new();
    for i in 0..count {
        let ws = (0..words).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        codes.push(BitCode::from_words(ws, width).map_err(|e| Error::at(i as usize, e))?);
    }
    r.finish()?;
    Ok((width, codes))
}

pub fn save_codes(codes: &[BitCode], width: usize, path: &Path) -> Result<()> {
    write_atomic(path, &codes_to_bytes(codes, width)?)
}

pub fn load_codes(path: &Path) -> Result<(usize, Vec<BitCode>)> {
    codes_from_bytes(&read_file(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    RawF32,
}

impl DatasetFormat {
    /// `.csv` is CSV; `.f32`, `.raw` and `.bin` are raw-f32.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(DatasetFormat::Csv),
            "f32" | "raw" | "bin" => Some(DatasetFormat::RawF32),
            _ => None,
        }
    }
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DatasetFormat::Csv),
            "raw-f32" => Ok(DatasetFormat::RawF32),
            other => Err(Error::InvalidParameter(format!("unknown dataset format '{other}'"))),
        }
    }
}

/// Feature vectors with optional integer labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub vectors: Vec<Vec<f64>>,
    pub labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn read_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset> {
    let bytes = read_file(path)?;
    match format {
        DatasetFormat::Csv => parse_csv(&bytes),
        DatasetFormat::RawF32 => parse_raw_f32(&bytes),
    }
}

pub fn write_dataset(dataset: &Dataset, path: &Path, format: DatasetFormat) -> Result<()> {
    let bytes = match format {
        DatasetFormat::Csv => dataset_to_csv(dataset),
        DatasetFormat::RawF32 => dataset_to_raw_f32(dataset)?,
    };
    write_atomic(path, &bytes)
}

/// One vector per row. A first row containing any non-numeric field is a
/// header; a header column named `label` holds integer labels (`-1` for
/// unlabelled). Without a header every column is a feature.
pub fn parse_csv(bytes: &[u8]) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);
    let records = reader.records();
    let mut label_col = None;
    let mut dataset = Dataset::default();
    let mut width = None;
    let mut first = true;
    for record in records {
        let record = record.map_err(|e| Error::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if first {
            first = false;
            if record.iter().any(|f| f.parse::<f64>().is_err()) {
                label_col = record.iter().position(|f| f.eq_ignore_ascii_case("label"));
                if label_col.is_some() {
                    dataset.labels = Some(Vec::new());
                }
                width = Some(record.len());
                continue;
            }
        }
        if *width.get_or_insert(record.len()) != record.len() {
            return Err(Error::Malformed {
                line,
                reason: format!("expected {} fields, found {}", width.unwrap(), record.len()),
            });
        }
        let mut v = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            if Some(j) == label_col {
                let label = field.parse::<i64>().map_err(|_| Error::Malformed {
                    line,
                    reason: format!("label '{field}' is not an integer"),
                })?;
                dataset.labels.as_mut().unwrap().push(label);
                continue;
            }
            let x = field.parse::<f64>().map_err(|_| Error::Malformed {
                line,
                reason: format!("'{field}' is not a number"),
            })?;
            if !x.is_finite() {
                return Err(Error::Malformed {
                    line,
                    reason: format!("non-finite value '{field}'"),
                });
            }
            v.push(x);
        }
        if v.is_empty() {
            return Err(Error::Malformed {
                line,
                reason: "row has no feature columns".into(),
            });
        }
        dataset.vectors.push(v);
    }
    Ok(dataset)
}

fn dataset_to_csv(dataset: &Dataset) -> Vec<u8> {
    let mut out = String::new();
    if dataset.labels.is_some() {
        let names: Vec<String> = (0..dataset.dim()).map(|j| format!("x{j}")).collect();
        out.push_str(&names.join(","));
        out.push_str(",label\n");
    }
    for (i, v) in dataset.vectors.iter().enumerate() {
        let fields: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&fields.join(","));
        if let Some(labels) = &dataset.labels {
            out.push_str(&format!(",{}", labels[i]));
        }
        out.push('\n');
    }
    out.into_bytes()
}

pub fn parse_raw_f32(bytes: &[u8]) -> Result<Dataset> {
    if bytes.len() < 16 {
        return Err(Error::Truncated {
            expected: 16,
            found: bytes.len() as u64,
        });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    if bytes[..4] != RAW_F32_MAGIC {
        return Err(Error::BadMagic {
            expected: "raw-f32 dataset",
        });
    }
    if word(1) != RAW_F32_VERSION {
        return Err(Error::UnsupportedVersion {
            found: word(1),
            supported: RAW_F32_VERSION,
        });
    }
    let (count, dim) = (word(2) as usize, word(3) as usize);
    let expected = 16 + 4 * count as u64 * dim as u64;
    if bytes.len() as u64 != expected {
        return Err(if (bytes.len() as u64) < expected {
            Error::Truncated {
                expected,
                found: bytes.len() as u64,
            }
        } else {
            Error::Malformed {
                line: 0,
                reason: format!("{} trailing bytes", bytes.len() as u64 - expected),
            }
        });
    }
    if count > 0 && dim == 0 {
        return Err(Error::Malformed {
            line: 0,
            reason: "zero dimension with non-zero count".into(),
        });
    }
    let mut vectors = Vec::with_capacity(count);
    for (i, row) in bytes[16..].chunks_exact(4 * dim.max(1)).take(count).enumerate() {
        let v: Vec<f64> = row
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
            .collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Malformed {
                line: i + 1,
                reason: "non-finite value".into(),
            });
        }
        vectors.push(v);
    }
    Ok(Dataset { vectors, labels: None })
}

fn dataset_to_raw_f32(dataset: &Dataset) -> Result<Vec<u8>> {
    let dim = dataset.dim();
    let mut out = Vec::with_capacity(16 + 4 * dim * dataset.len());
    out.extend_from_slice(&RAW_F32_MAGIC);
    out.extend_from_slice(&RAW_F32_VERSION.to_le_bytes());
    out.extend_from_slice(&(dataset.len() as u32).to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for (i, v) in dataset.vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::at(i, Error::DimensionMismatch { expected: dim, found: v.len() }));
        }
        for x in v {
            out.extend_from_slice(&(*x as f32).to_le_bytes());
        }
    }
    Ok(out)
}

/// One split name per non-empty line (`learn`, `database`/`db`, `query`).
pub fn read_splits(path: &Path) -> Result<Vec<Split>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.parse::<Split>().map_err(|_| Error::Malformed {
                line: i + 1,
                reason: format!("unknown split '{}'", l.trim()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift::sample_lifted;
    use proptest::prelude::*;

    fn model(bits: usize) -> HashModel {
        let planes = if bits == 0 {
            vec![]
        } else {
            sample_lifted(3, bits, 5).unwrap().planes.iter().map(|p| p.unlift()).collect()
        };
        let pre = PreprocessParams::from_parts(
            vec![0.5, -1.0, 2.0],
            vec![1.5, 0.25, 3.0],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.6, 0.8], vec![0.0, -0.8, 0.6]],
            vec![2.0, 0.7, 0.3],
        )
        .unwrap();
        HashModel::new(planes, pre, 77).unwrap()
    }

    #[test]
    fn model_round_trip() {
        let m = model(40);
        let back = model_from_bytes(&model_to_bytes(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn empty_model_round_trip() {
        let m = model(0);
        let bytes = model_to_bytes(&m);
        assert_eq!(model_from_bytes(&bytes).unwrap().bit_count(), 0);
    }

    #[test]
    fn corrupt_payload_is_checksum_error() {
        let mut bytes = model_to_bytes(&model(8));
        bytes[HEADER_LEN + 11] ^= 0x40;
        assert!(matches!(model_from_bytes(&bytes), Err(Error::Checksum { .. })));
    }

    #[test]
    fn distinct_container_errors() {
        let bytes = model_to_bytes(&model(8));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(model_from_bytes(&bad), Err(Error::BadMagic { .. })));
        let mut future = bytes.clone();
        future[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            model_from_bytes(&future),
            Err(Error::UnsupportedVersion { found: 2, supported: 1 })
        ));
        assert!(matches!(
            model_from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(model_from_bytes(&bytes[..10]), Err(Error::Truncated { .. })));
        assert!(matches!(
            params_from_bytes(&bytes),
            Err(Error::BadMagic { .. })
        ));
    }

    #[test]
    fn params_and_codes_round_trip() {
        let m = model(4);
        assert_eq!(&params_from_bytes(&params_to_bytes(m.preprocess())).unwrap(), m.preprocess());
        let codes = vec![BitCode::from_bits([true, false, true]), BitCode::ones(3)];
        let (w, back) = codes_from_bytes(&codes_to_bytes(&codes, 3).unwrap()).unwrap();
        assert_eq!(w, 3);
        assert_eq!(back, codes);
        assert!(codes_to_bytes(&codes, 4).is_err());
    }

    #[test]
    fn csv_examples() {
        let d = parse_csv(b"1.0,2.0\n3.0,4.0").unwrap();
        assert_eq!(d.vectors, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(d.labels.is_none());

        let d = parse_csv(b"a,label,b\n1,3,2\n4,-1,5\n").unwrap();
        assert_eq!(d.vectors, vec![vec![1.0, 2.0], vec![4.0, 5.0]]);
        assert_eq!(d.labels, Some(vec![3, -1]));
    }

    #[test]
    fn csv_rejects_bad_rows() {
        assert!(matches!(parse_csv(b"1,2\n3\n"), Err(Error::Malformed { .. })));
        assert!(matches!(parse_csv(b"1,2\n3,x\n"), Err(Error::Malformed { line: 2, .. })));
        assert!(matches!(parse_csv(b"1,NaN\n"), Err(Error::Malformed { .. })));
        assert!(matches!(parse_csv(b"1,inf\n"), Err(Error::Malformed { .. })));
        assert!(matches!(parse_csv(b"x,label\n1,2.5\n"), Err(Error::Malformed { .. })));
    }

    #[test]
    fn raw_f32_examples() {
        let mut header = Vec::new();
        header.extend_from_slice(&RAW_F32_MAGIC);
        header.extend_from_slice(&1u32.to_le_bytes());
        header.extend_from_slice(&0u32.to_le_bytes());
        header.extend_from_slice(&7u32.to_le_bytes());
        assert!(parse_raw_f32(&header).unwrap().is_empty());

        let d = Dataset {
            vectors: vec![vec![1.0, f64::from(f32::MAX)], vec![-0.5, 3.25]],
            labels: None,
        };
        let bytes = dataset_to_raw_f32(&d).unwrap();
        assert_eq!(parse_raw_f32(&bytes).unwrap(), d);
        assert!(matches!(parse_raw_f32(&bytes[..bytes.len() - 1]), Err(Error::Truncated { .. })));
        let mut nan = bytes.clone();
        nan[16..20].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(parse_raw_f32(&nan).is_err());
    }

    #[test]
    fn file_round_trip_is_atomic_and_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.lhm");
        let m = model(16);
        save_model(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), m);
        let leftovers = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }

    #[test]
    fn splits_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.txt");
        fs::write(&path, "learn\ndb\n\nquery\n").unwrap();
        assert_eq!(read_splits(&path).unwrap(), vec![Split::Learn, Split::Database, Split::Query]);
        fs::write(&path, "learn\nbogus\n").unwrap();
        assert!(matches!(read_splits(&path), Err(Error::Malformed { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn csv_and_raw_round_trip_at_f32_precision(
            rows in proptest::collection::vec(proptest::collection::vec(-1e6f32..1e6, 3), 0..20)
        ) {
            let d = Dataset {
                vectors: rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect(),
                labels: None,
            };
            let raw = parse_raw_f32(&dataset_to_raw_f32(&d).unwrap()).unwrap();
            prop_assert_eq!(&raw, &d);
            let csv = parse_csv(&dataset_to_csv(&d)).unwrap();
            prop_assert_eq!(&csv, &d);
        }
    }
}

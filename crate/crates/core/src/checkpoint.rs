//! Binary parameter container: 4-byte magic "MCD1", a JSON meta blob, then a
//! flat list of (name, shape, raw little-endian f64) records. Classifiers and
//! generation backends both serialize through it.
//!
//! Integer payloads (n-gram counts, packed contexts) ride in the same f64
//! records split into 32-bit halves, so every value is exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde_json::{json, Value};

use crate::autodiff::tensor::Tensor;
use crate::error::{Error, Result};
use crate::gen::backend::LanguageModelBackend;
use crate::gen::neural::TinyNeuralLm;
use crate::gen::ngram::NgramModel;
use crate::scalar::Scalar;
use crate::zoo::{Classifier, EncoderSpec};

const MAGIC: &[u8; 4] = b"MCD1";
const MAX_NAME: usize = 1 << 16;
const MAX_RANK: usize = 8;

/// One named tensor record, shape-first so loaders can size buffers.
pub type Record = (String, Vec<usize>, Vec<f64>);

fn bad(msg: impl Into<String>) -> Error {
    Error::Checkpoint(msg.into())
}

pub fn write_container(path: &Path, meta: &Value, records: &[Record]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    let meta_bytes = serde_json::to_vec(meta).map_err(|e| bad(format!("meta encode: {e}")))?;
    w.write_all(&(meta_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&meta_bytes)?;
    w.write_all(&(records.len() as u32).to_le_bytes())?;
    for (name, shape, data) in records {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(bad(format!("record '{name}': {numel} slots, {} values", data.len())));
        }
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(shape.len() as u32).to_le_bytes())?;
        for &d in shape {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for &v in data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_container(path: &Path) -> Result<(Value, Vec<Record>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad(format!("bad magic {magic:?}, want {MAGIC:?}")));
    }
    let meta_len = read_u32(&mut r)? as usize;
    let mut meta_bytes = vec![0u8; meta_len];
    r.read_exact(&mut meta_bytes)?;
    let meta: Value =
        serde_json::from_slice(&meta_bytes).map_err(|e| bad(format!("meta decode: {e}")))?;
    let count = read_u32(&mut r)? as usize;
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        if name_len > MAX_NAME {
            return Err(bad(format!("record name length {name_len}")));
        }
        let mut name_bytes = vec![0u8; name_len];
        r.read_exact(&mut name_bytes)?;
        let name = String::from_utf8(name_bytes).map_err(|_| bad("record name not utf-8"))?;
        let rank = read_u32(&mut r)? as usize;
        if rank > MAX_RANK {
            return Err(bad(format!("record '{name}': rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(read_u64(&mut r)? as usize);
        }
        let numel: usize = shape.iter().product();
        let mut data = Vec::with_capacity(numel);
        let mut b = [0u8; 8];
        for _ in 0..numel {
            r.read_exact(&mut b)?;
            data.push(f64::from_le_bytes(b));
        }
        records.push((name, shape, data));
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(bad("trailing bytes after last record"));
    }
    Ok((meta, records))
}

fn meta_str<'a>(meta: &'a Value, key: &str) -> Result<&'a str> {
    meta.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| bad(format!("meta is missing string field '{key}'")))
}

fn meta_u64(meta: &Value, key: &str) -> Result<u64> {
    meta.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| bad(format!("meta is missing integer field '{key}'")))
}

fn expect_artifact(meta: &Value, want: &str) -> Result<()> {
    let got = meta_str(meta, "artifact")?;
    if got != want {
        return Err(bad(format!("artifact is '{got}', want '{want}'")));
    }
    Ok(())
}

// ---------------------------------------------------------------- classifier

pub fn save_classifier<S: Scalar>(path: &Path, clf: &Classifier<S>) -> Result<()> {
    let meta = json!({
        "artifact": "classifier",
        "spec": clf.spec,
        "vocab_size": clf.vocab_size,
    });
    let records: Vec<Record> = clf
        .named_params()
        .map(|(name, t)| {
            let data = t.data().iter().map(|&v| v.to_f64().unwrap()).collect();
            (name.to_string(), t.shape().to_vec(), data)
        })
        .collect();
    write_container(path, &meta, &records)
}

pub fn load_classifier<S: Scalar>(path: &Path) -> Result<Classifier<S>> {
    let (meta, records) = read_container(path)?;
    expect_artifact(&meta, "classifier")?;
    let spec: EncoderSpec = serde_json::from_value(
        meta.get("spec").cloned().ok_or_else(|| bad("meta is missing 'spec'"))?,
    )
    .map_err(|e| bad(format!("spec decode: {e}")))?;
    let vocab_size = meta_u64(&meta, "vocab_size")? as usize;
    let tensors = records
        .into_iter()
        .map(|(name, shape, data)| {
            let vals: Option<Vec<S>> = data.iter().map(|&v| S::from_f64(v)).collect();
            let vals = vals.ok_or_else(|| bad(format!("tensor '{name}': value out of range")))?;
            Ok((name, Tensor::new(shape, vals)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Classifier::from_named(spec, vocab_size, tensors)
}

// ------------------------------------------------------------------ backends

/// u64 -> two exactly-representable f64 halves.
fn halves(v: u64) -> (f64, f64) {
    ((v >> 32) as f64, (v & 0xffff_ffff) as f64)
}

fn unhalve(hi: f64, lo: f64, what: &str) -> Result<u64> {
    let cast = |v: f64| -> Result<u64> {
        if v.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&v) {
            return Err(bad(format!("{what}: {v} is not a 32-bit half")));
        }
        Ok(v as u64)
    };
    Ok((cast(hi)? << 32) | cast(lo)?)
}

fn col(records: &mut Vec<Record>, name: &str, data: Vec<f64>) {
    records.push((name.to_string(), vec![data.len()], data));
}

pub fn save_backend(path: &Path, backend: &LanguageModelBackend) -> Result<()> {
    match backend {
        LanguageModelBackend::Ngram(m) => {
            let meta = json!({
                "artifact": "ngram",
                "order": m.order(),
                "vocab_size": m.vocab_size(),
                "lambda": m.lambda(),
            });
            // Parallel columns per context length; successor lists are
            // concatenated and sliced back by per-context length.
            let mut records = Vec::new();
            let counts = m.export_counts();
            for ctx_len in 0..m.order() {
                let (mut khi, mut klo, mut thi, mut tlo, mut slen) =
                    (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
                let (mut sid, mut scnt) = (Vec::new(), Vec::new());
                for (l, key, total, succ) in counts.iter().filter(|c| c.0 == ctx_len) {
                    debug_assert_eq!(*l, ctx_len);
                    let (h, lo) = halves(*key);
                    khi.push(h);
                    klo.push(lo);
                    let (h, lo) = halves(*total);
                    thi.push(h);
                    tlo.push(lo);
                    slen.push(succ.len() as f64);
                    for &(tok, cnt) in succ {
                        sid.push(tok as f64);
                        scnt.push(cnt as f64);
                    }
                }
                col(&mut records, &format!("o{ctx_len}/key_hi"), khi);
                col(&mut records, &format!("o{ctx_len}/key_lo"), klo);
                col(&mut records, &format!("o{ctx_len}/total_hi"), thi);
                col(&mut records, &format!("o{ctx_len}/total_lo"), tlo);
                col(&mut records, &format!("o{ctx_len}/succ_len"), slen);
                col(&mut records, &format!("o{ctx_len}/succ_id"), sid);
                col(&mut records, &format!("o{ctx_len}/succ_count"), scnt);
            }
            write_container(path, &meta, &records)
        }
        LanguageModelBackend::TinyNeural(m) => {
            let meta = json!({
                "artifact": "tiny-neural",
                "layers": m.layers(),
                "vocab_size": m.vocab_size(),
            });
            let records: Vec<Record> = m
                .named_params()
                .into_iter()
                .map(|(name, t)| (name, t.shape().to_vec(), t.data().to_vec()))
                .collect();
            write_container(path, &meta, &records)
        }
    }
}

pub fn load_backend(path: &Path) -> Result<LanguageModelBackend> {
    let (meta, records) = read_container(path)?;
    match meta_str(&meta, "artifact")? {
        "ngram" => {
            let order = meta_u64(&meta, "order")? as usize;
            let vocab_size = meta_u64(&meta, "vocab_size")? as usize;
            let lambda = meta
                .get("lambda")
                .and_then(Value::as_f64)
                .ok_or_else(|| bad("meta is missing number field 'lambda'"))?;
            let mut by_name: std::collections::HashMap<String, Vec<f64>> =
                records.into_iter().map(|(n, _, d)| (n, d)).collect();
            let mut take = |name: String| {
                by_name.remove(&name).ok_or_else(|| bad(format!("missing record '{name}'")))
            };
            let mut counts = Vec::new();
            for ctx_len in 0..order {
                let khi = take(format!("o{ctx_len}/key_hi"))?;
                let klo = take(format!("o{ctx_len}/key_lo"))?;
                let thi = take(format!("o{ctx_len}/total_hi"))?;
                let tlo = take(format!("o{ctx_len}/total_lo"))?;
                let slen = take(format!("o{ctx_len}/succ_len"))?;
                let sid = take(format!("o{ctx_len}/succ_id"))?;
                let scnt = take(format!("o{ctx_len}/succ_count"))?;
                let n = khi.len();
                if [klo.len(), thi.len(), tlo.len(), slen.len()].iter().any(|&l| l != n) {
                    return Err(bad(format!("o{ctx_len}: column lengths disagree")));
                }
                let mut at = 0usize;
                for i in 0..n {
                    let key = unhalve(khi[i], klo[i], "context key")?;
                    let total = unhalve(thi[i], tlo[i], "context total")?;
                    let len = slen[i] as usize;
                    if at + len > sid.len() || sid.len() != scnt.len() {
                        return Err(bad(format!("o{ctx_len}: successor columns truncated")));
                    }
                    let succ = (at..at + len)
                        .map(|j| {
                            let tok = unhalve(0.0, sid[j], "successor id")? as u32;
                            let cnt = unhalve(0.0, scnt[j], "successor count")? as u32;
                            Ok((tok, cnt))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    at += len;
                    counts.push((ctx_len, key, total, succ));
                }
                if at != sid.len() {
                    return Err(bad(format!("o{ctx_len}: {} stray successor entries", sid.len() - at)));
                }
            }
            if !by_name.is_empty() {
                let mut stray: Vec<&String> = by_name.keys().collect();
                stray.sort();
                return Err(bad(format!("unexpected records: {stray:?}")));
            }
            Ok(LanguageModelBackend::Ngram(NgramModel::from_counts(
                order, vocab_size, lambda, counts,
            )?))
        }
        "tiny-neural" => {
            let layers = meta_u64(&meta, "layers")? as usize;
            let vocab_size = meta_u64(&meta, "vocab_size")? as usize;
            let mut by_name: std::collections::HashMap<String, Tensor<f64>> = records
                .into_iter()
                .map(|(n, shape, d)| Ok((n, Tensor::new(shape, d)?)))
                .collect::<Result<_>>()?;
            let lm = TinyNeuralLm::from_params(layers, vocab_size, |name| {
                by_name.remove(name).ok_or_else(|| bad(format!("missing record '{name}'")))
            })?;
            if !by_name.is_empty() {
                let mut stray: Vec<&String> = by_name.keys().collect();
                stray.sort();
                return Err(bad(format!("unexpected records: {stray:?}")));
            }
            Ok(LanguageModelBackend::TinyNeural(lm))
        }
        other => Err(bad(format!("artifact '{other}' is not a backend"))),
    }
}

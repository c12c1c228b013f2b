//! Single-file index format, little-endian throughout:
//!
//! ```text
//! magic        4 bytes   "RQIX"
//! version      u32       FORMAT_VERSION
//! passages     u64       N
//! avg_length   f64
//! k1           f64
//! b            f64
//! terms        u64       T
//! N x { passage_id u64, length u32 }            ascending passage_id
//! T x { term_len u32, term utf-8,
//!       postings u32, postings x { passage_id u64, tf u32 } }
//! crc32        u32       over every preceding byte
//! ```
//!
//! Floating-point fields are stored as f64 whatever the in-memory scalar type.

use std::collections::BTreeMap;
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use super::{Bm25Params, InvertedIndex, Posting};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"RQIX";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_index<F: Scalar, W: Write>(index: &InvertedIndex<F>, mut out: W) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.write_u32::<LE>(FORMAT_VERSION)?;
    buf.write_u64::<LE>(index.passage_count() as u64)?;
    for x in [index.avg_length, index.params.k1, index.params.b] {
        buf.write_f64::<LE>(x.to_f64().expect("finite scalar"))?;
    }
    buf.write_u64::<LE>(index.postings.len() as u64)?;
    for (&id, &len) in &index.passage_lengths {
        buf.write_u64::<LE>(id)?;
        buf.write_u32::<LE>(len)?;
    }
    for (term, list) in &index.postings {
        buf.write_u32::<LE>(term.len() as u32)?;
        buf.extend_from_slice(term.as_bytes());
        buf.write_u32::<LE>(list.len() as u32)?;
        for p in list {
            buf.write_u64::<LE>(p.passage_id)?;
            buf.write_u32::<LE>(p.term_frequency)?;
        }
    }
    let crc = crc32fast::hash(&buf);
    buf.write_u32::<LE>(crc)?;
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

fn corrupt(what: impl std::fmt::Display) -> Error {
    Error::IndexFormat(format!("{what} (reader expects format version {FORMAT_VERSION})"))
}

pub fn read_index<F: Scalar, R: Read>(mut input: R) -> Result<InvertedIndex<F>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 8 || &bytes[..4] != MAGIC {
        return Err(corrupt("missing RQIX header"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(Error::IndexVersion { expected: FORMAT_VERSION, found: version });
    }
    if bytes.len() < 12 {
        return Err(corrupt("file truncated"));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != stored {
        return Err(corrupt("checksum mismatch, file is truncated or damaged"));
    }

    let mut cur = Cursor::new(&body[8..]);
    let eof = |_| corrupt("unexpected end of data");
    let n = cur.read_u64::<LE>().map_err(eof)?;
    let avg = cur.read_f64::<LE>().map_err(eof)?;
    let k1 = cur.read_f64::<LE>().map_err(eof)?;
    let b = cur.read_f64::<LE>().map_err(eof)?;
    let term_count = cur.read_u64::<LE>().map_err(eof)?;

    let mut lengths = BTreeMap::new();
    let mut last = None;
    for _ in 0..n {
        let id = cur.read_u64::<LE>().map_err(eof)?;
        let len = cur.read_u32::<LE>().map_err(eof)?;
        if last.is_some_and(|l| l >= id) {
            return Err(corrupt("passage table not strictly ascending"));
        }
        last = Some(id);
        lengths.insert(id, len);
    }

    let mut postings = BTreeMap::new();
    for _ in 0..term_count {
        let len = cur.read_u32::<LE>().map_err(eof)? as usize;
        let mut raw = vec![0u8; len];
        cur.read_exact(&mut raw).map_err(eof)?;
        let term = String::from_utf8(raw).map_err(|_| corrupt("term is not UTF-8"))?;
        let count = cur.read_u32::<LE>().map_err(eof)? as usize;
        let mut list: Vec<Posting> = Vec::with_capacity(count.min(lengths.len()));
        for _ in 0..count {
            let passage_id = cur.read_u64::<LE>().map_err(eof)?;
            let term_frequency = cur.read_u32::<LE>().map_err(eof)?;
            if term_frequency == 0 || !lengths.contains_key(&passage_id) {
                return Err(corrupt(format!("bad posting for `{term}`")));
            }
            if list.last().is_some_and(|p| p.passage_id >= passage_id) {
                return Err(corrupt(format!("postings for `{term}` not ascending")));
            }
            list.push(Posting { passage_id, term_frequency });
        }
        postings.insert(term, list);
    }
    if (cur.position() as usize) != body.len() - 8 {
        return Err(corrupt("trailing bytes after posting lists"));
    }

    let params = Bm25Params::new(F::lit(k1), F::lit(b))?;
    let index = InvertedIndex::from_parts(postings, lengths, params)?;
    let recomputed = index.avg_length.to_f64().unwrap_or(f64::NAN);
    let tol = 1e-9_f64.max(F::epsilon().to_f64().unwrap_or(0.0) * 8.0) * avg.abs().max(1.0);
    if (recomputed - avg).abs() > tol {
        return Err(corrupt(format!("stored average length {avg} disagrees with passage table ({recomputed})")));
    }
    Ok(index)
}

pub fn save_index<F: Scalar>(index: &InvertedIndex<F>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::file(path, e))?;
    write_index(index, std::io::BufWriter::new(file))
}

pub fn load_index<F: Scalar>(path: &Path) -> Result<InvertedIndex<F>> {
    let file = std::fs::File::open(path).map_err(|e| Error::file(path, e))?;
    read_index(std::io::BufReader::new(file))
}

//! Binary checkpoint format.
//!
//! ```text
//! "MGTC"            4 bytes magic
//! version           u32 LE (currently 1)
//! rng_seed          u64 LE
//! manifest_len      u32 LE
//! manifest          UTF-8, one line per parameter: name \t f32 \t d0xd1.. \t 0|1
//! payload           raw f32 LE values, parameters in manifest order
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use super::params::ParamStore;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MGTC";
pub const VERSION: u32 = 1;

pub fn encode(store: &ParamStore) -> Vec<u8> {
    let mut manifest = String::new();
    for p in store.iter() {
        let dims: Vec<String> = p.value.shape().iter().map(|d| d.to_string()).collect();
        manifest.push_str(&format!(
            "{}\tf32\t{}\t{}\n",
            p.name,
            dims.join("x"),
            u8::from(p.trainable)
        ));
    }
    let payload_len: usize = store.iter().map(|p| p.value.len() * 4).sum();
    let mut out = Vec::with_capacity(20 + manifest.len() + payload_len);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&store.seed().to_le_bytes());
    out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    out.extend_from_slice(manifest.as_bytes());
    for p in store.iter() {
        for v in p.value.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Format(format!("truncated file while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<ParamStore> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let seed = r.u64("seed")?;
    let manifest_len = r.u32("manifest length")? as usize;
    let manifest = std::str::from_utf8(r.take(manifest_len, "manifest")?)
        .map_err(|_| Error::Format("manifest is not UTF-8".into()))?;

    let mut store = ParamStore::new(seed);
    for line in manifest.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        let [name, dtype, dims, trainable] = fields[..] else {
            return Err(Error::Format(format!("malformed manifest entry `{line}`")));
        };
        if dtype != "f32" {
            return Err(Error::Format(format!("unsupported dtype `{dtype}` for `{name}`")));
        }
        let shape = dims
            .split('x')
            .map(|d| d.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Format(format!("bad shape `{dims}` for `{name}`")))?;
        let trainable = match trainable {
            "0" => false,
            "1" => true,
            other => return Err(Error::Format(format!("bad trainable flag `{other}`"))),
        };
        let n: usize = shape.iter().product();
        let raw = r.take(n * 4, name)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let value = Tensor::new(shape, data).map_err(|e| Error::Format(format!("`{name}`: {e}")))?;
        store.add(name, value, trainable)?;
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(store)
}

pub fn save_checkpoint(store: &ParamStore, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(store))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ParamStore> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ParamStore {
        let mut s = ParamStore::new(42);
        s.add("enc.W", Tensor::new(vec![2, 3], vec![0.1, -0.2, 1e-30, 3.5, -0.0, 7.0]).unwrap(), true)
            .unwrap();
        s.add("head.b", Tensor::vector(vec![1.0, 2.0]).unwrap(), false).unwrap();
        s
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let s = sample();
        let bytes = encode(&s);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.seed(), 42);
        for (a, b) in s.iter().zip(back.iter()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.trainable, b.trainable);
            let ab: Vec<u32> = a.value.data().iter().map(|v| v.to_bits()).collect();
            let bb: Vec<u32> = b.value.data().iter().map(|v| v.to_bits()).collect();
            assert_eq!(ab, bb);
        }
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn corrupted_header_and_truncation_are_format_errors() {
        let mut bytes = encode(&sample());
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));

        let bytes = encode(&sample());
        let mut v = bytes.clone();
        v[4] = 9;
        assert!(matches!(decode(&v), Err(Error::Format(m)) if m.contains("version")));
        assert!(matches!(decode(&bytes[..bytes.len() - 3]), Err(Error::Format(m)) if m.contains("truncated")));
    }
}

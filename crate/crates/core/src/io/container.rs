//! Versioned binary container of named numeric blocks.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic "SWROMBIN" | version u32 | block count u32
//! per block: name length u16 | name bytes | kind u8 | rows u64 | cols u64 | payload
//! ```
//!
//! Real blocks store `f64` bit patterns column by column, index blocks store
//! `u64`. Bit patterns are copied verbatim, so a reload is exact.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SWROMBIN";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    Real { rows: usize, cols: usize, data: Vec<f64> },
    Index(Vec<u64>),
}

impl Block {
    pub fn from_mat(m: &Mat<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for j in 0..m.ncols() {
            data.extend_from_slice(m.col_as_slice(j));
        }
        Block::Real { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Block::Real { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn from_indices(v: &[usize]) -> Self {
        Block::Index(v.iter().map(|&i| i as u64).collect())
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            Block::Real { rows, cols, .. } => (*rows, *cols),
            Block::Index(v) => (v.len(), 1),
        }
    }

    fn kind(&self) -> u8 {
        match self {
            Block::Real { .. } => 0,
            Block::Index(_) => 1,
        }
    }
}

/// Ordered collection of named blocks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Container {
    blocks: BTreeMap<String, Block>,
}

impl Container {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, block: Block) {
        self.blocks.insert(name.into(), block);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.blocks.keys().map(String::as_str)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&str, &Block)> {
        self.blocks.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn get(&self, name: &str) -> Result<&Block> {
        self.blocks.get(name).ok_or_else(|| Error::Incompatible(format!("container has no block `{name}`")))
    }

    pub fn mat(&self, name: &str) -> Result<Mat<f64>> {
        match self.get(name)? {
            Block::Real { rows, cols, data } => Ok(Mat::from_fn(*rows, *cols, |i, j| data[j * rows + i])),
            Block::Index(_) => Err(Error::Incompatible(format!("block `{name}` holds indices"))),
        }
    }

    pub fn vec(&self, name: &str) -> Result<Vec<f64>> {
        match self.get(name)? {
            Block::Real { data, .. } => Ok(data.clone()),
            Block::Index(_) => Err(Error::Incompatible(format!("block `{name}` holds indices"))),
        }
    }

    pub fn indices(&self, name: &str) -> Result<Vec<usize>> {
        match self.get(name)? {
            Block::Index(v) => Ok(v.iter().map(|&i| i as usize).collect()),
            Block::Real { .. } => Err(Error::Incompatible(format!("block `{name}` holds reals"))),
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.blocks.len() as u32).to_le_bytes())?;
        for (name, block) in &self.blocks {
            w.write_all(&(name.len() as u16).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&[block.kind()])?;
            let (rows, cols) = block.shape();
            w.write_all(&(rows as u64).to_le_bytes())?;
            w.write_all(&(cols as u64).to_le_bytes())?;
            match block {
                Block::Real { data, .. } => {
                    for x in data {
                        w.write_all(&x.to_bits().to_le_bytes())?;
                    }
                }
                Block::Index(v) => {
                    for x in v {
                        w.write_all(&x.to_le_bytes())?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to memory");
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let fail = |message: String| Error::Format { path: path.to_path_buf(), message };
        let mut r = bytes;
        let mut take = |n: usize| -> Result<&[u8]> {
            if r.len() < n {
                return Err(Error::Format { path: path.to_path_buf(), message: "truncated container".into() });
            }
            let (head, tail) = r.split_at(n);
            r = tail;
            Ok(head)
        };
        if take(8)? != MAGIC {
            return Err(fail("not a model container".into()));
        }
        let version = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        if version != VERSION {
            return Err(fail(format!("container version {version}, expected {VERSION}")));
        }
        let count = u32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        let mut out = Container::new();
        for _ in 0..count {
            let len = u16::from_le_bytes(take(2)?.try_into().expect("2 bytes")) as usize;
            let name = String::from_utf8(take(len)?.to_vec()).map_err(|_| fail("block name is not UTF-8".into()))?;
            let kind = take(1)?[0];
            let rows = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
            let cols = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes")) as usize;
            let n = rows.checked_mul(cols).ok_or_else(|| fail(format!("block `{name}` is too large")))?;
            let payload = take(n.checked_mul(8).ok_or_else(|| fail(format!("block `{name}` is too large")))?)?;
            let words = payload.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")));
            let block = match kind {
                0 => Block::Real { rows, cols, data: words.map(f64::from_bits).collect() },
                1 if cols == 1 => Block::Index(words.collect()),
                _ => return Err(fail(format!("block `{name}` has unknown kind {kind}"))),
            };
            out.insert(name, block);
        }
        if !r.is_empty() {
            return Err(fail("trailing bytes after the last block".into()));
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes, path)
    }
}

//! Jacobian tape: a file of 32-byte blocks, one per assigned index.
//!
//! Block layout, all little-endian: bytes 0–7 first operand index, 8–15
//! second operand index, 16–23 partial derivative w.r.t. the first operand,
//! 24–31 partial w.r.t. the second (IEEE-754 binary64). Block `i` describes
//! the variable with index `i`; block 0 is an all-zero dummy for the passive
//! index, and input declarations are all-zero blocks too.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::shadow::Index;

pub const BLOCK_SIZE: usize = 32;
/// Writer buffer size.
pub const WRITE_BUFFER: usize = 64 * 1024;

pub const TAPE_FILE: &str = "tape.bin";
pub const INPUTS_FILE: &str = "inputs.idx";
pub const OUTPUTS_FILE: &str = "outputs.idx";

#[derive(Debug, Error)]
pub enum TapeError {
    #[error("tape I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("block {block} refers to index {operand}, which is not recorded before it")]
    ForwardReference { block: u64, operand: u64 },
    #[error("tape length {0} is not a multiple of 32 bytes")]
    Truncated(u64),
    #[error("block {index} out of range (tape has {count} blocks)")]
    OutOfRange { index: u64, count: u64 },
    #[error("index space exhausted")]
    IndexExhausted,
    #[error("{path}:{line}: invalid index `{text}`")]
    BadIndexLine {
        path: PathBuf,
        line: usize,
        text: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> TapeError + '_ {
    move |source| TapeError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TapeBlock {
    pub idx1: Index,
    pub idx2: Index,
    pub d1: f64,
    pub d2: f64,
}

impl TapeBlock {
    pub const ZERO: TapeBlock = TapeBlock {
        idx1: Index(0),
        idx2: Index(0),
        d1: 0.0,
        d2: 0.0,
    };

    pub fn new(idx1: Index, idx2: Index, d1: f64, d2: f64) -> Self {
        TapeBlock { idx1, idx2, d1, d2 }
    }

    pub fn to_bytes(&self) -> [u8; BLOCK_SIZE] {
        let mut b = [0u8; BLOCK_SIZE];
        b[0..8].copy_from_slice(&self.idx1.0.to_le_bytes());
        b[8..16].copy_from_slice(&self.idx2.0.to_le_bytes());
        b[16..24].copy_from_slice(&self.d1.to_bits().to_le_bytes());
        b[24..32].copy_from_slice(&self.d2.to_bits().to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; BLOCK_SIZE]) -> Self {
        let word = |i: usize| {
            let mut w = [0u8; 8];
            w.copy_from_slice(&b[i..i + 8]);
            u64::from_le_bytes(w)
        };
        TapeBlock {
            idx1: Index(word(0)),
            idx2: Index(word(8)),
            d1: f64::from_bits(word(16)),
            d2: f64::from_bits(word(24)),
        }
    }

    /// Field-wise equality on raw bits (distinguishes NaN payloads and ±0).
    pub fn bit_eq(&self, other: &TapeBlock) -> bool {
        self.to_bytes() == other.to_bytes()
    }

    /// Number of (index, partial) pairs with a nonzero index.
    pub fn nonzero_pairs(&self) -> u64 {
        self.idx1.is_active() as u64 + self.idx2.is_active() as u64
    }
}

/// Destination for recorded blocks.
pub trait TapeSink {
    /// Appends a block and returns its index, the number of blocks before it.
    fn append(&mut self, block: TapeBlock) -> Result<Index, TapeError>;
    fn block_count(&self) -> u64;
}

fn check_order(count: u64, block: &TapeBlock) -> Result<Index, TapeError> {
    for operand in [block.idx1, block.idx2] {
        if operand.0 >= count {
            return Err(TapeError::ForwardReference {
                block: count,
                operand: operand.0,
            });
        }
    }
    if count == u64::MAX {
        return Err(TapeError::IndexExhausted);
    }
    Ok(Index(count))
}

/// Buffered writer for `tape.bin`.
pub struct TapeWriter {
    out: BufWriter<File>,
    path: PathBuf,
    block_count: u64,
}

impl TapeWriter {
    /// Creates or truncates the file and writes the dummy block.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, TapeError> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = TapeWriter {
            out: BufWriter::with_capacity(WRITE_BUFFER, file),
            path,
            block_count: 0,
        };
        w.out
            .write_all(&TapeBlock::ZERO.to_bytes())
            .map_err(io_err(&w.path))?;
        w.block_count = 1;
        Ok(w)
    }

    pub fn append_block(
        &mut self,
        idx1: Index,
        idx2: Index,
        d1: f64,
        d2: f64,
    ) -> Result<Index, TapeError> {
        self.append(TapeBlock::new(idx1, idx2, d1, d2))
    }

    /// Flushes and closes the file, returning the final block count.
    pub fn close(mut self) -> Result<u64, TapeError> {
        self.out.flush().map_err(io_err(&self.path))?;
        Ok(self.block_count)
    }
}

impl TapeSink for TapeWriter {
    fn append(&mut self, block: TapeBlock) -> Result<Index, TapeError> {
        let idx = check_order(self.block_count, &block)?;
        self.out
            .write_all(&block.to_bytes())
            .map_err(io_err(&self.path))?;
        self.block_count += 1;
        Ok(idx)
    }

    fn block_count(&self) -> u64 {
        self.block_count
    }
}

/// In-memory tape. `with_base` models a tape that already holds `base`
/// earlier blocks which are not kept, so fixtures can reproduce large index
/// values without writing that many blocks.
#[derive(Clone, Debug)]
pub struct MemoryTape {
    base: u64,
    blocks: Vec<TapeBlock>,
}

impl Default for MemoryTape {
    fn default() -> Self {
        MemoryTape::new()
    }
}

impl MemoryTape {
    /// A fresh tape holding just the dummy block.
    pub fn new() -> Self {
        MemoryTape {
            base: 0,
            blocks: vec![TapeBlock::ZERO],
        }
    }

    pub fn with_base(base: u64) -> Self {
        if base == 0 {
            return MemoryTape::new();
        }
        MemoryTape {
            base,
            blocks: Vec::new(),
        }
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    /// Blocks held in memory, starting at index `base()`.
    pub fn blocks(&self) -> &[TapeBlock] {
        &self.blocks
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.blocks.iter().flat_map(|b| b.to_bytes()).collect()
    }
}

impl TapeSink for MemoryTape {
    fn append(&mut self, block: TapeBlock) -> Result<Index, TapeError> {
        let idx = check_order(TapeSink::block_count(self), &block)?;
        self.blocks.push(block);
        Ok(idx)
    }

    fn block_count(&self) -> u64 {
        self.base + self.blocks.len() as u64
    }
}

/// Random access to recorded blocks.
pub trait BlockSource {
    fn block_count(&self) -> u64;
    fn block(&self, i: u64) -> Result<TapeBlock, TapeError>;
}

impl BlockSource for MemoryTape {
    fn block_count(&self) -> u64 {
        TapeSink::block_count(self)
    }

    fn block(&self, i: u64) -> Result<TapeBlock, TapeError> {
        i.checked_sub(self.base)
            .and_then(|k| self.blocks.get(k as usize))
            .copied()
            .ok_or_else(|| TapeError::OutOfRange {
                index: i,
                count: BlockSource::block_count(self),
            })
    }
}

impl BlockSource for [TapeBlock] {
    fn block_count(&self) -> u64 {
        self.len() as u64
    }

    fn block(&self, i: u64) -> Result<TapeBlock, TapeError> {
        self.get(i as usize).copied().ok_or(TapeError::OutOfRange {
            index: i,
            count: self.len() as u64,
        })
    }
}

/// A whole tape file loaded into memory. Counts block reads.
#[derive(Debug)]
pub struct TapeReader {
    bytes: Vec<u8>,
    reads: AtomicU64,
}

impl TapeReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, TapeError> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(io_err(path))?;
        TapeReader::from_bytes(bytes)
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, TapeError> {
        if !bytes.len().is_multiple_of(BLOCK_SIZE) {
            return Err(TapeError::Truncated(bytes.len() as u64));
        }
        Ok(TapeReader {
            bytes,
            reads: AtomicU64::new(0),
        })
    }

    pub fn byte_len(&self) -> u64 {
        self.bytes.len() as u64
    }

    pub fn read_block(&self, i: u64) -> Result<TapeBlock, TapeError> {
        let count = self.bytes.len() as u64 / BLOCK_SIZE as u64;
        if i >= count {
            return Err(TapeError::OutOfRange { index: i, count });
        }
        self.reads.fetch_add(1, Ordering::Relaxed);
        let start = i as usize * BLOCK_SIZE;
        let chunk: &[u8; BLOCK_SIZE] = self.bytes[start..start + BLOCK_SIZE]
            .try_into()
            .expect("slice has block size");
        Ok(TapeBlock::from_bytes(chunk))
    }

    /// Number of `read_block` calls so far.
    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn reset_reads(&self) {
        self.reads.store(0, Ordering::Relaxed);
    }

    pub fn to_vec(&self) -> Vec<TapeBlock> {
        self.bytes
            .chunks_exact(BLOCK_SIZE)
            .map(|c| TapeBlock::from_bytes(c.try_into().expect("exact chunk")))
            .collect()
    }
}

impl BlockSource for TapeReader {
    fn block_count(&self) -> u64 {
        self.bytes.len() as u64 / BLOCK_SIZE as u64
    }

    fn block(&self, i: u64) -> Result<TapeBlock, TapeError> {
        self.read_block(i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct TapeStats {
    pub blocks: u64,
    pub bytes: u64,
    pub nonzero_pairs: u64,
}

pub fn tape_stats<S: BlockSource + ?Sized>(tape: &S) -> Result<TapeStats, TapeError> {
    let blocks = tape.block_count();
    let mut nonzero_pairs = 0;
    for i in 0..blocks {
        nonzero_pairs += tape.block(i)?.nonzero_pairs();
    }
    Ok(TapeStats {
        blocks,
        bytes: blocks * BLOCK_SIZE as u64,
        nonzero_pairs,
    })
}

/// Checks that every block refers only to earlier blocks and that block 0
/// is all zero. Returns the first violation.
pub fn lint<S: BlockSource + ?Sized>(tape: &S) -> Result<(), TapeError> {
    for i in 0..tape.block_count() {
        let b = tape.block(i)?;
        if i == 0 && !b.bit_eq(&TapeBlock::ZERO) {
            return Err(TapeError::ForwardReference {
                block: 0,
                operand: b.idx1.0.max(b.idx2.0),
            });
        }
        for operand in [b.idx1, b.idx2] {
            if i > 0 && operand.0 >= i {
                return Err(TapeError::ForwardReference {
                    block: i,
                    operand: operand.0,
                });
            }
        }
    }
    Ok(())
}

pub type IndexFile = Vec<Index>;

/// One index per line, ASCII decimal, each line newline-terminated.
pub fn write_index_file(path: impl AsRef<Path>, indices: &[Index]) -> Result<(), TapeError> {
    let path = path.as_ref();
    let mut text = String::with_capacity(indices.len() * 8);
    for idx in indices {
        text.push_str(&idx.0.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_index_file(path: impl AsRef<Path>) -> Result<IndexFile, TapeError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.trim()
                .parse::<u64>()
                .map(Index)
                .map_err(|_| TapeError::BadIndexLine {
                    path: path.to_path_buf(),
                    line: n + 1,
                    text: l.to_string(),
                })
        })
        .collect()
}

/// `i: idx1 idx2 d1 d2` per block.
pub fn dump<S: BlockSource + ?Sized>(tape: &S) -> Result<String, TapeError> {
    use std::fmt::Write as _;
    let mut out = String::new();
    for i in 0..tape.block_count() {
        let b = tape.block(i)?;
        let _ = writeln!(out, "{i}: {} {} {} {}", b.idx1, b.idx2, b.d1, b.d2);
    }
    Ok(out)
}

//! Two-layer shadow storage for 8-byte variable indices.
//!
//! Every byte of memory, the register file and each temporary has one byte in
//! a "low" and one in a "high" shadow layer. For a floating-point value of
//! 4 or 8 bytes at location `A`, bytes `A..A+4` of the low layer hold the
//! less-significant half of its index and bytes `A..A+4` of the high layer
//! the more-significant half; any remaining shadow bytes of the value are
//! zero. Data moves copy both layers byte for byte, so indices survive any
//! move that keeps the first four bytes of a value together.

use std::fmt::{self, Write};

use thiserror::Error;

use crate::ir::MAX_VALUE_BYTES;

/// Identifier of a potential floating-point variable. `0` is passive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index(pub u64);

impl Index {
    pub const PASSIVE: Index = Index(0);

    pub fn is_passive(self) -> bool {
        self.0 == 0
    }

    pub fn is_active(self) -> bool {
        self.0 != 0
    }

    pub fn low_half(self) -> u32 {
        self.0 as u32
    }

    pub fn high_half(self) -> u32 {
        (self.0 >> 32) as u32
    }

    pub fn from_halves(low: u32, high: u32) -> Index {
        Index(((high as u64) << 32) | low as u64)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for Index {
    fn from(x: u64) -> Self {
        Index(x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShadowError {
    #[error("index size must be 4 or 8 bytes, got {0}")]
    BadSize(usize),
    #[error("shadow access {location:?} +{size} out of range")]
    OutOfRange { location: Location, size: usize },
}

/// A shadowed storage location.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Memory(u64),
    Register(u64),
    /// Byte `offset` within temporary `id`.
    Temp {
        id: u32,
        offset: usize,
    },
}

impl Location {
    fn shifted(self, by: usize) -> Location {
        match self {
            Location::Memory(a) => Location::Memory(a + by as u64),
            Location::Register(o) => Location::Register(o + by as u64),
            Location::Temp { id, offset } => Location::Temp {
                id,
                offset: offset + by,
            },
        }
    }
}

fn check_size(size: usize) -> Result<(), ShadowError> {
    if size == 4 || size == 8 {
        Ok(())
    } else {
        Err(ShadowError::BadSize(size))
    }
}

/// Both shadow layers of one value of up to 32 bytes, as carried through
/// expression evaluation.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct ShadowBytes {
    pub lo: [u8; MAX_VALUE_BYTES],
    pub hi: [u8; MAX_VALUE_BYTES],
}

impl Default for ShadowBytes {
    fn default() -> Self {
        ShadowBytes::ZERO
    }
}

impl fmt::Debug for ShadowBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ShadowBytes {{ lo: {}, hi: {} }}",
            hex(&self.lo),
            hex(&self.hi)
        )
    }
}

impl ShadowBytes {
    pub const ZERO: ShadowBytes = ShadowBytes {
        lo: [0; MAX_VALUE_BYTES],
        hi: [0; MAX_VALUE_BYTES],
    };

    /// Index of the value of `size` bytes starting at byte `offset`.
    pub fn index_at(&self, offset: usize, size: usize) -> Index {
        debug_assert!(size == 4 || size == 8);
        let mut lo = [0u8; 4];
        let mut hi = [0u8; 4];
        lo.copy_from_slice(&self.lo[offset..offset + 4]);
        hi.copy_from_slice(&self.hi[offset..offset + 4]);
        Index::from_halves(u32::from_le_bytes(lo), u32::from_le_bytes(hi))
    }

    /// Writes the index of a `size`-byte value at byte `offset`, zeroing the
    /// trailing shadow bytes of that value.
    pub fn set_index(&mut self, offset: usize, size: usize, idx: Index) {
        debug_assert!(size == 4 || size == 8);
        self.lo[offset..offset + size].fill(0);
        self.hi[offset..offset + size].fill(0);
        self.lo[offset..offset + 4].copy_from_slice(&idx.low_half().to_le_bytes());
        self.hi[offset..offset + 4].copy_from_slice(&idx.high_half().to_le_bytes());
    }

    /// Single value of `size` bytes carrying `idx`.
    pub fn with_index(size: usize, idx: Index) -> Self {
        let mut s = ShadowBytes::ZERO;
        s.set_index(0, size, idx);
        s
    }

    /// True if every byte in the first `size` bytes of both layers is zero.
    pub fn is_zero(&self, size: usize) -> bool {
        self.lo[..size]
            .iter()
            .chain(&self.hi[..size])
            .all(|b| *b == 0)
    }
}

const PAGE_BITS: u32 = 12;
const PAGE_SIZE: usize = 1 << PAGE_BITS;

struct Page {
    lo: [u8; PAGE_SIZE],
    hi: [u8; PAGE_SIZE],
}

/// Shadow layers for memory (4 KiB pages, allocated on first nonzero
/// write), registers and temporaries.
pub struct ShadowStore {
    pages: Vec<Option<Box<Page>>>,
    memory_size: u64,
    reg_lo: Vec<u8>,
    reg_hi: Vec<u8>,
    temp_lo: Vec<[u8; MAX_VALUE_BYTES]>,
    temp_hi: Vec<[u8; MAX_VALUE_BYTES]>,
}

impl fmt::Debug for ShadowStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShadowStore")
            .field("memory_size", &self.memory_size)
            .field("pages", &self.pages.iter().flatten().count())
            .field("registers", &self.reg_lo.len())
            .field("temps", &self.temp_lo.len())
            .finish()
    }
}

impl ShadowStore {
    pub fn new(memory_size: u64, register_size: u64, temp_count: usize) -> Self {
        ShadowStore {
            pages: std::iter::repeat_with(|| None)
                .take(memory_size.div_ceil(PAGE_SIZE as u64) as usize)
                .collect(),
            memory_size,
            reg_lo: vec![0; register_size as usize],
            reg_hi: vec![0; register_size as usize],
            temp_lo: vec![[0; MAX_VALUE_BYTES]; temp_count],
            temp_hi: vec![[0; MAX_VALUE_BYTES]; temp_count],
        }
    }

    fn page(&self, no: u64) -> Option<&Page> {
        self.pages[no as usize].as_deref()
    }

    fn check(&self, location: Location, size: usize) -> Result<(), ShadowError> {
        let ok = match location {
            Location::Memory(a) => a
                .checked_add(size as u64)
                .is_some_and(|e| e <= self.memory_size),
            Location::Register(o) => o
                .checked_add(size as u64)
                .is_some_and(|e| e <= self.reg_lo.len() as u64),
            Location::Temp { id, offset } => {
                (id as usize) < self.temp_lo.len() && offset + size <= MAX_VALUE_BYTES
            }
        };
        if ok {
            Ok(())
        } else {
            Err(ShadowError::OutOfRange { location, size })
        }
    }

    /// Copies `n` (≤ 32) bytes of both layers at `location` into a buffer.
    pub fn read_bytes(&self, location: Location, n: usize) -> Result<ShadowBytes, ShadowError> {
        self.check(location, n)?;
        let mut out = ShadowBytes::ZERO;
        match location {
            Location::Memory(addr) => {
                let off = (addr as usize) & (PAGE_SIZE - 1);
                if off + n <= PAGE_SIZE {
                    if let Some(page) = self.page(addr >> PAGE_BITS) {
                        out.lo[..n].copy_from_slice(&page.lo[off..off + n]);
                        out.hi[..n].copy_from_slice(&page.hi[off..off + n]);
                    }
                    return Ok(out);
                }
                for i in 0..n {
                    let a = addr + i as u64;
                    if let Some(page) = self.page(a >> PAGE_BITS) {
                        let off = (a as usize) & (PAGE_SIZE - 1);
                        out.lo[i] = page.lo[off];
                        out.hi[i] = page.hi[off];
                    }
                }
            }
            Location::Register(o) => {
                let o = o as usize;
                out.lo[..n].copy_from_slice(&self.reg_lo[o..o + n]);
                out.hi[..n].copy_from_slice(&self.reg_hi[o..o + n]);
            }
            Location::Temp { id, offset } => {
                let id = id as usize;
                out.lo[..n].copy_from_slice(&self.temp_lo[id][offset..offset + n]);
                out.hi[..n].copy_from_slice(&self.temp_hi[id][offset..offset + n]);
            }
        }
        Ok(out)
    }

    /// Writes the first `n` bytes of both layers of `bytes` at `location`.
    pub fn write_bytes(
        &mut self,
        location: Location,
        bytes: &ShadowBytes,
        n: usize,
    ) -> Result<(), ShadowError> {
        self.check(location, n)?;
        match location {
            Location::Memory(addr) => {
                let off = (addr as usize) & (PAGE_SIZE - 1);
                let page_no = addr >> PAGE_BITS;
                if off + n <= PAGE_SIZE {
                    if let Some(page) = self.pages[page_no as usize].as_mut() {
                        page.lo[off..off + n].copy_from_slice(&bytes.lo[..n]);
                        page.hi[off..off + n].copy_from_slice(&bytes.hi[..n]);
                        return Ok(());
                    }
                }
                for i in 0..n {
                    let a = addr + i as u64;
                    let (lo, hi) = (bytes.lo[i], bytes.hi[i]);
                    let page_no = a >> PAGE_BITS;
                    // Writing zeros into an untouched page changes nothing.
                    let slot = &mut self.pages[page_no as usize];
                    if lo == 0 && hi == 0 && slot.is_none() {
                        continue;
                    }
                    let page = slot.get_or_insert_with(|| {
                        Box::new(Page {
                            lo: [0; PAGE_SIZE],
                            hi: [0; PAGE_SIZE],
                        })
                    });
                    let off = (a as usize) & (PAGE_SIZE - 1);
                    page.lo[off] = lo;
                    page.hi[off] = hi;
                }
            }
            Location::Register(o) => {
                let o = o as usize;
                self.reg_lo[o..o + n].copy_from_slice(&bytes.lo[..n]);
                self.reg_hi[o..o + n].copy_from_slice(&bytes.hi[..n]);
            }
            Location::Temp { id, offset } => {
                let id = id as usize;
                self.temp_lo[id][offset..offset + n].copy_from_slice(&bytes.lo[..n]);
                self.temp_hi[id][offset..offset + n].copy_from_slice(&bytes.hi[..n]);
            }
        }
        Ok(())
    }

    pub fn write_index(
        &mut self,
        location: Location,
        size: usize,
        idx: Index,
    ) -> Result<(), ShadowError> {
        check_size(size)?;
        self.write_bytes(location, &ShadowBytes::with_index(size, idx), size)
    }

    pub fn read_index(&self, location: Location, size: usize) -> Result<Index, ShadowError> {
        check_size(size)?;
        Ok(self.read_bytes(location, size)?.index_at(0, size))
    }

    /// Copies both layers of `nbytes` from `src` to `dst`, in chunks of at
    /// most 32 bytes. Overlapping ranges behave like `memmove`.
    pub fn copy_shadow(
        &mut self,
        src: Location,
        dst: Location,
        nbytes: usize,
    ) -> Result<(), ShadowError> {
        self.check(src, nbytes)?;
        self.check(dst, nbytes)?;
        let chunks: Vec<(usize, ShadowBytes, usize)> = (0..nbytes)
            .step_by(MAX_VALUE_BYTES)
            .map(|start| {
                let n = (nbytes - start).min(MAX_VALUE_BYTES);
                self.read_bytes(src.shifted(start), n)
                    .map(|b| (start, b, n))
            })
            .collect::<Result<_, _>>()?;
        for (start, bytes, n) in chunks {
            self.write_bytes(dst.shifted(start), &bytes, n)?;
        }
        Ok(())
    }

    /// Grows the temporary shadow to at least `count` temporaries.
    pub fn ensure_temps(&mut self, count: usize) {
        if self.temp_lo.len() < count {
            self.temp_lo.resize(count, [0; MAX_VALUE_BYTES]);
            self.temp_hi.resize(count, [0; MAX_VALUE_BYTES]);
        }
    }

    /// Memory shadow as `addr: lo-bytes hi-bytes`, one line per 4-byte group
    /// with a nonzero byte in either layer, ascending by address.
    pub fn dump_memory(&self) -> String {
        let mut out = String::new();
        for (no, page) in self.pages.iter().enumerate() {
            let Some(page) = page else { continue };
            let no = no as u64;
            for group in (0..PAGE_SIZE).step_by(4) {
                let lo = &page.lo[group..group + 4];
                let hi = &page.hi[group..group + 4];
                if lo.iter().chain(hi).any(|b| *b != 0) {
                    let addr = (no << PAGE_BITS) + group as u64;
                    let _ = writeln!(out, "{addr:#010x}: {} {}", hex(lo), hex(hi));
                }
            }
        }
        out
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

use std::fmt;
use std::str::FromStr;

/// Storage class of a constant, temporary, register slot or memory access.
///
/// Vector kinds carry no lane interpretation; the opcode decides whether a
/// `V128` is two binary64 lanes or four binary32 lanes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ValueKind {
    I8,
    I32,
    I64,
    F32,
    F64,
    V128,
    V256,
}

impl ValueKind {
    pub const ALL: [ValueKind; 7] = [
        ValueKind::I8,
        ValueKind::I32,
        ValueKind::I64,
        ValueKind::F32,
        ValueKind::F64,
        ValueKind::V128,
        ValueKind::V256,
    ];

    /// Size in bytes.
    pub const fn size(self) -> usize {
        match self {
            ValueKind::I8 => 1,
            ValueKind::I32 | ValueKind::F32 => 4,
            ValueKind::I64 | ValueKind::F64 => 8,
            ValueKind::V128 => 16,
            ValueKind::V256 => 32,
        }
    }

    pub const fn is_float(self) -> bool {
        matches!(self, ValueKind::F32 | ValueKind::F64)
    }

    pub const fn name(self) -> &'static str {
        match self {
            ValueKind::I8 => "I8",
            ValueKind::I32 => "I32",
            ValueKind::I64 => "I64",
            ValueKind::F32 => "F32",
            ValueKind::F64 => "F64",
            ValueKind::V128 => "V128",
            ValueKind::V256 => "V256",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ValueKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ValueKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown value kind `{s}`"))
    }
}

/// Maximum value width in bytes (V256).
pub const MAX_VALUE_BYTES: usize = 32;

/// A raw-bit value of a given kind, stored little-endian.
///
/// Bytes beyond `kind.size()` are always zero, so two values compare equal
/// exactly when kind and significant bytes agree.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Value {
    kind: ValueKind,
    bytes: [u8; MAX_VALUE_BYTES],
}

impl Value {
    pub const fn zero(kind: ValueKind) -> Self {
        Value {
            kind,
            bytes: [0; MAX_VALUE_BYTES],
        }
    }

    /// Builds a value from its little-endian bytes. Panics if `bytes` is
    /// shorter than the kind's size.
    pub fn from_le_bytes(kind: ValueKind, bytes: &[u8]) -> Self {
        let mut v = Value::zero(kind);
        let n = kind.size();
        v.bytes[..n].copy_from_slice(&bytes[..n]);
        v
    }

    /// Builds a scalar (≤ 8 bytes) from the low bits of `bits`.
    pub fn from_bits(kind: ValueKind, bits: u64) -> Self {
        debug_assert!(kind.size() <= 8);
        let mut v = Value::zero(kind);
        let n = kind.size();
        v.bytes[..n].copy_from_slice(&bits.to_le_bytes()[..n]);
        v
    }

    pub fn f64(x: f64) -> Self {
        Value::from_bits(ValueKind::F64, x.to_bits())
    }

    pub fn f32(x: f32) -> Self {
        Value::from_bits(ValueKind::F32, x.to_bits() as u64)
    }

    pub fn i64(x: u64) -> Self {
        Value::from_bits(ValueKind::I64, x)
    }

    pub fn i32(x: u32) -> Self {
        Value::from_bits(ValueKind::I32, x as u64)
    }

    pub fn flag(b: bool) -> Self {
        Value::from_bits(ValueKind::I8, b as u64)
    }

    pub fn f64x(lanes: &[f64]) -> Self {
        let kind = match lanes.len() {
            2 => ValueKind::V128,
            4 => ValueKind::V256,
            n => panic!("no vector kind holds {n} binary64 lanes"),
        };
        let mut v = Value::zero(kind);
        for (i, x) in lanes.iter().enumerate() {
            v.set_f64_lane(i, *x);
        }
        v
    }

    pub fn f32x4(lanes: [f32; 4]) -> Self {
        let mut v = Value::zero(ValueKind::V128);
        for (i, x) in lanes.iter().enumerate() {
            v.set_f32_lane(i, *x);
        }
        v
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn size(&self) -> usize {
        self.kind.size()
    }

    /// The significant bytes.
    pub fn bytes(&self) -> &[u8] {
        &self.bytes[..self.kind.size()]
    }

    /// Low 8 bytes, zero-extended.
    pub fn bits(&self) -> u64 {
        let mut b = [0u8; 8];
        b.copy_from_slice(&self.bytes[..8]);
        u64::from_le_bytes(b)
    }

    pub fn as_f64(&self) -> f64 {
        f64::from_bits(self.bits())
    }

    pub fn as_f32(&self) -> f32 {
        f32::from_bits(self.bits() as u32)
    }

    pub fn f64_lane(&self, lane: usize) -> f64 {
        let mut b = [0u8; 8];
        b.copy_from_slice(&self.bytes[8 * lane..8 * lane + 8]);
        f64::from_le_bytes(b)
    }

    pub fn f32_lane(&self, lane: usize) -> f32 {
        let mut b = [0u8; 4];
        b.copy_from_slice(&self.bytes[4 * lane..4 * lane + 4]);
        f32::from_le_bytes(b)
    }

    pub fn set_f64_lane(&mut self, lane: usize, x: f64) {
        self.bytes[8 * lane..8 * lane + 8].copy_from_slice(&x.to_le_bytes());
    }

    pub fn set_f32_lane(&mut self, lane: usize, x: f32) {
        self.bytes[4 * lane..4 * lane + 4].copy_from_slice(&x.to_le_bytes());
    }

    /// Interprets a scalar floating-point value as binary64 (exact widening
    /// for F32).
    pub fn to_f64_lossless(&self) -> Option<f64> {
        match self.kind {
            ValueKind::F64 => Some(self.as_f64()),
            ValueKind::F32 => Some(self.as_f32() as f64),
            _ => None,
        }
    }

    /// Lowercase hex of the significant bytes read as one little-endian
    /// integer, without leading zeros.
    pub fn to_hex(&self) -> String {
        let bytes = self.bytes();
        let mut s = String::with_capacity(2 * bytes.len());
        for b in bytes.iter().rev() {
            s.push_str(&format!("{b:02x}"));
        }
        let trimmed = s.trim_start_matches('0');
        if trimmed.is_empty() {
            "0".to_string()
        } else {
            trimmed.to_string()
        }
    }

    /// Parses hex digits (no `0x` prefix) as a little-endian integer of the
    /// kind's width.
    pub fn from_hex(kind: ValueKind, digits: &str) -> Result<Self, String> {
        if digits.is_empty() {
            return Err("empty hex literal".into());
        }
        let digits = digits.trim_start_matches('0');
        if digits.len() > 2 * kind.size() {
            return Err(format!("hex literal too wide for {kind}"));
        }
        let mut v = Value::zero(kind);
        let chars: Vec<char> = digits.chars().collect();
        for (byte_idx, chunk) in chars.rchunks(2).enumerate() {
            let text: String = chunk.iter().collect();
            v.bytes[byte_idx] = u8::from_str_radix(&text, 16)
                .map_err(|_| format!("invalid hex digits `{text}`"))?;
        }
        Ok(v)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ValueKind::F64 => write!(f, "F64({:?})", self.as_f64()),
            ValueKind::F32 => write!(f, "F32({:?})", self.as_f32()),
            k => write!(f, "{k}(0x{})", self.to_hex()),
        }
    }
}

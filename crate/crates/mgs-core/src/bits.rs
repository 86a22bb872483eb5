// SPDX-License-Identifier: Apache-2.0

//! MSB-first bit streams and self-delimiting integer codes.
//!
//! All codes cover `x >= 1`; callers shift zero-capable quantities into the
//! positive domain themselves. Encoded lengths are available analytically via
//! [`CodeFamily::len`] and always equal the number of bits actually written,
//! which is what the per-vertex cost planner relies on.

use alloc::vec::Vec;
use core::fmt;

/// Largest Fibonacci numbers first overflow u64 at F(93); the table covers
/// every encodable value. Index i holds F(i+2) of the classic sequence
/// (1, 2, 3, 5, ...), the denominations used by the Fibonacci code.
const FIB: [u64; 92] = {
    let mut t = [0u64; 92];
    t[0] = 1;
    t[1] = 2;
    let mut i = 2;
    while i < 92 {
        t[i] = t[i - 1] + t[i - 2];
        i += 1;
    }
    t
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeError {
    /// Ran off the end of the stream; `bit` is the failing read position.
    UnexpectedEnd { bit: usize },
    /// Integer codes only cover values >= 1.
    NonPositive,
    /// Zeta shell parameter outside 1..=7.
    UnsupportedZeta(u8),
    /// Requested fixed width above 64 bits.
    WidthTooLarge(u32),
    /// The nonempty STOP-list form was handed an empty list.
    EmptyList,
    /// Decoded data is structurally impossible (corrupt stream).
    Corrupt(&'static str),
}

impl fmt::Display for CodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeError::UnexpectedEnd { bit } => write!(f, "unexpected end of bit stream at bit {bit}"),
            CodeError::NonPositive => write!(f, "integer codes require values >= 1"),
            CodeError::UnsupportedZeta(k) => write!(f, "zeta shell parameter {k} outside 1..=7"),
            CodeError::WidthTooLarge(w) => write!(f, "fixed width {w} exceeds 64 bits"),
            CodeError::EmptyList => write!(f, "nonempty STOP list form requires at least one value"),
            CodeError::Corrupt(what) => write!(f, "corrupt stream: {what}"),
        }
    }
}

impl core::error::Error for CodeError {}

/// Growable MSB-first bit buffer.
#[derive(Default, Clone)]
pub struct BitSink {
    buf: Vec<u8>,
    len: usize,
}

impl BitSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len_bits(&self) -> usize {
        self.len
    }

    pub fn write_bit(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.buf.push(0);
        }
        if bit {
            self.buf[self.len / 8] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, width: u32) -> Result<(), CodeError> {
        if width > 64 {
            return Err(CodeError::WidthTooLarge(width));
        }
        for i in (0..width).rev() {
            self.write_bit((value >> i) & 1 == 1);
        }
        Ok(())
    }

    /// Final byte is zero-padded.
    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }
}

/// Read cursor over an MSB-first bit stream.
#[derive(Clone)]
pub struct BitSource<'a> {
    bytes: &'a [u8],
    pos: usize,
    len: usize,
}

impl<'a> BitSource<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0, len: bytes.len() * 8 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    /// Repositions the cursor; used by the sampled random-access index.
    pub fn seek(&mut self, bit: usize) {
        self.pos = bit;
    }

    pub fn remaining_bits(&self) -> usize {
        self.len.saturating_sub(self.pos)
    }

    pub fn read_bit(&mut self) -> Result<bool, CodeError> {
        if self.pos >= self.len {
            return Err(CodeError::UnexpectedEnd { bit: self.pos });
        }
        let bit = self.bytes[self.pos / 8] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, width: u32) -> Result<u64, CodeError> {
        if width > 64 {
            return Err(CodeError::WidthTooLarge(width));
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }
}

/// The self-delimiting code families available to the encoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeFamily {
    Fibonacci,
    Gamma,
    Delta,
    /// Shell parameter k in 1..=7; zeta-1 coincides with gamma.
    Zeta(u8),
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeFamily::Fibonacci => write!(f, "fibonacci"),
            CodeFamily::Gamma => write!(f, "gamma"),
            CodeFamily::Delta => write!(f, "delta"),
            CodeFamily::Zeta(k) => write!(f, "zeta{k}"),
        }
    }
}

impl core::str::FromStr for CodeFamily {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, CodeError> {
        match s {
            "fibonacci" | "fib" => Ok(CodeFamily::Fibonacci),
            "gamma" => Ok(CodeFamily::Gamma),
            "delta" => Ok(CodeFamily::Delta),
            _ => {
                let k = s
                    .strip_prefix("zeta")
                    .map(|t| t.trim_start_matches('-'))
                    .and_then(|t| t.parse::<u8>().ok())
                    .ok_or(CodeError::Corrupt("unknown code family name"))?;
                CodeFamily::Zeta(k).validated()
            }
        }
    }
}

fn floor_log2(x: u64) -> u32 {
    63 - x.leading_zeros()
}

impl CodeFamily {
    pub fn validated(self) -> Result<Self, CodeError> {
        if let CodeFamily::Zeta(k) = self {
            if !(1..=7).contains(&k) {
                return Err(CodeError::UnsupportedZeta(k));
            }
        }
        Ok(self)
    }

    /// Appends the codeword for `x >= 1` and returns its bit length.
    pub fn encode(self, sink: &mut BitSink, x: u64) -> Result<u32, CodeError> {
        if x == 0 {
            return Err(CodeError::NonPositive);
        }
        match self {
            CodeFamily::Gamma => {
                let n = floor_log2(x);
                sink.write_bits(1, n + 1)?; // n zeros then the marker one
                sink.write_bits(x, n)?; // low n bits; the leading one is implicit
                Ok(2 * n + 1)
            }
            CodeFamily::Delta => {
                let n = floor_log2(x);
                let header = CodeFamily::Gamma.encode(sink, u64::from(n) + 1)?;
                sink.write_bits(x, n)?;
                Ok(header + n)
            }
            CodeFamily::Fibonacci => {
                let top = fib_index(x);
                let mut rest = x;
                let mut word: u128 = 0;
                for i in (0..=top).rev() {
                    if FIB[i] <= rest {
                        rest -= FIB[i];
                        word |= 1u128 << i;
                    }
                }
                // Denomination bits in ascending index order, then the
                // terminator one that forms the unique "11".
                for i in 0..=top {
                    sink.write_bit(word >> i & 1 == 1);
                }
                sink.write_bit(true);
                Ok(top as u32 + 2)
            }
            CodeFamily::Zeta(k) => {
                self.validated()?;
                let k = u32::from(k);
                let h = floor_log2(x) / k;
                sink.write_bits(1, h + 1)?; // h zeros then the marker one
                let low = 1u128 << (h * k);
                let span = (1u128 << ((h + 1) * k)) - low;
                let r = u128::from(x) - low;
                Ok(h + 1 + write_minimal_binary(sink, r, span)?)
            }
        }
    }

    pub fn decode(self, src: &mut BitSource<'_>) -> Result<u64, CodeError> {
        match self {
            CodeFamily::Gamma => {
                let n = read_unary_zeros(src)?;
                Ok(1 << n | src.read_bits(n)?)
            }
            CodeFamily::Delta => {
                let gn = read_unary_zeros(src)?;
                let n = ((1 << gn | src.read_bits(gn)?) - 1) as u32;
                if n > 63 {
                    return Err(CodeError::Corrupt("delta length header overflows u64"));
                }
                Ok(1 << n | src.read_bits(n)?)
            }
            CodeFamily::Fibonacci => {
                let mut x: u128 = 0;
                let mut prev = false;
                for i in 0..=FIB.len() {
                    if src.read_bit()? {
                        if prev {
                            return u64::try_from(x)
                                .map_err(|_| CodeError::Corrupt("fibonacci value overflows u64"));
                        }
                        if i >= FIB.len() {
                            return Err(CodeError::Corrupt("fibonacci codeword too long"));
                        }
                        x += u128::from(FIB[i]);
                        prev = true;
                    } else {
                        prev = false;
                    }
                }
                Err(CodeError::Corrupt("fibonacci codeword too long"))
            }
            CodeFamily::Zeta(k) => {
                self.validated()?;
                let k = u32::from(k);
                let h = read_unary_zeros(src)?;
                if h * k > 63 {
                    return Err(CodeError::Corrupt("zeta shell overflows u64"));
                }
                let low = 1u128 << (h * k);
                let span = (1u128 << ((h + 1) * k)) - low;
                let r = read_minimal_binary(src, span)?;
                u64::try_from(low + r).map_err(|_| CodeError::Corrupt("zeta value overflows u64"))
            }
        }
    }

    /// Exact codeword length in bits; equals what [`Self::encode`] writes.
    pub fn len(self, x: u64) -> Result<u32, CodeError> {
        if x == 0 {
            return Err(CodeError::NonPositive);
        }
        match self {
            CodeFamily::Gamma => Ok(2 * floor_log2(x) + 1),
            CodeFamily::Delta => {
                let n = floor_log2(x);
                Ok(CodeFamily::Gamma.len(u64::from(n) + 1)? + n)
            }
            CodeFamily::Fibonacci => Ok(fib_index(x) as u32 + 2),
            CodeFamily::Zeta(k) => {
                self.validated()?;
                let k = u32::from(k);
                let h = floor_log2(x) / k;
                let low = 1u128 << (h * k);
                let span = (1u128 << ((h + 1) * k)) - low;
                Ok(h + 1 + minimal_binary_len(u128::from(x) - low, span))
            }
        }
    }
}

/// Index into `FIB` of the largest denomination <= x.
fn fib_index(x: u64) -> usize {
    debug_assert!(x >= 1);
    FIB.iter().rposition(|&f| f <= x).unwrap()
}

fn read_unary_zeros(src: &mut BitSource<'_>) -> Result<u32, CodeError> {
    let mut n = 0;
    while !src.read_bit()? {
        n += 1;
    }
    Ok(n)
}

/// Minimal binary code of r in [0, span): values below 2^ceil(log2 span) -
/// span take one bit fewer. Widths can exceed 64 bits for the widest zeta
/// shells, hence the split writes.
fn write_minimal_binary(sink: &mut BitSink, r: u128, span: u128) -> Result<u32, CodeError> {
    debug_assert!(r < span);
    if span == 1 {
        return Ok(0);
    }
    let s = ceil_log2(span);
    let short = (1u128 << s) - span;
    if r < short {
        write_bits_wide(sink, r, s - 1)?;
        Ok(s - 1)
    } else {
        write_bits_wide(sink, r + short, s)?;
        Ok(s)
    }
}

fn read_minimal_binary(src: &mut BitSource<'_>, span: u128) -> Result<u128, CodeError> {
    if span == 1 {
        return Ok(0);
    }
    let s = ceil_log2(span);
    let short = (1u128 << s) - span;
    let head = read_bits_wide(src, s - 1)?;
    if head < short {
        Ok(head)
    } else {
        Ok((head << 1 | src.read_bit()? as u128) - short)
    }
}

fn write_bits_wide(sink: &mut BitSink, value: u128, width: u32) -> Result<(), CodeError> {
    if width > 64 {
        sink.write_bits((value >> 64) as u64, width - 64)?;
        sink.write_bits(value as u64, 64)
    } else {
        sink.write_bits(value as u64, width)
    }
}

fn read_bits_wide(src: &mut BitSource<'_>, width: u32) -> Result<u128, CodeError> {
    if width > 64 {
        let high = u128::from(src.read_bits(width - 64)?);
        Ok(high << 64 | u128::from(src.read_bits(64)?))
    } else {
        Ok(u128::from(src.read_bits(width)?))
    }
}

fn minimal_binary_len(r: u128, span: u128) -> u32 {
    if span == 1 {
        return 0;
    }
    let s = ceil_log2(span);
    if r < (1u128 << s) - span {
        s - 1
    } else {
        s
    }
}

fn ceil_log2(x: u128) -> u32 {
    debug_assert!(x >= 1);
    128 - (x - 1).leading_zeros()
}

/// Maps signed deltas onto 0, 1, 2, ... as 0 -> 0, -1 -> 1, 1 -> 2, -2 -> 3.
pub fn zigzag(d: i64) -> u64 {
    ((d << 1) ^ (d >> 63)) as u64
}

pub fn unzigzag(z: u64) -> i64 {
    (z >> 1) as i64 ^ -((z & 1) as i64)
}

/// STOP-terminated list, caller knows it cannot be empty: each value is
/// followed by one continuation bit (1 = more, 0 = stop). Costs sum(len) + k.
pub fn write_stop_list_nonempty(
    sink: &mut BitSink,
    family: CodeFamily,
    values: &[u64],
) -> Result<(), CodeError> {
    if values.is_empty() {
        return Err(CodeError::EmptyList);
    }
    for (i, &v) in values.iter().enumerate() {
        family.encode(sink, v)?;
        sink.write_bit(i + 1 < values.len());
    }
    Ok(())
}

pub fn read_stop_list_nonempty(
    src: &mut BitSource<'_>,
    family: CodeFamily,
) -> Result<Vec<u64>, CodeError> {
    let mut out = Vec::new();
    loop {
        out.push(family.decode(src)?);
        if !src.read_bit()? {
            return Ok(out);
        }
    }
}

/// STOP-terminated list that may be empty: one presence bit, then the
/// nonempty form. An empty list costs exactly one 0 bit.
pub fn write_stop_list(
    sink: &mut BitSink,
    family: CodeFamily,
    values: &[u64],
) -> Result<(), CodeError> {
    sink.write_bit(!values.is_empty());
    if !values.is_empty() {
        write_stop_list_nonempty(sink, family, values)?;
    }
    Ok(())
}

pub fn read_stop_list(src: &mut BitSource<'_>, family: CodeFamily) -> Result<Vec<u64>, CodeError> {
    if src.read_bit()? {
        read_stop_list_nonempty(src, family)
    } else {
        Ok(Vec::new())
    }
}

pub fn stop_list_nonempty_bits(family: CodeFamily, values: &[u64]) -> Result<u64, CodeError> {
    let mut bits = values.len() as u64;
    for &v in values {
        bits += u64::from(family.len(v)?);
    }
    Ok(bits)
}

pub fn stop_list_bits(family: CodeFamily, values: &[u64]) -> Result<u64, CodeError> {
    if values.is_empty() {
        Ok(1)
    } else {
        Ok(1 + stop_list_nonempty_bits(family, values)?)
    }
}

//! The single-state ANS variant used by the hiding scheme.
//!
//! The state lives in `I = [2^(T-vn), 2^T)` between steps. [`encode_step`]
//! shrinks the state by the symbol's frequency and hands out an `n`-bit slot,
//! pulling `v*n`-bit chunks from the I/O stack whenever the state is too small;
//! [`decode_step`] undoes it exactly, pushing chunks back when the state grows
//! past `2^T`.

use crate::bitio::BitChannel;
use crate::error::{Error, Result};

/// Alphabet size and the coder's bit widths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodecParams {
    alphabet: usize,
    state_bits: u32,
    slot_bits: u32,
    renorm_mult: u32,
}

impl Default for CodecParams {
    /// `B = 256`, `T = 16`, `n = 16`, `v = 1`.
    fn default() -> Self {
        Self {
            alphabet: 256,
            state_bits: 16,
            slot_bits: 16,
            renorm_mult: 1,
        }
    }
}

impl CodecParams {
    /// Validates and builds a parameter set. `t`, `n`, `v` are the state
    /// exponent, the slot width and the renormalization multiplier.
    pub fn new(alphabet: usize, t: u32, n: u32, v: u32) -> Result<Self> {
        let fail = |m: String| Err(Error::InvalidParams(m));
        if !(1..=256).contains(&alphabet) {
            return fail(format!("alphabet size {alphabet} outside 1..=256"));
        }
        if !(1..=31).contains(&n) {
            return fail(format!("slot width n={n} outside 1..=31"));
        }
        if v == 0 {
            return fail("renormalization multiplier v must be at least 1".into());
        }
        let chunk = v.checked_mul(n).filter(|&c| c <= 64);
        let Some(chunk) = chunk else {
            return fail(format!("chunk width v*n = {v}*{n} exceeds 64 bits"));
        };
        if t < chunk {
            return fail(format!("need T >= v*n, got T={t}, v*n={chunk}"));
        }
        // Intermediate states reach f(s) * 2^T < 2^(T+n), and a chunk read
        // shifts by v*n; both must fit a u64.
        if t + n.max(chunk) > 64 {
            return fail(format!("T + max(n, v*n) = {} exceeds 64", t + n.max(chunk)));
        }
        if alphabet as u64 > 1u64 << n {
            return fail(format!("alphabet size {alphabet} exceeds 2^n = {}", 1u64 << n));
        }
        Ok(Self {
            alphabet,
            state_bits: t,
            slot_bits: n,
            renorm_mult: v,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    /// `T`.
    pub fn state_bits(&self) -> u32 {
        self.state_bits
    }

    /// `n`.
    pub fn slot_bits(&self) -> u32 {
        self.slot_bits
    }

    /// `v`.
    pub fn renorm_mult(&self) -> u32 {
        self.renorm_mult
    }

    /// Bits moved per renormalization: `v*n`.
    pub fn chunk_bits(&self) -> u32 {
        self.renorm_mult * self.slot_bits
    }

    /// `2^n`, the sum of every frequency table.
    pub fn total(&self) -> u64 {
        1u64 << self.slot_bits
    }

    /// Lower end of the state interval, `2^(T-vn)`.
    pub fn state_low(&self) -> u64 {
        1u64 << (self.state_bits - self.chunk_bits())
    }

    /// Exclusive upper end of the state interval, `2^T`.
    pub fn state_high(&self) -> u64 {
        1u64 << self.state_bits
    }
}

/// Integer symbol frequencies summing to `2^n`, plus their running sums.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrequencyTable {
    freqs: Vec<u32>,
    cum: Vec<u32>,
    slot_bits: u32,
}

impl FrequencyTable {
    pub fn new(freqs: Vec<u32>, slot_bits: u32) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::InvalidTable("empty alphabet".into()));
        }
        if !(1..=31).contains(&slot_bits) {
            return Err(Error::InvalidTable(format!("slot width {slot_bits} outside 1..=31")));
        }
        let mut cum = Vec::with_capacity(freqs.len() + 1);
        let mut acc = 0u64;
        cum.push(0);
        for &f in &freqs {
            acc += f as u64;
            if acc > 1u64 << slot_bits {
                break;
            }
            cum.push(acc as u32);
        }
        if acc != 1u64 << slot_bits {
            return Err(Error::InvalidTable(format!(
                "frequencies must sum to 2^{slot_bits}"
            )));
        }
        Ok(Self {
            freqs,
            cum,
            slot_bits,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.freqs.len()
    }

    pub fn slot_bits(&self) -> u32 {
        self.slot_bits
    }

    pub fn total(&self) -> u32 {
        self.cum[self.freqs.len()]
    }

    pub fn freq(&self, s: usize) -> u32 {
        self.freqs[s]
    }

    /// `c(s) = f(0) + ... + f(s-1)`; `cum(B)` is the total.
    pub fn cum(&self, s: usize) -> u32 {
        self.cum[s]
    }

    pub fn freqs(&self) -> &[u32] {
        &self.freqs
    }

    /// The symbol whose slot range `[c(s), c(s+1))` contains `slot`.
    /// Zero-frequency symbols own an empty range and are never returned.
    pub fn slot_to_symbol(&self, slot: u32) -> usize {
        debug_assert!(slot < self.total());
        self.cum.partition_point(|&c| c <= slot) - 1
    }

    /// Probability of each symbol under the table.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.freqs.iter().map(|&f| f as f64 / total).collect()
    }
}

/// Shrinks `x` by `f(s)` and returns the slot `c(s) + x mod f(s)` together
/// with the new state. Chunks of `v*n` bits are read from `io` first while
/// `x < f(s) * 2^(T-vn)`.
pub fn encode_step<C: BitChannel + ?Sized>(
    params: &CodecParams,
    x: u64,
    s: usize,
    table: &FrequencyTable,
    io: &mut C,
) -> Result<(u32, u64)> {
    check_table(params, table)?;
    let f = table.freqs.get(s).copied().ok_or_else(|| {
        Error::InvalidTable(format!("symbol {s} outside alphabet of {}", table.alphabet()))
    })?;
    if f == 0 {
        return Err(Error::ZeroFrequency { symbol: s });
    }
    if x == 0 {
        return Err(Error::InvalidParams("coder state must be nonzero".into()));
    }
    let chunk = params.chunk_bits();
    let bound = f as u64 * params.state_low();
    let mut x = x;
    while x < bound {
        let d = io.read_bits(chunk)?;
        x = shl(x, chunk) | d;
    }
    let f = f as u64;
    let slot = table.cum[s] as u64 + x % f;
    Ok((slot as u32, x / f))
}

/// Inverse of [`encode_step`]: maps the slot back to its symbol, rebuilds
/// `f(s) * x + slot - c(s)`, and pushes `v*n`-bit chunks to `io` while the
/// state is at least `2^T`.
pub fn decode_step<C: BitChannel + ?Sized>(
    params: &CodecParams,
    x: u64,
    slot: u32,
    table: &FrequencyTable,
    io: &mut C,
) -> Result<(usize, u64)> {
    check_table(params, table)?;
    if slot >= table.total() {
        return Err(Error::InvalidTable(format!("slot {slot} outside table")));
    }
    let s = table.slot_to_symbol(slot);
    let f = table.freqs[s] as u64;
    let mut x = f
        .checked_mul(x)
        .and_then(|v| v.checked_add((slot - table.cum[s]) as u64))
        .ok_or_else(|| Error::InvalidParams("coder state overflow".into()))?;
    let chunk = params.chunk_bits();
    let high = params.state_high();
    while x >= high {
        io.write_bits(x & mask(chunk), chunk)?;
        x = shr(x, chunk);
    }
    Ok((s, x))
}

fn check_table(params: &CodecParams, table: &FrequencyTable) -> Result<()> {
    if table.slot_bits != params.slot_bits {
        return Err(Error::InvalidTable(format!(
            "table uses n={}, coder uses n={}",
            table.slot_bits, params.slot_bits
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[inline]
fn shl(x: u64, bits: u32) -> u64 {
    x.checked_shl(bits).unwrap_or(0)
}

#[inline]
pub(crate) fn shr(x: u64, bits: u32) -> u64 {
    x.checked_shr(bits).unwrap_or(0)
}

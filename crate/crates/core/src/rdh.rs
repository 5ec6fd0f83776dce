//! Sequence embedding and extraction.
//!
//! Each host symbol `h` is pushed through the host table with
//! [`encode_step`], which draws message bits into the state and yields a
//! slot; the slot is then read back through the stego table with
//! [`decode_step`], which picks the stego symbol and returns surplus state
//! bits to the message stack. Extraction walks the stego sequence backwards
//! with the roles of the two tables swapped.
//!
//! Static mode derives both tables once from a known host distribution.
//! Dynamic mode learns the host distribution on the fly: the embedder first
//! counts every symbol, then un-counts them one by one while embedding, so the
//! extractor, which re-counts while walking backwards, sees the same counts at
//! every position.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ans::{decode_step, encode_step, CodecParams, FrequencyTable};
use crate::bfi::{bfi_estimate, quantize, BfiConfig, CumulativePmf};
use crate::bitio::{BitStack, MessageContainer};
use crate::error::{Error, Result};

/// How the host distribution reaches the extractor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// The host distribution is known to both sides.
    Static,
    /// The distribution is learned adaptively; nothing is transmitted.
    Dynamic,
}

/// The integer host and stego tables the coder runs on.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TablePair {
    pub host: FrequencyTable,
    pub stego: FrequencyTable,
}

impl TablePair {
    /// Quantizes `pcx` as the host table and its BFI estimate as the stego
    /// table, both to total `2^n`. Every symbol with positive mass keeps a
    /// nonzero frequency.
    pub fn derive(pcx: &CumulativePmf, cfg: &BfiConfig, params: &CodecParams) -> Result<Self> {
        if pcx.len() != params.alphabet() {
            return Err(Error::DimensionMismatch(format!(
                "distribution has {} symbols, codec expects {}",
                pcx.len(),
                params.alphabet()
            )));
        }
        let n = params.slot_bits();
        let outcome = bfi_estimate(pcx, cfg)?;
        let positive = |pc: &CumulativePmf| pc.pmf().iter().map(|&p| p > 0.0).collect::<Vec<_>>();
        Ok(Self {
            host: quantize(pcx, n, &positive(pcx))?,
            stego: quantize(&outcome.pmf, n, &positive(&outcome.pmf))?,
        })
    }

    /// Tables for the empirical distribution given by `counts`.
    pub fn from_counts(counts: &[u32], cfg: &BfiConfig, params: &CodecParams) -> Result<Self> {
        Self::derive(&CumulativePmf::from_counts(counts)?, cfg, params)
    }
}

/// Memo of [`TablePair::from_counts`] keyed by the exact count vector. Table
/// derivation is a pure function of the counts, so a hit returns exactly what
/// a fresh derivation would.
#[derive(Debug)]
pub struct TableCache {
    cfg: BfiConfig,
    params: CodecParams,
    capacity: usize,
    map: HashMap<Vec<u32>, Arc<TablePair>>,
}

impl TableCache {
    pub const DEFAULT_CAPACITY: usize = 4096;

    pub fn new(cfg: BfiConfig, params: CodecParams) -> Self {
        Self::with_capacity(cfg, params, Self::DEFAULT_CAPACITY)
    }

    pub fn with_capacity(cfg: BfiConfig, params: CodecParams, capacity: usize) -> Self {
        Self {
            cfg,
            params,
            capacity: capacity.max(1),
            map: HashMap::new(),
        }
    }

    pub fn config(&self) -> &BfiConfig {
        &self.cfg
    }

    pub fn params(&self) -> &CodecParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Fails unless the cache was built for the settings in `side`.
    pub fn check(&self, side: &SideInfo) -> Result<()> {
        if self.params != side.params || self.cfg != side.cfg {
            return Err(Error::InvalidParams("table cache built for other settings".into()));
        }
        Ok(())
    }

    pub fn get(&mut self, counts: &[u32]) -> Result<Arc<TablePair>> {
        if let Some(pair) = self.map.get(counts) {
            return Ok(Arc::clone(pair));
        }
        let pair = Arc::new(TablePair::from_counts(counts, &self.cfg, &self.params)?);
        if self.map.len() >= self.capacity {
            self.map.clear();
        }
        self.map.insert(counts.to_vec(), Arc::clone(&pair));
        Ok(pair)
    }
}

/// Per-symbol occurrence counts with an all-ones floor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptiveModel {
    counts: Vec<u32>,
}

impl AdaptiveModel {
    pub fn new(alphabet: usize) -> Self {
        Self {
            counts: vec![1; alphabet],
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn increment(&mut self, s: usize) {
        self.counts[s] += 1;
    }

    /// Removes one occurrence of `s`; the floor of one is never crossed.
    pub fn decrement(&mut self, s: usize) -> Result<()> {
        match self.counts.get_mut(s) {
            Some(c) if *c > 1 => {
                *c -= 1;
                Ok(())
            }
            _ => Err(Error::InvalidDistribution(format!(
                "count of symbol {s} would drop below one"
            ))),
        }
    }
}

/// Everything extraction needs besides the stego symbols and, in static
/// mode, the host distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct SideInfo {
    pub final_state: u64,
    /// Bits the coder left on top of the message stack; extraction starts
    /// from them.
    pub residue: BitStack,
    /// Real message bits drawn into the stego sequence.
    pub message_bits: u64,
    /// Zero bits drawn after the message ran dry.
    pub pad_count: u64,
    pub params: CodecParams,
    pub mode: Mode,
    pub cfg: BfiConfig,
}

impl SideInfo {
    /// Bits drawn from the message stack minus the bits the coder left on it.
    pub fn net_bits(&self) -> i64 {
        (self.message_bits + self.pad_count) as i64 - self.residue.len() as i64
    }

    pub(crate) fn check_mode(&self, mode: Mode) -> Result<()> {
        if self.mode != mode {
            return Err(Error::Format(format!(
                "payload was embedded in {:?} mode",
                self.mode
            )));
        }
        Ok(())
    }
}

/// A stego sequence and its side information.
#[derive(Clone, Debug, PartialEq)]
pub struct StegoPayload {
    pub stego: Vec<u8>,
    pub side: SideInfo,
}

impl StegoPayload {
    pub fn net_bits(&self) -> i64 {
        self.side.net_bits()
    }

    /// Net bits per stego symbol.
    pub fn rate(&self) -> f64 {
        if self.stego.is_empty() {
            0.0
        } else {
            self.net_bits() as f64 / self.stego.len() as f64
        }
    }
}

/// Host and message recovered by extraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extracted {
    pub host: Vec<u8>,
    /// The drawn part of the message, first bit on top.
    pub message: BitStack,
}

/// Forward half of the codec: one embedding step at a time.
#[derive(Debug)]
pub struct Embedder<'m> {
    params: CodecParams,
    state: u64,
    msg: &'m mut MessageContainer,
}

impl<'m> Embedder<'m> {
    pub fn new(params: CodecParams, msg: &'m mut MessageContainer) -> Self {
        Self {
            params,
            state: 1,
            msg,
        }
    }

    /// Hides bits in host symbol `h` and returns the stego symbol.
    pub fn step(&mut self, h: u8, tables: &TablePair) -> Result<u8> {
        let (slot, x) = encode_step(&self.params, self.state, h as usize, &tables.host, self.msg)?;
        let (y, x) = decode_step(&self.params, x, slot, &tables.stego, self.msg)?;
        self.state = x;
        Ok(y as u8)
    }

    /// Detaches the residue from the message and packages the side
    /// information.
    pub fn finish(self, mode: Mode, cfg: BfiConfig) -> SideInfo {
        SideInfo {
            residue: self.msg.take_residue(),
            final_state: self.state,
            message_bits: self.msg.consumed_message_bits(),
            pad_count: self.msg.pad_count(),
            params: self.params,
            mode,
            cfg,
        }
    }
}

/// Backward half of the codec. Stego symbols must be fed last to first.
#[derive(Debug)]
pub struct Extractor {
    params: CodecParams,
    state: u64,
    io: BitStack,
    remaining: usize,
}

impl Extractor {
    /// `len` is the number of stego symbols that will be fed.
    pub fn new(side: &SideInfo, len: usize) -> Self {
        Self {
            params: side.params,
            state: side.final_state,
            io: side.residue.clone(),
            remaining: len,
        }
    }

    /// Recovers the host symbol behind stego symbol `y`.
    pub fn step(&mut self, y: u8, tables: &TablePair) -> Result<u8> {
        let pos = self.remaining.checked_sub(1).ok_or_else(|| {
            Error::desync(0, "more stego symbols than announced")
        })?;
        let fail = |e: Error| Error::desync(pos, e.to_string());
        if self.state == 0 || self.state >= self.params.state_high() {
            return Err(Error::desync(pos, format!("state {} out of range", self.state)));
        }
        let (slot, x) = encode_step(&self.params, self.state, y as usize, &tables.stego, &mut self.io)
            .map_err(fail)?;
        let (h, x) = decode_step(&self.params, x, slot, &tables.host, &mut self.io).map_err(fail)?;
        self.state = x;
        self.remaining = pos;
        Ok(h as u8)
    }

    /// Unwinds the warm-up reads and returns the recovered message with the
    /// `pad_count` synthesized zeros removed.
    pub fn finish(mut self, side: &SideInfo) -> Result<BitStack> {
        let (message_bits, pad_count) = (side.message_bits, side.pad_count);
        if self.remaining != 0 {
            return Err(Error::desync(self.remaining, "stego sequence ended early"));
        }
        let chunk = self.params.chunk_bits();
        while self.state >> chunk != 0 {
            self.io.write(self.state, chunk)?;
            self.state >>= chunk;
        }
        if self.state != 1 {
            return Err(Error::desync(0, format!("start state {} instead of 1", self.state)));
        }
        if self.io.len() as u64 != message_bits + pad_count {
            return Err(Error::desync(
                0,
                format!(
                    "recovered {} bits, expected {}",
                    self.io.len(),
                    message_bits + pad_count
                ),
            ));
        }
        self.io.drop_bottom(pad_count as usize);
        Ok(self.io)
    }
}

pub(crate) fn check_symbols(seq: &[u8], params: &CodecParams) -> Result<()> {
    match seq.iter().position(|&s| s as usize >= params.alphabet()) {
        Some(i) => Err(Error::InvalidDistribution(format!(
            "symbol {} at position {i} outside alphabet of {}",
            seq[i],
            params.alphabet()
        ))),
        None => Ok(()),
    }
}

/// Embeds with explicitly given tables.
pub fn embed_with_tables(
    host: &[u8],
    tables: &TablePair,
    msg: &mut MessageContainer,
    params: &CodecParams,
    cfg: &BfiConfig,
) -> Result<StegoPayload> {
    check_symbols(host, params)?;
    let mut emb = Embedder::new(*params, msg);
    let stego = host
        .iter()
        .map(|&h| emb.step(h, tables))
        .collect::<Result<Vec<_>>>()?;
    Ok(StegoPayload {
        stego,
        side: emb.finish(Mode::Static, *cfg),
    })
}

/// Inverse of [`embed_with_tables`].
pub fn extract_with_tables(payload: &StegoPayload, tables: &TablePair) -> Result<Extracted> {
    let mut ext = Extractor::new(&payload.side, payload.stego.len());
    let mut host = vec![0u8; payload.stego.len()];
    for (i, &y) in payload.stego.iter().enumerate().rev() {
        host[i] = ext.step(y, tables)?;
    }
    let message = ext.finish(&payload.side)?;
    Ok(Extracted { host, message })
}

/// Embeds `msg` into `host`, whose symbols follow the distribution `pcx`.
/// The untouched tail of the message stays in `msg`.
pub fn embed_static(
    host: &[u8],
    pcx: &CumulativePmf,
    cfg: &BfiConfig,
    msg: &mut MessageContainer,
    params: &CodecParams,
) -> Result<StegoPayload> {
    let tables = TablePair::derive(pcx, cfg, params)?;
    embed_with_tables(host, &tables, msg, params, cfg)
}

/// Recovers host and message from a static-mode payload; `pcx` must be the
/// distribution used for embedding.
pub fn extract_static(payload: &StegoPayload, pcx: &CumulativePmf) -> Result<Extracted> {
    payload.side.check_mode(Mode::Static)?;
    let tables = TablePair::derive(pcx, &payload.side.cfg, &payload.side.params)?;
    extract_with_tables(payload, &tables)
}

/// Counts of every host symbol on top of the all-ones floor.
pub fn learn_counts(host: &[u8], alphabet: usize) -> AdaptiveModel {
    let mut model = AdaptiveModel::new(alphabet);
    for &h in host.iter().rev() {
        model.increment(h as usize);
    }
    model
}

/// Embeds without any prior knowledge of the host distribution.
pub fn embed_dynamic(
    host: &[u8],
    msg: &mut MessageContainer,
    params: &CodecParams,
    cfg: &BfiConfig,
) -> Result<StegoPayload> {
    let mut cache = TableCache::new(*cfg, *params);
    embed_dynamic_traced(host, msg, &mut cache, &mut |_, _| {})
}

/// [`embed_dynamic`] with a caller-owned cache; `trace` sees the tables used
/// at each position.
pub fn embed_dynamic_traced(
    host: &[u8],
    msg: &mut MessageContainer,
    cache: &mut TableCache,
    trace: &mut dyn FnMut(usize, &TablePair),
) -> Result<StegoPayload> {
    let params = *cache.params();
    let cfg = *cache.config();
    check_symbols(host, &params)?;
    let mut model = learn_counts(host, params.alphabet());
    let mut emb = Embedder::new(params, msg);
    let mut stego = Vec::with_capacity(host.len());
    for (i, &h) in host.iter().enumerate() {
        model.decrement(h as usize)?;
        let tables = cache.get(model.counts())?;
        trace(i, &tables);
        stego.push(emb.step(h, &tables)?);
    }
    debug_assert!(model.counts().iter().all(|&c| c == 1));
    Ok(StegoPayload {
        stego,
        side: emb.finish(Mode::Dynamic, cfg),
    })
}

/// Recovers host and message from a dynamic-mode payload.
pub fn extract_dynamic(payload: &StegoPayload) -> Result<Extracted> {
    let mut cache = TableCache::new(payload.side.cfg, payload.side.params);
    extract_dynamic_traced(payload, &mut cache, &mut |_, _| {}).map(|(out, _)| out)
}

/// [`extract_dynamic`] with a caller-owned cache and a table trace; also
/// returns the final adaptive model.
pub fn extract_dynamic_traced(
    payload: &StegoPayload,
    cache: &mut TableCache,
    trace: &mut dyn FnMut(usize, &TablePair),
) -> Result<(Extracted, AdaptiveModel)> {
    let side = &payload.side;
    side.check_mode(Mode::Dynamic)?;
    cache.check(side)?;
    let mut model = AdaptiveModel::new(side.params.alphabet());
    let mut ext = Extractor::new(side, payload.stego.len());
    let mut host = vec![0u8; payload.stego.len()];
    for (i, &y) in payload.stego.iter().enumerate().rev() {
        let tables = cache.get(model.counts())?;
        trace(i, &tables);
        let h = ext.step(y, &tables)?;
        model.increment(h as usize);
        host[i] = h;
    }
    let message = ext.finish(side)?;
    Ok((Extracted { host, message }, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfi::{expected_distortion, expected_rate};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};

    fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> BitStack {
        BitStack::from_bits_top_down((0..len).map(|_| rng.gen::<bool>()))
    }

    fn top_bits(s: &BitStack, k: usize) -> Vec<bool> {
        s.iter_top_down().take(k).collect()
    }

    fn random_pmf(rng: &mut ChaCha8Rng, b: usize) -> CumulativePmf {
        let w: Vec<f64> = (0..b).map(|_| rng.gen::<f64>().powi(3) + 1e-3).collect();
        CumulativePmf::from_pmf(&w.iter().map(|x| x / w.iter().sum::<f64>()).collect::<Vec<_>>())
            .unwrap()
    }

    fn sample(rng: &mut ChaCha8Rng, pc: &CumulativePmf, len: usize) -> Vec<u8> {
        (0..len)
            .map(|_| {
                let u: f64 = rng.gen();
                pc.as_slice().partition_point(|&v| v <= u).min(pc.len() - 1) as u8
            })
            .collect()
    }

    fn normal(sigma: f64) -> CumulativePmf {
        let w: Vec<f64> = (0..256)
            .map(|k| (-(k as f64 - 127.5).powi(2) / (2.0 * sigma * sigma)).exp())
            .collect();
        let t: f64 = w.iter().sum();
        CumulativePmf::from_pmf(&w.iter().map(|x| x / t).collect::<Vec<_>>()).unwrap()
    }

    fn digest(t: &TablePair) -> u64 {
        let mut h = DefaultHasher::new();
        t.hash(&mut h);
        h.finish()
    }

    /// Host table `(96, 96, 64)` over `{a, b, c}` with `n = 8`, `v = 2`,
    /// `T = 24`; the stego table flattens it.
    fn small_setup() -> (CodecParams, TablePair) {
        let p = CodecParams::new(3, 24, 8, 2).unwrap();
        let tables = TablePair {
            host: FrequencyTable::new(vec![96, 96, 64], 8).unwrap(),
            stego: FrequencyTable::new(vec![86, 85, 85], 8).unwrap(),
        };
        (p, tables)
    }

    #[test]
    fn aab_golden_vector() {
        let (p, tables) = small_setup();
        let bits = BitStack::from_bytes(&[0xB5, 0x3C, 0x0F, 0xA2, 0x71, 0x9E]);
        let mut msg = MessageContainer::new(bits.clone());
        let out = embed_with_tables(&[0, 0, 1], &tables, &mut msg, &p, &BfiConfig::default()).unwrap();
        let side = &out.side;
        // 1 + 0xB53C = 111932 -> slot 92 -> b, x = 85*1165 + 6 = 99031
        // 99031 -> slot 55 -> a, x = 86*1031 + 55 = 88721
        // 88721 -> slot 96+17 -> b, x = 85*924 + 27 = 78567
        assert_eq!(
            (out.stego.clone(), side.final_state, side.message_bits, side.pad_count),
            (vec![1, 0, 1], 78_567, 16, 0)
        );
        assert!(side.residue.is_empty());
        let back = extract_with_tables(&out, &tables).unwrap();
        assert_eq!(back.host, vec![0, 0, 1]);
        assert_eq!(top_bits(&back.message, 64), top_bits(&bits, 16));
    }

    #[test]
    fn identical_tables_change_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pc = normal(40.0);
        let host = sample(&mut rng, &pc, 4096);
        let bits = random_bits(&mut rng, 1000);
        let cfg = BfiConfig::with_alpha(f64::INFINITY);
        let mut msg = MessageContainer::new(bits.clone());
        let out = embed_static(&host, &pc, &cfg, &mut msg, &CodecParams::default()).unwrap();
        assert_eq!(out.stego, host);
        assert_eq!(out.net_bits(), 0);
        assert_eq!(out.side.final_state, 1);
        let mut whole = msg.into_payload();
        whole.push_stack(&out.side.residue);
        assert_eq!(whole, bits);
    }

    #[test]
    fn identical_tables_with_empty_message() {
        let pc = normal(40.0);
        let host: Vec<u8> = (0..300).map(|i| (100 + i % 50) as u8).collect();
        let cfg = BfiConfig::with_alpha(f64::INFINITY);
        let params = CodecParams::default();
        let mut msg = MessageContainer::new(BitStack::new());
        let out = embed_static(&host, &pc, &cfg, &mut msg, &params).unwrap();
        assert_eq!(out.stego, host);
        assert_eq!(out.net_bits(), 0);
        let back = extract_static(&out, &pc).unwrap();
        assert_eq!(back.host, host);
        assert!(back.message.is_empty());

        let mut msg = MessageContainer::new(BitStack::new());
        let out = embed_dynamic(&host, &mut msg, &params, &cfg).unwrap();
        assert_eq!(out.stego, host);
        assert_eq!(extract_dynamic(&out).unwrap().host, host);
    }

    #[test]
    fn static_round_trip_with_padding() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pc = normal(30.0);
        let host = sample(&mut rng, &pc, 2000);
        let bits = random_bits(&mut rng, 50);
        let mut msg = MessageContainer::new(bits.clone());
        let out = embed_static(&host, &pc, &BfiConfig::with_alpha(1.01), &mut msg, &CodecParams::default())
            .unwrap();
        assert!(out.side.pad_count > 0);
        assert_eq!(out.side.message_bits, 50);
        let back = extract_static(&out, &pc).unwrap();
        assert_eq!(back.host, host);
        assert_eq!(back.message, bits);
    }

    #[test]
    fn static_round_trips_across_alphas() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = CodecParams::default();
        for &alpha in &[1.0, 1.0001, 1.001, 1.01, 1.4] {
            let pc = random_pmf(&mut rng, 256);
            let host = sample(&mut rng, &pc, 1024);
            let bits = random_bits(&mut rng, 8 * 1024);
            let mut msg = MessageContainer::new(bits.clone());
            let out = embed_static(&host, &pc, &BfiConfig::with_alpha(alpha), &mut msg, &params).unwrap();
            assert_eq!(out.side.pad_count, 0);
            let back = extract_static(&out, &pc).unwrap();
            assert_eq!(back.host, host, "alpha {alpha}");
            assert_eq!(
                top_bits(&back.message, usize::MAX),
                top_bits(&bits, out.side.message_bits as usize)
            );
        }
    }

    #[test]
    fn other_parameter_sets_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (t, n, v) in [(24, 12, 1), (32, 8, 2), (31, 10, 3), (20, 20, 1)] {
            let params = CodecParams::new(256, t, n, v).unwrap();
            let pc = random_pmf(&mut rng, 256);
            let host = sample(&mut rng, &pc, 700);
            let bits = random_bits(&mut rng, 6000);
            let mut msg = MessageContainer::new(bits.clone());
            let out = embed_static(&host, &pc, &BfiConfig::with_alpha(1.001), &mut msg, &params).unwrap();
            let back = extract_static(&out, &pc).unwrap();
            assert_eq!(back.host, host, "params {t},{n},{v}");
            assert_eq!(
                top_bits(&back.message, usize::MAX),
                top_bits(&bits, out.side.message_bits as usize)
            );
        }
    }

    #[test]
    fn dynamic_round_trip_and_model_synchrony() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = CodecParams::default();
        let cfg = BfiConfig::with_alpha(1.01);
        let host = sample(&mut rng, &normal(3.0), 600);
        let bits = random_bits(&mut rng, 6000);
        let mut msg = MessageContainer::new(bits.clone());
        let mut cache = TableCache::new(cfg, params);
        let mut forward = Vec::new();
        let out =
            embed_dynamic_traced(&host, &mut msg, &mut cache, &mut |i, t| forward.push((i, digest(t))))
                .unwrap();
        assert!(out.net_bits() > 0);

        let mut fresh = TableCache::new(cfg, params);
        let mut backward = Vec::new();
        let (back, model) =
            extract_dynamic_traced(&out, &mut fresh, &mut |i, t| backward.push((i, digest(t))))
                .unwrap();
        backward.reverse();
        assert_eq!(forward, backward);
        assert_eq!(back.host, host);
        assert_eq!(
            top_bits(&back.message, usize::MAX),
            top_bits(&bits, out.side.message_bits as usize)
        );
        assert_eq!(model, learn_counts(&host, 256));
    }

    #[test]
    fn learning_then_unlearning_returns_to_ones() {
        let host = [3u8, 3, 0, 7, 3, 1];
        let mut model = learn_counts(&host, 8);
        assert_eq!(model.counts(), &[2, 2, 1, 4, 1, 1, 1, 2]);
        for &h in &host {
            model.decrement(h as usize).unwrap();
        }
        assert_eq!(model, AdaptiveModel::new(8));
        assert!(model.decrement(3).is_err());
    }

    #[test]
    fn tampering_never_panics() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pc = normal(25.0);
        let params = CodecParams::default();
        let host = sample(&mut rng, &pc, 512);
        let bits = random_bits(&mut rng, 4096);
        let mut msg = MessageContainer::new(bits);
        let out = embed_static(&host, &pc, &BfiConfig::with_alpha(1.001), &mut msg, &params).unwrap();
        let mut caught = 0;
        for k in 0..200 {
            let mut bad = out.clone();
            let i = rng.gen_range(0..bad.stego.len());
            bad.stego[i] = bad.stego[i].wrapping_add(rng.gen_range(1..=255));
            if k % 3 == 0 {
                bad.side.final_state ^= 1 << rng.gen_range(0..16);
            }
            match extract_static(&bad, &pc) {
                Err(Error::Desync { .. }) => caught += 1,
                Err(e) => panic!("unexpected error {e}"),
                Ok(back) => assert!(back.host != host || bad.stego == out.stego),
            }
        }
        assert!(caught > 0);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let pc = normal(25.0);
        let mut msg = MessageContainer::new(BitStack::new());
        let out = embed_static(&[120, 130], &pc, &BfiConfig::default(), &mut msg, &CodecParams::default())
            .unwrap();
        assert!(matches!(extract_dynamic(&out), Err(Error::Format(_))));
    }

    #[test]
    fn absent_host_symbol_is_rejected() {
        let mut w = vec![0.0; 256];
        w[10] = 0.5;
        w[11] = 0.5;
        let pc = CumulativePmf::from_pmf(&w).unwrap();
        let mut msg = MessageContainer::new(BitStack::new());
        let err = embed_static(&[10, 12], &pc, &BfiConfig::default(), &mut msg, &CodecParams::default())
            .unwrap_err();
        assert!(matches!(err, Error::ZeroFrequency { symbol: 12 }));
    }

    #[test]
    fn cache_hits_match_fresh_derivation() {
        let cfg = BfiConfig::with_alpha(1.01);
        let params = CodecParams::default();
        let mut cache = TableCache::with_capacity(cfg, params, 2);
        let counts: Vec<u32> = (0..256).map(|k| 1 + (k % 7) as u32).collect();
        let a = cache.get(&counts).unwrap();
        let b = cache.get(&counts).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(*a, TablePair::from_counts(&counts, &cfg, &params).unwrap());
        let mut other = counts.clone();
        other[0] += 1;
        cache.get(&other).unwrap();
        other[1] += 1;
        cache.get(&other).unwrap();
        assert!(cache.len() <= 2);
        assert_eq!(*cache.get(&counts).unwrap(), *a);
    }

    #[test]
    fn rate_and_distortion_follow_the_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pc = normal(256.0);
        let params = CodecParams::default();
        let cfg = BfiConfig::with_alpha(1.001);
        let n = 65536;
        let host = sample(&mut rng, &pc, n);
        let mut msg = MessageContainer::new(random_bits(&mut rng, 3 * n));
        let out = embed_static(&host, &pc, &cfg, &mut msg, &params).unwrap();
        let tables = TablePair::derive(&pc, &cfg, &params).unwrap();
        let (px, py) = (tables.host.probabilities(), tables.stego.probabilities());
        let expected = expected_rate(&px, &py);
        assert!((out.rate() - expected).abs() < 0.05, "{} vs {expected}", out.rate());
        let mse = host
            .iter()
            .zip(&out.stego)
            .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
            .sum::<f64>()
            / n as f64;
        let want = expected_distortion(&px, &py).unwrap();
        assert!((mse - want).abs() < 0.05 * want + 0.5, "{mse} vs {want}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn static_round_trip(seed in any::<u64>(), b in 2usize..=256, len in 1usize..600,
                             alpha_ix in 0usize..5, extra in 0usize..4000) {
            let alpha = [1.0, 1.0001, 1.001, 1.01, 1.4][alpha_ix];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = CodecParams::new(b, 16, 16, 1).unwrap();
            let pc = random_pmf(&mut rng, b);
            let host = sample(&mut rng, &pc, len);
            let bits = random_bits(&mut rng, extra);
            let mut msg = MessageContainer::new(bits.clone());
            let out = embed_static(&host, &pc, &BfiConfig::with_alpha(alpha), &mut msg, &params).unwrap();
            prop_assert_eq!(out.stego.len(), host.len());
            let back = extract_static(&out, &pc).unwrap();
            prop_assert_eq!(back.host, host);
            prop_assert_eq!(top_bits(&back.message, usize::MAX), top_bits(&bits, out.side.message_bits as usize));
        }

        #[test]
        fn dynamic_round_trip(seed in any::<u64>(), b in 2usize..=16, len in 1usize..200,
                              alpha_ix in 0usize..4) {
            let alpha = [1.0001, 1.001, 1.01, 1.4][alpha_ix];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = CodecParams::new(b, 16, 16, 1).unwrap();
            let pc = random_pmf(&mut rng, b);
            let host = sample(&mut rng, &pc, len);
            let bits = random_bits(&mut rng, 8 * len);
            let mut msg = MessageContainer::new(bits.clone());
            let out = embed_dynamic(&host, &mut msg, &params, &BfiConfig::with_alpha(alpha)).unwrap();
            let back = extract_dynamic(&out).unwrap();
            prop_assert_eq!(back.host, host);
            prop_assert_eq!(top_bits(&back.message, usize::MAX), top_bits(&bits, out.side.message_bits as usize));
        }
    }
}

//! Rate-distortion experiments on i.i.d. discrete-normal hosts.
//!
//! Hosts and messages come from ChaCha8 streams keyed by the seed and `sigma`,
//! so every mode and `alpha` at the same `(sigma, seed, n)` sees the same host
//! and the same message.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ans::CodecParams;
use crate::bfi::{expected_distortion, expected_rate, BfiConfig, CumulativePmf};
use crate::bitio::{BitStack, MessageContainer};
use crate::error::{Error, Result};
use crate::image::sequence_mse;
use crate::rdh::{embed_dynamic, embed_static, Mode, StegoPayload, TablePair};

/// Message bits offered per host symbol; comfortably above any achievable
/// rate, so sweeps never pad.
pub const MESSAGE_BITS_PER_SYMBOL: usize = 3;

/// What the `sigma` of a discrete normal measures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Spread {
    #[default]
    StdDev,
    Variance,
}

impl Spread {
    pub fn std_dev(self, sigma: f64) -> f64 {
        match self {
            Spread::StdDev => sigma,
            Spread::Variance => sigma.sqrt(),
        }
    }
}

/// `P(k) ~ exp(-(k - mean)^2 / (2 s^2))` on `0..b`, with the mean at the
/// centre `(b - 1) / 2`.
pub fn discrete_normal(std_dev: f64, b: usize) -> Result<CumulativePmf> {
    if !(std_dev > 0.0 && std_dev.is_finite()) || b == 0 {
        return Err(Error::InvalidParams(format!(
            "discrete normal needs a positive spread and alphabet, got {std_dev} over {b}"
        )));
    }
    let mean = (b as f64 - 1.0) / 2.0;
    let w: Vec<f64> = (0..b)
        .map(|k| (-(k as f64 - mean).powi(2) / (2.0 * std_dev * std_dev)).exp())
        .collect();
    let total: f64 = w.iter().sum();
    CumulativePmf::from_pmf(&w.iter().map(|x| x / total).collect::<Vec<_>>())
}

/// The generator for the host and message of one `(sigma, seed)` pair.
pub fn point_rng(seed: u64, sigma: f64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sigma.to_bits());
    rng
}

/// Inverse-CDF sampling of `n` symbols.
pub fn sample_sequence<R: Rng>(pc: &CumulativePmf, n: usize, rng: &mut R) -> Vec<u8> {
    let last = pc.len() - 1;
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            pc.as_slice().partition_point(|&v| v <= u).min(last) as u8
        })
        .collect()
}

pub fn random_message<R: Rng>(bits: usize, rng: &mut R) -> BitStack {
    BitStack::from_bits_top_down((0..bits).map(|_| rng.gen::<bool>()))
}

/// One grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub sigma: f64,
    pub alpha: f64,
    pub n: usize,
    pub seed: u64,
    pub mode: Mode,
}

/// Measured and predicted operating point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    /// Net embedded bits per symbol.
    pub rate: f64,
    pub mse: f64,
    /// `H(Y) - H(X)` of the quantized static tables.
    pub expected_rate: f64,
    /// Monotone-coupling distortion of the quantized static tables.
    pub expected_mse: f64,
    pub runtime_secs: f64,
}

/// Shared settings for a sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepSettings {
    pub params: CodecParams,
    /// Template for every point; `alpha` is overridden.
    pub cfg: BfiConfig,
    pub spread: Spread,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            params: CodecParams::default(),
            cfg: BfiConfig::default(),
            spread: Spread::StdDev,
        }
    }
}

/// Host, message and host distribution of a point.
pub fn point_inputs(point: &SweepPoint, settings: &SweepSettings) -> Result<(Vec<u8>, BitStack, CumulativePmf)> {
    let pc = discrete_normal(settings.spread.std_dev(point.sigma), settings.params.alphabet())?;
    let mut rng = point_rng(point.seed, point.sigma);
    let host = sample_sequence(&pc, point.n, &mut rng);
    let msg = random_message(MESSAGE_BITS_PER_SYMBOL * point.n, &mut rng);
    Ok((host, msg, pc))
}

/// Runs one point and returns the row together with host and payload.
pub fn run_point_detailed(
    point: &SweepPoint,
    settings: &SweepSettings,
) -> Result<(SweepRow, Vec<u8>, StegoPayload)> {
    let (host, bits, pc) = point_inputs(point, settings)?;
    let cfg = BfiConfig {
        alpha: point.alpha,
        ..settings.cfg
    };
    let params = settings.params;
    let start = Instant::now();
    let tables = TablePair::derive(&pc, &cfg, &params)?;
    let mut msg = MessageContainer::new(bits);
    let payload = match point.mode {
        Mode::Static => embed_static(&host, &pc, &cfg, &mut msg, &params)?,
        Mode::Dynamic => embed_dynamic(&host, &mut msg, &params, &cfg)?,
    };
    let runtime_secs = start.elapsed().as_secs_f64();
    let (px, py) = (tables.host.probabilities(), tables.stego.probabilities());
    let row = SweepRow {
        point: *point,
        rate: payload.rate(),
        mse: sequence_mse(&host, &payload.stego),
        expected_rate: expected_rate(&px, &py),
        expected_mse: expected_distortion(&px, &py)?,
        runtime_secs,
    };
    Ok((row, host, payload))
}

pub fn run_point(point: &SweepPoint, settings: &SweepSettings) -> Result<SweepRow> {
    run_point_detailed(point, settings).map(|(row, _, _)| row)
}

/// Runs every point, spreading the work over the available cores. Rows come
/// back in input order.
pub fn run_grid(points: &[SweepPoint], settings: &SweepSettings) -> Result<Vec<SweepRow>> {
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(points.len().max(1));
    let chunk = points.len().div_ceil(workers).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|p| run_point(p, settings))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut rows = Vec::with_capacity(points.len());
        for h in handles {
            rows.extend(h.join().expect("sweep worker panicked")?);
        }
        Ok(rows)
    })
}

pub const CSV_HEADER: [&str; 10] = [
    "sigma",
    "alpha",
    "n",
    "seed",
    "mode",
    "rate_bpp",
    "mse",
    "expected_rate_bpp",
    "expected_mse",
    "runtime_s",
];

/// Writes the header and one record per row. With `timing` off the runtime
/// column is zero, making the output byte-for-byte reproducible.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(to_io)?;
    for r in rows {
        let p = &r.point;
        w.write_record([
            p.sigma.to_string(),
            p.alpha.to_string(),
            p.n.to_string(),
            p.seed.to_string(),
            match p.mode {
                Mode::Static => "static".into(),
                Mode::Dynamic => "dynamic".into(),
            },
            format!("{:.6}", r.rate),
            format!("{:.6}", r.mse),
            format!("{:.6}", r.expected_rate),
            format!("{:.6}", r.expected_mse),
            format!("{:.3}", if timing { r.runtime_secs } else { 0.0 }),
        ])
        .map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

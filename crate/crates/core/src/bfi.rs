//! Stego-distribution estimation under a squared-error distortion budget.
//!
//! [`bfi_estimate`] runs the backward-and-forward coordinate sweep that
//! maximizes `H(Y) - ln(alpha) * D(X, Y)` over cumulative pmfs, where `D` is
//! the mean squared error of the monotone (non-crossing) coupling between host
//! and stego. `alpha = 1` gives the uniform distribution, `alpha = inf` leaves
//! the host untouched.
//!
//! Plain coordinate sweeps crawl on this problem (thousands of sweeps for a
//! smooth host), so by default each non-converged sweep pair is followed by an
//! extrapolation step: coordinates sitting strictly inside a host interval are
//! solved jointly in closed form between their pinned neighbours, and a
//! backtracking line search keeps the step only if it raises the objective.
//! Both routes stop on the same criterion (a full sweep pair that moves no
//! coordinate by `epsilon` or more), so they land on the same fixed point.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::ans::FrequencyTable;
use crate::error::{Error, Result};

/// Tolerance when checking that a cumulative vector ends at one.
const END_TOLERANCE: f64 = 1e-9;

/// Step halvings tried before an extrapolation is abandoned.
const HALVINGS: usize = 8;

/// A cumulative pmf `e_0 <= e_1 <= ... <= e_{B-1} = 1` (with `e_{-1} = 0`
/// implied).
#[derive(Clone, Debug, PartialEq)]
pub struct CumulativePmf {
    values: Vec<f64>,
}

impl CumulativePmf {
    /// Validates a cumulative vector. The last entry must be within `1e-9` of
    /// one and is then pinned to exactly `1.0`.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidDistribution(m.into()));
        let Some(&last) = values.last() else {
            return bad("empty alphabet");
        };
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("cumulative values must be finite and non-negative");
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return bad("cumulative values must be non-decreasing");
        }
        if (last - 1.0).abs() > END_TOLERANCE {
            return bad("cumulative values must end at 1");
        }
        let b = values.len();
        values[b - 1] = 1.0;
        for v in &mut values {
            *v = v.min(1.0);
        }
        Ok(Self { values })
    }

    /// Running sums of a pmf (renormalized, so any non-negative weights work).
    pub fn from_pmf(pmf: &[f64]) -> Result<Self> {
        if pmf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "pmf entries must be finite and non-negative".into(),
            ));
        }
        let total: f64 = pmf.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("pmf has no mass".into()));
        }
        let mut acc = 0.0;
        let values = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc / total
            })
            .collect();
        Self::new(values)
    }

    /// Running sums of integer counts divided by their total.
    pub fn from_counts(counts: &[u32]) -> Result<Self> {
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("counts are all zero".into()));
        }
        let mut acc = 0u64;
        let values = counts
            .iter()
            .map(|&c| {
                acc += c as u64;
                acc as f64 / total as f64
            })
            .collect();
        Self::new(values)
    }

    /// The uniform distribution over `b` symbols.
    pub fn uniform(b: usize) -> Self {
        Self {
            values: (1..=b).map(|k| k as f64 / b as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `e_y`, for `y` in `0..B`.
    pub fn get(&self, y: usize) -> f64 {
        self.values[y]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Per-symbol probabilities.
    pub fn pmf(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.values
            .iter()
            .map(|&v| {
                let p = v - prev;
                prev = v;
                p.max(0.0)
            })
            .collect()
    }
}

/// Settings for [`bfi_estimate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfiConfig {
    /// Tradeoff parameter, `1 <= alpha <= inf`.
    pub alpha: f64,
    /// Stop once a sweep pair moves no coordinate by this much.
    pub epsilon: f64,
    pub max_sweeps: u64,
    /// Enable the closed-form extrapolation between sweeps.
    pub accelerate: bool,
}

impl Default for BfiConfig {
    fn default() -> Self {
        Self {
            alpha: 1.001,
            epsilon: 1e-9,
            max_sweeps: 1_000_000,
            accelerate: true,
        }
    }
}

impl BfiConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_nan() || self.alpha < 1.0 {
            return Err(Error::InvalidParams(format!(
                "alpha must be at least 1, got {}",
                self.alpha
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParams("max_sweeps must be positive".into()));
        }
        Ok(())
    }
}

/// Result of [`bfi_estimate`].
#[derive(Clone, Debug, PartialEq)]
pub struct BfiOutcome {
    pub pmf: CumulativePmf,
    /// Forward-and-backward sweep pairs performed.
    pub sweeps: u64,
    /// Whether the last sweep pair moved every coordinate by less than epsilon.
    pub converged: bool,
    /// Largest coordinate change in the last sweep pair.
    pub last_offset: f64,
}

/// Working state for the sweeps: host cumulative values `P(0..B)` and the
/// stego vector stored with a leading zero, so `e[k] = e_{k-1}`.
struct Sweeper<'a> {
    pcx: &'a [f64],
    /// `pow[j] = alpha^(2(j - B) + 1)`: every odd exponent the rule can ask for.
    pow: Vec<f64>,
    ln_alpha: f64,
}

impl<'a> Sweeper<'a> {
    fn new(pcx: &'a [f64], alpha: f64) -> Self {
        let b = pcx.len();
        let sq = alpha * alpha;
        let mut pow = vec![0.0; 2 * b];
        // Grow outward from alpha^1 and alpha^-1 so over/underflow saturates
        // the way the true powers would.
        let (mut up, mut down) = (alpha, 1.0 / alpha);
        for j in 0..b {
            pow[b + j] = up;
            pow[b - 1 - j] = down;
            up *= sq;
            down /= sq;
        }
        Self {
            pcx,
            pow,
            ln_alpha: alpha.ln(),
        }
    }

    /// `alpha^(D(s,y) - D(s,y+1)) = alpha^(2(s-y)-1)`.
    #[inline]
    fn ratio(&self, s: usize, y: usize) -> f64 {
        self.pow[s + self.pcx.len() - 1 - y]
    }

    /// Best `e_y` with its neighbours held fixed. Scans host intervals upward
    /// from the one containing `e_{y-1}`: an interior stationary point inside
    /// the clipped interval wins; if the stationary point falls below the
    /// interval, the optimum sits on its lower end (a host boundary).
    ///
    /// `start` must be the first `s` with `P(s) > e_{y-1}`. Returns the new
    /// value and, when the scan already knows it, the same index for it.
    fn update_from(&self, e: &[f64], y: usize, start: usize) -> (f64, Option<usize>) {
        let lo = e[y];
        let hi = e[y + 2];
        if hi <= lo {
            return (lo, Some(start));
        }
        let pcx = self.pcx;
        let b = pcx.len();
        let mut s = start;
        while s < b {
            let a = if s == 0 { lo } else { pcx[s - 1].max(lo) };
            let top = pcx[s].min(hi);
            if top > a {
                let est = lo + (hi - lo) / (1.0 + self.ratio(s, y));
                if est <= a {
                    return (a, Some(s));
                }
                if est < top {
                    return (est, Some(s));
                }
            }
            if pcx[s] >= hi {
                break;
            }
            s += 1;
        }
        (hi, None)
    }

    /// First host index `s` with `P(s) > v`.
    #[inline]
    fn above(&self, v: f64) -> usize {
        self.pcx.partition_point(|&p| p <= v)
    }

    #[cfg(test)]
    fn update(&self, e: &[f64], y: usize) -> f64 {
        self.update_from(e, y, self.above(e[y])).0
    }

    fn locate(&self, e: &[f64], above: &mut Vec<usize>) {
        above.clear();
        above.extend(e.iter().map(|&v| self.above(v)));
    }

    /// One forward pass `y = 0..B-2` and one backward pass; returns the
    /// largest coordinate change. `above` must hold [`Self::above`] of every
    /// entry of `e` and is kept in sync.
    fn sweep_pair(&self, e: &mut [f64], above: &mut [usize]) -> f64 {
        let b = self.pcx.len();
        let mut offset = 0.0f64;
        let mut visit = |y: usize, e: &mut [f64]| {
            let (nv, hint) = self.update_from(e, y, above[y]);
            offset = offset.max((nv - e[y + 1]).abs());
            e[y + 1] = nv;
            above[y + 1] = hint.unwrap_or_else(|| self.above(nv));
        };
        for y in 0..b.saturating_sub(1) {
            visit(y, e);
        }
        for y in (0..b.saturating_sub(1)).rev() {
            visit(y, e);
        }
        offset
    }

    /// `H_nat(p) - ln(alpha) * D`, with `D` from the monotone coupling.
    fn objective(&self, e: &[f64]) -> f64 {
        let h: f64 = e
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.ln())
            .sum();
        h - self.ln_alpha * coupling_distortion(self.pcx, &e[1..])
    }

    /// First host index `s` with `P(s) >= v`.
    #[inline]
    fn interval_of(&self, v: f64) -> usize {
        self.pcx.partition_point(|&p| p < v)
    }

    /// Reads off, for every inner coordinate, whether it sits exactly on a
    /// host boundary or strictly inside a host interval.
    fn roles_of(&self, e: &[f64], roles: &mut Vec<Role>) {
        let b = self.pcx.len();
        roles.clear();
        roles.push(Role::Pin(0)); // placeholder for the fixed e_{-1} = 0
        for &v in &e[1..b] {
            let s = self.interval_of(v);
            roles.push(if s < b && self.pcx[s] == v {
                Role::Pin(s)
            } else {
                Role::Free(s)
            });
        }
    }

    /// Closed-form joint solution of every run of free coordinates between
    /// pinned ones, holding each free coordinate's host interval fixed: along
    /// a run, consecutive probabilities satisfy `p_{y+1} = alpha^(2(s-y)-1) p_y`.
    /// Returns `false` if the pins are out of order.
    fn solve_roles(&self, roles: &[Role], out: &mut [f64], logs: &mut Vec<f64>) -> bool {
        let b = self.pcx.len();
        let value = |k: usize| -> Option<f64> {
            match roles.get(k) {
                Some(&Role::Pin(s)) if k > 0 => Some(self.pcx[s]),
                _ => None,
            }
        };
        out[0] = 0.0;
        out[b] = 1.0;
        let mut left = 0usize;
        while left < b {
            let mut right = left + 1;
            while right < b && value(right).is_none() {
                right += 1;
            }
            let (l, r) = (out[left], value(right).unwrap_or(1.0));
            if r < l {
                return false;
            }
            out[right] = r;
            let m = right - left;
            if m >= 2 {
                logs.clear();
                logs.push(0.0);
                for t in 1..m {
                    let y = left + t - 1;
                    let Role::Free(s) = roles[y + 1] else {
                        unreachable!("runs contain only free coordinates")
                    };
                    let slope = 2.0 * (s as f64 - y as f64) - 1.0;
                    let prev = logs[t - 1];
                    logs.push(prev + slope * self.ln_alpha);
                }
                let mx = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = logs.iter().map(|&g| (g - mx).exp()).sum();
                let mut acc = l;
                for t in 0..m - 1 {
                    acc += (r - l) * (logs[t] - mx).exp() / z;
                    out[left + 1 + t] = acc.clamp(l, r);
                }
            }
            left = right;
        }
        true
    }

    /// Closed-form jump from the current roles, damped by backtracking.
    /// Replaces `e` and returns `true` if the objective improves.
    fn accelerate(&self, e: &mut Vec<f64>, scratch: &mut Scratch, tol: f64) -> bool {
        let Scratch {
            cand,
            trial,
            logs,
            roles,
        } = scratch;
        self.roles_of(e, roles);
        if !self.solve_roles(roles, cand, logs) {
            return false;
        }
        let reach = e
            .iter()
            .zip(cand.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if reach < tol {
            return false;
        }
        let base = self.objective(e);
        let mut t = 1.0;
        for _ in 0..HALVINGS {
            for ((tr, &x), &c) in trial.iter_mut().zip(e.iter()).zip(cand.iter()) {
                *tr = x + t * (c - x);
            }
            if self.objective(trial) > base {
                std::mem::swap(e, trial);
                return true;
            }
            t *= 0.5;
        }
        false
    }
}

struct Scratch {
    cand: Vec<f64>,
    trial: Vec<f64>,
    logs: Vec<f64>,
    roles: Vec<Role>,
}

/// Where an inner coordinate `e_y` sits relative to the host: exactly on the
/// boundary `P(s)`, or strictly inside interval `s`, i.e. `(P(s-1), P(s))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Pin(usize),
    Free(usize),
}

/// Estimates the stego cumulative pmf for host `pcx`, starting the sweeps
/// from the uniform distribution.
pub fn bfi_estimate(pcx: &CumulativePmf, cfg: &BfiConfig) -> Result<BfiOutcome> {
    bfi_refine(pcx, cfg, &CumulativePmf::uniform(pcx.len()))
}

/// Like [`bfi_estimate`], but starts the sweeps from `start`. A start close to
/// the answer (say, the estimate for a slightly different host) typically
/// converges in a handful of sweeps.
pub fn bfi_refine(
    pcx: &CumulativePmf,
    cfg: &BfiConfig,
    start: &CumulativePmf,
) -> Result<BfiOutcome> {
    cfg.validate()?;
    if start.len() != pcx.len() {
        return Err(Error::DimensionMismatch(format!(
            "host has {} symbols, start has {}",
            pcx.len(),
            start.len()
        )));
    }
    let b = pcx.len();
    let done = |pmf: CumulativePmf| BfiOutcome {
        pmf,
        sweeps: 0,
        converged: true,
        last_offset: 0.0,
    };
    if cfg.alpha == 1.0 {
        return Ok(done(CumulativePmf::uniform(b)));
    }
    if cfg.alpha == f64::INFINITY {
        return Ok(done(pcx.clone()));
    }
    if b == 1 {
        return Ok(done(pcx.clone()));
    }
    let sweeper = Sweeper::new(pcx.as_slice(), cfg.alpha);
    let mut e: Vec<f64> = std::iter::once(0.0)
        .chain(start.values.iter().copied())
        .collect();
    let mut scratch = Scratch {
        cand: vec![0.0; b + 1],
        trial: vec![0.0; b + 1],
        logs: Vec::with_capacity(b),
        roles: Vec::with_capacity(b),
    };
    let mut above = Vec::with_capacity(b + 1);
    sweeper.locate(&e, &mut above);
    let mut sweeps = 0;
    let mut offset = f64::INFINITY;
    while sweeps < cfg.max_sweeps {
        offset = sweeper.sweep_pair(&mut e, &mut above);
        sweeps += 1;
        if offset < cfg.epsilon {
            break;
        }
        if cfg.accelerate
            && sweeps < cfg.max_sweeps
            && sweeper.accelerate(&mut e, &mut scratch, cfg.epsilon)
        {
            sweeper.locate(&e, &mut above);
        }
    }
    e.remove(0);
    Ok(BfiOutcome {
        pmf: CumulativePmf { values: e },
        sweeps,
        converged: offset < cfg.epsilon,
        last_offset: offset,
    })
}

/// Applies one more sweep pair to `e` and reports the largest coordinate
/// change, i.e. how far `e` is from being a fixed point of the iteration.
pub fn sweep_offset(pcx: &CumulativePmf, e: &CumulativePmf, alpha: f64) -> Result<f64> {
    if pcx.len() != e.len() {
        return Err(Error::DimensionMismatch(format!(
            "host has {} symbols, estimate has {}",
            pcx.len(),
            e.len()
        )));
    }
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Ok(0.0);
    }
    let sweeper = Sweeper::new(pcx.as_slice(), alpha);
    let mut work: Vec<f64> = std::iter::once(0.0).chain(e.values.iter().copied()).collect();
    let mut above = Vec::new();
    sweeper.locate(&work, &mut above);
    Ok(sweeper.sweep_pair(&mut work, &mut above))
}

/// Rounds a cumulative pmf to an integer table with total `2^n`.
///
/// Every symbol flagged in `present` gets frequency at least one. Floors are
/// topped up by largest remainder (ties to the lower symbol) and any surplus
/// created by the forced ones is taken from the currently largest entries.
pub fn quantize(pc: &CumulativePmf, n: u32, present: &[bool]) -> Result<FrequencyTable> {
    let b = pc.len();
    if present.len() != b {
        return Err(Error::DimensionMismatch(format!(
            "{} presence flags for {} symbols",
            present.len(),
            b
        )));
    }
    if !(1..=31).contains(&n) {
        return Err(Error::InvalidParams(format!("slot width n={n} outside 1..=31")));
    }
    let total = 1u64 << n;
    let required = present.iter().filter(|&&p| p).count();
    if required as u64 > total {
        return Err(Error::Infeasible {
            present: required,
            total,
        });
    }
    let scale = total as f64;
    let raw: Vec<f64> = pc.pmf().into_iter().map(|p| p * scale).collect();
    let mut freqs: Vec<u64> = raw.iter().map(|r| r.floor() as u64).collect();
    let mut forced = vec![false; b];
    for s in 0..b {
        if present[s] && freqs[s] == 0 {
            freqs[s] = 1;
            forced[s] = true;
        }
    }
    let sum: u64 = freqs.iter().sum();
    if sum < total {
        let mut deficit = total - sum;
        let mut order: Vec<usize> = (0..b).filter(|&s| raw[s] > 0.0 && !forced[s]).collect();
        if order.is_empty() {
            order = (0..b).filter(|&s| freqs[s] > 0).collect();
        }
        if order.is_empty() {
            order = (0..b).collect();
        }
        // Stable sort keeps ties in ascending symbol order.
        order.sort_by(|&a, &c| {
            let (ra, rc) = (raw[a] - raw[a].floor(), raw[c] - raw[c].floor());
            rc.total_cmp(&ra)
        });
        for &s in order.iter().cycle() {
            if deficit == 0 {
                break;
            }
            freqs[s] += 1;
            deficit -= 1;
        }
    } else if sum > total {
        let mut surplus = sum - total;
        let mut heap: BinaryHeap<(u64, Reverse<usize>)> = (0..b)
            .filter(|&s| freqs[s] > 1)
            .map(|s| (freqs[s], Reverse(s)))
            .collect();
        while surplus > 0 {
            let Some((f, Reverse(s))) = heap.pop() else {
                return Err(Error::Infeasible {
                    present: required,
                    total,
                });
            };
            freqs[s] = f - 1;
            surplus -= 1;
            if freqs[s] > 1 {
                heap.push((freqs[s], Reverse(s)));
            }
        }
    }
    FrequencyTable::new(freqs.into_iter().map(|f| f as u32).collect(), n)
}

/// Shannon entropy in bits; `0 log 0 = 0`.
pub fn entropy_bits(pmf: &[f64]) -> f64 {
    pmf.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Upper bound on the embedding rate: `H(Y) - H(X)` bits per symbol.
pub fn expected_rate(px: &[f64], py: &[f64]) -> f64 {
    entropy_bits(py) - entropy_bits(px)
}

/// Mean squared error of the monotone coupling between `px` and `py`.
pub fn expected_distortion(px: &[f64], py: &[f64]) -> Result<f64> {
    if px.len() != py.len() {
        return Err(Error::DimensionMismatch(format!(
            "pmfs over {} and {} symbols",
            px.len(),
            py.len()
        )));
    }
    let cx = CumulativePmf::from_pmf(px)?;
    let cy = CumulativePmf::from_pmf(py)?;
    Ok(coupling_distortion(cx.as_slice(), cy.as_slice()))
}

/// Walks both cumulative vectors in step, charging each overlap of a host
/// interval `s` and a stego interval `y` with `(s - y)^2`.
fn coupling_distortion(cx: &[f64], cy: &[f64]) -> f64 {
    let b = cx.len().min(cy.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0.0f64;
    let mut d = 0.0;
    while i < b && j < b {
        let next = cx[i].min(cy[j]);
        if next > u {
            let gap = i as f64 - j as f64;
            d += (next - u) * gap * gap;
            u = next;
        }
        if cx[i] <= u {
            i += 1;
        }
        if cy[j] <= u {
            j += 1;
        }
    }
    d
}

//! Binary container for everything extraction needs besides the stego media.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "ARDH"  version:u8  mode:u8  media:u8  accelerate:u8
//! B:u16  T:u8  n:u8  v:u8
//! alpha:f64-bits  epsilon:f64-bits  max_sweeps:u64
//! final_state:u64  message_bits:u64  pad_count:u64  original_bits:u64
//! media extent: len:u64 (raw) | width:u32 height:u32 (image)
//! residue: bit count:u64, packed bits
//! model tag:u8, then nothing (0) | B cumulative f64-bits (1) |
//!                    256*256 LEB128 counts (2)
//! ```

use std::io::Write;
use std::path::Path;

use crate::ans::CodecParams;
use crate::bfi::{BfiConfig, CumulativePmf};
use crate::bitio::BitStack;
use crate::error::{Error, Result};
use crate::image::{LookupTable, LEVELS};
use crate::rdh::{Mode, SideInfo};

pub const MAGIC: &[u8; 4] = b"ARDH";
pub const VERSION: u8 = 1;

/// Shape of the stego media.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Media {
    Raw { len: u64 },
    Image { width: u32, height: u32 },
}

impl Media {
    pub fn symbols(&self) -> u64 {
        match *self {
            Media::Raw { len } => len,
            Media::Image { width, height } => width as u64 * height as u64,
        }
    }
}

/// The host model shipped along in static mode.
#[derive(Clone, Debug, PartialEq)]
pub enum HostModel {
    /// Dynamic mode: nothing is transmitted.
    None,
    /// Static raw sequences: the host cumulative pmf.
    Pmf(CumulativePmf),
    /// Static images: the frozen lookup table.
    Table(LookupTable),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sidecar {
    pub side: SideInfo,
    pub media: Media,
    /// Bit length of the message handed to the embedder.
    pub original_bits: u64,
    pub model: HostModel,
}

impl Sidecar {
    pub fn to_bytes(&self) -> Vec<u8> {
        let s = &self.side;
        let p = &s.params;
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(match s.mode {
            Mode::Static => 0,
            Mode::Dynamic => 1,
        });
        out.push(match self.media {
            Media::Raw { .. } => 0,
            Media::Image { .. } => 1,
        });
        out.push(s.cfg.accelerate as u8);
        out.extend_from_slice(&(p.alphabet() as u16).to_le_bytes());
        out.extend_from_slice(&[p.state_bits() as u8, p.slot_bits() as u8, p.renorm_mult() as u8]);
        for word in [
            s.cfg.alpha.to_bits(),
            s.cfg.epsilon.to_bits(),
            s.cfg.max_sweeps,
            s.final_state,
            s.message_bits,
            s.pad_count,
            self.original_bits,
        ] {
            out.extend_from_slice(&word.to_le_bytes());
        }
        match self.media {
            Media::Raw { len } => out.extend_from_slice(&len.to_le_bytes()),
            Media::Image { width, height } => {
                out.extend_from_slice(&width.to_le_bytes());
                out.extend_from_slice(&height.to_le_bytes());
            }
        }
        out.extend_from_slice(&s.residue.serialize());
        match &self.model {
            HostModel::None => out.push(0),
            HostModel::Pmf(pc) => {
                out.push(1);
                for v in pc.as_slice() {
                    out.extend_from_slice(&v.to_bits().to_le_bytes());
                }
            }
            HostModel::Table(t) => {
                out.push(2);
                for &c in t.as_slice() {
                    leb128::write::unsigned(&mut out, c as u64).expect("writing to a Vec");
                }
            }
        }
        out
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let mut r = Reader { data, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("not a sidecar (bad magic)".into()));
        }
        let version = r.u8()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported sidecar version {version}")));
        }
        let mode = match r.u8()? {
            0 => Mode::Static,
            1 => Mode::Dynamic,
            m => return Err(Error::Format(format!("unknown mode {m}"))),
        };
        let image = match r.u8()? {
            0 => false,
            1 => true,
            m => return Err(Error::Format(format!("unknown media kind {m}"))),
        };
        let accelerate = match r.u8()? {
            0 => false,
            1 => true,
            a => return Err(Error::Format(format!("bad accelerate flag {a}"))),
        };
        let alphabet = u16::from_le_bytes(r.array()?) as usize;
        let [t, n, v] = r.array::<3>()?;
        let params = CodecParams::new(alphabet, t as u32, n as u32, v as u32)?;
        let cfg = BfiConfig {
            alpha: f64::from_bits(r.u64()?),
            epsilon: f64::from_bits(r.u64()?),
            max_sweeps: r.u64()?,
            accelerate,
        };
        cfg.validate()?;
        let final_state = r.u64()?;
        let message_bits = r.u64()?;
        let pad_count = r.u64()?;
        let original_bits = r.u64()?;
        let media = if image {
            Media::Image {
                width: u32::from_le_bytes(r.array()?),
                height: u32::from_le_bytes(r.array()?),
            }
        } else {
            Media::Raw { len: r.u64()? }
        };
        let (residue, used) = BitStack::deserialize(&data[r.pos..])
            .map_err(|e| Error::Format(format!("residue: {e}")))?;
        r.pos += used;
        let model = match r.u8()? {
            0 => HostModel::None,
            1 => {
                let values = (0..alphabet)
                    .map(|_| r.u64().map(f64::from_bits))
                    .collect::<Result<Vec<_>>>()?;
                HostModel::Pmf(CumulativePmf::new(values)?)
            }
            2 => {
                let mut rest = &data[r.pos..];
                let counts = (0..LEVELS * LEVELS)
                    .map(|_| {
                        leb128::read::unsigned(&mut rest)
                            .ok()
                            .and_then(|c| u32::try_from(c).ok())
                            .ok_or_else(|| Error::Format("bad lookup table entry".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                r.pos = data.len() - rest.len();
                HostModel::Table(LookupTable::from_counts(counts)?)
            }
            m => return Err(Error::Format(format!("unknown model tag {m}"))),
        };
        if r.pos != data.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after sidecar",
                data.len() - r.pos
            )));
        }
        let sidecar = Self {
            side: SideInfo {
                final_state,
                residue,
                message_bits,
                pad_count,
                params,
                mode,
                cfg,
            },
            media,
            original_bits,
            model,
        };
        sidecar.validate()?;
        Ok(sidecar)
    }

    /// Cross-field consistency: the model matches mode and media, and the
    /// bit counts add up.
    pub fn validate(&self) -> Result<()> {
        let ok = matches!(
            (self.side.mode, self.media, &self.model),
            (Mode::Dynamic, _, HostModel::None)
                | (Mode::Static, Media::Raw { .. }, HostModel::Pmf(_))
                | (Mode::Static, Media::Image { .. }, HostModel::Table(_))
        );
        if !ok {
            return Err(Error::Format(format!(
                "{:?} mode with {:?} media cannot carry this host model",
                self.side.mode, self.media
            )));
        }
        if self.side.message_bits > self.original_bits {
            return Err(Error::Format("more message bits drawn than supplied".into()));
        }
        if let Media::Image { .. } = self.media {
            if self.side.params.alphabet() != LEVELS {
                return Err(Error::Format("image sidecar with alphabet other than 256".into()));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let out = self
            .data
            .get(self.pos..self.pos + k)
            .ok_or_else(|| Error::Format("sidecar truncated".into()))?;
        self.pos += k;
        Ok(out)
    }

    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("slice of length K"))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
}

//! One-call embedding and extraction that bundle all side information into a
//! [`Sidecar`]. Stego media travel as plain symbol buffers: the raw sequence,
//! or the image raster in row-major order.

use crate::ans::CodecParams;
use crate::bfi::{BfiConfig, CumulativePmf};
use crate::bitio::{BitStack, MessageContainer};
use crate::error::{Error, Result};
use crate::image::{embed_image, extract_image, GrayImage};
use crate::rdh::{embed_dynamic, embed_static, extract_dynamic, extract_static, Mode, StegoPayload};
use crate::sidecar::{HostModel, Media, Sidecar};

/// Host media handed to [`embed`].
#[derive(Clone, Copy, Debug)]
pub enum Host<'a> {
    Raw(&'a [u8]),
    Image(&'a GrayImage),
}

/// Stego symbols plus the sidecar needed to undo them.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    pub stego: Vec<u8>,
    pub sidecar: Sidecar,
}

impl Embedding {
    /// Net embedded bits per host symbol.
    pub fn rate(&self) -> f64 {
        let n = self.sidecar.media.symbols();
        if n == 0 {
            0.0
        } else {
            self.sidecar.side.net_bits() as f64 / n as f64
        }
    }
}

/// Host symbols and message recovered by [`extract`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recovered {
    pub host: Vec<u8>,
    /// The message bits the embedder consumed, top first.
    pub message: BitStack,
}

/// Occurrence counts of each byte value over an alphabet of `b`.
pub fn histogram(symbols: &[u8], b: usize) -> Result<Vec<u32>> {
    let mut counts = vec![0u32; b];
    for &s in symbols {
        *counts.get_mut(s as usize).ok_or_else(|| {
            Error::InvalidParams(format!("symbol {s} outside alphabet of {b}"))
        })? += 1;
    }
    Ok(counts)
}

/// Embeds the bytes of `message`, most significant bit first. In static mode
/// raw hosts ship their empirical cumulative pmf, images their lookup table;
/// dynamic mode ships no model at all.
pub fn embed(
    host: Host<'_>,
    message: &[u8],
    mode: Mode,
    cfg: &BfiConfig,
    params: &CodecParams,
) -> Result<Embedding> {
    let mut msg = MessageContainer::from_bytes(message);
    let original_bits = 8 * message.len() as u64;
    let (stego, side, media, model) = match host {
        Host::Raw(host) => {
            let media = Media::Raw {
                len: host.len() as u64,
            };
            match mode {
                Mode::Static => {
                    let pcx = CumulativePmf::from_counts(&histogram(host, params.alphabet())?)?;
                    let StegoPayload { stego, side } = embed_static(host, &pcx, cfg, &mut msg, params)?;
                    (stego, side, media, HostModel::Pmf(pcx))
                }
                Mode::Dynamic => {
                    let StegoPayload { stego, side } = embed_dynamic(host, &mut msg, params, cfg)?;
                    (stego, side, media, HostModel::None)
                }
            }
        }
        Host::Image(img) => {
            let out = embed_image(img, &mut msg, mode, cfg, params)?;
            let media = Media::Image {
                width: img.width() as u32,
                height: img.height() as u32,
            };
            let model = out.table.map_or(HostModel::None, HostModel::Table);
            (out.image.into_pixels(), out.side, media, model)
        }
    };
    Ok(Embedding {
        stego,
        sidecar: Sidecar {
            side,
            media,
            original_bits,
            model,
        },
    })
}

/// Inverse of [`embed`]. `stego` must hold exactly the symbol count the
/// sidecar records.
pub fn extract(stego: &[u8], sidecar: &Sidecar) -> Result<Recovered> {
    sidecar.validate()?;
    let expected = sidecar.media.symbols();
    if stego.len() as u64 != expected {
        return Err(Error::DimensionMismatch(format!(
            "stego has {} symbols, sidecar records {expected}",
            stego.len()
        )));
    }
    let side = &sidecar.side;
    match (sidecar.media, &sidecar.model) {
        (Media::Image { width, height }, model) => {
            let img = GrayImage::new(width as usize, height as usize, stego.to_vec())?;
            let table = match model {
                HostModel::Table(t) => Some(t),
                _ => None,
            };
            let out = extract_image(&img, side, table)?;
            Ok(Recovered {
                host: out.image.into_pixels(),
                message: out.message,
            })
        }
        (Media::Raw { .. }, model) => {
            let payload = StegoPayload {
                stego: stego.to_vec(),
                side: side.clone(),
            };
            let out = match model {
                HostModel::Pmf(pcx) => extract_static(&payload, pcx)?,
                _ => extract_dynamic(&payload)?,
            };
            Ok(Recovered {
                host: out.host,
                message: out.message,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn host() -> Vec<u8> {
        (0..3000u32).map(|i| (128 + ((i * 7919) % 23) as i32 - 11) as u8).collect()
    }

    #[test]
    fn raw_round_trips_through_serialized_sidecar() {
        let host = host();
        let message = b"reversible".to_vec();
        for mode in [Mode::Static, Mode::Dynamic] {
            let out = embed(Host::Raw(&host), &message, mode, &BfiConfig::with_alpha(1.01), &CodecParams::default()).unwrap();
            assert!(out.rate() > 0.0, "{mode:?}");
            let sidecar = Sidecar::from_bytes(&out.sidecar.to_bytes()).unwrap();
            let back = extract(&out.stego, &sidecar).unwrap();
            assert_eq!(back.host, host);
            let k = out.sidecar.side.message_bits as usize;
            let want: Vec<bool> = BitStack::from_bytes(&message).iter_top_down().take(k).collect();
            assert_eq!(back.message.iter_top_down().collect::<Vec<_>>(), want);
        }
    }

    #[test]
    fn image_round_trips() {
        let px: Vec<u8> = (0..24 * 20).map(|i| ((i % 24) * 5 + (i / 24) * 3) as u8).collect();
        let img = GrayImage::new(24, 20, px.clone()).unwrap();
        for mode in [Mode::Static, Mode::Dynamic] {
            let out = embed(Host::Image(&img), b"abc", mode, &BfiConfig::with_alpha(1.001), &CodecParams::default()).unwrap();
            assert_eq!(out.stego.len(), px.len());
            assert_eq!(extract(&out.stego, &out.sidecar).unwrap().host, px);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let host = host();
        let out = embed(Host::Raw(&host), b"x", Mode::Static, &BfiConfig::default(), &CodecParams::default()).unwrap();
        let short = &out.stego[..out.stego.len() - 1];
        assert!(matches!(extract(short, &out.sidecar), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn histogram_respects_alphabet() {
        assert_eq!(histogram(&[0, 2, 2], 3).unwrap(), vec![1, 0, 2]);
        assert!(histogram(&[3], 3).is_err());
    }
}

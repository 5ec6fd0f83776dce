//! Reversible data hiding for 8-bit gray-scale sequences and images.
//!
//! A message is hidden by running an ANS state machine "backwards": each host
//! symbol is encoded against the host distribution, and the resulting slot is
//! decoded against an optimized stego distribution. Extraction replays the
//! steps in reverse and recovers both the host and the message exactly.

pub mod ans;
pub mod bfi;
pub mod bitio;
pub mod error;
pub mod image;
pub mod media;
pub mod rdh;
pub mod sidecar;
pub mod sweep;

pub use ans::{decode_step, encode_step, CodecParams, FrequencyTable};
pub use bfi::{bfi_estimate, bfi_refine, quantize, BfiConfig, BfiOutcome, CumulativePmf};
pub use bitio::{BitChannel, BitIoError, BitStack, MessageContainer};
pub use error::{Error, Result};
pub use image::{
    embed_image, extract_image, mse, psnr, ExtractedImage, GrayImage, LookupTable, StegoImage,
    TableInit,
};
pub use media::{embed, extract, Embedding, Host, Recovered};
pub use sidecar::{HostModel, Media, Sidecar};
pub use rdh::{
    embed_dynamic, embed_static, extract_dynamic, extract_static, AdaptiveModel, Extracted, Mode, SideInfo,
    StegoPayload, TableCache, TablePair,
};

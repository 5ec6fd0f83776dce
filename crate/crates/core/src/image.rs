//! Gray-scale images: prediction, the predicted-by-actual count table, image
//! embedding and extraction, PGM files and quality metrics.
//!
//! Every pixel is coded against the row of the count table selected by its
//! predicted value. The predictor only looks right and down, so a reverse
//! raster scan always has the neighbours of the current pixel decoded.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::ans::CodecParams;
use crate::bfi::BfiConfig;
use crate::bitio::MessageContainer;
use crate::error::{Error, Result};
use crate::rdh::{check_symbols, Embedder, Extractor, Mode, SideInfo, TableCache};

/// Pixel values are bytes.
pub const LEVELS: usize = 256;

/// Entry on the diagonal of a fresh dynamic-mode table.
pub const DYNAMIC_DIAGONAL: u32 = 32;

/// Row-major 8-bit image.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        let area = width.checked_mul(height).filter(|&a| a > 0);
        match area {
            Some(a) if a == pixels.len() => Ok(Self {
                width,
                height,
                pixels,
            }),
            Some(a) => Err(Error::DimensionMismatch(format!(
                "{width}x{height} image needs {a} pixels, got {}",
                pixels.len()
            ))),
            None => Err(Error::DimensionMismatch(format!(
                "invalid image size {width}x{height}"
            ))),
        }
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        let area = width
            .checked_mul(height)
            .ok_or_else(|| Error::DimensionMismatch(format!("invalid image size {width}x{height}")))?;
        Self::new(width, height, vec![value; area])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    /// Predicted value of the pixel at `(row, col)`.
    pub fn predict(&self, row: usize, col: usize) -> u8 {
        predict_in(&self.pixels, self.width, self.height, row, col)
    }

    /// Reads a binary (P5) PGM with maxval 255.
    pub fn read_pgm<R: Read>(mut reader: R) -> Result<Self> {
        let mut data = Vec::new();
        reader.read_to_end(&mut data)?;
        Self::parse_pgm(&data)
    }

    pub fn parse_pgm(data: &[u8]) -> Result<Self> {
        let mut pos = 0;
        if data.get(..2) != Some(b"P5") {
            return Err(Error::Format("not a binary PGM (missing P5 magic)".into()));
        }
        pos += 2;
        let mut fields = [0usize; 3];
        for field in fields.iter_mut() {
            *field = pgm_number(data, &mut pos)?;
        }
        let [width, height, maxval] = fields;
        if maxval != 255 {
            return Err(Error::Format(format!("unsupported PGM maxval {maxval}")));
        }
        // Exactly one whitespace byte separates the header from the raster.
        match data.get(pos) {
            Some(c) if c.is_ascii_whitespace() => pos += 1,
            _ => return Err(Error::Format("PGM header not terminated".into())),
        }
        let area = width
            .checked_mul(height)
            .filter(|&a| a > 0)
            .ok_or_else(|| Error::Format(format!("invalid PGM size {width}x{height}")))?;
        let raster = data
            .get(pos..)
            .filter(|r| r.len() >= area)
            .ok_or_else(|| Error::Format(format!("PGM raster truncated: need {area} bytes")))?;
        Self::new(width, height, raster[..area].to_vec())
    }

    pub fn write_pgm<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(&self.to_pgm())?;
        Ok(())
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_pgm(&std::fs::read(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_pgm())?;
        Ok(())
    }
}

fn pgm_number(data: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match data.get(*pos) {
            Some(c) if c.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while data.get(*pos).is_some_and(|&c| c != b'\n') {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while data.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format("malformed PGM header".into()))
}

/// Predictor on a raw row-major buffer. With `a1` right, `a2` below, `a3`
/// below-left and `a4` below-right:
///
/// * bottom-right corner: 128;
/// * bottom row: the pixel to the right;
/// * rightmost column: the pixel below;
/// * leftmost column: the pixel to the right;
/// * elsewhere: `(3 a1 + 3 a2 + a3 + a4 + 4) / 8`, rounded down.
pub fn predict_in(pixels: &[u8], width: usize, height: usize, row: usize, col: usize) -> u8 {
    let at = |r: usize, c: usize| pixels[r * width + c] as u32;
    let bottom = row + 1 == height;
    let rightmost = col + 1 == width;
    if bottom && rightmost {
        128
    } else if bottom {
        at(row, col + 1) as u8
    } else if rightmost {
        at(row + 1, col) as u8
    } else if col == 0 {
        at(row, col + 1) as u8
    } else {
        let sum = 3 * at(row, col + 1) + 3 * at(row + 1, col) + at(row + 1, col - 1) + at(row + 1, col + 1);
        ((sum + 4) / 8) as u8
    }
}

/// How a [`LookupTable`] starts out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableInit {
    /// All ones.
    Flat,
    /// Ones with [`DYNAMIC_DIAGONAL`] on the diagonal.
    Diagonal,
}

impl From<Mode> for TableInit {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Static => TableInit::Flat,
            Mode::Dynamic => TableInit::Diagonal,
        }
    }
}

/// `K[i][j]`: how often actual value `j` occurred under predicted value `i`.
#[derive(Clone, PartialEq, Eq)]
pub struct LookupTable {
    counts: Vec<u32>,
}

impl fmt::Debug for LookupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LookupTable(total {})", self.counts.iter().map(|&c| c as u64).sum::<u64>())
    }
}

impl LookupTable {
    pub fn new(init: TableInit) -> Self {
        let mut counts = vec![1; LEVELS * LEVELS];
        if init == TableInit::Diagonal {
            for i in 0..LEVELS {
                counts[i * LEVELS + i] = DYNAMIC_DIAGONAL;
            }
        }
        Self { counts }
    }

    /// A table from `LEVELS * LEVELS` row-major counts, all at least one.
    pub fn from_counts(counts: Vec<u32>) -> Result<Self> {
        if counts.len() != LEVELS * LEVELS {
            return Err(Error::DimensionMismatch(format!(
                "lookup table needs {} entries, got {}",
                LEVELS * LEVELS,
                counts.len()
            )));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidTable("lookup table entries must be positive".into()));
        }
        Ok(Self { counts })
    }

    /// Initializes per `init`, then counts every pixel under its prediction.
    pub fn build(img: &GrayImage, init: TableInit) -> Self {
        let mut table = Self::new(init);
        for row in (0..img.height).rev() {
            for col in (0..img.width).rev() {
                table.increment(img.predict(row, col), img.get(row, col));
            }
        }
        table
    }

    pub fn get(&self, predicted: u8, actual: u8) -> u32 {
        self.counts[predicted as usize * LEVELS + actual as usize]
    }

    pub fn row(&self, predicted: u8) -> &[u32] {
        let start = predicted as usize * LEVELS;
        &self.counts[start..start + LEVELS]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.counts
    }

    pub fn increment(&mut self, predicted: u8, actual: u8) {
        self.counts[predicted as usize * LEVELS + actual as usize] += 1;
    }

    pub fn decrement(&mut self, predicted: u8, actual: u8) -> Result<()> {
        let c = &mut self.counts[predicted as usize * LEVELS + actual as usize];
        if *c <= 1 {
            return Err(Error::InvalidDistribution(format!(
                "count K[{predicted}][{actual}] would drop below one"
            )));
        }
        *c -= 1;
        Ok(())
    }
}

/// Result of [`embed_image`].
#[derive(Clone, Debug, PartialEq)]
pub struct StegoImage {
    pub image: GrayImage,
    pub side: SideInfo,
    /// The frozen count table; only static mode transmits it.
    pub table: Option<LookupTable>,
}

impl StegoImage {
    /// Net bits per pixel.
    pub fn rate(&self) -> f64 {
        self.side.net_bits() as f64 / self.image.pixels.len() as f64
    }
}

fn check_image_params(params: &CodecParams) -> Result<()> {
    if params.alphabet() != LEVELS {
        return Err(Error::InvalidParams(format!(
            "images need an alphabet of {LEVELS}, got {}",
            params.alphabet()
        )));
    }
    Ok(())
}

/// Embeds `msg` into `img` in raster order.
pub fn embed_image(
    img: &GrayImage,
    msg: &mut MessageContainer,
    mode: Mode,
    cfg: &BfiConfig,
    params: &CodecParams,
) -> Result<StegoImage> {
    let mut cache = TableCache::new(*cfg, *params);
    embed_image_cached(img, msg, mode, &mut cache)
}

/// [`embed_image`] with a caller-owned table cache.
pub fn embed_image_cached(
    img: &GrayImage,
    msg: &mut MessageContainer,
    mode: Mode,
    cache: &mut TableCache,
) -> Result<StegoImage> {
    let params = *cache.params();
    let cfg = *cache.config();
    check_image_params(&params)?;
    check_symbols(&img.pixels, &params)?;
    let mut table = LookupTable::build(img, mode.into());
    let mut emb = Embedder::new(params, msg);
    let mut stego = Vec::with_capacity(img.pixels.len());
    for row in 0..img.height {
        for col in 0..img.width {
            let (pred, h) = (img.predict(row, col), img.get(row, col));
            if mode == Mode::Dynamic {
                table.decrement(pred, h)?;
            }
            let tables = cache.get(table.row(pred))?;
            stego.push(emb.step(h, &tables)?);
        }
    }
    debug_assert!(mode == Mode::Static || table == LookupTable::new(TableInit::Diagonal));
    Ok(StegoImage {
        image: GrayImage::new(img.width, img.height, stego)?,
        side: emb.finish(mode, cfg),
        table: (mode == Mode::Static).then_some(table),
    })
}

/// Host image and message recovered by [`extract_image`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedImage {
    pub image: GrayImage,
    pub message: crate::bitio::BitStack,
    /// The count table as it stands after extraction.
    pub table: LookupTable,
}

/// Recovers host image and message. Static mode needs the transmitted table.
pub fn extract_image(
    stego: &GrayImage,
    side: &SideInfo,
    table: Option<&LookupTable>,
) -> Result<ExtractedImage> {
    let mut cache = TableCache::new(side.cfg, side.params);
    extract_image_cached(stego, side, table, &mut cache)
}

/// [`extract_image`] with a caller-owned table cache.
pub fn extract_image_cached(
    stego: &GrayImage,
    side: &SideInfo,
    table: Option<&LookupTable>,
    cache: &mut TableCache,
) -> Result<ExtractedImage> {
    cache.check(side)?;
    check_image_params(&side.params)?;
    let mut table = match (side.mode, table) {
        (Mode::Static, Some(t)) => t.clone(),
        (Mode::Static, None) => {
            return Err(Error::Format("static image extraction needs the lookup table".into()))
        }
        (Mode::Dynamic, _) => LookupTable::new(TableInit::Diagonal),
    };
    let (width, height) = (stego.width, stego.height);
    let mut host = vec![0u8; stego.pixels.len()];
    let mut ext = Extractor::new(side, host.len());
    for row in (0..height).rev() {
        for col in (0..width).rev() {
            let pred = predict_in(&host, width, height, row, col);
            let tables = cache.get(table.row(pred))?;
            let h = ext.step(stego.get(row, col), &tables)?;
            if side.mode == Mode::Dynamic {
                table.increment(pred, h);
            }
            host[row * width + col] = h;
        }
    }
    let message = ext.finish(side)?;
    Ok(ExtractedImage {
        image: GrayImage::new(width, height, host)?,
        message,
        table,
    })
}

/// Mean squared pixel difference.
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(sequence_mse(&a.pixels, &b.pixels))
}

/// Mean squared difference of two equally long byte sequences.
pub fn sequence_mse(a: &[u8], b: &[u8]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sum: u64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as i64 - y as i64).pow(2) as u64)
        .sum();
    sum as f64 / a.len() as f64
}

/// `10 log10(255^2 / MSE)`; infinite for identical images.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitio::BitStack;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn img(w: usize, h: usize, px: &[u8]) -> GrayImage {
        GrayImage::new(w, h, px.to_vec()).unwrap()
    }

    /// A smooth random image: a random walk along rows blended with the row
    /// below.
    fn smooth_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
        let mut px = vec![0u8; w * h];
        let mut v = rng.gen_range(60..200);
        for r in 0..h {
            for c in 0..w {
                v = (v + rng.gen_range(-6..=6)).clamp(0, 255);
                let up = if r > 0 { px[(r - 1) * w + c] as i32 } else { v };
                px[r * w + c] = ((v + up) / 2) as u8;
            }
        }
        img(w, h, &px)
    }

    fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> BitStack {
        BitStack::from_bits_top_down((0..len).map(|_| rng.gen::<bool>()))
    }

    fn top_bits(s: &BitStack, k: usize) -> Vec<bool> {
        s.iter_top_down().take(k).collect()
    }

    #[test]
    fn predictor_examples() {
        // 3x3 with the centre's neighbours set explicitly.
        let mut px = vec![0u8; 9];
        px[5] = 80; // right of centre
        px[7] = 80; // below
        px[6] = 120; // below-left
        px[8] = 120; // below-right
        let m = img(3, 3, &px);
        assert_eq!(m.predict(1, 1), 90); // (240 + 240 + 120 + 120 + 4) / 8 = 90.5
        assert_eq!(img(3, 3, &[100; 9]).predict(1, 1), 100);
        assert_eq!(m.predict(2, 2), 128);
        assert_eq!(m.predict(2, 0), m.get(2, 1));
        assert_eq!(m.predict(2, 1), m.get(2, 2));
        assert_eq!(m.predict(0, 2), m.get(1, 2));
        assert_eq!(m.predict(1, 0), m.get(1, 1));
    }

    #[test]
    fn predictor_on_degenerate_shapes() {
        assert_eq!(img(1, 1, &[9]).predict(0, 0), 128);
        let col = img(1, 3, &[1, 2, 3]);
        assert_eq!([col.predict(0, 0), col.predict(1, 0), col.predict(2, 0)], [2, 3, 128]);
        let row = img(3, 1, &[1, 2, 3]);
        assert_eq!([row.predict(0, 0), row.predict(0, 1), row.predict(0, 2)], [2, 3, 128]);
    }

    #[test]
    fn neighbours_come_later_in_raster_order() {
        // Every pixel the predictor can read lies strictly after the pixel
        // itself: same row further right, or a lower row.
        let (w, h) = (5, 4);
        for row in 0..h {
            for col in 0..w {
                let mut probe = vec![0u8; w * h];
                let base = predict_in(&probe, w, h, row, col);
                for k in 0..w * h {
                    probe[k] = 255;
                    let moved = predict_in(&probe, w, h, row, col) != base;
                    probe[k] = 0;
                    if moved {
                        assert!(k > row * w + col, "pixel ({row},{col}) reads index {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn table_of_a_constant_image() {
        let t = LookupTable::build(&GrayImage::filled(4, 4, 7).unwrap(), TableInit::Flat);
        assert_eq!(t.get(7, 7), 16);
        assert_eq!(t.get(128, 7), 2);
        let others = t.as_slice().iter().filter(|&&c| c != 1).count();
        assert_eq!(others, 2);
    }

    #[test]
    fn table_initializations() {
        let t = LookupTable::new(TableInit::Diagonal);
        for i in 0..=255u8 {
            for j in [0u8, 17, 255] {
                assert_eq!(t.get(i, j), if i == j { 32 } else { 1 });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = smooth_image(&mut rng, 33, 17);
        let total: u64 = LookupTable::build(&m, TableInit::Flat).as_slice().iter().map(|&c| c as u64).sum();
        assert_eq!(total, 33 * 17 + 256 * 256);
    }

    #[test]
    fn metrics() {
        let a = img(1, 1, &[0]);
        let b = img(1, 1, &[255]);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &b).unwrap(), 65025.0);
        assert_eq!(psnr(&a, &b).unwrap(), 0.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert!((psnr_from_mse(1.0) - 48.1308).abs() < 1e-4);
        assert!(mse(&a, &img(2, 1, &[0, 0])).is_err());
    }

    #[test]
    fn pgm_round_trip_and_comments() {
        let m = img(3, 2, &[0, 1, 2, 253, 254, 255]);
        assert_eq!(GrayImage::parse_pgm(&m.to_pgm()).unwrap(), m);
        let mut commented = b"P5\n# made by hand\n3 # width\n2\n255\n".to_vec();
        commented.extend_from_slice(m.pixels());
        assert_eq!(GrayImage::parse_pgm(&commented).unwrap(), m);
        assert!(GrayImage::parse_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(GrayImage::parse_pgm(b"P5\n2 2\n255\n\x01\x02").is_err());
        assert!(GrayImage::parse_pgm(b"P5\n1 1\n65535\n\x00\x00").is_err());
    }

    #[test]
    fn infinite_alpha_leaves_the_image_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = smooth_image(&mut rng, 24, 20);
        let params = CodecParams::default();
        for mode in [Mode::Static, Mode::Dynamic] {
            let mut msg = MessageContainer::new(random_bits(&mut rng, 500));
            let out = embed_image(&m, &mut msg, mode, &BfiConfig::with_alpha(f64::INFINITY), &params)
                .unwrap();
            assert_eq!(out.image, m);
            assert_eq!(out.side.net_bits(), 0);
            assert_eq!(psnr(&m, &out.image).unwrap(), f64::INFINITY);
        }
    }

    #[test]
    fn round_trips_in_both_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = CodecParams::default();
        for (mode, alpha, w, h) in [
            (Mode::Static, 1.01, 40, 30),
            (Mode::Static, 1.0001, 17, 9),
            (Mode::Dynamic, 1.01, 20, 16),
            (Mode::Dynamic, 1.4, 9, 13),
        ] {
            let m = smooth_image(&mut rng, w, h);
            let bits = random_bits(&mut rng, 8 * w * h);
            let mut msg = MessageContainer::new(bits.clone());
            let out = embed_image(&m, &mut msg, mode, &BfiConfig::with_alpha(alpha), &params).unwrap();
            assert_eq!(out.table.is_some(), mode == Mode::Static);
            let back = extract_image(&out.image, &out.side, out.table.as_ref()).unwrap();
            assert_eq!(back.image, m, "{mode:?} {alpha}");
            assert_eq!(
                top_bits(&back.message, usize::MAX),
                top_bits(&bits, out.side.message_bits as usize)
            );
            if mode == Mode::Dynamic {
                assert_eq!(back.table, LookupTable::build(&m, TableInit::Diagonal));
            }
        }
    }

    #[test]
    fn constant_image_round_trip() {
        let m = GrayImage::filled(16, 16, 0).unwrap();
        let bits = BitStack::from_bytes(&[0x5A; 64]);
        for mode in [Mode::Static, Mode::Dynamic] {
            let mut msg = MessageContainer::new(bits.clone());
            let out = embed_image(&m, &mut msg, mode, &BfiConfig::with_alpha(1.01), &CodecParams::default())
                .unwrap();
            let back = extract_image(&out.image, &out.side, out.table.as_ref()).unwrap();
            assert_eq!(back.image, m);
        }
    }

    #[test]
    fn static_extraction_needs_the_table() {
        let m = GrayImage::filled(4, 4, 50).unwrap();
        let mut msg = MessageContainer::new(BitStack::new());
        let out = embed_image(&m, &mut msg, Mode::Static, &BfiConfig::default(), &CodecParams::default())
            .unwrap();
        assert!(matches!(extract_image(&out.image, &out.side, None), Err(Error::Format(_))));
    }

    #[test]
    fn larger_alpha_embeds_less_and_distorts_less() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = smooth_image(&mut rng, 64, 64);
        let mut last = (f64::INFINITY, 0.0f64);
        for alpha in [1.0001, 1.001, 1.01, 1.1] {
            let mut msg = MessageContainer::new(random_bits(&mut rng, 8 * 64 * 64));
            let out = embed_image(&m, &mut msg, Mode::Static, &BfiConfig::with_alpha(alpha), &CodecParams::default())
                .unwrap();
            let p = psnr(&m, &out.image).unwrap();
            assert!(out.rate() <= last.0 && p >= last.1, "alpha {alpha}: {} bpp, {p} dB", out.rate());
            last = (out.rate(), p);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn predictions_stay_in_range(w in 1usize..6, h in 1usize..6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let px: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
            let m = img(w, h, &px);
            for r in 0..h {
                for c in 0..w {
                    let p = m.predict(r, c) as u32;
                    if r + 1 < h && c + 1 < w && c > 0 {
                        let n = [m.get(r, c + 1), m.get(r + 1, c), m.get(r + 1, c - 1), m.get(r + 1, c + 1)];
                        prop_assert!(p >= *n.iter().min().unwrap() as u32 && p <= *n.iter().max().unwrap() as u32);
                    }
                }
            }
        }

        #[test]
        fn pgm_round_trip(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let px: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
            let m = img(w, h, &px);
            prop_assert_eq!(GrayImage::parse_pgm(&m.to_pgm()).unwrap(), m);
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ans_rdh::bfi::{expected_distortion, expected_rate};
use ans_rdh::image::{psnr_from_mse, sequence_mse, GrayImage};
use ans_rdh::media::{histogram, Host};
use ans_rdh::rdh::{Mode, TablePair};
use ans_rdh::sidecar::{Media, Sidecar};
use ans_rdh::sweep::{discrete_normal, point_rng, run_grid, sample_sequence, write_csv, Spread, SweepPoint, SweepSettings};
use ans_rdh::{BfiConfig, CodecParams, CumulativePmf};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Reversible data hiding in 8-bit sequences and PGM images.
#[derive(Parser)]
#[command(name = "ans-rdh", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide a message in a raw byte sequence or a PGM image.
    Embed(EmbedArgs),
    /// Recover host media and message from stego media plus sidecar.
    Extract(ExtractArgs),
    /// Rate-distortion sweep over discrete-normal hosts, as CSV.
    Sweep(SweepArgs),
    /// Write a raw host sequence drawn from a discrete normal.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Static,
    Dynamic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Static => Mode::Static,
            ModeArg::Dynamic => Mode::Dynamic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    Static,
    Dynamic,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum MediaArg {
    /// `.pgm` files are images, anything else is raw.
    Auto,
    Raw,
    Image,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpreadArg {
    /// Sigma is the standard deviation.
    Std,
    /// Sigma is the variance.
    Variance,
}

impl From<SpreadArg> for Spread {
    fn from(s: SpreadArg) -> Self {
        match s {
            SpreadArg::Std => Spread::StdDev,
            SpreadArg::Variance => Spread::Variance,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct CoderArgs {
    /// Coder widths as T,n,v.
    #[arg(long, value_parser = parse_params, default_value = "16,16,1")]
    params: (u32, u32, u32),
    /// BFI tolerance.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
}

impl CoderArgs {
    fn params(&self) -> Result<CodecParams, CliError> {
        let (t, n, v) = self.params;
        Ok(CodecParams::new(256, t, n, v)?)
    }

    fn cfg(&self, alpha: f64) -> BfiConfig {
        BfiConfig {
            alpha,
            epsilon: self.epsilon,
            ..BfiConfig::default()
        }
    }
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Tradeoff: 1 embeds the most, `inf` nothing.
    #[arg(long)]
    alpha: f64,
    /// Host media.
    #[arg(long = "in")]
    input: PathBuf,
    /// Message bytes.
    #[arg(long)]
    msg: PathBuf,
    /// Stego media.
    #[arg(long)]
    out: PathBuf,
    /// Sidecar file.
    #[arg(long)]
    meta: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    media: MediaArg,
    /// Also print the rate and MSE predicted from the host histogram.
    #[arg(long)]
    expected: bool,
    #[command(flatten)]
    coder: CoderArgs,
}

#[derive(Args)]
struct ExtractArgs {
    /// Stego media.
    #[arg(long = "in")]
    input: PathBuf,
    /// Sidecar written by `embed`.
    #[arg(long)]
    meta: PathBuf,
    /// Recovered host media.
    #[arg(long)]
    out: PathBuf,
    /// Recovered message.
    #[arg(long = "msg-out")]
    msg_out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "128,256,512")]
    sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.0001,1.001,1.01")]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 65536)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "static")]
    mode: SweepMode,
    #[arg(long, value_enum, default_value = "std")]
    spread: SpreadArg,
    /// Report zero runtimes so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[command(flatten)]
    coder: CoderArgs,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 65536)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "std")]
    spread: SpreadArg,
    #[arg(long)]
    out: PathBuf,
}

fn parse_params(s: &str) -> Result<(u32, u32, u32), String> {
    let parts: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad number {p:?}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [t, n, v] => Ok((t, n, v)),
        _ => Err("expected T,n,v".into()),
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] ans_rdh::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Embed(a) => embed(a),
        Command::Extract(a) => extract(a),
        Command::Sweep(a) => sweep(a),
        Command::Sample(a) => sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 1,
                CliError::Data(_) => 2,
            })
        }
    }
}

fn is_image(path: &Path, media: MediaArg) -> bool {
    match media {
        MediaArg::Raw => false,
        MediaArg::Image => true,
        MediaArg::Auto => path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm")),
    }
}

fn embed(a: EmbedArgs) -> Result<(), CliError> {
    let params = a.coder.params()?;
    let cfg = a.coder.cfg(a.alpha);
    cfg.validate()?;
    let message = std::fs::read(&a.msg)?;
    let image = is_image(&a.input, a.media);
    let (host, img) = if image {
        let img = GrayImage::load(&a.input)?;
        (img.pixels().to_vec(), Some(img))
    } else {
        (std::fs::read(&a.input)?, None)
    };
    if host.is_empty() {
        return Err(CliError::Usage("host media is empty".into()));
    }
    if a.expected {
        if image {
            eprintln!("note: --expected is only available for raw sequences");
        } else {
            let pcx = CumulativePmf::from_counts(&histogram(&host, params.alphabet())?)?;
            let tables = TablePair::derive(&pcx, &cfg, &params)?;
            let (px, py) = (tables.host.probabilities(), tables.stego.probabilities());
            println!("expected rate: {:.6} bpp", expected_rate(&px, &py));
            println!("expected mse: {:.6}", expected_distortion(&px, &py)?);
        }
    }
    let media_host = match &img {
        Some(img) => Host::Image(img),
        None => Host::Raw(&host),
    };
    let out = ans_rdh::embed(media_host, &message, a.mode.into(), &cfg, &params)?;
    match &img {
        Some(img) => GrayImage::new(img.width(), img.height(), out.stego.clone())?.save(&a.out)?,
        None => std::fs::write(&a.out, &out.stego)?,
    }
    out.sidecar.save(&a.meta)?;

    let s = &out.sidecar.side;
    let original_bits = out.sidecar.original_bits;
    let distortion = sequence_mse(&host, &out.stego);
    println!("embedded bits: {}", s.net_bits());
    println!("message bits: {} of {}", s.message_bits, original_bits);
    println!("rate: {:.6} bpp", out.rate());
    println!("mse: {distortion:.6}");
    if image {
        println!("psnr: {:.4} dB", psnr_from_mse(distortion));
    }
    if s.message_bits < original_bits {
        eprintln!(
            "warning: only {} of {} message bits fit; extraction recovers that prefix",
            s.message_bits, original_bits
        );
    }
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<(), CliError> {
    let sidecar = Sidecar::load(&a.meta)?;
    let stego = match sidecar.media {
        Media::Image { width, height } => {
            let img = GrayImage::load(&a.input)?;
            if (img.width(), img.height()) != (width as usize, height as usize) {
                return Err(ans_rdh::Error::DimensionMismatch(format!(
                    "stego image is {}x{}, sidecar records {width}x{height}",
                    img.width(),
                    img.height()
                ))
                .into());
            }
            img.into_pixels()
        }
        Media::Raw { .. } => std::fs::read(&a.input)?,
    };
    let out = ans_rdh::extract(&stego, &sidecar)?;
    match sidecar.media {
        Media::Image { width, height } => {
            GrayImage::new(width as usize, height as usize, out.host)?.save(&a.out)?
        }
        Media::Raw { .. } => std::fs::write(&a.out, out.host)?,
    }
    std::fs::write(&a.msg_out, out.message.to_bytes())?;
    println!("message bits: {}", out.message.len());
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), CliError> {
    if a.n == 0 || a.sigma.is_empty() || a.alpha.is_empty() {
        return Err(CliError::Usage("need n > 0 and at least one sigma and alpha".into()));
    }
    let settings = SweepSettings {
        params: a.coder.params()?,
        cfg: a.coder.cfg(BfiConfig::default().alpha),
        spread: a.spread.into(),
    };
    let modes: &[Mode] = match a.mode {
        SweepMode::Static => &[Mode::Static],
        SweepMode::Dynamic => &[Mode::Dynamic],
        SweepMode::Both => &[Mode::Static, Mode::Dynamic],
    };
    let mut points = Vec::new();
    for &sigma in &a.sigma {
        for &alpha in &a.alpha {
            BfiConfig { alpha, ..settings.cfg }.validate()?;
            for &mode in modes {
                points.push(SweepPoint {
                    sigma,
                    alpha,
                    n: a.n,
                    seed: a.seed,
                    mode,
                });
            }
        }
    }
    let rows = run_grid(&points, &settings)?;
    write_csv(&rows, std::io::stdout().lock(), !a.no_timing)?;
    Ok(())
}

fn sample(a: SampleArgs) -> Result<(), CliError> {
    let pc = discrete_normal(Spread::from(a.spread).std_dev(a.sigma), 256)?;
    let mut rng = point_rng(a.seed, a.sigma);
    std::fs::write(&a.out, sample_sequence(&pc, a.n, &mut rng))?;
    Ok(())
}

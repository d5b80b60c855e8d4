use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tvr_core::{Config, Detector, ExternalBridge, Inpainter, PatchSpec, Placement, Texture};

/// Environment variable naming the parent directory for external generator
/// workspaces.
pub const BRIDGE_TMPDIR_ENV: &str = "TVR_BRIDGE_TMPDIR";

/// Block sizes visited by `sweep` unless `--sizes` is given.
pub const SWEEP_SIZES: [usize; 5] = [7, 14, 28, 56, 112];

#[derive(Debug, Parser, PartialEq)]
#[command(
    name = "tvr",
    version,
    about = "Detect and remove localized patches by block-wise total variation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, PartialEq)]
pub enum Command {
    /// Clean an image (or every PNG in a directory): writes reconstructed.png,
    /// cropped.png, mask.png and surface.json.
    Resurface {
        /// Input PNG or directory of PNGs.
        input: PathBuf,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Stamp synthetic patches into an image: writes patched.png and truth.png.
    Inject {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        patch: PatchArgs,
    },
    /// Clean an image and score detection against a ground-truth mask:
    /// writes report.json.
    Eval {
        input: PathBuf,
        /// Ground-truth pixel mask (0 or 255), as written by `inject`.
        #[arg(long)]
        truth: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Export the TV score surface only: writes surface.json.
    Surface {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Run the pipeline at several block sizes: writes report-k<size>.json
    /// per size. `--block-size` is ignored.
    Sweep {
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Optional ground-truth mask for detection metrics.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Block sizes to visit.
        #[arg(long, value_delimiter = ',', default_values_t = SWEEP_SIZES)]
        sizes: Vec<usize>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Zero,
    MeanFill,
    Diffusion,
    External,
}

#[derive(Debug, Args, PartialEq)]
pub struct PipelineArgs {
    /// Side of the square blocks; must divide the image side.
    #[arg(long, default_value_t = 28)]
    pub block_size: usize,
    /// Multiplier on the interquartile range above the third quartile.
    #[arg(long, default_value_t = 1.5)]
    pub iqr_factor: f64,
    /// Never flag blocks whose TV score is at or below this value.
    #[arg(long)]
    pub absolute_floor: Option<f64>,
    /// Mask a block in all channels when any channel flags it.
    #[arg(long)]
    pub channel_union: bool,
    /// Inpainting method for masked blocks.
    #[arg(long, value_enum, default_value_t = Method::Diffusion)]
    pub inpaint: Method,
    /// Generator program for `--inpaint external`; called with a workspace
    /// directory holding cropped.png and mask.png, must write generated.png.
    #[arg(long)]
    pub generator: Option<PathBuf>,
}

impl PipelineArgs {
    pub fn to_config(&self, block_size: usize) -> anyhow::Result<Config> {
        let detector = Detector::new(block_size)
            .with_iqr_factor(self.iqr_factor)
            .with_absolute_floor(self.absolute_floor);
        detector.validate()?;
        let bridge = self
            .generator
            .as_ref()
            .map(|g| ExternalBridge::new(g).with_temp_root(std::env::var_os(BRIDGE_TMPDIR_ENV).map(PathBuf::from)));
        let name = match self.inpaint {
            Method::Zero => "zero",
            Method::MeanFill => "mean-fill",
            Method::Diffusion => "diffusion",
            Method::External => "external",
        };
        let inpainter = Inpainter::from_name(name, bridge)?;
        Ok(Config::new(detector, inpainter).with_channel_union(self.channel_union))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TextureKind {
    Noise,
    Checkerboard,
    Solid,
    File,
}

#[derive(Debug, Args, PartialEq)]
pub struct PatchArgs {
    /// Number of patches; each covers area-fraction / count of the image.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Total patch area as a fraction of the image area.
    #[arg(long, default_value_t = 0.06)]
    pub area_fraction: f64,
    #[arg(long, value_enum, default_value_t = TextureKind::Noise)]
    pub texture: TextureKind,
    /// PNG used by `--texture file`.
    #[arg(long)]
    pub texture_file: Option<PathBuf>,
    /// Cell side for `--texture checkerboard`.
    #[arg(long, default_value_t = 4)]
    pub cell: usize,
    /// RGB intensities in [0, 1] for `--texture solid`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 0.0, 0.0])]
    pub color: Vec<f64>,
    /// Top-left corner ROW,COL of a patch; repeat once per patch. Random
    /// non-overlapping placement when omitted.
    #[arg(long = "at", value_parser = parse_corner)]
    pub corners: Vec<(usize, usize)>,
    /// Scale each patch side by a random factor in [0.7, 1].
    #[arg(long)]
    pub scale_jitter: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_corner(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(',')
        .ok_or_else(|| format!("expected ROW,COL, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|e| format!("bad coordinate `{v}`: {e}"))
    };
    Ok((parse(r)?, parse(c)?))
}

impl PatchArgs {
    pub fn to_spec(&self) -> anyhow::Result<PatchSpec<f64>> {
        let texture = match self.texture {
            TextureKind::Noise => Texture::Noise,
            TextureKind::Checkerboard => Texture::Checkerboard { cell: self.cell },
            TextureKind::Solid => {
                let [r, g, b] = self.color[..] else {
                    anyhow::bail!("--color needs exactly three values");
                };
                Texture::Solid([r, g, b])
            }
            TextureKind::File => {
                let path = self
                    .texture_file
                    .as_ref()
                    .ok_or_else(|| anyhow::anyhow!("--texture file needs --texture-file"))?;
                Texture::Image(tvr_core::io::read_png(path)?)
            }
        };
        let placement = if self.corners.is_empty() {
            Placement::Random
        } else {
            Placement::Explicit(self.corners.clone())
        };
        let mut spec = PatchSpec::new(self.count, self.area_fraction, self.seed)
            .with_placement(placement)
            .with_texture(texture);
        spec.scale_jitter = self.scale_jitter;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("tvr").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults() {
        let Command::Resurface { pipeline, .. } = parse(&["resurface", "in.png", "-o", "out"]).command else {
            panic!("wrong subcommand");
        };
        assert_eq!(pipeline.block_size, 28);
        assert_eq!(pipeline.iqr_factor, 1.5);
        assert_eq!(pipeline.inpaint, Method::Diffusion);
        assert!(!pipeline.channel_union);
        let cfg = pipeline.to_config(pipeline.block_size).unwrap();
        assert_eq!(cfg, Config::default());
    }

    #[test]
    fn same_argv_same_config() {
        let argv = [
            "eval",
            "x.png",
            "--truth",
            "t.png",
            "-o",
            "o",
            "--block-size",
            "14",
            "--iqr-factor",
            "2",
            "--channel-union",
            "--inpaint",
            "mean-fill",
            "--absolute-floor",
            "0.5",
        ];
        assert_eq!(parse(&argv), parse(&argv));
        let Command::Eval { pipeline, .. } = parse(&argv).command else {
            panic!("wrong subcommand");
        };
        let cfg = pipeline.to_config(pipeline.block_size).unwrap();
        assert_eq!(cfg.detector.block_side, 14);
        assert_eq!(cfg.detector.iqr_factor, 2.0);
        assert_eq!(cfg.detector.absolute_floor, Some(0.5));
        assert!(cfg.channel_union);
        assert_eq!(cfg.inpainter, Inpainter::MeanFill);
    }

    #[test]
    fn sweep_sizes() {
        let Command::Sweep { sizes, truth, .. } = parse(&["sweep", "x.png", "-o", "o"]).command else {
            panic!("wrong subcommand");
        };
        assert_eq!(sizes, SWEEP_SIZES.to_vec());
        assert!(truth.is_none());
        let Command::Sweep { sizes, .. } = parse(&["sweep", "x.png", "-o", "o", "--sizes", "8,16"]).command else {
            panic!("wrong subcommand");
        };
        assert_eq!(sizes, vec![8, 16]);
    }

    #[test]
    fn inject_spec() {
        let Command::Inject { patch, .. } = parse(&[
            "inject", "x.png", "-o", "o", "--count", "2", "--at", "0,0", "--at", "10,20", "--seed", "3",
        ])
        .command
        else {
            panic!("wrong subcommand");
        };
        let spec = patch.to_spec().unwrap();
        assert_eq!(spec.count, 2);
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.placement, Placement::Explicit(vec![(0, 0), (10, 20)]));
        assert!(parse_corner("3").is_err());
    }

    #[test]
    fn external_needs_generator() {
        let Command::Resurface { pipeline, .. } =
            parse(&["resurface", "x.png", "-o", "o", "--inpaint", "external"]).command
        else {
            panic!("wrong subcommand");
        };
        assert!(pipeline.to_config(28).is_err());
    }

    #[test]
    fn help_lists_every_flag() {
        Cli::command().debug_assert();
        for sub in ["resurface", "eval", "surface", "sweep"] {
            let mut cmd = Cli::command();
            let help = cmd.find_subcommand_mut(sub).unwrap().render_long_help().to_string();
            for flag in [
                "--block-size",
                "--iqr-factor",
                "--absolute-floor",
                "--channel-union",
                "--inpaint",
                "--generator",
                "[default: 28]",
                "[default: 1.5]",
                "[default: diffusion]",
            ] {
                assert!(help.contains(flag), "{sub} help lacks {flag}");
            }
        }
        let mut cmd = Cli::command();
        let help = cmd
            .find_subcommand_mut("inject")
            .unwrap()
            .render_long_help()
            .to_string();
        for flag in [
            "--count",
            "--area-fraction",
            "--texture",
            "--texture-file",
            "--cell",
            "--color",
            "--at",
            "--scale-jitter",
            "--seed",
        ] {
            assert!(help.contains(flag), "inject help lacks {flag}");
        }
    }
}

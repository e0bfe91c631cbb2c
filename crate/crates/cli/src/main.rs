use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dcdt::analysis::{hill_block_costs, mode_histogram_from_entries, random_block_costs, spearman, BlockCostVector};
use dcdt::dcdt::{DcdtParams, Steganalyzer};
use dcdt::dct::decompress;
use dcdt::embed::{embed, parse_map_csv, EmbedConfig};
use dcdt::jpeg::quality::infer_quality;
use dcdt::jpeg::sidecar::{dump_sidecar, load_sidecar};
use dcdt::spatial_cost::hill_cost;
use dcdt::{parse_jpeg, serialize_jpeg, Error, JpegImage};

#[derive(Parser)]
#[command(name = "dcdt", version, about = "JPEG steganography with spatial-to-DCT cost transformation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the quantized coefficients of a JPEG as a COEF1 sidecar.
    Dump { input: PathBuf, output: PathBuf },
    /// Encode a COEF1 sidecar as a baseline JPEG.
    Pack { input: PathBuf, output: PathBuf },
    /// Per-coefficient embedding costs as CSV.
    Cost {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        p: PChoice,
    },
    /// Simulate embedding a payload and write the stego JPEG.
    Embed {
        input: PathBuf,
        output: PathBuf,
        /// Payload in bits per nonzero AC coefficient.
        #[arg(long)]
        payload: f64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        p: PChoice,
        /// Re-optimize change signs per block and embed again.
        #[arg(long)]
        mde: bool,
        /// Largest per-block change count to optimize.
        #[arg(long = "T", visible_alias = "t", default_value_t = 10)]
        t: usize,
        /// Cost penalty factor for the second embedding.
        #[arg(long, default_value_t = 10.0)]
        v: f64,
        /// Relative entropy tolerance of the payload search.
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        /// Also write the modification map as CSV.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Spearman correlation of two block-cost files.
    Scc { a: PathBuf, b: PathBuf },
    /// Random block costs, uniform on (0, 1].
    Rand {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// HiLL cost summed per 8x8 block of the decompressed image.
    BlockCosts {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-mode change counts of a modification map.
    Modehist {
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PChoice {
    /// Explicit cost exponent.
    #[arg(long, conflicts_with = "qf_auto")]
    p: Option<f64>,
    /// Pick p from the quality inferred from the quantization table (default).
    #[arg(long)]
    qf_auto: bool,
    /// Steganalyzer whose tuned p is looked up in auto mode.
    #[arg(long, default_value = "sca-gfr")]
    steganalyzer: String,
}

enum Failure {
    Io(PathBuf, io::Error),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(..) => 2,
            Failure::Lib(e) if e.is_parse_error() => 2,
            Failure::Lib(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(path, e) => format!("io-error: {}: {e}", path.display()),
            Failure::Lib(e) => e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => write(path, text.as_bytes()),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e)),
    }
}

fn load_jpeg(path: &Path) -> Result<JpegImage, Failure> {
    Ok(parse_jpeg(&read(path)?)?)
}

fn resolve_p(choice: &PChoice, image: &JpegImage) -> Result<DcdtParams, Failure> {
    if let Some(p) = choice.p {
        return Ok(DcdtParams::explicit(p)?);
    }
    let steganalyzer: Steganalyzer = choice.steganalyzer.parse()?;
    let qf = infer_quality(&image.quant_table).ok_or(Error::UnknownQuantTable)?;
    Ok(DcdtParams::auto(qf as i32, steganalyzer)?)
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Dump { input, output } => write(&output, &dump_sidecar(&load_jpeg(&input)?)),
        Command::Pack { input, output } => {
            let image = load_sidecar(&read(&input)?)?;
            write(&output, &serialize_jpeg(&image)?)
        }
        Command::Cost { input, output, p } => {
            let image = load_jpeg(&input)?;
            let params = resolve_p(&p, &image)?;
            let spatial = hill_cost(&decompress(&image));
            let rho = dcdt::dcdt::dcdt_cost(&spatial, &image.quant_table, params.p)?;
            let text = format!("# p={},source={}\n{}", params.p, params.source, rho.to_csv());
            write(&output, text.as_bytes())
        }
        Command::Embed {
            input,
            output,
            payload,
            seed,
            p,
            mde,
            t,
            v,
            tol,
            map,
        } => {
            let image = load_jpeg(&input)?;
            let params = resolve_p(&p, &image)?;
            let mut config = EmbedConfig::new(payload, params, seed);
            config.mde = mde;
            config.t = t;
            config.v = v;
            config.lambda_tol = tol;
            let result = embed(&image, &config)?;
            write(&output, &serialize_jpeg(&result.stego)?)?;
            if let Some(path) = map {
                write(&path, result.map.to_csv().as_bytes())?;
            }
            let report = format!(
                "p={}\np_source={}\nmde={}\nnnz_ac={}\ntarget_bits={}\nentropy={}\nlambda={}\nchanges={}\nchange_rate={}\nexpected_changes={}\n",
                params.p,
                params.source,
                mde,
                result.nnz_ac,
                result.target_bits,
                result.entropy,
                result.lambda,
                result.changes(),
                result.change_rate(),
                result.expected_changes,
            );
            emit(None, &report)
        }
        Command::Scc { a, b } => {
            let x = BlockCostVector::from_csv(&read_text(&a)?)?;
            let y = BlockCostVector::from_csv(&read_text(&b)?)?;
            let r = spearman(&x.values, &y.values)?;
            emit(None, &format!("{r:+.4}\n"))
        }
        Command::Rand { n, seed, out } => {
            if n == 0 {
                return Err(Error::InvalidParameter("--n must be at least 1".into()).into());
            }
            emit(out.as_deref(), &random_block_costs(n, seed).to_csv())
        }
        Command::BlockCosts { input, out } => emit(out.as_deref(), &hill_block_costs(&load_jpeg(&input)?).to_csv()),
        Command::Modehist { map, out } => {
            let entries = parse_map_csv(&read_text(&map)?)?;
            emit(out.as_deref(), &mode_histogram_from_entries(&entries).to_csv())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("dcdt: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

//! `cdsim`: key generation, encryption, deletion and experiments for the
//! simulated certified-deletion schemes.

mod files;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use certdel::bits;
use certdel::cc::{self, wire, CcCert, CcParams, CcVerificationKey};
use certdel::codec::kind;
use certdel::harness::{self, ExperimentConfig, ExperimentParams, SchemeKind};
use certdel::otske::{DeletionCert, OtskeKey};
use certdel::pke_cd::{self, PkeCdPublicKey, PkeCdSecretKey};
use certdel::primitives::SchemeId;
use certdel::skecd::{self, SkeCdKey};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use files::{AnyCiphertext, CcPublicKeyFile, CcSecretKeyFile, CiphertextFile};

#[derive(Parser)]
#[command(name = "cdsim", version, about = "Simulated encryption with certified deletion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SeedArg {
    /// RNG seed. Defaults to $CDSIM_SEED, then 0.
    #[arg(long, env = "CDSIM_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair (or a symmetric key for ske-cd).
    Keygen {
        #[arg(long, value_enum)]
        scheme: KeyScheme,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        seed: SeedArg,
        /// Output prefix; writes PREFIX.pk and PREFIX.sk, or PREFIX.key.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Encrypt a bit string; writes PREFIX.ct and the secret PREFIX.vk.
    Encrypt {
        /// Public key, or the symmetric key for ske-cd.
        #[arg(long)]
        key: PathBuf,
        /// Message as a string of 0s and 1s.
        #[arg(long)]
        message: String,
        #[command(flatten)]
        seed: SeedArg,
        /// Transport for the interactive cc-pke-cd protocol.
        #[arg(long, value_enum, default_value_t = TransportArg::InProcess)]
        transport: TransportArg,
        /// Also write the cc-pke-cd wire transcript here.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext file and print the message; consumes the file.
    Decrypt {
        /// Secret key, or the symmetric key for ske-cd.
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        ct: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
    },
    /// Delete a ciphertext and write the certificate; consumes the file.
    Delete {
        #[arg(long)]
        ct: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check a deletion certificate. Exits 1 if it is rejected.
    Verify {
        #[arg(long)]
        vk: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Run a security game or correctness experiment and emit a JSON report.
    Experiment(ExperimentArgs),
    /// Exact check of the subset-disjointness bounds.
    LemmaCheck {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        /// Write the JSON report here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Record or inspect a cc-pke-cd wire transcript.
    Transcript {
        #[command(subcommand)]
        action: TranscriptAction,
    },
}

#[derive(Subcommand)]
enum TranscriptAction {
    /// Run one session and write the raw frames.
    Record {
        /// cc-pke-cd public key.
        #[arg(long)]
        key: PathBuf,
        /// Also run the deletion round with this secret key.
        #[arg(long)]
        sk: Option<PathBuf>,
        #[arg(long)]
        message: String,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, value_enum, default_value_t = TransportArg::InProcess)]
        transport: TransportArg,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// List the frames of a transcript file.
    Show { file: PathBuf },
}

#[derive(Args)]
struct ParamArgs {
    /// Message length in bits.
    #[arg(long, default_value_t = 8)]
    msg_len: usize,
    /// Number of claw-free instances is 4n (cc-pke-cd).
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Preimage width of each claw-free instance (cc-pke-cd).
    #[arg(long, default_value_t = 8)]
    w: usize,
    #[arg(long, default_value_t = 128)]
    lambda: u32,
    #[arg(long, value_enum, default_value_t = BaseArg::Stub)]
    base: BaseArg,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Read the whole configuration from a JSON file instead of flags.
    #[arg(long, conflicts_with_all = ["scheme", "strategy"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "config")]
    scheme: Option<SchemeArg>,
    #[arg(long, required_unless_present = "config")]
    strategy: Option<String>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value = "real")]
    mode: String,
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    seed: SeedArg,
    /// Write the JSON report here instead of stdout.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KeyScheme {
    PkeCd,
    SkeCd,
    CcPkeCd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    PkeCd,
    ReusableSkeCd,
    CcPkeCd,
    CutAndChoose,
    AmplifiedHardcore,
}

impl From<SchemeArg> for SchemeKind {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::PkeCd => SchemeKind::PkeCd,
            SchemeArg::ReusableSkeCd => SchemeKind::ReusableSkeCd,
            SchemeArg::CcPkeCd => SchemeKind::CcPkeCd,
            SchemeArg::CutAndChoose => SchemeKind::CutAndChoose,
            SchemeArg::AmplifiedHardcore => SchemeKind::AmplifiedHardcore,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    /// Insecure pass-through scheme, fast.
    Stub,
    /// Reference Regev encryption.
    Regev,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransportArg {
    InProcess,
    Loopback,
}

impl From<TransportArg> for wire::Transport {
    fn from(t: TransportArg) -> Self {
        match t {
            TransportArg::InProcess => wire::Transport::InProcess,
            TransportArg::Loopback => wire::Transport::Loopback,
        }
    }
}

impl ParamArgs {
    fn to_params(&self) -> ExperimentParams {
        ExperimentParams {
            n: self.n,
            w: self.w,
            msg_len: self.msg_len,
            lambda: self.lambda,
            base: match self.base {
                BaseArg::Stub => SchemeId::TestStub,
                BaseArg::Regev => SchemeId::RegevRef,
            },
        }
    }

    fn cc_params(&self) -> CcParams {
        let p = self.to_params();
        CcParams {
            n: p.n,
            w: p.w,
            lambda: p.lambda,
            msg_len: p.msg_len,
            scheme: p.base,
        }
    }
}

/// Exit status 2: the invocation itself was wrong.
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn rng(seed: SeedArg) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed.seed)
}

fn parse_message(s: &str, expected: usize) -> Result<Vec<bool>> {
    let m = match bits::parse_bits(s) {
        Ok(m) => m,
        Err(e) => return usage(format!("--message: {e}")),
    };
    if m.len() != expected {
        return usage(format!("--message has {} bits; the key takes {expected}", m.len()));
    }
    Ok(m)
}

fn keygen(scheme: KeyScheme, params: &ParamArgs, seed: SeedArg, out: &Path) -> Result<()> {
    let mut rng = rng(seed);
    let p = params.to_params();
    match scheme {
        KeyScheme::PkeCd => {
            let kp = pke_cd::pkecd_keygen(p.base, p.lambda, p.msg_len, &mut rng)?;
            files::store(&files::with_ext(out, "pk"), &kp.pk)?;
            files::store(&files::with_ext(out, "sk"), &kp.sk)?;
        }
        KeyScheme::SkeCd => {
            let key = skecd::skecd_keygen(p.msg_len, &mut rng)?;
            files::store(&files::with_ext(out, "key"), &key)?;
        }
        KeyScheme::CcPkeCd => {
            let params = params.cc_params();
            let kp = cc::cc_keygen(&params, &mut rng)?;
            files::store(&files::with_ext(out, "pk"), &CcPublicKeyFile { params, pk: kp.pk })?;
            files::store(&files::with_ext(out, "sk"), &CcSecretKeyFile { params, sk: kp.sk })?;
        }
    }
    Ok(())
}

fn encrypt(
    key: &Path,
    message: &str,
    seed: SeedArg,
    transport: TransportArg,
    transcript: Option<&Path>,
    out: &Path,
) -> Result<ExitCode> {
    let (k, bytes) = files::kind_of(key)?;
    if k != kind::CLI_CC_PUBLIC_KEY && (transcript.is_some() || transport != TransportArg::InProcess) {
        return usage("--transport and --transcript only apply to cc-pke-cd keys");
    }
    let decode = |e| anyhow::Error::new(e).context(format!("decoding {}", key.display()));
    let vk_path = files::with_ext(out, "vk");
    let ct_path = files::with_ext(out, "ct");
    match k {
        kind::PKECD_PUBLIC_KEY => {
            let pk: PkeCdPublicKey = certdel::codec::canonical_decode(&bytes).map_err(decode)?;
            let m = parse_message(message, pk.msg_len)?;
            let (vk, ct) = pke_cd::pkecd_enc(&pk, &m, &mut rng(seed))?;
            files::store(&vk_path, &vk)?;
            files::store(&ct_path, &CiphertextFile::hybrid(&ct))?;
        }
        kind::SKECD_KEY => {
            let key: SkeCdKey = certdel::codec::canonical_decode(&bytes).map_err(decode)?;
            let m = parse_message(message, key.msg_len)?;
            let (vk, ct) = skecd::skecd_enc(&key, &m, &mut rng(seed))?;
            files::store(&vk_path, &vk)?;
            files::store(&ct_path, &CiphertextFile::hybrid(&ct))?;
        }
        kind::CLI_CC_PUBLIC_KEY => {
            let f: CcPublicKeyFile = certdel::codec::canonical_decode(&bytes).map_err(decode)?;
            let m = parse_message(message, f.params.msg_len)?;
            let session = wire::run_session(&f.pk, None, &m, &f.params, seed.seed, transport.into())?;
            if let Some(path) = transcript {
                fs::write(path, &session.transcript).with_context(|| format!("writing {}", path.display()))?;
            }
            let (Some(vk), Some(ct)) = (session.sender.vk, session.receiver.ciphertext) else {
                eprintln!("sender aborted the protocol");
                return Ok(ExitCode::FAILURE);
            };
            files::store(&vk_path, &vk)?;
            files::store(&ct_path, &CiphertextFile::cc(&ct))?;
        }
        other => {
            return usage(format!(
                "{} is not an encryption key (kind 0x{other:02x})",
                key.display()
            ))
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn decrypt(key: &Path, ct_path: &Path, seed: SeedArg) -> Result<ExitCode> {
    let mut file: CiphertextFile = files::load(ct_path)?;
    let ct = file.take()?;
    let (k, _) = files::kind_of(key)?;
    let mut rng = rng(seed);
    let m = match (k, ct) {
        (kind::PKECD_SECRET_KEY, AnyCiphertext::Hybrid(ct)) => {
            let sk: PkeCdSecretKey = files::load(key)?;
            pke_cd::pkecd_dec(&sk, ct, &mut rng).map_err(anyhow::Error::from)
        }
        (kind::SKECD_KEY, AnyCiphertext::Hybrid(ct)) => {
            let key: SkeCdKey = files::load(key)?;
            skecd::skecd_dec(&key, ct, &mut rng).map_err(anyhow::Error::from)
        }
        (kind::CLI_CC_SECRET_KEY, AnyCiphertext::Cc(ct)) => {
            let f: CcSecretKeyFile = files::load(key)?;
            cc::cc_dec(&f.sk, ct, &mut rng).map_err(anyhow::Error::from)
        }
        _ => return usage(format!("{} does not decrypt this ciphertext", key.display())),
    };
    // the register was measured either way
    files::store(ct_path, &file)?;
    match m {
        Ok(m) => {
            println!("{}", bits::format_bits(&m));
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("decryption failed: {e:#}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn delete(ct_path: &Path, seed: SeedArg, out: &Path) -> Result<()> {
    let mut file: CiphertextFile = files::load(ct_path)?;
    let mut rng = rng(seed);
    match file.take()? {
        AnyCiphertext::Hybrid(ct) => {
            let (cert, _) = pke_cd::pkecd_del(ct, &mut rng)?;
            files::store(out, &cert)?;
        }
        AnyCiphertext::Cc(ct) => files::store(out, &cc::cc_del(ct, &mut rng)?)?,
    }
    files::store(ct_path, &file)
}

fn verify(vk: &Path, cert: &Path) -> Result<ExitCode> {
    let (vk_kind, _) = files::kind_of(vk)?;
    let (cert_kind, _) = files::kind_of(cert)?;
    let accepted = match (vk_kind, cert_kind) {
        (kind::OTSKE_KEY, kind::DELETION_CERT) => {
            let vk: OtskeKey = files::load(vk)?;
            let cert: DeletionCert = files::load(cert)?;
            pke_cd::pkecd_vrfy(&vk, &cert).unwrap_or(false)
        }
        (kind::CC_VERIFICATION_KEY, kind::CC_CERT) => {
            let vk: CcVerificationKey = files::load(vk)?;
            let cert: CcCert = files::load(cert)?;
            cc::cc_vrfy(&vk, &cert).unwrap_or(false)
        }
        _ => return usage("verification key and certificate belong to different schemes"),
    };
    println!("{}", if accepted { "accepted" } else { "rejected" });
    Ok(if accepted { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    let config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig {
            scheme: args.scheme.expect("required by clap").into(),
            params: args.params.to_params(),
            trials: args.trials,
            seed: args.seed.seed,
            strategy: args.strategy.clone().expect("required by clap"),
            mode: args.mode.clone(),
            output: args.out.as_ref().map(|p| p.display().to_string()),
        },
    };
    if let Err(e) = config.validate() {
        return usage(e.to_string());
    }
    let report = harness::run_experiment(&config)?;
    let json = report.to_json();
    match &config.output {
        Some(path) => {
            fs::write(path, json + "\n").with_context(|| format!("writing {path}"))?;
            for (name, r) in &report.rates {
                eprintln!(
                    "{name}: {}/{} = {:.6} [{:.6}, {:.6}]",
                    r.successes, r.trials, r.rate, r.wilson_low, r.wilson_high
                );
            }
            for v in &report.verdicts {
                eprintln!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
            }
        }
        None => println!("{json}"),
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn lemma_check(max_n: usize, out: Option<&Path>) -> Result<ExitCode> {
    if max_n == 0 {
        return usage("--max-n must be at least 1");
    }
    let report = harness::lemma_check(max_n)?;
    for c in &report.checks {
        println!(
            "n={} |T|={} Pr={} {}",
            c.n,
            c.t,
            c.probability,
            if c.holds() { "ok" } else { "VIOLATED" }
        );
    }
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&report)?;
        fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if report.all_hold {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn transcript(action: &TranscriptAction) -> Result<ExitCode> {
    match action {
        TranscriptAction::Record {
            key,
            sk,
            message,
            seed,
            transport,
            out,
        } => {
            let f: CcPublicKeyFile = files::load(key)?;
            let sk = sk.as_deref().map(files::load::<CcSecretKeyFile>).transpose()?;
            let m = parse_message(message, f.params.msg_len)?;
            let session = wire::run_session(
                &f.pk,
                sk.as_ref().map(|s| &s.sk),
                &m,
                &f.params,
                seed.seed,
                (*transport).into(),
            )?;
            fs::write(out, &session.transcript).with_context(|| format!("writing {}", out.display()))?;
            let frames = wire::parse_transcript(&session.transcript)?;
            eprintln!("{} frames, {} bytes", frames.len(), session.transcript.len());
            Ok(ExitCode::SUCCESS)
        }
        TranscriptAction::Show { file } => {
            let bytes = files::read(file)?;
            let frames = wire::parse_transcript(&bytes).with_context(|| format!("decoding {}", file.display()))?;
            for (i, frame) in frames.iter().enumerate() {
                println!(
                    "{i}: 0x{:02x} {} ({} bytes)",
                    frame.type_byte(),
                    frame.name(),
                    frame.to_bytes().len()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Keygen {
            scheme,
            params,
            seed,
            out,
        } => keygen(scheme, &params, seed, &out).map(|()| ExitCode::SUCCESS),
        Command::Encrypt {
            key,
            message,
            seed,
            transport,
            transcript,
            out,
        } => encrypt(&key, &message, seed, transport, transcript.as_deref(), &out),
        Command::Decrypt { key, ct, seed } => decrypt(&key, &ct, seed),
        Command::Delete { ct, seed, out } => delete(&ct, seed, &out).map(|()| ExitCode::SUCCESS),
        Command::Verify { vk, cert } => verify(&vk, &cert),
        Command::Experiment(args) => experiment(&args),
        Command::LemmaCheck { max_n, out } => lemma_check(max_n, out.as_deref()),
        Command::Transcript { action } => transcript(&action),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

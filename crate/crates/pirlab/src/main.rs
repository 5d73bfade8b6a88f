use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pirlab::commands::{self, AuditOptions, PrivacyMethod, Suite};
use pirlab::csvio;
use pirlab::net::{self, Timeouts};
use pirlab_core::scheme::Variant;
use pirlab_core::{cache, SchemeParams};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "pirlab", version, about = "Cache-aided private information retrieval lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Instance {
    /// Number of replicated databases N
    #[arg(long)]
    databases: usize,
    /// Number of messages K
    #[arg(long)]
    messages: usize,
    /// Cached fraction numerator p (s = p/q)
    #[arg(long, default_value_t = 0)]
    cache_num: usize,
    /// Cached fraction denominator q
    #[arg(long, default_value_t = 1)]
    cache_den: usize,
    /// Sub-packetization multiplier m (L = q·m·N^K)
    #[arg(long, default_value_t = 1)]
    multiplier: usize,
}

impl Instance {
    fn params(&self) -> Result<SchemeParams, Failure> {
        SchemeParams::new(self.databases, self.messages, self.cache_num, self.cache_den, self.multiplier)
            .map_err(|e| Failure::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Privacy,
    Correctness,
    Lemma2,
    Eq2,
    Han,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal normalized download cost and capacity over a storage grid
    Bounds {
        #[arg(long)]
        databases: usize,
        #[arg(long)]
        messages: usize,
        /// Number of evenly spaced storage points from 0 to K
        #[arg(long, default_value_t = 3)]
        resolution: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Measured against theoretical cost for every p in 0..=q
    Sweep {
        #[arg(long)]
        databases: usize,
        #[arg(long)]
        messages: usize,
        #[arg(long, default_value_t = 1)]
        cache_den: usize,
        #[arg(long, default_value_t = 1)]
        multiplier: usize,
        /// Random stores per storage point
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run an audit battery; exit code 0 iff every check passes
    Audit {
        suite: SuiteArg,
        #[arg(long, default_value_t = 2)]
        databases: usize,
        #[arg(long, default_value_t = 2)]
        messages: usize,
        #[arg(long, default_value_t = 0)]
        cache_num: usize,
        #[arg(long, default_value_t = 1)]
        cache_den: usize,
        #[arg(long, default_value_t = 1)]
        multiplier: usize,
        /// Privacy: exhaustive enumeration or sampling
        #[arg(long, value_enum, default_value = "exact")]
        method: MethodArg,
        /// Sampled privacy trials per message, or correctness rounds
        #[arg(long)]
        trials: Option<usize>,
        /// Random distributions for the han suite
        #[arg(long, default_value_t = 100)]
        distributions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// faithful, shared-counter, allocation-order or identity-permutation
        #[arg(long, default_value = "faithful")]
        mutation: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run one database server over the lab store derived from --seed
    Serve {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        port: u16,
        /// Which database this is (1-based); only used in log lines
        #[arg(long)]
        db_index: usize,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
    /// Privately retrieve one message from running servers
    Fetch {
        #[command(flatten)]
        instance: Instance,
        /// Seed of the lab store; the cache is built from it
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated host:port list, one per database, in order
        #[arg(long, value_delimiter = ',', required = true)]
        servers: Vec<String>,
        /// Message to retrieve (1-based)
        #[arg(long)]
        message_index: usize,
        /// File receiving the raw message bytes
        #[arg(long)]
        out: Option<String>,
        /// Default 5000
        #[arg(long)]
        connect_timeout_ms: Option<u64>,
        /// Overrides PIRLAB_TIMEOUT_MS
        #[arg(long)]
        request_timeout_ms: Option<u64>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    /// Ran to completion, some check failed.
    Checks,
}

impl From<pirlab::Error> for Failure {
    fn from(e: pirlab::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn output(path: &Option<String>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Runtime(format!("cannot create {p}: {e}")))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bounds { databases, messages, resolution, out } => {
            let rows = commands::bounds_table(databases, messages, resolution).map_err(|e| Failure::Usage(e.to_string()))?;
            commands::write_bounds(&rows, output(&out)?)?;
        }
        Command::Sweep { databases, messages, cache_den, multiplier, seeds, seed, out } => {
            SchemeParams::new(databases, messages, 0, cache_den, multiplier).map_err(|e| Failure::Usage(e.to_string()))?;
            let rows = commands::sweep(databases, messages, cache_den, multiplier, seeds, seed)?;
            commands::write_sweep(&rows, output(&out)?)?;
            if !rows.iter().all(|r| r.matches && r.correct) {
                return Err(Failure::Checks);
            }
        }
        Command::Audit {
            suite,
            databases,
            messages,
            cache_num,
            cache_den,
            multiplier,
            method,
            trials,
            distributions,
            seed,
            mutation,
            out,
        } => {
            let params = Instance { databases, messages, cache_num, cache_den, multiplier }.params()?;
            let variant = Variant::from_name(&mutation)
                .ok_or_else(|| Failure::Usage(format!("unknown mutation {mutation:?}")))?;
            let suite = match suite {
                SuiteArg::Privacy => Suite::Privacy,
                SuiteArg::Correctness => Suite::Correctness,
                SuiteArg::Lemma2 => Suite::Lemma2,
                SuiteArg::Eq2 => Suite::Eq2,
                SuiteArg::Han => Suite::Han,
            };
            let method = match method {
                MethodArg::Exact => PrivacyMethod::Exact,
                MethodArg::Sampled => PrivacyMethod::Sampled,
            };
            let opts = AuditOptions { method, trials, distributions, seed, variant };
            let rows = commands::run_audit(suite, &params, &opts)?;
            csvio::write_audit(&rows, output(&out)?)?;
            if !rows.iter().all(|r| r.pass) {
                return Err(Failure::Checks);
            }
        }
        Command::Serve { instance, seed, port, db_index, bind } => {
            let params = instance.params()?;
            if db_index == 0 || db_index > params.num_databases() {
                return Err(Failure::Usage(format!("--db-index must be in 1..={}", params.num_databases())));
            }
            let store = commands::lab_store(&params, seed);
            let handle = net::serve(store, params, format!("{bind}:{port}"))?;
            println!("database {db_index} listening on {}", handle.local_addr());
            let _ = io::stdout().flush();
            handle.wait();
        }
        Command::Fetch {
            instance,
            seed,
            servers,
            message_index,
            out,
            connect_timeout_ms,
            request_timeout_ms,
        } => {
            let params = instance.params()?;
            if message_index == 0 || message_index > params.num_messages() {
                return Err(Failure::Usage(format!("--message-index must be in 1..={}", params.num_messages())));
            }
            if servers.len() != params.num_databases() {
                return Err(Failure::Usage(format!(
                    "--servers lists {} endpoints for {} databases",
                    servers.len(),
                    params.num_databases()
                )));
            }
            let mut timeouts = Timeouts::from_env().map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(ms) = connect_timeout_ms {
                timeouts.connect = Duration::from_millis(ms);
            }
            if let Some(ms) = request_timeout_ms {
                timeouts.request = Duration::from_millis(ms);
            }

            let store = commands::lab_store(&params, seed);
            let z = cache::encode_cache(&store, &params).map_err(pirlab::Error::from)?;
            if params.pir_len() > 0 {
                net::check_servers(&params, &servers, &timeouts)?;
            }
            let mut rng = commands::private_randomness(seed);
            let (message, cost, wire) = net::fetch(message_index - 1, &params, &z, &servers, &mut rng, timeouts)?;
            if let Some(path) = &out {
                std::fs::write(path, message.symbols()).map_err(|e| Failure::Runtime(format!("cannot write {path}: {e}")))?;
            }
            println!("{} answer bytes", wire.answer_payload_bytes);
            println!("{} framing bytes", wire.framing_overhead_bytes);
            println!("{} query bytes", wire.query_upload_bytes);
            println!("{} query frames", wire.query_frames);
            println!("{} message symbols", message.len());
            println!("normalized download {}", cost.normalized());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAIL)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

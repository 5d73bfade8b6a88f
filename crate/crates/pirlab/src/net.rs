//! Database servers and the caching client over TCP.
//!
//! Each server holds the full replicated store and answers QUERY frames
//! statelessly; one connection may carry any number of requests. The client
//! opens one connection per database per retrieval and talks to all
//! databases concurrently.

use std::io::{BufReader, BufWriter};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use pirlab_core::cache::{self, AnswerProvider, CacheContent};
use pirlab_core::scheme::{self, Variant};
use pirlab_core::{Answer, Message, MessageStore, Query, SchemeParams, SeededRandomness};

use crate::wire::{self, ErrorCode, Frame, FrameType, ReadError, ServerConfig};
use crate::{Error, Result};

/// Environment variable overriding the request timeout, in milliseconds.
pub const TIMEOUT_ENV: &str = "PIRLAB_TIMEOUT_MS";

const IDLE_TIMEOUT: Duration = Duration::from_secs(300);

struct Shared {
    store: MessageStore,
    params: SchemeParams,
    config: Vec<u8>,
}

/// A running database server. Dropping the handle stops it.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the accept loop exits (it only does on shutdown).
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop_now();
    }

    fn stop_now(&mut self) {
        if let Some(t) = self.thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect_timeout(&self.addr, Duration::from_secs(1));
            let _ = t.join();
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        self.stop_now();
    }
}

/// Binds `addr` and serves `store` until the handle is shut down.
pub fn serve<A: ToSocketAddrs + std::fmt::Display>(
    store: MessageStore,
    params: SchemeParams,
    addr: A,
) -> Result<ServerHandle> {
    if !store.matches(&params) {
        return Err(Error::Input(format!(
            "store does not match the instance: need {} messages of {} symbols",
            params.num_messages(),
            params.message_len()
        )));
    }
    let listener = TcpListener::bind(&addr).map_err(|e| Error::io(format!("binding {addr}"), e))?;
    let local = listener.local_addr().map_err(|e| Error::io("reading bound address", e))?;
    let config = ServerConfig::for_params(&params)?.encode();
    let shared = Arc::new(Shared { store, params, config });
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = Arc::clone(&stop);
    let thread = thread::spawn(move || {
        for conn in listener.incoming() {
            if stop_flag.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = conn else { continue };
            let shared = Arc::clone(&shared);
            thread::spawn(move || handle_connection(stream, &shared));
        }
    });
    Ok(ServerHandle { addr: local, stop, thread: Some(thread) })
}

fn handle_connection(stream: TcpStream, shared: &Shared) {
    let _ = stream.set_read_timeout(Some(IDLE_TIMEOUT));
    let _ = stream.set_nodelay(true);
    let Ok(write_half) = stream.try_clone() else { return };
    let mut reader = BufReader::new(stream);
    let mut writer = BufWriter::new(write_half);
    loop {
        let (reply, keep_open) = match wire::read_frame(&mut reader) {
            Ok(frame) => (respond(&frame, shared), true),
            Err(ReadError::UnknownType(_)) => (Frame::error(ErrorCode::UnknownType), true),
            Err(ReadError::Oversized(_)) => (Frame::error(ErrorCode::Oversized), false),
            Err(ReadError::Closed | ReadError::Io(_)) => return,
        };
        if wire::write_frame(&mut writer, &reply).is_err() || !keep_open {
            break;
        }
    }
    let _ = writer.get_ref().shutdown(Shutdown::Both);
}

fn respond(frame: &Frame, shared: &Shared) -> Frame {
    match frame.frame_type {
        FrameType::ConfigReq => Frame::new(FrameType::ConfigResp, shared.config.clone()),
        FrameType::Query => {
            let Ok(query) = wire::decode_query(&frame.payload) else {
                return Frame::error(ErrorCode::Malformed);
            };
            let (k, l) = (shared.params.num_messages(), shared.params.message_len());
            let in_range = query
                .sums()
                .iter()
                .flat_map(|s| s.terms())
                .all(|t| t.message < k && t.index < l);
            if !in_range {
                return Frame::error(ErrorCode::OutOfRange);
            }
            match scheme::answer_query(&query, &shared.store) {
                Ok(answer) => Frame::new(FrameType::Answer, answer.symbols().to_vec()),
                Err(_) => Frame::error(ErrorCode::OutOfRange),
            }
        }
        FrameType::Answer | FrameType::ConfigResp | FrameType::Error => Frame::error(ErrorCode::UnknownType),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timeouts {
    pub connect: Duration,
    pub request: Duration,
}

impl Default for Timeouts {
    fn default() -> Self {
        Timeouts { connect: Duration::from_secs(5), request: Duration::from_secs(30) }
    }
}

impl Timeouts {
    /// Defaults with the request timeout taken from [`TIMEOUT_ENV`] when set.
    pub fn from_env() -> Result<Self> {
        let mut t = Timeouts::default();
        if let Ok(v) = std::env::var(TIMEOUT_ENV) {
            let ms: u64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("{TIMEOUT_ENV}={v:?} is not a millisecond count")))?;
            t.request = Duration::from_millis(ms);
        }
        Ok(t)
    }
}

/// Byte accounting for one networked retrieval. Only
/// `answer_payload_bytes` is download cost; the rest is reported alongside.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WireReport {
    pub query_frames: usize,
    pub answer_payload_bytes: usize,
    /// Frame headers in both directions.
    pub framing_overhead_bytes: usize,
    pub query_upload_bytes: usize,
}

fn connect(endpoint: &str, timeouts: &Timeouts) -> std::result::Result<TcpStream, String> {
    let addrs: Vec<SocketAddr> = endpoint
        .to_socket_addrs()
        .map_err(|e| format!("cannot resolve: {e}"))?
        .collect();
    let mut last = String::from("no addresses");
    for addr in addrs {
        match TcpStream::connect_timeout(&addr, timeouts.connect) {
            Ok(s) => {
                s.set_read_timeout(Some(timeouts.request)).map_err(|e| e.to_string())?;
                s.set_write_timeout(Some(timeouts.request)).map_err(|e| e.to_string())?;
                let _ = s.set_nodelay(true);
                return Ok(s);
            }
            Err(e) => last = format!("connect failed: {e}"),
        }
    }
    Err(last)
}

/// One request/response round trip on a fresh connection.
fn exchange(endpoint: &str, timeouts: &Timeouts, request: &Frame) -> std::result::Result<Frame, String> {
    let mut stream = connect(endpoint, timeouts)?;
    wire::write_frame(&mut stream, request).map_err(|e| e.to_string())?;
    let reply = wire::read_frame(&mut BufReader::new(&stream)).map_err(|e| match e {
        ReadError::Io(e) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => {
            format!("timed out after {} ms", timeouts.request.as_millis())
        }
        other => other.to_string(),
    })?;
    if reply.frame_type == FrameType::Error {
        let code = reply.payload.first().copied().unwrap_or(0);
        let what = ErrorCode::from_byte(code).map_or("unknown reason", ErrorCode::describe);
        return Err(format!("server error 0x{code:02X} ({what})"));
    }
    Ok(reply)
}

pub fn fetch_config(endpoint: &str, timeouts: &Timeouts) -> Result<ServerConfig> {
    let reply = exchange(endpoint, timeouts, &Frame::new(FrameType::ConfigReq, Vec::new()))
        .map_err(|reason| Error::Endpoint { endpoint: endpoint.into(), reason })?;
    if reply.frame_type != FrameType::ConfigResp {
        return Err(Error::Endpoint {
            endpoint: endpoint.into(),
            reason: format!("expected CONFIG_RESP, got {:?}", reply.frame_type),
        });
    }
    ServerConfig::decode(&reply.payload).map_err(|e| Error::Endpoint { endpoint: endpoint.into(), reason: e.to_string() })
}

/// Confirms every server runs the instance the client expects.
pub fn check_servers(params: &SchemeParams, endpoints: &[String], timeouts: &Timeouts) -> Result<()> {
    let want = ServerConfig::for_params(params)?;
    for ep in endpoints {
        let got = fetch_config(ep, timeouts)?;
        if got != want {
            return Err(Error::Endpoint {
                endpoint: ep.clone(),
                reason: format!("serves {got:?}, expected {want:?}"),
            });
        }
    }
    Ok(())
}

/// [`AnswerProvider`] backed by remote databases, one endpoint each.
#[derive(Debug, Clone)]
pub struct NetworkProvider {
    endpoints: Vec<String>,
    timeouts: Timeouts,
    report: WireReport,
}

impl NetworkProvider {
    pub fn new(endpoints: Vec<String>, timeouts: Timeouts) -> Self {
        NetworkProvider { endpoints, timeouts, report: WireReport::default() }
    }

    pub fn endpoints(&self) -> &[String] {
        &self.endpoints
    }

    /// Totals over every `answer_all` call so far.
    pub fn report(&self) -> WireReport {
        self.report
    }
}

impl AnswerProvider for NetworkProvider {
    fn databases(&self) -> usize {
        self.endpoints.len()
    }

    fn answer_all(&mut self, queries: &[Query]) -> pirlab_core::Result<Vec<Answer>> {
        let retrieval_error = |database: usize, reason: String| pirlab_core::Error::Retrieval {
            database,
            reason: format!("endpoint {}: {reason}", self.endpoints[database]),
        };
        if queries.len() != self.endpoints.len() {
            return Err(pirlab_core::Error::InvalidParams(format!(
                "{} queries for {} endpoints",
                queries.len(),
                self.endpoints.len()
            )));
        }
        let mut frames = Vec::with_capacity(queries.len());
        for (db, q) in queries.iter().enumerate() {
            let payload = wire::encode_query(q).map_err(|e| retrieval_error(db, e.to_string()))?;
            frames.push(Frame::new(FrameType::Query, payload));
        }

        let timeouts = self.timeouts;
        let replies: Vec<std::result::Result<Frame, String>> = thread::scope(|s| {
            let workers: Vec<_> = self
                .endpoints
                .iter()
                .zip(&frames)
                .map(|(ep, f)| s.spawn(move || exchange(ep, &timeouts, f)))
                .collect();
            workers
                .into_iter()
                .map(|w| w.join().unwrap_or_else(|_| Err("client worker panicked".into())))
                .collect()
        });

        let mut answers = Vec::with_capacity(queries.len());
        let mut report = self.report;
        for (db, (reply, (q, f))) in replies.into_iter().zip(queries.iter().zip(&frames)).enumerate() {
            let reply = reply.map_err(|reason| retrieval_error(db, reason))?;
            if reply.frame_type != FrameType::Answer {
                return Err(retrieval_error(db, format!("expected ANSWER, got {:?}", reply.frame_type)));
            }
            if reply.payload.len() != q.len() {
                return Err(retrieval_error(
                    db,
                    format!("protocol error: {} answer symbols for {} sums", reply.payload.len(), q.len()),
                ));
            }
            report.query_frames += 1;
            report.query_upload_bytes += f.payload.len();
            report.answer_payload_bytes += reply.payload.len();
            report.framing_overhead_bytes += 2 * wire::HEADER_LEN;
            answers.push(Answer::new(reply.payload));
        }
        self.report = report;
        Ok(answers)
    }
}

/// Retrieves message `desired` (0-based) from remote databases. Draws the
/// same private randomness as [`cache::retrieve`], so both return the same
/// message for the same `rng` state.
pub fn fetch(
    desired: usize,
    params: &SchemeParams,
    cache: &CacheContent,
    endpoints: &[String],
    rng: &mut SeededRandomness,
    timeouts: Timeouts,
) -> Result<(Message, cache::CostReport, WireReport)> {
    fetch_variant(desired, params, cache, endpoints, rng, timeouts, Variant::Faithful)
}

pub fn fetch_variant(
    desired: usize,
    params: &SchemeParams,
    cache: &CacheContent,
    endpoints: &[String],
    rng: &mut SeededRandomness,
    timeouts: Timeouts,
    variant: Variant,
) -> Result<(Message, cache::CostReport, WireReport)> {
    let mut provider = NetworkProvider::new(endpoints.to_vec(), timeouts);
    let (message, cost) = cache::retrieve_variant(desired, params, cache, &mut provider, rng, variant)?;
    Ok((message, cost, provider.report()))
}

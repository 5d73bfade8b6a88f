//! Memory sharing between the no-cache scheme and the full-cache scheme.
//!
//! Every message is split into a prefix of `s·L` symbols, which the user
//! caches, and a suffix of `(1−s)·L` symbols, which is fetched with the base
//! scheme. Databases know the split point. With `s = 1` no query is sent at
//! all.

use alloc::format;
use alloc::vec::Vec;

use crate::scheme::{self, PirShape, RetrievalPlan, Variant};
use crate::{Answer, Error, Message, MessageStore, Query, Rational, Result, SchemeParams, SeededRandomness, Symbol};

/// The user's cache `Z`: the first `s·L` symbols of every message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContent {
    segments: Vec<Vec<Symbol>>,
}

impl CacheContent {
    pub fn new(segments: Vec<Vec<Symbol>>) -> Self {
        CacheContent { segments }
    }

    pub fn segment(&self, k: usize) -> &[Symbol] {
        &self.segments[k]
    }

    pub fn segments(&self) -> &[Vec<Symbol>] {
        &self.segments
    }

    /// Total cached symbols, `S·L`.
    pub fn total_symbols(&self) -> usize {
        self.segments.iter().map(Vec::len).sum()
    }

    fn fits(&self, params: &SchemeParams) -> bool {
        self.segments.len() == params.num_messages()
            && self.segments.iter().all(|s| s.len() == params.cached_len())
    }
}

pub fn encode_cache(store: &MessageStore, params: &SchemeParams) -> Result<CacheContent> {
    if !store.matches(params) {
        return Err(Error::InvalidParams(format!(
            "store holds {} messages of {} symbols, instance needs {} of {}",
            store.num_messages(),
            store.message_len(),
            params.num_messages(),
            params.message_len()
        )));
    }
    let cut = params.cached_len();
    let segments = store.messages().iter().map(|m| m.symbols()[..cut].to_vec()).collect();
    Ok(CacheContent { segments })
}

/// Access to the `N` databases. Implementations must return one answer per
/// query, in order, and name the failing database on error.
pub trait AnswerProvider {
    fn databases(&self) -> usize;

    fn answer_all(&mut self, queries: &[Query]) -> Result<Vec<Answer>>;
}

/// Databases answered in-process from a shared store.
#[derive(Debug, Clone, Copy)]
pub struct LocalDatabases<'a> {
    store: &'a MessageStore,
    databases: usize,
}

impl<'a> LocalDatabases<'a> {
    pub fn new(store: &'a MessageStore, databases: usize) -> Self {
        LocalDatabases { store, databases }
    }
}

impl AnswerProvider for LocalDatabases<'_> {
    fn databases(&self) -> usize {
        self.databases
    }

    fn answer_all(&mut self, queries: &[Query]) -> Result<Vec<Answer>> {
        queries
            .iter()
            .enumerate()
            .map(|(db, q)| {
                scheme::answer_query(q, self.store)
                    .map_err(|e| Error::Retrieval { database: db, reason: format!("{e}") })
            })
            .collect()
    }
}

/// What a retrieval cost. Only answer symbols count towards the download;
/// the upload figures are metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostReport {
    pub downloaded_symbols: usize,
    pub message_len: usize,
    pub uploaded_sums: usize,
    pub uploaded_terms: usize,
    pub queries_sent: usize,
}

impl CostReport {
    /// `D/L`.
    pub fn normalized(&self) -> Rational {
        Rational::new(self.downloaded_symbols as i128, self.message_len as i128)
    }
}

/// A planned retrieval of the uncached suffix, with queries already moved to
/// the suffix index range.
#[derive(Debug, Clone)]
pub struct SuffixPlan {
    pub plan: RetrievalPlan,
    pub wire_queries: Vec<Query>,
}

/// Plans the suffix retrieval for `desired`; `None` when nothing needs to be
/// fetched (`s = 1`).
pub fn plan_suffix(
    desired: usize,
    params: &SchemeParams,
    rng: &mut SeededRandomness,
    variant: Variant,
) -> Result<Option<SuffixPlan>> {
    if desired >= params.num_messages() {
        return Err(Error::OutOfRange(format!(
            "message {desired} not in 0..{}",
            params.num_messages()
        )));
    }
    let Some(shape) = PirShape::for_params(params) else {
        return Ok(None);
    };
    let plan = scheme::plan_queries_variant(&shape, desired, rng, variant)?;
    let offset = params.cached_len();
    let wire_queries = plan.queries().iter().map(|q| q.shifted(offset)).collect();
    Ok(Some(SuffixPlan { plan, wire_queries }))
}

/// Retrieves message `desired` (0-based).
pub fn retrieve<P: AnswerProvider + ?Sized>(
    desired: usize,
    params: &SchemeParams,
    cache: &CacheContent,
    provider: &mut P,
    rng: &mut SeededRandomness,
) -> Result<(Message, CostReport)> {
    retrieve_variant(desired, params, cache, provider, rng, Variant::Faithful)
}

pub fn retrieve_variant<P: AnswerProvider + ?Sized>(
    desired: usize,
    params: &SchemeParams,
    cache: &CacheContent,
    provider: &mut P,
    rng: &mut SeededRandomness,
    variant: Variant,
) -> Result<(Message, CostReport)> {
    if !cache.fits(params) {
        return Err(Error::InvalidParams("cache does not match the instance".into()));
    }
    let mut report = CostReport {
        downloaded_symbols: 0,
        message_len: params.message_len(),
        uploaded_sums: 0,
        uploaded_terms: 0,
        queries_sent: 0,
    };
    let Some(suffix) = plan_suffix(desired, params, rng, variant)? else {
        return Ok((Message::new(cache.segment(desired).to_vec()), report));
    };
    if provider.databases() != params.num_databases() {
        return Err(Error::InvalidParams(format!(
            "provider reaches {} databases, instance has {}",
            provider.databases(),
            params.num_databases()
        )));
    }
    let answers = provider.answer_all(&suffix.wire_queries)?;
    report.queries_sent = suffix.wire_queries.len();
    report.uploaded_sums = suffix.wire_queries.iter().map(Query::len).sum();
    report.uploaded_terms = suffix.wire_queries.iter().map(Query::total_terms).sum();
    report.downloaded_symbols = answers.iter().map(Answer::len).sum();
    let tail = scheme::decode(&suffix.plan, &answers)?;

    let mut symbols = cache.segment(desired).to_vec();
    symbols.extend_from_slice(tail.symbols());
    Ok((Message::new(symbols), report))
}

/// Storage and cost of splitting every message into an `α` part served by
/// scheme 1 and a `1−α` part served by scheme 2.
pub fn memory_share_cost(
    s1: Rational,
    d1: Rational,
    s2: Rational,
    d2: Rational,
    alpha: Rational,
) -> Result<(Rational, Rational)> {
    if alpha < Rational::ZERO || alpha > Rational::ONE {
        return Err(Error::OutOfRange(format!("memory-sharing weight {alpha} not in [0,1]")));
    }
    let beta = Rational::ONE - alpha;
    Ok((alpha * s1 + beta * s2, alpha * d1 + beta * d2))
}

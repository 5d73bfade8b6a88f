//! Capacity-achieving zero-error PIR without a cache.
//!
//! The scheme runs over blocks of `N^K` symbols per message. Within a block,
//! the layout is fixed by `(N, K, θ)`: in round `k` every database receives
//! `C(K,k)·(N−1)^(k−1)` sums of exactly `k` distinct messages. Sums that
//! contain the desired message pair one fresh desired symbol with an
//! undesired `(k−1)`-sum that some other database returned verbatim in round
//! `k−1`; the rest are undesired sums over fresh symbols. Round 1 is one
//! fresh singleton per message.
//!
//! The layout lives in a permuted index domain. Every (block, message) pair
//! gets its own uniform permutation, so the indices a database sees are
//! uniform and distinct per message whatever `θ` is. Sums go on the wire in
//! sorted order, so neither the structure nor the order depends on `θ`.
//!
//! Per block the user downloads `Σ_{j=1..K} N^j` symbols for `N^K` desired
//! symbols, i.e. `1 + 1/N + … + 1/N^(K−1)` per desired symbol.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::model::Term;
use crate::perm::{binomial, combinations};
use crate::{Answer, Error, Message, MessageStore, Query, Result, SchemeParams, SeededRandomness, SymbolSum};

/// Scheme construction. Everything but [`Variant::Faithful`] is a
/// deliberately broken fixture for exercising the audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    Faithful,
    /// One fresh-index counter shared by all messages (wrapping at the block
    /// length) instead of one per message.
    SharedFreshCounter,
    /// Sums sent in allocation order, which lists desired sums first.
    AllocationOrder,
    /// Private permutations replaced by the identity.
    IdentityPermutation,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Faithful,
        Variant::SharedFreshCounter,
        Variant::AllocationOrder,
        Variant::IdentityPermutation,
    ];

    pub const MUTATIONS: [Variant; 3] = [
        Variant::SharedFreshCounter,
        Variant::AllocationOrder,
        Variant::IdentityPermutation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Faithful => "faithful",
            Variant::SharedFreshCounter => "shared-counter",
            Variant::AllocationOrder => "allocation-order",
            Variant::IdentityPermutation => "identity-permutation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Variant::ALL.into_iter().find(|v| v.name() == name)
    }
}

/// Dimensions of one base-scheme run: `N` databases, `K` messages and
/// `blocks` blocks of `N^K` symbols per message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PirShape {
    databases: usize,
    messages: usize,
    blocks: usize,
    block_len: usize,
}

impl PirShape {
    /// `part_len` must be a positive multiple of `N^K`.
    pub fn new(databases: usize, messages: usize, part_len: usize) -> Result<Self> {
        if databases == 0 || messages == 0 {
            return Err(Error::InvalidParams("need at least one database and one message".into()));
        }
        let exp = u32::try_from(messages).map_err(|_| Error::Overflow("N^K"))?;
        let block_len = databases.checked_pow(exp).ok_or(Error::Overflow("N^K"))?;
        if part_len == 0 || !part_len.is_multiple_of(block_len) {
            return Err(Error::InvalidParams(format!(
                "part length {part_len} is not a positive multiple of N^K = {block_len}"
            )));
        }
        Ok(PirShape { databases, messages, blocks: part_len / block_len, block_len })
    }

    /// Shape of the uncached suffix of `params`; `None` when everything is
    /// cached.
    pub fn for_params(params: &SchemeParams) -> Option<Self> {
        (params.pir_len() > 0).then(|| PirShape {
            databases: params.num_databases(),
            messages: params.num_messages(),
            blocks: params.pir_blocks(),
            block_len: params.block_len(),
        })
    }

    pub fn databases(&self) -> usize {
        self.databases
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// `L'`, symbols per message covered by the run.
    pub fn part_len(&self) -> usize {
        self.blocks * self.block_len
    }

    /// Sums per database per block with exactly `k` messages:
    /// `C(K,k)·(N−1)^(k−1)`.
    pub fn sums_per_round(&self, k: usize) -> usize {
        if k == 0 || k > self.messages {
            return 0;
        }
        binomial(self.messages, k) * (self.databases - 1).pow(k as u32 - 1)
    }

    /// `m'·Σ_{j=1..K} N^j`.
    pub fn expected_download(&self) -> usize {
        let per_db: usize = (1..=self.messages).map(|k| self.sums_per_round(k)).sum();
        self.blocks * self.databases * per_db
    }

    /// Number of private permutations a plan draws: one per (block, message).
    pub fn permutation_count(&self) -> usize {
        self.blocks * self.messages
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LayoutStep {
    FreshDesired { slot: usize },
    Paired { slot: usize, side_db: usize, side_pos: usize },
    PureUndesired,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct LayoutSum {
    /// `(message, slot)` in the permuted domain, sorted by message.
    terms: Vec<(usize, usize)>,
    step: LayoutStep,
}

/// The θ-dependent but randomness-free structure of one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    databases: usize,
    messages: usize,
    desired: usize,
    block_len: usize,
    variant: Variant,
    per_db: Vec<Vec<LayoutSum>>,
}

struct FreshCounters {
    next: Vec<usize>,
    shared: bool,
    block_len: usize,
}

impl FreshCounters {
    fn take(&mut self, message: usize) -> usize {
        let c = if self.shared { &mut self.next[0] } else { &mut self.next[message] };
        let slot = *c % self.block_len;
        *c += 1;
        debug_assert!(self.shared || *c <= self.block_len, "fresh symbols exhausted");
        slot
    }
}

impl Layout {
    pub fn build(databases: usize, messages: usize, desired: usize, variant: Variant) -> Result<Self> {
        if desired >= messages {
            return Err(Error::OutOfRange(format!(
                "desired message {desired} not in 0..{messages}"
            )));
        }
        let exp = u32::try_from(messages).map_err(|_| Error::Overflow("N^K"))?;
        let block_len = databases.checked_pow(exp).ok_or(Error::Overflow("N^K"))?;
        let shape = PirShape::new(databases, messages, block_len)?;
        let mut fresh = FreshCounters {
            next: alloc::vec![0; messages],
            shared: variant == Variant::SharedFreshCounter,
            block_len: shape.block_len,
        };
        let mut per_db: Vec<Vec<LayoutSum>> = alloc::vec![Vec::new(); databases];
        // (database, undesired subset) -> positions of pure sums over that subset
        let mut pure: BTreeMap<(usize, Vec<usize>), Vec<usize>> = BTreeMap::new();

        for k in 1..=messages {
            let subsets = combinations(messages, k);
            for n in 0..databases {
                for subset in subsets.iter().filter(|s| s.contains(&desired)) {
                    if k == 1 {
                        let slot = fresh.take(desired);
                        per_db[n].push(LayoutSum {
                            terms: alloc::vec![(desired, slot)],
                            step: LayoutStep::FreshDesired { slot },
                        });
                        continue;
                    }
                    let rest: Vec<usize> = subset.iter().copied().filter(|&m| m != desired).collect();
                    for j in (0..databases).filter(|&j| j != n) {
                        let Some(sides) = pure.get(&(j, rest.clone())) else { continue };
                        for &side_pos in sides {
                            let slot = fresh.take(desired);
                            let mut terms = per_db[j][side_pos].terms.clone();
                            terms.push((desired, slot));
                            terms.sort_unstable();
                            per_db[n].push(LayoutSum {
                                terms,
                                step: LayoutStep::Paired { slot, side_db: j, side_pos },
                            });
                        }
                    }
                }
                let copies = (databases - 1).pow(k as u32 - 1);
                for subset in subsets.iter().filter(|s| !s.contains(&desired)) {
                    for _ in 0..copies {
                        let terms = subset.iter().map(|&m| (m, fresh.take(m))).collect();
                        pure.entry((n, subset.clone())).or_default().push(per_db[n].len());
                        per_db[n].push(LayoutSum { terms, step: LayoutStep::PureUndesired });
                    }
                }
            }
        }

        Ok(Layout {
            databases,
            messages,
            desired,
            block_len: shape.block_len,
            variant,
            per_db,
        })
    }

    pub fn desired(&self) -> usize {
        self.desired
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn sums_at(&self, db: usize) -> usize {
        self.per_db[db].len()
    }

    /// Real index of `(message, slot)` in `block`. `perms` is indexed by
    /// `block * K + message`.
    fn real_index(&self, perms: &[Vec<u32>], block: usize, message: usize, slot: usize) -> usize {
        let within = match self.variant {
            Variant::IdentityPermutation => slot,
            _ => perms[block * self.messages + message][slot] as usize,
        };
        block * self.block_len + within
    }

    /// The sums for `db` in emission order with realized indices, and
    /// whether they should be sorted before sending.
    fn realize(&self, db: usize, perms: &[Vec<u32>], blocks: usize, offset: usize) -> Vec<SymbolSum> {
        let mut out = Vec::with_capacity(blocks * self.per_db[db].len());
        for b in 0..blocks {
            for s in &self.per_db[db] {
                let terms = s
                    .terms
                    .iter()
                    .map(|&(m, slot)| Term::new(m, self.real_index(perms, b, m, slot) + offset))
                    .collect();
                out.push(SymbolSum::new(terms).expect("layout sums have distinct messages"));
            }
        }
        out
    }

    fn sorts_on_wire(&self) -> bool {
        self.variant != Variant::AllocationOrder
    }

    /// The query database `db` receives, with every index moved by
    /// `offset`. Cheaper than building a full plan; used by enumerations.
    pub fn query_for(&self, db: usize, perms: &[Vec<u32>], blocks: usize, offset: usize) -> Query {
        let mut sums = self.realize(db, perms, blocks, offset);
        if self.sorts_on_wire() {
            sums.sort();
        }
        Query::new(sums)
    }

    /// Full plan for `blocks` blocks under the given permutations.
    pub fn plan(&self, perms: &[Vec<u32>], blocks: usize) -> RetrievalPlan {
        let shape = PirShape {
            databases: self.databases,
            messages: self.messages,
            blocks,
            block_len: self.block_len,
        };
        let mut queries = Vec::with_capacity(self.databases);
        // emission position -> transmitted position, per database
        let mut remap: Vec<Vec<usize>> = Vec::with_capacity(self.databases);
        for db in 0..self.databases {
            let sums = self.realize(db, perms, blocks, 0);
            let mut order: Vec<usize> = (0..sums.len()).collect();
            if self.sorts_on_wire() {
                order.sort_by(|&a, &b| sums[a].cmp(&sums[b]));
            }
            let mut to_wire = alloc::vec![0; sums.len()];
            for (wire, &emit) in order.iter().enumerate() {
                to_wire[emit] = wire;
            }
            let mut slots: Vec<Option<SymbolSum>> = sums.into_iter().map(Some).collect();
            queries.push(Query::new(order.iter().map(|&e| slots[e].take().unwrap()).collect()));
            remap.push(to_wire);
        }

        let per_block: Vec<usize> = self.per_db.iter().map(Vec::len).collect();
        let part_len = blocks * self.block_len;
        let mut schedule: Vec<Vec<DecodeStep>> =
            (0..self.databases).map(|db| alloc::vec![DecodeStep::PureUndesired; queries[db].len()]).collect();
        let mut desired_slots = alloc::vec![None; part_len];
        let mut desired_positions = alloc::vec![0; part_len];

        for b in 0..blocks {
            for slot in 0..self.block_len {
                desired_positions[b * self.block_len + slot] = self.real_index(perms, b, self.desired, slot);
            }
            for db in 0..self.databases {
                for (i, s) in self.per_db[db].iter().enumerate() {
                    let wire = remap[db][b * per_block[db] + i];
                    let step = match s.step {
                        LayoutStep::FreshDesired { slot } => {
                            DecodeStep::FreshDesired { position: b * self.block_len + slot }
                        }
                        LayoutStep::Paired { slot, side_db, side_pos } => DecodeStep::Paired {
                            position: b * self.block_len + slot,
                            side_database: side_db,
                            side_sum: remap[side_db][b * per_block[side_db] + side_pos],
                        },
                        LayoutStep::PureUndesired => DecodeStep::PureUndesired,
                    };
                    if let DecodeStep::FreshDesired { position } | DecodeStep::Paired { position, .. } = step {
                        desired_slots[position] = Some((db, wire));
                    }
                    schedule[db][wire] = step;
                }
            }
        }

        RetrievalPlan {
            shape,
            desired: self.desired,
            variant: self.variant,
            queries,
            schedule,
            desired_slots,
            desired_positions,
        }
    }
}

/// How one answer symbol is used when decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStep {
    /// The sum is a lone desired symbol at permuted `position`.
    FreshDesired { position: usize },
    /// The sum is the desired symbol at `position` plus an undesired sum that
    /// `side_database` returned verbatim at `side_sum`.
    Paired { position: usize, side_database: usize, side_sum: usize },
    /// No desired term; only useful as side information elsewhere.
    PureUndesired,
}

/// Queries for all `N` databases plus everything needed to decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalPlan {
    shape: PirShape,
    desired: usize,
    variant: Variant,
    queries: Vec<Query>,
    schedule: Vec<Vec<DecodeStep>>,
    /// permuted desired position -> (database, transmitted sum position)
    desired_slots: Vec<Option<(usize, usize)>>,
    /// permuted desired position -> real symbol index
    desired_positions: Vec<usize>,
}

impl RetrievalPlan {
    pub fn shape(&self) -> &PirShape {
        &self.shape
    }

    pub fn desired(&self) -> usize {
        self.desired
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn schedule(&self, db: usize) -> &[DecodeStep] {
        &self.schedule[db]
    }

    pub fn desired_slot(&self, position: usize) -> Option<(usize, usize)> {
        self.desired_slots[position]
    }

    /// Checks the decoding invariants: every permuted desired position is
    /// served exactly once, and every paired sum points at a pure undesired
    /// sum on another database carrying exactly its undesired terms.
    pub fn validate(&self) -> Result<()> {
        let mut served = alloc::vec![0usize; self.shape.part_len()];
        for (db, steps) in self.schedule.iter().enumerate() {
            for (pos, step) in steps.iter().enumerate() {
                match *step {
                    DecodeStep::FreshDesired { position } => {
                        let terms = self.queries[db].sums()[pos].terms();
                        if terms.len() != 1 || terms[0].message != self.desired {
                            return Err(Error::PlanInvariant(format!(
                                "database {db} sum {pos} is not a lone desired symbol"
                            )));
                        }
                        served[position] += 1;
                    }
                    DecodeStep::Paired { position, side_database, side_sum } => {
                        if side_database == db {
                            return Err(Error::PlanInvariant(format!(
                                "database {db} sum {pos} pairs with its own answer"
                            )));
                        }
                        let side = self
                            .queries
                            .get(side_database)
                            .and_then(|q| q.sums().get(side_sum))
                            .ok_or_else(|| Error::PlanInvariant(format!("dangling side reference at database {db} sum {pos}")))?;
                        if !matches!(self.schedule[side_database][side_sum], DecodeStep::PureUndesired) {
                            return Err(Error::PlanInvariant(format!(
                                "database {db} sum {pos} uses a non-pure side sum"
                            )));
                        }
                        let undesired: Vec<Term> = self.queries[db].sums()[pos]
                            .terms()
                            .iter()
                            .copied()
                            .filter(|t| t.message != self.desired)
                            .collect();
                        if undesired.as_slice() != side.terms() {
                            return Err(Error::PlanInvariant(format!(
                                "database {db} sum {pos} does not match its side information"
                            )));
                        }
                        served[position] += 1;
                    }
                    DecodeStep::PureUndesired => {
                        let sum = &self.queries[db].sums()[pos];
                        if sum.terms().iter().any(|t| t.message == self.desired) {
                            return Err(Error::PlanInvariant(format!(
                                "database {db} sum {pos} marked undesired contains the desired message"
                            )));
                        }
                    }
                }
            }
        }
        if let Some(p) = served.iter().position(|&c| c != 1) {
            return Err(Error::PlanInvariant(format!(
                "desired position {p} served {} times",
                served[p]
            )));
        }
        Ok(())
    }
}

/// One private permutation per (block, message), drawn in that order.
pub fn draw_permutations(shape: &PirShape, rng: &mut SeededRandomness) -> Vec<Vec<u32>> {
    (0..shape.permutation_count()).map(|_| rng.permutation(shape.block_len)).collect()
}

/// Plans a retrieval of message `desired` (0-based) over `shape`.
pub fn plan_queries(shape: &PirShape, desired: usize, rng: &mut SeededRandomness) -> Result<RetrievalPlan> {
    plan_queries_variant(shape, desired, rng, Variant::Faithful)
}

pub fn plan_queries_variant(
    shape: &PirShape,
    desired: usize,
    rng: &mut SeededRandomness,
    variant: Variant,
) -> Result<RetrievalPlan> {
    let layout = Layout::build(shape.databases, shape.messages, desired, variant)?;
    let perms = draw_permutations(shape, rng);
    Ok(layout.plan(&perms, shape.blocks))
}

/// The database side: XOR each requested sum over the stored messages.
pub fn answer_query(query: &Query, store: &MessageStore) -> Result<Answer> {
    if let Some(sum) = query.sums().iter().find(|s| s.len() > store.num_messages()) {
        return Err(Error::MalformedQuery(format!(
            "sum of {} terms over {} messages",
            sum.len(),
            store.num_messages()
        )));
    }
    let symbols = query
        .sums()
        .iter()
        .map(|s| crate::xor_combine(store, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Answer::new(symbols))
}

/// Recovers the desired part (`L'` symbols) from the `N` answers.
pub fn decode(plan: &RetrievalPlan, answers: &[Answer]) -> Result<Message> {
    if answers.len() != plan.queries.len() {
        return Err(Error::Retrieval {
            database: answers.len().min(plan.queries.len()),
            reason: format!("expected {} answers, got {}", plan.queries.len(), answers.len()),
        });
    }
    for (db, (a, q)) in answers.iter().zip(&plan.queries).enumerate() {
        if a.len() != q.len() {
            return Err(Error::Retrieval {
                database: db,
                reason: format!("answer has {} symbols for {} sums", a.len(), q.len()),
            });
        }
    }
    let mut out = alloc::vec![0u8; plan.shape.part_len()];
    for (position, slot) in plan.desired_slots.iter().enumerate() {
        let (db, pos) = slot.ok_or_else(|| {
            Error::PlanInvariant(format!("no sum carries desired position {position}"))
        })?;
        let mut value = answers[db].symbols()[pos];
        match plan.schedule[db][pos] {
            DecodeStep::FreshDesired { .. } => {}
            DecodeStep::Paired { side_database, side_sum, .. } => {
                let side = answers
                    .get(side_database)
                    .and_then(|a| a.symbols().get(side_sum))
                    .ok_or_else(|| Error::PlanInvariant(format!("dangling side reference for position {position}")))?;
                value ^= side;
            }
            DecodeStep::PureUndesired => {
                return Err(Error::PlanInvariant(format!(
                    "desired position {position} mapped to an undesired sum"
                )))
            }
        }
        out[plan.desired_positions[position]] = value;
    }
    Ok(Message::new(out))
}

/// Downloaded symbols: one per requested sum.
pub fn download_cost(plan: &RetrievalPlan) -> usize {
    plan.queries.iter().map(Query::len).sum()
}

/// Deterministic privacy precondition: the multiset of message subsets in
/// `query` is invariant under every relabelling of the `messages` messages,
/// i.e. each subset's multiplicity depends only on its size and every subset
/// of a present size occurs.
pub fn message_symmetry_holds(query: &Query, messages: usize) -> bool {
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for s in query.sums() {
        *counts.entry(s.terms().iter().map(|t| t.message).collect()).or_default() += 1;
    }
    if counts.keys().any(|k| k.iter().any(|&m| m >= messages)) {
        return false;
    }
    let mut by_size: BTreeMap<usize, (usize, Option<usize>)> = BTreeMap::new();
    for (subset, count) in &counts {
        let e = by_size.entry(subset.len()).or_insert((0, None));
        e.0 += 1;
        match e.1 {
            None => e.1 = Some(*count),
            Some(c) if c != *count => return false,
            Some(_) => {}
        }
    }
    by_size.iter().all(|(&size, &(distinct, _))| distinct == binomial(messages, size))
}

/// Per-round counts: `blocks·C(K,k)·(N−1)^(k−1)` sums of size `k`.
pub fn round_counts_hold(query: &Query, shape: &PirShape) -> bool {
    let mut sizes = alloc::vec![0usize; shape.messages + 1];
    for s in query.sums() {
        match sizes.get_mut(s.len()) {
            Some(c) => *c += 1,
            None => return false,
        }
    }
    (1..=shape.messages).all(|k| sizes[k] == shape.blocks * shape.sums_per_round(k))
}

//! Messages, stores, queries and answers.
//!
//! Symbols are bytes added with XOR. Audits reuse the same types with
//! symbols restricted to `{0, 1}`; XOR keeps them there.

use alloc::format;
use alloc::vec::Vec;

use rand::RngCore;

use crate::{Error, Result, SchemeParams};

pub type Symbol = u8;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Message(Vec<Symbol>);

impl Message {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Message(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }
}

/// The `K` messages every database replicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageStore {
    messages: Vec<Message>,
}

impl MessageStore {
    pub fn new(messages: Vec<Vec<Symbol>>) -> Result<Self> {
        let Some(first) = messages.first() else {
            return Err(Error::InvalidParams("store needs at least one message".into()));
        };
        let len = first.len();
        if let Some(k) = messages.iter().position(|m| m.len() != len) {
            return Err(Error::InvalidParams(format!(
                "message {k} has length {} but message 0 has length {len}",
                messages[k].len()
            )));
        }
        Ok(MessageStore { messages: messages.into_iter().map(Message).collect() })
    }

    /// Uniformly random byte messages sized for `params`.
    pub fn random<R: RngCore>(params: &SchemeParams, rng: &mut R) -> Self {
        let messages = (0..params.num_messages())
            .map(|_| {
                let mut buf = alloc::vec![0u8; params.message_len()];
                rng.fill_bytes(&mut buf);
                Message(buf)
            })
            .collect();
        MessageStore { messages }
    }

    pub fn zeroed(params: &SchemeParams) -> Self {
        let messages = (0..params.num_messages())
            .map(|_| Message(alloc::vec![0u8; params.message_len()]))
            .collect();
        MessageStore { messages }
    }

    pub fn num_messages(&self) -> usize {
        self.messages.len()
    }

    pub fn message_len(&self) -> usize {
        self.messages[0].len()
    }

    pub fn message(&self, k: usize) -> &Message {
        &self.messages[k]
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn matches(&self, params: &SchemeParams) -> bool {
        self.num_messages() == params.num_messages() && self.message_len() == params.message_len()
    }
}

/// One summand of a [`SymbolSum`]: symbol `index` of message `message`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub message: usize,
    pub index: usize,
}

impl Term {
    pub const fn new(message: usize, index: usize) -> Self {
        Term { message, index }
    }
}

/// XOR of symbols from pairwise distinct messages. Terms are kept sorted by
/// message id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolSum {
    terms: Vec<Term>,
}

impl SymbolSum {
    pub fn new(mut terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::MalformedQuery("empty symbol sum".into()));
        }
        terms.sort_unstable();
        if terms.windows(2).any(|w| w[0].message == w[1].message) {
            return Err(Error::MalformedQuery("message repeated within one sum".into()));
        }
        Ok(SymbolSum { terms })
    }

    pub fn singleton(message: usize, index: usize) -> Self {
        SymbolSum { terms: alloc::vec![Term::new(message, index)] }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Same sum with every symbol index moved by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term::new(t.message, t.index + offset))
            .collect();
        SymbolSum { terms }
    }
}

/// The request sent to one database: an ordered list of sums.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Query {
    sums: Vec<SymbolSum>,
}

impl Query {
    pub fn new(sums: Vec<SymbolSum>) -> Self {
        Query { sums }
    }

    pub fn sums(&self) -> &[SymbolSum] {
        &self.sums
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn shifted(&self, offset: usize) -> Self {
        Query { sums: self.sums.iter().map(|s| s.shifted(offset)).collect() }
    }

    pub fn total_terms(&self) -> usize {
        self.sums.iter().map(SymbolSum::len).sum()
    }

    /// Serialization that keeps the transmitted sum order.
    pub fn ordered_form(&self) -> Vec<u8> {
        encode_sums(self.sums.iter())
    }
}

fn encode_sums<'a>(sums: impl ExactSizeIterator<Item = &'a SymbolSum>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(sums.len() as u32).to_le_bytes());
    for sum in sums {
        out.extend_from_slice(&(sum.terms.len() as u32).to_le_bytes());
        for t in &sum.terms {
            out.extend_from_slice(&(t.message as u32).to_le_bytes());
            out.extend_from_slice(&(t.index as u64).to_le_bytes());
        }
    }
    out
}

/// Order-independent serialization: sums sorted lexicographically by their
/// (already message-sorted) terms. Byte-equal iff the queries contain the
/// same multiset of sums. The empty query encodes as four zero bytes.
pub fn canonical_form(query: &Query) -> Vec<u8> {
    let mut sorted: Vec<&SymbolSum> = query.sums.iter().collect();
    sorted.sort_unstable();
    encode_sums(sorted.into_iter())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Answer {
    symbols: Vec<Symbol>,
}

impl Answer {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Answer { symbols }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// XOR of the stored symbols referenced by `sum`.
pub fn xor_combine(store: &MessageStore, sum: &SymbolSum) -> Result<Symbol> {
    let mut acc = 0;
    for t in &sum.terms {
        let msg = store.messages.get(t.message).ok_or_else(|| {
            Error::MalformedQuery(format!("message id {} out of range", t.message))
        })?;
        let sym = msg.0.get(t.index).ok_or_else(|| {
            Error::MalformedQuery(format!("symbol index {} out of range", t.index))
        })?;
        acc ^= sym;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn store() -> MessageStore {
        MessageStore::new(vec![vec![0x0F, 0x12, 0x34], vec![0xF0, 0x12, 0x00]]).unwrap()
    }

    #[test]
    fn xor_examples() {
        let s = store();
        assert_eq!(xor_combine(&s, &SymbolSum::singleton(0, 1)).unwrap(), 0x12);
        let cancel = SymbolSum::new(vec![Term::new(0, 1), Term::new(1, 1)]).unwrap();
        assert_eq!(xor_combine(&s, &cancel).unwrap(), 0x00);
        let mix = SymbolSum::new(vec![Term::new(1, 0), Term::new(0, 0)]).unwrap();
        assert_eq!(xor_combine(&s, &mix).unwrap(), 0xFF);
    }

    #[test]
    fn xor_rejects_out_of_range() {
        let s = store();
        assert!(matches!(
            xor_combine(&s, &SymbolSum::singleton(2, 0)),
            Err(Error::MalformedQuery(_))
        ));
        assert!(matches!(
            xor_combine(&s, &SymbolSum::singleton(0, 3)),
            Err(Error::MalformedQuery(_))
        ));
    }

    #[test]
    fn sum_validation() {
        assert!(SymbolSum::new(vec![]).is_err());
        assert!(SymbolSum::new(vec![Term::new(1, 0), Term::new(1, 2)]).is_err());
        let s = SymbolSum::new(vec![Term::new(2, 0), Term::new(0, 5)]).unwrap();
        assert_eq!(s.terms()[0], Term::new(0, 5));
    }

    #[test]
    fn store_rejects_ragged() {
        assert!(MessageStore::new(vec![vec![1, 2], vec![3]]).is_err());
        assert!(MessageStore::new(vec![]).is_err());
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonical_form(&Query::default()), vec![0, 0, 0, 0]);

        let a = SymbolSum::singleton(0, 3);
        let b = SymbolSum::new(vec![Term::new(0, 1), Term::new(1, 2)]).unwrap();
        let q1 = Query::new(vec![a.clone(), b.clone()]);
        let q2 = Query::new(vec![b, a]);
        assert_eq!(canonical_form(&q1), canonical_form(&q2));
        assert_ne!(q1.ordered_form(), q2.ordered_form());

        let q3 = Query::new(vec![SymbolSum::singleton(0, 4)]);
        let q4 = Query::new(vec![SymbolSum::singleton(0, 3)]);
        assert_ne!(canonical_form(&q3), canonical_form(&q4));
    }

    fn arb_sum() -> impl Strategy<Value = SymbolSum> {
        proptest::collection::btree_map(0usize..6, 0usize..64, 1..=4).prop_map(|m| {
            SymbolSum::new(m.into_iter().map(|(k, i)| Term::new(k, i)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn canonical_form_is_reorder_invariant(
            sums in proptest::collection::vec(arb_sum(), 0..8),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = sums.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            // also scramble term order inside each sum
            let rebuilt: Vec<SymbolSum> = shuffled
                .iter()
                .map(|s| {
                    let mut t = s.terms().to_vec();
                    t.reverse();
                    SymbolSum::new(t).unwrap()
                })
                .collect();
            prop_assert_eq!(canonical_form(&Query::new(sums)), canonical_form(&Query::new(rebuilt)));
        }

        #[test]
        fn canonical_form_is_injective(
            a in proptest::collection::vec(arb_sum(), 0..6),
            b in proptest::collection::vec(arb_sum(), 0..6),
        ) {
            let mut sa = a.clone();
            let mut sb = b.clone();
            sa.sort();
            sb.sort();
            let same = sa == sb;
            prop_assert_eq!(canonical_form(&Query::new(a)) == canonical_form(&Query::new(b)), same);
        }
    }
}

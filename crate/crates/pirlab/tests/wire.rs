use pirlab::wire::{decode_query, encode_query, read_frame, write_frame, Frame, FrameType, ServerConfig};
use pirlab_core::model::Term;
use pirlab_core::{Query, SymbolSum};
use proptest::prelude::*;

fn sum_strategy() -> impl Strategy<Value = SymbolSum> {
    prop::collection::btree_map(0usize..=u16::MAX as usize, 0usize..=u32::MAX as usize, 1..=6)
        .prop_map(|terms| SymbolSum::new(terms.into_iter().map(|(m, i)| Term::new(m, i)).collect()).unwrap())
}

fn query_strategy() -> impl Strategy<Value = Query> {
    prop::collection::vec(sum_strategy(), 0..40).prop_map(Query::new)
}

/// Expected payload size by direct counting.
fn size(q: &Query) -> usize {
    2 + q.sums().iter().map(|s| 1 + 6 * s.len()).sum::<usize>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn query_round_trip(q in query_strategy()) {
        let bytes = encode_query(&q).unwrap();
        prop_assert_eq!(bytes.len(), size(&q));
        prop_assert_eq!(decode_query(&bytes).unwrap(), q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn encoding_is_injective(a in query_strategy(), b in query_strategy()) {
        prop_assert_eq!(a == b, encode_query(&a).unwrap() == encode_query(&b).unwrap());
    }

    #[test]
    fn frames_round_trip_through_a_stream(payloads in prop::collection::vec(prop::collection::vec(any::<u8>(), 0..300), 1..5)) {
        let frames: Vec<Frame> = payloads.into_iter().map(|p| Frame::new(FrameType::Answer, p)).collect();
        let mut buf = Vec::new();
        for f in &frames {
            write_frame(&mut buf, f).unwrap();
        }
        prop_assert_eq!(buf.len(), frames.iter().map(Frame::wire_len).sum::<usize>());
        let mut r = buf.as_slice();
        for f in &frames {
            prop_assert_eq!(&read_frame(&mut r).unwrap(), f);
        }
        prop_assert!(r.is_empty());
    }
}

#[test]
fn documented_sizes() {
    assert_eq!(encode_query(&Query::default()).unwrap(), [0x00, 0x00]);
    assert_eq!(encode_query(&Query::new(vec![SymbolSum::singleton(0, 3)])).unwrap().len(), 9);
    let header = Frame::new(FrameType::ConfigReq, vec![]).to_bytes().unwrap();
    assert_eq!(header, [0, 0, 0, 0, 0x03]);
}

#[test]
fn config_layout_is_five_le_words() {
    let c = ServerConfig { databases: 2, messages: 3, message_len: 16, cache_num: 1, cache_den: 2 };
    assert_eq!(
        c.encode(),
        [2, 0, 0, 0, 3, 0, 0, 0, 16, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0]
    );
}

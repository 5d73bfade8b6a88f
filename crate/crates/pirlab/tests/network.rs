use std::io::Write;
use std::net::{TcpListener, TcpStream};
use std::time::Duration;

use pirlab::net::{self, fetch, fetch_config, ServerHandle, Timeouts};
use pirlab::wire::{self, encode_query, ErrorCode, Frame, FrameType, ServerConfig};
use pirlab_core::cache::{self, encode_cache, LocalDatabases};
use pirlab_core::scheme::{plan_queries, PirShape};
use pirlab_core::{MessageStore, Query, SchemeParams, SeededRandomness, SymbolSum};

fn start(params: &SchemeParams, store: &MessageStore) -> (Vec<ServerHandle>, Vec<String>) {
    let handles: Vec<ServerHandle> = (0..params.num_databases())
        .map(|_| net::serve(store.clone(), *params, "127.0.0.1:0").unwrap())
        .collect();
    let endpoints = handles.iter().map(|h| h.local_addr().to_string()).collect();
    (handles, endpoints)
}

fn round_trip(endpoint: &str, frame: &Frame) -> Frame {
    let mut s = TcpStream::connect(endpoint).unwrap();
    s.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
    wire::write_frame(&mut s, frame).unwrap();
    wire::read_frame(&mut s).unwrap()
}

fn quick() -> Timeouts {
    Timeouts { connect: Duration::from_secs(2), request: Duration::from_secs(5) }
}

#[test]
fn config_and_empty_query() {
    let params = SchemeParams::new(2, 3, 1, 2, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(1));
    let (_h, eps) = start(&params, &store);
    let cfg = fetch_config(&eps[0], &quick()).unwrap();
    assert_eq!(cfg, ServerConfig { databases: 2, messages: 3, message_len: 16, cache_num: 1, cache_den: 2 });

    let reply = round_trip(&eps[1], &Frame::new(FrameType::Query, encode_query(&Query::default()).unwrap()));
    assert_eq!(reply, Frame::new(FrameType::Answer, vec![]));
}

#[test]
fn answers_match_in_process_and_are_stateless() {
    let params = SchemeParams::new(2, 2, 0, 1, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(2));
    let (_h, eps) = start(&params, &store);
    let shape = PirShape::for_params(&params).unwrap();
    let plan = plan_queries(&shape, 0, &mut SeededRandomness::new(3)).unwrap();
    let q = &plan.queries()[0];
    let frame = Frame::new(FrameType::Query, encode_query(q).unwrap());
    let a = round_trip(&eps[0], &frame);
    let b = round_trip(&eps[0], &frame);
    assert_eq!(a.payload.len(), 3);
    assert_eq!(a, b);
    let local = pirlab_core::scheme::answer_query(q, &store).unwrap();
    assert_eq!(a.payload, local.symbols());
}

#[test]
fn malformed_requests_get_error_frames() {
    let params = SchemeParams::new(2, 2, 0, 1, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(2));
    let (_h, eps) = start(&params, &store);

    let code = |f: Frame| {
        assert_eq!(f.frame_type, FrameType::Error);
        f.payload[0]
    };
    assert_eq!(code(round_trip(&eps[0], &Frame::new(FrameType::Query, vec![1, 0, 0]))), ErrorCode::Malformed as u8);
    assert_eq!(code(round_trip(&eps[0], &Frame::new(FrameType::Answer, vec![]))), ErrorCode::UnknownType as u8);
    let far = Query::new(vec![SymbolSum::singleton(0, 4)]);
    assert_eq!(
        code(round_trip(&eps[0], &Frame::new(FrameType::Query, encode_query(&far).unwrap()))),
        ErrorCode::OutOfRange as u8
    );
    let stranger = Query::new(vec![SymbolSum::singleton(2, 0)]);
    assert_eq!(
        code(round_trip(&eps[0], &Frame::new(FrameType::Query, encode_query(&stranger).unwrap()))),
        ErrorCode::OutOfRange as u8
    );

    // unknown type byte, then a valid request on the same connection
    let mut s = TcpStream::connect(&eps[0]).unwrap();
    s.write_all(&[1, 0, 0, 0, 0x42, 0xAA]).unwrap();
    assert_eq!(code(wire::read_frame(&mut s).unwrap()), ErrorCode::UnknownType as u8);
    wire::write_frame(&mut s, &Frame::new(FrameType::ConfigReq, vec![])).unwrap();
    assert_eq!(wire::read_frame(&mut s).unwrap().frame_type, FrameType::ConfigResp);

    // oversized declared length
    let mut s = TcpStream::connect(&eps[0]).unwrap();
    s.write_all(&[0, 0, 0, 0x10, 0x01]).unwrap();
    assert_eq!(code(wire::read_frame(&mut s).unwrap()), ErrorCode::Oversized as u8);
}

#[test]
fn fetch_equals_local_retrieval() {
    for (n, k, p, q) in [(2, 2, 0, 1), (2, 2, 1, 2), (2, 3, 0, 1), (2, 3, 1, 2), (3, 2, 1, 3)] {
        let params = SchemeParams::new(n, k, p, q, 1).unwrap();
        let store = MessageStore::random(&params, &mut SeededRandomness::new(40));
        let z = encode_cache(&store, &params).unwrap();
        let (_h, eps) = start(&params, &store);
        net::check_servers(&params, &eps, &quick()).unwrap();
        for theta in 0..k {
            let mut a = SeededRandomness::new(theta as u64);
            let mut b = SeededRandomness::new(theta as u64);
            let (remote, cost, wire) = fetch(theta, &params, &z, &eps, &mut a, quick()).unwrap();
            let mut dbs = LocalDatabases::new(&store, n);
            let (local, local_cost) = cache::retrieve(theta, &params, &z, &mut dbs, &mut b).unwrap();
            assert_eq!(remote, local);
            assert_eq!(remote, *store.message(theta));
            assert_eq!(cost, local_cost);
            assert_eq!(wire.answer_payload_bytes, local_cost.downloaded_symbols);
            assert_eq!(wire.query_frames, n);
            assert_eq!(wire.framing_overhead_bytes, 10 * n);
        }
    }
}

#[test]
fn two_by_two_downloads_six_bytes() {
    let params = SchemeParams::new(2, 2, 0, 1, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(5));
    let z = encode_cache(&store, &params).unwrap();
    let (_h, eps) = start(&params, &store);
    let (_, _, wire) = fetch(1, &params, &z, &eps, &mut SeededRandomness::new(6), quick()).unwrap();
    assert_eq!(wire.answer_payload_bytes, 6);
}

#[test]
fn full_cache_sends_nothing() {
    let params = SchemeParams::new(2, 2, 1, 1, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(5));
    let z = encode_cache(&store, &params).unwrap();
    // nothing listens on these
    let eps = vec!["127.0.0.1:9".to_string(), "127.0.0.1:9".to_string()];
    let (m, cost, wire) = fetch(0, &params, &z, &eps, &mut SeededRandomness::new(0), quick()).unwrap();
    assert_eq!(m, *store.message(0));
    assert_eq!(cost.downloaded_symbols, 0);
    assert_eq!(wire, Default::default());
}

#[test]
fn dead_server_is_named() {
    let params = SchemeParams::new(2, 2, 0, 1, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(5));
    let z = encode_cache(&store, &params).unwrap();
    let (_h, mut eps) = start(&params, &store);
    // reserve a port, then free it so connections are refused
    let dead = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().to_string();
    eps[1] = dead.clone();
    let err = fetch(0, &params, &z, &eps, &mut SeededRandomness::new(0), quick()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains(&dead), "{msg}");
    assert!(msg.contains("database 1"), "{msg}");
}

#[test]
fn silent_server_times_out() {
    let params = SchemeParams::new(2, 2, 0, 1, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(5));
    let z = encode_cache(&store, &params).unwrap();
    let (_h, mut eps) = start(&params, &store);
    // accepts connections but never replies
    let mute = TcpListener::bind("127.0.0.1:0").unwrap();
    eps[0] = mute.local_addr().unwrap().to_string();
    let t = Timeouts { connect: Duration::from_secs(1), request: Duration::from_millis(200) };
    let err = fetch(0, &params, &z, &eps, &mut SeededRandomness::new(0), t).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains(&eps[0]) && msg.contains("timed out"), "{msg}");
}

#[test]
fn wrong_instance_is_rejected() {
    let params = SchemeParams::new(2, 2, 0, 1, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(5));
    let (_h, eps) = start(&params, &store);
    let other = SchemeParams::new(2, 2, 1, 2, 1).unwrap();
    let err = net::check_servers(&other, &eps, &quick()).unwrap_err();
    assert!(err.to_string().contains(&eps[0]));
}

#[test]
fn server_shuts_down() {
    let params = SchemeParams::new(1, 1, 0, 1, 1).unwrap();
    let store = MessageStore::random(&params, &mut SeededRandomness::new(5));
    let h = net::serve(store, params, "127.0.0.1:0").unwrap();
    let addr = h.local_addr();
    h.shutdown();
    assert!(fetch_config(&addr.to_string(), &quick()).is_err());
}

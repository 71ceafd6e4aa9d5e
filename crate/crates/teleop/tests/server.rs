use std::net::TcpStream;
use std::time::{Duration, Instant};

use hagv_teleop::protocol::{encode_pilot, parse_server};
use hagv_teleop::*;
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

fn start() -> Server {
    Server::start(ServerConfig {
        port: 0,
        ..ServerConfig::default()
    })
    .unwrap()
}

fn connect(server: &Server) -> Client {
    let (ws, _) = tungstenite::connect(server.url()).unwrap();
    if let MaybeTlsStream::Plain(s) = ws.get_ref() {
        s.set_read_timeout(Some(Duration::from_millis(50))).unwrap();
    }
    ws
}

fn send(ws: &mut Client, msg: &PilotMessage) {
    ws.send(Message::Text(encode_pilot(msg))).unwrap();
}

/// Messages received within `window`.
fn collect(ws: &mut Client, window: Duration) -> Vec<(Instant, ServerMessage)> {
    let end = Instant::now() + window;
    let mut out = Vec::new();
    while Instant::now() < end {
        match ws.read() {
            Ok(Message::Text(t)) => out.push((Instant::now(), parse_server(&t).unwrap())),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(
                    e.kind(),
                    std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                ) => {}
            Err(e) => panic!("{e}"),
        }
    }
    out
}

fn frames(msgs: &[(Instant, ServerMessage)]) -> Vec<Frame> {
    msgs.iter()
        .filter_map(|(_, m)| match m {
            ServerMessage::Frame(f) => Some(f.clone()),
            _ => None,
        })
        .collect()
}

#[test]
fn streams_frames_and_heartbeats() {
    let server = start();
    let mut ws = connect(&server);
    let msgs = collect(&mut ws, Duration::from_millis(2200));
    let f = frames(&msgs);
    // 30 Hz over the 2 s after the first frame, within 10%.
    let first = msgs
        .iter()
        .find(|(_, m)| matches!(m, ServerMessage::Frame(_)))
        .unwrap()
        .0;
    let in_window = msgs
        .iter()
        .filter(|(at, m)| {
            matches!(m, ServerMessage::Frame(_))
                && *at > first
                && *at <= first + Duration::from_secs(2)
        })
        .count();
    assert!((54..=66).contains(&in_window), "{in_window} frames in 2 s");
    assert!(f.windows(2).all(|w| w[1].t > w[0].t && w[1].seq > w[0].seq));
    assert!(msgs
        .iter()
        .any(|(_, m)| matches!(m, ServerMessage::Heartbeat { .. })));
    // Nobody armed: the vehicle idles.
    assert!(f.iter().all(|f| !f.armed && f.mode == "idle"));
    server.shutdown();
}

#[test]
fn malformed_messages_get_errors_and_the_connection_survives() {
    let server = start();
    let mut ws = connect(&server);
    for bad in [
        "not json",
        r#"{"v":1,"type":"warp"}"#,
        r#"{"v":9,"type":"arm"}"#,
    ] {
        ws.send(Message::Text(bad.into())).unwrap();
    }
    ws.send(Message::Binary(vec![1, 2, 3])).unwrap();
    let msgs = collect(&mut ws, Duration::from_millis(400));
    let errors = msgs
        .iter()
        .filter(|(_, m)| matches!(m, ServerMessage::Error { .. }))
        .count();
    assert_eq!(errors, 4);
    assert!(!frames(&msgs).is_empty());
    send(&mut ws, &PilotMessage::Arm {});
    let msgs = collect(&mut ws, Duration::from_millis(300));
    assert!(frames(&msgs).last().unwrap().armed);
    server.shutdown();
}

#[test]
fn first_armed_client_is_the_pilot() {
    let server = start();
    let mut a = connect(&server);
    let mut b = connect(&server);
    send(&mut a, &PilotMessage::Arm {});
    collect(&mut a, Duration::from_millis(100));
    send(&mut b, &PilotMessage::Arm {});
    send(
        &mut b,
        &PilotMessage::Sticks(Sticks {
            throttle: 1.0,
            ..Sticks::default()
        }),
    );
    let msgs = collect(&mut b, Duration::from_millis(300));
    let errors = msgs
        .iter()
        .filter(|(_, m)| matches!(m, ServerMessage::Error { .. }))
        .count();
    assert_eq!(errors, 2);
    let f = frames(&msgs);
    assert!(f.last().unwrap().piloted && f.last().unwrap().throttle == 0.0);

    // The pilot leaving disarms the vehicle; the simulation keeps running.
    drop(a);
    let f = frames(&collect(&mut b, Duration::from_millis(400)));
    let last = f.last().unwrap();
    assert!(!last.armed && !last.piloted);
    assert!(last.t > f[0].t);
    server.shutdown();
}

#[test]
fn piloted_takeoff_and_reset() {
    let server = start();
    let mut ws = connect(&server);
    send(&mut ws, &PilotMessage::Arm {});
    send(
        &mut ws,
        &PilotMessage::Sticks(Sticks {
            throttle: 0.8,
            ..Sticks::default()
        }),
    );
    let f = frames(&collect(&mut ws, Duration::from_millis(800)));
    let last = f.last().unwrap();
    assert_eq!(last.contact, "aerial");
    assert_eq!(last.blend, 1.0);
    assert!(last.altitude > 0.2);

    send(
        &mut ws,
        &PilotMessage::Reset {
            scenario: "step_pitch".into(),
        },
    );
    let f = frames(&collect(&mut ws, Duration::from_millis(200)));
    let last = f.last().unwrap();
    assert_eq!(last.contact, "ground");
    assert!(last.pitch > 1.0);
    server.shutdown();
}

//! WebSocket server around [`BridgeSim`].
//!
//! One thread owns the simulation. An accept thread and one thread per
//! connection do the socket I/O and talk to it only through channels:
//! pilot messages flow in over one shared channel, encoded frames flow out
//! over a bounded channel per client. A client that falls behind loses
//! frames rather than slowing the loop.

use std::io;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender, SyncSender, TrySendError};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use tungstenite::{Message, WebSocket};

use hagv_core::Config;

use crate::bridge::{BridgeSim, ClientId};
use crate::protocol::{encode_server, parse_pilot, PilotMessage, ServerMessage};

pub const DEFAULT_PORT: u16 = 9000;
/// Environment variable overriding the default port.
pub const PORT_ENV: &str = "HAGV_PORT";

const OUTBOX: usize = 256;
const POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub port: u16,
    /// Bind address, loopback by default.
    pub host: String,
    pub config: Config,
    /// Physics and control period, s.
    pub dt: f64,
    /// Frames per second.
    pub frame_rate: f64,
    pub heartbeat: Duration,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            host: "127.0.0.1".into(),
            config: Config::default(),
            dt: 1e-3,
            frame_rate: 30.0,
            heartbeat: Duration::from_secs(1),
        }
    }
}

/// Port from [`PORT_ENV`] when set and valid, else [`DEFAULT_PORT`].
pub fn default_port() -> u16 {
    std::env::var(PORT_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_PORT)
}

enum Inbound {
    Connected(ClientId, SyncSender<Arc<str>>),
    Pilot(ClientId, PilotMessage),
    Disconnected(ClientId),
}

/// A running server. Dropping it without calling [`shutdown`](Self::shutdown)
/// leaves the threads running until the process exits.
pub struct Server {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    threads: Vec<JoinHandle<()>>,
}

impl Server {
    pub fn start(cfg: ServerConfig) -> io::Result<Server> {
        if !(cfg.dt > 0.0 && cfg.dt <= hagv_core::dynamics::MAX_DT) || !(cfg.frame_rate > 0.0) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "dt or frame rate out of range",
            ));
        }
        let listener = TcpListener::bind((cfg.host.as_str(), cfg.port))?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let (tx, rx) = mpsc::channel();

        let sim_stop = stop.clone();
        let sim = thread::Builder::new()
            .name("hagv-sim".into())
            .spawn(move || sim_loop(cfg, rx, sim_stop))?;
        let accept_stop = stop.clone();
        let accept = thread::Builder::new()
            .name("hagv-accept".into())
            .spawn(move || accept_loop(listener, tx, accept_stop))?;
        info!("teleop bridge listening on ws://{addr}");
        Ok(Server {
            addr,
            stop,
            threads: vec![sim, accept],
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("ws://{}", self.addr)
    }

    /// Blocks until [`shutdown`](Self::shutdown) is called from elsewhere or
    /// a server thread exits.
    pub fn wait(self) {
        for t in self.threads {
            let _ = t.join();
        }
    }

    /// A handle that stops the server when triggered.
    pub fn stopper(&self) -> Arc<AtomicBool> {
        self.stop.clone()
    }

    pub fn shutdown(self) {
        self.stop.store(true, Ordering::SeqCst);
        self.wait();
    }
}

fn accept_loop(listener: TcpListener, tx: Sender<Inbound>, stop: Arc<AtomicBool>) {
    let mut next_id: ClientId = 1;
    let mut clients = Vec::new();
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                let id = next_id;
                next_id += 1;
                debug!("client {id} connected from {peer}");
                let tx = tx.clone();
                let stop = stop.clone();
                match thread::Builder::new()
                    .name(format!("hagv-client-{id}"))
                    .spawn(move || client_loop(id, stream, tx, stop))
                {
                    Ok(h) => clients.push(h),
                    Err(e) => warn!("could not spawn client thread: {e}"),
                }
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(e) => {
                warn!("accept failed: {e}");
                thread::sleep(POLL);
            }
        }
        clients.retain(|h: &JoinHandle<()>| !h.is_finished());
    }
    for h in clients {
        let _ = h.join();
    }
}

fn is_timeout(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut))
}

fn client_loop(id: ClientId, stream: TcpStream, inbound: Sender<Inbound>, stop: Arc<AtomicBool>) {
    if stream.set_nonblocking(false).is_err() {
        return;
    }
    let mut ws: WebSocket<TcpStream> = match tungstenite::accept(stream) {
        Ok(ws) => ws,
        Err(e) => {
            debug!("client {id}: handshake failed: {e}");
            return;
        }
    };
    if ws.get_ref().set_read_timeout(Some(POLL)).is_err() {
        return;
    }
    let (out_tx, out_rx) = mpsc::sync_channel::<Arc<str>>(OUTBOX);
    if inbound.send(Inbound::Connected(id, out_tx)).is_err() {
        return;
    }
    let reason = serve_client(id, &mut ws, &inbound, &out_rx, &stop);
    debug!("client {id} closed: {reason}");
    let _ = ws.close(None);
    let _ = ws.flush();
    let _ = inbound.send(Inbound::Disconnected(id));
}

fn serve_client(
    id: ClientId,
    ws: &mut WebSocket<TcpStream>,
    inbound: &Sender<Inbound>,
    outbox: &Receiver<Arc<str>>,
    stop: &AtomicBool,
) -> String {
    loop {
        if stop.load(Ordering::SeqCst) {
            return "server shutting down".into();
        }
        match ws.read() {
            Ok(Message::Text(text)) => match parse_pilot(&text) {
                Ok(msg) => {
                    if inbound.send(Inbound::Pilot(id, msg)).is_err() {
                        return "simulation stopped".into();
                    }
                }
                Err(e) => {
                    let reply = encode_server(&ServerMessage::Error {
                        message: e.to_string(),
                    });
                    if let Err(e) = ws.send(Message::Text(reply)) {
                        return e.to_string();
                    }
                }
            },
            Ok(Message::Binary(_)) => {
                let reply = encode_server(&ServerMessage::Error {
                    message: "binary frames are not supported".into(),
                });
                if let Err(e) = ws.send(Message::Text(reply)) {
                    return e.to_string();
                }
            }
            Ok(Message::Close(_)) => return "closed by peer".into(),
            Ok(_) => {}
            Err(e) if is_timeout(&e) => {}
            Err(e) => return e.to_string(),
        }
        for text in outbox.try_iter() {
            if let Err(e) = ws.write(Message::Text(text.to_string())) {
                return e.to_string();
            }
        }
        match ws.flush() {
            Ok(()) => {}
            Err(e) if is_timeout(&e) => {}
            Err(e) => return e.to_string(),
        }
    }
}

fn sim_loop(cfg: ServerConfig, inbound: Receiver<Inbound>, stop: Arc<AtomicBool>) {
    let mut bridge = BridgeSim::new(cfg.config.clone(), cfg.dt);
    let mut clients: Vec<(ClientId, SyncSender<Arc<str>>)> = Vec::new();
    let frame_period = Duration::from_secs_f64(1.0 / cfg.frame_rate);
    let mut last = Instant::now();
    let mut next_frame = last;
    let mut next_heartbeat = last + cfg.heartbeat;
    let mut seq = 0u64;

    let send = |clients: &mut Vec<(ClientId, SyncSender<Arc<str>>)>,
                to: Option<ClientId>,
                text: Arc<str>| {
        clients.retain(|(id, tx)| {
            if to.is_some_and(|t| t != *id) {
                return true;
            }
            match tx.try_send(text.clone()) {
                Ok(()) | Err(TrySendError::Full(_)) => true,
                Err(TrySendError::Disconnected(_)) => false,
            }
        });
    };

    while !stop.load(Ordering::SeqCst) {
        for ev in inbound.try_iter() {
            match ev {
                Inbound::Connected(id, tx) => clients.push((id, tx)),
                Inbound::Disconnected(id) => {
                    clients.retain(|(c, _)| *c != id);
                    bridge.disconnect(id);
                }
                Inbound::Pilot(id, msg) => {
                    if let Err(message) = bridge.handle(id, msg) {
                        let text: Arc<str> =
                            encode_server(&ServerMessage::Error { message }).into();
                        send(&mut clients, Some(id), text);
                    }
                }
            }
        }

        let now = Instant::now();
        let (_, err) = bridge.advance(now - last);
        last = now;
        if let Some(message) = err {
            warn!("simulation reset after error: {message}");
            let text: Arc<str> = encode_server(&ServerMessage::Error { message }).into();
            send(&mut clients, None, text);
        }

        if now >= next_frame {
            let text: Arc<str> = encode_server(&ServerMessage::Frame(bridge.frame(seq))).into();
            seq += 1;
            send(&mut clients, None, text);
            next_frame += frame_period;
            if next_frame < now {
                next_frame = now + frame_period;
            }
        }
        if now >= next_heartbeat {
            let text: Arc<str> = encode_server(&ServerMessage::Heartbeat {
                t: bridge.state().t,
            })
            .into();
            send(&mut clients, None, text);
            next_heartbeat += cfg.heartbeat;
        }

        let wake = next_frame
            .min(next_heartbeat)
            .min(now + Duration::from_secs_f64(cfg.dt));
        thread::sleep(wake.saturating_duration_since(Instant::now()));
    }
}

//! TCP server. Each connection gets its own thread and [`Session`]. A
//! connection whose first bytes are `GET ` is upgraded to WebSocket (one
//! request per text message); anything else is read as NDJSON lines.

use super::Session;
use crate::eval::Env;
use crate::psgraph::PSGraph;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use tungstenite::Message;

pub const DEFAULT_PORT: u16 = 1779;

pub struct Server {
    listener: TcpListener,
    env: Arc<Env>,
    preload: Vec<(String, PSGraph)>,
    next_session: Arc<AtomicU64>,
}

impl Server {
    /// Binds `host:port`; port 0 picks a free port.
    pub fn bind(host: &str, port: u16, env: Arc<Env>) -> io::Result<Server> {
        let listener = TcpListener::bind((host, port))?;
        Ok(Server { listener, env, preload: Vec::new(), next_session: Arc::new(AtomicU64::new(1)) })
    }

    /// Graphs every new session starts with.
    pub fn preload(mut self, name: &str, p: PSGraph) -> Server {
        self.preload.push((name.into(), p));
        self
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    fn session(&self) -> Session {
        let id = self.next_session.fetch_add(1, Ordering::Relaxed);
        self.preload.iter().fold(Session::new(id, self.env.clone()), |s, (n, p)| s.with_graph(n, p.clone()))
    }

    /// Accepts connections until the listener fails.
    pub fn run(self) -> io::Result<()> {
        log::info!("listening on {}", self.listener.local_addr()?);
        for stream in self.listener.incoming() {
            let stream = stream?;
            let session = self.session();
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = connection(stream, session) {
                    log::warn!("connection {peer:?}: {e}");
                }
            });
        }
        Ok(())
    }

    /// Runs on a background thread.
    pub fn spawn(self) -> thread::JoinHandle<io::Result<()>> {
        thread::spawn(move || self.run())
    }
}

fn connection(stream: TcpStream, session: Session) -> io::Result<()> {
    let mut head = [0u8; 4];
    let n = stream.peek(&mut head)?;
    if n == 4 && &head == b"GET " {
        websocket(stream, session)
    } else {
        ndjson(stream, session)
    }
}

fn ndjson(stream: TcpStream, mut session: Session) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut out = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reply = session.handle_line(&line);
        reply.push('\n');
        out.write_all(reply.as_bytes())?;
        out.flush()?;
    }
    Ok(())
}

fn websocket(stream: TcpStream, mut session: Session) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut ws = tungstenite::accept(stream).map_err(io::Error::other)?;
    loop {
        match ws.read() {
            Ok(Message::Text(t)) => {
                let reply = session.handle_line(&t);
                ws.send(Message::Text(reply)).map_err(io::Error::other)?;
            }
            Ok(Message::Close(_)) => return Ok(()),
            Ok(_) => {}
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(io::Error::other(e)),
        }
    }
}

/// Binds and serves forever with the builtin environment.
pub fn serve(host: &str, port: u16, preload: Vec<(String, PSGraph)>) -> io::Result<()> {
    let server = Server::bind(host, port, Arc::new(Env::builtin()))?;
    preload.into_iter().fold(server, |s, (n, p)| s.preload(&n, p)).run()
}

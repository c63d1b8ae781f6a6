//! TCP lamp service: the wire protocol served over a stream socket,
//! plus a small client for the simulator side.
//!
//! The server handles any number of connections; state updates are
//! serialized behind one lock, so per-connection replies arrive in
//! request order and concurrent writers interleave atomically per line.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use lightcast_core::protocol::{LampSim, LightingCommand};
use thiserror::Error;

/// Used when neither the flag nor `LIGHTCAST_LAMP_ADDR` is set.
pub const DEFAULT_LAMP_ADDR: &str = "127.0.0.1:4760";
pub const LAMP_ADDR_ENV: &str = "LIGHTCAST_LAMP_ADDR";

/// The lamp address from flag, environment, or default, in that order.
pub fn resolve_addr(flag: Option<&str>) -> String {
    if let Some(addr) = flag {
        return addr.to_string();
    }
    std::env::var(LAMP_ADDR_ENV).unwrap_or_else(|_| DEFAULT_LAMP_ADDR.to_string())
}

#[derive(Debug, Error)]
pub enum LampError {
    #[error("cannot bind lamp service on {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lamp connection: {0}")]
    Connection(#[from] std::io::Error),
    #[error("lamp rejected '{sent}' with '{reply}'")]
    Rejected { sent: String, reply: String },
}

/// A running lamp simulator bound to a TCP address.
pub struct LampServer {
    addr: SocketAddr,
    sim: Arc<Mutex<LampSim>>,
    stop: Arc<AtomicBool>,
    accept_thread: Option<thread::JoinHandle<()>>,
}

/// Bind and serve; `addr` may use port 0 for an ephemeral port.
pub fn serve(addr: &str) -> Result<LampServer, LampError> {
    let listener = TcpListener::bind(addr).map_err(|source| LampError::Bind {
        addr: addr.to_string(),
        source,
    })?;
    listener
        .set_nonblocking(true)
        .map_err(LampError::Connection)?;
    let local = listener.local_addr().map_err(LampError::Connection)?;
    let sim = Arc::new(Mutex::new(LampSim::new()));
    let stop = Arc::new(AtomicBool::new(false));

    let accept_sim = Arc::clone(&sim);
    let accept_stop = Arc::clone(&stop);
    let accept_thread = thread::spawn(move || {
        let mut handlers: Vec<thread::JoinHandle<()>> = Vec::new();
        while !accept_stop.load(Ordering::SeqCst) {
            match listener.accept() {
                Ok((stream, _)) => {
                    let sim = Arc::clone(&accept_sim);
                    handlers.push(thread::spawn(move || handle_connection(stream, sim)));
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    thread::sleep(Duration::from_millis(2));
                }
                Err(_) => break,
            }
        }
        for h in handlers {
            let _ = h.join();
        }
    });

    Ok(LampServer {
        addr: local,
        sim,
        stop,
        accept_thread: Some(accept_thread),
    })
}

fn handle_connection(stream: TcpStream, sim: Arc<Mutex<LampSim>>) {
    let mut writer = match stream.try_clone() {
        Ok(w) => w,
        Err(_) => return,
    };
    let reader = BufReader::new(stream);
    for line in reader.lines() {
        let line = match line {
            Ok(l) => l,
            Err(_) => break,
        };
        let reply = sim.lock().expect("lamp state lock").handle_line(&line);
        if writer.write_all(reply.as_bytes()).is_err() || writer.flush().is_err() {
            break;
        }
    }
}

impl LampServer {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Inspect the simulator (e.g. the acknowledged command history).
    pub fn sim(&self) -> Arc<Mutex<LampSim>> {
        Arc::clone(&self.sim)
    }

    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(h) = self.accept_thread.take() {
            let _ = h.join();
        }
    }
}

impl Drop for LampServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(h) = self.accept_thread.take() {
            let _ = h.join();
        }
    }
}

/// One client connection with line-oriented request/reply.
pub struct LampClient {
    writer: TcpStream,
    reader: BufReader<TcpStream>,
}

impl LampClient {
    pub fn connect(addr: &str) -> Result<Self, LampError> {
        let stream = TcpStream::connect(addr)?;
        let reader = BufReader::new(stream.try_clone()?);
        Ok(LampClient {
            writer: stream,
            reader,
        })
    }

    pub fn send_line(&mut self, line: &str) -> Result<String, LampError> {
        self.writer.write_all(line.as_bytes())?;
        if !line.ends_with('\n') {
            self.writer.write_all(b"\n")?;
        }
        self.writer.flush()?;
        let mut reply = String::new();
        self.reader.read_line(&mut reply)?;
        Ok(reply)
    }

    /// Send a command and require an `OK` acknowledgment.
    pub fn send(&mut self, command: &LightingCommand) -> Result<(), LampError> {
        let wire = command.encode();
        let reply = self.send_line(&wire)?;
        if reply != "OK\n" {
            return Err(LampError::Rejected {
                sent: wire.trim_end().to_string(),
                reply: reply.trim_end().to_string(),
            });
        }
        Ok(())
    }

    /// Query one zone; `None` means off.
    pub fn get(&mut self, zone: &str) -> Result<Option<(u8, u8, u8, u8)>, LampError> {
        let reply = self.send_line(&format!("GET {zone}\n"))?;
        let body = reply.trim_end();
        if let Some(rest) = body.strip_prefix(&format!("STATE {zone} ")) {
            if rest == "OFF" {
                return Ok(None);
            }
            let parts: Vec<&str> = rest.split(' ').collect();
            if parts.len() == 4 {
                let vals: Vec<u8> = parts.iter().filter_map(|p| p.parse().ok()).collect();
                if vals.len() == 4 {
                    return Ok(Some((vals[0], vals[1], vals[2], vals[3])));
                }
            }
        }
        Err(LampError::Rejected {
            sent: format!("GET {zone}"),
            reply: body.to_string(),
        })
    }
}

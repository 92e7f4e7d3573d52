use std::io::{self, BufRead, BufReader, ErrorKind, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use super::protocol::{decode, encode, Message, MAX_LINE_BYTES};
use super::session::{Action, Session};
use super::BridgeConfig;

const POLL: Duration = Duration::from_millis(25);

/// Outcome of reading one line from a client.
enum Line {
    Complete(Vec<u8>),
    /// EOF with a partial line pending.
    Truncated,
    TooLong,
    Eof,
    Shutdown,
}

fn read_line(reader: &mut BufReader<TcpStream>, buf: &mut Vec<u8>, stop: &AtomicBool) -> io::Result<Line> {
    buf.clear();
    loop {
        if stop.load(Ordering::SeqCst) {
            return Ok(Line::Shutdown);
        }
        let available = match reader.fill_buf() {
            Ok(b) => b,
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted) => {
                continue
            }
            Err(e) => return Err(e),
        };
        if available.is_empty() {
            return Ok(if buf.is_empty() { Line::Eof } else { Line::Truncated });
        }
        let (take, done) = match available.iter().position(|&b| b == b'\n') {
            Some(i) => (i + 1, true),
            None => (available.len(), false),
        };
        buf.extend_from_slice(&available[..take]);
        reader.consume(take);
        if buf.len() > MAX_LINE_BYTES {
            return Ok(Line::TooLong);
        }
        if done {
            return Ok(Line::Complete(std::mem::take(buf)));
        }
    }
}

fn send(stream: &mut TcpStream, msg: &Message) -> io::Result<()> {
    stream.write_all(encode(msg).as_bytes())?;
    stream.flush()
}

/// NDJSON planner service. Connections are served one at a time.
pub struct Server {
    listener: TcpListener,
    config: BridgeConfig,
    stop: Arc<AtomicBool>,
}

impl Server {
    pub fn bind<A: ToSocketAddrs>(addr: A, config: BridgeConfig) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        Ok(Self {
            listener,
            config,
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Setting the flag makes [`Server::run`] return within a poll interval.
    pub fn shutdown_handle(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.stop)
    }

    pub fn run(&self) -> io::Result<()> {
        log::info!("bridge listening on {}", self.local_addr()?);
        while !self.stop.load(Ordering::SeqCst) {
            match self.listener.accept() {
                Ok((stream, peer)) => {
                    log::info!("session from {peer}");
                    if let Err(e) = self.serve_connection(stream) {
                        log::info!("session from {peer} ended: {e}");
                    }
                }
                Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::Interrupted) => thread::sleep(POLL),
                Err(e) => return Err(e),
            }
        }
        log::info!("bridge shut down");
        Ok(())
    }

    fn serve_connection(&self, stream: TcpStream) -> io::Result<()> {
        stream.set_nonblocking(false)?;
        stream.set_read_timeout(Some(POLL))?;
        stream.set_nodelay(true)?;
        let mut writer = stream.try_clone()?;
        let mut reader = BufReader::new(stream);
        let mut session = Session::new(&self.config);
        let mut buf = Vec::new();
        loop {
            let action = match read_line(&mut reader, &mut buf, &self.stop)? {
                Line::Eof | Line::Shutdown => return Ok(()),
                Line::Truncated => Action::Close(Some(Message::error("line is not terminated by a newline"))),
                Line::TooLong => Action::Close(Some(Message::error(format!("line exceeds {MAX_LINE_BYTES} bytes")))),
                Line::Complete(line) => match decode(&line) {
                    Ok(msg) => {
                        log::debug!("<- {}", msg.kind());
                        session.handle(msg)
                    }
                    Err(e) => Action::Close(Some(Message::error(e.to_string()))),
                },
            };
            match action {
                Action::Reply(msg) => send(&mut writer, &msg)?,
                Action::Silent => {}
                Action::Close(msg) => {
                    if let Some(msg) = msg {
                        log::debug!("closing session: {msg:?}");
                        send(&mut writer, &msg)?;
                    }
                    let _ = writer.shutdown(std::net::Shutdown::Both);
                    return Ok(());
                }
            }
        }
    }
}

/// Minimal blocking client, used by tests and tooling.
pub struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        Ok(Self {
            writer: stream.try_clone()?,
            reader: BufReader::new(stream),
        })
    }

    pub fn send(&mut self, msg: &Message) -> io::Result<()> {
        self.send_raw(encode(msg).as_bytes())
    }

    pub fn send_raw(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.writer.write_all(bytes)?;
        self.writer.flush()
    }

    /// Next line from the server, raw; `None` once the server has closed.
    pub fn recv_line(&mut self) -> io::Result<Option<String>> {
        let mut line = String::new();
        match self.reader.read_line(&mut line)? {
            0 => Ok(None),
            _ => Ok(Some(line)),
        }
    }

    pub fn recv(&mut self) -> io::Result<Option<Message>> {
        match self.recv_line()? {
            None => Ok(None),
            Some(line) => decode(line.as_bytes())
                .map(Some)
                .map_err(|e| io::Error::new(ErrorKind::InvalidData, e)),
        }
    }

    /// Half-close the write side, e.g. to send a truncated final line.
    pub fn finish(&mut self) -> io::Result<()> {
        self.writer.shutdown(std::net::Shutdown::Write)
    }
}

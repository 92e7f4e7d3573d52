//! Loopback drivers for the TCP bridge: episode replay against the offline
//! pipeline and a malformed-line fuzzer.

#![allow(dead_code)]

use std::io::{self, ErrorKind};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semnav::bridge::{decode, encode, BridgeConfig, Client, Message, Server, MAX_LINE_BYTES};
use semnav::pipeline::Pipeline;
use semnav::planner::{advance, UavState};
use semnav::sim::{round_sig, run_episode, sense, EpisodeConfig, Prior, Scenario, World};

pub struct Running {
    pub addr: SocketAddr,
    pub stop: Arc<AtomicBool>,
    pub handle: JoinHandle<io::Result<()>>,
}

impl Running {
    pub fn shutdown(self) -> io::Result<()> {
        self.stop.store(true, Ordering::SeqCst);
        self.handle.join().expect("server thread panicked")
    }

    pub fn alive(&self) -> bool {
        !self.handle.is_finished()
    }
}

pub fn spawn_server(config: BridgeConfig) -> Running {
    let server = Server::bind("127.0.0.1:0", config).expect("bind loopback");
    let addr = server.local_addr().unwrap();
    let stop = server.shutdown_handle();
    let handle = std::thread::spawn(move || server.run());
    Running { addr, stop, handle }
}

pub fn hello_for(world: &World) -> Message {
    let g = world.semantic.geometry();
    Message::Hello {
        version: "1".into(),
        width: Some(g.width),
        height: Some(g.height),
        resolution: Some(g.resolution),
        origin: Some([g.origin.0, g.origin.1]),
    }
}

/// Fly `steps` control cycles of the scenario twice — over the socket and
/// through an in-process pipeline — and require byte-identical command lines.
/// Also checks the commands against the simulator's own run record.
/// Returns the number of cycles compared.
pub fn replay_episode(addr: SocketAddr, scn: &Scenario, world: &World, steps: usize) -> Result<usize, String> {
    let cfg = EpisodeConfig::from_scenario(scn);
    let record = run_episode(world, &cfg, None).map_err(|e| e.to_string())?;
    let mut offline = Pipeline::new(
        world.prior_map(Prior::Unknown),
        scn.cost_table.clone(),
        world.obstacle_labels.clone(),
        scn.planner,
        None,
    );
    let g = *world.semantic.geometry();
    let mut client = Client::connect(addr).map_err(|e| e.to_string())?;
    let io = |e: io::Error| e.to_string();
    client.send(&hello_for(world)).map_err(io)?;
    match client.recv().map_err(io)? {
        Some(m) if m == Message::hello_ack() => {}
        other => return Err(format!("expected hello ack, got {other:?}")),
    }

    let mut state = world.start_state();
    for i in 0..steps {
        let t = i as f64 * scn.planner.dt;
        let patch = sense(world, &state, &scn.sensor);
        let pg = patch.geometry();
        client
            .send(&Message::Frame {
                t,
                cx: ((pg.origin.0 - g.origin.0) / g.resolution).round() as i64,
                cy: ((pg.origin.1 - g.origin.1) / g.resolution).round() as i64,
                w: pg.width,
                h: pg.height,
                labels: patch.labels().to_vec(),
            })
            .map_err(io)?;
        client
            .send(&Message::State {
                t,
                x: state.x,
                y: state.y,
                theta: state.theta,
                v: state.v,
                omega: state.omega,
                goal: [world.goal.0, world.goal.1],
            })
            .map_err(io)?;
        let line = client.recv_line().map_err(io)?.ok_or("server closed mid-episode")?;

        offline.ingest(&patch).map_err(|e| e.to_string())?;
        let choice = offline.plan(state, world.goal, t);
        let expected = encode(&Message::Command {
            t,
            v: choice.command.v,
            omega: choice.command.omega,
            recovery: choice.recovery,
        });
        if line != expected {
            return Err(format!("step {i}: bridge sent {line:?}, offline gives {expected:?}"));
        }
        if let Some(row) = record.steps.get(i) {
            if (row.v_cmd, row.omega_cmd) != (round_sig(choice.command.v), round_sig(choice.command.omega)) {
                return Err(format!("step {i}: simulator logged ({}, {})", row.v_cmd, row.omega_cmd));
            }
        }
        let next = advance(state.pose(), choice.command, scn.planner.dt);
        state = UavState::new(next.x, next.y, next.theta, choice.command.v, choice.command.omega);
    }
    client.send(&Message::Bye).map_err(io)?;
    match client.recv_line().map_err(io)? {
        None => Ok(steps),
        Some(l) => Err(format!("expected close after bye, got {l:?}")),
    }
}

/// One fuzz probe: optionally complete the handshake, then send `line`.
#[derive(Debug, Clone)]
pub struct Probe {
    pub handshake: bool,
    pub line: Vec<u8>,
}

const TEMPLATES: &[&str] = &[
    r#"{"type":"hello","version":"1","width":20,"height":20,"resolution":0.5,"origin":[0,0]}"#,
    r#"{"type":"frame","t":0.5,"cx":2,"cy":3,"w":2,"h":2,"labels":[1,2,3,4]}"#,
    r#"{"type":"state","t":1.0,"x":2.0,"y":3.0,"theta":0.1,"v":0.5,"omega":0.0,"goal":[8.0,5.0]}"#,
    r#"{"type":"bye"}"#,
];

fn mutate(rng: &mut ChaCha8Rng, base: &str) -> Vec<u8> {
    let mut b = base.as_bytes().to_vec();
    match rng.gen_range(0..9) {
        0 => {
            let i = rng.gen_range(0..b.len());
            b.remove(i);
        }
        1 => {
            let i = rng.gen_range(0..b.len());
            b[i] = rng.gen();
        }
        2 => b.truncate(rng.gen_range(0..b.len())),
        3 => {
            let i = rng.gen_range(0..=b.len());
            let junk: Vec<u8> = (0..rng.gen_range(1..8)).map(|_| *b"{}[]\",:0x-.e".choose(rng).unwrap()).collect();
            b.splice(i..i, junk);
        }
        4 => b = base.replacen("\"type\":\"", "\"type\":\"x", 1).into_bytes(),
        5 => b = base.replacen("1", "\"one\"", 1).into_bytes(),
        6 => b = base.replacen(":", ":null,\"z\":", 1).into_bytes(),
        7 => b = (0..rng.gen_range(0..60)).map(|_| rng.gen()).collect(),
        _ => b = format!("[{base}]").into_bytes(),
    }
    b.retain(|&c| c != b'\n');
    b
}

/// Lines that no protocol state accepts: schema-invalid after a handshake,
/// or anything but hello/bye before one. Includes a few semantic violations
/// (bad version, bad labels, out-of-order hello) and over-long and
/// unterminated lines.
pub fn fuzz_probes(seed: u64, n: usize) -> Vec<Probe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixed: Vec<Probe> = vec![
        Probe { handshake: false, line: b"{\"type\":\"hello\",\"version\":\"2\"}\n".to_vec() },
        Probe { handshake: false, line: b"{\"type\":\"hello\",\"version\":\"1\",\"width\":4}\n".to_vec() },
        Probe { handshake: true, line: format!("{}\n", TEMPLATES[0]).into_bytes() },
        Probe { handshake: true, line: b"{\"type\":\"frame\",\"t\":0,\"cx\":0,\"cy\":0,\"w\":1,\"h\":1,\"labels\":[99]}\n".to_vec() },
        Probe { handshake: true, line: b"{\"type\":\"frame\",\"t\":0,\"cx\":0,\"cy\":0,\"w\":3,\"h\":3,\"labels\":[1]}\n".to_vec() },
        Probe { handshake: true, line: b"{\"type\":\"command\",\"t\":0,\"v\":0,\"omega\":0,\"recovery\":false}\n".to_vec() },
        Probe { handshake: true, line: b"{\"type\":\"error\",\"message\":\"x\"}\n".to_vec() },
        Probe { handshake: true, line: b"{\"type\":\"state\",\"t\":1e999,\"x\":0,\"y\":0,\"theta\":0,\"v\":0,\"omega\":0,\"goal\":[0,0]}\n".to_vec() },
        Probe { handshake: false, line: TEMPLATES[2].as_bytes().to_vec() },
        Probe { handshake: true, line: vec![b'x'; MAX_LINE_BYTES + 10] },
        Probe { handshake: false, line: b"\xff\xfe\n".to_vec() },
        Probe { handshake: false, line: b"\n".to_vec() },
    ];
    let mut out = fixed;
    while out.len() < n {
        let handshake = rng.gen_bool(0.5);
        let base = TEMPLATES.choose(&mut rng).unwrap();
        let mut line = mutate(&mut rng, base);
        let terminated = rng.gen_bool(0.9);
        if terminated {
            line.push(b'\n');
        }
        let accepted = terminated
            && match decode(&line) {
                Err(_) => false,
                Ok(Message::Hello { .. } | Message::Bye) => true,
                Ok(_) => handshake,
            };
        if !accepted {
            out.push(Probe { handshake, line });
        }
    }
    out.truncate(n);
    out
}

fn is_reset(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        ErrorKind::ConnectionReset | ErrorKind::ConnectionAborted | ErrorKind::BrokenPipe
    )
}

fn start_probe(addr: SocketAddr, hello: &Message, p: &Probe) -> io::Result<Client> {
    let mut c = Client::connect(addr)?;
    if p.handshake {
        c.send(hello)?;
    }
    match c.send_raw(&p.line).and_then(|_| c.finish()) {
        Err(e) if !is_reset(&e) => Err(e),
        _ => Ok(c),
    }
}

/// Every reply after the handshake must be an `error` message, followed by
/// the server closing the connection.
fn finish_probe(mut c: Client, p: &Probe) -> Result<(), String> {
    let mut lines = Vec::new();
    loop {
        match c.recv_line() {
            Ok(Some(l)) => lines.push(l),
            Ok(None) => break,
            Err(e) if is_reset(&e) => break,
            Err(e) => return Err(e.to_string()),
        }
    }
    let mut replies = lines.iter();
    if p.handshake {
        match replies.next() {
            Some(l) if decode(l.as_bytes()) == Ok(Message::hello_ack()) => {}
            // A reset can swallow everything, including the ack.
            None => return Ok(()),
            Some(l) => return Err(format!("expected hello ack, got {l:?}")),
        }
    }
    let rest: Vec<&String> = replies.collect();
    if rest.len() > 1 {
        return Err(format!("more than one reply: {rest:?}"));
    }
    for l in rest {
        match decode(l.as_bytes()) {
            Ok(Message::Error { .. }) => {}
            other => return Err(format!("non-error reply {other:?} to {:?}", String::from_utf8_lossy(&p.line))),
        }
    }
    Ok(())
}

/// Push all probes through the server, `batch` connections at a time.
pub fn run_fuzz(addr: SocketAddr, probes: &[Probe], batch: usize) -> Result<(), String> {
    let hello = Message::Hello {
        version: "1".into(),
        width: Some(20),
        height: Some(20),
        resolution: Some(0.5),
        origin: Some([0.0, 0.0]),
    };
    for chunk in probes.chunks(batch) {
        let clients = chunk
            .iter()
            .map(|p| start_probe(addr, &hello, p).map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        for (c, p) in clients.into_iter().zip(chunk) {
            finish_probe(c, p)?;
        }
    }
    Ok(())
}

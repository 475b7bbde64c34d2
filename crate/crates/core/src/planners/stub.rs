//! A small in-process HTTP server speaking the LLM wire protocol, used to
//! exercise the endpoint planner without a model. The `Oracle` behavior
//! reconstructs the scene from the prompt text alone — exactly the
//! information a real model would see — and answers with the rendered
//! rule-based chain.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use super::llm::{WireRequest, WireResponse};
use crate::chain::{generate_chain, render_response, ChainParams, ChainSteps};
use crate::prompt::PREDICTION_SPACING;
use crate::world::{
    AgentCategory, AgentObject, EgoState, Frame, MapContext, Point, Polyline, Pose, Quad,
    ScenarioState, TrafficLight, Trajectory, DEFAULT_WHEELBASE,
};
use std::f64::consts::FRAC_PI_2;

/// Ego dimensions assumed when rebuilding a scene from a prompt, which
/// does not carry the ego footprint.
const NOMINAL_EGO_LENGTH: f64 = 4.5;
const NOMINAL_EGO_WIDTH: f64 = 1.8;

/// What the stub answers with.
#[derive(Debug, Clone)]
pub enum StubBehavior {
    /// Rebuild the scene from the prompt and answer with the rendered
    /// full-chain oracle response.
    Oracle,
    /// Always this exact response text.
    Fixed(String),
    /// Wire-valid body whose text parses as nothing.
    Garbage,
    /// Always this HTTP status with an empty body.
    Status(u16),
    /// The first `failures` requests return 500, then oracle answers.
    FailThenOracle { failures: u32 },
}

/// The server handle; dropping it stops the listener thread.
pub struct StubLlmServer {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl StubLlmServer {
    /// Binds an ephemeral localhost port and serves `behavior`.
    pub fn start(behavior: StubBehavior) -> std::io::Result<Self> {
        let listener = TcpListener::bind(("127.0.0.1", 0))?;
        let addr = listener.local_addr()?;
        let shutdown = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&shutdown);
        let handle = std::thread::spawn(move || serve(listener, behavior, flag));
        Ok(Self {
            addr,
            shutdown,
            handle: Some(handle),
        })
    }

    pub fn endpoint(&self) -> String {
        format!("http://{}/", self.addr)
    }
}

impl Drop for StubLlmServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve(listener: TcpListener, behavior: StubBehavior, shutdown: Arc<AtomicBool>) {
    let mut failures_left = match behavior {
        StubBehavior::FailThenOracle { failures } => failures,
        _ => 0,
    };
    for stream in listener.incoming() {
        if shutdown.load(Ordering::SeqCst) {
            break;
        }
        let Ok(mut stream) = stream else { continue };
        let Some(body) = read_request(&mut stream) else {
            continue;
        };
        match &behavior {
            StubBehavior::Status(code) => respond(stream, *code, ""),
            StubBehavior::Garbage => respond_text(stream, "%%% no plan here %%%"),
            StubBehavior::Fixed(text) => respond_text(stream, text),
            StubBehavior::Oracle => respond_oracle(stream, &body),
            StubBehavior::FailThenOracle { .. } => {
                if failures_left > 0 {
                    failures_left -= 1;
                    respond(stream, 500, "");
                } else {
                    respond_oracle(stream, &body);
                }
            }
        }
    }
}

fn respond_oracle(stream: TcpStream, body: &[u8]) {
    let Ok(request) = serde_json::from_slice::<WireRequest>(body) else {
        return respond(stream, 400, "");
    };
    let text = match scene_from_prompt(&request.prompt) {
        Some(scene) => {
            match generate_chain(&scene, ChainSteps::full(), &ChainParams::default()) {
                Ok((chain, trajectory)) => render_response(&chain, &trajectory),
                Err(e) => format!("oracle failed: {e}"),
            }
        }
        None => "unable to reconstruct a scene from this prompt".to_string(),
    };
    respond_text(stream, &text);
}

fn respond_text(stream: TcpStream, text: &str) {
    let body = serde_json::to_string(&WireResponse {
        text: text.to_string(),
    })
    .expect("string serialization cannot fail");
    respond(stream, 200, &body);
}

fn respond(mut stream: TcpStream, status: u16, body: &str) {
    let reason = if status == 200 { "OK" } else { "Error" };
    let head = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    );
    let _ = stream.write_all(head.as_bytes());
    let _ = stream.write_all(body.as_bytes());
}

/// Reads one HTTP request and returns its body.
fn read_request(stream: &mut TcpStream) -> Option<Vec<u8>> {
    stream.set_read_timeout(Some(Duration::from_secs(5))).ok()?;
    let mut buf = Vec::new();
    let mut chunk = [0u8; 4096];
    let header_end = loop {
        if let Some(pos) = buf.windows(4).position(|w| w == b"\r\n\r\n") {
            break pos;
        }
        if buf.len() > (1 << 22) {
            return None;
        }
        let n = stream.read(&mut chunk).ok()?;
        if n == 0 {
            return None;
        }
        buf.extend_from_slice(&chunk[..n]);
    };
    let headers = std::str::from_utf8(&buf[..header_end]).ok()?;
    let content_length: usize = headers.lines().find_map(|line| {
        let (key, value) = line.split_once(':')?;
        if key.eq_ignore_ascii_case("content-length") {
            value.trim().parse().ok()
        } else {
            None
        }
    })?;
    let body_start = header_end + 4;
    while buf.len() < body_start + content_length {
        let n = stream.read(&mut chunk).ok()?;
        if n == 0 {
            return None;
        }
        buf.extend_from_slice(&chunk[..n]);
    }
    Some(buf[body_start..body_start + content_length].to_vec())
}

/// Rebuilds an ego-frame scene from rendered prompt text: the inverse of
/// the observation and ego-state templates. The ego footprint is not in the
/// prompt and is assumed at nominal dimensions; the expert future is not in
/// the prompt and is left as a placeholder (the chain oracle never reads
/// it). Returns None when the text does not follow the templates.
pub fn scene_from_prompt(prompt: &str) -> Option<ScenarioState> {
    let lines: Vec<&str> = prompt.lines().map(str::trim).collect();
    let mut i = lines.iter().position(|l| *l == "Observation:")? + 1;

    let mut agents = Vec::new();
    while lines.get(i)?.starts_with("Agent ") {
        let header = lines[i].strip_prefix("Agent ")?.strip_suffix("):")?;
        let (id, category) = header.split_once(" (")?;
        let footprint = parse_points(value_of(lines.get(i + 1)?, "footprint:")?)?;
        let predicted = match value_of(lines.get(i + 4)?, "predicted positions:")? {
            "none" => Vec::new(),
            text => parse_points(text)?
                .into_iter()
                .enumerate()
                .map(|(k, p)| ((k + 1) as f64 * PREDICTION_SPACING, p))
                .collect(),
        };
        agents.push(AgentObject {
            id: id.parse().ok()?,
            category: AgentCategory::parse(category)?,
            footprint: Quad::from_points(&footprint).ok()?,
            pose: parse_pose(value_of(lines.get(i + 2)?, "pose:")?)?,
            velocity: parse_num(value_of(lines.get(i + 3)?, "velocity:")?)?,
            predicted_positions: predicted,
        });
        i += 5;
    }

    if *lines.get(i)? != "Map:" {
        return None;
    }
    let map = MapContext {
        traffic_light: TrafficLight::parse(value_of(lines.get(i + 1)?, "traffic light:")?)?,
        speed_limit: parse_num(value_of(lines.get(i + 2)?, "speed limit:")?)?,
        lane_centerline: Polyline::new(parse_points(value_of(lines.get(i + 3)?, "centerline:")?)?)
            .ok()?,
        left_boundary: Polyline::new(parse_points(value_of(lines.get(i + 4)?, "left boundary:")?)?)
            .ok()?,
        right_boundary: Polyline::new(parse_points(value_of(
            lines.get(i + 5)?,
            "right boundary:",
        )?)?)
        .ok()?,
    };
    i += 6;

    while lines.get(i).is_some_and(|l| l.is_empty()) {
        i += 1;
    }
    if *lines.get(i)? != "Ego state:" {
        return None;
    }
    let pose = parse_pose(value_of(lines.get(i + 1)?, "pose:")?)?;
    let velocity = parse_num(value_of(lines.get(i + 2)?, "velocity:")?)?;
    let acceleration = parse_num(value_of(lines.get(i + 3)?, "acceleration:")?)?;
    let past_trajectory = parse_poses(value_of(lines.get(i + 4)?, "past trajectory:")?)?;
    let previous_plan = match lines.get(i + 5).and_then(|l| value_of(l, "previous plan:")) {
        Some(text) => Some(Trajectory::new(parse_poses(text)?, 0.5).ok()?),
        None => None,
    };

    let ego = EgoState {
        pose,
        velocity,
        acceleration,
        footprint: Quad::from_center_dims(
            pose.point(),
            pose.yaw + FRAC_PI_2,
            NOMINAL_EGO_LENGTH,
            NOMINAL_EGO_WIDTH,
        )
        .ok()?,
        past_trajectory,
        wheelbase: DEFAULT_WHEELBASE,
    };
    Some(ScenarioState {
        scenario_id: "stub".to_string(),
        timestamp: 0.0,
        frame: Frame::Ego,
        ego,
        agents,
        map,
        expert_future: Trajectory::new(vec![pose], 0.5).ok()?,
        previous_plan,
    })
}

fn value_of<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.strip_prefix(key).map(str::trim)
}

fn parse_num(s: &str) -> Option<f64> {
    s.parse().ok().filter(|v: &f64| v.is_finite())
}

fn split_tuples(s: &str) -> Option<Vec<&str>> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split("), (").collect())
}

fn parse_points(s: &str) -> Option<Vec<Point>> {
    split_tuples(s)?
        .into_iter()
        .map(|t| {
            let (x, y) = t.split_once(", ")?;
            Some(Point::new(parse_num(x)?, parse_num(y)?))
        })
        .collect()
}

fn parse_pose(s: &str) -> Option<Pose> {
    let parts = split_tuples(s)?;
    let [only] = parts.as_slice() else {
        return None;
    };
    let fields: Vec<&str> = only.split(", ").collect();
    let [x, y, yaw] = fields.as_slice() else {
        return None;
    };
    Some(Pose::new(parse_num(x)?, parse_num(y)?, parse_num(yaw)?))
}

fn parse_poses(s: &str) -> Option<Vec<Pose>> {
    split_tuples(s)?
        .into_iter()
        .map(|t| {
            let fields: Vec<&str> = t.split(", ").collect();
            let [x, y, yaw] = fields.as_slice() else {
                return None;
            };
            Some(Pose::new(parse_num(x)?, parse_num(y)?, parse_num(yaw)?))
        })
        .collect()
}

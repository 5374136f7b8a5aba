//! Play sessions: trace scoring, replays and interactive optimization.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

use super::messages::{Cursor, Frame, Progress, ServerMessage, Solution};
use crate::analysis::{monotone_best, SolutionRecord};
use crate::error::Error;
use crate::grape::{self, GrapeConfig};
use crate::optim::StopSignal;
use crate::problems::{evaluate_fidelity, make_problem_ms, ControlVector, Level, ProblemSpec, Propagator};
use crate::seeding::{trace_to_control, CursorTrace, SeedKind, SeedProvenance};
use crate::store::{archive_path, Archive, Manifest};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServiceError {
    NotFound(String),
    Conflict(String),
    BadRequest(String),
    Internal(String),
}

impl std::fmt::Display for ServiceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ServiceError::NotFound(m) => write!(f, "not found: {m}"),
            ServiceError::Conflict(m) => write!(f, "conflict: {m}"),
            ServiceError::BadRequest(m) => write!(f, "bad request: {m}"),
            ServiceError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for ServiceError {}

impl From<Error> for ServiceError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) | Error::NonFinite | Error::NoConvergence(_) => {
                ServiceError::Internal(e.to_string())
            }
            _ => ServiceError::BadRequest(e.to_string()),
        }
    }
}

pub type ServiceResult<T> = std::result::Result<T, ServiceError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    Playing,
    Scored,
    Optimizing,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Emit a frame every this many simulation steps.
    pub decimation: usize,
    pub grape: GrapeConfig,
    /// Per-subscriber queue length; slow subscribers lose the oldest messages.
    pub channel_capacity: usize,
    /// Where session archives are written, if anywhere.
    pub data_dir: Option<PathBuf>,
    /// Extra reference solutions for the challenge curve.
    pub reference: Vec<SolutionRecord>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self { decimation: 5, grape: GrapeConfig::default(), channel_capacity: 1024, data_dir: None, reference: Vec::new() }
    }
}

/// Static description of a session for the client.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub level: Level,
    #[serde(rename = "T")]
    pub duration_ms: f64,
    pub state: SessionState,
    pub x: Vec<f64>,
    pub initial_density: Vec<f64>,
    pub target_density: Vec<f64>,
    pub param_names: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
    pub selected: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scored {
    #[serde(rename = "F")]
    pub fidelity: f64,
    pub frames: usize,
    pub solution: Solution,
}

struct Inner {
    state: SessionState,
    solutions: Vec<SolutionRecord>,
    selected: Option<usize>,
    active: Option<StopSignal>,
}

pub struct Session {
    pub id: String,
    pub problem: ProblemSpec,
    created_ms: u64,
    tx: broadcast::Sender<ServerMessage>,
    inner: Mutex<Inner>,
    counter: AtomicU64,
}

/// Frames of the propagation of `control`, every `decimation` steps and at the end.
pub fn frames(problem: &ProblemSpec, control: &ControlVector, decimation: usize) -> Vec<Frame> {
    let decimation = decimation.max(1);
    let mut prop = Propagator::new(problem);
    let mut state: Vec<Complex64> = problem.psi0.amplitudes().to_vec();
    let mut u = vec![0.0; problem.n_params()];
    let mut out = Vec::with_capacity(problem.n_t / decimation + 2);
    let last = problem.n_t - 1;
    for j in 0..=last {
        control.at(j, &mut u);
        if j % decimation == 0 || j == last {
            out.push(Frame {
                t: problem.units.time_to_ms(j as f64 * problem.dt),
                density: state.iter().map(|a| a.norm_sqr()).collect(),
                potential: problem.potential(&u),
                cursor: Cursor::from_values(problem, &u),
            });
        }
        if j < last {
            prop.step(problem, &u, &mut state);
        }
    }
    out
}

impl Session {
    fn send(&self, msg: ServerMessage) {
        // No subscribers is not an error.
        let _ = self.tx.send(msg);
    }

    /// Pushes a message to every subscriber.
    pub fn notify(&self, msg: ServerMessage) {
        self.send(msg);
    }

    pub fn subscribe(&self) -> broadcast::Receiver<ServerMessage> {
        self.tx.subscribe()
    }

    pub fn state(&self) -> SessionState {
        self.inner.lock().unwrap().state
    }

    pub fn solutions(&self) -> Vec<SolutionRecord> {
        self.inner.lock().unwrap().solutions.clone()
    }

    pub fn info(&self) -> SessionInfo {
        let inner = self.inner.lock().unwrap();
        let p = &self.problem;
        SessionInfo {
            id: self.id.clone(),
            level: p.level,
            duration_ms: p.duration_ms(),
            state: inner.state,
            x: p.grid.points(),
            initial_density: p.psi0.density(),
            target_density: p.psi_tgt.density(),
            param_names: p.param_names.iter().map(|s| s.to_string()).collect(),
            bounds: p.bounds.clone(),
            selected: inner.selected.map(|i| inner.solutions[i].id.clone()),
        }
    }

    fn next_id(&self, prefix: &str) -> String {
        format!("{}-{prefix}{}", self.id, self.counter.fetch_add(1, Ordering::SeqCst))
    }

    fn stream(&self, control: &ControlVector, decimation: usize) -> usize {
        let frames = frames(&self.problem, control, decimation);
        let n = frames.len();
        for f in frames {
            self.send(ServerMessage::Frame(f));
        }
        n
    }

    /// Converts, plays back and scores a cursor trace, storing it as a player seed.
    pub fn submit_trace(&self, trace: &CursorTrace, decimation: usize) -> ServiceResult<Scored> {
        let control = trace_to_control(trace, &self.problem)?;
        {
            let mut inner = self.inner.lock().unwrap();
            match inner.state {
                SessionState::Playing => return Err(ServiceError::Conflict("a trace is already being played".into())),
                SessionState::Optimizing => return Err(ServiceError::Conflict("optimization in progress".into())),
                _ => inner.state = SessionState::Playing,
            }
        }
        self.send(ServerMessage::Trace(trace.clone()));
        let n = self.stream(&control, decimation);
        let fidelity = match evaluate_fidelity(&self.problem, &control) {
            Ok(f) => f,
            Err(e) => {
                let mut inner = self.inner.lock().unwrap();
                inner.state = if inner.solutions.is_empty() { SessionState::Idle } else { SessionState::Scored };
                return Err(e.into());
            }
        };
        let provenance = SeedProvenance::new(SeedKind::Ps, format!("session:{}", self.id));
        let mut record = SolutionRecord::from_seed(self.next_id("ps"), &self.problem, control, fidelity, provenance);
        record.method = "player".into();
        let solution = Solution::from(&record);
        {
            let mut inner = self.inner.lock().unwrap();
            inner.solutions.push(record);
            inner.selected = Some(inner.solutions.len() - 1);
            inner.state = SessionState::Scored;
        }
        self.send(ServerMessage::Solution(solution.clone()));
        Ok(Scored { fidelity, frames: n, solution })
    }

    /// Selects a stored solution as the seed of the next optimization.
    pub fn select(&self, solution_id: &str) -> ServiceResult<()> {
        let mut inner = self.inner.lock().unwrap();
        let i = inner
            .solutions
            .iter()
            .position(|s| s.id == solution_id)
            .ok_or_else(|| ServiceError::NotFound(format!("solution {solution_id}")))?;
        inner.selected = Some(i);
        Ok(())
    }

    /// Streams the frames of a stored solution again.
    pub fn replay(&self, solution_id: &str, decimation: usize) -> ServiceResult<usize> {
        let control = {
            let inner = self.inner.lock().unwrap();
            inner
                .solutions
                .iter()
                .find(|s| s.id == solution_id)
                .map(|s| s.control.clone())
                .ok_or_else(|| ServiceError::NotFound(format!("solution {solution_id}")))?
        };
        Ok(self.stream(&control, decimation))
    }

    pub fn stop_optimization(&self) -> ServiceResult<()> {
        let inner = self.inner.lock().unwrap();
        match &inner.active {
            Some(signal) => {
                signal.stop();
                Ok(())
            }
            None => Err(ServiceError::Conflict("no optimization is running".into())),
        }
    }
}

/// All sessions of one service instance.
pub struct Service {
    pub config: ServiceConfig,
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    next: AtomicU64,
}

/// One point of the graph view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    /// T / T_ref.
    pub t: f64,
    #[serde(rename = "F")]
    pub fidelity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphData {
    pub level: Level,
    /// Reference speed limit in ms used to normalize durations.
    pub t_ref: f64,
    /// Edges of the equal-width duration blocks in units of T_ref.
    pub blocks: Vec<f64>,
    pub solutions: Vec<GraphPoint>,
    pub challenge: Vec<GraphPoint>,
}

/// Best known (T in ms, F) points shipped with the service.
fn bundled_challenge(level: Level) -> &'static [(f64, f64)] {
    match level {
        Level::BringHomeWater => &[(0.0973, 0.99), (0.1057, 0.999)],
        Level::Splitting => &[(0.92, 0.99)],
        Level::ShakeUp => &[(0.939, 0.99)],
    }
}

pub const GRAPH_BLOCKS: usize = 12;
/// Duration range of the graph view in units of T_ref.
pub const GRAPH_RANGE: (f64, f64) = (0.4, 1.6);

impl Service {
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        Arc::new(Self { config, sessions: Mutex::new(HashMap::new()), next: AtomicU64::new(1) })
    }

    pub fn create_session(&self, level: Level, duration_ms: f64) -> ServiceResult<Arc<Session>> {
        let problem = make_problem_ms(level, duration_ms)?;
        let id = format!("s{}", self.next.fetch_add(1, Ordering::SeqCst));
        let (tx, _) = broadcast::channel(self.config.channel_capacity.max(1));
        let session = Arc::new(Session {
            id: id.clone(),
            problem,
            created_ms: crate::store::now_ms(),
            tx,
            inner: Mutex::new(Inner { state: SessionState::Idle, solutions: Vec::new(), selected: None, active: None }),
            counter: AtomicU64::new(0),
        });
        self.sessions.lock().unwrap().insert(id, session.clone());
        Ok(session)
    }

    pub fn session(&self, id: &str) -> ServiceResult<Arc<Session>> {
        self.sessions.lock().unwrap().get(id).cloned().ok_or_else(|| ServiceError::NotFound(format!("session {id}")))
    }

    pub fn submit_trace(&self, id: &str, trace: &CursorTrace) -> ServiceResult<Scored> {
        let s = self.session(id)?;
        let out = s.submit_trace(trace, self.config.decimation)?;
        self.persist(&s);
        Ok(out)
    }

    /// Starts GRAPE from the selected solution; progress and the final
    /// solution are streamed. Returns the handle of the optimizer thread.
    pub fn start_optimization(self: &Arc<Self>, id: &str) -> ServiceResult<JoinHandle<()>> {
        let session = self.session(id)?;
        let signal = StopSignal::new();
        let (seed, parent) = {
            let mut inner = session.inner.lock().unwrap();
            match inner.state {
                SessionState::Idle => return Err(ServiceError::Conflict("no solution to optimize yet".into())),
                SessionState::Playing => return Err(ServiceError::Conflict("a trace is being played".into())),
                SessionState::Optimizing => return Err(ServiceError::Conflict("optimization already running".into())),
                SessionState::Scored => {}
            }
            let i = inner.selected.ok_or_else(|| ServiceError::Conflict("no solution selected".into()))?;
            inner.state = SessionState::Optimizing;
            inner.active = Some(signal.clone());
            (inner.solutions[i].control.clone(), inner.solutions[i].id.clone())
        };
        let service = self.clone();
        let handle = std::thread::spawn(move || {
            let s = &session;
            let mut observer = |r: &crate::optim::IterationRecord| s.send(ServerMessage::Progress(Progress::from(r)));
            let result = grape::optimize_with(&s.problem, &seed, &service.config.grape, &signal, &mut observer);
            let mut inner = s.inner.lock().unwrap();
            inner.active = None;
            inner.state = SessionState::Scored;
            match result {
                Ok(res) => {
                    let provenance = SeedProvenance::new(SeedKind::Po, format!("session:{}", s.id)).with("parent", &parent);
                    let record = SolutionRecord::from_result(s.next_id("po"), &s.problem, "pgrape", provenance, res);
                    let msg = Solution::from(&record);
                    inner.solutions.push(record);
                    inner.selected = Some(inner.solutions.len() - 1);
                    drop(inner);
                    s.send(ServerMessage::Solution(msg));
                    service.persist(s);
                }
                Err(e) => {
                    drop(inner);
                    warn!("session {}: optimization failed: {e}", s.id);
                    s.send(ServerMessage::Error { message: e.to_string() });
                }
            }
        });
        Ok(handle)
    }

    pub fn stop_optimization(&self, id: &str) -> ServiceResult<()> {
        self.session(id)?.stop_optimization()
    }

    pub fn graph_data(&self, level: Level) -> GraphData {
        let t_ref = level.reference_qsl_ms();
        let sessions: Vec<Arc<Session>> =
            self.sessions.lock().unwrap().values().filter(|s| s.problem.level == level).cloned().collect();
        let mut solutions: Vec<GraphPoint> = sessions
            .iter()
            .flat_map(|s| s.solutions())
            .map(|r| GraphPoint { t: r.duration_ms / t_ref, fidelity: r.fidelity })
            .collect();
        solutions.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.fidelity.total_cmp(&b.fidelity)));
        let reference: Vec<SolutionRecord> = self.config.reference.iter().filter(|r| r.level == level).cloned().collect();
        let mut points: Vec<(f64, f64)> = bundled_challenge(level).to_vec();
        points.extend(monotone_best(&reference).into_iter().map(|(t, e)| (t, 1.0 - e)));
        let challenge = crate::analysis::monotone_best_points(&points)
            .into_iter()
            .map(|(t, e)| GraphPoint { t: t / t_ref, fidelity: 1.0 - e })
            .collect();
        let (lo, hi) = GRAPH_RANGE;
        let blocks = (0..=GRAPH_BLOCKS).map(|i| lo + (hi - lo) * i as f64 / GRAPH_BLOCKS as f64).collect();
        GraphData { level, t_ref, blocks, solutions, challenge }
    }

    /// Archive of everything a session produced.
    pub fn session_archive(&self, id: &str) -> ServiceResult<Archive> {
        let s = self.session(id)?;
        Ok(archive_of(&s))
    }

    fn persist(&self, s: &Session) {
        let Some(dir) = &self.config.data_dir else { return };
        let path = archive_path(dir, s.problem.level, "session", s.created_ms).with_file_name(format!(
            "{}-{}.{}",
            s.created_ms,
            s.id,
            crate::store::EXTENSION
        ));
        if let Err(e) = archive_of(s).save(&path) {
            warn!("could not write {}: {e}", path.display());
        }
    }
}

fn archive_of(s: &Session) -> Archive {
    let mut manifest = Manifest::new(s.problem.level, "session");
    manifest.created_ms = s.created_ms;
    manifest.settings.insert("session".into(), s.id.clone());
    manifest.settings.insert("T".into(), s.problem.duration_ms().to_string());
    let mut a = Archive::new(manifest);
    for r in s.solutions() {
        a.push(r);
    }
    a
}

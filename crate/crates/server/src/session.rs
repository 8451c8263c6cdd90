//! Explorer sessions as pure state machines: every transition is a function
//! of the current state and the request.

use serde::{Deserialize, Serialize};
use tiltgraph::graph::{self, ExploreLimits, ExportFormat, GraphDocument};
use tiltgraph::reach::{Reach, DEFAULT_REACH_BUDGET};
use tiltgraph::rigid::{self, RigidError, RigidSet, SearchWindow};
use tiltgraph::seeds::{self, CanonicalMatrix, ExchangeMatrix};
use tiltgraph::{Coh, Dynkin};

/// Largest neighborhood radius served.
pub const MAX_DEPTH: usize = 8;
/// Node cap for neighborhoods and exports.
pub const MAX_NODES: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApiError {
    BadRequest(String),
    Conflict { reason: &'static str, message: String },
    NotFound(String),
}

impl ApiError {
    fn bad(msg: impl ToString) -> Self {
        ApiError::BadRequest(msg.to_string())
    }
}

/// Backend selection as sent by clients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateRequest {
    pub backend: String,
    #[serde(default)]
    pub weights: Option<String>,
    #[serde(default)]
    pub quiver: Option<String>,
    #[serde(default)]
    pub window: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub index: usize,
    pub out: String,
    #[serde(rename = "in")]
    pub incoming: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateView {
    pub backend: String,
    pub elements: Vec<String>,
    pub matrix: Vec<Vec<i64>>,
    pub depth: usize,
    pub exchanged: Option<Exchange>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachEdge {
    pub from: String,
    pub to: String,
    pub ext1_forward: u64,
    pub ext1_backward: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachView {
    pub chain: Vec<String>,
    pub edges: Vec<ReachEdge>,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Step<O> {
    index: usize,
    out: O,
    incoming: O,
    before: RigidSet<O>,
    matrix_before: ExchangeMatrix,
}

#[derive(Debug, Clone)]
struct Engine<B: Reach> {
    backend: B,
    window: SearchWindow,
    initial: RigidSet<B::Object>,
    initial_matrix: ExchangeMatrix,
    current: RigidSet<B::Object>,
    matrix: ExchangeMatrix,
    history: Vec<Step<B::Object>>,
}

impl<B: Reach + CanonicalMatrix> Engine<B> {
    fn new(backend: B, window: SearchWindow) -> Self {
        let initial = rigid::canonical_tilting(&backend);
        let initial_matrix = backend.canonical_matrix();
        Engine {
            current: initial.clone(),
            matrix: initial_matrix.clone(),
            initial,
            initial_matrix,
            backend,
            window,
            history: Vec::new(),
        }
    }

    fn view(&self) -> StateView {
        StateView {
            backend: self.backend.label(),
            elements: self.current.elements().iter().map(|e| e.to_string()).collect(),
            matrix: self.matrix.rows().to_vec(),
            depth: self.history.len(),
            exchanged: self.history.last().map(|s| Exchange {
                index: s.index,
                out: s.out.to_string(),
                incoming: s.incoming.to_string(),
            }),
        }
    }

    fn mutate(&mut self, index: usize) -> Result<StateView, ApiError> {
        if index >= self.current.len() {
            return Err(ApiError::bad(format!(
                "index {index} out of range for {} summands",
                self.current.len()
            )));
        }
        let m = rigid::mutate(&self.backend, &self.current, index, &self.window).map_err(conflict)?;
        let matrix = seeds::transfer_matrix(&self.matrix, &self.current, &m.out, &m.incoming, &m.set)
            .expect("labels come from the mutation");
        let step = Step {
            index,
            out: m.out,
            incoming: m.incoming,
            before: std::mem::replace(&mut self.current, m.set),
            matrix_before: std::mem::replace(&mut self.matrix, matrix),
        };
        self.history.push(step);
        Ok(self.view())
    }

    fn undo(&mut self) -> Result<StateView, ApiError> {
        let step = self.history.pop().ok_or(ApiError::Conflict {
            reason: "nothing_to_undo",
            message: "history is empty".into(),
        })?;
        self.current = step.before;
        self.matrix = step.matrix_before;
        Ok(self.view())
    }

    fn neighborhood(&self, depth: usize) -> Result<GraphDocument, ApiError> {
        if depth > MAX_DEPTH {
            return Err(ApiError::bad(format!("depth {depth} exceeds {MAX_DEPTH}")));
        }
        let limits = ExploreLimits { max_nodes: Some(MAX_NODES), max_depth: Some(depth) };
        let g = graph::explore(&self.backend, &self.current, limits, &self.window)
            .map_err(|e| ApiError::bad(e.to_string()))?;
        Ok(g.to_document())
    }

    fn export(&self, format: ExportFormat, depth: usize) -> Result<String, ApiError> {
        if depth > MAX_DEPTH {
            return Err(ApiError::bad(format!("depth {depth} exceeds {MAX_DEPTH}")));
        }
        let limits = ExploreLimits { max_nodes: Some(MAX_NODES), max_depth: Some(depth) };
        let g = graph::explore(&self.backend, &self.current, limits, &self.window)
            .map_err(|e| ApiError::bad(e.to_string()))?;
        Ok(g.export(format))
    }

    fn reach(&self, m: &str, n: &str) -> Result<ReachView, ApiError> {
        let m = self.backend.parse_object(m).map_err(ApiError::bad)?;
        let n = self.backend.parse_object(n).map_err(ApiError::bad)?;
        let cert = self
            .backend
            .reach(&m, &n, &self.window, DEFAULT_REACH_BUDGET)
            .map_err(|e| match e {
                graph::GraphError::NotFoundWithinBudget { .. } => {
                    ApiError::Conflict { reason: "not_found_within_budget", message: e.to_string() }
                }
                other => ApiError::bad(other),
            })?;
        let edges = cert
            .chain
            .windows(2)
            .zip(cert.edge_ext1(&self.backend))
            .map(|(w, (f, b))| ReachEdge {
                from: w[0].to_string(),
                to: w[1].to_string(),
                ext1_forward: f,
                ext1_backward: b,
            })
            .collect();
        Ok(ReachView {
            chain: cert.chain.iter().map(|x| x.to_string()).collect(),
            edges,
            verified: cert.verify(&self.backend),
        })
    }

    /// Recomputes the current state from the initial one and the recorded
    /// indices.
    fn replay(&self) -> Result<(RigidSet<B::Object>, ExchangeMatrix), ApiError> {
        let mut set = self.initial.clone();
        let mut matrix = self.initial_matrix.clone();
        for step in &self.history {
            let m = rigid::mutate(&self.backend, &set, step.index, &self.window).map_err(conflict)?;
            matrix = seeds::transfer_matrix(&matrix, &set, &m.out, &m.incoming, &m.set)
                .expect("labels come from the mutation");
            set = m.set;
        }
        Ok((set, matrix))
    }

    fn replay_matches(&self) -> bool {
        matches!(self.replay(), Ok((s, m)) if s == self.current && m == self.matrix)
    }
}

fn conflict(e: RigidError) -> ApiError {
    let reason = match e {
        RigidError::ComplementNotInWindow(_) => "complement_not_in_window",
        RigidError::DuplicateComplement(..) => "duplicate_complement",
        RigidError::NotTilting(_) => "not_tilting",
        _ => "mutation_failed",
    };
    ApiError::Conflict { reason, message: e.to_string() }
}

/// One explorer session over either backend.
#[derive(Debug, Clone)]
pub struct Session(Inner);

#[derive(Debug, Clone)]
enum Inner {
    Coh(Engine<Coh>),
    Dynkin(Engine<Dynkin>),
}

macro_rules! dispatch {
    ($self:expr, $e:ident => $body:expr) => {
        match $self {
            Inner::Coh($e) => $body,
            Inner::Dynkin($e) => $body,
        }
    };
}

impl Session {
    pub fn create(req: &CreateRequest) -> Result<Self, ApiError> {
        let window = match &req.window {
            Some(w) => SearchWindow::parse(w).map_err(ApiError::bad)?,
            None => SearchWindow::default(),
        };
        match req.backend.as_str() {
            "coh" => {
                let ws = req.weights.as_deref().ok_or_else(|| ApiError::bad("coh backend needs weights"))?;
                let coh = Coh::parse_weights(ws).map_err(ApiError::bad)?;
                Ok(Session(Inner::Coh(Engine::new(coh, window))))
            }
            "dynkin" => {
                let q = req.quiver.as_deref().ok_or_else(|| ApiError::bad("dynkin backend needs quiver"))?;
                let d = Dynkin::parse(q).map_err(ApiError::bad)?;
                Ok(Session(Inner::Dynkin(Engine::new(d, window))))
            }
            other => Err(ApiError::bad(format!("unknown backend {other:?}; use coh or dynkin"))),
        }
    }

    pub fn state(&self) -> StateView {
        dispatch!(&self.0, e => e.view())
    }

    pub fn mutate(&mut self, index: usize) -> Result<StateView, ApiError> {
        dispatch!(&mut self.0, e => e.mutate(index))
    }

    pub fn undo(&mut self) -> Result<StateView, ApiError> {
        dispatch!(&mut self.0, e => e.undo())
    }

    pub fn neighborhood(&self, depth: usize) -> Result<GraphDocument, ApiError> {
        dispatch!(&self.0, e => e.neighborhood(depth))
    }

    pub fn export(&self, format: &str, depth: usize) -> Result<String, ApiError> {
        let format: ExportFormat = format.parse().map_err(ApiError::bad)?;
        dispatch!(&self.0, e => e.export(format, depth))
    }

    pub fn reach(&self, m: &str, n: &str) -> Result<ReachView, ApiError> {
        dispatch!(&self.0, e => e.reach(m, n))
    }

    /// Replaying the history from the initial state reproduces the current one.
    pub fn replay_matches(&self) -> bool {
        dispatch!(&self.0, e => e.replay_matches())
    }
}

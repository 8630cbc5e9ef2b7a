//! Kernel state (variables, figures, selections) owned by one coordinator
//! task. Endpoints talk to it through a command queue.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::{mpsc, oneshot};

use super::hub::{Hub, Role};
use super::messages::{DvpId, ErrorKind, ErrorPayload};
use super::wire::{self, WireError};
use crate::data::{DataSource, RowIndexSet};
use crate::gog::{compile_script, SceneGraph};
use crate::parcoords::{layout_all, selection_correlation, LiveIndex};
use crate::render::{render_parcoords, render_scene};
use crate::selection::{FigureId, GroupStore, LinkRegistry, Rgb, SelectionGroup};

pub type KernelResult<T> = Result<T, ErrorPayload>;

fn fail(kind: ErrorKind, message: impl Into<String>) -> ErrorPayload {
    ErrorPayload {
        kind,
        message: message.into(),
        path: None,
    }
}

pub const DEFAULT_FIGURE_SIZE: (u32, u32) = (800, 500);
pub const DEFAULT_GROUP_NAME: &str = "selection";

/// A value bound in the kernel's variable table.
#[derive(Debug, Clone, PartialEq)]
pub enum Variable {
    Data(Arc<DataSource>),
    Number(f64),
    Text(String),
    Rows(RowIndexSet),
}

impl Variable {
    pub fn to_payload(&self) -> Value {
        match self {
            Variable::Data(d) => json!({"type": "datasource", "value": wire::to_json_value(d)}),
            Variable::Number(v) => json!({"type": "number", "value": v}),
            Variable::Text(t) => json!({"type": "text", "value": t}),
            Variable::Rows(r) => json!({"type": "rows", "value": r}),
        }
    }

    /// Decodes a `store` payload: a data source document, a number or a string.
    pub fn from_payload(payload: &Value) -> KernelResult<Variable> {
        match payload {
            Value::Number(n) => Ok(Variable::Number(n.as_f64().unwrap_or(f64::NAN))),
            Value::String(s) => Ok(Variable::Text(s.clone())),
            Value::Object(_) => match wire::from_json_value(payload) {
                Ok(d) => Ok(Variable::Data(Arc::new(d))),
                Err(WireError::Schema { path, message }) => Err(ErrorPayload {
                    kind: ErrorKind::Schema,
                    message,
                    path: Some(if path == "." { "payload".into() } else { format!("payload.{path}") }),
                }),
                Err(WireError::Data(e)) => Err(fail(ErrorKind::Type, e.to_string())),
            },
            other => Err(fail(
                ErrorKind::Type,
                format!("payload must be a data source, number or string, found {}", type_name(other)),
            )),
        }
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn parse_payload<T: for<'de> Deserialize<'de>>(payload: &Value) -> KernelResult<T> {
    serde_path_to_error::deserialize(payload).map_err(|e| {
        let path = e.path().to_string();
        ErrorPayload {
            kind: ErrorKind::Schema,
            message: e.inner().to_string(),
            path: Some(if path == "." { "payload".into() } else { format!("payload.{path}") }),
        }
    })
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct FigureSpec {
    source: String,
    #[serde(default = "default_kind")]
    kind: String,
    #[serde(default)]
    axes: Option<Vec<String>>,
    #[serde(default)]
    spacing: Option<f64>,
    #[serde(default)]
    script: Option<String>,
    #[serde(default)]
    size: Option<(u32, u32)>,
    #[serde(default)]
    target: Option<DvpId>,
    #[serde(default)]
    wait: bool,
    #[serde(default)]
    timeout_ms: Option<u64>,
}

fn default_kind() -> String {
    "parcoords".into()
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SelectionSpec {
    figure: u64,
    rows: Vec<usize>,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    color: Option<Rgb>,
    #[serde(default)]
    alpha: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct AxisBrush {
    figure: u64,
    axis: usize,
    lo: f64,
    hi: f64,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SegmentBrush {
    figure: u64,
    pair: usize,
    x: f64,
    ylo: f64,
    yhi: f64,
    #[serde(default)]
    name: Option<String>,
}

/// Missing bounds stand for -inf and +inf.
#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SlopeBrush {
    figure: u64,
    pair: usize,
    #[serde(default)]
    lo: Option<f64>,
    #[serde(default)]
    hi: Option<f64>,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct FigureRef {
    figure: u64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CorrelationSpec {
    figure: u64,
    group: String,
    a: String,
    b: String,
}

enum FigureKind {
    Parcoords {
        index: LiveIndex,
    },
    Scene {
        script: String,
        scene: SceneGraph,
    },
}

struct Figure {
    owner: Option<DvpId>,
    variable: String,
    data: Arc<DataSource>,
    size: (u32, u32),
    kind: FigureKind,
}

/// Operations accepted by the coordinator.
#[derive(Debug)]
pub enum KernelOp {
    Store { name: String, value: Variable },
    Fetch { name: String },
    Command { from: DvpId, command: String, payload: Value },
}

struct Envelope {
    op: KernelOp,
    reply: oneshot::Sender<KernelResult<Value>>,
}

/// Handle to the coordinator task.
#[derive(Clone)]
pub struct Kernel {
    tx: mpsc::Sender<Envelope>,
}

impl Kernel {
    pub fn spawn(hub: Arc<Hub>) -> Kernel {
        let (tx, mut rx) = mpsc::channel::<Envelope>(1024);
        tokio::spawn(async move {
            let mut state = State {
                hub,
                variables: BTreeMap::new(),
                figures: BTreeMap::new(),
                next_figure: 0,
                groups: GroupStore::new(),
                links: LinkRegistry::new(),
            };
            while let Some(Envelope { op, reply }) = rx.recv().await {
                let _ = reply.send(state.apply(op));
            }
        });
        Kernel { tx }
    }

    pub async fn call(&self, op: KernelOp) -> KernelResult<Value> {
        let (reply, rx) = oneshot::channel();
        self.tx
            .send(Envelope { op, reply })
            .await
            .map_err(|_| fail(ErrorKind::Internal, "kernel stopped"))?;
        rx.await.map_err(|_| fail(ErrorKind::Internal, "kernel dropped the request"))?
    }

    pub async fn store(&self, name: &str, value: Variable) -> KernelResult<Value> {
        self.call(KernelOp::Store {
            name: name.to_string(),
            value,
        })
        .await
    }

    pub async fn fetch(&self, name: &str) -> KernelResult<Value> {
        self.call(KernelOp::Fetch { name: name.to_string() }).await
    }

    pub async fn command(&self, from: DvpId, command: &str, payload: Value) -> KernelResult<Value> {
        self.call(KernelOp::Command {
            from,
            command: command.to_string(),
            payload,
        })
        .await
    }
}

/// Reply-wait request extracted from a `figure.add` payload.
pub fn figure_wait(payload: &Value) -> Option<u64> {
    let spec: FigureSpec = serde_json::from_value(payload.clone()).ok()?;
    spec.wait.then(|| spec.timeout_ms.unwrap_or(super::correlation::DEFAULT_TIMEOUT.as_millis() as u64))
}

struct State {
    hub: Arc<Hub>,
    variables: BTreeMap<String, Variable>,
    figures: BTreeMap<FigureId, Figure>,
    next_figure: u64,
    groups: GroupStore,
    links: LinkRegistry,
}

impl State {
    fn apply(&mut self, op: KernelOp) -> KernelResult<Value> {
        match op {
            KernelOp::Store { name, value } => self.store(name, value),
            KernelOp::Fetch { name } => self
                .variables
                .get(&name)
                .map(Variable::to_payload)
                .ok_or_else(|| fail(ErrorKind::Unbound, format!("no variable named {name:?}"))),
            KernelOp::Command { from, command, payload } => match command.as_str() {
                "figure.add" => self.figure_add(from, &payload),
                "figure.remove" => self.figure_remove(&payload),
                "figure.export" => self.figure_export(&payload),
                "selection.set" => {
                    let spec: SelectionSpec = parse_payload(&payload)?;
                    let rows = RowIndexSet::from_unsorted(spec.rows);
                    self.select(FigureId(spec.figure), rows, spec.name, spec.color, spec.alpha)
                }
                "brush.axis" => {
                    let b: AxisBrush = parse_payload(&payload)?;
                    let index = self.index(FigureId(b.figure))?;
                    let rows = index.index.axis_interval_query(b.axis, b.lo, b.hi).map_err(query_error)?;
                    self.select(FigureId(b.figure), rows, b.name, None, None)
                }
                "brush.segment" => {
                    let b: SegmentBrush = parse_payload(&payload)?;
                    let index = self.index(FigureId(b.figure))?;
                    let rows = index
                        .index
                        .brush_segment_query(b.pair, b.x, b.ylo, b.yhi)
                        .map_err(query_error)?;
                    self.select(FigureId(b.figure), rows, b.name, None, None)
                }
                "brush.slope" => {
                    let b: SlopeBrush = parse_payload(&payload)?;
                    let index = self.index(FigureId(b.figure))?;
                    let rows = index
                        .index
                        .slope_query(b.pair, b.lo.unwrap_or(f64::NEG_INFINITY), b.hi.unwrap_or(f64::INFINITY))
                        .map_err(query_error)?;
                    self.select(FigureId(b.figure), rows, b.name, None, None)
                }
                "selection.correlation" => {
                    let c: CorrelationSpec = parse_payload(&payload)?;
                    let fig = self.figure(FigureId(c.figure))?;
                    let group = self
                        .groups
                        .by_name(fig.data.id(), &c.group)
                        .ok_or_else(|| fail(ErrorKind::Unbound, format!("no group named {:?}", c.group)))?;
                    let r = selection_correlation(&fig.data, &group.rows, &c.a, &c.b).map_err(query_error)?;
                    Ok(json!({"r": r}))
                }
                other => Err(fail(ErrorKind::Unsupported, format!("unknown command {other:?}"))),
            },
        }
    }

    fn figure(&self, id: FigureId) -> KernelResult<&Figure> {
        self.figures
            .get(&id)
            .ok_or_else(|| fail(ErrorKind::Unbound, format!("no figure {}", id.0)))
    }

    fn index(&self, id: FigureId) -> KernelResult<Arc<crate::parcoords::Snapshot>> {
        match &self.figure(id)?.kind {
            FigureKind::Parcoords { index, .. } => Ok(index.snapshot()),
            FigureKind::Scene { .. } => Err(fail(ErrorKind::Type, format!("figure {} is not a parallel-coordinates figure", id.0))),
        }
    }

    fn groups_on(&self, data: &DataSource) -> Vec<SelectionGroup> {
        self.groups.for_source(data.id()).cloned().collect()
    }

    fn render(&self, fig: &Figure) -> KernelResult<String> {
        let groups = self.groups_on(&fig.data);
        match &fig.kind {
            FigureKind::Parcoords { index, .. } => {
                let snap = index.snapshot();
                render_parcoords(snap.index.layout(), &snap.data, &groups, fig.size)
            }
            FigureKind::Scene { scene, .. } => render_scene(scene, fig.size, &groups),
        }
        .map_err(|e| fail(ErrorKind::Type, e.to_string()))
    }

    fn figure_event(&self, id: FigureId, fig: &Figure) -> KernelResult<Value> {
        let svg = self.render(fig)?;
        let (kind, extra) = match &fig.kind {
            FigureKind::Parcoords { index, .. } => {
                let snap = index.snapshot();
                ("parcoords", json!({"layout": snap.index.layout()}))
            }
            FigureKind::Scene { script, .. } => ("scene", json!({"script": script})),
        };
        let groups: Vec<Value> = self
            .groups_on(&fig.data)
            .iter()
            .map(|g| json!({"groupId": g.id, "name": g.name, "rows": g.rows, "color": g.color, "alpha": g.alpha}))
            .collect();
        let mut event = json!({
            "figureId": id.0,
            "kind": kind,
            "source": fig.variable,
            "nRows": fig.data.n_rows(),
            "size": [fig.size.0, fig.size.1],
            "groups": groups,
            "svg": svg,
        });
        if let (Value::Object(e), Value::Object(x)) = (&mut event, extra) {
            e.extend(x);
        }
        Ok(event)
    }

    /// Delivers `command` to the figure's owner, or to every visualizer
    /// listening when the figure has none.
    fn notify_figure(&self, fig: &Figure, command: &str, payload: &Value) -> (Vec<u64>, Vec<DvpId>) {
        let targets = match fig.owner {
            Some(owner) => vec![owner],
            None => self.hub.listeners(Role::Visualizer),
        };
        let mut requests = Vec::new();
        let mut delivered = Vec::new();
        for t in targets {
            if let Ok(req) = self.hub.send_sse(t, command, payload.clone()) {
                requests.push(req);
                delivered.push(t);
            }
        }
        (requests, delivered)
    }

    fn data_variable(&self, name: &str) -> KernelResult<Arc<DataSource>> {
        match self.variables.get(name) {
            Some(Variable::Data(d)) => Ok(d.clone()),
            Some(_) => Err(fail(ErrorKind::Type, format!("variable {name:?} is not a data source"))),
            None => Err(fail(ErrorKind::Unbound, format!("no variable named {name:?}"))),
        }
    }

    fn build_kind(
        data: &Arc<DataSource>,
        kind: &str,
        axes: Option<Vec<String>>,
        spacing: Option<f64>,
        script: Option<String>,
    ) -> KernelResult<FigureKind> {
        match kind {
            "parcoords" => {
                let spacing = spacing.unwrap_or(1.0);
                let axes = match axes {
                    Some(a) => a,
                    None => layout_all(data, spacing)
                        .map_err(query_error)?
                        .axes
                        .into_iter()
                        .map(|a| a.name)
                        .collect(),
                };
                let refs: Vec<&str> = axes.iter().map(String::as_str).collect();
                let index = LiveIndex::new(data.clone(), &refs, spacing).map_err(query_error)?;
                Ok(FigureKind::Parcoords { index })
            }
            "scene" => {
                let script = script.ok_or_else(|| ErrorPayload {
                    kind: ErrorKind::Schema,
                    message: "scene figures need a script".into(),
                    path: Some("payload.script".into()),
                })?;
                let scene = compile_script(&script, data).map_err(|e| fail(ErrorKind::Type, e.to_string()))?;
                Ok(FigureKind::Scene { script, scene })
            }
            other => Err(fail(ErrorKind::Unsupported, format!("unknown figure kind {other:?}"))),
        }
    }

    fn figure_add(&mut self, from: DvpId, payload: &Value) -> KernelResult<Value> {
        let spec: FigureSpec = parse_payload(payload)?;
        let data = self.data_variable(&spec.source)?;
        if let Some(t) = spec.target {
            self.hub
                .check_open(t)
                .map_err(|e| fail(ErrorKind::Protocol, e.to_string()))?;
        }
        let size = spec.size.unwrap_or(DEFAULT_FIGURE_SIZE);
        if size.0 == 0 || size.1 == 0 {
            return Err(fail(ErrorKind::Type, format!("figure size must be positive, got {}x{}", size.0, size.1)));
        }
        let kind = Self::build_kind(&data, &spec.kind, spec.axes, spec.spacing, spec.script)?;
        let id = FigureId(self.next_figure);
        self.next_figure += 1;
        let fig = Figure {
            owner: spec.target,
            variable: spec.source,
            data: data.clone(),
            size,
            kind,
        };
        let event = self.figure_event(id, &fig)?;
        let (requests, targets) = self.notify_figure(&fig, "figure.add", &event);
        self.links.register(id, data.id());
        self.figures.insert(id, fig);
        tracing::debug!(figure = id.0, from, "figure added");
        Ok(json!({"figureId": id.0, "requestIds": requests, "targets": targets}))
    }

    fn figure_remove(&mut self, payload: &Value) -> KernelResult<Value> {
        let FigureRef { figure } = parse_payload(payload)?;
        self.figures
            .remove(&FigureId(figure))
            .ok_or_else(|| fail(ErrorKind::Unbound, format!("no figure {figure}")))?;
        self.links.remove(FigureId(figure));
        Ok(json!({"figureId": figure}))
    }

    fn figure_export(&self, payload: &Value) -> KernelResult<Value> {
        let FigureRef { figure } = parse_payload(payload)?;
        let svg = self.render(self.figure(FigureId(figure))?)?;
        Ok(json!({"figureId": figure, "svg": svg}))
    }

    fn store(&mut self, name: String, value: Variable) -> KernelResult<Value> {
        if name.is_empty() {
            return Err(ErrorPayload {
                kind: ErrorKind::Schema,
                message: "variable name must not be empty".into(),
                path: Some("name".into()),
            });
        }
        let summary = match &value {
            Variable::Data(d) => json!({"name": name, "type": "datasource", "rows": d.n_rows(), "columns": d.n_cols()}),
            Variable::Rows(r) => json!({"name": name, "type": "rows", "rows": r.len()}),
            Variable::Number(_) => json!({"name": name, "type": "number"}),
            Variable::Text(_) => json!({"name": name, "type": "text"}),
        };
        self.variables.insert(name.clone(), value.clone());
        if let Variable::Data(data) = value {
            self.rebind_figures(&name, &data);
        }
        Ok(summary)
    }

    /// Swaps a replaced data source into every figure bound to `name`.
    /// Figures that no longer fit the new data are dropped.
    fn rebind_figures(&mut self, name: &str, data: &Arc<DataSource>) {
        let ids: Vec<FigureId> = self
            .figures
            .iter()
            .filter(|(_, f)| f.variable == name)
            .map(|(id, _)| *id)
            .collect();
        for id in ids {
            let fig = self.figures.get_mut(&id).expect("listed");
            let ok = match &mut fig.kind {
                FigureKind::Parcoords { index, .. } => index.swap(data.clone()).is_ok(),
                FigureKind::Scene { script, scene } => match compile_script(script, data) {
                    Ok(s) => {
                        *scene = s;
                        true
                    }
                    Err(_) => false,
                },
            };
            if !ok {
                self.figures.remove(&id);
                self.links.remove(id);
                continue;
            }
            fig.data = data.clone();
            self.links.register(id, data.id());
            let fig = &self.figures[&id];
            if let Ok(event) = self.figure_event(id, fig) {
                self.notify_figure(fig, "figure.update", &event);
            }
        }
    }

    fn select(
        &mut self,
        figure: FigureId,
        rows: RowIndexSet,
        name: Option<String>,
        color: Option<Rgb>,
        alpha: Option<f64>,
    ) -> KernelResult<Value> {
        let fig = self.figure(figure)?;
        let (data, variable) = (fig.data.clone(), fig.variable.clone());
        let name = name.unwrap_or_else(|| DEFAULT_GROUP_NAME.to_string());
        let existing = self.groups.by_name(data.id(), &name).map(|g| g.id);
        let result = match existing {
            Some(id) => self.groups.set_rows(&data, id, rows),
            None => self.groups.create_group(&data, rows, &name, color, alpha),
        };
        let group = result.map_err(|e| fail(ErrorKind::Type, e.to_string()))?.clone();
        let sel_var = format!("{variable}_sel");
        self.variables.insert(sel_var.clone(), Variable::Rows(group.rows.clone()));

        let hub = self.hub.clone();
        let owners: BTreeMap<FigureId, Option<DvpId>> = self.figures.iter().map(|(id, f)| (*id, f.owner)).collect();
        let notes = self.links.propagate_live(&group, |f| match owners.get(&f) {
            Some(Some(owner)) => hub.check_open(*owner).is_ok(),
            Some(None) => true,
            None => false,
        });
        let mut requests = Vec::new();
        for note in &notes {
            let fig = &self.figures[&note.figure];
            let payload = json!({
                "figureId": note.figure.0,
                "groupId": group.id,
                "name": group.name,
                "rows": note.rows,
                "color": group.color,
                "alpha": group.alpha,
            });
            requests.extend(self.notify_figure(fig, "selection.set", &payload).0);
        }
        let created = json!({
            "variable": sel_var,
            "source": variable,
            "group": group.name,
            "groupId": group.id,
            "rows": group.rows,
        });
        for sce in self.hub.listeners(Role::Sce) {
            if let Ok(req) = self.hub.send_sse(sce, "selection.created", created.clone()) {
                requests.push(req);
            }
        }
        Ok(json!({
            "groupId": group.id,
            "name": group.name,
            "variable": sel_var,
            "rows": group.rows,
            "figures": notes.iter().map(|n| n.figure.0).collect::<Vec<_>>(),
            "requestIds": requests,
        }))
    }
}

fn query_error(e: impl std::fmt::Display) -> ErrorPayload {
    fail(ErrorKind::Query, e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize) -> Arc<DataSource> {
        let rows: Vec<Vec<f64>> = (0..n).map(|r| vec![r as f64, (n - r) as f64, (r % 7) as f64]).collect();
        Arc::new(DataSource::from_rows("t", &["a", "b", "c"], &rows).unwrap())
    }

    fn kind(e: ErrorPayload) -> ErrorKind {
        e.kind
    }

    #[tokio::test]
    async fn store_fetch_round_trip() {
        let k = Kernel::spawn(Arc::new(Hub::new()));
        let data = table(20);
        k.store("d", Variable::Data(data.clone())).await.unwrap();
        let got = k.fetch("d").await.unwrap();
        assert_eq!(got["type"], "datasource");
        assert_eq!(wire::from_json_value(&got["value"]).unwrap(), *data);
        assert_eq!(kind(k.fetch("nope").await.unwrap_err()), ErrorKind::Unbound);
        k.store("n", Variable::Number(4.0)).await.unwrap();
        assert_eq!(k.fetch("n").await.unwrap(), json!({"type": "number", "value": 4.0}));
    }

    #[test]
    fn payload_decoding() {
        assert_eq!(Variable::from_payload(&json!(3)).unwrap(), Variable::Number(3.0));
        assert_eq!(kind(Variable::from_payload(&json!(true)).unwrap_err()), ErrorKind::Type);
        assert_eq!(kind(Variable::from_payload(&json!([1, 2])).unwrap_err()), ErrorKind::Type);
        let e = Variable::from_payload(&json!({"name": "x", "columns": [{"name": "v", "type": "quantitative"}], "rows": [["a"]]}))
            .unwrap_err();
        assert_eq!(e.kind, ErrorKind::Schema);
        assert_eq!(e.path.as_deref(), Some("payload.rows[0][0]"));
        let e = Variable::from_payload(&json!({"name": "x", "columns": [{"name": "v", "type": "quantitative"}, {"name": "v", "type": "quantitative"}], "rows": []}))
            .unwrap_err();
        assert_eq!(e.kind, ErrorKind::Type);
    }

    #[tokio::test]
    async fn selection_binds_variable_and_links() {
        let hub = Arc::new(Hub::new());
        let k = Kernel::spawn(hub.clone());
        let ui = hub.handshake(Role::Visualizer);
        let mut ui_rx = hub.open_stream(ui).unwrap();
        let sce = hub.handshake(Role::Sce);
        let mut sce_rx = hub.open_stream(sce).unwrap();
        k.store("d", Variable::Data(table(50))).await.unwrap();
        let f0 = k.command(sce, "figure.add", json!({"source": "d"})).await.unwrap();
        let f1 = k
            .command(sce, "figure.add", json!({"source": "d", "kind": "scene", "script": "ELEMENT: point(position(a*b))"}))
            .await
            .unwrap();
        assert_eq!(f0["targets"], json!([ui]));
        for want in [0, 1] {
            let m = ui_rx.try_recv().unwrap();
            assert_eq!(m.command, "figure.add");
            assert_eq!(m.payload["figureId"], want);
            assert!(m.payload["svg"].as_str().unwrap().starts_with("<?xml"));
        }
        let out = k
            .command(ui, "selection.set", json!({"figure": f0["figureId"], "rows": [5, 1, 3]}))
            .await
            .unwrap();
        assert_eq!(out["variable"], "d_sel");
        assert_eq!(out["figures"], json!([0, 1]));
        assert_eq!(k.fetch("d_sel").await.unwrap(), json!({"type": "rows", "value": [1, 3, 5]}));
        let linked: Vec<_> = (0..2).map(|_| ui_rx.try_recv().unwrap()).collect();
        assert!(linked.iter().all(|m| m.command == "selection.set" && m.payload["rows"] == json!([1, 3, 5])));
        let created = sce_rx.try_recv().unwrap();
        assert_eq!(created.command, "selection.created");
        assert_eq!(created.payload["variable"], "d_sel");
        let _ = f1;
    }

    #[tokio::test]
    async fn brushes_run_queries() {
        let k = Kernel::spawn(Arc::new(Hub::new()));
        k.store("d", Variable::Data(table(100))).await.unwrap();
        let fig = k.command(0, "figure.add", json!({"source": "d", "axes": ["a", "b"]})).await.unwrap()["figureId"].clone();
        let out = k.command(0, "brush.axis", json!({"figure": fig, "axis": 0, "lo": 10.0, "hi": 12.0})).await.unwrap();
        assert_eq!(out["rows"], json!([10, 11, 12]));
        let out = k
            .command(0, "brush.slope", json!({"figure": fig, "pair": 0, "name": "all"}))
            .await
            .unwrap();
        assert_eq!(out["rows"].as_array().unwrap().len(), 100);
        let out = k
            .command(0, "brush.segment", json!({"figure": fig, "pair": 0, "x": 0.5, "ylo": 0.5, "yhi": 0.5}))
            .await
            .unwrap();
        // a rises and b falls; the rows cross at the band centre near y = 0.5.
        assert!(!out["rows"].as_array().unwrap().is_empty());
        let e = k.command(0, "brush.segment", json!({"figure": fig, "pair": 0, "x": 1.0, "ylo": 0.0, "yhi": 1.0})).await.unwrap_err();
        assert_eq!(e.kind, ErrorKind::Query);
        let r = k
            .command(0, "selection.correlation", json!({"figure": fig, "group": "all", "a": "a", "b": "b"}))
            .await
            .unwrap();
        assert!((r["r"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    }

    #[tokio::test]
    async fn command_errors() {
        let k = Kernel::spawn(Arc::new(Hub::new()));
        assert_eq!(k.command(0, "figure.add", json!({"source": "x"})).await.unwrap_err().kind, ErrorKind::Unbound);
        let e = k.command(0, "figure.add", json!({})).await.unwrap_err();
        assert_eq!((e.kind, e.path.as_deref()), (ErrorKind::Schema, Some("payload")));
        assert!(e.message.contains("source"));
        assert_eq!(k.command(0, "launch", json!({})).await.unwrap_err().kind, ErrorKind::Unsupported);
        k.store("d", Variable::Data(table(5))).await.unwrap();
        let e = k.command(0, "figure.add", json!({"source": "d", "kind": "scene", "script": "ELEMENT: point(position(a*zz))"})).await.unwrap_err();
        assert_eq!(e.kind, ErrorKind::Type);
        assert!(e.message.contains("unknown column zz"));
        let e = k.command(0, "selection.set", json!({"figure": 9, "rows": []})).await.unwrap_err();
        assert_eq!(e.kind, ErrorKind::Unbound);
    }

    #[tokio::test]
    async fn restore_swaps_figure_data() {
        let hub = Arc::new(Hub::new());
        let k = Kernel::spawn(hub.clone());
        k.store("d", Variable::Data(table(10))).await.unwrap();
        let fig = k.command(0, "figure.add", json!({"source": "d"})).await.unwrap()["figureId"].clone();
        k.store("d", Variable::Data(table(30))).await.unwrap();
        let out = k.command(0, "brush.axis", json!({"figure": fig, "axis": 0, "lo": 0.0, "hi": 100.0})).await.unwrap();
        assert_eq!(out["rows"].as_array().unwrap().len(), 30);
        // A source without the figure's axes drops the figure.
        let other = Arc::new(DataSource::from_rows("o", &["z"], &[vec![1.0]]).unwrap());
        k.store("d", Variable::Data(other)).await.unwrap();
        assert_eq!(k.command(0, "figure.export", json!({"figure": fig})).await.unwrap_err().kind, ErrorKind::Unbound);
    }
}

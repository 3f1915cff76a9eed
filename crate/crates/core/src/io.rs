//! JSON documents for graphs, measures and weights, the output documents of
//! every pipeline stage, and the CSV writers for sampled densities and the
//! entropy profile.
//!
//! Floats are written by `serde_json` in shortest round-trip form, so a
//! saved curve reloads bit for bit.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curve::{CouplingInfo, Factors, GeodesicCurve};
use crate::error::{Error, Result};
use crate::graph::{Graph, Measure, VertexId};
use crate::orientation::OrientedGraph;
use crate::poly::Polynomial;
use crate::scaling::{CostKernel, ScalingMethod, ScalingResult};
use crate::transport::Coupling;
use crate::weights::WeightSystem;

/// Relative tolerance when checking stored `f`, `g`, `h` against the ones
/// rebuilt from the stored factors.
const RELOAD_TOL: f64 = 1e-9;

/// A vertex identifier as written in a document: a string or an integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Name {
    Int(i64),
    Str(String),
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Int(i) => write!(f, "{i}"),
            Name::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<Name>,
    pub edges: Vec<[Name; 2]>,
}

impl GraphDoc {
    pub fn from_graph(g: &Graph) -> Self {
        let n = |v: VertexId| Name::Str(g.name(v).to_string());
        GraphDoc {
            vertices: (0..g.vertex_count()).map(n).collect(),
            edges: g.edges().iter().map(|&(a, b)| [n(a), n(b)]).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        let vertices: Vec<String> = self.vertices.iter().map(Name::to_string).collect();
        let edges: Vec<(String, String)> = self
            .edges
            .iter()
            .map(|[a, b]| (a.to_string(), b.to_string()))
            .collect();
        Graph::new(&vertices, &edges)
    }
}

/// Vertex name to mass.
pub type MeasureDoc = BTreeMap<String, f64>;

pub fn measure_doc(g: &Graph, f: &Measure) -> MeasureDoc {
    f.support()
        .into_iter()
        .map(|v| (g.name(v).to_string(), f.get(v)))
        .collect()
}

pub fn measure_from_doc(g: &Graph, doc: &MeasureDoc) -> Result<Measure> {
    Measure::from_named(g, doc.iter().map(|(k, &m)| (k.as_str(), m)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexWeight {
    pub vertex: String,
    pub m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeWeight {
    pub tail: String,
    pub head: String,
    pub m: f64,
}

/// Weights on the oriented graph. Only `edges` is read back; vertex weights
/// are derived from them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsDoc {
    #[serde(default)]
    pub vertices: Vec<VertexWeight>,
    pub edges: Vec<EdgeWeight>,
}

impl WeightsDoc {
    pub fn from_weights(w: &WeightSystem) -> Self {
        let og = w.oriented();
        let g = og.graph();
        WeightsDoc {
            vertices: og
                .active()
                .iter()
                .map(|&v| VertexWeight {
                    vertex: g.name(v).to_string(),
                    m: w.vertex_weight(v),
                })
                .collect(),
            edges: og
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(a, b))| EdgeWeight {
                    tail: g.name(a).to_string(),
                    head: g.name(b).to_string(),
                    m: w.edge_weight(e),
                })
                .collect(),
        }
    }

    pub fn named(&self) -> Result<HashMap<(String, String), f64>> {
        let mut map = HashMap::with_capacity(self.edges.len());
        for e in &self.edges {
            if map.insert((e.tail.clone(), e.head.clone()), e.m).is_some() {
                return Err(Error::Document(format!(
                    "weight for {}->{} given twice",
                    e.tail, e.head
                )));
            }
        }
        Ok(map)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingDoc {
    pub x: String,
    pub y: String,
    pub mass: f64,
}

fn coupling_docs(g: &Graph, entries: &[(VertexId, VertexId, f64)]) -> Vec<CouplingDoc> {
    entries
        .iter()
        .map(|&(x, y, mass)| CouplingDoc {
            x: g.name(x).to_string(),
            y: g.name(y).to_string(),
            mass,
        })
        .collect()
}

/// Output of the `w1` stage: the distance and an optimal coupling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub w1: f64,
    pub coupling: Vec<CouplingDoc>,
}

impl WitnessDoc {
    pub fn new(g: &Graph, w1: f64, coupling: &Coupling) -> Self {
        let entries: Vec<_> = coupling.entries().iter().map(|e| (e.x, e.y, e.mass)).collect();
        WitnessDoc {
            w1,
            coupling: coupling_docs(g, &entries),
        }
    }
}

/// Output of the `orient` stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrientationDoc {
    pub active: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub sources: Vec<String>,
    pub sinks: Vec<String>,
    pub union: Vec<[String; 2]>,
}

impl OrientationDoc {
    pub fn new(og: &OrientedGraph, union: &[(VertexId, VertexId)]) -> Self {
        let g = og.graph();
        let names = |vs: &[VertexId]| vs.iter().map(|&v| g.name(v).to_string()).collect();
        let pair = |&(a, b): &(VertexId, VertexId)| [g.name(a).to_string(), g.name(b).to_string()];
        OrientationDoc {
            active: names(og.active()),
            edges: og.edges().iter().map(pair).collect(),
            sources: names(og.sources()),
            sinks: names(og.sinks()),
            union: union.iter().map(pair).collect(),
        }
    }
}

/// Output of the `couple` stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingDoc {
    pub a: BTreeMap<String, f64>,
    pub b: BTreeMap<String, f64>,
    pub pi: Vec<CouplingDoc>,
    #[serde(rename = "J")]
    pub j: f64,
    pub iterations: usize,
    pub marginal_error: f64,
    pub method: ScalingMethod,
}

impl ScalingDoc {
    pub fn new(g: &Graph, ck: &CostKernel, sr: &ScalingResult) -> Self {
        let named = |vs: &[VertexId], vals: &[f64]| {
            vs.iter().map(|&v| (g.name(v).to_string(), vals[v])).collect()
        };
        ScalingDoc {
            a: named(ck.row_vertices(), &sr.a),
            b: named(ck.col_vertices(), &sr.b),
            pi: coupling_docs(g, &sr.entries(ck)),
            j: ck.j_value(&sr.pi),
            iterations: sr.iterations,
            marginal_error: sr.marginal_error,
            method: sr.method,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveVertex {
    pub vertex: String,
    pub m: f64,
    pub a: f64,
    pub b: f64,
    /// Density, in powers of `t`.
    pub f: Vec<f64>,
    /// `P`, in powers of `t`.
    pub p: Vec<f64>,
    /// `Q`, in powers of `1 - t`.
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveEdge {
    pub tail: String,
    pub head: String,
    pub m: f64,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveTriple {
    pub x0: String,
    pub x1: String,
    pub x2: String,
    pub m: f64,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveScaling {
    pub iterations: usize,
    pub marginal_error: f64,
    pub method: ScalingMethod,
}

/// A complete curve: enough to rebuild every polynomial and re-verify.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveDoc {
    pub graph: GraphDoc,
    pub f0: MeasureDoc,
    pub f1: MeasureDoc,
    pub w1: f64,
    pub active: Vec<String>,
    pub sources: Vec<String>,
    pub sinks: Vec<String>,
    pub vertices: Vec<CurveVertex>,
    pub edges: Vec<CurveEdge>,
    pub triples: Vec<CurveTriple>,
    pub coupling: Vec<CouplingDoc>,
    pub scaling: CurveScaling,
}

impl CurveDoc {
    pub fn from_curve(curve: &GeodesicCurve) -> Self {
        let w = &curve.weights;
        let og = curve.oriented();
        let g = og.graph();
        let name = |v: VertexId| g.name(v).to_string();
        let names = |vs: &[VertexId]| vs.iter().map(|&v| name(v)).collect();
        CurveDoc {
            graph: GraphDoc::from_graph(g),
            f0: measure_doc(g, &curve.f0),
            f1: measure_doc(g, &curve.f1),
            w1: curve.w1,
            active: names(og.active()),
            sources: names(og.sources()),
            sinks: names(og.sinks()),
            vertices: og
                .active()
                .iter()
                .map(|&v| CurveVertex {
                    vertex: name(v),
                    m: w.vertex_weight(v),
                    a: curve.a[v],
                    b: curve.b[v],
                    f: curve.f[v].coeffs().to_vec(),
                    p: curve.factors.p[v].coeffs().to_vec(),
                    q: curve.factors.q_dual[v].coeffs().to_vec(),
                })
                .collect(),
            edges: og
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(a, b))| CurveEdge {
                    tail: name(a),
                    head: name(b),
                    m: w.edge_weight(e),
                    g: curve.g[e].coeffs().to_vec(),
                })
                .collect(),
            triples: og
                .triples()
                .iter()
                .enumerate()
                .map(|(i, t)| CurveTriple {
                    x0: name(t.x0),
                    x1: name(t.x1),
                    x2: name(t.x2),
                    m: curve.triple_weights[i],
                    h: curve.h[i].coeffs().to_vec(),
                })
                .collect(),
            coupling: coupling_docs(g, &curve.coupling.entries),
            scaling: CurveScaling {
                iterations: curve.coupling.iterations,
                marginal_error: curve.coupling.marginal_error,
                method: curve.coupling.method,
            },
        }
    }

    /// Rebuilds the curve from the stored orientation, edge weights and
    /// factors, and checks that the stored `f`, `g`, `h` agree with the
    /// rebuilt ones.
    pub fn to_curve(&self) -> Result<GeodesicCurve> {
        let graph = Arc::new(self.graph.to_graph()?);
        let g = &graph;
        let n = g.vertex_count();
        let ids = |names: &[String]| -> Result<Vec<VertexId>> { names.iter().map(|s| g.id(s)).collect() };
        let active = ids(&self.active)?;
        let mut edges = Vec::with_capacity(self.edges.len());
        let mut edge_weights = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            edges.push((g.id(&e.tail)?, g.id(&e.head)?));
            edge_weights.push(e.m);
        }
        let og = Arc::new(OrientedGraph::from_parts(graph.clone(), active, edges)?);
        let weights = Arc::new(WeightSystem::custom(og.clone(), edge_weights)?);

        let mut p = vec![Polynomial::new(Vec::new()); n];
        let mut q_dual = vec![Polynomial::new(Vec::new()); n];
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        for cv in &self.vertices {
            let v = g.id(&cv.vertex)?;
            if !og.is_active(v) {
                return Err(Error::Document(format!("vertex {} is not active", cv.vertex)));
            }
            p[v] = Polynomial::new(cv.p.clone());
            q_dual[v] = Polynomial::new(cv.q.clone());
            a[v] = cv.a;
            b[v] = cv.b;
        }
        let f0 = measure_from_doc(g, &self.f0)?;
        let f1 = measure_from_doc(g, &self.f1)?;
        let mut entries = Vec::with_capacity(self.coupling.len());
        for c in &self.coupling {
            entries.push((g.id(&c.x)?, g.id(&c.y)?, c.mass));
        }
        let coupling = CouplingInfo {
            entries,
            iterations: self.scaling.iterations,
            marginal_error: self.scaling.marginal_error,
            method: self.scaling.method,
        };
        let curve = GeodesicCurve::from_factors(
            weights,
            Factors::new(p, q_dual),
            a,
            b,
            f0,
            f1,
            self.w1,
            coupling,
        );

        for cv in &self.vertices {
            let v = g.id(&cv.vertex)?;
            check_stored("f", &cv.vertex, &cv.f, &curve.f[v])?;
        }
        for (e, ce) in self.edges.iter().enumerate() {
            check_stored("g", &format!("{}->{}", ce.tail, ce.head), &ce.g, &curve.g[e])?;
        }
        if self.triples.len() != curve.h.len() {
            return Err(Error::Document(format!(
                "{} triples stored, orientation has {}",
                self.triples.len(),
                curve.h.len()
            )));
        }
        for (i, ct) in self.triples.iter().enumerate() {
            let t = &og.triples()[i];
            let want = [g.name(t.x0), g.name(t.x1), g.name(t.x2)];
            if [ct.x0.as_str(), ct.x1.as_str(), ct.x2.as_str()] != want {
                return Err(Error::Document(format!("triple {i} does not match the orientation")));
            }
            check_stored("h", &format!("{}->{}->{}", ct.x0, ct.x1, ct.x2), &ct.h, &curve.h[i])?;
        }
        Ok(curve)
    }
}

fn check_stored(what: &str, at: &str, stored: &[f64], rebuilt: &Polynomial) -> Result<()> {
    let scale = rebuilt.max_abs_coeff().max(1.0);
    let len = stored.len().max(rebuilt.coeffs().len());
    let gap = (0..len)
        .map(|k| (stored.get(k).copied().unwrap_or(0.0) - rebuilt.coeff(k)).abs())
        .fold(0.0, f64::max);
    if gap > RELOAD_TOL * scale {
        return Err(Error::Document(format!(
            "stored {what} at {at} differs from the factors by {gap:e}"
        )));
    }
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Document(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    read_json::<GraphDoc>(path)?.to_graph()
}

pub fn read_measure(g: &Graph, path: &Path) -> Result<Measure> {
    measure_from_doc(g, &read_json(path)?)
}

pub fn read_weights(path: &Path) -> Result<HashMap<(String, String), f64>> {
    read_json::<WeightsDoc>(path)?.named()
}

pub fn save_curve(path: &Path, curve: &GeodesicCurve) -> Result<()> {
    write_json(path, &CurveDoc::from_curve(curve))
}

pub fn load_curve(path: &Path) -> Result<GeodesicCurve> {
    read_json::<CurveDoc>(path)?.to_curve()
}

/// Rows `t,vertex,mass` for every vertex at each time.
pub fn samples_csv(curve: &GeodesicCurve, times: &[f64]) -> Result<String> {
    let g = curve.oriented().graph();
    let mut out = String::from("t,vertex,mass\n");
    for &t in times {
        let f = curve.measure_at(t)?;
        for v in 0..g.vertex_count() {
            writeln!(out, "{t},{},{}", g.name(v), f.get(v)).expect("write to string");
        }
    }
    Ok(out)
}

/// Rows `t,entropy` on a uniform grid of `points` times.
pub fn entropy_csv(curve: &GeodesicCurve, points: usize) -> String {
    let grid = crate::curve::uniform_grid(points);
    let mut out = String::from("t,entropy\n");
    for (t, h) in curve.entropy_profile(&grid) {
        writeln!(out, "{t},{h}").expect("write to string");
    }
    out
}

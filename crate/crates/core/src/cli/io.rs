//! Input parsing and the output document.

use std::collections::BTreeSet;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::affine_md::{MdVertex, MinimizationDiagram, QuadraticFunction};
use crate::dataset::{DataSet, Site};
use crate::error::{GvdError, Result};
use crate::quadric::{EdgeEnd, GeneralizedDiagram};

/// A parsed input file.
#[derive(Debug, Clone)]
pub enum Job {
    Extremal(DataSet),
    Affine {
        functions: Vec<QuadraticFunction>,
        order_k: usize,
    },
}

impl Job {
    pub fn dimension(&self) -> usize {
        match self {
            Job::Extremal(ds) => ds.dimension(),
            Job::Affine { functions, .. } => functions[0].dim(),
        }
    }
}

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(GvdError::Parse(msg.into()))
}

fn field<'a>(obj: &'a Value, name: &str, at: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| GvdError::Parse(format!("{at}.{name}: missing")))
}

fn number(obj: &Value, name: &str, at: &str) -> Result<f64> {
    field(obj, name, at)?
        .as_f64()
        .ok_or_else(|| GvdError::Parse(format!("{at}.{name}: expected a number")))
}

fn vector(obj: &Value, name: &str, at: &str, d: usize) -> Result<Vec<f64>> {
    let arr = field(obj, name, at)?
        .as_array()
        .ok_or_else(|| GvdError::Parse(format!("{at}.{name}: expected an array")))?;
    if arr.len() != d {
        return parse_err(format!("{at}.{name}: expected {d} coordinates, found {}", arr.len()));
    }
    arr.iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64()
                .ok_or_else(|| GvdError::Parse(format!("{at}.{name}[{i}]: expected a number")))
        })
        .collect()
}

/// Parses either input schema. Sites and functions get ids `1..` in file order.
pub fn parse_input_str(text: &str) -> Result<Job> {
    let root: Value = serde_json::from_str(text).map_err(|e| GvdError::Parse(format!("invalid JSON: {e}")))?;
    let d = field(&root, "dimension", "input")?
        .as_u64()
        .ok_or_else(|| GvdError::Parse("input.dimension: expected a positive integer".into()))? as usize;
    if d < 2 {
        return parse_err(format!("input.dimension: must be at least 2, got {d}"));
    }
    let mode = field(&root, "mode", "input")?
        .as_str()
        .ok_or_else(|| GvdError::Parse("input.mode: expected a string".into()))?;
    match mode {
        "extremal" => {
            let arr = field(&root, "sites", "input")?
                .as_array()
                .ok_or_else(|| GvdError::Parse("input.sites: expected an array".into()))?;
            let mut sites = Vec::with_capacity(arr.len());
            for (i, s) in arr.iter().enumerate() {
                let at = format!("sites[{i}]");
                let ty = field(s, "type", &at)?
                    .as_str()
                    .ok_or_else(|| GvdError::Parse(format!("{at}.type: expected a string")))?;
                let id = i + 1;
                let site = match ty {
                    "point_outside" => Site::point_outside(id, &vector(s, "coords", &at, d)?),
                    "point_inside" => Site::point_inside(id, &vector(s, "coords", &at, d)?),
                    "halfspace" => Site::halfspace(id, &vector(s, "normal", &at, d)?, number(s, "height", &at)?),
                    "sphere_power" | "sphere_exterior" => {
                        let r = number(s, "radius", &at)?;
                        if !(r > 0.0) {
                            return Err(GvdError::InvalidInput(format!("{at}.radius: must be positive, got {r}")));
                        }
                        let c = vector(s, "center", &at, d)?;
                        if ty == "sphere_power" {
                            Site::power_sphere(id, &c, r)
                        } else {
                            Site::exterior_sphere(id, &c, r)
                        }
                    }
                    other => return parse_err(format!("{at}.type: unknown site type {other:?}")),
                }
                .map_err(|e| GvdError::InvalidInput(format!("{at}: {e}")))?;
                sites.push(site);
            }
            Ok(Job::Extremal(DataSet::new(sites, d)?))
        }
        "affine" => {
            let order_k = match root.get("order_k") {
                None => 1,
                Some(v) => v
                    .as_u64()
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| GvdError::Parse("input.order_k: expected a positive integer".into()))?
                    as usize,
            };
            let arr = field(&root, "functions", "input")?
                .as_array()
                .ok_or_else(|| GvdError::Parse("input.functions: expected an array".into()))?;
            let mut functions = Vec::with_capacity(arr.len());
            for (i, f) in arr.iter().enumerate() {
                let at = format!("functions[{i}]");
                let q = vector(f, "q", &at, d)?;
                let b = vector(f, "b", &at, d)?;
                let qf = QuadraticFunction::new(number(f, "a", &at)?, q, b, number(f, "c", &at)?)
                    .map_err(|e| GvdError::InvalidInput(format!("{at}: {e}")))?;
                functions.push(qf);
            }
            if functions.len() < 2 && order_k == 1 {
                return Err(GvdError::InvalidInput("input.functions: need at least 2 functions".into()));
            }
            if functions.is_empty() || order_k > functions.len() {
                return Err(GvdError::InvalidInput(format!(
                    "input.order_k: {order_k} exceeds the number of functions ({})",
                    functions.len()
                )));
            }
            Ok(Job::Affine { functions, order_k })
        }
        other => parse_err(format!("input.mode: unknown mode {other:?}")),
    }
}

pub fn parse_input(path: &std::path::Path) -> Result<Job> {
    let text = std::fs::read_to_string(path)?;
    parse_input_str(&text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: usize,
    pub center: Vec<f64>,
    /// Sphere radius (extremal mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Common minimal value (affine mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    pub tight_sites: Vec<usize>,
}

/// A vertex id, or `"boundary"` / `"loop"` for open ends and closed curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EndDoc {
    Vertex(usize),
    Open(String),
}

impl From<EdgeEnd> for EndDoc {
    fn from(e: EdgeEnd) -> Self {
        match e {
            EdgeEnd::Vertex(v) => EndDoc::Vertex(v),
            EdgeEnd::Boundary => EndDoc::Open("boundary".into()),
            EdgeEnd::Loop => EndDoc::Open("loop".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub v0: EndDoc,
    pub v1: EndDoc,
    pub sites: Vec<usize>,
    pub polyline: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonsDoc {
    pub pred: f64,
    pub feas: f64,
    pub joggle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaDoc {
    pub mode: String,
    pub dimension: usize,
    pub seed: u64,
    pub epsilons: EpsilonsDoc,
    #[serde(rename = "box")]
    pub bbox: f64,
    pub order_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDoc {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
    /// Labels of the nonempty cells.
    pub cells: Vec<Vec<usize>>,
    pub meta: MetaDoc,
}

fn ids(s: &BTreeSet<usize>) -> Vec<usize> {
    s.iter().copied().collect()
}

impl DiagramDoc {
    pub fn from_extremal(g: &GeneralizedDiagram, meta: MetaDoc) -> Self {
        Self {
            vertices: g
                .vertices
                .iter()
                .enumerate()
                .map(|(id, v)| VertexDoc {
                    id,
                    center: v.center.clone(),
                    radius: Some(v.radius),
                    value: None,
                    tight_sites: ids(&v.tight_sites),
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    v0: e.endpoints[0].into(),
                    v1: e.endpoints[1].into(),
                    sites: ids(&e.defining_sites),
                    polyline: e.sample_polyline.clone(),
                    radii: e.sample_radii.clone(),
                })
                .collect(),
            cells: g.cells.iter().map(|&c| vec![c]).collect(),
            meta,
        }
    }

    pub fn from_affine(md: &MinimizationDiagram, meta: MetaDoc) -> Self {
        let vertex = |(id, v): (usize, &MdVertex)| VertexDoc {
            id,
            center: v.point.clone(),
            radius: None,
            value: Some(v.value),
            tight_sites: ids(&v.minimizers),
        };
        Self {
            vertices: md.vertices.iter().enumerate().map(vertex).collect(),
            edges: md
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    v0: e.endpoints[0].into(),
                    v1: e.endpoints[1].into(),
                    sites: ids(&e.indices),
                    polyline: e.polyline.clone(),
                    radii: Vec::new(),
                })
                .collect(),
            cells: md.cells.iter().map(ids).collect(),
            meta,
        }
    }
}

/// Compact JSON with every float written to 17 significant digits.
struct FixedFloats;

impl serde_json::ser::Formatter for FixedFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json(doc: &DiagramDoc) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    doc.serialize(&mut ser).expect("serializing to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn from_json(text: &str) -> Result<DiagramDoc> {
    serde_json::from_str(text).map_err(|e| GvdError::Parse(format!("diagram JSON: {e}")))
}

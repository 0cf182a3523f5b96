//! JSON problem and solution files.
//!
//! A problem file holds `m`, `n`, the CSC arrays of `A`, `b`, `c` and the cone
//! dimensions `{z, l, q, s}`. Floats are written in shortest round-trip form,
//! so reading a written file reproduces every `f64` bit for bit.

use crate::cones::ConeSpec;
use crate::linalg::SparseMatrix;
use crate::problem::{ProblemData, ProblemError};
use crate::solver::{Solution, Status, WarmStart};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed member `{member}`: {message}")]
    Parse { member: String, message: String },
    #[error("invalid member `{member}`: {message}")]
    Invalid { member: String, message: String },
}

impl IoError {
    /// The JSON member the error refers to, if any.
    pub fn member(&self) -> Option<&str> {
        match self {
            IoError::Parse { member, .. } | IoError::Invalid { member, .. } => Some(member),
            IoError::Io { .. } => None,
        }
    }

    fn invalid(member: &str, message: impl Into<String>) -> Self {
        IoError::Invalid { member: member.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CscFile {
    pub colptr: Vec<usize>,
    pub rowidx: Vec<usize>,
    pub vals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeFile {
    #[serde(default)]
    pub z: usize,
    #[serde(default)]
    pub l: usize,
    #[serde(default)]
    pub q: Vec<usize>,
    #[serde(default)]
    pub s: Vec<usize>,
}

impl From<&ConeSpec> for ConeFile {
    fn from(c: &ConeSpec) -> Self {
        ConeFile { z: c.zero, l: c.nonneg, q: c.soc.clone(), s: c.psd.clone() }
    }
}

impl From<&ConeFile> for ConeSpec {
    fn from(c: &ConeFile) -> Self {
        ConeSpec { zero: c.z, nonneg: c.l, soc: c.q.clone(), psd: c.s.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: CscFile,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub cone: ConeFile,
}

impl From<&ProblemData> for ProblemFile {
    fn from(d: &ProblemData) -> Self {
        ProblemFile {
            m: d.m(),
            n: d.n(),
            a: CscFile { colptr: d.a.colptr().to_vec(), rowidx: d.a.rowidx().to_vec(), vals: d.a.vals().to_vec() },
            b: d.b.clone(),
            c: d.c.clone(),
            cone: ConeFile::from(&d.cone),
        }
    }
}

impl ProblemFile {
    /// Validates the file and builds the problem, naming the first bad member.
    pub fn to_problem(&self) -> Result<ProblemData, IoError> {
        let (m, n) = (self.m, self.n);
        if self.a.colptr.len() != n + 1 {
            return Err(IoError::invalid("A.colptr", format!("length {} but n + 1 = {}", self.a.colptr.len(), n + 1)));
        }
        if self.a.rowidx.len() != self.a.vals.len() {
            return Err(IoError::invalid(
                "A.rowidx",
                format!("length {} differs from A.vals length {}", self.a.rowidx.len(), self.a.vals.len()),
            ));
        }
        let a = SparseMatrix::new(m, n, self.a.colptr.clone(), self.a.rowidx.clone(), self.a.vals.clone())
            .map_err(|e| IoError::invalid("A", e.to_string()))?;
        let data = ProblemData { a, b: self.b.clone(), c: self.c.clone(), cone: ConeSpec::from(&self.cone) };
        data.validate().map_err(|e| {
            let member = match &e {
                ProblemError::BLength { .. } => "b",
                ProblemError::CLength { .. } => "c",
                ProblemError::ConeDim { .. } | ProblemError::Cone(_) => "cone",
                ProblemError::NonFinite(name) => name,
            };
            IoError::invalid(member, e.to_string())
        })?;
        Ok(data)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InfoFile {
    pub iters: usize,
    #[serde(default)]
    pub pri_res: Option<f64>,
    #[serde(default)]
    pub dual_res: Option<f64>,
    #[serde(default)]
    pub gap: Option<f64>,
    pub solve_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup_time_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
}

/// A solver result on disk. `certificate` holds `ŷ` for infeasible problems
/// and `x̂` for unbounded ones; when both are reported `certificate` is `ŷ`
/// and `certificate_x` is `x̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_x: Option<Vec<f64>>,
    pub info: InfoFile,
}

impl From<&Solution> for SolutionFile {
    fn from(sol: &Solution) -> Self {
        let (certificate, certificate_x) = match sol.status {
            Status::Infeasible => (sol.infeasibility_cert.clone(), None),
            Status::Unbounded => (sol.unboundedness_cert.clone(), None),
            Status::InfeasibleAndUnbounded => (sol.infeasibility_cert.clone(), sol.unboundedness_cert.clone()),
            _ => (None, None),
        };
        let finite = |v: Option<f64>| v.filter(|x| x.is_finite());
        SolutionFile {
            status: sol.status.as_str().to_string(),
            x: sol.x.clone(),
            y: sol.y.clone(),
            s: sol.s.clone(),
            certificate,
            certificate_x,
            info: InfoFile {
                iters: sol.info.iterations,
                pri_res: finite(sol.info.pri_res),
                dual_res: finite(sol.info.dual_res),
                gap: finite(sol.info.gap),
                solve_time_ms: sol.info.solve_time.as_secs_f64() * 1e3,
                setup_time_ms: Some(sol.info.setup_time.as_secs_f64() * 1e3),
                objective: finite(sol.objective()),
            },
        }
    }
}

impl SolutionFile {
    pub fn status(&self) -> Result<Status, IoError> {
        Status::parse(&self.status).ok_or_else(|| IoError::invalid("status", format!("unknown status `{}`", self.status)))
    }

    /// `(x, y, s)` when all three are present.
    pub fn warm_start(&self) -> Option<WarmStart> {
        Some(WarmStart { x: self.x.clone()?, y: self.y.clone()?, s: self.s.clone()? })
    }
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let member = if path == "." { "<root>".to_string() } else { path };
        IoError::Parse { member, message: e.into_inner().to_string() }
    })
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub fn problem_from_str(text: &str) -> Result<ProblemData, IoError> {
    parse::<ProblemFile>(text)?.to_problem()
}

pub fn problem_to_string(data: &ProblemData) -> String {
    let mut s = serde_json::to_string(&ProblemFile::from(data)).expect("problem data serializes");
    s.push('\n');
    s
}

pub fn read_problem(path: &Path) -> Result<ProblemData, IoError> {
    problem_from_str(&read(path)?)
}

pub fn write_problem(path: &Path, data: &ProblemData) -> Result<(), IoError> {
    write(path, &problem_to_string(data))
}

pub fn solution_from_str(text: &str) -> Result<SolutionFile, IoError> {
    let file: SolutionFile = parse(text)?;
    file.status()?;
    Ok(file)
}

pub fn solution_to_string(file: &SolutionFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("solution serializes");
    s.push('\n');
    s
}

pub fn read_solution(path: &Path) -> Result<SolutionFile, IoError> {
    solution_from_str(&read(path)?)
}

pub fn write_solution(path: &Path, file: &SolutionFile) -> Result<(), IoError> {
    write(path, &solution_to_string(file))
}

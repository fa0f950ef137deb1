use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::problem::DualLayout;
use crate::scalar::{ExtReal, Scalar};

use super::schedule::DelaySchedule;
use super::EngineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sync,
    Async,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIters,
}

/// What a run keeps per iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecordLevel {
    /// Every dual vector.
    Full,
    /// Objective values and step norms only; `lambda(0)` and the final
    /// point are always kept.
    Scalars,
}

/// Everything needed to reproduce and check a run; written as the JSON
/// sidecar of a trace CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub instance_hash: String,
    pub mode: Mode,
    pub schedule: DelaySchedule,
    pub prng: Option<String>,
    pub n_agents: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub h: f64,
    pub step_sizes: Vec<f64>,
    pub tol: Option<f64>,
    pub max_iters: usize,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub messages_total: usize,
    pub psi_star: f64,
    pub psi_star_source: String,
    pub step_condition_overridden: bool,
}

/// Record `k` holds `lambda(k)`, `Psi(lambda(k))` and the step that
/// produced it, `lambda(k) - lambda(k-1)` (zero for `k = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace<T> {
    pub layout: DualLayout,
    pub psi: Vec<ExtReal<T>>,
    pub step_norm_inf: Vec<T>,
    /// `|lambda_i(k) - lambda_i(k-1)|^2`, `N` entries per record.
    pub agent_step_sq: Vec<T>,
    /// Read instant used to produce record `k` (`0` for `k = 0`).
    pub tau: Vec<usize>,
    pub messages: Vec<usize>,
    /// Flattened dual vectors when recorded in full.
    pub lambdas: Option<Vec<T>>,
    pub lambda0: Vec<T>,
    pub lambda_final: Vec<T>,
    pub meta: TraceMeta,
}

impl<T: Scalar> IterationTrace<T> {
    /// Number of records, `K + 1`.
    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// Number of completed iterations `K`.
    pub fn iterations(&self) -> usize {
        self.len().saturating_sub(1)
    }

    pub fn psi_star(&self) -> T {
        T::lit(self.meta.psi_star)
    }

    /// `epsilon(k) = Psi(lambda(k)) - Psi*`.
    pub fn epsilon(&self, k: usize) -> ExtReal<T> {
        self.psi[k].minus(self.psi_star())
    }

    pub fn final_psi(&self) -> ExtReal<T> {
        *self.psi.last().expect("trace has at least one record")
    }

    pub fn lambda(&self, k: usize) -> Option<&[T]> {
        let len = self.layout.len();
        self.lambdas.as_ref().map(|l| &l[k * len..(k + 1) * len])
    }

    /// `|lambda_i(k) - lambda_i(k-1)|^2`.
    pub fn agent_step_sq(&self, k: usize, i: usize) -> T {
        self.agent_step_sq[k * self.layout.n + i]
    }

    /// `|lambda(k) - lambda(k-1)|^2`, summed over agents in order.
    pub fn step_sq(&self, k: usize) -> T {
        let n = self.layout.n;
        self.agent_step_sq[k * n..(k + 1) * n]
            .iter()
            .fold(T::zero(), |a, &b| a + b)
    }

    /// First record at which `epsilon <= eps`, if any.
    pub fn first_below(&self, eps: T) -> Option<usize> {
        (0..self.len()).find(|&k| matches!(self.epsilon(k), ExtReal::Finite(e) if e <= eps))
    }

    fn column_names(&self) -> Vec<String> {
        let lay = self.layout;
        let mut cols: Vec<String> = ["k", "psi", "epsilon", "step_norm_inf"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for i in 0..lay.n {
            for r in 0..lay.b {
                cols.push(format!("theta_{i}_{r}"));
            }
        }
        for i in 0..lay.n {
            for r in 0..lay.m {
                cols.push(format!("mu_{i}_{r}"));
            }
        }
        cols
    }

    /// Writes `<stem>.csv` and `<stem>.meta.json` under `dir`. Requires a
    /// fully recorded trace.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), EngineError> {
        let lambdas = self.lambdas.as_ref().ok_or_else(|| {
            EngineError::InvalidConfig("only fully recorded traces can be written".into())
        })?;
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let meta_path = dir.join(format!("{stem}.meta.json"));
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| EngineError::Io(e.to_string()))?;
        w.write_record(self.column_names())
            .map_err(|e| EngineError::Io(e.to_string()))?;
        let len = self.layout.len();
        let mut row = Vec::with_capacity(4 + len);
        for k in 0..self.len() {
            row.clear();
            row.push(k.to_string());
            row.push(fmt_ext(self.psi[k]));
            row.push(fmt_ext(self.epsilon(k)));
            row.push(fmt_num(self.step_norm_inf[k]));
            for &v in &lambdas[k * len..(k + 1) * len] {
                row.push(fmt_num(v));
            }
            w.write_record(&row).map_err(|e| EngineError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| io_err(&csv_path, e))?;
        let meta = serde_json::to_string_pretty(&self.meta).expect("metadata serializes");
        std::fs::write(&meta_path, meta).map_err(|e| io_err(&meta_path, e))?;
        Ok((csv_path, meta_path))
    }
}

fn io_err(p: &Path, e: std::io::Error) -> EngineError {
    EngineError::Io(format!("{}: {e}", p.display()))
}

/// Shortest decimal that parses back to the same value.
pub fn fmt_num<T: Scalar>(v: T) -> String {
    let a = v.abs();
    let mut s = String::new();
    if v == T::zero() || (a >= T::lit(1e-5) && a < T::lit(1e16)) || !v.is_finite() {
        write!(s, "{v}").unwrap();
    } else {
        write!(s, "{v:e}").unwrap();
    }
    s
}

fn fmt_ext<T: Scalar>(v: ExtReal<T>) -> String {
    match v {
        ExtReal::Finite(x) => fmt_num(x),
        ExtReal::PosInf => "inf".into(),
    }
}

fn parse_ext(s: &str, k: usize, col: &str) -> Result<ExtReal<f64>, EngineError> {
    if s == "inf" {
        return Ok(ExtReal::PosInf);
    }
    parse_num(s, k, col).map(ExtReal::Finite)
}

fn parse_num(s: &str, k: usize, col: &str) -> Result<f64, EngineError> {
    s.parse()
        .map_err(|_| EngineError::MalformedTrace(format!("row {k}, column {col}: cannot parse {s:?}")))
}

/// Path of the metadata sidecar for a trace CSV.
pub fn meta_path_for(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("trace");
    csv.with_file_name(format!("{stem}.meta.json"))
}

/// Reads a trace CSV and its sidecar back into a fully recorded trace.
pub fn read_trace(csv_path: &Path) -> Result<IterationTrace<f64>, EngineError> {
    let meta_path = meta_path_for(csv_path);
    let meta_text = std::fs::read_to_string(&meta_path).map_err(|e| io_err(&meta_path, e))?;
    let meta: TraceMeta = serde_json::from_str(&meta_text)
        .map_err(|e| EngineError::MalformedTrace(format!("{}: {e}", meta_path.display())))?;
    let layout = DualLayout {
        n: meta.n_agents,
        m: meta.m,
        b: meta.b,
    };
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(csv_path, io),
        other => EngineError::MalformedTrace(format!("{other:?}")),
    })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| EngineError::MalformedTrace(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let len = layout.len();
    let mut psi = Vec::new();
    let mut step_norm_inf = Vec::new();
    let mut lambdas = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| EngineError::MalformedTrace(e.to_string()))?;
        if rec.len() != header.len() {
            return Err(EngineError::MalformedTrace(format!(
                "row {k} has {} fields, header has {}",
                rec.len(),
                header.len()
            )));
        }
        let kk: usize = rec[0]
            .parse()
            .map_err(|_| EngineError::MalformedTrace(format!("row {k}: bad index {:?}", &rec[0])))?;
        if kk != k {
            return Err(EngineError::MalformedTrace(format!("row {k} is labelled {kk}")));
        }
        psi.push(parse_ext(&rec[1], k, "psi")?);
        step_norm_inf.push(parse_num(&rec[3], k, "step_norm_inf")?);
        for (c, s) in rec.iter().enumerate().skip(4) {
            lambdas.push(parse_num(s, k, &header[c])?);
        }
    }
    let rows = psi.len();
    let expected_header = {
        let stub = IterationTrace::<f64> {
            layout,
            psi: vec![],
            step_norm_inf: vec![],
            agent_step_sq: vec![],
            tau: vec![],
            messages: vec![],
            lambdas: None,
            lambda0: vec![],
            lambda_final: vec![],
            meta: meta.clone(),
        };
        stub.column_names()
    };
    if header != expected_header {
        return Err(EngineError::MalformedTrace(
            "header does not match the layout in the metadata".into(),
        ));
    }
    if rows != meta.iterations + 1 {
        return Err(EngineError::MalformedTrace(format!(
            "{rows} rows, metadata promises {}",
            meta.iterations + 1
        )));
    }
    let mut agent_step_sq = vec![0.0; rows * layout.n];
    for k in 1..rows {
        let (prev, cur) = (&lambdas[(k - 1) * len..k * len], &lambdas[k * len..(k + 1) * len]);
        for i in 0..layout.n {
            let mut s = 0.0;
            for r in layout.theta(i).chain(layout.mu(i)) {
                let d = cur[r] - prev[r];
                s += d * d;
            }
            agent_step_sq[k * layout.n + i] = s;
        }
    }
    let tau = (0..rows)
        .map(|k| if k == 0 { 0 } else { effective_schedule(&meta).tau(k - 1) })
        .collect();
    Ok(IterationTrace {
        layout,
        psi,
        step_norm_inf,
        agent_step_sq,
        tau,
        messages: vec![0; rows],
        lambda0: lambdas[..len].to_vec(),
        lambda_final: lambdas[(rows - 1) * len..].to_vec(),
        lambdas: Some(lambdas),
        meta,
    })
}

/// Synchronous runs read the current state.
pub(crate) fn effective_schedule(meta: &TraceMeta) -> DelaySchedule {
    match meta.mode {
        Mode::Sync => DelaySchedule::zero(0),
        Mode::Async => meta.schedule,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, -2.5, 1e-7, 756.530_412_345_678_9, 1e300, -3.2e-320, 0.1 + 0.2] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1e-7), "1e-7");
        let f: f32 = 0.1;
        assert_eq!(fmt_num(f).parse::<f32>().unwrap(), f);
    }
}

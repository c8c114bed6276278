//! Discrete-time trajectories over named channels.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("empty-trace: a trace needs at least one sample")]
    Empty,
    #[error("length-mismatch: {times} times but {states} states")]
    LengthMismatch { times: usize, states: usize },
    #[error("not-increasing: time {index} does not exceed its predecessor")]
    NotIncreasing { index: usize },
    #[error("width-mismatch: sample {index} has {got} values, expected {expected}")]
    WidthMismatch { index: usize, got: usize, expected: usize },
    #[error("non-finite: sample {index}")]
    NonFinite { index: usize },
    #[error("bad-header: {0}")]
    BadHeader(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

/// Sample times (strictly increasing) and one state vector per time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    channels: Vec<String>,
}

impl Trace {
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>, channels: Vec<String>) -> Result<Self, TraceError> {
        if times.is_empty() {
            return Err(TraceError::Empty);
        }
        if times.len() != states.len() {
            return Err(TraceError::LengthMismatch { times: times.len(), states: states.len() });
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(TraceError::NotIncreasing { index: i + 1 });
            }
        }
        let width = channels.len();
        for (i, s) in states.iter().enumerate() {
            if s.len() != width {
                return Err(TraceError::WidthMismatch { index: i, got: s.len(), expected: width });
            }
            if !times[i].is_finite() || s.iter().any(|v| !v.is_finite()) {
                return Err(TraceError::NonFinite { index: i });
            }
        }
        Ok(Trace { times, states, channels })
    }

    /// Trace sampled at `t0, t0 + dt, ...` with channels `x1..xD`.
    pub fn uniform(t0: f64, dt: f64, states: Vec<Vec<f64>>) -> Result<Self, TraceError> {
        let width = states.first().map_or(0, Vec::len);
        let times = (0..states.len()).map(|k| t0 + dt * k as f64).collect();
        Self::new(times, states, default_channels(width))
    }

    /// Single-channel trace `x1`, unit step from t = 0.
    pub fn scalar(values: &[f64]) -> Result<Self, TraceError> {
        Self::uniform(0.0, 1.0, values.iter().map(|&v| vec![v]).collect())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k]
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }

    /// True when all steps agree with the first to 1e-9 relative.
    pub fn is_uniform(&self) -> bool {
        if self.times.len() < 3 {
            return true;
        }
        let dt = self.times[1] - self.times[0];
        self.times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0))
    }

    /// Indices `j >= k` with `times[j] - times[k]` inside `[lo, hi]`,
    /// truncated at the end of the trace. Endpoints are matched with a 1e-9
    /// slack, which on a uniform grid is `ceil(lo/dt) ..= floor(hi/dt)`.
    pub fn window(&self, k: usize, lo: f64, hi: f64) -> std::ops::Range<usize> {
        const SLACK: f64 = 1e-9;
        let t = self.times[k];
        let start = k + self.times[k..].partition_point(|&s| s - t < lo - SLACK);
        let end = k + self.times[k..].partition_point(|&s| s - t <= hi + SLACK);
        start..end.max(start)
    }

    /// Reads `t,x1,..,xD` CSV (header required; channel names taken from it).
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self, TraceError> {
        let rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        Self::from_csv_reader(rdr)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, TraceError> {
        let rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        Self::from_csv_reader(rdr)
    }

    fn from_csv_reader<R: std::io::Read>(mut rdr: csv::Reader<R>) -> Result<Self, TraceError> {
        let header = rdr.headers()?.clone();
        if header.is_empty() || &header[0] != "t" {
            return Err(TraceError::BadHeader("first column must be `t`".into()));
        }
        let channels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut times = Vec::new();
        let mut states = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| TraceError::Parse(format!("{f:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let (t, rest) = vals.split_first().ok_or_else(|| TraceError::Parse("empty row".into()))?;
            times.push(*t);
            states.push(rest.to_vec());
        }
        Self::new(times, states, channels)
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["t".to_string()];
        header.extend(self.channels.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![t.to_string()];
            row.extend(s.iter().map(f64::to_string));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }
}

pub fn default_channels(width: usize) -> Vec<String> {
    (1..=width).map(|i| format!("x{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_rounds_inward() {
        let tr = Trace::scalar(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(tr.window(0, 0.0, 2.0), 0..3);
        assert_eq!(tr.window(1, 0.5, 2.5), 2..4);
        assert_eq!(tr.window(3, 0.0, 10.0), 3..5);
        assert!(tr.window(4, 1.0, 2.0).is_empty());
    }

    #[test]
    fn csv_roundtrip() {
        let tr = Trace::uniform(0.0, 0.5, vec![vec![1.0, -2.5], vec![0.1, 3.0]]).unwrap();
        let back = Trace::from_csv_str(&tr.to_csv_string()).unwrap();
        assert_eq!(back, tr);
    }

    #[test]
    fn rejects_bad_traces() {
        assert!(matches!(Trace::new(vec![], vec![], vec![]), Err(TraceError::Empty)));
        assert!(matches!(
            Trace::new(vec![0.0, 0.0], vec![vec![], vec![]], vec![]),
            Err(TraceError::NotIncreasing { index: 1 })
        ));
        assert!(matches!(Trace::from_csv_str("x,y\n1,2\n"), Err(TraceError::BadHeader(_))));
    }
}

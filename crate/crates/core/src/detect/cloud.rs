//! Finite point clouds in R^D with the Euclidean metric.

use std::path::Path;

use super::DetectError;

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    n: usize,
    d: usize,
    /// Row-major N x D.
    data: Vec<f64>,
}

/// Euclidean distance. Every neighbourhood query goes through this one
/// function so that different search structures agree bit for bit.
#[inline]
pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let t = a[k] - b[k];
        s += t * t;
    }
    s.sqrt()
}

impl PointCloud {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self, DetectError> {
        if n == 0 || d == 0 {
            return Err(DetectError::EmptyCloud);
        }
        if data.len() != n * d {
            return Err(DetectError::WidthMismatch { row: data.len() / d, got: data.len() % d, expected: d });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(DetectError::NonFinite { row: i / d });
        }
        Ok(PointCloud { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DetectError> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(DetectError::WidthMismatch { row, got: r.len(), expected: d });
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        euclid(self.point(i), self.point(j))
    }

    pub fn check_index(&self, i: usize) -> Result<(), DetectError> {
        if i >= self.n {
            return Err(DetectError::IndexOutOfRange { index: i, len: self.n });
        }
        Ok(())
    }

    /// Applies `f` to every point; `f` must return rows of one width.
    pub fn map_points<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Result<Self, DetectError> {
        Self::from_rows(&self.points().map(f).collect::<Vec<_>>())
    }

    pub fn scaled(&self, c: f64) -> Self {
        PointCloud { n: self.n, d: self.d, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// CSV with header `x1..xD`, plus a trailing `label` column when given.
    pub fn to_csv_string(&self, labels: Option<&[String]>) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (1..=self.d).map(|k| format!("x{k}")).collect();
        if labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header).expect("in-memory write");
        for (i, p) in self.points().enumerate() {
            let mut row: Vec<String> = p.iter().map(f64::to_string).collect();
            if let Some(l) = labels {
                row.push(l[i].clone());
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P, labels: Option<&[String]>) -> Result<(), DetectError> {
        std::fs::write(path, self.to_csv_string(labels))?;
        Ok(())
    }

    /// Reads `x1..xD[,label]`. Any non-numeric column named `label` is
    /// returned separately; other columns must be numeric. Lines starting
    /// with `#` are skipped.
    pub fn from_csv_str(text: &str) -> Result<(Self, Option<Vec<String>>), DetectError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        let label_col = header.iter().position(|h| h == "label");
        let index_col = header.iter().position(|h| h == "index");
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = Vec::with_capacity(rec.len());
            for (c, field) in rec.iter().enumerate() {
                if Some(c) == label_col {
                    labels.push(field.to_string());
                } else if Some(c) != index_col {
                    row.push(field.parse::<f64>().map_err(|e| DetectError::Parse(format!("row {r}: {field:?}: {e}")))?);
                }
            }
            rows.push(row);
        }
        Ok((Self::from_rows(&rows)?, label_col.map(|_| labels)))
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<(Self, Option<Vec<String>>), DetectError> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// Rows keyed by point index: header `index,<prefix>1..<prefix>m`, with
/// optional leading `# key=value` comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedTable {
    pub index: Vec<usize>,
    pub values: PointCloud,
    pub comments: Vec<(String, String)>,
}

impl IndexedTable {
    pub fn new(index: Vec<usize>, values: PointCloud) -> Self {
        IndexedTable { index, values, comments: Vec::new() }
    }

    /// Identity index `0..n`.
    pub fn sequential(values: PointCloud) -> Self {
        Self::new((0..values.len()).collect(), values)
    }

    pub fn with_comment(mut self, key: &str, value: String) -> Self {
        self.comments.push((key.to_string(), value));
        self
    }

    pub fn comment(&self, key: &str) -> Option<&str> {
        self.comments.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv_string(&self, prefix: &str) -> String {
        let mut out = String::new();
        for (k, v) in &self.comments {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index".to_string()];
        header.extend((1..=self.values.dim()).map(|k| format!("{prefix}{k}")));
        w.write_record(&header).expect("in-memory write");
        for (i, p) in self.index.iter().zip(self.values.points()) {
            let mut row = vec![i.to_string()];
            row.extend(p.iter().map(f64::to_string));
            w.write_record(&row).expect("in-memory write");
        }
        out.push_str(std::str::from_utf8(&w.into_inner().expect("flush")).expect("utf8"));
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DetectError> {
        let comments = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.trim_start_matches('#').trim().split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("index") {
            return Err(DetectError::Parse("first column must be `index`".into()));
        }
        let (mut index, mut rows) = (Vec::new(), Vec::new());
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |c: usize| rec.get(c).unwrap_or("");
            index.push(field(0).parse::<usize>().map_err(|e| DetectError::Parse(format!("row {r}: index: {e}")))?);
            let row = (1..rec.len())
                .map(|c| field(c).parse::<f64>().map_err(|e| DetectError::Parse(format!("row {r}: {:?}: {e}", field(c)))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(IndexedTable { index, values: PointCloud::from_rows(&rows)?, comments })
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self, DetectError> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// `index,label` CSV of integer labels.
pub fn labels_to_csv(labels: &[usize]) -> String {
    let mut out = String::from("index,label\n");
    for (i, l) in labels.iter().enumerate() {
        out.push_str(&format!("{i},{l}\n"));
    }
    out
}

pub fn labels_from_csv(text: &str) -> Result<Vec<usize>, DetectError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let col = header.iter().position(|h| h == "label").ok_or_else(|| DetectError::Parse("no `label` column".into()))?;
    rdr.records()
        .enumerate()
        .map(|(r, rec)| {
            let rec = rec?;
            let f = rec.get(col).unwrap_or("");
            f.parse::<usize>().map_err(|e| DetectError::Parse(format!("row {r}: {f:?}: {e}")))
        })
        .collect()
}

/// A generated cloud with its ground truth.
#[derive(Debug, Clone)]
pub struct LabeledCloud {
    pub cloud: PointCloud,
    /// Stratum name per point.
    pub labels: Vec<String>,
    /// Dimension of the stratum each point was drawn from.
    pub dims: Vec<u8>,
    /// Named probe points and their row indices.
    pub probes: Vec<(String, usize)>,
    /// Ground-truth intrinsic coordinate per point (arc length, angle),
    /// empty when the space has none.
    pub intrinsic: Vec<f64>,
}

impl LabeledCloud {
    pub fn probe(&self, name: &str) -> Option<usize> {
        self.probes.iter().find(|(n, _)| n == name).map(|(_, i)| *i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_with_labels() {
        let pc = PointCloud::from_rows(&[vec![0.1, -2.0], vec![3.5, 1e-7]]).unwrap();
        let labels = vec!["room".to_string(), "corridor".to_string()];
        let text = pc.to_csv_string(Some(&labels));
        let (back, l) = PointCloud::from_csv_str(&text).unwrap();
        assert_eq!(back, pc);
        assert_eq!(l.unwrap(), labels);
        let (back, l) = PointCloud::from_csv_str(&pc.to_csv_string(None)).unwrap();
        assert_eq!(back, pc);
        assert!(l.is_none());
    }

    #[test]
    fn rejects_bad_clouds() {
        assert!(matches!(PointCloud::from_rows(&[]), Err(DetectError::EmptyCloud)));
        assert!(matches!(PointCloud::from_rows(&[vec![1.0], vec![f64::NAN]]), Err(DetectError::NonFinite { row: 1 })));
        assert!(matches!(
            PointCloud::from_rows(&[vec![1.0], vec![1.0, 2.0]]),
            Err(DetectError::WidthMismatch { row: 1, .. })
        ));
    }

    #[test]
    fn indexed_tables_roundtrip() {
        let values = PointCloud::from_rows(&[vec![0.1, -2.5e-7], vec![1.0 / 3.0, 7.0]]).unwrap();
        let t = IndexedTable::new(vec![4, 9], values).with_comment("log_radii", "0.5;1".into());
        let text = t.to_csv_string("v");
        assert!(text.starts_with("# log_radii=0.5;1\nindex,v1,v2\n"));
        let back = IndexedTable::from_csv_str(&text).unwrap();
        assert_eq!(back, t);
        // the plain reader skips the index column
        let (pc, _) = PointCloud::from_csv_str(&text).unwrap();
        assert_eq!(pc, t.values);
        let labels = vec![2, 0, 1];
        assert_eq!(labels_from_csv(&labels_to_csv(&labels)).unwrap(), labels);
    }
}

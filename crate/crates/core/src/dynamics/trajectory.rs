use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matcore::Mat;

/// Uniformly sampled trajectory: `L + 1` states and outputs, `L` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryData {
    /// Sampling time, seconds.
    pub dt: f64,
    pub states: Mat,
    pub inputs: Mat,
    pub outputs: Mat,
    pub state_labels: Vec<String>,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
    /// Free-form provenance (resolved run config), written as a CSV comment.
    pub provenance: Option<String>,
}

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

impl TrajectoryData {
    pub fn new(dt: f64, states: Mat, inputs: Mat, outputs: Mat) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("sampling time must be positive, got {dt}")));
        }
        let steps = inputs.rows();
        if steps < 1 {
            return Err(Error::InvalidParameter("trajectory needs at least one step".into()));
        }
        if states.rows() != steps + 1 || outputs.rows() != steps + 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} states, {} outputs, {} inputs (need L+1, L+1, L)",
                states.rows(),
                outputs.rows(),
                steps
            )));
        }
        if !(states.is_finite() && inputs.is_finite() && outputs.is_finite()) {
            return Err(Error::InvalidParameter("trajectory has non-finite samples".into()));
        }
        Ok(Self {
            dt,
            state_labels: labels("x", states.cols()),
            input_labels: labels("u", inputs.cols()),
            output_labels: labels("y", outputs.cols()),
            states,
            inputs,
            outputs,
            provenance: None,
        })
    }

    /// Number of sampling intervals `L`.
    pub fn steps(&self) -> usize {
        self.inputs.rows()
    }

    pub fn state_dim(&self) -> usize {
        self.states.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.outputs.cols()
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = Some(provenance.into());
        self
    }

    /// Writes `# T=<dt>` and the `t,x..,u..,y..` table. Input cells on the
    /// final row are empty.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if let Some(p) = &self.provenance {
            for line in p.lines() {
                writeln!(w, "# config={line}")?;
            }
        }
        writeln!(w, "# T={}", fmt_num(self.dt))?;
        let header: Vec<&str> = std::iter::once("t")
            .chain(self.state_labels.iter().map(String::as_str))
            .chain(self.input_labels.iter().map(String::as_str))
            .chain(self.output_labels.iter().map(String::as_str))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        let steps = self.steps();
        let mut line = String::new();
        for j in 0..=steps {
            line.clear();
            line.push_str(&fmt_num(self.time(j)));
            for v in self.states.row(j) {
                line.push(',');
                line.push_str(&fmt_num(*v));
            }
            for c in 0..self.input_dim() {
                line.push(',');
                if j < steps {
                    line.push_str(&fmt_num(self.inputs[(j, c)]));
                }
            }
            for v in self.outputs.row(j) {
                line.push(',');
                line.push_str(&fmt_num(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut dt = None;
        let mut provenance = Vec::new();
        let mut body = String::new();
        for line in r.lines() {
            let line = line?;
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("T=") {
                    dt = Some(v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad T line: {e}")))?);
                } else if let Some(v) = rest.strip_prefix("config=") {
                    provenance.push(v.to_string());
                }
                continue;
            }
            if trimmed.is_empty() {
                continue;
            }
            body.push_str(trimmed);
            body.push('\n');
        }
        let dt = dt.ok_or_else(|| Error::Parse("missing '# T=<value>' line".into()))?;

        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if header.first().map(String::as_str) != Some("t") {
            return Err(Error::Parse("first column must be 't'".into()));
        }
        let pick = |p: char| -> Vec<usize> {
            header
                .iter()
                .enumerate()
                .filter(|(_, h)| h.starts_with(p) && h[1..].parse::<usize>().is_ok())
                .map(|(i, _)| i)
                .collect()
        };
        let (xs, us, ys) = (pick('x'), pick('u'), pick('y'));
        if xs.is_empty() {
            return Err(Error::Parse("no state columns".into()));
        }
        let rows: Vec<csv::StringRecord> = rdr.records().collect::<std::result::Result<_, _>>()?;
        if rows.len() < 2 {
            return Err(Error::Parse("trajectory needs at least two samples".into()));
        }
        let steps = rows.len() - 1;
        let cell = |rec: &csv::StringRecord, i: usize, j: usize| -> Result<f64> {
            let s = rec.get(i).unwrap_or("").trim();
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {j}, column '{}': cannot parse '{s}'", header[i])))
        };
        let mut states = Mat::zeros(steps + 1, xs.len());
        let mut inputs = Mat::zeros(steps, us.len());
        let mut outputs = Mat::zeros(steps + 1, ys.len());
        for (j, rec) in rows.iter().enumerate() {
            for (c, &i) in xs.iter().enumerate() {
                states[(j, c)] = cell(rec, i, j)?;
            }
            for (c, &i) in ys.iter().enumerate() {
                outputs[(j, c)] = cell(rec, i, j)?;
            }
            if j < steps {
                for (c, &i) in us.iter().enumerate() {
                    inputs[(j, c)] = cell(rec, i, j)?;
                }
            }
        }
        let mut traj = Self::new(dt, states, inputs, outputs)?;
        traj.state_labels = xs.iter().map(|&i| header[i].clone()).collect();
        traj.input_labels = us.iter().map(|&i| header[i].clone()).collect();
        traj.output_labels = ys.iter().map(|&i| header[i].clone()).collect();
        if !provenance.is_empty() {
            traj.provenance = Some(provenance.join("\n"));
        }
        Ok(traj)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_csv(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// 17 significant digits, enough to round-trip an f64.
pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::chart::IsothermalChart;
use crate::error::{Error, Result};

pub const CHART_FORMAT_VERSION: u32 = 1;
pub const BINARY_MAGIC: &[u8; 4] = b"ISOF";
/// Per-node fields of the binary sidecar, in column order.
pub const BINARY_FIELDS: [&str; 7] = ["x", "y", "green", "conjugate", "z_re", "z_im", "phi"];

/// Serializable chart. G is `null` at the pole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartExport {
    pub version: u32,
    pub metric: String,
    pub delta: f64,
    pub declared_kappa: f64,
    pub h: f64,
    pub pole: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub boundary: Vec<bool>,
    pub boundary_loop: Vec<usize>,
    pub green: Vec<Option<f64>>,
    pub conjugate: Vec<f64>,
    pub z_re: Vec<f64>,
    pub z_im: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ChartExport {
    pub fn from_chart(chart: &IsothermalChart) -> Self {
        let m = &chart.mesh;
        Self {
            version: CHART_FORMAT_VERSION,
            metric: chart.metric.to_string(),
            delta: chart.delta,
            declared_kappa: chart.declared_kappa,
            h: m.h,
            pole: chart.green.pole,
            x: m.positions.iter().map(|p| p.re).collect(),
            y: m.positions.iter().map(|p| p.im).collect(),
            boundary: (0..m.len()).map(|k| m.is_boundary(k)).collect(),
            boundary_loop: m.boundary_loop.clone(),
            green: chart.green.values.iter().map(|g| g.is_finite().then_some(*g)).collect(),
            conjugate: chart.conjugate.values.clone(),
            z_re: chart.map_z.iter().map(|z| z.re).collect(),
            z_im: chart.map_z.iter().map(|z| z.im).collect(),
            phi: chart.factor_phi.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CHART_FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported chart version {}", self.version)));
        }
        let n = self.len();
        let lens = [
            self.y.len(),
            self.boundary.len(),
            self.green.len(),
            self.conjugate.len(),
            self.z_re.len(),
            self.z_im.len(),
            self.phi.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::Format(format!("field lengths {lens:?} do not match {n} nodes")));
        }
        if self.boundary_loop.iter().any(|&b| b >= n || !self.boundary[b]) {
            return Err(Error::Format("boundary loop refers to non-boundary nodes".into()));
        }
        if self.pole >= n {
            return Err(Error::Format("pole index out of range".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    /// Header {"ISOF", version u32, node_count u32, field_count u32}, then little-endian
    /// f64 rows of [`BINARY_FIELDS`]. G is +∞ at the pole.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&CHART_FORMAT_VERSION.to_le_bytes())?;
        out.write_all(&(self.len() as u32).to_le_bytes())?;
        out.write_all(&(BINARY_FIELDS.len() as u32).to_le_bytes())?;
        for k in 0..self.len() {
            let row = [
                self.x[k],
                self.y[k],
                self.green[k].unwrap_or(f64::INFINITY),
                self.conjugate[k],
                self.z_re[k],
                self.z_im[k],
                self.phi[k],
            ];
            for v in row {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Rows of a binary sidecar, one `Vec` per node in [`BINARY_FIELDS`] order.
pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<Vec<f64>>> {
    let mut header = [0u8; 16];
    input.read_exact(&mut header)?;
    if &header[0..4] != BINARY_MAGIC {
        return Err(Error::Format("missing ISOF magic".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    if word(4) != CHART_FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported sidecar version {}", word(4))));
    }
    let (nodes, fields) = (word(8) as usize, word(12) as usize);
    let mut rows = Vec::with_capacity(nodes);
    let mut buf = [0u8; 8];
    for _ in 0..nodes {
        let mut row = Vec::with_capacity(fields);
        for _ in 0..fields {
            input.read_exact(&mut buf)?;
            row.push(f64::from_le_bytes(buf));
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{model_metric, ModelKind};
    use crate::uniformize::uniformize;

    #[test]
    fn json_and_binary_round_trip() {
        let m = model_metric(ModelKind::Hyperbolic, 1.0, 1.0).unwrap();
        let chart = uniformize(m, 0.05, 0).unwrap();
        let export = ChartExport::from_chart(&chart);
        assert_eq!(export.green[export.pole], None);
        let back = ChartExport::from_json(&export.to_json().unwrap()).unwrap();
        assert_eq!(back, export);
        let mut buf = Vec::new();
        export.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[0..4], b"ISOF");
        assert_eq!(buf.len(), 16 + export.len() * 7 * 8);
        let rows = read_binary(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), export.len());
        assert_eq!(rows[3][6], export.phi[3]);
        assert_eq!(rows[export.pole][2], f64::INFINITY);
    }

    #[test]
    fn malformed_json_is_rejected() {
        let m = model_metric(ModelKind::Flat, 0.0, 1.0).unwrap();
        let chart = uniformize(m, 0.1, 0).unwrap();
        let mut export = ChartExport::from_chart(&chart);
        export.phi.pop();
        assert!(matches!(ChartExport::from_json(&export.to_json().unwrap()), Err(Error::Format(_))));
    }
}

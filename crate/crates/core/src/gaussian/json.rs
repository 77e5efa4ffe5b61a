//! Network file format.
//!
//! ```json
//! { "n_relays": 1, "m_source": 1, "m_relay": [2], "m_dest": 1,
//!   "switching": "independent", "H": [[[re, im], ...], ...] }
//! ```
//!
//! `H` rows are relay antennas in relay order, then destination antennas;
//! columns are relay antennas, then source antennas.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::model::{NetworkSpec, NodeLayout, Switching};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n_relays: usize,
    m_source: usize,
    m_relay: Vec<usize>,
    m_dest: usize,
    switching: Switching,
    #[serde(rename = "H")]
    h: Vec<Vec<[f64; 2]>>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn row_block(i: usize, m_tot: usize) -> &'static str {
    if i < m_tot {
        "relay receive block (relay->relay, source->relay)"
    } else {
        "destination block (relay->destination, source->destination)"
    }
}

pub fn parse_network(text: &str) -> Result<NetworkSpec<f64>> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    if file.n_relays != file.m_relay.len() {
        return Err(schema(
            "m_relay",
            format!("{} entries for n_relays = {}", file.m_relay.len(), file.n_relays),
        ));
    }
    if let Some(k) = file.m_relay.iter().position(|&m| m == 0) {
        return Err(schema(format!("m_relay[{k}]"), "antenna count must be at least 1"));
    }
    for (name, v) in [("m_source", file.m_source), ("m_dest", file.m_dest)] {
        if v == 0 {
            return Err(schema(name, "antenna count must be at least 1"));
        }
    }
    let layout = NodeLayout::new(file.m_source, file.m_relay.clone(), file.m_dest, file.switching)
        .map_err(|e| schema("$", e.to_string()))?;
    let m_tot = layout.m_tot();
    let rows = m_tot + file.m_dest;
    let cols = m_tot + file.m_source;
    if file.h.len() != rows {
        let missing = if file.h.len() < m_tot {
            "relay receive block (relay->relay, source->relay)"
        } else {
            "destination block (relay->destination, source->destination)"
        };
        return Err(schema(
            "H",
            format!(
                "{} rows, expected {rows} ({m_tot} relay antennas + {} destination antennas); {missing} has the wrong size",
                file.h.len(),
                file.m_dest
            ),
        ));
    }
    let mut data = Vec::with_capacity(rows);
    for (i, row) in file.h.iter().enumerate() {
        if row.len() != cols {
            return Err(schema(
                format!("H[{i}]"),
                format!(
                    "{} entries in the {}, expected {cols} ({m_tot} relay antennas + {} source antennas)",
                    row.len(),
                    row_block(i, m_tot),
                    file.m_source
                ),
            ));
        }
        let mut out = Vec::with_capacity(cols);
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(schema(format!("H[{i}][{j}]"), "non-finite entry"));
            }
            out.push(Complex64::new(re, im));
        }
        data.push(out);
    }
    NetworkSpec::new(layout, CMatrix::from_rows(data)?)
}

pub fn to_json(net: &NetworkSpec<f64>) -> String {
    let l = net.layout();
    let h = net.channel();
    let file = NetworkFile {
        n_relays: l.n_relays(),
        m_source: l.m_source(),
        m_relay: l.m_relay().to_vec(),
        m_dest: l.m_dest(),
        switching: l.switching(),
        h: (0..h.rows())
            .map(|i| (0..h.cols()).map(|j| [h[(i, j)].re, h[(i, j)].im]).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("network serializes")
}

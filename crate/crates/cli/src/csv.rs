use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;
use crate::point::{GainPolicy, RunRecord};

pub const VERSION_LINE: &str = concat!("# cv-purify v", env!("CARGO_PKG_VERSION"));

pub const RECORD_COLUMNS: &[&str] = &[
    "T",
    "eps",
    "chi",
    "g",
    "g_policy",
    "phi",
    "input",
    "teleporters",
    "D",
    "grid_n",
    "grid_radius",
    "eta",
    "chi_ch",
    "Delta",
    "g_eff",
    "G",
    "prefactor",
    "lambda_out",
    "p_PS_single",
    "p_PS_total",
    "S_loss",
    "S_tele",
    "C_loss",
    "C_tele",
    "truncation_mass",
    "quadrature_error",
    "feasible",
    "status",
];

/// Twelve significant digits.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// Round to the precision [`float`] prints, so printed parameters reproduce
/// the evaluated point exactly.
pub fn round_printed(x: f64) -> f64 {
    float(x).parse().unwrap_or(x)
}

fn sanitize(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], ";")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{VERSION_LINE}").unwrap();
        writeln!(out, "{}", self.header.join(",")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn record_row(rec: &RunRecord) -> Vec<String> {
    let s = &rec.spec;
    let o = &rec.outputs;
    let g = match s.gain {
        GainPolicy::Fixed(g) => g,
        GainPolicy::Optimal => o.g,
    };
    let delta_only = s.delta.is_some();
    vec![
        float(s.transmission),
        float(s.eps),
        if delta_only { float(f64::NAN) } else { float(s.chi) },
        if delta_only { float(f64::NAN) } else { float(g) },
        s.gain.label().to_string(),
        float(s.phi),
        s.input.to_string(),
        s.teleporters.to_string(),
        s.dim.to_string(),
        s.grid_n.to_string(),
        float(s.grid_radius),
        float(o.eta),
        float(o.chi_ch),
        float(o.delta),
        float(o.g_eff),
        float(o.big_g),
        float(o.prefactor),
        float(o.lambda_out),
        float(o.p_single),
        float(o.p_total),
        float(o.s_loss),
        float(o.s_tele),
        float(o.c_loss),
        float(o.c_tele),
        float(o.truncation_mass),
        float(o.quadrature_error),
        rec.feasible().to_string(),
        match &rec.status {
            Ok(()) => "ok".to_string(),
            Err(f) => sanitize(&f.message),
        },
    ]
}

pub fn record_table(records: &[RunRecord]) -> Table {
    let mut table = Table::new(RECORD_COLUMNS);
    for rec in records {
        table.push(record_row(rec));
    }
    table
}

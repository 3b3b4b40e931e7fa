use std::fmt::Write as _;

use serde::Serialize;

use crate::estimate::Estimate;

/// Relative deviation above which a reproduced reference value counts as a mismatch.
pub const REFERENCE_TOL: f64 = 5e-3;

/// One output line: a computed quantity with its error bar and, when known, the published
/// value it should reproduce.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub quantity: String,
    pub computed: f64,
    pub quad_error: f64,
    pub reference_value: Option<f64>,
    pub rel_dev: Option<f64>,
    pub note: String,
    /// Whether every integral behind `computed` met its tolerance.
    #[serde(skip)]
    pub converged: bool,
}

impl Row {
    pub fn new(quantity: impl Into<String>, value: Estimate) -> Self {
        Row {
            quantity: quantity.into(),
            computed: value.value,
            quad_error: value.error,
            reference_value: None,
            rel_dev: None,
            note: String::new(),
            converged: value.converged,
        }
    }

    pub fn exact(quantity: impl Into<String>, value: f64) -> Self {
        Row::new(quantity, Estimate::exact(value))
    }

    pub fn reference(mut self, reference: Option<f64>) -> Self {
        self.reference_value = reference;
        self.rel_dev = reference.map(|r| relative_deviation(self.computed, r));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// True for rows noted as failures, and for references that deviate by more than 0.5%
    /// without a note explaining why.
    pub fn is_failure(&self) -> bool {
        self.note.starts_with("FAIL") || (self.note.is_empty() && self.rel_dev.is_some_and(|d| d > REFERENCE_TOL))
    }
}

/// `|computed − reference| / |reference|`, absolute when the reference is zero.
pub fn relative_deviation(computed: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        computed.abs()
    } else {
        (computed - reference).abs() / reference.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// A command's tabular result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: String,
    pub exit_code: i32,
    pub rows: Vec<Row>,
}

/// Six significant digits, switching to exponent notation outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let s = format!("{:.*}", (5 - mag) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

fn error_digits(e: f64) -> String {
    if e == 0.0 {
        "0".into()
    } else {
        format!("{e:.2e}")
    }
}

fn rounded(x: f64) -> f64 {
    sig6(x).parse().unwrap_or(x)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,computed,quad_error,reference_value,rel_dev,note\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&r.quantity),
                sig6(r.computed),
                error_digits(r.quad_error),
                r.reference_value.map(sig6).unwrap_or_default(),
                r.rel_dev.map(error_digits).unwrap_or_default(),
                csv_field(&r.note)
            );
        }
        out
    }

    /// The CSV content as JSON, with numbers rounded identically.
    pub fn to_json(&self) -> String {
        let mut copy = self.clone();
        for r in &mut copy.rows {
            r.computed = rounded(r.computed);
            r.quad_error = error_digits(r.quad_error).parse().unwrap_or(r.quad_error);
            r.reference_value = r.reference_value.map(rounded);
            r.rel_dev = r.rel_dev.map(|d| error_digits(d).parse().unwrap_or(d));
        }
        let mut s = serde_json::to_string_pretty(&copy).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

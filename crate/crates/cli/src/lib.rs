//! Command-line front end: parse a set expression, compute a bounds report
//! and serialize it as text, JSON or CSV.

use std::fmt::Write as _;

use charge_core::{bounds_report, parse, BoundsConfig, BoundsReport, Error, FamilyKind};

pub mod report;

pub use report::{CertificateDoc, FamilyDoc, LevelDoc, RationalText, ReportDoc, WitnessPath};

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for errors that are neither parse nor resource errors.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code for malformed expressions.
pub const EXIT_PARSE: i32 = 2;
/// Exit code for exceeded resource caps.
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub expression: String,
    pub max_level: usize,
    pub family: FamilyKind,
    pub format: Format,
    pub emit_certificates: bool,
    pub emit_witnesses: bool,
    /// Adds decimal approximations labeled non-authoritative.
    pub approx: bool,
    /// Largest LP row count solved; larger levels report no upper bound.
    pub cap_rows: Option<u64>,
    pub level_cap: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            expression: String::new(),
            max_level: 4,
            family: FamilyKind::Pr,
            format: Format::Text,
            emit_certificates: false,
            emit_witnesses: false,
            approx: false,
            cap_rows: None,
            level_cap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `pr` or a comma-separated list of positive moduli.
pub fn parse_family(text: &str) -> Result<FamilyKind, String> {
    if text.eq_ignore_ascii_case("pr") {
        return Ok(FamilyKind::Pr);
    }
    let moduli = text
        .split(',')
        .map(|m| match m.trim().parse::<u64>() {
            Ok(0) | Err(_) => Err(format!("invalid modulus {m:?}; expected `pr` or a list like 2,3,6")),
            Ok(v) => Ok(v),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FamilyKind::Custom(moduli))
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_parse() {
        EXIT_PARSE
    } else if err.is_resource() {
        EXIT_RESOURCE
    } else {
        EXIT_FAILURE
    }
}

fn failure(err: &Error) -> RunOutput {
    RunOutput {
        code: exit_code(err),
        stdout: String::new(),
        stderr: format!("error: {err}\n"),
    }
}

pub fn bounds_config(config: &RunConfig) -> BoundsConfig {
    let defaults = BoundsConfig::default();
    BoundsConfig {
        family: config.family.clone(),
        level_cap: config.level_cap.unwrap_or(defaults.level_cap),
        max_lp_rows: config.cap_rows.unwrap_or(defaults.max_lp_rows),
        keep_certificates: config.emit_certificates,
        keep_witnesses: config.emit_witnesses,
        ..defaults
    }
}

pub fn run(config: &RunConfig) -> RunOutput {
    let expr = match parse(&config.expression) {
        Ok(e) => e,
        Err(e) => return failure(&e),
    };
    let report = match bounds_report(&expr, config.max_level, &bounds_config(config)) {
        Ok(r) => r,
        Err(e) => return failure(&e),
    };
    let doc = ReportDoc::new(&report, &config.family, config.approx);
    let mut stderr = String::new();
    let stdout = match config.format {
        Format::Text => render_text(&doc),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => {
            if config.emit_certificates || config.emit_witnesses {
                stderr.push_str("note: certificates and witnesses are only written in text and json formats\n");
            }
            render_csv(&doc)
        }
    };
    if report.levels.iter().any(|l| l.upper_sup.is_none()) {
        stderr.push_str("note: levels above the LP row cap report no upper bound (witness-only)\n");
    }
    if report.levels.iter().any(|l| !l.lower_sup.donation_complete) {
        stderr.push_str("note: donation stopped at its work budget on some level; lower bounds remain valid\n");
    }
    RunOutput {
        code: EXIT_OK,
        stdout,
        stderr,
    }
}

/// Convenience wrapper returning the structured report.
pub fn report(config: &RunConfig) -> Result<BoundsReport, Error> {
    let expr = parse(&config.expression)?;
    bounds_report(&expr, config.max_level, &bounds_config(config))
}

const ABSENT: &str = "-";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| ABSENT.to_string(), ToString::to_string)
}

fn approx_text(v: Option<f64>) -> String {
    v.map_or_else(|| ABSENT.to_string(), |x| format!("{x:.6}"))
}

pub const CSV_COLUMNS: [&str; 6] = ["level", "primorial", "upper_sup", "lower_sup", "lower_inf", "upper_inf"];

fn render_csv(doc: &ReportDoc) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let approx = doc.approx_note.is_some();
    let mut header: Vec<String> = CSV_COLUMNS.iter().map(|c| c.to_string()).collect();
    if approx {
        header.extend(
            ["upper_sup", "lower_sup", "lower_inf", "upper_inf"]
                .iter()
                .map(|c| format!("{c}_approx_non_authoritative")),
        );
    }
    w.write_record(&header).expect("in-memory write");
    for l in &doc.levels {
        let mut row = vec![
            l.level.to_string(),
            l.primorial.to_string(),
            opt(&l.upper_sup),
            l.lower_sup.to_string(),
            opt(&l.lower_inf),
            l.upper_inf.to_string(),
        ];
        if let Some(a) = &l.approx {
            row.extend([
                approx_text(a.upper_sup),
                approx_text(Some(a.lower_sup)),
                approx_text(a.lower_inf),
                approx_text(Some(a.upper_inf)),
            ]);
        }
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn render_text(doc: &ReportDoc) -> String {
    let mut out = String::new();
    let family = match &doc.family {
        FamilyDoc::Named(n) => n.clone(),
        FamilyDoc::Moduli(ms) => ms.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
    };
    let _ = writeln!(out, "expression: {}", doc.expression);
    let _ = writeln!(out, "family: {family}");
    let _ = writeln!(out, "sup bracket [lower_sup, upper_sup], inf bracket [lower_inf, upper_inf]");
    let mut rows = vec![CSV_COLUMNS.iter().map(|c| c.to_string()).collect::<Vec<_>>()];
    rows[0].push("lower source".into());
    for l in &doc.levels {
        rows.push(vec![
            l.level.to_string(),
            l.primorial.to_string(),
            opt(&l.upper_sup),
            l.lower_sup.to_string(),
            opt(&l.lower_inf),
            l.upper_inf.to_string(),
            l.lower_source.clone(),
        ]);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for r in &rows {
        let line: Vec<String> = r.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    if let Some(note) = &doc.approx_note {
        let _ = writeln!(out, "\n{note}:");
        for l in &doc.levels {
            if let Some(a) = &l.approx {
                let _ = writeln!(
                    out,
                    "  level {}: upper_sup ~ {}, lower_sup ~ {}, lower_inf ~ {}, upper_inf ~ {}",
                    l.level,
                    approx_text(a.upper_sup),
                    approx_text(Some(a.lower_sup)),
                    approx_text(a.lower_inf),
                    approx_text(Some(a.upper_inf)),
                );
            }
        }
    }
    for l in &doc.levels {
        for (name, cert) in [("certificate", &l.certificate), ("complement certificate", &l.complement_certificate)] {
            if let Some(c) = cert {
                let join = |v: &[RationalText]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
                let _ = writeln!(
                    out,
                    "\nlevel {} {name}: value {}, verified {}\n  primal: {}\n  dual: {}",
                    l.level,
                    c.value,
                    c.certificate_ok,
                    join(&c.primal),
                    join(&c.dual)
                );
            }
        }
        for (name, w) in [("witness", &l.witness), ("complement witness", &l.complement_witness)] {
            if let Some(paths) = w {
                let _ = writeln!(out, "\nlevel {} {name} (tuple x multiplicity):", l.level);
                for p in paths {
                    let t: Vec<String> = p.tuple.iter().map(u32::to_string).collect();
                    let _ = writeln!(out, "  ({}) x {}", t.join(","), p.multiplicity);
                }
            }
        }
    }
    out
}

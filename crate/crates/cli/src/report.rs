//! Serializable form of a bounds report.

use std::fmt;
use std::str::FromStr;

use charge_core::{BoundsReport, FamilyKind, LevelBounds, LpSolution, PathMultiset, Rational, UpperBound};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A rational written as `"num/den"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalText(pub Rational);

impl Serialize for RationalText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for RationalText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Rational::from_str(&text)
            .map(RationalText)
            .map_err(|_| serde::de::Error::custom(format!("not a rational: {text:?}")))
    }
}

impl fmt::Display for RationalText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn text(r: &Rational) -> RationalText {
    RationalText(r.clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyDoc {
    Named(String),
    Moduli(Vec<u64>),
}

impl From<&FamilyKind> for FamilyDoc {
    fn from(kind: &FamilyKind) -> Self {
        match kind {
            FamilyKind::Pr => FamilyDoc::Named("pr".into()),
            FamilyKind::Custom(ms) => FamilyDoc::Moduli(ms.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub expression: String,
    pub family: FamilyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx_note: Option<String>,
    pub levels: Vec<LevelDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approx {
    pub upper_sup: Option<f64>,
    pub lower_sup: f64,
    pub lower_inf: Option<f64>,
    pub upper_inf: f64,
}

impl Eq for Approx {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelDoc {
    pub level: usize,
    pub primorial: u64,
    pub moduli: Vec<u64>,
    /// Absent when the level exceeds the LP row cap.
    pub upper_sup: Option<RationalText>,
    pub lower_sup: RationalText,
    pub lower_inf: Option<RationalText>,
    pub upper_inf: RationalText,
    pub lower_source: String,
    pub complement_lower_source: String,
    pub thin_count: Option<bool>,
    pub donation_complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx: Option<Approx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement_certificate: Option<CertificateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<WitnessPath>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement_witness: Option<Vec<WitnessPath>>,
}

/// Primal and dual optimum of a covering LP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub value: RationalText,
    pub certificate_ok: bool,
    pub primal: Vec<RationalText>,
    pub dual: Vec<RationalText>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessPath {
    pub tuple: Vec<u32>,
    pub multiplicity: u32,
}

fn certificate(upper: &Option<UpperBound>) -> Option<CertificateDoc> {
    let upper = upper.as_ref()?;
    let sol: &LpSolution = upper.solution.as_ref()?;
    Some(CertificateDoc {
        value: text(&sol.value),
        certificate_ok: sol.certificate_ok,
        primal: sol.primal.iter().map(text).collect(),
        dual: sol.dual.iter().map(text).collect(),
    })
}

fn witness(j: &Option<PathMultiset>) -> Option<Vec<WitnessPath>> {
    let j = j.as_ref()?;
    Some(
        j.iter()
            .map(|(t, multiplicity)| WitnessPath {
                tuple: t.0,
                multiplicity,
            })
            .collect(),
    )
}

impl LevelDoc {
    pub fn new(lb: &LevelBounds, approx: bool) -> Self {
        let approx = approx.then(|| Approx {
            upper_sup: lb.upper_sup.as_ref().map(|u| u.value.to_f64()),
            lower_sup: lb.lower_sup.value.to_f64(),
            lower_inf: lb.lower_inf.as_ref().map(Rational::to_f64),
            upper_inf: lb.upper_inf.to_f64(),
        });
        LevelDoc {
            level: lb.level,
            primorial: lb.primorial,
            moduli: lb.moduli.clone(),
            upper_sup: lb.upper_sup.as_ref().map(|u| text(&u.value)),
            lower_sup: text(&lb.lower_sup.value),
            lower_inf: lb.lower_inf.as_ref().map(text),
            upper_inf: text(&lb.upper_inf),
            lower_source: lb.lower_sup.source.as_str().into(),
            complement_lower_source: lb.complement_lower.source.as_str().into(),
            thin_count: lb.lower_sup.thin_count,
            donation_complete: lb.lower_sup.donation_complete,
            approx,
            certificate: certificate(&lb.upper_sup),
            complement_certificate: certificate(&lb.complement_upper),
            witness: witness(&lb.lower_sup.witness),
            complement_witness: witness(&lb.complement_lower.witness),
        }
    }
}

pub const APPROX_NOTE: &str = "decimal approximations are non-authoritative; the exact rationals are the result";

impl ReportDoc {
    pub fn new(report: &BoundsReport, family: &FamilyKind, approx: bool) -> Self {
        ReportDoc {
            expression: report.expression.clone(),
            family: family.into(),
            approx_note: approx.then(|| APPROX_NOTE.into()),
            levels: report.levels.iter().map(|lb| LevelDoc::new(lb, approx)).collect(),
        }
    }
}

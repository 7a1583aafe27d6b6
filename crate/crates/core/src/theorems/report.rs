use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rational::{self, Rational};
use crate::sets::GroupSubset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    Plunnecke,
    PlunneckeNormalized,
    RuzsaTriangle,
    CauchyDavenport,
    NbBound,
    QuotientLemma,
}

impl InequalityId {
    pub const ALL: [InequalityId; 6] = [
        InequalityId::Plunnecke,
        InequalityId::PlunneckeNormalized,
        InequalityId::RuzsaTriangle,
        InequalityId::CauchyDavenport,
        InequalityId::NbBound,
        InequalityId::QuotientLemma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityId::Plunnecke => "plunnecke",
            InequalityId::PlunneckeNormalized => "plunnecke_normalized",
            InequalityId::RuzsaTriangle => "ruzsa_triangle",
            InequalityId::CauchyDavenport => "cauchy_davenport",
            InequalityId::NbBound => "nb_bound",
            InequalityId::QuotientLemma => "quotient_lemma",
        }
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim().to_ascii_lowercase().replace('-', "_");
        InequalityId::ALL
            .into_iter()
            .find(|id| id.name() == t || (t == "nb" && *id == InequalityId::NbBound))
            .ok_or_else(|| {
                let valid: Vec<&str> = InequalityId::ALL.iter().map(|i| i.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown inequality {s:?}; valid ids: {}",
                    valid.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    PreconditionNotMet,
}

/// Outcome of one inequality check. `pass` is exactly `lhs <= rhs`.
///
/// JSON output adds decimal renderings `lhs_approx`, `rhs_approx` and
/// `slack_approx` (12 significant digits, display only).
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct VerificationReport {
    pub inequality: InequalityId,
    pub group: String,
    #[serde(default)]
    pub m: Option<u32>,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(with = "rational::serde_str")]
    pub lhs: Rational,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub pass: bool,
    #[serde(with = "rational::serde_str")]
    pub slack: Rational,
    pub status: Status,
    /// `(rhs − lhs) / rhs`, absent when `rhs = 0`.
    #[serde(default, with = "rational::serde_str_opt")]
    pub normalized_slack: Option<Rational>,
    pub inputs: BTreeMap<String, String>,
}

impl Serialize for VerificationReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("VerificationReport", 14)?;
        st.serialize_field("inequality", &self.inequality)?;
        st.serialize_field("group", &self.group)?;
        if let Some(m) = self.m {
            st.serialize_field("m", &m)?;
        }
        if let Some(n) = self.n {
            st.serialize_field("n", &n)?;
        }
        st.serialize_field("lhs", &rational::to_string(&self.lhs))?;
        st.serialize_field("rhs", &rational::to_string(&self.rhs))?;
        st.serialize_field("pass", &self.pass)?;
        st.serialize_field("slack", &rational::to_string(&self.slack))?;
        st.serialize_field("status", &self.status)?;
        if let Some(ns) = &self.normalized_slack {
            st.serialize_field("normalized_slack", &rational::to_string(ns))?;
        }
        st.serialize_field("lhs_approx", &rational::approx(&self.lhs))?;
        st.serialize_field("rhs_approx", &rational::approx(&self.rhs))?;
        st.serialize_field("slack_approx", &rational::approx(&self.slack))?;
        st.serialize_field("inputs", &self.inputs)?;
        st.end()
    }
}

impl VerificationReport {
    pub fn new(
        inequality: InequalityId,
        group: impl Into<String>,
        m: Option<u32>,
        n: Option<u32>,
        lhs: Rational,
        rhs: Rational,
    ) -> Self {
        let slack = &rhs - &lhs;
        let pass = !slack.is_negative();
        let normalized_slack = (!rhs.is_zero()).then(|| &slack / &rhs);
        VerificationReport {
            inequality,
            group: group.into(),
            m,
            n,
            lhs,
            rhs,
            pass,
            slack,
            status: if pass { Status::Pass } else { Status::Fail },
            normalized_slack,
            inputs: BTreeMap::new(),
        }
    }

    pub fn input(mut self, key: &str, value: impl Into<String>) -> Self {
        self.inputs.insert(key.to_string(), value.into());
        self
    }

    pub fn precondition_not_met(mut self) -> Self {
        self.status = Status::PreconditionNotMet;
        self
    }

    /// A genuine failure: the inequality applied and did not hold.
    pub fn is_violation(&self) -> bool {
        self.status == Status::Fail
    }

    /// Normalized slack, falling back to the raw slack when `rhs = 0`.
    pub fn ranking_slack(&self) -> &Rational {
        self.normalized_slack.as_ref().unwrap_or(&self.slack)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Compact descriptor of a subset: its member indices in hex bitmask form.
pub fn describe(s: &GroupSubset) -> String {
    format!("0x{}", s.bits().to_hex())
}

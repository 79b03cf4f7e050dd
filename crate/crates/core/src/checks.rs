//! Named residual and equivalence checks, as run by the command line tool.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::enumerate::enumerate_series;
use crate::error::{Error, Result};
use crate::kernel::{
    f2_s2_unsimplified, f2_s3, f4_s2_explicit, f_compartments_s2, orbit_identity_residual, quarter_plane_q,
    star_residual, verify_functional_equation, x0_f2l_identity, Compartments, Interpretation, SubstitutionOrder,
};
use crate::laurent::{Axis, SectionSpec, SignClass};
use crate::model::{catalog_model, ModelSpec, Region};
use crate::ring::{Integers, Rationals, Ring};
use crate::series::{Offender, TSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// Quarter-plane closed form against enumeration.
    KernelQ,
    /// The four compartments of the one-way-axes model.
    S2Forms,
    /// Quadrant formula of the nonnegative-half-axes model.
    S3Form,
    Star,
    X0Identity,
    /// Functional equation under an interpretation.
    Feq,
    /// Orbit-sum identity for a model.
    Orbit,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::KernelQ,
        CheckKind::S2Forms,
        CheckKind::S3Form,
        CheckKind::Star,
        CheckKind::X0Identity,
        CheckKind::Feq,
        CheckKind::Orbit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::KernelQ => "kernel-q",
            CheckKind::S2Forms => "s2-forms",
            CheckKind::S3Form => "s3-form",
            CheckKind::Star => "star",
            CheckKind::X0Identity => "x0-identity",
            CheckKind::Feq => "feq",
            CheckKind::Orbit => "orbit",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check '{s}'")))
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Model for `feq` and `orbit`; defaults to the one-way-axes model.
    pub model: Option<ModelSpec>,
    /// Interpretation for `feq`; defaults to the model's own barriers.
    pub interp: Option<Interpretation>,
    pub reading: SubstitutionOrder,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            model: None,
            interp: None,
            reading: SubstitutionOrder::SubstituteFirst,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub order: usize,
    pub passed: bool,
    /// Which comparison failed, when one did.
    pub part: Option<String>,
    pub offender: Option<String>,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed {
            write!(f, "PASS {} through t^{}", self.check, self.order)
        } else {
            write!(f, "FAIL {} through t^{}", self.check, self.order)?;
            if let Some(part) = &self.part {
                write!(f, ": {part}")?;
            }
            if let Some(o) = &self.offender {
                write!(f, ": first nonzero {o}")?;
            }
            Ok(())
        }
    }
}

fn first_difference<R: Ring>(parts: Vec<(&str, TSeries<R>, TSeries<R>)>) -> Option<(String, Offender)> {
    parts.into_iter().find_map(|(name, a, b)| (&a - &b).first_nonzero().map(|o| (name.to_string(), o)))
}

fn default_model(opts: &CheckOptions) -> ModelSpec {
    opts.model.clone().unwrap_or_else(|| catalog_model("S2").expect("catalog"))
}

/// Runs a check through `t^order` in exact arithmetic.
pub fn run_check(kind: CheckKind, order: usize, opts: &CheckOptions) -> Result<CheckOutcome> {
    let failure: Option<(String, Offender)> = match kind {
        CheckKind::KernelQ => {
            let dp = enumerate_series(&catalog_model("QP").expect("catalog"), order, Rationals)?;
            first_difference(vec![("Q against walks", quarter_plane_q(order, Rationals), dp)])
        }
        CheckKind::S2Forms => {
            let dp = enumerate_series(&catalog_model("S2").expect("catalog"), order, Rationals)?;
            let parts = Compartments::of_series(&dp);
            let c = f_compartments_s2(order, Rationals);
            let unsimplified = f2_s2_unsimplified(&c.f1);
            let explicit = f4_s2_explicit(order, Rationals);
            first_difference(vec![
                ("F1", c.f1.clone(), parts.f1),
                ("F2", c.f2.clone(), parts.f2),
                ("F3", c.f3, parts.f3),
                ("F4", c.f4.clone(), parts.f4),
                ("F2 unsimplified", unsimplified, c.f2),
                ("F4 explicit", explicit, c.f4),
            ])
        }
        CheckKind::S3Form => {
            let dp = enumerate_series(&catalog_model("S3").expect("catalog"), order, Rationals)?;
            let quadrant = dp
                .section(SectionSpec::new(Axis::X, SignClass::NonNeg))
                .section(SectionSpec::new(Axis::Y, SignClass::NonNeg));
            let f1 = &dp - &quadrant;
            first_difference(vec![("quadrant formula", f2_s3(order, &f1, opts.reading)?, quadrant)])
        }
        CheckKind::Star => star_residual(order, Rationals)?
            .first_nonzero()
            .map(|o| ("residual".to_string(), o)),
        CheckKind::X0Identity => x0_f2l_identity(order, Rationals)?
            .first_nonzero()
            .map(|o| ("residual".to_string(), o)),
        CheckKind::Feq => {
            let model = default_model(opts);
            let interp = opts.interp.unwrap_or_else(|| {
                if model.region == Region::QuarterPlane {
                    Interpretation {
                        west: Some(SignClass::All),
                        south: Some(SignClass::All),
                    }
                } else {
                    Interpretation::of_model(&model)
                }
            });
            verify_functional_equation(&model, interp, order, Integers)?
                .first_nonzero()
                .map(|o| (format!("model {} with {interp}", model.id), o))
        }
        CheckKind::Orbit => {
            let model = default_model(opts);
            orbit_identity_residual(&model, order, Integers)?
                .first_nonzero()
                .map(|o| (format!("model {}", model.id), o))
        }
    };
    Ok(CheckOutcome {
        check: kind.name().into(),
        order,
        passed: failure.is_none(),
        part: failure.as_ref().map(|(p, _)| p.clone()),
        offender: failure.map(|(_, o)| o.to_string()),
    })
}

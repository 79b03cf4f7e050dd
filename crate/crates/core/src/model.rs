//! Walk models: start point, barrier domains and region constraints.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::SignClass;

/// A set of integers on which a barrier is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainSpec {
    All,
    Empty,
    Pos,
    Neg,
    NonNeg,
    NonPos,
}

impl DomainSpec {
    pub fn contains(self, k: i32) -> bool {
        match self {
            DomainSpec::All => true,
            DomainSpec::Empty => false,
            DomainSpec::Pos => k > 0,
            DomainSpec::Neg => k < 0,
            DomainSpec::NonNeg => k >= 0,
            DomainSpec::NonPos => k <= 0,
        }
    }

    /// The section that reads this domain off a series, if any.
    pub fn sign_class(self) -> Option<SignClass> {
        match self {
            DomainSpec::All => Some(SignClass::All),
            DomainSpec::Empty => None,
            DomainSpec::Pos => Some(SignClass::Pos),
            DomainSpec::Neg => Some(SignClass::Neg),
            DomainSpec::NonNeg => Some(SignClass::NonNeg),
            DomainSpec::NonPos => Some(SignClass::NonPos),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainSpec::All => "all",
            DomainSpec::Empty => "empty",
            DomainSpec::Pos => "pos",
            DomainSpec::Neg => "neg",
            DomainSpec::NonNeg => "nonneg",
            DomainSpec::NonPos => "nonpos",
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "all" => DomainSpec::All,
            "empty" | "none" => DomainSpec::Empty,
            "pos" => DomainSpec::Pos,
            "neg" => DomainSpec::Neg,
            "nonneg" => DomainSpec::NonNeg,
            "nonpos" => DomainSpec::NonPos,
            _ => return Err(Error::Parse(format!("unknown domain '{s}'"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    FullPlane,
    QuarterPlane,
    AvoidNonNegQuadrant,
}

impl Region {
    pub fn contains(self, (i, j): (i32, i32)) -> bool {
        match self {
            Region::FullPlane => true,
            Region::QuarterPlane => i >= 0 && j >= 0,
            Region::AvoidNonNegQuadrant => i < 0 || j < 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::FullPlane => "full",
            Region::QuarterPlane => "quarter",
            Region::AvoidNonNegQuadrant => "avoid-quadrant",
        }
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "full" | "full_plane" => Region::FullPlane,
            "quarter" | "quarter_plane" => Region::QuarterPlane,
            "avoid-quadrant" | "avoid_non_neg_quadrant" => Region::AvoidNonNegQuadrant,
            _ => return Err(Error::Parse(format!("unknown region '{s}'"))),
        })
    }
}

/// Simple walks with steps E, W, N, S. A west step is forbidden from
/// `(0, j)` when `j` lies in `west_barrier`; a south step is forbidden from
/// `(i, 0)` when `i` lies in `south_barrier`. Steps leaving `region` are
/// forbidden.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default = "custom_id")]
    pub id: String,
    pub start: (i32, i32),
    #[serde(default = "empty_domain")]
    pub west_barrier: DomainSpec,
    #[serde(default = "empty_domain")]
    pub south_barrier: DomainSpec,
    #[serde(default = "full_plane")]
    pub region: Region,
}

fn custom_id() -> String {
    "custom".into()
}

fn empty_domain() -> DomainSpec {
    DomainSpec::Empty
}

fn full_plane() -> Region {
    Region::FullPlane
}

impl ModelSpec {
    pub fn new(
        id: &str,
        start: (i32, i32),
        west_barrier: DomainSpec,
        south_barrier: DomainSpec,
        region: Region,
    ) -> Result<Self> {
        let m = ModelSpec {
            id: id.into(),
            start,
            west_barrier,
            south_barrier,
            region,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn barrier(id: &str, west: DomainSpec, south: DomainSpec) -> Self {
        ModelSpec {
            id: id.into(),
            start: (-1, -1),
            west_barrier: west,
            south_barrier: south,
            region: Region::FullPlane,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.region.contains(self.start) {
            return Err(Error::InvalidModel(format!(
                "start ({}, {}) lies outside the {} region",
                self.start.0,
                self.start.1,
                self.region.name()
            )));
        }
        let bound = 1 << 28;
        if self.start.0.abs() > bound || self.start.1.abs() > bound {
            return Err(Error::InvalidModel("start coordinates too large".into()));
        }
        Ok(())
    }

    /// Whether a barrier applies right at the start point.
    pub fn start_on_barrier(&self) -> bool {
        let (s1, s2) = self.start;
        (s1 == 0 && self.west_barrier.contains(s2)) || (s2 == 0 && self.south_barrier.contains(s1))
    }

    pub fn west_allowed(&self, (i, j): (i32, i32)) -> bool {
        !(i == 0 && self.west_barrier.contains(j)) && self.region.contains((i - 1, j))
    }

    pub fn south_allowed(&self, (i, j): (i32, i32)) -> bool {
        !(j == 0 && self.south_barrier.contains(i)) && self.region.contains((i, j - 1))
    }

    pub fn east_allowed(&self, (i, j): (i32, i32)) -> bool {
        self.region.contains((i + 1, j))
    }

    pub fn north_allowed(&self, (i, j): (i32, i32)) -> bool {
        self.region.contains((i, j + 1))
    }

    /// One-line description used in cache headers.
    pub fn describe(&self) -> String {
        format!(
            "model={} start={},{} west={} south={} region={}",
            self.id,
            self.start.0,
            self.start.1,
            self.west_barrier,
            self.south_barrier,
            self.region.name()
        )
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: ModelSpec = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// The named models.
pub fn model_catalog() -> Vec<ModelSpec> {
    use DomainSpec::*;
    vec![
        ModelSpec::barrier("S2", All, All),
        ModelSpec::barrier("S3", NonNeg, NonNeg),
        ModelSpec::barrier("S4a", Neg, Neg),
        ModelSpec::barrier("S4b", NonPos, NonPos),
        ModelSpec::barrier("S5", Pos, Pos),
        ModelSpec {
            id: "QP".into(),
            start: (0, 0),
            west_barrier: Empty,
            south_barrier: Empty,
            region: Region::QuarterPlane,
        },
        ModelSpec {
            id: "TQP".into(),
            start: (-1, -1),
            west_barrier: Empty,
            south_barrier: Empty,
            region: Region::AvoidNonNegQuadrant,
        },
    ]
}

/// Looks up a catalog model by id, ignoring case.
pub fn catalog_model(id: &str) -> Option<ModelSpec> {
    model_catalog()
        .into_iter()
        .find(|m| m.id.eq_ignore_ascii_case(id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_entries() {
        let cat = model_catalog();
        let ids: Vec<_> = cat.iter().map(|m| m.id.as_str()).collect();
        assert_eq!(ids, ["S2", "S3", "S4a", "S4b", "S5", "QP", "TQP"]);
        assert_eq!(catalog_model("s2").unwrap().start, (-1, -1));
        assert_eq!(catalog_model("QP").unwrap().start, (0, 0));
        for m in &cat {
            m.validate().unwrap();
        }
    }

    #[test]
    fn barrier_rules() {
        let s2 = catalog_model("S2").unwrap();
        assert!(!s2.west_allowed((0, -1)));
        assert!(s2.west_allowed((1, -1)));
        let s5 = catalog_model("S5").unwrap();
        for p in [(0, 0)] {
            assert!(s5.west_allowed(p) && s5.south_allowed(p));
        }
        assert!(!s5.west_allowed((0, 2)));
        assert!(s5.west_allowed((0, -2)));
    }

    #[test]
    fn region_start_validation() {
        let bad = ModelSpec::new("x", (-1, 0), DomainSpec::Empty, DomainSpec::Empty, Region::QuarterPlane);
        assert!(bad.is_err());
        let bad = ModelSpec::new("x", (0, 0), DomainSpec::Empty, DomainSpec::Empty, Region::AvoidNonNegQuadrant);
        assert!(bad.is_err());
    }

    #[test]
    fn json_round_trip() {
        for m in model_catalog() {
            let back = ModelSpec::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m);
        }
        let m = ModelSpec::from_json(
            r#"{"start": [-1, 1], "west_barrier": "pos", "south_barrier": "nonpos"}"#,
        )
        .unwrap();
        assert_eq!(m.region, Region::FullPlane);
        assert_eq!(m.south_barrier, DomainSpec::NonPos);
    }

    #[test]
    fn degenerate_start_flagged() {
        let m = ModelSpec::barrier("x", DomainSpec::All, DomainSpec::All);
        assert!(!m.start_on_barrier());
        let m = ModelSpec { start: (0, -1), ..m };
        assert!(m.start_on_barrier());
    }
}

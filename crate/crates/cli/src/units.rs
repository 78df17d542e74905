//! Physical quantities in configuration files.
//!
//! Internally lengths are measured in nanometres and times in nanometres of
//! light travel (c = 1). A bare number is taken as already being in these
//! normalized units; a string carries an explicit unit suffix.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Light travel distance in nanometres per femtosecond.
pub const NM_PER_FS: f64 = 299.792_458;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
        })
    }
}

const UNITS: &[(&str, Dimension, f64)] = &[
    ("m", Dimension::Length, 1e9),
    ("mm", Dimension::Length, 1e6),
    ("um", Dimension::Length, 1e3),
    ("µm", Dimension::Length, 1e3),
    ("nm", Dimension::Length, 1.0),
    ("s", Dimension::Time, 1e15 * NM_PER_FS),
    ("ps", Dimension::Time, 1e3 * NM_PER_FS),
    ("fs", Dimension::Time, NM_PER_FS),
    ("as", Dimension::Time, 1e-3 * NM_PER_FS),
];

/// A number with an optional unit suffix, kept as written so that an
/// effective configuration echoes the user's spelling.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantity {
    Normalized(f64),
    WithUnit { value: f64, unit: String },
}

impl Quantity {
    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        if let Ok(v) = t.parse::<f64>() {
            return Ok(Quantity::Normalized(v));
        }
        let mut units: Vec<&str> = UNITS.iter().map(|(u, _, _)| *u).collect();
        units.sort_by_key(|u| std::cmp::Reverse(u.len()));
        for unit in units {
            if let Some(num) = t.strip_suffix(unit) {
                if let Ok(value) = num.trim().parse::<f64>() {
                    return Ok(Quantity::WithUnit {
                        value,
                        unit: unit.to_string(),
                    });
                }
            }
        }
        Err(format!("'{text}' is not a number with an optional unit (m, mm, um, nm, s, ps, fs, as)"))
    }

    /// Value in internal units, checking the dimension when a unit is given.
    pub fn to_internal(&self, dim: Dimension) -> Result<f64, String> {
        match self {
            Quantity::Normalized(v) => Ok(*v),
            Quantity::WithUnit { value, unit } => {
                let (_, d, scale) = UNITS.iter().find(|(u, _, _)| u == unit).expect("validated unit");
                if *d != dim {
                    return Err(format!("'{value} {unit}' is a {d}, expected a {dim}"));
                }
                Ok(value * scale)
            }
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Normalized(v) => write!(f, "{v}"),
            Quantity::WithUnit { value, unit } => write!(f, "{value} {unit}"),
        }
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Quantity::Normalized(v) => s.serialize_f64(*v),
            Quantity::WithUnit { .. } => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Quantity::Normalized(v as f64)),
            Raw::Float(v) => Ok(Quantity::Normalized(v)),
            Raw::Text(t) => Quantity::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

impl From<f64> for Quantity {
    fn from(v: f64) -> Self {
        Quantity::Normalized(v)
    }
}

macro_rules! dimensioned {
    ($(#[$doc:meta])* $name:ident, $dim:expr) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub Quantity);

        impl $name {
            pub fn internal(&self) -> f64 {
                self.0.to_internal($dim).expect("dimension checked when parsed")
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let q = Quantity::deserialize(d)?;
                q.to_internal($dim).map_err(serde::de::Error::custom)?;
                Ok($name(q))
            }
        }
    };
}

dimensioned!(
    /// A quantity checked to be a length when parsed.
    Length,
    Dimension::Length
);
dimensioned!(
    /// A quantity checked to be a time when parsed.
    Time,
    Dimension::Time
);

impl Length {
    /// `value` nanometres.
    pub fn new(value: f64) -> Self {
        Length(Quantity::WithUnit {
            value,
            unit: "nm".into(),
        })
    }
}

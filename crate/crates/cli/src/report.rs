//! Input parsing, exit codes and JSON output.

use std::fs;
use std::path::Path;

use serde_json::{json, Value};
use shiftlab::forest::RawForest;
use shiftlab::{DirectedForest, Error, WeightSystem, WeightedShift};

pub const HOLDS: u8 = 0;
pub const INTERNAL: u8 = 1;
pub const STRUCTURAL: u8 = 2;
pub const FAILS: u8 = 3;
pub const INFEASIBLE: u8 = 4;

/// What a command produced: a report for stdout, an optional artifact for
/// `--out`, and the exit code.
pub struct Outcome {
    pub code: u8,
    pub report: Value,
    pub artifact: Option<Value>,
}

impl Outcome {
    pub fn new(code: u8, report: Value) -> Self {
        Outcome {
            code,
            report,
            artifact: None,
        }
    }

    pub fn with_artifact(mut self, artifact: Value) -> Self {
        self.artifact = Some(artifact);
        self
    }
}

#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) => match e {
                Error::MemberInfeasible { .. }
                | Error::MemberNotExtendable { .. }
                | Error::NotSubnormalInput(_)
                | Error::ForklessInput => INFEASIBLE,
                Error::Postcondition(_) => INTERNAL,
                _ => STRUCTURAL,
            },
            Failure::Io(_) | Failure::Usage(_) => STRUCTURAL,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message) = match self {
            Failure::Lib(e) => (variant_name(e), e.to_string()),
            Failure::Io(m) => ("Io".to_string(), m.clone()),
            Failure::Usage(m) => ("Usage".to_string(), m.clone()),
        };
        let mut body = json!({"kind": kind, "message": message});
        if let Failure::Lib(Error::MemberInfeasible { index, .. } | Error::MemberNotExtendable { index, .. }) = self {
            body["index"] = json!(index);
        }
        json!({"error": body})
    }
}

fn variant_name(e: &Error) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric()).collect()
}

pub type CmdResult = Result<Outcome, Failure>;

pub fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Lib(Error::Parse(format!("{}: {e}", path.display()))))
}

fn from_value<T: serde::de::DeserializeOwned>(v: Value, what: &str) -> Result<T, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::Lib(Error::Parse(format!("{what}: {e}"))))
}

pub fn forest_from(v: Value) -> Result<DirectedForest, Failure> {
    let raw: RawForest = from_value(v, "forest")?;
    Ok(DirectedForest::try_from(raw)?)
}

pub fn read_forest(path: &Path) -> Result<DirectedForest, Failure> {
    forest_from(read_json(path)?)
}

/// `{"forest": ..., "weights": {"sq": ..., "tails": ...}}`. Leaves are
/// allowed here; the checkers report them.
pub fn read_shift(path: &Path) -> Result<WeightedShift, Failure> {
    let mut v = read_json(path)?;
    let forest = forest_from(v["forest"].take())?;
    let weights: WeightSystem = from_value(v["weights"].take(), "weights")?;
    Ok(WeightedShift::new_allow_leaves(forest, weights)?)
}

pub fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("values serialize")
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("values serialize");
    fs::write(path, text + "\n").map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

//! Scenario files: a `[surface]` section describing the lattice model, an
//! optional `[vectors]` section with `r, a, s, b` and an optional
//! `[options]` section. The syntax is TOML; unknown keys are rejected.
//!
//! ```toml
//! [surface]
//! ell = 3
//! fibers = ["I2", "I3@2"]   # Kodaira type, optionally @ the 1-based attach index
//!
//! [vectors]
//! r = 3
//! a = -7
//! s = 3
//! b = -7
//! ```

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::kodaira::{FiberConfig, FiberType, DEFAULT_BOX_BOUND};
use crate::lattice::{DivisorClass, SurfaceModel};
use crate::mukai::MukaiVector;
use crate::nl_divisor::DEFAULT_SEARCH_BOUND;

/// Bound on every integer read from a scenario, so that all derived
/// quantities stay far inside 64 bits.
pub const MAX_ABS: i64 = 1_000_000;
pub const MAX_SEARCH_BOUND: i64 = 50;
pub const MAX_BOX_BOUND: i64 = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {key} = {value} violates {constraint}")]
    Range {
        line: usize,
        key: String,
        value: String,
        constraint: String,
    },
    #[error("line {line}: {message}")]
    Model { line: usize, message: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    surface: RawSurface,
    vectors: Option<RawVectors>,
    options: Option<RawOptions>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    ell: Spanned<i64>,
    #[serde(default)]
    fibers: Vec<Spanned<String>>,
    ample: Option<Spanned<Vec<i64>>>,
    polarization: Option<Spanned<Vec<i64>>>,
    candidate: Option<Spanned<Vec<i64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVectors {
    r: Spanned<i64>,
    a: Spanned<i64>,
    s: Spanned<i64>,
    b: Spanned<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptions {
    bound: Option<Spanned<i64>>,
    d: Option<Spanned<i64>>,
    e: Option<Spanned<i64>>,
    #[serde(rename = "box")]
    box_bound: Option<Spanned<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vectors {
    pub r: i64,
    pub a: i64,
    pub s: i64,
    pub b: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioOptions {
    /// Half-width of the uniqueness search box.
    pub bound: i64,
    /// Coefficients of `H` in `c₁(v)` and `c₁(w)` for theta normalization.
    pub d: i64,
    pub e: i64,
    /// Box bound of the forced-multiple brute force.
    pub box_bound: i64,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        ScenarioOptions {
            bound: DEFAULT_SEARCH_BOUND,
            d: 1,
            e: 1,
            box_bound: DEFAULT_BOX_BOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub ell: i64,
    pub fibers: Vec<FiberConfig>,
    pub model: SurfaceModel,
    /// `H`; defaults to `σ + (ℓ+1)f`.
    pub polarization: DivisorClass,
    /// Class `F` with `F² = 0`, `F·H = 1`; defaults to `f`.
    pub candidate: DivisorClass,
    pub vectors: Option<Vectors>,
    pub options: ScenarioOptions,
}

impl Scenario {
    /// `(v, w)` on the polarization, if the scenario has vectors.
    pub fn mukai_vectors(&self) -> Option<(MukaiVector, MukaiVector)> {
        self.vectors.map(|x| {
            (
                MukaiVector::new(x.r, self.polarization.clone(), x.a),
                MukaiVector::new(x.s, self.polarization.clone(), x.b),
            )
        })
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line<T>(&self, s: &Spanned<T>) -> usize {
        line_of(self.text, s.span().start)
    }

    fn int(&self, key: &str, s: &Spanned<i64>, lo: i64, hi: i64) -> Result<i64, ScenarioError> {
        let v = *s.get_ref();
        if v < lo || v > hi {
            return Err(ScenarioError::Range {
                line: self.line(s),
                key: key.to_string(),
                value: v.to_string(),
                constraint: format!("{lo} <= {key} <= {hi}"),
            });
        }
        Ok(v)
    }

    fn class(&self, key: &str, s: &Spanned<Vec<i64>>, model: &SurfaceModel) -> Result<DivisorClass, ScenarioError> {
        let v = s.get_ref();
        if let Some(x) = v.iter().find(|x| x.abs() > MAX_ABS) {
            return Err(ScenarioError::Range {
                line: self.line(s),
                key: key.to_string(),
                value: x.to_string(),
                constraint: format!("|{key}[i]| <= {MAX_ABS}"),
            });
        }
        model.class(v).map_err(|e| ScenarioError::Model {
            line: self.line(s),
            message: format!("{key}: {e}"),
        })
    }
}

fn parse_fiber(spec: &str) -> Result<FiberConfig, String> {
    let (name, attach) = match spec.split_once('@') {
        Some((n, k)) => {
            let k: usize = k.trim().parse().map_err(|_| format!("bad attach index in {spec:?}"))?;
            if k == 0 {
                return Err(format!("attach index in {spec:?} is 1-based"));
            }
            (n.trim(), k - 1)
        }
        None => (spec.trim(), 0),
    };
    let ty: FiberType = name.parse().map_err(|e: crate::kodaira::KodairaError| e.to_string())?;
    FiberConfig::build(ty, attach).map_err(|e| e.to_string())
}

/// Picard number bound for a K3 surface.
pub const MAX_RANK: usize = 20;

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let cx = Ctx { text };
    let ell = cx.int("ell", &raw.surface.ell, 1, MAX_ABS)?;
    let mut fibers = Vec::new();
    for f in &raw.surface.fibers {
        let cfg = parse_fiber(f.get_ref()).map_err(|message| ScenarioError::Model {
            line: cx.line(f),
            message,
        })?;
        fibers.push(cfg);
    }
    let ell_line = cx.line(&raw.surface.ell);
    let rank = 2 + fibers.iter().map(|c| c.len() - 1).sum::<usize>();
    if rank > MAX_RANK {
        return Err(ScenarioError::Range {
            line: raw.surface.fibers.last().map_or(ell_line, |f| cx.line(f)),
            key: "fibers".into(),
            value: format!("rank {rank}"),
            constraint: format!("Picard rank <= {MAX_RANK}"),
        });
    }
    let mut model = SurfaceModel::elliptic(ell, &fibers).map_err(|e| ScenarioError::Model {
        line: ell_line,
        message: e.to_string(),
    })?;
    if let Some(a) = &raw.surface.ample {
        let ample = cx.class("ample", a, &model)?;
        model = model
            .with_reference_ample(Some(ample))
            .map_err(|e| ScenarioError::Model {
                line: cx.line(a),
                message: e.to_string(),
            })?;
    }
    let polarization = match &raw.surface.polarization {
        Some(p) => cx.class("polarization", p, &model)?,
        None => model
            .standard_polarization()
            .expect("elliptic models carry a fibration"),
    };
    let candidate = match &raw.surface.candidate {
        Some(c) => cx.class("candidate", c, &model)?,
        None => model
            .fibration()
            .expect("elliptic models carry a fibration")
            .fiber
            .clone(),
    };
    let vectors = match &raw.vectors {
        Some(v) => Some(Vectors {
            r: cx.int("r", &v.r, -MAX_ABS, MAX_ABS)?,
            a: cx.int("a", &v.a, -MAX_ABS, MAX_ABS)?,
            s: cx.int("s", &v.s, -MAX_ABS, MAX_ABS)?,
            b: cx.int("b", &v.b, -MAX_ABS, MAX_ABS)?,
        }),
        None => None,
    };
    let mut options = ScenarioOptions::default();
    if let Some(o) = &raw.options {
        if let Some(x) = &o.bound {
            options.bound = cx.int("bound", x, 0, MAX_SEARCH_BOUND)?;
        }
        if let Some(x) = &o.d {
            options.d = cx.int("d", x, -MAX_ABS, MAX_ABS)?;
        }
        if let Some(x) = &o.e {
            options.e = cx.int("e", x, -MAX_ABS, MAX_ABS)?;
        }
        if let Some(x) = &o.box_bound {
            options.box_bound = cx.int("box", x, 1, MAX_BOX_BOUND)?;
        }
    }
    Ok(Scenario {
        ell,
        fibers,
        model,
        polarization,
        candidate,
        vectors,
        options,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_s1() {
        let sc = parse_scenario("[surface]\nell = 21\n[vectors]\nr = 3\na = -7\ns = 3\nb = -7").unwrap();
        assert_eq!(sc.ell, 21);
        assert_eq!(
            sc.vectors,
            Some(Vectors {
                r: 3,
                a: -7,
                s: 3,
                b: -7
            })
        );
        assert_eq!(sc.polarization, DivisorClass::new([1, 22]));
        assert_eq!(sc.candidate, DivisorClass::new([0, 1]));
        assert_eq!(sc.options, ScenarioOptions::default());
    }

    #[test]
    fn parses_fibers_and_options() {
        let text = "[surface]\nell = 3\nfibers = [\"I2\", \"I3@2\"]\n[options]\nbound = 6\nbox = 8\n";
        let sc = parse_scenario(text).unwrap();
        assert_eq!(sc.model.rank(), 2 + 1 + 2);
        assert_eq!(sc.fibers[1].attach, 1);
        assert_eq!(sc.options.bound, 6);
        assert_eq!(sc.options.box_bound, 8);
    }

    #[test]
    fn reports_line_of_bad_value() {
        let err = parse_scenario("[surface]\nell = 21\n[vectors]\nr = x\na = 1\ns = 1\nb = 1").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = parse_scenario("[surface]\nell = 2\nelll = 3\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 3, .. }), "{err}");
        let err = parse_scenario("[surface]\nell = 2\n[extra]\nx = 1\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { .. }), "{err}");
    }

    #[test]
    fn range_violations_name_the_constraint() {
        let err = parse_scenario("[surface]\nell = 0\n").unwrap_err();
        match err {
            ScenarioError::Range {
                line, key, constraint, ..
            } => {
                assert_eq!((line, key.as_str()), (2, "ell"));
                assert_eq!(constraint, "1 <= ell <= 1000000");
            }
            other => panic!("{other}"),
        }
        let err = parse_scenario("[surface]\nell = 2\nfibers = [\"I1\"]\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Model { line: 3, .. }), "{err}");
        let err = parse_scenario("[surface]\nell = 2\nfibers = [\"I2@3\"]\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Model { line: 3, .. }), "{err}");
    }

    #[test]
    fn picard_rank_is_bounded() {
        let err = parse_scenario("[surface]\nell = 2\nfibers = [\"IIstar\", \"IIstar\", \"I4\"]\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Range { line: 3, .. }), "{err}");
        assert!(parse_scenario("[surface]\nell = 2\nfibers = [\"IIstar\", \"IIstar\"]\n").is_ok());
    }

    #[test]
    fn class_lengths_are_checked() {
        let err = parse_scenario("[surface]\nell = 2\ncandidate = [0, 1, 0]\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Model { line: 3, .. }), "{err}");
    }

    #[test]
    fn degree_one_is_accepted_here() {
        assert_eq!(parse_scenario("[surface]\nell = 1\n").unwrap().ell, 1);
    }
}

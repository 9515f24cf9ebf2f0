//! Mukai vectors `v = r + c₁ + a[pt]`, their pairings, the admissibility
//! conditions on an orthogonal pair `(v, w)` and the pointwise genericity
//! predicates for the subscheme `Z`.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::lattice::{DivisorClass, LatticeError, SurfaceModel};
use crate::report::{all_passed, Check, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MukaiError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("first Chern class {found} is not the polarization {expected}")]
    C1Mismatch { expected: String, found: String },
    #[error("model has no standard polarization")]
    NoPolarization,
    #[error("Mukai square {0} is odd")]
    OddPairing(i64),
    #[error("Mukai square {0} is below -2: the moduli space is empty")]
    EmptyModuli(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MukaiVector {
    pub r: i64,
    pub c1: DivisorClass,
    pub a: i64,
}

impl MukaiVector {
    pub fn new(r: i64, c1: DivisorClass, a: i64) -> Self {
        MukaiVector { r, c1, a }
    }

    /// `r + H + a[pt]` for the standard polarization of `model`.
    pub fn on_polarization(model: &SurfaceModel, r: i64, a: i64) -> Result<Self, MukaiError> {
        let h = model.standard_polarization().ok_or(MukaiError::NoPolarization)?;
        Ok(MukaiVector { r, c1: h, a })
    }

    pub fn gcd(&self) -> i64 {
        self.r.gcd(&self.c1.gcd()).gcd(&self.a)
    }

    pub fn is_primitive(&self) -> bool {
        self.gcd() == 1
    }
}

impl fmt::Display for MukaiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.r, self.c1, self.a)
    }
}

/// `⟨v, w⟩ = c₁·c₁′ − r a′ − r′ a`, normalized so that `dim M_v = ⟨v,v⟩ + 2`.
pub fn mukai_pair(model: &SurfaceModel, v: &MukaiVector, w: &MukaiVector) -> Result<i64, MukaiError> {
    Ok(model.pair(&v.c1, &w.c1)? - v.r * w.a - w.r * v.a)
}

/// `∫ v ∪ w = r a′ + c₁·c₁′ + a r′`.
pub fn cup_orthogonal(model: &SurfaceModel, v: &MukaiVector, w: &MukaiVector) -> Result<i64, MukaiError> {
    Ok(v.r * w.a + model.pair(&v.c1, &w.c1)? + v.a * w.r)
}

/// `(dim M_v, d_v)` with `dim = ⟨v,v⟩ + 2 = 2 d_v`.
pub fn moduli_dims(model: &SurfaceModel, v: &MukaiVector) -> Result<(i64, i64), MukaiError> {
    let sq = mukai_pair(model, v, v)?;
    if sq % 2 != 0 {
        return Err(MukaiError::OddPairing(sq));
    }
    if sq < -2 {
        return Err(MukaiError::EmptyModuli(sq));
    }
    let dim = sq + 2;
    Ok((dim, dim / 2))
}

pub fn chi_sheaf(v: &MukaiVector) -> i64 {
    v.r + v.a
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub checks: Vec<Check>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.verdict)
    }
}

fn require_polarization(model: &SurfaceModel, v: &MukaiVector) -> Result<DivisorClass, MukaiError> {
    let h = model.standard_polarization().ok_or(MukaiError::NoPolarization)?;
    if v.c1 != h {
        return Err(MukaiError::C1Mismatch {
            expected: model.describe(&h),
            found: model.describe(&v.c1),
        });
    }
    Ok(h)
}

/// Checks the hypotheses on `v = r + H + a[pt]`, `w = s + H + b[pt]`.
/// The per-vector rank bounds only matter for the choice of polarization and are
/// reported as warnings when they fail.
pub fn admissibility_check(
    model: &SurfaceModel,
    v: &MukaiVector,
    w: &MukaiVector,
) -> Result<AdmissibilityReport, MukaiError> {
    let h = require_polarization(model, v)?;
    require_polarization(model, w)?;
    let (r, a, s, b) = (v.r, v.a, w.r, w.a);
    let h2 = model.square(&h)?;
    let vv = mukai_pair(model, v, v)?;
    let ww = mukai_pair(model, w, w)?;
    let mut checks = vec![
        Check::pass_if("rank_v", r >= 3, format!("r = {r}")),
        Check::pass_if("rank_w", s >= 3, format!("s = {s}")),
        Check::pass_if("primitive_v", v.is_primitive(), format!("gcd = {}", v.gcd())),
        Check::pass_if("primitive_w", w.is_primitive(), format!("gcd = {}", w.gcd())),
    ];
    let cup = cup_orthogonal(model, v, w)?;
    checks.push(Check::pass_if(
        "cup_orthogonal",
        cup == 0,
        format!("H^2 = {h2}, -rb-sa = {}", -r * b - s * a),
    ));
    let bound = 2 * (r + s) * (r + s);
    checks.push(Check::pass_if(
        "square_sum",
        vv + ww >= bound,
        format!(
            "<v,v>+<w,w> = {} {} 2(r+s)^2 = {bound}",
            vv + ww,
            if vv + ww >= bound { ">=" } else { "<" }
        ),
    ));
    for (name, sq, rank) in [("rank_bound_v", vv, r), ("rank_bound_w", ww, s)] {
        let fb = 2 * (rank - 1) * (rank * rank + 1);
        let (verdict, rel) = if sq >= fb {
            (Verdict::Pass, ">=")
        } else {
            (Verdict::Warn, "<")
        };
        checks.push(Check::new(name, verdict, format!("{sq} {rel} {fb}")));
    }
    checks.push(Check::pass_if("chi_v", chi_sheaf(v) <= 0, chi_sheaf(v)));
    checks.push(Check::pass_if("chi_w", chi_sheaf(w) <= 0, chi_sheaf(w)));
    let lhs = -(a + b);
    let rhs = r + s;
    let (verdict, rel) = match lhs.cmp(&rhs) {
        std::cmp::Ordering::Greater => (Verdict::Pass, ">"),
        std::cmp::Ordering::Equal => (Verdict::Warn, "="),
        std::cmp::Ordering::Less => (Verdict::Fail, "<"),
    };
    checks.push(Check::new(
        "neg_a_plus_b",
        verdict,
        format!("-(a+b) = {lhs} {rel} r+s = {rhs}"),
    ));
    Ok(AdmissibilityReport { checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FiberKind {
    Smooth,
    Nodal,
    Cuspidal,
    Reducible,
}

impl fmt::Display for FiberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FiberKind::Smooth => "smooth",
            FiberKind::Nodal => "nodal",
            FiberKind::Cuspidal => "cuspidal",
            FiberKind::Reducible => "reducible",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PointFlags {
    pub at_node: bool,
    pub at_cusp: bool,
    pub on_component_intersection: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberPoints {
    pub kind: FiberKind,
    pub points: Vec<PointFlags>,
}

/// Points of `Z` grouped by the fiber containing them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenericityConfig {
    pub fibers: Vec<FiberPoints>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericityReport {
    pub checks: Vec<Check>,
}

impl GenericityReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }
}

/// Pointwise conditions under which `I_Z ⊗ O(rσ − (a−r+3)f)` is WIT₀, and
/// the degree inequality that makes the relevant Hom vanish on each fiber.
pub fn wit_genericity(config: &GenericityConfig, r: i64) -> GenericityReport {
    let mut checks = Vec::new();
    for (i, fp) in config.fibers.iter().enumerate() {
        let name = format!("fiber{}.{}", i + 1, fp.kind);
        let len = fp.points.len() as i64;
        match fp.kind {
            FiberKind::Smooth => {
                let flagged = fp
                    .points
                    .iter()
                    .any(|p| p.at_node || p.at_cusp || p.on_component_intersection);
                if flagged {
                    checks.push(Check::pass_if(
                        format!("{name}.flags"),
                        false,
                        "smooth fiber has no singular point",
                    ));
                }
                checks.push(Check::pass_if(format!("{name}.at_most_two"), len <= 2, len));
                // deg O_C(−(r−1)o + ζ − x)
                let degree = -(r - 1) + len - 1;
                checks.push(Check::pass_if(format!("{name}.degree"), degree < 0, degree));
            }
            kind => {
                checks.push(Check::pass_if(format!("{name}.at_most_one"), len <= 1, len));
                let bad = fp.points.iter().any(|p| match kind {
                    FiberKind::Nodal => p.at_node,
                    FiberKind::Cuspidal => p.at_cusp,
                    _ => p.on_component_intersection,
                });
                checks.push(Check::pass_if(format!("{name}.general_point"), !bad, !bad));
                // deg I_ζ((r−1)o) must be positive for H¹ to vanish.
                let degree = (r - 1) - len;
                checks.push(Check::pass_if(format!("{name}.degree"), degree > 0, degree));
            }
        }
    }
    GenericityReport { checks }
}

//! Classes with `F² = 0, F·H = 1`: reflection to a nef representative,
//! extraction of the section, the decomposition `H = σ + (ℓ+1)f` and
//! uniqueness of the fiber class.

use thiserror::Error;

use crate::kodaira::{KodairaError, DEFAULT_BOX_BOUND};
use crate::lattice::{DivisorClass, EffectiveSide, LatticeError, SurfaceModel};
use crate::report::{all_passed, Check, Verdict};

/// Reflections allowed before a model is declared inconsistent.
pub const REFLECTION_CAP: usize = 10_000;

/// Default half-width of the uniqueness enumeration box.
pub const DEFAULT_SEARCH_BOUND: i64 = 10;

/// Largest number of box points the uniqueness enumeration will visit.
pub const SEARCH_POINT_LIMIT: u128 = 200_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NlError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Kodaira(#[from] KodairaError),
    #[error("ell = 1 is excluded: the analysis needs the hypothesis ell != 1")]
    ExcludedDegreeOne,
    #[error("reflection curve has square {0}, expected -2")]
    NotMinusTwo(i64),
    #[error("model has no reference ample class")]
    MissingReferenceAmple,
    #[error("class has negative degree {0} against the reference ample class")]
    NegativeDegree(i64),
    #[error("reflection did not terminate after {0} steps; the model is inconsistent")]
    IterationCap(usize),
    #[error("reduced class is not nef: {0}")]
    NotNefAfterReduction(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search box of {0} points is too large")]
    SearchTooLarge(u128),
}

/// `D + (D·Γ)Γ`, the reflection in a (−2)-class; preserves `D²`.
pub fn reflect(model: &SurfaceModel, d: &DivisorClass, gamma: &DivisorClass) -> Result<DivisorClass, NlError> {
    let sq = model.square(gamma)?;
    if sq != -2 {
        return Err(NlError::NotMinusTwo(sq));
    }
    let k = model.pair(d, gamma)?;
    Ok(d + &(k * gamma))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReflectionStep {
    pub curve: String,
    /// `D·Γ < 0` before the step; the class changes by this multiple of `Γ`.
    pub multiplier: i64,
    pub degree_before: i64,
    pub degree_after: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NefReduction {
    pub result: DivisorClass,
    pub chain: Vec<ReflectionStep>,
}

/// Reflects along the first declared curve with negative pairing until none
/// remains. Every step lowers the degree against the reference ample class.
pub fn nef_reduce(model: &SurfaceModel, d: &DivisorClass) -> Result<NefReduction, NlError> {
    let ample = model.reference_ample().ok_or(NlError::MissingReferenceAmple)?;
    let mut current = d.clone();
    let mut degree = model.pair(&current, ample)?;
    if degree < 0 {
        return Err(NlError::NegativeDegree(degree));
    }
    let mut chain = Vec::new();
    loop {
        let mut next = None;
        for c in model.neg_curves() {
            let x = model.pair(&current, &c.class)?;
            if x < 0 {
                next = Some((c, x));
                break;
            }
        }
        let Some((curve, x)) = next else { break };
        if chain.len() == REFLECTION_CAP {
            return Err(NlError::IterationCap(REFLECTION_CAP));
        }
        current = reflect(model, &current, &curve.class)?;
        let after = model.pair(&current, ample)?;
        if after < 0 {
            return Err(NlError::NegativeDegree(after));
        }
        chain.push(ReflectionStep {
            curve: curve.label.clone(),
            multiplier: x,
            degree_before: degree,
            degree_after: after,
        });
        degree = after;
    }
    if let Some((label, x)) = model.nef_violations(&current)?.into_iter().next() {
        return Err(NlError::NotNefAfterReduction(format!("{label} pairs to {x}")));
    }
    Ok(NefReduction { result: current, chain })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Report {
    pub fiber: DivisorClass,
    pub section: DivisorClass,
    pub ell: i64,
    pub decomposition_ok: bool,
    pub reflection_chain: Vec<ReflectionStep>,
    pub checks: Vec<Check>,
}

impl Lemma1Report {
    pub fn passed(&self) -> bool {
        self.decomposition_ok && all_passed(&self.checks)
    }
}

/// Runs the section/fiber decomposition argument on a model: `F` is
/// effective, reduces to a nef fiber class `f` with `f·H = 1`, the class
/// `Σ = H − (ℓ+1)f` is an effective (−2)-class containing the section, and
/// every reducible fiber contributes a multiple of `f`, so `H = σ + (ℓ+1)f`.
pub fn lemma1_analyze(model: &SurfaceModel, h: &DivisorClass, f: &DivisorClass) -> Result<Lemma1Report, NlError> {
    let ell = model.ell();
    if model.ell_excluded() {
        return Err(NlError::ExcludedDegreeOne);
    }
    let h2 = model.square(h)?;
    if h2 != 2 * ell {
        return Err(NlError::Precondition(format!("H^2 = {h2}, expected {}", 2 * ell)));
    }
    let f2 = model.square(f)?;
    if f2 != 0 {
        return Err(NlError::Precondition(format!("F^2 = {f2}, expected 0")));
    }
    let fh = model.pair(f, h)?;
    if fh != 1 {
        return Err(NlError::Precondition(format!("F.H = {fh}, expected 1")));
    }
    if let Some((label, x)) = model.nef_violations(h)?.into_iter().next() {
        return Err(NlError::Precondition(format!("H is not nef: H.{label} = {x}")));
    }

    let mut checks = Vec::new();
    let chi_f = model.euler_char_divisor(f)?;
    checks.push(Check::pass_if("chi_F", chi_f == 2, chi_f));
    let side = model.decide_effective_side(f, h)?;
    checks.push(Check::pass_if("F_effective", side == EffectiveSide::Effective, side));

    let reduction = nef_reduce(model, f)?;
    let fiber = reduction.result.clone();
    let degrees: Vec<String> = std::iter::once(reduction.chain.first().map_or(
        model.pair(f, model.reference_ample().ok_or(NlError::MissingReferenceAmple)?)?,
        |s| s.degree_before,
    ))
    .chain(reduction.chain.iter().map(|s| s.degree_after))
    .map(|d| d.to_string())
    .collect();
    checks.push(Check::info(
        "reflection_chain",
        format!(
            "{} steps [{}] degrees {}",
            reduction.chain.len(),
            reduction
                .chain
                .iter()
                .map(|s| format!("{}:{}", s.curve, s.multiplier))
                .collect::<Vec<_>>()
                .join(" "),
            degrees.join(">")
        ),
    ));
    checks.push(Check::pass_if(
        "fiber_class",
        model.square(&fiber)? == 0 && model.is_nef(&fiber)?,
        model.describe(&fiber),
    ));
    let fiber_h = model.pair(&fiber, h)?;
    checks.push(Check::pass_if("fiber_degree", fiber_h == 1, fiber_h));
    checks.push(Check::pass_if("F_equals_fiber", &fiber == f, &fiber == f));

    let sigma = h - &((ell + 1) * &fiber);
    let s2 = model.square(&sigma)?;
    checks.push(Check::pass_if("Sigma_square", s2 == -2, s2));
    let chi_s = model.euler_char_divisor(&sigma)?;
    checks.push(Check::pass_if("chi_Sigma", chi_s == 1, chi_s));
    let sh = model.pair(&sigma, h)?;
    checks.push(Check::pass_if("Sigma_degree", sh == ell - 1 && sh > 0, sh));
    let sigma_side = model.decide_effective_side(&sigma, h)?;
    checks.push(Check::pass_if(
        "Sigma_effective",
        sigma_side == EffectiveSide::Effective,
        sigma_side,
    ));

    let mut meeting_once = Vec::new();
    for c in model.neg_curves() {
        if model.pair(&c.class, &fiber)? == 1 {
            meeting_once.push(c);
        }
    }
    let section = match meeting_once.as_slice() {
        [c] => {
            checks.push(Check::pass_if("section", true, &c.label));
            c.class.clone()
        }
        _ => {
            checks.push(Check::pass_if(
                "section",
                false,
                format!("{} declared curves meet f once", meeting_once.len()),
            ));
            return Ok(Lemma1Report {
                fiber,
                section: DivisorClass::zero(model.rank()),
                ell,
                decomposition_ok: false,
                reflection_chain: reduction.chain,
                checks,
            });
        }
    };
    let sec_f = model.pair(&section, &fiber)?;
    checks.push(Check::pass_if("section_meets_fiber_once", sec_f == 1, sec_f));

    // Σ − σ is supported on fibers: orthogonal to f.
    let residual = &sigma - &section;
    let res_f = model.pair(&residual, &fiber)?;
    checks.push(Check::pass_if(
        "residual_fiber_supported",
        res_f == 0,
        model.describe(&residual),
    ));

    if let Some(fb) = model.fibration() {
        for (i, emb) in fb.fibers.iter().enumerate() {
            let name = format!("fiber{}", i + 1);
            let rep = emb.config.forced_multiple_check(DEFAULT_BOX_BOUND)?;
            checks.push(Check::pass_if(
                format!("{name}.{}.forced_multiple", emb.config.fiber_type),
                rep.forced,
                format!("{} patterns insolvable", rep.patterns_checked.len()),
            ));
            let mut nef_slack = Vec::new();
            let mut residual_slack = Vec::new();
            for comp in &emb.components {
                nef_slack.push(model.pair(h, comp)? - model.pair(&section, comp)?);
                residual_slack.push(model.pair(&residual, comp)?);
            }
            let nef_ok = emb.components.iter().zip(&nef_slack).enumerate().all(|(j, (_, t))| {
                if j == emb.config.attach {
                    *t >= -1
                } else {
                    *t >= 0
                }
            });
            checks.push(Check::pass_if(format!("{name}.nef_slack"), nef_ok, join(&nef_slack)));
            checks.push(Check::pass_if(
                format!("{name}.contribution_is_fiber_multiple"),
                residual_slack.iter().all(|&x| x == 0),
                join(&residual_slack),
            ));
        }
    }

    // H − σ − (ℓ+1)f is exactly the residual.
    let decomposition_ok = residual.is_zero();
    checks.push(Check::new(
        "decomposition",
        Verdict::from_bool(decomposition_ok),
        format!("H - section - {}f = {}", ell + 1, model.describe(&residual)),
    ));

    Ok(Lemma1Report {
        fiber,
        section,
        ell,
        decomposition_ok,
        reflection_chain: reduction.chain,
        checks,
    })
}

fn join(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn quadratic(gram: &[Vec<i64>], d: &[i64]) -> i64 {
    gram.iter()
        .zip(d)
        .filter(|(_, &a)| a != 0)
        .map(|(row, &a)| a * row.iter().zip(d).map(|(g, b)| g * b).sum::<i64>())
        .sum()
}

/// Every class in the box `|dᵢ| ≤ bound` with `D² = 0` and `D·H = 1`, sorted.
///
/// The linear condition is solved for the coordinate with the smallest
/// nonzero `H`-pairing, so the box is enumerated in one dimension less.
pub fn uniqueness_search(model: &SurfaceModel, h: &DivisorClass, bound: i64) -> Result<Vec<DivisorClass>, NlError> {
    let n = model.rank();
    let g: Vec<i64> = (0..n)
        .map(|i| model.pair(&DivisorClass::basis(n, i), h))
        .collect::<Result<_, _>>()?;
    let Some(pivot) = (0..n).filter(|&i| g[i] != 0).min_by_key(|&i| (g[i].abs(), i)) else {
        return Ok(Vec::new());
    };
    let side = (2 * bound + 1) as u128;
    let points = side.checked_pow((n - 1) as u32).unwrap_or(u128::MAX);
    if points > SEARCH_POINT_LIMIT {
        return Err(NlError::SearchTooLarge(points));
    }
    let free: Vec<usize> = (0..n).filter(|&i| i != pivot).collect();
    let gram = model.gram();
    let mut found = Vec::new();
    let mut d = vec![-bound; n];
    d[pivot] = 0;
    loop {
        let rest: i64 = free.iter().map(|&i| d[i] * g[i]).sum();
        let rhs = 1 - rest;
        if rhs % g[pivot] == 0 {
            let x = rhs / g[pivot];
            if x.abs() <= bound {
                d[pivot] = x;
                if quadratic(gram, &d) == 0 {
                    found.push(DivisorClass(d.clone()));
                }
                d[pivot] = 0;
            }
        }
        // Odometer increment over the free coordinates.
        let mut advanced = false;
        for &i in free.iter().rev() {
            if d[i] < bound {
                d[i] += 1;
                advanced = true;
                break;
            }
            d[i] = -bound;
        }
        if !advanced {
            break;
        }
    }
    found.sort();
    Ok(found)
}

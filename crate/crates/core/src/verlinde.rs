//! Strange-duality numerics at the Hilbert-scheme level: the line bundle
//! `L`, the counts `C(χ(L), d_v) = C(χ(L), d_w)`, ranks of pushforwards,
//! theta normalizations and the twist `T` as a formal Picard expression.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use crate::lattice::{DivisorClass, SurfaceModel};
use crate::mukai::{self, MukaiError, MukaiVector};
use crate::report::{all_passed, Check};

/// Largest `χ(L)` for which binomials are expanded exactly.
pub const MAX_CHI: i64 = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerlindeError {
    #[error(transparent)]
    Mukai(#[from] MukaiError),
    #[error("model has no fibration")]
    NoFibration,
    #[error("v and w are not orthogonal: integral of v.w = {0}")]
    NotOrthogonal(i64),
    #[error("chi(L) = {0} exceeds the supported size {MAX_CHI}")]
    TooLarge(i64),
    #[error("binomial C({n}, {k}) is undefined")]
    BadBinomial { n: i64, k: i64 },
}

/// `C(n, k)` by the multiplicative formula; every partial quotient is exact.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineBundleL {
    /// `(r+s)σ + (r+s−a−b)f`.
    pub fiberwise: DivisorClass,
    /// Exponent of `H` in the universal bundle.
    pub exponent_h: i64,
    /// Exponent of `O(F)` in the universal bundle.
    pub exponent_f: i64,
    /// `(r+s)H + exponent_f·f` equals the fiberwise class.
    pub restriction_ok: bool,
}

pub fn build_l(model: &SurfaceModel, v: &MukaiVector, w: &MukaiVector) -> Result<LineBundleL, VerlindeError> {
    let fb = model.fibration().ok_or(VerlindeError::NoFibration)?;
    let h = model.standard_polarization().ok_or(VerlindeError::NoFibration)?;
    let (r, a, s, b) = (v.r, v.a, w.r, w.a);
    let ell = model.ell();
    let fiberwise = &((r + s) * &fb.section) + &((r + s - a - b) * &fb.fiber);
    let exponent_h = r + s;
    let exponent_f = -((r + s) * ell + a + b);
    let restricted = &(exponent_h * &h) + &(exponent_f * &fb.fiber);
    Ok(LineBundleL {
        restriction_ok: restricted == fiberwise,
        fiberwise,
        exponent_h,
        exponent_f,
    })
}

/// A strange-duality instance with its dimension counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdScenario {
    pub v: MukaiVector,
    pub w: MukaiVector,
    pub ell: i64,
    pub l: LineBundleL,
    pub l_square: i64,
    pub chi_l: i64,
    pub d_v: i64,
    pub d_w: i64,
    pub h0_v: BigUint,
    pub h0_w: BigUint,
    pub checks: Vec<Check>,
}

impl SdScenario {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }
}

fn checked_binomial(n: i64, k: i64) -> Result<BigUint, VerlindeError> {
    if n < 0 || k < 0 || k > n {
        return Err(VerlindeError::BadBinomial { n, k });
    }
    if n > MAX_CHI {
        return Err(VerlindeError::TooLarge(n));
    }
    Ok(binomial(n as u64, k as u64))
}

pub fn sd_counts(model: &SurfaceModel, v: &MukaiVector, w: &MukaiVector) -> Result<SdScenario, VerlindeError> {
    let cup = mukai::cup_orthogonal(model, v, w)?;
    if cup != 0 {
        return Err(VerlindeError::NotOrthogonal(cup));
    }
    let l = build_l(model, v, w)?;
    let l_square = model.square(&l.fiberwise).map_err(MukaiError::from)?;
    let chi_l = model.euler_char_divisor(&l.fiberwise).map_err(MukaiError::from)?;
    let (_, d_v) = mukai::moduli_dims(model, v)?;
    let (_, d_w) = mukai::moduli_dims(model, w)?;
    let h0_v = checked_binomial(chi_l, d_v)?;
    let h0_w = checked_binomial(chi_l, d_w)?;
    let checks = vec![
        Check::info("L", model.describe(&l.fiberwise)),
        Check::pass_if(
            "L_restriction",
            l.restriction_ok,
            format!("H^{} O(F)^{}", l.exponent_h, l.exponent_f),
        ),
        Check::info("L^2", l_square),
        Check::info("chi_L", chi_l),
        Check::info("d_v", d_v),
        Check::info("d_w", d_w),
        Check::pass_if(
            "dimension_sum",
            d_v + d_w == chi_l,
            format!("{d_v} + {d_w} = {}", d_v + d_w),
        ),
        Check::info("h0_v", &h0_v),
        Check::info("h0_w", &h0_w),
        Check::pass_if("h0_equal", h0_v == h0_w, h0_v == h0_w),
    ];
    Ok(SdScenario {
        v: v.clone(),
        w: w.clone(),
        ell: model.ell(),
        l,
        l_square,
        chi_l,
        d_v,
        d_w,
        h0_v,
        h0_w,
        checks,
    })
}

/// Ranks of `π_*θ`, `π_*L` and of the determinant factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushforwardRanks {
    pub theta: BigUint,
    pub l: i64,
    pub det_factor: i64,
}

pub fn pushforward_rank(sd: &SdScenario) -> PushforwardRanks {
    PushforwardRanks {
        theta: &sd.h0_v * &sd.h0_w,
        l: sd.chi_l,
        det_factor: 1,
    }
}

/// `C(χ, d_v)·C(χ, d_w)` from raw numbers.
pub fn theta_rank(chi_l: i64, d_v: i64, d_w: i64) -> Result<BigUint, VerlindeError> {
    Ok(checked_binomial(chi_l, d_v)? * checked_binomial(chi_l, d_w)?)
}

/// Formal product `λ^a (det π_*H)^b (det π_*H²)^c (det π_*L)^d H^e`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PicExpr {
    pub lambda: i64,
    pub det_h: i64,
    pub det_h2: i64,
    pub det_l: i64,
    pub h: i64,
}

impl PicExpr {
    pub fn to_array(self) -> [i64; 5] {
        [self.lambda, self.det_h, self.det_h2, self.det_l, self.h]
    }
}

impl Add for PicExpr {
    type Output = PicExpr;
    fn add(self, o: PicExpr) -> PicExpr {
        PicExpr {
            lambda: self.lambda + o.lambda,
            det_h: self.det_h + o.det_h,
            det_h2: self.det_h2 + o.det_h2,
            det_l: self.det_l + o.det_l,
            h: self.h + o.h,
        }
    }
}

impl Neg for PicExpr {
    type Output = PicExpr;
    fn neg(self) -> PicExpr {
        PicExpr {
            lambda: -self.lambda,
            det_h: -self.det_h,
            det_h2: -self.det_h2,
            det_l: -self.det_l,
            h: -self.h,
        }
    }
}

impl Sub for PicExpr {
    type Output = PicExpr;
    fn sub(self, o: PicExpr) -> PicExpr {
        self + (-o)
    }
}

impl fmt::Display for PicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["lambda", "detH", "detH2", "detL", "H"];
        let parts: Vec<String> = names
            .iter()
            .zip(self.to_array())
            .filter(|(_, e)| *e != 0)
            .map(|(n, e)| format!("{n}^{e}"))
            .collect();
        if parts.is_empty() {
            f.write_str("O")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// `(Θ_v, Θ_w) ∼ (Θ_v ⊗ t, Θ_w ⊗ t⁻¹)` for a twist `t` from the base.
pub fn twist_equivalent(p: (PicExpr, PicExpr), q: (PicExpr, PicExpr)) -> bool {
    q.0 - p.0 == -(q.1 - p.1)
}

/// Twist `T = λ^{−(r−d)(s−e)} (det π_*H)^{e(r−d)+d(s−e)} (det π_*H²)^{de}`.
pub fn twist_t(r: i64, s: i64, d: i64, e: i64) -> PicExpr {
    PicExpr {
        lambda: -(r - d) * (s - e),
        det_h: e * (r - d) + d * (s - e),
        det_h2: d * e,
        ..PicExpr::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThetaNormalization {
    pub alpha: i64,
    pub beta: i64,
    /// Exponent of `H` in the restriction of `Θ̄_w` to a fiber `X`.
    pub restriction_exponent: i64,
    /// Exponent of the pullback of `H` restoring a fiberwise trivial bundle.
    pub normalization_exponent: i64,
}

/// `α = a − r − dℓ`, `β = b − s − eℓ`; `Θ̄_w|_X = det E^{−β} = H^{−βd}`.
pub fn theta_normalization(ell: i64, r: i64, a: i64, s: i64, b: i64, d: i64, e: i64) -> ThetaNormalization {
    let alpha = a - r - d * ell;
    let beta = b - s - e * ell;
    ThetaNormalization {
        alpha,
        beta,
        restriction_exponent: -beta * d,
        normalization_exponent: beta * d,
    }
}

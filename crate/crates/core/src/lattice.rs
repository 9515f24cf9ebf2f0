//! Néron–Severi lattice models of K3 surfaces: divisor classes, the
//! intersection form, Riemann–Roch and effectivity decisions.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::kodaira::FiberConfig;
use crate::linalg::{self, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("class has {found} coefficients but the model has rank {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model has no basis")]
    EmptyBasis,
    #[error("{labels} basis labels for a rank {rank} Gram matrix")]
    LabelCount { labels: usize, rank: usize },
    #[error("Gram matrix is not square and symmetric")]
    NotSymmetric,
    #[error("Gram diagonal entry {index} is {value}; the lattice must be even")]
    OddDiagonal { index: usize, value: i64 },
    #[error(
        "Gram signature is ({positive}, {negative}) with {zero} null directions; expected (1, {expected_negative})"
    )]
    Signature {
        positive: usize,
        negative: usize,
        zero: usize,
        expected_negative: usize,
    },
    #[error("degree parameter ell = {0} must be positive")]
    NonPositiveEll(i64),
    #[error("declared curve {label} has square {square}, expected -2")]
    NotMinusTwo { label: String, square: i64 },
    #[error("reference ample class fails positivity: {0}")]
    NotAmple(String),
    #[error("class with chi = {chi} <= 0: Riemann-Roch does not force an effective side")]
    NotDecidable { chi: i64 },
    #[error("polarization is not nef and big: {0}")]
    NotNef(String),
}

/// Integer coefficient vector in a surface model's basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DivisorClass(pub Vec<i64>);

impl DivisorClass {
    pub fn new(coeffs: impl Into<Vec<i64>>) -> Self {
        DivisorClass(coeffs.into())
    }

    pub fn zero(rank: usize) -> Self {
        DivisorClass(vec![0; rank])
    }

    pub fn basis(rank: usize, index: usize) -> Self {
        let mut v = vec![0; rank];
        v[index] = 1;
        DivisorClass(v)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn gcd(&self) -> i64 {
        self.0.iter().fold(0, |g, &x| num_integer::gcd(g, x))
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: &DivisorClass) -> DivisorClass {
        assert_eq!(self.rank(), rhs.rank(), "adding classes of different rank");
        DivisorClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: &DivisorClass) -> DivisorClass {
        assert_eq!(self.rank(), rhs.rank(), "subtracting classes of different rank");
        DivisorClass(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        DivisorClass(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&DivisorClass> for i64 {
    type Output = DivisorClass;
    fn mul(self, rhs: &DivisorClass) -> DivisorClass {
        DivisorClass(rhs.0.iter().map(|a| self * a).collect())
    }
}

/// A declared irreducible (−2)-curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegCurve {
    pub label: String,
    pub class: DivisorClass,
}

/// A reducible fiber embedded in a model: its configuration and the class of
/// each component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedFiber {
    pub config: FiberConfig,
    pub components: Vec<DivisorClass>,
}

/// The elliptic structure a model was built with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fibration {
    pub section: DivisorClass,
    pub fiber: DivisorClass,
    pub fibers: Vec<EmbeddedFiber>,
}

/// Which side of `±D` Riemann–Roch and the polarization degree select.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffectiveSide {
    Effective,
    AntiEffective,
    Indeterminate,
}

impl fmt::Display for EffectiveSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectiveSide::Effective => "effective",
            EffectiveSide::AntiEffective => "anti-effective",
            EffectiveSide::Indeterminate => "indeterminate",
        })
    }
}

/// A Néron–Severi lattice model of a quasipolarized K3 of degree `2·ell`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceModel {
    labels: Vec<String>,
    gram: IntMatrix,
    ell: i64,
    neg_curves: Vec<NegCurve>,
    reference_ample: Option<DivisorClass>,
    fibration: Option<Fibration>,
}

impl SurfaceModel {
    /// Validates evenness, symmetry, hyperbolic signature and the declared
    /// curves; the reference ample class, when given, must be positive on
    /// itself and on every declared curve.
    pub fn new(
        labels: Vec<String>,
        gram: IntMatrix,
        ell: i64,
        neg_curves: Vec<NegCurve>,
        reference_ample: Option<DivisorClass>,
    ) -> Result<Self, LatticeError> {
        let n = gram.len();
        if n == 0 {
            return Err(LatticeError::EmptyBasis);
        }
        if labels.len() != n {
            return Err(LatticeError::LabelCount {
                labels: labels.len(),
                rank: n,
            });
        }
        if !linalg::is_symmetric(&gram) {
            return Err(LatticeError::NotSymmetric);
        }
        if let Some(i) = (0..n).find(|&i| gram[i][i] % 2 != 0) {
            return Err(LatticeError::OddDiagonal {
                index: i,
                value: gram[i][i],
            });
        }
        let inertia = linalg::inertia(&gram);
        if inertia.positive != 1 || inertia.zero != 0 {
            return Err(LatticeError::Signature {
                positive: inertia.positive,
                negative: inertia.negative,
                zero: inertia.zero,
                expected_negative: n - 1,
            });
        }
        if ell < 1 {
            return Err(LatticeError::NonPositiveEll(ell));
        }
        let model = SurfaceModel {
            labels,
            gram,
            ell,
            neg_curves,
            reference_ample: None,
            fibration: None,
        };
        for c in &model.neg_curves {
            let sq = model.square(&c.class)?;
            if sq != -2 {
                return Err(LatticeError::NotMinusTwo {
                    label: c.label.clone(),
                    square: sq,
                });
            }
        }
        model.with_reference_ample(reference_ample)
    }

    /// Replaces the reference ample class after validating it.
    pub fn with_reference_ample(mut self, ample: Option<DivisorClass>) -> Result<Self, LatticeError> {
        if let Some(h) = &ample {
            let sq = self.square(h)?;
            if sq <= 0 {
                return Err(LatticeError::NotAmple(format!("H'^2 = {sq}")));
            }
            for c in &self.neg_curves {
                let d = self.pair(h, &c.class)?;
                if d <= 0 {
                    return Err(LatticeError::NotAmple(format!("H'.{} = {d}", c.label)));
                }
            }
        }
        self.reference_ample = ample;
        Ok(self)
    }

    /// The rank-2 model `⟨σ, f⟩` with Gram `[[-2,1],[1,0]]`.
    pub fn rank_two(ell: i64) -> Result<Self, LatticeError> {
        Self::elliptic(ell, &[])
    }

    /// The model spanned by a section, the fiber class and every fiber
    /// component except the one meeting the section.
    ///
    /// Basis order is `(σ, f, …)` with the non-attach components of each
    /// fiber in declaration order; the attach component of each fiber is the
    /// class `f − Σ nᵢCᵢ`, since it has multiplicity one. Declared curves are
    /// `σ` followed by all components of every fiber. The reference ample
    /// class is `kσ + cf − Σ D` with `D` the fiber-supported class pairing to
    /// `−den` with each non-attach component.
    pub fn elliptic(ell: i64, fibers: &[FiberConfig]) -> Result<Self, LatticeError> {
        let extra: usize = fibers.iter().map(|c| c.len() - 1).sum();
        let n = 2 + extra;
        let mut gram = vec![vec![0i64; n]; n];
        gram[0][0] = -2;
        gram[0][1] = 1;
        gram[1][0] = 1;
        let mut labels = vec!["s".to_string(), "f".to_string()];
        let mut offset = 2;
        let mut placements = Vec::new();
        for (fi, cfg) in fibers.iter().enumerate() {
            let others: Vec<usize> = (0..cfg.len()).filter(|&i| i != cfg.attach).collect();
            for (a, &i) in others.iter().enumerate() {
                labels.push(format!("F{}.{}", fi + 1, cfg.labels[i]));
                for (b, &j) in others.iter().enumerate() {
                    gram[offset + a][offset + b] = cfg.gram[i][j];
                }
            }
            placements.push((offset, others));
            offset += cfg.len() - 1;
        }

        let section = DivisorClass::basis(n, 0);
        let fiber = DivisorClass::basis(n, 1);
        let mut neg_curves = vec![NegCurve {
            label: "s".to_string(),
            class: section.clone(),
        }];
        let mut embedded = Vec::new();
        for (fi, (cfg, (off, others))) in fibers.iter().zip(&placements).enumerate() {
            let mult = cfg
                .multiplicities()
                .map_err(|e| LatticeError::NotAmple(e.to_string()))?;
            let mut components = vec![DivisorClass::zero(n); cfg.len()];
            let mut attach = fiber.clone();
            for (a, &i) in others.iter().enumerate() {
                let c = DivisorClass::basis(n, off + a);
                attach = &attach - &(mult[i] * &c);
                components[i] = c;
            }
            components[cfg.attach] = attach;
            for (i, c) in components.iter().enumerate() {
                neg_curves.push(NegCurve {
                    label: format!("F{}.{}", fi + 1, cfg.labels[i]),
                    class: c.clone(),
                });
            }
            embedded.push(EmbeddedFiber {
                config: cfg.clone(),
                components,
            });
        }

        let mut model = SurfaceModel::new(labels, gram, ell, neg_curves, None)?;
        let ample = model.default_ample(fibers, &placements)?;
        model = model.with_reference_ample(Some(ample))?;
        model.fibration = Some(Fibration {
            section,
            fiber,
            fibers: embedded,
        });
        Ok(model)
    }

    fn default_ample(
        &self,
        fibers: &[FiberConfig],
        placements: &[(usize, Vec<usize>)],
    ) -> Result<DivisorClass, LatticeError> {
        let n = self.rank();
        let mut correction = DivisorClass::zero(n);
        let mut k = 1i64;
        for (cfg, (off, others)) in fibers.iter().zip(placements) {
            if others.is_empty() {
                continue;
            }
            // Solve A·x = -1 on the negative definite block of non-attach
            // components, then scale to integers.
            let block: Vec<Vec<BigRational>> = others
                .iter()
                .map(|&i| {
                    others
                        .iter()
                        .map(|&j| BigRational::from_integer(BigInt::from(cfg.gram[i][j])))
                        .collect()
                })
                .collect();
            let rhs = vec![-BigRational::one(); others.len()];
            let x = linalg::solve_unique(&block, &rhs)
                .ok_or_else(|| LatticeError::NotAmple("singular fiber block".into()))?;
            let den = x
                .iter()
                .fold(BigInt::one(), |acc, q| num_integer::Integer::lcm(&acc, q.denom()));
            let den_i = den.to_i64().unwrap_or(i64::MAX);
            let mult = cfg
                .multiplicities()
                .map_err(|e| LatticeError::NotAmple(e.to_string()))?;
            let mult_sum: i64 = others.iter().map(|&i| mult[i]).sum();
            for (a, q) in x.iter().enumerate() {
                let coeff = (q * BigRational::from_integer(den.clone())).to_integer();
                correction.0[off + a] += coeff.to_i64().unwrap_or(i64::MAX);
            }
            k = k.max(den_i * mult_sum + 1);
        }
        let mut c = 2 * k + 1;
        loop {
            let mut h = DivisorClass::zero(n);
            h.0[0] = k;
            h.0[1] = c;
            let h = &h - &correction;
            let positive = self.square(&h)? > 0
                && self
                    .neg_curves
                    .iter()
                    .all(|nc| self.pair(&h, &nc.class).map(|d| d > 0).unwrap_or(false));
            if positive {
                return Ok(h);
            }
            c += 1;
        }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn ell(&self) -> i64 {
        self.ell
    }

    /// `ell = 1` is accepted for construction but excluded from the
    /// section/fiber decomposition.
    pub fn ell_excluded(&self) -> bool {
        self.ell == 1
    }

    pub fn neg_curves(&self) -> &[NegCurve] {
        &self.neg_curves
    }

    pub fn reference_ample(&self) -> Option<&DivisorClass> {
        self.reference_ample.as_ref()
    }

    pub fn fibration(&self) -> Option<&Fibration> {
        self.fibration.as_ref()
    }

    /// `σ + (ell+1)·f` for models built with a fibration.
    pub fn standard_polarization(&self) -> Option<DivisorClass> {
        self.fibration
            .as_ref()
            .map(|fb| &fb.section + &((self.ell + 1) * &fb.fiber))
    }

    pub fn class(&self, coeffs: &[i64]) -> Result<DivisorClass, LatticeError> {
        self.check_dim(coeffs)?;
        Ok(DivisorClass(coeffs.to_vec()))
    }

    fn check_dim(&self, coeffs: &[i64]) -> Result<(), LatticeError> {
        if coeffs.len() != self.rank() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.rank(),
                found: coeffs.len(),
            });
        }
        Ok(())
    }

    /// `D₁ᵀ · G · D₂`.
    pub fn pair(&self, d1: &DivisorClass, d2: &DivisorClass) -> Result<i64, LatticeError> {
        self.check_dim(&d1.0)?;
        self.check_dim(&d2.0)?;
        Ok(self
            .gram
            .iter()
            .zip(&d1.0)
            .map(|(row, a)| a * row.iter().zip(&d2.0).map(|(g, b)| g * b).sum::<i64>())
            .sum())
    }

    pub fn square(&self, d: &DivisorClass) -> Result<i64, LatticeError> {
        self.pair(d, d)
    }

    /// Riemann–Roch on a K3: `χ(O(D)) = 2 + D²/2`.
    pub fn euler_char_divisor(&self, d: &DivisorClass) -> Result<i64, LatticeError> {
        let sq = self.square(d)?;
        debug_assert!(sq % 2 == 0, "even lattice produced odd square");
        Ok(2 + sq / 2)
    }

    /// Declared curves `c` with `D·c < 0`, plus the fiber class if `D·f < 0`.
    pub fn nef_violations(&self, d: &DivisorClass) -> Result<Vec<(String, i64)>, LatticeError> {
        let mut out = Vec::new();
        for c in &self.neg_curves {
            let x = self.pair(d, &c.class)?;
            if x < 0 {
                out.push((c.label.clone(), x));
            }
        }
        if let Some(fb) = &self.fibration {
            let x = self.pair(d, &fb.fiber)?;
            if x < 0 {
                out.push(("f".to_string(), x));
            }
        }
        Ok(out)
    }

    pub fn is_nef(&self, d: &DivisorClass) -> Result<bool, LatticeError> {
        Ok(self.nef_violations(d)?.is_empty())
    }

    /// Riemann–Roch gives `h⁰(D) + h⁰(−D) ≥ χ(O(D)) ≥ 1`, and the degree
    /// against a nef and big `H` picks the side.
    pub fn decide_effective_side(&self, d: &DivisorClass, h: &DivisorClass) -> Result<EffectiveSide, LatticeError> {
        let chi = self.euler_char_divisor(d)?;
        if chi < 1 {
            return Err(LatticeError::NotDecidable { chi });
        }
        let h2 = self.square(h)?;
        if h2 <= 0 {
            return Err(LatticeError::NotNef(format!("H^2 = {h2}")));
        }
        if let Some((label, x)) = self.nef_violations(h)?.into_iter().next() {
            return Err(LatticeError::NotNef(format!("H.{label} = {x}")));
        }
        let deg = self.pair(d, h)?;
        Ok(match deg.signum() {
            1 => EffectiveSide::Effective,
            -1 => EffectiveSide::AntiEffective,
            _ => EffectiveSide::Indeterminate,
        })
    }

    pub fn describe(&self, d: &DivisorClass) -> String {
        let terms: Vec<String> =
            d.0.iter()
                .zip(&self.labels)
                .filter(|(c, _)| **c != 0)
                .map(|(c, l)| match c {
                    1 => l.clone(),
                    -1 => format!("-{l}"),
                    _ => format!("{c}{l}"),
                })
                .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ").replace("+ -", "- ")
        }
    }
}

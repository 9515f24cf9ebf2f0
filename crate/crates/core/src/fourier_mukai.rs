//! Cohomological action of the relative Fourier–Mukai transform `S` with
//! kernel `I_Δ ⊗ O(p*σ + q*σ)` on classes `(r, k, m, χ)`: rank, the `σ`-
//! and `f`-coefficients of `c₁`, and Euler characteristic.
//!
//! The transform matrix is not written down anywhere in this module. It is
//! solved for from the determinant formula, the rank of a restriction to a
//! fiber, the image of a point and the shape of the transform of `E^∨`, and
//! then checked to be an integral isometry.

use std::fmt;
use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::lattice::{DivisorClass, SurfaceModel};
use crate::linalg::{self, IntMatrix};
use crate::mukai::{self, MukaiError, MukaiVector};
use crate::report::{all_passed, Check, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FmError {
    #[error(transparent)]
    Mukai(#[from] MukaiError),
    #[error("first Chern class {0} leaves the (s, f) sublattice")]
    OffSublattice(String),
    #[error("transform constraints are inconsistent: {0}")]
    Inconsistent(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Numerical class `(r, k, m, χ)` with `c₁ = kσ + mf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NumClass {
    pub r: i64,
    pub k: i64,
    pub m: i64,
    pub chi: i64,
}

impl NumClass {
    pub const POINT: NumClass = NumClass {
        r: 0,
        k: 0,
        m: 0,
        chi: 1,
    };
    pub const STRUCTURE_SHEAF: NumClass = NumClass {
        r: 1,
        k: 0,
        m: 0,
        chi: 2,
    };

    pub fn new(r: i64, k: i64, m: i64, chi: i64) -> Self {
        NumClass { r, k, m, chi }
    }

    pub fn from_array(v: [i64; 4]) -> Self {
        NumClass::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [i64; 4] {
        [self.r, self.k, self.m, self.chi]
    }

    /// Derived dual: `c₁` changes sign; rank and `χ` are kept (Serre duality).
    pub fn dual(self) -> Self {
        NumClass::new(self.r, -self.k, -self.m, self.chi)
    }

    /// Odd shift.
    pub fn shifted(self) -> Self {
        NumClass::new(-self.r, -self.k, -self.m, -self.chi)
    }

    /// Class of a sheaf with Mukai vector `v`; `c₁(v)` must lie in `⟨σ, f⟩`.
    pub fn from_mukai(model: &SurfaceModel, v: &MukaiVector) -> Result<Self, FmError> {
        let (k, m) = sublattice_coords(model, &v.c1)?;
        Ok(NumClass::new(v.r, k, m, mukai::chi_sheaf(v)))
    }

    pub fn c1(self) -> [i64; 2] {
        [self.k, self.m]
    }

    /// `⟨u, u′⟩` with Mukai vector `(r, c₁, χ − r)`.
    pub fn mukai_pair(self, o: NumClass) -> i64 {
        self.k * o.m + o.k * self.m - 2 * self.k * o.k - self.r * (o.chi - o.r) - o.r * (self.chi - self.r)
    }
}

impl fmt::Display for NumClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.r, self.k, self.m, self.chi)
    }
}

fn sublattice_coords(model: &SurfaceModel, d: &DivisorClass) -> Result<(i64, i64), FmError> {
    let standard = model.fibration().is_some_and(|fb| {
        fb.section == DivisorClass::basis(model.rank(), 0) && fb.fiber == DivisorClass::basis(model.rank(), 1)
    });
    let c = d.coeffs();
    if !standard || c.len() < 2 || c[2..].iter().any(|&x| x != 0) {
        return Err(FmError::OffSublattice(model.describe(d)));
    }
    Ok((c[0], c[1]))
}

/// `D₁·D₂` for `D = xσ + yf`.
pub fn sf_pair(d1: [i64; 2], d2: [i64; 2]) -> i64 {
    -2 * d1[0] * d2[0] + d1[0] * d2[1] + d1[1] * d2[0]
}

/// `χ(O(D)) = 2 + D²/2` on `⟨σ, f⟩`.
pub fn chi_line_bundle(d: [i64; 2]) -> i64 {
    2 + sf_pair(d, d) / 2
}

/// `χ(V ⊗ O(D)) = χ + c₁·D + r·D²/2`.
pub fn twist_euler(v: NumClass, d: [i64; 2]) -> i64 {
    v.chi + sf_pair(v.c1(), d) + v.r * sf_pair(d, d) / 2
}

fn add(a: [i64; 2], b: [i64; 2]) -> [i64; 2] {
    [a[0] + b[0], a[1] + b[1]]
}

fn neg(a: [i64; 2]) -> [i64; 2] {
    [-a[0], -a[1]]
}

/// Intermediate line bundles (as `(σ, f)` coefficients) in the computation
/// of `det S(V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetCheckpoints {
    /// `χ(V|_f)`, the exponent of `O(σ)` coming from `q*O(σ)`.
    pub fiber_degree: i64,
    /// `det V(σ)⁻¹`.
    pub diagonal_inverse: [i64; 2],
    /// `det V(σ)⁻¹ ⊗ O(kσ)`.
    pub diagonal_sum: [i64; 2],
    /// `χ(V(σ−f))`, from `j_*O_Y = O − p̄*O(−f) ⊗ q̄*O(−f)`.
    pub twisted_euler: i64,
    /// `O(−f)^{−χ(V(σ−f))}`.
    pub product_term: [i64; 2],
    pub total: [i64; 2],
}

/// `c₁(S(V))` via the chain of the determinant computation.
pub fn det_transform(v: NumClass) -> DetCheckpoints {
    // Riemann–Roch on a genus-one fiber: χ(V|_f) = c₁(V)·f.
    let fiber_degree = sf_pair(v.c1(), [0, 1]);
    let det_v_sigma = add(v.c1(), [v.r, 0]);
    let diagonal_inverse = neg(det_v_sigma);
    let diagonal_sum = add(diagonal_inverse, [fiber_degree, 0]);
    let twisted_euler = twist_euler(v, [1, -1]);
    let product_term = [0, twisted_euler];
    DetCheckpoints {
        fiber_degree,
        diagonal_inverse,
        diagonal_sum,
        twisted_euler,
        product_term,
        total: add(diagonal_sum, product_term),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    S,
    T,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::S => "S",
            Direction::T => "T",
        })
    }
}

/// `M` and `M_T = −M⁻¹` acting on column vectors `(r, k, m, χ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformMatrices {
    pub m: IntMatrix,
    pub m_t: IntMatrix,
    /// Number of linear constraints the matrix was solved from.
    pub constraints: usize,
}

/// Shape of `S(E^∨)` for `v = r + H + a[pt]`: `I_Z ⊗ O(rσ − (a−r+3)f)[−1]`.
fn fm1_image(r: i64, a: i64, d_v: i64) -> NumClass {
    let d = [r, -(a - r + 3)];
    NumClass::new(1, d[0], d[1], chi_line_bundle(d) - d_v).shifted()
}

/// Shape of `S(F)` for `w = s + H + b[pt]`: `I_W^∨ ⊗ O(−sσ + (b−s−3)f)`.
fn fm2_image(s: i64, b: i64, d_w: i64) -> NumClass {
    let d = [-s, b - s - 3];
    NumClass::new(1, d[0], d[1], chi_line_bundle(d) - d_w)
}

fn dual_of_polarized(r: i64, a: i64, ell: i64) -> NumClass {
    NumClass::new(r, 1, ell + 1, r + a).dual()
}

/// Mukai pairing on `(r, k, m, χ)` as a Gram matrix.
pub fn mukai_gram() -> IntMatrix {
    let e = |i: usize| {
        let mut v = [0i64; 4];
        v[i] = 1;
        NumClass::from_array(v)
    };
    (0..4)
        .map(|i| (0..4).map(|j| e(i).mukai_pair(e(j))).collect())
        .collect()
}

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

fn basis(j: usize) -> NumClass {
    let mut v = [0i64; 4];
    v[j] = 1;
    NumClass::from_array(v)
}

fn solve_matrices() -> Result<TransformMatrices, FmError> {
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    // One equation: (row `i` of M)·u = value.
    let mut equation = |i: usize, u: NumClass, value: i64| {
        let mut row = vec![BigRational::zero(); 16];
        for (j, x) in u.to_array().into_iter().enumerate() {
            row[4 * i + j] = rat(x);
        }
        rows.push(row);
        rhs.push(rat(value));
    };
    for j in 0..4 {
        let u = basis(j);
        // Rank of S(V) is the degree of V on a fiber.
        let det = det_transform(u);
        equation(0, u, det.fiber_degree);
        equation(1, u, det.total[0]);
        equation(2, u, det.total[1]);
    }
    // The point sheaf goes to I_x(o), of class (0, 0, 1, 0).
    let image_of_point = NumClass::new(0, 0, 1, 0).to_array();
    for (i, &value) in image_of_point.iter().enumerate() {
        equation(i, NumClass::POINT, value);
    }
    for ell in [2, 5] {
        for r in [1, 3] {
            for a in [0, -2] {
                let dual = dual_of_polarized(r, a, ell);
                let d_v = ell - r * a + 1;
                let image = fm1_image(r, a, d_v).to_array();
                for (i, &value) in image.iter().enumerate() {
                    equation(i, dual, value);
                }
            }
        }
    }
    let count = rows.len();
    let sol = linalg::solve_unique(&rows, &rhs).ok_or_else(|| FmError::Inconsistent("no unique solution".into()))?;
    let flat: Vec<Vec<BigRational>> = sol.chunks(4).map(|c| c.to_vec()).collect();
    let m = linalg::to_int_matrix(&flat).ok_or_else(|| FmError::Inconsistent("non-integral solution".into()))?;

    let det = linalg::determinant(&m);
    if det != 1.into() && det != (-1).into() {
        return Err(FmError::Inconsistent(format!("determinant {det}")));
    }
    let q = mukai_gram();
    if linalg::mat_mul(&linalg::transpose(&m), &linalg::mat_mul(&q, &m)) != q {
        return Err(FmError::Inconsistent("not an isometry".into()));
    }
    let inv = linalg::inverse(&m).ok_or_else(|| FmError::Inconsistent("singular".into()))?;
    let neg_inv: Vec<Vec<BigRational>> = inv.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    let m_t = linalg::to_int_matrix(&neg_inv).ok_or_else(|| FmError::Inconsistent("inverse not integral".into()))?;
    let minus_one: IntMatrix = linalg::identity(4)
        .iter()
        .map(|r| r.iter().map(|x| -x).collect())
        .collect();
    if linalg::mat_mul(&m, &m_t) != minus_one || linalg::mat_mul(&m_t, &m) != minus_one {
        return Err(FmError::Inconsistent("S∘T != [-1]".into()));
    }
    Ok(TransformMatrices {
        m,
        m_t,
        constraints: count,
    })
}

/// Solves for `M` once and caches it.
pub fn transform_matrices() -> Result<&'static TransformMatrices, FmError> {
    static CELL: OnceLock<Result<TransformMatrices, FmError>> = OnceLock::new();
    CELL.get_or_init(solve_matrices).as_ref().map_err(Clone::clone)
}

pub fn apply_transform(v: NumClass, direction: Direction) -> Result<NumClass, FmError> {
    let t = transform_matrices()?;
    let m = match direction {
        Direction::S => &t.m,
        Direction::T => &t.m_t,
    };
    let out = linalg::mat_vec(m, &v.to_array());
    Ok(NumClass::new(out[0], out[1], out[2], out[3]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FmReport {
    pub s_dual_v: NumClass,
    pub s_w: NumClass,
    pub length_z: i64,
    pub length_w: i64,
    /// `(σ, f)` coefficients of `L`.
    pub l: [i64; 2],
    pub l_square: i64,
    pub checks: Vec<Check>,
}

impl FmReport {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }
}

fn show(d: [i64; 2]) -> String {
    format!("{}s{:+}f", d[0], d[1])
}

/// Transforms `E^∨` and `F`, reads off the subscheme lengths and the line
/// bundle `L` from their shapes, and checks them against `d_v`, `d_w` and
/// `(r+s)σ + (r+s−a−b)f`.
pub fn fm_consistency(model: &SurfaceModel, v: &MukaiVector, w: &MukaiVector) -> Result<FmReport, FmError> {
    let adm = mukai::admissibility_check(model, v, w)?;
    let failed: Vec<&str> = adm
        .checks
        .iter()
        .filter(|c| c.verdict == Verdict::Fail)
        .map(|c| c.name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(FmError::Precondition(format!(
            "admissibility fails: {}",
            failed.join(", ")
        )));
    }
    let (r, a, s, b) = (v.r, v.a, w.r, w.a);
    let (_, d_v) = mukai::moduli_dims(model, v)?;
    let (_, d_w) = mukai::moduli_dims(model, w)?;
    let e_dual = NumClass::from_mukai(model, v)?.dual();
    let f_class = NumClass::from_mukai(model, w)?;
    let s_dual_v = apply_transform(e_dual, Direction::S)?;
    let s_w = apply_transform(f_class, Direction::S)?;
    let mut checks = vec![
        Check::info("E_dual", e_dual),
        Check::info("S(E_dual)", s_dual_v),
        Check::info("F", f_class),
        Check::info("S(F)", s_w),
    ];

    // S(E^∨) = I_Z ⊗ O(D)[−1].
    let unshifted = s_dual_v.shifted();
    let d = [r, -(a - r + 3)];
    checks.push(Check::pass_if("fm1.rank", s_dual_v.r == -1, s_dual_v.r));
    checks.push(Check::pass_if(
        "fm1.c1",
        unshifted.c1() == d,
        format!("{} vs {}", show(unshifted.c1()), show(d)),
    ));
    let det1 = det_transform(e_dual).total;
    checks.push(Check::pass_if(
        "fm1.det",
        det1 == [-r, a - r + 3] && det1 == s_dual_v.c1(),
        show(det1),
    ));
    let length_z = chi_line_bundle(unshifted.c1()) - unshifted.chi;
    checks.push(Check::pass_if(
        "fm1.length",
        length_z == d_v,
        format!("len Z = {length_z}, d_v = {d_v}"),
    ));

    // S(F) = I_W^∨ ⊗ O(D′).
    let d2 = [-s, b - s - 3];
    checks.push(Check::pass_if("fm2.rank", s_w.r == 1, s_w.r));
    checks.push(Check::pass_if(
        "fm2.c1",
        s_w.c1() == d2,
        format!("{} vs {}", show(s_w.c1()), show(d2)),
    ));
    let length_w = chi_line_bundle(s_w.c1()) - s_w.chi;
    checks.push(Check::pass_if(
        "fm2.length",
        length_w == d_w,
        format!("len W = {length_w}, d_w = {d_w}"),
    ));

    let shape1 = fm1_image(r, a, d_v);
    let shape2 = fm2_image(s, b, d_w);
    checks.push(Check::pass_if("fm1.shape", s_dual_v == shape1, shape1));
    checks.push(Check::pass_if("fm2.shape", s_w == shape2, shape2));

    let l = add(unshifted.c1(), neg(s_w.c1()));
    let expected = [r + s, r + s - a - b];
    checks.push(Check::pass_if(
        "L",
        l == expected,
        format!("{} vs {}", show(l), show(expected)),
    ));
    let lf = sf_pair(l, [0, 1]);
    let ls = sf_pair(l, [1, 0]);
    let l_square = sf_pair(l, l);
    checks.push(Check::pass_if("L.f", lf == r + s && lf > 0, lf));
    checks.push(Check::pass_if("L.s", ls == -(a + b) - (r + s) && ls >= 0, ls));
    checks.push(Check::pass_if(
        "L^2",
        l_square == 2 * (r + s) * (-a - b) && l_square > 0,
        l_square,
    ));
    Ok(FmReport {
        s_dual_v,
        s_w,
        length_z,
        length_w,
        l,
        l_square,
        checks,
    })
}

/// Construction checks for the transform matrices, for reports.
pub fn matrix_checks() -> Result<Vec<Check>, FmError> {
    let t = transform_matrices()?;
    let fmt_m = |m: &IntMatrix| {
        m.iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    };
    let q = mukai_gram();
    let minus_one: IntMatrix = linalg::identity(4)
        .iter()
        .map(|r| r.iter().map(|x| -x).collect())
        .collect();
    Ok(vec![
        Check::info("constraints", t.constraints),
        Check::info("M", fmt_m(&t.m)),
        Check::info("M_T", fmt_m(&t.m_t)),
        Check::pass_if(
            "det_M",
            linalg::determinant(&t.m).magnitude().is_one(),
            linalg::determinant(&t.m),
        ),
        Check::pass_if(
            "isometry",
            linalg::mat_mul(&linalg::transpose(&t.m), &linalg::mat_mul(&q, &t.m)) == q,
            "M^t Q M = Q",
        ),
        Check::pass_if(
            "S_T_is_minus_one",
            linalg::mat_mul(&t.m, &t.m_t) == minus_one && linalg::mat_mul(&t.m_t, &t.m) == minus_one,
            "M M_T = M_T M = -I",
        ),
        Check::pass_if(
            "point_anchor",
            apply_transform(NumClass::POINT, Direction::S)? == NumClass::new(0, 0, 1, 0),
            apply_transform(NumClass::POINT, Direction::S)?,
        ),
    ])
}

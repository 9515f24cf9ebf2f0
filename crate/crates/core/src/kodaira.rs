//! Reducible Kodaira fibers as negative semidefinite integer forms.
//!
//! A fiber contributes `Σ mᵢCᵢ` to a nef class meeting the section on the
//! attach component. The nef conditions say that the slack `t = G·m` is
//! nonnegative away from the attach component and at least `−1` there.
//! Because the multiplicity vector `n` spans the kernel, `Σ nᵢtᵢ = 0`, so
//! either `t = 0` (and `m` is a multiple of the fiber) or `t_attach = −1`
//! with `Σ_{i≠attach} nᵢtᵢ = 1`. The second case is ruled out by showing each
//! resulting system `G·m = t` has no integral solution.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg::{self, IntMatrix};
use crate::report::Check;
use crate::snf::{self, Cokernel, IntegralSolution, SmithForm};

/// Default half-width of the brute-force box `|mᵢ| ≤ bound`.
pub const DEFAULT_BOX_BOUND: i64 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KodairaError {
    #[error("invalid fiber type {0:?}")]
    InvalidType(String),
    #[error("attach index {index} out of range for {components} components")]
    AttachOutOfRange { index: usize, components: usize },
    #[error("fiber Gram matrix is malformed: {0}")]
    Malformed(String),
    #[error("kernel of the fiber Gram matrix has rank {0}, expected 1")]
    KernelRank(usize),
    #[error("kernel vector has entries of mixed sign")]
    MixedSignKernel,
    #[error("attach component {index} has multiplicity {multiplicity}, expected 1")]
    AttachMultiplicity { index: usize, multiplicity: i64 },
    #[error("fiber configuration fails Zariski's lemma")]
    ZariskiFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FiberType {
    /// `I_n`, `n ≥ 2`: a cycle of `n` rational curves.
    I(u32),
    III,
    IV,
    /// `I*_n`, `n ≥ 0`, affine `D_{n+4}` with `n + 5` components.
    IStar(u32),
    IIStar,
    IIIStar,
    IVStar,
}

impl fmt::Display for FiberType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberType::I(n) => write!(f, "I{n}"),
            FiberType::III => write!(f, "III"),
            FiberType::IV => write!(f, "IV"),
            FiberType::IStar(n) => write!(f, "Istar{n}"),
            FiberType::IIStar => write!(f, "IIstar"),
            FiberType::IIIStar => write!(f, "IIIstar"),
            FiberType::IVStar => write!(f, "IVstar"),
        }
    }
}

impl FromStr for FiberType {
    type Err = KodairaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || KodairaError::InvalidType(s.to_string());
        match s {
            "III" => return Ok(FiberType::III),
            "IV" => return Ok(FiberType::IV),
            "IIstar" => return Ok(FiberType::IIStar),
            "IIIstar" => return Ok(FiberType::IIIStar),
            "IVstar" => return Ok(FiberType::IVStar),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("Istar") {
            let n: u32 = rest.parse().map_err(|_| bad())?;
            return Ok(FiberType::IStar(n));
        }
        if let Some(rest) = s.strip_prefix('I') {
            let n: u32 = rest.parse().map_err(|_| bad())?;
            if n < 2 {
                return Err(bad());
            }
            return Ok(FiberType::I(n));
        }
        Err(bad())
    }
}

impl FiberType {
    pub fn component_count(&self) -> usize {
        match *self {
            FiberType::I(n) => n as usize,
            FiberType::III => 2,
            FiberType::IV => 3,
            FiberType::IStar(n) => n as usize + 5,
            FiberType::IIStar => 9,
            FiberType::IIIStar => 8,
            FiberType::IVStar => 7,
        }
    }

    fn labels(&self) -> Vec<String> {
        match *self {
            FiberType::IStar(n) => (1..=4)
                .map(|i| format!("C{i}"))
                .chain((1..=n + 1).map(|i| format!("D{i}")))
                .collect(),
            _ => (1..=self.component_count()).map(|i| format!("C{i}")).collect(),
        }
    }

    /// Incidence edges; a repeated edge adds to the intersection number.
    fn edges(&self) -> Vec<(usize, usize)> {
        match *self {
            FiberType::I(n) => {
                let n = n as usize;
                (0..n).map(|i| (i, (i + 1) % n)).collect()
            }
            FiberType::III => vec![(0, 1), (0, 1)],
            FiberType::IV => vec![(0, 1), (1, 2), (2, 0)],
            FiberType::IStar(n) => {
                let last = 4 + n as usize;
                let mut e = vec![(0, 4), (1, 4), (2, last), (3, last)];
                e.extend((4..last).map(|i| (i, i + 1)));
                e
            }
            // Long arm C1..C8, branch C9 at C6.
            FiberType::IIStar => {
                let mut e: Vec<_> = (0..7).map(|i| (i, i + 1)).collect();
                e.push((5, 8));
                e
            }
            // Chain C1..C7, branch C8 at C4.
            FiberType::IIIStar => {
                let mut e: Vec<_> = (0..6).map(|i| (i, i + 1)).collect();
                e.push((3, 7));
                e
            }
            // Arm C1-C2-C3-C4-C5 through the center C3, third arm C3-C6-C7.
            FiberType::IVStar => vec![(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberConfig {
    pub fiber_type: FiberType,
    pub labels: Vec<String>,
    pub gram: IntMatrix,
    /// Component meeting the section.
    pub attach: usize,
}

impl FiberConfig {
    /// Standard intersection matrix of a reducible Kodaira fiber.
    pub fn build(fiber_type: FiberType, attach: usize) -> Result<Self, KodairaError> {
        match fiber_type {
            FiberType::I(n) if n < 2 => return Err(KodairaError::InvalidType(fiber_type.to_string())),
            _ => {}
        }
        let k = fiber_type.component_count();
        let mut gram = vec![vec![0i64; k]; k];
        for (i, row) in gram.iter_mut().enumerate() {
            row[i] = -2;
        }
        for (a, b) in fiber_type.edges() {
            gram[a][b] += 1;
            gram[b][a] += 1;
        }
        Self::from_parts(fiber_type, fiber_type.labels(), gram, attach)
    }

    /// Wraps an arbitrary intersection matrix; useful for perturbed
    /// configurations that should fail the Zariski check.
    pub fn from_parts(
        fiber_type: FiberType,
        labels: Vec<String>,
        gram: IntMatrix,
        attach: usize,
    ) -> Result<Self, KodairaError> {
        let k = gram.len();
        if labels.len() != k {
            return Err(KodairaError::Malformed(format!(
                "{} labels for {k} components",
                labels.len()
            )));
        }
        if !linalg::is_symmetric(&gram) {
            return Err(KodairaError::Malformed("not symmetric".into()));
        }
        if let Some(i) = (0..k).find(|&i| gram[i][i] != -2) {
            return Err(KodairaError::Malformed(format!("diagonal entry {i} is {}", gram[i][i])));
        }
        if attach >= k {
            return Err(KodairaError::AttachOutOfRange {
                index: attach,
                components: k,
            });
        }
        Ok(FiberConfig {
            fiber_type,
            labels,
            gram,
            attach,
        })
    }

    pub fn len(&self) -> usize {
        self.gram.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gram.is_empty()
    }

    /// The primitive positive generator of `ker G` (the fiber multiplicities).
    pub fn fiber_class(&self) -> Result<Vec<i64>, KodairaError> {
        let ns = linalg::integer_nullspace(&self.gram);
        if ns.len() != 1 {
            return Err(KodairaError::KernelRank(ns.len()));
        }
        let mut v = ns.into_iter().next().unwrap_or_default();
        if v.iter().any(|x| x.is_zero()) {
            return Err(KodairaError::MixedSignKernel);
        }
        if v[0].is_negative() {
            v.iter_mut().for_each(|x| *x = -x.clone());
        }
        if v.iter().any(|x| x.is_negative()) {
            return Err(KodairaError::MixedSignKernel);
        }
        v.iter()
            .map(|x| {
                x.to_i64()
                    .ok_or_else(|| KodairaError::Malformed("multiplicity overflow".into()))
            })
            .collect()
    }

    /// Alias of [`FiberConfig::fiber_class`].
    pub fn multiplicities(&self) -> Result<Vec<i64>, KodairaError> {
        self.fiber_class()
    }

    pub fn zariski_check(&self) -> ZariskiReport {
        let inertia = linalg::inertia(&self.gram);
        let semidefinite = inertia.positive == 0;
        let kernel_rank = inertia.zero;
        let fiber_class = self.fiber_class().ok();
        let annihilates = fiber_class
            .as_ref()
            .map(|n| linalg::mat_vec(&self.gram, n).iter().all(|&x| x == 0))
            .unwrap_or(false);
        let checks = vec![
            Check::pass_if(
                "negative_semidefinite",
                semidefinite,
                format!(
                    "inertia (+{}, -{}, 0:{})",
                    inertia.positive, inertia.negative, inertia.zero
                ),
            ),
            Check::pass_if("kernel_rank", kernel_rank == 1, kernel_rank),
            Check::pass_if(
                "fiber_orthogonal_to_components",
                annihilates,
                fiber_class.as_ref().map_or("none".to_string(), |n| format_vec(n)),
            ),
        ];
        ZariskiReport {
            negative_semidefinite: semidefinite,
            kernel_rank,
            fiber_class,
            checks,
        }
    }

    /// Verifies that the nef conditions force the fiber contribution to be a
    /// multiple of the fiber.
    pub fn forced_multiple_check(&self, bound: i64) -> Result<ForcedMultipleReport, KodairaError> {
        if !self.zariski_check().passed() {
            return Err(KodairaError::ZariskiFailed);
        }
        let mult = self.fiber_class()?;
        if mult[self.attach] != 1 {
            return Err(KodairaError::AttachMultiplicity {
                index: self.attach,
                multiplicity: mult[self.attach],
            });
        }
        let k = self.len();

        // (a) nonnegative slack everywhere.
        let lower = vec![0i64; k];
        let mut feasible = 0usize;
        let mut counterexamples = Vec::new();
        box_search(&self.gram, &lower, &vec![None; k], bound, |m| {
            feasible += 1;
            if !is_multiple_of(m, &mult) {
                counterexamples.push(m.to_vec());
            }
            counterexamples.len() < 16
        });
        let max_mult = *mult.iter().max().unwrap_or(&1);
        let expected_multiples = (2 * (bound / max_mult) + 1) as usize;

        // (b) slack −1 at the attach component.
        let patterns = boundary_patterns(&mult, self.attach);
        let smith = snf::smith_normal_form(&self.gram);
        let certificates: Vec<PatternCertificate> = patterns
            .iter()
            .map(|t| {
                let tb: Vec<BigInt> = t.iter().map(|&x| BigInt::from(x)).collect();
                let solution = smith.solve(&tb);
                let brute_force = box_solve(&self.gram, t, bound);
                PatternCertificate {
                    pattern: t.clone(),
                    solution,
                    brute_force,
                }
            })
            .collect();
        let all_insolvable = certificates.iter().all(|c| !c.solution.is_solvable());
        let forced = counterexamples.is_empty() && all_insolvable;
        Ok(ForcedMultipleReport {
            fiber_type: self.fiber_type,
            attach: self.attach,
            multiplicities: mult,
            forced,
            box_bound: bound,
            box_feasible: feasible,
            box_expected: expected_multiples,
            box_counterexamples: counterexamples,
            patterns_checked: patterns,
            certificates,
            cokernel: smith.cokernel(),
            smith,
        })
    }
}

fn format_vec(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn is_multiple_of(m: &[i64], n: &[i64]) -> bool {
    // n has a unit entry wherever attach sits, but do it generally.
    let Some(i) = n.iter().position(|&x| x != 0) else {
        return m.iter().all(|&x| x == 0);
    };
    if m[i] % n[i] != 0 {
        return false;
    }
    let q = m[i] / n[i];
    m.iter().zip(n).all(|(a, b)| *a == q * b)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZariskiReport {
    pub negative_semidefinite: bool,
    pub kernel_rank: usize,
    pub fiber_class: Option<Vec<i64>>,
    pub checks: Vec<Check>,
}

impl ZariskiReport {
    pub fn passed(&self) -> bool {
        crate::report::all_passed(&self.checks)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternCertificate {
    /// Right-hand side `t` of `G·m = t`.
    pub pattern: Vec<i64>,
    /// Smith normal form verdict.
    pub solution: IntegralSolution,
    /// A solution found in the brute-force box, if any.
    pub brute_force: Option<Vec<i64>>,
}

impl PatternCertificate {
    pub fn agrees(&self) -> bool {
        // A box search can miss solutions outside the box, never invent them.
        match (&self.solution, &self.brute_force) {
            (IntegralSolution::Insolvable { .. }, None) => true,
            (IntegralSolution::Insolvable { .. }, Some(_)) => false,
            (IntegralSolution::Solvable(_), _) => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcedMultipleReport {
    pub fiber_type: FiberType,
    pub attach: usize,
    pub multiplicities: Vec<i64>,
    pub forced: bool,
    pub box_bound: i64,
    /// Points in the box with nonnegative slack.
    pub box_feasible: usize,
    /// Multiples of the fiber inside the box.
    pub box_expected: usize,
    pub box_counterexamples: Vec<Vec<i64>>,
    /// Boundary slack patterns, lexicographically ordered.
    pub patterns_checked: Vec<Vec<i64>>,
    pub certificates: Vec<PatternCertificate>,
    pub cokernel: Cokernel,
    pub smith: SmithForm,
}

impl ForcedMultipleReport {
    pub fn brute_force_agrees(&self) -> bool {
        self.certificates.iter().all(PatternCertificate::agrees)
            && self.box_counterexamples.is_empty()
            && self.box_feasible == self.box_expected
    }

    pub fn checks(&self) -> Vec<Check> {
        let mut out = vec![
            Check::info("multiplicities", format_vec(&self.multiplicities)),
            Check::pass_if(
                "box_nonnegative_slack_only_multiples",
                self.box_counterexamples.is_empty(),
                format!(
                    "bound {} feasible {} multiples {}",
                    self.box_bound, self.box_feasible, self.box_expected
                ),
            ),
            Check::info(
                "invariant_factors",
                self.smith
                    .diagonal
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            Check::info(
                "cokernel",
                format!(
                    "Z^{} + torsion order {}",
                    self.cokernel.free_rank,
                    self.cokernel.torsion_order()
                ),
            ),
            Check::info("patterns_checked", self.patterns_checked.len()),
        ];
        for c in &self.certificates {
            let detail = match &c.solution {
                IntegralSolution::Solvable(x) => format!(
                    "solvable ({})",
                    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
                ),
                IntegralSolution::Insolvable {
                    index,
                    residue,
                    divisor,
                } => format!("insolvable: (U t)[{index}] = {residue} not divisible by {divisor}"),
            };
            out.push(Check::pass_if(
                format!("pattern{}", format_vec(&c.pattern)),
                !c.solution.is_solvable(),
                detail,
            ));
        }
        out.push(Check::pass_if(
            "snf_agrees_with_box",
            self.brute_force_agrees(),
            self.box_bound,
        ));
        out.push(Check::pass_if("forced_multiple", self.forced, self.forced));
        out
    }
}

/// All slack vectors `t` with `t_attach = −1`, `tᵢ ≥ 0` elsewhere and
/// `Σ_{i≠attach} nᵢtᵢ = n_attach`, in lexicographic order.
pub fn boundary_patterns(mult: &[i64], attach: usize) -> Vec<Vec<i64>> {
    fn rec(i: usize, rest: i64, mult: &[i64], attach: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if i == mult.len() {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if i == attach {
            cur.push(-1);
            rec(i + 1, rest, mult, attach, cur, out);
            cur.pop();
            return;
        }
        let mut t = 0;
        while t * mult[i] <= rest {
            cur.push(t);
            rec(i + 1, rest - t * mult[i], mult, attach, cur, out);
            cur.pop();
            t += 1;
        }
    }
    let mut out = Vec::new();
    rec(0, mult[attach], mult, attach, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Enumerates every `m` with `|mᵢ| ≤ bound` and `lowerᵢ ≤ (G·m)ᵢ ≤ upperᵢ`.
/// The visitor returns `false` to stop.
///
/// Variables are assigned in breadth-first order of the incidence graph so
/// that rows close early. Before each assignment the admissible range of the
/// next variable is derived from every row it appears in, treating the
/// still-unassigned variables as ranging over the whole box.
pub fn box_search<F>(gram: &[Vec<i64>], lower: &[i64], upper: &[Option<i64>], bound: i64, mut visit: F)
where
    F: FnMut(&[i64]) -> bool,
{
    struct Search<'a, F> {
        gram: &'a [Vec<i64>],
        lower: &'a [i64],
        upper: &'a [Option<i64>],
        bound: i64,
        order: Vec<usize>,
        m: Vec<i64>,
        partial: Vec<i64>,
        // Σ |g_ij|·bound over unassigned j, per row.
        slack: Vec<i64>,
        visit: F,
    }

    impl<F: FnMut(&[i64]) -> bool> Search<'_, F> {
        fn range(&self, j: usize) -> Option<(i64, i64)> {
            let (mut lo, mut hi) = (-self.bound, self.bound);
            for (i, row) in self.gram.iter().enumerate() {
                let g = row[j];
                if g == 0 {
                    continue;
                }
                let rest = self.slack[i] - g.abs() * self.bound;
                // lower_i - p_i - rest <= g·x
                let need = self.lower[i] - self.partial[i] - rest;
                // g·x <= upper_i - p_i + rest
                let cap = self.upper[i].map(|h| h - self.partial[i] + rest);
                if g > 0 {
                    lo = lo.max(div_ceil(need, g));
                    if let Some(c) = cap {
                        hi = hi.min(c.div_euclid(g));
                    }
                } else {
                    hi = hi.min(div_floor(need, g));
                    if let Some(c) = cap {
                        lo = lo.max(div_ceil(c, g));
                    }
                }
                if lo > hi {
                    return None;
                }
            }
            Some((lo, hi))
        }

        fn rec(&mut self, depth: usize) -> bool {
            if depth == self.order.len() {
                return (self.visit)(&self.m);
            }
            let j = self.order[depth];
            let Some((lo, hi)) = self.range(j) else {
                return true;
            };
            for (i, row) in self.gram.iter().enumerate() {
                self.slack[i] -= row[j].abs() * self.bound;
            }
            let mut go_on = true;
            for x in lo..=hi {
                self.m[j] = x;
                for (i, row) in self.gram.iter().enumerate() {
                    self.partial[i] += row[j] * x;
                }
                go_on = self.rec(depth + 1);
                for (i, row) in self.gram.iter().enumerate() {
                    self.partial[i] -= row[j] * x;
                }
                if !go_on {
                    break;
                }
            }
            self.m[j] = 0;
            for (i, row) in self.gram.iter().enumerate() {
                self.slack[i] += row[j].abs() * self.bound;
            }
            go_on
        }
    }

    let k = gram.len();
    let slack = gram
        .iter()
        .map(|row| row.iter().map(|g| g.abs()).sum::<i64>() * bound)
        .collect();
    let mut search = Search {
        gram,
        lower,
        upper,
        bound,
        order: bfs_order(gram),
        m: vec![0; k],
        partial: vec![0; k],
        slack,
        visit: &mut visit,
    };
    search.rec(0);
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

/// Breadth-first order of the incidence graph from vertex 0, restarting at
/// the smallest unvisited vertex.
fn bfs_order(gram: &[Vec<i64>]) -> Vec<usize> {
    let k = gram.len();
    let mut seen = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for start in 0..k {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for w in 0..k {
                if w != v && gram[v][w] != 0 && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

/// Some `m` in the box solving `G·m = t` exactly, if one exists.
pub fn box_solve(gram: &[Vec<i64>], t: &[i64], bound: i64) -> Option<Vec<i64>> {
    let upper: Vec<Option<i64>> = t.iter().map(|&x| Some(x)).collect();
    let mut found = None;
    box_search(gram, t, &upper, bound, |m| {
        found = Some(m.to_vec());
        false
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(t: FiberType) -> FiberConfig {
        FiberConfig::build(t, 0).unwrap()
    }

    #[test]
    fn parse_names() {
        assert_eq!("I5".parse::<FiberType>().unwrap(), FiberType::I(5));
        assert_eq!("Istar2".parse::<FiberType>().unwrap(), FiberType::IStar(2));
        assert_eq!("IIstar".parse::<FiberType>().unwrap(), FiberType::IIStar);
        assert_eq!("IIIstar".parse::<FiberType>().unwrap(), FiberType::IIIStar);
        assert_eq!("IVstar".parse::<FiberType>().unwrap(), FiberType::IVStar);
        assert!("I1".parse::<FiberType>().is_err());
        assert!("II".parse::<FiberType>().is_err());
        assert!("Ix".parse::<FiberType>().is_err());
        for t in [FiberType::I(7), FiberType::IStar(0), FiberType::IVStar, FiberType::III] {
            assert_eq!(t.to_string().parse::<FiberType>().unwrap(), t);
        }
    }

    #[test]
    fn standard_grams() {
        let i5 = build(FiberType::I(5));
        assert_eq!(i5.len(), 5);
        for i in 0..5 {
            assert_eq!(i5.gram[i][i], -2);
            assert_eq!(i5.gram[i][(i + 1) % 5], 1);
            assert_eq!(i5.gram[i][(i + 2) % 5], 0);
        }
        assert_eq!(build(FiberType::III).gram, vec![vec![-2, 2], vec![2, -2]]);
        assert_eq!(build(FiberType::I(2)).gram, vec![vec![-2, 2], vec![2, -2]]);
        assert_eq!(
            build(FiberType::IV).gram,
            vec![vec![-2, 1, 1], vec![1, -2, 1], vec![1, 1, -2]]
        );
        // I*_1: C1,C2 on D1, C3,C4 on D2, D1·D2 = 1.
        let d = build(FiberType::IStar(1));
        assert_eq!(d.labels, ["C1", "C2", "C3", "C4", "D1", "D2"]);
        assert_eq!(
            (d.gram[0][4], d.gram[1][4], d.gram[2][5], d.gram[3][5], d.gram[4][5]),
            (1, 1, 1, 1, 1)
        );
        assert_eq!(d.gram[0][5], 0);
    }

    #[test]
    fn kernels() {
        assert_eq!(build(FiberType::I(6)).fiber_class().unwrap(), vec![1; 6]);
        assert_eq!(build(FiberType::IV).fiber_class().unwrap(), vec![1, 1, 1]);
        assert_eq!(
            build(FiberType::IStar(2)).fiber_class().unwrap(),
            vec![1, 1, 1, 1, 2, 2, 2]
        );
    }

    #[test]
    fn zariski_perturbation_fails() {
        assert!(build(FiberType::I(3)).zariski_check().passed());
        let mut g = build(FiberType::I(3)).gram;
        g[0][1] = 2;
        g[1][0] = 2;
        let bad = FiberConfig::from_parts(FiberType::I(3), build(FiberType::I(3)).labels, g, 0).unwrap();
        let rep = bad.zariski_check();
        assert!(!rep.passed());
        assert!(matches!(bad.forced_multiple_check(3), Err(KodairaError::ZariskiFailed)));
    }

    #[test]
    fn attach_must_have_multiplicity_one() {
        let d = FiberConfig::build(FiberType::IStar(1), 4).unwrap();
        assert_eq!(
            d.forced_multiple_check(3).unwrap_err(),
            KodairaError::AttachMultiplicity {
                index: 4,
                multiplicity: 2
            }
        );
        assert!(matches!(
            FiberConfig::build(FiberType::IV, 3),
            Err(KodairaError::AttachOutOfRange { .. })
        ));
    }

    #[test]
    fn i5_certificate() {
        let rep = build(FiberType::I(5)).forced_multiple_check(6).unwrap();
        assert!(rep.forced);
        assert_eq!(rep.patterns_checked.len(), 4);
        for (i, p) in rep.patterns_checked.iter().enumerate() {
            let k0 = 4 - i;
            let mut expected = vec![0; 5];
            expected[0] = -1;
            expected[k0] = 1;
            assert_eq!(p, &expected);
        }
        assert_eq!(rep.cokernel.torsion, vec![BigInt::from(5)]);
        assert_eq!(rep.cokernel.free_rank, 1);
        assert!(rep.brute_force_agrees());
    }

    #[test]
    fn patterns_follow_multiplicities() {
        // E8 affine: only the attach component has multiplicity one.
        let e8 = build(FiberType::IIStar);
        let n = e8.fiber_class().unwrap();
        assert!(boundary_patterns(&n, 0).is_empty());
        let e6 = build(FiberType::IVStar);
        assert_eq!(boundary_patterns(&e6.fiber_class().unwrap(), 0).len(), 2);
    }

    #[test]
    fn box_search_counts_cycle_multiples() {
        let g = build(FiberType::I(3)).gram;
        let mut all = Vec::new();
        box_search(&g, &[0, 0, 0], &[None, None, None], 3, |m| {
            all.push(m.to_vec());
            true
        });
        all.sort();
        let expected: Vec<Vec<i64>> = (-3..=3).map(|k| vec![k; 3]).collect();
        assert_eq!(all, expected);
    }

    #[test]
    fn rounding_helpers() {
        assert_eq!((div_floor(-7, 2), div_ceil(-7, 2)), (-4, -3));
        assert_eq!((div_floor(7, -2), div_ceil(7, -2)), (-4, -3));
        assert_eq!((div_floor(6, 3), div_ceil(6, 3)), (2, 2));
    }

    #[test]
    fn box_search_finds_solvable_systems() {
        let g = build(FiberType::I(4)).gram;
        // t = G·(1,0,0,0) = (-2,1,0,1)
        let m = box_solve(&g, &[-2, 1, 0, 1], 2).unwrap();
        assert_eq!(linalg::mat_vec(&g, &m), vec![-2, 1, 0, 1]);
        assert_eq!(box_solve(&g, &[-1, 1, 0, 0], 4), None);
    }
}

//! Exact rational certificates for the exponent systems that drive the local
//! Sobolev bound on `Du`.
//!
//! Four constraint blocks are involved:
//!
//! * the Sobolev pair `(a, c)` tied to the coupling exponent `alpha`
//!   (`alpha*c <= alpha+1`, `alpha*a = 2*(alpha+1)/2`, `c > 2`, `a >= c d/(c-2)`),
//! * the heat-kernel/Young block `(p, p', q, q')`,
//! * the Gagliardo–Nirenberg interpolation block `(s~, b, lambda)`,
//! * the time/space splitting block `(P, Q, M, beta, kappa)`,
//!
//! plus the two growth exponents `theta1`, `theta2` of the final bound.
//!
//! Every value is an exact [`Rational`]; nothing in this module touches
//! floating point. Each block has a canonical closed-form construction, and
//! [`verify_witness`] re-checks every relation from scratch.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;
use std::fmt;

use crate::error::{Error, Result};

/// Arbitrary-precision fraction in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Largest denominator (and numerator) scanned by the bounded rational searches.
pub const SCAN_MAX_DENOMINATOR: u32 = 64;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats as `num/den`, always including the denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `n/d`, a plain integer, or a finite decimal such as `0.25`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Domain(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Domain(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if negative { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

fn as_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Lossy conversion used only at the boundary with the numerical modules.
pub fn to_f64(r: &Rational) -> f64 {
    as_f64(r)
}

/// Hölder conjugate `x' = x/(x-1)`, so that `1/x + 1/x' = 1`.
pub fn conjugate(x: &Rational) -> Result<Rational> {
    if *x <= Rational::one() {
        return Err(Error::Domain(format!(
            "conjugate exponent needs x > 1, got {x}"
        )));
    }
    Ok(x / (x - Rational::one()))
}

/// Sobolev conjugate `2* = 2d/(d-2)`.
pub fn sobolev_exponent(d: u32) -> Result<Rational> {
    if d <= 2 {
        return Err(Error::Domain(format!(
            "Sobolev conjugate is undefined for d = {d} (needs d > 2)"
        )));
    }
    Ok(rational(2 * d as i64, d as i64 - 2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Feasible,
    Infeasible,
}

/// A single constraint that failed, with its exact residual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: &'static str,
    pub detail: String,
    /// `lhs - rhs` of the failed relation.
    pub residual: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.constraint, self.detail)
    }
}

impl Serialize for Violation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Violation", 3)?;
        st.serialize_field("constraint", self.constraint)?;
        st.serialize_field("detail", &self.detail)?;
        st.serialize_field("residual", &format_rational(&self.residual))?;
        st.end()
    }
}

/// Collects failed relations; every check is exact.
#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, constraint: &'static str, label: &str, lhs: &Rational, op: &str, rhs: &Rational) {
        self.violations.push(Violation {
            constraint,
            detail: format!("{label} = {lhs} {op} {rhs}"),
            residual: lhs - rhs,
        });
    }

    fn eq(&mut self, id: &'static str, label: &str, lhs: Rational, rhs: Rational) {
        if lhs != rhs {
            self.fail(id, label, &lhs, "≠", &rhs);
        }
    }

    fn lt(&mut self, id: &'static str, label: &str, lhs: Rational, rhs: Rational) {
        if lhs >= rhs {
            self.fail(id, label, &lhs, "≥", &rhs);
        }
    }

    fn le(&mut self, id: &'static str, label: &str, lhs: Rational, rhs: Rational) {
        if lhs > rhs {
            self.fail(id, label, &lhs, ">", &rhs);
        }
    }

    fn gt(&mut self, id: &'static str, label: &str, lhs: Rational, rhs: Rational) {
        if lhs <= rhs {
            self.fail(id, label, &lhs, "≤", &rhs);
        }
    }

    fn ge(&mut self, id: &'static str, label: &str, lhs: Rational, rhs: Rational) {
        if lhs < rhs {
            self.fail(id, label, &lhs, "<", &rhs);
        }
    }

    fn open_unit(&mut self, id: &'static str, label: &str, x: &Rational) {
        self.gt(id, label, x.clone(), Rational::zero());
        self.lt(id, label, x.clone(), Rational::one());
    }
}

fn recip(x: &Rational) -> Rational {
    if x.is_zero() {
        // only reachable from a hand-edited witness; keeps the checker total
        Rational::zero()
    } else {
        x.recip()
    }
}

/// Heat-kernel/Young block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YoungExponents {
    pub p: Rational,
    pub p_conj: Rational,
    pub q: Rational,
    pub q_conj: Rational,
}

/// Gagliardo–Nirenberg interpolation block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpolationExponents {
    pub s_tilde: Rational,
    pub b: Rational,
    pub lambda: Rational,
}

/// Time/space splitting block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplittingExponents {
    pub big_p: Rational,
    pub big_q: Rational,
    pub big_m: Rational,
    pub beta: Rational,
    pub kappa: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thetas {
    pub theta1: Rational,
    pub theta2: Rational,
}

/// Complete exponent chain for one `(d, alpha)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentWitness {
    pub d: u32,
    pub alpha: Rational,
    pub a: Rational,
    pub c: Rational,
    pub a_conj: Rational,
    pub c_conj: Rational,
    pub young: YoungExponents,
    pub interpolation: InterpolationExponents,
    pub splitting: SplittingExponents,
    pub thetas: Thetas,
}

/// Outcome of a feasibility decision. `witness` is present iff `status` is
/// feasible, in which case `violations` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityCertificate {
    pub status: Status,
    pub witness: Option<ExponentWitness>,
    pub violations: Vec<Violation>,
    /// Whether `alpha < 1/(d-1)` holds strictly (the boundary case is feasible
    /// but outside the strict assumption range).
    pub alpha_strict: bool,
}

impl FeasibilityCertificate {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }
}

fn check_conjugates(ck: &mut Checker, a: &Rational, c: &Rational, a_conj: &Rational, c_conj: &Rational) {
    let one = Rational::one();
    ck.gt("a_range", "a", a.clone(), one.clone());
    ck.gt("c_range", "c", c.clone(), one.clone());
    ck.gt("a_conj_range", "a'", a_conj.clone(), one.clone());
    ck.gt("c_conj_range", "c'", c_conj.clone(), one.clone());
    ck.eq("conjugate_a", "1/a+1/a'", recip(a) + recip(a_conj), one.clone());
    ck.eq("conjugate_c", "1/c+1/c'", recip(c) + recip(c_conj), one);
}

fn check_sobolev_pair(ck: &mut Checker, d: u32, a: &Rational, c: &Rational) {
    let two = int(2);
    if *c <= two {
        ck.fail("sobolev_pair_c", "c", c, "≤", &two);
        return;
    }
    let bound = c * int(d as i64) / (c - &two);
    ck.ge("sobolev_pair", "a", a.clone(), bound);
}

fn check_alpha_pair(ck: &mut Checker, d: u32, alpha: &Rational, a: &Rational, c: &Rational) {
    let one = Rational::one();
    ck.gt("alpha_positive", "α", alpha.clone(), Rational::zero());
    ck.le("alpha_range", "α", alpha.clone(), rational(1, d as i64 - 1));
    ck.le("alpha_time_exponent", "αc", alpha * c, alpha + &one);
    let two_star = rational(2 * d as i64, d as i64 - 2);
    ck.eq("alpha_space_exponent", "αa", alpha * a, two_star * (alpha + one) / int(2));
}

fn check_young(ck: &mut Checker, d: u32, a_conj: &Rational, c_conj: &Rational, y: &YoungExponents) {
    let one = Rational::one();
    ck.gt("p_range", "p", y.p.clone(), one.clone());
    ck.gt("p_conj_range", "p'", y.p_conj.clone(), one.clone());
    ck.gt("q_range", "q", y.q.clone(), one.clone());
    ck.gt("q_conj_range", "q'", y.q_conj.clone(), one.clone());
    ck.eq(
        "young_exponents",
        "1/p'+1/q",
        recip(&y.p_conj) + recip(&y.q),
        recip(a_conj) + &one,
    );
    ck.lt(
        "heat_time_integrability",
        "dc'/(2q')",
        int(d as i64) * c_conj * recip(&(int(2) * &y.q_conj)),
        one.clone(),
    );
    ck.eq("conjugate_p", "1/p+1/p'", recip(&y.p) + recip(&y.p_conj), one.clone());
    ck.eq("conjugate_q", "1/q+1/q'", recip(&y.q) + recip(&y.q_conj), one);
}

fn check_interpolation(ck: &mut Checker, d: u32, a: &Rational, c: &Rational, g: &InterpolationExponents) {
    let one = Rational::one();
    let half = rational(1, 2);
    let two_star = rational(2 * d as i64, d as i64 - 2);
    ck.gt("s_tilde_range", "s̃", g.s_tilde.clone(), one.clone());
    ck.gt("b_range", "b", g.b.clone(), one.clone());
    ck.open_unit("lambda_range", "λ", &g.lambda);
    ck.eq("holder_time", "1/c+1/s̃", recip(c) + recip(&g.s_tilde), half.clone());
    ck.eq("holder_space", "1/a+1/b", recip(a) + recip(&g.b), half);
    ck.eq(
        "interpolation_lambda",
        "2/b",
        int(2) * recip(&g.b),
        &one - &g.lambda + int(2) * &g.lambda / two_star,
    );
    ck.le("gn_time_power", "s̃λ/2", &g.s_tilde * &g.lambda / int(2), one);
}

fn check_splitting(ck: &mut Checker, d: u32, a_conj: &Rational, c_conj: &Rational, s: &SplittingExponents) {
    let one = Rational::one();
    let two_star = rational(2 * d as i64, d as i64 - 2);
    ck.gt("big_p_range", "P", s.big_p.clone(), one.clone());
    ck.gt("big_q_range", "Q", s.big_q.clone(), one.clone());
    ck.gt("big_m_range", "M", s.big_m.clone(), c_conj.clone());
    ck.open_unit("beta_range", "β", &s.beta);
    ck.open_unit("kappa_range", "κ", &s.kappa);
    ck.eq("time_split", "1/M", recip(&s.big_m), &s.beta * recip(&s.big_p));
    ck.eq(
        "space_split",
        "1/a'",
        recip(a_conj),
        &one - &s.beta + &s.beta * recip(&s.big_q),
    );
    ck.eq(
        "interpolation_kappa",
        "1/Q",
        recip(&s.big_q),
        &one - &s.kappa + int(2) * &s.kappa / two_star,
    );
    ck.le("gn_kappa_power", "κP", &s.kappa * &s.big_p, one);
}

fn check_thetas(ck: &mut Checker, g: &InterpolationExponents, s: &SplittingExponents, t: &Thetas) {
    match compute_thetas(&g.s_tilde, &s.kappa, &s.beta) {
        Ok(expected) => {
            ck.eq("theta1", "θ₁", t.theta1.clone(), expected.theta1);
            ck.eq("theta2", "θ₂", t.theta2.clone(), expected.theta2);
        }
        Err(_) => {
            let kb = &s.kappa * &s.beta;
            ck.fail("theta_domain", "κβ", &kb, "≥", &Rational::one());
        }
    }
}

/// Result of the `(a, c)` decision for a given `(d, alpha)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SobolevPair {
    pub status: Status,
    pub d: u32,
    pub alpha: Rational,
    /// `(a, c)` when feasible.
    pub pair: Option<(Rational, Rational)>,
    pub violations: Vec<Violation>,
    pub alpha_strict: bool,
}

fn canonical_pair(d: u32, alpha: &Rational) -> (Rational, Rational) {
    let one = Rational::one();
    let c = (alpha + &one) / alpha;
    let a = int(d as i64) * (alpha + &one) / (int(d as i64 - 2) * alpha);
    (a, c)
}

/// Decides whether `(a, c)` exist with `c > 2`, `a >= cd/(c-2)`,
/// `alpha c <= alpha + 1` and `alpha a = 2*(alpha+1)/2`.
///
/// `cd/(c-2)` decreases in `c`, so the extremal choice `c = (alpha+1)/alpha`
/// is the only one worth testing; it works iff `alpha <= 1/(d-1)`.
pub fn solve_sobolev_pair(d: u32, alpha: &Rational) -> Result<SobolevPair> {
    if d <= 2 {
        return Err(Error::Domain(format!("need d > 2, got d = {d}")));
    }
    if !alpha.is_positive() {
        return Err(Error::Domain(format!("need alpha > 0, got {alpha}")));
    }
    let threshold = rational(1, d as i64 - 1);
    let (a, c) = canonical_pair(d, alpha);
    let mut ck = Checker::default();
    check_sobolev_pair(&mut ck, d, &a, &c);
    check_alpha_pair(&mut ck, d, alpha, &a, &c);
    let closed_form_feasible = *alpha <= threshold;
    if closed_form_feasible != ck.violations.is_empty() {
        return Err(Error::Numeric(format!(
            "closed-form criterion and exact check disagree at d = {d}, alpha = {alpha}"
        )));
    }
    let alpha_strict = *alpha < threshold;
    if closed_form_feasible {
        Ok(SobolevPair {
            status: Status::Feasible,
            d,
            alpha: alpha.clone(),
            pair: Some((a, c)),
            violations: Vec::new(),
            alpha_strict,
        })
    } else {
        Ok(SobolevPair {
            status: Status::Infeasible,
            d,
            alpha: alpha.clone(),
            pair: None,
            violations: ck.violations,
            alpha_strict,
        })
    }
}

/// Outcome of the bounded rational scan for `(a, c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairScan {
    pub candidates_tested: usize,
    pub first_feasible: Option<(Rational, Rational)>,
}

/// Independent cross-check of [`solve_sobolev_pair`]: enumerates every
/// `c = i/j` in `(2, (alpha+1)/alpha]` with `j <= max_den`, sets `a` from the
/// equality constraint, and tests `a >= cd/(c-2)` directly.
pub fn scan_sobolev_pair(d: u32, alpha: &Rational, max_den: u32) -> Result<PairScan> {
    if d <= 2 || !alpha.is_positive() {
        return Err(Error::Domain(format!("need d > 2 and alpha > 0, got d = {d}, alpha = {alpha}")));
    }
    let one = Rational::one();
    let two = int(2);
    let c_max = (alpha + &one) / alpha;
    let two_star = sobolev_exponent(d)?;
    let a = two_star * (alpha + &one) / (int(2) * alpha);
    let mut tested = 0usize;
    let mut first = None;
    for j in 1..=max_den as i64 {
        let hi = (&c_max * int(j)).floor().to_integer();
        let mut i = BigInt::from(2 * j + 1);
        while i <= hi {
            let c = Rational::new(i.clone(), BigInt::from(j));
            i += 1;
            // skip non-reduced duplicates
            if c.denom() != &BigInt::from(j) {
                continue;
            }
            tested += 1;
            let bound = &c * int(d as i64) / (&c - &two);
            if a >= bound && first.is_none() {
                first = Some((a.clone(), c));
            }
        }
    }
    Ok(PairScan {
        candidates_tested: tested,
        first_feasible: first,
    })
}

/// Canonical heat-kernel/Young exponents for any `a, c > 1`:
/// `q' = max(dc'/2, a) + 1`, `q = (q')'`, `1/p' = 1/a' + 1/q'`, `p = (p')'`.
///
/// The `max(.., a)` guard keeps `1/a' + 1/q' < 1`; without it `p'` can drop
/// below one.
pub fn solve_young(d: u32, a: &Rational, c: &Rational) -> Result<YoungExponents> {
    if d <= 2 {
        return Err(Error::Domain(format!("need d > 2, got d = {d}")));
    }
    let a_conj = conjugate(a)?;
    let c_conj = conjugate(c)?;
    let half_dc = int(d as i64) * &c_conj / int(2);
    let base = if half_dc > *a { half_dc } else { a.clone() };
    let q_conj = base + Rational::one();
    let q = conjugate(&q_conj)?;
    let p_conj = (a_conj.recip() + q_conj.recip()).recip();
    let p = conjugate(&p_conj)?;
    let y = YoungExponents { p, p_conj, q, q_conj };
    let mut ck = Checker::default();
    check_young(&mut ck, d, &a_conj, &c_conj, &y);
    finish(ck, y)
}

fn finish<T>(ck: Checker, value: T) -> Result<T> {
    if ck.violations.is_empty() {
        Ok(value)
    } else {
        let msg: Vec<String> = ck.violations.iter().map(|v| v.to_string()).collect();
        Err(Error::Infeasible(msg.join("; ")))
    }
}

fn require_sobolev_pair(d: u32, a: &Rational, c: &Rational) -> Result<()> {
    if d <= 2 {
        return Err(Error::Domain(format!("need d > 2, got d = {d}")));
    }
    let mut ck = Checker::default();
    check_sobolev_pair(&mut ck, d, a, c);
    if let Some(v) = ck.violations.first() {
        let what = if v.constraint == "sobolev_pair_c" {
            format!("c > 2 fails: {}", v.detail)
        } else {
            let bound = c * int(d as i64) / (c - int(2));
            format!("a ≥ cd/(c−2) fails: c·d/(c−2) = {bound} > {a}")
        };
        return Err(Error::Precondition(what));
    }
    Ok(())
}

/// Closed-form interpolation exponents: `s~ = 2c/(c-2)`, `b = 2a/(a-2)`,
/// `lambda = d(1 - 2/b)/2`.
pub fn solve_interpolation(d: u32, a: &Rational, c: &Rational) -> Result<InterpolationExponents> {
    require_sobolev_pair(d, a, c)?;
    let two = int(2);
    let s_tilde = &two * c / (c - &two);
    let b = &two * a / (a - &two);
    let lambda = int(d as i64) * (Rational::one() - &two / &b) / &two;
    let g = InterpolationExponents { s_tilde, b, lambda };
    let mut ck = Checker::default();
    check_interpolation(&mut ck, d, a, c, &g);
    finish(ck, g)
}

fn splitting_from_p(a: &Rational, sigma: &Rational, big_p: Rational) -> SplittingExponents {
    let kappa = big_p.recip();
    let big_q = (Rational::one() - &kappa * sigma).recip();
    let beta = &big_p / (a * sigma);
    let big_m = &big_p / &beta;
    SplittingExponents {
        big_p,
        big_q,
        big_m,
        beta,
        kappa,
    }
}

/// Splitting exponents. With `sigma = 2/d` and `a sigma > 2` the canonical
/// witness is `kappa = 2/(a sigma)`, `P = a sigma/2`, `beta = 1/2`,
/// `Q = 1/(1 - kappa sigma)`, `M = a sigma`. Otherwise `P = i/j` is scanned
/// with `kappa = 1/P` and `beta`, `Q`, `M` solved from the equalities.
pub fn solve_splitting(d: u32, a: &Rational, c: &Rational) -> Result<SplittingExponents> {
    require_sobolev_pair(d, a, c)?;
    let a_conj = conjugate(a)?;
    let c_conj = conjugate(c)?;
    let sigma = rational(2, d as i64);
    let a_sigma = a * &sigma;
    let check = |s: &SplittingExponents| {
        let mut ck = Checker::default();
        check_splitting(&mut ck, d, &a_conj, &c_conj, s);
        ck
    };
    if a_sigma > int(2) {
        let kappa = int(2) / &a_sigma;
        let big_q = (Rational::one() - &kappa * &sigma).recip();
        let s = SplittingExponents {
            big_p: &a_sigma / int(2),
            big_q,
            big_m: a_sigma.clone(),
            beta: rational(1, 2),
            kappa,
        };
        return finish(check(&s), s);
    }
    for j in 1..=SCAN_MAX_DENOMINATOR as i64 {
        for i in 1..=SCAN_MAX_DENOMINATOR as i64 {
            let big_p = rational(i, j);
            if big_p <= Rational::one() || big_p.denom() != &BigInt::from(j) {
                continue;
            }
            let s = splitting_from_p(a, &sigma, big_p);
            if check(&s).violations.is_empty() {
                return Ok(s);
            }
        }
    }
    Err(Error::Infeasible(format!(
        "no splitting exponents with P = i/j, i, j ≤ {SCAN_MAX_DENOMINATOR} (a σ = {a_sigma})"
    )))
}

/// `theta1 = 1/(1 - kappa beta)` and
/// `theta2 = (3 s~ + 2)/(2 s~) + kappa beta (2 + s~)/(2 s~ (1 - kappa beta))`.
pub fn compute_thetas(s_tilde: &Rational, kappa: &Rational, beta: &Rational) -> Result<Thetas> {
    let one = Rational::one();
    let two = int(2);
    let kb = kappa * beta;
    if kb >= one || kb.is_negative() {
        return Err(Error::Domain(format!("need 0 ≤ κβ < 1, got {kb}")));
    }
    if !s_tilde.is_positive() {
        return Err(Error::Domain(format!("need s̃ > 0, got {s_tilde}")));
    }
    let gap = &one - &kb;
    let theta1 = gap.recip();
    let theta2 = (int(3) * s_tilde + &two) / (&two * s_tilde)
        + &kb * (&two + s_tilde) / (&two * s_tilde * &gap);
    Ok(Thetas { theta1, theta2 })
}

/// Re-checks every relation of the witness with exact arithmetic.
pub fn verify_witness(w: &ExponentWitness) -> FeasibilityCertificate {
    let mut ck = Checker::default();
    let mut alpha_strict = false;
    if w.d <= 2 {
        ck.fail("dimension", "d", &int(w.d as i64), "≤", &int(2));
    } else {
        alpha_strict = w.alpha < rational(1, w.d as i64 - 1);
        check_alpha_pair(&mut ck, w.d, &w.alpha, &w.a, &w.c);
        check_sobolev_pair(&mut ck, w.d, &w.a, &w.c);
        check_conjugates(&mut ck, &w.a, &w.c, &w.a_conj, &w.c_conj);
        check_young(&mut ck, w.d, &w.a_conj, &w.c_conj, &w.young);
        check_interpolation(&mut ck, w.d, &w.a, &w.c, &w.interpolation);
        check_splitting(&mut ck, w.d, &w.a_conj, &w.c_conj, &w.splitting);
        check_thetas(&mut ck, &w.interpolation, &w.splitting, &w.thetas);
    }
    if ck.violations.is_empty() {
        FeasibilityCertificate {
            status: Status::Feasible,
            witness: Some(w.clone()),
            violations: Vec::new(),
            alpha_strict,
        }
    } else {
        FeasibilityCertificate {
            status: Status::Infeasible,
            witness: None,
            violations: ck.violations,
            alpha_strict,
        }
    }
}

/// Runs the whole chain: Sobolev pair, Young, interpolation, splitting and
/// thetas, then verifies the assembled witness.
pub fn certify(d: u32, alpha: &Rational) -> Result<FeasibilityCertificate> {
    let pair = solve_sobolev_pair(d, alpha)?;
    let Some((a, c)) = pair.pair else {
        return Ok(FeasibilityCertificate {
            status: Status::Infeasible,
            witness: None,
            violations: pair.violations,
            alpha_strict: pair.alpha_strict,
        });
    };
    let young = solve_young(d, &a, &c)?;
    let interpolation = solve_interpolation(d, &a, &c)?;
    let splitting = solve_splitting(d, &a, &c)?;
    let thetas = compute_thetas(&interpolation.s_tilde, &splitting.kappa, &splitting.beta)?;
    let witness = ExponentWitness {
        d,
        alpha: alpha.clone(),
        a_conj: conjugate(&a)?,
        c_conj: conjugate(&c)?,
        a,
        c,
        young,
        interpolation,
        splitting,
        thetas,
    };
    Ok(verify_witness(&witness))
}

impl Serialize for ExponentWitness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let f = format_rational;
        let mut st = s.serialize_struct("ExponentWitness", 22)?;
        st.serialize_field("d", &self.d)?;
        st.serialize_field("alpha", &f(&self.alpha))?;
        st.serialize_field("a", &f(&self.a))?;
        st.serialize_field("c", &f(&self.c))?;
        st.serialize_field("a_conj", &f(&self.a_conj))?;
        st.serialize_field("c_conj", &f(&self.c_conj))?;
        st.serialize_field("p", &f(&self.young.p))?;
        st.serialize_field("p_conj", &f(&self.young.p_conj))?;
        st.serialize_field("q", &f(&self.young.q))?;
        st.serialize_field("q_conj", &f(&self.young.q_conj))?;
        st.serialize_field("s_tilde", &f(&self.interpolation.s_tilde))?;
        st.serialize_field("b", &f(&self.interpolation.b))?;
        st.serialize_field("lambda", &f(&self.interpolation.lambda))?;
        st.serialize_field("P", &f(&self.splitting.big_p))?;
        st.serialize_field("Q", &f(&self.splitting.big_q))?;
        st.serialize_field("M", &f(&self.splitting.big_m))?;
        st.serialize_field("beta", &f(&self.splitting.beta))?;
        st.serialize_field("kappa", &f(&self.splitting.kappa))?;
        st.serialize_field("theta1", &f(&self.thetas.theta1))?;
        st.serialize_field("theta2", &f(&self.thetas.theta2))?;
        st.end()
    }
}

impl Serialize for FeasibilityCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FeasibilityCertificate", 4)?;
        st.serialize_field("status", &self.status)?;
        st.serialize_field("alpha_strict", &self.alpha_strict)?;
        st.serialize_field("witness", &self.witness)?;
        st.serialize_field("violations", &self.violations)?;
        st.end()
    }
}

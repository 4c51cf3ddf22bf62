//! The dyadic profile `f(x, t) = A(t)/√((t∞ − t) + |x − x₀|²)` whose
//! log-damped weak-norm criterion integral is finite while its Lorentz
//! `L^{p,r}` time norm diverges for every finite `r`.
//!
//! ```text
//! A(t) = Σ 2^{m_n} χ_{(t_n, t_n*)}(t),   m_n = n² − n/2,   k_n = p·m_n + n,
//! t_n = t∞(1 − 2^{−n}),                  t_n* = t_n + t∞·2^{−k_n}.
//! ```
//!
//! `2^{m_n}` leaves double range at `n = 32` and `t_n*` rounds to `t_n` once
//! `k_n` exceeds the mantissa, so every dyadic quantity is handled through
//! its logarithm.

use std::io::Write;

use crate::criteria::{csv_err, format_number, trapezoid};
use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};
use crate::lorentz::{lorentz_norm_log, weak_norm, Region};
use crate::Real;

/// Gauss-Legendre nodes and weights on `[−1, 1]`, 8 points.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// `ln(−ln(1 − x)/x)` for `x = e^{ln_x} ∈ (0, 1)`, accurate as `x → 0`.
fn ln_log1m_ratio<T: Real>(ln_x: T) -> T {
    let x = ln_x.exp();
    if x < T::lit(1e-8) {
        (x * T::lit(0.5)).ln_1p()
    } else {
        (-(-x).ln_1p()).ln() - ln_x
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicSchedule<T> {
    pub q: T,
    pub p: T,
    pub t_inf: T,
}

impl<T: Real> DyadicSchedule<T> {
    pub fn new(q: T, t_inf: T) -> Result<Self> {
        if !(q > T::lit(3.0) && q < T::lit(9.0)) {
            return Err(Error::Precondition(format!("q must lie in (3, 9), got {q}")));
        }
        if !(t_inf > T::zero()) || !t_inf.is_finite() {
            return Err(Error::Precondition(format!("t_inf must be positive, got {t_inf}")));
        }
        let p = T::lit(2.0) * q / (q - T::lit(3.0));
        Ok(Self { q, p, t_inf })
    }

    /// `m_n = n² − n/2`
    pub fn m(&self, n: usize) -> T {
        let n = T::from_usize_exact(n);
        n * n - n * T::lit(0.5)
    }

    /// `k_n = p·m_n + n`
    pub fn k(&self, n: usize) -> T {
        self.p * self.m(n) + T::from_usize_exact(n)
    }

    /// `t_n`, exact in floating point.
    pub fn t_start(&self, n: usize) -> T {
        self.t_inf * (T::one() - T::lit(2.0).powi(-(n as i32)))
    }

    /// `t_n*`; rounds to `t_n` once `2^{−k_n}` is below the resolution at `t_n`.
    pub fn t_end(&self, n: usize) -> T {
        self.t_start(n) + self.t_inf * T::lit(2.0).powf(-self.k(n))
    }

    /// `ln(t∞ − t)` at both ends of interval `n`: `(lo, hi)` with
    /// `lo = ln(t∞(2^{−n} − 2^{−k_n}))` and `hi = ln(t∞·2^{−n})`.
    pub fn ln_gap_bounds(&self, n: usize) -> (T, T) {
        let ln2 = T::LN_2();
        let hi = self.t_inf.ln() - T::from_usize_exact(n) * ln2;
        let ln_x = (T::from_usize_exact(n) - self.k(n)) * ln2;
        (hi + (-ln_x.exp()).ln_1p(), hi)
    }

    /// `log₂ A(t)`, `None` where `A` vanishes.
    pub fn log2_amplitude(&self, t: T) -> Result<Option<T>> {
        if !(t < self.t_inf) || !(t >= T::zero()) {
            return Err(Error::Precondition(format!("t must lie in [0, t_inf = {}), got {t}", self.t_inf)));
        }
        let ratio = (self.t_inf - t) / self.t_inf;
        let guess = (-ratio.log2()).floor().to_usize().unwrap_or(0);
        for n in guess.saturating_sub(1).max(1)..=guess + 1 {
            if t > self.t_start(n) && t < self.t_end(n) {
                return Ok(Some(self.m(n)));
            }
        }
        Ok(None)
    }

    pub fn amplitude(&self, t: T) -> Result<T> {
        Ok(self.log2_amplitude(t)?.map_or(T::zero(), |e| T::lit(2.0).powf(e)))
    }

    /// The profile `f(x, t)` centred at `x0`.
    pub fn profile(&self, t: T, x: [T; 3], x0: [T; 3]) -> Result<T> {
        let a = self.amplitude(t)?;
        let r2: T = (0..3).map(|i| (x[i] - x0[i]) * (x[i] - x0[i])).sum();
        Ok(a / (self.t_inf - t + r2).sqrt())
    }
}

/// `c(q) = (4π/3)^{1/q}(1 − 3/q)^{(1−3/q)/2}(3/q)^{3/(2q)}`, the maximum of
/// `α·λ(α)^{1/q}` for the profile `1/√(s + r²)` at `s = 1`.
pub fn weak_norm_constant<T: Real>(q: T) -> T {
    let a = T::lit(3.0) / q;
    let b = T::one() - a;
    (T::lit(4.0) * T::PI() / T::lit(3.0)).powf(q.recip()) * b.powf(b * T::lit(0.5)) * a.powf(a * T::lit(0.5))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormNorms<T> {
    /// `A/(t∞ − t)^{1/p}` as displayed in the construction.
    pub weak_literal: T,
    /// `c(q)·A/(t∞ − t)^{1/p}`, the actual weak norm.
    pub weak_corrected: T,
    /// `A/(t∞ − t)^{1/2}`
    pub sup: T,
}

pub fn closed_form_norms<T: Real>(s: &DyadicSchedule<T>, t: T) -> Result<ClosedFormNorms<T>> {
    let a = s.amplitude(t)?;
    let gap = s.t_inf - t;
    let weak_literal = a / gap.powf(s.p.recip());
    Ok(ClosedFormNorms {
        weak_literal,
        weak_corrected: weak_norm_constant(s.q) * weak_literal,
        sup: a / gap.sqrt(),
    })
}

/// Per-interval contribution to the criterion integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Claim1Term<T> {
    pub n: usize,
    /// The displayed upper bound for interval `n`.
    pub term: T,
    /// `∫_{t_n}^{t_n*} ‖f‖_{q,∞}^p/(e + log(e + ‖f‖_∞)) dt` with the closed-form norms.
    pub exact: T,
    pub partial_term: T,
    pub partial_exact: T,
}

/// `ln` of the displayed bound
/// `t∞^{−1}·2^{−k_n}2^{p m_n}(2^{−n} − 2^{−k_n})^{−1}/(e + log(e + t∞^{−1/2}2^{m_n+n/2}))`.
pub fn claim1_log_term<T: Real>(s: &DyadicSchedule<T>, n: usize) -> T {
    let ln2 = T::LN_2();
    let (m, k) = (s.m(n), s.k(n));
    let nf = T::from_usize_exact(n);
    let ln_x = (nf - k) * ln2;
    // ln(2^{−n} − 2^{−k}) = −n ln 2 + ln(1 − 2^{n−k})
    let ln_gap = -nf * ln2 + (-ln_x.exp()).ln_1p();
    let inner = T::log_add_exp(T::one(), -T::lit(0.5) * s.t_inf.ln() + (m + nf * T::lit(0.5)) * ln2);
    -s.t_inf.ln() + (s.p * m - k) * ln2 - ln_gap - (T::E() + inner).ln()
}

/// Exact integral over interval `n`. With `σ = ln(t∞ − t)` the integrand is
/// `2^{p m_n}/(e + log(e + 2^{m_n}e^{−σ/2}))`, smooth on an interval of length
/// `−ln(1 − 2^{n−k_n})`; 8-point Gauss-Legendre is exact to rounding.
pub fn claim1_exact_interval<T: Real>(s: &DyadicSchedule<T>, n: usize) -> T {
    let ln2 = T::LN_2();
    let (m, k) = (s.m(n), s.k(n));
    let nf = T::from_usize_exact(n);
    let (lo, hi) = s.ln_gap_bounds(n);
    let ln_x = (nf - k) * ln2;
    let half = (hi - lo) * T::lit(0.5);
    let mid = (hi + lo) * T::lit(0.5);
    let mean: T = GL8
        .iter()
        .map(|&(x, w)| {
            let sigma = mid + half * T::lit(x);
            T::lit(w * 0.5) / (T::E() + T::log_add_exp(T::one(), m * ln2 - sigma * T::lit(0.5)))
        })
        .sum();
    // 2^{p m}·(hi − lo) = 2^{p m + n − k}·(hi − lo)/x
    ((s.p * m + nf - k) * ln2 + ln_log1m_ratio(ln_x)).exp() * mean
}

pub fn claim1_terms<T: Real>(s: &DyadicSchedule<T>, n_terms: usize) -> Result<Vec<Claim1Term<T>>> {
    if n_terms == 0 {
        return Err(Error::Precondition("claim 1 needs at least one term".into()));
    }
    let mut out = Vec::with_capacity(n_terms);
    let (mut st, mut se) = (T::zero(), T::zero());
    for n in 1..=n_terms {
        let term = claim1_log_term(s, n).exp();
        let exact = claim1_exact_interval(s, n);
        st += term;
        se += exact;
        out.push(Claim1Term {
            n,
            term,
            exact,
            partial_term: st,
            partial_exact: se,
        });
    }
    Ok(out)
}

/// `term_n·n²` outside `[1/(2 ln 2), 2/ln 2]` for `2 ≤ n ≤ n_max`.
pub fn claim1_bracket_violations<T: Real>(s: &DyadicSchedule<T>, n_max: usize) -> Vec<(usize, T)> {
    let lo = (T::lit(2.0) * T::LN_2()).recip();
    let hi = T::lit(2.0) / T::LN_2();
    (2..=n_max)
        .filter_map(|n| {
            let v = (claim1_log_term(s, n) + T::lit(2.0) * T::from_usize_exact(n).ln()).exp();
            (v < lo || v > hi).then_some((n, v))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Claim2Report<T> {
    pub r: T,
    /// `t∞^{r/p} Σ_{n≤N} R_n^{−r}(R_n^r − R_{n−1}^r)` for each `N`.
    pub partial: Vec<T>,
    /// `Σ_{n≤N} (R_{n−1}/R_n)^r` from the exponent identity.
    pub comparison: Vec<T>,
    /// The same sums with `R_n` evaluated from `k_n` directly.
    pub comparison_direct: Vec<T>,
    /// `2^{(3/2 − 1/p)r}/(2^{2r} − 1)`
    pub comparison_limit: T,
}

/// `R_0 = t∞^{1/p}` corresponds to `k_0 = 0`.
pub fn claim2_lower_bound<T: Real>(s: &DyadicSchedule<T>, n_terms: usize, r: T) -> Result<Claim2Report<T>> {
    if !(r > T::one()) || !r.is_finite() {
        return Err(Error::Precondition(format!("claim 2 needs r in (1, ∞), got {r}")));
    }
    if n_terms < 1 {
        return Err(Error::Precondition("claim 2 needs at least one term".into()));
    }
    let two = T::lit(2.0);
    let scale = s.t_inf.powf(r / s.p);
    let (mut part, mut comp, mut direct) = (T::zero(), T::zero(), T::zero());
    let mut report = Claim2Report {
        r,
        partial: Vec::with_capacity(n_terms),
        comparison: Vec::with_capacity(n_terms),
        comparison_direct: Vec::with_capacity(n_terms),
        comparison_limit: two.powf((T::lit(1.5) - s.p.recip()) * r) / (two.powf(two * r) - T::one()),
    };
    for n in 1..=n_terms {
        let nf = T::from_usize_exact(n);
        let ratio = two.powf(r * (-two * nf + T::lit(1.5) - s.p.recip()));
        let k_prev = if n == 1 { T::zero() } else { s.k(n - 1) };
        direct += two.powf(r / s.p * (k_prev - s.k(n)));
        comp += ratio;
        part += scale * (T::one() - ratio);
        report.partial.push(part);
        report.comparison.push(comp);
        report.comparison_direct.push(direct);
    }
    Ok(report)
}

/// `(ln value, ln duration)` cells of `t ↦ ‖f(t)‖_{q,∞}` over the first
/// `n_terms` intervals, each split into `sub` equal cells valued at their
/// midpoints. `corrected` selects `c(q)·A/(t∞ − t)^{1/p}` over the literal norm.
pub fn weak_norm_cells<T: Real>(s: &DyadicSchedule<T>, n_terms: usize, sub: usize, corrected: bool) -> Vec<(T, T)> {
    let ln2 = T::LN_2();
    let sub_f = T::from_usize_exact(sub.max(1));
    let ln_c = if corrected { weak_norm_constant(s.q).ln() } else { T::zero() };
    let mut cells = Vec::with_capacity(n_terms * sub.max(1));
    for n in 1..=n_terms {
        let nf = T::from_usize_exact(n);
        let (m, k) = (s.m(n), s.k(n));
        let ln_w = s.t_inf.ln() - k * ln2 - sub_f.ln();
        let ln_x = (nf - k) * ln2;
        for j in 0..sub.max(1) {
            let frac = (T::from_usize_exact(j) + T::lit(0.5)) / sub_f;
            let ln_gap = s.t_inf.ln() - nf * ln2 + (-(ln_x.exp() * frac)).ln_1p();
            cells.push((ln_c + m * ln2 - ln_gap / s.p, ln_w));
        }
    }
    cells
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeparationRow<T> {
    pub n_terms: usize,
    /// Partial criterion integral (exact per interval).
    pub criterion: T,
    /// `‖ ‖f(t)‖_{q,∞} ‖_{L^{p,r}(0, t∞)}` of the truncated profile.
    pub lorentz: T,
    /// The same with `r = ∞`.
    pub weak: T,
}

/// Sub-cells per interval used for the Lorentz time norms.
pub const LORENTZ_SUBCELLS: usize = 16;

pub fn criterion_vs_lorentz<T: Real>(s: &DyadicSchedule<T>, r: T, terms: &[usize]) -> Result<Vec<SeparationRow<T>>> {
    let max = terms.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::Precondition("need at least one positive term count".into()));
    }
    let claim1 = claim1_terms(s, max)?;
    let cells = weak_norm_cells(s, max, LORENTZ_SUBCELLS, false);
    terms
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::Precondition("term counts must be positive".into()));
            }
            let c = &cells[..n * LORENTZ_SUBCELLS];
            Ok(SeparationRow {
                n_terms: n,
                criterion: claim1[n - 1].partial_exact,
                lorentz: lorentz_norm_log(c, s.p, r)?,
                weak: lorentz_norm_log(c, s.p, T::infinity())?,
            })
        })
        .collect()
}

/// `∫ a^p/((t₀ − t)(e + log(e + a/√(t₀ − t)))) dt` by the trapezoid rule on
/// samples of `a` over `[t_first, t_last] ⊂ (0, t₀)`.
pub fn intro_profile_criterion<T: Real>(times: &[T], a: &[T], q: T, t0: T) -> Result<T> {
    if times.len() != a.len() {
        return Err(Error::InvalidInput(format!("{} times but {} amplitudes", times.len(), a.len())));
    }
    if !(q > T::lit(3.0) && q < T::lit(9.0)) {
        return Err(Error::Precondition(format!("q must lie in (3, 9), got {q}")));
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) || times.iter().any(|&t| !(t < t0)) {
        return Err(Error::InvalidInput("times must be nondecreasing and below t0".into()));
    }
    if a.iter().any(|&x| !(x >= T::zero())) {
        return Err(Error::InvalidInput("amplitudes must be nonnegative".into()));
    }
    let p = T::lit(2.0) * q / (q - T::lit(3.0));
    let y: Vec<T> = times
        .iter()
        .zip(a)
        .map(|(&t, &x)| {
            if x == T::zero() {
                return T::zero();
            }
            let gap = t0 - t;
            x.powf(p) / (gap * (T::E() + (T::E() + x / gap.sqrt()).ln()))
        })
        .collect();
    Ok(trapezoid(times, &y))
}

/// Grid sample of `f(·, t)` against its closed-form norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileCheck<T> {
    pub n: usize,
    pub half_width: T,
    pub weak_numeric: T,
    pub sup_numeric: T,
    pub closed: ClosedFormNorms<T>,
}

/// Samples `f(·, t)` on an `n³` grid of the box with half-width
/// `width_factor·√(t∞ − t)` centred on `x₀`, which sits on a grid point.
pub fn profile_grid_check<T: Real>(s: &DyadicSchedule<T>, t: T, n: usize, width_factor: T) -> Result<ProfileCheck<T>> {
    if n % 2 != 0 {
        return Err(Error::InvalidInput(format!("grid size must be even to place x0 on a node, got {n}")));
    }
    let closed = closed_form_norms(s, t)?;
    if closed.sup == T::zero() {
        return Err(Error::Precondition(format!("A(t) vanishes at t = {t}")));
    }
    let half_width = width_factor * (s.t_inf - t).sqrt();
    let grid = Grid::new(n, T::lit(2.0) * half_width)?;
    let c = [half_width; 3];
    let f = ScalarField::from_fn(grid, |x| s.profile(t, x, c).unwrap_or(T::zero()))?;
    Ok(ProfileCheck {
        n,
        half_width,
        weak_numeric: weak_norm(&f, &Region::Full, s.q)?.value,
        sup_numeric: f.max_abs(),
        closed,
    })
}

/// One row of the schedule table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleRow<T> {
    pub n: usize,
    pub m_n: T,
    pub k_n: T,
    pub t_n: T,
    pub t_n_star: T,
    pub term_n: T,
    pub partial_claim1: T,
    pub partial_claim2: T,
}

pub const COUNTEREXAMPLE_COLUMNS: [&str; 8] =
    ["n", "m_n", "k_n", "t_n", "t_n*", "term_n", "partial_claim1", "partial_claim2"];

pub fn schedule_table<T: Real>(s: &DyadicSchedule<T>, n_terms: usize, r: T) -> Result<Vec<ScheduleRow<T>>> {
    let c1 = claim1_terms(s, n_terms)?;
    let c2 = claim2_lower_bound(s, n_terms, r)?;
    Ok(c1
        .iter()
        .zip(&c2.partial)
        .map(|(c, &p2)| ScheduleRow {
            n: c.n,
            m_n: s.m(c.n),
            k_n: s.k(c.n),
            t_n: s.t_start(c.n),
            t_n_star: s.t_end(c.n),
            term_n: c.term,
            partial_claim1: c.partial_term,
            partial_claim2: p2,
        })
        .collect())
}

pub fn write_schedule_csv<T: Real, W: Write>(rows: &[ScheduleRow<T>], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COUNTEREXAMPLE_COLUMNS).map_err(csv_err)?;
    for r in rows {
        let rec = [
            r.n.to_string(),
            format_number(r.m_n),
            format_number(r.k_n),
            format_number(r.t_n),
            format_number(r.t_n_star),
            format_number(r.term_n),
            format_number(r.partial_claim1),
            format_number(r.partial_claim2),
        ];
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q6() -> DyadicSchedule<f64> {
        DyadicSchedule::new(6.0, 1.0).unwrap()
    }

    #[test]
    fn amplitude_examples() {
        let s = q6();
        assert_eq!(s.p, 4.0);
        let mid = |n| 0.5 * (s.t_start(n) + s.t_end(n));
        assert!((s.amplitude(mid(1)).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.amplitude(mid(3)).unwrap() - 2f64.powf(7.5)).abs() < 1e-9);
        assert_eq!(s.amplitude(0.7).unwrap(), 0.0);
        assert_eq!(s.amplitude(0.25).unwrap(), 0.0);
        assert!(s.amplitude(1.0).is_err());
        let five = DyadicSchedule::new(5.0, 2.0).unwrap();
        assert_eq!(five.log2_amplitude(0.5 * (five.t_start(2) + five.t_end(2))).unwrap(), Some(3.0));
    }

    #[test]
    fn intervals_are_ordered() {
        for q in [3.5, 4.0, 6.0, 8.9] {
            let s = DyadicSchedule::new(q, 1.0).unwrap();
            for n in 1..10_000 {
                // t_n* < t_{n+1} ⟺ 2^{−k_n} < 2^{−n−1}
                assert!(s.k(n) > (n + 1) as f64, "q={q} n={n}");
            }
            let (lo, hi) = s.ln_gap_bounds(1);
            assert!(lo < hi);
        }
    }

    #[test]
    fn weak_constant_maximizes_ratio() {
        for q in [4.0, 6.0, 8.0] {
            let c = weak_norm_constant(q);
            // α λ(α)^{1/q} with λ(α) = (4π/3)(α^{−2} − 1)^{3/2}
            let g = |a: f64| a * (4.0 * std::f64::consts::PI / 3.0 * (a.powi(-2) - 1.0).powf(1.5)).powf(1.0 / q);
            let best = (1..100_000).map(|i| g(i as f64 / 100_000.0)).fold(0.0, f64::max);
            assert!((best - c).abs() < 1e-8, "q={q}: {best} vs {c}");
        }
    }

    #[test]
    fn first_claim1_term() {
        let t = claim1_terms(&q6(), 1).unwrap();
        let e = std::f64::consts::E;
        let want = (4.0 / 3.0) / (e + (e + 2.0).ln());
        assert!((t[0].term - want).abs() < 1e-14);
        assert!(t[0].exact <= t[0].term);
        assert!(t[0].exact > 0.8 * t[0].term);
    }

    #[test]
    fn claim1_terms_scale_like_inverse_square() {
        let t = claim1_terms(&q6(), 400).unwrap();
        let last = t.last().unwrap();
        let v = last.term * (last.n * last.n) as f64;
        assert!((v - 1.0 / std::f64::consts::LN_2).abs() < 1e-2, "{v}");
        for c in &t {
            assert!(c.exact <= c.term * (1.0 + 1e-12));
        }
    }

    #[test]
    fn claim2_comparison_closed_form() {
        let r = claim2_lower_bound(&q6(), 60, 2.0).unwrap();
        assert!((r.comparison_limit - 2f64.powf(2.5) / 15.0).abs() < 1e-15);
        assert!((r.comparison.last().unwrap() - r.comparison_limit).abs() < 1e-12);
        for (a, b) in r.comparison.iter().zip(&r.comparison_direct) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(r.partial.windows(2).all(|w| w[1] > w[0]));
        assert!(r.partial[49] >= 45.0);
        assert!(claim2_lower_bound(&q6(), 5, 1.0).is_err());
    }

    #[test]
    fn separation_grows_only_in_lorentz_norm() {
        let rows = criterion_vs_lorentz(&q6(), 2.0, &[1, 5, 10, 20, 40]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].criterion >= w[0].criterion);
            assert!(w[1].lorentz > w[0].lorentz);
        }
        assert!(rows.iter().all(|r| r.criterion < 2.0 && r.weak < 2.0));
        let l4 = rows[3].lorentz.powi(2);
        let l5 = rows[4].lorentz.powi(2);
        assert!(l5 - l4 > 10.0, "{l4} {l5}");
    }

    #[test]
    fn intro_integral_matches_claim1_on_representable_intervals() {
        let s = q6();
        let (mut t, mut a) = (Vec::new(), Vec::new());
        for n in 1..=3 {
            let (lo, hi) = (s.t_start(n), s.t_end(n));
            let len = hi - lo;
            t.push(lo - 1e-9 * len);
            a.push(0.0);
            for j in 0..=2000 {
                t.push(lo + len * (1e-9 + (1.0 - 2e-9) * j as f64 / 2000.0));
                a.push(2f64.powf(s.m(n)));
            }
            t.push(hi + 1e-9 * len);
            a.push(0.0);
        }
        let got = intro_profile_criterion(&t, &a, 6.0, 1.0).unwrap();
        let want = claim1_terms(&s, 3).unwrap()[2].partial_exact;
        assert!((got - want).abs() <= 1e-2 * want, "{got} vs {want}");
        assert_eq!(intro_profile_criterion(&t, &vec![0.0; t.len()], 6.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn schedule_csv_header() {
        let rows = schedule_table(&q6(), 3, 2.0).unwrap();
        let mut buf = Vec::new();
        write_schedule_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,m_n,k_n,t_n,t_n*,term_n,partial_claim1,partial_claim2\n"));
        assert_eq!(text.lines().count(), 4);
    }
}

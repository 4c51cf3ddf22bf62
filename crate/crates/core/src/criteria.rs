//! Exponent algebra, the regularity-criterion integrands and their time
//! integrals along a trajectory.
//!
//! For a Prodi-Serrin pair `2/p + 3/q = 1` with `q ∈ (3, 9)` the auxiliary
//! exponents `σ = 3(q−1)/2`, `ρ = 3(q−1)/(q−3)` satisfy
//! `1 − 2/ρ − 3/σ = 1/ρ` and `ρ = p + 1`, which turns the Hölder relation
//! `‖u‖_{σ,∞}^ρ ≤ ‖u‖_∞‖u‖_{q,∞}^p` into an exact pointwise inequality for
//! simple functions.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::lorentz::{Region, SimpleFunction};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents<T> {
    pub q: T,
    pub p: T,
    pub sigma: T,
    pub rho: T,
}

impl<T: Real> Exponents<T> {
    /// `1 − 2/ρ − 3/σ`, equal to `1/ρ`.
    pub fn gap(&self) -> T {
        T::one() - T::lit(2.0) / self.rho - T::lit(3.0) / self.sigma
    }
}

pub fn derive_exponents<T: Real>(q: T) -> Result<Exponents<T>> {
    let three = T::lit(3.0);
    if !(q > three) {
        return Err(Error::Precondition(format!(
            "q = {q} violates q > 3 (needed for p = 2q/(q−3) to be positive)"
        )));
    }
    if !(q < T::lit(9.0)) {
        return Err(Error::Precondition(format!(
            "q = {q} violates q < 9 (needed for p = 2q/(q−3) > 3)"
        )));
    }
    let e = Exponents {
        q,
        p: T::lit(2.0) * q / (q - three),
        sigma: three * (q - T::one()) / T::lit(2.0),
        rho: three * (q - T::one()) / (q - three),
    };
    debug_assert!((e.gap() - e.rho.recip()).abs() <= T::lit(1e-12));
    Ok(e)
}

/// `‖u‖_q^p`
pub fn integrand_lps<T: Real>(strong_q: T, p: T) -> T {
    strong_q.powf(p)
}

/// `‖u‖_q^p / (1 + log(e + ‖u‖_∞))`
pub fn integrand_zhoulei<T: Real>(sup_norm: T, strong_q: T, p: T) -> T {
    strong_q.powf(p) / (T::one() + (T::E() + sup_norm).ln())
}

/// `‖u‖_{q,∞}^p / (e + log(e + ‖u‖_∞))`
pub fn integrand_weaklog<T: Real>(sup_norm: T, weak_q: T, p: T) -> T {
    weak_q.powf(p) / (T::E() + (T::E() + sup_norm).ln())
}

/// `‖ |u| / (e + log(e + |u|)) ‖_{q,∞}^p`, damping pointwise before taking
/// the weak norm.
pub fn integrand_remark<T: Real>(u: &VectorField<T>, q: T, p: T) -> Result<T> {
    let s = SimpleFunction::from_field(&u.magnitude(), &Region::Full)?;
    let damped = s.map(|v| v / (T::E() + (T::E() + v).ln()))?;
    Ok(damped.distribution().weak_norm(q).powf(p))
}

/// `Ψ(r) = r(e + log(e + r))`
pub fn psi<T: Real>(r: T) -> T {
    r * (T::E() + (T::E() + r).ln())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DominationReport<T> {
    pub points: usize,
    pub violations: usize,
    /// Smallest `1/Ψ(r) − d/dr log(e + log(e + r))` seen.
    pub min_margin: T,
}

/// Checks `1/Ψ(r) > 1/((e + r)(e + log(e + r)))` on `points` log-spaced
/// values of `r` in `[lo, hi]`.
pub fn psi_domination_check<T: Real>(lo: T, hi: T, points: usize) -> Result<DominationReport<T>> {
    if !(lo > T::zero() && hi > lo) || points < 2 {
        return Err(Error::InvalidInput("need 0 < lo < hi and at least 2 points".into()));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut violations = 0;
    let mut min_margin = T::infinity();
    for i in 0..points {
        let r = (a + (b - a) * T::from_usize_exact(i) / T::from_usize_exact(points - 1)).exp();
        let d = (T::E() + (T::E() + r).ln()) * (T::E() + r);
        let margin = psi(r).recip() - d.recip();
        if !(margin > T::zero()) {
            violations += 1;
        }
        min_margin = min_margin.min(margin);
    }
    Ok(DominationReport { points, violations, min_margin })
}

/// One time slice of the criterion quantities, with running integrals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow<T> {
    pub t: T,
    pub sup_norm: T,
    pub weak_q: T,
    pub strong_q: T,
    pub weak_sigma: T,
    #[serde(rename = "I_lps")]
    pub i_lps: T,
    #[serde(rename = "I_zl")]
    pub i_zl: T,
    #[serde(rename = "I_wlog")]
    pub i_wlog: T,
    #[serde(rename = "I_remark")]
    pub i_remark: T,
    #[serde(rename = "C_lps")]
    pub c_lps: T,
    #[serde(rename = "C_zl")]
    pub c_zl: T,
    #[serde(rename = "C_wlog")]
    pub c_wlog: T,
    #[serde(rename = "C_remark")]
    pub c_remark: T,
}

pub const TRACE_COLUMNS: [&str; 13] = [
    "t", "sup_norm", "weak_q", "strong_q", "weak_sigma", "I_lps", "I_zl", "I_wlog", "I_remark", "C_lps", "C_zl",
    "C_wlog", "C_remark",
];

impl<T: Real> TraceRow<T> {
    /// Norms and integrands of one velocity field; running integrals zero.
    pub fn from_field(t: T, u: &VectorField<T>, e: &Exponents<T>) -> Result<Self> {
        let mag = SimpleFunction::from_field(&u.magnitude(), &Region::Full)?;
        let dist = mag.distribution();
        let sup_norm = mag.sup();
        let weak_q = dist.weak_norm(e.q);
        let strong_q = mag.lebesgue(e.q);
        Ok(Self {
            t,
            sup_norm,
            weak_q,
            strong_q,
            weak_sigma: dist.weak_norm(e.sigma),
            i_lps: integrand_lps(strong_q, e.p),
            i_zl: integrand_zhoulei(sup_norm, strong_q, e.p),
            i_wlog: integrand_weaklog(sup_norm, weak_q, e.p),
            i_remark: integrand_remark(u, e.q, e.p)?,
            c_lps: T::zero(),
            c_zl: T::zero(),
            c_wlog: T::zero(),
            c_remark: T::zero(),
        })
    }

    fn values(&self) -> [T; 13] {
        [
            self.t,
            self.sup_norm,
            self.weak_q,
            self.strong_q,
            self.weak_sigma,
            self.i_lps,
            self.i_zl,
            self.i_wlog,
            self.i_remark,
            self.c_lps,
            self.c_zl,
            self.c_wlog,
            self.c_remark,
        ]
    }
}

/// Criterion quantities along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionTrace<T> {
    pub exponents: Exponents<T>,
    pub rows: Vec<TraceRow<T>>,
}

impl<T: Real> CriterionTrace<T> {
    pub fn new(q: T) -> Result<Self> {
        Ok(Self {
            exponents: derive_exponents(q)?,
            rows: Vec::new(),
        })
    }

    /// Appends a row for `u` at time `t` and extends the running integrals.
    pub fn push_field(&mut self, t: T, u: &VectorField<T>) -> Result<&TraceRow<T>> {
        if let Some(last) = self.rows.last() {
            if !(t > last.t) {
                return Err(Error::InvalidInput(format!("trace times must increase: {t} after {}", last.t)));
            }
        }
        let mut row = TraceRow::from_field(t, u, &self.exponents)?;
        if let Some(prev) = self.rows.last() {
            let h = (t - prev.t) * T::lit(0.5);
            row.c_lps = prev.c_lps + h * (prev.i_lps + row.i_lps);
            row.c_zl = prev.c_zl + h * (prev.i_zl + row.i_zl);
            row.c_wlog = prev.c_wlog + h * (prev.i_wlog + row.i_wlog);
            row.c_remark = prev.c_remark + h * (prev.i_remark + row.i_remark);
        }
        self.rows.push(row);
        Ok(self.rows.last().unwrap())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(TRACE_COLUMNS).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record(r.values().iter().map(|v| format_number(*v))).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Recomputes the running integrals of every integrand column by the
/// trapezoid rule.
pub fn accumulate<T: Real>(rows: &mut [TraceRow<T>]) -> Result<()> {
    if rows.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidInput("trace times must be strictly increasing".into()));
    }
    let mut c = [T::zero(); 4];
    for i in 0..rows.len() {
        if i > 0 {
            let (a, b) = (rows[i - 1], rows[i]);
            let h = (b.t - a.t) * T::lit(0.5);
            c[0] += h * (a.i_lps + b.i_lps);
            c[1] += h * (a.i_zl + b.i_zl);
            c[2] += h * (a.i_wlog + b.i_wlog);
            c[3] += h * (a.i_remark + b.i_remark);
        }
        let r = &mut rows[i];
        r.c_lps = c[0];
        r.c_zl = c[1];
        r.c_wlog = c[2];
        r.c_remark = c[3];
    }
    Ok(())
}

/// Trapezoid integral of samples `(t_i, y_i)`.
pub fn trapezoid<T: Real>(t: &[T], y: &[T]) -> T {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| (tw[1] - tw[0]) * (yw[0] + yw[1]) * T::lit(0.5))
        .sum()
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceRow<f64>>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(TRACE_COLUMNS.iter().copied()) {
        return Err(Error::Format(format!("unexpected trace header: {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for rec in rd.deserialize() {
        rows.push(rec.map_err(csv_err)?);
    }
    Ok(rows)
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| format!("line {}: ", p.line())).unwrap_or_default();
    Error::Format(format!("{line}{e}"))
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number<T: Real>(v: T) -> String {
    format!("{:?}", v.as_f64())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport<T> {
    /// `∫‖u‖_{σ,∞}^ρ dt`
    pub lhs: T,
    /// `∫‖u‖_∞‖u‖_{q,∞}^p dt`
    pub rhs: T,
    pub holds: bool,
    /// Rows where `‖u‖_{σ,∞}^ρ > ‖u‖_∞‖u‖_{q,∞}^p` beyond round-off.
    pub row_violations: Vec<usize>,
    /// Largest `lhs/rhs` over rows with a nonzero right side.
    pub max_row_ratio: T,
}

pub fn interpolation_holds<T: Real>(weak_sigma: T, sup_norm: T, weak_q: T, e: &Exponents<T>) -> (T, T, bool) {
    let lhs = weak_sigma.powf(e.rho);
    let rhs = sup_norm * weak_q.powf(e.p);
    (lhs, rhs, lhs <= rhs * (T::one() + T::lit(1e-12)))
}

pub fn holder_check<T: Real>(rows: &[TraceRow<T>], e: &Exponents<T>) -> HolderReport<T> {
    let t: Vec<T> = rows.iter().map(|r| r.t).collect();
    let mut left = Vec::with_capacity(rows.len());
    let mut right = Vec::with_capacity(rows.len());
    let mut row_violations = Vec::new();
    let mut max_row_ratio = T::zero();
    for (i, r) in rows.iter().enumerate() {
        let (l, rr, ok) = interpolation_holds(r.weak_sigma, r.sup_norm, r.weak_q, e);
        if !ok {
            row_violations.push(i);
        }
        if rr > T::zero() {
            max_row_ratio = max_row_ratio.max(l / rr);
        }
        left.push(l);
        right.push(rr);
    }
    let lhs = trapezoid(&t, &left);
    let rhs = trapezoid(&t, &right);
    HolderReport {
        lhs,
        rhs,
        holds: lhs <= rhs + T::lit(1e-10) && row_violations.is_empty(),
        row_violations,
        max_row_ratio,
    }
}

/// Rescaling parameter `ε = (C*/‖u‖^ρ)^{1/(ρ(1 − 2/ρ − 3/σ))}` bringing the
/// norm down to the small-data threshold. `None` when the norm vanishes and
/// no rescaling is needed.
pub fn epsilon_scaling<T: Real>(norm_rho_power: T, c_star: T, e: &Exponents<T>) -> Result<Option<T>> {
    if !(c_star > T::zero()) {
        return Err(Error::Precondition(format!("C* must be positive, got {c_star}")));
    }
    if !(norm_rho_power >= T::zero()) {
        return Err(Error::Precondition(format!("norm must be nonnegative, got {norm_rho_power}")));
    }
    if norm_rho_power == T::zero() {
        return Ok(None);
    }
    Ok(Some((c_star / norm_rho_power).powf((e.rho * e.gap()).recip())))
}

/// `A_λ(1 + ‖u‖^{1/(1 − 2/ρ − 3/σ)})`
pub fn linfty_bound<T: Real>(norm: T, a_lambda: T, e: &Exponents<T>) -> T {
    a_lambda * (T::one() + norm.powf(e.gap().recip()))
}

/// `A_λ = (3/λ)^{1/2} A_3`
pub fn a_lambda<T: Real>(a3: T, lambda: T) -> T {
    (T::lit(3.0) / lambda).sqrt() * a3
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Grid, ScalarField};
    use std::f64::consts::E;

    #[test]
    fn exponents_for_standard_cases() {
        let e = derive_exponents(6.0f64).unwrap();
        assert_eq!((e.p, e.sigma, e.rho), (4.0, 7.5, 5.0));
        assert!((e.gap() - 0.2).abs() < 1e-15);
        let e = derive_exponents(4.0f64).unwrap();
        assert_eq!((e.p, e.sigma, e.rho), (8.0, 4.5, 9.0));
        assert!(derive_exponents(9.0).is_err());
        assert!(derive_exponents(3.0).is_err());
        let near = derive_exponents(9.0f64 - 1e-9).unwrap();
        assert!(near.p > 3.0 && near.p < 3.0 + 1e-8);
    }

    #[test]
    fn integrand_values() {
        assert!((integrand_weaklog(0.0, 1.0, 4.0) - 1.0 / (E + 1.0)).abs() < 1e-15);
        assert_eq!(integrand_weaklog(3.0, 0.0, 4.0), 0.0);
        assert!((integrand_weaklog(E * E - E, 2.0, 4.0) - 16.0 / (E + 2.0)).abs() < 1e-13);
        assert!((integrand_zhoulei(0.0f64, 3.0, 4.0) - 81.0 / 2.0).abs() < 1e-12);
        assert_eq!(integrand_zhoulei(5.0, 0.0, 4.0), 0.0);
        for (s, n) in [(0.0, 1.0), (10.0, 2.0), (1e6, 0.3)] {
            assert!(integrand_zhoulei(s, n, 4.0) <= integrand_lps(n, 4.0));
        }
        assert_eq!(psi(0.0), 0.0);
        assert!((psi(E * E - E) - (E * E - E) * (E + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn remark_integrand_on_constants() {
        let g = Grid::<f64>::periodic(8).unwrap();
        assert_eq!(integrand_remark(&VectorField::zeros(g), 6.0, 4.0).unwrap(), 0.0);
        let c = 3.0f64;
        let u = VectorField::constant(g, [c, 0.0, 0.0]);
        let expect = (c / (E + (E + c).ln())).powf(4.0) * g.volume().powf(4.0 / 6.0);
        let got = integrand_remark(&u, 6.0, 4.0).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn psi_dominates_log_log_derivative() {
        let r = psi_domination_check(1e-6, 1e9, 10_000).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.min_margin > 0.0);
    }

    fn row(t: f64, i: f64) -> TraceRow<f64> {
        TraceRow {
            t,
            sup_norm: 0.0,
            weak_q: 0.0,
            strong_q: 0.0,
            weak_sigma: 0.0,
            i_lps: i,
            i_zl: i,
            i_wlog: i,
            i_remark: i,
            c_lps: 0.0,
            c_zl: 0.0,
            c_wlog: 0.0,
            c_remark: 0.0,
        }
    }

    #[test]
    fn accumulate_constant_and_two_rows() {
        let mut rows: Vec<_> = (0..=10).map(|k| row(k as f64 * 0.25, 2.0)).collect();
        accumulate(&mut rows).unwrap();
        assert_eq!(rows.last().unwrap().c_lps, 5.0);
        assert!(rows.windows(2).all(|w| w[1].c_wlog >= w[0].c_wlog));
        let mut two = vec![row(1.0, 3.0), row(1.5, 5.0)];
        accumulate(&mut two).unwrap();
        assert_eq!(two[1].c_zl, 0.5 * (3.0 + 5.0) / 2.0);
        let mut bad = vec![row(1.0, 0.0), row(1.0, 0.0)];
        assert!(accumulate(&mut bad).is_err());
    }

    #[test]
    fn trapezoid_refinement_is_second_order() {
        let integral = |m: usize| {
            let t: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
            let y: Vec<f64> = t.iter().map(|s| s.exp()).collect();
            (trapezoid(&t, &y) - (E - 1.0)).abs()
        };
        let ratio = integral(20) / integral(40);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn holder_on_zero_and_constant_fields() {
        let g = Grid::<f64>::periodic(8).unwrap();
        let e = derive_exponents(6.0f64).unwrap();
        let mut tr = CriterionTrace::new(6.0).unwrap();
        tr.push_field(0.0, &VectorField::zeros(g)).unwrap();
        tr.push_field(1.0, &VectorField::zeros(g)).unwrap();
        let h = holder_check(&tr.rows, &e);
        assert!(h.holds && h.lhs == 0.0 && h.rhs == 0.0);

        let u = VectorField::from_fn(g, |x| [x[0].sin() + 0.5, x[1].cos(), 0.2]).unwrap();
        let mut tr = CriterionTrace::new(6.0).unwrap();
        for k in 0..3 {
            tr.push_field(k as f64, &u).unwrap();
        }
        let h = holder_check(&tr.rows, &e);
        assert!(h.holds);
        let r = tr.rows[0];
        let (l, rr, ok) = interpolation_holds(r.weak_sigma, r.sup_norm, r.weak_q, &e);
        assert!(ok);
        assert!((h.lhs - 2.0 * l).abs() < 1e-10 * l && (h.rhs - 2.0 * rr).abs() < 1e-10 * rr);
    }

    #[test]
    fn trace_rows_are_consistent() {
        let g = Grid::<f64>::periodic(8).unwrap();
        let mut tr = CriterionTrace::new(6.0).unwrap();
        let u = VectorField::from_fn(g, |x| [x[1].sin(), x[2].sin(), x[0].sin()]).unwrap();
        let r = *tr.push_field(0.0, &u).unwrap();
        assert_eq!(r.sup_norm, u.sup_norm());
        // damping by e + log(e + ·) ≥ e
        assert!(r.i_wlog <= r.weak_q.powf(4.0) / E);
        assert!(tr.push_field(0.0, &u).is_err());
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,sup_norm,weak_q,strong_q,weak_sigma,I_lps,I_zl,I_wlog,I_remark,C_lps,C_zl,C_wlog,C_remark\n"));
        let back = read_trace_csv(&buf[..]).unwrap();
        assert_eq!(back[0], r);
    }

    #[test]
    fn scaling_helpers() {
        let e = derive_exponents(6.0f64).unwrap();
        assert!((epsilon_scaling(2.5, 2.5, &e).unwrap().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(epsilon_scaling(0.0, 1.0, &e).unwrap(), None);
        assert!(epsilon_scaling(1.0, 0.0, &e).is_err());
        assert!((e.gap().recip() - 5.0).abs() < 1e-12);
        assert!((linfty_bound(2.0, 1.0, &e) - (1.0 + 2f64.powf(5.0))).abs() < 1e-9);
        assert!((a_lambda(1.0f64, 0.75) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn weak_norm_scaling_on_shrunk_box() {
        // same samples on a box shrunk by ε, values times ε: cell measures drop by ε³
        let f = |x: [f64; 3]| (x[0].sin() * x[1].cos()).abs() + 0.3 * x[2].cos();
        let g = Grid::<f64>::periodic(16).unwrap();
        let eps = 3.0;
        let small = Grid::new(16, g.length() / eps).unwrap();
        let a = ScalarField::from_fn(g, f).unwrap();
        let b = ScalarField::from_fn(small, |x| eps * f(x.map(|c| c * eps))).unwrap();
        let wa = crate::lorentz::weak_norm(&a, &Region::Full, 6.0).unwrap().value;
        let wb = crate::lorentz::weak_norm(&b, &Region::Full, 6.0).unwrap().value;
        assert!((wb - eps.powf(1.0 - 0.5) * wa).abs() < 1e-12 * wb);
    }
}

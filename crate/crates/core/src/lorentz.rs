//! Distribution functions and the norms built from them.
//!
//! Grid fields and sampled time signals are treated as simple functions,
//! constant on cells. The distribution function `λ(α) = μ{|f| > α}` is then
//! a step function with jumps at the distinct data levels, and every norm
//! below is evaluated exactly on it:
//!
//! * weak `L^{q,∞}`: `sup_α α·λ(α)^{1/q}`, attained as `α → v_i⁻`, so it is
//!   `max_i v_i·μ{|f| ≥ v_i}^{1/q}`;
//! * `L^p` by the layer-cake formula `∫|f|^p = p∫₀^∞ α^{p−1}λ(α) dα`;
//! * Lorentz `L^{p,r}`: `(p∫₀^∞ R^{r−1}λ(R)^{r/p} dR)^{1/r}`, normalized so
//!   that `r = p` gives back `L^p`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField};
use crate::Real;

/// Subset of grid cells a norm is restricted to.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Full,
    Mask(Vec<bool>),
}

impl Region {
    /// Cells whose grid point lies in the closed ball. The ball must fit in
    /// the box: periodic wrap-around would change its geometry.
    pub fn ball<T: Real>(grid: &Grid<T>, center: [T; 3], radius: T) -> Result<Self> {
        let l = grid.length();
        for (a, &c) in center.iter().enumerate() {
            if c - radius < T::zero() || c + radius > l {
                return Err(Error::InvalidInput(format!(
                    "ball of radius {radius} around {c} exceeds the box along axis {a}"
                )));
            }
        }
        let r2 = radius * radius;
        Ok(Region::Mask(
            (0..grid.len())
                .map(|i| {
                    let p = grid.point(i);
                    let d: T = (0..3).map(|a| (p[a] - center[a]) * (p[a] - center[a])).sum();
                    d <= r2
                })
                .collect(),
        ))
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        match self {
            Region::Full => true,
            Region::Mask(m) => m[idx],
        }
    }

    pub fn cell_count<T: Real>(&self, grid: &Grid<T>) -> usize {
        match self {
            Region::Full => grid.len(),
            Region::Mask(m) => m.iter().filter(|&&b| b).count(),
        }
    }

    pub fn measure<T: Real>(&self, grid: &Grid<T>) -> T {
        T::from_usize_exact(self.cell_count(grid)) * grid.cell_volume()
    }

    fn check<T: Real>(&self, grid: &Grid<T>) -> Result<()> {
        match self {
            Region::Mask(m) if m.len() != grid.len() => Err(Error::InvalidInput(format!(
                "region mask has {} cells, grid has {}",
                m.len(),
                grid.len()
            ))),
            _ => Ok(()),
        }
    }
}

/// Nonnegative signal, piecewise constant on the cells `[edges[i], edges[i+1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSignal<T> {
    edges: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> TimeSignal<T> {
    pub fn new(edges: Vec<T>, values: Vec<T>) -> Result<Self> {
        if edges.len() != values.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} cell edges for {} values",
                edges.len(),
                values.len()
            )));
        }
        if edges.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidInput("cell edges must be nondecreasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::InvalidInput("signal values must be finite and nonnegative".into()));
        }
        Ok(Self { edges, values })
    }

    /// Cells of equal length `dt` starting at `t0`.
    pub fn uniform(t0: T, dt: T, values: Vec<T>) -> Result<Self> {
        let edges = (0..=values.len()).map(|i| t0 + dt * T::from_usize_exact(i)).collect();
        Self::new(edges, values)
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Finite collection of values with the measures of the cells carrying them.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleFunction<T> {
    values: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> SimpleFunction<T> {
    /// `values` are replaced by their absolute values.
    pub fn new(values: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::InvalidInput("values and weights differ in length".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= T::zero())) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        Ok(Self {
            values: values.into_iter().map(|v| v.abs()).collect(),
            weights,
        })
    }

    pub fn from_field(f: &ScalarField<T>, region: &Region) -> Result<Self> {
        let g = f.grid();
        region.check(g)?;
        let w = g.cell_volume();
        let values: Vec<T> = f
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| region.contains(*i))
            .map(|(_, v)| v.abs())
            .collect();
        let weights = vec![w; values.len()];
        Ok(Self { values, weights })
    }

    pub fn from_signal(s: &TimeSignal<T>) -> Self {
        Self {
            values: s.values.clone(),
            weights: s.edges.windows(2).map(|w| w[1] - w[0]).collect(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn measure(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn sup(&self) -> T {
        self.values
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > T::zero())
            .fold(T::zero(), |m, (v, _)| m.max(*v))
    }

    pub fn distribution(&self) -> DistributionFunction<T> {
        DistributionFunction::new(self)
    }

    /// `(Σ |f|^p·w)^{1/p}` by direct summation.
    pub fn lebesgue(&self, p: T) -> T {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| v.powf(p) * w)
            .sum::<T>()
            .powf(p.recip())
    }

    /// Pointwise transform, keeping the weights.
    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect(), self.weights.clone())
    }
}

/// Step-function representation of `λ(α) = μ{|f| > α}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFunction<T> {
    thresholds: Vec<T>,
    measure_ge: Vec<T>,
    measure_gt: Vec<T>,
    total: T,
}

impl<T: Real> DistributionFunction<T> {
    pub fn new(f: &SimpleFunction<T>) -> Self {
        let mut pairs: Vec<(T, T)> = f
            .values
            .iter()
            .copied()
            .zip(f.weights.iter().copied())
            .filter(|(_, w)| *w > T::zero())
            .collect();
        pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

        // walk from the largest level down, accumulating measure
        let mut thresholds = Vec::new();
        let mut measure_ge = Vec::new();
        let mut measure_gt = Vec::new();
        let mut above = T::zero();
        let mut i = 0;
        while i < pairs.len() {
            let level = pairs[i].0;
            let mut here = T::zero();
            while i < pairs.len() && pairs[i].0 == level {
                here += pairs[i].1;
                i += 1;
            }
            thresholds.push(level);
            measure_gt.push(above);
            above += here;
            measure_ge.push(above);
        }
        thresholds.reverse();
        measure_ge.reverse();
        measure_gt.reverse();
        Self {
            thresholds,
            measure_ge,
            measure_gt,
            total: f.measure(),
        }
    }

    /// Distinct levels in increasing order.
    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    /// `μ{|f| ≥ α_i}`, the left limit `λ(α_i⁻)`.
    pub fn measure_ge(&self) -> &[T] {
        &self.measure_ge
    }

    /// `μ{|f| > α_i}`, the value `λ(α_i)`.
    pub fn measure_gt(&self) -> &[T] {
        &self.measure_gt
    }

    pub fn total_measure(&self) -> T {
        self.total
    }

    /// `λ(α) = μ{|f| > α}`.
    pub fn lambda(&self, alpha: T) -> T {
        if alpha < T::zero() {
            return self.total;
        }
        let first_above = self.thresholds.partition_point(|&t| t <= alpha);
        self.measure_ge.get(first_above).copied().unwrap_or_else(T::zero)
    }

    pub fn weak_norm(&self, q: T) -> T {
        let e = q.recip();
        self.thresholds
            .iter()
            .zip(&self.measure_ge)
            .filter(|(v, _)| **v > T::zero())
            .fold(T::zero(), |m, (&v, &mu)| m.max(v * mu.powf(e)))
    }

    /// `∫|f|^p` from the α-integral, exact on each constant piece of λ.
    pub fn layer_cake_integral(&self, p: T) -> T {
        let mut prev = T::zero();
        let mut acc = T::zero();
        for (&v, &mu) in self.thresholds.iter().zip(&self.measure_ge) {
            acc += (v.powf(p) - prev.powf(p)) * mu;
            prev = v;
        }
        acc
    }

    pub fn lorentz_norm(&self, p: T, r: T) -> T {
        if r.is_infinite() {
            return self.weak_norm(p);
        }
        let levels: Vec<(T, T)> = self
            .thresholds
            .iter()
            .zip(&self.measure_ge)
            .filter(|(v, _)| **v > T::zero())
            .map(|(&v, &mu)| (v.ln(), mu.ln()))
            .collect();
        lorentz_from_log_levels(&levels, p, r)
    }
}

/// Lorentz norm from `(ln v_i, ln μ{|f| ≥ v_i})` pairs sorted by increasing
/// level. Working in logs keeps values like `2^{m}` with measures `2^{−k}`
/// representable when each product `v^r μ^{r/p}` is moderate.
fn lorentz_from_log_levels<T: Real>(levels: &[(T, T)], p: T, r: T) -> T {
    let mut prev = T::neg_infinity();
    let mut acc = T::zero();
    for &(lv, lmu) in levels {
        // (v_i^r − v_{i−1}^r)·μ_i^{r/p} = v_i^r μ_i^{r/p}·(1 − (v_{i−1}/v_i)^r)
        let gap = -(r * (prev - lv)).exp_m1();
        acc += (r * lv + r / p * lmu).exp() * gap;
        prev = lv;
    }
    (p / r * acc).powf(r.recip())
}

/// Lorentz `L^{p,r}` norm of a simple function given entirely in log form:
/// `(ln |value|, ln weight)` per cell, in any order. Cells with weight `−∞`
/// or value `−∞` (zero) are ignored.
pub fn lorentz_norm_log<T: Real>(cells: &[(T, T)], p: T, r: T) -> Result<T> {
    check_lorentz_exponents(p, r)?;
    let mut sorted: Vec<(T, T)> = cells
        .iter()
        .copied()
        .filter(|(v, w)| *v > T::neg_infinity() && *w > T::neg_infinity())
        .collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // ln μ{≥ v_i} by log-sum-exp from the top, merging equal levels
    let mut levels: Vec<(T, T)> = Vec::new();
    let mut acc = T::neg_infinity();
    for &(v, w) in sorted.iter().rev() {
        acc = T::log_add_exp(acc, w);
        match levels.last_mut() {
            Some(last) if last.0 == v => last.1 = acc,
            _ => levels.push((v, acc)),
        }
    }
    levels.reverse();
    if r.is_infinite() {
        let inv = p.recip();
        return Ok(levels
            .iter()
            .fold(T::zero(), |m, &(v, mu)| m.max((v + inv * mu).exp())));
    }
    Ok(lorentz_from_log_levels(&levels, p, r))
}

fn check_lorentz_exponents<T: Real>(p: T, r: T) -> Result<()> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::Precondition(format!("Lorentz exponent p must lie in [1, ∞), got {p}")));
    }
    if !(r >= T::one()) {
        return Err(Error::Precondition(format!("Lorentz exponent r must be at least 1, got {r}")));
    }
    Ok(())
}

/// Which norm a [`NormReport`] carries.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind<T> {
    Lebesgue { p: T },
    Weak { p: T },
    Lorentz { p: T, r: T },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormReport<T> {
    pub kind: NormKind<T>,
    pub value: T,
    pub domain_measure: T,
    /// Set when the region contained no cells.
    pub empty_region: bool,
}

/// JSON row `{kind, p, r, value, measure}`; `r` is `null` for weak norms
/// (`r = ∞`) and equals `p` for Lebesgue norms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormRow {
    pub kind: &'static str,
    pub p: f64,
    pub r: Option<f64>,
    pub value: f64,
    pub measure: f64,
}

impl<T: Real> NormReport<T> {
    fn new(kind: NormKind<T>, value: T, f: &SimpleFunction<T>) -> Self {
        Self {
            kind,
            value,
            domain_measure: f.measure(),
            empty_region: f.values.is_empty(),
        }
    }

    pub fn row(&self) -> NormRow {
        let (kind, p, r) = match self.kind {
            NormKind::Lebesgue { p } => ("lebesgue", p.as_f64(), Some(p.as_f64())),
            NormKind::Weak { p } => ("weak", p.as_f64(), None),
            NormKind::Lorentz { p, r } => ("lorentz", p.as_f64(), Some(r.as_f64())),
        };
        NormRow {
            kind,
            p,
            r,
            value: self.value.as_f64(),
            measure: self.domain_measure.as_f64(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.row()).expect("plain struct serializes")
    }
}

/// Result of a single distribution-function evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureReport<T> {
    pub measure: T,
    pub region_measure: T,
    pub empty_region: bool,
}

/// `μ{x ∈ region : |f(x)| > alpha}` by cell counting.
pub fn distribution<T: Real>(f: &ScalarField<T>, region: &Region, alpha: T) -> Result<MeasureReport<T>> {
    if !(alpha >= T::zero()) {
        return Err(Error::Precondition(format!("alpha must be nonnegative, got {alpha}")));
    }
    region.check(f.grid())?;
    let count = f
        .values()
        .iter()
        .enumerate()
        .filter(|(i, v)| region.contains(*i) && v.abs() > alpha)
        .count();
    let cells = region.cell_count(f.grid());
    Ok(MeasureReport {
        measure: T::from_usize_exact(count) * f.grid().cell_volume(),
        region_measure: region.measure(f.grid()),
        empty_region: cells == 0,
    })
}

pub fn weak_norm<T: Real>(f: &ScalarField<T>, region: &Region, q: T) -> Result<NormReport<T>> {
    if !(q > T::zero()) {
        return Err(Error::Precondition(format!("weak exponent must be positive, got {q}")));
    }
    let s = SimpleFunction::from_field(f, region)?;
    let v = s.distribution().weak_norm(q);
    Ok(NormReport::new(NormKind::Weak { p: q }, v, &s))
}

pub fn lebesgue_norm<T: Real>(f: &ScalarField<T>, region: &Region, p: T) -> Result<NormReport<T>> {
    check_lebesgue(p)?;
    let s = SimpleFunction::from_field(f, region)?;
    let v = s.lebesgue(p);
    Ok(NormReport::new(NormKind::Lebesgue { p }, v, &s))
}

/// `L^p` norm through the distribution function instead of direct summation.
pub fn layer_cake<T: Real>(f: &ScalarField<T>, region: &Region, p: T) -> Result<NormReport<T>> {
    check_lebesgue(p)?;
    let s = SimpleFunction::from_field(f, region)?;
    let v = (p * s.distribution().layer_cake_integral(p) / p).powf(p.recip());
    Ok(NormReport::new(NormKind::Lebesgue { p }, v, &s))
}

fn check_lebesgue<T: Real>(p: T) -> Result<()> {
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::Precondition(format!("Lebesgue exponent must lie in [1, ∞), got {p}")));
    }
    Ok(())
}

/// Lorentz `L^{p,r}` norm in time of a piecewise-constant nonnegative signal.
/// `r = ∞` is the weak norm.
pub fn lorentz_time_norm<T: Real>(signal: &TimeSignal<T>, p: T, r: T) -> Result<NormReport<T>> {
    check_lorentz_exponents(p, r)?;
    let s = SimpleFunction::from_signal(signal);
    let d = s.distribution();
    if r.is_infinite() {
        return Ok(NormReport::new(NormKind::Weak { p }, d.weak_norm(p), &s));
    }
    Ok(NormReport::new(NormKind::Lorentz { p, r }, d.lorentz_norm(p, r), &s))
}

/// Both inequalities of the compact-set embedding lemma, evaluated on one
/// function with explicit constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbeddingReport<T> {
    pub p: T,
    pub r: T,
    pub eps: T,
    pub measure: T,
    /// `‖f‖_{L^{p,∞}(K)}`
    pub weak_p: T,
    /// `μ(K)^{1/p − 1/r}`
    pub c_k: T,
    pub weak_bound: T,
    pub weak_holds: bool,
    /// `‖f‖_{L^p(K)}`
    pub lp_norm: T,
    /// `‖f‖_{L^{r,∞}(K)}`
    pub weak_r: T,
    /// `(p/(r−p))^{1/p}·ε^{(p−r)/p}`
    pub c_eps: T,
    pub bound: T,
    pub holds: bool,
}

/// `C(ε) = (p/(r − p))^{1/p}·ε^{(p − r)/p}`, from bounding the α-integral of
/// `α^{p−r−1}` over `(ε, ∞)`.
pub fn embedding_constant<T: Real>(p: T, r: T, eps: T) -> T {
    (p / (r - p)).powf(p.recip()) * eps.powf((p - r) / p)
}

pub fn compact_embedding_check<T: Real>(
    f: &ScalarField<T>,
    region: &Region,
    p: T,
    r: T,
    eps: T,
) -> Result<EmbeddingReport<T>> {
    if !(p >= T::one() && p < r) || !r.is_finite() {
        return Err(Error::Precondition(format!("need 1 ≤ p < r < ∞, got p = {p}, r = {r}")));
    }
    if !(eps > T::zero() && eps < T::one()) {
        return Err(Error::Precondition(format!("eps must lie in (0, 1), got {eps}")));
    }
    let s = SimpleFunction::from_field(f, region)?;
    let d = s.distribution();
    let mu = s.measure();
    let slack = T::lit(1e-12);

    let weak_p = d.weak_norm(p);
    let weak_r = d.weak_norm(r);
    let c_k = mu.powf(p.recip() - r.recip());
    let weak_bound = c_k * weak_r;

    let lp_norm = s.lebesgue(p);
    let c_eps = embedding_constant(p, r, eps);
    let bound = c_eps * weak_r.powf(r / p) + eps * mu.powf(p.recip());
    Ok(EmbeddingReport {
        p,
        r,
        eps,
        measure: mu,
        weak_p,
        c_k,
        weak_bound,
        weak_holds: weak_p <= weak_bound * (T::one() + slack),
        lp_norm,
        weak_r,
        c_eps,
        bound,
        holds: lp_norm <= bound * (T::one() + slack),
    })
}

/// Splits a nonnegative field into `f·χ_{f≥1}` and `f·χ_{f<1}`.
pub fn split_at_one<T: Real>(f: &ScalarField<T>) -> Result<(ScalarField<T>, ScalarField<T>)> {
    if f.values().iter().any(|&v| v < T::zero()) {
        return Err(Error::Precondition("split_at_one expects a nonnegative field".into()));
    }
    let one = T::one();
    let high = f.map(|v| if v >= one { v } else { T::zero() })?;
    let low = f.map(|v| if v < one { v } else { T::zero() })?;
    Ok((high, low))
}

/// Dyadic-layer estimates for the two halves of [`split_at_one`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitReport<T> {
    pub r1: T,
    pub r: T,
    pub r2: T,
    /// `‖f‖_{L^{r,∞}}`
    pub weak_r: T,
    /// `μ{f ≥ 1}`
    pub base_measure: T,
    /// `(2^{r1} − 1)·Σ_{k≥1} 2^{(r1−r)k}`
    pub c_high: T,
    /// `(1 − 2^{−r2})·2^r·Σ_{k≥0} 2^{(r−r2)k}`
    pub c_low: T,
    /// `‖f χ_{f≥1}‖^{r1}_{L^{r1}}`
    pub high_lhs: T,
    /// `2^{r1}·μ{f ≥ 1} + C(r, r1)·‖f‖^r_{r,∞}`
    pub high_rhs: T,
    pub high_holds: bool,
    /// `‖f χ_{f<1}‖^{r2}_{L^{r2}}`
    pub low_lhs: T,
    /// `C(r, r2)·‖f‖^r_{r,∞}`
    pub low_rhs: T,
    pub low_holds: bool,
}

impl<T: Real> SplitReport<T> {
    pub fn holds(&self) -> bool {
        self.high_holds && self.low_holds
    }
}

pub fn split_constants<T: Real>(r1: T, r: T, r2: T) -> (T, T) {
    let two = T::lit(2.0);
    let ratio_high = two.powf(r1 - r);
    let c_high = (two.powf(r1) - T::one()) * ratio_high / (T::one() - ratio_high);
    let c_low = (T::one() - two.powf(-r2)) * two.powf(r) / (T::one() - two.powf(r - r2));
    (c_high, c_low)
}

pub fn lemma13_check<T: Real>(f: &ScalarField<T>, region: &Region, r1: T, r: T, r2: T) -> Result<SplitReport<T>> {
    if !(T::one() < r1 && r1 < r && r < r2 && r2.is_finite()) {
        return Err(Error::Precondition(format!(
            "need 1 < r1 < r < r2 < ∞, got ({r1}, {r}, {r2})"
        )));
    }
    let (high, low) = split_at_one(f)?;
    let s = SimpleFunction::from_field(f, region)?;
    let weak_r = s.distribution().weak_norm(r);
    let w = f.grid().cell_volume();
    let base_measure = T::from_usize_exact(
        f.values()
            .iter()
            .enumerate()
            .filter(|(i, v)| region.contains(*i) && **v >= T::one())
            .count(),
    ) * w;
    let power_sum = |g: &ScalarField<T>, e: T| -> T {
        g.values()
            .iter()
            .enumerate()
            .filter(|(i, _)| region.contains(*i))
            .map(|(_, v)| v.powf(e))
            .sum::<T>()
            * w
    };
    let (c_high, c_low) = split_constants(r1, r, r2);
    let high_lhs = power_sum(&high, r1);
    let high_rhs = T::lit(2.0).powf(r1) * base_measure + c_high * weak_r.powf(r);
    let low_lhs = power_sum(&low, r2);
    let low_rhs = c_low * weak_r.powf(r);
    let slack = T::one() + T::lit(1e-12);
    Ok(SplitReport {
        r1,
        r,
        r2,
        weak_r,
        base_measure,
        c_high,
        c_low,
        high_lhs,
        high_rhs,
        high_holds: high_lhs <= high_rhs * slack,
        low_lhs,
        low_rhs,
        low_holds: low_lhs <= low_rhs * slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid<f64> {
        Grid::periodic(8).unwrap()
    }

    fn two_valued(lo: f64, hi: f64) -> ScalarField<f64> {
        let g = grid();
        ScalarField::new(g, (0..g.len()).map(|i| if i % 2 == 0 { lo } else { hi }).collect()).unwrap()
    }

    #[test]
    fn distribution_of_constant_field() {
        let g = grid();
        let f = ScalarField::constant(g, 2.0);
        let tau3 = std::f64::consts::TAU.powi(3);
        let m = distribution(&f, &Region::Full, 1.0).unwrap();
        assert!((m.measure - tau3).abs() < 1e-10);
        assert_eq!(distribution(&f, &Region::Full, 3.0).unwrap().measure, 0.0);
        assert!(distribution(&f, &Region::Full, -1.0).is_err());
    }

    #[test]
    fn distribution_of_two_valued_field_counts_half() {
        let g = grid();
        let f = two_valued(1.0, 3.0);
        // exhaustive count
        let brute = f.values().iter().filter(|v| v.abs() > 2.0).count() as f64 * g.cell_volume();
        let m = distribution(&f, &Region::Full, 2.0).unwrap();
        assert_eq!(m.measure, brute);
        assert!((m.measure - 0.5 * g.volume()).abs() < 1e-10);
    }

    #[test]
    fn empty_region_is_flagged() {
        let g = grid();
        let f = ScalarField::constant(g, 1.0);
        let r = Region::Mask(vec![false; g.len()]);
        let m = distribution(&f, &r, 0.5).unwrap();
        assert_eq!(m.measure, 0.0);
        assert!(m.empty_region);
        let w = weak_norm(&f, &r, 2.0).unwrap();
        assert!(w.empty_region);
        assert_eq!(w.value, 0.0);
    }

    #[test]
    fn weak_norm_of_constant() {
        let g = grid();
        let f = ScalarField::constant(g, 1.5);
        for q in [1.0, 2.0, 6.0, 7.5] {
            let v = weak_norm(&f, &Region::Full, q).unwrap().value;
            assert!((v - 1.5 * g.volume().powf(1.0 / q)).abs() < 1e-12 * v);
        }
        assert_eq!(weak_norm(&ScalarField::zeros(g), &Region::Full, 3.0).unwrap().value, 0.0);
    }

    #[test]
    fn weak_norm_of_two_valued_field_is_best_candidate() {
        let g = grid();
        let f = two_valued(1.0, 3.0);
        let m = g.volume();
        for q in [1.0, 1.5, 3.0, 6.0] {
            // the two candidate levels: α → 1⁻ sees all of the box, α → 3⁻ half of it
            let brute = f64::max(1.0 * m.powf(1.0 / q), 3.0 * (0.5 * m).powf(1.0 / q));
            let v = weak_norm(&f, &Region::Full, q).unwrap().value;
            assert!((v - brute).abs() < 1e-12 * brute);
        }
    }

    #[test]
    fn lambda_is_right_continuous_step() {
        let s = SimpleFunction::new(vec![1.0, 2.0, 2.0, 3.0], vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let d = s.distribution();
        assert_eq!(d.thresholds(), &[1.0, 2.0, 3.0]);
        assert_eq!(d.measure_ge(), &[4.0, 3.0, 1.0]);
        assert_eq!(d.measure_gt(), &[3.0, 1.0, 0.0]);
        assert_eq!(d.lambda(0.0), 4.0);
        assert_eq!(d.lambda(1.0), 3.0);
        assert_eq!(d.lambda(1.5), 3.0);
        assert_eq!(d.lambda(2.0), 1.0);
        assert_eq!(d.lambda(3.0), 0.0);
    }

    #[test]
    fn indicator_layer_cake_matches_direct() {
        // f = 2 on a set of unit measure: ∫|f|² = 4 both ways
        let s = SimpleFunction::<f64>::new(vec![2.0, 0.0], vec![1.0, 5.0]).unwrap();
        assert!((s.lebesgue(2.0).powi(2) - 4.0).abs() < 1e-14);
        assert!((s.distribution().layer_cake_integral(2.0) - 4.0).abs() < 1e-14);
        let g = grid();
        let z = ScalarField::zeros(g);
        assert_eq!(lebesgue_norm(&z, &Region::Full, 2.0).unwrap().value, 0.0);
        assert_eq!(layer_cake(&z, &Region::Full, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn three_valued_random_fields_layer_cake_matches_direct() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let levels = [rng.gen_range(0.0..1.0), rng.gen_range(1.0..4.0), rng.gen_range(4.0..9.0)];
            let f = ScalarField::new(g, (0..g.len()).map(|_| levels[rng.gen_range(0..3)]).collect()).unwrap();
            let p = rng.gen_range(1.0..6.0);
            let a = lebesgue_norm(&f, &Region::Full, p).unwrap().value;
            let b = layer_cake(&f, &Region::Full, p).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn lorentz_norm_of_constant_signal() {
        // ∫₀^c R^{r−1} T^{r/p} dR = c^r T^{r/p} / r, so the norm is c·T^{1/p}·(p/r)^{1/r}
        let (c, t) = (1.7f64, 2.5f64);
        let s = TimeSignal::uniform(0.0, t / 4.0, vec![c; 4]).unwrap();
        for (p, r) in [(4.0, 4.0), (4.0, 2.0), (2.0, 3.0), (1.0, 1.0), (3.0, 7.0)] {
            let v = lorentz_time_norm(&s, p, r).unwrap().value;
            let expect = c * t.powf(1.0 / p) * (p / r).powf(1.0 / r);
            assert!((v - expect).abs() < 1e-12 * expect, "p={p} r={r}: {v} vs {expect}");
        }
        let w = lorentz_time_norm(&s, 4.0, f64::INFINITY).unwrap();
        assert!(matches!(w.kind, NormKind::Weak { .. }));
        assert!((w.value - c * t.powf(0.25)).abs() < 1e-12);
        let zero = TimeSignal::uniform(0.0, 1.0, vec![0.0; 3]).unwrap();
        assert_eq!(lorentz_time_norm(&zero, 2.0, 3.0).unwrap().value, 0.0);
    }

    #[test]
    fn lorentz_with_r_equal_p_is_lebesgue() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..40).map(|_| rng.gen_range(0.0..5.0)).collect();
        let s = TimeSignal::uniform(0.0, 0.25, values.clone()).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let lor = lorentz_time_norm(&s, p, p).unwrap().value;
            let direct = SimpleFunction::from_signal(&s).lebesgue(p);
            assert!((lor - direct).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn log_route_matches_linear_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..30).map(|_| rng.gen_range(0.1..5.0)).collect();
        let weights: Vec<f64> = (0..30).map(|_| rng.gen_range(0.01..1.0)).collect();
        let s = SimpleFunction::new(values.clone(), weights.clone()).unwrap();
        let logs: Vec<(f64, f64)> = values.iter().zip(&weights).map(|(v, w)| (v.ln(), w.ln())).collect();
        for (p, r) in [(4.0, 2.0), (2.0, 5.0), (3.0, f64::INFINITY)] {
            let a = s.distribution().lorentz_norm(p, r);
            let b = lorentz_norm_log(&logs, p, r).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
        }
        // values and weights far outside f64 range whose products are moderate
        let huge: Vec<(f64, f64)> = (1..=5)
            .map(|i| (2000.0 * i as f64, -4.0 * 2000.0 * i as f64))
            .collect();
        let v = lorentz_norm_log(&huge, 4.0, 2.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn lemma_checks_reject_bad_exponents() {
        let f = ScalarField::constant(grid(), 1.0);
        assert!(matches!(
            compact_embedding_check(&f, &Region::Full, 3.0, 2.0, 0.1),
            Err(Error::Precondition(_))
        ));
        assert!(compact_embedding_check(&f, &Region::Full, 2.0, 3.0, 1.5).is_err());
        assert!(matches!(
            lemma13_check(&f, &Region::Full, 2.5, 2.0, 4.0),
            Err(Error::Precondition(_))
        ));
        let neg = ScalarField::constant(grid(), -1.0);
        assert!(split_at_one(&neg).is_err());
    }

    #[test]
    fn embedding_check_on_zero_and_indicator() {
        let g = grid();
        let z = ScalarField::zeros(g);
        let rep = compact_embedding_check(&z, &Region::Full, 2.0, 3.0, 0.1).unwrap();
        assert_eq!(rep.lp_norm, 0.0);
        assert!(rep.holds && rep.weak_holds);
        assert!((rep.bound - 0.1 * g.volume().sqrt()).abs() < 1e-12);

        // indicator of a ball K: ‖1‖_{L^p(K)} = μ^{1/p}; bound = C(ε)·μ^{1/p} + ε μ^{1/p}
        let k = Region::ball(&g, [3.0, 3.0, 3.0], 2.0).unwrap();
        let one = ScalarField::constant(g, 1.0);
        let rep = compact_embedding_check(&one, &k, 2.0, 3.0, 0.1).unwrap();
        assert!(rep.holds && rep.lp_norm < rep.bound);
        assert!((rep.lp_norm - rep.measure.sqrt()).abs() < 1e-12);
        // Hölder on indicators is sharp
        assert!((rep.weak_p - rep.weak_bound).abs() < 1e-12 * rep.weak_p);
    }

    #[test]
    fn split_is_exact_and_disjoint() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = ScalarField::new(g, (0..g.len()).map(|_| rng.gen_range(0.0..3.0)).collect()).unwrap();
        let (hi, lo) = split_at_one(&f).unwrap();
        for i in 0..g.len() {
            assert_eq!(hi.values()[i] + lo.values()[i], f.values()[i]);
            assert!(hi.values()[i] == 0.0 || lo.values()[i] == 0.0);
        }
        let half = ScalarField::constant(g, 0.5);
        let (hi, _) = split_at_one(&half).unwrap();
        assert_eq!(hi.max_abs(), 0.0);
        let rep = lemma13_check(&half, &Region::Full, 2.0, 2.5, 4.0).unwrap();
        assert_eq!(rep.high_lhs, 0.0);
        assert!(rep.holds());
    }

    #[test]
    fn split_check_on_indicator_has_closed_form_sides() {
        let g = grid();
        let k = Region::ball(&g, [3.0, 3.0, 3.0], 2.0).unwrap();
        let mu = k.measure(&g);
        let two_ind = ScalarField::new(g, (0..g.len()).map(|i| if k.contains(i) { 2.0 } else { 0.0 }).collect()).unwrap();
        let (r1, r, r2) = (2.0, 2.5, 4.0);
        let rep = lemma13_check(&two_ind, &Region::Full, r1, r, r2).unwrap();
        let weak_r_pow = 2f64.powf(r) * mu;
        assert!((rep.high_lhs - 2f64.powf(r1) * mu).abs() < 1e-10 * rep.high_lhs);
        assert!((rep.weak_r.powf(r) - weak_r_pow).abs() < 1e-10 * weak_r_pow);
        let (c_high, _) = split_constants(r1, r, r2);
        let expect_rhs = 2f64.powf(r1) * mu + c_high * weak_r_pow;
        assert!((rep.high_rhs - expect_rhs).abs() < 1e-10 * expect_rhs);
        assert!(rep.holds());
    }

    #[test]
    fn norm_report_serializes_as_flat_row() {
        let f = ScalarField::constant(grid(), 1.0);
        let w = weak_norm(&f, &Region::Full, 3.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&w.to_json()).unwrap();
        assert_eq!(v["kind"], "weak");
        assert_eq!(v["p"], 3.0);
        assert!(v["r"].is_null());
        assert!(v["measure"].as_f64().unwrap() > 0.0);
        let l = lebesgue_norm(&f, &Region::Full, 2.0).unwrap();
        assert_eq!(l.row().r, Some(2.0));
    }

    #[test]
    fn ball_that_leaves_the_box_is_rejected() {
        let g = grid();
        assert!(Region::ball(&g, [0.5, 3.0, 3.0], 1.0).is_err());
        assert!(Region::ball(&g, [3.0, 3.0, 3.0], 1.0).is_ok());
    }
}

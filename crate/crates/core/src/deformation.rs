//! Deformed module structures `Ỹ(a, x) = Y(Δ(v, x) a, x)`, the logarithmic
//! operator `Δ_log(v, x)`, and the Cartan shift `Δ(h, x)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::case::Case;
use crate::error::{Error, Result};
use crate::fock::FockElement;
use crate::lattice::LatticeVector;
use crate::modes::{self, ExtendedSector};
use crate::rational::{big, fmt_q, qi, rat, Q64, Rational};

/// `Y(a, x)`-type field written as `Σ_e x^e Y(b_e, x)`; its `n`-th mode is
/// `Σ_e (b_e)_{n+e}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DeformedField {
    pub parts: BTreeMap<Q64, FockElement>,
}

impl DeformedField {
    pub fn plain(a: &FockElement) -> Self {
        DeformedField { parts: BTreeMap::from([(qi(0), a.clone())]) }
    }

    pub fn mode(&self, case: &Case, n: Q64, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
        let mut out = FockElement::zero();
        for (e, b) in &self.parts {
            out += &case.mode_ext(b, n + *e, w, es)?;
        }
        Ok(out)
    }

    /// `n ↦ ã_n w` for all `n ≥ nmin` at once.
    pub fn modes_from(&self, case: &Case, nmin: Q64, w: &FockElement, es: Option<&ExtendedSector>) -> Result<BTreeMap<Q64, FockElement>> {
        let mut out: BTreeMap<Q64, FockElement> = BTreeMap::new();
        for (e, b) in &self.parts {
            for (k, v) in modes::modes_from(&case.cfg, b, nmin + *e, w, es)? {
                *out.entry(k - *e).or_default() += &v;
            }
        }
        out.retain(|_, v| !v.is_zero());
        Ok(out)
    }

    /// True when the field has no correction terms.
    pub fn is_plain(&self) -> bool {
        self.parts.keys().all(|e| e.is_zero())
    }
}

/// `(−1)^{m+1}/m`, the coefficient of `v_m x^{−m}` in `log Δ(v, x)`.
fn log_coeff(m: i64) -> Rational {
    let s = if m % 2 == 1 { 1 } else { -1 };
    rat(s, m)
}

fn add_at(map: &mut BTreeMap<Q64, FockElement>, e: Q64, v: &FockElement, c: &Rational) {
    if v.is_zero() || c.is_zero() {
        return;
    }
    let slot = map.entry(e).or_default();
    slot.add_scaled(v, c);
    if slot.is_zero() {
        map.remove(&e);
    }
}

/// Applies `Π_{m≥1} exp(c_m x^{−m} X_m)` for commuting operators `X_m`
/// (zero beyond `bound(state)`), starting from `start`.
fn exp_of_commuting(
    start: BTreeMap<Q64, FockElement>,
    coeff: impl Fn(i64) -> Rational,
    mut op: impl FnMut(i64, &FockElement) -> Result<FockElement>,
    mut bound: impl FnMut(&FockElement) -> Option<Q64>,
    cap: usize,
) -> Result<BTreeMap<Q64, FockElement>> {
    let mut cur = start;
    let mut m = 1i64;
    loop {
        let b = cur.values().filter_map(&mut bound).max();
        match b {
            Some(b) if qi(m) <= b => {}
            _ => return Ok(cur),
        }
        let c = coeff(m);
        let mut next = cur.clone();
        for (e, el) in &cur {
            let mut power = el.clone();
            let mut factor = Rational::one();
            for t in 1.. {
                power = op(m, &power)?;
                if power.is_zero() {
                    break;
                }
                if t > cap {
                    return Err(Error::NotNilpotent(cap));
                }
                factor = factor * &c / Rational::from_integer(t.into());
                add_at(&mut next, *e - qi(m * t as i64), &power, &factor);
            }
        }
        cur = next;
        m += 1;
    }
}

/// Deformation by an even vector `v` with commuting modes.
#[derive(Clone, Debug)]
pub struct Deformation {
    pub v: FockElement,
    /// Truncation rule of the extended algebra, used for products `v_m a`.
    pub alg: Option<ExtendedSector>,
    /// Bound `N` for nilpotency checks of `v_0`.
    pub nil_bound: usize,
}

impl Deformation {
    /// The case's own deformation: `v` is the `Q̃` vector, products taken in
    /// the extended algebra.
    pub fn standard(case: &Case) -> Self {
        Deformation { v: case.qt_vec.clone(), alg: Some(case.algebra_sector()), nil_bound: 4 }
    }

    /// Same deformation scaled by `λ`.
    pub fn scaled(&self, lambda: &Rational) -> Self {
        Deformation { v: self.v.scaled(lambda), ..self.clone() }
    }

    /// Checks that `v` is even, that `L(n)v = δ_{n,0}v` for `0 ≤ n ≤ 3`, and
    /// that `[v_n, v_m]w = 0` for `n, m` in `modes` on every `w` given.
    /// Returns the first violation.
    pub fn validate(&self, case: &Case, ws: &[FockElement], modes: &[i64], es: Option<&ExtendedSector>) -> Result<Option<String>> {
        for (b, _) in self.v.iter() {
            if case.cfg.parity(&b.point)? != b.fermion_parity() {
                return Ok(Some("deformation vector is odd".into()));
            }
        }
        for n in 0..=3 {
            let mut d = case.virasoro(n, &self.v)?;
            if n == 0 {
                d.add_scaled(&self.v, &-Rational::one());
            }
            if !d.is_zero() {
                return Ok(Some(format!("L({n})v differs from the quasi-primary value")));
            }
        }
        for w in ws {
            for &n in modes {
                for &m in modes.iter().filter(|&&m| m > n) {
                    let a = self.v_mode(case, n, &self.v_mode(case, m, w, es)?, es)?;
                    let b = self.v_mode(case, m, &self.v_mode(case, n, w, es)?, es)?;
                    if a != b {
                        return Ok(Some(format!("[v_{n}, v_{m}] is nonzero on a basis state")));
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn v_mode(&self, case: &Case, m: i64, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
        case.mode_ext(&self.v, qi(m), w, es)
    }

    /// `Δ(v, x) a` as `{exponent: coefficient}`; `a` must satisfy `v_0 a = 0`.
    pub fn delta(&self, case: &Case, a: &FockElement) -> Result<BTreeMap<Q64, FockElement>> {
        let es = self.alg.as_ref();
        if !self.v_mode(case, 0, a, es)?.is_zero() {
            return Err(Error::NotInKernel);
        }
        exp_of_commuting(
            BTreeMap::from([(qi(0), a.clone())]),
            log_coeff,
            |m, s| self.v_mode(case, m, s, es),
            |s| modes::max_mode(&case.cfg, &self.v, s),
            64,
        )
    }

    pub fn field(&self, case: &Case, a: &FockElement) -> Result<DeformedField> {
        Ok(DeformedField { parts: self.delta(case, a)? })
    }

    /// `ã_n w`.
    pub fn deformed_mode(&self, case: &Case, a: &FockElement, n: Q64, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
        self.field(case, a)?.mode(case, n, w, es)
    }

    /// `L̃(n) w = L(n) w + v_n w`.
    pub fn virasoro(&self, case: &Case, n: i64, w: &FockElement, es: Option<&ExtendedSector>) -> Result<FockElement> {
        Ok(case.virasoro(n, w)? + self.v_mode(case, n, w, es)?)
    }

    /// Order of nilpotency of `v_0` on `w`: least `k` with `v_0^k w = 0`.
    pub fn nilpotency(&self, case: &Case, w: &FockElement, es: Option<&ExtendedSector>) -> Result<usize> {
        let mut cur = w.clone();
        for k in 0..=self.nil_bound {
            if cur.is_zero() {
                return Ok(k);
            }
            cur = self.v_mode(case, 0, &cur, es)?;
        }
        Err(Error::NotNilpotent(self.nil_bound))
    }

    /// `Δ_log(v, x) w = exp(log(x) v_0 + Σ_{m≥1} (−1)^{m+1}/m v_m x^{−m}) w`,
    /// keeping powers `x^e` with `e ≥ −order`.
    pub fn delta_log(&self, case: &Case, w: &FockElement, order: i64, es: Option<&ExtendedSector>) -> Result<LogSeries> {
        self.nilpotency(case, w, es)?;
        let mut total = LogSeries::default();
        total.add(qi(0), 0, w);
        let mut term = total.clone();
        let mut k = 1i64;
        while !term.is_zero() {
            let mut next = LogSeries::default();
            for ((e, l), el) in &term.terms {
                next.add(*e, l + 1, &self.v_mode(case, 0, el, es)?);
                let bound = modes::max_mode(&case.cfg, &self.v, el).unwrap_or(qi(0));
                let mut m = 1;
                while qi(m) <= bound && *e - qi(m) >= qi(-order) {
                    let img = self.v_mode(case, m, el, es)?;
                    next.add_scaled(*e - qi(m), *l, &img, &log_coeff(m));
                    m += 1;
                }
            }
            term = next.scaled(&rat(1, k));
            total.add_series(&term);
            k += 1;
            if k as usize > self.nil_bound + order.max(0) as usize + 2 {
                return Err(Error::NotNilpotent(self.nil_bound));
            }
        }
        Ok(total)
    }

    /// `Ỹ(u, x) w = Y(Δ_log(v, x) u, x) w`, powers of `x` up to `emax`.
    /// `module` governs `v` acting on `u`; `target` the truncation of `Y`.
    pub fn log_intertwiner(
        &self,
        case: &Case,
        u: &FockElement,
        w: &FockElement,
        emax: Q64,
        module: Option<&ExtendedSector>,
        target: Option<&ExtendedSector>,
    ) -> Result<LogSeries> {
        let dl = self.delta_log(case, u, 64, module)?;
        let mut out = LogSeries::default();
        for ((e, l), c) in &dl.terms {
            let ser = modes::series_upto(&case.cfg, c, w, emax - *e, target)?;
            for (f, val) in ser {
                out.add(*e + f, *l, &val);
            }
        }
        Ok(out)
    }
}

/// Cartan shift `Δ(h, x) a = x^{h_0} exp(Σ_{m≥1} (−1)^{m+1}/m h_m x^{−m}) a`,
/// with `h_0` required to have integral eigenvalues on `a`.
pub fn cartan_delta(case: &Case, h: &LatticeVector, a: &FockElement) -> Result<BTreeMap<Q64, FockElement>> {
    let mut start: BTreeMap<Q64, FockElement> = BTreeMap::new();
    for (b, c) in a.iter() {
        let eig = case.cfg.pairing(h, &b.point);
        if *eig.denom() != 1 {
            return Err(Error::NonIntegralWeight(eig));
        }
        start.entry(eig).or_default().add_term(b.clone(), c.clone());
    }
    exp_of_commuting(
        start,
        log_coeff,
        |m, s| Ok(modes::heis_vec(&case.cfg, h, m, s)),
        |s| s.iter().map(|(b, _)| qi(b.boson_degree() as i64)).max(),
        64,
    )
}

/// `Y(Δ(h, x) a, x)` as a field.
pub fn cartan_shifted_field(case: &Case, h: &LatticeVector, a: &FockElement) -> Result<DeformedField> {
    Ok(DeformedField { parts: cartan_delta(case, h, a)? })
}

/// Truncated series in `x` and `log x` with Fock-space coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogSeries {
    pub terms: BTreeMap<(Q64, u32), FockElement>,
}

impl LogSeries {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&mut self, e: Q64, l: u32, v: &FockElement) {
        self.add_scaled(e, l, v, &Rational::one());
    }

    pub fn add_scaled(&mut self, e: Q64, l: u32, v: &FockElement, c: &Rational) {
        if v.is_zero() || c.is_zero() {
            return;
        }
        let slot = self.terms.entry((e, l)).or_default();
        slot.add_scaled(v, c);
        if slot.is_zero() {
            self.terms.remove(&(e, l));
        }
    }

    pub fn add_series(&mut self, o: &LogSeries) {
        for ((e, l), v) in &o.terms {
            self.add(*e, *l, v);
        }
    }

    pub fn scaled(&self, c: &Rational) -> LogSeries {
        let mut out = LogSeries::default();
        for ((e, l), v) in &self.terms {
            out.add_scaled(*e, *l, v, c);
        }
        out
    }

    pub fn get(&self, e: Q64, l: u32) -> FockElement {
        self.terms.get(&(e, l)).cloned().unwrap_or_default()
    }

    pub fn max_log(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn has_logs(&self) -> bool {
        self.max_log() > 0
    }

    /// Terms with `x`-power in `[lo, hi]`.
    pub fn window(&self, lo: Q64, hi: Q64) -> LogSeries {
        LogSeries { terms: self.terms.iter().filter(|(k, _)| k.0 >= lo && k.0 <= hi).map(|(k, v)| (*k, v.clone())).collect() }
    }

    /// `d/dx`, with `(log x)′ = 1/x`.
    pub fn derivative(&self) -> LogSeries {
        let mut out = LogSeries::default();
        for ((e, l), v) in &self.terms {
            out.add_scaled(*e - qi(1), *l, v, &big(*e));
            if *l > 0 {
                out.add_scaled(*e - qi(1), l - 1, v, &Rational::from_integer((*l).into()));
            }
        }
        out
    }

    pub fn from_plain(map: &BTreeMap<Q64, FockElement>) -> LogSeries {
        let mut out = LogSeries::default();
        for (e, v) in map {
            out.add(*e, 0, v);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|((e, l), v)| json!({"x_exp": fmt_q(*e), "log_pow": l, "coeff": v.to_json()}))
                .collect(),
        )
    }
}

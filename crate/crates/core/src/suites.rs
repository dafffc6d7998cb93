//! Named verification suites. Each suite registers checks against one case;
//! [`run_suite`] runs them on a thread pool and collects a [`Report`] whose
//! order is the registration order.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::affine::{self, AffineRealization, DEFAULT_CHARGES};
use crate::case::Case;
use crate::deformation::{cartan_shifted_field, Deformation, LogSeries};
use crate::error::{Error, Result};
use crate::fock::{oscillators, FockBasisVector, FockElement};
use crate::lattice::{CaseKind, LatticeVector};
use crate::modes::{self, ExtendedSector};
use crate::rational::{big, binomial_int, fmt_big, fmt_q, q, qi, rat, rint, Rational, Q64};
use crate::report::{CheckResult, Report, Status};
use crate::screening::{self, triplet_generators, twisted_sector, TripletGenerators};
use crate::structure::{
    basis_span, generate_submodule, jordan_structure, triplet_alphabet, SubmoduleSpan,
};
use crate::super_ns::{ns_central_charge, NsRealization, SAMPLE_R};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SuiteName {
    Triplet,
    Wpp,
    Super,
    Affine,
    Logint,
    All,
}

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Triplet => "triplet",
            SuiteName::Wpp => "wpp",
            SuiteName::Super => "super",
            SuiteName::Affine => "affine",
            SuiteName::Logint => "logint",
            SuiteName::All => "all",
        }
    }

    /// Default `(p, p′)` of a single suite.
    pub fn default_params(self) -> Option<(i64, i64)> {
        match self {
            SuiteName::Triplet | SuiteName::Logint => Some((2, 1)),
            SuiteName::Wpp => Some((3, 2)),
            SuiteName::Super => Some((3, 1)),
            SuiteName::Affine | SuiteName::All => None,
        }
    }
}

impl FromStr for SuiteName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "triplet" => SuiteName::Triplet,
            "wpp" => SuiteName::Wpp,
            "super" => SuiteName::Super,
            "affine" => SuiteName::Affine,
            "logint" => SuiteName::Logint,
            "all" => SuiteName::All,
            _ => return Err(Error::Config(format!("unknown suite {s:?} (expected triplet, wpp, super, affine, logint or all)"))),
        })
    }
}

pub const COCYCLES: [&str; 1] = ["standard"];
pub const MAX_CUTOFF: i64 = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub suite: SuiteName,
    pub p: Option<i64>,
    pub pprime: Option<i64>,
    /// Inclusive bound on the weights the checks look at.
    pub cutoff: i64,
    pub cocycle: String,
    /// Worker threads; does not affect the report.
    pub jobs: usize,
}

impl SuiteConfig {
    pub fn new(suite: SuiteName) -> Self {
        SuiteConfig { suite, p: None, pprime: None, cutoff: 6, cocycle: "standard".into(), jobs: 1 }
    }

    /// `(p, p′)` for the configured suite, after defaults.
    pub fn params(&self) -> Result<Option<(i64, i64)>> {
        let Some((dp, dpp)) = self.suite.default_params() else {
            if self.p.is_some() || self.pprime.is_some() {
                return Err(Error::Config(format!("the {} suite takes no --p/--pprime", self.suite.as_str())));
            }
            return Ok(None);
        };
        let (p, pp) = (self.p.unwrap_or(dp), self.pprime.unwrap_or(dpp));
        match self.suite {
            SuiteName::Triplet | SuiteName::Logint if pp != 1 => {
                return Err(Error::Config(format!("the {} suite needs p′ = 1 (use --suite wpp for p′ > 1)", self.suite.as_str())))
            }
            SuiteName::Wpp if pp < 2 => return Err(Error::Config("the wpp suite needs p′ ≥ 2".into())),
            _ => {}
        }
        Ok(Some((p, pp)))
    }

    pub fn validate(&self) -> Result<()> {
        if !COCYCLES.contains(&self.cocycle.as_str()) {
            return Err(Error::Config(format!("unknown cocycle convention {:?} (expected standard)", self.cocycle)));
        }
        if !(0..=MAX_CUTOFF).contains(&self.cutoff) {
            return Err(Error::Config(format!("cutoff must lie in 0..={MAX_CUTOFF}, got {}", self.cutoff)));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        let check = |r: Result<Case>| r.map(|_| ()).map_err(|e| Error::Config(e.to_string()));
        match (self.suite, self.params()?) {
            (SuiteName::Super, Some((p, pp))) => check(Case::super_ns(p, pp)),
            (_, Some((p, pp))) => check(Case::triplet(p, pp)),
            _ => Ok(()),
        }
    }

    /// Everything that determines the report (thread count excluded).
    pub fn to_json(&self) -> Value {
        let params = self.params().ok().flatten();
        json!({
            "suite": self.suite.as_str(),
            "p": params.map(|x| x.0),
            "pprime": params.map(|x| x.1),
            "cutoff": self.cutoff,
            "cocycle": self.cocycle,
        })
    }
}

type CheckFn = Box<dyn Fn() -> Result<(bool, Value)> + Send + Sync>;

struct Check {
    id: String,
    description: String,
    claim: &'static str,
    /// Smallest cutoff the check is meaningful at.
    needs: Q64,
    run: CheckFn,
}

struct Registry {
    prefix: &'static str,
    cutoff: Q64,
    checks: Vec<Check>,
}

impl Registry {
    fn new(prefix: &'static str, cutoff: i64) -> Self {
        Registry { prefix, cutoff: qi(cutoff), checks: Vec::new() }
    }

    fn add(
        &mut self,
        id: &str,
        claim: &'static str,
        description: impl Into<String>,
        needs: Q64,
        run: impl Fn() -> Result<(bool, Value)> + Send + Sync + 'static,
    ) {
        self.checks.push(Check {
            id: format!("{}.{id}", self.prefix),
            description: description.into(),
            claim,
            needs,
            run: Box::new(run),
        });
    }
}

fn run_check(c: &Check, cutoff: Q64) -> CheckResult {
    let start = Instant::now();
    let (status, witness) = if c.needs > cutoff {
        let reason = Error::CutoffTooSmall { cutoff, weight: c.needs }.to_string();
        (Status::Skipped, json!({ "reason": reason }))
    } else {
        match catch_unwind(AssertUnwindSafe(|| (c.run)())) {
            Ok(Ok((true, w))) => (Status::Pass, w),
            Ok(Ok((false, w))) => (Status::Fail, w),
            Ok(Err(e @ Error::CutoffTooSmall { .. })) => (Status::Skipped, json!({ "reason": e.to_string() })),
            Ok(Err(e)) => (Status::Fail, json!({ "error": e.to_string() })),
            Err(p) => {
                let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
                (Status::Fail, json!({ "error": format!("panic: {}", msg.unwrap_or_default()) }))
            }
        }
    };
    CheckResult {
        id: c.id.clone(),
        description: c.description.clone(),
        claim: c.claim.into(),
        status,
        witness,
        wall_time_ms: start.elapsed().as_millis() as u64,
    }
}

/// Runs every check of the configured suite.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let mut regs = Vec::new();
    match cfg.suite {
        SuiteName::All => {
            for s in [SuiteName::Triplet, SuiteName::Wpp, SuiteName::Super, SuiteName::Affine, SuiteName::Logint] {
                regs.push(register(s, s.default_params(), cfg.cutoff)?);
            }
        }
        s => regs.push(register(s, cfg.params()?, cfg.cutoff)?),
    }
    let jobs: Vec<(&Check, Q64)> = regs.iter().flat_map(|r| r.checks.iter().map(move |c| (c, r.cutoff))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results = pool.install(|| jobs.par_iter().map(|(c, cut)| run_check(c, *cut)).collect());
    Ok(Report::new(cfg.to_json(), results))
}

fn register(s: SuiteName, params: Option<(i64, i64)>, cutoff: i64) -> Result<Registry> {
    let pp = || params.ok_or_else(|| Error::Config("missing parameters".into()));
    Ok(match s {
        SuiteName::Triplet => triplet_suite(pp()?.0, cutoff)?,
        SuiteName::Wpp => wpp_suite(pp()?, cutoff)?,
        SuiteName::Super => super_suite(pp()?, cutoff)?,
        SuiteName::Affine => affine_suite(cutoff),
        SuiteName::Logint => logint_suite(pp()?.0, cutoff)?,
        SuiteName::All => unreachable!("expanded by run_suite"),
    })
}

// ---------------------------------------------------------------------------
// shared pieces

fn el_json(v: &FockElement) -> Value {
    v.to_json()
}

fn q_json(x: Q64) -> Value {
    json!(fmt_q(x))
}

fn r_json(x: &Rational) -> Value {
    json!(fmt_big(x))
}

fn pt(c: Q64) -> FockElement {
    FockElement::exp(LatticeVector::rank1(c))
}

/// Eigenvalue of a basis vector `b` when `v` is a multiple of it.
fn eigen_of(v: &FockElement, b: &FockElement) -> Option<Rational> {
    if v.is_zero() {
        return Some(Rational::zero());
    }
    multiple_of(v, b)
}

/// `Some(c)` when `v = c·e^target` with `c ≠ 0`.
fn multiple_of(v: &FockElement, target: &FockElement) -> Option<Rational> {
    let (b, _) = target.iter().next()?;
    let c = v.coeff(b);
    (!c.is_zero() && *v == target.scaled(&c)).then_some(c)
}

fn dims_json(m: &BTreeMap<Q64, usize>) -> Value {
    Value::Array(m.iter().map(|(w, d)| json!([fmt_q(*w), d])).collect())
}

/// Weight of `e^λ` from the closed formulas of each lattice.
fn closed_point_weight(kind: CaseKind, l: &LatticeVector) -> Q64 {
    let [a, b] = *l.coeffs();
    match kind {
        CaseKind::Triplet { p, pprime } => a * a * qi(p * pprime) - a * qi(p - pprime),
        CaseKind::Super { p, pprime } => (a * a * qi(p * pprime) - a * qi(p - pprime)) / 2,
        CaseKind::Affine => (a * a - b * b) / 12 + a / 3,
    }
}

/// Graded dimensions of the sector `rep + L` counted from its character:
/// lattice points by a direct scan, oscillators from the partition
/// generating function `Π(1−q^n)^{−rank} Π(1+q^{r})`.
pub fn character_dims(case: &Case, rep: &LatticeVector, wmax: Q64, charge: Option<i64>) -> BTreeMap<Q64, usize> {
    let kind = case.kind();
    let [r0, r1] = *rep.coeffs();
    let mut points = Vec::new();
    match (kind, charge) {
        (CaseKind::Affine, Some(b)) => {
            let y = qi(b) - r1;
            for x in -900i64..=900 {
                let ok = y.is_integer() && x % 3 == 0 && (y.to_integer() % 3 == 0) && ((x / 3 - y.to_integer() / 3) % 2 == 0);
                if ok {
                    points.push(LatticeVector::new(r0 + qi(x), qi(b)));
                }
            }
        }
        (CaseKind::Affine, None) => return BTreeMap::new(),
        _ => points.extend((-300i64..=300).map(|k| LatticeVector::rank1(r0 + qi(k)))),
    }
    let weights: Vec<Q64> = points.iter().map(|l| closed_point_weight(kind, l)).filter(|w| *w <= wmax).collect();
    let Some(lowest) = weights.iter().min().copied() else { return BTreeMap::new() };
    let top = ((wmax - lowest) * 2).to_integer() as usize;
    let mut gen = vec![0u64; top + 1];
    gen[0] = 1;
    for _ in 0..case.cfg.rank {
        for part in (2..=top).step_by(2) {
            for i in part..=top {
                gen[i] += gen[i - part];
            }
        }
    }
    if case.cfg.is_super() {
        for part in (1..=top).step_by(2) {
            for i in (part..=top).rev() {
                gen[i] += gen[i - part];
            }
        }
    }
    let mut out = BTreeMap::new();
    for w0 in weights {
        for (h, n) in gen.iter().enumerate() {
            let w = w0 + q(h as i64, 2);
            if *n > 0 && w <= wmax {
                *out.entry(w).or_insert(0) += *n as usize;
            }
        }
    }
    out
}

/// Graded dimensions of the same sector from the engine's basis enumeration.
pub fn basis_dims(case: &Case, rep: &LatticeVector, wmax: Q64, charge: Option<i64>) -> Result<BTreeMap<Q64, usize>> {
    let ch = charge.map(qi);
    let mut out = BTreeMap::new();
    for w in case.weights_upto(rep, wmax, ch)? {
        let n = case.graded_basis(rep, w, ch)?.len();
        if n > 0 {
            out.insert(w, n);
        }
    }
    Ok(out)
}

fn dims_check(case: &Case, sectors: &[(LatticeVector, Option<i64>)], wmax: Q64) -> Result<(bool, Value)> {
    let mut rows = Vec::new();
    let mut ok = true;
    for (rep, charge) in sectors {
        let oracle = character_dims(case, rep, wmax, *charge);
        let engine = basis_dims(case, rep, wmax, *charge)?;
        ok &= oracle == engine;
        rows.push(json!({
            "sector": rep.coeffs().iter().map(|c| fmt_q(*c)).collect::<Vec<_>>(),
            "charge": charge,
            "engine": dims_json(&engine),
            "character": dims_json(&oracle),
        }));
    }
    Ok((ok, json!({ "cutoff": fmt_q(wmax), "sectors": rows })))
}

/// `[Q, Q̃]w = 0` on every basis vector of the given sectors.
fn screening_check(case: &Case, sectors: &[(LatticeVector, Option<i64>)], wmax: Q64) -> Result<(bool, Value)> {
    let mut checked = 0usize;
    for (rep, charge) in sectors {
        for b in case.basis_upto(rep, wmax, charge.map(qi))? {
            let w = FockElement::basis(b);
            let d = screening::screening_commutator(case, &w, None)?;
            checked += 1;
            if !d.is_zero() {
                return Ok((false, json!({ "state": el_json(&w), "commutator": el_json(&d), "checked": checked })));
            }
        }
    }
    Ok((true, json!({ "checked": checked, "cutoff": fmt_q(wmax) })))
}

/// `[L(m), L(n)] = (m−n)L(m+n) + c/12 (m³−m) δ_{m+n,0}` for `m, n ∈ [−3, 3]`.
fn virasoro_check(
    states: &[FockElement],
    c: &Rational,
    l: impl Fn(i64, &FockElement) -> Result<FockElement>,
) -> Result<(bool, Value)> {
    for w in states {
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                let lhs = l(m, &l(n, w)?)? - l(n, &l(m, w)?)?;
                let mut rhs = l(m + n, w)?.scaled(&rat(m - n, 1));
                if m + n == 0 {
                    rhs.add_scaled(w, &(c * rat(m * m * m - m, 12)));
                }
                if lhs != rhs {
                    return Ok((false, json!({ "m": m, "n": n, "state": el_json(w), "difference": el_json(&(lhs - rhs)) })));
                }
            }
        }
    }
    Ok((true, json!({ "central_charge": r_json(c), "states": states.len(), "modes": [-3, 3] })))
}

fn elements(basis: Vec<FockBasisVector>) -> Vec<FockElement> {
    basis.into_iter().map(FockElement::basis).collect()
}

fn sector_states(case: &Case, es: &ExtendedSector, wmax: Q64) -> Result<Vec<FockElement>> {
    let mut b = case.basis_upto(&es.base, wmax, None)?;
    b.extend(case.basis_upto(&(es.base + es.shift), wmax, None)?);
    b.sort();
    b.dedup();
    Ok(elements(b))
}

fn sector_weights(case: &Case, es: &ExtendedSector, wmax: Q64) -> Result<Vec<Q64>> {
    let mut ws = case.weights_upto(&es.base, wmax, None)?;
    ws.extend(case.weights_upto(&(es.base + es.shift), wmax, None)?);
    ws.sort();
    ws.dedup();
    Ok(ws)
}

/// Lazily computed value shared by several checks.
struct Shared<T> {
    cell: OnceLock<std::result::Result<T, Error>>,
    make: Box<dyn Fn() -> Result<T> + Send + Sync>,
}

impl<T> Shared<T> {
    fn new(make: impl Fn() -> Result<T> + Send + Sync + 'static) -> Arc<Self> {
        Arc::new(Shared { cell: OnceLock::new(), make: Box::new(make) })
    }

    fn get(&self) -> Result<&T> {
        self.cell.get_or_init(|| (self.make)()).as_ref().map_err(Clone::clone)
    }
}

// ---------------------------------------------------------------------------
// triplet W(p)

struct Triplet {
    p: i64,
    case: Case,
    g: TripletGenerators,
    d: Deformation,
    /// `𝒱_1`, the module carrying the Jordan blocks.
    es: ExtendedSector,
    cutoff: Q64,
}

impl Triplet {
    fn closure(&self, gen: Q64, stop: Option<&FockElement>) -> Result<SubmoduleSpan> {
        self.closure_of(&pt(gen), stop)
    }

    fn closure_of(&self, v: &FockElement, stop: Option<&FockElement>) -> Result<SubmoduleSpan> {
        let alphabet = triplet_alphabet(&self.case, self.es, true)?;
        generate_submodule(&self.case, std::slice::from_ref(v), &alphabet, self.cutoff, qi(1), stop)
    }

    fn l0(&self, v: &FockElement) -> Result<FockElement> {
        self.d.virasoro(&self.case, 0, v, Some(&self.es))
    }

    fn shifted_point(&self) -> LatticeVector {
        self.es.base + self.es.shift
    }
}

fn triplet_suite(p: i64, cutoff: i64) -> Result<Registry> {
    let case = Case::triplet(p, 1)?;
    let t = Arc::new(Triplet {
        p,
        g: triplet_generators(&case)?,
        d: Deformation::standard(&case),
        es: twisted_sector(&case),
        cutoff: qi(cutoff),
        case,
    });
    let mut r = Registry::new("triplet", cutoff);
    let gen_w = qi(2 * p - 1);
    let small = qi(cutoff.min(4));
    let top_w = q(2 - p, 4);

    let x = t.clone();
    r.add("graded-dimensions", "graded-dimensions", "graded dimensions of four lattice sectors agree with their characters", qi(0), move || {
        let sectors: Vec<_> = [q(0, 1), q(1, 2), q(1, 2) - q(1, x.p), q(-1, x.p)].into_iter().map(|c| (LatticeVector::rank1(c), None)).collect();
        dims_check(&x.case, &sectors, x.cutoff)
    });

    let x = t.clone();
    r.add("screenings-commute", "screenings-commute", "[Q, Q̃] vanishes on V_L up to the cutoff", qi(0), move || {
        screening_check(&x.case, &[(LatticeVector::ZERO, None)], x.cutoff)
    });

    let x = t.clone();
    r.add("virasoro", "virasoro-closure", "L(n) close the Virasoro algebra with c = 1 − 6(p−1)²/p", qi(0), move || {
        let states = elements(x.case.basis_upto(&LatticeVector::ZERO, small, None)?);
        let c = rint(1) - rat(6 * (x.p - 1) * (x.p - 1), x.p);
        if x.case.central_charge != c {
            return Ok((false, json!({ "central_charge": r_json(&x.case.central_charge), "expected": r_json(&c) })));
        }
        virasoro_check(&states, &c, |n, w| x.case.virasoro(n, w))
    });

    let x = t.clone();
    r.add("generators-in-kernel", "triplet-generators", "ω, F, H = QF, E = Q²F lie in Ker Q̃ with the expected weights", gen_w, move || {
        let c = &x.case;
        let mut ok = c.screening(&x.g.f, None)? == x.g.h && c.screening(&x.g.h, None)? == x.g.e;
        ok &= c.screening(&x.g.e, None)?.is_zero();
        for v in [&x.g.omega, &x.g.f, &x.g.h, &x.g.e] {
            ok &= c.screening_tilde(v, None)?.is_zero();
        }
        ok &= c.screening(&x.g.omega, None)?.is_zero();
        let weights: Vec<Value> = [&x.g.f, &x.g.h, &x.g.e].iter().map(|v| json!(c.homogeneous_weight(v).map(fmt_q))).collect();
        ok &= [&x.g.f, &x.g.h, &x.g.e].iter().all(|v| c.homogeneous_weight(v) == Some(gen_w));
        Ok((ok, json!({ "weights_f_h_e": weights, "h": el_json(&x.g.h), "e": el_json(&x.g.e) })))
    });

    let x = t.clone();
    r.add("jordan-block-top", "jordan-block-top", "L̃(0) on the top of W(p)·e^{α/2} is one 2×2 block at (2−p)/4", gen_w, move || {
        let gen = pt(q(1, 2));
        let alphabet = triplet_alphabet(&x.case, x.es, true)?;
        let span = generate_submodule(&x.case, &[gen.clone()], &alphabet, top_w, qi(1), None)?;
        let comp = span.component(top_w);
        let rep = jordan_structure(top_w, &comp, |v| x.l0(v))?;
        let image = x.l0(&gen)?;
        let nil = x.case.screening_tilde(&gen, Some(&x.es))?;
        let ok = comp.dim() == 2
            && rep.blocks.len() == 1
            && rep.blocks[0].blocks == vec![2]
            && rep.blocks[0].eigenvalue == big(top_w)
            && image == gen.scaled(&big(top_w)) + nil.clone()
            && x.l0(&nil)? == nil.scaled(&big(top_w));
        Ok((ok, json!({ "weight": fmt_q(top_w), "dim": comp.dim(), "jordan": rep.to_json(), "l0_generator": el_json(&image), "q_tilde_generator": el_json(&nil) })))
    });

    let x = t.clone();
    r.add(
        "screening-intertwines-deformed-modes",
        "deformed-modes-commutator",
        "[G, ã_n] = (Qa)~_n on 𝒱₁ for a ∈ {F, ω}, 0 ≤ n ≤ 2p−1",
        gen_w,
        move || {
            let (c, es) = (&x.case, Some(&x.es));
            let states = sector_states(c, &x.es, small)?;
            let mut checked = 0usize;
            for (name, a) in [("F", &x.g.f), ("omega", &x.g.omega)] {
                let qa = c.screening(a, None)?;
                for n in 0..=(2 * x.p - 1) {
                    for w in &states {
                        let lhs = screening::g_apply(c, &x.d.deformed_mode(c, a, qi(n), w, es)?, es)?
                            - x.d.deformed_mode(c, a, qi(n), &screening::g_apply(c, w, es)?, es)?;
                        let rhs = if qa.is_zero() { FockElement::zero() } else { x.d.deformed_mode(c, &qa, qi(n), w, es)? };
                        checked += 1;
                        if lhs != rhs {
                            return Ok((false, json!({ "a": name, "n": n, "state": el_json(w), "difference": el_json(&(lhs - rhs)) })));
                        }
                    }
                }
            }
            Ok((true, json!({ "checked": checked, "states": states.len(), "max_weight": fmt_q(small) })))
        },
    );

    let x = t.clone();
    r.add("deformed-constants", "deformed-constants", "H̃(0), Ẽ(p−1) and G² on e^{−α/2}", gen_w, move || {
        let (c, es) = (&x.case, Some(&x.es));
        let w = pt(q(-1, 2));
        let h0 = screening::shifted_generator(c, &x.g.h, 0, &w, es)?;
        let expected = -binomial_int(3 * x.p - 2, 2 * x.p - 1);
        let ch = multiple_of(&h0, &w);
        let e = screening::shifted_generator(c, &x.g.e, x.p - 1, &w, es)?;
        let ce = multiple_of(&e, &pt(q(1, 2) - q(1, x.p)));
        let g2 = screening::g_apply(c, &screening::g_apply(c, &w, es)?, es)?;
        let cg = multiple_of(&g2, &pt(q(3, 2) - q(1, x.p)));
        let ok = ch.as_ref() == Some(&expected) && ce.is_some() && cg.is_some();
        Ok((
            ok,
            json!({
                "h_tilde_0": ch.as_ref().map(r_json),
                "h_tilde_0_expected": r_json(&expected),
                "e_tilde_p_minus_1": ce.as_ref().map(r_json),
                "g_squared": cg.as_ref().map(r_json),
                "images": [el_json(&h0), el_json(&e), el_json(&g2)],
            }),
        ))
    });

    let x = t.clone();
    r.add("modules-differ", "deformed-constants", "F̃_{3p−3} maps e^{3α/2−α/p} onto e^{α/2−α/p} and kills e^{−α/2}", gen_w, move || {
        let (c, es) = (&x.case, Some(&x.es));
        let n = qi(3 * x.p - 3);
        let a = x.d.deformed_mode(c, &x.g.f, n, &pt(q(3, 2) - q(1, x.p)), es)?;
        let b = x.d.deformed_mode(c, &x.g.f, n, &pt(q(-1, 2)), es)?;
        let ca = multiple_of(&a, &pt(q(1, 2) - q(1, x.p)));
        Ok((ca.is_some() && b.is_zero(), json!({ "constant": ca.as_ref().map(r_json), "on_e^{-alpha/2}": el_json(&b) })))
    });

    // filtration of 𝒫⁺: ℳ₁ = W·e^{−α/2}, 𝒩₂ = W·e^{α/2−α/p}
    let m1 = {
        let x = t.clone();
        Shared::new(move || x.closure(q(-1, 2), None))
    };
    let n2 = {
        let x = t.clone();
        Shared::new(move || x.closure(q(1, 2) - q(1, x.p), None))
    };
    let pplus = {
        let x = t.clone();
        Shared::new(move || x.closure(q(1, 2), None))
    };

    let (x, a, b) = (t.clone(), m1.clone(), n2.clone());
    r.add("filtration-intersection", "filtration", "V_{L+α/2−α/p} ∩ ℳ₁ = 𝒩₂ weight by weight", gen_w, move || {
        let (m1, n2) = (a.get()?, b.get()?);
        let mut rows = Vec::new();
        let mut ok = true;
        for w in x.case.weights_upto(&x.shifted_point(), x.cutoff, None)? {
            let vs = basis_span(&x.case.graded_basis(&x.shifted_point(), w, None)?);
            let nc = n2.component(w);
            let meet = m1.component(w).intersection_dim(&vs);
            let inside = nc.basis().all(|v| vs.contains(v) && m1.component(w).contains(v));
            ok &= meet == nc.dim() && inside;
            rows.push(json!([fmt_q(w), meet, nc.dim()]));
        }
        Ok((ok, json!({ "rows_weight_meet_n2": rows })))
    });

    let (x, a, b) = (t.clone(), m1.clone(), n2.clone());
    let mid = q(3 * p - 2, 4);
    r.add(
        "filtration-middle-top",
        "filtration",
        "𝒩₁/𝒩₂ starts at (3p−2)/4 with top top(ℳ₁/𝒩₂) ⊕ top(V_{L+α/2−α/p}/𝒩₂), two 2-dimensional pieces",
        gen_w.max(mid),
        move || {
            let (m1, n2) = (a.get()?, b.get()?);
            let mut ws: Vec<Q64> = m1.components.keys().copied().filter(|w| *w <= x.cutoff).collect();
            ws.extend(x.case.weights_upto(&x.shifted_point(), x.cutoff, None)?);
            ws.sort();
            ws.dedup();
            let mut rows = Vec::new();
            let mut first = None;
            let mut parts = (0, 0, 0);
            for w in ws {
                let vs = basis_span(&x.case.graded_basis(&x.shifted_point(), w, None)?);
                let m = m1.component(w);
                let quot = m.sum(&vs).dim() - n2.dim(w);
                if quot > 0 && first.is_none() {
                    first = Some(w);
                    parts = (quot, m.dim() - n2.dim(w), vs.dim() - n2.dim(w));
                }
                rows.push(json!([fmt_q(w), quot]));
            }
            let ok = first == Some(mid) && parts == (4, 2, 2);
            Ok((
                ok,
                json!({
                    "lowest_weight": first.map(fmt_q),
                    "top_dim": parts.0,
                    "top_from_m1": parts.1,
                    "top_from_shifted_sector": parts.2,
                    "quotient_dims": rows,
                }),
            ))
        },
    );

    let (x, a) = (t.clone(), pplus.clone());
    r.add("socle-probe", "filtration", "every low-weight vector of 𝒫⁺ generates a module containing e^{α/2−α/p}", gen_w, move || {
        let pplus = a.get()?;
        let target = pt(q(1, 2) - q(1, x.p));
        let mut probes = Vec::new();
        for (w, s) in &pplus.components {
            if *w > qi(2).min(x.cutoff) {
                continue;
            }
            let rows: Vec<FockElement> = s.basis().cloned().collect();
            let sum = rows.iter().fold(FockElement::zero(), |acc, v| acc + v.clone());
            probes.extend(rows);
            if !sum.is_zero() {
                probes.push(sum);
            }
        }
        for v in &probes {
            let span = x.closure_of(v, Some(&target))?;
            if !span.contains(&x.case, &target) {
                return Ok((false, json!({ "vector": el_json(v), "probes": probes.len() })));
            }
        }
        Ok((true, json!({ "probes": probes.len(), "target": el_json(&target) })))
    });

    if p == 2 {
        let (x, a) = (t.clone(), pplus.clone());
        r.add("p-plus-is-the-module", "filtration", "for p = 2, W·e^{α/2} fills 𝒱₁ up to the cutoff", gen_w, move || {
            let pplus = a.get()?;
            let mut ok = true;
            let mut rows = Vec::new();
            for w in sector_weights(&x.case, &x.es, x.cutoff)? {
                let full = x.case.extended_basis(&x.es, w, None)?.len();
                ok &= pplus.dim(w) == full;
                rows.push(json!([fmt_q(w), pplus.dim(w), full]));
            }
            Ok((ok, json!({ "rows_weight_closure_module": rows })))
        });
    }

    let x = t.clone();
    r.add("p-minus-blocks", "p-minus-structure", "on 𝒱̃, L̃(0) is semisimple at weight 0 and has a 2-block at weight 1", gen_w, move || {
        let alg = x.case.algebra_sector();
        let mut reps = Vec::new();
        for w in [qi(0), qi(1)] {
            let basis = x.case.extended_basis(&alg, w, None)?;
            reps.push(jordan_structure(w, &basis_span(&basis), |v| x.d.virasoro(&x.case, 0, v, Some(&alg)))?);
        }
        let ok = reps[0].is_semisimple() && reps[1].max_block() == 2;
        Ok((ok, json!({ "weight_0": reps[0].to_json(), "weight_1": reps[1].to_json() })))
    });

    let x = t.clone();
    r.add(
        "p-minus-twist",
        "p-minus-structure",
        "L(0) twisted by Δ(α(0)/2, x) on 𝒱̃ has the graded dimensions of 𝒱₁ (the deformation only adds a nilpotent part)",
        gen_w,
        move || twist_check(&x),
    );

    let x = t.clone();
    r.add("dichotomy", "v0-non-semisimple", "on 𝒱₁, L̃(0) is non-semisimple on a weight space exactly when Q̃ is nonzero there", gen_w, move || {
        let mut rows = Vec::new();
        let mut ok = true;
        for w in sector_weights(&x.case, &x.es, small)? {
            let basis = x.case.extended_basis(&x.es, w, None)?;
            let mut nonzero = false;
            for b in &basis {
                nonzero |= !x.case.screening_tilde(&FockElement::basis(b.clone()), Some(&x.es))?.is_zero();
            }
            let rep = jordan_structure(w, &basis_span(&basis), |v| x.l0(v))?;
            ok &= nonzero == !rep.is_semisimple();
            rows.push(json!([fmt_q(w), nonzero, rep.max_block()]));
        }
        Ok((ok, json!({ "rows_weight_qtilde_nonzero_max_block": rows })))
    });
    Ok(r)
}

/// Generalized eigenvalues of `L′(0)`, the weight-two mode of
/// `Y(Δ(α/2, x)ω, x)`, on a basis of `𝒱̃`, compared with the graded
/// dimensions of `𝒱₁`.
fn twist_check(x: &Triplet) -> Result<(bool, Value)> {
    let c = &x.case;
    let h = LatticeVector::rank1(q(1, 2));
    let field = cartan_shifted_field(c, &h, &c.omega)?;
    let alg = c.algebra_sector();
    let span = 4 * (x.cutoff.to_integer() + 4);
    let mut counted: BTreeMap<Q64, usize> = BTreeMap::new();
    for rep in [alg.base, alg.base + alg.shift] {
        for k in -span..=span {
            let l = LatticeVector::rank1(rep.coeffs()[0] + qi(k));
            let top = field.mode(c, qi(1), &FockElement::exp(l), Some(&alg))?;
            let Some(w0) = eigen_of(&top, &FockElement::exp(l)) else {
                return Ok((false, json!({ "non_diagonal_on": fmt_q(l.coeffs()[0]), "image": el_json(&top) })));
            };
            let w0 = crate::rational::small(&w0);
            if w0 > x.cutoff {
                continue;
            }
            let mut deg = qi(0);
            while w0 + deg <= x.cutoff {
                for (bos, fer) in oscillators(c.cfg.rank, deg, false) {
                    let b = FockElement::basis(FockBasisVector::new(bos, l, fer));
                    let img = field.mode(c, qi(1), &b, Some(&alg))?;
                    match eigen_of(&img, &b) {
                        Some(e) => *counted.entry(crate::rational::small(&e)).or_insert(0) += 1,
                        None => return Ok((false, json!({ "non_diagonal_on": el_json(&b), "image": el_json(&img) }))),
                    }
                }
                deg += qi(1);
            }
        }
    }
    let mut module = BTreeMap::new();
    for w in sector_weights(c, &x.es, x.cutoff)? {
        module.insert(w, c.extended_basis(&x.es, w, None)?.len());
    }
    counted.retain(|w, _| *w <= x.cutoff);
    Ok((counted == module, json!({ "twisted": dims_json(&counted), "module": dims_json(&module) })))
}

// ---------------------------------------------------------------------------
// W(p, p′)

fn wpp_suite((p, pp): (i64, i64), cutoff: i64) -> Result<Registry> {
    let case = Arc::new(Case::triplet(p, pp)?);
    let mut r = Registry::new("wpp", cutoff);
    let cut = qi(cutoff);
    let small = qi(cutoff.min(4));

    let c = case.clone();
    r.add("graded-dimensions", "graded-dimensions", "graded dimensions of V_L, V_{L−α/p}, V_{L+α/p′} agree with their characters", qi(0), move || {
        let sectors: Vec<_> = [qi(0), q(-1, p), q(1, pp)].into_iter().map(|x| (LatticeVector::rank1(x), None)).collect();
        dims_check(&c, &sectors, cut)
    });

    let c = case.clone();
    r.add("screenings-commute", "screenings-commute", "[Q, Q̃] vanishes on V_L up to the cutoff", qi(0), move || {
        screening_check(&c, &[(LatticeVector::ZERO, None)], cut)
    });

    let c = case.clone();
    r.add("virasoro", "virasoro-closure", "L(n) close the Virasoro algebra with c = 1 − 6(p−p′)²/pp′", qi(0), move || {
        let expected = rint(1) - rat(6 * (p - pp) * (p - pp), p * pp);
        if c.central_charge != expected {
            return Ok((false, json!({ "central_charge": r_json(&c.central_charge), "expected": r_json(&expected) })));
        }
        let states = elements(c.basis_upto(&LatticeVector::ZERO, small, None)?);
        virasoro_check(&states, &expected, |n, w| c.virasoro(n, w))
    });

    let c = case.clone();
    r.add("double-kernel", "screening-kernels", "the vacuum and ω lie in Ker Q ∩ Ker Q̃; dimensions of the double kernel", qi(2), move || {
        let mut ok = true;
        for v in [FockElement::vacuum(), c.omega.clone()] {
            ok &= c.screening(&v, None)?.is_zero() && c.screening_tilde(&v, None)?.is_zero();
        }
        let mut rows = Vec::new();
        for w in c.weights_upto(&LatticeVector::ZERO, small, None)? {
            let ker = screening::double_kernel(&c, w)?;
            if w == qi(2) {
                let mut span = crate::linalg::SparseSpan::new();
                for k in &ker {
                    span.insert(k);
                }
                ok &= span.contains(&c.omega);
            }
            rows.push(json!([fmt_q(w), ker.len()]));
        }
        Ok((ok, json!({ "dims": rows })))
    });
    Ok(r)
}

// ---------------------------------------------------------------------------
// N = 1 super case

fn super_suite((p, pp): (i64, i64), cutoff: i64) -> Result<Registry> {
    let ns = Arc::new(NsRealization::new(p, pp)?);
    let mut r = Registry::new("super", cutoff);
    let cut = qi(cutoff);
    let low = qi(cutoff.min(3));
    let scan_to = qi(cutoff.min(4));
    let rs: Vec<Q64> = SAMPLE_R.iter().map(|(a, b)| q(*a, *b)).collect();
    let ms: Vec<i64> = (-2..=2).collect();

    let x = ns.clone();
    r.add("graded-dimensions", "graded-dimensions", "graded dimensions of V_L ⊗ F and V_{L−α/p} ⊗ F agree with their characters", qi(0), move || {
        let sectors: Vec<_> = [qi(0), q(-1, p)].into_iter().map(|c| (LatticeVector::rank1(c), None)).collect();
        dims_check(&x.case, &sectors, cut)
    });

    let (x, rs1, ms1) = (ns.clone(), rs.clone(), ms.clone());
    r.add("ns-brackets", "ns-closure", "G′(r), L(m) close the Neveu-Schwarz algebra (brackets scaled by pp′)", qi(0), move || {
        let c = x.central_charge().clone();
        if c != ns_central_charge(p, pp) {
            return Ok((false, json!({ "central_charge": r_json(&c), "expected": r_json(&ns_central_charge(p, pp)) })));
        }
        let states = x.basis(low)?;
        for w in &states {
            if let Some((rel, diff)) = x.bracket_check(w, &rs1, &ms1)? {
                return Ok((false, json!({ "relation": rel, "state": el_json(w), "difference": el_json(&diff) })));
            }
        }
        Ok((true, json!({ "central_charge": r_json(&c), "states": states.len(), "max_weight": fmt_q(low) })))
    });

    let x = ns.clone();
    r.add("screenings-commute", "screenings-commute", "[Q, Q̃] vanishes on V_L ⊗ F up to the cutoff", qi(0), move || {
        screening_check(&x.case, &[(LatticeVector::ZERO, None)], cut)
    });

    let x = ns.clone();
    r.add("screening-kernels", "screening-kernels", "Q and Q̃ annihilate τ′ and ω", qi(2), move || {
        let mut rows = Vec::new();
        let mut ok = true;
        for (name, v) in [("tau", &x.tau), ("omega", &x.case.omega)] {
            for tilde in [false, true] {
                let img = x.screening(tilde, v)?;
                ok &= img.is_zero();
                rows.push(json!({ "vector": name, "tilde": tilde, "image": el_json(&img) }));
            }
        }
        Ok((ok, json!({ "images": rows })))
    });

    let (x, rs1, ms1) = (ns.clone(), rs, ms);
    r.add("screenings-commute-with-ns", "screening-kernels", "Q and Q̃ commute with G′(r) and L(m) on low states", qi(0), move || {
        let states = x.basis(low)?;
        for w in &states {
            if let Some((rel, diff)) = x.screening_commutes(w, &rs1, &ms1)? {
                return Ok((false, json!({ "relation": rel, "state": el_json(w), "difference": el_json(&diff) })));
            }
        }
        Ok((true, json!({ "states": states.len() })))
    });

    let x = ns.clone();
    r.add("logarithmic-deformation", "logarithmic-deformation", "L̃(0) = L(0) + v₀ on the sector {0, −α/p} has a 2-block; L(0) has none", qi(0), move || {
        let d = Deformation::standard(&x.case);
        let es = x.sector();
        let ws = x.basis(low.min(qi(2)))?;
        if let Some(why) = d.validate(&x.case, &ws, &[-2, -1, 0, 1, 2], Some(&es))? {
            return Ok((false, json!({ "invalid_deformation": why })));
        }
        let scan = x.deformation_scan(scan_to, true)?;
        let plain = x.deformation_scan(scan_to, false)?;
        let ok = scan.first_block().is_some_and(|j| j.max_block() == 2) && scan.v0_square_zero && plain.first_block().is_none();
        Ok((ok, json!({ "deformed": scan.to_json(), "undeformed_has_blocks": plain.first_block().is_some() })))
    });
    Ok(r)
}

// ---------------------------------------------------------------------------
// affine sl2 at level −4/3

const ALGEBRA_CHARGES: [i64; 3] = [-3, 0, 3];

fn affine_suite(cutoff: i64) -> Registry {
    let a = Arc::new(AffineRealization::new());
    let mut r = Registry::new("affine", cutoff);
    let cut = qi(cutoff);
    let small = qi(cutoff.min(4));
    let brackets_to = qi(cutoff.min(3));
    let lv = |x: i64, y: i64| LatticeVector::new(qi(x), qi(y));

    let x = a.clone();
    r.add("graded-dimensions", "graded-dimensions", "graded dimensions of four charge-restricted sectors agree with their characters", qi(0), move || {
        let mut sectors = Vec::new();
        for ch in ALGEBRA_CHARGES {
            sectors.push((lv(0, 0), Some(ch)));
            sectors.push((lv(2, 0), Some(ch)));
        }
        for ch in DEFAULT_CHARGES {
            sectors.push((lv(-3, 1), Some(ch)));
            sectors.push((lv(-1, 1), Some(ch)));
        }
        dims_check(&x.case, &sectors, cut)
    });

    let x = a.clone();
    r.add("screenings-commute", "screenings-commute", "[Q, Q̃] vanishes on V_D (charges −3, 0, 3) up to the cutoff", qi(0), move || {
        let sectors: Vec<_> = ALGEBRA_CHARGES.iter().map(|c| (LatticeVector::ZERO, Some(*c))).collect();
        screening_check(&x.case, &sectors, cut)
    });

    let x = a.clone();
    r.add("virasoro", "virasoro-closure", "L(n) close the Virasoro algebra with c = −6 on V_D", qi(0), move || {
        let mut states = Vec::new();
        for ch in ALGEBRA_CHARGES {
            states.extend(elements(x.case.basis_upto(&LatticeVector::ZERO, small, Some(qi(ch)))?));
        }
        if x.case.central_charge != rint(-6) {
            return Ok((false, json!({ "central_charge": r_json(&x.case.central_charge) })));
        }
        virasoro_check(&states, &rint(-6), |n, w| x.case.virasoro(n, w))
    });

    let x = a.clone();
    r.add("currents", "affine-currents", "e, h, f have weight one, lie in Ker Q̃, f comes from the screening, level −4/3", qi(1), move || {
        let mut ok = true;
        for name in affine::CURRENTS {
            let v = x.current(name).expect("current exists");
            ok &= x.case.homogeneous_weight(v) == Some(qi(1)) && x.case.screening_tilde(v, None)?.is_zero();
        }
        ok &= x.f_from_screening()? == x.f;
        let vac = FockElement::vacuum();
        let hh = x.mode("h", 1, &x.mode("h", -1, &vac, false, None)?, false, None)?;
        ok &= x.level == rat(-4, 3) && hh == vac.scaled(&(rint(2) * &x.level));
        Ok((ok, json!({ "level": r_json(&x.level), "e": el_json(&x.e), "h": el_json(&x.h), "f": el_json(&x.f) })))
    });

    let x = a.clone();
    r.add("deformed-currents", "affine-currents", "ẽ = e and h̃ = h; f̃ has two correction terms", qi(1), move || {
        let (e, h, f) = (x.field("e", true)?, x.field("h", true)?, x.field("f", true)?);
        let ok = e.is_plain() && h.is_plain() && f.parts.len() == 3;
        Ok((ok, json!({ "f_tilde": affine::field_to_json(&f) })))
    });

    let x = a.clone();
    r.add("brackets", "affine-brackets", "ŝl₂ brackets at level −4/3 on V_D, on 𝒱̃ and on ℳ̃ (m, n ∈ [−1, 1])", qi(1), move || {
        let mut rows = Vec::new();
        for (name, es, deformed, charges) in [
            ("V_D", x.algebra, false, &ALGEBRA_CHARGES[..]),
            ("deformed_algebra", x.algebra, true, &ALGEBRA_CHARGES[..]),
            ("deformed_module", x.module, true, &DEFAULT_CHARGES[..]),
        ] {
            let basis = x.basis(&es, brackets_to, charges)?;
            let mut table = affine::ModeTable::new(&x, deformed, Some(&es), -2)?;
            for b in &basis {
                let w = FockElement::basis(b.clone());
                for m in -1..=1 {
                    for n in -1..=1 {
                        if let Some((rel, diff)) = table.bracket_check(m, n, &w)? {
                            return Ok((false, json!({ "space": name, "relation": rel, "m": m, "n": n, "state": el_json(&w), "difference": el_json(&diff) })));
                        }
                    }
                }
            }
            rows.push(json!({ "space": name, "states": basis.len() }));
        }
        Ok((true, json!({ "max_weight": fmt_q(brackets_to), "modes": [-1, 1], "spaces": rows })))
    });

    let x = a.clone();
    r.add("highest-weight", "highest-weight-relations", "ẽ(n+1), f̃(n+2) kill e^{−3γ+δ}; ẽ(0) gives ±e^{−2δ}; f̃(1) gives ν e^{−4γ+4δ}", qi(0), move || {
        let m = Some(&x.module);
        let g = FockElement::exp(lv(-3, 1));
        let mut ok = true;
        for n in 0..3 {
            ok &= x.mode("e", n + 1, &g, true, m)?.is_zero() && x.mode("f", n + 2, &g, true, m)?.is_zero();
        }
        let e0 = x.mode("e", 0, &g, true, m)?;
        let sign = multiple_of(&e0, &FockElement::exp(lv(0, -2)));
        ok &= sign.as_ref().is_some_and(|s| *s == rint(1) || *s == rint(-1));
        let nu = x.nu()?;
        ok &= nu.is_some();
        let l0 = x.virasoro(0, &g, true, m)?;
        ok &= l0 == g.scaled(&rat(-1, 3)) + FockElement::exp(lv(-1, 1));
        Ok((
            ok,
            json!({
                "nu": nu.as_ref().map(r_json),
                "e0_sign": sign.as_ref().map(r_json),
                "l0_generator": el_json(&l0),
            }),
        ))
    });

    let probe = {
        let x = a.clone();
        Shared::new(move || affine::rminusthird_probe(&x, cut, &DEFAULT_CHARGES))
    };

    let pr = probe.clone();
    r.add("jordan-block-top", "jordan-block-top", "L̃(0) on the weight −1/3 part of U(ŝl₂)·e^{−3γ+δ} has a 2-block at −1/3", qi(0), move || {
        let p = pr.get()?;
        let ok = p.top.max_block() == 2 && p.top.blocks.iter().all(|j| j.eigenvalue == rat(-1, 3));
        Ok((ok, json!({ "top": p.top.to_json(), "charges": p.charges })))
    });

    let pr = probe.clone();
    r.add("submodule-membership", "extension-structure", "e^{−γ+δ} and e^{−4γ+4δ} lie in U(ŝl₂)·e^{−3γ+δ}", qi(0), move || {
        let p = pr.get()?;
        Ok((p.contains_sub_top && p.contains_lowest, json!({ "r": p.r.to_json() })))
    });

    let pr = probe.clone();
    r.add("quotient-non-logarithmic", "extension-structure", "L̃(0) is semisimple on R/E₁ at every weight up to the cutoff", qi(0), move || {
        let p = pr.get()?;
        let rows: Vec<Value> = p.quotient.iter().map(|j| json!([fmt_q(j.weight), j.dim, j.max_block()])).collect();
        Ok((p.quotient_semisimple(), json!({ "rows_weight_dim_max_block": rows, "e1": p.e1.to_json() })))
    });

    let pr = probe;
    r.add("unbounded-below", "extension-structure", "E₁ = U(ŝl₂)·e^{−4γ+4δ} has vectors below its generator", qi(0), move || {
        let p = pr.get()?;
        let below: Vec<Value> = p.e1_below.iter().map(|w| q_json(*w)).collect();
        Ok((!below.is_empty(), json!({ "weights_below": below })))
    });

    let x = a.clone();
    r.add("intertwiner", "logarithmic-intertwiner", "Ỹ(e^{−γ+δ}, x)e^{−2γ} is nonzero with powers in 1/3 + ℤ", qi(0), move || {
        let s = x.intertwiner(cut)?;
        let ok = !s.is_zero() && s.terms.keys().all(|(e, _)| (*e - q(1, 3)).is_integer());
        Ok((ok, json!({ "terms": s.terms.len(), "has_logs": s.has_logs(), "lowest": s.terms.keys().next().map(|k| fmt_q(k.0)) })))
    });
    r
}

// ---------------------------------------------------------------------------
// Δ_log and logarithmic intertwiners

struct Logint {
    case: Case,
    d: Deformation,
    alg: ExtendedSector,
    es: ExtendedSector,
    g: TripletGenerators,
}

/// Keyed by `(power of y, power of x, power of log x)`.
type DoubleSeries = BTreeMap<(Q64, Q64, u32), FockElement>;

fn add_to(s: &mut DoubleSeries, key: (Q64, Q64, u32), v: &FockElement, c: &Rational) {
    if v.is_zero() || c.is_zero() {
        return;
    }
    let slot = s.entry(key).or_default();
    slot.add_scaled(v, c);
    if slot.is_zero() {
        s.remove(&key);
    }
}

impl Logint {
    /// Lowest power of `y` in `Y(u, y)w`.
    fn lowest_power(&self, u: &FockElement, w: &FockElement) -> Option<Q64> {
        modes::max_mode(&self.case.cfg, u, w).map(|n| -n - qi(1))
    }

    /// `Δ_log(v, x₂)Y(u, y)w` for powers of `y` up to `ymax`.
    fn conjugated_left(&self, u: &FockElement, w: &FockElement, ymax: Q64) -> Result<DoubleSeries> {
        let mut out = DoubleSeries::new();
        for (ey, c) in modes::series_upto(&self.case.cfg, u, w, ymax, Some(&self.es))? {
            for ((ex, l), v) in self.d.delta_log(&self.case, &c, 64, Some(&self.es))?.terms {
                add_to(&mut out, (ey, ex, l), &v, &rint(1));
            }
        }
        Ok(out)
    }

    /// `Y(Δ(v, x₂+y)u, y)Δ_log(v, x₂)w`, with `(x₂+y)^e` expanded in
    /// nonnegative powers of `y`, for powers of `y` up to `ymax`.
    fn conjugated_right(&self, u: &FockElement, w: &FockElement, ymax: Q64) -> Result<DoubleSeries> {
        let mut out = DoubleSeries::new();
        let dl = self.d.delta_log(&self.case, w, 64, Some(&self.es))?;
        let du = self.d.delta(&self.case, u)?;
        for ((a, l), s) in &dl.terms {
            for (e, ce) in &du {
                let mut k = 0i64;
                loop {
                    let coeff = crate::rational::binomial(*e, k as u32);
                    let ser = modes::series_upto(&self.case.cfg, ce, s, ymax - qi(k), Some(&self.es))?;
                    if ser.is_empty() && self.lowest_power(ce, s).is_none_or(|lo| lo > ymax - qi(k)) {
                        break;
                    }
                    for (f, v) in ser {
                        add_to(&mut out, (f + qi(k), *a + *e - qi(k), *l), &v, &coeff);
                    }
                    if e.is_zero() {
                        break;
                    }
                    k += 1;
                }
            }
        }
        Ok(out)
    }

    /// `Ỹ(u, x)w` with powers up to `emax`.
    fn intertwine(&self, u: &FockElement, w: &FockElement, emax: Q64) -> Result<LogSeries> {
        self.d.log_intertwiner(&self.case, u, w, emax, Some(&self.es), None)
    }

    fn lowest_intertwiner_power(&self, u: &FockElement, w: &FockElement) -> Result<Q64> {
        let dl = self.d.delta_log(&self.case, u, 64, Some(&self.es))?;
        Ok(dl.terms.iter().filter_map(|((e, _), c)| self.lowest_power(c, w).map(|lo| *e + lo)).min().unwrap_or(qi(0)))
    }
}

fn double_json(s: &DoubleSeries) -> Value {
    Value::Array(s.iter().map(|((y, x, l), v)| json!({"y_exp": fmt_q(*y), "x_exp": fmt_q(*x), "log_pow": l, "coeff": el_json(v)})).collect())
}

fn logint_suite(p: i64, cutoff: i64) -> Result<Registry> {
    let case = Case::triplet(p, 1)?;
    let t = Arc::new(Logint {
        d: Deformation::standard(&case),
        alg: case.algebra_sector(),
        es: twisted_sector(&case),
        g: triplet_generators(&case)?,
        case,
    });
    let mut r = Registry::new("logint", cutoff);
    let gen_w = qi(2 * p - 1);
    let order = 6i64;
    let depth = qi(4);

    let x = t.clone();
    r.add("key-relation", "log-deformation", "Δ_log(v, x)F = Δ(v, x)F to x-order 6, with no log terms", qi(0), move || {
        let plain = x.d.delta(&x.case, &x.g.f)?;
        let logged = x.d.delta_log(&x.case, &x.g.f, order, Some(&x.alg))?;
        let kept: BTreeMap<Q64, FockElement> = plain.iter().filter(|(e, _)| **e >= qi(-order)).map(|(e, v)| (*e, v.clone())).collect();
        let ok = !logged.has_logs() && LogSeries::from_plain(&kept) == logged;
        Ok((ok, json!({ "order": order, "terms": logged.terms.len(), "delta": LogSeries::from_plain(&kept).to_json() })))
    });

    let x = t.clone();
    r.add(
        "conjugation",
        "log-deformation",
        "Δ_log(v, x₂)Y(F, y)w = Y(Δ(v, x₂+y)F, y)Δ_log(v, x₂)w on low states of 𝒱₁ to y-order 4",
        gen_w,
        move || {
            let states = sector_states(&x.case, &x.es, qi(1))?;
            let mut compared = 0usize;
            let mut logs = 0usize;
            for w in &states {
                let Some(lo) = x.lowest_power(&x.g.f, w) else { continue };
                let ymax = lo + depth;
                let lhs = x.conjugated_left(&x.g.f, w, ymax)?;
                let rhs = x.conjugated_right(&x.g.f, w, ymax)?;
                if lhs != rhs {
                    return Ok((false, json!({ "state": el_json(w), "left": double_json(&lhs), "right": double_json(&rhs) })));
                }
                compared += lhs.len();
                logs += lhs.keys().filter(|k| k.2 > 0).count();
            }
            Ok((true, json!({ "order": fmt_q(depth), "states": states.len(), "coefficients": compared, "log_coefficients": logs })))
        },
    );

    let x = t.clone();
    r.add(
        "derivative",
        "logarithmic-intertwiner",
        "Ỹ(L(−1)u, x)w = d/dx Ỹ(u, x)w for u = e^{α/2} to order 4",
        qi(0),
        move || {
            let u = pt(q(1, 2));
            let lu = x.case.virasoro(-1, &u)?;
            let mut states = elements(x.case.basis_upto(&LatticeVector::ZERO, qi(1), None)?);
            states.push(pt(qi(-1)));
            let mut with_logs = 0usize;
            for w in &states {
                let lo = x.lowest_intertwiner_power(&u, w)?;
                let emax = lo + depth;
                let full = x.intertwine(&u, w, emax)?;
                let rhs = full.derivative().window(lo - qi(1), emax - qi(1));
                let lhs = x.intertwine(&lu, w, emax - qi(1))?;
                if lhs != rhs {
                    return Ok((false, json!({ "state": el_json(w), "left": lhs.to_json(), "right": rhs.to_json() })));
                }
                with_logs += usize::from(full.has_logs());
            }
            Ok((with_logs > 0, json!({ "order": fmt_q(depth), "states": states.len(), "states_with_log_terms": with_logs })))
        },
    );

    let x = t;
    r.add("log-degree", "log-deformation", "Δ_log(v, x)e^{α/2} has log degree one with coefficient Q̃e^{α/2}", qi(0), move || {
        let u = pt(q(1, 2));
        let s = x.d.delta_log(&x.case, &u, order, Some(&x.es))?;
        let qt = x.case.screening_tilde(&u, Some(&x.es))?;
        let ok = s.max_log() == 1 && s.get(qi(0), 1) == qt && !qt.is_zero();
        Ok((ok, json!({ "series": s.to_json() })))
    });
    Ok(r)
}

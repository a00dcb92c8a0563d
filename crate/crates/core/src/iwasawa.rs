//! Tower analytics: spanning-tree counts layer by layer, exact fitting of
//! the invariants (lambda, mu, nu) with `ord_p kappa(X_n) = lambda n +
//! mu p^n + nu` for all large n, stabilized per-vertex ramification limits,
//! and the ramification-corrected lambda identity
//! `lambda~ + 1 = #G (lambda + 1) - sum_v n_v (m_v - 1)`
//! relating the full tower to its `Z_p`-quotient tower. The identity applies
//! when mu of the quotient tower vanishes and every vertex has inertia that
//! is either infinite or trivial; the mu-statements of the two towers are
//! equivalent under that same vertex condition, and both directions are
//! checked.
//!
//! Fitting is exact: a rational 3x3 solve followed by an integrality check,
//! accepted only when the fitted formula reproduces the entire observed
//! tail. Nothing is least-squares and nothing extrapolates.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::graph::Graph;
use crate::groups::{GroupElement, ProfiniteSpec, SubgroupSpec};
use crate::voltage::VoltageGraph;
use crate::{Error, Result};

/// p-adic valuation of a nonzero integer.
pub fn ord_p(x: &BigInt, p: u64) -> u64 {
    assert!(!x.is_zero(), "ord_p of zero");
    let p = BigInt::from(p);
    let mut v = 0;
    let mut x = x.abs();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&x, &p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// The cycle graph on m vertices (a single loop when m = 1).
pub fn cycle_graph(m: usize) -> Graph {
    multi_cycle(m, 1)
}

/// The cycle graph on m vertices with every cycle edge replaced by n
/// parallel unoriented edges. Has m*n unoriented edges and exactly
/// `m * n^(m-1)` spanning trees.
pub fn multi_cycle(m: usize, n: usize) -> Graph {
    assert!(m >= 1 && n >= 1);
    let mut g = Graph::with_vertices(m);
    for i in 0..m {
        for _ in 0..n {
            g.add_edge(i, (i + 1) % m);
        }
    }
    g
}

/// Closed form `m * n^(m-1)` for the spanning-tree count of
/// [`multi_cycle`]`(m, n)`.
pub fn multi_cycle_tree_count(m: usize, n: u64) -> BigInt {
    BigInt::from(m) * BigInt::from(n).pow(m as u32 - 1)
}

/// The three canonical inertia choices on the cycle-graph voltage family:
/// inertia is the finite factor `G`, the line `Z_p`, or the full group
/// `Z_p x G` at every vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InertiaCase {
    FiniteG,
    ZpLine,
    FullGroup,
}

impl InertiaCase {
    pub const ALL: [InertiaCase; 3] = [
        InertiaCase::FiniteG,
        InertiaCase::ZpLine,
        InertiaCase::FullGroup,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            InertiaCase::FiniteG => "inertia=G",
            InertiaCase::ZpLine => "inertia=Zp",
            InertiaCase::FullGroup => "inertia=ZpxG",
        }
    }
}

impl std::fmt::Display for InertiaCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// The canonical voltage family: the m-cycle over `Z_p x Z/p`, with one
/// cycle edge carrying a generator in both coordinates, all other voltages
/// trivial, and the same inertia choice at every vertex.
pub fn canonical_case_voltage(p: u64, m: usize, case: InertiaCase) -> Result<VoltageGraph> {
    if m < 1 {
        return Err(Error::InvalidGraph("cycle needs at least one vertex".into()));
    }
    let spec = ProfiniteSpec::new(p, vec![p])?;
    let mut vg = VoltageGraph::new(cycle_graph(m), spec);
    let generator = GroupElement::new(vg.spec(), BigInt::one(), &[1])?;
    vg.set_voltage(0, generator);
    let inertia = match case {
        InertiaCase::FiniteG => SubgroupSpec::g_factor(vg.spec()),
        InertiaCase::ZpLine => SubgroupSpec::zp_factor(vg.spec()),
        InertiaCase::FullGroup => SubgroupSpec::full(vg.spec()),
    };
    for v in 0..m {
        vg.set_inertia(v, inertia.clone());
    }
    Ok(vg)
}

/// Which tower of a voltage graph to walk: the full `Z_p x G` tower or its
/// quotient-by-G (`Z_p`) tower.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerKind {
    Full,
    Base,
}

/// Per-layer data of a tower: spanning-tree counts and their p-adic
/// valuations, with graph sizes for context.
#[derive(Debug, Clone)]
pub struct TowerReport {
    pub kind: TowerKind,
    pub p: u64,
    pub levels: Vec<u32>,
    pub kappas: Vec<BigInt>,
    pub ordp: Vec<u64>,
    pub vertex_counts: Vec<usize>,
    /// Unoriented edge counts.
    pub edge_counts: Vec<usize>,
    pub connected: Vec<bool>,
}

/// Walks a tower up to level `n_max`, computing kappa exactly at every
/// layer. Errors on the first disconnected layer, naming its level.
pub fn tower_report(vg: &VoltageGraph, kind: TowerKind, n_max: u32) -> Result<TowerReport> {
    let mut report = TowerReport {
        kind,
        p: vg.spec().p(),
        levels: Vec::new(),
        kappas: Vec::new(),
        ordp: Vec::new(),
        vertex_counts: Vec::new(),
        edge_counts: Vec::new(),
        connected: Vec::new(),
    };
    let quotient;
    let source = match kind {
        TowerKind::Full => vg,
        TowerKind::Base => {
            quotient = vg.quotient_by_g();
            &quotient
        }
    };
    for (n, layer) in (0..=n_max).zip(source.layers()) {
        let layer = layer?;
        let components = layer.component_count();
        if components != 1 {
            return Err(Error::DisconnectedLayer { level: n, components });
        }
        let kappa = layer.graph.spanning_tree_count()?;
        report.levels.push(n);
        report.ordp.push(ord_p(&kappa, report.p));
        report.kappas.push(kappa);
        report.vertex_counts.push(layer.graph.num_vertices());
        report.edge_counts.push(layer.graph.num_unoriented_edges());
        report.connected.push(true);
    }
    Ok(report)
}

/// An exact fit `ordp[n] = lambda n + mu p^n + nu` holding for all observed
/// n >= n0. `stabilized` records whether at least two levels beyond the
/// fitting triple confirmed the formula; `residuals` are the deviations at
/// the pre-asymptotic levels n < n0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IwasawaFit {
    pub lambda: u64,
    pub mu: u64,
    pub nu: i64,
    pub n0: u32,
    pub stabilized: bool,
    pub residuals: Vec<i64>,
}

impl TowerReport {
    pub fn fit(&self) -> Result<IwasawaFit> {
        fit_ordp(&self.ordp, self.p)
    }
}

fn det3(m: [[i128; 3]; 3]) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Fits (lambda, mu, nu) to a valuation sequence: solves the 3x3 system on
/// the triple at n0 exactly over the rationals, requires an integral
/// solution with lambda, mu >= 0 reproducing every level from n0 on, and
/// takes the smallest such n0. Errors when even the last triple admits no
/// consistent integral fit.
pub fn fit_ordp(ordp: &[u64], p: u64) -> Result<IwasawaFit> {
    let len = ordp.len();
    if len < 4 {
        return Err(Error::TooFewLevels { got: len, want: 4 });
    }
    let pw = |n: usize| -> Result<i128> {
        (p as i128)
            .checked_pow(n as u32)
            .ok_or_else(|| Error::InvalidGroup(format!("p^{n} overflows the fitter")))
    };
    let predict = |lambda: i128, mu: i128, nu: i128, n: usize| -> Result<i128> {
        Ok(lambda * n as i128 + mu * pw(n)? + nu)
    };
    let solve_and_check = |n0: usize| -> Result<Option<(i128, i128, i128)>> {
        let ns = [n0 as i128, n0 as i128 + 1, n0 as i128 + 2];
        let ps = [pw(n0)?, pw(n0 + 1)?, pw(n0 + 2)?];
        let bs = [
            ordp[n0] as i128,
            ordp[n0 + 1] as i128,
            ordp[n0 + 2] as i128,
        ];
        let a = [
            [ns[0], ps[0], 1],
            [ns[1], ps[1], 1],
            [ns[2], ps[2], 1],
        ];
        let det = det3(a);
        if det == 0 {
            return Ok(None);
        }
        let mut sol = [0i128; 3];
        for (col, s) in sol.iter_mut().enumerate() {
            let mut replaced = a;
            for (r, row) in replaced.iter_mut().enumerate() {
                row[col] = bs[r];
            }
            let num = det3(replaced);
            if num % det != 0 {
                return Ok(None); // non-integral solution
            }
            *s = num / det;
        }
        let (lambda, mu, nu) = (sol[0], sol[1], sol[2]);
        if lambda < 0 || mu < 0 {
            return Ok(None);
        }
        for (n, &v) in ordp.iter().enumerate().skip(n0) {
            if predict(lambda, mu, nu, n)? != v as i128 {
                return Ok(None);
            }
        }
        Ok(Some((lambda, mu, nu)))
    };

    // validity is upward-closed in n0, so scan down and keep the last hit
    let mut accepted: Option<(usize, (i128, i128, i128))> = None;
    for n0 in (0..=len - 3).rev() {
        match solve_and_check(n0)? {
            Some(sol) => accepted = Some((n0, sol)),
            None => break,
        }
    }
    let Some((n0, (lambda, mu, nu))) = accepted else {
        return Err(Error::NotStabilized { n_max: (len - 1) as u32 });
    };
    let residuals = (0..n0)
        .map(|n| Ok((ordp[n] as i128 - predict(lambda, mu, nu, n)?) as i64))
        .collect::<Result<Vec<i64>>>()?;
    Ok(IwasawaFit {
        lambda: lambda as u64,
        mu: mu as u64,
        nu: nu as i64,
        n0: n0 as u32,
        stabilized: len >= n0 + 5,
        residuals,
    })
}

/// Stabilized per-vertex ramification data of the full tower over the base
/// tower: `m_inf` is the limit ramification index of the cross coverings,
/// `n_inf` the limit number of full-tower vertices over the base vertex
/// (`None` = grows without bound). `in_star` records the vertex condition of
/// the lambda identity: inertia either infinite or trivial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexLimits {
    pub vertex: usize,
    pub m_inf: u64,
    pub n_inf: Option<u64>,
    pub i_infinite: bool,
    pub i_trivial: bool,
    pub in_star: bool,
    pub certified_level: u32,
}

/// Per-vertex limits, certified structurally and cross-validated against
/// the stabilizer orders actually observed on a derived layer at the
/// certified level.
pub fn limit_ramification(vg: &VoltageGraph) -> Result<Vec<VertexLimits>> {
    let spec = vg.spec();
    let mut out = Vec::with_capacity(vg.base().num_vertices());
    let mut cross_level = 0u32;
    for v in 0..vg.base().num_vertices() {
        let lq = vg.inertia(v).limit_quantities(spec)?;
        cross_level = cross_level.max(lq.certified_level);
        out.push(VertexLimits {
            vertex: v,
            m_inf: lq.m_inf,
            n_inf: lq.n_inf,
            i_infinite: lq.i_infinite,
            i_trivial: lq.i_trivial,
            in_star: lq.i_infinite || lq.i_trivial,
            certified_level: lq.certified_level,
        });
    }
    // cross-validate m_inf against the ramification the cross covering
    // actually has at the certified level
    let cov = vg.cross_covering(cross_level)?;
    let ram = cov
        .validate()
        .map_err(|v| Error::InvalidCovering(v.to_string()))?;
    let derived = vg.derive(cross_level)?;
    for w in 0..derived.graph.num_vertices() {
        let (v, _) = derived.vertex_label(w);
        if ram.indices[w] != out[v].m_inf {
            return Err(Error::CoveringInconsistent(format!(
                "stabilized ramification limit {} at vertex {v} disagrees with \
                 the derived-layer stabilizer {}",
                out[v].m_inf, ram.indices[w]
            )));
        }
    }
    Ok(out)
}

/// The per-vertex correction term `n_v (m_v - 1)` of the lambda identity.
/// When `n_v` is infinite and `m_v = 1` the term is 0 by convention; when
/// `n_v` is infinite and `m_v > 1` the vertex condition fails and the term
/// (with the whole identity) is not applicable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionTerm {
    pub vertex: usize,
    pub n_v: Option<u64>,
    pub m_v: u64,
    pub term: Option<i64>,
}

/// Outcome of the identity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Everything the theory predicts was confirmed on stabilized fits.
    Pass,
    /// Fits did not stabilize by n_max; nothing is extrapolated.
    Inconclusive(String),
    /// A stabilized fit contradicts the predicted identity or the
    /// mu-equivalence. This must never be silently passed.
    TheoremViolation(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Inconclusive(why) => write!(f, "inconclusive: {why}"),
            Verdict::TheoremViolation(why) => write!(f, "THEOREM VIOLATION: {why}"),
        }
    }
}

/// Both sides of the lambda identity with all supporting data.
#[derive(Debug, Clone)]
pub struct KidaReport {
    pub base_fit: IwasawaFit,
    pub tilde_fit: IwasawaFit,
    pub limits: Vec<VertexLimits>,
    pub star_holds: bool,
    /// Degree of the full tower over the base tower (#G).
    pub degree: u64,
    pub corrections: Vec<CorrectionTerm>,
    pub mu_equivalence_ok: bool,
    /// lambda~ + 1.
    pub lhs: i64,
    /// #G (lambda + 1) - sum of corrections; only when the identity applies.
    pub rhs: Option<i64>,
    pub lambda_identity: Option<bool>,
    pub verdict: Verdict,
}

/// Fits both towers, evaluates the vertex condition and the correction
/// terms, checks the mu-equivalence in both directions, and checks the
/// lambda identity whenever it applies.
pub fn kida_check(vg: &VoltageGraph, n_max: u32) -> Result<KidaReport> {
    let base_fit = tower_report(vg, TowerKind::Base, n_max)?.fit()?;
    let tilde_fit = tower_report(vg, TowerKind::Full, n_max)?.fit()?;
    let limits = limit_ramification(vg)?;
    let star_holds = limits.iter().all(|l| l.in_star);
    let degree = vg.spec().g_order();

    let corrections: Vec<CorrectionTerm> = limits
        .iter()
        .map(|l| {
            let term = match l.n_v() {
                Some(nv) => Some(nv as i64 * (l.m_inf as i64 - 1)),
                None if l.m_inf == 1 => Some(0),
                None => None,
            };
            CorrectionTerm { vertex: l.vertex, n_v: l.n_inf, m_v: l.m_inf, term }
        })
        .collect();

    let mu_equivalence_ok =
        (tilde_fit.mu == 0) == (base_fit.mu == 0 && star_holds);
    let applicable = star_holds && base_fit.mu == 0;
    let lhs = tilde_fit.lambda as i64 + 1;
    let rhs = applicable.then(|| {
        let correction: i64 = corrections.iter().map(|c| c.term.unwrap_or(0)).sum();
        degree as i64 * (base_fit.lambda as i64 + 1) - correction
    });
    let lambda_identity = rhs.map(|r| lhs == r);

    let stabilized = base_fit.stabilized && tilde_fit.stabilized;
    let verdict = if !mu_equivalence_ok {
        let msg = format!(
            "mu-equivalence failed: mu~={} while mu={} and vertex condition {}",
            tilde_fit.mu, base_fit.mu, star_holds
        );
        if stabilized {
            Verdict::TheoremViolation(msg)
        } else {
            Verdict::Inconclusive(msg)
        }
    } else if lambda_identity == Some(false) {
        let msg = format!("lambda identity failed: {lhs} != {}", rhs.unwrap());
        if stabilized {
            Verdict::TheoremViolation(msg)
        } else {
            Verdict::Inconclusive(msg)
        }
    } else if !stabilized {
        Verdict::Inconclusive("fits did not stabilize by n_max".into())
    } else {
        Verdict::Pass
    };

    Ok(KidaReport {
        base_fit,
        tilde_fit,
        limits,
        star_holds,
        degree,
        corrections,
        mu_equivalence_ok,
        lhs,
        rhs,
        lambda_identity,
        verdict,
    })
}

impl VertexLimits {
    fn n_v(&self) -> Option<u64> {
        self.n_inf
    }
}

/// One checked row of the canonical case grid.
#[derive(Debug, Clone)]
pub struct RowCheck {
    pub row: &'static str,
    pub pass: bool,
    pub failures: Vec<CellFailure>,
}

/// A failing cell, with the level it occurred at when applicable.
#[derive(Debug, Clone)]
pub struct CellFailure {
    pub level: Option<u32>,
    pub expected: String,
    pub actual: String,
}

/// All checked rows for one inertia case.
#[derive(Debug, Clone)]
pub struct CaseReport {
    pub case: InertiaCase,
    pub n_max: u32,
    pub rows: Vec<RowCheck>,
}

impl CaseReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// The full grid over the three inertia cases.
#[derive(Debug, Clone)]
pub struct CaseGridReport {
    pub p: u64,
    pub m: usize,
    pub cases: Vec<CaseReport>,
}

impl CaseGridReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(CaseReport::all_pass)
    }

    /// Human-readable description of the first failing cell, if any.
    pub fn first_failure(&self) -> Option<String> {
        for case in &self.cases {
            for row in &case.rows {
                if let Some(cell) = row.failures.first() {
                    return Some(format!(
                        "case {} row '{}' level {:?}: expected {}, got {}",
                        case.case, row.row, cell.level, cell.expected, cell.actual
                    ));
                }
            }
        }
        None
    }
}

struct ClosedForms {
    base_shape: fn(u64, usize, u32) -> (usize, usize),
    base_kappa: fn(u64, usize, u32) -> BigInt,
    base_mu_lambda: fn(u64, usize) -> (u64, u64),
    tilde_shape: fn(u64, usize, u32) -> (usize, usize),
    tilde_kappa: fn(u64, usize, u32) -> BigInt,
    tilde_mu_lambda: fn(u64, usize) -> (u64, u64),
}

fn closed_forms(case: InertiaCase) -> ClosedForms {
    match case {
        // layers: long cycles, then long cycles thickened p-fold
        InertiaCase::FiniteG => ClosedForms {
            base_shape: |p, m, n| {
                let len = m * p.pow(n) as usize;
                (len, len)
            },
            base_kappa: |p, m, n| BigInt::from(m) * BigInt::from(p).pow(n),
            base_mu_lambda: |_, _| (0, 1),
            tilde_shape: |p, m, n| {
                let len = m * p.pow(n) as usize;
                (len, len * p as usize)
            },
            tilde_kappa: |p, m, n| {
                let len = m as u64 * p.pow(n);
                BigInt::from(len) * BigInt::from(p).pow((len - 1) as u32)
            },
            tilde_mu_lambda: |_, m| (m as u64, 1),
        },
        // layers: m-cycle thickened p^n-fold, then (mp)-cycle thickened
        // p^n-fold
        InertiaCase::ZpLine => ClosedForms {
            base_shape: |p, m, n| (m, m * p.pow(n) as usize),
            base_kappa: |p, m, n| BigInt::from(m) * BigInt::from(p).pow(n * (m as u32 - 1)),
            base_mu_lambda: |_, m| (0, m as u64 - 1),
            tilde_shape: |p, m, n| {
                let mp = m * p as usize;
                (mp, mp * p.pow(n) as usize)
            },
            tilde_kappa: |p, m, n| {
                let mp = m as u64 * p;
                BigInt::from(mp) * BigInt::from(p).pow(n * (mp as u32 - 1))
            },
            tilde_mu_lambda: |p, m| (0, p * m as u64 - 1),
        },
        // layers: m-cycle thickened p^n-fold, then p^(n+1)-fold
        InertiaCase::FullGroup => ClosedForms {
            base_shape: |p, m, n| (m, m * p.pow(n) as usize),
            base_kappa: |p, m, n| BigInt::from(m) * BigInt::from(p).pow(n * (m as u32 - 1)),
            base_mu_lambda: |_, m| (0, m as u64 - 1),
            tilde_shape: |p, m, n| (m, m * p.pow(n + 1) as usize),
            tilde_kappa: |p, m, n| {
                BigInt::from(m) * BigInt::from(p).pow((m as u32 - 1) * (n + 1))
            },
            tilde_mu_lambda: |_, m| (0, m as u64 - 1),
        },
    }
}

/// Runs the canonical cycle-graph family for a given (p, m) and compares
/// every layer and both fitted towers against the closed forms, case by
/// case: layer shapes, exact kappa values, and the fitted (mu, lambda) of
/// the base and full towers. The full tower of the finite-inertia case
/// grows doubly exponentially, so its level range is capped at 3 when
/// p > 2.
pub fn canonical_case_grid(p: u64, m: usize, n_max: u32) -> Result<CaseGridReport> {
    if n_max < 3 {
        return Err(Error::TooFewLevels { got: n_max as usize + 1, want: 4 });
    }
    let mut cases = Vec::new();
    for case in InertiaCase::ALL {
        let case_n_max = if case == InertiaCase::FiniteG && p > 2 { n_max.min(3) } else { n_max };
        let vg = canonical_case_voltage(p, m, case)?;
        let forms = closed_forms(case);
        let base = tower_report(&vg, TowerKind::Base, case_n_max)?;
        let tilde = tower_report(&vg, TowerKind::Full, case_n_max)?;
        let base_fit = base.fit()?;
        let tilde_fit = tilde.fit()?;

        let mut rows = Vec::new();
        rows.push(check_shape("base layer shape", &base, |n| (forms.base_shape)(p, m, n)));
        rows.push(check_kappa("base kappa", &base, |n| (forms.base_kappa)(p, m, n)));
        let (mu_e, lambda_e) = (forms.base_mu_lambda)(p, m);
        rows.push(check_value("base mu", mu_e, base_fit.mu, None));
        rows.push(check_value("base lambda", lambda_e, base_fit.lambda, None));
        rows.push(check_shape("full layer shape", &tilde, |n| (forms.tilde_shape)(p, m, n)));
        rows.push(check_kappa("full kappa", &tilde, |n| (forms.tilde_kappa)(p, m, n)));
        let (mu_e, lambda_e) = (forms.tilde_mu_lambda)(p, m);
        rows.push(check_value("full mu", mu_e, tilde_fit.mu, None));
        rows.push(check_value("full lambda", lambda_e, tilde_fit.lambda, None));
        cases.push(CaseReport { case, n_max: case_n_max, rows });
    }
    Ok(CaseGridReport { p, m, cases })
}

fn check_shape(
    row: &'static str,
    report: &TowerReport,
    expect: impl Fn(u32) -> (usize, usize),
) -> RowCheck {
    let mut failures = Vec::new();
    for (i, &n) in report.levels.iter().enumerate() {
        let (ev, ee) = expect(n);
        let (av, ae) = (report.vertex_counts[i], report.edge_counts[i]);
        if (ev, ee) != (av, ae) {
            failures.push(CellFailure {
                level: Some(n),
                expected: format!("|V|={ev} |E|={ee}"),
                actual: format!("|V|={av} |E|={ae}"),
            });
        }
    }
    RowCheck { row, pass: failures.is_empty(), failures }
}

fn check_kappa(
    row: &'static str,
    report: &TowerReport,
    expect: impl Fn(u32) -> BigInt,
) -> RowCheck {
    let mut failures = Vec::new();
    for (i, &n) in report.levels.iter().enumerate() {
        let e = expect(n);
        if report.kappas[i] != e {
            failures.push(CellFailure {
                level: Some(n),
                expected: e.to_string(),
                actual: report.kappas[i].to_string(),
            });
        }
    }
    RowCheck { row, pass: failures.is_empty(), failures }
}

fn check_value(row: &'static str, expected: u64, actual: u64, level: Option<u32>) -> RowCheck {
    let pass = expected == actual;
    let failures = if pass {
        Vec::new()
    } else {
        vec![CellFailure { level, expected: expected.to_string(), actual: actual.to_string() }]
    };
    RowCheck { row, pass, failures }
}

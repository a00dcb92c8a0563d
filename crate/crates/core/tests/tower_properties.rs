//! Cross-module tower invariants: both directions of the mu-equivalence,
//! the lambda identity whenever its hypotheses hold, and the doubly
//! exponential growth of the finite-inertia full tower.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kidagraph_core::graph::Graph;
use kidagraph_core::groups::{GroupElement, ProfiniteSpec, SubgroupSpec};
use kidagraph_core::iwasawa::{
    canonical_case_voltage, kida_check, ord_p, tower_report, InertiaCase, TowerKind, Verdict,
};
use kidagraph_core::voltage::VoltageGraph;
use kidagraph_core::Error;

/// mu-equivalence across the whole canonical family: mu~ = 0 iff mu = 0 and
/// every vertex has infinite-or-trivial inertia; and the lambda identity
/// holds whenever that equivalence lands on the positive side.
#[test]
fn mu_equivalence_on_the_canonical_family() {
    for p in [2u64, 3] {
        for m in 1..=4usize {
            for case in InertiaCase::ALL {
                // the finite-inertia full tower grows doubly exponentially;
                // cap its levels for p = 3
                let n_max = if p == 3 && case == InertiaCase::FiniteG { 3 } else { 4 };
                let vg = canonical_case_voltage(p, m, case).unwrap();
                let report = kida_check(&vg, n_max).unwrap();
                assert!(report.mu_equivalence_ok, "p={p} m={m} {case}");
                match case {
                    InertiaCase::FiniteG => {
                        assert!(!report.star_holds);
                        assert_eq!(report.tilde_fit.mu, m as u64);
                        assert_eq!(report.base_fit.mu, 0);
                    }
                    InertiaCase::ZpLine | InertiaCase::FullGroup => {
                        assert!(report.star_holds);
                        assert_eq!(report.lambda_identity, Some(true), "p={p} m={m} {case}");
                    }
                }
                assert!(
                    !matches!(report.verdict, Verdict::TheoremViolation(_)),
                    "p={p} m={m} {case}: {}",
                    report.verdict
                );
            }
        }
    }
}

/// mu-equivalence on randomized mixed-inertia towers: 25 instances whose
/// layers are connected and whose fits stabilize. Instances are drawn with
/// per-vertex inertia among the four canonical closed subgroups; graphs
/// whose full tower exceeds a size budget are skipped to keep the exact
/// determinants tractable.
#[test]
fn mu_equivalence_on_random_towers() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x70935);
    let mut done = 0;
    let mut attempts = 0;
    while done < 25 {
        attempts += 1;
        assert!(attempts < 4000, "generator starved: only {done} instances accepted");
        let vg = random_mixed_voltage_graph(&mut rng);
        let n_max = if vg.spec().p() == 2 { 4 } else { 3 };
        // reject towers with a disconnected layer or an oversized top layer
        let Ok(top) = vg.derive(n_max) else { continue };
        if top.graph.num_vertices() > 150 || !top.is_connected() {
            continue;
        }
        let report = match kida_check(&vg, n_max) {
            Ok(r) => r,
            // a disconnected base-tower layer or an unstabilized fit: skip
            Err(Error::DisconnectedLayer { .. }) | Err(Error::NotStabilized { .. }) => continue,
            Err(e) => panic!("unexpected error: {e}"),
        };
        assert!(report.mu_equivalence_ok, "instance {done}");
        // the identity must hold whenever its hypotheses do
        if report.star_holds && report.base_fit.mu == 0 {
            assert_ne!(report.lambda_identity, Some(false), "instance {done}");
        }
        assert!(
            !matches!(report.verdict, Verdict::TheoremViolation(_)),
            "instance {done}: {}",
            report.verdict
        );
        done += 1;
    }
}

/// The finite-inertia full tower has ord_p kappa = m p^n + n + const,
/// so the fitted mu is m.
#[test]
fn finite_inertia_tower_growth() {
    let (p, m) = (2u64, 3usize);
    let vg = canonical_case_voltage(p, m, InertiaCase::FiniteG).unwrap();
    let report = tower_report(&vg, TowerKind::Full, 4).unwrap();
    let c = ord_p(&BigInt::from(m), p) as i64 - 1;
    for (i, &n) in report.levels.iter().enumerate() {
        let expect = (m as u64 * p.pow(n)) as i64 + n as i64 + c;
        assert_eq!(report.ordp[i] as i64, expect, "level {n}");
    }
    let fit = report.fit().unwrap();
    assert_eq!(fit.mu, m as u64);
    assert_eq!(fit.lambda, 1);
}

/// Fits reproduce the observed sequence exactly from n0 on (definitional,
/// asserted against the raw reports).
#[test]
fn fits_reproduce_reports_exactly() {
    for case in InertiaCase::ALL {
        let vg = canonical_case_voltage(2, 3, case).unwrap();
        for kind in [TowerKind::Base, TowerKind::Full] {
            let report = tower_report(&vg, kind, 4).unwrap();
            let fit = report.fit().unwrap();
            for (i, &n) in report.levels.iter().enumerate() {
                if n >= fit.n0 {
                    let predict = fit.lambda as i64 * n as i64
                        + fit.mu as i64 * 2i64.pow(n)
                        + fit.nu;
                    assert_eq!(report.ordp[i] as i64, predict);
                }
            }
        }
    }
}

fn random_mixed_voltage_graph(rng: &mut ChaCha8Rng) -> VoltageGraph {
    let p = if rng.gen_bool(0.5) { 2 } else { 3 };
    let spec = ProfiniteSpec::new(p, vec![p]).unwrap();
    let nv = rng.gen_range(1..=4);
    let mut base = Graph::with_vertices(nv);
    let mut edges = Vec::new();
    for v in 1..nv {
        edges.push(base.add_edge(rng.gen_range(0..v), v));
    }
    for _ in 0..rng.gen_range(1..=2) {
        edges.push(base.add_edge(rng.gen_range(0..nv), rng.gen_range(0..nv)));
    }
    let mut vg = VoltageGraph::new(base, spec);
    for e in edges {
        let zp = BigInt::from(rng.gen_range(-1i64..=1));
        let g = [rng.gen_range(0..p as i64)];
        let val = GroupElement::new(vg.spec(), zp, &g).unwrap();
        vg.set_voltage(e, val);
    }
    for v in 0..vg.base().num_vertices() {
        let inertia = match rng.gen_range(0..4u8) {
            0 => SubgroupSpec::trivial(),
            1 => SubgroupSpec::g_factor(vg.spec()),
            2 => SubgroupSpec::zp_factor(vg.spec()),
            _ => SubgroupSpec::full(vg.spec()),
        };
        vg.set_inertia(v, inertia);
    }
    vg
}

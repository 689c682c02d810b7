//! Cross-validation of the two solver routes and the conservation and
//! envelope behavior of desk-scale runs.

use hnls_core::estimates::FieldSampler;
use hnls_core::field::ComplexField;
use hnls_core::functionals::{self, envelope_check, ConservedLedger, EnvelopeKind};
use hnls_core::grid::{Grid, LineGrid, TorusGrid};
use hnls_core::line::{picard_solve_line, torus_fields_at_nodes, CoupledStepper};
use hnls_core::nonlin::Power;
use hnls_core::spectral::sobolev_norm;
use hnls_core::torus::{
    evolve_torus, guaranteed_time_torus, picard_solve_torus, StepperConfig, DEFAULT_C_CAL,
};
use num_complex::Complex64;

fn torus(n: usize) -> Grid {
    Grid::Torus(TorusGrid::new(n).unwrap())
}

fn normalized_h1(f: &ComplexField, target: f64) -> ComplexField {
    let h1 = sobolev_norm(f, 1.0).unwrap();
    f.scale(Complex64::new(target / h1, 0.0))
}

#[test]
fn torus_picard_and_strang_agree_below_half_guaranteed_time() {
    let p = Power::new(3.0).unwrap();
    let sampler = FieldSampler::new(31, torus(64), 2.0, 1.0);
    let w0 = normalized_h1(&sampler.sample(0), 1.0);
    let t_star = guaranteed_time_torus(&w0, &p, DEFAULT_C_CAL).unwrap();
    let horizon = t_star / 2.0;
    let nodes = 65;
    let dt = horizon / (nodes as f64 - 1.0);
    let mut cfg = StepperConfig::new(dt, &p).unwrap();
    cfg.picard_quad_nodes = nodes;

    let sol = picard_solve_torus(&w0, horizon, &cfg, &p).unwrap();
    assert!(sol.diagnostics.converged);
    assert!(sol.diagnostics.iterations <= 30);
    for r in &sol.diagnostics.contraction_ratios {
        assert!(*r <= 0.9, "contraction ratio {r}");
    }

    let traj = evolve_torus(&w0, horizon, &cfg, &p, 1.0).unwrap();
    let mut sup_l2: f64 = 0.0;
    for j in 0..nodes {
        let d = traj.at_full(j).w.sub(&sol.states[j].w).l2_norm();
        sup_l2 = sup_l2.max(d);
    }
    let bound = sol.diagnostics.quad_error_bound.max(1e-6);
    assert!(
        sup_l2 <= bound,
        "sup L2 distance {sup_l2:.3e} exceeds {bound:.3e} \
         (quad bound {:.3e})",
        sol.diagnostics.quad_error_bound
    );
}

#[test]
fn torus_energy_drift_is_second_order_in_dt() {
    let p = Power::new(3.0).unwrap();
    // Band-limited smooth data keeps the refinement ratio clean.
    let w0 = ComplexField::from_fn(torus(64), |x| {
        0.5 * (Complex64::from_polar(0.7, x)
            + Complex64::from_polar(0.4, -2.0 * x + 0.3)
            + Complex64::from_polar(0.2, 3.0 * x + 1.0))
    })
    .unwrap();
    let drift = |dt: f64| {
        let cfg = StepperConfig::new(dt, &p).unwrap();
        let traj = evolve_torus(&w0, 1.0, &cfg, &p, 1.0).unwrap();
        let e0 = traj.series.energy[0];
        traj.series
            .energy
            .iter()
            .map(|e| (e - e0).abs() / e0)
            .fold(0.0, f64::max)
    };
    let d1 = drift(1e-3);
    let d2 = drift(5e-4);
    assert!(d1 < 1e-6, "energy drift {d1:.3e} at dt = 1e-3");
    let ratio = d1 / d2;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "drift ratio {ratio} outside [3.5, 4.5] ({d1:.3e} / {d2:.3e})"
    );
}

#[test]
fn torus_mass_drift_stays_at_roundoff_over_unit_time() {
    let p = Power::new(3.0).unwrap();
    let sampler = FieldSampler::new(17, torus(64), 2.0, 0.7);
    let w0 = sampler.sample(4);
    let cfg = StepperConfig::new(1e-3, &p).unwrap();
    let traj = evolve_torus(&w0, 1.0, &cfg, &p, 1.0).unwrap();
    let m0 = traj.series.mass[0];
    let drift = traj
        .series
        .mass
        .iter()
        .map(|m| (m - m0).abs() / m0)
        .fold(0.0, f64::max);
    assert!(drift < 1e-10, "mass drift {drift:.3e}");
}

#[test]
fn h1_energy_bound_admits_one_constant_per_power() {
    // One fitted constant covers ten random initial data at each p: the
    // suite constant is the max of the per-run minimal constants, and no
    // series crosses the shared envelope.
    for p_val in [3.0, 4.0, 5.0] {
        let p = Power::new(p_val).unwrap();
        let cfg = StepperConfig::new(2e-3, &p).unwrap();
        let sampler = FieldSampler::new(1000 + p_val as u64, torus(64), 2.0, 0.6);
        let mut suite_constant = 0.0f64;
        let mut ledgers = Vec::new();
        for i in 0..10 {
            let w0 = sampler.sample(i);
            let traj = evolve_torus(&w0, 0.5, &cfg, &p, 1.0).unwrap();
            let mut ledger = ConservedLedger::default();
            for j in 0..traj.series.times.len() {
                ledger.times.push(traj.series.times[j]);
                ledger.h1_w.push(traj.series.h1[j]);
                ledger.hs_w.push(traj.series.hs[j]);
                ledger.mass_v.push(0.0);
                ledger.energy_v.push(0.0);
                ledger.energy_w.push(traj.series.energy[j]);
                ledger.mass_w.push(traj.series.mass[j]);
                ledger.hamiltonian_h.push(0.0);
                ledger.remainder_integral.push(0.0);
                ledger.hybrid_mass.push(0.0);
                ledger.h1_v.push(0.0);
            }
            let report = envelope_check(&ledger, EnvelopeKind::EnergyBound { p: p_val }).unwrap();
            assert!(report.no_crossing);
            assert!(report.fitted_constant.is_finite());
            suite_constant = suite_constant.max(report.fitted_constant);
            ledgers.push(ledger);
        }
        assert!(
            suite_constant > 0.0 && suite_constant < 10.0,
            "suite constant {suite_constant} at p = {p_val}"
        );
        // The shared constant dominates every run by construction.
        for ledger in &ledgers {
            let h1_0 = ledger.h1_w[0];
            let bound = suite_constant * (h1_0 + h1_0.powf((p_val + 1.0) / 2.0)) * (1.0 + 1e-9);
            assert!(ledger.h1_w.iter().all(|&x| x <= bound));
        }
    }
}

#[test]
fn hs_exponential_envelope_never_crossed_after_fit() {
    let p = Power::new(3.0).unwrap();
    let cfg = StepperConfig::new(1e-3, &p).unwrap();
    let sampler = FieldSampler::new(77, torus(64), 2.5, 0.8);
    let w0 = sampler.sample(0);
    let traj = evolve_torus(&w0, 1.0, &cfg, &p, 2.0).unwrap();
    let mut ledger = ConservedLedger::default();
    for j in 0..traj.series.times.len() {
        ledger.times.push(traj.series.times[j]);
        ledger.hs_w.push(traj.series.hs[j]);
        ledger.h1_w.push(traj.series.h1[j]);
        ledger.mass_v.push(0.0);
        ledger.energy_v.push(0.0);
        ledger.energy_w.push(0.0);
        ledger.mass_w.push(0.0);
        ledger.hamiltonian_h.push(0.0);
        ledger.remainder_integral.push(0.0);
        ledger.hybrid_mass.push(0.0);
        ledger.h1_v.push(0.0);
    }
    let report = envelope_check(&ledger, EnvelopeKind::HsExponential).unwrap();
    assert!(report.no_crossing, "fitted c = {}", report.fitted_constant);
    assert!(report.fitted_constant >= 0.0 && report.fitted_constant.is_finite());
}

#[test]
fn plane_wave_run_has_constant_norms_and_tiny_exponent() {
    let p = Power::new(3.0).unwrap();
    let cfg = StepperConfig::new(1e-3, &p).unwrap();
    let w0 = ComplexField::from_fn(torus(64), |x| Complex64::from_polar(1.0, 2.0 * x)).unwrap();
    let traj = evolve_torus(&w0, 1.0, &cfg, &p, 2.0).unwrap();
    let mut ledger = ConservedLedger::default();
    for j in 0..traj.series.times.len() {
        ledger.times.push(traj.series.times[j]);
        ledger.hs_w.push(traj.series.hs[j]);
        ledger.h1_w.push(traj.series.h1[j]);
        ledger.mass_v.push(0.0);
        ledger.energy_v.push(0.0);
        ledger.energy_w.push(0.0);
        ledger.mass_w.push(0.0);
        ledger.hamiltonian_h.push(0.0);
        ledger.remainder_integral.push(0.0);
        ledger.hybrid_mass.push(0.0);
        ledger.h1_v.push(0.0);
    }
    let report = envelope_check(&ledger, EnvelopeKind::HsExponential).unwrap();
    assert!(report.no_crossing);
    assert!(
        report.fitted_constant < 1e-6,
        "closed-form run should need no growth: c = {}",
        report.fitted_constant
    );
}

#[test]
fn hybrid_mass_drift_shrinks_at_second_order() {
    let p = Power::new(3.0).unwrap();
    let w0 = ComplexField::from_fn(torus(64), |x| Complex64::from_polar(1.0, x)).unwrap();
    let lg = LineGrid::new(4096, 32).unwrap();
    let v0 = ComplexField::from_fn(Grid::Line(lg), |x| {
        Complex64::new(0.5 * (-x * x / (2.0 * 1.5 * 1.5)).exp(), 0.0)
    })
    .unwrap();

    let drift = |dt: f64| {
        let cfg = StepperConfig::new(dt, &p).unwrap();
        let mut stepper = CoupledStepper::new(v0.clone(), &w0, 0.5, &cfg, &p, 2.0).unwrap();
        let q = |s: &hnls_core::line::HybridState| {
            functionals::hybrid_mass(&s.u, &s.w_line).unwrap()
        };
        let q0 = q(stepper.state());
        assert!(q0.abs() > 0.1, "degenerate hybrid mass {q0}");
        let mut worst: f64 = 0.0;
        while !stepper.is_finished() {
            let s = stepper.step().unwrap();
            worst = worst.max((q(s) - q0).abs() / q0.abs());
        }
        worst
    };
    let d1 = drift(1e-3);
    let d2 = drift(5e-4);
    assert!(d1 < 1e-5, "hybrid mass drift {d1:.3e} at dt = 1e-3");
    let ratio = d1 / d2;
    assert!(
        (3.5..=4.5).contains(&ratio),
        "hybrid drift ratio {ratio} ({d1:.3e} / {d2:.3e})"
    );
}

#[test]
fn line_picard_contracts_with_unit_norm_data() {
    let p = Power::new(3.0).unwrap();
    let lg = LineGrid::new(2048, 16).unwrap();
    let v_raw = ComplexField::from_fn(Grid::Line(lg), |x| {
        Complex64::new((-x * x / 2.0).exp(), 0.0)
    })
    .unwrap();
    let v0 = normalized_h1(&v_raw, 1.0);
    let w_raw = ComplexField::from_fn(torus(64), |x| Complex64::from_polar(1.0, x)).unwrap();
    let w0 = normalized_h1(&w_raw, 1.0);
    let t_star =
        hnls_core::line::guaranteed_time_line(&v0, &w0, &p, DEFAULT_C_CAL).unwrap();
    assert!((t_star - DEFAULT_C_CAL).abs() < 1e-12);
    let horizon = t_star / 2.0;
    let nodes = 65;
    let dt = horizon / (nodes as f64 - 1.0);
    let mut cfg = StepperConfig::new(dt, &p).unwrap();
    cfg.picard_quad_nodes = nodes;

    let traj = evolve_torus(&w0, horizon, &cfg, &p, 1.0).unwrap();
    let w_nodes = torus_fields_at_nodes(&traj, nodes).unwrap();
    let sol = picard_solve_line(&v0, &w_nodes, horizon, &cfg, &p).unwrap();
    assert!(sol.diagnostics.converged);
    assert!(sol.diagnostics.iterations <= 30);
    assert!(!sol.diagnostics.beyond_guaranteed_time);
    for r in &sol.diagnostics.contraction_ratios {
        assert!(*r <= 0.9, "ratio {r}");
    }

    // Cross-validation against the Strang route at the node times.
    let mut stepper = CoupledStepper::new(v0, &w0, horizon, &cfg, &p, 1.0).unwrap();
    let mut sup_l2: f64 = 0.0;
    for node in 1..nodes {
        let s = stepper.step().unwrap();
        sup_l2 = sup_l2.max(s.v.v.sub(&sol.states[node].v).l2_norm());
    }
    let bound = sol.diagnostics.quad_error_bound.max(1e-6);
    assert!(sup_l2 <= bound, "line picard/strang gap {sup_l2:.3e} > {bound:.3e}");
}

#[test]
fn coupled_bound_on_m_plus_e_is_stable_under_dt_refinement() {
    // Desk-scale probe of the global bound: sup_t M(v)+E(v) finite and
    // insensitive to halving dt.
    let p = Power::new(3.0).unwrap();
    let w0 = ComplexField::from_fn(torus(64), |x| Complex64::from_polar(0.8, x)).unwrap();
    let lg = LineGrid::new(4096, 32).unwrap();
    let v0 = ComplexField::from_fn(Grid::Line(lg), |x| {
        Complex64::new(0.5 * (-x * x / (2.0 * 1.5 * 1.5)).exp(), 0.0)
    })
    .unwrap();
    let sup_me = |dt: f64| {
        let cfg = StepperConfig::new(dt, &p).unwrap();
        let mut stepper = CoupledStepper::new(v0.clone(), &w0, 2.0, &cfg, &p, 2.0).unwrap();
        let mut worst = functionals::mass(&stepper.state().v.v)
            + functionals::energy(&stepper.state().v.v, &p).unwrap();
        while !stepper.is_finished() {
            let s = stepper.step().unwrap();
            let me = functionals::mass(&s.v.v) + functionals::energy(&s.v.v, &p).unwrap();
            worst = worst.max(me);
        }
        worst
    };
    let a = sup_me(2e-3);
    let b = sup_me(1e-3);
    assert!(a.is_finite() && a > 0.0);
    let rel = (a - b).abs() / a;
    assert!(rel < 0.05, "sup(M+E) unstable under dt refinement: {a} vs {b}");
}

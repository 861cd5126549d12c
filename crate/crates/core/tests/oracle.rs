mod common;

use common::*;
use onesided::maximal::{compile_envelope, Side};
use onesided::weights::ConstantKind;
use onesided::StepFunction;

fn close(kind: &str, lib: f64, oracle: f64, tol: f64) {
    let rel = (lib - oracle).abs() / oracle.abs().max(1e-300);
    assert!(rel <= tol, "{kind}: library {lib} vs oracle {oracle} (relative {rel:e})");
}

#[test]
fn every_constant_kind_matches_second_enumeration() {
    for (n, w) in random_weights(41, 20, 5).iter().enumerate() {
        for kind in ConstantKind::ALL {
            let (lib, oracle) = both(kind, w, 4);
            close(&format!("{kind} on weight {n}"), lib, oracle, 1e-12);
        }
    }
}

#[test]
fn envelope_matches_direct_maximisation() {
    let fs = random_functions(7, 40, 12);
    for f in &fs {
        let c = cells(f);
        let s = f.support();
        for side in [Side::Plus, Side::Minus] {
            let env = compile_envelope(f, side);
            for i in 0..200 {
                let x = s.left - 1.0 + (s.length() + 2.0) * (i as f64 + 0.37) / 200.0;
                let direct = maximal_direct(&c, x, side == Side::Plus);
                assert!((env.value_at(x) - direct).abs() <= 1e-10, "{f:?} x={x}");
            }
        }
    }
}

#[test]
fn envelope_integrals_match_candidate_route() {
    for f in random_weights(9, 30, 8) {
        let c = cells(&f);
        let s = f.support();
        let (a, b) = (s.left + 0.1 * s.length(), s.right - 0.2 * s.length());
        let restricted = f.restrict(&onesided::Interval::new(a, b).unwrap());
        for (side, plus) in [(Side::Plus, true), (Side::Minus, false)] {
            let env = compile_envelope(&restricted, side);
            let chi = StepFunction::indicator(a, b).unwrap();
            let oracle1 = maximal_integral(&c, a, b, plus, 1.0, &vec![(a, b, 1.0)]);
            close("∫M", env.integral_exact(a, b), oracle1, 1e-12);
            let oracle2 = maximal_integral(&c, a, b, plus, 2.0, &vec![(a, b, 1.0)]);
            close("∫M²", env.integrate_power_weight(2.0, &chi, 1e-12).unwrap(), oracle2, 1e-12);
            let oracle = maximal_integral(&c, a, b, plus, 2.5, &vec![(a, b, 1.0)]);
            close("∫M^2.5", env.integrate_power_weight(2.5, &chi, 1e-13).unwrap(), oracle, 1e-10);
        }
    }
}

#[test]
fn closed_form_spot_values() {
    let one = StepFunction::constant(0.0, 1.0, 1.0).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let closed = (p - 1.0f64).powf(p - 1.0) / p.powf(p);
        close("oracle ap+", ap(&one, p, true, 8), closed, 1e-12);
    }
    close("oracle restricted", restricted(&one, 2.0, 8), 0.5, 1e-12);
    close("oracle ainf", ainf(&one, true, 8), 1.0, 1e-12);
}

use hyperinv::driver::Termination;
use hyperinv::scheme::SchemeId;
use hyperinv_web::{hilbert_curves, scalar_map, stability};

#[test]
fn hilbert_curves_converge_in_extended_precision() {
    let schemes = [SchemeId::Sm, SchemeId::Pm];
    let out = hilbert_curves(8, 6, 40, 1e-20, &schemes).unwrap();
    assert_eq!(out.curves.len(), 2);
    for c in &out.curves {
        assert_eq!(c.terminated, Termination::Converged, "{c:?}");
        assert_eq!(c.log_steps.len(), c.loops);
    }
    assert!(out.curves[1].loops < out.curves[0].loops);
    assert!(hilbert_curves(0, 3, 0, 1e-8, &schemes).is_err());
}

#[test]
fn scalar_map_follows_the_power_law() {
    let out = scalar_map(SchemeId::Pm, 0.5, 3, 200).unwrap();
    assert_eq!(out.order, 18);
    // 0.5^(18^2) is representable at 200 digits; 0.5^(18^3) is not.
    for k in 0..=2 {
        assert!((out.measured[k] - out.predicted[k]).abs() < 1e-9, "{out:?}");
    }
    // Then the residual sits at the working-precision floor.
    assert!(out.measured[3] < -190.0 && out.measured[3] > out.predicted[3]);
    assert!(scalar_map(SchemeId::Sm, 1.5, 3, 30).is_err());
}

#[test]
fn stability_trace_separates_schemes() {
    let run = stability(Some(2024)).unwrap();
    assert!(run.pm.exceeds(10.0));
    assert!(run.pm_stable.spread() < 10.0);
    let json = serde_json::to_string(&run).unwrap();
    assert!(json.contains("\"pm_stable\""));
}

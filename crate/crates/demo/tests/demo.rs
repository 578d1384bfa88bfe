use pfsm_demo::*;

#[test]
fn loop_layout_and_variants() {
    let improved = hysteresis_loop_data("improved", 40.0, 5.0).unwrap();
    assert_eq!(improved.len(), 2 * 40_001);
    assert_eq!(improved[0], 50.0);
    let classic = hysteresis_loop_data("classic", 40.0, 5.0).unwrap();
    assert_ne!(improved, classic);
    assert!(hysteresis_loop_data("nope", 40.0, 5.0).is_err());
}

#[test]
fn bode_layout() {
    let b = bode_data("crp_x", 1e-7, 1e3, 20).unwrap();
    assert_eq!(b.len(), 60);
    assert!((b[20] - 20.0 * 1.085f64.log10()).abs() < 1e-3);
    assert!(b[39].abs() < 1e-3);
    assert!(bode_data("xx", 1.0, 10.0, 1).is_err());
}

#[test]
fn uncoupled_x_drive_leaves_y_at_rest() {
    let t = trajectory_data(30.0, 10.0, 0.0, 10.0, false, 0.2).unwrap();
    assert_eq!(t.len(), 2 * 2001);
    assert!(t.chunks(2).all(|p| p[1].abs() < 1e-12));
    let c = trajectory_data(30.0, 10.0, 0.0, 10.0, true, 0.2).unwrap();
    assert!(c.chunks(2).any(|p| p[1].abs() > 1e-6));
}

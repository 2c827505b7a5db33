use effparam::pellet::{delay_pairs, isothermal_eta, log_grid, offset_for, shoot, trace_curve, TraceOptions};

fn nonisothermal() -> effparam::pellet::ResponseCurve {
    let grid = log_grid(0.9, 10.0, 1043).unwrap();
    trace_curve(0.2, 20.0, &grid, &TraceOptions::default()).unwrap()
}

#[test]
fn isothermal_bvp_matches_closed_form_over_wide_range() {
    let grid = log_grid(0.1, 20.0, 40).unwrap();
    let c = trace_curve(0.0, 20.0, &grid, &TraceOptions::default()).unwrap();
    assert_eq!(c.len(), 40);
    for p in &c.points {
        let exact = isothermal_eta(p.phi);
        assert!(((p.eta - exact) / exact).abs() < 1e-6, "Φ = {}", p.phi);
        assert!(p.eta > 0.0 && p.eta <= 1.0);
    }
    assert!(c.points.windows(2).all(|w| w[1].eta < w[0].eta));
}

#[test]
fn nonisothermal_curve_is_connected_and_noninvertible() {
    let c = nonisothermal();
    assert!(c.gaps.is_empty(), "gaps at {:?}", c.gaps);
    assert_eq!(c.len(), 1043);
    assert!(c.points.windows(2).all(|w| w[1].u_center < w[0].u_center && w[1].arclength > w[0].arclength));
    let eta = c.eta();
    let max = eta.iter().copied().fold(0.0, f64::max);
    assert!(max > 1.0);
    // Some η value is attained on both sides of the maximum, far apart in ln Φ.
    let imax = eta.iter().position(|&e| e == max).unwrap();
    let level = eta[0];
    let j = (imax..eta.len()).find(|&j| eta[j] <= level).unwrap();
    assert!((c.points[j].phi / c.points[0].phi).ln() > 0.5);
}

#[test]
fn delay_pairs_separate_the_branches() {
    let c = nonisothermal();
    let off = offset_for(&c, 0.05).unwrap();
    assert_eq!(off, 22);
    let d = delay_pairs(&c, off).unwrap();
    assert_eq!(d.pairs.len(), 1043 - 22);
    assert!(d.pairs.iter().all(|p| p[0] > 0.0 && p[1] > 0.0));
    // Injective: any two pairs with nearly equal first entries differ in the second.
    for i in 0..d.pairs.len() {
        for j in i + 50..d.pairs.len() {
            let dist = ((d.pairs[i][0] - d.pairs[j][0]).powi(2) + (d.pairs[i][1] - d.pairs[j][1]).powi(2)).sqrt();
            assert!(dist > 1e-3, "pairs {i} and {j} coincide");
        }
    }
}

#[test]
fn shooting_rejects_bad_center_values() {
    assert!(shoot(0.2, 20.0, 0.0).is_err());
    assert!(shoot(0.2, 20.0, 1.5).is_err());
    assert!(shoot(-0.1, 20.0, 0.5).is_err());
}

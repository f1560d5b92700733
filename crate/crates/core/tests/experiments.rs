use walkmix::analysis::QuenchTemplate;
use walkmix::experiments::saturation_point;

#[test]
fn plateau_depends_on_the_ratio_not_the_ring() {
    // d_B/d_S = 8 on two ring sizes.
    let a = saturation_point(&QuenchTemplate::nonlocal(11, 44, 1.0, 600), 10, 3).unwrap();
    let b = saturation_point(&QuenchTemplate::nonlocal(19, 76, 1.0, 1000), 10, 3).unwrap();
    assert_eq!((a.ratio, b.ratio), (8.0, 8.0));
    let sigma = (a.std_d.powi(2) + b.std_d.powi(2)).sqrt();
    assert!((a.mean_d - b.mean_d).abs() < 3.0 * sigma, "{} vs {} (3σ = {})", a.mean_d, b.mean_d, 3.0 * sigma);
}

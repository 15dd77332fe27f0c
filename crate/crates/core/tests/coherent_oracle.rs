use cv_purify::{sigma_ps_closed_form, sigma_ps_numeric, ChannelParams, QuadratureGrid, TeleporterConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Point {
    alpha: Complex64,
    ch: ChannelParams,
    cfg: TeleporterConfig,
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    let r = 1.5 * rng.random::<f64>().sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    Point {
        alpha: Complex64::from_polar(r, theta),
        ch: ChannelParams::new(rng.random_range(0.3..=1.0), rng.random_range(0.0..=0.1)).unwrap(),
        cfg: TeleporterConfig::new(
            rng.random_range(0.1..=0.5),
            rng.random_range(0.3..=0.95),
            rng.random_range(0.7..=1.2),
        )
        .unwrap(),
    }
}

#[test]
fn randomized_points_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = QuadratureGrid::default();
    for _ in 0..10 {
        let p = random_point(&mut rng);
        let num = sigma_ps_numeric(p.alpha, &p.ch, &p.cfg, &grid, 30).unwrap();
        let closed = sigma_ps_closed_form(p.alpha, &p.ch, &p.cfg, 30).unwrap();
        let dist = num.operator.frobenius_distance(&closed) / closed.trace();
        assert!(dist < 1e-5, "α={} {:?} {:?}: {dist:e}", p.alpha, p.ch, p.cfg);
    }
}

#[test]
fn truncation_converges() {
    let ch = ChannelParams::new(0.8, 0.02).unwrap();
    let cfg = TeleporterConfig::new(0.4, 0.7, 1.0).unwrap();
    let alpha = Complex64::new(0.6, 0.4);
    let grid = QuadratureGrid::default();
    let small = sigma_ps_numeric(alpha, &ch, &cfg, &grid, 20).unwrap().operator;
    let large = sigma_ps_numeric(alpha, &ch, &cfg, &grid, 40).unwrap().operator;
    let dist = large.cropped(20).frobenius_distance(&small) / large.trace();
    assert!(dist < 1e-12, "{dist:e}");
    let lost = 1.0 - small.trace() / large.trace();
    assert!(lost < 1e-6, "trace lost at D=20: {lost:e}");
}

#[test]
fn grid_refinement_is_stable() {
    let ch = ChannelParams::lossy(0.6).unwrap();
    let cfg = TeleporterConfig::new(0.35, 0.5, 1.0).unwrap();
    let alpha = Complex64::new(-0.5, 0.9);
    let a = sigma_ps_numeric(alpha, &ch, &cfg, &QuadratureGrid::default(), 25).unwrap().operator;
    let b = sigma_ps_numeric(alpha, &ch, &cfg, &QuadratureGrid::new(96, 7.5).unwrap(), 25)
        .unwrap()
        .operator;
    assert!(a.frobenius_distance(&b) / a.trace() < 1e-9);
}

use cv_purify::fock::coherent_state;
use cv_purify::{
    apply_effective_system, effective_params, optimal_gain, teleport_arbitrary_state, ChannelParams,
    FockOperator, QuadratureGrid, TeleporterConfig,
};
use nalgebra::DVector;
use num_complex::Complex64;

const D: usize = 30;

fn inputs() -> Vec<(&'static str, FockOperator)> {
    let s = 1.0 / 2f64.sqrt();
    let mut sup = DVector::zeros(D);
    sup[0] = Complex64::new(s, 0.0);
    sup[1] = Complex64::new(s, 0.0);
    vec![
        ("vacuum", FockOperator::fock(0, D)),
        ("fock1", FockOperator::fock(1, D)),
        ("coherent", FockOperator::projector(&coherent_state(Complex64::new(0.8, 0.0), D))),
        ("superposition", FockOperator::projector(&sup)),
    ]
}

fn check(ch: ChannelParams, cfg: TeleporterConfig) {
    let eff = effective_params(&ch, &cfg).unwrap();
    let grid = QuadratureGrid::default();
    for (name, rho) in inputs() {
        let oracle = teleport_arbitrary_state(&rho, &ch, &cfg, &grid, D).unwrap();
        let closed = apply_effective_system(&rho, &eff, &grid, D).unwrap();
        let dist = oracle.operator.frobenius_distance(&closed) / closed.trace();
        eprintln!("{name}: {dist:e} (cutoff {:e})", oracle.cutoff_mass);
        assert!(dist < 1e-4, "{name}: distance {dist:e}");
    }
}

#[test]
fn pure_loss_at_optimal_gain() {
    let g = optimal_gain(0.5, 0.31).unwrap();
    check(ChannelParams::lossy(0.5).unwrap(), TeleporterConfig::new(0.31, g, 1.0).unwrap());
}

#[test]
fn lossy_noisy_channel_below_unit_transmission() {
    check(ChannelParams::new(0.7, 0.05).unwrap(), TeleporterConfig::new(0.3, 0.8, 0.9).unwrap());
}

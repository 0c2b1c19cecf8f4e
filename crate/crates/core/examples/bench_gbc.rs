use riemann_lab::gbc::{integrate_chi, QuadratureSpec};
use riemann_lab::metrics::{builtin, BuiltinParams};

fn main() {
    let (m, chart) = builtin("s2xs2", &BuiltinParams::with_r(1.0)).unwrap();
    let t = std::time::Instant::now();
    let est = integrate_chi(&m, &chart, &QuadratureSpec::new(32, true).unwrap()).unwrap();
    println!("s2xs2 32 rich: chi={:.12} err_est={:.3e} |chi-4|={:.3e} t={:?}",
        est.chi, est.error_estimate, (est.chi - 4.0).abs(), t.elapsed());

    let (m, chart) = builtin("s4", &BuiltinParams::with_r(1.0)).unwrap();
    let t = std::time::Instant::now();
    let est = integrate_chi(&m, &chart, &QuadratureSpec::new(48, true).unwrap()).unwrap();
    println!("s4 48 rich: chi={:.12} err_est={:.3e} |chi-2|={:.3e} t={:?}",
        est.chi, est.error_estimate, (est.chi - 2.0).abs(), t.elapsed());
}

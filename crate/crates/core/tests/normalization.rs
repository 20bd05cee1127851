//! Every family integrates to one. The integral is computed here with its
//! own change of variables, independent of `DistributionSpec::quadrature_mass`.

use qlid::{Density, DistributionSpec, Family, Param, SampleSupport};

/// `int_0^inf pdf(origin + dir x) dx` through `x = s t / (1 - t)`.
fn half_mass(spec: &DistributionSpec<f64>, origin: f64, dir: f64, s: f64) -> f64 {
    let f = spec.prepare().unwrap();
    quadrature::integrate(
        |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = s * t / (1.0 - t);
            let v = f.pdf(origin + dir * x) * s / ((1.0 - t) * (1.0 - t));
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        1e-11,
    )
    .integral
}

fn mass(spec: &DistributionSpec<f64>) -> f64 {
    match spec.support() {
        SampleSupport::HalfLine => {
            let s = match spec.family() {
                Family::Gamma => spec.get(Param::A).unwrap() * spec.get(Param::B).unwrap(),
                Family::Weibull => spec.get(Param::B).unwrap(),
                _ => 1.0,
            };
            half_mass(spec, 0.0, 1.0, s)
        }
        SampleSupport::FullLine => {
            let (mu, sigma) = (spec.get(Param::Mu).unwrap(), spec.get(Param::Sigma).unwrap());
            half_mass(spec, mu, 1.0, sigma) + half_mass(spec, mu, -1.0, sigma)
        }
    }
}

fn grid(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn check(specs: Vec<DistributionSpec<f64>>) {
    assert!(specs.len() >= 20);
    for s in specs {
        let m = mass(&s);
        assert!((m - 1.0).abs() <= 1e-6, "{:?}: mass {m}", s.params());
        let lib = s.quadrature_mass().unwrap();
        assert!((lib.mass - 1.0).abs() <= 1e-6, "{:?}: library mass {}", s.params(), lib.mass);
    }
}

#[test]
fn weibull_grid() {
    let mut specs: Vec<_> = grid(&[0.6, 1.0, 2.0, 3.5, 7.0], &[0.2, 1.0, 3.5, 20.0])
        .into_iter()
        .map(|(a, b)| DistributionSpec::weibull(a, b))
        .collect();
    specs.push(DistributionSpec::weibull(2.7380, 3.5414));
    check(specs);
}

#[test]
fn gamma_grid() {
    let mut specs: Vec<_> = grid(&[0.5, 1.0, 1.928, 3.0, 9.0], &[0.1, 0.25, 0.592, 4.0])
        .into_iter()
        .map(|(a, b)| DistributionSpec::gamma(a, b))
        .collect();
    specs.push(DistributionSpec::gamma(1.9280, 0.5920));
    check(specs);
}

#[test]
fn burr_grid() {
    let mut specs: Vec<_> = grid(&[1.5, 2.4977, 4.0, 8.0], &[0.3, 0.8109, 1.0, 2.0, 5.0])
        .into_iter()
        .map(|(a, b)| DistributionSpec::burr3(a, b))
        .collect();
    specs.push(DistributionSpec::burr3(2.4977, 0.8109));
    check(specs);
}

#[test]
fn exp_power_grid() {
    let mut specs: Vec<_> = grid(&[0.7, 1.0, 2.0, 2.36, 5.0], &[0.5, 1.0, 2.0, 4.0])
        .into_iter()
        .map(|(p, eta)| DistributionSpec::exp_power(0.3, 1.7, p, eta))
        .collect();
    specs.push(DistributionSpec::exp_power(-0.1, 0.8, 2.36, 1.0));
    check(specs);
}

#[test]
fn generalized_t_grid() {
    let mut specs: Vec<_> = grid(&[1.0, 2.0, 2.78, 4.0], &[0.85, 1.0, 1.75, 3.0, 10.0])
        .into_iter()
        .map(|(p, nu)| DistributionSpec::generalized_t(-0.4, 1.3, p, nu))
        .collect();
    specs.push(DistributionSpec::generalized_t(0.0, 1.0, 2.78, 0.85));
    check(specs);
}

//! Densities and samplers checked against statrs.

use dvfit::{auxiliary, Density, DistributionModel};
use statrs::distribution::{
    Binomial, Continuous, ContinuousCDF, Discrete, Gamma, Normal, Poisson, Weibull,
};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * b.abs().max(1e-300) || (a - b).abs() < 1e-300
}

#[test]
fn discrete_pmfs_match_statrs() {
    for (n, p) in [(10u64, 0.3), (8, 0.1), (15, 0.15), (4, 0.5)] {
        let ours = DistributionModel::binomial(n, p).unwrap();
        let theirs = Binomial::new(p, n).unwrap();
        for k in 0..=n {
            assert!(
                close(ours.density(k as f64), theirs.pmf(k)),
                "B({n},{p}) at {k}"
            );
        }
        assert_eq!(ours.density(n as f64 + 1.0), 0.0);
        assert_eq!(ours.density(1.5), 0.0);
    }
    for lambda in [0.5, 3.0, 3.8447, 20.0] {
        let ours = DistributionModel::poisson(lambda).unwrap();
        let theirs = Poisson::new(lambda).unwrap();
        for k in 0..40u64 {
            assert!(
                close(ours.density(k as f64), theirs.pmf(k)),
                "P({lambda}) at {k}"
            );
        }
    }
}

#[test]
fn continuous_pdfs_match_statrs() {
    let xs = [0.05, 0.5, 1.0, 2.5, 7.0, 30.13, 60.02];
    for (m, s) in [(0.0, 1.0), (1.2646, 1.0), (-3.0, 0.4)] {
        let ours = DistributionModel::normal(m, s).unwrap();
        let theirs = Normal::new(m, s).unwrap();
        for x in xs.iter().chain(&[-1.0, -4.0]) {
            assert!(close(ours.density(*x), theirs.pdf(*x)), "N({m},{s}) at {x}");
        }
    }
    // statrs parametrizes the gamma by rate.
    for (a, b) in [(7.0, 3.0), (10.0, 5.0), (2.0, 0.5), (0.8, 2.0)] {
        let ours = DistributionModel::gamma(a, b).unwrap();
        let theirs = Gamma::new(a, 1.0 / b).unwrap();
        for x in xs {
            assert!(close(ours.density(x), theirs.pdf(x)), "G({a},{b}) at {x}");
        }
        assert_eq!(ours.density(-1.0), 0.0);
    }
    for (k, l) in [(1.2, 1.5), (0.7, 2.0), (3.0, 1.0)] {
        let ours = DistributionModel::weibull(k, l).unwrap();
        let theirs = Weibull::new(k, l).unwrap();
        for x in xs {
            assert!(close(ours.density(x), theirs.pdf(x)), "W({k},{l}) at {x}");
        }
    }
}

#[test]
fn auxiliary_is_the_conditional_law() {
    let model = DistributionModel::poisson(3.0).unwrap();
    let theirs = Poisson::new(3.0).unwrap();
    let pts = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 9.0];
    let mass: f64 = pts.iter().map(|&x| theirs.pmf(x as u64)).sum();
    let h = auxiliary(&model, &pts).unwrap();
    for (x, v) in pts.iter().zip(h.values()) {
        assert!((v - theirs.pmf(*x as u64) / mass).abs() < 1e-14);
    }
}

/// Kolmogorov distance between a sample and a cdf.
fn ks<F: Fn(f64) -> f64>(mut sample: Vec<f64>, cdf: F) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn samplers_follow_their_laws() {
    let n = 20_000;
    // 1.63/sqrt(n) is the 1% critical value of the KS statistic.
    let crit = 1.63 / (n as f64).sqrt();
    let w = DistributionModel::weibull(1.2, 1.5).unwrap();
    let d = ks(w.sample(n, 3).unwrap(), |x| {
        Weibull::new(1.2, 1.5).unwrap().cdf(x)
    });
    assert!(d < crit, "weibull ks {d}");
    let g = DistributionModel::gamma(2.0, 0.5).unwrap();
    let d = ks(g.sample(n, 4).unwrap(), |x| {
        Gamma::new(2.0, 2.0).unwrap().cdf(x)
    });
    assert!(d < crit, "gamma ks {d}");
    let z = DistributionModel::normal(1.0, 0.8).unwrap();
    let d = ks(z.sample(n, 5).unwrap(), |x| {
        Normal::new(1.0, 0.8).unwrap().cdf(x)
    });
    assert!(d < crit, "normal ks {d}");

    let b = DistributionModel::binomial(10, 0.3).unwrap();
    let s = b.sample(n, 6).unwrap();
    let theirs = Binomial::new(0.3, 10).unwrap();
    for k in 0..=10u64 {
        let freq = s.iter().filter(|&&x| x == k as f64).count() as f64 / n as f64;
        let p = theirs.pmf(k);
        assert!(
            (freq - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-4,
            "B at {k}"
        );
    }
}

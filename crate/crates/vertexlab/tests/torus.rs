use num_complex::Complex64 as C64;
use num_rational::BigRational;
use proptest::prelude::*;
use std::f64::consts::PI;
use vertexlab::loopspace::{kernel_b, KernelParams};
use vertexlab::quad::trapezoid_periodic;
use vertexlab::torus::*;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn euler_product(q: f64) -> f64 {
    (1..200).map(|n| 1.0 - q.powi(2 * n)).product()
}

#[test]
fn nome_validation() {
    assert!(ThetaParams::new(0.0).is_err());
    assert!(ThetaParams::new(1.0).is_err());
    assert!(ThetaParams::from_beta(-1.0).is_err());
    let p = ThetaParams::from_beta(3.0).unwrap();
    assert!((p.q - (-1.5f64).exp()).abs() < 1e-16);
    assert!((p.beta() - 3.0).abs() < 1e-14);
}

#[test]
fn theta_parities() {
    let p = ThetaParams::new(0.4).unwrap();
    assert_eq!(theta1(c(0.0), &p).unwrap().value, c(0.0));
    for &x in &[0.3, 1.7, 2.9] {
        let a = theta3(c(x), &p).unwrap().value;
        let b = theta3(c(-x), &p).unwrap().value;
        assert!((a - b).norm() < 1e-15);
        let a = theta1(c(x), &p).unwrap().value;
        let b = theta1(c(-x), &p).unwrap().value;
        assert!((a + b).norm() < 1e-15);
    }
}

#[test]
fn theta3_at_inverse_e() {
    let q = (-1.0f64).exp();
    let p = ThetaParams::new(q).unwrap();
    let v = theta3(c(0.0), &p).unwrap();
    let direct: f64 = 1.0 + 2.0 * (1..=40).map(|n| q.powi(n * n)).sum::<f64>();
    assert!((v.value.re - direct).abs() < 1e-12);
    assert!(v.tail < 1e-16);
}

#[test]
fn theta_products() {
    for &q in &[0.1, 0.5, 0.8] {
        let p = ThetaParams::new(q).unwrap();
        let d = theta1_prime0(&p).unwrap().value.re;
        // derivative in ξ = 2z
        let prod = q.powf(0.25) * euler_product(q).powi(3);
        assert!((d - prod).abs() < 1e-13 * prod, "q={q}");
        for &x in &[0.4, 2.0] {
            let t = theta1(c(x), &p).unwrap().value.re;
            let pr: f64 = (1..200).map(|n| 1.0 - 2.0 * q.powi(2 * n) * x.cos() + q.powi(4 * n)).product();
            let want = 2.0 * q.powf(0.25) * (x / 2.0).sin() * euler_product(q) * pr;
            assert!((t - want).abs() < 1e-14 + 1e-13 * want.abs(), "q={q} x={x}: {t} vs {want}");
        }
    }
}

#[test]
fn thermal_kernel_shares_the_nome() {
    // at L = 2π the thermal nome equals e^{−β/2}
    for &beta in &[1.0, 2.5] {
        let l = 2.0 * PI;
        let q = thermal_nome(beta, l).unwrap();
        let p = ThetaParams::from_beta(beta).unwrap();
        assert!((q - p.q).abs() < 1e-16);
        for &r in &[0.5, 2.0, -1.2] {
            let b = kernel_b(r, &KernelParams::new(l, 0.0, q).unwrap()).unwrap();
            let t = theta1(c(2.0 * PI * r / l), &p).unwrap().value;
            let want = C64::new(0.0, -1.0) * t / (q.powf(0.25) * euler_product(q));
            assert!((b - want).norm() < 1e-13 * want.norm());
        }
    }
    assert!(thermal_nome(0.0, 1.0).is_err());
}

#[test]
fn szego_kernel_pole_and_antisymmetry() {
    let p = ThetaParams::from_beta(2.0).unwrap();
    assert!(szego_kernel(1.0, 1.0, &p, 1e-3).is_err());
    assert!(szego_kernel(1.0, 1.0 + 2.0 * PI, &p, 1e-3).is_err());
    let a = szego_kernel(0.3, 1.9, &p, 1e-3).unwrap();
    let b = szego_kernel(1.9, 0.3, &p, 1e-3).unwrap();
    assert!((a + b).norm() < 1e-14);
}

#[test]
fn fermi_factors_from_contour_integral() {
    for &beta in &[1.0, 2.0, 4.0] {
        let p = ThetaParams::from_beta(beta).unwrap();
        let shift = -beta / 2.0;
        for n in -4..=4i64 {
            let v = trapezoid_periodic(-PI, 2.0 * PI, 256, |t| {
                let th = C64::new(t, shift);
                fermi_kernel_closed(th, &p).unwrap() * (C64::new(0.0, -(n as f64)) * th).exp()
            }) / (2.0 * PI);
            assert!((v - fermi(n, beta)).norm() < 1e-12, "β={beta} n={n}: {v}");
        }
    }
}

#[test]
fn zero_temperature_limit() {
    for n in 0..5 {
        assert!(fermi(n, 60.0) < 1e-13);
        assert!((fermi(-n - 1, 60.0) - 1.0).abs() < 1e-13);
    }
    assert!((fermi(3, 1e-9) - 0.5).abs() < 1e-8);
    assert!((fermi_half(3, 1e-9) - 0.5).abs() < 1e-8);
}

#[test]
fn fourier_identity_holds() {
    for &beta in &[1.0, 2.0, 4.0] {
        let r = fourier_identity_residual(beta, 400).unwrap();
        assert!(r.max_residual < 1e-10, "{r:?}");
        assert!(r.max_tail < 1e-15);
    }
    assert!(fermi_fourier_sum(0.0, 1.0).is_err());
}

#[test]
fn projection_blocks() {
    for &beta in &[0.5, 2.0] {
        for n in -5..=5 {
            let m = projection_block(n, beta);
            let mut sq = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    sq[i][j] = (0..2).map(|k| m[i][k] * m[k][j]).sum();
                    assert!((sq[i][j] - m[i][j]).abs() < 1e-15);
                }
            }
            assert_eq!(m[0][1], m[1][0]);
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            assert!((tr - 1.0).abs() < 1e-15 && det.abs() < 1e-15);
            assert!(projection_defect_exact(&t_rational(n, beta)));
        }
    }
    let t = BigRational::new(3.into(), 7.into());
    assert!(projection_defect_exact(&t));
}

#[test]
fn kms_projection_examples() {
    let spec = KMSProjectionSpec::new(2.0, 4).unwrap();
    let f = vec![(-2, C64::new(0.3, 0.1)), (0, C64::new(1.0, 0.0)), (3, C64::new(-0.2, 0.5))];
    let g = kms_project(&f, &spec).unwrap();
    for (k, &(n, a)) in f.iter().enumerate() {
        assert_eq!(g.modes[k], n);
        assert!((g.g1[k] - a * fermi(n, 2.0)).norm() < 1e-16);
        assert!((g.g2[k] - a * fermi_half(n, 2.0)).norm() < 1e-16);
    }
    assert!(kms_project(&[(5, c(1.0))], &spec).is_err());
    assert!(KMSProjectionSpec::new(0.0, 3).is_err());
    let hot = kms_project(&f, &KMSProjectionSpec::new(1e-10, 4).unwrap()).unwrap();
    for (k, &(_, a)) in f.iter().enumerate() {
        assert!((hot.g1[k] - a * 0.5).norm() < 1e-9);
    }
}

#[test]
fn kms_projection_by_quadrature() {
    let f = vec![(-3, C64::new(0.2, -0.1)), (-1, C64::new(0.5, 0.0)), (0, C64::new(0.1, 0.3)), (2, C64::new(-0.4, 0.2))];
    for &beta in &[1.0, 2.0, 4.0] {
        let r = quadrature_check(&f, beta, &[-2.0, 0.3, 1.7]).unwrap();
        assert!(r.g1_error < 1e-8 && r.g2_error < 1e-8, "{r:?}");
    }
}

#[test]
fn kernel_table_shape() {
    let csv = kernel_csv(2.0, 16).unwrap();
    assert!(csv.starts_with("phi,xi,re,im\n"));
    let step = 2.0 * PI / 16.0;
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 16 * 5 && rows.len() <= 16 * 7);
    for r in &rows {
        let d = (r[0] - r[1]).rem_euclid(2.0 * PI);
        assert!(d.min(2.0 * PI - d) >= 5.0 * step - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_pointwise(beta in 0.5..6.0f64, th in 0.05..(2.0 * PI - 0.05)) {
        let p = ThetaParams::from_beta(beta).unwrap();
        let s = fermi_fourier_sum(th, beta).unwrap().value;
        let k = fermi_kernel_closed(c(th), &p).unwrap();
        prop_assert!((s - k).norm() < 1e-10 * (1.0 + k.norm()));
    }

    #[test]
    fn fermi_symmetry(beta in 0.1..10.0f64, n in -20i64..20) {
        // F(n) + F(−n−1) = 1
        prop_assert!((fermi(n, beta) + fermi(-n - 1, beta) - 1.0).abs() < 1e-15);
        let a = fermi(n, beta);
        prop_assert!((fermi_half(n, beta).powi(2) - a * (1.0 - a)).abs() < 1e-15);
    }
}

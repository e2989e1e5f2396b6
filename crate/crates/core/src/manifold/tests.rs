use std::f64::consts::{E, FRAC_PI_2};

use approx::assert_relative_eq;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn e(d: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(d);
    v[i] = 1.0;
    v
}

fn diag(vals: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(vals))
}

#[test]
fn euclidean_examples() {
    let m = Manifold::euclidean(2);
    let x = Point::from_slice(&[1.0, 2.0]);
    let v = Tangent::from_slice(&[0.5, -1.0]);
    assert_eq!(m.exp(&x, &v).unwrap(), Point::from_slice(&[1.5, 1.0]));

    let o = Point::from_slice(&[0.0, 0.0]);
    let y = Point::from_slice(&[3.0, 4.0]);
    assert_eq!(m.log(&o, &y).unwrap(), Tangent::from_slice(&[3.0, 4.0]));
    assert_eq!(m.transport(&o, &y, &v).unwrap(), v);
    let i = m.inner(&x, &Tangent::from_slice(&[1.0, 0.0]), &Tangent::from_slice(&[0.0, 1.0])).unwrap();
    assert_eq!(i, 0.0);
    assert_eq!(m.distance(&x, &x).unwrap(), 0.0);
}

#[test]
fn sphere_examples() {
    let m = Manifold::sphere(2);
    let e1 = Point::vector(e(2, 0));
    let e2 = Point::vector(e(2, 1));
    let v = Tangent::vector(e(2, 1) * FRAC_PI_2);

    let y = m.exp(&e1, &v).unwrap();
    assert!(y.max_abs_diff(&e2).unwrap() < 1e-15);

    let l = m.log(&e1, &e2).unwrap();
    assert!(l.max_abs_diff(&v).unwrap() < 1e-15);

    let moved = m.transport(&e1, &e2, &v).unwrap();
    let expected = Tangent::vector(e(2, 0) * -FRAC_PI_2);
    assert!(moved.max_abs_diff(&expected).unwrap() < 1e-15);

    assert_relative_eq!(m.distance(&e1, &e2).unwrap(), FRAC_PI_2, epsilon = 1e-15);
    assert_eq!(m.exp(&e1, &m.zero_tangent(&e1)).unwrap(), e1);
}

#[test]
fn sphere_antipode_is_rejected() {
    let m = Manifold::sphere(3);
    let x = Point::vector(e(3, 0));
    let y = Point::vector(-e(3, 0));
    assert!(matches!(m.log(&x, &y), Err(Error::GeodesicNotUnique(_))));
    let v = Tangent::vector(e(3, 1));
    assert!(matches!(m.transport(&x, &y, &v), Err(Error::GeodesicNotUnique(_))));
}

#[test]
fn sphere_tangent_must_be_orthogonal() {
    let m = Manifold::sphere(3);
    let x = Point::vector(e(3, 0));
    let v = Tangent::vector(e(3, 0));
    assert!(matches!(m.exp(&x, &v), Err(Error::InvalidArgument(_))));
}

#[test]
fn shape_mismatch_is_invalid_argument() {
    let m = Manifold::euclidean(2);
    let x = Point::from_slice(&[1.0, 2.0]);
    let v = Tangent::from_slice(&[1.0, 2.0, 3.0]);
    assert!(matches!(m.exp(&x, &v), Err(Error::InvalidArgument(_))));
    let nan = Tangent::from_slice(&[f64::NAN, 0.0]);
    assert!(matches!(m.exp(&x, &nan), Err(Error::Numeric(_))));
}

#[test]
fn spd_examples() {
    let m = Manifold::spd(2);
    let id = Point::matrix(DMatrix::identity(2, 2));
    let v = DMatrix::from_row_slice(2, 2, &[0.3, -0.2, -0.2, 0.1]);
    let out = m.exp(&id, &Tangent::matrix(v.clone())).unwrap();
    let expected = crate::linalg::expm_sym(&v).unwrap();
    assert_relative_eq!(out.as_matrix().unwrap(), &expected, epsilon = 1e-14);

    let m1 = Manifold::spd(1);
    let one = Point::matrix(diag(&[1.0]));
    let e4 = Point::matrix(diag(&[E.powi(4)]));
    let l = m1.log(&one, &e4).unwrap();
    assert_relative_eq!(l.as_matrix().unwrap()[(0, 0)], 4.0, epsilon = 1e-13);

    let two = Point::matrix(diag(&[2.0]));
    let u = Tangent::matrix(diag(&[1.0]));
    assert_relative_eq!(m1.inner(&two, &u, &u).unwrap(), 0.25, epsilon = 1e-15);

    let a = Point::matrix(diag(&[1.0, 1.0]));
    let b = Point::matrix(diag(&[E * E, 1.0]));
    assert_relative_eq!(m.distance(&a, &b).unwrap(), 2.0, epsilon = 1e-14);

    let uu = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
    let vv = DMatrix::from_row_slice(2, 2, &[0.2, 0.1, 0.1, -1.0]);
    let at_id = m.inner(&id, &Tangent::matrix(uu.clone()), &Tangent::matrix(vv.clone())).unwrap();
    assert_relative_eq!(at_id, (&uu * &vv).trace(), epsilon = 1e-14);
}

#[test]
fn spd_rejects_indefinite_target() {
    let m = Manifold::spd(2);
    let id = Point::matrix(DMatrix::identity(2, 2));
    let bad = Point::matrix(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
    assert!(matches!(m.log(&id, &bad), Err(Error::InvalidArgument(_))));
    assert!(m.check_point(&bad).is_err());
}

#[test]
fn transport_to_self_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in [Manifold::sphere(4), Manifold::spd(3), Manifold::euclidean(3)] {
        let x = m.random_point(&mut rng);
        let v = m.random_tangent(&x, &mut rng, 0.7).unwrap();
        let moved = m.transport(&x, &x, &v).unwrap();
        assert!(moved.max_abs_diff(&v).unwrap() < 1e-12, "{}", m.name());
    }
}

#[test]
fn product_dispatches_componentwise() {
    let m = Manifold::product(vec![Manifold::sphere(3), Manifold::euclidean(2)]);
    assert_eq!(m.dim(), 4);
    assert_eq!(m.kappa_min(), 0.0);
    assert_eq!(m.kappa_max(), 1.0);
    let x = Point::product(vec![Point::vector(e(3, 0)), Point::from_slice(&[1.0, 1.0])]);
    let v = Tangent::product(vec![Tangent::vector(e(3, 1) * FRAC_PI_2), Tangent::from_slice(&[1.0, -1.0])]);
    let y = m.exp(&x, &v).unwrap();
    let parts = y.factors().unwrap();
    assert!(parts[0].max_abs_diff(&Point::vector(e(3, 1))).unwrap() < 1e-15);
    assert_eq!(parts[1], Point::from_slice(&[2.0, 0.0]));
    let expected = (FRAC_PI_2.powi(2) + 2.0).sqrt();
    assert_relative_eq!(m.distance(&x, &y).unwrap(), expected, epsilon = 1e-14);
    assert_relative_eq!(m.norm(&x, &v).unwrap(), expected, epsilon = 1e-14);
}

#[test]
fn curvature_bounds_are_validated() {
    assert!(Manifold::spd(2).with_bounds(-0.5, 1.0, 3.0).is_ok());
    assert!(Manifold::spd(2).with_bounds(-0.5, 1.0, 4.0).is_err());
    assert!(Manifold::spd(2).with_bounds(0.5, 1.0, 1.0).is_err());
    assert!(Manifold::spd(2).with_bounds(-0.5, -1.0, 1.0).is_err());
    let p = Manifold::product(vec![Manifold::sphere(3), Manifold::spd(2)]);
    assert_eq!((p.kappa_min(), p.kappa_max()), (-0.5, 1.0));
}

#[test]
fn sampling_is_seeded_and_valid() {
    for m in [Manifold::sphere(5), Manifold::spd(3), Manifold::euclidean(4)] {
        let a = m.random_point(&mut ChaCha8Rng::seed_from_u64(11));
        let b = m.random_point(&mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
        m.check_point(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v = m.random_tangent(&a, &mut rng, 0.3).unwrap();
        m.check_tangent(&a, &v).unwrap();
        assert_relative_eq!(m.norm(&a, &v).unwrap(), 0.3, epsilon = 1e-12);
    }
    let s = Manifold::sphere(25);
    let x = s.random_point(&mut ChaCha8Rng::seed_from_u64(1));
    assert!((x.as_vector().unwrap().norm() - 1.0).abs() < 1e-12);
    assert!(s.random_tangent(&x, &mut ChaCha8Rng::seed_from_u64(1), 0.0).is_err());
}

#[test]
fn gaussian_tangent_has_unit_variance_per_dimension() {
    let m = Manifold::spd(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = m.random_point(&mut rng);
    let n = 20_000;
    let mean_sq: f64 = (0..n)
        .map(|_| {
            let v = m.gaussian_tangent(&x, &mut rng).unwrap();
            m.inner(&x, &v, &v).unwrap()
        })
        .sum::<f64>()
        / n as f64;
    // E = dim = 6, sd of the mean = sqrt(2·6/n) ≈ 0.024
    assert!((mean_sq - 6.0).abs() < 0.1, "{mean_sq}");
}

#[test]
fn point_record_roundtrip_is_exact() {
    let m = Manifold::product(vec![Manifold::spd(2), Manifold::sphere(3), Manifold::euclidean(1)]);
    let x = m.random_point(&mut ChaCha8Rng::seed_from_u64(9));
    let rec = PointRecord::from_point(&m, &x).unwrap();
    let json = serde_json::to_string(&rec).unwrap();
    assert!(json.starts_with("{\"kind\":\"product\",\"payload\":[{\"kind\":\"spd\""));
    let back: PointRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_point(&m).unwrap(), x);
    assert!(back.to_point(&Manifold::sphere(3)).is_err());
}

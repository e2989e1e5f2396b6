use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Element, Manifold, ManifoldKind, Point};
use crate::error::{Error, Result};

/// JSON form of a point: `{"kind": ..., "payload": ...}` with SPD payloads as
/// row-major nested arrays and products as arrays of records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "lowercase")]
pub enum PointRecord {
    Euclidean(Vec<f64>),
    Sphere(Vec<f64>),
    Spd(Vec<Vec<f64>>),
    Product(Vec<PointRecord>),
}

impl PointRecord {
    pub fn from_point(m: &Manifold, x: &Point) -> Result<Self> {
        m.check_point(x)?;
        Ok(encode(m, &x.0))
    }

    /// Rebuilds the point and validates it against `m`.
    pub fn to_point(&self, m: &Manifold) -> Result<Point> {
        let p = Point(decode(m, self)?);
        m.check_point(&p)?;
        Ok(p)
    }
}

fn encode(m: &Manifold, e: &Element) -> PointRecord {
    match (m.kind(), e) {
        (ManifoldKind::Euclidean(_), Element::Vector(v)) => PointRecord::Euclidean(v.iter().copied().collect()),
        (ManifoldKind::Sphere(_), Element::Vector(v)) => PointRecord::Sphere(v.iter().copied().collect()),
        (ManifoldKind::Spd(_), Element::Matrix(a)) => {
            PointRecord::Spd((0..a.nrows()).map(|r| a.row(r).iter().copied().collect()).collect())
        }
        (ManifoldKind::Product(fs), Element::Product(parts)) => {
            PointRecord::Product(fs.iter().zip(parts).map(|(f, p)| encode(f, p)).collect())
        }
        _ => unreachable!("shape validated by check_point"),
    }
}

fn decode(m: &Manifold, r: &PointRecord) -> Result<Element> {
    match (m.kind(), r) {
        (ManifoldKind::Euclidean(d), PointRecord::Euclidean(v)) | (ManifoldKind::Sphere(d), PointRecord::Sphere(v)) => {
            if v.len() != *d {
                return Err(Error::invalid(format!("expected {d} entries, found {}", v.len())));
            }
            Ok(Element::Vector(DVector::from_column_slice(v)))
        }
        (ManifoldKind::Spd(n), PointRecord::Spd(rows)) => {
            if rows.len() != *n || rows.iter().any(|row| row.len() != *n) {
                return Err(Error::invalid(format!("expected a {n}x{n} matrix")));
            }
            Ok(Element::Matrix(DMatrix::from_fn(*n, *n, |i, j| rows[i][j])))
        }
        (ManifoldKind::Product(fs), PointRecord::Product(parts)) if fs.len() == parts.len() => {
            fs.iter().zip(parts).map(|(f, p)| decode(f, p)).collect::<Result<Vec<_>>>().map(Element::Product)
        }
        _ => Err(Error::invalid(format!("point record kind does not match {}", m.name()))),
    }
}

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Raw payload shared by points and tangent vectors.
#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Vector(DVector<f64>),
    Matrix(DMatrix<f64>),
    Product(Vec<Element>),
}

impl Element {
    pub fn is_finite(&self) -> bool {
        match self {
            Element::Vector(v) => v.iter().all(|a| a.is_finite()),
            Element::Matrix(m) => m.iter().all(|a| a.is_finite()),
            Element::Product(parts) => parts.iter().all(Element::is_finite),
        }
    }

    pub fn zeros_like(&self) -> Element {
        match self {
            Element::Vector(v) => Element::Vector(DVector::zeros(v.len())),
            Element::Matrix(m) => Element::Matrix(DMatrix::zeros(m.nrows(), m.ncols())),
            Element::Product(parts) => Element::Product(parts.iter().map(Element::zeros_like).collect()),
        }
    }

    pub fn scale(&self, s: f64) -> Element {
        match self {
            Element::Vector(v) => Element::Vector(v * s),
            Element::Matrix(m) => Element::Matrix(m * s),
            Element::Product(parts) => Element::Product(parts.iter().map(|p| p.scale(s)).collect()),
        }
    }

    /// `self + s·other`; shapes must agree.
    pub fn axpy(&self, s: f64, other: &Element) -> Result<Element> {
        match (self, other) {
            (Element::Vector(a), Element::Vector(b)) if a.len() == b.len() => Ok(Element::Vector(a + b * s)),
            (Element::Matrix(a), Element::Matrix(b)) if a.shape() == b.shape() => Ok(Element::Matrix(a + b * s)),
            (Element::Product(a), Element::Product(b)) if a.len() == b.len() => {
                a.iter().zip(b).map(|(x, y)| x.axpy(s, y)).collect::<Result<Vec<_>>>().map(Element::Product)
            }
            _ => Err(Error::invalid("element shapes do not match")),
        }
    }

    /// Plain Euclidean (Frobenius) dot product of payloads.
    pub fn dot(&self, other: &Element) -> Result<f64> {
        match (self, other) {
            (Element::Vector(a), Element::Vector(b)) if a.len() == b.len() => Ok(a.dot(b)),
            (Element::Matrix(a), Element::Matrix(b)) if a.shape() == b.shape() => Ok(a.dot(b)),
            (Element::Product(a), Element::Product(b)) if a.len() == b.len() => {
                a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
            }
            _ => Err(Error::invalid("element shapes do not match")),
        }
    }

    /// Largest absolute componentwise difference; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Element) -> Option<f64> {
        match (self, other) {
            (Element::Vector(a), Element::Vector(b)) if a.len() == b.len() => Some((a - b).amax()),
            (Element::Matrix(a), Element::Matrix(b)) if a.shape() == b.shape() => Some((a - b).amax()),
            (Element::Product(a), Element::Product(b)) if a.len() == b.len() => {
                a.iter().zip(b).map(|(x, y)| x.max_abs_diff(y)).try_fold(0.0f64, |acc, d| d.map(|d| acc.max(d)))
            }
            _ => None,
        }
    }

    /// Flattened payload (matrices row-major, product factors concatenated).
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.push_flat(&mut out);
        out
    }

    fn push_flat(&self, out: &mut Vec<f64>) {
        match self {
            Element::Vector(v) => out.extend(v.iter()),
            Element::Matrix(m) => {
                for r in 0..m.nrows() {
                    out.extend(m.row(r).iter());
                }
            }
            Element::Product(parts) => parts.iter().for_each(|p| p.push_flat(out)),
        }
    }
}

/// A point on a manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Element);

/// A tangent vector. The base point is supplied alongside it at every call.
#[derive(Clone, Debug, PartialEq)]
pub struct Tangent(pub Element);

macro_rules! payload_accessors {
    ($ty:ident) => {
        impl $ty {
            pub fn vector(v: DVector<f64>) -> Self {
                $ty(Element::Vector(v))
            }

            pub fn from_slice(v: &[f64]) -> Self {
                $ty(Element::Vector(DVector::from_column_slice(v)))
            }

            pub fn matrix(m: DMatrix<f64>) -> Self {
                $ty(Element::Matrix(m))
            }

            pub fn product(parts: Vec<$ty>) -> Self {
                $ty(Element::Product(parts.into_iter().map(|p| p.0).collect()))
            }

            pub fn element(&self) -> &Element {
                &self.0
            }

            pub fn as_vector(&self) -> Option<&DVector<f64>> {
                match &self.0 {
                    Element::Vector(v) => Some(v),
                    _ => None,
                }
            }

            pub fn as_matrix(&self) -> Option<&DMatrix<f64>> {
                match &self.0 {
                    Element::Matrix(m) => Some(m),
                    _ => None,
                }
            }

            /// Factors of a product payload, cloned.
            pub fn factors(&self) -> Option<Vec<$ty>> {
                match &self.0 {
                    Element::Product(parts) => Some(parts.iter().cloned().map($ty).collect()),
                    _ => None,
                }
            }

            pub fn is_finite(&self) -> bool {
                self.0.is_finite()
            }

            pub fn max_abs_diff(&self, other: &$ty) -> Option<f64> {
                self.0.max_abs_diff(&other.0)
            }
        }
    };
}

payload_accessors!(Point);
payload_accessors!(Tangent);

impl Tangent {
    pub fn zeros_like(&self) -> Tangent {
        Tangent(self.0.zeros_like())
    }

    pub fn scale(&self, s: f64) -> Tangent {
        Tangent(self.0.scale(s))
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Tangent) -> Result<Tangent> {
        self.0.axpy(s, &other.0).map(Tangent)
    }
}

impl Add for &Tangent {
    type Output = Tangent;

    /// Panics on shape mismatch; use [`Tangent::axpy`] for a fallible sum.
    fn add(self, rhs: &Tangent) -> Tangent {
        self.axpy(1.0, rhs).expect("tangent shapes must match")
    }
}

impl Sub for &Tangent {
    type Output = Tangent;

    fn sub(self, rhs: &Tangent) -> Tangent {
        self.axpy(-1.0, rhs).expect("tangent shapes must match")
    }
}

impl Mul<f64> for &Tangent {
    type Output = Tangent;

    fn mul(self, s: f64) -> Tangent {
        self.scale(s)
    }
}

impl Neg for &Tangent {
    type Output = Tangent;

    fn neg(self) -> Tangent {
        self.scale(-1.0)
    }
}

//! Dense matrices between tensor-power spaces.
//!
//! A `LinearMap` sends a `dom_dim`-dimensional space to a `cod_dim`-dimensional
//! one; `entry(i, j)` is the coefficient of output basis vector `i` in the image
//! of input basis vector `j`. The basis of a tensor product `V ⊗ W` is ordered
//! Kronecker row-major: `index(e_i ⊗ f_j) = i * dim(W) + j`. Every map in the
//! crate — comultiplications, multiplications, coactions, reassociators,
//! preantipodes — is carried by this type under that single ordering contract.

use serde::{Deserialize, Serialize};

use super::scalar::{Field, Scalar};
use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    field: Field,
    cod_dim: usize,
    dom_dim: usize,
    /// Row-major: `data[i * dom_dim + j]`.
    data: Vec<Scalar>,
}

impl LinearMap {
    pub fn new(field: Field, cod_dim: usize, dom_dim: usize, data: Vec<Scalar>) -> LinearMap {
        assert_eq!(data.len(), cod_dim * dom_dim, "entry count mismatch");
        for s in &data {
            assert_eq!(s.field(), field, "entry field mismatch");
        }
        LinearMap {
            field,
            cod_dim,
            dom_dim,
            data,
        }
    }

    pub fn zero(field: Field, cod_dim: usize, dom_dim: usize) -> LinearMap {
        LinearMap {
            field,
            cod_dim,
            dom_dim,
            data: vec![field.zero(); cod_dim * dom_dim],
        }
    }

    pub fn identity(field: Field, n: usize) -> LinearMap {
        let mut m = LinearMap::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_fn(
        field: Field,
        cod_dim: usize,
        dom_dim: usize,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> LinearMap {
        let mut data = Vec::with_capacity(cod_dim * dom_dim);
        for i in 0..cod_dim {
            for j in 0..dom_dim {
                data.push(f(i, j));
            }
        }
        LinearMap::new(field, cod_dim, dom_dim, data)
    }

    /// Builds from integer entries, mostly for tests and fixtures.
    pub fn from_rows_i64(field: Field, rows: &[&[i64]]) -> LinearMap {
        let cod = rows.len();
        let dom = if cod == 0 { 0 } else { rows[0].len() };
        LinearMap::from_fn(field, cod, dom, |i, j| field.from_i64(rows[i][j]))
    }

    /// A single row, i.e. a functional. `dom_dim = entries.len()`, `cod_dim = 1`.
    pub fn row(field: Field, entries: Vec<Scalar>) -> LinearMap {
        let dom = entries.len();
        LinearMap::new(field, 1, dom, entries)
    }

    /// A single column, i.e. a vector viewed as a map from the ground field.
    pub fn column(field: Field, entries: Vec<Scalar>) -> LinearMap {
        let cod = entries.len();
        LinearMap::new(field, cod, 1, entries)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn cod_dim(&self) -> usize {
        self.cod_dim
    }

    pub fn dom_dim(&self) -> usize {
        self.dom_dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        debug_assert!(i < self.cod_dim && j < self.dom_dim);
        &self.data[i * self.dom_dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        assert_eq!(v.field(), self.field, "entry field mismatch");
        self.data[i * self.dom_dim + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Scalar) {
        let idx = i * self.dom_dim + j;
        self.data[idx] = self.data[idx].add(v);
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    pub fn row_slice(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.dom_dim..(i + 1) * self.dom_dim]
    }

    pub fn column_vec(&self, j: usize) -> Vec<Scalar> {
        (0..self.cod_dim).map(|i| self.entry(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|s| s.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.cod_dim == self.dom_dim
            && (0..self.cod_dim).all(|i| {
                (0..self.dom_dim).all(|j| {
                    let e = self.entry(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn same_field(&self, other: &LinearMap) -> Result<(), Error> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(
                self.field.to_string(),
                other.field.to_string(),
            ));
        }
        Ok(())
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &LinearMap) -> LinearMap {
        assert_eq!(self.field, other.field, "field mismatch in compose");
        assert_eq!(
            self.dom_dim, other.cod_dim,
            "dimension mismatch in compose"
        );
        let mut out = LinearMap::zero(self.field, self.cod_dim, other.dom_dim);
        for i in 0..self.cod_dim {
            for k in 0..self.dom_dim {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.dom_dim {
                    let b = other.entry(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    out.add_to(i, j, &a.mul(b));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &LinearMap) -> LinearMap {
        assert_eq!(self.field, other.field, "field mismatch in add");
        assert_eq!(self.cod_dim, other.cod_dim);
        assert_eq!(self.dom_dim, other.dom_dim);
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.add(b))
            .collect();
        LinearMap::new(self.field, self.cod_dim, self.dom_dim, data)
    }

    pub fn sub(&self, other: &LinearMap) -> LinearMap {
        self.add(&other.scale(&self.field.from_i64(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> LinearMap {
        assert_eq!(s.field(), self.field, "field mismatch in scale");
        let data = self.data.iter().map(|a| a.mul(s)).collect();
        LinearMap::new(self.field, self.cod_dim, self.dom_dim, data)
    }

    pub fn transpose(&self) -> LinearMap {
        LinearMap::from_fn(self.field, self.dom_dim, self.cod_dim, |i, j| {
            self.entry(j, i).clone()
        })
    }

    /// Kronecker product: `(f ⊗ g)(e_i ⊗ e_j) = f(e_i) ⊗ g(e_j)` under the
    /// row-major ordering; dimensions multiply.
    pub fn kron(&self, other: &LinearMap) -> Result<LinearMap, Error> {
        self.same_field(other)?;
        let cod = self.cod_dim * other.cod_dim;
        let dom = self.dom_dim * other.dom_dim;
        let mut out = LinearMap::zero(self.field, cod, dom);
        for i1 in 0..self.cod_dim {
            for j1 in 0..self.dom_dim {
                let a = self.entry(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..other.cod_dim {
                    for j2 in 0..other.dom_dim {
                        let b = other.entry(i2, j2);
                        if b.is_zero() {
                            continue;
                        }
                        out.set(
                            i1 * other.cod_dim + i2,
                            j1 * other.dom_dim + j2,
                            a.mul(b),
                        );
                    }
                }
            }
        }
        Ok(out)
    }

    /// Inverse of a square map, if it exists.
    pub fn inverse(&self) -> Result<LinearMap, Error> {
        if self.cod_dim != self.dom_dim {
            return Err(Error::Singular);
        }
        let n = self.cod_dim;
        // Gauss-Jordan on [A | I].
        let mut rows: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                let mut r = self.row_slice(i).to_vec();
                for k in 0..n {
                    r.push(if k == i { self.field.one() } else { self.field.zero() });
                }
                r
            })
            .collect();
        let mut pivot_row = 0;
        for col in 0..n {
            let Some(p) = (pivot_row..n).find(|&r| !rows[r][col].is_zero()) else {
                return Err(Error::Singular);
            };
            rows.swap(pivot_row, p);
            let inv = rows[pivot_row][col].inv().expect("nonzero pivot");
            for v in rows[pivot_row].iter_mut() {
                *v = v.mul(&inv);
            }
            for r in 0..n {
                if r != pivot_row && !rows[r][col].is_zero() {
                    let factor = rows[r][col].clone();
                    for k in 0..2 * n {
                        let s = rows[pivot_row][k].mul(&factor);
                        rows[r][k] = rows[r][k].sub(&s);
                    }
                }
            }
            pivot_row += 1;
        }
        let mut out = LinearMap::zero(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, rows[i][n + j].clone());
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.dom_dim);
        (0..self.cod_dim)
            .map(|i| {
                let mut acc = self.field.zero();
                for (j, x) in v.iter().enumerate() {
                    if !x.is_zero() && !self.entry(i, j).is_zero() {
                        acc = acc.add(&self.entry(i, j).mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    /// First column index (decoded against `dims`) at which the two maps
    /// differ, scanning column-by-column then row-by-row.
    pub fn first_mismatch(&self, other: &LinearMap, dims: &[usize]) -> Option<Vec<usize>> {
        assert_eq!(self.cod_dim, other.cod_dim, "mismatched comparison shapes");
        assert_eq!(self.dom_dim, other.dom_dim, "mismatched comparison shapes");
        for j in 0..self.dom_dim {
            for i in 0..self.cod_dim {
                if self.entry(i, j) != other.entry(i, j) {
                    return Some(decode_index(j, dims));
                }
            }
        }
        None
    }
}

/// Decodes a flat Kronecker index into a multi-index for the given dimensions.
pub fn decode_index(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, d) in dims.iter().enumerate().rev() {
        if *d > 0 {
            out[k] = flat % d;
            flat /= d;
        }
    }
    out
}

/// Encodes a multi-index into a flat Kronecker index.
pub fn encode_index(idx: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0;
    for (k, d) in dims.iter().enumerate() {
        debug_assert!(idx[k] < *d);
        flat = flat * d + idx[k];
    }
    flat
}

impl Serialize for LinearMap {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(self.cod_dim))?;
        for i in 0..self.cod_dim {
            seq.serialize_element(self.row_slice(i))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LinearMap {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows: Vec<Vec<Scalar>> = Vec::deserialize(de)?;
        let cod = rows.len();
        let dom = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(cod * dom);
        let mut field: Option<Field> = None;
        for r in &rows {
            if r.len() != dom {
                return Err(D::Error::custom("ragged matrix rows"));
            }
            for s in r {
                match field {
                    None => field = Some(s.field()),
                    Some(f) if f != s.field() => {
                        return Err(D::Error::custom("mixed scalar fields in matrix"))
                    }
                    _ => {}
                }
                data.push(s.clone());
            }
        }
        Ok(LinearMap {
            field: field.unwrap_or(Field::Rational),
            cod_dim: cod,
            dom_dim: dom,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rational
    }

    #[test]
    fn kron_identities() {
        let i2 = LinearMap::identity(q(), 2);
        let i3 = LinearMap::identity(q(), 3);
        assert_eq!(i2.kron(&i3).unwrap(), LinearMap::identity(q(), 6));
    }

    #[test]
    fn kron_one_by_one() {
        let a = LinearMap::from_rows_i64(q(), &[&[2]]);
        let b = LinearMap::from_rows_i64(q(), &[&[3]]);
        assert_eq!(a.kron(&b).unwrap(), LinearMap::from_rows_i64(q(), &[&[6]]));
    }

    #[test]
    fn kron_index_formula_matches_loop_oracle() {
        // spot-check on 2x2 matrices over F5 against the direct index formula,
        // computed by an independent elementwise loop
        let f = Field::fp(5).unwrap();
        let a = LinearMap::from_rows_i64(f, &[&[1, 2], &[3, 4]]);
        let b = LinearMap::from_rows_i64(f, &[&[4, 0], &[2, 1]]);
        let k = a.kron(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for r in 0..2 {
                    for s in 0..2 {
                        let expected = a.entry(i, j).mul(b.entry(r, s));
                        assert_eq!(*k.entry(i * 2 + r, j * 2 + s), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn compose_and_inverse() {
        let a = LinearMap::from_rows_i64(q(), &[&[1, 1], &[0, 1]]);
        let inv = a.inverse().unwrap();
        assert!(a.compose(&inv).is_identity());
        assert!(inv.compose(&a).is_identity());
        let sing = LinearMap::from_rows_i64(q(), &[&[1, 1], &[2, 2]]);
        assert!(sing.inverse().is_err());
    }

    #[test]
    fn index_codecs() {
        let dims = [2, 3, 4];
        for flat in 0..24 {
            let multi = decode_index(flat, &dims);
            assert_eq!(encode_index(&multi, &dims), flat);
        }
    }

    #[test]
    fn field_mismatch_reported() {
        let a = LinearMap::identity(q(), 2);
        let b = LinearMap::identity(Field::fp(5).unwrap(), 2);
        assert!(a.kron(&b).is_err());
    }
}

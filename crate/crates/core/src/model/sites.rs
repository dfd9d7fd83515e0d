use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `k` reference points in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteSet<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> SiteSet<T> {
    pub fn new(sites: &[Vec<T>]) -> Result<Self> {
        let dim = sites.first().map(Vec::len).unwrap_or(0);
        let mut coords = Vec::with_capacity(sites.len() * dim);
        for (i, s) in sites.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    what: "site",
                    index: i,
                    expected: dim,
                    found: s.len(),
                });
            }
            coords.extend_from_slice(s);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::Parameter {
                name: "sites",
                value: coords.len() as f64,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                index: pos / dim,
                coord: pos % dim,
            });
        }
        Ok(Self { dim, coords })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn site(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.coords.chunks(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<T>> {
        self.iter().map(<[T]>::to_vec).collect()
    }
}

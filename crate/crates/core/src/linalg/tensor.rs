//! Subsystem bookkeeping: partial trace, partial transpose, and reordering of
//! tensor factors for square operators on ⊗_k H_k.

use serde::{Deserialize, Serialize};

use super::operator::{Operator, ZERO};
use crate::error::{Error, Result};

/// Ordered subsystem dimensions, e.g. `[d_C', d_A, d_B]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct DimSpec(Vec<usize>);

impl TryFrom<Vec<usize>> for DimSpec {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        DimSpec::new(dims)
    }
}

impl From<DimSpec> for Vec<usize> {
    fn from(d: DimSpec) -> Self {
        d.0
    }
}

impl DimSpec {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::dims(format!("subsystem dimensions must be positive, got {dims:?}")));
        }
        Ok(DimSpec(dims))
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn check(&self, m: &Operator) -> Result<()> {
        if !m.is_square() {
            return Err(Error::dims(format!("operator {}x{} is not square", m.rows(), m.cols())));
        }
        if m.rows() != self.total() {
            return Err(Error::dims(format!(
                "dims {:?} (product {}) do not match operator side {}",
                self.0,
                self.total(),
                m.rows()
            )));
        }
        Ok(())
    }

    fn split(&self, mut idx: usize, out: &mut [usize]) {
        for (k, &d) in self.0.iter().enumerate().rev() {
            out[k] = idx % d;
            idx /= d;
        }
    }

    fn join(&self, digits: &[usize]) -> usize {
        self.0.iter().zip(digits).fold(0, |acc, (&d, &i)| acc * d + i)
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.0.len() {
            return Err(Error::dims(format!("subsystem {k} out of range for {:?}", self.0)));
        }
        Ok(())
    }
}

/// Trace out every subsystem not listed in `keep`. Kept factors retain their
/// original relative order.
pub fn partial_trace(m: &Operator, dims: &DimSpec, keep: &[usize]) -> Result<Operator> {
    dims.check(m)?;
    for &k in keep {
        dims.check_index(k)?;
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&k| dims.0[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep_sorted.contains(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims.0[k]).collect();
    let side: usize = kept_dims.iter().product();
    let env: usize = traced_dims.iter().product();

    let n = dims.len();
    let mut digits = vec![0usize; n];
    let mut out = Operator::zeros(side, side);
    let kept_spec = DimSpec(if kept_dims.is_empty() { vec![1] } else { kept_dims.clone() });
    let env_spec = DimSpec(if traced_dims.is_empty() { vec![1] } else { traced_dims.clone() });
    let mut kr = vec![0usize; kept_spec.len()];
    let mut kc = vec![0usize; kept_spec.len()];
    let mut ev = vec![0usize; env_spec.len()];

    for r in 0..side {
        kept_spec.split(r, &mut kr);
        for c in 0..side {
            kept_spec.split(c, &mut kc);
            let mut acc = ZERO;
            for e in 0..env {
                env_spec.split(e, &mut ev);
                for (j, &k) in keep_sorted.iter().enumerate() {
                    digits[k] = kr[j];
                }
                for (j, &k) in traced.iter().enumerate() {
                    digits[k] = ev[j];
                }
                let row = dims.join(&digits);
                for (j, &k) in keep_sorted.iter().enumerate() {
                    digits[k] = kc[j];
                }
                let col = dims.join(&digits);
                acc += m.get(row, col);
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Transpose the `subsystem`-th tensor factor.
pub fn partial_transpose(m: &Operator, dims: &DimSpec, subsystem: usize) -> Result<Operator> {
    dims.check(m)?;
    dims.check_index(subsystem)?;
    let n = m.rows();
    let mut dr = vec![0usize; dims.len()];
    let mut dc = vec![0usize; dims.len()];
    let mut out = Operator::zeros(n, n);
    for r in 0..n {
        dims.split(r, &mut dr);
        for c in 0..n {
            dims.split(c, &mut dc);
            std::mem::swap(&mut dr[subsystem], &mut dc[subsystem]);
            let (sr, sc) = (dims.join(&dr), dims.join(&dc));
            std::mem::swap(&mut dr[subsystem], &mut dc[subsystem]);
            out[(r, c)] = m.get(sr, sc);
        }
    }
    Ok(out)
}

/// Reorder tensor factors: factor `perm[j]` of the input becomes factor `j`
/// of the output. Returns the permuted operator and its new `DimSpec`.
pub fn permute_subsystems(m: &Operator, dims: &DimSpec, perm: &[usize]) -> Result<(Operator, DimSpec)> {
    dims.check(m)?;
    let mut seen = perm.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::dims(format!("{perm:?} is not a permutation of 0..{}", dims.len())));
    }
    let new_dims = DimSpec(perm.iter().map(|&k| dims.0[k]).collect());
    let n = m.rows();
    let mut digits = vec![0usize; dims.len()];
    let mut old = vec![0usize; dims.len()];
    // position map: new index -> old index
    let map: Vec<usize> = (0..n)
        .map(|i| {
            new_dims.split(i, &mut digits);
            for (j, &k) in perm.iter().enumerate() {
                old[k] = digits[j];
            }
            dims.join(&old)
        })
        .collect();
    let out = Operator::from_fn(n, n, |r, c| m.get(map[r], map[c]));
    Ok((out, new_dims))
}

/// Apply `local` to the `subsystem`-th factor of a state vector / operator
/// space: returns (I ⊗ … ⊗ local ⊗ … ⊗ I) as a full matrix.
pub fn embed_local(local: &Operator, dims: &DimSpec, subsystem: usize) -> Result<Operator> {
    dims.check_index(subsystem)?;
    if local.rows() != dims.0[subsystem] || local.cols() != dims.0[subsystem] {
        return Err(Error::dims(format!(
            "local operator {}x{} does not fit subsystem of dimension {}",
            local.rows(),
            local.cols(),
            dims.0[subsystem]
        )));
    }
    let before: usize = dims.0[..subsystem].iter().product();
    let after: usize = dims.0[subsystem + 1..].iter().product();
    Ok(Operator::identity(before).kron(local).kron(&Operator::identity(after)))
}

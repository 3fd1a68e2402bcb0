use num_complex::Complex64 as C64;

use super::{MatrixFunction, ScalarFn};
use crate::error::Result;
use crate::linalg::ordering::choose_ordering;
use crate::linalg::{BandMatrix, LuFactors};

/// Repeated factorization of `K(s)` at varying `s`. The sparsity pattern and
/// a bandwidth-reducing ordering are fixed once from the union of all terms.
#[derive(Clone, Debug)]
pub struct Resolvent {
    n: usize,
    perm: Option<Vec<usize>>,
    kl: usize,
    ku: usize,
    /// per term: scalar and entries in permuted indices
    terms: Vec<(ScalarFn, Vec<(usize, usize, C64)>)>,
}

impl Resolvent {
    pub fn new(k: &MatrixFunction) -> Self {
        let n = k.rows;
        let mut pattern = Vec::new();
        let mut raw = Vec::new();
        for t in &k.terms {
            let mut e = Vec::new();
            for j in 0..n {
                for i in 0..n {
                    let v = t.matrix[(i, j)];
                    if v.norm_sqr() > 0.0 {
                        e.push((i, j, v));
                        pattern.push((i, j));
                    }
                }
            }
            raw.push((t.scalar.clone(), e));
        }
        for i in 0..n {
            pattern.push((i, i));
        }
        pattern.sort_unstable();
        pattern.dedup();
        let (perm, kl, ku) = choose_ordering(n, &pattern);
        let terms = match &perm {
            Some(p) => {
                let mut inv = vec![0; n];
                for (new, &old) in p.iter().enumerate() {
                    inv[old] = new;
                }
                raw.into_iter()
                    .map(|(s, e)| {
                        (
                            s,
                            e.into_iter().map(|(i, j, v)| (inv[i], inv[j], v)).collect(),
                        )
                    })
                    .collect()
            }
            None => raw,
        };
        Resolvent {
            n,
            perm,
            kl,
            ku,
            terms,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Factor `K(s)`; a singular pivot is reported with the offending `s`.
    pub fn factor(&self, s: C64) -> Result<LuFactors<C64>> {
        let mut band = BandMatrix::zeros(self.n, self.kl, self.ku);
        for (scalar, entries) in &self.terms {
            let a = scalar.eval(s);
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for &(i, j, v) in entries {
                band.add(i, j, v * a);
            }
        }
        let lu = band.factor().map_err(|e| e.at(s))?;
        Ok(LuFactors::new(lu, self.perm.clone()))
    }
}

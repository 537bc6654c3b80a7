//! Householder QR of `Σ_t S_t ⊗ T_t` for banded square `S_t` and tall `T_t`.
//!
//! The product is block banded: block `(i, k)` is `Σ_t S_t[i,k] T_t` and
//! vanishes for `|i - k| > b`. Each block column is stored only over the row
//! window that can ever become nonzero, so memory and work scale with the
//! band instead of the full matrix. Pivoting is restricted to the columns of
//! the current block column.

use super::qr::{apply_reflector, make_reflector};
use super::{rank_tolerance, KroneckerSystem};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct BlockColumn {
    top: usize,
    bot: usize,
    // column-major, (bot - top) rows
    data: Vec<f64>,
    perm: Vec<usize>,
}

impl BlockColumn {
    fn height(&self) -> usize {
        self.bot - self.top
    }
}

/// Factorization of a block-banded Kronecker sum, with the right-hand side
/// carried along.
#[derive(Debug, Clone)]
pub struct BlockBandedQr {
    rows: usize,
    cols: usize,
    block_cols: usize,
    band: usize,
    blocks: Vec<BlockColumn>,
    qtb: Vec<f64>,
    diag: Vec<f64>,
}

impl BlockBandedQr {
    /// Can [`factor`](Self::factor) handle this system?
    pub fn applicable(sys: &KroneckerSystem) -> bool {
        let (or, oc) = sys.outer_shape();
        let (ir, ic) = sys.inner_shape();
        or == oc && or > 0 && ic > 0 && ir >= ic
    }

    pub fn factor(sys: &KroneckerSystem, rhs: &[f64]) -> Result<Self> {
        if !Self::applicable(sys) {
            return Err(Error::ShapeMismatch(
                "block-banded QR needs square outer and tall inner factors".into(),
            ));
        }
        if rhs.len() != sys.rows() {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side of length {} for {} rows",
                rhs.len(),
                sys.rows()
            )));
        }
        let nb = sys.outer_shape().0;
        let (rb, cb) = sys.inner_shape();
        let band = sys.terms().iter().map(|(o, _)| o.bandwidth()).max().unwrap_or(0);

        let mut blocks: Vec<BlockColumn> = (0..nb)
            .map(|i| {
                let bot = (i + band + 1).min(nb) * rb;
                let top = (i.saturating_sub(2 * band) * cb).min(i.saturating_sub(band) * rb);
                BlockColumn {
                    top,
                    bot,
                    data: vec![0.0; (bot - top) * cb],
                    perm: (0..cb).collect(),
                }
            })
            .collect();
        for (i, blk) in blocks.iter_mut().enumerate() {
            let h = blk.height();
            let lo = i.saturating_sub(band);
            let hi = (i + band).min(nb - 1);
            for brow in lo..=hi {
                for (outer, inner) in sys.terms() {
                    let s = outer[(brow, i)];
                    if s == 0.0 {
                        continue;
                    }
                    for c in 0..cb {
                        let col = &mut blk.data[c * h..(c + 1) * h];
                        for p in 0..rb {
                            col[brow * rb + p - blk.top] += s * inner[(p, c)];
                        }
                    }
                }
            }
        }

        let mut qtb = rhs.to_vec();
        let mut diag = vec![0.0; nb * cb];
        let mut v = Vec::new();
        for i in 0..nb {
            let last = (i + 2 * band).min(nb - 1);
            let (head, tail) = blocks.split_at_mut(i + 1);
            let blk = &mut head[i];
            let h = blk.height();
            let bot = blk.bot;
            for lc in 0..cb {
                let c = i * cb + lc;
                let off = c - blk.top;
                let best = (lc..cb)
                    .map(|l| {
                        let col = &blk.data[l * h + off..(l + 1) * h];
                        (l, col.iter().map(|x| x * x).sum::<f64>())
                    })
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(l, _)| l)
                    .expect("non-empty column range");
                if best != lc {
                    for r in 0..h {
                        blk.data.swap(lc * h + r, best * h + r);
                    }
                    blk.perm.swap(lc, best);
                }
                v.clear();
                v.extend_from_slice(&blk.data[lc * h + off..(lc + 1) * h]);
                let refl = make_reflector(&mut v);
                diag[c] = refl.beta;
                blk.data[lc * h + off] = refl.beta;
                for l in lc + 1..cb {
                    apply_reflector(&v, refl.tau, &mut blk.data[l * h + off..(l + 1) * h]);
                }
                let len = bot - c;
                for later in tail.iter_mut().take(last - i) {
                    let h2 = later.height();
                    let off2 = c - later.top;
                    for l in 0..cb {
                        let start = l * h2 + off2;
                        apply_reflector(&v, refl.tau, &mut later.data[start..start + len]);
                    }
                }
                apply_reflector(&v, refl.tau, &mut qtb[c..bot]);
            }
        }

        Ok(Self {
            rows: nb * rb,
            cols: nb * cb,
            block_cols: cb,
            band,
            blocks,
            qtb,
            diag,
        })
    }

    pub fn r_diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Norm of the part of `Qᵀb` outside the range of `R`.
    pub fn residual_norm(&self) -> f64 {
        self.qtb[self.cols..].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Back-substitution, dropping columns with negligible pivots, mapped back
    /// to the original column order.
    pub fn solution(&self) -> Vec<f64> {
        let cb = self.block_cols;
        let nb = self.blocks.len();
        let tol = rank_tolerance(self.rows, self.cols, &self.diag);
        let mut z = vec![0.0; self.cols];
        for c in (0..self.cols).rev() {
            if self.diag[c].abs() <= tol {
                continue;
            }
            let i = c / cb;
            let last = (i + 2 * self.band).min(nb - 1);
            let mut s = self.qtb[c];
            for (i2, blk) in self.blocks.iter().enumerate().take(last + 1).skip(i) {
                let h = blk.height();
                let first = if i2 == i { c % cb + 1 } else { 0 };
                for l in first..cb {
                    s -= blk.data[l * h + c - blk.top] * z[i2 * cb + l];
                }
            }
            z[c] = s / self.diag[c];
        }
        let mut x = vec![0.0; self.cols];
        for (i, blk) in self.blocks.iter().enumerate() {
            for (l, &p) in blk.perm.iter().enumerate() {
                x[i * cb + p] = z[i * cb + l];
            }
        }
        x
    }
}

//! Smoothed-aggregation algebraic multigrid, used as a GMRES preconditioner
//! for the elliptic systems on fine grids.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, sqrt};
use crate::sparse::{CsrMatrix, Preconditioner};

struct Level {
    a: CsrMatrix,
    p: CsrMatrix,
    r: CsrMatrix,
    inv_diag: Vec<f64>,
}

pub struct Amg {
    levels: Vec<Level>,
    coarse: DenseLu,
}

/// Dense LU with partial pivoting for the coarsest level.
struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    fn new(mut a: Vec<f64>, n: usize) -> Option<Self> {
        let mut piv = vec![0; n];
        for col in 0..n {
            let mut p = col;
            let mut best = abs(a[col * n + col]);
            for r in col + 1..n {
                if abs(a[r * n + col]) > best {
                    best = abs(a[r * n + col]);
                    p = r;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            piv[col] = p;
            if p != col {
                for k in 0..n {
                    a.swap(col * n + k, p * n + k);
                }
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                a[r * n + col] = f;
                if f != 0.0 {
                    for k in col + 1..n {
                        a[r * n + k] -= f * a[col * n + k];
                    }
                }
            }
        }
        Some(Self { n, lu: a, piv })
    }

    fn solve(&self, x: &mut [f64]) {
        let n = self.n;
        for col in 0..n {
            x.swap(col, self.piv[col]);
        }
        for col in 0..n {
            let xc = x[col];
            for r in col + 1..n {
                x[r] -= self.lu[r * n + col] * xc;
            }
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for k in r + 1..n {
                s -= self.lu[r * n + k] * x[k];
            }
            x[r] = s / self.lu[r * n + r];
        }
    }
}

const COARSE_SIZE: usize = 400;
const STRENGTH: f64 = 0.08;

impl Amg {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let mut levels = Vec::new();
        let mut cur = a.clone();
        while cur.rows() > COARSE_SIZE && levels.len() < 25 {
            let inv_diag: Vec<f64> = (0..cur.rows())
                .map(|i| {
                    let d = cur.diag(i);
                    if d == 0.0 {
                        0.0
                    } else {
                        1.0 / d
                    }
                })
                .collect();
            let agg = aggregate(&cur);
            let nagg = agg.iter().copied().max().map_or(0, |m| m + 1);
            if nagg == 0 || nagg >= cur.rows() {
                break;
            }
            let p0 = tentative(&agg, nagg);
            let rho = spectral_radius_dinv_a(&cur, &inv_diag);
            let omega = 4.0 / 3.0 / rho.max(1e-300);
            let p = smooth_prolongator(&cur, &inv_diag, &p0, omega);
            let r = transpose(&p, nagg);
            let coarse = spgemm(&spgemm(&r, &cur), &p);
            levels.push(Level {
                a: cur,
                p,
                r,
                inv_diag,
            });
            cur = coarse;
        }
        let n = cur.rows();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            let (c, v) = cur.row(i);
            for k in 0..c.len() {
                dense[i * n + c[k]] += v[k];
            }
        }
        let coarse = DenseLu::new(dense, n)
            .ok_or_else(|| Error::DegenerateInput("singular coarse operator".into()))?;
        Ok(Self { levels, coarse })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() + 1
    }

    fn cycle(&self, lvl: usize, b: &[f64], x: &mut [f64]) {
        if lvl == self.levels.len() {
            x.copy_from_slice(b);
            self.coarse.solve(x);
            return;
        }
        let l = &self.levels[lvl];
        let n = l.a.rows();
        gauss_seidel(&l.a, &l.inv_diag, b, x, true);
        let mut r = vec![0.0; n];
        l.a.matvec(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let nc = l.r.rows();
        let mut bc = vec![0.0; nc];
        l.r.matvec(&r, &mut bc);
        let mut xc = vec![0.0; nc];
        self.cycle(lvl + 1, &bc, &mut xc);
        let mut corr = vec![0.0; n];
        l.p.matvec(&xc, &mut corr);
        for i in 0..n {
            x[i] += corr[i];
        }
        gauss_seidel(&l.a, &l.inv_diag, b, x, false);
    }
}

impl Preconditioner for Amg {
    fn apply(&self, x: &mut [f64]) {
        let b = x.to_vec();
        x.iter_mut().for_each(|v| *v = 0.0);
        self.cycle(0, &b, x);
    }
}

fn gauss_seidel(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], x: &mut [f64], forward: bool) {
    let n = a.rows();
    let mut sweep = |i: usize| {
        let (c, v) = a.row(i);
        let mut s = b[i];
        for k in 0..c.len() {
            if c[k] != i {
                s -= v[k] * x[c[k]];
            }
        }
        x[i] = s * inv_diag[i];
    };
    if forward {
        (0..n).for_each(&mut sweep);
    } else {
        (0..n).rev().for_each(&mut sweep);
    }
}

/// Greedy aggregation on the symmetrized strength graph.
fn aggregate(a: &CsrMatrix) -> Vec<usize> {
    let n = a.rows();
    // strong neighbours (symmetrized)
    let mut strong: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let (c, v) = a.row(i);
        let dii = abs(a.diag(i));
        for k in 0..c.len() {
            let j = c[k];
            if j == i {
                continue;
            }
            let djj = abs(a.diag(j));
            if abs(v[k]) >= STRENGTH * sqrt(dii * djj) {
                strong[i].push(j);
                strong[j].push(i);
            }
        }
    }
    for s in strong.iter_mut() {
        s.sort_unstable();
        s.dedup();
    }
    const NONE: usize = usize::MAX;
    let mut agg = vec![NONE; n];
    let mut count = 0;
    // pass 1: seeds with untouched neighbourhoods
    for i in 0..n {
        if agg[i] != NONE || strong[i].iter().any(|&j| agg[j] != NONE) {
            continue;
        }
        agg[i] = count;
        for &j in &strong[i] {
            agg[j] = count;
        }
        count += 1;
    }
    // pass 2: attach to a neighbouring aggregate
    let snapshot = agg.clone();
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        if let Some(&j) = strong[i].iter().find(|&&j| snapshot[j] != NONE) {
            agg[i] = snapshot[j];
        }
    }
    // pass 3: leftovers form their own aggregates
    for i in 0..n {
        if agg[i] != NONE {
            continue;
        }
        agg[i] = count;
        for &j in &strong[i] {
            if agg[j] == NONE {
                agg[j] = count;
            }
        }
        count += 1;
    }
    agg
}

fn tentative(agg: &[usize], nagg: usize) -> CsrMatrix {
    let n = agg.len();
    let mut sizes = vec![0usize; nagg];
    for &g in agg {
        sizes[g] += 1;
    }
    let mut p = CsrMatrix::with_capacity(n, n);
    let mut row = Vec::with_capacity(1);
    for &g in agg {
        row.push((g, 1.0 / sqrt(sizes[g] as f64)));
        p.push_row(&mut row);
    }
    p
}

fn spectral_radius_dinv_a(a: &CsrMatrix, inv_diag: &[f64]) -> f64 {
    let n = a.rows();
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0)
        .collect();
    let mut y = vec![0.0; n];
    let mut rho = 1.0;
    for _ in 0..15 {
        a.matvec(&x, &mut y);
        for i in 0..n {
            y[i] *= inv_diag[i];
        }
        let ny = sqrt(y.iter().map(|v| v * v).sum());
        let nx = sqrt(x.iter().map(|v| v * v).sum());
        if ny == 0.0 || nx == 0.0 {
            break;
        }
        rho = ny / nx;
        for i in 0..n {
            x[i] = y[i] / ny;
        }
    }
    rho
}

fn smooth_prolongator(a: &CsrMatrix, inv_diag: &[f64], p0: &CsrMatrix, omega: f64) -> CsrMatrix {
    // P = P0 − ω D⁻¹ A P0
    let ap = spgemm(a, p0);
    let n = a.rows();
    let mut p = CsrMatrix::with_capacity(n, ap.cols.len() + n);
    let mut row = Vec::new();
    for i in 0..n {
        let (c, v) = p0.row(i);
        for k in 0..c.len() {
            row.push((c[k], v[k]));
        }
        let (c, v) = ap.row(i);
        for k in 0..c.len() {
            row.push((c[k], -omega * inv_diag[i] * v[k]));
        }
        p.push_row(&mut row);
    }
    p
}

fn transpose(a: &CsrMatrix, ncols: usize) -> CsrMatrix {
    let mut counts = vec![0usize; ncols + 1];
    for &c in &a.cols {
        counts[c + 1] += 1;
    }
    for i in 0..ncols {
        counts[i + 1] += counts[i];
    }
    let nnz = a.cols.len();
    let mut cols = vec![0usize; nnz];
    let mut vals = vec![0.0; nnz];
    let mut next = counts.clone();
    for i in 0..a.rows() {
        let (c, v) = a.row(i);
        for k in 0..c.len() {
            let dst = next[c[k]];
            cols[dst] = i;
            vals[dst] = v[k];
            next[c[k]] += 1;
        }
    }
    CsrMatrix {
        n: ncols,
        row_ptr: counts,
        cols,
        vals,
    }
}

/// Sparse product `A·B`.
fn spgemm(a: &CsrMatrix, b: &CsrMatrix) -> CsrMatrix {
    let ncols = b.cols.iter().copied().max().map_or(0, |m| m + 1);
    let mut marker = vec![usize::MAX; ncols];
    let mut acc = vec![0.0; ncols];
    let mut out = CsrMatrix::with_capacity(a.rows(), a.cols.len() * 4);
    let mut touched: Vec<usize> = Vec::new();
    for i in 0..a.rows() {
        let (ca, va) = a.row(i);
        for k in 0..ca.len() {
            let (cb, vb) = b.row(ca[k]);
            for q in 0..cb.len() {
                let j = cb[q];
                if marker[j] != i {
                    marker[j] = i;
                    acc[j] = 0.0;
                    touched.push(j);
                }
                acc[j] += va[k] * vb[q];
            }
        }
        touched.sort_unstable();
        for &j in &touched {
            if acc[j] != 0.0 {
                out.cols.push(j);
                out.vals.push(acc[j]);
            }
        }
        out.row_ptr.push(out.cols.len());
        touched.clear();
    }
    out.n = a.rows();
    out
}

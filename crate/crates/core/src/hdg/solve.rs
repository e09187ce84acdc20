use std::collections::HashMap;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use log::debug;
use nalgebra::{DMatrix, DVector, Dyn, LU};

use super::{HdgSystem, RowBlock, SolverKind};
use crate::error::{Error, Result};

const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// Relative residual `‖Ax - b‖ / ‖b‖` (absolute when `b = 0`).
    pub residual: f64,
    pub refinements: usize,
}

/// Global system in coordinate form.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub n: usize,
    /// `(row, col, value)`; repeated positions are summed.
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    pub row_labels: Vec<RowBlock>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative(r: &[f64], b: &[f64]) -> f64 {
    let nb = norm(b);
    if nb > 0.0 {
        norm(r) / nb
    } else {
        norm(r)
    }
}

fn sparse_lu(
    n: usize,
    entries: &[(usize, usize, f64)],
) -> Option<faer::sparse::linalg::solvers::Lu<usize, f64>> {
    let trip: Vec<Triplet<usize, usize, f64>> = entries
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip).ok()?;
    mat.sp_lu().ok()
}

fn lu_solve(lu: &faer::sparse::linalg::solvers::Lu<usize, f64>, b: &[f64]) -> Vec<f64> {
    let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    lu.solve_in_place(rhs.as_mut());
    (0..b.len()).map(|i| rhs[(i, 0)]).collect()
}

impl SparseSystem {
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let ax = self.matvec(x);
        self.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
    }

    /// Sparse LU with iterative refinement.
    pub fn solve(&self, tol: f64) -> Result<SolveReport> {
        if self.rhs.len() != self.n || self.row_labels.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "system of size {} with {} right-hand side entries and {} row labels",
                self.n,
                self.rhs.len(),
                self.row_labels.len()
            )));
        }
        let lu = sparse_lu(self.n, &self.entries).ok_or_else(|| self.diagnose())?;
        let mut x = lu_solve(&lu, &self.rhs);
        let mut r = self.residual(&x);
        let mut res = relative(&r, &self.rhs);
        let mut refinements = 0;
        while res.is_finite() && res > 1e-14 && refinements < MAX_REFINEMENTS {
            let dx = lu_solve(&lu, &r);
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let tr = self.residual(&trial);
            let tres = relative(&tr, &self.rhs);
            if !(tres < res) {
                break;
            }
            x = trial;
            r = tr;
            res = tres;
            refinements += 1;
        }
        if !res.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(self.diagnose());
        }
        if res > tol {
            return Err(match self.find_dependent_row() {
                Some(e) => e,
                None => Error::ResidualTooLarge {
                    residual: res,
                    tolerance: tol,
                },
            });
        }
        Ok(SolveReport {
            x,
            residual: res,
            refinements,
        })
    }

    fn rows(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows: Vec<HashMap<usize, f64>> = vec![HashMap::new(); self.n];
        for &(r, c, v) in &self.entries {
            *rows[r].entry(c).or_insert(0.0) += v;
        }
        rows.into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().filter(|&(_, v)| v != 0.0).collect();
                v.sort_by_key(|&(c, _)| c);
                v
            })
            .collect()
    }

    /// First empty row or exact duplicate of an earlier row.
    fn find_dependent_row(&self) -> Option<Error> {
        let mut seen: HashMap<Vec<(usize, u64)>, usize> = HashMap::new();
        for (i, row) in self.rows().into_iter().enumerate() {
            let key: Vec<(usize, u64)> = row.iter().map(|&(c, v)| (c, v.to_bits())).collect();
            if key.is_empty() || seen.contains_key(&key) {
                return Some(Error::SingularMatrix {
                    row: i,
                    block: self.row_labels[i].to_string(),
                });
            }
            seen.insert(key, i);
        }
        None
    }

    fn diagnose(&self) -> Error {
        self.find_dependent_row().unwrap_or_else(|| {
            // no structural culprit; blame the row with the largest residual of the failed solve
            let row = sparse_lu(self.n, &self.entries)
                .map(|lu| {
                    let x = lu_solve(&lu, &self.rhs);
                    let r = self.residual(&x);
                    r.iter()
                        .enumerate()
                        .max_by(|a, b| {
                            let fa = if a.1.is_finite() {
                                a.1.abs()
                            } else {
                                f64::INFINITY
                            };
                            let fb = if b.1.is_finite() {
                                b.1.abs()
                            } else {
                                f64::INFINITY
                            };
                            fa.total_cmp(&fb)
                        })
                        .map(|(i, _)| i)
                        .unwrap_or(0)
                })
                .unwrap_or(0);
            Error::SingularMatrix {
                row,
                block: self
                    .row_labels
                    .get(row)
                    .map(|l| l.to_string())
                    .unwrap_or_default(),
            }
        })
    }
}

impl HdgSystem {
    pub fn rhs(&self) -> Vec<f64> {
        let l = &self.layout;
        let mut b = vec![0.0; l.total()];
        for (t, el) in self.elements.iter().enumerate() {
            let o = l.element_offset(t);
            b[o..o + l.element_size()].copy_from_slice(el.f.as_slice());
        }
        for (e, ed) in self.edges.iter().enumerate() {
            let o = l.lambda_dof(e, 0);
            b[o..o + l.m()].copy_from_slice(ed.g.as_slice());
        }
        b
    }

    fn lambda_columns(&self, t: usize) -> Vec<usize> {
        let m = self.layout.m();
        self.triangle_edges[t]
            .iter()
            .flat_map(|&e| (0..m).map(move |j| (e, j)))
            .map(|(e, j)| self.layout.lambda_dof(e, j))
            .collect()
    }

    pub fn to_sparse(&self) -> SparseSystem {
        let l = &self.layout;
        let mut entries = Vec::new();
        let push_block = |entries: &mut Vec<(usize, usize, f64)>,
                          r0: usize,
                          cols: &dyn Fn(usize) -> usize,
                          mat: &DMatrix<f64>| {
            for j in 0..mat.ncols() {
                let c = cols(j);
                for i in 0..mat.nrows() {
                    let v = mat[(i, j)];
                    if v != 0.0 {
                        entries.push((r0 + i, c, v));
                    }
                }
            }
        };
        for (t, el) in self.elements.iter().enumerate() {
            let o = l.element_offset(t);
            push_block(&mut entries, o, &|j| o + j, &el.a);
            let lc = self.lambda_columns(t);
            push_block(&mut entries, o, &|j| lc[j], &el.b);
            for (t2, c) in &el.coupling {
                let o2 = l.element_offset(*t2);
                push_block(&mut entries, o, &|j| o2 + j, c);
            }
        }
        for (e, ed) in self.edges.iter().enumerate() {
            let r0 = l.lambda_dof(e, 0);
            if let Some(d) = &ed.d {
                push_block(&mut entries, r0, &|j| r0 + j, d);
            }
            for (t, c) in &ed.c {
                let o = l.element_offset(*t);
                push_block(&mut entries, r0, &|j| o + j, c);
            }
        }
        SparseSystem {
            n: l.total(),
            entries,
            rhs: self.rhs(),
            row_labels: self.row_labels(),
        }
    }

    /// `A x` using the block structure.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let s = l.element_size();
        let m = l.m();
        let mut y = vec![0.0; l.total()];
        let el_vec =
            |t: usize| DVector::from_column_slice(&x[l.element_offset(t)..l.element_offset(t) + s]);
        let lam_vec =
            |e: usize| DVector::from_column_slice(&x[l.lambda_dof(e, 0)..l.lambda_dof(e, 0) + m]);
        for (t, el) in self.elements.iter().enumerate() {
            let mut lam = DVector::zeros(3 * m);
            for (le, &e) in self.triangle_edges[t].iter().enumerate() {
                lam.rows_mut(le * m, m).copy_from(&lam_vec(e));
            }
            let mut r = &el.a * el_vec(t) + &el.b * lam;
            for (t2, c) in &el.coupling {
                r += c * el_vec(*t2);
            }
            let o = l.element_offset(t);
            y[o..o + s].copy_from_slice(r.as_slice());
        }
        for (e, ed) in self.edges.iter().enumerate() {
            let mut r = DVector::zeros(m);
            if let Some(d) = &ed.d {
                r += d * lam_vec(e);
            }
            for (t, c) in &ed.c {
                r += c * el_vec(*t);
            }
            let o = l.lambda_dof(e, 0);
            y[o..o + m].copy_from_slice(r.as_slice());
        }
        y
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let ax = self.matvec(x);
        self.rhs().iter().zip(&ax).map(|(b, a)| b - a).collect()
    }

    pub fn solve(&self, kind: SolverKind, tol: f64) -> Result<SolveReport> {
        match kind {
            SolverKind::Monolithic => self.to_sparse().solve(tol),
            SolverKind::Condensed => self.solve_condensed(tol),
        }
    }

    fn solve_condensed(&self, tol: f64) -> Result<SolveReport> {
        let cond = Condensed::new(self)?;
        let b = self.rhs();
        let mut x = cond.apply(&b);
        let mut r = self.residual(&x);
        let mut res = relative(&r, &b);
        let mut refinements = 0;
        while res.is_finite() && res > 1e-14 && refinements < MAX_REFINEMENTS {
            let dx = cond.apply(&r);
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let tr = self.residual(&trial);
            let tres = relative(&tr, &b);
            if !(tres < res) {
                break;
            }
            x = trial;
            r = tr;
            res = tres;
            refinements += 1;
        }
        debug!("condensed solve: residual {res:.3e} after {refinements} refinements");
        if !res.is_finite() || x.iter().any(|v| !v.is_finite()) || res > tol {
            let sparse = self.to_sparse();
            return Err(match sparse.find_dependent_row() {
                Some(e) => e,
                None if res.is_finite() => Error::ResidualTooLarge {
                    residual: res,
                    tolerance: tol,
                },
                None => sparse.diagnose(),
            });
        }
        Ok(SolveReport {
            x,
            residual: res,
            refinements,
        })
    }
}

/// Element-wise elimination of `(q, u)` onto the trace unknowns.
struct Condensed<'a> {
    sys: &'a HdgSystem,
    lus: Vec<LU<f64, Dyn, Dyn>>,
    /// Region-one interface elements last: their equations read the
    /// flux of region-two neighbours.
    order: Vec<usize>,
    /// Trace edges each element's solution depends on.
    cols: Vec<Vec<usize>>,
    /// `A⁻¹ B` restricted to `cols`.
    z: Vec<DMatrix<f64>>,
    schur: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl<'a> Condensed<'a> {
    fn new(sys: &'a HdgSystem) -> Result<Self> {
        let l = &sys.layout;
        let m = l.m();
        let nt = l.num_elements;
        let mut lus = Vec::with_capacity(nt);
        for (t, el) in sys.elements.iter().enumerate() {
            let lu = el.a.clone().lu();
            if !lu.is_invertible() {
                return Err(Error::SingularMatrix {
                    row: l.element_offset(t),
                    block: RowBlock::Hdg2.to_string(),
                });
            }
            lus.push(lu);
        }
        let mut order: Vec<usize> = (0..nt)
            .filter(|&t| sys.elements[t].coupling.is_empty())
            .collect();
        order.extend((0..nt).filter(|&t| !sys.elements[t].coupling.is_empty()));

        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); nt];
        let mut z: Vec<DMatrix<f64>> = vec![DMatrix::zeros(0, 0); nt];
        for &t in &order {
            let el = &sys.elements[t];
            let mut c: Vec<usize> = sys.triangle_edges[t].to_vec();
            for (t2, _) in &el.coupling {
                for &e in &cols[*t2] {
                    if !c.contains(&e) {
                        c.push(e);
                    }
                }
            }
            let mut rhs = DMatrix::<f64>::zeros(l.element_size(), c.len() * m);
            rhs.columns_mut(0, 3 * m).copy_from(&el.b);
            for (t2, a12) in &el.coupling {
                let p = a12 * &z[*t2];
                for (j2, e) in cols[*t2].iter().enumerate() {
                    let j = c.iter().position(|x| x == e).unwrap();
                    let mut dst = rhs.columns_mut(j * m, m);
                    dst -= p.columns(j2 * m, m);
                }
            }
            z[t] = lus[t].solve(&rhs).ok_or(Error::SingularMatrix {
                row: l.element_offset(t),
                block: RowBlock::Hdg2.to_string(),
            })?;
            cols[t] = c;
        }

        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (e, ed) in sys.edges.iter().enumerate() {
            if let Some(d) = &ed.d {
                for i in 0..m {
                    for j in 0..m {
                        entries.push((e * m + i, e * m + j, d[(i, j)]));
                    }
                }
            }
            for (t, c) in &ed.c {
                let p = c * &z[*t];
                for (jc, &e2) in cols[*t].iter().enumerate() {
                    for i in 0..m {
                        for j in 0..m {
                            let v = p[(i, jc * m + j)];
                            if v != 0.0 {
                                entries.push((e * m + i, e2 * m + j, -v));
                            }
                        }
                    }
                }
            }
        }
        let schur =
            sparse_lu(l.num_edges * m, &entries).ok_or_else(|| sys.to_sparse().diagnose())?;
        Ok(Condensed {
            sys,
            lus,
            order,
            cols,
            z,
            schur,
        })
    }

    /// Solves `A x = b` for a full-length right-hand side.
    fn apply(&self, b: &[f64]) -> Vec<f64> {
        let sys = self.sys;
        let l = &sys.layout;
        let s = l.element_size();
        let m = l.m();
        let nt = l.num_elements;
        let mut zf: Vec<DVector<f64>> = vec![DVector::zeros(0); nt];
        for &t in &self.order {
            let o = l.element_offset(t);
            let mut rhs = DVector::from_column_slice(&b[o..o + s]);
            for (t2, a12) in &sys.elements[t].coupling {
                rhs -= a12 * &zf[*t2];
            }
            zf[t] = self.lus[t]
                .solve(&rhs)
                .unwrap_or_else(|| DVector::from_element(s, f64::NAN));
        }
        let mut g: Vec<f64> = b[l.num_element_dofs()..].to_vec();
        for (e, ed) in sys.edges.iter().enumerate() {
            for (t, c) in &ed.c {
                let v = c * &zf[*t];
                for i in 0..m {
                    g[e * m + i] -= v[i];
                }
            }
        }
        let lam = lu_solve(&self.schur, &g);
        let mut x = vec![0.0; l.total()];
        for t in 0..nt {
            let mut lv = DVector::zeros(self.cols[t].len() * m);
            for (j, &e) in self.cols[t].iter().enumerate() {
                for i in 0..m {
                    lv[j * m + i] = lam[e * m + i];
                }
            }
            let xt = &zf[t] - &self.z[t] * lv;
            let o = l.element_offset(t);
            x[o..o + s].copy_from_slice(xt.as_slice());
        }
        x[l.num_element_dofs()..].copy_from_slice(&lam);
        x
    }
}

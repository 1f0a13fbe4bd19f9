//! Least-squares substrate: the regression problem, a cached QR
//! factorization, hat-matrix products, leverages and the reduced model.
//!
//! Case indices are 0-based throughout the API.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, Dyn, QR};

use crate::error::{IpodError, Result};

/// Relative size below which a diagonal entry of R marks a dependent column.
pub const RANK_TOL: f64 = 1e-10;

/// Design matrix and response. The intercept column, when requested, is
/// stored explicitly as column 0 of `x`.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    x: DMatrix<f64>,
    y: DVector<f64>,
    intercept: bool,
}

impl RegressionProblem {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, intercept: bool) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(IpodError::Dimension {
                context: "regress",
                expected: x.nrows(),
                found: y.len(),
            });
        }
        let x = if intercept {
            let n = x.nrows();
            let mut aug = DMatrix::from_element(n, x.ncols() + 1, 1.0);
            aug.columns_mut(1, x.ncols()).copy_from(&x);
            aug
        } else {
            x
        };
        if x.nrows() <= x.ncols() {
            return Err(IpodError::TooFewCases {
                n: x.nrows(),
                p: x.ncols(),
            });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(crate::error::domain(
                "regress",
                "design and response must be finite",
            ));
        }
        Ok(RegressionProblem { x, y, intercept })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Column count after augmentation.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Same design, different response.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(IpodError::Dimension {
                context: "regress",
                expected: self.n(),
                found: y.len(),
            });
        }
        Ok(RegressionProblem {
            x: self.x.clone(),
            y,
            intercept: self.intercept,
        })
    }

    pub fn factor(&self) -> Result<QrModel> {
        QrModel::new(&self.x)
    }
}

/// Thin QR factorization X = QR with leverages and a lazily built
/// orthonormal basis of the complement of col(X).
pub struct QrModel {
    qr: QR<f64, Dyn, Dyn>,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    leverage: DVector<f64>,
    complement: OnceLock<DMatrix<f64>>,
}

impl std::fmt::Debug for QrModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QrModel")
            .field("n", &self.n())
            .field("p", &self.p())
            .finish()
    }
}

impl QrModel {
    pub fn new(x: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = x.shape();
        if n <= p {
            return Err(IpodError::TooFewCases { n, p });
        }
        let qr = x.clone().qr();
        let r = qr.r();
        let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..p {
            if r[(j, j)].abs() <= RANK_TOL * scale || scale == 0.0 {
                return Err(IpodError::SingularDesign { column: j });
            }
        }
        let q = qr.q();
        let leverage = DVector::from_iterator(n, q.row_iter().map(|row| row.norm_squared()));
        Ok(QrModel {
            qr,
            q,
            r,
            leverage,
            complement: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn p(&self) -> usize {
        self.q.ncols()
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Diagonal of the hat matrix.
    pub fn leverages(&self) -> &DVector<f64> {
        &self.leverage
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() == self.n() {
            Ok(())
        } else {
            Err(IpodError::Dimension {
                context: "regress",
                expected: self.n(),
                found: v.len(),
            })
        }
    }

    /// Solves R β = Qᵀ y.
    pub fn ols_coef(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(y)?;
        Ok(self.ols_unchecked(y))
    }

    pub(crate) fn ols_unchecked(&self, y: &DVector<f64>) -> DVector<f64> {
        let qty = self.q.tr_mul(y);
        self.r
            .solve_upper_triangular(&qty)
            .expect("R has a nonzero diagonal by construction")
    }

    /// H v = Q (Qᵀ v), without forming H.
    pub fn hat_apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(v)?;
        Ok(self.hat_unchecked(v))
    }

    pub(crate) fn hat_unchecked(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.q * self.q.tr_mul(v)
    }

    /// (I − H) v.
    pub fn residual_apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(v)?;
        Ok(v - self.hat_unchecked(v))
    }

    /// n × (n − p) orthonormal basis Uc with Ucᵀ X = 0, built once from the
    /// full Householder factorization.
    pub fn complement(&self) -> &DMatrix<f64> {
        self.complement.get_or_init(|| {
            let (n, p) = (self.n(), self.p());
            let mut qt = DMatrix::<f64>::identity(n, n);
            self.qr.q_tr_mul(&mut qt);
            qt.rows(p, n - p).transpose()
        })
    }

    /// A = Ucᵀ and ỹ = Ucᵀ y: the model with β projected out.
    pub fn reduced_model(&self, y: &DVector<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
        self.check_len(y)?;
        let uc = self.complement();
        Ok((uc.transpose(), uc.tr_mul(y)))
    }
}

/// Externally studentized residual of case `i`: the prediction error of a
/// fit that leaves case `i` out, divided by its estimated standard error.
pub fn studentized_residual(problem: &RegressionProblem, i: usize) -> Result<f64> {
    let (n, p) = (problem.n(), problem.p());
    if i >= n {
        return Err(crate::error::domain(
            "regress",
            format!("case index {i} out of range for n = {n}"),
        ));
    }
    if n - 1 <= p {
        return Err(IpodError::TooFewCases { n: n - 1, p });
    }
    let keep: Vec<usize> = (0..n).filter(|&k| k != i).collect();
    let x_loo = problem.x().select_rows(&keep);
    let y_loo = problem.y().select_rows(&keep);
    let model = QrModel::new(&x_loo)?;
    let beta = model.ols_unchecked(&y_loo);
    let resid = &y_loo - &x_loo * &beta;
    let dof = (n - 1 - p) as f64;
    let sigma = (resid.norm_squared() / dof).sqrt();
    let xi = problem.x().row(i).transpose();
    let z = model
        .r()
        .tr_solve_lower_triangular(&xi)
        .expect("R has a nonzero diagonal by construction");
    let pred_err = problem.y()[i] - xi.dot(&beta);
    Ok(pred_err / (sigma * (1.0 + z.norm_squared()).sqrt()))
}

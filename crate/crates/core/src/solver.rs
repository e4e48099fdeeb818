//! Bordered (saddle-point) linear systems
//!
//! ```text
//! [ core        border ] [h]   [rhs_top   ]
//! [ row_borderᵀ corner ] [b] = [rhs_bottom]
//! ```
//!
//! `core` is symmetric positive definite whenever a positive regularizer is
//! folded into it, so the solve goes through a Cholesky factorization of
//! `core` and eliminates the scalar unknown through its Schur complement.
//! If the factorization breaks down, the full `(n+1)×(n+1)` matrix is solved
//! by LU with partial pivoting instead.

use alloc::format;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Schur complements below this magnitude are treated as singular.
pub const SCHUR_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct BorderedSystem {
    pub core: Matrix,
    /// Column border multiplying the scalar unknown.
    pub border: Vector,
    /// Coefficients of the bottom row.
    pub row_border: Vector,
    pub corner: f64,
    pub rhs_top: Vector,
    pub rhs_bottom: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    CholeskySchur,
    LuFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BorderedSolution {
    pub h: Vector,
    pub b: f64,
    pub method: SolveMethod,
}

impl BorderedSystem {
    /// System whose bottom row equals its column border and whose corner is zero.
    pub fn symmetric(core: Matrix, border: Vector, rhs_top: Vector, rhs_bottom: f64) -> Self {
        BorderedSystem {
            row_border: border.clone(),
            core,
            border,
            corner: 0.0,
            rhs_top,
            rhs_bottom,
        }
    }

    pub fn dim(&self) -> usize {
        self.core.nrows()
    }

    fn check_shapes(&self) -> Result<()> {
        let n = self.core.nrows();
        if self.core.ncols() != n {
            return Err(Error::dim("bordered core (square)", n, self.core.ncols()));
        }
        for (what, len) in [
            ("bordered border", self.border.len()),
            ("bordered row border", self.row_border.len()),
            ("bordered rhs", self.rhs_top.len()),
        ] {
            if len != n {
                return Err(Error::dim(what, n, len));
            }
        }
        if n == 0 {
            return Err(Error::Config("bordered system with empty core".into()));
        }
        Ok(())
    }

    /// The full `(n+1)×(n+1)` matrix and right-hand side.
    pub fn to_full(&self) -> (Matrix, Vector) {
        let n = self.dim();
        let mut m = Matrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&self.core);
        for i in 0..n {
            m[(i, n)] = self.border[i];
            m[(n, i)] = self.row_border[i];
        }
        m[(n, n)] = self.corner;
        let mut rhs = Vector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&self.rhs_top);
        rhs[n] = self.rhs_bottom;
        (m, rhs)
    }

    /// `||M x - rhs||_inf / (||M||_inf ||x||_inf + ||rhs||_inf)` for the full system.
    pub fn relative_residual(&self, h: &Vector, b: f64) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        let mut norm_m: f64 = 0.0;
        for i in 0..n {
            let row = self.core.row(i);
            let r = row.dot(&h.transpose()) + self.border[i] * b - self.rhs_top[i];
            worst = worst.max(r.abs());
            norm_m = norm_m.max(row.iter().map(|v| v.abs()).sum::<f64>() + self.border[i].abs());
        }
        let r = self.row_border.dot(h) + self.corner * b - self.rhs_bottom;
        worst = worst.max(r.abs());
        norm_m =
            norm_m.max(self.row_border.iter().map(|v| v.abs()).sum::<f64>() + self.corner.abs());
        let norm_x = h.amax().max(b.abs());
        let norm_rhs = self.rhs_top.amax().max(self.rhs_bottom.abs());
        let denom = norm_m * norm_x + norm_rhs;
        if denom == 0.0 {
            worst
        } else {
            worst / denom
        }
    }
}

pub fn solve_bordered(sys: &BorderedSystem) -> Result<BorderedSolution> {
    sys.check_shapes()?;
    match sys.core.clone().cholesky() {
        Some(chol) => {
            let y_rhs = chol.solve(&sys.rhs_top);
            let y_border = chol.solve(&sys.border);
            let schur = sys.row_border.dot(&y_border) - sys.corner;
            if !(schur.abs() >= SCHUR_TOLERANCE) {
                return Err(Error::SingularSystem(format!(
                    "Schur complement {schur:e} below tolerance {SCHUR_TOLERANCE:e}"
                )));
            }
            let b = (sys.row_border.dot(&y_rhs) - sys.rhs_bottom) / schur;
            let h = y_rhs - y_border * b;
            Ok(BorderedSolution {
                h,
                b,
                method: SolveMethod::CholeskySchur,
            })
        }
        None => solve_full_lu(sys),
    }
}

fn solve_full_lu(sys: &BorderedSystem) -> Result<BorderedSolution> {
    let n = sys.dim();
    let (m, rhs) = sys.to_full();
    let x = m.lu().solve(&rhs).ok_or_else(|| {
        Error::SingularSystem(format!(
            "Cholesky failed and LU found a zero pivot (n = {n})"
        ))
    })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem(format!(
            "LU produced non-finite values (n = {n})"
        )));
    }
    Ok(BorderedSolution {
        h: x.rows(0, n).into_owned(),
        b: x[n],
        method: SolveMethod::LuFallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> Vector {
        Vector::from_element(n, 1.0)
    }

    #[test]
    fn identity_core() {
        let sys = BorderedSystem::symmetric(Matrix::identity(2, 2), ones(2), ones(2), 2.0);
        let s = solve_bordered(&sys).unwrap();
        assert!((s.h[0] - 1.0).abs() < 1e-15 && (s.h[1] - 1.0).abs() < 1e-15);
        assert!(s.b.abs() < 1e-15);
        assert_eq!(s.method, SolveMethod::CholeskySchur);
    }

    #[test]
    fn scaled_identity_core() {
        // 2h1 + b = 0, 2h2 + b = 0, h1 + h2 = 1  =>  h = (0.5, 0.5), b = -1
        let sys =
            BorderedSystem::symmetric(Matrix::identity(2, 2) * 2.0, ones(2), Vector::zeros(2), 1.0);
        let s = solve_bordered(&sys).unwrap();
        assert!((s.h[0] - 0.5).abs() < 1e-15 && (s.h[1] - 0.5).abs() < 1e-15);
        assert!((s.b + 1.0).abs() < 1e-15);
        assert!(sys.relative_residual(&s.h, s.b) < 1e-15);
    }

    #[test]
    fn indefinite_core_falls_back_to_lu() {
        let core = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let sys =
            BorderedSystem::symmetric(core, Vector::from_vec(alloc::vec![1.0, 2.0]), ones(2), 3.0);
        let s = solve_bordered(&sys).unwrap();
        assert_eq!(s.method, SolveMethod::LuFallback);
        assert!(sys.relative_residual(&s.h, s.b) < 1e-12);
    }

    #[test]
    fn zero_border_is_singular() {
        let sys = BorderedSystem::symmetric(Matrix::identity(3, 3), Vector::zeros(3), ones(3), 1.0);
        assert!(matches!(
            solve_bordered(&sys),
            Err(Error::SingularSystem(_))
        ));
        // and with an indefinite core both routes fail
        let core = Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, -1.0]);
        let sys = BorderedSystem::symmetric(core, Vector::zeros(2), ones(2), 1.0);
        assert!(matches!(
            solve_bordered(&sys),
            Err(Error::SingularSystem(_))
        ));
    }

    #[test]
    fn shape_errors() {
        let mut sys = BorderedSystem::symmetric(Matrix::identity(2, 2), ones(3), ones(2), 1.0);
        assert!(matches!(solve_bordered(&sys), Err(Error::Dimension { .. })));
        sys.border = ones(2);
        sys.row_border = ones(1);
        assert!(matches!(solve_bordered(&sys), Err(Error::Dimension { .. })));
    }

    #[test]
    fn asymmetric_row_border() {
        // core h + 2*1 b = rhs ; 1ᵀh = 3
        let sys = BorderedSystem {
            core: Matrix::identity(3, 3) * 4.0,
            border: ones(3) * 2.0,
            row_border: ones(3),
            corner: 0.0,
            rhs_top: Vector::from_vec(alloc::vec![1.0, 2.0, 3.0]),
            rhs_bottom: 3.0,
        };
        let s = solve_bordered(&sys).unwrap();
        assert!((s.h.sum() - 3.0).abs() < 1e-14);
        assert!(sys.relative_residual(&s.h, s.b) < 1e-15);
    }
}

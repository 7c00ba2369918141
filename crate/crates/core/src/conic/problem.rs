//! Conic problem container: maximize `obj · x` subject to `A x + s = b`,
//! `s` in a product of zero / nonnegative / second-order / exponential cones,
//! with an optional set of binary variables.

use super::cones::ConeTag;
use crate::error::Error;
use crate::Result;
use serde::Serialize;

/// Affine expression `sum coeff_i * x_i + constant`.
#[derive(Debug, Clone, Default)]
pub struct Expr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Self { terms: vec![], constant: c }
    }

    pub fn var(col: usize) -> Self {
        Self { terms: vec![(col, 1.0)], constant: 0.0 }
    }

    pub fn term(col: usize, coeff: f64) -> Self {
        Self { terms: vec![(col, coeff)], constant: 0.0 }
    }

    pub fn plus(mut self, other: Expr) -> Self {
        self.terms.extend(other.terms);
        self.constant += other.constant;
        self
    }

    pub fn plus_term(mut self, col: usize, coeff: f64) -> Self {
        self.terms.push((col, coeff));
        self
    }

    pub fn scaled(mut self, a: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= a;
        }
        self.constant *= a;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConeBlock {
    pub tag: ConeTag,
    pub dim: usize,
}

/// Real-valued conic program with binary markings.
#[derive(Debug, Clone, Default)]
pub struct ConicProblem {
    n_vars: usize,
    objective: Vec<f64>,
    /// Row-major sparse A: per row a list of (col, coeff).
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    cones: Vec<ConeBlock>,
    binary_idx: Vec<usize>,
    names: Vec<String>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn cones(&self) -> &[ConeBlock] {
        &self.cones
    }

    pub fn binary_idx(&self) -> &[usize] {
        &self.binary_idx
    }

    pub fn add_var(&mut self, name: &str) -> usize {
        self.n_vars += 1;
        self.objective.push(0.0);
        self.names.push(name.to_string());
        self.n_vars - 1
    }

    pub fn add_vars(&mut self, count: usize, name: &str) -> Vec<usize> {
        (0..count).map(|i| self.add_var(&format!("{name}[{i}]"))).collect()
    }

    /// Sets the (maximize) objective coefficient of a variable.
    pub fn set_objective(&mut self, col: usize, w: f64) {
        self.objective[col] = w;
    }

    /// Marks a variable binary and adds its 0 <= x <= 1 box rows.
    pub fn mark_binary(&mut self, col: usize) {
        self.binary_idx.push(col);
        self.add_leq(Expr::term(col, -1.0), 0.0); // x >= 0
        self.add_leq(Expr::var(col), 1.0); // x <= 1
    }

    fn push_row(&mut self, expr: &Expr, rhs: f64) {
        // Row stores A with s = b - A x, so constants move to the rhs.
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(expr.terms.len());
        for &(c, v) in &expr.terms {
            assert!(c < self.n_vars, "column {c} out of range");
            if v != 0.0 {
                row.push((c, v));
            }
        }
        self.rows.push(row);
        self.b.push(rhs - expr.constant);
    }

    /// `expr == rhs` (zero cone).
    pub fn add_eq(&mut self, expr: Expr, rhs: f64) {
        self.push_row(&expr, rhs);
        self.cones.push(ConeBlock { tag: ConeTag::Zero, dim: 1 });
    }

    /// `expr <= rhs` (nonnegative cone).
    pub fn add_leq(&mut self, expr: Expr, rhs: f64) {
        self.push_row(&expr, rhs);
        self.cones.push(ConeBlock { tag: ConeTag::NonNeg, dim: 1 });
    }

    /// Pushes a row whose slack equals the affine expression:
    /// `s = b - A x = expr`.
    fn push_cone_entry(&mut self, expr: Expr) {
        self.push_row(&expr.scaled(-1.0), 0.0);
    }

    /// `head >= || tail ||` over affine expressions (second-order cone).
    pub fn add_soc(&mut self, head: Expr, tail: Vec<Expr>) {
        let dim = 1 + tail.len();
        assert!(dim >= 2, "soc needs at least one tail entry");
        self.push_cone_entry(head);
        for t in tail {
            self.push_cone_entry(t);
        }
        self.cones.push(ConeBlock { tag: ConeTag::Soc, dim });
    }

    /// `(x, y, z)` in the exponential cone `y e^{x/y} <= z`.
    pub fn add_exp(&mut self, x: Expr, y: Expr, z: Expr) {
        for e in [x, y, z] {
            self.push_cone_entry(e);
        }
        self.cones.push(ConeBlock { tag: ConeTag::Exp, dim: 3 });
    }

    /// Structural sanity checks (cone dims, index ranges).
    pub fn validate(&self) -> Result<()> {
        let total: usize = self.cones.iter().map(|c| c.dim).sum();
        if total != self.b.len() {
            return Err(Error::Conic(format!(
                "cone dims sum to {total} but {} rows present",
                self.b.len()
            )));
        }
        for c in &self.cones {
            match c.tag {
                ConeTag::Exp if c.dim != 3 => {
                    return Err(Error::Conic("exp cone must have dim 3".into()))
                }
                ConeTag::Soc if c.dim < 2 => {
                    return Err(Error::Conic("soc must have dim >= 2".into()))
                }
                _ => {}
            }
        }
        for row in &self.rows {
            for &(c, v) in row {
                if c >= self.n_vars {
                    return Err(Error::Conic(format!("column {c} out of range")));
                }
                if !v.is_finite() {
                    return Err(Error::Conic("non-finite coefficient".into()));
                }
            }
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Conic("non-finite rhs".into()));
        }
        Ok(())
    }

    /// Objective value of a candidate point (maximize orientation).
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Self-describing JSON dump for debugging.
    pub fn dump_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            n_vars: usize,
            variables: &'a [String],
            objective: &'a [f64],
            binary_idx: &'a [usize],
            cones: &'a [ConeBlock],
            rows: &'a [Vec<(usize, f64)>],
            rhs: &'a [f64],
        }
        serde_json::to_string_pretty(&Dump {
            n_vars: self.n_vars,
            variables: &self.names,
            objective: &self.objective,
            binary_idx: &self.binary_idx,
            cones: &self.cones,
            rows: &self.rows,
            rhs: &self.b,
        })
        .expect("dump serialization")
    }
}

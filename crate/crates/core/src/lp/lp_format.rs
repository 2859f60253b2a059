//! CPLEX LP text output for cross-checking models with external solvers.
//!
//! Rows and variables are written in model order and coefficients use the
//! shortest round-trip decimal form, so equal models give equal text.

use std::fmt::Write;

use super::{LpModel, Sense};
use crate::edges::pairs;

const TERMS_PER_LINE: usize = 8;

/// `x_i_j` for every pair `i < j` of `n` vertices, in variable order.
pub fn pair_names(n: usize) -> Vec<String> {
    pairs(n)
        .into_iter()
        .map(|(i, j)| format!("x_{i}_{j}"))
        .collect()
}

fn push_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut count = 0;
    for (a, name) in terms {
        if count > 0 && count % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        if count == 0 && sign == '+' {
            let _ = write!(out, " {} {name}", a.abs());
        } else {
            let _ = write!(out, " {sign} {} {name}", a.abs());
        }
        count += 1;
    }
    if count == 0 {
        out.push_str(" 0");
    }
}

/// The model in CPLEX LP format with the given variable names.
///
/// Panics if `names` does not have one entry per variable.
pub fn to_lp_text(model: &LpModel, names: &[String]) -> String {
    assert_eq!(names.len(), model.var_count(), "one name per variable");
    let mut out = String::from("\\ combgap relaxation model\nMinimize\n obj:");
    push_terms(
        &mut out,
        model
            .objective
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(j, &c)| (c, names[j].clone())),
    );
    out.push_str("\nSubject To\n");
    for (r, row) in model.rows.iter().enumerate() {
        let _ = write!(out, " r{r}:");
        push_terms(
            &mut out,
            row.coeffs.iter().map(|&(j, a)| (a, names[j].clone())),
        );
        let op = match row.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (j, name) in names.iter().enumerate() {
        let (l, u) = (model.lower[j], model.upper[j]);
        let _ = if l == u {
            writeln!(out, " {name} = {l}")
        } else if u.is_infinite() {
            writeln!(out, " {name} >= {l}")
        } else {
            writeln!(out, " {l} <= {name} <= {u}")
        };
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{relaxation_model, Cut, CutPool, EdgeFixings};

    #[test]
    fn triangle_model_text() {
        let costs = [1.0, 2.0, 1.5];
        let model = relaxation_model(
            &costs,
            3,
            &EdgeFixings::new().exclude(0, 2),
            &CutPool::new(),
        );
        let text = to_lp_text(&model, &pair_names(3));
        assert!(text.starts_with(
            "\\ combgap relaxation model\nMinimize\n obj: 1 x_0_1 + 2 x_0_2 + 1.5 x_1_2\n"
        ));
        assert!(text.contains(" r0: 1 x_0_1 + 1 x_0_2 = 2\n"));
        assert!(text.contains(" x_0_2 = 0\n"));
        assert!(text.contains(" 0 <= x_0_1 <= 1\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn text_is_deterministic_and_wraps() {
        let n = 9;
        let costs: Vec<f64> = (0..n * (n - 1) / 2).map(|i| 0.1 * i as f64 + 0.3).collect();
        let mut pool = CutPool::new();
        pool.insert(Cut::subtour(n, &[0, 1, 2, 3]));
        let model = relaxation_model(&costs, n, &EdgeFixings::new(), &pool);
        let a = to_lp_text(&model, &pair_names(n));
        assert_eq!(a, to_lp_text(&model, &pair_names(n)));
        assert!(a.lines().all(|l| l.len() < 510));
        assert_eq!(
            a.lines().filter(|l| l.starts_with(" r")).count(),
            model.rows.len()
        );
    }
}

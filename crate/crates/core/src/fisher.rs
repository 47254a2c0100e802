//! Fisher separability predicate.

use ndarray::{ArrayView1, ArrayView2};

/// True iff `(x, x) > kappa * (x, y)` for every row `y` of `others`.
///
/// With `kappa = 1` this is plain Fisher separability of the point `x` from
/// the set; smaller `kappa` tightens the requirement. The check over an empty
/// set is vacuously true.
pub fn fisher_separable(x: ArrayView1<'_, f64>, others: ArrayView2<'_, f64>, kappa: f64) -> bool {
    let xx = x.dot(&x);
    others.rows().into_iter().all(|y| xx > kappa * x.dot(&y))
}

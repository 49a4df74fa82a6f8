use nalgebra::{DMatrix, DVector};

/// Lawson–Hanson active-set solution of `min ‖A λ − b‖₂` over `λ ≥ 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    if n == 0 {
        return x;
    }
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    let mut passive = vec![false; n];
    let max_outer = 3 * n + 10;
    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else {
            break;
        };
        passive[j] = true;
        loop {
            let cols: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = a.select_columns(&cols);
            let z_sub = match sub.clone().svd(true, true).solve(b, 1e-14) {
                Ok(z) => z,
                Err(_) => return x,
            };
            let mut z = DVector::zeros(n);
            for (idx, &k) in cols.iter().enumerate() {
                z[k] = z_sub[idx];
            }
            if cols.iter().all(|&k| z[k] > 0.0) {
                x = z;
                break;
            }
            // step back to the boundary of the feasible region
            let mut alpha = f64::INFINITY;
            for &k in &cols {
                if z[k] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z[k]));
                }
            }
            x += (z - &x) * alpha;
            for &k in &cols {
                if x[k] <= tol {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

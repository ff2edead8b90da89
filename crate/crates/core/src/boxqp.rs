//! Minimisation of a quadratic ½cᵀHc + bᵀc over the box [-1, 1]^n by
//! enumerating the faces of the box.

/// Returns the minimiser and the minimum value.
pub fn minimize_box_qp(h: &[Vec<f64>], b: &[f64]) -> (Vec<f64>, f64) {
    let n = b.len();
    assert!(n <= 12, "face enumeration is exponential in the dimension");
    let value = |c: &[f64]| -> f64 {
        let mut v = 0.0;
        for i in 0..n {
            v += b[i] * c[i];
            for j in 0..n {
                v += 0.5 * c[i] * h[i][j] * c[j];
            }
        }
        v
    };
    let faces = 3usize.pow(n as u32);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut state = vec![0u8; n];
    for code in 0..faces {
        let mut k = code;
        for s in state.iter_mut() {
            *s = (k % 3) as u8;
            k /= 3;
        }
        // 0 = free, 1 = at -1, 2 = at +1
        let mut c = vec![0.0; n];
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 0).collect();
        for i in 0..n {
            c[i] = match state[i] {
                1 => -1.0,
                2 => 1.0,
                _ => 0.0,
            };
        }
        if !free.is_empty() {
            let m = free.len();
            let mut a = vec![vec![0.0; m]; m];
            let mut rhs = vec![0.0; m];
            for (p, &i) in free.iter().enumerate() {
                rhs[p] = -b[i];
                for j in 0..n {
                    if state[j] != 0 {
                        rhs[p] -= h[i][j] * c[j];
                    }
                }
                for (q, &j) in free.iter().enumerate() {
                    a[p][q] = h[i][j];
                }
            }
            let Some(x) = cholesky_solve(a, rhs) else {
                continue;
            };
            if x.iter().any(|v| v.abs() > 1.0 + 1e-12) {
                continue;
            }
            for (p, &i) in free.iter().enumerate() {
                c[i] = x[p].clamp(-1.0, 1.0);
            }
        }
        let v = value(&c);
        if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
            best = Some((c, v));
        }
    }
    best.expect("vertices are always feasible")
}

// Solves A x = r when A is symmetric positive definite.
fn cholesky_solve(mut a: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let m = r.len();
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for j in 0..m {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if !(d > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..m {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    for i in 0..m {
        for k in 0..i {
            r[i] -= a[i][k] * r[k];
        }
        r[i] /= a[i][i];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            r[i] -= a[k][i] * r[k];
        }
        r[i] /= a[i][i];
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_and_corner() {
        let h = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
        let (c, v) = minimize_box_qp(&h, &[-0.5, 0.2]);
        assert!((c[0] - 0.25).abs() < 1e-15 && (c[1] + 0.1).abs() < 1e-15);
        assert!((v + 0.0725).abs() < 1e-15);
        let (c, _) = minimize_box_qp(&h, &[-5.0, 5.0]);
        assert_eq!(c, vec![1.0, -1.0]);
    }

    #[test]
    fn indefinite_goes_to_boundary() {
        let h = vec![vec![-1.0, 0.0], vec![0.0, 1.0]];
        let (c, _) = minimize_box_qp(&h, &[0.1, 0.0]);
        assert_eq!(c[0], -1.0);
        assert!(c[1].abs() < 1e-15);
    }

    #[test]
    fn matches_dense_grid() {
        let h = vec![vec![1.3, 0.9, -0.2], vec![0.9, 0.8, 0.1], vec![-0.2, 0.1, 0.5]];
        let b = [0.3, -0.7, 0.05];
        let (_, v) = minimize_box_qp(&h, &b);
        let n = 81;
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = [
                        -1.0 + 2.0 * i as f64 / (n - 1) as f64,
                        -1.0 + 2.0 * j as f64 / (n - 1) as f64,
                        -1.0 + 2.0 * k as f64 / (n - 1) as f64,
                    ];
                    let mut e = 0.0;
                    for p in 0..3 {
                        e += b[p] * c[p];
                        for q in 0..3 {
                            e += 0.5 * c[p] * h[p][q] * c[q];
                        }
                    }
                    best = best.min(e);
                }
            }
        }
        assert!(v <= best + 1e-14);
        assert!(best - v < 1e-3);
    }
}

use super::poly::MultiPoly;

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(m: &[Vec<MultiPoly>]) -> MultiPoly {
    let n = m.len();
    if n == 0 {
        return MultiPoly::one();
    }
    let mut a: Vec<Vec<MultiPoly>> = m.to_vec();
    let mut negate = false;
    let mut prev = MultiPoly::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return MultiPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = t.div_exact(&prev).expect("Bareiss division is exact");
            }
            a[i][k] = MultiPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Resultant of `a` and `b` with respect to `var`, via the Sylvester matrix.
pub fn resultant(a: &MultiPoly, b: &MultiPoly, var: &str) -> MultiPoly {
    if a.is_zero() || b.is_zero() {
        return MultiPoly::zero();
    }
    let da = a.degree(var) as usize;
    let db = b.degree(var) as usize;
    if da == 0 {
        return a.pow(db as u32);
    }
    if db == 0 {
        return b.pow(da as u32);
    }
    let ca = a.coeffs_in(var);
    let cb = b.coeffs_in(var);
    let n = da + db;
    let mut m = vec![vec![MultiPoly::zero(); n]; n];
    for r in 0..db {
        for (i, c) in ca.iter().enumerate() {
            m[r][r + da - i] = c.clone();
        }
    }
    for r in 0..da {
        for (i, c) in cb.iter().enumerate() {
            m[db + r][r + db - i] = c.clone();
        }
    }
    determinant(&m)
}

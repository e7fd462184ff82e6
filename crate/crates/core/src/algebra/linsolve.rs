use super::ratfunc::RatFunc;

/// Solution set of `A x = b`: `particular + span(nullspace)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionSpace {
    pub particular: Vec<RatFunc>,
    pub nullspace: Vec<Vec<RatFunc>>,
    /// Columns left free in the reduced echelon form, one per nullspace vector.
    pub free_columns: Vec<usize>,
    /// `(row-echelon pivot column)` for each pivot, in order.
    pub pivot_columns: Vec<usize>,
}

impl SolutionSpace {
    pub fn is_unique(&self) -> bool {
        self.nullspace.is_empty()
    }
}

fn complexity(r: &RatFunc) -> (u32, usize) {
    (
        r.num().total_degree() + r.den().total_degree(),
        r.num().num_terms() + r.den().num_terms(),
    )
}

/// Gauss-Jordan elimination over normalized rational functions.
///
/// Free variables are set to zero in the particular solution. Among candidate
/// pivots in a column the entry of smallest total degree is chosen, which
/// keeps intermediate fractions small for the systems arising here.
/// Returns `None` when the system is inconsistent.
pub fn solve_linear_system(a: &[Vec<RatFunc>], b: &[RatFunc]) -> Option<SolutionSpace> {
    let rows = a.len();
    assert_eq!(rows, b.len(), "matrix and right-hand side disagree");
    let cols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut m: Vec<Vec<RatFunc>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), cols, "ragged matrix");
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivot_columns = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows)
            .filter(|&i| !m[i][c].is_zero())
            .min_by_key(|&i| complexity(&m[i][c]));
        let Some(p) = best else { continue };
        m.swap(r, p);
        let inv = m[r][c].inv().expect("pivot is non-zero");
        if !inv.is_one() {
            for j in c..=cols {
                if !m[r][j].is_zero() {
                    m[r][j] = &m[r][j] * &inv;
                }
            }
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..=cols {
                if m[r][j].is_zero() {
                    continue;
                }
                let t = &f * &m[r][j];
                m[i][j] = &m[i][j] - &t;
            }
        }
        pivot_columns.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut particular = vec![RatFunc::zero(); cols];
    for (i, &pc) in pivot_columns.iter().enumerate() {
        particular[pc] = m[i][cols].clone();
    }
    let free_columns: Vec<usize> = (0..cols).filter(|c| !pivot_columns.contains(c)).collect();
    let nullspace = free_columns
        .iter()
        .map(|&fc| {
            let mut v = vec![RatFunc::zero(); cols];
            v[fc] = RatFunc::one();
            for (i, &pc) in pivot_columns.iter().enumerate() {
                v[pc] = -&m[i][fc];
            }
            v
        })
        .collect();
    Some(SolutionSpace {
        particular,
        nullspace,
        free_columns,
        pivot_columns,
    })
}

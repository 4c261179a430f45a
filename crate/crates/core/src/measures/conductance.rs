use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::pattern::{ExplanationPattern, Var};

/// Effective conductance between the start and end variables with every
/// pattern edge a unit resistor, direction ignored.
///
/// Solves the reduced Laplacian system exactly: start held at potential 1,
/// end grounded, interior potentials unknown. Variables not connected to the
/// targets carry no current.
pub fn conductance(p: &ExplanationPattern) -> Rational64 {
    let n = p.num_vars();
    let mut lap = vec![vec![Rational64::zero(); n]; n];
    for e in p.edges() {
        let (a, b) = (e.from.index(), e.to.index());
        lap[a][a] += 1;
        lap[b][b] += 1;
        lap[a][b] -= 1;
        lap[b][a] -= 1;
    }
    let interior: Vec<usize> = (2..n).collect();
    let m = interior.len();
    // [L_II | -L_I,start]
    let mut a: Vec<Vec<Rational64>> = interior
        .iter()
        .map(|&i| {
            let mut row: Vec<Rational64> = interior.iter().map(|&j| lap[i][j]).collect();
            row.push(-lap[i][Var::START.index()]);
            row
        })
        .collect();
    let x = solve(&mut a, m);
    let mut potential = vec![Rational64::zero(); n];
    potential[Var::START.index()] = Rational64::one();
    for (k, &i) in interior.iter().enumerate() {
        potential[i] = x[k];
    }
    p.edges()
        .iter()
        .filter(|e| e.touches(Var::START))
        .map(|e| potential[Var::START.index()] - potential[e.other(Var::START).index()])
        .sum()
}

/// Gauss-Jordan elimination on an augmented `m x (m + 1)` matrix. Rows with
/// no pivot (floating components) get potential zero.
fn solve(a: &mut [Vec<Rational64>], m: usize) -> Vec<Rational64> {
    let mut pivot_row = vec![None; m];
    let mut row = 0;
    for col in 0..m {
        let Some(r) = (row..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, r);
        let inv = a[row][col].recip();
        for v in a[row].iter_mut() {
            *v *= inv;
        }
        for r in 0..m {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col];
                for c in col..=m {
                    let d = a[row][c] * f;
                    a[r][c] -= d;
                }
            }
        }
        pivot_row[col] = Some(row);
        row += 1;
    }
    (0..m)
        .map(|col| pivot_row[col].map_or(Rational64::zero(), |r| a[r][m]))
        .collect()
}

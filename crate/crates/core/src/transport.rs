//! Exact transportation simplex over rationals.
//!
//! Solves `min ∑ c_ij x_ij` subject to row sums `a_i`, column sums `b_j`,
//! `x ≥ 0`, with `∑ a = ∑ b`. The basis is a spanning tree of the bipartite
//! row/column graph. The starting basis comes from the northwest-corner rule.
//! Pivoting follows Bland's rule: the entering cell is the lowest-index cell
//! with negative reduced cost, and the leaving cell is the lowest-index cell
//! among the tied minimum-ratio candidates. This makes degenerate cycling
//! impossible.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportSolution {
    /// `(row, column, flow)` for every basic cell with positive flow.
    pub flows: Vec<(usize, usize, Rational)>,
    pub cost: Rational,
    /// Row potentials; `u[i] + v[j] ≤ c[i][j]` with equality on basic cells.
    pub u: Vec<Rational>,
    pub v: Vec<Rational>,
    pub pivots: usize,
}

struct Tableau<'a> {
    rows: usize,
    cols: usize,
    cost: &'a [Vec<Rational>],
    flow: Vec<Rational>,
    basic: Vec<bool>,
}

impl Tableau<'_> {
    fn cell(&self, k: usize) -> (usize, usize) {
        (k / self.cols, k % self.cols)
    }

    fn basic_cells(&self) -> Vec<usize> {
        (0..self.rows * self.cols)
            .filter(|&k| self.basic[k])
            .collect()
    }

    /// Node ids: rows are `0..rows`, columns are `rows..rows+cols`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.rows + self.cols];
        for k in self.basic_cells() {
            let (i, j) = self.cell(k);
            adj[i].push((self.rows + j, k));
            adj[self.rows + j].push((i, k));
        }
        adj
    }

    fn potentials(&self) -> (Vec<Rational>, Vec<Rational>) {
        let adj = self.adjacency();
        let total = self.rows + self.cols;
        let mut pot: Vec<Option<Rational>> = vec![None; total];
        pot[0] = Some(Rational::zero());
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            let p = pot[node].clone().expect("visited");
            for &(next, k) in &adj[node] {
                if pot[next].is_some() {
                    continue;
                }
                let (i, j) = self.cell(k);
                // u_i + v_j = c_ij on basic cells
                pot[next] = Some(&self.cost[i][j] - &p);
                queue.push_back(next);
            }
        }
        let pot: Vec<Rational> = pot
            .into_iter()
            .map(|p| p.expect("basis is a spanning tree"))
            .collect();
        let (u, v) = pot.split_at(self.rows);
        (u.to_vec(), v.to_vec())
    }

    /// Basic cells on the tree path from column node `j` back to row node
    /// `i`, in that order.
    fn tree_path(&self, i: usize, j: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let total = self.rows + self.cols;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut seen = vec![false; total];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        let goal = self.rows + j;
        while let Some(node) = queue.pop_front() {
            if node == goal {
                break;
            }
            for &(next, k) in &adj[node] {
                if !seen[next] {
                    seen[next] = true;
                    parent[next] = Some((node, k));
                    queue.push_back(next);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = goal;
        while node != i {
            let (prev, k) = parent[node].expect("tree is connected");
            path.push(k);
            node = prev;
        }
        path
    }
}

/// Solves a balanced transportation problem exactly.
///
/// Supplies and demands must be positive with equal totals; `cost` is
/// `supply.len() × demand.len()`.
pub fn solve_transport(
    supply: &[Rational],
    demand: &[Rational],
    cost: &[Vec<Rational>],
) -> TransportSolution {
    let rows = supply.len();
    let cols = demand.len();
    assert!(
        rows > 0 && cols > 0,
        "transport needs at least one source and one sink"
    );
    assert!(
        supply.iter().chain(demand).all(|x| x.is_positive()),
        "supplies and demands must be positive"
    );
    assert_eq!(
        supply.iter().sum::<Rational>(),
        demand.iter().sum::<Rational>(),
        "unbalanced transport problem"
    );
    assert!(cost.len() == rows && cost.iter().all(|r| r.len() == cols));

    let mut t = Tableau {
        rows,
        cols,
        cost,
        flow: vec![Rational::zero(); rows * cols],
        basic: vec![false; rows * cols],
    };

    // northwest corner: rows + cols − 1 basic cells along a staircase
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let x = std::cmp::min(&a[i], &b[j]).clone();
        a[i] -= &x;
        b[j] -= &x;
        let k = i * cols + j;
        t.flow[k] = x;
        t.basic[k] = true;
        if i == rows - 1 && j == cols - 1 {
            break;
        }
        if a[i].is_zero() && i < rows - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }

    let mut pivots = 0;
    loop {
        let (u, v) = t.potentials();
        let entering = (0..rows * cols).find(|&k| {
            if t.basic[k] {
                return false;
            }
            let (i, j) = t.cell(k);
            (&cost[i][j] - &u[i] - &v[j]).is_negative()
        });
        let Some(enter) = entering else {
            let flows = (0..rows * cols)
                .filter(|&k| t.basic[k] && t.flow[k].is_positive())
                .map(|k| {
                    let (i, j) = t.cell(k);
                    (i, j, t.flow[k].clone())
                })
                .collect::<Vec<_>>();
            let total = flows
                .iter()
                .map(|(i, j, x)| x * &cost[*i][*j])
                .sum::<Rational>();
            return TransportSolution {
                flows,
                cost: total,
                u,
                v,
                pivots,
            };
        };

        let (ei, ej) = t.cell(enter);
        let path = t.tree_path(ei, ej);
        // the cycle is enter(+), path[0](−), path[1](+), ...
        let minus: Vec<usize> = path.iter().copied().step_by(2).collect();
        let plus: Vec<usize> = path.iter().copied().skip(1).step_by(2).collect();
        let theta = minus
            .iter()
            .map(|&k| &t.flow[k])
            .min()
            .expect("cycle has a decreasing cell")
            .clone();
        let leave = *minus
            .iter()
            .filter(|&&k| t.flow[k] == theta)
            .min()
            .expect("minimum attained");
        for &k in &minus {
            t.flow[k] -= &theta;
        }
        for &k in &plus {
            t.flow[k] += &theta;
        }
        t.flow[enter] = theta;
        t.basic[enter] = true;
        t.basic[leave] = false;
        t.flow[leave] = Rational::zero();
        pivots += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn check_optimal(s: &TransportSolution, a: &[Rational], b: &[Rational], c: &[Vec<Rational>]) {
        for (i, ai) in a.iter().enumerate() {
            let out: Rational = s
                .flows
                .iter()
                .filter(|f| f.0 == i)
                .map(|f| f.2.clone())
                .sum();
            assert_eq!(&out, ai);
        }
        for (j, bj) in b.iter().enumerate() {
            let inflow: Rational = s
                .flows
                .iter()
                .filter(|f| f.1 == j)
                .map(|f| f.2.clone())
                .sum();
            assert_eq!(&inflow, bj);
        }
        for i in 0..a.len() {
            for j in 0..b.len() {
                assert!(&s.u[i] + &s.v[j] <= c[i][j]);
            }
        }
        let dual: Rational = a.iter().zip(&s.u).map(|(x, y)| x * y).sum::<Rational>()
            + b.iter().zip(&s.v).map(|(x, y)| x * y).sum::<Rational>();
        assert_eq!(dual, s.cost);
    }

    #[test]
    fn classic_three_by_four_instance() {
        // textbook instance with known optimum 743
        let a = ints(&[7, 9, 18]);
        let b = ints(&[5, 8, 7, 14]);
        let c = vec![
            ints(&[19, 30, 50, 10]),
            ints(&[70, 30, 40, 60]),
            ints(&[40, 8, 70, 20]),
        ];
        let s = solve_transport(&a, &b, &c);
        check_optimal(&s, &a, &b, &c);
        assert_eq!(s.cost, int(743));
    }

    #[test]
    fn degenerate_instance_terminates() {
        // equal partial sums force zero-flow basic cells
        let a = ints(&[1, 1, 1, 1]);
        let b = ints(&[1, 1, 1, 1]);
        let c: Vec<Vec<Rational>> = (0..4)
            .map(|i| (0..4).map(|j| int(((i + 4 - j) % 4) as i64)).collect())
            .collect();
        let s = solve_transport(&a, &b, &c);
        check_optimal(&s, &a, &b, &c);
        assert_eq!(s.cost, int(0));
    }

    #[test]
    fn single_cell() {
        let s = solve_transport(&ints(&[3]), &ints(&[3]), &[ints(&[2])]);
        assert_eq!(s.cost, int(6));
        assert_eq!(s.flows, vec![(0, 0, int(3))]);
    }
}

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::report::ValidationReport;

/// Default cap on the order of a group generated by permutations.
pub const DEFAULT_ORDER_CAP: usize = 10_000;

/// A finite group given by its multiplication table.
///
/// `table[g][h]` is the index of the product `gh`. When the group was
/// produced by closing a set of permutation generators, `presentation`
/// records a breadth-first spanning tree of words in those generators so
/// that group homomorphisms can be specified on generators alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    elements: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    presentation: Option<Presentation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    /// Element indices of the generators, in the order supplied.
    pub generators: Vec<usize>,
    /// For every non-identity element `k`: `(s, prev)` with `k = generators[s] · prev`.
    pub spanning: Vec<Option<(usize, usize)>>,
}

/// Checks the group axioms on a table. Index errors are structural.
pub fn validate_group_table(elements: &[String], table: &[Vec<usize>]) -> Result<ValidationReport> {
    let n = elements.len();
    if n == 0 {
        return Err(Error::Dimension("group has no elements".into()));
    }
    let mut seen = HashSet::new();
    for e in elements {
        if !seen.insert(e.as_str()) {
            return Err(Error::Dimension(format!("duplicate element id {e:?}")));
        }
    }
    if table.len() != n || table.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!(
            "multiplication table must be {n}x{n}"
        )));
    }
    if let Some(bad) = table.iter().flatten().find(|&&x| x >= n) {
        return Err(Error::Dimension(format!("table entry {bad} out of range")));
    }

    let name = |i: usize| elements[i].clone();
    let mut report = ValidationReport::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    report.fail(
                        "associativity",
                        vec![name(a), name(b), name(c)],
                        "(ab)c != a(bc)",
                    );
                }
            }
        }
    }
    match find_identity(table) {
        None => report.fail("identity", vec![], "no two-sided unit"),
        Some(e) => {
            for a in 0..n {
                if !(0..n).any(|b| table[a][b] == e && table[b][a] == e) {
                    report.fail("inverse", vec![name(a)], "no two-sided inverse");
                }
            }
        }
    }
    Ok(report)
}

fn find_identity(table: &[Vec<usize>]) -> Option<usize> {
    let n = table.len();
    (0..n).find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
}

impl FiniteGroup {
    pub fn from_table(elements: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let report = validate_group_table(&elements, &table)?;
        if !report.is_ok() {
            return Err(Error::InvalidGroup(report));
        }
        let identity = find_identity(&table).expect("validated");
        let n = elements.len();
        let inverse = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| table[a][b] == identity)
                    .expect("validated")
            })
            .collect();
        Ok(FiniteGroup {
            elements,
            table,
            identity,
            inverse,
            presentation: None,
        })
    }

    pub fn trivial() -> Self {
        FiniteGroup::from_table(vec!["e".into()], vec![vec![0]]).expect("trivial group")
    }

    /// Closes a set of permutations of `points` under composition,
    /// breadth-first from the identity. Returns the group together with the
    /// permutation of every element. Elements are named `e` for the identity
    /// and by cycle notation over `points` otherwise.
    pub fn generated_by(
        points: &[String],
        generators: &[Vec<usize>],
        cap: usize,
    ) -> Result<(Self, Vec<Vec<usize>>)> {
        let n = points.len();
        for (s, g) in generators.iter().enumerate() {
            check_permutation(g, n)
                .map_err(|m| Error::NotAPermutation(format!("generator {s}: {m}")))?;
        }
        let id: Vec<usize> = (0..n).collect();
        let mut perms = vec![id.clone()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
        let mut spanning = vec![None];
        let mut queue = VecDeque::from([0usize]);
        while let Some(h) = queue.pop_front() {
            for (s, g) in generators.iter().enumerate() {
                let prod = compose(g, &perms[h]);
                if index.contains_key(&prod) {
                    continue;
                }
                if perms.len() >= cap {
                    return Err(Error::OrderCapExceeded { cap });
                }
                index.insert(prod.clone(), perms.len());
                queue.push_back(perms.len());
                perms.push(prod);
                spanning.push(Some((s, h)));
            }
        }
        let order = perms.len();
        let table = (0..order)
            .map(|a| {
                (0..order)
                    .map(|b| index[&compose(&perms[a], &perms[b])])
                    .collect()
            })
            .collect();
        let elements = perms.iter().map(|p| cycle_name(p, points)).collect();
        let mut group = FiniteGroup::from_table(elements, table)?;
        group.presentation = Some(Presentation {
            generators: generators.iter().map(|g| index[g]).collect(),
            spanning,
        });
        Ok((group, perms))
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn name(&self, g: usize) -> &str {
        &self.elements[g]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.table[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn presentation(&self) -> Option<&Presentation> {
        self.presentation.as_ref()
    }

    /// Generators when the group is generator-presented, otherwise every element.
    pub fn generating_set(&self) -> Vec<usize> {
        match &self.presentation {
            Some(p) => p.generators.clone(),
            None => (0..self.order()).collect(),
        }
    }

    /// Re-checks the table axioms. Always empty for a constructed group.
    pub fn validate(&self) -> ValidationReport {
        validate_group_table(&self.elements, &self.table).expect("structurally valid")
    }
}

/// `(p∘q)[x] = p[q[x]]`, so that `perm(gh) = perm(g)∘perm(h)`.
pub fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

pub fn check_permutation(p: &[usize], n: usize) -> std::result::Result<(), String> {
    if p.len() != n {
        return Err(format!("length {} but the space has {n} points", p.len()));
    }
    let mut hit = vec![false; n];
    for &x in p {
        if x >= n {
            return Err(format!("image {x} out of range"));
        }
        if std::mem::replace(&mut hit[x], true) {
            return Err(format!("image {x} repeated"));
        }
    }
    Ok(())
}

/// Cycle notation such as `(a c)` or `(a b c)(d e)`; the identity is `e`.
pub fn cycle_name(p: &[usize], points: &[String]) -> String {
    let mut seen = vec![false; p.len()];
    let mut out = String::new();
    for start in 0..p.len() {
        if seen[start] || p[start] == start {
            continue;
        }
        let mut cycle = Vec::new();
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            cycle.push(points[x].as_str());
            x = p[x];
        }
        out.push('(');
        out.push_str(&cycle.join(" "));
        out.push(')');
    }
    if out.is_empty() {
        "e".into()
    } else {
        out
    }
}

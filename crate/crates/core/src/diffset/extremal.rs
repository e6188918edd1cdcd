use serde::Serialize;

use super::config::default_d_max;
use crate::error::{Error, Result};
use crate::poly::PolynomialFamily;

/// The absolute difference patterns `{|P_1(d)|, ..., |P_ell(d)|}` that can
/// occur inside `[1, N]`, with zeros dropped (`0` lies in every nonempty
/// difference set).
#[derive(Clone, Debug)]
pub struct ForbiddenPatterns {
    n: i64,
    patterns: Vec<Vec<usize>>,
}

impl ForbiddenPatterns {
    pub fn new(n: i64, p: &PolynomialFamily) -> Result<Self> {
        if n < 1 {
            return Err(Error::param("N", "must be at least 1"));
        }
        let mut patterns: Vec<Vec<usize>> = Vec::new();
        for mag in 1..=default_d_max(p, n).max(1) {
            for d in [mag, -mag] {
                let Ok(values) = p.eval_all(d) else { continue };
                if values.iter().any(|v| v.unsigned_abs() >= n as u128) {
                    continue;
                }
                let mut pat: Vec<usize> = values
                    .iter()
                    .filter(|&&v| v != 0)
                    .map(|v| v.unsigned_abs() as usize)
                    .collect();
                pat.sort_unstable();
                pat.dedup();
                patterns.push(pat);
            }
        }
        patterns.sort();
        patterns.dedup();
        Ok(ForbiddenPatterns { n, patterns })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }
}

/// Incrementally maintained set with absolute-difference multiplicities.
struct FreeSetState<'a> {
    pats: &'a ForbiddenPatterns,
    elems: Vec<i64>,
    diff_count: Vec<u32>,
}

impl<'a> FreeSetState<'a> {
    fn new(pats: &'a ForbiddenPatterns) -> Self {
        FreeSetState {
            pats,
            elems: Vec::new(),
            diff_count: vec![0; pats.n as usize],
        }
    }

    fn satisfied(&self, pat: &[usize]) -> bool {
        pat.iter().all(|&v| self.diff_count[v] > 0)
    }

    /// Adds `x` if the set stays configuration-free.
    fn try_add(&mut self, x: i64) -> bool {
        for &y in &self.elems {
            self.diff_count[(x - y).unsigned_abs() as usize] += 1;
        }
        self.elems.push(x);
        if self.pats.patterns.iter().any(|p| self.satisfied(p)) {
            self.remove_last();
            return false;
        }
        true
    }

    fn remove_last(&mut self) {
        let x = self.elems.pop().expect("nonempty");
        for &y in &self.elems {
            self.diff_count[(x - y).unsigned_abs() as usize] -= 1;
        }
    }
}

/// Scans `1..=N` and keeps each `n` that leaves the set configuration-free.
pub fn greedy_free_set(n: i64, p: &PolynomialFamily) -> Result<Vec<i64>> {
    let pats = ForbiddenPatterns::new(n, p)?;
    let mut state = FreeSetState::new(&pats);
    for x in 1..=n {
        state.try_add(x);
    }
    Ok(state.elems)
}

/// Result of the exact extremal search on `[1, N]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactMax {
    pub n: i64,
    pub size: usize,
    /// Lexicographically least maximum set (when `proven`).
    pub witness: Vec<i64>,
    /// `false` when the node budget ran out; `size` is then a lower bound.
    pub proven: bool,
    pub nodes: u64,
}

struct Solver<'a> {
    pats: &'a ForbiddenPatterns,
    /// `best[len]` = exact maximum on an interval of length `len`.
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
}

enum Search {
    Found(Vec<i64>),
    Exhausted,
    OutOfBudget,
}

impl Solver<'_> {
    /// Include-first search over `lo..=hi` for a set of size `target`
    /// extending `state`. Any interval of length `len` holds at most
    /// `best[len]` further elements (translation invariance).
    fn search(&mut self, state: &mut FreeSetState, i: i64, hi: i64, target: usize) -> Search {
        if state.elems.len() >= target {
            let mut w = state.elems.clone();
            w.sort_unstable();
            return Search::Found(w);
        }
        if i > hi {
            return Search::Exhausted;
        }
        let remaining = (hi - i + 1) as usize;
        if state.elems.len() + self.best[remaining] < target {
            return Search::Exhausted;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Search::OutOfBudget;
        }
        if state.try_add(i) {
            match self.search(state, i + 1, hi, target) {
                Search::Exhausted => state.remove_last(),
                other => return other,
            }
        }
        self.search(state, i + 1, hi, target)
    }
}

/// Exact maxima of configuration-free subsets of `[1, m]` for every
/// `m <= N`, computed incrementally: `f(m)` is `f(m-1)` or `f(m-1) + 1`,
/// and a set of size `f(m-1) + 1` must contain both `1` and `m`.
pub fn extremal_table(n: i64, p: &PolynomialFamily, budget: u64) -> Result<Vec<ExactMax>> {
    let pats = ForbiddenPatterns::new(n, p)?;
    let mut solver = Solver {
        pats: &pats,
        best: vec![0],
        nodes: 0,
        budget,
    };
    let mut table: Vec<ExactMax> = Vec::with_capacity(n as usize);
    for m in 1..=n {
        let target = solver.best[(m - 1) as usize] + 1;
        let mut state = FreeSetState::new(solver.pats);
        let decision = if !state.try_add(1) {
            Search::Exhausted
        } else if m == 1 {
            Search::Found(vec![1])
        } else if !state.try_add(m) {
            Search::Exhausted
        } else {
            solver.search(&mut state, 2, m - 1, target)
        };
        let size = match decision {
            Search::Found(_) => target,
            Search::Exhausted => target - 1,
            Search::OutOfBudget => {
                return Ok(finish_unproven(table, m, n, p, solver.nodes));
            }
        };
        solver.best.push(size);
        let mut state = FreeSetState::new(solver.pats);
        let witness = match solver.search(&mut state, 1, m, size) {
            Search::Found(w) => w,
            Search::Exhausted => unreachable!("a set of the proven size exists"),
            Search::OutOfBudget => {
                return Ok(finish_unproven(table, m, n, p, solver.nodes));
            }
        };
        table.push(ExactMax {
            n: m,
            size,
            witness,
            proven: true,
            nodes: solver.nodes,
        });
    }
    Ok(table)
}

fn finish_unproven(
    mut table: Vec<ExactMax>,
    from: i64,
    n: i64,
    p: &PolynomialFamily,
    nodes: u64,
) -> Vec<ExactMax> {
    for m in from..=n {
        let greedy = greedy_free_set(m, p).expect("validated parameters");
        let previous = table.last().map(|e| e.witness.clone()).unwrap_or_default();
        let witness = if greedy.len() >= previous.len() {
            greedy
        } else {
            previous
        };
        table.push(ExactMax {
            n: m,
            size: witness.len(),
            witness,
            proven: false,
            nodes,
        });
    }
    table
}

/// The exact maximum size of a configuration-free subset of `[1, N]`, with
/// the lexicographically least witness. When `budget` search nodes do not
/// suffice, returns the best set found with `proven = false`.
pub fn max_free_set_exact(n: i64, p: &PolynomialFamily, budget: u64) -> Result<ExactMax> {
    Ok(extremal_table(n, p, budget)?
        .pop()
        .expect("table has N >= 1 rows"))
}

/// `C ((ln ln N) / ln N)^(1 / (ell (k - 1)))` for integer `N >= 16`.
pub fn density_upper_bound(n: &num_bigint::BigUint, p: &PolynomialFamily, c: f64) -> Result<f64> {
    if *n < num_bigint::BigUint::from(16u32) {
        return Err(Error::Domain(format!("need N >= 16, got {n}")));
    }
    let ln_n = ln_big(n);
    density_bound_from_log(ln_n, p.ell(), p.k(), c)
}

/// The same bound at real `N > e`, given through `ln N`.
pub fn density_bound_from_log(ln_n: f64, ell: usize, k: usize, c: f64) -> Result<f64> {
    if !(ln_n > 1.0) {
        return Err(Error::Domain("need ln N > 1".into()));
    }
    if k < 2 || ell == 0 {
        return Err(Error::param("P", "need ell >= 1 and k >= 2"));
    }
    let exponent = 1.0 / (ell * (k - 1)) as f64;
    Ok(c * (ln_n.ln() / ln_n).powf(exponent))
}

/// Natural logarithm of an arbitrary-size integer.
pub fn ln_big(n: &num_bigint::BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        use num_traits::ToPrimitive;
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift as usize).iter_u64_digits().next().unwrap_or(0) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares() -> PolynomialFamily {
        PolynomialFamily::parse("d^2").unwrap()
    }

    #[test]
    fn greedy_small_cases() {
        assert_eq!(greedy_free_set(3, &squares()).unwrap(), vec![1, 3]);
        assert_eq!(greedy_free_set(1, &squares()).unwrap(), vec![1]);
    }

    #[test]
    fn exact_small_cases() {
        let r = max_free_set_exact(2, &squares(), 1 << 20).unwrap();
        assert_eq!((r.size, r.proven), (1, true));
        let r = max_free_set_exact(3, &squares(), 1 << 20).unwrap();
        assert_eq!(r.size, 2);
        assert_eq!(r.witness, vec![1, 3]);
    }

    #[test]
    fn exact_value_at_ten() {
        let r = max_free_set_exact(10, &squares(), 1 << 24).unwrap();
        assert!(r.proven);
        assert_eq!(r.size, 4);
        assert_eq!(r.witness, vec![1, 3, 6, 8]);
    }

    #[test]
    fn exhausted_budget_is_flagged() {
        let r = max_free_set_exact(30, &squares(), 5).unwrap();
        assert!(!r.proven);
        assert!(r.size >= greedy_free_set(30, &squares()).unwrap().len());
    }

    #[test]
    fn anchor_value_at_e_to_the_e() {
        let v = density_bound_from_log(std::f64::consts::E, 1, 2, 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn log_bound_is_decreasing_and_rejects_small_n() {
        let p = squares();
        let a = density_upper_bound(&1_000_000u32.into(), &p, 1.0).unwrap();
        let b = density_upper_bound(&1_000_000_000u32.into(), &p, 1.0).unwrap();
        assert!(a > b);
        assert!(density_upper_bound(&15u32.into(), &p, 1.0).is_err());
    }

    #[test]
    fn exponent_for_two_cubics() {
        let p = PolynomialFamily::parse("d^3, d^2 + d^3").unwrap();
        let ln_n = 1e6f64;
        let v =
            density_upper_bound(&num_bigint::BigUint::from(10u32).pow(434_295), &p, 1.0).unwrap();
        let expect = (ln_n.ln() / ln_n).powf(0.25);
        assert!((v / expect - 1.0).abs() < 1e-4);
    }
}

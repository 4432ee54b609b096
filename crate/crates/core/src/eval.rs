//! Accuracy metrics over motif-weighted adjacency matrices.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::graph_stream::VertexId;
use crate::method::{Method, MotifEstimateTable};
use crate::oracle::ExactCounts;

/// Sparse symmetric matrix with zero diagonal, stored by upper-triangle
/// vertex pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MotifAdjacency {
    entries: BTreeMap<(VertexId, VertexId), f64>,
}

fn ordered(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl MotifAdjacency {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets entry (a, b) and (b, a). Zero values are not stored.
    pub fn set(&mut self, a: VertexId, b: VertexId, value: f64) {
        assert!(a != b, "diagonal entry at {a}");
        let key = ordered(a, b);
        if value == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    pub fn get(&self, a: VertexId, b: VertexId) -> f64 {
        self.entries.get(&ordered(a, b)).copied().unwrap_or(0.0)
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((VertexId, VertexId), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn from_exact(exact: &ExactCounts) -> Self {
        let mut m = MotifAdjacency::new();
        for (&(a, b), &n) in &exact.counts {
            m.set(a, b, n as f64);
        }
        m
    }

    /// Entries are each row's reported estimate (η for the shrinkage method,
    /// n̂ otherwise).
    pub fn from_estimates(table: &MotifEstimateTable) -> Self {
        let mut m = MotifAdjacency::new();
        for r in &table.rows {
            m.set(r.edge.a, r.edge.b, table.estimate(r));
        }
        m
    }

    /// `self - other`.
    pub fn difference(&self, other: &MotifAdjacency) -> MotifAdjacency {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            let cur = out.get(k.0, k.1);
            out.set(k.0, k.1, cur - v);
        }
        out
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> Result<f64> {
        Csr::from(self).spectral_norm()
    }
}

/// Compressed rows over a dense relabelling of the touched vertices.
struct Csr {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl From<&MotifAdjacency> for Csr {
    fn from(m: &MotifAdjacency) -> Csr {
        let mut index: HashMap<VertexId, usize> = HashMap::new();
        for ((a, b), _) in m.iter() {
            for v in [a, b] {
                let next = index.len();
                index.entry(v).or_insert(next);
            }
        }
        let n = index.len();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for ((a, b), v) in m.iter() {
            let (i, j) = (index[&a], index[&b]);
            rows[i].push((j, v));
            rows[j].push((i, v));
        }
        let mut csr = Csr {
            offsets: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
        };
        for row in rows {
            for (j, v) in row {
                csr.cols.push(j);
                csr.vals.push(v);
            }
            csr.offsets.push(csr.cols.len());
        }
        csr
    }
}

/// Relative tolerance on the Ritz residual.
pub const KRYLOV_TOLERANCE: f64 = 1e-8;
/// Cap on matrix-vector products per start vector.
pub const KRYLOV_MAX_PRODUCTS: usize = 10_000;
/// Krylov basis size per restart cycle.
const KRYLOV_BASIS: usize = 24;

impl Csr {
    fn dim(&self) -> usize {
        self.offsets.len() - 1
    }

    fn multiply(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let range = self.offsets[i]..self.offsets[i + 1];
            *o = self.cols[range.clone()]
                .iter()
                .zip(&self.vals[range])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    /// Largest |eigenvalue| by restarted Lanczos: a Krylov basis grown from
    /// `start` with full reorthogonalization, restarted from the Ritz vector
    /// of largest |Ritz value| until its residual `|A y - θ y|` is within the
    /// relative tolerance of `|θ|` (or `θ` stops moving at round-off level).
    /// One cycle on a basis of size one is plain power iteration; the wider
    /// basis resolves nearly tied extreme eigenvalues, including `λ` and
    /// `-λ`, that stall it.
    fn extreme_eigenvalue(&self, start: Vec<f64>) -> Result<f64> {
        let n = self.dim();
        let basis = KRYLOV_BASIS.min(n);
        let mut v = start;
        normalize(&mut v);
        let mut products = 0;
        let mut previous = f64::NAN;
        let mut w = vec![0.0; n];
        while products < KRYLOV_MAX_PRODUCTS {
            let mut q: Vec<Vec<f64>> = vec![v.clone()];
            let mut alpha = Vec::with_capacity(basis);
            let mut beta: Vec<f64> = Vec::with_capacity(basis);
            let mut tail = 0.0;
            for j in 0..basis {
                self.multiply(&q[j], &mut w);
                products += 1;
                alpha.push(dot(&q[j], &w));
                // Two passes of Gram-Schmidt against the whole basis.
                for _ in 0..2 {
                    for qi in &q {
                        let c = dot(qi, &w);
                        w.iter_mut().zip(qi).for_each(|(wk, qk)| *wk -= c * qk);
                    }
                }
                let b = l2(&w);
                let scale = alpha.iter().map(|a| a.abs()).fold(b, f64::max);
                if j + 1 == basis || b <= 1e-13 * scale {
                    tail = b;
                    break;
                }
                beta.push(b);
                q.push(w.iter().map(|x| x / b).collect());
            }
            let k = alpha.len();
            let t = nalgebra::DMatrix::from_fn(k, k, |r, c| {
                if r == c {
                    alpha[r]
                } else if r + 1 == c {
                    beta[r]
                } else if c + 1 == r {
                    beta[c]
                } else {
                    0.0
                }
            });
            let eig = nalgebra::SymmetricEigen::new(t);
            let (best, theta) = eig
                .eigenvalues
                .iter()
                .copied()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .expect("non-empty basis");
            let s = eig.eigenvectors.column(best);
            let theta = theta.abs();
            let residual = (tail * s[k - 1]).abs();
            if theta == 0.0
                || residual <= KRYLOV_TOLERANCE * theta
                || (theta - previous).abs() <= 1e-13 * theta
            {
                return Ok(theta);
            }
            previous = theta;
            v = vec![0.0; n];
            for (qi, &si) in q.iter().zip(s.iter()) {
                v.iter_mut().zip(qi).for_each(|(vk, qk)| *vk += si * qk);
            }
            normalize(&mut v);
        }
        Err(Error::NoConvergence {
            iterations: products,
        })
    }

    /// Runs from the all-ones vector and from a copy with the first
    /// coordinate perturbed by 1e-3, in case symmetry makes all-ones
    /// orthogonal to the top eigenvector, and keeps the larger estimate.
    fn spectral_norm(&self) -> Result<f64> {
        let n = self.dim();
        if n == 0 {
            return Ok(0.0);
        }
        let ones = vec![1.0; n];
        let mut perturbed = ones.clone();
        perturbed[0] += 1e-3;
        Ok(self
            .extreme_eigenvalue(ones)?
            .max(self.extreme_eigenvalue(perturbed)?))
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) {
    let n = l2(x);
    x.iter_mut().for_each(|v| *v /= n);
}

/// Mean over every ground-truth edge of `(estimate - n)^2`, counting an
/// estimate of 0 for edges missing from the table.
pub fn mse(estimates: &MotifEstimateTable, exact: &ExactCounts) -> Result<f64> {
    if exact.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let est = estimates.by_key();
    let total: f64 = exact
        .counts
        .iter()
        .map(|(k, &n)| {
            let d = est.get(k).copied().unwrap_or(0.0) - n as f64;
            d * d
        })
        .sum();
    Ok(total / exact.len() as f64)
}

/// `||A - A_hat||_2 / ||A||_2`.
pub fn relative_spectral_norm(a: &MotifAdjacency, a_hat: &MotifAdjacency) -> Result<f64> {
    let denom = a.spectral_norm()?;
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(a.difference(a_hat).spectral_norm()? / denom)
}

/// Entrywise mean across runs; missing entries count as 0. Sums are taken in
/// run order.
pub fn average_adjacency(runs: &[MotifEstimateTable]) -> MotifAdjacency {
    let mut sums: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
    for t in runs {
        for r in &t.rows {
            *sums.entry(r.edge.key()).or_insert(0.0) += t.estimate(r);
        }
    }
    let n = runs.len() as f64;
    let mut m = MotifAdjacency::new();
    for ((a, b), s) in sums {
        m.set(a, b, s / n);
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopkPoint {
    pub rank: usize,
    pub truth: f64,
    pub estimate: f64,
}

/// Edges by true count descending, ties by vertex pair ascending, truncated
/// to `k`.
pub fn topk_curve(estimates: &MotifEstimateTable, exact: &ExactCounts, k: usize) -> Vec<TopkPoint> {
    let est = estimates.by_key();
    let mut edges: Vec<_> = exact.counts.iter().map(|(&key, &n)| (key, n)).collect();
    edges.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    edges
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (key, n))| TopkPoint {
            rank: i + 1,
            truth: n as f64,
            estimate: est.get(&key).copied().unwrap_or(0.0),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub method: Method,
    pub fraction: Option<f64>,
    pub capacity: usize,
    pub seed_base: u64,
    pub runs: usize,
    /// Mean over runs of the per-run MSE.
    pub mse: f64,
    /// Relative spectral norm of the run-averaged matrix.
    pub rel_spectral: f64,
    /// Curve of the first run.
    pub topk: Vec<TopkPoint>,
}

impl EvalReport {
    /// Summarizes runs of one method against the exact counts.
    pub fn from_runs(
        method: Method,
        fraction: Option<f64>,
        capacity: usize,
        seed_base: u64,
        runs: &[MotifEstimateTable],
        exact: &ExactCounts,
        topk: usize,
    ) -> Result<EvalReport> {
        if runs.is_empty() {
            return Err(Error::Config("evaluation needs at least one run".into()));
        }
        let mut total = 0.0;
        for t in runs {
            total += mse(t, exact)?;
        }
        let rel =
            relative_spectral_norm(&MotifAdjacency::from_exact(exact), &average_adjacency(runs))?;
        Ok(EvalReport {
            method,
            fraction,
            capacity,
            seed_base,
            runs: runs.len(),
            mse: total / runs.len() as f64,
            rel_spectral: rel,
            topk: topk_curve(&runs[0], exact, topk),
        })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph_stream::{Edge, EdgeStream};
    use crate::method::{EstimateRow, RunSpec};
    use crate::oracle::exact_local_counts;
    use crate::synth;

    fn v(x: u64) -> VertexId {
        VertexId(x)
    }

    fn table(method: Method, rows: &[(u64, u64, f64)]) -> MotifEstimateTable {
        MotifEstimateTable {
            method,
            seed: 0,
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, &(a, b, x))| EstimateRow {
                    edge: Edge::new(a, b, i as u64 + 1).unwrap(),
                    n_hat: x,
                    w: None,
                    var: None,
                    cov: None,
                    lambda: None,
                    eta: x,
                })
                .collect(),
        }
    }

    /// Cyclic Jacobi eigenvalue sweep for small dense symmetric matrices.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-22 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for row in a.iter_mut() {
                        let (akp, akq) = (row[p], row[q]);
                        row[p] = c * akp - s * akq;
                        row[q] = s * akp + c * akq;
                    }
                    let (lo, hi) = a.split_at_mut(q);
                    for (apk, aqk) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let (x, y) = (*apk, *aqk);
                        *apk = c * x - s * y;
                        *aqk = s * x + c * y;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }

    #[test]
    fn jacobi_reference_on_known_matrix() {
        let ev = jacobi_eigenvalues(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut ev = ev;
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mse_examples() {
        let k4 = exact_local_counts(&synth::complete_graph(4));
        let exact_table = table(
            Method::Aps,
            &k4.counts
                .keys()
                .map(|&(a, b)| (a.0, b.0, 2.0))
                .collect::<Vec<_>>(),
        );
        assert_eq!(mse(&exact_table, &k4).unwrap(), 0.0);

        let single = exact_local_counts(&EdgeStream::from_pairs([(1, 2)]));
        let mut one = single.clone();
        one.counts.insert((v(1), v(2)), 1);
        assert_eq!(mse(&table(Method::Aps, &[(1, 2, 3.0)]), &one).unwrap(), 4.0);

        let empty = exact_local_counts(&EdgeStream::from_pairs([]));
        assert!(matches!(mse(&exact_table, &empty), Err(Error::EmptyGraph)));
    }

    #[test]
    fn mse_counts_missing_edges_as_zero() {
        let k4 = exact_local_counts(&synth::complete_graph(4));
        let partial = table(Method::Triest, &[(1, 2, 2.0)]);
        assert_eq!(mse(&partial, &k4).unwrap(), 5.0 * 4.0 / 6.0);
    }

    #[test]
    fn k4_full_sample_scores_zero() {
        let s = synth::complete_graph(4);
        let exact = exact_local_counts(&s);
        for m in Method::ALL {
            let t = RunSpec::new(m, 6).run(&s, 1).unwrap();
            assert_eq!(mse(&t, &exact).unwrap(), 0.0);
            let a = MotifAdjacency::from_exact(&exact);
            assert!(
                relative_spectral_norm(&a, &MotifAdjacency::from_estimates(&t)).unwrap() < 1e-12
            );
        }
    }

    #[test]
    fn spectral_examples() {
        let mut a = MotifAdjacency::new();
        a.set(v(1), v(2), 2.0);
        let mut half = MotifAdjacency::new();
        half.set(v(1), v(2), 1.0);
        assert!((relative_spectral_norm(&a, &half).unwrap() - 0.5).abs() < 1e-12);
        assert!((relative_spectral_norm(&a, &MotifAdjacency::new()).unwrap() - 1.0).abs() < 1e-12);
        assert!(relative_spectral_norm(&a, &a).unwrap() < 1e-6);
        assert!(matches!(
            relative_spectral_norm(&MotifAdjacency::new(), &a),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn all_ones_orthogonal_start() {
        // Blocks with eigenvalues {1, -1} and {-1, 1}; the all-ones start
        // lies in the null space.
        let mut a = MotifAdjacency::new();
        a.set(v(1), v(2), 1.0);
        a.set(v(3), v(4), -1.0);
        assert!((a.spectral_norm().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn averaging() {
        let one = table(Method::Aps, &[(1, 2, 4.0), (2, 3, 6.0)]);
        assert_eq!(
            average_adjacency(std::slice::from_ref(&one)),
            MotifAdjacency::from_estimates(&one)
        );
        let other = table(Method::Aps, &[(3, 4, 4.0)]);
        let avg = average_adjacency(&[one, other]);
        assert_eq!(avg.get(v(1), v(2)), 2.0);
        assert_eq!(avg.get(v(2), v(3)), 3.0);
        assert_eq!(avg.get(v(4), v(3)), 2.0);
    }

    #[test]
    fn full_sample_average_is_exact() {
        let s = synth::erdos_renyi(25, 0.3, 2);
        let exact = exact_local_counts(&s);
        let runs: Vec<_> = (0..10)
            .map(|seed| RunSpec::new(Method::ApsJs, s.len()).run(&s, seed).unwrap())
            .collect();
        assert_eq!(average_adjacency(&runs), MotifAdjacency::from_exact(&exact));
    }

    #[test]
    fn topk() {
        let s = synth::complete_graph(4);
        let exact = exact_local_counts(&s);
        let est = table(Method::Aps, &[(1, 2, 1.5)]);
        let curve = topk_curve(&est, &exact, 100);
        assert_eq!(curve.len(), 6);
        assert!(curve.iter().all(|p| p.truth == 2.0));
        assert_eq!(curve[0].estimate, 1.5);
        assert!(curve[1..].iter().all(|p| p.estimate == 0.0));
        assert_eq!(topk_curve(&est, &exact, 2).len(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn power_iteration_matches_dense_reference(
            n in 2usize..30,
            vals in proptest::collection::vec(-10.0f64..10.0, 30 * 30),
            density in 0.1f64..1.0,
        ) {
            let mut dense = vec![vec![0.0; n]; n];
            let mut sparse = MotifAdjacency::new();
            for i in 0..n {
                for j in i + 1..n {
                    let x = vals[i * 30 + j];
                    // Keep roughly `density` of the entries.
                    if (vals[j * 30 + i] + 10.0) / 20.0 < density {
                        dense[i][j] = x;
                        dense[j][i] = x;
                        sparse.set(v(i as u64), v(j as u64), x);
                    }
                }
            }
            let reference = jacobi_eigenvalues(dense).into_iter().map(f64::abs).fold(0.0, f64::max);
            let got = sparse.spectral_norm().unwrap();
            prop_assert!((got - reference).abs() <= 1e-6 * reference.max(1.0), "{} vs {}", got, reference);
        }
    }

    #[test]
    fn mse_is_order_invariant() {
        let s = synth::erdos_renyi(30, 0.3, 7);
        let exact = exact_local_counts(&s);
        let mut t = RunSpec::new(Method::Aps, 60).run(&s, 3).unwrap();
        let before = mse(&t, &exact).unwrap();
        t.rows.reverse();
        assert_eq!(mse(&t, &exact).unwrap(), before);
    }
}

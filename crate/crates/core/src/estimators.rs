//! Estimator arithmetic for local triangle counts.
//!
//! When an arriving edge `k` closes a triangle `(i, j, k)` against resident
//! edges `i` and `j` (ordered by arrival), the triangle's indicator is
//! estimated by `1 / P` with `P = p_i * p_j`, the joint inclusion probability
//! of the two resident edges just before `k` arrived. Every edge of the
//! triangle adds that increment to its count estimate.
//!
//! Variances and weight covariances of the count estimate are sums over pairs
//! of triangles sharing the edge. Pairs completed at the same step, pairs that
//! are edge-disjoint, and pairs in which the shared edge was the closing edge
//! of the older triangle all contribute zero. The remaining pairs share a
//! resident edge `x`, and their contributions factor into the current `1 / P`
//! times a running sum kept per edge:
//!
//! * `U(x) = sum over older triangles L of (1/p_x - 1) / p_x'` (with `x'` the
//!   other resident edge of `L`, probabilities as of `L`'s completion),
//! * `D(x) = sum over older triangles L of (1 - p_x)`.
//!
//! This keeps the per-triangle update O(1). [`covariance_pair_estimator`] and
//! [`weight_covariance_estimator`] give the same quantities pair by pair and
//! serve as the reference for the incremental path.

use crate::error::{Error, Result};
use crate::motif_detect::Triangle;

/// Running per-edge sums driven by triangle completions.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulators {
    pub n_hat: f64,
    /// Estimate of Var(n_hat).
    pub var: f64,
    /// Estimate of Cov(n_hat, w).
    pub cov: f64,
    pub u_sum: f64,
    pub d_sum: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleIncrement {
    /// Joint inclusion probability of the two resident edges.
    pub joint: f64,
    /// `1 / joint`, the increment added to each edge's count estimate.
    pub inverse: f64,
}

impl TriangleIncrement {
    pub fn new(p_first: f64, p_second: f64) -> Result<Self> {
        check_probability(p_first)?;
        check_probability(p_second)?;
        let joint = p_first * p_second;
        if !(joint > 0.0 && joint <= 1.0) {
            return Err(Error::invariant(format!(
                "joint probability {joint} outside (0, 1]"
            )));
        }
        Ok(TriangleIncrement {
            joint,
            inverse: 1.0 / joint,
        })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::invariant(format!("probability {p} outside (0, 1]")))
    }
}

/// Applies one triangle's contribution to the accumulators of its three
/// edges. `p_first` and `p_second` are the resident edges' probabilities,
/// already refreshed against the current threshold; the closing edge has
/// probability one.
pub fn apply_triangle_updates(
    first: &mut Accumulators,
    p_first: f64,
    second: &mut Accumulators,
    p_second: f64,
    closing: &mut Accumulators,
) -> Result<TriangleIncrement> {
    let inc = TriangleIncrement::new(p_first, p_second)?;
    let inv = inc.inverse;
    let var_inc = (inv - 1.0) * inv;
    let cov_inc = inv - 1.0;

    for acc in [&mut *first, &mut *second, &mut *closing] {
        acc.n_hat += inv;
        acc.var += var_inc;
        acc.cov += cov_inc;
    }

    for (acc, p_self, p_other) in [(first, p_first, p_second), (second, p_second, p_first)] {
        acc.var += 2.0 * acc.u_sum * inv;
        acc.cov += acc.u_sum + acc.d_sum * inv;
        acc.u_sum += (1.0 / p_self - 1.0) / p_other;
        acc.d_sum += 1.0 - p_self;
        debug_assert!(
            acc.cov >= -1e-9 * acc.n_hat.abs().max(1.0),
            "cov {}",
            acc.cov
        );
    }
    Ok(inc)
}

/// A triangle as it was detected, with the probabilities used for its
/// increment. Completion time is the closing edge's arrival index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompletedTriangle {
    pub triangle: Triangle,
    pub p_first: f64,
    pub p_second: f64,
}

impl CompletedTriangle {
    pub fn time(&self) -> u64 {
        self.triangle.closing.0
    }

    pub fn inverse(&self) -> f64 {
        1.0 / (self.p_first * self.p_second)
    }

    fn same_as(&self, other: &CompletedTriangle) -> bool {
        self.triangle.edges() == other.triangle.edges()
    }

    fn shared_edges(&self, other: &CompletedTriangle) -> Vec<crate::EdgeId> {
        let theirs = other.triangle.edges();
        self.triangle
            .edges()
            .into_iter()
            .filter(|e| theirs.contains(e))
            .collect()
    }

    /// Probability recorded for resident edge `e` and for the other resident
    /// edge, or `None` when `e` is the closing edge.
    fn resident_pair(&self, e: crate::EdgeId) -> Option<(f64, f64)> {
        if e == self.triangle.first {
            Some((self.p_first, self.p_second))
        } else if e == self.triangle.second {
            Some((self.p_second, self.p_first))
        } else {
            None
        }
    }

    fn is_resident(&self, e: crate::EdgeId) -> bool {
        e == self.triangle.first || e == self.triangle.second
    }
}

/// The single edge two distinct triangles share, or `None` when disjoint.
fn single_shared(a: &CompletedTriangle, b: &CompletedTriangle) -> Result<Option<crate::EdgeId>> {
    let shared = a.shared_edges(b);
    match shared.len() {
        0 => Ok(None),
        1 => Ok(Some(shared[0])),
        n => Err(Error::invariant(format!(
            "distinct triangles share {n} edges"
        ))),
    }
}

/// Unbiased estimate of the covariance between the inverse-probability
/// indicator estimates of two triangles, `later` completed no earlier than
/// `earlier`.
pub fn covariance_pair_estimator(
    later: &CompletedTriangle,
    earlier: &CompletedTriangle,
) -> Result<f64> {
    if later.time() < earlier.time() {
        return Err(Error::invariant("covariance pair given out of time order"));
    }
    if later.same_as(earlier) {
        let s = later.inverse();
        return Ok(s * (s - 1.0));
    }
    let Some(x) = single_shared(later, earlier)? else {
        return Ok(0.0);
    };
    if later.time() == earlier.time() {
        // Only the closing edge can be shared at the same step.
        return Ok(0.0);
    }
    if !later.is_resident(x) {
        return Err(Error::invariant(
            "later triangle's closing edge appears earlier",
        ));
    }
    match earlier.resident_pair(x) {
        None => Ok(0.0),
        Some((p_x, p_other)) => Ok(later.inverse() * (1.0 / p_x - 1.0) / p_other),
    }
}

/// Unbiased estimate of the covariance between the inverse-probability
/// estimate of `estimate` and the sampled-indicator of `indicator`, in
/// either time order.
pub fn weight_covariance_estimator(
    estimate: &CompletedTriangle,
    indicator: &CompletedTriangle,
) -> Result<f64> {
    if estimate.same_as(indicator) {
        return Ok(estimate.inverse() - 1.0);
    }
    let Some(x) = single_shared(estimate, indicator)? else {
        return Ok(0.0);
    };
    match estimate.time().cmp(&indicator.time()) {
        std::cmp::Ordering::Equal => Ok(0.0),
        std::cmp::Ordering::Greater => {
            if !estimate.is_resident(x) {
                return Err(Error::invariant(
                    "later triangle's closing edge appears earlier",
                ));
            }
            match indicator.resident_pair(x) {
                None => Ok(0.0),
                Some((p_x, _)) => Ok(estimate.inverse() * (1.0 - p_x)),
            }
        }
        std::cmp::Ordering::Less => {
            if !indicator.is_resident(x) {
                return Err(Error::invariant(
                    "later triangle's closing edge appears earlier",
                ));
            }
            match estimate.resident_pair(x) {
                None => Ok(0.0),
                Some((p_x, p_other)) => Ok((1.0 / p_x - 1.0) / p_other),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShrinkageInput {
    pub n_hat: f64,
    pub w: f64,
    pub var_n: f64,
    pub cov_nw: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShrinkageOutput {
    pub lambda: f64,
    pub eta: f64,
}

/// Convex combination `eta = lambda * n_hat + (1 - lambda) * w` with the
/// plug-in MSE-optimal `lambda = 1 - (Var - Cov) / (n_hat - w)^2`, truncated
/// to [0, 1].
pub fn shrinkage(input: ShrinkageInput) -> ShrinkageOutput {
    let ShrinkageInput {
        n_hat,
        w,
        var_n,
        cov_nw,
    } = input;
    let diff = n_hat - w;
    let denom = diff * diff;
    let lambda = if denom == 0.0 {
        1.0
    } else {
        let raw = 1.0 - (var_n - cov_nw) / denom;
        if raw.is_nan() {
            1.0
        } else {
            raw.clamp(0.0, 1.0)
        }
    };
    let eta = if lambda == 1.0 {
        n_hat
    } else if lambda == 0.0 {
        w
    } else {
        (w + lambda * diff).clamp(n_hat.min(w), n_hat.max(w))
    };
    ShrinkageOutput { lambda, eta }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::graph_stream::{EdgeId, VertexId};

    fn tri(
        first: u64,
        second: u64,
        closing: u64,
        p_first: f64,
        p_second: f64,
    ) -> CompletedTriangle {
        CompletedTriangle {
            triangle: Triangle {
                first: EdgeId(first),
                second: EdgeId(second),
                closing: EdgeId(closing),
                apex: VertexId(0),
            },
            p_first,
            p_second,
        }
    }

    #[test]
    fn full_probability_is_degenerate() {
        let (mut a, mut b, mut c) = Default::default();
        let inc = apply_triangle_updates(&mut a, 1.0, &mut b, 1.0, &mut c).unwrap();
        assert_eq!(inc.inverse, 1.0);
        for acc in [a, b, c] {
            assert_eq!(acc.n_hat, 1.0);
            assert_eq!(acc.var, 0.0);
            assert_eq!(acc.cov, 0.0);
            assert_eq!(acc.u_sum, 0.0);
            assert_eq!(acc.d_sum, 0.0);
        }
    }

    #[test]
    fn half_probabilities() {
        let (mut a, mut b, mut c) = Default::default();
        apply_triangle_updates(&mut a, 0.5, &mut b, 0.5, &mut c).unwrap();
        for acc in [a, b, c] {
            assert_eq!(acc.n_hat, 4.0);
            assert_eq!(acc.var, 12.0);
            assert_eq!(acc.cov, 3.0);
        }
        assert_eq!((a.u_sum, a.d_sum), (2.0, 0.5));
        assert_eq!((b.u_sum, b.d_sum), (2.0, 0.5));
        assert_eq!((c.u_sum, c.d_sum), (0.0, 0.0));
    }

    #[test]
    fn cross_terms_use_prior_sums() {
        let mut a = Accumulators {
            u_sum: 2.0,
            d_sum: 0.5,
            ..Default::default()
        };
        let (mut b, mut c) = Default::default();
        apply_triangle_updates(&mut a, 0.5, &mut b, 1.0, &mut c).unwrap();
        // inv = 2: base var 2, base cov 1, cross var 2*2*2 = 8, cross cov 2 + 0.5*2 = 3.
        assert_eq!(a.var, 10.0);
        assert_eq!(a.cov, 4.0);
        assert_eq!(a.u_sum, 2.0 + 1.0);
        assert_eq!(a.d_sum, 1.0);
        assert_eq!(b.u_sum, 0.0);
        assert_eq!(b.d_sum, 0.0);
    }

    #[test]
    fn invalid_probability_is_rejected() {
        let (mut a, mut b, mut c) = Default::default();
        assert!(apply_triangle_updates(&mut a, 0.0, &mut b, 1.0, &mut c).is_err());
        assert!(apply_triangle_updates(&mut a, 1.5, &mut b, 0.5, &mut c).is_err());
        assert!(apply_triangle_updates(&mut a, f64::NAN, &mut b, 0.5, &mut c).is_err());
    }

    #[test]
    fn shrinkage_examples() {
        let out = shrinkage(ShrinkageInput {
            n_hat: 5.0,
            w: 3.0,
            var_n: 3.0,
            cov_nw: 1.0,
        });
        assert_eq!(
            out,
            ShrinkageOutput {
                lambda: 0.5,
                eta: 4.0
            }
        );

        let out = shrinkage(ShrinkageInput {
            n_hat: 7.0,
            w: 7.0,
            var_n: 9.0,
            cov_nw: 0.0,
        });
        assert_eq!(
            out,
            ShrinkageOutput {
                lambda: 1.0,
                eta: 7.0
            }
        );

        let out = shrinkage(ShrinkageInput {
            n_hat: 4.0,
            w: 3.0,
            var_n: 10.0,
            cov_nw: 0.0,
        });
        assert_eq!(
            out,
            ShrinkageOutput {
                lambda: 0.0,
                eta: 3.0
            }
        );
    }

    #[test]
    fn pair_covariance_cases() {
        let j = tri(1, 2, 9, 0.5, 0.8);
        // Disjoint.
        assert_eq!(
            covariance_pair_estimator(&j, &tri(3, 4, 5, 0.5, 0.5)).unwrap(),
            0.0
        );
        // Same closing edge, same step.
        assert_eq!(
            covariance_pair_estimator(&j, &tri(3, 4, 9, 0.5, 0.5)).unwrap(),
            0.0
        );
        // Identical.
        let s = 1.0 / 0.4;
        assert_eq!(covariance_pair_estimator(&j, &j).unwrap(), s * (s - 1.0));
        // Shared resident edge 1; in L it has p = 0.25, partner p = 0.5.
        let l = tri(1, 3, 6, 0.25, 0.5);
        let v = covariance_pair_estimator(&j, &l).unwrap();
        assert!((v - s * 3.0 / 0.5).abs() < 1e-12);
        // Shared edge was L's closing edge.
        let l = tri(3, 4, 2, 0.5, 0.5);
        assert_eq!(covariance_pair_estimator(&j, &l).unwrap(), 0.0);
        // Out of order.
        assert!(covariance_pair_estimator(&tri(1, 3, 6, 0.5, 0.5), &j).is_err());
    }

    #[test]
    fn weight_covariance_cases() {
        let j = tri(1, 2, 9, 0.5, 0.5);
        assert_eq!(
            weight_covariance_estimator(&j, &tri(3, 4, 5, 0.5, 0.5)).unwrap(),
            0.0
        );
        assert_eq!(weight_covariance_estimator(&j, &j).unwrap(), 3.0);
        assert_eq!(
            weight_covariance_estimator(&j, &tri(3, 4, 9, 0.1, 0.1)).unwrap(),
            0.0
        );
        let l = tri(1, 3, 6, 0.25, 0.5);
        // Forward: (1/P_J)(1 - p_{x,s}) = 4 * 0.75.
        assert_eq!(weight_covariance_estimator(&j, &l).unwrap(), 3.0);
        // Reverse: (1/p_{x,s} - 1)/p_{x',s} = 3 / 0.5.
        assert_eq!(weight_covariance_estimator(&l, &j).unwrap(), 6.0);
        // Shared edge closed the older triangle.
        let l = tri(3, 4, 2, 0.5, 0.5);
        assert_eq!(weight_covariance_estimator(&j, &l).unwrap(), 0.0);
        assert_eq!(weight_covariance_estimator(&l, &j).unwrap(), 0.0);
    }

    #[test]
    fn same_triangle_weight_value() {
        let j = tri(1, 2, 3, 0.5, 0.5);
        assert_eq!(weight_covariance_estimator(&j, &j).unwrap(), 3.0);
    }

    #[test]
    fn shrinkage_convexity_fuzz() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100_000 {
            let input = ShrinkageInput {
                n_hat: rng.gen_range(0.0..1e4),
                w: rng.gen_range(1.0..1e3),
                var_n: rng.gen_range(0.0..1e6),
                cov_nw: rng.gen_range(-1e3..1e5),
            };
            let out = shrinkage(input);
            assert!((0.0..=1.0).contains(&out.lambda));
            assert!(out.eta >= input.n_hat.min(input.w) && out.eta <= input.n_hat.max(input.w));
        }
    }

    proptest! {
        #[test]
        fn shrinkage_stays_between(
            n_hat in -1e6f64..1e6,
            w in -1e6f64..1e6,
            var_n in 0f64..1e12,
            cov_nw in -1e12f64..1e12,
        ) {
            let out = shrinkage(ShrinkageInput { n_hat, w, var_n, cov_nw });
            prop_assert!((0.0..=1.0).contains(&out.lambda));
            prop_assert!(out.eta >= n_hat.min(w) && out.eta <= n_hat.max(w));
        }
    }
}
